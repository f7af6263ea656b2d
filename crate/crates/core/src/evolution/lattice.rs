//! Spatial games on an L×L periodic square lattice.
//!
//! Each site holds one roster strategy and earns the sum of its exact
//! pairwise payoffs against its neighbours. An elementary update picks a
//! random site and a random neighbour; the site imitates the neighbour with
//! the Fermi probability of their payoff difference. One epoch is L²
//! elementary updates (asynchronous) or one simultaneous sweep.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::population::{fermi, PayoffMatrix};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neighborhood {
    VonNeumann4,
    Moore8,
}

impl Neighborhood {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Neighborhood::VonNeumann4 => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
            Neighborhood::Moore8 => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateRule {
    Asynchronous,
    Synchronous,
}

pub const MIN_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeState {
    side: usize,
    /// Row-major roster indices.
    sites: Vec<u8>,
}

impl LatticeState {
    pub fn new(side: usize, sites: Vec<u8>) -> Result<Self> {
        if side < MIN_SIDE {
            return Err(Error::invalid("side", format!("must be at least {MIN_SIDE}")));
        }
        if sites.len() != side * side {
            return Err(Error::invalid("sites", "need exactly side² sites"));
        }
        Ok(LatticeState { side, sites })
    }

    pub fn filled(side: usize, strategy: u8) -> Result<Self> {
        Self::new(side, vec![strategy; side * side])
    }

    /// Each site independently draws a strategy with the given weights.
    pub fn random(side: usize, weights: &[f64], rng: &mut StreamRng) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || weights.len() > u8::MAX as usize || !(total > 0.0) {
            return Err(Error::invalid("weights", "need positive weights for up to 255 strategies"));
        }
        let sites = (0..side * side)
            .map(|_| {
                let mut r = rng.gen::<f64>() * total;
                for (i, w) in weights.iter().enumerate() {
                    if r < *w {
                        return i as u8;
                    }
                    r -= w;
                }
                (weights.len() - 1) as u8
            })
            .collect();
        Self::new(side, sites)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.sites[row * self.side + col]
    }

    /// Fraction of sites holding a strategy flagged in `cooperative`.
    pub fn fraction(&self, cooperative: &[bool]) -> f64 {
        let n = self.sites.iter().filter(|&&s| cooperative[s as usize]).count();
        n as f64 / self.sites.len() as f64
    }

    /// Size of the largest 4-connected (periodic) cluster of flagged sites.
    pub fn largest_cluster(&self, cooperative: &[bool]) -> usize {
        let l = self.side;
        let mut seen = vec![false; l * l];
        let mut stack = Vec::new();
        let mut best = 0;
        for start in 0..l * l {
            if seen[start] || !cooperative[self.sites[start] as usize] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(s) = stack.pop() {
                size += 1;
                let (r, c) = (s / l, s % l);
                let around = [
                    ((r + l - 1) % l) * l + c,
                    ((r + 1) % l) * l + c,
                    r * l + (c + l - 1) % l,
                    r * l + (c + 1) % l,
                ];
                for t in around {
                    if !seen[t] && cooperative[self.sites[t] as usize] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            best = best.max(size);
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub neighborhood: Neighborhood,
    pub update: UpdateRule,
    /// Inverse Fermi temperature.
    pub selection_strength: f64,
    pub mutation_rate: f64,
    pub epochs: u64,
    /// Epochs at which a copy of the lattice is kept.
    pub snapshot_epochs: Vec<u64>,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams {
            neighborhood: Neighborhood::VonNeumann4,
            update: UpdateRule::Asynchronous,
            selection_strength: 10.0,
            mutation_rate: 0.0,
            epochs: 1000,
            snapshot_epochs: Vec::new(),
        }
    }
}

impl LatticeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.selection_strength >= 0.0 && self.selection_strength.is_finite()) {
            return Err(Error::invalid("selection_strength", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::invalid("mutation_rate", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u64,
    pub cooperator_fraction: f64,
    /// Largest cooperator cluster divided by L².
    pub largest_cluster: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeRun {
    /// Epoch 0 (initial state) through `epochs`.
    pub metrics: Vec<EpochMetrics>,
    pub snapshots: Vec<(u64, LatticeState)>,
    pub last: LatticeState,
}

struct Sim<'a> {
    side: usize,
    neighbors: Vec<u32>,
    degree: usize,
    payoff: Vec<f64>,
    strategies: usize,
    params: &'a LatticeParams,
}

impl Sim<'_> {
    fn site_payoff(&self, sites: &[u8], s: usize) -> f64 {
        let own = sites[s] as usize * self.strategies;
        self.neighbors[s * self.degree..(s + 1) * self.degree]
            .iter()
            .map(|&t| self.payoff[own + sites[t as usize] as usize])
            .sum()
    }

    /// New strategy for site `s` given the current configuration.
    fn decide(&self, sites: &[u8], s: usize, rng: &mut StreamRng) -> u8 {
        if self.params.mutation_rate > 0.0 && rng.gen::<f64>() < self.params.mutation_rate {
            return rng.gen_range(0..self.strategies) as u8;
        }
        let t = self.neighbors[s * self.degree + rng.gen_range(0..self.degree)] as usize;
        if sites[t] == sites[s] {
            return sites[s];
        }
        let delta = self.site_payoff(sites, t) - self.site_payoff(sites, s);
        if rng.gen::<f64>() < fermi(self.params.selection_strength, delta) {
            sites[t]
        } else {
            sites[s]
        }
    }

    fn epoch(&self, sites: &mut Vec<u8>, rng: &mut StreamRng) {
        let n = self.side * self.side;
        match self.params.update {
            UpdateRule::Asynchronous => {
                for _ in 0..n {
                    let s = rng.gen_range(0..n);
                    sites[s] = self.decide(sites, s, rng);
                }
            }
            UpdateRule::Synchronous => {
                let next: Vec<u8> = (0..n).map(|s| self.decide(sites, s, rng)).collect();
                *sites = next;
            }
        }
    }
}

/// Runs `params.epochs` epochs. `cooperative[i]` marks the roster strategies
/// counted as cooperators in the metrics.
pub fn lattice_simulate(
    lattice: &LatticeState,
    matrix: &PayoffMatrix,
    cooperative: &[bool],
    params: &LatticeParams,
    rng: &mut StreamRng,
) -> Result<LatticeRun> {
    params.validate()?;
    let k = matrix.len();
    if cooperative.len() != k {
        return Err(Error::invalid("cooperative", "one flag per roster strategy"));
    }
    if lattice.sites.iter().any(|&s| s as usize >= k) {
        return Err(Error::invalid("sites", "site strategy outside roster"));
    }
    let l = lattice.side;
    let offsets = params.neighborhood.offsets();
    let degree = offsets.len();
    let mut neighbors = Vec::with_capacity(l * l * degree);
    for r in 0..l as i64 {
        for c in 0..l as i64 {
            for (dr, dc) in offsets {
                let rr = (r + dr).rem_euclid(l as i64) as usize;
                let cc = (c + dc).rem_euclid(l as i64) as usize;
                neighbors.push((rr * l + cc) as u32);
            }
        }
    }
    let sim = Sim {
        side: l,
        neighbors,
        degree,
        payoff: (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| matrix.get(i, j))
            .collect(),
        strategies: k,
        params,
    };

    let cells = (l * l) as f64;
    let measure = |state: &LatticeState, epoch: u64| EpochMetrics {
        epoch,
        cooperator_fraction: state.fraction(cooperative),
        largest_cluster: state.largest_cluster(cooperative) as f64 / cells,
    };
    let mut state = lattice.clone();
    let mut metrics = vec![measure(&state, 0)];
    let mut snapshots = Vec::new();
    if params.snapshot_epochs.contains(&0) {
        snapshots.push((0, state.clone()));
    }
    for epoch in 1..=params.epochs {
        sim.epoch(&mut state.sites, rng);
        metrics.push(measure(&state, epoch));
        if params.snapshot_epochs.contains(&epoch) {
            snapshots.push((epoch, state.clone()));
        }
    }
    Ok(LatticeRun {
        metrics,
        snapshots,
        last: state,
    })
}
