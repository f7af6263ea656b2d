//! Well-mixed populations: pairwise-comparison (Fermi) imitation and a
//! Moran birth-death process.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{exact_distribution, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::game::Game2x2;
use crate::rng::{stream, StreamRng};
use crate::strategy::MemoryOne;

/// Exact long-run payoffs between every ordered pair of roster strategies.
///
/// Occupancy distributions do not depend on the payoff values, so they are
/// kept and the matrix can be re-priced for another game cheaply.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    names: Vec<String>,
    occupancy: Vec<Vec<OutcomeDistribution>>,
    values: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    /// Builds the matrix for `roster` in `game`; `noise` is folded into the
    /// strategies before the exact analysis.
    pub fn from_roster(roster: &[MemoryOne], game: &Game2x2, noise: f64) -> Result<Self> {
        if roster.is_empty() {
            return Err(Error::invalid("roster", "empty roster"));
        }
        let noisy: Vec<MemoryOne> = roster.iter().map(|s| s.with_noise(noise)).collect();
        let occupancy = noisy
            .iter()
            .map(|p| noisy.iter().map(|q| exact_distribution(p, q)).collect())
            .collect();
        let mut matrix = PayoffMatrix {
            names: roster.iter().map(|s| s.name().to_string()).collect(),
            occupancy,
            values: Vec::new(),
        };
        matrix.reprice(game)?;
        Ok(matrix)
    }

    /// Matrix from explicit payoff values (row strategy against column strategy).
    pub fn from_values(names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = names.len();
        if n == 0 || values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("values", "payoff matrix must be square and match names"));
        }
        Ok(PayoffMatrix {
            names,
            occupancy: Vec::new(),
            values,
        })
    }

    /// Recomputes payoff values for `game` from the stored occupancies.
    pub fn reprice(&mut self, game: &Game2x2) -> Result<()> {
        let sx = game.focal_payoffs()?;
        self.values = self
            .occupancy
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| v.0.iter().zip(&sx).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Long-run cooperation rate of `i` when matched with `j`, if known.
    pub fn cooperation(&self, i: usize, j: usize) -> Option<f64> {
        self.occupancy.get(i).map(|row| row[j].cooperation_x())
    }

    /// Restricts to the given strategies, in the given order.
    pub fn subset(&self, indices: &[usize]) -> PayoffMatrix {
        PayoffMatrix {
            names: indices.iter().map(|&i| self.names[i].clone()).collect(),
            occupancy: if self.occupancy.is_empty() {
                Vec::new()
            } else {
                indices
                    .iter()
                    .map(|&i| indices.iter().map(|&j| self.occupancy[i][j]).collect())
                    .collect()
            },
            values: indices
                .iter()
                .map(|&i| indices.iter().map(|&j| self.values[i][j]).collect())
                .collect(),
        }
    }
}

/// Strategy counts aligned with a roster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationState {
    counts: Vec<u64>,
}

impl PopulationState {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.iter().sum::<u64>() < 2 {
            return Err(Error::invalid("counts", "population needs at least two individuals"));
        }
        Ok(PopulationState { counts })
    }

    /// Everyone plays strategy `index`.
    pub fn homogeneous(strategies: usize, index: usize, size: u64) -> Result<Self> {
        let mut counts = vec![0; strategies];
        *counts
            .get_mut(index)
            .ok_or_else(|| Error::invalid("index", "strategy outside roster"))? = size;
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn size(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Strategy of the individual at position `r` in count order.
    fn strategy_at(&self, mut r: u64, skip: Option<usize>) -> usize {
        for (i, &c) in self.counts.iter().enumerate() {
            let c = if Some(i) == skip { c - 1 } else { c };
            if r < c {
                return i;
            }
            r -= c;
        }
        unreachable!("index within population size")
    }

    fn switch(&mut self, from: usize, to: usize) {
        self.counts[from] -= 1;
        self.counts[to] += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Process {
    PairwiseFermi,
    Moran,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    /// Inverse temperature of the Fermi rule; 0 is neutral drift.
    pub selection_strength: f64,
    pub mutation_rate: f64,
    /// Number of elementary update steps.
    pub generations: u64,
    pub seed: u64,
    pub process: Process,
    pub record_every: u64,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        EvolutionParams {
            selection_strength: 1.0,
            mutation_rate: 0.01,
            generations: 100_000,
            seed: crate::rng::DEFAULT_SEED,
            process: Process::PairwiseFermi,
            record_every: 100,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.selection_strength >= 0.0 && self.selection_strength.is_finite()) {
            return Err(Error::invalid("selection_strength", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::invalid("mutation_rate", "must lie in [0, 1]"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be positive"));
        }
        Ok(())
    }
}

/// Imitation probability `1 / (1 + exp(-beta * delta))`.
pub fn fermi(beta: f64, delta: f64) -> f64 {
    1.0 / (1.0 + (-beta * delta).exp())
}

/// Mean payoff of one individual playing `strategy` against everybody else.
/// The strategy must be present in the population.
pub fn expected_payoff(strategy: usize, state: &PopulationState, matrix: &PayoffMatrix) -> f64 {
    let n = state.size();
    debug_assert!(state.counts[strategy] > 0);
    let total: f64 = state
        .counts
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let others = if j == strategy { c - 1 } else { c };
            others as f64 * matrix.get(strategy, j)
        })
        .sum();
    total / (n - 1) as f64
}

/// One pairwise-comparison update: a random focal individual either mutates
/// (probability `mutation_rate`) or imitates a random other individual with
/// the Fermi probability of their payoff difference.
pub fn fermi_step(
    state: &mut PopulationState,
    params: &EvolutionParams,
    matrix: &PayoffMatrix,
    rng: &mut StreamRng,
) {
    let n = state.size();
    let focal = state.strategy_at(rng.gen_range(0..n), None);
    if params.mutation_rate > 0.0 && rng.gen::<f64>() < params.mutation_rate {
        let to = rng.gen_range(0..state.counts.len());
        state.switch(focal, to);
        return;
    }
    let model = state.strategy_at(rng.gen_range(0..n - 1), Some(focal));
    if model == focal {
        return;
    }
    let delta = expected_payoff(model, state, matrix) - expected_payoff(focal, state, matrix);
    if rng.gen::<f64>() < fermi(params.selection_strength, delta) {
        state.switch(focal, model);
    }
}

/// One Moran birth-death event with fitness `exp(beta * payoff)`.
pub fn moran_step(
    state: &mut PopulationState,
    params: &EvolutionParams,
    matrix: &PayoffMatrix,
    rng: &mut StreamRng,
) {
    let k = state.counts.len();
    let weights: Vec<f64> = (0..k)
        .map(|i| {
            if state.counts[i] == 0 {
                0.0
            } else {
                let pi = expected_payoff(i, state, matrix);
                state.counts[i] as f64 * (params.selection_strength * pi).exp()
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    let mut parent = k - 1;
    for (i, w) in weights.iter().enumerate() {
        if r < *w {
            parent = i;
            break;
        }
        r -= w;
    }
    let child = if params.mutation_rate > 0.0 && rng.gen::<f64>() < params.mutation_rate {
        rng.gen_range(0..k)
    } else {
        parent
    };
    let dead = state.strategy_at(rng.gen_range(0..state.size()), None);
    state.switch(dead, child);
}

/// Abundances recorded along one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub steps: Vec<u64>,
    pub counts: Vec<Vec<u64>>,
}

impl Trajectory {
    pub fn series(&self, strategy: usize) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().map(move |c| c[strategy])
    }

    /// Mean count over the last quarter of the recorded points.
    pub fn final_quartile_mean(&self, strategy: usize) -> f64 {
        let start = self.counts.len() * 3 / 4;
        let tail = &self.counts[start..];
        tail.iter().map(|c| c[strategy] as f64).sum::<f64>() / tail.len() as f64
    }

    /// Step of the first maximum of the strategy's count.
    pub fn peak_step(&self, strategy: usize) -> u64 {
        let mut best = (0, self.steps[0]);
        for (c, &s) in self.series(strategy).zip(&self.steps) {
            if c > best.0 {
                best = (c, s);
            }
        }
        best.1
    }

    pub fn last(&self) -> &[u64] {
        self.counts.last().expect("trajectory records the initial state")
    }
}

pub(crate) fn step(
    state: &mut PopulationState,
    params: &EvolutionParams,
    matrix: &PayoffMatrix,
    rng: &mut StreamRng,
) {
    match params.process {
        Process::PairwiseFermi => fermi_step(state, params, matrix, rng),
        Process::Moran => moran_step(state, params, matrix, rng),
    }
}

/// Runs `params.generations` steps from `initial`, recording every
/// `record_every` steps and at the end.
pub fn evolve_trajectory(
    initial: &PopulationState,
    params: &EvolutionParams,
    matrix: &PayoffMatrix,
    rng: &mut StreamRng,
) -> Result<Trajectory> {
    params.validate()?;
    if initial.counts.len() != matrix.len() {
        return Err(Error::invalid("initial", "counts do not match the roster"));
    }
    let mut state = initial.clone();
    let mut traj = Trajectory {
        names: matrix.names().to_vec(),
        steps: vec![0],
        counts: vec![state.counts.clone()],
    };
    for t in 1..=params.generations {
        step(&mut state, params, matrix, rng);
        if t % params.record_every == 0 || t == params.generations {
            traj.steps.push(t);
            traj.counts.push(state.counts.clone());
        }
    }
    Ok(traj)
}

/// Independent replicates; replicate `r` uses stream `(seed, 0, r)`.
pub fn evolve_ensemble(
    initial: &PopulationState,
    params: &EvolutionParams,
    matrix: &PayoffMatrix,
    replicates: u64,
) -> Result<Vec<Trajectory>> {
    (0..replicates)
        .into_par_iter()
        .map(|r| evolve_trajectory(initial, params, matrix, &mut stream(params.seed, 0, r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::classic;

    fn pd_matrix(names: &[&str]) -> PayoffMatrix {
        let g = Game2x2::prisoners_dilemma();
        let roster: Vec<MemoryOne> = names.iter().map(|n| classic(n, &g).unwrap()).collect();
        PayoffMatrix::from_roster(&roster, &g, 0.0).unwrap()
    }

    #[test]
    fn homogeneous_cooperators_earn_r() {
        let m = pd_matrix(&["AllC", "AllD"]);
        let state = PopulationState::homogeneous(2, 0, 10).unwrap();
        assert_eq!(expected_payoff(0, &state, &m), 3.0);
    }

    #[test]
    fn half_and_half() {
        let m = pd_matrix(&["AllC", "AllD"]);
        let state = PopulationState::new(vec![50, 50]).unwrap();
        let expected = 3.0 * 49.0 / 99.0;
        assert!((expected_payoff(0, &state, &m) - expected).abs() < 1e-12);
        assert!((expected_payoff(1, &state, &m) - (5.0 * 50.0 + 49.0) / 99.0).abs() < 1e-12);
    }

    #[test]
    fn fermi_limits() {
        assert_eq!(fermi(0.0, 3.7), 0.5);
        assert_eq!(fermi(0.0, -100.0), 0.5);
        assert!(fermi(1e6, 0.1) > 1.0 - 1e-12);
        assert!(fermi(1e6, -0.1) < 1e-12);
    }

    #[test]
    fn homogeneous_state_absorbs_without_mutation() {
        let m = pd_matrix(&["AllC", "AllD", "TFT"]);
        let params = EvolutionParams {
            mutation_rate: 0.0,
            generations: 2_000,
            ..Default::default()
        };
        let init = PopulationState::homogeneous(3, 2, 20).unwrap();
        for process in [Process::PairwiseFermi, Process::Moran] {
            let params = EvolutionParams { process, ..params };
            let traj = evolve_trajectory(&init, &params, &m, &mut stream(1, 0, 0)).unwrap();
            assert!(traj.counts.iter().all(|c| c == &vec![0, 0, 20]));
        }
    }

    #[test]
    fn counts_conserved() {
        let m = pd_matrix(&["AllC", "AllD", "TFT", "WSLS"]);
        let mut state = PopulationState::new(vec![5, 5, 5, 5]).unwrap();
        let mut rng = stream(3, 0, 0);
        for process in [Process::PairwiseFermi, Process::Moran] {
            let params = EvolutionParams {
                process,
                mutation_rate: 0.2,
                ..Default::default()
            };
            for _ in 0..5_000 {
                step(&mut state, &params, &m, &mut rng);
                assert_eq!(state.size(), 20);
            }
        }
    }

    #[test]
    fn trajectory_bookkeeping() {
        let m = pd_matrix(&["AllC", "AllD"]);
        let params = EvolutionParams {
            generations: 1_050,
            record_every: 100,
            ..Default::default()
        };
        let init = PopulationState::new(vec![10, 10]).unwrap();
        let traj = evolve_trajectory(&init, &params, &m, &mut stream(5, 0, 0)).unwrap();
        assert_eq!(traj.steps.first(), Some(&0));
        assert_eq!(traj.steps.last(), Some(&1_050));
        assert_eq!(traj.steps.len(), 12);
        let again = evolve_trajectory(&init, &params, &m, &mut stream(5, 0, 0)).unwrap();
        assert_eq!(traj, again);
    }

    #[test]
    fn rejects_bad_params() {
        let bad = EvolutionParams {
            mutation_rate: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(PopulationState::new(vec![1]).is_err());
    }
}
