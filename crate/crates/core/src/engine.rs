//! Exact and simulated payoffs of two memory-one strategies.
//!
//! The joint chain lives on the four states (CC, CD, DC, DD) seen from
//! player X. Player Y conditions on the same state with the roles swapped,
//! so Y reads CD as DC and vice versa.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game2x2;
use crate::rng::StreamRng;
use crate::strategy::MemoryOne;

pub type TransitionMatrix = [[f64; 4]; 4];

pub const STATE_LABELS: [&str; 4] = ["CC", "CD", "DC", "DD"];

/// Y's view of X's state index.
const SWAP: [usize; 4] = [0, 2, 1, 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    pub rounds: u64,
    /// Per-move probability that an intended move is flipped.
    pub noise: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            rounds: 200,
            noise: 0.0,
            seed: crate::rng::DEFAULT_SEED,
            record_trace: false,
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::invalid("rounds", "at least one round is required"));
        }
        if !(0.0..=0.5).contains(&self.noise) {
            return Err(Error::invalid(
                "noise",
                format!("must lie in [0, 0.5], got {}", self.noise),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Unique stationary distribution of the joint chain.
    Stationary,
    /// Cycle average of a deterministic trajectory.
    Cycle,
    /// Several closed classes, weighted by absorption from the opening move.
    Decomposed,
    Simulated,
}

/// Long-run mean payoffs per round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffPair {
    pub s_x: f64,
    pub s_y: f64,
    pub method: Method,
    /// Batch-means standard errors of (s_x, s_y); simulations only.
    pub stderr: Option<(f64, f64)>,
}

impl PayoffPair {
    fn from_distribution(v: &OutcomeDistribution, game: &Game2x2, method: Method) -> Result<Self> {
        let sx = game.focal_payoffs()?;
        let sy = game.opponent_payoffs()?;
        Ok(PayoffPair {
            s_x: dot(&v.0, &sx),
            s_y: dot(&v.0, &sy),
            method,
            stderr: None,
        })
    }
}

/// Occupancy of (CC, CD, DC, DD).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution(pub [f64; 4]);

impl OutcomeDistribution {
    /// Cooperation rate of player X.
    pub fn cooperation_x(&self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn cooperation_y(&self) -> f64 {
        self.0[0] + self.0[2]
    }
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn next_state(x_coop: bool, y_coop: bool) -> usize {
    match (x_coop, y_coop) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

fn joint(px: f64, py: f64) -> [f64; 4] {
    [px * py, px * (1.0 - py), (1.0 - px) * py, (1.0 - px) * (1.0 - py)]
}

pub fn transition_matrix(p: &MemoryOne, q: &MemoryOne) -> TransitionMatrix {
    let (pp, qp) = (p.probs(), q.probs());
    std::array::from_fn(|s| joint(pp[s], qp[SWAP[s]]))
}

/// Distribution of the opening round.
pub fn initial_distribution(p: &MemoryOne, q: &MemoryOne) -> [f64; 4] {
    joint(p.initial(), q.initial())
}

/// Closed communicating classes of the support graph, each sorted, in order
/// of their smallest state.
pub fn recurrent_classes(m: &TransitionMatrix) -> Vec<Vec<usize>> {
    let mut reach = [[false; 4]; 4];
    for i in 0..4 {
        reach[i][i] = true;
        for j in 0..4 {
            if m[i][j] > 0.0 {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..4 {
        // i is recurrent iff everything it reaches can reach it back.
        let recurrent = (0..4).all(|j| !reach[i][j] || reach[j][i]);
        if recurrent && !classes.iter().any(|c| c.contains(&i)) {
            classes.push((0..4).filter(|&j| reach[i][j]).collect());
        }
    }
    classes
}

/// Stationary vector of a chain restricted to `states` (assumed closed and
/// irreducible). Solves `(M^T - I) v = 0` with one equation replaced by
/// `sum v = 1`, falling back to least squares if the system is singular.
fn solve_stationary(m: &TransitionMatrix, states: &[usize]) -> Vec<f64> {
    let n = states.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (r, &j) in states.iter().enumerate() {
        for (c, &i) in states.iter().enumerate() {
            a[(r, c)] = m[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut b = DVector::<f64>::zeros(n);
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    b[n - 1] = 1.0;
    let v = match a.clone().lu().solve(&b) {
        Some(v) if v.iter().all(|x| x.is_finite()) => v,
        _ => {
            let mut tall = DMatrix::<f64>::zeros(n + 1, n);
            for (r, &j) in states.iter().enumerate() {
                for (c, &i) in states.iter().enumerate() {
                    tall[(r, c)] = m[i][j] - if i == j { 1.0 } else { 0.0 };
                }
            }
            for c in 0..n {
                tall[(n, c)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(n + 1);
            rhs[n] = 1.0;
            tall.svd(true, true)
                .solve(&rhs, 1e-14)
                .expect("SVD with both factors computed")
        }
    };
    let mut out: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    out
}

/// The unique stationary distribution; `NotErgodic` when the chain has more
/// than one closed class.
pub fn stationary_distribution(m: &TransitionMatrix) -> Result<OutcomeDistribution> {
    let classes = recurrent_classes(m);
    if classes.len() != 1 {
        return Err(Error::NotErgodic {
            recurrent_classes: classes.len(),
        });
    }
    let class = &classes[0];
    let local = solve_stationary(m, class);
    let mut v = [0.0; 4];
    for (k, &s) in class.iter().enumerate() {
        v[s] = local[k];
    }
    Ok(OutcomeDistribution(v))
}

/// Long-run average occupancy started from `init`, valid for any chain.
pub fn long_run_distribution(m: &TransitionMatrix, init: &[f64; 4]) -> OutcomeDistribution {
    let classes = recurrent_classes(m);
    let recurrent: Vec<usize> = classes.iter().flatten().copied().collect();
    let transient: Vec<usize> = (0..4).filter(|s| !recurrent.contains(s)).collect();
    let nt = transient.len();

    // Absorption probabilities of each transient state into each class.
    let absorption: Vec<Vec<f64>> = if nt == 0 {
        vec![Vec::new(); classes.len()]
    } else {
        let mut a = DMatrix::<f64>::identity(nt, nt);
        for (r, &i) in transient.iter().enumerate() {
            for (c, &j) in transient.iter().enumerate() {
                a[(r, c)] -= m[i][j];
            }
        }
        let lu = a.lu();
        classes
            .iter()
            .map(|class| {
                let rhs = DVector::from_iterator(
                    nt,
                    transient
                        .iter()
                        .map(|&i| class.iter().map(|&j| m[i][j]).sum::<f64>()),
                );
                lu.solve(&rhs)
                    .expect("transient block of a finite chain is invertible")
                    .iter()
                    .copied()
                    .collect()
            })
            .collect()
    };

    let mut v = [0.0; 4];
    for (ci, class) in classes.iter().enumerate() {
        let mut weight: f64 = class.iter().map(|&s| init[s]).sum();
        weight += transient
            .iter()
            .enumerate()
            .map(|(k, &s)| init[s] * absorption[ci][k])
            .sum::<f64>();
        if weight == 0.0 {
            continue;
        }
        let local = solve_stationary(m, class);
        for (k, &s) in class.iter().enumerate() {
            v[s] += weight * local[k];
        }
    }
    OutcomeDistribution(v)
}

/// Payoffs from the unique stationary distribution; errors if not ergodic.
pub fn stationary_payoffs(p: &MemoryOne, q: &MemoryOne, game: &Game2x2) -> Result<PayoffPair> {
    let v = stationary_distribution(&transition_matrix(p, q))?;
    PayoffPair::from_distribution(&v, game, Method::Stationary)
}

/// Exact long-run payoffs. Uses the stationary distribution when it is
/// unique; otherwise deterministic pairs are traced to their cycle and
/// mixed pairs are decomposed over closed classes from the opening move.
pub fn exact_payoffs(p: &MemoryOne, q: &MemoryOne, game: &Game2x2) -> Result<PayoffPair> {
    match stationary_payoffs(p, q, game) {
        Err(Error::NotErgodic { .. }) if p.is_deterministic() && q.is_deterministic() => {
            cycle_payoffs(p, q, game, (p.initial() == 1.0, q.initial() == 1.0))
        }
        Err(Error::NotErgodic { .. }) => {
            let m = transition_matrix(p, q);
            let v = long_run_distribution(&m, &initial_distribution(p, q));
            PayoffPair::from_distribution(&v, game, Method::Decomposed)
        }
        other => other,
    }
}

/// Long-run occupancy matching [`exact_payoffs`].
pub fn exact_distribution(p: &MemoryOne, q: &MemoryOne) -> OutcomeDistribution {
    let m = transition_matrix(p, q);
    stationary_distribution(&m)
        .unwrap_or_else(|_| long_run_distribution(&m, &initial_distribution(p, q)))
}

/// Cycle-average payoffs of two deterministic strategies from the given
/// opening moves (`true` = cooperate).
pub fn cycle_payoffs(
    p: &MemoryOne,
    q: &MemoryOne,
    game: &Game2x2,
    initial: (bool, bool),
) -> Result<PayoffPair> {
    if !(p.is_deterministic() && q.is_deterministic()) {
        return Err(Error::invalid(
            "strategies",
            "cycle payoffs need deterministic strategies",
        ));
    }
    let (pp, qp) = (p.probs(), q.probs());
    let mut seen = [None::<usize>; 4];
    let mut path = Vec::with_capacity(5);
    let mut state = next_state(initial.0, initial.1);
    while seen[state].is_none() {
        seen[state] = Some(path.len());
        path.push(state);
        state = next_state(pp[state] == 1.0, qp[SWAP[state]] == 1.0);
    }
    let cycle = &path[seen[state].unwrap()..];
    let mut v = [0.0; 4];
    for &s in cycle {
        v[s] += 1.0 / cycle.len() as f64;
    }
    PayoffPair::from_distribution(&OutcomeDistribution(v), game, Method::Cycle)
}

/// Result of a simulated match.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedMatch {
    pub payoffs: PayoffPair,
    /// Joint state of every round, when requested.
    pub trace: Vec<usize>,
}

/// Plays `params.rounds` rounds with execution noise. The stream `rng`
/// fully determines the outcome.
pub fn simulate_match(
    p: &MemoryOne,
    q: &MemoryOne,
    game: &Game2x2,
    params: &MatchParams,
    rng: &mut StreamRng,
) -> Result<SimulatedMatch> {
    params.validate()?;
    let sx = game.focal_payoffs()?;
    let sy = game.opponent_payoffs()?;
    let (pp, qp) = (p.probs(), q.probs());
    let noise = params.noise;

    let act = |prob: f64, rng: &mut StreamRng| {
        let intended = rng.gen::<f64>() < prob;
        if noise > 0.0 && rng.gen::<f64>() < noise {
            !intended
        } else {
            intended
        }
    };

    let rounds = params.rounds;
    let batches = if rounds < 4 { 1 } else { (rounds as f64).sqrt().floor() as u64 };
    let base = rounds / batches;
    let extra = rounds % batches;

    let mut trace = Vec::new();
    let mut batch_means = Vec::with_capacity(batches as usize);
    let (mut total_x, mut total_y) = (0.0, 0.0);
    let mut state = None::<usize>;
    for b in 0..batches {
        let len = base + u64::from(b < extra);
        let (mut bx, mut by) = (0.0, 0.0);
        for _ in 0..len {
            let (px, py) = match state {
                None => (p.initial(), q.initial()),
                Some(s) => (pp[s], qp[SWAP[s]]),
            };
            let x = act(px, rng);
            let y = act(py, rng);
            let s = next_state(x, y);
            bx += sx[s];
            by += sy[s];
            if params.record_trace {
                trace.push(s);
            }
            state = Some(s);
        }
        total_x += bx;
        total_y += by;
        batch_means.push((bx / len as f64, by / len as f64));
    }

    let n = rounds as f64;
    let (mean_x, mean_y) = (total_x / n, total_y / n);
    let stderr = if batch_means.len() < 2 {
        (0.0, 0.0)
    } else {
        let k = batch_means.len() as f64;
        let mx = batch_means.iter().map(|b| b.0).sum::<f64>() / k;
        let my = batch_means.iter().map(|b| b.1).sum::<f64>() / k;
        let vx = batch_means.iter().map(|b| (b.0 - mx).powi(2)).sum::<f64>() / (k - 1.0);
        let vy = batch_means.iter().map(|b| (b.1 - my).powi(2)).sum::<f64>() / (k - 1.0);
        ((vx / k).sqrt(), (vy / k).sqrt())
    };
    Ok(SimulatedMatch {
        payoffs: PayoffPair {
            s_x: mean_x,
            s_y: mean_y,
            method: Method::Simulated,
            stderr: Some(stderr),
        },
        trace,
    })
}
