//! Fixation of a single mutant in a two-strategy population.

use serde::{Deserialize, Serialize};

use super::population::{step, EvolutionParams, PayoffMatrix, PopulationState};
use crate::error::{Error, Result};
use crate::rng::stream;

fn check(matrix: &PayoffMatrix, invader: usize, resident: usize, n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", "population needs at least two individuals"));
    }
    if invader >= matrix.len() || resident >= matrix.len() {
        return Err(Error::invalid("strategy", "index outside the payoff matrix"));
    }
    Ok(())
}

/// Exact fixation probability of one `invader` among `n - 1` residents.
///
/// Both the pairwise Fermi rule and the exponential-fitness Moran process
/// give the transition ratio `T-(k) / T+(k) = exp(-beta * (pi_I(k) - pi_R(k)))`,
/// so `rho = 1 / (1 + sum_{j<n} prod_{k<=j} T-(k)/T+(k))`.
pub fn fixation_probability(
    matrix: &PayoffMatrix,
    invader: usize,
    resident: usize,
    n: u64,
    beta: f64,
) -> Result<f64> {
    check(matrix, invader, resident, n)?;
    let (a_ii, a_ir) = (matrix.get(invader, invader), matrix.get(invader, resident));
    let (a_ri, a_rr) = (matrix.get(resident, invader), matrix.get(resident, resident));
    let denom = (n - 1) as f64;
    let mut log_prod = 0.0;
    let mut sum = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let nf = n as f64;
        let pi_i = ((kf - 1.0) * a_ii + (nf - kf) * a_ir) / denom;
        let pi_r = (kf * a_ri + (nf - kf - 1.0) * a_rr) / denom;
        log_prod -= beta * (pi_i - pi_r);
        sum += log_prod.exp();
    }
    Ok(1.0 / (1.0 + sum))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationEstimate {
    pub fixations: u64,
    pub runs: u64,
}

impl FixationEstimate {
    pub fn probability(&self) -> f64 {
        self.fixations as f64 / self.runs as f64
    }

    /// Binomial standard error evaluated at `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.runs as f64).sqrt()
    }
}

/// Monte Carlo estimate: plays the process without mutation from a single
/// invader until one strategy fixes. Run `r` uses stream `(params.seed, task, r)`.
pub fn fixation_monte_carlo(
    matrix: &PayoffMatrix,
    invader: usize,
    resident: usize,
    n: u64,
    params: &EvolutionParams,
    runs: u64,
    task: u64,
) -> Result<FixationEstimate> {
    check(matrix, invader, resident, n)?;
    if invader == resident {
        return Err(Error::invalid("invader", "must differ from the resident for simulation"));
    }
    let pair = matrix.subset(&[invader, resident]);
    let params = EvolutionParams {
        mutation_rate: 0.0,
        ..*params
    };
    let mut fixations = 0;
    for r in 0..runs {
        let mut rng = stream(params.seed, task, r);
        let mut state = PopulationState::new(vec![1, n - 1])?;
        loop {
            let k = state.counts()[0];
            if k == 0 {
                break;
            }
            if k == n {
                fixations += 1;
                break;
            }
            step(&mut state, &params, &pair, &mut rng);
        }
    }
    Ok(FixationEstimate { fixations, runs })
}
