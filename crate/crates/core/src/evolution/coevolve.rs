//! Strategies and payoffs evolving together.
//!
//! Strategy updates follow the ordinary well-mixed process. Independently,
//! each step triggers a payoff event with probability `event_rate`: one of
//! R or T (chosen uniformly) is moved by its drift plus `U(-delta, delta)`,
//! and the proposal is kept only if the Prisoner's Dilemma orderings still
//! hold.
//! Payoff events draw from their own stream, so a kernel that never moves
//! the payoffs reproduces [`evolve_trajectory`](super::evolve_trajectory)
//! exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::population::{step, EvolutionParams, PayoffMatrix, PopulationState};
use crate::error::{Error, Result};
use crate::game::{Game2x2, GameClass, Quadruple};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffKernel {
    /// Half-width of the uniform perturbation.
    pub delta: f64,
    /// Per-step probability of a payoff event.
    pub event_rate: f64,
    /// Deterministic shift added to proposals that move R.
    pub reward_drift: f64,
    /// Deterministic shift added to proposals that move T.
    pub temptation_drift: f64,
}

impl PayoffKernel {
    /// True when no proposal can ever change the game.
    pub fn is_frozen(&self) -> bool {
        self.event_rate == 0.0
            || (self.delta == 0.0 && self.reward_drift == 0.0 && self.temptation_drift == 0.0)
    }
}

impl Default for PayoffKernel {
    fn default() -> Self {
        PayoffKernel {
            delta: 0.1,
            event_rate: 0.001,
            reward_drift: 0.0,
            temptation_drift: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoevolveParams {
    pub evolution: EvolutionParams,
    pub kernel: PayoffKernel,
}

impl CoevolveParams {
    pub fn validate(&self) -> Result<()> {
        self.evolution.validate()?;
        let k = &self.kernel;
        if !(k.delta >= 0.0 && k.delta.is_finite()) {
            return Err(Error::invalid("delta", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&k.event_rate) {
            return Err(Error::invalid("event_rate", "must lie in [0, 1]"));
        }
        if !k.reward_drift.is_finite() {
            return Err(Error::invalid("reward_drift", "must be finite"));
        }
        if !k.temptation_drift.is_finite() {
            return Err(Error::invalid("temptation_drift", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoevolveTrajectory {
    pub names: Vec<String>,
    pub steps: Vec<u64>,
    pub counts: Vec<Vec<u64>>,
    pub reward: Vec<f64>,
    pub temptation: Vec<f64>,
    /// Mean long-run cooperation rate in a random encounter.
    pub cooperation: Vec<f64>,
    pub accepted_events: u64,
    pub rejected_events: u64,
}

impl CoevolveTrajectory {
    pub fn final_quartile_cooperation(&self) -> f64 {
        let start = self.cooperation.len() * 3 / 4;
        let tail = &self.cooperation[start..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Proposes a perturbed game; `None` when the PD orderings would break.
pub fn propose(game: &Game2x2, kernel: &PayoffKernel, rng: &mut StreamRng) -> Result<Option<Game2x2>> {
    let q = game.quadruple()?;
    let change_reward = rng.gen::<bool>();
    let drift = if change_reward {
        kernel.reward_drift
    } else {
        kernel.temptation_drift
    };
    let shift = drift
        + if kernel.delta > 0.0 {
            rng.gen_range(-kernel.delta..=kernel.delta)
        } else {
            0.0
        };
    let proposal = if change_reward {
        Quadruple { r: q.r + shift, ..q }
    } else {
        Quadruple { t: q.t + shift, ..q }
    };
    Ok(
        Game2x2::symmetric(game.name(), proposal, GameClass::PrisonersDilemma)
            .ok()
            .map(|g| g.with_actions(["C", "D"], ["C", "D"])),
    )
}

fn cooperation_level(state: &PopulationState, matrix: &PayoffMatrix) -> f64 {
    let counts = state.counts();
    let n = state.size() as f64;
    let mut total = 0.0;
    for (i, &ci) in counts.iter().enumerate() {
        for (j, &cj) in counts.iter().enumerate() {
            let pairs = ci as f64 * if i == j { cj as f64 - 1.0 } else { cj as f64 };
            if pairs > 0.0 {
                total += pairs * matrix.cooperation(i, j).unwrap_or(0.0);
            }
        }
    }
    total / (n * (n - 1.0))
}

/// Runs the joint process. `matrix` must come from
/// [`PayoffMatrix::from_roster`] so it can be re-priced after payoff events.
pub fn coevolve(
    initial: &PopulationState,
    game: &Game2x2,
    matrix: &PayoffMatrix,
    params: &CoevolveParams,
    strategy_rng: &mut StreamRng,
    payoff_rng: &mut StreamRng,
) -> Result<CoevolveTrajectory> {
    params.validate()?;
    game.quadruple()?.check(GameClass::PrisonersDilemma)?;
    if matrix.cooperation(0, 0).is_none() {
        return Err(Error::invalid("matrix", "coevolution needs an occupancy-backed matrix"));
    }
    if initial.counts().len() != matrix.len() {
        return Err(Error::invalid("initial", "counts do not match the roster"));
    }
    let evo = &params.evolution;
    let mut game = game.clone();
    let mut matrix = matrix.clone();
    matrix.reprice(&game)?;
    let mut state = initial.clone();

    let q = game.quadruple()?;
    let mut traj = CoevolveTrajectory {
        names: matrix.names().to_vec(),
        steps: vec![0],
        counts: vec![state.counts().to_vec()],
        reward: vec![q.r],
        temptation: vec![q.t],
        cooperation: vec![cooperation_level(&state, &matrix)],
        accepted_events: 0,
        rejected_events: 0,
    };
    for t in 1..=evo.generations {
        step(&mut state, evo, &matrix, strategy_rng);
        if params.kernel.event_rate > 0.0 && payoff_rng.gen::<f64>() < params.kernel.event_rate {
            match propose(&game, &params.kernel, payoff_rng)? {
                Some(next) => {
                    if next != game {
                        game = next;
                        matrix.reprice(&game)?;
                    }
                    traj.accepted_events += 1;
                }
                None => traj.rejected_events += 1,
            }
        }
        if t % evo.record_every == 0 || t == evo.generations {
            let q = game.quadruple()?;
            traj.steps.push(t);
            traj.counts.push(state.counts().to_vec());
            traj.reward.push(q.r);
            traj.temptation.push(q.t);
            traj.cooperation.push(cooperation_level(&state, &matrix));
        }
    }
    Ok(traj)
}
