//! Round-robin tournaments over a roster of memory-one strategies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{exact_payoffs, simulate_match, MatchParams};
use crate::error::{Error, Result};
use crate::game::Game2x2;
use crate::rng::stream;
use crate::strategy::MemoryOne;

/// Payoff gap below which an exactly scored match is a draw.
pub const EXACT_DRAW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scoring {
    /// Exact long-run payoffs of the noise-adjusted strategies.
    ExactStationary,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub roster: Vec<MemoryOne>,
    pub game: Game2x2,
    pub match_params: MatchParams,
    pub replicates: u32,
    pub include_self_play: bool,
    pub scoring: Scoring,
}

impl TournamentConfig {
    pub fn new(roster: Vec<MemoryOne>, game: Game2x2) -> Self {
        TournamentConfig {
            roster,
            game,
            match_params: MatchParams::default(),
            replicates: 50,
            include_self_play: true,
            scoring: Scoring::ExactStationary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.roster.len() < 2 {
            return Err(Error::invalid("roster", "at least two strategies required"));
        }
        for (i, s) in self.roster.iter().enumerate() {
            if self.roster[..i].iter().any(|o| o.name() == s.name()) {
                return Err(Error::invalid(
                    "roster",
                    format!("duplicate strategy name `{}`", s.name()),
                ));
            }
        }
        if self.replicates < 1 {
            return Err(Error::invalid("replicates", "at least one replicate required"));
        }
        self.match_params.validate()?;
        self.game.quadruple()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standing {
    pub name: String,
    /// Sum of mean match payoffs, averaged over replicates.
    pub total: f64,
    /// Standard deviation of the total across replicates.
    pub sd: f64,
    pub record: Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentResult {
    /// In roster order.
    pub standings: Vec<Standing>,
    /// `pairwise[i][j]`: mean per-round payoff of i against j; the diagonal
    /// is `None` without self-play.
    pub pairwise: Vec<Vec<Option<f64>>>,
    /// Roster indices by total descending, ties by name.
    pub ranking: Vec<usize>,
}

impl TournamentResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.standings.iter().position(|s| s.name == name)
    }

    pub fn standing(&self, name: &str) -> Option<&Standing> {
        self.index_of(name).map(|i| &self.standings[i])
    }

    pub fn ranked(&self) -> impl Iterator<Item = &Standing> {
        self.ranking.iter().map(|&i| &self.standings[i])
    }
}

/// Per-replicate payoffs of one pairing, plus batch standard errors of the
/// payoff gap for single-replicate simulations.
struct PairOutcome {
    i: usize,
    j: usize,
    payoffs: Vec<(f64, f64)>,
    gap_stderr: Option<f64>,
}

fn play_pair(config: &TournamentConfig, i: usize, j: usize) -> Result<PairOutcome> {
    let (p, q) = (&config.roster[i], &config.roster[j]);
    let n = config.roster.len() as u64;
    match config.scoring {
        Scoring::ExactStationary => {
            let eps = config.match_params.noise;
            let pair = exact_payoffs(&p.with_noise(eps), &q.with_noise(eps), &config.game)?;
            Ok(PairOutcome {
                i,
                j,
                payoffs: vec![(pair.s_x, pair.s_y); config.replicates as usize],
                gap_stderr: None,
            })
        }
        Scoring::Simulated => {
            let task = i as u64 * n + j as u64;
            let mut payoffs = Vec::with_capacity(config.replicates as usize);
            let mut gap_stderr = None;
            for r in 0..config.replicates {
                let mut rng = stream(config.match_params.seed, task, u64::from(r));
                let out = simulate_match(p, q, &config.game, &config.match_params, &mut rng)?;
                payoffs.push((out.payoffs.s_x, out.payoffs.s_y));
                if let Some((ex, ey)) = out.payoffs.stderr {
                    gap_stderr = Some((ex * ex + ey * ey).sqrt());
                }
            }
            Ok(PairOutcome {
                i,
                j,
                payoffs,
                gap_stderr,
            })
        }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Plays every unordered pairing (and self-pairings when enabled).
pub fn round_robin(config: &TournamentConfig) -> Result<TournamentResult> {
    config.validate()?;
    let n = config.roster.len();
    let reps = config.replicates as usize;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j || config.include_self_play)
        .collect();
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(i, j)| play_pair(config, i, j))
        .collect::<Result<_>>()?;

    let mut pairwise = vec![vec![None; n]; n];
    let mut per_rep_totals = vec![vec![0.0; reps]; n];
    let mut records = vec![Record::default(); n];
    for out in &outcomes {
        let (i, j) = (out.i, out.j);
        let mx = mean(out.payoffs.iter().map(|p| p.0));
        let my = mean(out.payoffs.iter().map(|p| p.1));
        pairwise[i][j] = Some(mx);
        for (r, &(x, y)) in out.payoffs.iter().enumerate() {
            per_rep_totals[i][r] += x;
            if i != j {
                per_rep_totals[j][r] += y;
            }
        }
        if i == j {
            records[i].draws += 1;
            continue;
        }
        pairwise[j][i] = Some(my);
        let gap = mx - my;
        let tolerance = match config.scoring {
            Scoring::ExactStationary => EXACT_DRAW_TOLERANCE,
            Scoring::Simulated if reps >= 2 => {
                let gaps: Vec<f64> = out.payoffs.iter().map(|p| p.0 - p.1).collect();
                sample_sd(&gaps) / (reps as f64).sqrt()
            }
            Scoring::Simulated => out.gap_stderr.unwrap_or(0.0),
        };
        if gap.abs() <= tolerance {
            records[i].draws += 1;
            records[j].draws += 1;
        } else if gap > 0.0 {
            records[i].wins += 1;
            records[j].losses += 1;
        } else {
            records[j].wins += 1;
            records[i].losses += 1;
        }
    }

    let standings: Vec<Standing> = (0..n)
        .map(|i| Standing {
            name: config.roster[i].name().to_string(),
            total: mean(per_rep_totals[i].iter().copied()),
            sd: sample_sd(&per_rep_totals[i]),
            record: records[i],
        })
        .collect();
    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&a, &b| {
        standings[b]
            .total
            .total_cmp(&standings[a].total)
            .then_with(|| standings[a].name.cmp(&standings[b].name))
    });
    Ok(TournamentResult {
        standings,
        pairwise,
        ranking,
    })
}

/// Mean per-round payoff of row strategy against column strategy.
pub fn pairwise_table(result: &TournamentResult) -> &[Vec<Option<f64>>] {
    &result.pairwise
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::classic;

    fn roster(names: &[&str]) -> Vec<MemoryOne> {
        let g = Game2x2::prisoners_dilemma();
        names.iter().map(|n| classic(n, &g).unwrap()).collect()
    }

    #[test]
    fn alld_beats_allc() {
        let config = TournamentConfig::new(roster(&["AllC", "AllD"]), Game2x2::prisoners_dilemma());
        let res = round_robin(&config).unwrap();
        let alld = res.standing("AllD").unwrap();
        assert_eq!(alld.record, Record { wins: 1, losses: 0, draws: 1 });
        assert_eq!(res.standing("AllC").unwrap().record.losses, 1);
        assert_eq!(res.pairwise[1][0], Some(5.0));
        assert_eq!(res.pairwise[0][1], Some(0.0));
        // AllD: 1 + 5, AllC: 3 + 0
        assert_eq!(res.ranking, vec![1, 0]);
    }

    #[test]
    fn self_play_optional() {
        let mut config =
            TournamentConfig::new(roster(&["TFT", "AllD", "WSLS"]), Game2x2::prisoners_dilemma());
        config.include_self_play = false;
        let res = round_robin(&config).unwrap();
        assert!(res.pairwise.iter().enumerate().all(|(i, row)| row[i].is_none()));
        for s in &res.standings {
            let r = s.record;
            assert_eq!(r.wins + r.losses + r.draws, 2);
        }
    }

    #[test]
    fn rejects_bad_rosters() {
        let g = Game2x2::prisoners_dilemma();
        assert!(round_robin(&TournamentConfig::new(roster(&["TFT"]), g.clone())).is_err());
        assert!(round_robin(&TournamentConfig::new(roster(&["TFT", "TFT"]), g.clone())).is_err());
        let mut c = TournamentConfig::new(roster(&["TFT", "AllD"]), g);
        c.replicates = 0;
        assert!(round_robin(&c).is_err());
    }

    #[test]
    fn ties_broken_by_name() {
        let g = Game2x2::prisoners_dilemma();
        let a = classic("AllC", &g).unwrap().renamed("b-coop");
        let b = classic("AllC", &g).unwrap().renamed("a-coop");
        let res = round_robin(&TournamentConfig::new(vec![a, b], g)).unwrap();
        assert_eq!(res.ranked().next().unwrap().name, "a-coop");
    }
}
