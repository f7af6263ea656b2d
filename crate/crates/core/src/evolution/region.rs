//! Existence of zero-determinant strategies in the N-player threshold game.
//!
//! The focal player conditions on its own last move and on the number `j`
//! of co-players who cooperated, giving 2N states. With `g_x` the focal
//! payoff and `g_o` the mean co-player payoff in each state, the strategy
//! `p = [own move was C] + phi * ((g_x - l) - chi * (g_o - l))` enforces
//! `pi_x - l = chi * (pi_o - l)`. A cell is feasible when some `phi > 0`
//! keeps every entry of `p` in [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::ThresholdGame;
use crate::strategy::max_scale;

/// Focal and mean co-player payoffs for the focal move and `j` cooperating
/// co-players.
fn state_payoffs(tg: &ThresholdGame, focal_cooperates: bool, j: usize) -> (f64, f64) {
    let n = tg.n_players();
    let k = j + usize::from(focal_cooperates);
    let pay = tg.payoffs(k);
    let focal = if focal_cooperates {
        pay.cooperator
    } else {
        pay.defector
    };
    let defectors = n - 1 - j;
    let others = (j as f64 * pay.cooperator + defectors as f64 * pay.defector) / (n - 1) as f64;
    (focal, others)
}

/// Repeat-base and ZD direction over the 2N states (cooperating states first).
fn zd_vectors(tg: &ThresholdGame, l: f64, chi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = tg.n_players();
    let mut base = Vec::with_capacity(2 * n);
    let mut dir = Vec::with_capacity(2 * n);
    for own in [true, false] {
        for j in 0..n {
            let (gx, go) = state_payoffs(tg, own, j);
            base.push(if own { 1.0 } else { 0.0 });
            dir.push((gx - l) - chi * (go - l));
        }
    }
    (base, dir)
}

/// Largest feasible scale of the multiplayer ZD strategy; 0 if infeasible.
pub fn max_phi_multiplayer(tg: &ThresholdGame, l: f64, chi: f64) -> f64 {
    let (base, dir) = zd_vectors(tg, l, chi);
    max_scale(&base, &dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    /// Cooperator thresholds m to scan.
    pub thresholds: Vec<usize>,
    pub chis: Vec<f64>,
}

impl RegionGrid {
    /// All thresholds 1..=n and `points` slopes evenly spaced in [1, chi_max].
    pub fn full(n_players: usize, chi_max: f64, points: usize) -> Self {
        let points = points.max(2);
        RegionGrid {
            thresholds: (1..=n_players).collect(),
            chis: (0..points)
                .map(|i| 1.0 + (chi_max - 1.0) * i as f64 / (points - 1) as f64)
                .collect(),
        }
    }
}

/// Feasibility maps indexed `[threshold][chi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub thresholds: Vec<usize>,
    pub chis: Vec<f64>,
    /// Baseline at the mutual-cooperation payoff.
    pub generous: Vec<Vec<bool>>,
    /// Baseline at the mutual-defection payoff.
    pub extortionate: Vec<Vec<bool>>,
    pub generous_phi: Vec<Vec<f64>>,
    pub extortionate_phi: Vec<Vec<f64>>,
}

/// Scans thresholds and slopes for the group size, benefit and cost of `tg`.
pub fn zd_region_scan(tg: &ThresholdGame, grid: &RegionGrid) -> Result<RegionMap> {
    let mut map = RegionMap {
        thresholds: grid.thresholds.clone(),
        chis: grid.chis.clone(),
        generous: Vec::new(),
        extortionate: Vec::new(),
        generous_phi: Vec::new(),
        extortionate_phi: Vec::new(),
    };
    for &m in &grid.thresholds {
        let game = ThresholdGame::new(tg.n_players(), m, tg.benefit(), tg.cost())?;
        let gen_l = game.mutual_cooperation();
        let ext_l = game.mutual_defection();
        let gen: Vec<f64> = grid
            .chis
            .iter()
            .map(|&chi| max_phi_multiplayer(&game, gen_l, chi))
            .collect();
        let ext: Vec<f64> = grid
            .chis
            .iter()
            .map(|&chi| max_phi_multiplayer(&game, ext_l, chi))
            .collect();
        map.generous.push(gen.iter().map(|&p| p > 0.0).collect());
        map.extortionate.push(ext.iter().map(|&p| p > 0.0).collect());
        map.generous_phi.push(gen);
        map.extortionate_phi.push(ext);
    }
    Ok(map)
}
