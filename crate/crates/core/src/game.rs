//! One-shot game structures and their equilibrium analysis.
//!
//! A [`Game2x2`] stores both players' payoffs as 2×2 grids indexed
//! `[row action][column action]`. Symmetric games are built from the
//! usual quadruple (T, R, P, S), where action 0 is cooperate and action 1
//! is defect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COOPERATE: usize = 0;
pub const DEFECT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameClass {
    PrisonersDilemma,
    Chicken,
    Snowdrift,
    DueCare,
    Custom,
}

impl GameClass {
    pub fn label(self) -> &'static str {
        match self {
            GameClass::PrisonersDilemma => "PrisonersDilemma",
            GameClass::Chicken => "Chicken",
            GameClass::Snowdrift => "Snowdrift",
            GameClass::DueCare => "DueCare",
            GameClass::Custom => "Custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Row,
    Column,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Row => Player::Column,
            Player::Column => Player::Row,
        }
    }
}

/// A pure action profile `(row action, column action)`.
pub type Profile = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Game2x2 {
    name: String,
    payoff_row: [[f64; 2]; 2],
    payoff_col: [[f64; 2]; 2],
    row_actions: [String; 2],
    col_actions: [String; 2],
    class: GameClass,
}

/// Symmetric payoff quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub s: f64,
}

impl Quadruple {
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Self {
        Quadruple { t, r, p, s }
    }

    /// Checks the ordering demanded by `class`.
    pub fn check(&self, class: GameClass) -> Result<()> {
        let Quadruple { t, r, p, s } = *self;
        let fail = |inequality| {
            Err(Error::OrderingViolation {
                class: class.label(),
                inequality,
            })
        };
        match class {
            GameClass::PrisonersDilemma => {
                if !(t > r) {
                    return fail("T > R");
                }
                if !(r > p) {
                    return fail("R > P");
                }
                if !(p > s) {
                    return fail("P > S");
                }
                if !(2.0 * r > t + s) {
                    return fail("2R > T + S");
                }
            }
            GameClass::Chicken | GameClass::Snowdrift => {
                if !(t > r) {
                    return fail("T > R");
                }
                if !(r > s) {
                    return fail("R > S");
                }
                if !(s > p) {
                    return fail("S > P");
                }
            }
            GameClass::DueCare | GameClass::Custom => {}
        }
        Ok(())
    }
}

fn default_actions() -> [String; 2] {
    ["C".to_string(), "D".to_string()]
}

impl Game2x2 {
    /// Builds a symmetric game from (T, R, P, S) and validates the class ordering.
    pub fn symmetric(name: impl Into<String>, q: Quadruple, class: GameClass) -> Result<Self> {
        if !(q.t.is_finite() && q.r.is_finite() && q.p.is_finite() && q.s.is_finite()) {
            return Err(Error::invalid("payoffs", "payoffs must be finite"));
        }
        q.check(class)?;
        let row = [[q.r, q.s], [q.t, q.p]];
        Ok(Game2x2 {
            name: name.into(),
            payoff_row: row,
            payoff_col: transpose(row),
            row_actions: default_actions(),
            col_actions: default_actions(),
            class,
        })
    }

    /// Builds a game from a full bimatrix. Symmetric classes must satisfy
    /// `col[i][j] == row[j][i]`; their quadruple is read from the row grid.
    pub fn from_bimatrix(
        name: impl Into<String>,
        payoff_row: [[f64; 2]; 2],
        payoff_col: [[f64; 2]; 2],
        class: GameClass,
    ) -> Result<Self> {
        let name = name.into();
        if payoff_row
            .iter()
            .chain(payoff_col.iter())
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("payoffs", "payoffs must be finite"));
        }
        let game = Game2x2 {
            name,
            payoff_row,
            payoff_col,
            row_actions: default_actions(),
            col_actions: default_actions(),
            class,
        };
        match class {
            GameClass::PrisonersDilemma | GameClass::Chicken | GameClass::Snowdrift => {
                if !game.is_symmetric() {
                    return Err(Error::NotSymmetric(game.name));
                }
                game.quadruple_unchecked().check(class)?;
            }
            GameClass::DueCare | GameClass::Custom => {}
        }
        Ok(game)
    }

    pub fn with_actions(mut self, row_actions: [&str; 2], col_actions: [&str; 2]) -> Self {
        self.row_actions = row_actions.map(str::to_string);
        self.col_actions = col_actions.map(str::to_string);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The iterated Prisoner's Dilemma with T=5, R=3, P=1, S=0.
    pub fn prisoners_dilemma() -> Self {
        Self::symmetric(
            "Prisoner's Dilemma",
            Quadruple::new(5.0, 3.0, 1.0, 0.0),
            GameClass::PrisonersDilemma,
        )
        .expect("canonical PD is valid")
    }

    /// Chicken with T=4, R=3, S=2, P=1.
    pub fn chicken() -> Self {
        Self::symmetric(
            "Chicken",
            Quadruple::new(4.0, 3.0, 1.0, 2.0),
            GameClass::Chicken,
        )
        .expect("canonical Chicken is valid")
    }

    /// Two-player snowdrift: clearing the drift yields `benefit` to both and
    /// costs `cost`, shared when both shovel.
    pub fn snowdrift(benefit: f64, cost: f64) -> Result<Self> {
        if !(benefit > cost && cost > 0.0) {
            return Err(Error::invalid("snowdrift", "requires benefit > cost > 0"));
        }
        Self::symmetric(
            "Snowdrift",
            Quadruple::new(benefit, benefit - cost / 2.0, 0.0, benefit - cost),
            GameClass::Snowdrift,
        )
    }

    /// Pedestrian (row) versus motorist (column); action 0 is "NoCare".
    pub fn due_care() -> Self {
        let row = [[-100.0, -100.0], [-110.0, -20.0]];
        let col = [[0.0, -10.0], [0.0, -10.0]];
        Self::from_bimatrix("Due care", row, col, GameClass::DueCare)
            .expect("due-care matrix is valid")
            .with_actions(["NoCare", "DueCare"], ["NoCare", "DueCare"])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> GameClass {
        self.class
    }

    pub fn payoff_row(&self) -> &[[f64; 2]; 2] {
        &self.payoff_row
    }

    pub fn payoff_col(&self) -> &[[f64; 2]; 2] {
        &self.payoff_col
    }

    pub fn actions(&self, player: Player) -> &[String; 2] {
        match player {
            Player::Row => &self.row_actions,
            Player::Column => &self.col_actions,
        }
    }

    pub fn payoff(&self, player: Player, profile: Profile) -> f64 {
        let (i, j) = profile;
        match player {
            Player::Row => self.payoff_row[i][j],
            Player::Column => self.payoff_col[i][j],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..2).all(|i| (0..2).all(|j| self.payoff_col[i][j] == self.payoff_row[j][i]))
    }

    fn quadruple_unchecked(&self) -> Quadruple {
        let row = &self.payoff_row;
        Quadruple::new(row[1][0], row[0][0], row[1][1], row[0][1])
    }

    /// (T, R, P, S) of a symmetric game.
    pub fn quadruple(&self) -> Result<Quadruple> {
        if self.is_symmetric() {
            Ok(self.quadruple_unchecked())
        } else {
            Err(Error::NotSymmetric(self.name.clone()))
        }
    }

    /// Payoffs of the first player over joint states (CC, CD, DC, DD), own move first.
    pub fn focal_payoffs(&self) -> Result<[f64; 4]> {
        let q = self.quadruple()?;
        Ok([q.r, q.s, q.t, q.p])
    }

    /// Payoffs of the co-player over the same states.
    pub fn opponent_payoffs(&self) -> Result<[f64; 4]> {
        let q = self.quadruple()?;
        Ok([q.r, q.t, q.s, q.p])
    }

    /// Returns the action that is strictly better than the alternative
    /// against both opponent actions.
    pub fn strict_dominant_strategy(&self, player: Player) -> Option<usize> {
        let value = |own: usize, other: usize| match player {
            Player::Row => self.payoff(player, (own, other)),
            Player::Column => self.payoff(player, (other, own)),
        };
        (0..2).find(|&a| {
            let b = 1 - a;
            (0..2).all(|other| value(a, other) > value(b, other))
        })
    }

    /// All pure profiles where no player gains by deviating, in row-major order.
    pub fn pure_nash_equilibria(&self) -> Vec<Profile> {
        let mut out = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let row_ok = self.payoff_row[i][j] >= self.payoff_row[1 - i][j];
                let col_ok = self.payoff_col[i][j] >= self.payoff_col[i][1 - j];
                if row_ok && col_ok {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn profile_label(&self, profile: Profile) -> String {
        format!(
            "({},{})",
            self.row_actions[profile.0], self.col_actions[profile.1]
        )
    }
}

fn transpose(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// N-player snowdrift with a cooperator threshold.
///
/// With `k` cooperators: if `k >= m` everyone receives `b` and each
/// cooperator pays `c / k`; if `0 < k < m` each cooperator sinks `c / m`
/// and nobody receives the benefit; if `k == 0` all payoffs are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGame {
    n_players: usize,
    threshold: usize,
    benefit: f64,
    cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPayoffs {
    pub cooperator: f64,
    pub defector: f64,
}

impl ThresholdGame {
    pub fn new(n_players: usize, threshold: usize, benefit: f64, cost: f64) -> Result<Self> {
        if n_players < 2 {
            return Err(Error::invalid("n_players", "at least two players required"));
        }
        if threshold < 1 || threshold > n_players {
            return Err(Error::invalid(
                "threshold",
                format!("must lie in [1, {n_players}], got {threshold}"),
            ));
        }
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::invalid("cost", "must be positive"));
        }
        if !(benefit > cost / threshold as f64 && benefit.is_finite()) {
            return Err(Error::invalid("benefit", "must exceed cost / threshold"));
        }
        Ok(ThresholdGame {
            n_players,
            threshold,
            benefit,
            cost,
        })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn benefit(&self) -> f64 {
        self.benefit
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Payoffs to a cooperator and to a defector when `k` players cooperate.
    ///
    /// Panics if `k > n_players`.
    pub fn payoffs(&self, k: usize) -> ThresholdPayoffs {
        assert!(k <= self.n_players, "cooperator count exceeds group size");
        if k == 0 {
            ThresholdPayoffs {
                cooperator: 0.0,
                defector: 0.0,
            }
        } else if k >= self.threshold {
            ThresholdPayoffs {
                cooperator: self.benefit - self.cost / k as f64,
                defector: self.benefit,
            }
        } else {
            ThresholdPayoffs {
                cooperator: -self.cost / self.threshold as f64,
                defector: 0.0,
            }
        }
    }

    /// Each player's payoff when everybody cooperates.
    pub fn mutual_cooperation(&self) -> f64 {
        self.payoffs(self.n_players).cooperator
    }

    /// Each player's payoff when everybody defects.
    pub fn mutual_defection(&self) -> f64 {
        self.payoffs(0).defector
    }
}

/// Claims are integers in `[low, high]`. Equal claims pay the claim; otherwise
/// both are paid the lower claim, plus `bonus` to the lower claimant and
/// minus `bonus` to the higher one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelersDilemma {
    low: i64,
    high: i64,
    bonus: f64,
}

impl Default for TravelersDilemma {
    fn default() -> Self {
        TravelersDilemma {
            low: 2,
            high: 100,
            bonus: 2.0,
        }
    }
}

impl TravelersDilemma {
    pub fn new(low: i64, high: i64, bonus: f64) -> Result<Self> {
        if low >= high {
            return Err(Error::invalid("high", "low must be below high"));
        }
        if !(bonus > 0.0 && bonus.is_finite()) {
            return Err(Error::invalid("bonus", "must be positive"));
        }
        Ok(TravelersDilemma { low, high, bonus })
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.high
    }

    pub fn bonus(&self) -> f64 {
        self.bonus
    }

    pub fn payoffs(&self, a: i64, b: i64) -> (f64, f64) {
        use std::cmp::Ordering::*;
        let lower = a.min(b) as f64;
        match a.cmp(&b) {
            Equal => (a as f64, b as f64),
            Less => (lower + self.bonus, lower - self.bonus),
            Greater => (lower - self.bonus, lower + self.bonus),
        }
    }

    /// Enumerates the full claim bimatrix and returns the unique pure Nash profile.
    pub fn nash(&self) -> Result<(i64, i64)> {
        let claims: Vec<i64> = (self.low..=self.high).collect();
        // best_reply[b] = max over a of the first player's payoff against claim b;
        // the game is symmetric so the same table serves both players.
        let best_reply: Vec<f64> = claims
            .iter()
            .map(|&b| {
                claims
                    .iter()
                    .map(|&a| self.payoffs(a, b).0)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let mut found = Vec::new();
        for (ia, &a) in claims.iter().enumerate() {
            for (ib, &b) in claims.iter().enumerate() {
                let (ua, ub) = self.payoffs(a, b);
                if ua >= best_reply[ib] && ub >= best_reply[ia] {
                    found.push((a, b));
                }
            }
        }
        match found.as_slice() {
            [only] => Ok(*only),
            _ => Err(Error::NoUniqueEquilibrium { found: found.len() }),
        }
    }
}
