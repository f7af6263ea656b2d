//! Memory-one strategies, the classic catalog, and zero-determinant compilation.
//!
//! Joint states are indexed from the focal player's point of view, own move
//! first: 0 = CC, 1 = CD, 2 = DC, 3 = DD.
//!
//! A zero-determinant strategy is written as
//! `p = (1, 1, 0, 0) + phi * d`, where for a baseline `l` and slope `chi`
//! the direction is `d = (s_x - l) - chi * (s_y - l)` over the four states.
//! Any such `p` enforces `s_x - l = chi * (s_y - l)` against every opponent
//! whose joint chain has a unique stationary distribution. The equalizer
//! uses `d = target - s_y` instead, pinning the opponent's payoff.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game2x2;

/// The nine strategies of the reconstructed round-robin roster.
pub const TOURNAMENT_ROSTER: [&str; 9] = [
    "ZDGTFT-2", "Extort-2", "TFT", "GTFT", "WSLS", "AllC", "AllD", "Grim", "Random",
];

pub const CLASSIC_NAMES: [&str; 7] = ["TFT", "GTFT", "WSLS", "AllC", "AllD", "Grim", "Random"];

const REPEAT: [f64; 4] = [1.0, 1.0, 0.0, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryOne {
    name: String,
    probs: [f64; 4],
    initial: f64,
}

fn is_probability(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl MemoryOne {
    /// `probs` are cooperation probabilities after (CC, CD, DC, DD);
    /// `initial` is the probability of cooperating in round one.
    pub fn new(name: impl Into<String>, probs: [f64; 4], initial: f64) -> Result<Self> {
        if !probs.iter().all(|&p| is_probability(p)) {
            return Err(Error::invalid(
                "probs",
                format!("cooperation probabilities must lie in [0, 1], got {probs:?}"),
            ));
        }
        if !is_probability(initial) {
            return Err(Error::invalid(
                "initial",
                format!("initial cooperation must lie in [0, 1], got {initial}"),
            ));
        }
        Ok(MemoryOne {
            name: name.into(),
            probs,
            initial,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs
            .iter()
            .chain(std::iter::once(&self.initial))
            .all(|&p| p == 0.0 || p == 1.0)
    }

    /// Strictly inside (0, 1) everywhere, including the opening move.
    pub fn is_fully_mixed(&self) -> bool {
        self.probs
            .iter()
            .chain(std::iter::once(&self.initial))
            .all(|&p| p > 0.0 && p < 1.0)
    }

    /// Folds symmetric execution noise into the strategy: each intended move
    /// is flipped with probability `eps`.
    pub fn with_noise(&self, eps: f64) -> MemoryOne {
        let flip = |p: f64| (1.0 - eps) * p + eps * (1.0 - p);
        MemoryOne {
            name: self.name.clone(),
            probs: self.probs.map(flip),
            initial: flip(self.initial),
        }
    }
}

impl fmt::Display for MemoryOne {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.probs;
        write!(
            f,
            "{} ({a:.4}, {b:.4}, {c:.4}, {d:.4}; init {:.4})",
            self.name, self.initial
        )
    }
}

/// Forgiveness level of generous tit-for-tat for a symmetric game.
pub fn gtft_generosity(game: &Game2x2) -> Result<f64> {
    let q = game.quadruple()?;
    let g = (1.0 - (q.t - q.r) / (q.r - q.s)).min((q.r - q.p) / (q.t - q.p));
    Ok(g.clamp(0.0, 1.0))
}

/// Looks up a classic catalog strategy. GTFT depends on the game's payoffs.
pub fn classic(name: &str, game: &Game2x2) -> Result<MemoryOne> {
    let (probs, initial) = match name {
        "TFT" => ([1.0, 0.0, 1.0, 0.0], 1.0),
        "GTFT" => {
            let g = gtft_generosity(game)?;
            ([1.0, g, 1.0, g], 1.0)
        }
        "WSLS" => ([1.0, 0.0, 0.0, 1.0], 1.0),
        "AllC" => ([1.0; 4], 1.0),
        "AllD" => ([0.0; 4], 0.0),
        "Grim" => ([1.0, 0.0, 0.0, 0.0], 1.0),
        "Random" => ([0.5; 4], 0.5),
        other => return Err(Error::UnknownStrategy(other.to_string())),
    };
    MemoryOne::new(name, probs, initial)
}

/// Resolves a catalog name or a ZD preset of the form `Extort-<chi>` /
/// `ZDGTFT-<chi>` (phi at half its maximum).
pub fn named(name: &str, game: &Game2x2) -> Result<MemoryOne> {
    if let Some(chi) = name.strip_prefix("Extort-") {
        let chi = parse_chi(name, chi)?;
        return compile_zd(game, &ZdSpec::extortionate(chi)).map(|s| s.renamed(name));
    }
    if let Some(chi) = name.strip_prefix("ZDGTFT-") {
        let chi = parse_chi(name, chi)?;
        return compile_zd(game, &ZdSpec::generous(chi)).map(|s| s.renamed(name));
    }
    classic(name, game)
}

fn parse_chi(name: &str, text: &str) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|_| Error::UnknownStrategy(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZdKind {
    Extortionate,
    Generous,
    Equalizer,
}

/// Scale of the ZD direction vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Phi {
    Value(f64),
    /// A fraction in (0, 1] of the largest feasible scale.
    MaxFraction(f64),
}

impl Default for Phi {
    fn default() -> Self {
        Phi::MaxFraction(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZdSpec {
    pub kind: ZdKind,
    pub chi: f64,
    pub phi: Phi,
    /// Pinned opponent payoff; equalizers only.
    pub target: Option<f64>,
}

impl ZdSpec {
    pub fn extortionate(chi: f64) -> Self {
        ZdSpec {
            kind: ZdKind::Extortionate,
            chi,
            phi: Phi::default(),
            target: None,
        }
    }

    pub fn generous(chi: f64) -> Self {
        ZdSpec {
            kind: ZdKind::Generous,
            chi,
            phi: Phi::default(),
            target: None,
        }
    }

    pub fn equalizer(target: f64) -> Self {
        ZdSpec {
            kind: ZdKind::Equalizer,
            chi: 1.0,
            phi: Phi::default(),
            target: Some(target),
        }
    }

    pub fn with_phi(mut self, phi: Phi) -> Self {
        self.phi = phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi >= 1.0 && self.chi.is_finite()) {
            return Err(Error::invalid(
                "chi",
                format!("must be a finite value >= 1, got {}", self.chi),
            ));
        }
        match self.phi {
            Phi::Value(v) if !(v > 0.0 && v.is_finite()) => {
                return Err(Error::invalid("phi", format!("must be positive, got {v}")));
            }
            Phi::MaxFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::invalid(
                    "phi",
                    format!("fraction of max must lie in (0, 1], got {f}"),
                ));
            }
            _ => {}
        }
        match (self.kind, self.target) {
            (ZdKind::Equalizer, None) => Err(Error::invalid("target", "equalizer needs a target")),
            (ZdKind::Equalizer, Some(t)) if !t.is_finite() => {
                Err(Error::invalid("target", "must be finite"))
            }
            (ZdKind::Extortionate | ZdKind::Generous, Some(_)) => Err(Error::invalid(
                "target",
                "only equalizers take a target",
            )),
            _ => Ok(()),
        }
    }

    /// The baseline payoff `l`: P for extortion, R for generosity, the target
    /// for an equalizer.
    pub fn baseline(&self, game: &Game2x2) -> Result<f64> {
        let q = game.quadruple()?;
        Ok(match self.kind {
            ZdKind::Extortionate => q.p,
            ZdKind::Generous => q.r,
            ZdKind::Equalizer => self.target.unwrap_or(f64::NAN),
        })
    }

    /// Residual of the enforced relation for a payoff pair; zero when it holds.
    pub fn residual(&self, game: &Game2x2, s_x: f64, s_y: f64) -> Result<f64> {
        let l = self.baseline(game)?;
        Ok(match self.kind {
            ZdKind::Equalizer => s_y - l,
            _ => (s_x - l) - self.chi * (s_y - l),
        })
    }
}

/// Direction `d` of the ZD family for baseline `l` and slope `chi`
/// (for an equalizer `l` is the target and `chi` is unused).
pub fn zd_direction(game: &Game2x2, kind: ZdKind, l: f64, chi: f64) -> Result<[f64; 4]> {
    let sx = game.focal_payoffs()?;
    let sy = game.opponent_payoffs()?;
    Ok(std::array::from_fn(|i| match kind {
        ZdKind::Equalizer => l - sy[i],
        ZdKind::Extortionate | ZdKind::Generous => (sx[i] - l) - chi * (sy[i] - l),
    }))
}

/// Largest scale keeping `base + phi * d` inside [0, 1] for every entry.
/// Returns 0 when no positive scale works and infinity when `d` vanishes.
pub fn max_scale(base: &[f64], direction: &[f64]) -> f64 {
    let mut bound = f64::INFINITY;
    for (&b, &d) in base.iter().zip(direction) {
        if d > 0.0 {
            bound = bound.min((1.0 - b) / d);
        } else if d < 0.0 {
            bound = bound.min(b / -d);
        }
    }
    bound.max(0.0)
}

/// Supremum of feasible scales for the two-player ZD family; 0 if infeasible.
pub fn max_phi(game: &Game2x2, kind: ZdKind, l: f64, chi: f64) -> f64 {
    match zd_direction(game, kind, l, chi) {
        Ok(d) => max_scale(&REPEAT, &d),
        Err(_) => 0.0,
    }
}

/// Compiles a ZD specification into a memory-one strategy that opens with
/// cooperation.
pub fn compile_zd(game: &Game2x2, spec: &ZdSpec) -> Result<MemoryOne> {
    spec.validate()?;
    let l = spec.baseline(game)?;
    let d = zd_direction(game, spec.kind, l, spec.chi)?;
    let bound = max_scale(&REPEAT, &d);
    if bound <= 0.0 {
        return Err(Error::Infeasible(format!(
            "no positive phi for {:?} with l = {l}, chi = {}",
            spec.kind, spec.chi
        )));
    }
    let phi = match spec.phi {
        // A vanishing direction leaves the repeat strategy for every phi.
        Phi::MaxFraction(_) if bound.is_infinite() => 1.0,
        Phi::MaxFraction(f) => f * bound,
        Phi::Value(v) if v > bound * (1.0 + 1e-12) => {
            return Err(Error::Infeasible(format!(
                "phi = {v} exceeds the feasible maximum {bound}"
            )));
        }
        Phi::Value(v) => v,
    };
    let probs = std::array::from_fn(|i| (REPEAT[i] + phi * d[i]).clamp(0.0, 1.0));
    let name = match spec.kind {
        ZdKind::Extortionate => format!("Extort-{}", spec.chi),
        ZdKind::Generous => format!("ZDGTFT-{}", spec.chi),
        ZdKind::Equalizer => format!("Equalizer-{l}"),
    };
    MemoryOne::new(name, probs, 1.0)
}

/// Closed payoff interval; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffInterval {
    pub lo: f64,
    pub hi: f64,
}

impl PayoffInterval {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Opponent payoffs a memory-one player can pin unilaterally:
/// `[max(S, P), min(R, T)]`.
pub fn enforceable_opponent_range(game: &Game2x2) -> Result<PayoffInterval> {
    let q = game.quadruple()?;
    Ok(PayoffInterval {
        lo: q.s.max(q.p),
        hi: q.r.min(q.t),
    })
}
