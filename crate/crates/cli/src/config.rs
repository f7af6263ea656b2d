//! Experiment configuration: strict JSON parsing, default resolution and
//! validation with paths pointing at the offending entry.
//!
//! Loading produces a fully resolved [`ExperimentConfig`] whose JSON form
//! is itself a valid configuration that loads back to the same value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use zdlab::evolution::{Neighborhood, Process, UpdateRule};
use zdlab::strategy::{named, TOURNAMENT_ROSTER};
use zdlab::tournament::Scoring;
use zdlab::{compile_zd, Game2x2, GameClass, MemoryOne, Phi, ZdSpec};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = zdlab::rng::DEFAULT_SEED;
pub const DEFAULT_OUTPUT_DIR: &str = "zdlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Match,
    Tournament,
    Evolve,
    Lattice,
    RegionScan,
    Coevolve,
}

impl Command {
    fn uses_game(self) -> bool {
        self != Command::RegionScan
    }

    fn uses_roster(self) -> bool {
        matches!(
            self,
            Command::Tournament | Command::Evolve | Command::Lattice | Command::Coevolve
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GamePreset {
    /// T = 5, R = 3, P = 1, S = 0.
    Pd,
    /// T = 4, R = 3, S = 2, P = 1.
    Chicken,
    DueCare,
    /// Needs `benefit` and `cost`; defaults 1 and 0.2.
    Snowdrift,
}

/// Either a preset, a symmetric quadruple, or a full bimatrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<GamePreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<GameClass>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col: Option<[[f64; 2]; 2]>,
    /// Row player's action labels, then the column player's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<[[String; 2]; 2]>,
}

impl GameSpec {
    pub fn preset(preset: GamePreset) -> Self {
        GameSpec {
            preset: Some(preset),
            ..Default::default()
        }
    }

    /// Builds the game. `path` locates this entry in error messages.
    pub fn build(&self, path: &str) -> Result<Game2x2> {
        let has_quad = [self.t, self.r, self.p, self.s].iter().any(Option::is_some);
        let has_matrix = self.row.is_some() || self.col.is_some();
        let game = if let Some(preset) = self.preset {
            if has_quad || has_matrix || self.class.is_some() {
                return Err(CliError::validation(
                    path,
                    "a preset cannot be combined with class, T/R/P/S or row/col",
                ));
            }
            if preset != GamePreset::Snowdrift && (self.benefit.is_some() || self.cost.is_some()) {
                return Err(CliError::validation(
                    path,
                    "benefit and cost only apply to the snowdrift preset",
                ));
            }
            match preset {
                GamePreset::Pd => Game2x2::prisoners_dilemma(),
                GamePreset::Chicken => Game2x2::chicken(),
                GamePreset::DueCare => Game2x2::due_care(),
                GamePreset::Snowdrift => {
                    Game2x2::snowdrift(self.benefit.unwrap_or(1.0), self.cost.unwrap_or(0.2))
                        .map_err(|e| at(path, e))?
                }
            }
        } else {
            if self.benefit.is_some() || self.cost.is_some() {
                return Err(CliError::validation(
                    path,
                    "benefit and cost only apply to the snowdrift preset",
                ));
            }
            let class = self.class.unwrap_or(GameClass::Custom);
            let name = self.name.clone().unwrap_or_else(|| "custom".to_string());
            match (has_quad, self.row, self.col) {
                (true, None, None) => {
                    let field = |v: Option<f64>, f: &str| {
                        v.ok_or_else(|| CliError::validation(format!("{path}.{f}"), "missing payoff"))
                    };
                    let q = zdlab::Quadruple::new(
                        field(self.t, "T")?,
                        field(self.r, "R")?,
                        field(self.p, "P")?,
                        field(self.s, "S")?,
                    );
                    Game2x2::symmetric(name, q, class).map_err(|e| at(path, e))?
                }
                (false, Some(row), Some(col)) => {
                    Game2x2::from_bimatrix(name, row, col, class).map_err(|e| at(path, e))?
                }
                (false, _, _) if has_matrix => {
                    return Err(CliError::validation(path, "row and col must both be given"));
                }
                (true, _, _) => {
                    return Err(CliError::validation(
                        path,
                        "give either T/R/P/S or row/col, not both",
                    ));
                }
                _ => {
                    return Err(CliError::validation(
                        path,
                        "expected a preset, T/R/P/S, or row/col",
                    ));
                }
            }
        };
        let game = match &self.name {
            Some(name) => game.with_name(name.clone()),
            None => game,
        };
        Ok(match &self.actions {
            Some([row, col]) => game.with_actions(
                [row[0].as_str(), row[1].as_str()],
                [col[0].as_str(), col[1].as_str()],
            ),
            None => game,
        })
    }

    /// Explicit bimatrix form of a built game.
    pub fn normalized(game: &Game2x2) -> Self {
        use zdlab::Player;
        GameSpec {
            name: Some(game.name().to_string()),
            class: Some(game.class()),
            row: Some(*game.payoff_row()),
            col: Some(*game.payoff_col()),
            actions: Some([
                game.actions(Player::Row).clone(),
                game.actions(Player::Column).clone(),
            ]),
            ..Default::default()
        }
    }
}

/// Scale of a ZD entry: `"max"`, `"max/<k>"`, or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiSpec {
    MaxOver(f64),
    Value(f64),
}

impl Default for PhiSpec {
    fn default() -> Self {
        PhiSpec::MaxOver(2.0)
    }
}

impl PhiSpec {
    fn to_phi(self) -> Phi {
        match self {
            PhiSpec::MaxOver(k) => Phi::MaxFraction(1.0 / k),
            PhiSpec::Value(v) => Phi::Value(v),
        }
    }
}

impl Serialize for PhiSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            PhiSpec::MaxOver(k) if k == 1.0 => s.serialize_str("max"),
            PhiSpec::MaxOver(k) => s.serialize_str(&format!("max/{k}")),
            PhiSpec::Value(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for PhiSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = PhiSpec;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"max\", \"max/<k>\" with k >= 1, or a positive number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<PhiSpec, E> {
                if v == "max" {
                    return Ok(PhiSpec::MaxOver(1.0));
                }
                match v.strip_prefix("max/").map(str::parse::<f64>) {
                    Some(Ok(k)) if k >= 1.0 && k.is_finite() => Ok(PhiSpec::MaxOver(k)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<PhiSpec, E> {
                if v > 0.0 && v.is_finite() {
                    Ok(PhiSpec::Value(v))
                } else {
                    Err(E::invalid_value(de::Unexpected::Float(v), &self))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<PhiSpec, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<PhiSpec, E> {
                self.visit_f64(v as f64)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZdKindTag {
    Extortionate,
    Generous,
    Equalizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZdEntry {
    pub kind: ZdKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default)]
    pub phi: PhiSpec,
}

impl ZdEntry {
    pub fn spec(&self, path: &str) -> Result<ZdSpec> {
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| CliError::validation(format!("{path}.{field}"), "required for this kind"))
        };
        let spec = match self.kind {
            ZdKindTag::Extortionate => ZdSpec::extortionate(need(self.chi, "chi")?),
            ZdKindTag::Generous => ZdSpec::generous(need(self.chi, "chi")?),
            ZdKindTag::Equalizer => {
                if self.chi.is_some() {
                    return Err(CliError::validation(
                        format!("{path}.chi"),
                        "equalizers take a target, not a slope",
                    ));
                }
                ZdSpec::equalizer(need(self.target, "target")?)
            }
        };
        let spec = ZdSpec {
            target: if self.kind == ZdKindTag::Equalizer {
                spec.target
            } else {
                self.target
            },
            ..spec.with_phi(self.phi.to_phi())
        };
        spec.validate().map_err(|e| at(path, e))?;
        Ok(spec)
    }
}

/// One strategy: a catalog name, a ZD specification, or explicit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum RosterEntry {
    Named(String),
    Zd {
        name: Option<String>,
        zd: ZdEntry,
    },
    Custom {
        name: String,
        probs: [f64; 4],
        initial: f64,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RosterObject {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zd: Option<ZdEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<f64>,
}

impl Serialize for RosterEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RosterEntry::Named(name) => s.serialize_str(name),
            RosterEntry::Zd { name, zd } => RosterObject {
                name: name.clone(),
                zd: Some(zd.clone()),
                probs: None,
                initial: None,
            }
            .serialize(s),
            RosterEntry::Custom {
                name,
                probs,
                initial,
            } => RosterObject {
                name: Some(name.clone()),
                zd: None,
                probs: Some(*probs),
                initial: Some(*initial),
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for RosterEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RosterEntry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a strategy name or an object with `zd` or `probs`")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RosterEntry, E> {
                Ok(RosterEntry::Named(v.to_string()))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<RosterEntry, A::Error> {
                let obj = RosterObject::deserialize(de::value::MapAccessDeserializer::new(map))?;
                match (obj.zd, obj.probs) {
                    (Some(zd), None) if obj.initial.is_none() => Ok(RosterEntry::Zd { name: obj.name, zd }),
                    (None, Some(probs)) => Ok(RosterEntry::Custom {
                        name: obj
                            .name
                            .ok_or_else(|| de::Error::missing_field("name"))?,
                        probs,
                        initial: obj.initial.unwrap_or(1.0),
                    }),
                    (Some(_), _) => Err(de::Error::custom(
                        "a `zd` entry takes only `name` besides `zd`",
                    )),
                    (None, None) => Err(de::Error::custom("expected `zd` or `probs`")),
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl RosterEntry {
    /// ZD specification behind this entry, if any.
    pub fn zd_spec(&self, path: &str) -> Result<Option<ZdSpec>> {
        match self {
            RosterEntry::Zd { zd, .. } => zd.spec(&format!("{path}.zd")).map(Some),
            RosterEntry::Named(name) => {
                let parse = |rest: &str| rest.parse::<f64>().ok();
                Ok(if let Some(chi) = name.strip_prefix("Extort-").and_then(parse) {
                    Some(ZdSpec::extortionate(chi))
                } else {
                    name.strip_prefix("ZDGTFT-").and_then(parse).map(ZdSpec::generous)
                })
            }
            RosterEntry::Custom { .. } => Ok(None),
        }
    }

    pub fn build(&self, game: &Game2x2, path: &str) -> Result<MemoryOne> {
        match self {
            RosterEntry::Named(name) => named(name, game).map_err(|e| at(path, e)),
            RosterEntry::Zd { name, zd } => {
                let spec = zd.spec(&format!("{path}.zd"))?;
                let s = compile_zd(game, &spec).map_err(|e| at(&format!("{path}.zd"), e))?;
                Ok(match name {
                    Some(n) => s.renamed(n.clone()),
                    None => s,
                })
            }
            RosterEntry::Custom {
                name,
                probs,
                initial,
            } => MemoryOne::new(name.clone(), *probs, *initial).map_err(|e| at(path, e)),
        }
    }
}

/// A named preset or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum RosterSpec {
    Preset(String),
    Entries(Vec<RosterEntry>),
}

impl Serialize for RosterSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RosterSpec::Preset(p) => s.serialize_str(p),
            RosterSpec::Entries(e) => e.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for RosterSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RosterSpec;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a roster preset name or a list of strategies")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RosterSpec, E> {
                Ok(RosterSpec::Preset(v.to_string()))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, seq: A) -> std::result::Result<RosterSpec, A::Error> {
                Vec::deserialize(de::value::SeqAccessDeserializer::new(seq)).map(RosterSpec::Entries)
            }
        }
        d.deserialize_any(V)
    }
}

impl RosterSpec {
    fn expand(&self) -> Result<Vec<RosterEntry>> {
        match self {
            RosterSpec::Preset(p) if p == "figure3" => Ok(TOURNAMENT_ROSTER
                .iter()
                .map(|n| RosterEntry::Named(n.to_string()))
                .collect()),
            RosterSpec::Preset(p) => Err(CliError::validation(
                "roster",
                format!("unknown roster preset `{p}` (known: figure3)"),
            )),
            RosterSpec::Entries(e) => Ok(e.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelersSpec {
    pub low: i64,
    pub high: i64,
    pub bonus: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeParams {
    /// Also solve a Traveler's Dilemma.
    pub travelers: Option<TravelersSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchSpec {
    pub x: RosterEntry,
    pub y: RosterEntry,
    pub noise: f64,
    /// Rounds per simulated match; 0 reports exact payoffs only.
    pub rounds: u64,
    pub replicates: u32,
}

impl Default for MatchSpec {
    fn default() -> Self {
        MatchSpec {
            x: RosterEntry::Named("Extort-2".into()),
            y: RosterEntry::Named("Random".into()),
            noise: 0.0,
            rounds: 100_000,
            replicates: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentParams {
    pub noise: f64,
    pub rounds: u64,
    pub replicates: u32,
    pub self_play: bool,
    pub scoring: Scoring,
}

impl Default for TournamentParams {
    fn default() -> Self {
        TournamentParams {
            noise: 0.0,
            rounds: 200,
            replicates: 50,
            self_play: true,
            scoring: Scoring::ExactStationary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveParams {
    pub population: u64,
    /// Counts per roster name; everyone plays the first strategy by default.
    pub initial: Option<BTreeMap<String, u64>>,
    pub selection_strength: f64,
    pub mutation_rate: f64,
    pub generations: u64,
    pub process: Process,
    pub record_every: u64,
    pub replicates: u64,
    /// Execution noise folded into the pairwise payoffs.
    pub noise: f64,
    /// Also tabulate exact pairwise fixation probabilities.
    pub fixation: bool,
}

impl Default for EvolveParams {
    fn default() -> Self {
        EvolveParams {
            population: 100,
            initial: None,
            selection_strength: 1.0,
            mutation_rate: 0.01,
            generations: 100_000,
            process: Process::PairwiseFermi,
            record_every: 100,
            replicates: 20,
            noise: 0.0,
            fixation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub side: usize,
    pub neighborhood: Neighborhood,
    pub update: UpdateRule,
    pub selection_strength: f64,
    pub mutation_rate: f64,
    pub epochs: u64,
    pub replicates: u64,
    /// Initial share of each roster strategy; uniform by default.
    pub weights: Option<Vec<f64>>,
    /// Roster names counted as cooperators; by default those cooperating
    /// at least half the time against themselves.
    pub cooperative: Option<Vec<String>>,
    /// Epochs to snapshot; first and last by default.
    pub snapshot_epochs: Option<Vec<u64>>,
    pub svg: bool,
    pub noise: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec {
            side: 100,
            neighborhood: Neighborhood::VonNeumann4,
            update: UpdateRule::Asynchronous,
            selection_strength: 10.0,
            mutation_rate: 0.0,
            epochs: 1000,
            replicates: 1,
            weights: None,
            cooperative: None,
            snapshot_epochs: None,
            svg: false,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionScanParams {
    pub n_players: usize,
    pub benefit: f64,
    pub cost: f64,
    pub chi_max: f64,
    pub points: usize,
    /// All thresholds 1..=n_players by default.
    pub thresholds: Option<Vec<usize>>,
}

impl Default for RegionScanParams {
    fn default() -> Self {
        RegionScanParams {
            n_players: 8,
            benefit: 10.0,
            cost: 4.0,
            chi_max: 3.0,
            points: 41,
            thresholds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoevolveSpec {
    pub population: u64,
    pub initial: Option<BTreeMap<String, u64>>,
    pub selection_strength: f64,
    pub mutation_rate: f64,
    pub generations: u64,
    pub process: Process,
    pub record_every: u64,
    pub replicates: u64,
    pub noise: f64,
    pub delta: f64,
    pub event_rate: f64,
    pub reward_drift: f64,
    pub temptation_drift: f64,
}

impl Default for CoevolveSpec {
    fn default() -> Self {
        CoevolveSpec {
            population: 100,
            initial: None,
            selection_strength: 1.0,
            mutation_rate: 0.01,
            generations: 100_000,
            process: Process::PairwiseFermi,
            record_every: 100,
            replicates: 20,
            noise: 0.02,
            delta: 0.1,
            event_rate: 0.001,
            reward_drift: 0.0,
            temptation_drift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Analyze(AnalyzeParams),
    Match(MatchSpec),
    Tournament(TournamentParams),
    Evolve(EvolveParams),
    Lattice(LatticeSpec),
    RegionScan(RegionScanParams),
    Coevolve(CoevolveSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    command: Command,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    game: Option<GameSpec>,
    #[serde(default)]
    roster: Option<RosterSpec>,
    #[serde(default)]
    params: Option<serde_json::Value>,
}

/// A validated configuration with every default materialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Command,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roster: Option<RosterSpec>,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn game(&self) -> Result<Game2x2> {
        self.game
            .as_ref()
            .ok_or_else(|| CliError::validation("game", "this command takes no game"))?
            .build("game")
    }

    pub fn roster(&self, game: &Game2x2) -> Result<Vec<MemoryOne>> {
        let entries = match &self.roster {
            Some(r) => r.expand()?,
            None => return Err(CliError::validation("roster", "this command takes no roster")),
        };
        let mut out: Vec<MemoryOne> = Vec::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let path = format!("roster[{i}]");
            let s = e.build(game, &path)?;
            if out.iter().any(|o| o.name() == s.name()) {
                return Err(CliError::validation(
                    path,
                    format!("duplicate strategy name `{}`", s.name()),
                ));
            }
            out.push(s);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}

/// Attaches a config path to a model error, extending it with the name of
/// the offending parameter when the model reports one.
pub(crate) fn at(path: &str, err: zdlab::Error) -> CliError {
    match &err {
        zdlab::Error::InvalidParameter { name, reason } => {
            CliError::validation(format!("{path}.{name}"), reason.clone())
        }
        _ => CliError::validation(path, err.to_string()),
    }
}

fn classify(err: serde_path_to_error::Error<serde_json::Error>, prefix: &str) -> CliError {
    let path = err.path().to_string();
    let inner = err.into_inner();
    if matches!(inner.classify(), serde_json::error::Category::Data) {
        let path = match (prefix, path.as_str()) {
            ("", p) => p.to_string(),
            (pre, ".") => pre.to_string(),
            (pre, p) => format!("{pre}.{p}"),
        };
        CliError::validation(path, inner.to_string())
    } else {
        CliError::Parse {
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| classify(e, ""))?;
    de.end().map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    resolve(raw)
}

fn params_as<T: de::DeserializeOwned + Default>(value: Option<serde_json::Value>) -> Result<T> {
    match value {
        None | Some(serde_json::Value::Null) => Ok(T::default()),
        Some(v) => serde_path_to_error::deserialize(v).map_err(|e| classify(e, "params")),
    }
}

fn require(ok: bool, path: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::validation(path, message))
    }
}

fn check_probability(x: f64, path: &str) -> Result<()> {
    require((0.0..=1.0).contains(&x), path, "must lie in [0, 1]")
}

fn check_noise(x: f64, path: &str) -> Result<()> {
    require((0.0..=0.5).contains(&x), path, "must lie in [0, 0.5]")
}

fn check_beta(x: f64, path: &str) -> Result<()> {
    require(x >= 0.0 && x.is_finite(), path, "must be finite and >= 0")
}

fn resolve_initial(
    initial: Option<BTreeMap<String, u64>>,
    population: u64,
    roster: &[MemoryOne],
) -> Result<BTreeMap<String, u64>> {
    require(population >= 2, "params.population", "must be at least 2")?;
    let initial = initial.unwrap_or_else(|| BTreeMap::from([(roster[0].name().to_string(), population)]));
    for name in initial.keys() {
        require(
            roster.iter().any(|s| s.name() == name),
            &format!("params.initial.{name}"),
            "not in the roster",
        )?;
    }
    require(
        initial.values().sum::<u64>() == population,
        "params.initial",
        "counts must add up to the population size",
    )?;
    Ok(initial)
}

/// Self-play cooperation rate of each strategy.
fn self_cooperation(roster: &[MemoryOne], noise: f64) -> Vec<f64> {
    roster
        .iter()
        .map(|s| {
            let s = s.with_noise(noise);
            zdlab::engine::exact_distribution(&s, &s).cooperation_x()
        })
        .collect()
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    require(
        raw.schema_version == SCHEMA_VERSION,
        "schema_version",
        &format!("unsupported schema version (expected {SCHEMA_VERSION})"),
    )?;
    let command = raw.command;
    if !command.uses_game() && raw.game.is_some() {
        return Err(CliError::validation("game", "this command takes no game"));
    }
    if !command.uses_roster() && raw.roster.is_some() {
        return Err(CliError::validation("roster", "this command takes no roster"));
    }

    let game_spec = command.uses_game().then(|| {
        raw.game.unwrap_or_else(|| {
            GameSpec::preset(if command == Command::Lattice {
                GamePreset::Snowdrift
            } else {
                GamePreset::Pd
            })
        })
    });
    let game = game_spec.as_ref().map(|g| g.build("game")).transpose()?;
    let game_spec = game.as_ref().map(GameSpec::normalized);

    let roster_entries = if command.uses_roster() {
        let spec = raw.roster.unwrap_or_else(|| match command {
            Command::Tournament => RosterSpec::Preset("figure3".into()),
            Command::Lattice => RosterSpec::Entries(vec![
                RosterEntry::Zd {
                    name: Some("sZD".into()),
                    zd: ZdEntry {
                        kind: ZdKindTag::Generous,
                        chi: Some(2.0),
                        target: None,
                        phi: PhiSpec::default(),
                    },
                },
                RosterEntry::Named("AllD".into()),
            ]),
            _ => RosterSpec::Entries(
                ["AllD", "Extort-2", "ZDGTFT-2"]
                    .iter()
                    .map(|n| RosterEntry::Named(n.to_string()))
                    .collect(),
            ),
        });
        Some(spec.expand()?)
    } else {
        None
    };

    let mut config = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        command,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        game: game_spec,
        roster: roster_entries.map(RosterSpec::Entries),
        params: Params::Analyze(AnalyzeParams::default()),
    };
    let roster = match (&game, &config.roster) {
        (Some(g), Some(_)) => {
            let r = config.roster(g)?;
            require(r.len() >= 2, "roster", "at least two strategies required")?;
            r
        }
        _ => Vec::new(),
    };

    config.params = match command {
        Command::Analyze => {
            let p: AnalyzeParams = params_as(raw.params)?;
            if let Some(td) = &p.travelers {
                zdlab::TravelersDilemma::new(td.low, td.high, td.bonus)
                    .map_err(|e| at("params.travelers", e))?;
            }
            Params::Analyze(p)
        }
        Command::Match => {
            let p: MatchSpec = params_as(raw.params)?;
            let g = game.as_ref().expect("match uses a game");
            p.x.build(g, "params.x")?;
            p.y.build(g, "params.y")?;
            check_noise(p.noise, "params.noise")?;
            require(p.replicates >= 1, "params.replicates", "at least one replicate")?;
            Params::Match(p)
        }
        Command::Tournament => {
            let p: TournamentParams = params_as(raw.params)?;
            check_noise(p.noise, "params.noise")?;
            require(p.rounds >= 1, "params.rounds", "at least one round")?;
            require(p.replicates >= 1, "params.replicates", "at least one replicate")?;
            Params::Tournament(p)
        }
        Command::Evolve => {
            let mut p: EvolveParams = params_as(raw.params)?;
            check_beta(p.selection_strength, "params.selection_strength")?;
            check_probability(p.mutation_rate, "params.mutation_rate")?;
            check_noise(p.noise, "params.noise")?;
            require(p.record_every >= 1, "params.record_every", "must be positive")?;
            require(p.replicates >= 1, "params.replicates", "at least one replicate")?;
            p.initial = Some(resolve_initial(p.initial.take(), p.population, &roster)?);
            Params::Evolve(p)
        }
        Command::Coevolve => {
            let mut p: CoevolveSpec = params_as(raw.params)?;
            let g = game.as_ref().expect("coevolve uses a game");
            g.quadruple()
                .and_then(|q| q.check(GameClass::PrisonersDilemma))
                .map_err(|e| at("game", e))?;
            check_beta(p.selection_strength, "params.selection_strength")?;
            check_probability(p.mutation_rate, "params.mutation_rate")?;
            check_probability(p.event_rate, "params.event_rate")?;
            check_noise(p.noise, "params.noise")?;
            require(p.delta >= 0.0 && p.delta.is_finite(), "params.delta", "must be finite and >= 0")?;
            require(p.reward_drift.is_finite(), "params.reward_drift", "must be finite")?;
            require(p.temptation_drift.is_finite(), "params.temptation_drift", "must be finite")?;
            require(p.record_every >= 1, "params.record_every", "must be positive")?;
            require(p.replicates >= 1, "params.replicates", "at least one replicate")?;
            p.initial = Some(resolve_initial(p.initial.take(), p.population, &roster)?);
            Params::Coevolve(p)
        }
        Command::Lattice => {
            let mut p: LatticeSpec = params_as(raw.params)?;
            require(
                p.side >= zdlab::evolution::lattice::MIN_SIDE,
                "params.side",
                "lattice side must be at least 8",
            )?;
            require(roster.len() <= 256, "roster", "at most 256 strategies on a lattice")?;
            check_beta(p.selection_strength, "params.selection_strength")?;
            check_probability(p.mutation_rate, "params.mutation_rate")?;
            check_noise(p.noise, "params.noise")?;
            require(p.replicates >= 1, "params.replicates", "at least one replicate")?;
            let weights = p
                .weights
                .take()
                .unwrap_or_else(|| vec![1.0 / roster.len() as f64; roster.len()]);
            require(weights.len() == roster.len(), "params.weights", "one weight per roster strategy")?;
            require(
                weights.iter().all(|w| *w >= 0.0 && w.is_finite()) && weights.iter().sum::<f64>() > 0.0,
                "params.weights",
                "weights must be nonnegative with a positive sum",
            )?;
            p.weights = Some(weights);
            let cooperative = match p.cooperative.take() {
                Some(names) => {
                    for (i, n) in names.iter().enumerate() {
                        require(
                            roster.iter().any(|s| s.name() == n),
                            &format!("params.cooperative[{i}]"),
                            "not in the roster",
                        )?;
                    }
                    names
                }
                None => self_cooperation(&roster, p.noise)
                    .iter()
                    .zip(&roster)
                    .filter(|(c, _)| **c >= 0.5)
                    .map(|(_, s)| s.name().to_string())
                    .collect(),
            };
            p.cooperative = Some(cooperative);
            let snaps = p.snapshot_epochs.take().unwrap_or_else(|| vec![0, p.epochs]);
            for (i, e) in snaps.iter().enumerate() {
                require(*e <= p.epochs, &format!("params.snapshot_epochs[{i}]"), "beyond the last epoch")?;
            }
            p.snapshot_epochs = Some(snaps);
            Params::Lattice(p)
        }
        Command::RegionScan => {
            let mut p: RegionScanParams = params_as(raw.params)?;
            require(p.n_players >= 2, "params.n_players", "at least two players")?;
            require(p.chi_max >= 1.0 && p.chi_max.is_finite(), "params.chi_max", "must be finite and >= 1")?;
            require(p.points >= 2, "params.points", "at least two slopes")?;
            let thresholds = p.thresholds.take().unwrap_or_else(|| (1..=p.n_players).collect());
            for (i, &m) in thresholds.iter().enumerate() {
                zdlab::ThresholdGame::new(p.n_players, m, p.benefit, p.cost)
                    .map_err(|e| at(&format!("params.thresholds[{i}]"), e))?;
            }
            p.thresholds = Some(thresholds);
            Params::RegionScan(p)
        }
    };
    Ok(config)
}
