//! Dispatches a resolved configuration to the model and writes its outputs.
//!
//! Every table is computed in memory before anything touches the disk, so a
//! failing model leaves no files behind; a failing write removes whatever
//! was already written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use zdlab::engine::simulate_match;
use zdlab::evolution::{
    coevolve, evolve_ensemble, fixation_probability, lattice_simulate, zd_region_scan,
    CoevolveParams, EvolutionParams, LatticeParams, LatticeState, PayoffKernel, PayoffMatrix,
    PopulationState, RegionGrid,
};
use zdlab::rng::stream;
use zdlab::strategy::enforceable_opponent_range;
use zdlab::tournament::{round_robin, TournamentConfig};
use zdlab::{exact_payoffs, MatchParams, MemoryOne, Method, Player, ThresholdGame, TravelersDilemma};

use crate::config::{
    at, AnalyzeParams, CoevolveSpec, EvolveParams, ExperimentConfig, LatticeSpec, MatchSpec, Params,
    RegionScanParams, TournamentParams,
};
use crate::error::{CliError, Result};
use crate::report::{num, pgm, svg, Table};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One output file, named relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Output {
    fn csv(name: &str, table: &Table) -> Self {
        Output {
            name: name.to_string(),
            bytes: table.to_csv(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputRecord>,
}

/// Computes all outputs without touching the file system, on a dedicated
/// pool when `threads` is given.
pub fn execute(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<Output>> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::validation("threads", e.to_string()))?
            .install(|| dispatch(config)),
        None => dispatch(config),
    }
}

/// Executes the experiment and writes its outputs plus a manifest into
/// `config.output_dir`.
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunManifest> {
    let outputs = execute(config, threads)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        let mut records = Vec::with_capacity(outputs.len());
        for out in &outputs {
            let path = dir.join(&out.name);
            written.push(path.clone());
            fs::write(&path, &out.bytes).map_err(|e| CliError::io(&path, e))?;
            records.push(OutputRecord {
                file: out.name.clone(),
                bytes: out.bytes.len(),
                sha256: hex::encode(Sha256::digest(&out.bytes)),
            });
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: config.clone(),
            outputs: records,
        };
        let path = dir.join(MANIFEST_FILE);
        written.push(path.clone());
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    })();
    if result.is_err() {
        remove_all(&written);
    }
    result
}

fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

/// Hex SHA-256 of a file, for checking a manifest.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn dispatch(config: &ExperimentConfig) -> Result<Vec<Output>> {
    match &config.params {
        Params::Analyze(p) => analyze(config, p),
        Params::Match(p) => play_match(config, p),
        Params::Tournament(p) => tournament(config, p),
        Params::Evolve(p) => evolve(config, p),
        Params::Lattice(p) => lattice(config, p),
        Params::RegionScan(p) => region_scan(p),
        Params::Coevolve(p) => coevolution(config, p),
    }
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Stationary => "stationary",
        Method::Cycle => "cycle",
        Method::Decomposed => "decomposed",
        Method::Simulated => "simulated",
    }
}

fn analyze(config: &ExperimentConfig, p: &AnalyzeParams) -> Result<Vec<Output>> {
    let game = config.game()?;
    let mut summary = Table::new(&["property", "player", "value"]);
    let mut row = |property: &str, player: &str, value: String| {
        summary.push(vec![property.into(), player.into(), value])
    };
    row("game", "", game.name().to_string());
    row("class", "", game.class().label().to_string());
    for (player, label) in [(Player::Row, "row"), (Player::Column, "column")] {
        let dominant = game
            .strict_dominant_strategy(player)
            .map_or_else(|| "none".to_string(), |a| game.actions(player)[a].clone());
        row("strict_dominant_strategy", label, dominant);
    }
    let nash = game.pure_nash_equilibria();
    row("pure_nash_count", "", nash.len().to_string());
    row(
        "pure_nash",
        "",
        nash.iter().map(|&p| game.profile_label(p)).collect::<Vec<_>>().join(";"),
    );
    if game.is_symmetric() {
        let range = enforceable_opponent_range(&game)?;
        row("enforceable_opponent_min", "", num(range.lo));
        row("enforceable_opponent_max", "", num(range.hi));
    }

    let mut equilibria = Table::new(&["row_action", "column_action", "row_payoff", "column_payoff"]);
    for &(i, j) in &nash {
        equilibria.push(vec![
            game.actions(Player::Row)[i].clone(),
            game.actions(Player::Column)[j].clone(),
            num(game.payoff(Player::Row, (i, j))),
            num(game.payoff(Player::Column, (i, j))),
        ]);
    }
    let mut outputs = vec![
        Output::csv("analysis.csv", &summary),
        Output::csv("equilibria.csv", &equilibria),
    ];
    if let Some(td) = &p.travelers {
        let td = TravelersDilemma::new(td.low, td.high, td.bonus)
            .map_err(|e| at("params.travelers", e))?;
        let (a, b) = td.nash()?;
        let mut t = Table::new(&["low", "high", "bonus", "nash_claim_x", "nash_claim_y"]);
        t.push(vec![
            td.low().to_string(),
            td.high().to_string(),
            num(td.bonus()),
            a.to_string(),
            b.to_string(),
        ]);
        outputs.push(Output::csv("travelers.csv", &t));
    }
    Ok(outputs)
}

fn play_match(config: &ExperimentConfig, p: &MatchSpec) -> Result<Vec<Output>> {
    let game = config.game()?;
    let x = p.x.build(&game, "params.x")?;
    let y = p.y.build(&game, "params.y")?;
    let zd = p.x.zd_spec("params.x")?;
    let residual = |sx: f64, sy: f64| -> Result<String> {
        Ok(match &zd {
            Some(spec) => num(spec.residual(&game, sx, sy)?),
            None => String::new(),
        })
    };

    let mut t = Table::new(&[
        "x", "y", "method", "replicate", "rounds", "noise", "s_x", "s_y", "stderr_x", "stderr_y",
        "residual",
    ]);
    let exact = exact_payoffs(&x.with_noise(p.noise), &y.with_noise(p.noise), &game)?;
    t.push(vec![
        x.name().into(),
        y.name().into(),
        method_label(exact.method).into(),
        String::new(),
        String::new(),
        num(p.noise),
        num(exact.s_x),
        num(exact.s_y),
        String::new(),
        String::new(),
        residual(exact.s_x, exact.s_y)?,
    ]);
    if p.rounds > 0 {
        let params = MatchParams {
            rounds: p.rounds,
            noise: p.noise,
            seed: config.seed,
            record_trace: false,
        };
        let sims = (0..p.replicates)
            .into_par_iter()
            .map(|r| simulate_match(&x, &y, &game, &params, &mut stream(config.seed, 0, u64::from(r))))
            .collect::<zdlab::Result<Vec<_>>>()?;
        for (r, sim) in sims.iter().enumerate() {
            let (ex, ey) = sim.payoffs.stderr.unwrap_or((0.0, 0.0));
            t.push(vec![
                x.name().into(),
                y.name().into(),
                method_label(Method::Simulated).into(),
                r.to_string(),
                p.rounds.to_string(),
                num(p.noise),
                num(sim.payoffs.s_x),
                num(sim.payoffs.s_y),
                num(ex),
                num(ey),
                residual(sim.payoffs.s_x, sim.payoffs.s_y)?,
            ]);
        }
    }
    Ok(vec![Output::csv("match.csv", &t)])
}

fn tournament(config: &ExperimentConfig, p: &TournamentParams) -> Result<Vec<Output>> {
    let game = config.game()?;
    let roster = config.roster(&game)?;
    let mut tc = TournamentConfig::new(roster, game);
    tc.match_params = MatchParams {
        rounds: p.rounds,
        noise: p.noise,
        seed: config.seed,
        record_trace: false,
    };
    tc.replicates = p.replicates;
    tc.include_self_play = p.self_play;
    tc.scoring = p.scoring;
    let res = round_robin(&tc)?;

    let mut standings = Table::new(&["rank", "strategy", "total", "sd", "wins", "losses", "draws"]);
    for (rank, s) in res.ranked().enumerate() {
        standings.push(vec![
            (rank + 1).to_string(),
            s.name.clone(),
            num(s.total),
            num(s.sd),
            s.record.wins.to_string(),
            s.record.losses.to_string(),
            s.record.draws.to_string(),
        ]);
    }
    let mut pairwise = Table::new(&["strategy", "opponent", "payoff"]);
    for (i, row) in res.pairwise.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                pairwise.push(vec![
                    res.standings[i].name.clone(),
                    res.standings[j].name.clone(),
                    num(*v),
                ]);
            }
        }
    }
    Ok(vec![
        Output::csv("standings.csv", &standings),
        Output::csv("pairwise.csv", &pairwise),
    ])
}

fn payoff_table(matrix: &PayoffMatrix) -> Table {
    let mut t = Table::new(&["strategy", "opponent", "payoff"]);
    for i in 0..matrix.len() {
        for j in 0..matrix.len() {
            t.push(vec![
                matrix.names()[i].clone(),
                matrix.names()[j].clone(),
                num(matrix.get(i, j)),
            ]);
        }
    }
    t
}

fn initial_state(initial: &Option<BTreeMap<String, u64>>, roster: &[MemoryOne]) -> Result<PopulationState> {
    let initial = initial.as_ref().expect("resolved configs carry initial counts");
    let counts = roster
        .iter()
        .map(|s| initial.get(s.name()).copied().unwrap_or(0))
        .collect();
    PopulationState::new(counts).map_err(|e| at("params.initial", e))
}

fn abundance_rows(t: &mut Table, replicate: usize, names: &[String], steps: &[u64], counts: &[Vec<u64>]) {
    for (step, row) in steps.iter().zip(counts) {
        for (name, c) in names.iter().zip(row) {
            t.push(vec![replicate.to_string(), step.to_string(), name.clone(), c.to_string()]);
        }
    }
}

fn evolve(config: &ExperimentConfig, p: &EvolveParams) -> Result<Vec<Output>> {
    let game = config.game()?;
    let roster = config.roster(&game)?;
    let matrix = PayoffMatrix::from_roster(&roster, &game, p.noise)?;
    let init = initial_state(&p.initial, &roster)?;
    let params = EvolutionParams {
        selection_strength: p.selection_strength,
        mutation_rate: p.mutation_rate,
        generations: p.generations,
        seed: config.seed,
        process: p.process,
        record_every: p.record_every,
    };
    let runs = evolve_ensemble(&init, &params, &matrix, p.replicates)?;

    let mut traj = Table::new(&["replicate", "step", "strategy", "abundance"]);
    let mut summary = Table::new(&["replicate", "strategy", "final_quartile_mean", "peak_step"]);
    for (r, run) in runs.iter().enumerate() {
        abundance_rows(&mut traj, r, &run.names, &run.steps, &run.counts);
        for (i, name) in run.names.iter().enumerate() {
            summary.push(vec![
                r.to_string(),
                name.clone(),
                num(run.final_quartile_mean(i)),
                run.peak_step(i).to_string(),
            ]);
        }
    }
    let mut outputs = vec![
        Output::csv("payoffs.csv", &payoff_table(&matrix)),
        Output::csv("trajectory.csv", &traj),
        Output::csv("summary.csv", &summary),
    ];
    if p.fixation {
        let mut t = Table::new(&["invader", "resident", "population", "selection_strength", "probability", "neutral"]);
        for inv in 0..matrix.len() {
            for res in 0..matrix.len() {
                if inv == res {
                    continue;
                }
                let rho = fixation_probability(&matrix, inv, res, p.population, p.selection_strength)?;
                t.push(vec![
                    matrix.names()[inv].clone(),
                    matrix.names()[res].clone(),
                    p.population.to_string(),
                    num(p.selection_strength),
                    num(rho),
                    num(1.0 / p.population as f64),
                ]);
            }
        }
        outputs.push(Output::csv("fixation.csv", &t));
    }
    Ok(outputs)
}

fn lattice(config: &ExperimentConfig, p: &LatticeSpec) -> Result<Vec<Output>> {
    let game = config.game()?;
    let roster = config.roster(&game)?;
    let matrix = PayoffMatrix::from_roster(&roster, &game, p.noise)?;
    let coop_names = p.cooperative.as_ref().expect("resolved");
    let cooperative: Vec<bool> = roster.iter().map(|s| coop_names.iter().any(|n| n == s.name())).collect();
    let weights = p.weights.as_ref().expect("resolved");
    let params = LatticeParams {
        neighborhood: p.neighborhood,
        update: p.update,
        selection_strength: p.selection_strength,
        mutation_rate: p.mutation_rate,
        epochs: p.epochs,
        snapshot_epochs: p.snapshot_epochs.clone().expect("resolved"),
    };
    let runs = (0..p.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(config.seed, r, 0);
            let init = LatticeState::random(p.side, weights, &mut rng)?;
            lattice_simulate(&init, &matrix, &cooperative, &params, &mut rng)
        })
        .collect::<zdlab::Result<Vec<_>>>()?;

    let mut metrics = Table::new(&["replicate", "epoch", "cooperator_fraction", "largest_cluster"]);
    let mut outputs = Vec::new();
    for (r, run) in runs.iter().enumerate() {
        for m in &run.metrics {
            metrics.push(vec![
                r.to_string(),
                m.epoch.to_string(),
                num(m.cooperator_fraction),
                num(m.largest_cluster),
            ]);
        }
        for (epoch, snap) in &run.snapshots {
            outputs.push(Output {
                name: format!("lattice_r{r}_e{epoch}.pgm"),
                bytes: pgm(snap, roster.len()),
            });
            if p.svg {
                outputs.push(Output {
                    name: format!("lattice_r{r}_e{epoch}.svg"),
                    bytes: svg(snap, &cooperative, 4),
                });
            }
        }
    }
    let mut legend = Table::new(&["index", "strategy", "cooperative"]);
    for (i, s) in roster.iter().enumerate() {
        legend.push(vec![i.to_string(), s.name().into(), cooperative[i].to_string()]);
    }
    outputs.insert(0, Output::csv("lattice_metrics.csv", &metrics));
    outputs.insert(1, Output::csv("lattice_legend.csv", &legend));
    Ok(outputs)
}

fn region_scan(p: &RegionScanParams) -> Result<Vec<Output>> {
    let thresholds = p.thresholds.clone().expect("resolved");
    let tg = ThresholdGame::new(p.n_players, thresholds[0], p.benefit, p.cost)
        .map_err(|e| at("params", e))?;
    let mut grid = RegionGrid::full(p.n_players, p.chi_max, p.points);
    grid.thresholds = thresholds;
    let map = zd_region_scan(&tg, &grid)?;
    let mut t = Table::new(&[
        "threshold",
        "chi",
        "generous_feasible",
        "generous_phi_max",
        "extortionate_feasible",
        "extortionate_phi_max",
    ]);
    for (a, m) in map.thresholds.iter().enumerate() {
        for (b, chi) in map.chis.iter().enumerate() {
            t.push(vec![
                m.to_string(),
                num(*chi),
                map.generous[a][b].to_string(),
                num(map.generous_phi[a][b]),
                map.extortionate[a][b].to_string(),
                num(map.extortionate_phi[a][b]),
            ]);
        }
    }
    Ok(vec![Output::csv("region.csv", &t)])
}

fn coevolution(config: &ExperimentConfig, p: &CoevolveSpec) -> Result<Vec<Output>> {
    let game = config.game()?;
    let roster = config.roster(&game)?;
    let matrix = PayoffMatrix::from_roster(&roster, &game, p.noise)?;
    let init = initial_state(&p.initial, &roster)?;
    let params = CoevolveParams {
        evolution: EvolutionParams {
            selection_strength: p.selection_strength,
            mutation_rate: p.mutation_rate,
            generations: p.generations,
            seed: config.seed,
            process: p.process,
            record_every: p.record_every,
        },
        kernel: PayoffKernel {
            delta: p.delta,
            event_rate: p.event_rate,
            reward_drift: p.reward_drift,
            temptation_drift: p.temptation_drift,
        },
    };
    let runs = (0..p.replicates)
        .into_par_iter()
        .map(|r| {
            coevolve(
                &init,
                &game,
                &matrix,
                &params,
                &mut stream(config.seed, 0, r),
                &mut stream(config.seed, 1, r),
            )
        })
        .collect::<zdlab::Result<Vec<_>>>()?;

    let mut series = Table::new(&["replicate", "step", "reward", "temptation", "cooperation"]);
    let mut traj = Table::new(&["replicate", "step", "strategy", "abundance"]);
    let mut summary = Table::new(&[
        "replicate",
        "final_quartile_cooperation",
        "final_reward",
        "final_temptation",
        "accepted_events",
        "rejected_events",
    ]);
    for (r, run) in runs.iter().enumerate() {
        for k in 0..run.steps.len() {
            series.push(vec![
                r.to_string(),
                run.steps[k].to_string(),
                num(run.reward[k]),
                num(run.temptation[k]),
                num(run.cooperation[k]),
            ]);
        }
        abundance_rows(&mut traj, r, &run.names, &run.steps, &run.counts);
        summary.push(vec![
            r.to_string(),
            num(run.final_quartile_cooperation()),
            num(*run.reward.last().expect("nonempty")),
            num(*run.temptation.last().expect("nonempty")),
            run.accepted_events.to_string(),
            run.rejected_events.to_string(),
        ]);
    }
    Ok(vec![
        Output::csv("coevolve.csv", &series),
        Output::csv("trajectory.csv", &traj),
        Output::csv("summary.csv", &summary),
    ])
}

