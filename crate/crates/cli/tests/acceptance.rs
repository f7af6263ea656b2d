//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails. Tolerances are fixed constants below.

use std::collections::BTreeMap;
use std::fs;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use zdlab::engine::{simulate_match, stationary_distribution, transition_matrix, TransitionMatrix};
use zdlab::evolution::{
    evolve_ensemble, fixation_monte_carlo, fixation_probability, lattice_simulate, EvolutionParams,
    LatticeParams, LatticeState, PayoffMatrix, PopulationState,
};
use zdlab::game::{Player, COOPERATE, DEFECT};
use zdlab::rng::stream;
use zdlab::strategy::{classic, enforceable_opponent_range, named};
use zdlab::{compile_zd, exact_payoffs, Game2x2, MatchParams, MemoryOne, TravelersDilemma, ZdSpec};
use zdlab_cli::{parse_config, run};

const RELATION_TOL: f64 = 1e-10;
const POWER_TOL: f64 = 1e-10;
const OPPONENT_SEED: u64 = 2024;

type Outcome = (bool, String);

fn pd() -> Game2x2 {
    Game2x2::prisoners_dilemma()
}

/// Fully mixed strategies with every probability in [0.05, 0.95].
fn random_strategies(count: usize, task: u64) -> Vec<MemoryOne> {
    let mut rng = stream(OPPONENT_SEED, task, 0);
    (0..count)
        .map(|i| {
            let probs = std::array::from_fn(|_| rng.gen_range(0.05..=0.95));
            let init = rng.gen_range(0.05..=0.95);
            MemoryOne::new(format!("r{i}"), probs, init).unwrap()
        })
        .collect()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    (
        ok && in_time,
        format!("{detail}; {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn relation_suite(spec: ZdSpec, baseline: f64) -> Outcome {
    let g = pd();
    let p = compile_zd(&g, &spec).unwrap();
    let mut worst: f64 = 0.0;
    for q in random_strategies(1000, 0) {
        let s = exact_payoffs(&p, &q, &g).unwrap();
        worst = worst.max(((s.s_x - baseline) - 2.0 * (s.s_y - baseline)).abs());
    }
    (worst <= RELATION_TOL, format!("max residual {worst:.3e} over 1000 opponents"))
}

fn c1() -> Outcome {
    timed(Duration::from_secs(5), || relation_suite(ZdSpec::extortionate(2.0), 1.0))
}

fn c2() -> Outcome {
    relation_suite(ZdSpec::generous(2.0), 3.0)
}

fn c3() -> Outcome {
    let g = pd();
    let opps = random_strategies(100, 1);
    let mut worst: f64 = 0.0;
    for target in [1.5, 2.0, 2.5] {
        let p = compile_zd(&g, &ZdSpec::equalizer(target)).unwrap();
        for q in &opps {
            worst = worst.max((exact_payoffs(&p, q, &g).unwrap().s_y - target).abs());
        }
    }
    (worst <= RELATION_TOL, format!("max |s_y - target| {worst:.3e}"))
}

fn c4() -> Outcome {
    let g = pd();
    let ext = compile_zd(&g, &ZdSpec::extortionate(2.0)).unwrap();
    let gen = compile_zd(&g, &ZdSpec::generous(2.0)).unwrap();
    let (mut ext_bad, mut gen_bad) = (0, 0);
    for q in random_strategies(1000, 0) {
        let e = exact_payoffs(&ext, &q, &g).unwrap();
        ext_bad += usize::from(e.s_x < e.s_y);
        let r = exact_payoffs(&gen, &q, &g).unwrap();
        gen_bad += usize::from(r.s_x > r.s_y);
    }
    (
        ext_bad == 0 && gen_bad == 0,
        format!("violations: extortionate {ext_bad}, generous {gen_bad}"),
    )
}

fn power_iteration(m: &TransitionMatrix) -> [f64; 4] {
    let mut v = [0.25; 4];
    for _ in 0..1_000_000 {
        let next: [f64; 4] = std::array::from_fn(|j| (0..4).map(|i| v[i] * m[i][j]).sum());
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if diff < 1e-16 {
            break;
        }
    }
    v
}

fn c5() -> Outcome {
    let g = pd();
    let strategies = random_strategies(100, 2);
    let params = MatchParams {
        rounds: 1_000_000,
        ..MatchParams::default()
    };
    let agree = strategies
        .par_chunks(2)
        .enumerate()
        .filter(|(k, pair)| {
            let exact = exact_payoffs(&pair[0], &pair[1], &g).unwrap();
            let sim = simulate_match(&pair[0], &pair[1], &g, &params, &mut stream(OPPONENT_SEED, 100, *k as u64))
                .unwrap();
            let (ex, ey) = sim.payoffs.stderr.unwrap();
            (sim.payoffs.s_x - exact.s_x).abs() <= 3.0 * ex && (sim.payoffs.s_y - exact.s_y).abs() <= 3.0 * ey
        })
        .count();
    let mut worst: f64 = 0.0;
    for pair in strategies.chunks(2) {
        let m = transition_matrix(&pair[0], &pair[1]);
        let v = stationary_distribution(&m).unwrap();
        let oracle = power_iteration(&m);
        for k in 0..4 {
            worst = worst.max((v.0[k] - oracle[k]).abs());
        }
    }
    (
        agree * 100 >= 95 * 50 && worst <= POWER_TOL,
        format!("{agree}/50 pairs within 3 stderr; power iteration max diff {worst:.3e}"),
    )
}

/// Standings rows keyed by strategy: (total, wins).
fn standings(csv: &str) -> BTreeMap<String, (f64, u32)> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name| header.iter().position(|h| *h == name).unwrap();
    let (s, t, w) = (col("strategy"), col("total"), col("wins"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[s].to_string(), (f[t].parse().unwrap(), f[w].parse().unwrap()))
        })
        .collect()
}

fn c6() -> Outcome {
    timed(Duration::from_secs(60), || {
        let dir = tempfile::tempdir().unwrap();
        let mut held = 0;
        let mut note = String::new();
        for seed in 1..=20u64 {
            let mut cfg = parse_config(&format!(
                r#"{{"schema_version": 1, "command": "tournament", "seed": {seed}, "roster": "figure3",
                    "params": {{"noise": 0.05, "scoring": "ExactStationary"}}}}"#
            ))
            .unwrap();
            cfg.output_dir = dir.path().join(seed.to_string());
            run(&cfg, None).unwrap();
            let rows = standings(&fs::read_to_string(cfg.output_dir.join("standings.csv")).unwrap());
            let others = |name: &'static str| rows.iter().filter(move |(n, _)| n.as_str() != name);
            let (gen_total, gen_wins) = rows["ZDGTFT-2"];
            let (alld_total, alld_wins) = rows["AllD"];
            let gen_top = others("ZDGTFT-2").all(|(_, (t, _))| gen_total > *t);
            let alld_bottom = others("AllD").all(|(_, (t, _))| alld_total < *t);
            let alld_most_wins = others("AllD").all(|(_, (_, w))| alld_wins >= *w);
            if gen_top && gen_wins == 0 && alld_bottom && alld_most_wins {
                held += 1;
            }
            if seed == 1 {
                let top = rows
                    .iter()
                    .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                    .map(|(n, (t, _))| format!("{n} {t:.4}"))
                    .unwrap();
                note = format!(
                    "top total {top}, ZDGTFT-2 {gen_total:.4} with {gen_wins} wins, AllD {alld_total:.4} with {alld_wins} wins"
                );
            }
        }
        (held >= 18, format!("extremal facts held in {held}/20 seeds ({note})"))
    })
}

fn c7() -> Outcome {
    timed(Duration::from_secs(5), || {
        let mut failures = Vec::new();
        let pd = Game2x2::prisoners_dilemma();
        if pd.strict_dominant_strategy(Player::Row) != Some(DEFECT)
            || pd.strict_dominant_strategy(Player::Column) != Some(DEFECT)
            || pd.pure_nash_equilibria() != vec![(DEFECT, DEFECT)]
        {
            failures.push("PD");
        }
        let dc = Game2x2::due_care();
        let no_care = |p| dc.actions(p).iter().position(|a| a == "NoCare");
        let (row_nc, col_nc) = (no_care(Player::Row).unwrap(), no_care(Player::Column).unwrap());
        let motorist_dominant = dc.strict_dominant_strategy(Player::Column) == Some(col_nc);
        if !motorist_dominant
            || dc.strict_dominant_strategy(Player::Row).is_some()
            || dc.pure_nash_equilibria() != vec![(row_nc, col_nc)]
        {
            failures.push("due care");
        }
        let ch = Game2x2::chicken();
        if ch.pure_nash_equilibria() != vec![(COOPERATE, DEFECT), (DEFECT, COOPERATE)] {
            failures.push("Chicken");
        }
        if TravelersDilemma::new(2, 100, 2.0).and_then(|t| t.nash()).ok() != Some((2, 2)) {
            failures.push("Traveler's Dilemma");
        }
        (failures.is_empty(), format!("failing games: {failures:?}"))
    })
}

fn c8() -> Outcome {
    let pd = enforceable_opponent_range(&Game2x2::prisoners_dilemma()).unwrap();
    let ch = enforceable_opponent_range(&Game2x2::chicken()).unwrap();
    (
        (pd.lo, pd.hi) == (1.0, 3.0) && (ch.lo, ch.hi) == (2.0, 3.0),
        format!("PD [{}, {}], Chicken [{}, {}]", pd.lo, pd.hi, ch.lo, ch.hi),
    )
}

fn c9() -> Outcome {
    timed(Duration::from_secs(300), || {
        let g = pd();
        let roster: Vec<MemoryOne> = ["AllD", "Extort-2", "ZDGTFT-2"]
            .iter()
            .map(|n| named(n, &g).unwrap())
            .collect();
        let m = PayoffMatrix::from_roster(&roster, &g, 0.0).unwrap();
        let params = EvolutionParams {
            selection_strength: 1.0,
            mutation_rate: 0.01,
            generations: 100_000,
            ..Default::default()
        };
        let init = PopulationState::homogeneous(3, 0, 100).unwrap();
        let runs = evolve_ensemble(&init, &params, &m, 20).unwrap();
        let n = runs.len() as f64;
        let gen_fq = runs.iter().map(|t| t.final_quartile_mean(2)).sum::<f64>() / n;
        let ext_fq = runs.iter().map(|t| t.final_quartile_mean(1)).sum::<f64>() / n;
        // Peak of the ensemble-mean abundance curve.
        let mean_peak = |s: usize| {
            let points = runs[0].steps.len();
            (0..points)
                .map(|i| (runs[0].steps[i], runs.iter().map(|t| t.counts[i][s]).sum::<u64>()))
                .fold((0, 0), |best, (step, v)| if v > best.1 { (step, v) } else { best })
                .0
        };
        let (ext_peak, gen_peak) = (mean_peak(1), mean_peak(2));
        let earlier = runs.iter().filter(|t| t.peak_step(1) < t.peak_step(2)).count();
        (
            gen_fq > ext_fq && ext_peak < gen_peak && earlier * 2 > runs.len(),
            format!(
                "final-quartile ZDGTFT-2 {gen_fq:.2} vs Extort-2 {ext_fq:.2}; ensemble peaks at {ext_peak} vs {gen_peak}; \
                 Extort-2 peaked first in {earlier}/20 seeds"
            ),
        )
    })
}

fn c10() -> Outcome {
    let g = pd();
    let tft = classic("TFT", &g).unwrap();
    let alld = classic("AllD", &g).unwrap();
    let pair = PayoffMatrix::from_roster(&[tft, alld], &g, 0.0).unwrap();
    let mut neutral_ok = true;
    for n in [2u64, 10, 100] {
        for beta in [0.0, 1.0] {
            neutral_ok &= fixation_probability(&pair, 0, 0, n, beta).unwrap() == 1.0 / n as f64;
        }
        neutral_ok &= fixation_probability(&pair, 1, 0, n, 0.0).unwrap() == 1.0 / n as f64;
    }
    let strategies = random_strategies(20, 3);
    let params = EvolutionParams {
        selection_strength: 1.0,
        seed: OPPONENT_SEED,
        ..Default::default()
    };
    let n = 10;
    let within: Vec<bool> = strategies
        .par_chunks(2)
        .enumerate()
        .map(|(k, pair)| {
            let m = PayoffMatrix::from_roster(pair, &g, 0.0).unwrap();
            let exact = fixation_probability(&m, 0, 1, n, params.selection_strength).unwrap();
            let est = fixation_monte_carlo(&m, 0, 1, n, &params, 10_000, k as u64).unwrap();
            (est.probability() - exact).abs() <= 3.0 * est.sigma_at(exact)
        })
        .collect();
    let agree = within.iter().filter(|&&b| b).count();
    (
        neutral_ok && agree == within.len(),
        format!("neutral exact: {neutral_ok}; Monte Carlo within 3 sigma for {agree}/10 pairs"),
    )
}

fn c11() -> Outcome {
    timed(Duration::from_secs(300), || {
        let g = Game2x2::snowdrift(1.0, 0.2).unwrap();
        let gen = compile_zd(&g, &ZdSpec::generous(2.0)).unwrap();
        let alld = classic("AllD", &g).unwrap();
        let m = PayoffMatrix::from_roster(&[gen, alld], &g, 0.0).unwrap();
        let params = LatticeParams::default();
        let results: Vec<(f64, f64, f64, f64)> = (0..10u64)
            .into_par_iter()
            .map(|seed| {
                let mut rng = stream(OPPONENT_SEED, seed, 0);
                let lattice = LatticeState::random(100, &[0.5, 0.5], &mut rng).unwrap();
                let run = lattice_simulate(&lattice, &m, &[true, false], &params, &mut rng).unwrap();
                let (a, b) = (run.metrics[0], *run.metrics.last().unwrap());
                (a.cooperator_fraction, b.cooperator_fraction, a.largest_cluster, b.largest_cluster)
            })
            .collect();
        let grew = results.iter().filter(|(f0, f1, c0, c1)| f1 > f0 && c1 > c0).count();
        let mean_final = results.iter().map(|r| r.1).sum::<f64>() / results.len() as f64;
        (
            grew >= 7,
            format!("cooperators grew with larger clusters in {grew}/10 seeds; mean final fraction {mean_final:.3}"),
        )
    })
}

fn c12() -> Outcome {
    let configs = [
        r#"{"schema_version": 1, "command": "analyze", "params": {"travelers": {"low": 2, "high": 100, "bonus": 2}}}"#,
        r#"{"schema_version": 1, "command": "match", "params": {"rounds": 20000, "replicates": 4, "noise": 0.05}}"#,
        r#"{"schema_version": 1, "command": "tournament", "params": {"scoring": "Simulated", "replicates": 8, "noise": 0.05}}"#,
        r#"{"schema_version": 1, "command": "evolve", "params": {"generations": 20000, "replicates": 8}}"#,
        r#"{"schema_version": 1, "command": "lattice", "params": {"side": 30, "epochs": 50, "replicates": 4, "svg": true}}"#,
        r#"{"schema_version": 1, "command": "region-scan", "params": {"points": 11}}"#,
        r#"{"schema_version": 1, "command": "coevolve", "params": {"generations": 20000, "replicates": 4, "event_rate": 0.05}}"#,
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (i, text) in configs.iter().enumerate() {
        let mut bodies = Vec::new();
        for (k, threads) in [1usize, 4, 4, 7].into_iter().enumerate() {
            let mut cfg = parse_config(text).unwrap();
            cfg.output_dir = dir.path().join(format!("{i}-{k}"));
            let manifest = run(&cfg, Some(threads)).unwrap();
            let csv: BTreeMap<String, Vec<u8>> = manifest
                .outputs
                .iter()
                .filter(|o| o.file.ends_with(".csv"))
                .map(|o| (o.file.clone(), fs::read(cfg.output_dir.join(&o.file)).unwrap()))
                .collect();
            bodies.push(csv);
        }
        files += bodies[0].len();
        if bodies.iter().any(|b| b != &bodies[0]) {
            mismatched.push(i);
        }
    }
    (
        mismatched.is_empty(),
        format!("{files} CSV files across 7 commands at 1/4/4/7 threads; mismatching configs {mismatched:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Extort-2 linear relation", c1),
        ("ZDGTFT-2 linear relation", c2),
        ("equalizer pins opponent score", c3),
        ("extortion and generosity dominance", c4),
        ("simulation and power-iteration oracles", c5),
        ("tournament extremal facts", c6),
        ("one-shot analysis", c7),
        ("enforceable ranges", c8),
        ("evolutionary transience", c9),
        ("fixation sanity", c10),
        ("lattice clustering", c11),
        ("determinism across thread counts", c12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(outcome) => outcome,
            Err(_) => (false, "panicked".to_string()),
        };
        failed += usize::from(!ok);
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
