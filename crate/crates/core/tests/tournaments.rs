use zdlab::strategy::{named, TOURNAMENT_ROSTER};
use zdlab::tournament::{round_robin, Scoring, TournamentConfig};
use zdlab::{Game2x2, MemoryOne};

fn preset_roster(game: &Game2x2) -> Vec<MemoryOne> {
    TOURNAMENT_ROSTER.iter().map(|n| named(n, game).unwrap()).collect()
}

#[test]
fn records_are_consistent() {
    let g = Game2x2::prisoners_dilemma();
    let mut config = TournamentConfig::new(preset_roster(&g), g);
    config.match_params.noise = 0.05;
    let res = round_robin(&config).unwrap();
    let n = res.standings.len();
    let wins: u32 = res.standings.iter().map(|s| s.record.wins).sum();
    let losses: u32 = res.standings.iter().map(|s| s.record.losses).sum();
    assert_eq!(wins, losses);
    for (i, s) in res.standings.iter().enumerate() {
        let r = s.record;
        assert_eq!(r.wins + r.losses + r.draws, n as u32);
        let row: f64 = res.pairwise[i].iter().map(|x| x.unwrap()).sum();
        assert!((row - s.total).abs() < 1e-9);
        // Exact scoring has no replicate spread.
        assert!(s.sd < 1e-12);
    }
    let mut sorted = res.ranking.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..n).collect::<Vec<_>>());
}

#[test]
fn extortioner_never_loses_head_to_head() {
    // Execution noise blurs the enforced relation, so play error-free.
    let g = Game2x2::prisoners_dilemma();
    let config = TournamentConfig::new(preset_roster(&g), g);
    let res = round_robin(&config).unwrap();
    assert_eq!(res.standing("Extort-2").unwrap().record.losses, 0);
}

#[test]
fn simulated_scoring_is_thread_independent() {
    let g = Game2x2::prisoners_dilemma();
    let mut config = TournamentConfig::new(preset_roster(&g), g);
    config.scoring = Scoring::Simulated;
    config.replicates = 5;
    config.match_params.noise = 0.05;
    config.match_params.seed = 17;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| round_robin(&config).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn simulated_scoring_tracks_exact_totals() {
    let g = Game2x2::prisoners_dilemma();
    let mut exact_cfg = TournamentConfig::new(preset_roster(&g), g);
    exact_cfg.match_params.noise = 0.05;
    let mut sim_cfg = exact_cfg.clone();
    sim_cfg.scoring = Scoring::Simulated;
    sim_cfg.replicates = 20;
    sim_cfg.match_params.rounds = 5000;
    let exact = round_robin(&exact_cfg).unwrap();
    let sim = round_robin(&sim_cfg).unwrap();
    for (e, s) in exact.standings.iter().zip(&sim.standings) {
        assert!((e.total - s.total).abs() < 0.15, "{}: {} vs {}", e.name, e.total, s.total);
    }
}
