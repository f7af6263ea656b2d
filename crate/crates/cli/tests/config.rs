use zdlab_cli::config::{Params, RosterEntry, RosterSpec};
use zdlab_cli::{parse_config, CliError, Command};

fn validation_path(text: &str) -> (String, String) {
    match parse_config(text) {
        Err(CliError::Validation { path, message }) => (path, message),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn tournament_preset_expands_to_nine_strategies() {
    let cfg = parse_config(r#"{"schema_version": 1, "command": "tournament", "roster": "figure3"}"#).unwrap();
    let Some(RosterSpec::Entries(entries)) = &cfg.roster else {
        panic!("roster not resolved")
    };
    assert_eq!(entries.len(), 9);
    assert_eq!(entries[0], RosterEntry::Named("ZDGTFT-2".into()));
    let game = cfg.game().unwrap();
    assert_eq!(cfg.roster(&game).unwrap().len(), 9);
    assert_eq!(cfg.seed, 42);
}

#[test]
fn chi_below_one_is_rejected() {
    let (path, message) = validation_path(
        r#"{"schema_version": 1, "command": "tournament",
            "roster": ["TFT", {"zd": {"kind": "extortionate", "chi": 0.5}}]}"#,
    );
    assert_eq!(path, "roster[1].zd.chi");
    assert!(message.contains(">= 1"), "{message}");
}

#[test]
fn unknown_fields_are_named() {
    let (path, message) = validation_path(r#"{"schema_version": 1, "command": "analyze", "speling": 3}"#);
    assert!(message.contains("speling"), "{path}: {message}");

    let (path, message) = validation_path(
        r#"{"schema_version": 1, "command": "evolve", "params": {"generatoins": 10}}"#,
    );
    assert!(path.starts_with("params"), "{path}");
    assert!(message.contains("generatoins"), "{message}");

    let (path, message) = validation_path(
        r#"{"schema_version": 1, "command": "tournament",
            "roster": ["TFT", {"zd": {"kind": "generous", "chi": 2, "fi": 1}}]}"#,
    );
    assert!(path.starts_with("roster[1]"), "{path}");
    assert!(message.contains("fi"), "{message}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    assert!(matches!(
        parse_config(r#"{"schema_version": 1, "command": "#),
        Err(CliError::Parse { .. })
    ));
    assert!(matches!(
        parse_config(r#"{"schema_version": 1, "command": "analyze"} trailing"#),
        Err(CliError::Parse { .. })
    ));
}

#[test]
fn semantic_errors_carry_paths() {
    let cases = [
        (r#"{"schema_version": 1, "command": "tournament", "roster": ["TFT", "Nope"]}"#, "roster[1]"),
        (r#"{"schema_version": 1, "command": "tournament", "roster": ["TFT", "TFT"]}"#, "roster[1]"),
        (r#"{"schema_version": 1, "command": "analyze", "game": {"class": "PrisonersDilemma", "T": 5, "R": 3, "P": 1, "S": 2}}"#, "game"),
        (r#"{"schema_version": 1, "command": "tournament", "params": {"noise": 0.7}}"#, "params.noise"),
        (r#"{"schema_version": 2, "command": "analyze"}"#, "schema_version"),
        (r#"{"schema_version": 1, "command": "region-scan", "roster": "figure3"}"#, "roster"),
        (r#"{"schema_version": 1, "command": "evolve", "params": {"population": 10, "initial": {"AllD": 5}}}"#, "params.initial"),
        (r#"{"schema_version": 1, "command": "match", "params": {"x": {"zd": {"kind": "equalizer", "target": 4}}}}"#, "params.x.zd"),
        (r#"{"schema_version": 1, "command": "lattice", "params": {"side": 4}}"#, "params.side"),
    ];
    for (text, expected) in cases {
        let (path, message) = validation_path(text);
        assert_eq!(path, expected, "{text}: {message}");
    }
}

#[test]
fn ordering_violation_names_the_inequality() {
    let (_, message) = validation_path(
        r#"{"schema_version": 1, "command": "analyze",
            "game": {"class": "PrisonersDilemma", "T": 5, "R": 3, "P": 1, "S": 2}}"#,
    );
    assert!(message.contains("P > S"), "{message}");
}

#[test]
fn resolved_configs_round_trip() {
    let configs = [
        r#"{"schema_version": 1, "command": "analyze", "game": {"preset": "due-care"}, "params": {"travelers": {"low": 2, "high": 100, "bonus": 2}}}"#,
        r#"{"schema_version": 1, "command": "match", "params": {"x": {"zd": {"kind": "equalizer", "target": 2, "phi": 0.1}}, "y": {"name": "q", "probs": [0.2, 0.4, 0.6, 0.8], "initial": 0.3}}}"#,
        r#"{"schema_version": 1, "command": "tournament", "seed": 7, "params": {"noise": 0.05, "scoring": "Simulated"}}"#,
        r#"{"schema_version": 1, "command": "evolve", "game": {"T": 5, "R": 3, "P": 1, "S": 0, "class": "PrisonersDilemma", "name": "pd"}}"#,
        r#"{"schema_version": 1, "command": "lattice", "game": {"preset": "snowdrift", "benefit": 1, "cost": 0.3}, "params": {"side": 20, "epochs": 5, "neighborhood": "Moore8"}}"#,
        r#"{"schema_version": 1, "command": "region-scan", "params": {"thresholds": [2, 4, 8]}}"#,
        r#"{"schema_version": 1, "command": "coevolve", "roster": ["AllD", "TFT", {"zd": {"kind": "generous", "chi": 1.5, "phi": "max/3"}}]}"#,
    ];
    for text in configs {
        let first = parse_config(text).unwrap();
        let again = parse_config(&first.to_json()).unwrap();
        assert_eq!(first, again, "{text}");
    }
}

#[test]
fn defaults_are_materialized() {
    let cfg = parse_config(r#"{"schema_version": 1, "command": "lattice"}"#).unwrap();
    assert_eq!(cfg.command, Command::Lattice);
    let Params::Lattice(p) = &cfg.params else { panic!() };
    assert_eq!(p.cooperative.as_deref(), Some(&["sZD".to_string()][..]));
    assert_eq!(p.snapshot_epochs.as_deref(), Some(&[0, 1000][..]));
    let json = cfg.to_json();
    assert!(json.contains("\"seed\": 42"));
    assert!(json.contains("\"weights\""));
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            zdlab_cli::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 7);
}
