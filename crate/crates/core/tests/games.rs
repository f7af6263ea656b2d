use proptest::prelude::*;
use zdlab::game::{Player, COOPERATE, DEFECT};
use zdlab::{Game2x2, GameClass, Quadruple, ThresholdGame, TravelersDilemma};

/// Brute-force best-response check of every profile.
fn brute_force_nash(row: &[[f64; 2]; 2], col: &[[f64; 2]; 2]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            let row_ok = row[a][b] >= row[1 - a][b];
            let col_ok = col[a][b] >= col[a][1 - b];
            if row_ok && col_ok {
                out.push((a, b));
            }
        }
    }
    out
}

#[test]
fn canonical_pd_values() {
    let g = Game2x2::prisoners_dilemma();
    let q = g.quadruple().unwrap();
    assert_eq!((q.t, q.r, q.p, q.s), (5.0, 3.0, 1.0, 0.0));
    assert_eq!(g.strict_dominant_strategy(Player::Row), Some(DEFECT));
    assert_eq!(g.strict_dominant_strategy(Player::Column), Some(DEFECT));
    assert_eq!(g.pure_nash_equilibria(), vec![(DEFECT, DEFECT)]);
}

#[test]
fn ordering_violation_names_inequality() {
    let err = Game2x2::symmetric("bad", Quadruple::new(5.0, 3.0, 1.0, 2.0), GameClass::PrisonersDilemma)
        .unwrap_err()
        .to_string();
    assert!(err.contains("P > S"), "{err}");
}

#[test]
fn chicken_has_two_anti_coordination_equilibria() {
    let g = Game2x2::chicken();
    assert_eq!(g.pure_nash_equilibria(), vec![(COOPERATE, DEFECT), (DEFECT, COOPERATE)]);
    assert_eq!(g.strict_dominant_strategy(Player::Row), None);
}

#[test]
fn due_care_dominance() {
    let g = Game2x2::due_care();
    assert!(!g.is_symmetric());
    assert_eq!(g.payoff(Player::Row, (1, 1)), -20.0);
    assert_eq!(g.payoff(Player::Column, (0, 0)), 0.0);
    assert_eq!(g.strict_dominant_strategy(Player::Column), Some(0));
    assert_eq!(g.strict_dominant_strategy(Player::Row), None);
    assert_eq!(g.pure_nash_equilibria(), vec![(0, 0)]);
    assert_eq!(g.actions(Player::Column)[0], "NoCare");
}

#[test]
fn travelers_dilemma() {
    let td = TravelersDilemma::default();
    assert_eq!(td.nash().unwrap(), (2, 2));
    assert_eq!(td.payoffs(50, 60), (52.0, 48.0));
    assert_eq!(TravelersDilemma::new(2, 3, 2.0).unwrap().nash().unwrap(), (2, 2));
    for high in 3..=100 {
        let td = TravelersDilemma::new(2, high, 2.0).unwrap();
        assert_eq!(td.nash().unwrap(), (2, 2), "high = {high}");
    }
}

#[test]
fn threshold_examples() {
    let tg = ThresholdGame::new(8, 4, 10.0, 4.0).unwrap();
    let all = tg.payoffs(8);
    assert_eq!((all.cooperator, all.defector), (9.5, 10.0));
    assert_eq!(tg.payoffs(0).defector, 0.0);
    let below = tg.payoffs(2);
    assert_eq!((below.cooperator, below.defector), (-1.0, 0.0));
}

#[test]
fn random_bimatrices_match_brute_force() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        // Small integer payoffs make ties common.
        let mut cell = || f64::from(rng.gen_range(-3..=3));
        let row = [[cell(), cell()], [cell(), cell()]];
        let col = [[cell(), cell()], [cell(), cell()]];
        let g = Game2x2::from_bimatrix("random", row, col, GameClass::Custom).unwrap();
        assert_eq!(g.pure_nash_equilibria(), brute_force_nash(&row, &col));
    }
}

fn pd_quadruple() -> impl Strategy<Value = Quadruple> {
    (0.0..10.0f64, 0.1..5.0f64, 0.1..5.0f64, 0.1..5.0f64).prop_filter_map(
        "2R > T + S",
        |(s, dp, dr, dt)| {
            let q = Quadruple::new(s + dp + dr + dt, s + dp + dr, s + dp, s);
            (2.0 * q.r > q.t + q.s).then_some(q)
        },
    )
}

proptest! {
    #[test]
    fn every_pd_has_dominant_defection(q in pd_quadruple()) {
        let g = Game2x2::symmetric("pd", q, GameClass::PrisonersDilemma).unwrap();
        prop_assert_eq!(g.strict_dominant_strategy(Player::Row), Some(DEFECT));
        prop_assert_eq!(g.strict_dominant_strategy(Player::Column), Some(DEFECT));
        prop_assert_eq!(g.pure_nash_equilibria(), vec![(DEFECT, DEFECT)]);
    }

    #[test]
    fn symmetric_games_mirror_payoffs(q in pd_quadruple()) {
        let g = Game2x2::symmetric("pd", q, GameClass::PrisonersDilemma).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert_eq!(g.payoff_col()[i][j], g.payoff_row()[j][i]);
            }
        }
    }

    #[test]
    fn threshold_totals(n in 2usize..20, m_frac in 0.0..1.0f64, k_frac in 0.0..=1.0f64, c in 0.1..10.0f64, extra in 0.1..10.0f64) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let b = c / m as f64 + extra;
        let tg = ThresholdGame::new(n, m, b, c).unwrap();
        let k = (n as f64 * k_frac).round() as usize;
        let pay = tg.payoffs(k);
        let total = k as f64 * pay.cooperator + (n - k) as f64 * pay.defector;
        let expected = if k == 0 {
            0.0
        } else if k >= m {
            n as f64 * b - c
        } else {
            -(k as f64) * c / m as f64
        };
        prop_assert!((total - expected).abs() < 1e-9, "total {} vs {}", total, expected);
    }
}
