//! End-to-end games against the deterministic resisting oracle: floor
//! certification, answer consistency under replay, and the structural
//! invariants of the finalized instances.

use proxsum::oracle::{OracleSource, QueryLedger};
use proxsum::resisting::{
    replay_verify, DetAdversary, DetVariant, FinalizedGame, ReplayKind,
};
use proxsum::solvers::{agd, cyclic_prox_point, gd, GradMode, SolverConfig};
use proxsum::Vector;
use rand::Rng;

enum Player {
    Gd,
    SmoothedAgd,
    CyclicProx,
    AgdDirect,
}

fn play(mut adv: DetAdversary, player: Player, budget: u64) -> FinalizedGame {
    let m = adv.m();
    let cfg = SolverConfig {
        budget,
        seed: 1,
        ..Default::default()
    };
    let mut ledger = QueryLedger::without_points(m);
    match player {
        Player::Gd => {
            gd(&mut adv, GradMode::Direct, &cfg, &mut ledger).unwrap();
        }
        Player::AgdDirect => {
            agd(&mut adv, GradMode::Direct, &cfg, &mut ledger).unwrap();
        }
        Player::SmoothedAgd => {
            let class = adv.class();
            let l = class.lipschitz_l.unwrap();
            let beta = l * l / adv.params().eps;
            agd(&mut adv, GradMode::Smoothed(beta), &cfg, &mut ledger).unwrap();
        }
        Player::CyclicProx => {
            cyclic_prox_point(&mut adv, &cfg, &mut ledger).unwrap();
        }
    }
    assert_eq!(ledger.total(), adv.queries_answered());
    adv.finalize().unwrap()
}

fn assert_floor_and_consistency(game: &FinalizedGame, label: &str) {
    let (_, f_star) = game.problem.optimum().unwrap();
    let certified = game.floor_certified_queries();
    assert!(certified > 0, "{label}: game too short to certify anything");
    for (idx, entry) in game.transcript.iter().enumerate() {
        if (idx as u64) < certified {
            let sub = game.problem.evaluate_sum(&entry.point).unwrap() - f_star;
            assert!(
                sub >= game.floor - 1e-9,
                "{label}: query {idx} at suboptimality {sub} below floor {}",
                game.floor
            );
        }
    }
    let report = replay_verify(game, 300, 99);
    assert!(
        report.ok(),
        "{label}: {} replay violations: {:?}",
        report.violations.len(),
        report.violations.iter().take(3).collect::<Vec<_>>()
    );
}

fn assert_orthogonality(game: &FinalizedGame, label: &str) {
    // every v_r drawn at a round close is orthogonal to all earlier queries
    for (r, &closed_at) in game.round_close_queries.iter().enumerate() {
        let v = &game.basis[r + 1];
        for entry in game.transcript.iter().take(closed_at as usize) {
            let ip = entry.point.dot(v).abs();
            assert!(
                ip <= 1e-10 * entry.point.norm().max(1.0),
                "{label}: |⟨x, v_{}⟩| = {ip}",
                r + 1
            );
        }
    }
    // δ row sums for closed rounds
    let m = game.params.m;
    for r in 0..game.rounds_closed {
        let sum: usize = game.delta[r].iter().filter(|&&d| d).count();
        assert_eq!(sum, m / 2, "{label}: round {} row sum", r + 1);
    }
}

#[test]
fn lipschitz_game_certifies_floor_for_all_players() {
    for m in [4usize, 5, 8] {
        let eps = 1.0 / 40.0; // k = 3
        for (name, player) in [
            ("gd", Player::Gd),
            ("smoothed-agd", Player::SmoothedAgd),
            ("cyclic-prox", Player::CyclicProx),
        ] {
            let adv = DetAdversary::lipschitz(m, 1.0, 1.0, eps, None).unwrap();
            let k = adv.k();
            assert_eq!(k, 3);
            let budget = (4 * k * m) as u64;
            let game = play(adv, player, budget);
            let label = format!("lipschitz m={m} {name}");
            assert!(
                game.floor_certified_queries() >= (k * m.div_ceil(2)) as u64,
                "{label}: too few certified queries"
            );
            assert_floor_and_consistency(&game, &label);
            assert_orthogonality(&game, &label);
        }
    }
}

#[test]
fn smooth_game_certifies_floor_for_gd_and_agd() {
    let eps = 1.0 / 700.0; // k = ⌊√(700/32)⌋ = 4, floor certified before round 2
    for (name, player) in [("gd", Player::Gd), ("agd", Player::AgdDirect)] {
        let adv = DetAdversary::smooth(4, 1.0, 1.0, eps, None).unwrap();
        assert_eq!(adv.k(), 4);
        let game = play(adv, player, 200);
        let label = format!("smooth {name}");
        assert_floor_and_consistency(&game, &label);
        assert_orthogonality(&game, &label);
    }
}

#[test]
fn strongly_convex_variants_stay_consistent() {
    let adv = DetAdversary::lipschitz_sc(4, 1.0, 0.05, 1e-3, None).unwrap();
    assert!(adv.theoretical_floor() > adv.params().eps);
    let game = play(adv, Player::CyclicProx, 120);
    assert_floor_and_consistency(&game, "lipschitz_sc cyclic");
    assert_orthogonality(&game, "lipschitz_sc cyclic");

    let adv = DetAdversary::smooth_sc(4, 1.0, 1e-3, 1e-6, None, None).unwrap();
    let game = play(adv, Player::AgdDirect, 400);
    assert_floor_and_consistency(&game, "smooth_sc agd");
    assert_orthogonality(&game, "smooth_sc agd");
}

#[test]
fn smooth_sc_floor_decays_with_rounds_as_certified() {
    let mut adv = DetAdversary::smooth_sc(2, 1.0, 1e-3, 1e-5, None, None).unwrap();
    let d = adv.dim();
    let mut floors = vec![adv.theoretical_floor()];
    let x0 = Vector::zeros(d);
    let mut ledger = QueryLedger::without_points(2);
    for _ in 0..3 {
        adv.query(0, &x0, 1.0, &mut ledger).unwrap();
        adv.query(1, &x0, 1.0, &mut ledger).unwrap();
        floors.push(adv.theoretical_floor());
    }
    for w in floors.windows(2) {
        assert!(w[1] < w[0], "floor must decay per closed round");
        assert!(w[1] > 0.0);
    }
}

#[test]
fn adversary_keeps_answering_after_the_game_ends() {
    let mut adv = DetAdversary::lipschitz(2, 1.0, 1.0, 1.0 / 13.0, None).unwrap();
    let k = adv.k();
    let d = adv.dim();
    let mut rng = proxsum::rng::rng(3);
    let mut ledger = QueryLedger::without_points(2);
    // close all k rounds
    for _ in 0..k {
        let mut x = Vector::zeros(d);
        for v in x.as_mut_slice().iter_mut().take(4) {
            *v = rng.gen_range(-0.5..0.5);
        }
        adv.query(0, &x, 1.0, &mut ledger).unwrap();
    }
    assert_eq!(adv.closed_rounds(), k);
    // endgame answers still work and stay consistent through finalize
    let x = Vector::zeros(d);
    adv.query(1, &x, 2.0, &mut ledger).unwrap();
    adv.query(0, &x, 0.5, &mut ledger).unwrap();
    let game = adv.finalize().unwrap();
    let report = replay_verify(&game, 200, 5);
    assert!(report.ok(), "{:?}", report.violations);
}

#[test]
fn tampered_transcript_is_flagged_exactly_once() {
    let adv = DetAdversary::lipschitz(4, 1.0, 1.0, 1.0 / 24.0, None).unwrap();
    let mut game = play(adv, Player::Gd, 60);
    let clean = replay_verify(&game, 200, 7);
    assert!(clean.ok());
    let idx = game.transcript.len() / 2;
    game.transcript[idx].prox[0] += 1e-3;
    let report = replay_verify(&game, 200, 7);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].entry, idx);
    assert_eq!(report.violations[0].kind, ReplayKind::Prox);
}

#[test]
fn finalized_components_carry_their_class_certificates() {
    // Lipschitz: sampled subgradient norms ≤ L; smooth: sampled gradient
    // differences ≤ γ‖x − y‖
    let game_l = play(
        DetAdversary::lipschitz(4, 1.0, 1.0, 1.0 / 24.0, None).unwrap(),
        Player::Gd,
        60,
    );
    let mut rng = proxsum::rng::rng(17);
    let d = game_l.problem.dim();
    let l_cert = game_l.problem.class().lipschitz_l.unwrap();
    for comp in game_l.problem.components() {
        for _ in 0..200 {
            let mut x = Vector::zeros(d);
            for v in x.as_mut_slice().iter_mut().take(8) {
                *v = rng.gen_range(-1.0..1.0);
            }
            assert!(comp.subgradient(&x).norm() <= l_cert + 1e-8);
        }
    }
    let game_s = play(
        DetAdversary::smooth(4, 1.0, 1.0, 1.0 / 700.0, None).unwrap(),
        Player::Gd,
        80,
    );
    let d = game_s.problem.dim();
    for comp in game_s.problem.components() {
        for _ in 0..200 {
            let mut x = Vector::zeros(d);
            let mut y = Vector::zeros(d);
            for v in x.as_mut_slice().iter_mut().take(8) {
                *v = rng.gen_range(-1.0..1.0);
            }
            for v in y.as_mut_slice().iter_mut().take(8) {
                *v = rng.gen_range(-1.0..1.0);
            }
            let gx = comp.subgradient(&x);
            let gy = comp.subgradient(&y);
            assert!(gx.dist(&gy) <= x.dist(&y) * (1.0 + 1e-8));
        }
    }
    // subgradient inequality battery on the finalized Lipschitz instance
    for comp in game_l.problem.components() {
        let worst = proxsum::oracle::subgradient_inequality_slack(comp.as_ref(), 1000, 1.0, 23);
        assert!(worst <= 1e-9, "violation {worst}");
    }

    let _ = game_s; // variant covered above
    assert!(matches!(game_l.params.variant, DetVariant::Lipschitz));
}

#[test]
fn dimension_budget_exhaustion_is_signaled() {
    // a tiny ambient dimension runs out of fresh directions
    let mut adv = DetAdversary::lipschitz(2, 1.0, 1.0, 1.0 / 40.0, Some(5)).unwrap();
    let d = adv.dim();
    let mut ledger = QueryLedger::without_points(2);
    let mut rng = proxsum::rng::rng(2);
    let mut saw_exhaustion = false;
    for _ in 0..8 {
        let mut x = Vector::zeros(d);
        for v in x.as_mut_slice() {
            *v = rng.gen_range(-0.5..0.5);
        }
        match adv.query(0, &x, 1.0, &mut ledger) {
            Ok(_) => {}
            Err(proxsum::Error::DimensionExhausted { .. }) => {
                saw_exhaustion = true;
                break;
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(saw_exhaustion);
}
