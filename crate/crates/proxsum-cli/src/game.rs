//! The lower-bound demo: plays a batch of deterministic solvers against
//! the resisting oracle and prints a floor certification table.

use anyhow::{bail, Result};

use proxsum::oracle::QueryLedger;
use proxsum::resisting::{replay_verify, DetAdversary};
use proxsum::solvers::SolverConfig;

use crate::config::SolverName;
use crate::experiment::play_adversary;

pub struct GameRow {
    pub solver: &'static str,
    pub queries: u64,
    pub rounds_closed: usize,
    pub k: usize,
    pub floor: f64,
    pub certified_queries: u64,
    pub min_certified_subopt: f64,
    pub floor_violations: u64,
    pub replay_violations: usize,
}

pub struct GameDemo {
    pub rows: Vec<GameRow>,
    pub warnings: Vec<String>,
}

impl GameDemo {
    pub fn ok(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.floor_violations == 0 && r.replay_violations == 0)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(
            "solver         queries  rounds  k  floor        certified  min-subopt   floor-viol  replay-viol\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<14} {:>7}  {:>6}  {:>2} {:>11.5e} {:>9}  {:>11.5e}  {:>10}  {:>11}\n",
                r.solver,
                r.queries,
                r.rounds_closed,
                r.k,
                r.floor,
                r.certified_queries,
                r.min_certified_subopt,
                r.floor_violations,
                r.replay_violations
            ));
        }
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        s
    }
}

fn build(variant: &str, m: usize, eps: f64) -> Result<DetAdversary> {
    Ok(match variant {
        "lipschitz" => DetAdversary::lipschitz(m, 1.0, 1.0, eps, None)?,
        "lipschitz_sc" => DetAdversary::lipschitz_sc(m, 1.0, 0.05, eps, None)?,
        "smooth" => DetAdversary::smooth(m, 1.0, 1.0, eps, None)?,
        "smooth_sc" => DetAdversary::smooth_sc(m, 1.0, 1e-3, eps, None, None)?,
        other => bail!("unknown variant {other}"),
    })
}

pub fn demo_lower_bound(variant: &str, m: usize, eps: f64) -> Result<GameDemo> {
    let solvers: Vec<(&'static str, SolverName)> = match variant {
        "smooth" | "smooth_sc" => vec![
            ("gd", SolverName::Gd),
            ("agd", SolverName::Agd),
            ("cyclic-prox", SolverName::CyclicProx),
        ],
        _ => vec![
            ("gd", SolverName::Gd),
            ("smoothed-agd", SolverName::SmoothedAgd),
            ("cyclic-prox", SolverName::CyclicProx),
        ],
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (name, solver) in solvers {
        let mut adv = build(variant, m, eps)?;
        warnings.extend(adv.warnings.iter().cloned());
        let k = adv.k();
        let cfg = SolverConfig {
            budget: (8 * (k + 1) * m) as u64,
            seed: 0,
            ..Default::default()
        };
        let mut ledger = QueryLedger::without_points(m);
        play_adversary(solver, &mut adv, eps, &cfg, &mut ledger)?;
        let game = adv.finalize()?;
        let (_, f_star) = game.problem.optimum().unwrap();
        let certified = game.floor_certified_queries();
        let mut min_sub = f64::INFINITY;
        let mut violations = 0;
        for (idx, e) in game.transcript.iter().enumerate() {
            if (idx as u64) < certified {
                let sub = game.problem.evaluate_sum(&e.point)? - f_star;
                min_sub = min_sub.min(sub);
                if sub < game.floor - 1e-9 {
                    violations += 1;
                }
            }
        }
        let replay = replay_verify(&game, 400, 0xd320);
        rows.push(GameRow {
            solver: name,
            queries: game.transcript.len() as u64,
            rounds_closed: game.rounds_closed,
            k,
            floor: game.floor,
            certified_queries: certified,
            min_certified_subopt: min_sub,
            floor_violations: violations,
            replay_violations: replay.violations.len(),
        });
    }
    warnings.dedup();
    Ok(GameDemo { rows, warnings })
}
