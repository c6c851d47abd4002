use proxsum::oracle::{ProblemSource, QueryLedger};
use proxsum::resisting::synthetic_chain_problem;
use proxsum::solvers::{agd, GradMode, SolverConfig};

#[test]
fn bench_chain_agd() {
    let t0 = std::time::Instant::now();
    let p = synthetic_chain_problem(8, 120, 1.0, 1.0).unwrap();
    println!("build: {:?}", t0.elapsed());
    let cfg = SolverConfig {
        budget: 800,
        ..Default::default()
    };
    let mut ledger = QueryLedger::without_points(8);
    let t0 = std::time::Instant::now();
    let _ = agd(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
    println!("agd 800 queries: {:?}", t0.elapsed());
}
