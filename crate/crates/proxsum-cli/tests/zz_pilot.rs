//! Temporary pilot measurements for acceptance calibration.

use proxsum_cli::config::parse_config;
use proxsum_cli::experiment::run_experiment;
use proxsum_cli::fit::{fit_rate, Axis};

#[test]
#[ignore]
fn pilot_criterion5_chain_agd() {
    for (k, grid) in [
        (300usize, "0.0004, 0.0002, 0.0001"),
        (500, "0.0002, 0.0001, 0.00005"),
    ] {
        let cfg = parse_config(&format!(
            "[problem]
family = chain
m = 8
chain_k = {k}
gamma = 1
B = 1
eps_grid = {grid}
seeds = 1
[solver]
name = agd
budget = 16000
"
        ))
        .unwrap();
        let t0 = std::time::Instant::now();
        let out = run_experiment(&cfg).unwrap();
        let results: Vec<_> = out.iter().map(|o| o.result.clone()).collect();
        for r in &results {
            println!("k={k} eps={} queries={:?}", r.eps, r.queries);
        }
        let fit = fit_rate(&results, Axis::InvEps).unwrap();
        println!(
            "k={k} slope={:.4} r2={:.4} elapsed={:?}",
            fit.slope,
            fit.r_squared,
            t0.elapsed()
        );
    }
}

#[test]
#[ignore]
fn pilot_criterion6_separation() {
    let eps = 0.005;
    let cfg = parse_config(
        "[problem]
family = median
m = 64
B = 3
eps_grid = 0.005
seeds = 1
[solver]
name = smoothed_agd
budget = 90000
",
    )
    .unwrap();
    let out = run_experiment(&cfg).unwrap();
    println!("smoothed_agd m=64: {:?}", out[0].result.queries);

    for m in [16usize, 64, 256] {
        let t0 = std::time::Instant::now();
        let cfg = parse_config(&format!(
            "[problem]
family = median
m = {m}
B = 3
eps_grid = {eps}
seeds = 1,2,3,4,5
[solver]
name = smoothed_catalyst
budget = 150000
"
        ))
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        let mut qs: Vec<Option<u64>> = out.iter().map(|o| o.result.queries).collect();
        qs.sort();
        println!("catalyst m={m}: queries per seed {qs:?} elapsed={:?}", t0.elapsed());
    }
}
