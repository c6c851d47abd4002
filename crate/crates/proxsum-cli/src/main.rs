use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use proxsum_cli::config::load_config;
use proxsum_cli::experiment::run_experiment;
use proxsum_cli::fit::{fit_rate, Axis};
use proxsum_cli::game::demo_lower_bound;
use proxsum_cli::report::{emit_results_csv, emit_svg, emit_trace_csv, parse_results_csv};
use proxsum_cli::verify::{run_suite, Suite};

/// Oracle-complexity laboratory for finite-sum convex optimization.
#[derive(Parser)]
#[command(name = "proxsum", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
    },
    /// Run a verification suite (moreau, det_replay, rand_structure,
    /// prox_oracles, or all).
    Verify {
        suite: String,
        /// Perturb one checked object as a negative control.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Fit a rate exponent to a results CSV.
    Fit {
        results: PathBuf,
        #[arg(long, default_value = "inv_eps")]
        axis: String,
    },
    /// Play GD, smoothed AGD, and cyclic prox-point against the
    /// deterministic resisting oracle and print the floor table.
    DemoLowerBound {
        #[arg(long, default_value = "lipschitz")]
        variant: String,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 0.025)]
        eps: f64,
    },
}

// exit codes: 0 success, 1 usage/config error, 2 verification failure,
// 3 budget exhausted in strict mode
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(ExitCode::from(1));
                }
            };
            if let Ok(dir) = std::env::var("PROXSUM_OUT_DIR") {
                cfg.out_dir = dir;
            }
            let outputs = run_experiment(&cfg)?;
            let results: Vec<_> = outputs.iter().map(|o| o.result.clone()).collect();
            let fits = match fit_rate(&results, Axis::InvEps) {
                Ok(f) => vec![f],
                Err(_) => vec![],
            };
            std::fs::create_dir_all(&cfg.out_dir)?;
            let base = PathBuf::from(&cfg.out_dir).join(&cfg.prefix);
            let csv_path = base.with_extension("csv");
            std::fs::write(&csv_path, emit_results_csv(&results, &fits))?;
            println!("wrote {}", csv_path.display());
            if cfg.write_traces {
                for o in &outputs {
                    let p = PathBuf::from(&cfg.out_dir).join(format!(
                        "{}_trace_s{}_e{}.csv",
                        cfg.prefix, o.result.seed, o.result.eps
                    ));
                    std::fs::write(&p, emit_trace_csv(&o.trace, o.result.seed))?;
                }
            }
            if cfg.emit_svg {
                let pts: Vec<(f64, f64)> = results
                    .iter()
                    .filter_map(|r| r.queries.map(|q| (1.0 / r.eps, q as f64)))
                    .collect();
                let svg_path = base.with_extension("svg");
                std::fs::write(&svg_path, emit_svg(&pts, fits.first(), &cfg.prefix))?;
                println!("wrote {}", svg_path.display());
            }
            for r in &results {
                let q = r
                    .queries
                    .map(|q| q.to_string())
                    .unwrap_or_else(|| "budget_exhausted".into());
                println!(
                    "{} {} m={} eps={} seed={} queries={} floor_violations={}",
                    r.family, r.variant, r.m, r.eps, r.seed, q, r.floor_violations
                );
            }
            if let Some(f) = fits.first() {
                println!(
                    "fit axis={} slope={:.4} r2={:.4}",
                    f.axis.name(),
                    f.slope,
                    f.r_squared
                );
            }
            if results.iter().any(|r| r.floor_violations > 0) {
                return Ok(ExitCode::from(2));
            }
            if cfg.strict && results.iter().any(|r| r.queries.is_none()) {
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            inject_fault,
        } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::all().to_vec()
            } else {
                match Suite::parse(&suite) {
                    Some(s) => vec![s],
                    None => {
                        eprintln!("unknown suite '{suite}' (moreau, det_replay, rand_structure, prox_oracles, all)");
                        return Ok(ExitCode::from(1));
                    }
                }
            };
            let mut ok = true;
            for s in suites {
                let report = run_suite(s, inject_fault)?;
                print!("{}", report.render());
                ok &= report.ok();
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Fit { results, axis } => {
            let axis = match Axis::parse(&axis) {
                Some(a) => a,
                None => {
                    eprintln!("unknown axis '{axis}' (inv_eps, m, kappa)");
                    return Ok(ExitCode::from(1));
                }
            };
            let text = std::fs::read_to_string(&results)?;
            let (rows, _) = parse_results_csv(&text)?;
            match fit_rate(&rows, axis) {
                Ok(f) => {
                    println!(
                        "axis={} slope={} intercept={} r_squared={}",
                        f.axis.name(),
                        f.slope,
                        f.intercept,
                        f.r_squared
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("fit failed: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::DemoLowerBound { variant, m, eps } => {
            let demo = demo_lower_bound(&variant, m, eps)?;
            print!("{}", demo.render());
            Ok(if demo.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}
