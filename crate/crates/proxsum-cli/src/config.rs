//! Experiment configuration: flat key-value text with `[section]` headers,
//! no nesting. Unknown keys are rejected; all semantic validation errors
//! are collected and reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub variant: Option<String>,
    pub m: usize,
    pub d: Option<usize>,
    pub l: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub radius: f64,
    pub eps0: Option<f64>,
    pub chain_k: usize,
    pub centers: Option<Vec<f64>>,
    pub eps_grid: Vec<f64>,
    pub seeds: Vec<u64>,

    pub solver: SolverName,
    pub budget: u64,
    pub step: Option<f64>,
    pub epoch_length: Option<usize>,
    pub kappa: Option<f64>,
    pub inner_epochs: Option<usize>,

    pub targets: Vec<f64>,
    pub out_dir: String,
    pub prefix: String,
    pub emit_svg: bool,
    pub write_traces: bool,
    /// exit with the budget-exhausted code when any run misses its target
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Median,
    LeastSquares,
    Chain,
    DetAdversary,
    RandInstance,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Median => "median",
            Family::LeastSquares => "least_squares",
            Family::Chain => "chain",
            Family::DetAdversary => "det_adversary",
            Family::RandInstance => "rand_instance",
        }
    }
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "median" => Family::Median,
            "least_squares" => Family::LeastSquares,
            "chain" => Family::Chain,
            "det_adversary" => Family::DetAdversary,
            "rand_instance" => Family::RandInstance,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverName {
    Gd,
    Agd,
    Sgd,
    Svrg,
    CatalystSvrg,
    SmoothedAgd,
    SmoothedCatalyst,
    CyclicProx,
}

impl SolverName {
    pub fn name(self) -> &'static str {
        match self {
            SolverName::Gd => "gd",
            SolverName::Agd => "agd",
            SolverName::Sgd => "sgd",
            SolverName::Svrg => "svrg",
            SolverName::CatalystSvrg => "catalyst_svrg",
            SolverName::SmoothedAgd => "smoothed_agd",
            SolverName::SmoothedCatalyst => "smoothed_catalyst",
            SolverName::CyclicProx => "cyclic_prox",
        }
    }
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gd" => SolverName::Gd,
            "agd" => SolverName::Agd,
            "sgd" => SolverName::Sgd,
            "svrg" => SolverName::Svrg,
            "catalyst_svrg" => SolverName::CatalystSvrg,
            "smoothed_agd" => SolverName::SmoothedAgd,
            "smoothed_catalyst" => SolverName::SmoothedCatalyst,
            "cyclic_prox" => SolverName::CyclicProx,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} errors):", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    (
        "problem",
        &[
            "family", "variant", "m", "d", "L", "gamma", "lambda", "B", "eps0", "chain_k",
            "centers", "eps_grid", "seeds",
        ],
    ),
    (
        "solver",
        &["name", "budget", "step", "epoch_length", "kappa", "inner_epochs"],
    ),
    ("measure", &["targets", "strict"]),
    ("output", &["dir", "prefix", "svg", "traces"]),
];

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        errors: vec![format!("cannot read {}: {e}", path.display())],
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut errors: Vec<String> = Vec::new();
    let mut kv: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let line = match line.find('#') {
            Some(i) => line[..i].trim(),
            None => line,
        };
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if !KNOWN_KEYS.iter().any(|(s, _)| *s == section) {
                errors.push(format!("line {}: unknown section [{section}]", lineno + 1));
            }
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                let known = KNOWN_KEYS
                    .iter()
                    .find(|(s, _)| *s == section)
                    .map_or(false, |(_, keys)| keys.contains(&key.as_str()));
                if !known {
                    errors.push(format!(
                        "line {}: unknown key '{key}' in section [{section}]",
                        lineno + 1
                    ));
                }
                kv.insert((section.clone(), key), v.trim().to_string());
            }
            None => errors.push(format!("line {}: expected 'key = value'", lineno + 1)),
        }
    }

    let get = |sec: &str, key: &str| kv.get(&(sec.to_string(), key.to_string()));
    fn parse_f64_key(
        v: Option<&String>,
        sec: &str,
        key: &str,
        default: f64,
        errors: &mut Vec<String>,
    ) -> f64 {
        match v {
            None => default,
            Some(v) => v.parse().unwrap_or_else(|_| {
                errors.push(format!("[{sec}] {key}: not a number: '{v}'"));
                default
            }),
        }
    }

    let family = match get("problem", "family") {
        None => {
            errors.push("[problem] family is required".into());
            Family::Median
        }
        Some(v) => Family::parse(v).unwrap_or_else(|| {
            errors.push(format!("[problem] family: unknown family '{v}'"));
            Family::Median
        }),
    };
    let variant = get("problem", "variant").cloned();
    let m: usize = get("problem", "m")
        .map(|v| {
            v.parse().unwrap_or_else(|_| {
                errors.push(format!("[problem] m: not an integer: '{v}'"));
                2
            })
        })
        .unwrap_or(2);
    let d: Option<usize> = get("problem", "d").map(|v| {
        v.parse().unwrap_or_else(|_| {
            errors.push(format!("[problem] d: not an integer: '{v}'"));
            1
        })
    });
    let l = parse_f64_key(get("problem", "L"), "problem", "L", 1.0, &mut errors);
    let gamma = parse_f64_key(get("problem", "gamma"), "problem", "gamma", 1.0, &mut errors);
    let lambda = parse_f64_key(get("problem", "lambda"), "problem", "lambda", 0.0, &mut errors);
    let radius = parse_f64_key(get("problem", "B"), "problem", "B", 1.0, &mut errors);
    let eps0 = get("problem", "eps0").map(|v| {
        v.parse().unwrap_or_else(|_| {
            errors.push(format!("[problem] eps0: not a number: '{v}'"));
            1.0
        })
    });
    let chain_k: usize = get("problem", "chain_k")
        .map(|v| {
            v.parse().unwrap_or_else(|_| {
                errors.push(format!("[problem] chain_k: not an integer: '{v}'"));
                2
            })
        })
        .unwrap_or(64);
    let parse_list_f64 = |s: &str, label: &str, errors: &mut Vec<String>| -> Vec<f64> {
        s.split(',')
            .map(|t| {
                t.trim().parse().unwrap_or_else(|_| {
                    errors.push(format!("{label}: not a number: '{}'", t.trim()));
                    f64::NAN
                })
            })
            .collect()
    };
    let centers = get("problem", "centers")
        .map(|s| parse_list_f64(s, "[problem] centers", &mut errors));
    let eps_grid = match get("problem", "eps_grid") {
        None => {
            errors.push("[problem] eps_grid is required".into());
            vec![]
        }
        Some(s) => parse_list_f64(s, "[problem] eps_grid", &mut errors),
    };
    let seeds: Vec<u64> = match get("problem", "seeds") {
        None => vec![0],
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim().parse().unwrap_or_else(|_| {
                    errors.push(format!("[problem] seeds: not an integer: '{}'", t.trim()));
                    0
                })
            })
            .collect(),
    };

    let solver = match get("solver", "name") {
        None => {
            errors.push("[solver] name is required".into());
            SolverName::Gd
        }
        Some(v) => SolverName::parse(v).unwrap_or_else(|| {
            errors.push(format!("[solver] name: unknown solver '{v}'"));
            SolverName::Gd
        }),
    };
    let budget: u64 = get("solver", "budget")
        .map(|v| {
            v.parse().unwrap_or_else(|_| {
                errors.push(format!("[solver] budget: not an integer: '{v}'"));
                1
            })
        })
        .unwrap_or(1_000_000);
    let step = get("solver", "step").map(|v| {
        v.parse().unwrap_or_else(|_| {
            errors.push(format!("[solver] step: not a number: '{v}'"));
            1.0
        })
    });
    let epoch_length: Option<usize> = get("solver", "epoch_length").map(|v| {
        v.parse().unwrap_or_else(|_| {
            errors.push(format!("[solver] epoch_length: not an integer: '{v}'"));
            1
        })
    });
    let kappa = get("solver", "kappa").map(|v| {
        v.parse().unwrap_or_else(|_| {
            errors.push(format!("[solver] kappa: not a number: '{v}'"));
            0.0
        })
    });
    let inner_epochs: Option<usize> = get("solver", "inner_epochs").map(|v| {
        v.parse().unwrap_or_else(|_| {
            errors.push(format!("[solver] inner_epochs: not an integer: '{v}'"));
            1
        })
    });

    let targets = match get("measure", "targets") {
        None => eps_grid.clone(),
        Some(s) => parse_list_f64(s, "[measure] targets", &mut errors),
    };
    let strict = get("measure", "strict").map_or(false, |v| v == "true");
    let out_dir = get("output", "dir").cloned().unwrap_or_else(|| "out".into());
    let prefix = get("output", "prefix").cloned().unwrap_or_else(|| "exp".into());
    let emit_svg = get("output", "svg").map_or(false, |v| v == "true");
    let write_traces = get("output", "traces").map_or(false, |v| v == "true");

    // semantic validation, reported exhaustively
    if eps_grid.is_empty() {
        errors.push("[problem] eps_grid must have at least one entry".into());
    }
    if !eps_grid.windows(2).all(|w| w[0] > w[1]) {
        errors.push("[problem] eps_grid must be strictly decreasing".into());
    }
    if eps_grid.iter().any(|&e| !(e > 0.0)) {
        errors.push("[problem] eps_grid entries must be positive".into());
    }
    if seeds.is_empty() {
        errors.push("[problem] seeds must have at least one entry".into());
    }
    if m < 1 {
        errors.push("[problem] m must be at least 1".into());
    }
    if budget == 0 {
        errors.push("[solver] budget must be at least 1".into());
    }
    if family == Family::RandInstance || family == Family::DetAdversary {
        match &variant {
            None => errors.push(format!(
                "[problem] variant is required for family {}",
                family.name()
            )),
            Some(v) => {
                let det_ok = ["lipschitz", "lipschitz_sc", "smooth", "smooth_sc"].contains(&v.as_str());
                let rand_ok = proxsum::instances::RandVariant::parse(v).is_some();
                let ok = match family {
                    Family::DetAdversary => det_ok,
                    Family::RandInstance => rand_ok,
                    _ => true,
                };
                if !ok {
                    errors.push(format!("[problem] variant: unknown variant '{v}'"));
                }
            }
        }
    }

    if !errors.is_empty() {
        return Err(ConfigError { errors });
    }
    Ok(ExperimentConfig {
        family,
        variant,
        m,
        d,
        l,
        gamma,
        lambda,
        radius,
        eps0,
        chain_k,
        centers,
        eps_grid,
        seeds,
        solver,
        budget,
        step,
        epoch_length,
        kappa,
        inner_epochs,
        targets,
        out_dir,
        prefix,
        emit_svg,
        write_traces,
        strict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[problem]
family = median
m = 4
eps_grid = 0.1, 0.05
[solver]
name = smoothed_agd
";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.family, Family::Median);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.targets, cfg.eps_grid);
        assert_eq!(cfg.budget, 1_000_000);
    }

    #[test]
    fn non_decreasing_grid_is_rejected() {
        let text = MINIMAL.replace("0.1, 0.05", "0.1, 0.2");
        let err = parse_config(&text).unwrap_err();
        assert!(err.errors.iter().any(|e| e.contains("strictly decreasing")));
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let text = format!("{MINIMAL}momentum_hack = 3\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err
            .errors
            .iter()
            .any(|e| e.contains("momentum_hack") && e.contains("line")));
    }

    #[test]
    fn multiple_errors_are_listed_exhaustively() {
        let text = "\
[problem]
family = nope
eps_grid = 0.1, 0.2
wat = 1
[solver]
name = nope2
budget = 0
";
        let err = parse_config(text).unwrap_err();
        assert!(err.errors.len() >= 5, "{err}");
    }
}
