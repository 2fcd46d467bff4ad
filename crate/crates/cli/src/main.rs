#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use riesz_stab::certifier::{
    certify, check_ss_with_v0, compute_b_theorem2, compute_v0, empirical_bound_test, CertifyOptions, Classification, HarnessOptions,
    StabilityCertificate, V0Options,
};
use riesz_stab::minimizer::{minimize_configuration, Domain, MinimizeOptions};
use riesz_stab::potentials::{PairPotential, PotentialConfig};
use riesz_stab::riesz::{
    constant_cd, constant_csd, cube_energy_integral_lower_bound, d1_zeta_limit, energy_integral_ball,
    equilibrium_energy_ball, interior_density_constant, RegimeTag,
};

use args::{Cli, Command, ScanFormat, Sweep};

pub const EXIT_COMPUTE: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_UNSTABLE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl From<riesz_stab::Error> for CliError {
    fn from(e: riesz_stab::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    match e {
        CliError::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        CliError::Compute(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_COMPUTE)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RIESZ_STAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RIESZ_STAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Compute(e.to_string()))
}

/// Replace a leading `--config FILE` by the subcommand and flags it describes.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    if argv.get(1).map(|a| a != "--config").unwrap_or(true) {
        return Ok(argv);
    }
    let path = argv.get(2).ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", Path::new(path).display())))?;
    let table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("{}: {e}", Path::new(path).display())))?;
    let mut out = vec![argv[0].clone()];
    let command = match table.get("command") {
        Some(toml::Value::String(c)) => c.clone(),
        _ => return Err(CliError::Usage("run config needs `command = \"<subcommand>\"`".into())),
    };
    out.push(command.into());
    let base = Path::new(path).parent().unwrap_or(Path::new(""));
    for (key, value) in &table {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            toml::Value::String(s) if matches!(key.as_str(), "potential" | "certificate" | "out" | "csv") => {
                base.join(s).display().to_string()
            }
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    _ => Err(CliError::Usage(format!("`{key}` must be a list of numbers"))),
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            _ => return Err(CliError::Usage(format!("unsupported value for `{key}`"))),
        };
        out.push(format!("{flag}={text}").into());
    }
    out.extend(argv.into_iter().skip(3));
    Ok(out)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Compute(e.to_string()))
}

fn load_potential(path: &Path) -> Result<PairPotential, CliError> {
    PotentialConfig::load(path).map_err(|e| match e {
        riesz_stab::Error::Io(_) | riesz_stab::Error::Parse(_) => CliError::Usage(e.to_string()),
        other => other.into(),
    })
}

fn parse_domain(spec: &str, d: usize) -> Result<Domain, CliError> {
    let bad = || CliError::Usage(format!("domain must be cube:<rib> or ball:<radius>, got {spec:?}"));
    let (kind, size) = spec.split_once(':').ok_or_else(bad)?;
    let size: f64 = size.parse().map_err(|_| bad())?;
    let dom = match kind {
        "cube" => Domain::cube(d, size),
        "ball" => Domain::ball(d, size),
        _ => return Err(bad()),
    };
    dom.map_err(|e| CliError::Usage(e.to_string()))
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Minimize(a) => {
            let dom = parse_domain(&a.domain, a.dimension)?;
            let opts = MinimizeOptions { starts: a.starts, max_iters: a.max_iters, grad_tol: a.grad_tol, seed: a.seed };
            let r = minimize_configuration(a.points, &dom, a.exponent, &opts)?;
            if let Some(path) = &a.csv {
                let file = fs::File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                r.configuration.write_csv(file)?;
            }
            let mut v = to_value(&r)?;
            v["seed"] = json!(a.seed);
            output::emit(&output::render(&v, a.output.format), a.output.out.as_deref())?;
            Ok(0)
        }
        Command::Constants(a) => {
            let v = constants(a.dimension, a.exponent, a.radius, a.lambda, a.phi0)?;
            output::emit(&output::render(&v, a.output.format), a.output.out.as_deref())?;
            Ok(0)
        }
        Command::Certify(a) => {
            let p = load_potential(&a.potential)?;
            let opts = CertifyOptions {
                lambda_grid: a.lambda_grid,
                epsilon: a.epsilon,
                budget: a.budget,
                minimize: MinimizeOptions { starts: Some(a.starts), seed: a.seed, ..MinimizeOptions::default() },
                v0: V0Options { truncation_cells: a.truncation, ..V0Options::default() },
                ..CertifyOptions::default()
            };
            let cert = certify(&p, &opts)?;
            output::emit(&output::render(&to_value(&cert)?, a.output.format), a.output.out.as_deref())?;
            Ok(match cert.classification {
                Classification::Unknown => EXIT_UNKNOWN,
                Classification::Unstable => EXIT_UNSTABLE,
                _ => 0,
            })
        }
        Command::Verify(a) => {
            let p = load_potential(&a.potential)?;
            let text = fs::read_to_string(&a.certificate)
                .map_err(|e| CliError::Usage(format!("{}: {e}", a.certificate.display())))?;
            let cert: StabilityCertificate = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", a.certificate.display())))?;
            if cert.dimension != p.dimension() {
                return Err(CliError::Usage("certificate and potential dimensions differ".into()));
            }
            let opts = HarnessOptions { trials: a.trials, n_max: a.n_max, box_rib: a.box_rib, seed: a.seed };
            let report = empirical_bound_test(&p, &cert, &opts)?;
            let mut v = to_value(&report)?;
            v["passed"] = json!(report.passed());
            v["seed"] = json!(a.seed);
            output::emit(&output::render(&v, a.output.format), a.output.out.as_deref())?;
            Ok(if report.violations > 0 { EXIT_COMPUTE } else { 0 })
        }
        Command::Scan(a) => {
            if a.steps < 1 {
                return Err(CliError::Usage("steps must be >= 1".into()));
            }
            let (header, rows) = match a.over {
                Sweep::Lambda => {
                    let path = a.potential.as_deref().ok_or_else(|| CliError::Usage("--over lambda needs --potential".into()))?;
                    if !(a.from > 0.0 && a.to > 0.0) {
                        return Err(CliError::Usage("rib grid bounds must be > 0".into()));
                    }
                    scan_lambda(&load_potential(path)?, &grid(a.from, a.to, a.steps, true))?
                }
                Sweep::S => {
                    let d = a.dimension.ok_or_else(|| CliError::Usage("--over s needs -d".into()))?;
                    scan_s(d, &grid(a.from, a.to, a.steps, false), a.radius, a.lambda, a.phi0)?
                }
            };
            let text = match a.format {
                ScanFormat::Table => output::table(&header, &rows),
                ScanFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let io = |e: csv::Error| CliError::Compute(e.to_string());
                    w.write_record(&header).map_err(io)?;
                    for r in &rows {
                        w.write_record(r).map_err(io)?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| CliError::Compute(e.to_string()))?)
                        .expect("csv output is utf-8")
                }
            };
            output::emit(&text, a.out.as_deref())?;
            Ok(0)
        }
    }
}

fn grid(from: f64, to: f64, steps: usize, geometric: bool) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    (0..steps)
        .map(|k| {
            let t = k as f64 / (steps - 1) as f64;
            if k == steps - 1 {
                to
            } else if geometric {
                from * (to / from).powf(t)
            } else {
                from + (to - from) * t
            }
        })
        .collect()
}

fn opt(v: riesz_stab::Result<f64>) -> Option<f64> {
    v.ok().filter(|x| x.is_finite())
}

fn constants(d: usize, s: f64, radius: f64, lambda: f64, phi0: f64) -> Result<Value, CliError> {
    if d == 0 || !(s >= 0.0) || !(radius > 0.0) || !(lambda > 0.0) || !(phi0 > 0.0) {
        return Err(CliError::Usage("constants need d >= 1, s >= 0 and positive radius, lambda, phi0".into()));
    }
    let df = d as f64;
    let sub = s < df;
    let interior = sub && s > df - 2.0 && s > 0.0;
    Ok(json!({
        "dimension": d,
        "exponent": s,
        "radius": radius,
        "lambda": lambda,
        "phi0": phi0,
        "regime": RegimeTag::classify(d, s),
        "energy_integral_ball": if sub { opt(energy_integral_ball(d, s, radius)) } else { None },
        "equilibrium_energy_ball": if sub { opt(equilibrium_energy_ball(d, s, radius)) } else { None },
        "cube_energy_integral_lower_bound": if sub { opt(cube_energy_integral_lower_bound(d, s, lambda)) } else { None },
        "interior_density_constant": if interior { Some(interior_density_constant(d, s)) } else { None },
        "C_d": if s == df { opt(constant_cd(d, lambda, phi0)) } else { None },
        "C_sd": if s > df { opt(constant_csd(d, s, lambda, phi0)) } else { None },
        "zeta_limit": if d == 1 && s > 1.0 { opt(d1_zeta_limit(s)) } else { None },
    }))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn scan_lambda(p: &PairPotential, lambdas: &[f64]) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let header = [
        "lambda", "regime", "criterion", "lhs", "rhs", "holds", "cell_within_core", "v0_value", "v0_cell_bound",
        "v0_remainder", "v0_upper", "truncation_cells", "v0_volume_approximation",
    ];
    let d = p.dimension();
    let s = p.core_exponent();
    let df = d as f64;
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let v0 = compute_v0(p, lambda, None)?;
        let within = df.sqrt() * lambda <= p.core_radius();
        let (criterion, lhs, rhs, approx) = if s < df {
            let c = check_ss_with_v0(p, lambda, v0)?;
            ("cell_energy_vs_half_v0", c.lhs, c.rhs, c.v0_volume_approximation)
        } else if s > df {
            let c = constant_csd(d, s, lambda, p.core_strength())?;
            ("csd_vs_half_v0_at_n2", c, 0.5 * v0.upper * 2f64.powf(1.0 - s / df), None)
        } else {
            // (C_d - eps) ln N0 with the default eps = C_d / 10
            let cd = constant_cd(d, lambda, p.core_strength())?;
            let (n0, _) = compute_b_theorem2(d, lambda, p.core_strength(), 0.1 * cd, v0.upper)?;
            ("cd_log_at_n0", 0.9 * cd * (n0 as f64).ln(), 0.5 * v0.upper, None)
        };
        let holds = lhs > rhs;
        rows.push(vec![
            lambda.to_string(),
            RegimeTag::classify(d, s).as_str().to_string(),
            criterion.to_string(),
            lhs.to_string(),
            rhs.to_string(),
            holds.to_string(),
            within.to_string(),
            v0.value.to_string(),
            v0.cell_bound.to_string(),
            v0.remainder.to_string(),
            v0.upper.to_string(),
            v0.truncation_cells.to_string(),
            cell(approx),
        ]);
    }
    Ok((header.iter().map(|h| h.to_string()).collect(), rows))
}

fn scan_s(d: usize, ss: &[f64], radius: f64, lambda: f64, phi0: f64) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let header = [
        "s", "regime", "energy_integral_ball", "equilibrium_energy_ball", "cube_energy_integral_lower_bound", "C_d",
        "C_sd",
    ];
    let mut rows = Vec::new();
    for &s in ss {
        let v = constants(d, s, radius, lambda, phi0)?;
        let get = |k: &str| v[k].as_f64();
        rows.push(vec![
            s.to_string(),
            RegimeTag::classify(d, s).as_str().to_string(),
            cell(get("energy_integral_ball")),
            cell(get("equilibrium_energy_ball")),
            cell(get("cube_energy_integral_lower_bound")),
            cell(get("C_d")),
            cell(get("C_sd")),
        ]);
    }
    Ok((header.iter().map(|h| h.to_string()).collect(), rows))
}
