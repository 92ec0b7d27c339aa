use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deltaform::chains::total_charge;
use deltaform::conservation::{
    aligned_test_family, current_residual, domain_box, mixed_residual, spatial_box,
    standard_test_family, stokes_check, ResidualRow,
};
use deltaform::scenarios::{
    build_scenario, builtin, builtin_names, parse_config, parse_map, run_scenario, CheckConfig,
    CheckRow, Report, Scenario, ScenarioConfig, BUILTINS, CSV_HEADER,
};

/// Distributional currents on spacetime: charges, conservation residuals
/// and scenario runs.
#[derive(Parser, Debug)]
#[command(name = "deltaform", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Options {
    /// Gauss–Legendre points per axis.
    #[arg(long, global = true, value_name = "N")]
    quadrature_order: Option<usize>,
    /// Widest mollifier width of the oracle ladder.
    #[arg(long, global = true, value_name = "E")]
    epsilon: Option<f64>,
    /// Also write the report as CSV to this path.
    #[arg(long, global = true, value_name = "PATH")]
    csv_out: Option<PathBuf>,
    /// Tolerance overriding the command's default.
    #[arg(long, global = true, value_name = "T")]
    tol: Option<f64>,
    /// Seed for the random test-chain families and maps.
    #[arg(long, global = true, value_name = "S", default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Total charge at the configured time slices.
    Charge {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Covariant and adapted-coordinate conservation residuals.
    Residual {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Both sides of Stokes' theorem on the domain box.
    Stokes {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Charge before and after a coordinate change.
    Invariance {
        /// Scenario config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Four expressions separated by `;`, or a file holding them.
        #[arg(long)]
        map: String,
    },
    /// Run scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    /// Run a built-in scenario by name, a config file, or every built-in.
    Run {
        /// Name of a built-in scenario (see `list`).
        name: Option<String>,
        /// Scenario config file (TOML).
        #[arg(long, conflicts_with_all = ["name", "all"])]
        config: Option<PathBuf>,
        /// Run every built-in scenario.
        #[arg(long, conflicts_with = "name")]
        all: bool,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<deltaform::Error> for Failure {
    fn from(e: deltaform::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let opts = &cli.opts;
    match &cli.command {
        Command::List => {
            for (name, text) in BUILTINS {
                let c = parse_config(text).map_err(|e| Failure::Run(e.to_string()))?;
                println!("{name:<34} {}", c.description);
            }
            Ok(true)
        }
        Command::Charge { config } => charge(&load(config, opts)?, opts),
        Command::Residual { config } => residual(&load(config, opts)?, opts),
        Command::Stokes { config } => stokes(&load(config, opts)?, opts),
        Command::Invariance { config, map } => invariance(&load(config, opts)?, map, opts),
        Command::Scenario {
            action: ScenarioAction::Run { name, config, all },
        } => {
            let configs: Vec<ScenarioConfig> = match (name, config, all) {
                (_, _, true) => builtin_names().into_iter().filter_map(builtin).collect(),
                (Some(n), None, false) => vec![builtin(n).ok_or_else(|| {
                    Failure::Usage(format!(
                        "unknown scenario `{n}`; known: {}",
                        builtin_names().join(", ")
                    ))
                })?],
                (None, Some(path), false) => vec![read_config(path)?],
                _ => {
                    return Err(Failure::Usage(
                        "scenario run needs a NAME, --config FILE or --all".into(),
                    ))
                }
            };
            let scenarios = configs
                .iter()
                .map(|c| prepare(c, opts))
                .collect::<Result<Vec<_>, _>>()?;
            let mut reports = Vec::new();
            for s in &scenarios {
                let r = run_scenario(s, opts.seed)?;
                print!("{}", r.table());
                reports.push(r);
            }
            emit_csv(&reports, opts)?;
            Ok(reports.iter().all(Report::passed))
        }
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn prepare(config: &ScenarioConfig, opts: &Options) -> Result<Scenario, Failure> {
    let mut s = build_scenario(config)
        .map_err(|e| Failure::Usage(format!("scenario `{}`: {e}", config.name)))?;
    if let Some(n) = opts.quadrature_order {
        s.spec.order = n;
    }
    if let Some(e) = opts.epsilon {
        s.spec.epsilon = e;
    }
    s.spec
        .validate()
        .map_err(|e| Failure::Usage(format!("--quadrature-order/--epsilon: {e}")))?;
    if let Some(t) = opts.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    Ok(s)
}

fn load(path: &Path, opts: &Options) -> Result<Scenario, Failure> {
    prepare(&read_config(path)?, opts)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit_csv(reports: &[Report], opts: &Options) -> Result<(), Failure> {
    let Some(path) = &opts.csv_out else {
        return Ok(());
    };
    let mut text = String::new();
    if let Some(first) = reports.first() {
        text.push_str(&first.header_line());
        text.push('\n');
    }
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in reports {
        text.push_str(&r.csv_rows());
    }
    write_file(path, &text)
}

fn finish(rows: Vec<CheckRow>, s: &Scenario, opts: &Options) -> Result<bool, Failure> {
    let report = Report {
        scenario: s.config.name.clone(),
        seed: opts.seed,
        spec: s.spec,
        rows,
    };
    print!("{}", report.table());
    emit_csv(std::slice::from_ref(&report), opts)?;
    Ok(report.passed())
}

fn charge(s: &Scenario, opts: &Options) -> Result<bool, Failure> {
    let mut slices: Vec<(f64, Option<f64>, f64)> = s
        .config
        .checks
        .iter()
        .filter_map(|c| match c {
            CheckConfig::Charge {
                time,
                reference,
                tolerance,
            } => Some((*time, Some(*reference), opts.tol.unwrap_or(*tolerance))),
            _ => None,
        })
        .collect();
    if slices.is_empty() {
        let mid = 0.5 * (s.domain.lo[0] + s.domain.hi[0]);
        slices.push((mid, None, f64::NAN));
    }
    let mut rows = Vec::new();
    for (t, reference, tolerance) in slices {
        let q = total_charge(&s.current, &spatial_box(&s.domain, t)?, &s.spec)?;
        rows.push(CheckRow {
            check: format!("charge(t={t})"),
            value: q,
            reference: reference.unwrap_or(f64::NAN),
            tolerance,
            pass: reference.is_none_or(|r| (q - r).abs() < tolerance),
        });
    }
    finish(rows, s, opts)
}

fn residual(s: &Scenario, opts: &Options) -> Result<bool, Failure> {
    let mut rows = Vec::new();
    let name = &s.config.name;
    match &s.bulk {
        Some(bulk) => {
            let family = aligned_test_family(&s.domain, opts.seed)?;
            let r = mixed_residual(&s.current, bulk, &family, &s.spec)?;
            rows.push(ResidualRow::new(name, "mixed", r, opts.tol.unwrap_or(1e-5)));
        }
        None => {
            let family = standard_test_family(&s.domain, opts.seed)?;
            let r = current_residual(&s.current, &family, &s.spec)?;
            rows.push(ResidualRow::new(name, "covariant", r, opts.tol.unwrap_or(1e-6)));
            let law = s.law_residual()?;
            rows.push(ResidualRow::new(name, "adapted", law, opts.tol.unwrap_or(1e-10)));
        }
    }
    println!("# seed={} order={} epsilon={:e}", opts.seed, s.spec.order, s.spec.epsilon);
    println!("  {:<20} {:<10} {:>20} {:>10}  status", "scenario", "law", "residual", "tolerance");
    for r in &rows {
        println!(
            "  {:<20} {:<10} {:>20.12e} {:>10.1e}  {}",
            r.scenario,
            r.law,
            r.residual,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(path) = &opts.csv_out {
        let mut text = format!(
            "# seed={} order={} epsilon={:e}\n{}\n",
            opts.seed,
            s.spec.order,
            s.spec.epsilon,
            ResidualRow::CSV_HEADER
        );
        for r in &rows {
            text.push_str(&r.to_csv());
            text.push('\n');
        }
        write_file(path, &text)?;
    }
    Ok(rows.iter().all(|r| r.pass))
}

fn stokes(s: &Scenario, opts: &Options) -> Result<bool, Failure> {
    let m4 = domain_box(&s.domain)?;
    let r = stokes_check(&s.current, &m4, &m4.boundary()?, &s.spec)?;
    let tol = opts.tol.unwrap_or(1e-5);
    let pass = r.gap < tol;
    let rows = vec![
        CheckRow {
            check: "stokes_lhs".into(),
            value: r.lhs,
            reference: r.rhs,
            tolerance: tol,
            pass,
        },
        CheckRow {
            check: "stokes_gap".into(),
            value: r.gap,
            reference: 0.0,
            tolerance: tol,
            pass,
        },
    ];
    finish(rows, s, opts)
}

fn invariance(s: &Scenario, map: &str, opts: &Options) -> Result<bool, Failure> {
    let text = if Path::new(map).is_file() {
        std::fs::read_to_string(map)
            .map_err(|e| Failure::Usage(format!("cannot read {map}: {e}")))?
    } else {
        map.to_string()
    };
    let m = parse_map(&text, &s.domain).map_err(|e| Failure::Usage(e.to_string()))?;
    let t = 0.5 * (s.domain.lo[0] + s.domain.hi[0]);
    let chain = spatial_box(&s.domain, t)?;
    let pre = total_charge(&s.current, &chain.compose(&m)?, &s.spec)?;
    let post = total_charge(&s.current.pullback(&m)?, &chain, &s.spec)?;
    let tol = opts.tol.unwrap_or(1e-5);
    let rows = vec![
        CheckRow {
            check: "charge_mapped_chain".into(),
            value: pre,
            reference: f64::NAN,
            tolerance: tol,
            pass: true,
        },
        CheckRow {
            check: "charge_pulled_back".into(),
            value: post,
            reference: pre,
            tolerance: tol,
            pass: (pre - post).abs() < tol,
        },
    ];
    finish(rows, s, opts)
}
