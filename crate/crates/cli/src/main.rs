//! `quiver`: load or generate quivers, print sequence tables, run checks
//! and certificates, and drive seeded searches.
//!
//! Exit codes: 0 all checks pass or are inapplicable; 1 some check failed;
//! 2 input, parse or usage error; 3 numerical ambiguity.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quiver_spectra::checks::{self, CheckConfig, CheckKind, CheckReport, Verdict};
use quiver_spectra::families::{BatchSpec, Family, SearchSpec};
use quiver_spectra::quiver::Quiver;
use quiver_spectra::{spectra, Error};

#[derive(Parser)]
#[command(
    name = "quiver",
    version,
    about = "Quiver spectral calculus: Kirchhoff eigenvalue sums, bounds and identity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the per-k sequence table (S, D, B, H, U2D, A) of one quiver
    Spectra(SpectraArgs),
    /// Run named checks on one quiver; nonzero exit on any failure
    Check(CheckArgs),
    /// Run checks over many generated instances and aggregate margins
    Search(SearchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Path to a .qvr file ("-" reads stdin)
    #[arg(long, short = 'i', conflicts_with = "family")]
    input: Option<PathBuf>,

    /// Family: clover | ribbon | cycle | path | star | complete |
    /// random_tree | random_quiver | k7_ribbon_fixture | enumerate
    #[arg(long)]
    family: Option<String>,

    /// Vertex count (cycle, path, complete, random_tree, random_quiver,
    /// enumerate) or leaf count (star)
    #[arg(long)]
    n: Option<u64>,

    /// Edge count (clover, ribbon: total; random_quiver: simple base edges)
    #[arg(long)]
    m: Option<u64>,

    /// Loop count (random_quiver)
    #[arg(long)]
    loops: Option<u64>,

    /// Duplicated-edge count (random_quiver)
    #[arg(long)]
    multi: Option<u64>,

    /// PRNG seed; required for random families
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Csv,
    Json,
}

#[derive(Args)]
struct SpectraArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write here instead of stdout
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated check names, or "all"
    #[arg(long, default_value = "all", value_delimiter = ',')]
    checks: Vec<String>,
    /// Absolute tolerance override (default: 1e-7 * max(1, trace))
    #[arg(long)]
    tol: Option<f64>,
    /// Use the original simple-graph Brouwer bound (r forced to 0)
    #[arg(long)]
    classical_bound: bool,
    /// Brouwer threshold s for the threshold filter
    #[arg(long, default_value_t = 2.0)]
    threshold_s: f64,
    /// Loops per vertex for the loops-proposition check
    #[arg(long, default_value_t = 1)]
    loops_l: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Batch spec JSON file: {family, params, seed, trials, checks, ...}
    #[arg(long, conflicts_with = "family")]
    batch: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    /// Instance count (enumerate: 0 means every graph)
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Comma-separated check names, or "all"
    #[arg(long, default_value = "all", value_delimiter = ',')]
    checks: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    classical_bound: bool,
    #[arg(long, default_value_t = 2.0)]
    threshold_s: f64,
    #[arg(long, default_value_t = 1)]
    loops_l: u64,
    /// Track the exploratory max S_3 - (m + 6) statistic
    #[arg(long)]
    s3_stat: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match e {
            Error::NotSymmetric(..)
            | Error::DimensionMismatch(_)
            | Error::EigenResidual { .. }
            | Error::AmbiguousKernel { .. }
            | Error::Overflow(_)
            | Error::Inconsistent(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectra(args) => cmd_spectra(args),
        Command::Check(args) => cmd_check(args),
        Command::Search(args) => cmd_search(args),
    }
}

impl InputArgs {
    fn params(&self) -> BTreeMap<String, u64> {
        let mut map = BTreeMap::new();
        if let Some(n) = self.n {
            map.insert("n".to_string(), n);
        }
        if let Some(m) = self.m {
            map.insert("m".to_string(), m);
        }
        if let Some(loops) = self.loops {
            map.insert("loops".to_string(), loops);
        }
        if let Some(multi) = self.multi {
            map.insert("multi".to_string(), multi);
        }
        map
    }

    fn family(&self) -> Result<Option<(Family, u64)>, CliError> {
        let Some(name) = &self.family else {
            return Ok(None);
        };
        let family = Family::from_name_params(name, &self.params())?;
        let seed = match self.seed {
            Some(s) => s,
            None if family.is_random() => {
                return Err(CliError::usage(format!(
                    "--seed is required for the random family `{name}`"
                )));
            }
            None => 0,
        };
        Ok(Some((family, seed)))
    }

    fn load(&self) -> Result<Quiver, CliError> {
        if let Some(path) = &self.input {
            let text = if path.as_os_str() == "-" {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf)?;
                buf
            } else {
                fs::read_to_string(path)?
            };
            return Ok(Quiver::from_qvr(&text)?);
        }
        match self.family()? {
            Some((family, seed)) => {
                let mut rng = quiver_spectra::families::instance_rng(seed, 0);
                Ok(family.generate_with_rng(&mut rng)?)
            }
            None => Err(CliError::usage(
                "provide either --input <file.qvr> or --family <name>",
            )),
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_spectra(args: SpectraArgs) -> Result<u8, CliError> {
    let q = args.input.load()?;
    let table = spectra::sequence_table(&q)?;
    let (b0, b1) = spectra::betti(&q)?;
    let lambda1 = table.eigs.first().copied().unwrap_or(0.0);
    let chi = q.n() as i64 - q.m() as i64;

    let text = match args.format {
        Format::Csv => {
            let mut out = table.to_csv();
            out.push_str(&format!(
                "# n={} m={} r={} lambda1={} chi={} b0={} b1={}\n",
                q.n(),
                table.m,
                table.r,
                lambda1,
                chi,
                b0,
                b1
            ));
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = (1..=table.n)
                .map(|k| {
                    serde_json::json!({
                        "k": k,
                        "S": table.s[k - 1],
                        "D": table.d[k - 1],
                        "B": table.b[k - 1],
                        "H": table.h[k - 1],
                        "U2D": table.u2d[k - 1],
                        "A": table.a[k - 1],
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "summary": {
                    "n": q.n(), "m": table.m, "r": table.r,
                    "lambda1": lambda1, "chi": chi, "b0": b0, "b1": b1,
                },
                "rows": rows,
            });
            let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
            out.push('\n');
            out
        }
        Format::Human => {
            let mut out = format!(
                "n={} m={} r={} lambda1={:.6} chi={} b0={} b1={}\n",
                q.n(),
                table.m,
                table.r,
                lambda1,
                chi,
                b0,
                b1
            );
            out.push_str(&format!(
                "{:>4} {:>12} {:>8} {:>8} {:>8} {:>8} {:>12}  tightest\n",
                "k", "S", "D", "B", "H", "U2D", "A"
            ));
            for k in 1..=table.n {
                // which upper bound on S_k binds here
                let b = table.b[k - 1] as f64;
                let h = table.h[k - 1] as f64;
                let u = table.u2d[k - 1] as f64;
                let tight = if b <= h && b <= u {
                    "B"
                } else if h <= b && h <= u {
                    "H"
                } else {
                    "U2D"
                };
                out.push_str(&format!(
                    "{:>4} {:>12.4} {:>8} {:>8} {:>8} {:>8} {:>12.4}  {}\n",
                    k,
                    table.s[k - 1],
                    table.d[k - 1],
                    table.b[k - 1],
                    table.h[k - 1],
                    table.u2d[k - 1],
                    table.a[k - 1],
                    tight
                ));
            }
            out
        }
    };
    emit(&args.output, &text)?;
    Ok(0)
}

fn parse_checks(names: &[String]) -> Result<Vec<CheckKind>, CliError> {
    if names.iter().any(|s| s.trim().eq_ignore_ascii_case("all")) {
        return Ok(CheckKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for name in names {
        kinds.push(CheckKind::parse(name)?);
    }
    Ok(kinds)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Inapplicable => "inapplicable",
    }
}

fn human_check_line(r: &CheckReport) -> String {
    let mut line = format!("{:<22} {}", r.check, verdict_word(r.verdict));
    if let Some(m) = r.margin {
        line.push_str(&format!("  margin={m:.6e}"));
    }
    line.push_str(&format!("  tol={:.3e}", r.tolerance));
    if r.sharp {
        line.push_str("  [sharp]");
    }
    if let Some(k) = r.first_violation {
        line.push_str(&format!("  first_violation={k}"));
    }
    line.push('\n');
    line
}

fn cmd_check(args: CheckArgs) -> Result<u8, CliError> {
    let q = args.input.load()?;
    let kinds = parse_checks(&args.checks)?;
    let cfg = CheckConfig {
        tol: args.tol,
        classical_bound: args.classical_bound,
        threshold_s: args.threshold_s,
        loops_l: args.loops_l,
    };

    let mut reports = Vec::new();
    let mut certificate = None;
    for kind in &kinds {
        if *kind == CheckKind::Certificate {
            let (report, cert) = checks::brouwer_certificate(&q, &cfg)?;
            reports.push(report);
            certificate = cert;
        } else {
            reports.push(checks::run_check(*kind, &q, &cfg)?);
        }
    }
    let all_ok = reports.iter().all(|r| r.verdict != Verdict::Fail);

    let text = match args.format {
        Format::Json | Format::Csv => {
            let doc = serde_json::json!({
                "quiver": q.to_qvr(),
                "reports": reports,
                "certificate": certificate,
            });
            let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
            out.push('\n');
            out
        }
        Format::Human => {
            let mut out = String::new();
            for r in &reports {
                out.push_str(&human_check_line(r));
            }
            if let Some(cert) = &certificate {
                out.push_str(&format!(
                    "certificate: tree of {} edges, {} additions, case boundary k={}\n",
                    cert.tree_edges.len(),
                    cert.added_edges.len(),
                    cert.case_boundary
                ));
            }
            out
        }
    };
    emit(&args.output, &text)?;
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_search(args: SearchArgs) -> Result<u8, CliError> {
    let spec: SearchSpec = if let Some(path) = &args.batch {
        let text = fs::read_to_string(path)?;
        let batch: BatchSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid batch spec: {e}")))?;
        batch.to_search_spec()?
    } else {
        let Some((family, seed)) = args.input.family()? else {
            return Err(CliError::usage(
                "provide either --batch <spec.json> or --family <name>",
            ));
        };
        SearchSpec {
            family,
            seed,
            trials: args.trials,
            checks: parse_checks(&args.checks)?,
            config: CheckConfig {
                tol: args.tol,
                classical_bound: args.classical_bound,
                threshold_s: args.threshold_s,
                loops_l: args.loops_l,
            },
            s3_stat: args.s3_stat,
        }
    };

    let report = quiver_spectra::families::search(&spec)?;
    let text = match args.format {
        Format::Json | Format::Csv => {
            let mut out = serde_json::to_string_pretty(&report).expect("serializable");
            out.push('\n');
            out
        }
        Format::Human => {
            let mut out = format!(
                "family={} seed={} instances={} failures={}\n",
                report.family, report.seed, report.instances, report.failures
            );
            for agg in &report.checks {
                out.push_str(&format!(
                    "{:<22} runs={} pass={} fail={} inapplicable={} sharp={} min_margin={}\n",
                    agg.check,
                    agg.runs,
                    agg.pass,
                    agg.fail,
                    agg.inapplicable,
                    agg.sharp_hits,
                    agg.min_margin
                        .map_or("n/a".to_string(), |m| format!("{m:.6e}"))
                ));
                if let Some(fc) = &agg.first_failure {
                    out.push_str(&format!(
                        "  first failure at instance {}:\n{}",
                        fc.instance,
                        fc.report.quiver.as_deref().unwrap_or("")
                    ));
                }
            }
            if let Some(s3) = &report.s3_excess {
                out.push_str(&format!(
                    "max S_3 - (m + 6) = {:.6} at instance {}\n",
                    s3.max_excess, s3.instance
                ));
            }
            if let Some(g) = report.green_radius_excess {
                out.push_str(&format!("max rho(g) - rho(L) = {g:.6}\n"));
            }
            out
        }
    };
    emit(&args.output, &text)?;
    Ok(if report.failures == 0 { 0 } else { 1 })
}
