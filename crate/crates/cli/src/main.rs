use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use monodromy::harness::checks::{check_convexity, config_nu, config_stokes, ConvexitySample, Polytope, CHECKS};
use monodromy::harness::{run_check, to_json, CheckReport, RunConfig};
use monodromy::stokes::Precision;
use monodromy::Error;

mod plot;

#[derive(Parser)]
#[command(name = "monodromy", version, about = "Stokes data, the monodromy map and its property checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionArg>,
    /// Headline tolerance of the check.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Output directory (default: output_dir of the config, else `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stokes data of the configured B.
    Stokes,
    /// ν(B) as a point of G*.
    Nu,
    /// Run a property check.
    Verify {
        #[arg(value_enum)]
        check: CheckArg,
    },
    /// Summarize the reports already in the output directory.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CheckArg {
    Poisson,
    Gw,
    Duistermaat,
    Convexity,
    Du,
    Casimir,
    Monodromy,
    Structure,
    All,
}

impl CheckArg {
    fn names(self) -> Vec<&'static str> {
        match self {
            CheckArg::All => CHECKS.to_vec(),
            CheckArg::Poisson => vec!["poisson"],
            CheckArg::Gw => vec!["gw"],
            CheckArg::Duistermaat => vec!["duistermaat"],
            CheckArg::Convexity => vec!["convexity"],
            CheckArg::Du => vec!["du"],
            CheckArg::Casimir => vec!["casimir"],
            CheckArg::Monodromy => vec!["monodromy"],
            CheckArg::Structure => vec!["structure"],
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() || matches!(e, Error::NotInBigCell { .. }) {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_json(&fs::read_to_string(p).map_err(|e| io_err(p, e))?)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(p) = cli.precision {
        cfg.precision = match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        };
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.check_tol = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cli.out.clone().or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_samples(path: &Path, samples: &[ConvexitySample]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    let width = samples.iter().map(|s| s.coords.len()).max().unwrap_or(0);
    let mut header = vec!["n".to_string(), "kind".into(), "sample".into()];
    header.extend((1..=width).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for s in samples {
        let mut row = vec![s.n.to_string(), s.kind.to_string(), s.sample.to_string()];
        row.extend(s.coords.iter().map(|x| format!("{x:.16e}")));
        row.resize(3 + width, String::new());
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn verify(cli: &Cli, cfg: &RunConfig, check: CheckArg) -> Result<bool, Failure> {
    let dir = out_dir(cli, cfg)?;
    let mut all = true;
    for name in check.names() {
        let report = if name == "convexity" {
            let (report, samples, polys): (CheckReport, Vec<ConvexitySample>, Vec<Polytope>) = check_convexity(cfg)?;
            write_samples(&dir.join("convexity_samples.csv"), &samples)?;
            if cfg.svg {
                write(&dir.join("convexity.svg"), &plot::convexity_svg(&samples, &polys))?;
            }
            report
        } else {
            run_check(name, cfg)?
        };
        write(&dir.join(format!("report_{name}.json")), &to_json(&report))?;
        print!("{}", report.summary());
        all &= report.passed;
    }
    Ok(all)
}

fn report(cli: &Cli, cfg: &RunConfig) -> Result<bool, Failure> {
    let dir = out_dir(cli, cfg)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| io_err(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
            name.starts_with("report_") && name.ends_with(".json")
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Usage(format!("no report_*.json in {}", dir.display())));
    }
    let mut reports = Vec::new();
    for p in &paths {
        let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
        let r: CheckReport = serde_json::from_str(&text).map_err(|e| io_err(p, e))?;
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        println!("{:<12} {}  max_error {:.3e}  trials {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.max_error, r.trials);
    }
    println!("overall: {}", if passed { "PASS" } else { "FAIL" });
    write(&dir.join("summary.json"), &to_json(&reports))?;
    Ok(passed)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = load_config(cli)?;
    match &cli.cmd {
        Cmd::Stokes => {
            let sd = config_stokes(&cfg)?;
            let path = out_dir(cli, &cfg)?.join("stokes_data.json");
            write(&path, &to_json(&sd))?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Cmd::Nu => {
            let p = config_nu(&cfg)?;
            let path = out_dir(cli, &cfg)?.join("nu.json");
            write(&path, &to_json(&p))?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Cmd::Verify { check } => verify(cli, &cfg, *check),
        Cmd::Report => report(cli, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
