use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use kernel_extrema::function::{AnalyticFunction, PointwiseFunction};
use kernel_extrema::levels::{boundary_length, level_profile, LevelConfig};
use kernel_extrema::search::{multistart_search, SearchProblem};
use kernel_extrema::verify::{run_suite, write_report, RunConfig, Suite};
use kernel_extrema::Error;

const EXIT_FAILED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "ke", version, about = "Verification suites and extremal search for Hardy and Bergman functionals")]
struct Cli {
    /// Worker threads (output does not depend on it).
    #[arg(long, global = true, env = "KE_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites and write a CSV report.
    Verify(VerifyArgs),
    /// Write the level profile of u = |f|^a (1 - |z|^2)^b.
    Profile(ProfileArgs),
    /// Maximize a functional over normalized polynomials.
    Search(SearchArgs),
}

#[derive(Args)]
struct QuadArgs {
    #[arg(long)]
    radial_nodes: Option<usize>,
    #[arg(long)]
    angular_nodes: Option<usize>,
    /// Maximum number of node doublings.
    #[arg(long)]
    max_refine: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// monotone, weaktype, contraction, functional, isoperimetric, lemma,
    /// coeff, dirichlet or all.
    #[arg(value_name = "SUITE")]
    suite_pos: Option<Suite>,
    #[arg(long, conflicts_with = "suite_pos")]
    suite: Option<Suite>,
    /// RunConfig JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Judge every check against this tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "ke-out")]
    out_dir: PathBuf,
    /// Single function instead of the random corpus: "poly:c0,c1,..." or
    /// "kernel:w_re,w_im,p,alpha".
    #[arg(long)]
    f: Option<AnalyticFunction>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    f: AnalyticFunction,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long, default_value_t = 24)]
    n_levels: usize,
    /// Levels at which to also write the level curves.
    #[arg(long, value_delimiter = ',')]
    contour: Vec<f64>,
    /// LevelConfig JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "ke-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    /// SearchProblem JSON.
    #[arg(value_name = "PROBLEM", required_unless_present = "config")]
    problem: Option<PathBuf>,
    #[arg(long, conflicts_with = "problem")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "ke-out")]
    out_dir: PathBuf,
    #[command(flatten)]
    quad: QuadArgs,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_)
            | Error::InvalidParameter(_)
            | Error::Domain(_)
            | Error::Divergent(_)
            | Error::ZeroFunction
            | Error::DimensionCap { .. } => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    text.push('\n');
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let suite = args
        .suite
        .or(args.suite_pos)
        .ok_or_else(|| usage("no suite given".into()))?;
    let mut cfg: RunConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.tol.is_some() {
        cfg.tol = args.tol;
    }
    if args.f.is_some() {
        cfg.f = args.f;
    }
    if let Some(n) = args.quad.radial_nodes {
        cfg.quadrature.radial_nodes = n;
    }
    if let Some(n) = args.quad.angular_nodes {
        cfg.quadrature.angular_nodes = n;
    }
    if let Some(n) = args.quad.max_refine {
        cfg.quadrature.max_refinements = n;
    }
    cfg.validate()?;
    write_json(&args.out_dir, "run.json", &cfg)?;

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut error = None;
    for s in suite.expand() {
        let start = Instant::now();
        match run_suite(s, &cfg) {
            Ok(r) => {
                let failed = r.iter().filter(|x| !x.pass).count();
                let seconds = start.elapsed().as_secs_f64();
                eprintln!("{s}: {} checks, {failed} failed ({seconds:.1} s)", r.len());
                timings.push(serde_json::json!({
                    "suite": s.name(),
                    "checks": r.len(),
                    "failed": failed,
                    "seconds": seconds,
                }));
                rows.extend(r);
            }
            Err(e) => {
                eprintln!("{s}: {e}");
                error = Some(e);
                break;
            }
        }
    }
    write_report(&rows, create(&args.out_dir, "report.csv")?)?;
    write_json(&args.out_dir, "timings.json", &timings)?;
    if let Some(e) = error {
        return Err(e.into());
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { EXIT_FAILED })
}

fn profile(args: ProfileArgs) -> Result<u8, Failure> {
    let cfg: LevelConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => LevelConfig::default(),
    };
    let pf = PointwiseFunction::new(args.f.clone(), args.a, args.b)?;
    let profile = level_profile(&pf, args.n_levels, &cfg)?;
    profile.write_csv(create(&args.out_dir, "profile.csv")?)?;
    write_json(
        &args.out_dir,
        "run.json",
        &serde_json::json!({ "f": args.f, "a": args.a, "b": args.b, "n_levels": args.n_levels, "levels": cfg }),
    )?;
    for (k, &t) in args.contour.iter().enumerate() {
        let contour = boundary_length(&pf, t, &cfg)?;
        let mut w = csv::Writer::from_writer(create(&args.out_dir, &format!("contour_{k}.csv"))?);
        let io = |e: csv::Error| usage(e.to_string());
        w.write_record(["t", "polyline", "x", "y"]).map_err(io)?;
        for (i, line) in contour.polylines.iter().enumerate() {
            for z in line {
                w.write_record([t.to_string(), i.to_string(), z.re.to_string(), z.im.to_string()])
                    .map_err(io)?;
            }
        }
        w.flush().map_err(|e| usage(e.to_string()))?;
        eprintln!("t = {t}: hyperbolic length {}", contour.length);
    }
    Ok(0)
}

fn search(args: SearchArgs) -> Result<u8, Failure> {
    let path = args
        .problem
        .or(args.config)
        .ok_or_else(|| usage("no problem file given".into()))?;
    let mut problem: SearchProblem = read_json(&path)?;
    if let Some(seed) = args.seed {
        problem.seed = seed;
    }
    if let Some(n) = args.quad.radial_nodes {
        problem.quadrature.radial_nodes = n;
    }
    if let Some(n) = args.quad.angular_nodes {
        problem.quadrature.angular_nodes = n;
    }
    let report = multistart_search(&problem)?;
    write_json(&args.out_dir, "problem.json", &problem)?;
    write_json(&args.out_dir, "search_report.json", &report)?;
    report.write_trace_csv(create(&args.out_dir, "search_trace.csv")?)?;
    eprintln!(
        "best {} reference {} gap {:e}{}",
        report.best_value,
        report.reference_value,
        report.gap,
        if report.partial { " (some restarts ran out of budget)" } else { "" }
    );
    if report.gap > problem.tolerance {
        eprintln!("gap exceeds the tolerance {:e}: a candidate beats the constant", problem.tolerance);
        return Ok(EXIT_FAILED);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("--jobs must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Profile(args) => profile(args),
        Command::Search(args) => search(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
