//! `toric` command-line interface. JSON on stdout, JSON errors on stderr.
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use toric::condition::{certify, ALPHA_STAR};
use toric::io::{ComplexJson, RootEntry, RootsFile, SystemFile, FORMAT_VERSION};
use toric::montecarlo::{self, McConfig};
use toric::polytope::InvariantReport;
use toric::solver::{self, SolveConfig};
use toric::tracker::{track, LinearSegment, TrackerConfig};
use toric::{Error, ExpSumSystem, C64};

#[derive(Parser)]
#[command(name = "toric", version, about = "Certified solver for sparse exponential-sum systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone, Copy)]
struct Common {
    /// Random seed.
    #[arg(long, env = "TORIC_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for path or sample parallelism.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Frobenius moment, n = 1, A = {0,1,2,3}, H = 2.
    Em2N1,
    /// Squared condition moment, n = 1, A = {0,1,2,3}, H = 2.
    MuN1,
    /// Exclusion frequencies against a Gaussian target, n = 1, A = {0,1,2,3}.
    ExclusionN1,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polytope and lattice invariants of a system or supports-only file.
    Invariants { path: PathBuf },
    /// Certified roots of the target system.
    Solve {
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Initial Newton-step budget.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        max_attempts: Option<usize>,
        /// Write solver statistics here.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Track roots of a start system to a target along `g + t f`, `t ∈ [0, ∞)`.
    Track {
        #[arg(long)]
        start: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Roots of the start system; found by the oracle when omitted (n ≤ 2).
        #[arg(long)]
        roots: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Recompute certificates for roots ("-" reads stdin).
    Certify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        roots: PathBuf,
        #[arg(long, default_value_t = ALPHA_STAR)]
        alpha: f64,
    },
    /// Brute-force roots for n ≤ 2.
    Oracle { path: PathBuf },
    /// Monte Carlo checks of expectation and probability bounds.
    Montecarlo {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
        /// Per-sample values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Gaussian system on the supports of a file.
    Sample {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Input(Error),
    Numerical(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(json!({"error": e.kind(), "message": e.to_string()}))
        } else {
            Failure::Input(e)
        }
    }
}

type Out = Result<Value, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_system_file(path: &Path) -> Result<SystemFile, Failure> {
    Ok(SystemFile::from_json(&read_text(path)?)?)
}

fn read_system(path: &Path) -> Result<ExpSumSystem, Failure> {
    Ok(read_system_file(path)?.system()?)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn points_json(roots: &[Vec<C64>]) -> Value {
    Value::Array(
        roots
            .iter()
            .map(|z| json!({"re": z.iter().map(|c| c.re).collect::<Vec<_>>(), "im": z.iter().map(|c| c.im).collect::<Vec<_>>()}))
            .collect(),
    )
}

fn cmd_invariants(path: &Path) -> Out {
    let f = read_system_file(path)?;
    let st = f.support_tuple()?;
    let mut v = value(&InvariantReport::compute(&st)?);
    v["version"] = json!(FORMAT_VERSION);
    Ok(v)
}

fn cmd_solve(target: &Path, common: Common, budget: Option<f64>, max_attempts: Option<usize>, stats: Option<&Path>) -> Out {
    let file = read_system_file(target)?;
    let f = file.system()?;
    let mut cfg = SolveConfig { seed: common.seed, threads: common.threads, ..Default::default() };
    cfg.n0 = budget;
    if let Some(m) = max_attempts {
        cfg.max_attempts = m;
    }
    let out = solver::solve(&f, &cfg)?;
    if let Some(p) = stats {
        write(p, &serde_json::to_string_pretty(&out.stats).expect("plain data serializes"))?;
    }
    Ok(value(&RootsFile::from_solution(&file, &out.solution)))
}

fn cmd_track(start: &Path, target: &Path, roots: Option<&Path>, max_steps: usize) -> Out {
    let g = read_system(start)?.normalized()?;
    let f = read_system(target)?.normalized()?;
    if g.supports.points() != f.supports.points() {
        return Err(Failure::Input(Error::Dimension("start and target supports differ".into())));
    }
    let starts: Vec<Vec<C64>> = match roots {
        Some(p) => RootsFile::from_json(&read_text(p)?)?.roots.iter().map(RootEntry::point).collect(),
        None => toric::oracle::oracle_roots(&g)?.roots,
    };
    let ctx = solver::SolverContext::new(&f, None)?;
    let cfg = TrackerConfig { h_infinity: ctx.h_infinity, max_steps, ..TrackerConfig::default() };
    let path = LinearSegment::to_infinity(g, f);
    let mut all_ok = true;
    let paths: Vec<Value> = starts
        .iter()
        .map(|x| {
            let t = track(&path, x, &cfg);
            all_ok &= t.succeeded();
            json!({
                "outcome": value(&t.outcome),
                "steps": t.steps,
                "l_hat": t.l_hat,
                "end": t.end_point.as_ref().zip(t.end_certificate).map(|(z, c)| value(&RootEntry::new(z, c))),
            })
        })
        .collect();
    let out = json!({"version": FORMAT_VERSION, "paths": paths});
    if all_ok {
        Ok(out)
    } else {
        Err(Failure::Numerical(json!({"error": "PathFailed", "message": "at least one path failed", "report": out})))
    }
}

fn cmd_certify(system: &Path, roots: &Path, alpha: f64) -> Out {
    let file = read_system_file(system)?;
    let f = file.system()?.normalized()?;
    let rf = RootsFile::from_json(&read_text(roots)?)?;
    if rf.system_hash != file.hash() {
        eprintln!("{}", json!({"warning": "system_hash does not match the system file"}));
    }
    let mut all = true;
    let entries: Vec<RootEntry> = rf
        .roots
        .iter()
        .map(|r| {
            let z = r.point();
            let c = if z.len() == f.n() { certify(&f, &z, alpha) } else { toric::condition::Certificate::failed(alpha) };
            all &= c.passed;
            RootEntry::new(&z, c)
        })
        .collect();
    let out = RootsFile { version: FORMAT_VERSION.into(), system_hash: file.hash(), roots: entries };
    if all {
        Ok(value(&out))
    } else {
        Err(Failure::Numerical(json!({"error": "CertificateFailed", "message": "some roots are not certified", "report": value(&out)})))
    }
}

fn cmd_oracle(path: &Path) -> Out {
    let f = read_system(path)?.normalized()?;
    let r = toric::oracle::oracle_roots(&f)?;
    Ok(json!({
        "version": FORMAT_VERSION,
        "method": value(&r.method),
        "roots": points_json(&r.roots),
        "residuals": r.residuals,
        "multiplicities": r.multiplicities,
    }))
}

fn cmd_montecarlo(preset: Preset, samples: usize, common: Common, csv: Option<&Path>) -> Out {
    let cfg = McConfig { samples, seed: common.seed, threads: common.threads };
    let st = Arc::new(toric::SupportTuple::unweighted(vec![vec![vec![0], vec![1], vec![2], vec![3]]])?);
    let reports = match preset {
        Preset::Em2N1 => vec![montecarlo::preset_em2_n1(cfg)?],
        Preset::MuN1 => vec![montecarlo::mc_moment_mu(&st, 2.0, cfg)?],
        Preset::ExclusionN1 => {
            let f = solver::sample_gaussian_seeded(&st, common.seed.wrapping_add(1));
            let (a, b) = montecarlo::mc_exclusion(&f, None, cfg)?;
            vec![a, b]
        }
    };
    if let Some(p) = csv {
        let text: String = reports.iter().map(|r| r.to_csv()).collect::<Vec<_>>().join("\n");
        write(p, &text)?;
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(json!({"version": FORMAT_VERSION, "pass": pass, "reports": value(&reports)}))
}

fn cmd_sample(path: &Path, common: Common) -> Out {
    let file = read_system_file(path)?;
    let st = Arc::new(file.support_tuple()?);
    let g = solver::sample_gaussian_seeded(&st, common.seed);
    let mut out = SystemFile::from_system(&g);
    out.weights = file.weights.clone();
    out.labels = file.labels.clone();
    out.coefficients = Some(g.coeffs.iter().map(|r| r.iter().map(|&c| ComplexJson::from(c)).collect()).collect());
    Ok(value(&out))
}

fn run(cmd: Cmd) -> Out {
    match cmd {
        Cmd::Invariants { path } => cmd_invariants(&path),
        Cmd::Solve { target, common, budget, max_attempts, stats } => {
            cmd_solve(&target, common, budget, max_attempts, stats.as_deref())
        }
        Cmd::Track { start, target, roots, max_steps } => cmd_track(&start, &target, roots.as_deref(), max_steps),
        Cmd::Certify { system, roots, alpha } => cmd_certify(&system, &roots, alpha),
        Cmd::Oracle { path } => cmd_oracle(&path),
        Cmd::Montecarlo { preset, samples, common, csv } => cmd_montecarlo(preset, samples, common, csv.as_deref()),
        Cmd::Sample { path, common } => cmd_sample(&path, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(v) => {
            use std::io::Write;
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&v).expect("json value serializes"));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", json!({"error": "Usage", "message": msg}));
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(1)
        }
        Err(Failure::Numerical(v)) => {
            eprintln!("{v}");
            ExitCode::from(2)
        }
    }
}
