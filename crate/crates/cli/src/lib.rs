//! Command-line driver: solve, verify, bench and gen.

pub mod args;
pub mod bench;
pub mod solver;
pub mod verify;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use entropy_binpack::generate::generate;
use entropy_binpack::{Error, Instance};

use args::{BenchArgs, Cli, Command, Format, GenArgs, SolveArgs, VerifyArgs};
use bench::{run_bench, to_csv, BenchError, BenchPlan};

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Parse = 2,
    Audit = 3,
    Solver = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Audit { .. } => ExitKind::Audit,
            Error::Instance(_) => ExitKind::Parse,
            _ => ExitKind::Solver,
        };
        CliError::new(kind, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(ExitKind::Parse, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::new(ExitKind::Solver, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Instance::parse_any(&read(path)?).map_err(|e| CliError::new(ExitKind::Parse, format!("{}: {e}", path.display())))
}

/// Runs a parsed command line; the returned text goes to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Verify(a) => verify_cmd(&a),
        Command::Bench(a) => bench_cmd(&a),
        Command::Gen(a) => gen(&a),
    }
}

/// File names written by `solve`: certificate, then packing dump.
pub fn output_paths(a: &SolveArgs) -> (PathBuf, PathBuf) {
    let stem = a.input.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
    let base = format!("{stem}.{}", a.algo.name());
    (a.out_dir.join(format!("{base}.cert.json")), a.out_dir.join(format!("{base}.packing.json")))
}

fn solve(a: &SolveArgs) -> Result<String, CliError> {
    let inst = load_instance(&a.input)?;
    let run = solver::run_algo(a.algo, &inst, a.profile, a.seed)?;
    let (cert_path, packing_path) = output_paths(a);
    let cert = serde_json::to_string_pretty(&run.certificate).expect("certificate serializes");
    let dump = serde_json::to_string_pretty(&run.packing.to_dump(&inst)?).expect("dump serializes");
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::new(ExitKind::Solver, format!("{}: {e}", a.out_dir.display())))?;
    write(&cert_path, &format!("{cert}\n"))?;
    write(&packing_path, &format!("{dump}\n"))?;

    let failed: Vec<&str> = run.certificate.stages.iter().filter(|s| !s.passed).map(|s| s.stage.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::new(ExitKind::Audit, format!("certificate stages failed: {}", failed.join(", "))));
    }
    let table = verify::parse_instance(&read(&a.input)?).map_err(|e| CliError::new(ExitKind::Parse, e.to_string()))?;
    let verdict = verify::verify_packing(&table, &dump).map_err(|e| CliError::new(ExitKind::Audit, e.to_string()))?;
    verify::check_certificate(&verdict, &cert).map_err(|e| CliError::new(ExitKind::Audit, e.to_string()))?;
    Ok(format!(
        "{}: {} bins for {} items; certificate {}, packing {}\n",
        a.algo.name(),
        run.packing.cost(),
        inst.n_items(),
        cert_path.display(),
        packing_path.display()
    ))
}

fn verify_cmd(a: &VerifyArgs) -> Result<String, CliError> {
    let table = verify::parse_instance(&read(&a.input)?).map_err(|e| CliError::new(ExitKind::Parse, e.to_string()))?;
    let dump = read(&a.packing)?;
    let verdict = verify::verify_packing(&table, &dump).map_err(|e| {
        let kind = if matches!(e, verify::Violation::Format(_)) { ExitKind::Parse } else { ExitKind::Audit };
        CliError::new(kind, e.to_string())
    })?;
    if let Some(c) = &a.cert {
        verify::check_certificate(&verdict, &read(c)?).map_err(|e| CliError::new(ExitKind::Audit, e.to_string()))?;
    }
    Ok(format!("ok: {} bins, {} item types\n", verdict.bins, verdict.types))
}

fn bench_cmd(a: &BenchArgs) -> Result<String, CliError> {
    let plan = BenchPlan {
        algos: a.algos.clone(),
        family: a.family,
        sizes: a.n.clone(),
        seeds: a.first_seed..a.first_seed + a.seeds,
        profile: a.profile,
        timing: a.timing,
    };
    let rows = run_bench(&plan, bench::workers());
    let csv = to_csv(&rows);
    let out = match &a.out {
        Some(p) => {
            write(p, &csv)?;
            String::new()
        }
        None => csv,
    };
    let mut worst = None;
    for r in &rows {
        if let Some(e) = &r.error {
            let (kind, msg) = match e {
                BenchError::Audit(m) => (ExitKind::Audit, m),
                BenchError::Solver(m) => (ExitKind::Solver, m),
            };
            eprintln!("{} n={} seed={}: {msg}", r.algo.name(), r.n, r.seed);
            worst = Some(match worst {
                Some(ExitKind::Audit) => ExitKind::Audit,
                _ => kind,
            });
        }
    }
    match worst {
        None => Ok(out),
        Some(kind) => {
            print!("{out}");
            std::io::stdout().flush().ok();
            Err(CliError::new(kind, "some bench runs failed"))
        }
    }
}

fn gen(a: &GenArgs) -> Result<String, CliError> {
    let inst = generate(a.family, a.n, a.seed).map_err(|e| CliError::new(ExitKind::Parse, e.to_string()))?;
    let text = match a.format {
        Format::Bpp => inst.to_bpp().map_err(Error::from)?,
        Format::Json => format!("{}\n", inst.to_json()),
    };
    match &a.out {
        Some(p) => {
            write(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
