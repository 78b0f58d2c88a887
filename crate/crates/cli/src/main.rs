//! `oplab`: command-line front end over the JSON matrix format.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse error, 3 numerical
//! failure, 4 counterexample found.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oplab::decompositions::{aluthge, drazin_inverse, duggal, polar, range_kernel_split};
use oplab::expansivity::{classify, defect, DefectSpec, MAX_ORDER};
use oplab::theorem_lab::{run_suite, write_quarantine, Mode, SuiteConfig, TheoremId};
use oplab::{ComplexMatrix, OplabError, Tolerance};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "oplab", version, about = "Defect operators, Drazin inverses and expansivity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rel_eps: f64,

    /// Absolute tolerance floor.
    #[arg(long, global = true, default_value_t = 1e-12)]
    abs_eps: f64,

    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate defect verdicts for m = 1..m_max.
    Classify {
        #[command(flatten)]
        input: Weighted,
        #[arg(long, default_value_t = 3, value_parser = order)]
        m_max: u32,
    },
    /// Compute Δᵐ_{T*,T}(P), optionally for the power Tⁿ.
    Defect {
        #[command(flatten)]
        input: Weighted,
        #[arg(long, default_value_t = 1, value_parser = order)]
        m: u32,
        /// Evaluate the defect of Tᵏ instead of T.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        power: u32,
    },
    /// Drazin inverse with its defining residuals.
    Drazin {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Polar parts with the Aluthge and Duggal transforms.
    Transform {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Range-kernel split of Tⁿ.
    Split {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
    },
    /// Run the theorem suite on premise-certified fixtures.
    Verify(SuiteArgs),
    /// Run the theorem suite on broad random instances.
    Fuzz(SuiteArgs),
}

#[derive(Args)]
struct Weighted {
    #[arg(long)]
    matrix: PathBuf,
    /// `identity`, `gram` (P = T*ⁿTⁿ with n from --n) or a matrix file.
    #[arg(long, default_value = "identity")]
    weight: String,
    /// Power used by `--weight gram`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
}

#[derive(Args)]
struct SuiteArgs {
    /// `all` or a comma-separated list of theorem ids.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances per theorem.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Upper bounds on the two block sizes, as `d1,d2`.
    #[arg(long, default_value = "4,3", value_parser = dims)]
    dims: (usize, usize),
    /// Where counterexamples are written.
    #[arg(long, default_value = "quarantine.json")]
    quarantine: PathBuf,
}

fn order(s: &str) -> Result<u32, String> {
    let m: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=MAX_ORDER).contains(&m) {
        Ok(m)
    } else {
        Err(format!("order must lie in 1..={MAX_ORDER}"))
    }
}

fn dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected d1,d2")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || b == 0 || a + b > 16 {
        return Err("block sizes must be positive with d1 + d2 ≤ 16".into());
    }
    Ok((a, b))
}

enum Failure {
    Lib(OplabError),
    Usage(String),
    Counterexamples(usize, PathBuf),
}

impl From<OplabError> for Failure {
    fn from(e: OplabError) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &OplabError) -> u8 {
    match e {
        OplabError::Parse(_) | OplabError::Io { .. } => 2,
        OplabError::Dimension(_)
        | OplabError::NotHermitian { .. }
        | OplabError::Domain(_)
        | OplabError::Precondition(_) => 1,
        OplabError::Numerical { .. }
        | OplabError::Decomposition(_)
        | OplabError::Split { .. }
        | OplabError::Generation(_) => 3,
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, OplabError> {
    let text = std::fs::read_to_string(path).map_err(|e| OplabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| OplabError::Parse(format!("{}: {e}", path.display())))
}

fn weight_for(t: &ComplexMatrix, spec: &str, n: u32) -> Result<ComplexMatrix, OplabError> {
    match spec {
        "identity" => Ok(ComplexMatrix::identity(t.rows())),
        "gram" => {
            let tn = t.pow(n as usize);
            Ok((tn.adjoint() * &tn).hermitian_part())
        }
        path => read_matrix(Path::new(path)),
    }
}

fn theorems(spec: &str) -> Result<Vec<TheoremId>, Failure> {
    if spec == "all" {
        return Ok(TheoremId::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<TheoremId>().map_err(|e| Failure::Usage(e.to_string())))
        .collect()
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("OPLAB_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Failure::Usage(format!("OPLAB_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn suite(args: SuiteArgs, mode: Mode, tol: Tolerance, out: &mut Option<Value>) -> Result<(), Failure> {
    let cfg = SuiteConfig {
        seed: args.seed,
        count: args.count,
        dims: args.dims,
        theorems: theorems(&args.suite)?,
        mode,
        tol,
        threads: threads()?,
    };
    let report = run_suite(&cfg)?;
    let quarantined = report.quarantine()?;
    *out = Some(serde_json::to_value(&report).expect("report serializes"));
    if !quarantined.is_empty() {
        write_quarantine(&args.quarantine, &quarantined)?;
        return Err(Failure::Counterexamples(quarantined.len(), args.quarantine));
    }
    if report.errors > 0 {
        let first = report.rows.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(OplabError::Numerical {
            message: format!("{} instance(s) failed to evaluate; first: {first}", report.errors),
            residuals: vec![],
        }
        .into());
    }
    Ok(())
}

fn run(cli: Cli, out: &mut Option<Value>) -> Result<(), Failure> {
    if !(cli.rel_eps >= 0.0 && cli.abs_eps >= 0.0) {
        return Err(Failure::Usage("tolerances must be nonnegative".into()));
    }
    let tol = Tolerance::new(cli.rel_eps, cli.abs_eps);
    let value = match cli.command {
        Command::Classify { input, m_max } => {
            let t = read_matrix(&input.matrix)?;
            let p = weight_for(&t, &input.weight, input.n)?;
            json!(classify(&t, &p, m_max, &tol)?)
        }
        Command::Defect { input, m, power } => {
            let t = read_matrix(&input.matrix)?;
            let p = weight_for(&t, &input.weight, input.n)?;
            json!(defect(&DefectSpec::new(t, p, m).with_power(power), &tol)?)
        }
        Command::Drazin { matrix } => json!(drazin_inverse(&read_matrix(&matrix)?, &tol)?),
        Command::Transform { matrix } => {
            let t = read_matrix(&matrix)?;
            json!({
                "polar": polar(&t, &tol)?,
                "aluthge": aluthge(&t, &tol)?,
                "duggal": duggal(&t, &tol)?,
            })
        }
        Command::Split { matrix, n } => json!(range_kernel_split(&read_matrix(&matrix)?, n as usize, &tol)?),
        Command::Verify(args) => return suite(args, Mode::Verify, tol, out),
        Command::Fuzz(args) => return suite(args, Mode::Fuzz, tol, out),
    };
    *out = Some(value);
    Ok(())
}

fn emit(value: &Value, output: Option<&Path>) -> Result<(), OplabError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| OplabError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let output = cli.output.clone();
    let mut value = None;
    let result = run(cli, &mut value);
    // Suite reports are written even when they contain failures.
    if let Some(v) = &value {
        if let Err(e) = emit(v, output.as_deref()) {
            eprintln!("oplab: {e}");
            return ExitCode::from(exit_code(&e));
        }
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("oplab: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("oplab: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Counterexamples(k, path)) => {
            eprintln!("oplab: {k} counterexample(s) quarantined in {}", path.display());
            ExitCode::from(4)
        }
    }
}
