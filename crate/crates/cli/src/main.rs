use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kahan_darboux::report::{
    emit_report, exit_code_for, findings_from_report, read_report, run_pipeline, verify_findings, CheckStatus,
    Format, PipelineConfig, Stage,
};
use kahan_darboux::Error;

/// Kahan discretization and Darboux polynomial analysis of quadratic ODEs.
#[derive(Parser)]
#[command(name = "kahan-darboux", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kahan map and its Jacobian determinant.
    Kahan(StageArgs),
    /// Factorization of the Jacobian determinant.
    Factor(StageArgs),
    /// Darboux polynomials of the map.
    Darboux(StageArgs),
    /// Integrals, measures and closed-form solution.
    Structure(StageArgs),
    /// All stages followed by verification.
    Run(StageArgs),
    /// Re-check a JSON report produced by an earlier run.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct StageArgs {
    /// ODE file, one `x' = ...` equation per line; `-` reads stdin.
    ode_file: PathBuf,
    #[arg(long, default_value_t = 3)]
    max_degree: u32,
    #[arg(long, default_value_t = 2)]
    max_exp: u32,
    #[arg(long, default_value_t = 10_000)]
    candidate_cap: usize,
    /// Solve every cofactor candidate symbolically.
    #[arg(long)]
    no_prune: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run numeric and sampling checks.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Also write the JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON report; `-` reads stdin.
    report: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read_input(path: &Path) -> Result<Vec<u8>, Error> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read(path)?)
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e {
        Error::Io(_) | Error::Json(_) => 2,
        e => exit_code_for(e),
    };
    ExitCode::from(code as u8)
}

fn run_stage(args: StageArgs, until: Stage, verify: bool) -> ExitCode {
    let src = match read_input(&args.ode_file).and_then(|b| {
        String::from_utf8(b).map_err(|_| Error::InvalidInput("ODE file is not UTF-8".into()))
    }) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let cfg = PipelineConfig {
        max_degree: args.max_degree,
        max_exp: args.max_exp,
        candidate_cap: args.candidate_cap,
        prune: !args.no_prune,
        seed: args.seed,
        verify: verify || args.verify,
        until,
    };
    let (report, _) = run_pipeline(&src, &cfg);
    if let Some(path) = &args.json {
        if let Err(e) = std::fs::write(path, emit_report(&report, Format::Json)) {
            return fail(&e.into());
        }
    }
    let out = emit_report(&report, args.format.into());
    let _ = std::io::stdout().write_all(&out);
    for e in report.errors.iter().filter(|_| matches!(args.format, OutputFormat::Json)) {
        eprintln!("error [{}]: {}", e.stage, e.message);
    }
    ExitCode::from(report.exit_code() as u8)
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    let report = match read_input(&args.report).and_then(|b| read_report(&b)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let (findings, mut checks) = match findings_from_report(&report) {
        Ok(x) => x,
        Err(e) => return fail(&e),
    };
    checks.extend(verify_findings(&findings, args.seed));
    let mut failed = 0;
    for c in &checks {
        let status = match c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => {
                failed += 1;
                "FAIL"
            }
            CheckStatus::Skipped => "skip",
        };
        match &c.observed {
            Some(v) => println!("{status}  {}  observed {v:.3e}  {}", c.name, c.detail),
            None => println!("{status}  {}  {}", c.name, c.detail),
        }
    }
    println!("{} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Kahan(a) => run_stage(a, Stage::Kahan, false),
        Command::Factor(a) => run_stage(a, Stage::Factor, false),
        Command::Darboux(a) => run_stage(a, Stage::Darboux, false),
        Command::Structure(a) => run_stage(a, Stage::Structure, false),
        Command::Run(a) => run_stage(a, Stage::Structure, true),
        Command::Verify(a) => run_verify(a),
    }
}
