use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kvge::config::{self, Number, RunConfig};
use kvge::green::C0Mode;
use kvge::par::{self, Execution};
use kvge::report::{self, Report};

#[derive(Parser)]
#[command(
    name = "kvge",
    version,
    about = "Positive solutions of nonlocal variable-exponent boundary value problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Green's-function, kernel and exponent constants.
    Constants(Common),
    /// Check the existence conditions and report the admissible λ window.
    Certify(Common),
    /// Compute solution profiles by the outer fixed-point scan.
    Solve(Common),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum C0Arg {
    PaperSup,
    CoerciveInf,
}

#[derive(Args)]
struct Common {
    /// Config file, or the name of a bundled config (example212, quadratic).
    config: String,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write solution profiles as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long, value_enum)]
    c0_mode: Option<C0Arg>,
    /// auto, t2.8, t3.6, t4.4, c2.10 or c2.11.
    #[arg(long)]
    theorem: Option<String>,
    /// Replacement forcing term f(t, u).
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// λ as a number or constant expression.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.margin {
            cfg.numerics.margin = m;
        }
        if let Some(mode) = self.c0_mode {
            cfg.problem.boundary.c0_mode = match mode {
                C0Arg::PaperSup => C0Mode::PaperSup,
                C0Arg::CoerciveInf => C0Mode::CoerciveInf,
            };
        }
        if let Some(t) = &self.theorem {
            cfg.problem.theorem = t.clone();
        }
        if let Some(f) = &self.f {
            cfg.problem.f = f.clone();
        }
        if let Some(l) = &self.lambda {
            cfg.problem.lambda = Number::Expr(l.clone());
        }
        if let Some(p) = &self.json {
            cfg.outputs.json = Some(p.display().to_string());
        }
        if let Some(p) = &self.csv {
            cfg.outputs.csv = Some(p.display().to_string());
        }
    }
}

fn csv_path(base: &Path, k: usize, count: usize) -> PathBuf {
    if count == 1 {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_{k}{ext}"))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(name: &str, args: &Common, exec: Execution) -> (Report, Option<String>) {
    let mut cfg = match config::load_config(&args.config) {
        Ok(c) => c,
        Err(e) => return (Report::input_error(name, &args.config, e.to_string()), None),
    };
    args.apply(&mut cfg);
    let json = cfg.outputs.json.clone();
    let run = match cfg.build(exec) {
        Ok(r) => r,
        Err(e) => return (Report::input_error(name, &args.config, e.to_string()), json),
    };
    let rep = match name {
        "constants" => report::cmd_constants(&run),
        "certify" => report::cmd_certify(&run),
        _ => report::cmd_solve(&run),
    };
    let mut io_errors = Vec::new();
    if let (Some(csv), Some(sols)) = (&run.outputs.csv, &rep.solutions) {
        for (k, s) in sols.iter().enumerate() {
            if let Err(e) = write(&csv_path(Path::new(csv), k, sols.len()), &s.to_csv()) {
                io_errors.push(e);
            }
        }
    }
    let rep = if io_errors.is_empty() {
        rep
    } else {
        Report {
            status: report::Status::InputError,
            exit_code: report::Status::InputError.exit_code(),
            error: Some(io_errors.join("; ")),
            ..rep
        }
    };
    (rep, json)
}

fn run(name: &str, args: &Common) -> Report {
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let (mut rep, json) = execute(name, args, exec);
    let json = json.or_else(|| args.json.as_ref().map(|p| p.display().to_string()));
    if let Some(path) = json {
        if let Err(e) = write(Path::new(&path), &rep.to_json()) {
            rep.status = report::Status::InputError;
            rep.exit_code = rep.status.exit_code();
            rep.error = Some(rep.error.map_or(e.clone(), |prev| format!("{prev}; {e}")));
        }
    }
    rep
}

fn main() -> ExitCode {
    par::init_from_env();
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Constants(a) => ("constants", a),
        Command::Certify(a) => ("certify", a),
        Command::Solve(a) => ("solve", a),
    };
    let rep = run(name, args);
    print!("{}", rep.render_text());
    ExitCode::from(rep.exit_code as u8)
}
