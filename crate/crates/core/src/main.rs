use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use cdsnet::constants::ReductionConstants;
use cdsnet::io::{self, DotOptions};
use cdsnet::reductions::{self, extract_solution_with};
use cdsnet::solver::{self, ApproxBudget, PatternOptions, SolveReport, Status};
use cdsnet::{Error, FinancialNetwork, RecoveryVector};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NOINPUT: u8 = 66;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "cdsnet", version, about = "Clearing recovery rates for debt and CDS networks")]
struct Cli {
    /// Worker threads for the parallel solvers.
    #[arg(long, global = true, env = "CDSNET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a clearing (or epsilon-approximate clearing) vector.
    Clear(ClearArgs),
    /// Check a recovery vector.
    Verify {
        network: PathBuf,
        /// Whitespace-separated rates, or a file containing them.
        vector: String,
        /// Check epsilon-approximate clearing instead of exact clearing.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    #[command(subcommand)]
    Compile(CompileCommand),
    /// Decode a compiled circuit's wires from a recovery vector.
    Decode {
        network: PathBuf,
        vector: String,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
    },
    #[command(subcommand)]
    Brute(BruteCommand),
    #[command(subcommand)]
    Export(ExportCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Iterate,
    Patterns,
    Approx,
}

#[derive(Args)]
struct ClearArgs {
    network: PathBuf,
    /// Target accuracy for the approximate search.
    #[arg(long)]
    eps: Option<f64>,
    /// Defaults to `approx` when `--eps` is given, `iterate` otherwise.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = solver::DEFAULT_PATTERN_CAP)]
    cap: usize,
    /// Also write the found vector as plain text.
    #[arg(long)]
    save_vector: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolyMode {
    Hasclearing,
    Cansurvive,
    Value,
}

#[derive(Subcommand)]
enum CompileCommand {
    /// PURE-CIRCUIT instance to network.
    Circuit {
        circuit: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Polynomial to network.
    Poly {
        poly: PathBuf,
        #[arg(long, value_enum)]
        mode: PolyMode,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Pin the variables to these values instead of free input pairs.
        #[arg(long)]
        at: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BruteCommand {
    /// Exhaustive search for a circuit solution.
    Circuit {
        circuit: PathBuf,
        #[arg(long, default_value_t = cdsnet::circuit::DEFAULT_BRUTE_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    /// Graphviz text.
    Dot {
        network: PathBuf,
        /// Omit contracts from source banks to sink banks.
        #[arg(long)]
        hide_scaffolding: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_DATA,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_NOINPUT,
        message: format!("{}: {e}", path.display()),
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_network(path: &Path) -> Result<FinancialNetwork, Failure> {
    io::parse_network(&read(path)?).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{}: {e}", path.display()),
    })
}

/// A vector argument is a file if one exists at that path, else literal text.
fn load_vector(arg: &str) -> Result<RecoveryVector, Failure> {
    let p = Path::new(arg);
    let text = if p.is_file() { read(p)? } else { arg.to_string() };
    Ok(io::parse_recovery_vector(&text)?)
}

fn print_json<T: serde::Serialize>(v: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    // a closed pipe downstream is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn clear(a: ClearArgs) -> Outcome {
    let net = load_network(&a.network)?;
    let method = a.method.unwrap_or(if a.eps.is_some() { Method::Approx } else { Method::Iterate });
    let report: SolveReport = match method {
        Method::Iterate => solver::iterate_f(&net, &RecoveryVector::ones(net.len()), a.damping, a.max_iter, a.tol)?,
        Method::Patterns => solver::enumerate_patterns_with(
            &net,
            &PatternOptions {
                cap: a.cap,
                tol: a.tol,
                seed: a.seed,
                ..PatternOptions::default()
            },
        )?,
        Method::Approx => {
            let eps = a.eps.unwrap_or_else(|| ReductionConstants::default().eps);
            let budget = ApproxBudget {
                restarts: a.restarts,
                max_iter: a.max_iter,
                seed: a.seed,
            };
            solver::solve_eps_approx(&net, eps, &budget)?
        }
    };
    info!("{:?} after {} iterations", report.status, report.iterations);
    print_json(&report);
    if let (Some(path), Some(r)) = (&a.save_vector, &report.r) {
        write(path, &(io::format_recovery_vector(r) + "\n"))?;
    }
    Ok(match report.status {
        Status::Found => 0,
        Status::Infeasible => 2,
        Status::NotFound | Status::Undecided => 3,
    })
}

fn verify(network: &Path, vector: &str, eps: Option<f64>, tol: f64) -> Outcome {
    let net = load_network(network)?;
    let r = load_vector(vector)?;
    let ok = match eps {
        Some(eps) => match net.eps_approx_violation(&r, eps)? {
            None => {
                println!("{eps}-approximately clearing");
                true
            }
            Some(why) => {
                println!("not {eps}-approximately clearing: {why}");
                false
            }
        },
        None => {
            let ok = net.is_clearing(&r, tol);
            let res = net.update_f(&r).map(|f| cdsnet::network::max_abs_diff(f.as_slice(), r.as_slice()))?;
            println!("{} (residual {res})", if ok { "clearing" } else { "not clearing" });
            ok
        }
    };
    Ok(if ok { 0 } else { 1 })
}

fn compile(cmd: CompileCommand) -> Outcome {
    let (art, output, map) = match cmd {
        CompileCommand::Circuit { circuit, output, map } => {
            let c = io::parse_circuit(&read(&circuit)?)?;
            (reductions::compile_circuit(&c)?, output, map)
        }
        CompileCommand::Poly {
            poly,
            mode,
            alpha,
            at,
            output,
            map,
        } => {
            let p = io::parse_polynomial(&read(&poly)?)?;
            let x = at.as_deref().map(io::parse_recovery_vector).transpose()?;
            let art = match (mode, x) {
                (PolyMode::Hasclearing, None) => reductions::compile_hasclearing(&p, alpha)?,
                (PolyMode::Hasclearing, Some(x)) => reductions::compile_hasclearing_at(&p, alpha, x.as_slice())?,
                (PolyMode::Cansurvive, None) => reductions::compile_cansurvive(&p)?,
                (PolyMode::Cansurvive, Some(x)) => reductions::compile_cansurvive_at(&p, x.as_slice())?,
                (PolyMode::Value, None) => reductions::build_poly_network(&p)?,
                (PolyMode::Value, Some(x)) => reductions::build_poly_network_at(&p, x.as_slice())?,
            };
            (art, output, map)
        }
    };
    write(&output, &io::serialize_network(&art.network))?;
    if let Some(map) = map {
        write(&map, &io::serialize_sidecar(&art))?;
    }
    println!("{} banks written to {}", art.network.len(), output.display());
    Ok(0)
}

fn decode(network: &Path, vector: &str, map: &Path, eps: Option<f64>) -> Outcome {
    let net = load_network(network)?;
    let art = io::parse_sidecar(net, &read(map)?)?;
    let r = load_vector(vector)?;
    let k = ReductionConstants::default();
    let values = extract_solution_with(&art, &r, eps.unwrap_or(k.eps), &k.decoding())?;
    let circuit = art.circuit.as_ref().expect("extraction checked the circuit");
    let ok = circuit.is_solution(&values)?;
    println!("{}", io::format_assignment(circuit.wires(), &values));
    println!("satisfies circuit: {ok}");
    Ok(if ok { 0 } else { 1 })
}

fn brute(cmd: BruteCommand) -> Outcome {
    let BruteCommand::Circuit { circuit, cap } = cmd;
    let c = io::parse_circuit(&read(&circuit)?)?;
    match c.brute_solve_capped(cap) {
        Ok(values) => {
            println!("{}", io::format_assignment(c.wires(), &values));
            Ok(0)
        }
        Err(e @ Error::CapExceeded { .. }) => {
            eprintln!("cdsnet: {e}");
            Ok(3)
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match cli.command {
        Command::Clear(a) => clear(a),
        Command::Verify { network, vector, eps, tol } => verify(&network, &vector, eps, tol),
        Command::Compile(c) => compile(c),
        Command::Decode { network, vector, map, eps } => decode(&network, &vector, &map, eps),
        Command::Brute(b) => brute(b),
        Command::Export(ExportCommand::Dot { network, hide_scaffolding }) => {
            let net = load_network(&network)?;
            print!("{}", io::export_dot(&net, DotOptions { hide_scaffolding }));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("cdsnet: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
