use clap::{Parser, Subcommand};
use critset::critical::SolveOptions;
use critset::report::{self, Tolerances};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "critset",
    about = "Critical sets, Gauss-Manin operators, and Lagrangian fibers of weighted arrangement families",
    version
)]
struct Cli {
    /// Gradient residual tolerance for accepting a critical point.
    #[arg(long, global = true, default_value_t = 1e-11)]
    residual_tol: f64,

    /// Relative tolerance for merging duplicate solutions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    dedup_tol: f64,

    /// Local error tolerance of the transport integrator.
    #[arg(long, global = true, default_value_t = 1e-9)]
    ode_tol: f64,

    /// Seed for the multistart and spectrum randomization.
    #[arg(long, global = true, default_value_t = 0x5eed_cafe)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Combinatorial analysis: circuits, Euler characteristic,
    /// discriminant and balance status.
    Analyze { file: String },
    /// Solve for the critical points of the master function.
    Solve {
        file: String,
        /// Emit a flat CSV table instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Print the Gauss-Manin operators K_j(x) as exact rational matrices.
    Gm { file: String },
    /// Compare the joint spectrum of the restricted operators with the
    /// Lagrangian fiber.
    Specvar { file: String },
    /// Transport a flat section along a piecewise-linear path.
    Transport {
        file: String,
        /// kappa, written as `re`, `re,im`, or a rational like `1/2`.
        #[arg(long, default_value = "1")]
        kappa: String,
        /// JSON array of fiber points (each an array of numbers or
        /// [re, im] pairs).
        #[arg(long)]
        path: String,
        /// JSON array: starting vector in Sing coordinates.
        #[arg(long)]
        initial: String,
    },
    /// Run the full battery of identity checks and emit a certificate.
    Certify { file: String },
}

fn read_input(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let tols = Tolerances {
        solve: SolveOptions {
            residual_tol: cli.residual_tol,
            dedup_tol: cli.dedup_tol,
            seed: cli.seed,
            ..SolveOptions::default()
        },
        ode_tol: cli.ode_tol,
    };
    match cli.command {
        Command::Analyze { file } => {
            let doc = read_input(&file)?;
            let v = report::cmd_analyze(&doc).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { file, csv } => {
            let doc = read_input(&file)?;
            if csv {
                print!("{}", report::solve_csv(&doc, &tols).map_err(|e| e.to_string())?);
            } else {
                let v = report::cmd_solve(&doc, &tols).map_err(|e| e.to_string())?;
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gm { file } => {
            let doc = read_input(&file)?;
            let v = report::cmd_gm(&doc).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Specvar { file } => {
            let doc = read_input(&file)?;
            let v = report::cmd_specvar(&doc, &tols).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Transport {
            file,
            kappa,
            path,
            initial,
        } => {
            let doc = read_input(&file)?;
            let kappa = report::parse_complex(&kappa)?;
            let path_json: serde_json::Value =
                serde_json::from_str(&path).map_err(|e| format!("bad --path JSON: {e}"))?;
            let path_pts = path_json
                .as_array()
                .ok_or("--path must be a JSON array of points")?
                .iter()
                .map(report::parse_cvec)
                .collect::<Result<Vec<_>, _>>()?;
            let initial_json: serde_json::Value = serde_json::from_str(&initial)
                .map_err(|e| format!("bad --initial JSON: {e}"))?;
            let initial = report::parse_cvec(&initial_json)?;
            let v = report::cmd_transport(&doc, kappa, path_pts, initial, &tols)
                .map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { file } => {
            let doc = read_input(&file)?;
            let cert = report::cmd_certify(&doc, &tols).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&cert).unwrap());
            Ok(if cert.certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
