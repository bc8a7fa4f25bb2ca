use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use curvflow::commands::{
    cmd_barrier, cmd_check_fn, cmd_cross_validate, cmd_run, cmd_sphere_test, outcome_error, BarrierArgs,
    CheckFnArgs, CrossValidateArgs, Profile, SphereTestArgs,
};
use curvflow::config::load_config;
use curvflow::error::{CliError, EXIT_MONITOR, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "curvflow", version, about = "Curvature flows of convex graphs and their a priori estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a flow described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `[output] directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the structural conditions of a curvature function.
    CheckFn {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence table against the shrinking sphere.
    SphereTest {
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value = "mean")]
        expr: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        extent: f64,
        /// Comma-separated nodes per axis.
        #[arg(long, value_delimiter = ',', default_values_t = [33, 65, 129])]
        grids: Vec<usize>,
        #[arg(long, default_value_t = 0.2)]
        t_end: f64,
        #[arg(long, default_value_t = 0.5)]
        safety: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the n = 1 graph flow with the support-function flow.
    CrossValidate {
        /// `parabola`, `parabola:<a>` or `cosh`.
        #[arg(long, default_value = "parabola")]
        profile: Profile,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [513])]
        grids: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
        #[arg(long, default_value_t = 0.5)]
        window: f64,
        #[arg(long, default_value_t = 0.5)]
        safety: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the barrier supersolution inequalities.
    Barrier {
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        r0: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 0.1)]
        t0: f64,
        /// Defaults to the largest admissible value.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CURVFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("CURVFLOW_THREADS must be a non-negative integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn print_json<S: serde::Serialize>(value: &S) {
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    // A closed pipe downstream is not an error of the run.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config, out } => {
            let (cfg, text) = load_config(&config)?;
            let out_dir = out.unwrap_or_else(|| cfg.output.directory.clone());
            let outcome = cmd_run(&cfg, &text, &out_dir)?;
            if let Some(err) = outcome_error(&outcome) {
                return Err(err);
            }
            print_json(&outcome.manifest);
            Ok(outcome.exit_code)
        }
        Command::CheckFn {
            expr,
            n,
            samples,
            seed,
            beta,
            out,
        } => {
            let report = cmd_check_fn(
                &CheckFnArgs {
                    expr,
                    n,
                    samples,
                    seed,
                    beta,
                },
                out.as_deref(),
            )?;
            print_json(&report);
            Ok(if report.all_pass() { EXIT_OK } else { EXIT_MONITOR })
        }
        Command::SphereTest {
            r0,
            beta,
            expr,
            n,
            extent,
            grids,
            t_end,
            safety,
            out,
        } => {
            let args = SphereTestArgs {
                r0,
                beta,
                expr,
                n,
                extent,
                grids,
                t_end,
                safety,
            };
            print_json(&cmd_sphere_test(&args, out.as_deref())?);
            Ok(EXIT_OK)
        }
        Command::CrossValidate {
            profile,
            beta,
            grids,
            level,
            eps,
            t_end,
            window,
            safety,
            out,
        } => {
            let args = CrossValidateArgs {
                profile,
                beta,
                grids,
                level,
                eps,
                t_end,
                window,
                safety,
            };
            print_json(&cmd_cross_validate(&args, out.as_deref())?);
            Ok(EXIT_OK)
        }
        Command::Barrier {
            s,
            beta,
            n,
            r0,
            sigma,
            t0,
            delta,
            l,
            samples,
            out,
        } => {
            let args = BarrierArgs {
                s,
                beta,
                n,
                r0,
                sigma,
                t0,
                delta,
                l,
                samples,
            };
            let output = cmd_barrier(&args, out.as_deref())?;
            print_json(&output);
            if output.report.pass {
                Ok(EXIT_OK)
            } else {
                Err(CliError::MonitorFailure(vec![output.report]))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let result = init_threads().and_then(|_| dispatch(cli.command));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
