use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lerayflow::cli::{self, Overrides, EXIT_CONFIG};
use lerayflow::galerkin::Formulation;

/// Spectral Galerkin Navier-Stokes on the periodic box.
///
/// Config keys can be overridden from the environment with the `LERAYFLOW_`
/// prefix, e.g. `LERAYFLOW_NU=0.05` or `LERAYFLOW_STEPPER__RTOL=1e-9`.
#[derive(Parser, Debug)]
#[command(name = "lerayflow", version)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// JSON config; defaults apply when omitted.
    #[arg(long, global = true, env = "LERAYFLOW_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "LERAYFLOW_OUT")]
    out: Option<PathBuf>,

    #[arg(long, global = true, env = "LERAYFLOW_SEED")]
    seed: Option<u64>,

    #[arg(long, global = true, env = "LERAYFLOW_FORMULATION", value_parser = ["lifted", "direct"])]
    formulation: Option<String>,

    /// Use fixed-step RK4 with this step.
    #[arg(long, global = true, env = "LERAYFLOW_FIXED_STEP")]
    fixed_step: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate with the continuation ladder.
    Simulate,
    /// Run every invariant check.
    Verify,
    /// Check the lift: θ orthogonality and flatness.
    LiftCheck,
    /// Growing-torus approximation of whole-space data.
    Exhaust,
    /// Compare the spectral convolution with the grid oracle.
    Oracle,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let formulation = match args.formulation.as_deref().map(str::parse::<Formulation>).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let flags = Overrides {
        output_dir: args.out,
        seed: args.seed,
        formulation,
        fixed_step: args.fixed_step,
    };
    let cfg = match cli::load_config(args.config.as_deref(), std::env::vars(), &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let result = match args.command {
        Command::Simulate => cli::cmd_simulate(&cfg),
        Command::Verify => cli::cmd_verify(&cfg),
        Command::LiftCheck => cli::cmd_lift_check(&cfg),
        Command::Exhaust => cli::cmd_exhaust(&cfg),
        Command::Oracle => cli::cmd_oracle(&cfg),
    };
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            println!("{:?}", out.verdict);
            ExitCode::from(out.verdict.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
