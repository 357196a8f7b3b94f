//! Command-line driver for gradient-field surface reconstruction.
//!
//! Exit codes: 0 success, 1 usage/parse error, 2 data-domain error,
//! 3 I/O error.

mod commands;
mod config;
mod errors;
mod pfm;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::ReconstructInput;
use gradshop_core::NZ_MIN_DEFAULT;

#[derive(Parser)]
#[command(
    name = "gradshop",
    about = "Surface reconstruction from noisy gradient fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic ground-truth surface and its analytic gradients
    Synth {
        /// Surface kind: tent or vase
        kind: String,
        rows: usize,
        cols: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long)]
        out_surface: PathBuf,
        #[arg(long)]
        out_gx: PathBuf,
        #[arg(long)]
        out_gy: PathBuf,
    },
    /// Add Gaussian noise to a gradient field at an exact SNR
    Noise {
        #[arg(long)]
        in_gx: PathBuf,
        #[arg(long)]
        in_gy: PathBuf,
        #[arg(long)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_gx: PathBuf,
        #[arg(long)]
        out_gy: PathBuf,
    },
    /// Estimate per-pixel normals from an image stack with known lights
    Normals {
        /// Directory of 1-channel PFM images, paired with the lighting file
        /// line by line in lexicographic filename order
        stack_dir: PathBuf,
        /// Text file, one light per line: three whitespace-separated reals
        lights: PathBuf,
        /// Optional image-domain noise before estimation
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = NZ_MIN_DEFAULT)]
        nz_min: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a surface from gradients or normals
    Reconstruct {
        /// dls or dctls (defaults to the config's method)
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        input: ReconstructArgs,
        /// JSON run configuration
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Per-iteration objective trace CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Score a reconstruction against a reference surface
    Eval {
        candidate: PathBuf,
        reference: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full synth-noise-reconstruct-eval grid from a JSON spec
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write zeros in the wall_ms column so reruns are byte-identical
        #[arg(long)]
        stable_output: bool,
    },
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, requires = "in_gy", conflicts_with = "in_normals")]
    in_gx: Option<PathBuf>,
    #[arg(long, requires = "in_gx", conflicts_with = "in_normals")]
    in_gy: Option<PathBuf>,
    /// 3-channel PFM of unit normals
    #[arg(long)]
    in_normals: Option<PathBuf>,
    /// Negate p = n1/n3 when converting normals to gradients
    #[arg(long, overrides_with = "no_flip_x")]
    flip_x: bool,
    #[arg(long, overrides_with = "flip_x")]
    no_flip_x: bool,
    /// Negate q = n2/n3 when converting normals to gradients
    #[arg(long, overrides_with = "no_flip_y")]
    flip_y: bool,
    #[arg(long, overrides_with = "flip_y")]
    no_flip_y: bool,
}

impl ReconstructArgs {
    fn to_input(&self) -> ReconstructInput {
        let flag = |yes: bool, no: bool| {
            if yes {
                Some(true)
            } else if no {
                Some(false)
            } else {
                None
            }
        };
        ReconstructInput {
            gx: self.in_gx.clone(),
            gy: self.in_gy.clone(),
            normals: self.in_normals.clone(),
            flip_x: flag(self.flip_x, self.no_flip_x),
            flip_y: flag(self.flip_y, self.no_flip_y),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Synth {
            kind,
            rows,
            cols,
            amplitude,
            out_surface,
            out_gx,
            out_gy,
        } => commands::cmd_synth(kind, *rows, *cols, *amplitude, out_surface, out_gx, out_gy),
        Command::Noise {
            in_gx,
            in_gy,
            snr_db,
            seed,
            out_gx,
            out_gy,
        } => commands::cmd_noise(in_gx, in_gy, *snr_db, *seed, out_gx, out_gy),
        Command::Normals {
            stack_dir,
            lights,
            snr_db,
            seed,
            nz_min,
            out,
        } => commands::cmd_normals(stack_dir, lights, *snr_db, *seed, *nz_min, out),
        Command::Reconstruct {
            method,
            input,
            config,
            seed,
            out,
            trace,
        } => commands::cmd_reconstruct(
            method.as_deref(),
            &input.to_input(),
            config.as_deref(),
            *seed,
            out,
            trace.as_deref(),
        ),
        Command::Eval {
            candidate,
            reference,
            config,
            out,
        } => commands::cmd_eval(candidate, reference, config.as_deref(), out),
        Command::Sweep {
            spec,
            out,
            stable_output,
        } => commands::cmd_sweep(spec, out, *stable_output),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
