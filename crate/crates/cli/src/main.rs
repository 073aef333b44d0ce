use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ksi_cli::{
    cmd_analyze, cmd_calibrate_demo, cmd_pipeline, cmd_serve, cmd_simulate, cmd_validate, load_config, CliError,
    Overrides,
};
use ksi_core::session::Device;

#[derive(Debug, Parser)]
#[command(name = "ksi", version, about = "Keyboard-surface pointing study toolkit")]
struct Args {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    participants: Option<u32>,
    /// Comma-separated device list, e.g. `fingers,mouse`.
    #[arg(long, global = true, value_delimiter = ',')]
    devices: Option<Vec<Device>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a study and write session, plan and manifest files.
    Simulate {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Analyse session files or directories.
    Analyze {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Fail if any input file is invalid.
        #[arg(long)]
        strict: bool,
    },
    /// Fit the keyboard plane to a synthetic calibration scene.
    CalibrateDemo,
    /// Check session files against the log format and event rules.
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also fail sessions with targets that cannot be measured.
        #[arg(long)]
        strict: bool,
    },
    /// Turn recorded sensor frames and key events into session events.
    Pipeline {
        input: PathBuf,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the browser runner and the upload endpoint.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
}

fn run(args: Args) -> Result<(), CliError> {
    let ov = Overrides { seed: args.seed, participants: args.participants, devices: args.devices };
    let cfg = load_config(args.config.as_deref(), &ov)?;
    match args.command {
        Command::Simulate { out } => {
            let manifest = cmd_simulate(&cfg, &out)?;
            println!("wrote {}", manifest.display());
        }
        Command::Analyze { inputs, out, strict } => {
            print!("{}", cmd_analyze(&inputs, &cfg, &out, strict)?);
            println!("wrote {}", out.display());
        }
        Command::CalibrateDemo => print!("{}", cmd_calibrate_demo(&cfg)?),
        Command::Validate { inputs, strict } => print!("{}", cmd_validate(&inputs, &cfg, strict)?),
        Command::Pipeline { input, out } => {
            let n = cmd_pipeline(&input, &cfg, out.as_deref())?;
            if out.is_some() {
                eprintln!("{n} events");
            }
        }
        Command::Serve { port, data_dir } => cmd_serve(cfg, port, data_dir)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ksi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
