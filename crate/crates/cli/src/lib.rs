//! Command-line front end for the keyboard-surface pointing toolkit.

pub mod config;
pub mod report_io;
pub mod server;
pub mod study;

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ksi_core::experiment::extract_metrics_with;
use ksi_core::pipeline::{calibrate_demo, pipeline_run, read_pipeline_input};
use ksi_core::session::{encode_event, Device};
use log::warn;
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for data and validation
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub participants: Option<u32>,
    pub devices: Option<Vec<Device>>,
}

pub fn load_config(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(n) = ov.participants {
        cfg.participants = n;
    }
    if let Some(d) = &ov.devices {
        cfg.devices = d.clone();
    }
    cfg.check()?;
    Ok(cfg)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    let sessions = study::simulate_study(cfg)?;
    study::write_study(cfg, &sessions, out)
}

/// Writes `table1.csv`, `cells.csv` and `summary.json` into `out` and
/// returns the terminal table.
pub fn cmd_analyze(inputs: &[PathBuf], cfg: &RunConfig, out: &Path, strict: bool) -> Result<String, CliError> {
    let files = study::collect_session_files(inputs)?;
    let analysis = study::analyze_files(&files, cfg, strict)?;
    fs::create_dir_all(out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    let report = &analysis.report;
    write_file(&out.join("table1.csv"), |w| report_io::write_table1(report, w).map_err(std::io::Error::other))?;
    write_file(&out.join("cells.csv"), |w| report_io::write_cells(report, w).map_err(std::io::Error::other))?;
    write_file(&out.join("summary.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &analysis)?;
        writeln!(w)
    })?;
    let mut text = report_io::render_table(report);
    if !analysis.rejected.is_empty() {
        text.push_str(&format!("skipped {} invalid file(s)\n", analysis.rejected.len()));
    }
    Ok(text)
}

/// Prints one line per file. Any undecodable or rule-breaking file fails
/// the run; `strict` also fails files whose targets cannot all be measured.
pub fn cmd_validate(inputs: &[PathBuf], cfg: &RunConfig, strict: bool) -> Result<String, CliError> {
    let files = study::collect_session_files(inputs)?;
    if files.is_empty() {
        return Err(CliError::Data("no sessions found".into()));
    }
    let mut text = String::new();
    let mut bad = 0;
    for (check, log) in study::check_files(&files) {
        let mut problem = (!check.is_ok()).then(|| study::describe_check(&check));
        if problem.is_none() && strict {
            let gaps = extract_metrics_with(log.as_ref().expect("valid file"), &cfg.extract).gaps;
            if !gaps.is_empty() {
                problem = Some(format!("{} targets without metrics (first: {})", gaps.len(), gaps[0].reason));
            }
        }
        match problem {
            Some(p) => {
                bad += 1;
                text.push_str(&format!("FAIL {}: {p}\n", check.path.display()));
            }
            None => text.push_str(&format!("ok   {}\n", check.path.display())),
        }
    }
    if bad > 0 {
        return Err(CliError::Data(format!("{text}{bad} of {} file(s) invalid", files.len())));
    }
    Ok(text)
}

/// Runs recorded sensor frames and key events through the pipeline and
/// writes the derived events as JSON lines.
pub fn cmd_pipeline(input: &Path, cfg: &RunConfig, out: Option<&Path>) -> Result<usize, CliError> {
    let f = fs::File::open(input).map_err(|e| CliError::Data(format!("cannot open {}: {e}", input.display())))?;
    let inputs = read_pipeline_input(BufReader::new(f)).map_err(|e| CliError::Data(e.to_string()))?;
    let output = pipeline_run(&inputs, &cfg.pipeline).map_err(|e| match e {
        ksi_core::pipeline::PipelineError::InvalidConfig(m) => CliError::Usage(format!("config field 'pipeline': {m}")),
        e => CliError::Data(e.to_string()),
    })?;
    for g in &output.gaps {
        warn!("tracking gap {:?} from {:.3}s to {:.3}s", g.reason, g.start, g.end);
    }
    let write = |w: &mut dyn Write| -> std::io::Result<()> {
        for e in &output.events {
            writeln!(w, "{}", encode_event(e))?;
        }
        w.flush()
    };
    match out {
        Some(path) => write_file(path, |w| write(w))?,
        None => write(&mut std::io::stdout().lock()).map_err(|e| CliError::Data(e.to_string()))?,
    }
    Ok(output.events.len())
}

pub fn cmd_calibrate_demo(cfg: &RunConfig) -> Result<String, CliError> {
    let report = calibrate_demo(&cfg.calibration).map_err(|e| CliError::Data(e.to_string()))?;
    let n = report.plane.normal;
    let mut s = format!(
        "points      {}\nnormal      [{:.6}, {:.6}, {:.6}]\nd           {:.4} mm\nnormal err  {:.4} deg\nfit_rms     {:.4e} mm (injected sigma {} mm)\n",
        report.points, n[0], n[1], n[2], report.plane.d, report.normal_error_deg, report.fit_rms, report.injected_noise
    );
    s.push_str("touch trace (frame, true height mm, measured mm, state):\n");
    for t in &report.trace {
        if t.frame % 5 == 0 || report.transitions.iter().any(|(f, _)| *f == t.frame) {
            s.push_str(&format!("  {:>3} {:>7.3} {:>8.3} {:?}\n", t.frame, t.height, t.measured, t.touch));
        }
    }
    for (f, state) in &report.transitions {
        s.push_str(&format!("transition at frame {f}: {state:?}\n"));
    }
    Ok(s)
}

pub fn cmd_serve(cfg: RunConfig, port: u16, data_dir: PathBuf) -> Result<(), CliError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Data(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .map_err(|e| CliError::Data(format!("cannot listen on port {port}: {e}")))?;
        eprintln!("serving on http://127.0.0.1:{port}, storing uploads in {}", data_dir.display());
        let app = server::router(server::AppState { config: Arc::new(cfg), data_dir });
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Data(e.to_string()))
    })
}
