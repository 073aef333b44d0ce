use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ksi_core::experiment::{latin_order, make_plan, write_plan, ExtractionGap, TrialPlan};
use ksi_core::session::{read_session, validate_session, write_session, Device, SessionLog, SurveyPhase, Violation};
use ksi_core::sim::{mix_seed, simulate_discomfort, simulate_session};
use ksi_core::stats::{build_report, AnalysisReport, SessionSummary};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

const PLAN_STREAM: u64 = 1;
const SESSION_STREAM: u64 = 2;

pub fn participant_id(index: u32) -> String {
    format!("p{:02}", index + 1)
}

#[derive(Debug, Clone)]
pub struct SimulatedSession {
    pub participant: u32,
    /// Position of this device in the participant's order.
    pub order: usize,
    pub plan: TrialPlan,
    pub log: SessionLog,
}

fn simulate_one(cfg: &RunConfig, p: u32, order: usize, device: Device) -> Result<SimulatedSession, CliError> {
    let cohort = cfg.cohort_of(p);
    let profile = cfg.profile(device, cohort)?;
    let dev = device as u64;
    let plan = make_plan(device, &cfg.plan_spec(), mix_seed(&[cfg.seed, p as u64, dev, PLAN_STREAM]))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut log = simulate_session(&profile, &plan, mix_seed(&[cfg.seed, p as u64, dev, SESSION_STREAM]))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    log.meta.participant_id = participant_id(p);
    let person = mix_seed(&[cfg.seed, p as u64]);
    log.surveys = vec![
        simulate_discomfort(&profile, SurveyPhase::Baseline, person),
        simulate_discomfort(&profile, SurveyPhase::PostDevice, person),
    ];
    Ok(SimulatedSession { participant: p, order, plan, log })
}

/// Simulates every participant on every device, in Latin-square order.
/// Sessions are independent and run in parallel; the output order is
/// participant-major and does not depend on scheduling.
pub fn simulate_study(cfg: &RunConfig) -> Result<Vec<SimulatedSession>, CliError> {
    cfg.check()?;
    let jobs: Vec<(u32, usize, Device)> = (0..cfg.participants)
        .flat_map(|p| latin_order(&cfg.devices, p as usize).into_iter().enumerate().map(move |(o, d)| (p, o, d)))
        .collect();
    jobs.par_iter().map(|&(p, o, d)| simulate_one(cfg, p, o, d)).collect()
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub participant: String,
    pub cohort: String,
    pub device: Device,
    pub order: usize,
    pub session: String,
    pub plan: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub seed: u64,
    pub config: &'a RunConfig,
    pub sessions: Vec<ManifestEntry>,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("cannot write {}: {e}", path.display()))
}

/// Writes `sessions/`, `plans/` and `manifest.json` under `out`.
pub fn write_study(cfg: &RunConfig, sessions: &[SimulatedSession], out: &Path) -> Result<PathBuf, CliError> {
    for sub in ["sessions", "plans"] {
        let dir = out.join(sub);
        fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut entries = Vec::with_capacity(sessions.len());
    for s in sessions {
        let stem = format!("{}_{}", s.log.meta.participant_id, s.log.meta.device);
        let session_rel = format!("sessions/{stem}.ksi.jsonl");
        let plan_rel = format!("plans/{stem}.plan.jsonl");
        let path = out.join(&session_rel);
        let mut w = create(&path)?;
        write_session(&s.log, &mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
        let path = out.join(&plan_rel);
        let mut w = create(&path)?;
        write_plan(&s.plan, &mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
        entries.push(ManifestEntry {
            participant: s.log.meta.participant_id.clone(),
            cohort: s.log.meta.cohort.to_string(),
            device: s.log.meta.device,
            order: s.order,
            session: session_rel,
            plan: plan_rel,
        });
    }
    let manifest = Manifest { seed: cfg.seed, config: cfg, sessions: entries };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}

/// Session files named on the command line; directories are searched
/// recursively for `*.ksi.jsonl`.
pub fn collect_session_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
        let entries = fs::read_dir(dir).map_err(|e| CliError::Data(format!("cannot read {}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| CliError::Data(e.to_string()))?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.to_string_lossy().ends_with(".ksi.jsonl") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            walk(input, &mut files)?;
        } else if input.exists() {
            files.push(input.clone());
        } else {
            return Err(CliError::Data(format!("no such file: {}", input.display())));
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

#[derive(Debug, Serialize)]
pub struct FileCheck {
    pub path: PathBuf,
    pub error: Option<String>,
    pub violations: Vec<Violation>,
}

impl FileCheck {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.violations.is_empty()
    }
}

pub fn load_session(path: &Path) -> Result<SessionLog, String> {
    let f = fs::File::open(path).map_err(|e| format!("cannot open: {e}"))?;
    read_session(BufReader::new(f)).map_err(|e| e.to_string())
}

/// Decodes and validates each file.
pub fn check_files(files: &[PathBuf]) -> Vec<(FileCheck, Option<SessionLog>)> {
    files
        .par_iter()
        .map(|path| match load_session(path) {
            Ok(log) => {
                let violations = validate_session(&log);
                (FileCheck { path: path.clone(), error: None, violations }, Some(log))
            }
            Err(e) => (FileCheck { path: path.clone(), error: Some(e), violations: Vec::new() }, None),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub files: usize,
    pub rejected: Vec<FileCheck>,
    pub gaps: Vec<(String, ExtractionGap)>,
}

/// Extracts metrics from valid sessions and builds the report.
pub fn analyze_logs<'a>(
    logs: impl IntoIterator<Item = &'a SessionLog>,
    cfg: &RunConfig,
) -> Result<(AnalysisReport, Vec<(String, ExtractionGap)>), CliError> {
    let logs: Vec<&SessionLog> = logs.into_iter().collect();
    if logs.is_empty() {
        return Err(CliError::Data("no sessions found".into()));
    }
    let parts = logs
        .par_iter()
        .map(|log| SessionSummary::from_log(log, &cfg.extract).map(|(s, g)| (s, g, log.meta.participant_id.clone())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut summaries = Vec::with_capacity(parts.len());
    let mut gaps = Vec::new();
    for (s, g, pid) in parts {
        if !g.is_empty() {
            warn!("{pid} {}: {} targets without metrics", s.device, g.len());
        }
        gaps.extend(g.into_iter().map(|g| (format!("{pid}_{}", s.device), g)));
        summaries.push(s);
    }
    info!("analysing {} sessions", summaries.len());
    let report = build_report(&summaries, &cfg.report).map_err(|e| CliError::Data(e.to_string()))?;
    Ok((report, gaps))
}

/// Loads, validates and analyses session files. Invalid files are skipped
/// with a warning, or fail the run when `strict`.
pub fn analyze_files(files: &[PathBuf], cfg: &RunConfig, strict: bool) -> Result<Analysis, CliError> {
    if files.is_empty() {
        return Err(CliError::Data("no sessions found".into()));
    }
    let checked = check_files(files);
    let mut rejected = Vec::new();
    let mut logs = Vec::new();
    for (check, log) in checked {
        if check.is_ok() {
            logs.push(log.expect("valid check has a log"));
        } else {
            warn!("{}: {}", check.path.display(), describe_check(&check));
            rejected.push(check);
        }
    }
    if strict && !rejected.is_empty() {
        let list: Vec<String> =
            rejected.iter().map(|c| format!("{}: {}", c.path.display(), describe_check(c))).collect();
        return Err(CliError::Data(format!("{} invalid session file(s):\n{}", rejected.len(), list.join("\n"))));
    }
    let (report, gaps) = analyze_logs(&logs, cfg)?;
    Ok(Analysis { report, files: logs.len(), rejected, gaps })
}

pub fn describe_check(c: &FileCheck) -> String {
    if let Some(e) = &c.error {
        return e.clone();
    }
    let mut parts: Vec<String> = c.violations.iter().take(5).map(|v| v.to_string()).collect();
    if c.violations.len() > 5 {
        parts.push(format!("... {} more", c.violations.len() - 5));
    }
    parts.join("; ")
}
