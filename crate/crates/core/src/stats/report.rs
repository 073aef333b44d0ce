use std::collections::BTreeMap;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{
    box_stats, discomfort_score, error_rate, fit_power_law, mean, median, median_then_mean, outlier_mask, shapiro_wilk,
    wilcoxon_signed_rank, BoxStats, PowerLawFit, StatsError, TestResult,
};
use crate::experiment::{extract_metrics_with, ExtractConfig, ExtractionGap, TrialMetrics};
use crate::session::{Cohort, Device, SessionLog, SurveyPhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Homing,
    Movement,
    Return,
    Total,
    ErrorRate,
    Discomfort,
}

impl Metric {
    pub const ALL: [Metric; 6] =
        [Metric::Homing, Metric::Movement, Metric::Return, Metric::Total, Metric::ErrorRate, Metric::Discomfort];
    pub const TIMING: [Metric; 3] = [Metric::Homing, Metric::Movement, Metric::Return];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Homing => "homing",
            Metric::Movement => "movement",
            Metric::Return => "return",
            Metric::Total => "total",
            Metric::ErrorRate => "error_rate",
            Metric::Discomfort => "discomfort",
        }
    }

    fn of(self, m: &TrialMetrics) -> Option<f64> {
        match self {
            Metric::Homing => Some(m.homing_t),
            Metric::Movement => Some(m.movement_t),
            Metric::Return => m.return_t,
            _ => None,
        }
    }
}

/// Which blocks a per-participant value is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    AllBlocks,
    LastBlock,
}

/// Everything the report needs from one session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub participant_id: String,
    pub device: Device,
    pub cohort: Cohort,
    pub blocks: u32,
    pub metrics: Vec<TrialMetrics>,
    pub discomfort: Option<f64>,
}

impl SessionSummary {
    /// Extracts metrics and the discomfort score. Sessions without both
    /// surveys get no discomfort score.
    pub fn from_log(log: &SessionLog, config: &ExtractConfig) -> Result<(Self, Vec<ExtractionGap>), StatsError> {
        let ex = extract_metrics_with(log, config);
        let discomfort = match (log.survey(SurveyPhase::PostDevice), log.survey(SurveyPhase::Baseline)) {
            (Some(post), Some(base)) => Some(discomfort_score(post, base)?),
            _ => None,
        };
        let summary = Self {
            participant_id: log.meta.participant_id.clone(),
            device: log.meta.device,
            cohort: log.meta.cohort,
            blocks: log.meta.block_count,
            metrics: ex.metrics,
            discomfort,
        };
        Ok((summary, ex.gaps))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub filter_outliers: bool,
    /// Minimum R^2 of the block power-law fit before only the last block is
    /// used.
    pub learning_r_squared: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { filter_outliers: true, learning_r_squared: 0.7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearningDecision {
    pub device: Device,
    pub cohort: Cohort,
    pub metric: Metric,
    /// Mean across participants of each block's median-then-mean value.
    pub block_values: Vec<f64>,
    pub fit: Option<PowerLawFit>,
    pub scope: Scope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub value: f64,
    pub scope: Scope,
    pub n: usize,
    #[serde(rename = "box")]
    pub box_stats: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub device: Device,
    pub cohort: Cohort,
    pub participants: Vec<String>,
    pub removed_outliers: usize,
    pub metrics: Vec<MetricSummary>,
}

impl CellReport {
    pub fn get(&self, metric: Metric) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == metric)
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.device, self.cohort)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityCheck {
    pub device: Device,
    pub cohort: Cohort,
    pub metric: Metric,
    pub n: usize,
    pub result: Option<TestResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub cohort: Cohort,
    pub metric: Metric,
    pub a: Device,
    pub b: Device,
    pub pairs: usize,
    pub result: Option<TestResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub cells: Vec<CellReport>,
    pub missing_cells: Vec<String>,
    pub learning: Vec<LearningDecision>,
    pub normality: Vec<NormalityCheck>,
    pub tests: Vec<PairwiseTest>,
}

impl AnalysisReport {
    pub fn cell(&self, device: Device, cohort: Cohort) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.device == device && c.cohort == cohort)
    }

    pub fn value(&self, device: Device, cohort: Cohort, metric: Metric) -> Option<f64> {
        self.cell(device, cohort)?.get(metric).map(|m| m.value)
    }

    pub fn learning_for(&self, device: Device, cohort: Cohort, metric: Metric) -> Option<&LearningDecision> {
        self.learning.iter().find(|l| l.device == device && l.cohort == cohort && l.metric == metric)
    }
}

/// Per-participant values of one cell, keyed by participant id.
type ParticipantValues = BTreeMap<String, BTreeMap<Metric, f64>>;

fn id_key(id: f64) -> i64 {
    (id * 1000.0).round() as i64
}

struct CellOutcome {
    report: CellReport,
    learning: Vec<LearningDecision>,
    values: ParticipantValues,
}

fn analyse_cell(device: Device, cohort: Cohort, sessions: &[&SessionSummary], config: &ReportConfig) -> CellOutcome {
    let blocks = sessions.iter().map(|s| s.blocks).max().unwrap_or(1).max(1) as usize;
    let mut values: ParticipantValues = BTreeMap::new();
    let mut learning = Vec::new();
    let mut removed = 0;

    for metric in Metric::TIMING {
        // (session, block, id key, value)
        let mut rows: Vec<(usize, usize, i64, f64)> = Vec::new();
        for (si, s) in sessions.iter().enumerate() {
            for m in &s.metrics {
                if let Some(v) = metric.of(m) {
                    rows.push((si, (m.block as usize).min(blocks - 1), id_key(m.id), v));
                }
            }
        }
        if config.filter_outliers {
            let mut by_id: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
            for (ri, r) in rows.iter().enumerate() {
                by_id.entry(r.2).or_default().push(ri);
            }
            let mut keep = vec![true; rows.len()];
            for idx in by_id.values() {
                let vals: Vec<f64> = idx.iter().map(|&i| rows[i].3).collect();
                if let Ok(mask) = outlier_mask(&vals) {
                    for (&i, k) in idx.iter().zip(mask) {
                        keep[i] = k;
                    }
                }
            }
            let before = rows.len();
            rows = rows.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect();
            removed += before - rows.len();
        }

        // per session, per block: ID groups
        let mut grouped: Vec<Vec<BTreeMap<i64, Vec<f64>>>> = vec![vec![BTreeMap::new(); blocks]; sessions.len()];
        for (si, b, id, v) in rows {
            grouped[si][b].entry(id).or_default().push(v);
        }
        let per_block: Vec<Vec<Option<f64>>> = grouped
            .iter()
            .map(|bs| {
                bs.iter()
                    .map(|g| {
                        let groups: Vec<(f64, Vec<f64>)> =
                            g.iter().map(|(k, v)| (*k as f64 / 1000.0, v.clone())).collect();
                        median_then_mean(&groups).ok()
                    })
                    .collect()
            })
            .collect();

        let curve: Option<Vec<f64>> = (0..blocks)
            .map(|b| {
                let vs: Vec<f64> = per_block.iter().filter_map(|s| s[b]).collect();
                (!vs.is_empty()).then(|| mean(&vs))
            })
            .collect();
        let fit = curve.as_ref().and_then(|c| fit_power_law(c).ok());
        let scope = match fit {
            Some(f) if !f.zero_variance && f.b > 0.0 && f.r_squared >= config.learning_r_squared => Scope::LastBlock,
            _ => Scope::AllBlocks,
        };
        if let Some(f) = fit {
            info!(
                "{device}_{cohort} {}: power law b={:.3} R2={:.3} -> {:?}",
                metric.as_str(),
                f.b,
                f.r_squared,
                scope
            );
        }
        learning.push(LearningDecision {
            device,
            cohort,
            metric,
            block_values: curve.unwrap_or_default(),
            fit,
            scope,
        });

        for (si, s) in sessions.iter().enumerate() {
            let available: Vec<f64> = per_block[si].iter().flatten().copied().collect();
            if available.is_empty() {
                continue;
            }
            let v = match scope {
                Scope::AllBlocks => mean(&available),
                Scope::LastBlock => per_block[si].iter().rev().flatten().next().copied().expect("non-empty"),
            };
            values.entry(s.participant_id.clone()).or_default().insert(metric, v);
        }
    }

    for s in sessions {
        let entry = values.entry(s.participant_id.clone()).or_default();
        if let (Some(h), Some(m), Some(r)) =
            (entry.get(&Metric::Homing), entry.get(&Metric::Movement), entry.get(&Metric::Return))
        {
            let total = h + m + r;
            entry.insert(Metric::Total, total);
        }
        if let Some(d) = s.discomfort {
            entry.insert(Metric::Discomfort, d);
        }
    }

    // errors per target, per participant and ID
    let mut err_by_id: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for s in sessions {
        let mut per_id: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for m in &s.metrics {
            let e = per_id.entry(id_key(m.id)).or_default();
            e.0 += m.errors as f64;
            e.1 += 1.0;
        }
        if per_id.is_empty() {
            continue;
        }
        let rates: Vec<f64> = per_id.values().map(|(e, n)| e / n).collect();
        values.entry(s.participant_id.clone()).or_default().insert(Metric::ErrorRate, mean(&rates));
        for (k, (e, n)) in per_id {
            err_by_id.entry(k).or_default().push(e / n);
        }
    }
    let err_groups: Vec<(f64, Vec<f64>)> = err_by_id.into_iter().map(|(k, v)| (k as f64 / 1000.0, v)).collect();
    let cell_error = error_rate(&err_groups).ok();

    let mut metrics = Vec::new();
    for metric in Metric::ALL {
        let vs: Vec<f64> = values.values().filter_map(|m| m.get(&metric).copied()).collect();
        let Ok(bx) = box_stats(&vs) else { continue };
        let value = match metric {
            Metric::ErrorRate => match cell_error {
                Some(v) => v,
                None => continue,
            },
            _ => median(&vs).expect("non-empty"),
        };
        let scope = learning.iter().find(|l| l.metric == metric).map(|l| l.scope).unwrap_or(Scope::AllBlocks);
        metrics.push(MetricSummary { metric, value, scope, n: vs.len(), box_stats: bx });
    }

    CellOutcome {
        report: CellReport {
            device,
            cohort,
            participants: sessions.iter().map(|s| s.participant_id.clone()).collect(),
            removed_outliers: removed,
            metrics,
        },
        learning,
        values,
    }
}

/// Aggregates sessions into per-cell summaries, learning decisions,
/// normality checks and paired device comparisons within each cohort.
pub fn build_report(sessions: &[SessionSummary], config: &ReportConfig) -> Result<AnalysisReport, StatsError> {
    if sessions.is_empty() {
        return Err(StatsError::MissingData("no sessions".into()));
    }
    let mut cells = Vec::new();
    let mut missing_cells = Vec::new();
    let mut learning = Vec::new();
    let mut normality = Vec::new();
    let mut values: BTreeMap<(Cohort, Device), ParticipantValues> = BTreeMap::new();

    for cohort in Cohort::ALL {
        for device in Device::ALL {
            let cell: Vec<&SessionSummary> =
                sessions.iter().filter(|s| s.device == device && s.cohort == cohort).collect();
            if cell.is_empty() {
                missing_cells.push(format!("{device}_{cohort}"));
                continue;
            }
            let mut seen = std::collections::HashSet::new();
            for s in &cell {
                if !seen.insert(&s.participant_id) {
                    warn!("participant {} has more than one {device}_{cohort} session", s.participant_id);
                }
            }
            let out = analyse_cell(device, cohort, &cell, config);
            for metric in Metric::ALL {
                let vs: Vec<f64> = out.values.values().filter_map(|m| m.get(&metric).copied()).collect();
                let (result, note) = match shapiro_wilk(&vs) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                normality.push(NormalityCheck { device, cohort, metric, n: vs.len(), result, note });
            }
            cells.push(out.report);
            learning.extend(out.learning);
            values.insert((cohort, device), out.values);
        }
    }

    let mut tests = Vec::new();
    for cohort in Cohort::ALL {
        for (i, &a) in Device::ALL.iter().enumerate() {
            for &b in &Device::ALL[i + 1..] {
                let (Some(va), Some(vb)) = (values.get(&(cohort, a)), values.get(&(cohort, b))) else {
                    continue;
                };
                for metric in Metric::ALL {
                    let (xs, ys): (Vec<f64>, Vec<f64>) = va
                        .iter()
                        .filter_map(|(p, m)| Some((*m.get(&metric)?, *vb.get(p)?.get(&metric)?)))
                        .unzip();
                    let (result, note) = match wilcoxon_signed_rank(&xs, &ys) {
                        Ok(r) => (Some(r), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    tests.push(PairwiseTest { cohort, metric, a, b, pairs: xs.len(), result, note });
                }
            }
        }
    }

    Ok(AnalysisReport { cells, missing_cells, learning, normality, tests })
}
