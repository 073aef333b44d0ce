use std::collections::BTreeMap;
use std::path::Path;

use ksi_core::experiment::{make_plan, ExtractConfig, PlanSpec, STUDY_DEVICES};
use ksi_core::pipeline::{PipelineConfig, SceneConfig};
use ksi_core::session::{Cohort, Device};
use ksi_core::sim::{preset, OperatorProfile};
use ksi_core::stats::ReportConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Study, analysis and device settings. Every field has a default, so a
/// config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub devices: Vec<Device>,
    pub participants: u32,
    /// The first `experts` participants are experts, the rest novices.
    pub experts: u32,
    pub blocks: u32,
    pub ids: Vec<f64>,
    pub distance: f64,
    pub targets: usize,
    pub seed: u64,
    /// Partial profiles merged over the shipped presets, keyed
    /// `<device>_<cohort>`.
    pub profile_overrides: BTreeMap<String, Value>,
    pub extract: ExtractConfig,
    pub report: ReportConfig,
    pub pipeline: PipelineConfig,
    pub calibration: SceneConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            devices: STUDY_DEVICES.to_vec(),
            participants: 25,
            experts: 10,
            blocks: 8,
            ids: vec![3.0, 4.0, 5.0],
            distance: 400.0,
            targets: 11,
            seed: 1,
            profile_overrides: BTreeMap::new(),
            extract: ExtractConfig::default(),
            report: ReportConfig::default(),
            pipeline: PipelineConfig::default(),
            calibration: SceneConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Usage(format!("config field '{field}': {msg}")));
        if self.participants < 1 {
            return bad("participants", "must be at least 1".into());
        }
        if self.blocks < 1 {
            return bad("blocks", "must be at least 1".into());
        }
        if self.devices.is_empty() {
            return bad("devices", "must list at least one device".into());
        }
        if self.ids.is_empty() {
            return bad("ids", "must list at least one ID".into());
        }
        for key in self.profile_overrides.keys() {
            let known = Device::ALL.iter().any(|d| Cohort::ALL.iter().any(|c| *key == format!("{d}_{c}")));
            if !known {
                return bad("profile_overrides", format!("unknown profile '{key}'"));
            }
        }
        make_plan(self.devices[0], &self.plan_spec(), 0)
            .map_err(|e| CliError::Usage(format!("config fields 'ids'/'distance'/'targets': {e}")))?;
        for d in &self.devices {
            for c in Cohort::ALL {
                self.profile(*d, c)?;
            }
        }
        Ok(())
    }

    pub fn plan_spec(&self) -> PlanSpec {
        PlanSpec { ids: self.ids.clone(), blocks: self.blocks, distance: self.distance, targets: self.targets }
    }

    pub fn cohort_of(&self, participant: u32) -> Cohort {
        if participant < self.experts {
            Cohort::Expert
        } else {
            Cohort::Novice
        }
    }

    /// Shipped preset with any override merged in.
    pub fn profile(&self, device: Device, cohort: Cohort) -> Result<OperatorProfile, CliError> {
        let base = preset(device, cohort).map_err(|e| CliError::Usage(e.to_string()))?;
        let key = format!("{device}_{cohort}");
        let Some(patch) = self.profile_overrides.get(&key) else {
            return Ok(base);
        };
        let mut merged = serde_json::to_value(&base).expect("profile serializes");
        merge(&mut merged, patch);
        let profile: OperatorProfile = serde_json::from_value(merged)
            .map_err(|e| CliError::Usage(format!("config field 'profile_overrides.{key}': {e}")))?;
        profile
            .check()
            .map_err(|e| CliError::Usage(format!("config field 'profile_overrides.{key}': {e}")))?;
        Ok(profile)
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}
