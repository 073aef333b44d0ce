use std::io::{self, BufRead, Write};
use std::sync::OnceLock;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{id_width, ring_layout, ExperimentError, TargetSpec};
use crate::session::{Device, SCREEN_H, SCREEN_W};

const WORDS_RAW: &str = include_str!("../../data/words.txt");

/// Bundled prompt words, most frequent first, limited to 4-6 letters.
pub fn word_list() -> &'static [&'static str] {
    static WORDS: OnceLock<Vec<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        WORDS_RAW
            .lines()
            .map(str::trim)
            .filter(|w| (4..=6).contains(&w.chars().count()))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanSpec {
    pub ids: Vec<f64>,
    pub blocks: u32,
    /// Distance between consecutive targets, px.
    pub distance: f64,
    pub targets: usize,
}

impl Default for PlanSpec {
    fn default() -> Self {
        Self { ids: vec![3.0, 4.0, 5.0], blocks: 8, distance: 400.0, targets: 11 }
    }
}

/// Targets of one index of difficulty, in visiting order, and the words
/// typed between consecutive clicks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdSet {
    pub id: f64,
    pub width: f64,
    pub targets: Vec<TargetSpec>,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub index: u32,
    pub sets: Vec<IdSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub device: Device,
    pub seed: u64,
    pub distance: f64,
    pub blocks: Vec<Block>,
}

impl TrialPlan {
    pub fn sets(&self) -> impl Iterator<Item = (u32, &IdSet)> {
        self.blocks.iter().flat_map(|b| b.sets.iter().map(move |s| (b.index, s)))
    }

    pub fn target_count(&self) -> usize {
        self.sets().map(|(_, s)| s.targets.len()).sum()
    }
}

/// Builds a plan: each block presents every ID once in a seeded random
/// order, each ID set is a full ring with one word between clicks.
pub fn make_plan(device: Device, spec: &PlanSpec, seed: u64) -> Result<TrialPlan, ExperimentError> {
    if spec.ids.is_empty() || spec.blocks == 0 {
        return Err(ExperimentError::Domain("plan needs at least one ID and one block".into()));
    }
    let center = (SCREEN_W as f64 / 2.0, SCREEN_H as f64 / 2.0);
    let screen = (SCREEN_W as f64, SCREEN_H as f64);
    let words = word_list();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::with_capacity(spec.blocks as usize);
    for b in 0..spec.blocks {
        let mut ids = spec.ids.clone();
        ids.shuffle(&mut rng);
        let sets = ids
            .into_iter()
            .map(|id| {
                let width = id_width(id, spec.distance)?;
                let targets = ring_layout(spec.targets, spec.distance, width, center, screen)?;
                let words = words
                    .choose_multiple(&mut rng, spec.targets.saturating_sub(1))
                    .map(|w| w.to_string())
                    .collect();
                Ok(IdSet { id, width, targets, words })
            })
            .collect::<Result<_, ExperimentError>>()?;
        blocks.push(Block { index: b, sets });
    }
    Ok(TrialPlan { device, seed, distance: spec.distance, blocks })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PlanRecord {
    Plan { device: Device, seed: u64, distance: f64, block_count: u32 },
    IdSet { block: u32, #[serde(flatten)] set: IdSet },
}

/// Writes a plan as JSON lines: a `plan` header then one `id_set` per line.
pub fn write_plan<W: Write>(plan: &TrialPlan, mut out: W) -> io::Result<()> {
    let header = PlanRecord::Plan {
        device: plan.device,
        seed: plan.seed,
        distance: plan.distance,
        block_count: plan.blocks.len() as u32,
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for (block, set) in plan.sets() {
        let rec = PlanRecord::IdSet { block, set: set.clone() };
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

pub fn read_plan<R: BufRead>(reader: R) -> Result<TrialPlan, ExperimentError> {
    let mut plan: Option<TrialPlan> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ExperimentError::PlanFormat(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PlanRecord =
            serde_json::from_str(&line).map_err(|e| ExperimentError::PlanFormat(format!("line {}: {e}", i + 1)))?;
        match (rec, plan.as_mut()) {
            (PlanRecord::Plan { device, seed, distance, block_count }, None) => {
                let blocks = (0..block_count).map(|index| Block { index, sets: Vec::new() }).collect();
                plan = Some(TrialPlan { device, seed, distance, blocks });
            }
            (PlanRecord::IdSet { block, set }, Some(p)) => {
                let b = p
                    .blocks
                    .get_mut(block as usize)
                    .ok_or_else(|| ExperimentError::PlanFormat(format!("line {}: block {block} out of range", i + 1)))?;
                b.sets.push(set);
            }
            (PlanRecord::Plan { .. }, Some(_)) => {
                return Err(ExperimentError::PlanFormat(format!("line {}: duplicate plan header", i + 1)))
            }
            (PlanRecord::IdSet { .. }, None) => {
                return Err(ExperimentError::PlanFormat("plan header must come first".into()))
            }
        }
    }
    plan.ok_or_else(|| ExperimentError::PlanFormat("empty plan".into()))
}
