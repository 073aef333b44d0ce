use ksi_core::experiment::{extract_metrics, make_plan, PlanSpec, TrialMetrics};
use ksi_core::session::{validate_session, Cohort, Device, EventKind};
use ksi_core::sim::{preset, simulate_session, OperatorProfile};

fn metrics(profile: &OperatorProfile, blocks: u32, seeds: std::ops::Range<u64>) -> Vec<TrialMetrics> {
    let spec = PlanSpec { blocks, ..Default::default() };
    seeds
        .flat_map(|s| {
            let plan = make_plan(profile.device, &spec, s).unwrap();
            extract_metrics(&simulate_session(profile, &plan, s).unwrap()).metrics
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn no_overlap_when_disabled() {
    for device in Device::ALL {
        let mut p = preset(device, Cohort::Expert).unwrap();
        p.overlap_prob = 0.0;
        let m = metrics(&p, 2, 0..4);
        assert!(m.iter().all(|m| !m.overlap && m.homing_t > 0.0), "{device}");
    }
}

#[test]
fn slower_fitts_slope_means_slower_movement() {
    let base = preset(Device::Trackpad, Cohort::Expert).unwrap();
    let mut prev = 0.0;
    for b in [0.05, 0.15, 0.3] {
        let p = OperatorProfile { fitts_b: b, ..base.clone() };
        let med = median(metrics(&p, 2, 0..4).iter().map(|m| m.movement_t).collect());
        assert!(med > prev, "b={b}: {med} <= {prev}");
        prev = med;
    }
}

#[test]
fn phases_fit_inside_the_target_interval() {
    let p = preset(Device::Fingers, Cohort::Novice).unwrap();
    let plan = make_plan(Device::Fingers, &PlanSpec { blocks: 1, ..Default::default() }, 4).unwrap();
    let log = simulate_session(&p, &plan, 4).unwrap();
    let mut shown = Vec::new();
    let mut hits = Vec::new();
    let mut active: Option<(f64, f64, f64, f64)> = None;
    for e in &log.events {
        match e.kind {
            EventKind::TargetShown { cx, cy, w, .. } => {
                shown.push(e.t);
                active = Some((e.t, cx, cy, w));
            }
            EventKind::Click { x, y } => {
                if let Some((_, cx, cy, w)) = active {
                    if (x - cx).hypot(y - cy) <= w / 2.0 {
                        hits.push(e.t);
                        active = None;
                    }
                }
            }
            _ => {}
        }
    }
    let m = extract_metrics(&log).metrics;
    assert_eq!(m.len(), shown.len());
    for ((m, s), h) in m.iter().zip(&shown).zip(&hits) {
        assert!(m.homing_t >= 0.0 && m.movement_t > 0.0);
        assert!(m.homing_t + m.movement_t <= h - s + 1e-9);
    }
}

#[test]
fn every_preset_produces_valid_logs() {
    for device in Device::ALL {
        for cohort in Cohort::ALL {
            let p = preset(device, cohort).unwrap();
            let plan = make_plan(device, &PlanSpec { blocks: 1, ..Default::default() }, 8).unwrap();
            let log = simulate_session(&p, &plan, 8).unwrap();
            assert_eq!(validate_session(&log), vec![], "{device}_{cohort}");
        }
    }
}
