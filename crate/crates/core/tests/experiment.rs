use ksi_core::experiment::{
    extract_metrics, id_width, make_plan, ring_layout, ring_radius, run_trial, width_id, PlanSpec,
};
use ksi_core::session::{Cohort, Device, EventKind};
use ksi_core::sim::{preset, simulate_session};

#[test]
fn ring_distances_for_study_widths() {
    for id in [3.0, 4.0, 5.0] {
        let w = id_width(id, 400.0).unwrap();
        let targets = ring_layout(11, 400.0, w, (683.0, 384.0), (1366.0, 768.0)).unwrap();
        assert_eq!(targets.len(), 11);
        for pair in targets.windows(2) {
            let d = (pair[1].cx - pair[0].cx).hypot(pair[1].cy - pair[0].cy);
            assert!((d - 400.0).abs() < 1e-9, "{d}");
        }
        for t in &targets {
            let r = (t.cx - 683.0).hypot(t.cy - 384.0);
            assert!((r - ring_radius(11, 400.0)).abs() < 1e-9);
        }
    }
}

#[test]
fn study_widths() {
    // W = D / (2^ID - 1)
    assert!((id_width(3.0, 400.0).unwrap() - 400.0 / 7.0).abs() < 1e-12);
    assert!((id_width(5.0, 400.0).unwrap() - 400.0 / 31.0).abs() < 1e-12);
    assert!((width_id(400.0 / 15.0, 400.0).unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn id_orders_are_balanced_across_seeds() {
    let spec = PlanSpec { blocks: 1, ..Default::default() };
    let mut counts = std::collections::HashMap::new();
    for seed in 0..1000 {
        let plan = make_plan(Device::Mouse, &spec, seed).unwrap();
        let order: Vec<i64> = plan.blocks[0].sets.iter().map(|s| s.id as i64).collect();
        *counts.entry(order).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 6);
    for c in counts.values() {
        let f = *c as f64 / 1000.0;
        assert!((f - 1.0 / 6.0).abs() <= 0.05, "{f}");
    }
}

#[test]
fn simulated_sessions_complete_the_plan() {
    let spec = PlanSpec { blocks: 2, ..Default::default() };
    for device in Device::ALL {
        for cohort in Cohort::ALL {
            let plan = make_plan(device, &spec, 11).unwrap();
            let log = simulate_session(&preset(device, cohort).unwrap(), &plan, 12).unwrap();
            let run = run_trial(&plan, &log.events).unwrap();
            assert_eq!(run.outcomes.len(), plan.target_count());
            let misses: u32 = extract_metrics(&log).metrics.iter().map(|m| m.errors).sum();
            assert_eq!(misses, run.total_misses());
        }
    }
}

#[test]
fn truncated_session_reports_where_it_stopped() {
    let plan = make_plan(Device::Mouse, &PlanSpec { blocks: 1, ..Default::default() }, 1).unwrap();
    let log = simulate_session(&preset(Device::Mouse, Cohort::Expert).unwrap(), &plan, 1).unwrap();
    let cut = log
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.kind, EventKind::TargetShown { .. }))
        .nth(15)
        .map(|(i, _)| i)
        .unwrap();
    let err = run_trial(&plan, &log.events[..=cut]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("incomplete trial"), "{msg}");
    assert!(msg.contains("15/33"), "{msg}");
}
