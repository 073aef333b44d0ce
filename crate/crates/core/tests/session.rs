use ksi_core::experiment::{make_plan, PlanSpec};
use ksi_core::session::{
    decode_session, encode_session, validate_session, Cohort, Device, Rule, SessionLog, SurveyPhase,
};
use ksi_core::sim::{preset, simulate_discomfort, simulate_session};

fn simulated() -> SessionLog {
    let p = preset(Device::Fingers, Cohort::Expert).unwrap();
    let plan = make_plan(Device::Fingers, &PlanSpec { blocks: 1, ..Default::default() }, 2).unwrap();
    let mut log = simulate_session(&p, &plan, 2).unwrap();
    log.surveys = vec![
        simulate_discomfort(&p, SurveyPhase::Baseline, 2),
        simulate_discomfort(&p, SurveyPhase::PostDevice, 2),
    ];
    log
}

#[test]
fn simulated_session_round_trips() {
    let log = simulated();
    let text = encode_session(&log);
    let back = decode_session(text.lines()).unwrap();
    assert_eq!(back, log);
    assert_eq!(encode_session(&back), text);
}

#[test]
fn swapped_lines_are_rejected_on_decode() {
    let text = encode_session(&simulated());
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(5, 6);
    let err = decode_session(lines.iter().copied()).unwrap_err();
    assert!(err.to_string().contains("non-monotone timestamps"), "{err}");
}

#[test]
fn tracked_space_is_flagged() {
    let text = encode_session(&simulated());
    let tampered: Vec<String> = text
        .lines()
        .map(|l| if l.contains("\"key\":\"space\"") { l.replace("untracked", "tracked") } else { l.to_string() })
        .collect();
    let log = decode_session(tampered.iter()).unwrap();
    let v = validate_session(&log);
    assert!(!v.is_empty());
    assert!(v.iter().all(|v| v.rule == Rule::ClickWithoutUntrackedSpacebar), "{v:?}");
}
