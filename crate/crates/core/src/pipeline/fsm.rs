use nalgebra::Point2;

use super::Touch;
use crate::session::{EventKind, Hand, Key, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub mode: Mode,
    pub touch: Touch,
    pub last_pointer: Point2<f64>,
}

impl ModeState {
    pub fn new(mode: Mode, last_pointer: Point2<f64>) -> Self {
        Self { mode, touch: Touch::Off, last_pointer }
    }
}

/// Advances the mode machine by one raw input and returns the derived
/// events (mode switches, clicks, typed characters).
///
/// Tab toggles the mode. In pointing mode only a spacebar press from the
/// untracked hand clicks; every other key is ignored. In typing mode keys
/// that produce a character are passed through.
pub fn mode_fsm_step(state: ModeState, ev: &EventKind) -> (ModeState, Vec<EventKind>) {
    let mut next = state;
    let mut out = Vec::new();
    match ev {
        EventKind::PointerSample { x, y } => next.last_pointer = Point2::new(*x, *y),
        EventKind::KeyDown { key: Key::Tab, .. } => {
            next.mode = state.mode.toggled();
            out.push(EventKind::ModeSwitch { to: next.mode });
        }
        EventKind::KeyDown { key, hand } => match state.mode {
            Mode::Pointing => {
                if *key == Key::Space && *hand == Hand::Untracked {
                    out.push(EventKind::Click { x: state.last_pointer.x, y: state.last_pointer.y });
                } else {
                    log::debug!("ignoring {key:?} ({hand:?} hand) in pointing mode");
                }
            }
            Mode::Typing => match key.typed_char() {
                Some(ch) => out.push(EventKind::CharTyped { ch }),
                None => log::debug!("ignoring non-character key {key:?}"),
            },
        },
        EventKind::KeyUp { .. } => {}
        other => log::debug!("mode machine ignores {} events", other.tag()),
    }
    (next, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn start(mode: Mode) -> ModeState {
        ModeState::new(mode, Point2::new(50.0, 60.0))
    }

    fn down(key: Key, hand: Hand) -> EventKind {
        EventKind::KeyDown { key, hand }
    }

    #[test]
    fn tab_enters_pointing_mode() {
        let (s, out) = mode_fsm_step(start(Mode::Typing), &down(Key::Tab, Hand::Untracked));
        assert_eq!(s.mode, Mode::Pointing);
        assert_eq!(out, vec![EventKind::ModeSwitch { to: Mode::Pointing }]);
    }

    #[test]
    fn untracked_space_clicks_at_last_pointer() {
        let (_, out) = mode_fsm_step(start(Mode::Pointing), &down(Key::Space, Hand::Untracked));
        assert_eq!(out, vec![EventKind::Click { x: 50.0, y: 60.0 }]);
    }

    #[test]
    fn tracked_space_does_nothing() {
        let (s, out) = mode_fsm_step(start(Mode::Pointing), &down(Key::Space, Hand::Tracked));
        assert!(out.is_empty());
        assert_eq!(s, start(Mode::Pointing));
    }

    #[test]
    fn typing_mode_passes_characters() {
        let s = start(Mode::Typing);
        assert_eq!(mode_fsm_step(s, &down(Key::Char('q'), Hand::Tracked)).1, vec![EventKind::CharTyped { ch: 'q' }]);
        assert_eq!(mode_fsm_step(s, &down(Key::Space, Hand::Untracked)).1, vec![EventKind::CharTyped { ch: ' ' }]);
        assert!(mode_fsm_step(s, &down(Key::Named("shift".into()), Hand::Tracked)).1.is_empty());
        assert!(mode_fsm_step(start(Mode::Pointing), &down(Key::Char('q'), Hand::Tracked)).1.is_empty());
    }

    #[test]
    fn pointer_samples_update_position() {
        let (s, out) = mode_fsm_step(start(Mode::Pointing), &EventKind::PointerSample { x: 1.0, y: 2.0 });
        assert!(out.is_empty());
        assert_eq!(s.last_pointer, Point2::new(1.0, 2.0));
    }

    fn arb_input() -> impl Strategy<Value = EventKind> {
        let key = prop_oneof![
            Just(Key::Tab),
            Just(Key::Space),
            Just(Key::Backspace),
            Just(Key::Char('a')),
            Just(Key::Named("alt".into())),
        ];
        let hand = prop_oneof![Just(Hand::Tracked), Just(Hand::Untracked)];
        prop_oneof![
            (key.clone(), hand).prop_map(|(key, hand)| EventKind::KeyDown { key, hand }),
            key.prop_map(|key| EventKind::KeyUp { key }),
            (0.0f64..1366.0, 0.0f64..768.0).prop_map(|(x, y)| EventKind::PointerSample { x, y }),
        ]
    }

    proptest! {
        #[test]
        fn clicks_only_in_pointing_mode(inputs in proptest::collection::vec(arb_input(), 0..300)) {
            let mut s = start(Mode::Typing);
            let mut tabs = 0;
            let mut switches = 0;
            for ev in &inputs {
                if matches!(ev, EventKind::KeyDown { key: Key::Tab, .. }) {
                    tabs += 1;
                }
                let (n, out) = mode_fsm_step(s, ev);
                for o in &out {
                    match o {
                        EventKind::Click { .. } => {
                            prop_assert_eq!(s.mode, Mode::Pointing);
                            let untracked_space = matches!(ev, EventKind::KeyDown { key: Key::Space, hand: Hand::Untracked });
                            prop_assert!(untracked_space);
                        }
                        EventKind::ModeSwitch { .. } => switches += 1,
                        _ => {}
                    }
                }
                s = n;
            }
            prop_assert_eq!(tabs, switches);
        }
    }
}
