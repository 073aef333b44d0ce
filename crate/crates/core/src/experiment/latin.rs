use crate::session::Device;

/// Device presentation order used in the comparative study.
pub const STUDY_DEVICES: [Device; 3] = [Device::Fingers, Device::Mouse, Device::Trackpad];

/// Row `participant_index mod n` of the cyclic Latin square over `devices`.
pub fn latin_order(devices: &[Device], participant_index: usize) -> Vec<Device> {
    let n = devices.len();
    if n == 0 {
        return Vec::new();
    }
    let r = participant_index % n;
    (0..n).map(|k| devices[(r + k) % n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_form_latin_square() {
        let rows: Vec<_> = (0..3).map(|i| latin_order(&STUDY_DEVICES, i)).collect();
        for pos in 0..3 {
            let mut col: Vec<_> = rows.iter().map(|r| r[pos]).collect();
            col.sort();
            assert_eq!(col, vec![Device::Fingers, Device::Trackpad, Device::Mouse]);
        }
        for row in &rows {
            let mut r = row.clone();
            r.sort();
            r.dedup();
            assert_eq!(r.len(), 3);
        }
        assert_eq!(latin_order(&STUDY_DEVICES, 3), rows[0]);
    }

    #[test]
    fn twenty_five_participants_nearly_balanced() {
        for pos in 0..3 {
            let counts: Vec<usize> = STUDY_DEVICES
                .iter()
                .map(|d| (0..25).filter(|&p| latin_order(&STUDY_DEVICES, p)[pos] == *d).count())
                .collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "position {pos}: {counts:?}");
        }
    }
}
