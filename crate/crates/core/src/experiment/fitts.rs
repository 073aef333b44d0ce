use super::ExperimentError;

/// Target width for a Shannon index of difficulty: `W = D / (2^ID - 1)`.
pub fn id_width(id: f64, distance: f64) -> Result<f64, ExperimentError> {
    if !(id > 0.0 && distance > 0.0) {
        return Err(ExperimentError::Domain(format!("need ID > 0 and D > 0, got ID={id} D={distance}")));
    }
    Ok(distance / (id.exp2() - 1.0))
}

/// Shannon index of difficulty, `log2(D/W + 1)` bits.
pub fn width_id(width: f64, distance: f64) -> Result<f64, ExperimentError> {
    if !(width > 0.0 && distance > 0.0) {
        return Err(ExperimentError::Domain(format!("need W > 0 and D > 0, got W={width} D={distance}")));
    }
    Ok((distance / width).ln_1p() / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn widths_at_400px() {
        assert_eq!(id_width(1.0, 400.0).unwrap(), 400.0);
        assert!((id_width(3.0, 400.0).unwrap() - 57.142857142857146).abs() < 1e-12);
        assert!((id_width(5.0, 400.0).unwrap() - 12.903225806451612).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(id_width(0.0, 400.0).is_err());
        assert!(id_width(3.0, -1.0).is_err());
        assert!(width_id(0.0, 400.0).is_err());
    }

    proptest! {
        #[test]
        fn inverse_pair(id in 0.5f64..8.0, d in 10.0f64..2000.0) {
            let w = id_width(id, d).unwrap();
            prop_assert!((width_id(w, d).unwrap() - id).abs() < 1e-12);
        }
    }
}
