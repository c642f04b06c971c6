use serde::{Deserialize, Serialize};

use super::RateError;

/// Storage decay constants (s). Either may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub t1_e: f64,
    pub t2_pure_c: f64,
}

impl DecayParams {
    pub fn new(t1_e: f64, t2_pure_c: f64) -> Result<Self, RateError> {
        if !(t1_e > 0.0) || !(t2_pure_c > 0.0) {
            return Err(RateError::InvalidDecay(t1_e, t2_pure_c));
        }
        Ok(DecayParams { t1_e, t2_pure_c })
    }

    /// Combined time constant: rates of the two processes add.
    pub fn combined_time(&self) -> f64 {
        1.0 / (1.0 / self.t2_pure_c + 1.0 / self.t1_e)
    }
}

/// Coherence surviving after `t` of storage.
pub fn storage_decay_envelope(d: &DecayParams, t: f64) -> Result<f64, RateError> {
    if !(t >= 0.0) {
        return Err(RateError::NegativeTime(t));
    }
    Ok((-t * (1.0 / d.t2_pure_c + 1.0 / d.t1_e)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let d = DecayParams::new(3.3e-3, f64::INFINITY).unwrap();
        assert_eq!(storage_decay_envelope(&d, 0.0).unwrap(), 1.0);
        let e = storage_decay_envelope(&d, 3.3e-3).unwrap();
        assert!((e - (-1.0f64).exp()).abs() < 1e-15);
        let d = DecayParams::new(3.3e-3, 33e-3).unwrap();
        assert!((d.combined_time() - 3.0e-3).abs() < 1e-15);
        assert!(DecayParams::new(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(t1 in 1e-5f64..1.0, t2 in 1e-5f64..1.0, a in 0.0f64..0.1, b in 0.0f64..0.1) {
            let d = DecayParams::new(t1, t2).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let e_lo = storage_decay_envelope(&d, lo).unwrap();
            let e_hi = storage_decay_envelope(&d, hi).unwrap();
            prop_assert!(e_hi <= e_lo);
            let slower = (-hi / t1.max(t2)).exp();
            prop_assert!(e_hi <= slower + 1e-15);
        }
    }
}
