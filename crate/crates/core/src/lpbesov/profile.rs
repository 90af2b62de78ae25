use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step `rho(t) = h(t) / (h(t) + h(1 - t))`: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = h(t);
        a / (a + h(1.0 - t))
    }
}

/// Radial cut `sigma`: 1 on `[0, lower]`, 0 on `[upper, inf)`, smooth in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutProfile {
    pub lower: f64,
    pub upper: f64,
}

impl Default for CutProfile {
    fn default() -> Self {
        Self {
            lower: 1.25,
            upper: 1.75,
        }
    }
}

impl CutProfile {
    /// Unchecked profile for auxiliary bumps.
    pub const fn raw(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    /// Profile admissible for a dyadic partition: `5/4 <= lower < upper <= 7/4`.
    ///
    /// These bounds keep the plateau `[7/8, 5/4]` and the support `[1/2, 2]`.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || !(1.25..1.75).contains(&lower) || upper <= lower || upper > 1.75 {
            return Err(Error::Partition(format!(
                "profile transition [{lower}, {upper}] must satisfy 5/4 <= lower < upper <= 7/4"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn sigma(&self, r: f64) -> f64 {
        smooth_step((self.upper - r) / (self.upper - self.lower))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_plateaus() {
        let p = CutProfile::default();
        assert_eq!(p.sigma(0.0), 1.0);
        assert_eq!(p.sigma(1.25), 1.0);
        assert_eq!(p.sigma(1.75), 0.0);
        assert!(p.sigma(1.5) > 0.0 && p.sigma(1.5) < 1.0);
        assert!(CutProfile::new(1.0, 1.75).is_err());
        assert!(CutProfile::new(1.3, 1.9).is_err());
        assert!(CutProfile::new(1.3, 1.7).is_ok());
    }
}
