use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpbesov::{DEFAULT_PROBE_DIRECTION, DEFAULT_PROBE_GAP};

/// Shell exponent `s(n)` of the lacunary forcings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentMap {
    /// `s(n) = n^2`.
    Square,
    /// `s(n) = scale * n + offset`.
    Affine { scale: i64, offset: i64 },
}

impl ExponentMap {
    pub fn eval(&self, n: i64) -> i64 {
        match *self {
            ExponentMap::Square => n * n,
            ExponentMap::Affine { scale, offset } => scale * n + offset,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            ExponentMap::Square => "n^2".to_string(),
            ExponentMap::Affine { scale, offset } => format!("{scale} n + {offset}"),
        }
    }

    /// Shell exponents over `range`, checked to increase by at least `min_gap`.
    pub fn shells(&self, range: (i64, i64), min_gap: i64) -> Result<Vec<(i64, i64)>> {
        let (lo, hi) = range;
        if hi < lo {
            return Err(Error::InvalidParameter(format!("empty block range [{lo}, {hi}]")));
        }
        let out: Vec<(i64, i64)> = (lo..=hi).map(|n| (n, self.eval(n))).collect();
        for w in out.windows(2) {
            if w[1].1 - w[0].1 < min_gap {
                return Err(Error::ShellsNotDisjoint(format!(
                    "s({}) = {} and s({}) = {} differ by less than {min_gap}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceVariant {
    Step1,
    Step2,
    Step3,
}

/// Parameters of one forcing; every report embeds the spec it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSpec {
    pub variant: ForceVariant,
    pub delta: f64,
    /// Size parameter `N`.
    pub n: i64,
    pub exponent_map: ExponentMap,
    /// Inclusive block range `[k0, k1]`.
    pub range: (i64, i64),
    /// Translation stride of the envelope blocks.
    pub stride: Option<f64>,
    /// Primitive integer direction of the block translations.
    #[serde(default = "unit_e1")]
    pub translation: [i64; 2],
    /// Carrier exponent `c` of the modulated forcing.
    pub carrier: Option<i64>,
    pub probe_gap: u32,
    pub probe_direction: [f64; 2],
}

fn unit_e1() -> [i64; 2] {
    [1, 0]
}

impl ForceSpec {
    pub fn step1(n: i64, delta: f64) -> Self {
        Self {
            variant: ForceVariant::Step1,
            delta,
            n,
            exponent_map: ExponentMap::Square,
            range: (n, n),
            stride: None,
            translation: unit_e1(),
            carrier: None,
            probe_gap: DEFAULT_PROBE_GAP,
            probe_direction: DEFAULT_PROBE_DIRECTION,
        }
    }

    pub fn step2(n: i64, delta: f64, exponent_map: ExponentMap, range: (i64, i64)) -> Self {
        Self {
            variant: ForceVariant::Step2,
            exponent_map,
            range,
            ..Self::step1(n, delta)
        }
    }

    pub fn step3(
        n: i64,
        delta: f64,
        exponent_map: ExponentMap,
        range: (i64, i64),
        stride: f64,
        carrier: i64,
    ) -> Self {
        Self {
            variant: ForceVariant::Step3,
            exponent_map,
            range,
            stride: Some(stride),
            carrier: Some(carrier),
            ..Self::step1(n, delta)
        }
    }

    /// Same spec with block translations along `direction`.
    pub fn with_translation(self, direction: [i64; 2]) -> Self {
        Self {
            translation: direction,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {}", self.delta)));
        }
        match self.variant {
            ForceVariant::Step1 => Ok(()),
            ForceVariant::Step2 => {
                if self.n < 2 {
                    return Err(Error::InvalidParameter(format!("Step 2 needs N >= 2 so log N > 0, got {}", self.n)));
                }
                if self.range.0 < 1 {
                    return Err(Error::InvalidParameter(format!(
                        "Step 2 block range must start at n >= 1, got {}",
                        self.range.0
                    )));
                }
                self.exponent_map.shells(self.range, 2).map(|_| ())
            }
            ForceVariant::Step3 => {
                if self.n < 2 {
                    return Err(Error::InvalidParameter(format!("Step 3 needs N >= 2 so log N > 0, got {}", self.n)));
                }
                match self.stride {
                    Some(r) if r > 0.0 && r.is_finite() => {}
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "Step 3 needs a positive stride, got {other:?}"
                        )))
                    }
                }
                let [a, b] = self.translation;
                if a == 0 && b == 0 {
                    return Err(Error::InvalidParameter("Step 3 translation direction is zero".into()));
                }
                let shells = self.exponent_map.shells(self.range, 1)?;
                let top = shells.last().map(|s| s.1).unwrap_or(0);
                match self.carrier {
                    Some(c) if c > top + 2 => Ok(()),
                    other => Err(Error::InvalidParameter(format!(
                        "Step 3 carrier exponent must exceed the top block shell {top} by at least 3, got {other:?}"
                    ))),
                }
            }
        }
    }
}
