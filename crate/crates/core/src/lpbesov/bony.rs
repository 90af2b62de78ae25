use super::partition::DyadicPartition;
use crate::bilinear::bee_block;
use crate::error::Result;
use crate::spectral::{Rank, SpectralField};

/// Low-high, high-low and high-high parts of `B[f, g]`.
#[derive(Debug, Clone)]
pub struct BonySplit {
    pub low_high: SpectralField,
    pub high_low: SpectralField,
    pub high_high: SpectralField,
}

impl BonySplit {
    pub fn total(&self) -> SpectralField {
        &(&self.low_high + &self.high_low) + &self.high_high
    }
}

struct Shells {
    pieces: Vec<(i32, SpectralField)>,
}

impl Shells {
    fn new(part: &DyadicPartition, f: &SpectralField) -> Result<Self> {
        let mut pieces = Vec::new();
        for j in part.shells() {
            if part.shell_is_active(f, j) {
                pieces.push((j, part.shell_project(f, j)?));
            }
        }
        Ok(Self { pieces })
    }

    /// Sum of the shells whose index satisfies `keep`, or `None` if empty.
    fn sum_where(&self, keep: impl Fn(i32) -> bool) -> Option<SpectralField> {
        let mut acc: Option<SpectralField> = None;
        for (j, p) in &self.pieces {
            if keep(*j) {
                acc = Some(match acc {
                    Some(a) => &a + p,
                    None => p.clone(),
                });
            }
        }
        acc
    }
}

fn low_high(low: &Shells, high: &Shells, zero: &SpectralField) -> Result<SpectralField> {
    let mut acc = zero.clone();
    for (l, g) in &high.pieces {
        if let Some(s) = low.sum_where(|k| k <= l - 3) {
            acc = acc.try_add(&bee_block(&s, g)?)?;
        }
    }
    Ok(acc)
}

impl DyadicPartition {
    /// Paraproduct split of `B[f, g]`, one block evaluation per active shell.
    pub fn bony_split(&self, f: &SpectralField, g: &SpectralField) -> Result<BonySplit> {
        f.expect_rank(Rank::Scalar)?;
        g.expect_rank(Rank::Scalar)?;
        self.lattice().check_same(f.lattice())?;
        self.lattice().check_same(g.lattice())?;
        let zero = SpectralField::zeros(*self.lattice(), Rank::Scalar);
        let fs = Shells::new(self, f)?;
        let gs = Shells::new(self, g)?;
        let low_high_part = low_high(&fs, &gs, &zero)?;
        let high_low_part = low_high(&gs, &fs, &zero)?;
        let mut high_high = zero;
        for (k, fk) in &fs.pieces {
            if let Some(near) = gs.sum_where(|l| (l - k).abs() <= 2) {
                high_high = high_high.try_add(&bee_block(fk, &near)?)?;
            }
        }
        Ok(BonySplit {
            low_high: low_high_part,
            high_low: high_low_part,
            high_high,
        })
    }
}
