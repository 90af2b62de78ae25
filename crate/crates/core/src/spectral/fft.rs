//! Square 2-D transforms on the native or zero-padded grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let inverse = direction == FftDirection::Inverse;
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((n, inverse))
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

fn rows(data: &mut [Complex64], n: usize, fft: &Plan) {
    let rows_per_task = (1 << 16) / n.max(1) + 1;
    data.par_chunks_mut(n * rows_per_task).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for row in chunk.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
    });
}

/// Unnormalized in-place 2-D transform of an `n x n` row-major array.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let direction = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let fft = plan(n, direction);
    rows(data, n, &fft);
    transpose(data, n);
    rows(data, n, &fft);
    transpose(data, n);
}

/// Transform grid of side `n >= m` for lattice coefficients on an `m x m` box.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    pub m: usize,
    pub n: usize,
}

impl Grid {
    pub fn native(m: usize) -> Self {
        Self { m, n: m }
    }

    /// Padding factor 2: products of two band-limited fields are alias-free in the box.
    pub fn padded(m: usize) -> Self {
        Self { m, n: 2 * m }
    }

    fn grid_index(&self, lattice_index: usize) -> usize {
        let (i1, i2) = (lattice_index / self.m, lattice_index % self.m);
        let wrap = |i: usize| if i < self.m / 2 { i } else { i + self.n - self.m };
        wrap(i1) * self.n + wrap(i2)
    }

    fn negate(&self, g: usize) -> usize {
        let (a, b) = (g / self.n, g % self.n);
        ((self.n - a) % self.n) * self.n + (self.n - b) % self.n
    }

    /// Physical samples of `sum_k (a_k + i b_k) e^{i k.x}`.
    pub fn synthesize(&self, a: &[Complex64], b: Option<&[Complex64]>) -> Vec<Complex64> {
        let mut z = vec![Complex64::default(); self.n * self.n];
        let i = Complex64::i();
        for (idx, &c) in a.iter().enumerate() {
            let g = self.grid_index(idx);
            z[g] = match b {
                Some(b) => c + i * b[idx],
                None => c,
            };
        }
        fft2(&mut z, self.n, true);
        z
    }

    /// Grid slot of a lattice index for any `n`; `None` when `n < m` and the wavevector
    /// does not satisfy `|k_i| < n / 2`.
    fn place(&self, lattice_index: usize) -> Option<usize> {
        if self.n >= self.m {
            return Some(self.grid_index(lattice_index));
        }
        let (m, n) = (self.m as i64, self.n as i64);
        let axis = |j: usize| {
            let k = if (j as i64) < m / 2 { j as i64 } else { j as i64 - m };
            (k.abs() < n / 2).then(|| k.rem_euclid(n) as usize)
        };
        Some(axis(lattice_index / self.m)? * self.n + axis(lattice_index % self.m)?)
    }

    /// Physical samples of `sum (a_k + i b_k) e^{i k.x}` from sparse coefficient lists.
    /// `n` may be smaller than `m` as long as every listed wavevector fits.
    pub fn scatter(&self, a: &[(usize, Complex64)], b: &[(usize, Complex64)]) -> Vec<Complex64> {
        let mut z = vec![Complex64::default(); self.n * self.n];
        let i = Complex64::i();
        for (list, factor) in [(a, Complex64::new(1.0, 0.0)), (b, i)] {
            for &(idx, c) in list {
                match self.place(idx) {
                    Some(g) => z[g] += factor * c,
                    None => debug_assert!(false, "coefficient outside the reduced grid"),
                }
            }
        }
        fft2(&mut z, self.n, true);
        z
    }

    /// Box coefficients of a complex physical field; Nyquist lines zeroed.
    pub fn analyze(&self, mut z: Vec<Complex64>) -> Vec<Complex64> {
        fft2(&mut z, self.n, false);
        let scale = 1.0 / (self.n * self.n) as f64;
        let half = self.m / 2;
        (0..self.m * self.m)
            .map(|idx| {
                let (i1, i2) = (idx / self.m, idx % self.m);
                if i1 == half || i2 == half {
                    Complex64::default()
                } else {
                    z[self.grid_index(idx)] * scale
                }
            })
            .collect()
    }

    /// Box coefficients of `Re z` and `Im z` from a single transform.
    pub fn analyze_pair(&self, mut z: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
        fft2(&mut z, self.n, false);
        let scale = 1.0 / (self.n * self.n) as f64;
        let half = self.m / 2;
        let len = self.m * self.m;
        let mut re = vec![Complex64::default(); len];
        let mut im = vec![Complex64::default(); len];
        for idx in 0..len {
            let (i1, i2) = (idx / self.m, idx % self.m);
            if i1 == half || i2 == half {
                continue;
            }
            let g = self.grid_index(idx);
            let zp = z[g] * scale;
            let zm = z[self.negate(g)].conj() * scale;
            re[idx] = (zp + zm) * 0.5;
            im[idx] = (zp - zm) * Complex64::new(0.0, -0.5);
        }
        (re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], n: usize, sign: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut s = Complex64::default();
                for c in 0..n {
                    for d in 0..n {
                        let ph = sign * 2.0 * std::f64::consts::PI * ((a * c + b * d) as f64) / n as f64;
                        s += x[c * n + d] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[a * n + b] = s;
            }
        }
        out
    }

    #[test]
    fn fft2_matches_naive() {
        let n = 8;
        let x: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut y = x.clone();
        fft2(&mut y, n, false);
        let z = naive_dft(&x, n, -1.0);
        for (u, v) in y.iter().zip(&z) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn transpose_nonmultiple_block() {
        let n = 40;
        let mut x: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        transpose(&mut x, n);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(x[i * n + j].re, (j * n + i) as f64);
            }
        }
    }
}
