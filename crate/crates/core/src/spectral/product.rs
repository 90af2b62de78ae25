use num_complex::Complex64;

use super::fft::Grid;
use super::field::{Rank, SpectralField};
use crate::error::Result;

/// Real physical samples of every component on `grid`, two components per transform.
fn real_components(grid: Grid, f: &SpectralField) -> Vec<Vec<f64>> {
    let n = f.rank().components();
    let mut out = Vec::with_capacity(n);
    let mut c = 0;
    while c < n {
        let second = (c + 1 < n).then(|| f.component(c + 1));
        let z = grid.synthesize(f.component(c), second);
        out.push(z.iter().map(|v| v.re).collect());
        if second.is_some() {
            out.push(z.iter().map(|v| v.im).collect());
        }
        c += 2;
    }
    out
}

/// Box coefficients of real physical arrays, two per transform.
fn analyze_real(grid: Grid, parts: Vec<Vec<f64>>) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(parts.len());
    let mut it = parts.into_iter();
    while let Some(a) = it.next() {
        match it.next() {
            Some(b) => {
                let z = a.iter().zip(&b).map(|(&x, &y)| Complex64::new(x, y)).collect();
                let (ca, cb) = grid.analyze_pair(z);
                out.push(ca);
                out.push(cb);
            }
            None => {
                let z = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                out.push(grid.analyze_pair(z).0);
            }
        }
    }
    out
}

/// Exact spectral convolution of two real fields, restricted to the box.
///
/// Computed on a grid padded by 2 so no aliased product energy lands on a retained
/// frequency. Scalar times vector gives a vector; vector times vector gives the
/// tensor `f_a g_b`. The mean of the product is kept.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.lattice().check_same(g.lattice())?;
    let lat = *f.lattice();
    let grid = Grid::padded(lat.m());
    let (rank, pairs): (Rank, Vec<(usize, usize)>) = match (f.rank(), g.rank()) {
        (Rank::Scalar, Rank::Scalar) => (Rank::Scalar, vec![(0, 0)]),
        (Rank::Scalar, Rank::Vector) => (Rank::Vector, vec![(0, 0), (0, 1)]),
        (Rank::Vector, Rank::Scalar) => (Rank::Vector, vec![(0, 0), (1, 0)]),
        (Rank::Vector, Rank::Vector) => (Rank::Tensor, vec![(0, 0), (0, 1), (1, 0), (1, 1)]),
        (a, b) => {
            let bad = if a == Rank::Tensor { a } else { b };
            return Err(crate::error::Error::RankMismatch {
                expected: Rank::Vector,
                got: bad,
            });
        }
    };
    let pf = real_components(grid, f);
    let pg = real_components(grid, g);
    let products = pairs
        .iter()
        .map(|&(a, b)| pf[a].iter().zip(&pg[b]).map(|(x, y)| x * y).collect())
        .collect();
    drop(pf);
    drop(pg);
    let coeffs = analyze_real(grid, products);
    let data = coeffs.into_iter().flatten().collect();
    SpectralField::from_coefficients(lat, rank, data)
}
