//! Exhaustive rank and coding-gain evaluation over a finite codebook.

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

use super::LinearStbc;

/// Largest codebook the brute-force metrics will enumerate.
pub const CODEBOOK_CAP: usize = 4096;

/// Relative singular-value threshold for numerical rank.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeMetrics {
    pub min_rank: usize,
    pub coding_gain: f64,
    pub pair_count_examined: u64,
}

/// Every codeword of `code` with each complex symbol drawn from
/// `constellation`. Ordered lexicographically by point index.
pub fn enumerate_codebook(code: &LinearStbc, constellation: &Constellation, cap: usize) -> Result<Vec<ComplexGrid>> {
    if !code.k().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "K={} real symbols do not pair into complex symbols",
            code.k()
        )));
    }
    let n_sym = code.k() / 2;
    let m = constellation.size();
    let size = (m as u128).checked_pow(n_sym as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::CodebookTooLarge { size, cap: cap as u128 });
    }
    let points = constellation.points();
    let mut idx = vec![0usize; n_sym];
    let mut s = vec![0.0; code.k()];
    let mut out = Vec::with_capacity(size as usize);
    loop {
        for (j, &p) in idx.iter().enumerate() {
            s[2 * j] = points[p].re;
            s[2 * j + 1] = points[p].im;
        }
        out.push(code.assemble_codeword(&s)?);
        // Odometer, last symbol fastest.
        let mut d = n_sym;
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
        }
    }
}

fn numerical_rank(d: &ComplexGrid) -> usize {
    let sv = d.to_nalgebra().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > RANK_TOL * max).count()
}

fn gram_determinant(d: &ComplexGrid) -> Result<f64> {
    let m = d.to_nalgebra();
    let gram = &m * m.adjoint();
    let det = gram.determinant();
    if det.im.abs() >= 1e-10 {
        return Err(Error::Numeric(format!(
            "Gram determinant has imaginary residue {:e}",
            det.im
        )));
    }
    Ok(det.re)
}

/// Minimum rank of codeword differences over all distinct pairs.
pub fn diversity_rank(code: &LinearStbc, constellation: &Constellation) -> Result<usize> {
    Ok(coding_gain(code, constellation)?.min_rank)
}

/// Minimum of `det[(X1 - X2)(X1 - X2)^H]` over distinct codeword pairs, with
/// the minimum difference rank. The gain is reported as exactly zero when
/// some difference is rank deficient.
pub fn coding_gain(code: &LinearStbc, constellation: &Constellation) -> Result<CodeMetrics> {
    let book = enumerate_codebook(code, constellation, CODEBOOK_CAP)?;
    let mut min_rank = usize::MAX;
    let mut min_det = f64::INFINITY;
    let mut pairs = 0u64;
    for i in 0..book.len() {
        for j in i + 1..book.len() {
            let d = &book[i] - &book[j];
            pairs += 1;
            min_rank = min_rank.min(numerical_rank(&d));
            min_det = min_det.min(gram_determinant(&d)?);
        }
    }
    if pairs == 0 {
        return Err(Error::InvalidArgument("codebook has a single codeword".into()));
    }
    let coding_gain = if min_rank < code.n_tx() { 0.0 } else { min_det.max(0.0) };
    Ok(CodeMetrics {
        min_rank,
        coding_gain,
        pair_count_examined: pairs,
    })
}
