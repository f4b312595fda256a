//! Column-piece machinery: partitioning a wide matrix into contiguous
//! column blocks, per-piece low-rank truncation, and the scaling relations
//! between pieces of different users/antennas that the estimator exploits.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{fro_sq, hstack, CMat, CVec};

/// Split column indices 0..m into `q` contiguous equal ranges.
pub fn partition(m: usize, q: usize) -> Result<Vec<Range<usize>>> {
    if q == 0 || m == 0 {
        return Err(Error::Config(format!("partition: m = {m}, q = {q} must be ≥ 1")));
    }
    if q > m || m % q != 0 {
        return Err(Error::Config(format!("partition: q = {q} must divide m = {m}")));
    }
    let w = m / q;
    Ok((0..q).map(|i| i * w..(i + 1) * w).collect())
}

/// A wide matrix factored piece-by-piece: block `i` ≈ `bases[i] * coeffs[i]`.
#[derive(Debug, Clone)]
pub struct PiecewiseDecomposition {
    /// Per-piece orthonormal column bases, each N×r_q.
    pub bases: Vec<CMat>,
    /// Per-piece coefficient matrices, each r_q×M_sub.
    pub coeffs: Vec<CMat>,
    /// Column ranges of the pieces in the original matrix.
    pub ranges: Vec<Range<usize>>,
}

impl PiecewiseDecomposition {
    /// Ranks kept per piece.
    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    /// Concatenate `bases[i] * coeffs[i]` back into the full matrix.
    pub fn reassemble(&self) -> CMat {
        let blocks: Vec<CMat> =
            self.bases.iter().zip(&self.coeffs).map(|(s, t)| s * t).collect();
        hstack(&blocks)
    }
}

/// Best rank-`ranks[q]` truncation of each column piece (SVD per piece).
pub fn best_rank_decomposition(h: &CMat, q: usize, ranks: &[usize]) -> Result<PiecewiseDecomposition> {
    let ranges = partition(h.ncols(), q)?;
    if ranks.len() != q {
        return Err(Error::Argument(format!(
            "expected {q} per-piece ranks, got {}",
            ranks.len()
        )));
    }
    let mut bases = Vec::with_capacity(q);
    let mut coeffs = Vec::with_capacity(q);
    for (range, &r) in ranges.iter().zip(ranks) {
        let piece = h.columns(range.start, range.len()).into_owned();
        let max_r = piece.nrows().min(piece.ncols());
        if r == 0 || r > max_r {
            return Err(Error::Argument(format!(
                "rank {r} outside 1..={max_r} for a {}×{} piece",
                piece.nrows(),
                piece.ncols()
            )));
        }
        let (u, sv, v) = crate::linalg::svd_thin(&piece)?;
        let basis = u.columns(0, r).into_owned();
        let mut coeff = v.columns(0, r).adjoint().into_owned();
        for i in 0..r {
            let s = sv[i];
            for j in 0..coeff.ncols() {
                coeff[(i, j)] *= s;
            }
        }
        bases.push(basis);
        coeffs.push(coeff);
    }
    Ok(PiecewiseDecomposition { bases, coeffs, ranges })
}

/// Energy lost when truncating `piece` to rank `r`: Σ of trailing squared
/// singular values.
pub fn piece_truncation_error(piece: &CMat, r: usize) -> Result<f64> {
    let max_r = piece.nrows().min(piece.ncols());
    if r > max_r {
        return Err(Error::Argument(format!("rank {r} exceeds min dimension {max_r}")));
    }
    let sv = crate::linalg::singular_values(piece);
    Ok(sv.iter().skip(r).map(|s| s * s).sum())
}

/// Normalized piecewise approximation error: Σ_q (rank-r_q truncation loss of
/// piece q) divided by the total energy of `h`.
pub fn approximation_error_profile(h: &CMat, q: usize, ranks: &[usize]) -> Result<f64> {
    let ranges = partition(h.ncols(), q)?;
    if ranks.len() != q {
        return Err(Error::Argument(format!(
            "expected {q} per-piece ranks, got {}",
            ranks.len()
        )));
    }
    let total = fro_sq(h);
    if total == 0.0 {
        return Err(Error::UndefinedMetric("zero-energy matrix has no error profile".into()));
    }
    let mut lost = 0.0;
    for (range, &r) in ranges.iter().zip(ranks) {
        let piece = h.columns(range.start, range.len()).into_owned();
        lost += piece_truncation_error(&piece, r)?;
    }
    Ok(lost / total)
}

/// Per-column ratio d(m) = numer(m, l) / denom(m, l_ref) over `range`, i.e.
/// the diagonal that maps the reference piece coefficients onto another
/// (user, antenna) pair. Returns `None` when any reference entry is within
/// 1e-12 of zero (relative to the largest reference entry in the range), in
/// which case the ratio is numerically meaningless.
pub fn column_scaling(
    h_ur_k: &CMat,
    l: usize,
    h_ur_ref: &CMat,
    l_ref: usize,
    range: &Range<usize>,
) -> Option<CVec> {
    let max_ref = range
        .clone()
        .map(|m| h_ur_ref[(m, l_ref)].norm())
        .fold(0.0_f64, f64::max);
    if max_ref == 0.0 {
        return None;
    }
    let mut d = CVec::zeros(range.len());
    for (i, m) in range.clone().enumerate() {
        let den = h_ur_ref[(m, l_ref)];
        if den.norm() <= 1e-12 * max_ref {
            return None;
        }
        d[i] = h_ur_k[(m, l)] / den;
    }
    Some(d)
}
