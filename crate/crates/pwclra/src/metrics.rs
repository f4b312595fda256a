//! Accuracy and cost metrics: per-user normalized MSE, training-overhead
//! calculators for both estimator families, and complex-multiplication
//! counts for the refinement stage.

use crate::error::{Error, Result};
use crate::linalg::{fro_sq, CMat};

/// Mean over users of ‖Ĥ_k − H_k‖_F² / ‖H_k‖_F².
pub fn nmse(estimates: &[CMat], truth: &[CMat]) -> Result<f64> {
    if estimates.len() != truth.len() || truth.is_empty() {
        return Err(Error::Argument(format!(
            "nmse: {} estimates vs {} truths",
            estimates.len(),
            truth.len()
        )));
    }
    let mut acc = 0.0;
    for (k, (est, tru)) in estimates.iter().zip(truth).enumerate() {
        if est.shape() != tru.shape() {
            return Err(Error::Argument(format!(
                "nmse: user {k} shape mismatch {:?} vs {:?}",
                est.shape(),
                tru.shape()
            )));
        }
        let energy = fro_sq(tru);
        if energy == 0.0 {
            return Err(Error::UndefinedMetric(format!("user {k} truth has zero energy")));
        }
        acc += fro_sq(&(est - tru)) / energy;
    }
    Ok(acc / truth.len() as f64)
}

/// 10·log10(x); −∞ for exact zeros so noiseless exact runs stay printable.
#[inline]
pub fn to_db(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * x.log10()
    }
}

/// Pilot subframes used by the piecewise scheme: Z = Q·(N/N_RF) + M.
pub fn pwclra_overhead(q: usize, n: usize, n_rf: usize, m: usize) -> Result<usize> {
    if n_rf == 0 || n % n_rf != 0 {
        return Err(Error::Argument(format!("N = {n} not divisible by N_RF = {n_rf}")));
    }
    Ok(q * (n / n_rf) + m)
}

/// Whether Q pieces give phase 1 enough snapshot columns: Q·K·L ≥ M.
#[inline]
pub fn pwclra_feasible(q: usize, m: usize, k: usize, l: usize) -> bool {
    q * k * l >= m
}

/// Pilot subframes used by the global low-rank scheme:
/// Z = B_c·(N/N_RF) + B_r·M.
pub fn clra_overhead(b_c: usize, b_r: usize, n: usize, n_rf: usize, m: usize) -> Result<usize> {
    if b_c == 0 || b_r == 0 {
        return Err(Error::Argument("B_c and B_r must be ≥ 1".into()));
    }
    if n_rf == 0 || n % n_rf != 0 {
        return Err(Error::Argument(format!("N = {n} not divisible by N_RF = {n_rf}")));
    }
    Ok(b_c * (n / n_rf) + b_r * m)
}

/// Hyperparameter admissibility for the global scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClraFeasibility {
    /// B_c ≥ M/(K·L)
    pub b_c_ok: bool,
    /// B_r ≥ r̂/N_RF for the estimated global rank r̂
    pub b_r_ok: bool,
}

impl ClraFeasibility {
    pub fn both(&self) -> bool {
        self.b_c_ok && self.b_r_ok
    }
}

/// Check the global scheme's constraints given the estimated channel rank.
pub fn clra_feasible(
    b_c: usize,
    b_r: usize,
    m: usize,
    k: usize,
    l: usize,
    rank_est: usize,
    n_rf: usize,
) -> ClraFeasibility {
    ClraFeasibility {
        b_c_ok: b_c * k * l >= m,
        b_r_ok: b_r * n_rf >= rank_est,
    }
}

/// Complex-multiplication counts for the refinement stage, with the three
/// pipeline cost terms kept separate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityEstimate {
    /// Scaling-update multiplications per round: K·L·M_sub·Σ_q(3·r̂_q + 1).
    pub delta_d: u64,
    /// Shared-matrix-update multiplications per round: K·L·M_sub·Σ_q(r̂_q + 2).
    pub delta_a: u64,
    /// Subspace-processing term: Q·N³.
    pub psi_subspace: u64,
    /// Decomposition term: Σ_q r̂_q³.
    pub psi_svd: u64,
    /// Refinement term: t_max·(Δ_D + Δ_A).
    pub psi_refine: u64,
}

impl ComplexityEstimate {
    /// Sum of the three pipeline terms.
    pub fn psi_total(&self) -> u64 {
        self.psi_subspace + self.psi_svd + self.psi_refine
    }
}

/// Evaluate the cost formulas for one configuration.
pub fn complexity_estimate(
    q: usize,
    n: usize,
    k: usize,
    l: usize,
    m_sub: usize,
    ranks: &[usize],
    t_max: usize,
) -> Result<ComplexityEstimate> {
    if ranks.len() != q {
        return Err(Error::Argument(format!("expected {q} ranks, got {}", ranks.len())));
    }
    let kl_msub = (k * l * m_sub) as u64;
    let delta_d = kl_msub * ranks.iter().map(|&r| 3 * r as u64 + 1).sum::<u64>();
    let delta_a = kl_msub * ranks.iter().map(|&r| r as u64 + 2).sum::<u64>();
    Ok(ComplexityEstimate {
        delta_d,
        delta_a,
        psi_subspace: (q as u64) * (n as u64).pow(3),
        psi_svd: ranks.iter().map(|&r| (r as u64).pow(3)).sum(),
        psi_refine: t_max as u64 * (delta_d + delta_a),
    })
}
