//! Piecewise estimator pipeline: unmix phase-1 observations into per-piece
//! column-space snapshots, select ranks, project phase-2 observations onto
//! the estimated bases, and solve for coefficients by least squares, a
//! regularized (ridge) solve, or alternating joint refinement.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{c64, hstack, left_svd, pinv, solve_hpd, vstack, CMat, CVec};
use crate::training::{ObservationSet, TrainingDesign};

/// Relative eigenvalue floor used inside the rank-selection score.
///
/// The floor is tied to the largest eigenvalue because physical channels
/// here live at scales around 1e-38; an absolute floor would swamp the whole
/// spectrum and force rank collapse.
const EIGENVALUE_FLOOR_REL: f64 = 1e-18;

/// Per-piece column-space snapshots M_q (N×K·L) recovered from phase 1.
///
/// Noiselessly, snapshot q equals (piece q of the panel→BS matrix) times the
/// matching rows of every user link stacked column-wise.
pub fn phase1_matrices(
    design: &TrainingDesign,
    obs: &ObservationSet,
    k_users: usize,
    l_ant: usize,
) -> Result<Vec<CMat>> {
    let (n, n_rf, q, b) = (design.n, design.n_rf, design.q, design.b);
    if obs.phase1.len() != q || obs.phase1.iter().any(|pb| pb.len() != b) {
        return Err(Error::Argument("phase-1 observations do not match the design".into()));
    }
    let inv_sqrt_n = c64(1.0 / (n as f64).sqrt(), 0.0);
    let inv_sqrt_q = c64(1.0 / (q as f64).sqrt(), 0.0);
    let phi_n = design.dft_n();
    let phi_q = design.dft_q();

    let mut out = vec![CMat::zeros(n, k_users * l_ant); q];
    for k in 0..k_users {
        // Undo the combiner sweep per pattern: w_g = (1/√N)·Φ_N·stack_b(Y)
        let mut w = Vec::with_capacity(q);
        for g in 0..q {
            let stacked: Vec<CMat> = (0..b)
                .map(|bi| {
                    let y = &obs.phase1[g][bi][k];
                    if y.shape() != (n_rf, l_ant) {
                        return Err(Error::Argument(format!(
                            "observation ({g},{bi},{k}) has shape {:?}, expected ({n_rf}, {l_ant})",
                            y.shape()
                        )));
                    }
                    Ok(y.clone())
                })
                .collect::<Result<_>>()?;
            w.push(phi_n * vstack(&stacked) * inv_sqrt_n);
        }
        // Unmix the piece-marking pattern: per antenna, multiply the N×Q
        // stack of w_g columns by (1/√Q)·Φ_Q^H and read off piece q.
        for l in 0..l_ant {
            let wl = CMat::from_fn(n, q, |i, g| w[g][(i, l)]);
            let unmixed = wl * phi_q.adjoint() * inv_sqrt_q;
            for qi in 0..q {
                for i in 0..n {
                    out[qi][(i, k * l_ant + l)] = unmixed[(i, qi)];
                }
            }
        }
    }
    Ok(out)
}

/// Information-theoretic rank choice for one snapshot matrix.
///
/// Eigenvalues of the column sample covariance are scanned with the standard
/// description-length score; the smallest-scoring rank wins (ties keep the
/// smaller rank), and rank 0 is promoted to 1 so a basis always exists.
pub fn mdl_rank(m1: &CMat) -> Result<usize> {
    let kl = m1.ncols();
    if kl < 2 {
        return Err(Error::Argument(format!(
            "rank selection needs ≥ 2 snapshot columns, got {kl}"
        )));
    }
    let n = m1.nrows().min(kl);
    let sv = crate::linalg::singular_values(m1);
    let mut lam: Vec<f64> = sv.iter().take(n).map(|s| s * s / kl as f64).collect();
    if lam[0] <= 0.0 {
        return Ok(1);
    }
    let floor = lam[0] * EIGENVALUE_FLOOR_REL;
    for v in lam.iter_mut() {
        if *v < floor {
            *v = floor;
        }
    }
    let kl_f = kl as f64;
    let mut best_score = f64::INFINITY;
    let mut best_r = 1usize;
    for r in 0..n {
        let tail = &lam[r..];
        let tn = tail.len() as f64;
        let log_gm = tail.iter().map(|v| v.ln()).sum::<f64>() / tn;
        let am = tail.iter().sum::<f64>() / tn;
        let score = -kl_f * tn * (log_gm - am.ln()) + 0.5 * (r * (2 * n - r)) as f64 * kl_f.ln();
        if score < best_score {
            best_score = score;
            best_r = r.max(1);
        }
    }
    Ok(best_r)
}

/// Leading `r` left singular vectors of a snapshot (orthonormal basis).
pub fn estimate_subspace(m1: &CMat, r: usize) -> Result<CMat> {
    let max_r = m1.nrows().min(m1.ncols());
    if r == 0 || r > max_r {
        return Err(Error::Argument(format!("subspace rank {r} outside 1..={max_r}")));
    }
    let (u, _) = left_svd(m1)?;
    Ok(u.columns(0, r).into_owned())
}

/// Per-piece bases with their selected (and possibly capped) ranks.
#[derive(Debug, Clone)]
pub struct SubspaceEstimate {
    /// Orthonormal bases, each N×r̂_q.
    pub bases: Vec<CMat>,
    /// Selected ranks after capping.
    pub ranks: Vec<usize>,
    /// Whether the rank-selection choice exceeded N_RF and was capped; the
    /// caller should surface a warning when set.
    pub capped: Vec<bool>,
}

/// Run rank selection + basis extraction per piece, capping ranks at N_RF
/// (wider coefficient blocks could not be resolved through an N_RF-wide
/// observation block).
pub fn estimate_all_subspaces(design: &TrainingDesign, m1s: &[CMat]) -> Result<SubspaceEstimate> {
    let mut bases = Vec::with_capacity(m1s.len());
    let mut ranks = Vec::with_capacity(m1s.len());
    let mut capped = Vec::with_capacity(m1s.len());
    for m1 in m1s {
        let chosen = mdl_rank(m1)?;
        let cap = chosen > design.n_rf;
        let r = chosen.min(design.n_rf);
        bases.push(estimate_subspace(m1, r)?);
        ranks.push(r);
        capped.push(cap);
    }
    Ok(SubspaceEstimate { bases, ranks, capped })
}

/// Phase-2 observations unmixed into per-(user, antenna, piece) blocks,
/// indexed `[k][l][q]`, each N_RF×M_sub.
///
/// Noiselessly, block (k, ℓ, q) equals (observation block)^H times piece q of
/// the effective channel of (k, ℓ); the processed noise is white with
/// variance σ²/(P·T·M).
pub fn phase2_matrices(
    design: &TrainingDesign,
    obs: &ObservationSet,
    k_users: usize,
    l_ant: usize,
) -> Result<Vec<Vec<Vec<CMat>>>> {
    let (n_rf, m, q, m_sub) = (design.n_rf, design.m, design.q, design.m_sub);
    if obs.phase2.len() != m {
        return Err(Error::Argument(format!(
            "expected {m} phase-2 observations, got {}",
            obs.phase2.len()
        )));
    }
    let scale = c64(1.0 / ((design.n * m) as f64).sqrt(), 0.0);
    let phi_m = design.dft_m();
    let mut out = vec![vec![Vec::with_capacity(q); l_ant]; k_users];
    for k in 0..k_users {
        for l in 0..l_ant {
            let wl = CMat::from_fn(n_rf, m, |i, mi| obs.phase2[mi][k][(i, l)]);
            let unmixed = wl * phi_m.adjoint() * scale;
            for qi in 0..q {
                out[k][l].push(unmixed.columns(qi * m_sub, m_sub).into_owned());
            }
        }
    }
    Ok(out)
}

/// Projection of an estimated basis through the phase-2 observation block:
/// P_q = (observation block)^H · Ŝ_q, shape N_RF×r̂_q.
pub fn projected_basis(design: &TrainingDesign, basis: &CMat) -> CMat {
    design.observation_block().adjoint() * basis
}

/// Coefficients by unregularized least squares: T̂ = P⁺ · M.
pub fn estimate_t_ls(p_q: &CMat, m2: &CMat) -> Result<CMat> {
    Ok(pinv(p_q)? * m2)
}

/// Which algebraic shape of the regularized solve to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RidgeForm {
    /// (P^H P + λI)^{-1} P^H M — well-posed for any basis rank. Default.
    #[default]
    Conventional,
    /// (P^H P + λI)^{-1} M — usable only when the projected basis is square
    /// (r̂ = N_RF); kept for comparison against the conventional form.
    Literal,
}

/// Coefficients by ridge-regularized solve with λ = K·L/ρ_k.
pub fn estimate_t_mmse(
    p_q: &CMat,
    m2: &CMat,
    rho_k: f64,
    kl: usize,
    form: RidgeForm,
) -> Result<CMat> {
    if !(rho_k > 0.0) {
        return Err(Error::Argument(format!("rho_k = {rho_k} must be > 0")));
    }
    let r = p_q.ncols();
    let lambda = if rho_k.is_infinite() { 0.0 } else { kl as f64 / rho_k };
    let gram = p_q.adjoint() * p_q + CMat::identity(r, r) * c64(lambda, 0.0);
    match form {
        RidgeForm::Conventional => solve_hpd(&gram, &(p_q.adjoint() * m2)),
        RidgeForm::Literal => {
            if p_q.nrows() != r {
                return Err(Error::Argument(format!(
                    "literal ridge form needs a square projection, got {}×{r}",
                    p_q.nrows()
                )));
            }
            solve_hpd(&gram, m2)
        }
    }
}

/// Genie input-SNR for the ridge weight of user `k`: the true per-coefficient
/// signal power (energy of the effective channel seen through the estimated
/// bases, per coefficient) over the processed phase-2 noise variance, scaled
/// by K·L so that λ = K·L/ρ equals noise/signal.
pub fn effective_input_snr(
    cfg: &SystemConfig,
    sub: &SubspaceEstimate,
    ch: &ChannelRealization,
    k: usize,
) -> f64 {
    let sigma_w2 = cfg.noise_var_w / (cfg.power_w * cfg.t as f64 * cfg.m as f64);
    if sigma_w2 == 0.0 {
        return f64::INFINITY;
    }
    let m_sub = cfg.m_sub();
    let mut num = 0.0;
    let mut den = 0.0;
    for l in 0..cfg.l {
        for (q, basis) in sub.bases.iter().enumerate() {
            let block = ch.h_eff[k]
                .view((0, l * cfg.m + q * m_sub), (cfg.n, m_sub))
                .into_owned();
            num += crate::linalg::fro_sq(&(basis.adjoint() * block));
            den += (sub.ranks[q] * m_sub) as f64;
        }
    }
    cfg.kl() as f64 * (num / den) / sigma_w2
}

/// Result of the alternating refinement on one piece.
#[derive(Debug, Clone)]
pub struct JointRefinement {
    /// Shared column-scale matrix (r̂×M_sub).
    pub shared: CMat,
    /// Per-(k, ℓ) diagonal scalings, indexed `[k][l]`, each length M_sub.
    pub scalings: Vec<Vec<CVec>>,
    /// Residual objective after each iteration, length t_max.
    pub objective: Vec<f64>,
    /// Σ_{k,ℓ}‖T̂_{k,ℓ}‖_F² of the inputs — the natural scale for judging
    /// whether an objective step is real or roundoff dust.
    pub input_energy: f64,
}

/// Objective trace of one piece's refinement, with its data scale.
#[derive(Debug, Clone)]
pub struct JoTrace {
    /// Residual after each iteration, length [`JO_ROUNDS`].
    pub objective: Vec<f64>,
    /// Σ‖T̂‖_F² of the refined inputs.
    pub input_energy: f64,
}

impl JointRefinement {
    /// Refined coefficients for (k, ℓ): shared × diag(scaling).
    pub fn coefficients(&self, k: usize, l: usize) -> CMat {
        let s = &self.scalings[k][l];
        let mut out = self.shared.clone();
        for mi in 0..out.ncols() {
            for ri in 0..out.nrows() {
                out[(ri, mi)] *= s[mi];
            }
        }
        out
    }
}

/// Alternate between per-pair column scalings and the shared matrix that
/// minimizes Σ_{k,ℓ} ‖T̂_{k,ℓ} − shared·diag(d_{k,ℓ})‖_F², starting from the
/// first pair's coefficients, for exactly `t_max` rounds.
pub fn joint_optimize(t_hat: &[Vec<CMat>], t_max: usize) -> Result<JointRefinement> {
    if t_hat.is_empty() || t_hat[0].is_empty() {
        return Err(Error::Argument("joint_optimize: empty coefficient set".into()));
    }
    if t_max == 0 {
        return Err(Error::Argument("joint_optimize: t_max must be ≥ 1".into()));
    }
    let (r, m_sub) = t_hat[0][0].shape();
    for row in t_hat {
        for t in row {
            if t.shape() != (r, m_sub) {
                return Err(Error::Argument("joint_optimize: ragged coefficient shapes".into()));
            }
        }
    }
    let k_users = t_hat.len();
    let l_ant = t_hat[0].len();
    let input_energy: f64 = t_hat.iter().flatten().map(crate::linalg::fro_sq).sum();
    let mut shared = t_hat[0][0].clone();
    let mut scalings = vec![vec![CVec::zeros(m_sub); l_ant]; k_users];
    let mut objective = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        // scalings given the shared matrix
        for k in 0..k_users {
            for l in 0..l_ant {
                let t = &t_hat[k][l];
                for mi in 0..m_sub {
                    let mut nrm = 0.0;
                    let mut inner = Complex64::default();
                    for ri in 0..r {
                        let a = shared[(ri, mi)];
                        nrm += a.norm_sqr();
                        inner += a.conj() * t[(ri, mi)];
                    }
                    // A column that is exactly zero pins its scaling to zero;
                    // anything else (however tiny) still carries direction.
                    scalings[k][l][mi] = if nrm == 0.0 { Complex64::default() } else { inner / nrm };
                }
            }
        }
        // shared matrix given the scalings
        let mut numer = CMat::zeros(r, m_sub);
        let mut denom = vec![0.0f64; m_sub];
        for k in 0..k_users {
            for l in 0..l_ant {
                let t = &t_hat[k][l];
                let d = &scalings[k][l];
                for mi in 0..m_sub {
                    let dc = d[mi].conj();
                    for ri in 0..r {
                        numer[(ri, mi)] += t[(ri, mi)] * dc;
                    }
                    denom[mi] += d[mi].norm_sqr();
                }
            }
        }
        for mi in 0..m_sub {
            if denom[mi] > 0.0 {
                let inv = 1.0 / denom[mi];
                for ri in 0..r {
                    shared[(ri, mi)] = numer[(ri, mi)] * inv;
                }
            }
            // otherwise keep the previous column
        }
        // residual
        let mut obj = 0.0;
        for k in 0..k_users {
            for l in 0..l_ant {
                let t = &t_hat[k][l];
                let d = &scalings[k][l];
                for mi in 0..m_sub {
                    for ri in 0..r {
                        obj += (t[(ri, mi)] - shared[(ri, mi)] * d[mi]).norm_sqr();
                    }
                }
            }
        }
        objective.push(obj);
    }
    Ok(JointRefinement { shared, scalings, objective, input_energy })
}

/// Coefficient estimation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Ls,
    Mmse,
    Jo,
}

/// Number of alternating rounds the joint refinement always runs.
pub const JO_ROUNDS: usize = 10;

/// Everything the full pipeline produces for one observation set.
#[derive(Debug, Clone)]
pub struct EstimateOutput {
    /// Estimated effective channels, one N×(M·L) matrix per user.
    pub h_eff: Vec<CMat>,
    /// Selected per-piece ranks.
    pub ranks: Vec<usize>,
    /// Rank-cap flags per piece (see [`SubspaceEstimate`]).
    pub capped: Vec<bool>,
    /// Joint-refinement objective traces per piece (JO flavor only).
    pub jo_traces: Option<Vec<JoTrace>>,
}

/// Run the complete estimator on one simulated training run.
///
/// `rho` supplies the per-user ridge weight inputs (ignored by the LS
/// flavor); pass the genie values from [`effective_input_snr`] or any
/// estimate of the input SNR.
pub fn estimate(
    cfg: &SystemConfig,
    design: &TrainingDesign,
    obs: &ObservationSet,
    sub: &SubspaceEstimate,
    rho: &[f64],
    flavor: Flavor,
    ridge_form: RidgeForm,
) -> Result<EstimateOutput> {
    if matches!(flavor, Flavor::Mmse | Flavor::Jo) && rho.len() != cfg.k {
        return Err(Error::Argument(format!(
            "need {} per-user ridge inputs, got {}",
            cfg.k,
            rho.len()
        )));
    }
    let m2 = phase2_matrices(design, obs, cfg.k, cfg.l)?;
    let kl = cfg.kl();

    // per-piece projections
    let p: Vec<CMat> = sub.bases.iter().map(|b| projected_basis(design, b)).collect();

    // coefficients per (k, l, q)
    let mut t_hat: Vec<Vec<Vec<CMat>>> = Vec::with_capacity(cfg.k);
    for k in 0..cfg.k {
        let mut per_l = Vec::with_capacity(cfg.l);
        for l in 0..cfg.l {
            let mut per_q = Vec::with_capacity(cfg.q);
            for q in 0..cfg.q {
                let t = match flavor {
                    Flavor::Ls => estimate_t_ls(&p[q], &m2[k][l][q])?,
                    Flavor::Mmse | Flavor::Jo => {
                        estimate_t_mmse(&p[q], &m2[k][l][q], rho[k], kl, ridge_form)?
                    }
                };
                per_q.push(t);
            }
            per_l.push(per_q);
        }
        t_hat.push(per_l);
    }

    let mut jo_traces = None;
    if flavor == Flavor::Jo {
        let mut traces = Vec::with_capacity(cfg.q);
        for q in 0..cfg.q {
            let per_pair: Vec<Vec<CMat>> = (0..cfg.k)
                .map(|k| (0..cfg.l).map(|l| t_hat[k][l][q].clone()).collect())
                .collect();
            let refined = joint_optimize(&per_pair, JO_ROUNDS)?;
            for k in 0..cfg.k {
                for l in 0..cfg.l {
                    t_hat[k][l][q] = refined.coefficients(k, l);
                }
            }
            traces.push(JoTrace {
                objective: refined.objective,
                input_energy: refined.input_energy,
            });
        }
        jo_traces = Some(traces);
    }

    // assemble per-user effective channels
    let mut h_eff = Vec::with_capacity(cfg.k);
    for t_k in t_hat.iter() {
        let mut l_blocks = Vec::with_capacity(cfg.l);
        for t_kl in t_k.iter() {
            let q_blocks: Vec<CMat> =
                (0..cfg.q).map(|q| &sub.bases[q] * &t_kl[q]).collect();
            l_blocks.push(hstack(&q_blocks));
        }
        h_eff.push(hstack(&l_blocks));
    }
    Ok(EstimateOutput {
        h_eff,
        ranks: sub.ranks.clone(),
        capped: sub.capped.clone(),
        jo_traces,
    })
}

/// Noiseless expectation for a phase-1 snapshot: piece q of the panel→BS
/// matrix times the matching user-link rows, stacked (k, ℓ) column-wise.
/// Exposed for tests and diagnostics.
pub fn expected_phase1_matrix(cfg: &SystemConfig, ch: &ChannelRealization, q: usize) -> CMat {
    let m_sub = cfg.m_sub();
    let piece = ch.h_rb.columns(q * m_sub, m_sub).into_owned();
    let g = DMatrix::from_fn(m_sub, cfg.kl(), |mi, col| {
        let (k, l) = (col / cfg.l, col % cfg.l);
        ch.h_ur[k][(q * m_sub + mi, l)]
    });
    piece * g
}
