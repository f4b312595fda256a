//! Two-phase training protocol: pilot books, per-subframe combiner/reflection
//! designs, noisy subframe simulation, and despreading.
//!
//! Phase 1 sweeps Q piece-marking reflection patterns, each observed through
//! B = N/N_RF combiner blocks that tile a unitary DFT; phase 2 holds one
//! fixed combiner block and sweeps all M DFT reflection columns. Combiners
//! are √N-scaled DFT slices (Gram = N·I_{N_RF}); reflection patterns are
//! unit-modulus entrywise, as a passive panel requires.

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::geometry::beam_center_bin;
use crate::linalg::{complex_gaussian, dft_column_block, dft_matrix, CMat, CVec};

/// Orthogonal pilot set: user k transmits √(P·T)-scaled rows kL..(k+1)L of a
/// T×T unitary DFT, identical in every subframe.
#[derive(Debug, Clone)]
pub struct PilotBook {
    x: Vec<CMat>,
    /// Per-user transmit power, W.
    pub power_w: f64,
    /// Pilot length in symbols.
    pub t: usize,
}

impl PilotBook {
    /// Pilot matrix (L×T) of user `k` in subframe `z`. The book reuses one
    /// matrix per user across subframes, hence `z` is accepted but unused.
    pub fn pilot(&self, _z: usize, k: usize) -> &CMat {
        &self.x[k]
    }

    /// Number of users covered.
    pub fn users(&self) -> usize {
        self.x.len()
    }

    /// Build a book from explicit per-user matrices (tests, custom designs).
    pub fn from_matrices(x: Vec<CMat>, power_w: f64, t: usize) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Argument("pilot book needs at least one user".into()));
        }
        for (k, m) in x.iter().enumerate() {
            if m.ncols() != t {
                return Err(Error::Argument(format!(
                    "user {k} pilot has {} columns, expected t = {t}",
                    m.ncols()
                )));
            }
        }
        Ok(Self { x, power_w, t })
    }
}

/// Orthogonal pilots for `k` users with `l` antennas over `t ≥ k·l` symbols.
pub fn gen_pilots(k: usize, l: usize, t: usize, power_w: f64) -> Result<PilotBook> {
    if k == 0 || l == 0 {
        return Err(Error::Config("gen_pilots: k and l must be ≥ 1".into()));
    }
    if t < k * l {
        return Err(Error::Config(format!(
            "gen_pilots: t = {t} shorter than k·l = {}",
            k * l
        )));
    }
    if !(power_w > 0.0) {
        return Err(Error::Config(format!("gen_pilots: power_w = {power_w} must be > 0")));
    }
    let phi_t = dft_matrix(t);
    let scale = (power_w * t as f64).sqrt();
    let x = (0..k)
        .map(|ki| {
            let mut rows = phi_t.rows(ki * l, l).into_owned();
            rows.iter_mut().for_each(|z| *z *= scale);
            rows
        })
        .collect();
    Ok(PilotBook { x, power_w, t })
}

/// Fixed per-run training design: cached DFT tables for both phases.
#[derive(Debug, Clone)]
pub struct TrainingDesign {
    pub n: usize,
    pub n_rf: usize,
    pub m: usize,
    pub q: usize,
    /// Combiner blocks per reflection pattern, N/N_RF.
    pub b: usize,
    /// Piece width M/Q.
    pub m_sub: usize,
    /// First DFT column of the fixed phase-2 observation block.
    pub phase2_start: usize,
    phi_n: CMat,
    phi_q: CMat,
    phi_m: CMat,
    phi2: CMat,
}

impl TrainingDesign {
    /// Design for `cfg` with the phase-2 observation block starting at DFT
    /// column `phase2_start` (wrapping modulo N).
    pub fn new(cfg: &SystemConfig, phase2_start: usize) -> Result<Self> {
        cfg.validate()?;
        let start = phase2_start % cfg.n;
        Ok(Self {
            n: cfg.n,
            n_rf: cfg.n_rf,
            m: cfg.m,
            q: cfg.q,
            b: cfg.b(),
            m_sub: cfg.m_sub(),
            phase2_start: start,
            phi_n: dft_matrix(cfg.n),
            phi_q: dft_matrix(cfg.q),
            phi_m: dft_matrix(cfg.m),
            phi2: dft_column_block(cfg.n, cfg.n_rf, start),
        })
    }

    /// Design whose phase-2 block is centered on the BS→panel direction.
    ///
    /// An arbitrary block can land in a null of the array response toward
    /// the panel and sink the second phase's SNR by tens of dB; centering on
    /// the known, fixed direction keeps the captured energy within a
    /// fraction of a dB of the full-array value.
    pub fn steered(cfg: &SystemConfig) -> Result<Self> {
        Self::new(cfg, steered_block_start(cfg)?)
    }

    /// Phase-1 combiner for block `b` (0-based): √N·Φ_N columns
    /// b·N_RF..(b+1)·N_RF. Identical for every reflection index g.
    pub fn phase1_combiner(&self, b: usize) -> Result<CMat> {
        if b >= self.b {
            return Err(Error::Argument(format!(
                "phase1_combiner: block {b} out of range 0..{}",
                self.b
            )));
        }
        let mut c = self.phi_n.columns(b * self.n_rf, self.n_rf).into_owned();
        let s = (self.n as f64).sqrt();
        c.iter_mut().for_each(|z| *z *= s);
        Ok(c)
    }

    /// Phase-1 reflection pattern `g` (0-based): piece q is held at the
    /// constant √Q·Φ_Q(q,g), so every entry has unit modulus.
    pub fn phase1_reflection(&self, g: usize) -> Result<CVec> {
        if g >= self.q {
            return Err(Error::Argument(format!(
                "phase1_reflection: pattern {g} out of range 0..{}",
                self.q
            )));
        }
        let s = (self.q as f64).sqrt();
        let mut v = CVec::zeros(self.m);
        for q in 0..self.q {
            let w = self.phi_q[(q, g)] * s;
            for i in q * self.m_sub..(q + 1) * self.m_sub {
                v[i] = w;
            }
        }
        Ok(v)
    }

    /// Phase-2 design for reflection index `m` (0-based): the fixed √N-scaled
    /// observation block plus the m-th √M-scaled DFT reflection column.
    pub fn phase2_design(&self, m: usize) -> Result<(CMat, CVec)> {
        if m >= self.m {
            return Err(Error::Argument(format!(
                "phase2_design: index {m} out of range 0..{}",
                self.m
            )));
        }
        let mut c = self.phi2.clone();
        let sn = (self.n as f64).sqrt();
        c.iter_mut().for_each(|z| *z *= sn);
        let sm = (self.m as f64).sqrt();
        let v = CVec::from_fn(self.m, |i, _| self.phi_m[(i, m)] * sm);
        Ok((c, v))
    }

    /// Unscaled orthonormal phase-2 observation block (N×N_RF), the frame the
    /// phase-2 processing and the genie baseline both project onto.
    pub fn observation_block(&self) -> &CMat {
        &self.phi2
    }

    /// Unitary N-point DFT used by the phase-1 combiner sweep.
    pub fn dft_n(&self) -> &CMat {
        &self.phi_n
    }

    /// Unitary Q-point DFT marking the pieces in phase 1.
    pub fn dft_q(&self) -> &CMat {
        &self.phi_q
    }

    /// Unitary M-point DFT swept by the phase-2 reflections.
    pub fn dft_m(&self) -> &CMat {
        &self.phi_m
    }

    /// Total training subframes: Q·(N/N_RF) + M.
    pub fn overhead(&self) -> usize {
        self.q * self.b + self.m
    }
}

/// Starting DFT column such that the N_RF-wide block is centered on the
/// BS→panel direction.
pub fn steered_block_start(cfg: &SystemConfig) -> Result<usize> {
    let bs = cfg.bs_array()?;
    let center = beam_center_bin(&bs, cfg.ris_center)?;
    let n = cfg.n as i64;
    let s = (center - (cfg.n_rf as f64 - 1.0) / 2.0).round() as i64;
    Ok(s.rem_euclid(n) as usize)
}

/// One raw subframe observation: Y = C^H (Σ_k H_k^tot(v)·X_k + U), with U
/// drawn i.i.d. CN(0, σ²) at the N antenna ports.
pub fn simulate_subframe<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    v: &CVec,
    c: &CMat,
    pilots: &PilotBook,
    z: usize,
    noise_var_w: f64,
    rng: &mut R,
) -> Result<CMat> {
    if noise_var_w < 0.0 {
        return Err(Error::Argument(format!("noise_var_w = {noise_var_w} must be ≥ 0")));
    }
    let n = ch.h_rb.nrows();
    if c.nrows() != n {
        return Err(Error::Argument(format!(
            "combiner has {} rows, channel has {n} antennas",
            c.nrows()
        )));
    }
    let t = pilots.t;
    let mut at_antennas = CMat::zeros(n, t);
    for k in 0..ch.users() {
        at_antennas += ch.total(k, v) * pilots.pilot(z, k);
    }
    let noise = complex_gaussian(rng, n, t) * num_complex::Complex64::new(noise_var_w.sqrt(), 0.0);
    at_antennas += noise;
    Ok(c.adjoint() * at_antennas)
}

/// Despread a raw subframe against one user's pilot: (1/(P·T))·Y·X^H.
pub fn despread(y: &CMat, x_k: &CMat, power_w: f64, t: usize) -> CMat {
    let scale = num_complex::Complex64::new(1.0 / (power_w * t as f64), 0.0);
    y * x_k.adjoint() * scale
}

/// All despread observations of one training run.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    /// Phase-1 observations, indexed `[g][b][k]`, each N_RF×L.
    pub phase1: Vec<Vec<Vec<CMat>>>,
    /// Phase-2 observations, indexed `[m][k]`, each N_RF×L.
    pub phase2: Vec<Vec<CMat>>,
    /// Noise variance the run was simulated at, W.
    pub noise_var_w: f64,
    /// Subframes spent in phase 1 (the phase boundary): Q·B.
    pub m0: usize,
}

/// Run the full two-phase protocol: Q·B + M subframes, despread per user.
pub fn simulate_protocol<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    design: &TrainingDesign,
    pilots: &PilotBook,
    rng: &mut R,
) -> Result<ObservationSet> {
    if pilots.users() != cfg.k || ch.users() != cfg.k {
        return Err(Error::Argument(format!(
            "user counts disagree: cfg {} / pilots {} / channels {}",
            cfg.k,
            pilots.users(),
            ch.users()
        )));
    }
    let mut z = 0usize;
    let mut phase1 = Vec::with_capacity(design.q);
    for g in 0..design.q {
        let v = design.phase1_reflection(g)?;
        let mut per_b = Vec::with_capacity(design.b);
        for b in 0..design.b {
            let c = design.phase1_combiner(b)?;
            let y = simulate_subframe(ch, &v, &c, pilots, z, cfg.noise_var_w, rng)?;
            z += 1;
            per_b.push(
                (0..cfg.k)
                    .map(|k| despread(&y, pilots.pilot(z, k), pilots.power_w, pilots.t))
                    .collect::<Vec<_>>(),
            );
        }
        phase1.push(per_b);
    }
    let mut phase2 = Vec::with_capacity(design.m);
    for m in 0..design.m {
        let (c, v) = design.phase2_design(m)?;
        let y = simulate_subframe(ch, &v, &c, pilots, z, cfg.noise_var_w, rng)?;
        z += 1;
        phase2.push(
            (0..cfg.k)
                .map(|k| despread(&y, pilots.pilot(z, k), pilots.power_w, pilots.t))
                .collect::<Vec<_>>(),
        );
    }
    Ok(ObservationSet { phase1, phase2, noise_var_w: cfg.noise_var_w, m0: design.q * design.b })
}
