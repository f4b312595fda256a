//! Monte-Carlo execution: expand a scenario into (sweep point, trial) jobs,
//! run every requested method on shared channel and protocol draws, and
//! collect per-trial error rows.
//!
//! Reproducibility: each job derives a 256-bit seed from
//! SHA-256(base_seed ‖ scenario name ‖ point index ‖ trial index), and each
//! consumer (channel draw, protocol noise per design) gets an independent
//! sub-stream keyed off that seed. Results are identical for any `--parallel`
//! setting because jobs never share RNG state and rows are sorted afterwards.

use pwclra::channel::ChannelRealization;
use pwclra::config::SystemConfig;
use pwclra::estimator::{self, Flavor, RidgeForm, SubspaceEstimate};
use pwclra::linalg::{c64, fro_sq, CVec};
use pwclra::training::{gen_pilots, simulate_protocol, ObservationSet, TrainingDesign};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::scenario::{Method, Scenario, SweepPoint};

/// One finished (scenario, method, sweep point, trial) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub method: Method,
    /// Piece count of the design this method actually ran on.
    pub q: usize,
    /// Training subframes the method consumed.
    pub z: usize,
    pub snr_db: f64,
    pub d_x_rb_m: f64,
    pub m_ris: usize,
    pub geometry: String,
    pub trial: usize,
    pub nmse_linear: f64,
    pub nmse_db: f64,
}

/// Everything a run produced, plus health counters used for reporting.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Rows sorted by (sweep point, method order, trial).
    pub rows: Vec<ResultRow>,
    /// Refinement objective steps that were checked for monotonicity.
    pub jo_checked_steps: u64,
    /// Steps where the objective rose by more than 1e-9 of the input energy.
    pub jo_violations: u64,
    /// Pieces whose detected rank had to be capped at N_RF.
    pub rank_cap_events: u64,
}

/// 256-bit per-job seed.
fn trial_seed(base_seed: u64, scenario: &str, point: usize, trial: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(base_seed.to_le_bytes());
    h.update(scenario.as_bytes());
    h.update((point as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    h.finalize().into()
}

/// Independent sub-stream seed for one consumer within a job.
fn sub_seed(seed: &[u8; 32], label: &str, salt: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed);
    h.update(label.as_bytes());
    h.update(salt.to_le_bytes());
    h.finalize().into()
}

#[inline]
fn rng_from(seed: [u8; 32]) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(seed)
}

/// Transmit power that realizes `snr_db` for this channel draw: the per-user
/// receive SNR with the panel set to all-ones reflection, averaged over
/// users. Noiseless runs pin the power to 1 W.
fn snr_to_power(snr_db: f64, noise_var_w: f64, ch: &ChannelRealization, m: usize) -> CliResult<f64> {
    if noise_var_w == 0.0 {
        return Ok(1.0);
    }
    let ones = CVec::from_element(m, c64(1.0, 0.0));
    let k = ch.users();
    let mean_energy = (0..k).map(|u| fro_sq(&ch.total(u, &ones))).sum::<f64>() / k as f64;
    if !(mean_energy > 0.0) {
        return Err(CliError::Runtime(
            "calibration channel has zero received energy; cannot set SNR".into(),
        ));
    }
    Ok(10f64.powf(snr_db / 10.0) * noise_var_w / mean_energy)
}

/// Training context shared by all methods that run on the same piece count.
struct DesignCtx {
    cfg: SystemConfig,
    design: TrainingDesign,
    obs: ObservationSet,
    sub: SubspaceEstimate,
    rho: Vec<f64>,
}

impl DesignCtx {
    fn build(
        cfg_point: &SystemConfig,
        q: usize,
        ch: &ChannelRealization,
        seed: &[u8; 32],
    ) -> CliResult<Self> {
        let mut cfg = cfg_point.clone();
        cfg.q = q;
        let design = TrainingDesign::steered(&cfg)?;
        let pilots = gen_pilots(cfg.k, cfg.l, cfg.t, cfg.power_w)?;
        let mut rng = rng_from(sub_seed(seed, "proto", q as u64));
        let obs = simulate_protocol(&cfg, ch, &design, &pilots, &mut rng)?;
        let m1 = estimator::phase1_matrices(&design, &obs, cfg.k, cfg.l)?;
        let sub = estimator::estimate_all_subspaces(&design, &m1)?;
        let rho = (0..cfg.k)
            .map(|k| estimator::effective_input_snr(&cfg, &sub, ch, k))
            .collect();
        Ok(Self { cfg, design, obs, sub, rho })
    }
}

struct JobOut {
    point: usize,
    trial: usize,
    rows: Vec<ResultRow>,
    jo_checked: u64,
    jo_violations: u64,
    rank_caps: u64,
}

fn run_job(scenario: &Scenario, point: &SweepPoint, trial: usize) -> CliResult<JobOut> {
    let seed = trial_seed(scenario.base_seed, &scenario.name, point.index, trial);
    let cfg_nominal = scenario.config_at(point)?;

    // Power calibration always happens at the reference distance so that a
    // distance sweep varies geometry, not the transmitter.
    let ref_d = scenario.reference_distance_m();
    let mut cfg_ref = cfg_nominal.clone();
    cfg_ref.bs_center[0] = ref_d;
    let chan_seed = sub_seed(&seed, "chan", 0);
    let ch_ref = ChannelRealization::generate(&cfg_ref, &mut rng_from(chan_seed))?;
    let power_w = snr_to_power(point.snr_db, cfg_nominal.noise_var_w, &ch_ref, cfg_nominal.m)?;

    let mut cfg = cfg_nominal;
    cfg.power_w = power_w;
    let ch = if point.d_x_rb_m == ref_d {
        ch_ref
    } else {
        ChannelRealization::generate(&cfg, &mut rng_from(chan_seed))?
    };

    // One training run per distinct piece count; methods share it.
    let needs_point_q = scenario
        .methods
        .iter()
        .any(|m| !m.uses_single_piece_design());
    let needs_q1 = scenario.methods.iter().any(Method::uses_single_piece_design);
    let ctx_point = if needs_point_q || (point.q == 1 && needs_q1) {
        Some(DesignCtx::build(&cfg, point.q, &ch, &seed)?)
    } else {
        None
    };
    let ctx_q1 = if needs_q1 && point.q != 1 {
        Some(DesignCtx::build(&cfg, 1, &ch, &seed)?)
    } else {
        None
    };
    let mut rank_caps = 0u64;
    for ctx in ctx_point.iter().chain(ctx_q1.iter()) {
        rank_caps += ctx.sub.capped.iter().filter(|&&c| c).count() as u64;
    }

    let mut rows = Vec::with_capacity(scenario.methods.len());
    let mut jo_checked = 0u64;
    let mut jo_violations = 0u64;
    for &method in &scenario.methods {
        let ctx = if method.uses_single_piece_design() {
            ctx_q1.as_ref().or(ctx_point.as_ref()).expect("q=1 context exists")
        } else {
            ctx_point.as_ref().expect("point-q context exists")
        };
        let b = ctx.cfg.b();
        let (h_hat, z) = match method {
            Method::PwclraLs => (
                estimator::estimate(
                    &ctx.cfg,
                    &ctx.design,
                    &ctx.obs,
                    &ctx.sub,
                    &ctx.rho,
                    Flavor::Ls,
                    RidgeForm::default(),
                )?
                .h_eff,
                ctx.cfg.q * b + ctx.cfg.m,
            ),
            Method::PwclraMmse => (
                estimator::estimate(
                    &ctx.cfg,
                    &ctx.design,
                    &ctx.obs,
                    &ctx.sub,
                    &ctx.rho,
                    Flavor::Mmse,
                    RidgeForm::default(),
                )?
                .h_eff,
                ctx.cfg.q * b + ctx.cfg.m,
            ),
            Method::PwclraJo | Method::ClraJo | Method::ClraLs => {
                let flavor = if method == Method::ClraLs { Flavor::Ls } else { Flavor::Jo };
                let out = if method.uses_single_piece_design() {
                    pwclra::baselines::clra_estimate(
                        &ctx.cfg,
                        &ctx.design,
                        &ctx.obs,
                        &ctx.sub,
                        &ctx.rho,
                        flavor,
                        RidgeForm::default(),
                    )?
                } else {
                    estimator::estimate(
                        &ctx.cfg,
                        &ctx.design,
                        &ctx.obs,
                        &ctx.sub,
                        &ctx.rho,
                        flavor,
                        RidgeForm::default(),
                    )?
                };
                if let Some(traces) = &out.jo_traces {
                    for tr in traces {
                        for w in tr.objective.windows(2) {
                            jo_checked += 1;
                            if w[1] > w[0] + 1e-9 * tr.input_energy {
                                jo_violations += 1;
                            }
                        }
                    }
                }
                (out.h_eff, ctx.cfg.q * b + ctx.cfg.m)
            }
            Method::TwoDLs => (
                pwclra::baselines::oracle_2dls_estimate(&ctx.cfg, &ctx.design, &ctx.obs, &ch.h_rb)?,
                ctx.cfg.m,
            ),
        };
        let nmse = pwclra::metrics::nmse(&h_hat, &ch.h_eff)?;
        if !nmse.is_finite() {
            return Err(CliError::Runtime(format!(
                "non-finite error for {} at point {} trial {trial}",
                method.as_str(),
                point.index
            )));
        }
        rows.push(ResultRow {
            scenario: scenario.name.clone(),
            method,
            q: ctx.cfg.q,
            z,
            snr_db: point.snr_db,
            d_x_rb_m: point.d_x_rb_m,
            m_ris: point.m,
            geometry: scenario.geometry().label(),
            trial,
            nmse_linear: nmse,
            nmse_db: pwclra::metrics::to_db(nmse),
        });
    }
    Ok(JobOut { point: point.index, trial, rows, jo_checked, jo_violations, rank_caps })
}

/// Run every (point, trial) job on `parallel` worker threads.
pub fn run_scenario(scenario: &Scenario, parallel: usize) -> CliResult<RunOutcome> {
    scenario.validate()?;
    let points = scenario.points()?;
    let jobs: Vec<(usize, usize)> = points
        .iter()
        .flat_map(|p| (0..scenario.trials).map(move |t| (p.index, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let mut outs: Vec<JobOut> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, t)| run_job(scenario, &points[p], t))
            .collect::<CliResult<Vec<_>>>()
    })?;
    outs.sort_by_key(|o| (o.point, o.trial));
    let mut outcome = RunOutcome {
        rows: Vec::with_capacity(outs.len() * scenario.methods.len()),
        jo_checked_steps: 0,
        jo_violations: 0,
        rank_cap_events: 0,
    };
    for o in &outs {
        outcome.jo_checked_steps += o.jo_checked;
        outcome.jo_violations += o.jo_violations;
        outcome.rank_cap_events += o.rank_caps;
    }
    // emit in (point, method, trial) order; each job holds one trial's rows
    // in declared method order
    for p in 0..points.len() {
        for mi in 0..scenario.methods.len() {
            for t in 0..scenario.trials {
                outcome.rows.push(outs[p * scenario.trials + t].rows[mi].clone());
            }
        }
    }
    Ok(outcome)
}
