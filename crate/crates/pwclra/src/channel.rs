//! Spherical-wavefront channel synthesis: direct paths, single-bounce
//! scatterers, and the cascaded/effective matrices the estimator works on.
//!
//! The panel→base-station link is a sum of a deterministic direct component
//! and a small number of single-bounce outer products; each user→panel link
//! follows the same recipe (or an i.i.d. Gaussian stand-in for tests).
//!
//! # Example
//! ```
//! use pwclra::{channel::ChannelRealization, config::SystemConfig};
//! use rand::SeedableRng;
//! let cfg = SystemConfig::desk();
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
//! let ch = ChannelRealization::generate(&cfg, &mut rng).unwrap();
//! assert_eq!(ch.h_eff[0].shape(), (32, 64 * 2));
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::config::{SystemConfig, UserLinkModel};
use crate::error::{Error, Result};
use crate::geometry::{dist, ArrayGeometry, Point3};
use crate::linalg::{complex_gaussian, CMat, CVec};

/// Attempts allowed when rejection-sampling a scatterer position.
const MAX_SCATTER_ATTEMPTS: usize = 10_000;
/// Minimum scatterer clearance from any array element, m.
const SCATTER_CLEARANCE_M: f64 = 1.0;

/// Spherical-wavefront response between two element sets.
///
/// Entry (i, j) couples `dst[i]` to `src[j]`: amplitude λ²/(4πr)² at range
/// r = ‖dst_i − src_j‖ with propagation phase e^{−j2πr/λ}.
pub fn near_field_response(src: &[Point3], dst: &[Point3], lambda_m: f64) -> Result<CMat> {
    if lambda_m <= 0.0 {
        return Err(Error::Argument(format!("lambda_m = {lambda_m} must be > 0")));
    }
    if src.is_empty() || dst.is_empty() {
        return Err(Error::Argument("near_field_response: empty element set".into()));
    }
    let mut out = CMat::zeros(dst.len(), src.len());
    for (i, d) in dst.iter().enumerate() {
        for (j, s) in src.iter().enumerate() {
            let r = dist(*d, *s);
            if r == 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "coincident elements at ({}, {}, {})",
                    d[0], d[1], d[2]
                )));
            }
            let a = lambda_m * lambda_m / (4.0 * std::f64::consts::PI * r).powi(2);
            let phase = -2.0 * std::f64::consts::PI * r / lambda_m;
            out[(i, j)] = Complex64::from_polar(a, phase);
        }
    }
    Ok(out)
}

/// Per-user effective matrix: L side-by-side N×M blocks, block ℓ being the
/// panel→BS matrix with column m scaled by the user link coefficient (m, ℓ).
pub fn effective_channel(h_rb: &CMat, h_ur_k: &CMat) -> CMat {
    let (n, m) = h_rb.shape();
    let l = h_ur_k.ncols();
    assert_eq!(h_ur_k.nrows(), m, "user link rows must match panel width");
    let mut out = CMat::zeros(n, m * l);
    for li in 0..l {
        for mi in 0..m {
            let g = h_ur_k[(mi, li)];
            for ni in 0..n {
                out[(ni, li * m + mi)] = h_rb[(ni, mi)] * g;
            }
        }
    }
    out
}

/// Cascaded N×L channel under reflection pattern `v`.
pub fn total_cascaded(h_rb: &CMat, h_ur_k: &CMat, v: &CVec) -> CMat {
    let m = h_rb.ncols();
    assert_eq!(v.len(), m, "reflection pattern length must match panel width");
    assert_eq!(h_ur_k.nrows(), m);
    // H · diag(v) · G computed as H · (v ∘ rows of G)
    let scaled = DMatrix::from_fn(m, h_ur_k.ncols(), |i, j| v[i] * h_ur_k[(i, j)]);
    h_rb * scaled
}

/// One drawn channel instance: panel→BS split into direct + scattered parts,
/// per-user links, and the assembled effective matrices.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Direct panel→BS component, N×M.
    pub h_rb_los: CMat,
    /// Scattered panel→BS component, N×M.
    pub h_rb_nlos: CMat,
    /// Their sum, N×M.
    pub h_rb: CMat,
    /// Per-user panel-side links, each M×L.
    pub h_ur: Vec<CMat>,
    /// Per-user effective matrices, each N×(M·L).
    pub h_eff: Vec<CMat>,
    /// Drawn user x-coordinates (empty for synthetic instances).
    pub user_x_m: Vec<f64>,
    /// Scatterer positions on the panel→BS link.
    pub scatter_rb: Vec<Point3>,
}

impl ChannelRealization {
    /// Draw a full instance per the configured models.
    pub fn generate<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let bs = cfg.bs_array()?;
        let ris = cfg.ris_array()?;
        let h_rb_los = near_field_response(&ris.positions, &bs.positions, cfg.lambda_m)?;

        let mut h_rb_nlos = CMat::zeros(cfg.n, cfg.m);
        let mut scatter_rb = Vec::with_capacity(cfg.n_scatter_rb);
        for _ in 0..cfg.n_scatter_rb {
            let p = sample_scatterer(rng, cfg.bs_center, cfg.ris_center, &[&bs, &ris])?;
            let a_bs = near_field_response(&[p], &bs.positions, cfg.lambda_m)?;
            let a_ris = near_field_response(&[p], &ris.positions, cfg.lambda_m)?;
            for ni in 0..cfg.n {
                for mi in 0..cfg.m {
                    h_rb_nlos[(ni, mi)] += a_bs[(ni, 0)] * a_ris[(mi, 0)].conj();
                }
            }
            scatter_rb.push(p);
        }
        let h_rb = &h_rb_los + &h_rb_nlos;

        let mut h_ur = Vec::with_capacity(cfg.k);
        let mut user_x_m = Vec::with_capacity(cfg.k);
        for _ in 0..cfg.k {
            match cfg.user_link {
                UserLinkModel::IidGaussian => {
                    h_ur.push(complex_gaussian(rng, cfg.m, cfg.l));
                    user_x_m.push(f64::NAN);
                }
                UserLinkModel::NearField { n_scatter } => {
                    let (lo, hi) = cfg.user_x_range_m;
                    let x = if lo == hi { lo } else { rng.gen_range(lo..hi) };
                    let ua = cfg.user_array(x)?;
                    let mut h = near_field_response(&ua.positions, &ris.positions, cfg.lambda_m)?;
                    let user_center = [x, cfg.user_y_m, cfg.user_z_m];
                    for _ in 0..n_scatter {
                        let p =
                            sample_scatterer(rng, user_center, cfg.ris_center, &[&ua, &ris])?;
                        let a_ris = near_field_response(&[p], &ris.positions, cfg.lambda_m)?;
                        let a_ua = near_field_response(&[p], &ua.positions, cfg.lambda_m)?;
                        for mi in 0..cfg.m {
                            for li in 0..cfg.l {
                                h[(mi, li)] += a_ris[(mi, 0)] * a_ua[(li, 0)].conj();
                            }
                        }
                    }
                    h_ur.push(h);
                    user_x_m.push(x);
                }
            }
        }

        let h_eff = h_ur.iter().map(|g| effective_channel(&h_rb, g)).collect();
        Ok(Self { h_rb_los, h_rb_nlos, h_rb, h_ur, h_eff, user_x_m, scatter_rb })
    }

    /// Assemble an instance from explicitly supplied parts (synthetic tests,
    /// planted low-rank structure, …).
    pub fn from_parts(h_rb_los: CMat, h_rb_nlos: CMat, h_ur: Vec<CMat>) -> Result<Self> {
        if h_rb_los.shape() != h_rb_nlos.shape() {
            return Err(Error::Argument(format!(
                "panel→BS parts disagree: {:?} vs {:?}",
                h_rb_los.shape(),
                h_rb_nlos.shape()
            )));
        }
        let m = h_rb_los.ncols();
        if h_ur.is_empty() {
            return Err(Error::Argument("at least one user link required".into()));
        }
        let l = h_ur[0].ncols();
        for (k, g) in h_ur.iter().enumerate() {
            if g.nrows() != m || g.ncols() != l {
                return Err(Error::Argument(format!(
                    "user {k} link is {:?}, expected ({m}, {l})",
                    g.shape()
                )));
            }
        }
        let h_rb = &h_rb_los + &h_rb_nlos;
        let h_eff = h_ur.iter().map(|g| effective_channel(&h_rb, g)).collect();
        Ok(Self {
            h_rb_los,
            h_rb_nlos,
            h_rb,
            h_ur,
            h_eff,
            user_x_m: Vec::new(),
            scatter_rb: Vec::new(),
        })
    }

    /// Cascaded N×L channel of user `k` under reflection pattern `v`.
    pub fn total(&self, k: usize, v: &CVec) -> CMat {
        total_cascaded(&self.h_rb, &self.h_ur[k], v)
    }

    /// Number of users in this instance.
    pub fn users(&self) -> usize {
        self.h_ur.len()
    }
}

/// Uniform draw from the bounding box spanned by `a` and `b`, redrawn until
/// the point clears every element of every array by ≥ 1 m.
fn sample_scatterer<R: Rng + ?Sized>(
    rng: &mut R,
    a: Point3,
    b: Point3,
    arrays: &[&ArrayGeometry],
) -> Result<Point3> {
    let lo = [a[0].min(b[0]), a[1].min(b[1]), a[2].min(b[2])];
    let hi = [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])];
    for _ in 0..MAX_SCATTER_ATTEMPTS {
        let mut p = [0.0; 3];
        for (i, pi) in p.iter_mut().enumerate() {
            *pi = if lo[i] == hi[i] { lo[i] } else { rng.gen_range(lo[i]..hi[i]) };
        }
        let clear = arrays
            .iter()
            .all(|arr| arr.positions.iter().all(|e| dist(*e, p) >= SCATTER_CLEARANCE_M));
        if clear {
            return Ok(p);
        }
    }
    Err(Error::DegenerateGeometry(format!(
        "no scatterer position with {SCATTER_CLEARANCE_M} m clearance found in \
         [{:?}, {:?}] after {MAX_SCATTER_ATTEMPTS} draws",
        lo, hi
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_sq, max_abs_diff, singular_values};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const LAMBDA: f64 = 0.006;

    #[test]
    fn response_at_one_wavelength_is_inverse_16_pi_sq() {
        let h = near_field_response(&[[0.0, 0.0, 0.0]], &[[LAMBDA, 0.0, 0.0]], LAMBDA).unwrap();
        let want = 1.0 / (16.0 * std::f64::consts::PI.powi(2));
        assert_relative_eq!(h[(0, 0)].norm(), want, epsilon = 1e-15);
        // phase wraps a whole turn at r = λ
        assert_relative_eq!(h[(0, 0)].re, want, epsilon = 1e-15);
        assert!(h[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn amplitude_falls_as_inverse_square() {
        let h1 = near_field_response(&[[0.0; 3]], &[[2.0, 0.0, 0.0]], LAMBDA).unwrap();
        let h2 = near_field_response(&[[0.0; 3]], &[[4.0, 0.0, 0.0]], LAMBDA).unwrap();
        assert_relative_eq!(h1[(0, 0)].norm() / h2[(0, 0)].norm(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn response_matches_brute_force_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let src: Vec<Point3> = (0..5)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(1.0..2.0)])
            .collect();
        let dst: Vec<Point3> = (0..4)
            .map(|_| [rng.gen_range(4.0..6.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let h = near_field_response(&src, &dst, LAMBDA).unwrap();
        for (i, d) in dst.iter().enumerate() {
            for (j, s) in src.iter().enumerate() {
                let r = ((d[0] - s[0]).powi(2) + (d[1] - s[1]).powi(2) + (d[2] - s[2]).powi(2))
                    .sqrt();
                let amp = LAMBDA * LAMBDA / (16.0 * std::f64::consts::PI.powi(2) * r * r);
                let want = Complex64::from_polar(amp, -2.0 * std::f64::consts::PI * r / LAMBDA);
                assert!((h[(i, j)] - want).norm() <= 1e-12 * want.norm());
            }
        }
    }

    #[test]
    fn coincident_elements_rejected() {
        let p = [1.0, 2.0, 3.0];
        assert!(matches!(
            near_field_response(&[p], &[p], LAMBDA),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn effective_channel_scales_columns() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let h_rb = complex_gaussian(&mut rng, 4, 6);
        let h_ur = complex_gaussian(&mut rng, 6, 2);
        let he = effective_channel(&h_rb, &h_ur);
        assert_eq!(he.shape(), (4, 12));
        for l in 0..2 {
            for m in 0..6 {
                for n in 0..4 {
                    let want = h_rb[(n, m)] * h_ur[(m, l)];
                    assert!((he[(n, l * 6 + m)] - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn total_is_effective_times_pattern() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let h_rb = complex_gaussian(&mut rng, 4, 6);
        let h_ur = complex_gaussian(&mut rng, 6, 3);
        let v = CVec::from_fn(6, |_, _| crate::linalg::standard_complex(&mut rng));
        let ht = total_cascaded(&h_rb, &h_ur, &v);
        let he = effective_channel(&h_rb, &h_ur);
        for l in 0..3 {
            let block = he.view((0, l * 6), (4, 6));
            let col = block * &v;
            for n in 0..4 {
                assert!((ht[(n, l)] - col[n]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn desk_realization_shapes_and_margins() {
        let cfg = SystemConfig::desk();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let ch = ChannelRealization::generate(&cfg, &mut rng).unwrap();
        assert_eq!(ch.h_rb.shape(), (32, 64));
        assert_eq!(ch.h_ur.len(), 4);
        assert_eq!(ch.h_ur[0].shape(), (64, 2));
        assert_eq!(ch.h_eff[0].shape(), (32, 128));
        assert_eq!(ch.scatter_rb.len(), 3);
        let bs = cfg.bs_array().unwrap();
        let ris = cfg.ris_array().unwrap();
        for p in &ch.scatter_rb {
            for e in bs.positions.iter().chain(ris.positions.iter()) {
                assert!(dist(*e, *p) >= 1.0);
            }
        }
        for &x in &ch.user_x_m {
            assert!((20.0..30.0).contains(&x));
        }
        assert!(max_abs_diff(&ch.h_rb, &(&ch.h_rb_los + &ch.h_rb_nlos)) == 0.0);
    }

    #[test]
    fn direct_component_rank_structure() {
        // Deterministic direct path at the reference placement: numerical
        // rank 4 at the 1e-6 cutoff; three bounces give exactly rank 3.
        let cfg = SystemConfig::desk();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let ch = ChannelRealization::generate(&cfg, &mut rng).unwrap();
        let sv_los = singular_values(&ch.h_rb_los);
        let rank_los = sv_los.iter().filter(|&&s| s > 1e-6 * sv_los[0]).count();
        assert_eq!(rank_los, 4);
        let sv_nlos = singular_values(&ch.h_rb_nlos);
        let rank_nlos = sv_nlos.iter().filter(|&&s| s > 1e-9 * sv_nlos[0]).count();
        assert_eq!(rank_nlos, 3);
        // direct path carries more energy than the bounces here
        assert!(fro_sq(&ch.h_rb_los) > fro_sq(&ch.h_rb_nlos));
    }

    #[test]
    fn planar_panel_realization() {
        let mut cfg = SystemConfig::desk();
        cfg.ris_shape = crate::config::RisShape::Upa { n_y: 32, n_z: 2 };
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let ch = ChannelRealization::generate(&cfg, &mut rng).unwrap();
        assert_eq!(ch.h_rb.shape(), (32, 64));
        assert_eq!(ch.h_eff[0].shape(), (32, 128));
    }

    #[test]
    fn gaussian_user_links() {
        let mut cfg = SystemConfig::desk();
        cfg.user_link = UserLinkModel::IidGaussian;
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let ch = ChannelRealization::generate(&cfg, &mut rng).unwrap();
        let var = fro_sq(&ch.h_ur[0]) / (64.0 * 2.0);
        assert!((var - 1.0).abs() < 0.3, "unit-variance entries expected, got {var}");
    }

    #[test]
    fn from_parts_validates_shapes() {
        let a = CMat::zeros(4, 6);
        let b = CMat::zeros(4, 5);
        assert!(ChannelRealization::from_parts(a.clone(), b, vec![CMat::zeros(6, 2)]).is_err());
        let ok = ChannelRealization::from_parts(
            a.clone(),
            CMat::zeros(4, 6),
            vec![CMat::zeros(6, 2)],
        )
        .unwrap();
        assert_eq!(ok.h_eff[0].shape(), (4, 12));
        assert!(
            ChannelRealization::from_parts(a, CMat::zeros(4, 6), vec![CMat::zeros(5, 2)]).is_err()
        );
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let cfg = SystemConfig::desk();
        let a = ChannelRealization::generate(&cfg, &mut ChaCha20Rng::seed_from_u64(77)).unwrap();
        let b = ChannelRealization::generate(&cfg, &mut ChaCha20Rng::seed_from_u64(77)).unwrap();
        assert!(max_abs_diff(&a.h_rb, &b.h_rb) == 0.0);
        assert!(max_abs_diff(&a.h_ur[3], &b.h_ur[3]) == 0.0);
    }
}
