//! L1-norm sparse coders.
//!
//! `lasso_encode` minimizes `0.5 ||Dx - y||^2 + lambda ||x||_1` by cyclic
//! coordinate descent with soft-thresholding; `bp_encode` solves
//! `min ||x||_1  s.t.  ||Dx - y|| <= epsilon` with an operator-splitting
//! (ADMM) iteration whose x-step is a soft-threshold and whose auxiliary
//! step projects onto the epsilon-ball around `y`. The two sides are tied
//! together by an exact projection onto `{(x, s) : Dx = s}`, computed from a
//! cached Cholesky factor of `I + D D^T`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg::IncrementalQr;
use crate::pursuit::SparseCode;

/// Parameters shared by the two convex coders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexConfig {
    /// Lasso weight; `None` picks `0.1 * ||D^T y||_inf` per signal.
    pub lambda: Option<f64>,
    /// Basis-pursuit noise bound.
    pub epsilon: f64,
    /// Iteration cap: coordinate-descent sweeps for the Lasso, ADMM
    /// iterations for BP.
    pub max_iter: usize,
    /// Convergence tolerance: max coordinate change (Lasso) or scaled
    /// primal/dual residuals (BP).
    pub tol: f64,
    /// ADMM splitting penalty.
    pub rho: f64,
}

impl Default for ConvexConfig {
    fn default() -> Self {
        Self { lambda: None, epsilon: 0.0, max_iter: 5000, tol: 1e-6, rho: 1.0 }
    }
}

impl ConvexConfig {
    fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter("lambda must be positive".into()));
            }
        }
        if self.epsilon < 0.0 {
            return Err(Error::InvalidParameter("epsilon must be non-negative".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if self.tol < 0.0 {
            return Err(Error::InvalidParameter("tol must be non-negative".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter("rho must be positive".into()));
        }
        Ok(())
    }
}

/// The proximal operator of `a |.|`: `sign(z) * max(|z| - a, 0)`.
#[inline]
pub fn soft_threshold(z: f64, a: f64) -> f64 {
    if z > a {
        z - a
    } else if z < -a {
        z + a
    } else {
        0.0
    }
}

/// The per-signal default weight, `0.1 * ||D^T y||_inf`.
pub fn default_lambda(d: &Dictionary, y: &DVector<f64>) -> f64 {
    0.1 * d.atoms().tr_mul(y).amax()
}

fn check_signal(d: &Dictionary, y: &DVector<f64>) -> Result<()> {
    if y.len() != d.p() {
        return Err(Error::DimensionMismatch(format!(
            "signal has dim {}, dictionary atoms have dim {}",
            y.len(),
            d.p()
        )));
    }
    Ok(())
}

/// Lasso objective `0.5 ||Dx - y||^2 + lambda ||x||_1`.
pub fn lasso_objective(d: &Dictionary, y: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    0.5 * (y - d.atoms() * x).norm_squared() + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Duality gap of the Lasso at iterate `x` (dual point obtained by scaling
/// the residual into the feasible set). Zero at the optimum.
pub fn lasso_duality_gap(d: &Dictionary, y: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    let r = y - d.atoms() * x;
    let dual_norm = d.atoms().tr_mul(&r).amax();
    let scale = if dual_norm > lambda { lambda / dual_norm } else { 1.0 };
    let r_sq = r.norm_squared();
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    0.5 * r_sq + lambda * l1 + 0.5 * scale * scale * r_sq - scale * r.dot(y)
}

/// Cyclic coordinate descent with soft-thresholding; converges when the
/// largest coordinate change in a sweep is at most `tol`.
pub fn lasso_encode(d: &Dictionary, y: &DVector<f64>, cfg: &ConvexConfig) -> Result<SparseCode> {
    cfg.validate()?;
    check_signal(d, y)?;
    let mat = d.atoms();
    let m = d.m();
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => {
            let auto = default_lambda(d, y);
            if auto <= 0.0 {
                // D^T y = 0: the zero code is optimal for every lambda > 0.
                return Ok(SparseCode {
                    coeffs: DVector::zeros(m),
                    support: Vec::new(),
                    residual_norm: y.norm(),
                    iterations: 0,
                    flag: None,
                });
            }
            auto
        }
    };

    let col_sq: Vec<f64> = (0..m).map(|j| mat.column(j).norm_squared()).collect();
    let mut x = DVector::zeros(m);
    let mut residual = y.clone();
    let mut sweeps = 0;

    let converged = loop {
        if sweeps == cfg.max_iter {
            break false;
        }
        let mut max_delta: f64 = 0.0;
        for j in 0..m {
            if col_sq[j] <= f64::MIN_POSITIVE {
                continue;
            }
            let col = mat.column(j);
            let z = col.dot(&residual) + col_sq[j] * x[j];
            let x_new = soft_threshold(z, lambda) / col_sq[j];
            let delta = x_new - x[j];
            if delta != 0.0 {
                residual.axpy(-delta, &col.into_owned(), 1.0);
                x[j] = x_new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        sweeps += 1;
        if max_delta <= cfg.tol {
            break true;
        }
    };

    let support: Vec<usize> = (0..m).filter(|&j| x[j] != 0.0).collect();
    let residual_norm = (y - mat * &x).norm();
    let code = SparseCode { coeffs: x, support, residual_norm, iterations: sweeps, flag: None };
    if converged {
        Ok(code)
    } else {
        let gap = lasso_duality_gap(d, y, &code.coeffs, lambda);
        Err(Error::LassoNoConvergence { sweeps, gap, last: Box::new(code) })
    }
}

/// Basis-pursuit solver with per-dictionary precomputation, reusable across
/// a batch of signals.
pub struct BpSolver<'a> {
    d: &'a Dictionary,
    cfg: ConvexConfig,
    /// Cholesky factor of `I + D D^T`, used by the affine projection.
    chol: Cholesky<f64, Dyn>,
}

impl<'a> BpSolver<'a> {
    pub fn new(d: &'a Dictionary, cfg: &ConvexConfig) -> Result<Self> {
        cfg.validate()?;
        let mat = d.atoms();
        let mut gram = mat * mat.transpose();
        for i in 0..d.p() {
            gram[(i, i)] += 1.0;
        }
        let chol = Cholesky::new(gram)
            .ok_or_else(|| Error::InvalidParameter("I + D D^T is not positive definite".into()))?;
        Ok(Self { d, cfg: *cfg, chol })
    }

    /// Projection of `(a, b)` onto `{(x, s) : Dx = s}`.
    fn project_affine(&self, a: &DVector<f64>, b: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mat = self.d.atoms();
        let rhs = b - mat * a;
        let w = self.chol.solve(&rhs);
        let x = a + mat.tr_mul(&w);
        let s = mat * &x;
        (x, s)
    }

    /// Projection onto the epsilon-ball around `y`.
    fn project_ball(&self, v: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let diff = v - y;
        let norm = diff.norm();
        if norm <= self.cfg.epsilon {
            v.clone()
        } else if self.cfg.epsilon == 0.0 {
            y.clone()
        } else {
            y + diff * (self.cfg.epsilon / norm)
        }
    }

    pub fn solve(&self, y: &DVector<f64>) -> Result<SparseCode> {
        check_signal(self.d, y)?;
        let mat = self.d.atoms();
        let (p, m) = (self.d.p(), self.d.m());
        let cfg = &self.cfg;

        // A tall dictionary may not span y at all; check before iterating.
        if p > m {
            let mut qr = IncrementalQr::new(1e-10);
            let mut best = y.clone();
            for j in 0..m {
                qr.try_push(&mat.column(j).into_owned());
            }
            if !qr.is_empty() {
                let sol = qr.solve(y);
                // Range basis columns are orthonormal in qr; rebuild residual
                // against the original columns instead.
                let mut proj = DVector::zeros(p);
                let coeffs = sol;
                // qr columns correspond to accepted atoms in push order; use
                // a fresh LS on all atoms for the span test.
                let _ = coeffs;
                let mut qr_full = IncrementalQr::new(1e-10);
                let mut accepted: Vec<usize> = Vec::new();
                for j in 0..m {
                    if qr_full.try_push(&mat.column(j).into_owned()) {
                        accepted.push(j);
                    }
                }
                let x_span = qr_full.solve(y);
                for (&j, &c) in accepted.iter().zip(&x_span) {
                    proj.axpy(c, &mat.column(j).into_owned(), 1.0);
                }
                best = y - proj;
            }
            let min_residual = best.norm();
            if min_residual > cfg.epsilon + cfg.tol.max(1e-8) {
                return Err(Error::Infeasible(format!(
                    "min ||Dx - y|| = {min_residual:.3e} exceeds epsilon = {:.3e}",
                    cfg.epsilon
                )));
            }
        }

        let shrink = 1.0 / cfg.rho;
        let mut px = DVector::<f64>::zeros(m);
        let mut ps = DVector::<f64>::zeros(p);
        let mut ux = DVector::<f64>::zeros(m);
        let mut us = DVector::<f64>::zeros(p);
        let mut history = Vec::new();
        let dim_scale = ((m + p) as f64).sqrt();

        for it in 1..=cfg.max_iter {
            let vx = (&px - &ux).map(|z| soft_threshold(z, shrink));
            let vs = self.project_ball(&(&ps - &us), y);

            let (px_new, ps_new) = self.project_affine(&(&vx + &ux), &(&vs + &us));
            let dual_sq = (&px_new - &px).norm_squared() + (&ps_new - &ps).norm_squared();
            px = px_new;
            ps = ps_new;

            ux += &vx - &px;
            us += &vs - &ps;

            let pri_sq = (&vx - &px).norm_squared() + (&vs - &ps).norm_squared();
            let r_pri = pri_sq.sqrt();
            let r_dual = cfg.rho * dual_sq.sqrt();
            let feasibility = (&ps - y).norm();
            history.push((feasibility - cfg.epsilon).max(0.0));

            let iterate_scale = (vx.norm_squared() + vs.norm_squared())
                .max(px.norm_squared() + ps.norm_squared())
                .sqrt();
            let dual_scale = cfg.rho * (ux.norm_squared() + us.norm_squared()).sqrt();
            let eps_pri = dim_scale * cfg.tol + cfg.tol * iterate_scale;
            let eps_dual = dim_scale * cfg.tol + cfg.tol * dual_scale;
            if r_pri <= eps_pri && r_dual <= eps_dual {
                let residual_norm = (y - mat * &px).norm();
                let support: Vec<usize> = (0..m).filter(|&j| px[j] != 0.0).collect();
                return Ok(SparseCode {
                    coeffs: px,
                    support,
                    residual_norm,
                    iterations: it,
                    flag: None,
                });
            }
        }

        let last_residual = *history.last().unwrap_or(&f64::INFINITY);
        Err(Error::BpNoConvergence { iterations: cfg.max_iter, last_residual, history })
    }
}

/// One-shot basis pursuit; use [`BpSolver`] directly when encoding batches.
pub fn bp_encode(d: &Dictionary, y: &DVector<f64>, cfg: &ConvexConfig) -> Result<SparseCode> {
    BpSolver::new(d, cfg)?.solve(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn gaussian_dict(p: usize, m: usize, seed: u64) -> Dictionary {
        let mut rng = crate::SeededRng::seed_from_u64(seed);
        let mat = DMatrix::from_fn(p, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        Dictionary::from_unnormalized(mat, seed).unwrap().0
    }

    fn orthonormal_dict(p: usize, seed: u64) -> Dictionary {
        let mut rng = crate::SeededRng::seed_from_u64(seed);
        let mat = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        Dictionary::new(mat.qr().q()).unwrap()
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.0, 0.0), 0.0);
        assert_eq!(soft_threshold(2.0, 0.0), 2.0);
    }

    #[test]
    fn lasso_dead_zone_gives_exact_zero() {
        let d = gaussian_dict(6, 12, 1);
        let mut rng = crate::SeededRng::seed_from_u64(10);
        let y = DVector::from_fn(6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = d.atoms().tr_mul(&y).amax() * 1.0001;
        let cfg = ConvexConfig { lambda: Some(lambda), ..Default::default() };
        let code = lasso_encode(&d, &y, &cfg).unwrap();
        assert_eq!(code.nnz_raw(), 0);
        assert!((code.residual_norm - y.norm()).abs() < 1e-12);
    }

    #[test]
    fn lasso_orthonormal_closed_form() {
        let d = orthonormal_dict(6, 2);
        let mut rng = crate::SeededRng::seed_from_u64(20);
        let y = DVector::from_fn(6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = 0.3;
        let cfg = ConvexConfig { lambda: Some(lambda), tol: 1e-12, ..Default::default() };
        let code = lasso_encode(&d, &y, &cfg).unwrap();
        for j in 0..6 {
            let z = d.atoms().column(j).dot(&y);
            let expected = soft_threshold(z, lambda);
            assert!(
                (code.coeffs[j] - expected).abs() < 1e-10,
                "coordinate {j}: {} vs {}",
                code.coeffs[j],
                expected
            );
        }
    }

    #[test]
    fn lasso_satisfies_stationarity() {
        let d = gaussian_dict(10, 20, 3);
        let mut rng = crate::SeededRng::seed_from_u64(30);
        let y = DVector::from_fn(10, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = 0.1;
        let cfg = ConvexConfig { lambda: Some(lambda), tol: 1e-10, ..Default::default() };
        let code = lasso_encode(&d, &y, &cfg).unwrap();
        let r = &y - d.atoms() * &code.coeffs;
        for j in 0..20 {
            let corr = d.atoms().column(j).dot(&r);
            assert!(corr.abs() <= lambda + 1e-6, "KKT bound violated at {j}: {corr}");
            if code.coeffs[j] != 0.0 {
                assert!(
                    (corr - lambda * code.coeffs[j].signum()).abs() <= 1e-6,
                    "KKT equality violated at {j}: corr {corr}, x {}",
                    code.coeffs[j]
                );
            }
        }
        assert!(lasso_duality_gap(&d, &y, &code.coeffs, lambda) < 1e-6);
    }

    #[test]
    fn lasso_scale_covariance() {
        let d = gaussian_dict(8, 16, 4);
        let mut rng = crate::SeededRng::seed_from_u64(40);
        let y = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal));
        let lambda = 0.2;
        let alpha = 2.5;
        let tight = ConvexConfig { lambda: Some(lambda), tol: 1e-12, ..Default::default() };
        let scaled = ConvexConfig { lambda: Some(alpha * lambda), tol: 1e-12, ..Default::default() };
        let base = lasso_encode(&d, &y, &tight).unwrap();
        let big = lasso_encode(&d, &(&y * alpha), &scaled).unwrap();
        assert!((big.coeffs - &base.coeffs * alpha).amax() < 1e-8);
    }

    #[test]
    fn lasso_nonconvergence_carries_iterate_and_gap() {
        let d = gaussian_dict(10, 30, 5);
        let mut rng = crate::SeededRng::seed_from_u64(50);
        let y = DVector::from_fn(10, |_, _| rng.sample::<f64, _>(StandardNormal));
        let cfg = ConvexConfig { lambda: Some(0.01), max_iter: 1, tol: 1e-14, ..Default::default() };
        match lasso_encode(&d, &y, &cfg) {
            Err(Error::LassoNoConvergence { sweeps, gap, last }) => {
                assert_eq!(sweeps, 1);
                assert!(gap.is_finite() && gap >= -1e-12);
                assert!(last.nnz_raw() > 0);
            }
            other => panic!("expected LassoNoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn bp_zero_signal_gives_zero_code() {
        let d = gaussian_dict(8, 16, 6);
        let y = DVector::zeros(8);
        let code = bp_encode(&d, &y, &ConvexConfig::default()).unwrap();
        assert_eq!(code.nnz_raw(), 0);
        assert_eq!(code.residual_norm, 0.0);
    }

    #[test]
    fn bp_single_atom_is_near_unit_l1() {
        let d = gaussian_dict(10, 20, 7);
        let y = d.atom(3);
        let cfg = ConvexConfig { tol: 1e-8, max_iter: 20000, ..Default::default() };
        let code = bp_encode(&d, &y, &cfg).unwrap();
        // x = e_3 is feasible with ||x||_1 = 1, so the optimum is <= 1.
        assert!(code.l1_norm() <= 1.0 + 1e-4, "l1 norm {}", code.l1_norm());
        assert!(code.residual_norm <= 1e-5, "feasibility {}", code.residual_norm);
    }

    #[test]
    fn bp_exact_recovery_in_the_sparse_regime() {
        let d = gaussian_dict(32, 64, 8);
        let mut rng = crate::SeededRng::seed_from_u64(80);
        let mut x_star = DVector::zeros(64);
        for &j in &[5usize, 20, 41, 60] {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            x_star[j] = sign * rng.random_range(0.5..=1.5);
        }
        let y = d.atoms() * &x_star;
        let cfg = ConvexConfig { tol: 1e-8, max_iter: 20000, ..Default::default() };
        let code = bp_encode(&d, &y, &cfg).unwrap();
        assert!(
            (&code.coeffs - &x_star).amax() <= 1e-4,
            "max coordinate error {}",
            (&code.coeffs - &x_star).amax()
        );
    }

    #[test]
    fn bp_detects_infeasible_tall_system() {
        // p=4, m=2: the span misses e4.
        let mat = DMatrix::from_column_slice(
            4,
            2,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        );
        let d = Dictionary::new(mat).unwrap();
        let y = DVector::from_column_slice(&[0.0, 0.0, 0.0, 2.0]);
        let cfg = ConvexConfig { epsilon: 0.5, ..Default::default() };
        assert!(matches!(bp_encode(&d, &y, &cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn bp_is_deterministic() {
        let d = gaussian_dict(12, 24, 9);
        let mut rng = crate::SeededRng::seed_from_u64(90);
        let y = DVector::from_fn(12, |_, _| rng.sample::<f64, _>(StandardNormal));
        let cfg = ConvexConfig { max_iter: 500, ..Default::default() };
        let solver = BpSolver::new(&d, &cfg).unwrap();
        let a = solver.solve(&y);
        let b = solver.solve(&y);
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(Error::BpNoConvergence { history: ha, .. }), Err(Error::BpNoConvergence { history: hb, .. })) => {
                assert_eq!(ha, hb)
            }
            other => panic!("mismatched outcomes: {other:?}"),
        }
    }
}
