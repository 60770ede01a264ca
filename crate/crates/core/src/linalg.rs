//! Small dense kernels shared by the coders and the dictionary trainer.

use nalgebra::DVector;

/// Least squares over a growing column set, via modified Gram-Schmidt QR with
/// one re-orthogonalization pass.
///
/// Columns that fall below `rank_tol` after orthogonalization are rejected,
/// which is how the coders detect a rank-deficient selection.
pub struct IncrementalQr {
    q: Vec<DVector<f64>>,
    /// Column-major upper triangle: `r[j]` holds R[0..=j, j].
    r: Vec<Vec<f64>>,
    rank_tol: f64,
}

impl IncrementalQr {
    pub fn new(rank_tol: f64) -> Self {
        Self { q: Vec::new(), r: Vec::new(), rank_tol }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Orthonormal basis of the span of the accepted columns.
    pub fn basis(&self) -> &[DVector<f64>] {
        &self.q
    }

    /// Orthogonalizes `col` against the current basis and appends it.
    /// Returns false (and leaves the factorization unchanged) when `col` is
    /// numerically dependent on the columns already present.
    pub fn try_push(&mut self, col: &DVector<f64>) -> bool {
        let mut v = col.clone();
        let k = self.q.len();
        let mut coeffs = vec![0.0; k];
        // Two MGS passes; the second mops up cancellation error.
        for _ in 0..2 {
            for (i, q) in self.q.iter().enumerate() {
                let h = q.dot(&v);
                coeffs[i] += h;
                v.axpy(-h, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= self.rank_tol {
            return false;
        }
        v /= norm;
        self.q.push(v);
        coeffs.push(norm);
        self.r.push(coeffs);
        true
    }

    /// Solves `min ||A x - y||` for the pushed columns A; coefficients come
    /// back in push order.
    pub fn solve(&self, y: &DVector<f64>) -> Vec<f64> {
        let k = self.q.len();
        let qty: Vec<f64> = self.q.iter().map(|q| q.dot(y)).collect();
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for j in (i + 1)..k {
                s -= self.r[j][i] * x[j];
            }
            x[i] = s / self.r[i][i];
        }
        x
    }
}

/// Dominant rank-1 approximation of the matrix whose columns are `cols`,
/// by power iteration warm-started at `init` (assumed unit norm).
///
/// Returns the unit left vector `u` and the row of coefficients `sigma * v`,
/// so that `cols[i] ~= u * coeffs[i]`. A zero matrix (or one orthogonal to
/// `init` to working precision) yields `(init, zeros)`.
pub fn rank1_approx(
    cols: &[DVector<f64>],
    init: &DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> (DVector<f64>, Vec<f64>) {
    let mut u = init.clone();
    let mut coeffs = vec![0.0; cols.len()];
    for _ in 0..max_iter {
        let v_raw: Vec<f64> = cols.iter().map(|c| c.dot(&u)).collect();
        let v_norm = v_raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if v_norm < 1e-300 {
            return (u, vec![0.0; cols.len()]);
        }
        let mut u_raw = DVector::zeros(u.len());
        for (c, &v) in cols.iter().zip(&v_raw) {
            u_raw.axpy(v / v_norm, c, 1.0);
        }
        let sigma = u_raw.norm();
        if sigma < 1e-300 {
            return (u, vec![0.0; cols.len()]);
        }
        let u_new = u_raw / sigma;
        let delta = (&u_new - &u).norm();
        coeffs = v_raw.iter().map(|v| v / v_norm * sigma).collect();
        u = u_new;
        if delta <= tol {
            break;
        }
    }
    (u, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn qr_solves_small_least_squares() {
        // Overdetermined 4x2 with known normal-equations solution.
        let a = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0, 3.0]);
        let y = DVector::from_column_slice(&[1.0, 2.0, 2.0, 4.0]);
        let mut qr = IncrementalQr::new(1e-10);
        assert!(qr.try_push(&a.column(0).into_owned()));
        assert!(qr.try_push(&a.column(1).into_owned()));
        let x = qr.solve(&y);
        // Normal equations: [4 6; 6 14] x = [9; 18]
        let expected = [(9.0 * 14.0 - 18.0 * 6.0) / 20.0, (4.0 * 18.0 - 6.0 * 9.0) / 20.0];
        assert!((x[0] - expected[0]).abs() < 1e-12);
        assert!((x[1] - expected[1]).abs() < 1e-12);
    }

    #[test]
    fn qr_rejects_dependent_column() {
        let c0 = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let c1 = &c0 * 2.0;
        let mut qr = IncrementalQr::new(1e-10);
        assert!(qr.try_push(&c0));
        assert!(!qr.try_push(&c1));
        assert_eq!(qr.len(), 1);
    }

    #[test]
    fn rank1_recovers_exact_rank1_matrix() {
        let u = DVector::from_column_slice(&[0.6, 0.0, 0.8]);
        let weights = [2.0, -1.0, 0.5, 3.0];
        let cols: Vec<DVector<f64>> = weights.iter().map(|w| &u * *w).collect();
        let init = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let (got_u, got_c) = rank1_approx(&cols, &init, 50, 1e-14);
        let sign = if got_u[0] * u[0] < 0.0 { -1.0 } else { 1.0 };
        assert!((got_u * sign - u).norm() < 1e-10);
        for (g, w) in got_c.iter().zip(weights.iter()) {
            assert!((g * sign - w).abs() < 1e-10);
        }
    }
}
