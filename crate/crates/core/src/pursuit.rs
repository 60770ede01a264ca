//! Greedy sparse coders: Matching Pursuit, Orthogonal Matching Pursuit and
//! Stagewise OMP.
//!
//! All three are pure functions of (dictionary, signal, config); argmax ties
//! break toward the lowest column index so results are deterministic.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::io as binio;
use crate::linalg::IncrementalQr;

/// Rank tolerance for the least-squares inner solves.
const RANK_TOL: f64 = 1e-10;

/// Truncation threshold separating "raw" from "effective" non-zeros.
pub const DENSITY_EPS: f64 = 1e-10;

/// A sparse representation of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    /// Dense coefficient vector, length = atom count.
    pub coeffs: DVector<f64>,
    /// Selected column indices, in selection order, no duplicates.
    pub support: Vec<usize>,
    /// `||y - D coeffs||_2` at termination.
    pub residual_norm: f64,
    /// Iterations (MP/OMP) or stages (StOMP) or sweeps (convex solvers) used.
    pub iterations: usize,
    pub flag: Option<CodeFlag>,
}

/// Non-fatal conditions an encoder can report alongside its result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFlag {
    /// StOMP selected nothing in its first stage.
    NoAtomsAboveThreshold,
    /// OMP/StOMP hit a numerically dependent atom and stopped early.
    RankDeficientStop,
}

impl SparseCode {
    pub fn zero(m: usize) -> Self {
        Self {
            coeffs: DVector::zeros(m),
            support: Vec::new(),
            residual_norm: 0.0,
            iterations: 0,
            flag: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Count of coefficients that are non-zero as stored.
    pub fn nnz_raw(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0.0).count()
    }

    /// Count of coefficients above the truncation threshold.
    pub fn nnz_truncated(&self, eps: f64) -> usize {
        self.coeffs.iter().filter(|&&c| c.abs() > eps).count()
    }

    /// Fraction of raw non-zeros, the "sparsity %" before truncation.
    pub fn density_raw(&self) -> f64 {
        self.nnz_raw() as f64 / self.dim() as f64
    }

    pub fn density_truncated(&self, eps: f64) -> f64 {
        self.nnz_truncated(eps) as f64 / self.dim() as f64
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Recomputes `||y - D coeffs||_2` from scratch.
    pub fn recompute_residual_norm(&self, d: &Dictionary, y: &DVector<f64>) -> f64 {
        (y - d.atoms() * &self.coeffs).norm()
    }
}

/// Stopping rules for the greedy coders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitConfig {
    /// Iteration cap; `None` picks the per-algorithm default (MP: m,
    /// OMP: min(p, m)). OMP never runs more than min(p, m) iterations.
    pub max_iter: Option<usize>,
    pub residual_tol: f64,
    /// StOMP selection threshold t; a stage keeps atoms with
    /// `|c_j| > t * ||r|| / sqrt(p)`.
    pub stomp_threshold: f64,
    pub stomp_stages: usize,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        Self { max_iter: None, residual_tol: 1e-6, stomp_threshold: 2.5, stomp_stages: 10 }
    }
}

impl PursuitConfig {
    pub fn with_max_iter(max_iter: usize) -> Self {
        Self { max_iter: Some(max_iter), ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if self.residual_tol < 0.0 {
            return Err(Error::InvalidParameter("residual_tol must be non-negative".into()));
        }
        if self.stomp_threshold <= 0.0 {
            return Err(Error::InvalidParameter("stomp_threshold must be positive".into()));
        }
        if self.stomp_stages == 0 {
            return Err(Error::InvalidParameter("stomp_stages must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_signal(mat: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if y.len() != mat.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "signal has dim {}, dictionary atoms have dim {}",
            y.len(),
            mat.nrows()
        )));
    }
    Ok(())
}

/// Argmax of |c_j| over columns not marked in `skip`; ties break to the
/// lowest index. Returns `None` when every candidate correlation is zero.
fn argmax_abs(c: &DVector<f64>, skip: Option<&[bool]>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..c.len() {
        if let Some(mask) = skip {
            if mask[j] {
                continue;
            }
        }
        let a = c[j].abs();
        match best {
            Some((_, b)) if a <= b.abs() => {}
            _ => best = Some((j, c[j])),
        }
    }
    match best {
        Some((_, v)) if v == 0.0 => None,
        other => other,
    }
}

/// Matching Pursuit: repeatedly adds `<d_j, r>` times the best-correlated
/// atom to the code. Atoms may be reselected.
pub fn mp_encode(d: &Dictionary, y: &DVector<f64>, cfg: &PursuitConfig) -> Result<SparseCode> {
    mp_encode_mat(d.atoms(), y, cfg)
}

pub(crate) fn mp_encode_mat(
    mat: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &PursuitConfig,
) -> Result<SparseCode> {
    cfg.validate()?;
    check_signal(mat, y)?;
    let m = mat.ncols();
    let max_iter = cfg.max_iter.unwrap_or(m);

    let mut coeffs = DVector::zeros(m);
    let mut residual = y.clone();
    let mut support = Vec::new();
    let mut in_support = vec![false; m];
    let mut iterations = 0;

    while iterations < max_iter && residual.norm() > cfg.residual_tol {
        let correlations = mat.tr_mul(&residual);
        let Some((j, cj)) = argmax_abs(&correlations, None) else {
            break; // residual orthogonal to every atom
        };
        coeffs[j] += cj;
        residual.axpy(-cj, &mat.column(j).into_owned(), 1.0);
        if !in_support[j] {
            in_support[j] = true;
            support.push(j);
        }
        iterations += 1;
    }

    let residual_norm = (y - mat * &coeffs).norm();
    Ok(SparseCode { coeffs, support, residual_norm, iterations, flag: None })
}

/// Orthogonal Matching Pursuit: never reselects an atom; after each
/// selection the coefficients are the least squares fit on the support, so
/// the residual stays orthogonal to every selected atom.
pub fn omp_encode(d: &Dictionary, y: &DVector<f64>, cfg: &PursuitConfig) -> Result<SparseCode> {
    omp_encode_mat(d.atoms(), y, cfg)
}

pub(crate) fn omp_encode_mat(
    mat: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &PursuitConfig,
) -> Result<SparseCode> {
    cfg.validate()?;
    check_signal(mat, y)?;
    let (p, m) = (mat.nrows(), mat.ncols());
    let cap = p.min(m);
    let max_iter = cfg.max_iter.unwrap_or(cap).min(cap);

    let mut residual = y.clone();
    let mut support: Vec<usize> = Vec::new();
    let mut selected = vec![false; m];
    let mut qr = IncrementalQr::new(RANK_TOL);
    let mut solution: Vec<f64> = Vec::new();
    let mut flag = None;
    let mut iterations = 0;

    while iterations < max_iter && residual.norm() > cfg.residual_tol {
        let correlations = mat.tr_mul(&residual);
        let Some((j, _)) = argmax_abs(&correlations, Some(&selected)) else {
            break;
        };
        if !qr.try_push(&mat.column(j).into_owned()) {
            log::warn!("omp: atom {j} is dependent on the current support; stopping");
            flag = Some(CodeFlag::RankDeficientStop);
            break;
        }
        selected[j] = true;
        support.push(j);
        solution = qr.solve(y);
        residual = y.clone();
        for (&idx, &x) in support.iter().zip(&solution) {
            residual.axpy(-x, &mat.column(idx).into_owned(), 1.0);
        }
        iterations += 1;
    }

    let mut coeffs = DVector::zeros(m);
    for (&idx, &x) in support.iter().zip(&solution) {
        coeffs[idx] = x;
    }
    Ok(SparseCode { coeffs, support, residual_norm: residual.norm(), iterations, flag })
}

/// Stagewise OMP: each stage keeps every unselected atom whose correlation
/// clears `t * ||r|| / sqrt(p)`, then re-solves least squares on the merged
/// support. Stops when a stage selects nothing, the residual tolerance is
/// met, or the stage budget runs out.
pub fn stomp_encode(d: &Dictionary, y: &DVector<f64>, cfg: &PursuitConfig) -> Result<SparseCode> {
    stomp_encode_mat(d.atoms(), y, cfg)
}

pub(crate) fn stomp_encode_mat(
    mat: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &PursuitConfig,
) -> Result<SparseCode> {
    cfg.validate()?;
    check_signal(mat, y)?;
    let (p, m) = (mat.nrows(), mat.ncols());

    let mut residual = y.clone();
    let mut support: Vec<usize> = Vec::new();
    let mut selected = vec![false; m];
    let mut qr = IncrementalQr::new(RANK_TOL);
    let mut solution: Vec<f64> = Vec::new();
    let mut flag = None;
    let mut stages = 0;

    for stage in 1..=cfg.stomp_stages {
        let r_norm = residual.norm();
        if r_norm <= cfg.residual_tol {
            break;
        }
        let correlations = mat.tr_mul(&residual);
        let sigma = r_norm / (p as f64).sqrt();
        let threshold = cfg.stomp_threshold * sigma;
        let picks: Vec<usize> = (0..m)
            .filter(|&j| !selected[j] && correlations[j].abs() > threshold)
            .collect();
        if picks.is_empty() {
            if stage == 1 && support.is_empty() {
                flag = Some(CodeFlag::NoAtomsAboveThreshold);
            }
            break;
        }
        let mut grew = false;
        for j in picks {
            if qr.try_push(&mat.column(j).into_owned()) {
                selected[j] = true;
                support.push(j);
                grew = true;
            } else {
                log::warn!("stomp: atom {j} is dependent on the current support; dropped");
                flag = Some(CodeFlag::RankDeficientStop);
            }
        }
        if !grew {
            break;
        }
        solution = qr.solve(y);
        residual = y.clone();
        for (&idx, &x) in support.iter().zip(&solution) {
            residual.axpy(-x, &mat.column(idx).into_owned(), 1.0);
        }
        stages = stage;
    }

    let mut coeffs = DVector::zeros(m);
    for (&idx, &x) in support.iter().zip(&solution) {
        coeffs[idx] = x;
    }
    Ok(SparseCode { coeffs, support, residual_norm: residual.norm(), iterations: stages, flag })
}

// ---------------------------------------------------------------------------
// Codes file format
// ---------------------------------------------------------------------------

const CODES_MAGIC: &[u8; 8] = b"SACODE01";
const CODES_LIMIT: usize = 1 << 24;

/// Codes file: magic, u32 n, u32 m, then per code: u32 entry count,
/// entries as (u32 index, f64 value) sorted by index, f64 residual norm.
///
/// Only coefficients and the residual norm survive a round trip; iteration
/// counts and flags are in-memory diagnostics.
pub fn save_codes(codes: &[SparseCode], m: usize, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, CODES_MAGIC)?;
    binio::write_u32(&mut w, codes.len() as u32)?;
    binio::write_u32(&mut w, m as u32)?;
    for code in codes {
        if code.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "code has dim {}, expected {m}",
                code.dim()
            )));
        }
        let mut entries: Vec<usize> = code.support.clone();
        entries.sort_unstable();
        binio::write_u32(&mut w, entries.len() as u32)?;
        for idx in entries {
            binio::write_u32(&mut w, idx as u32)?;
            binio::write_f64(&mut w, code.coeffs[idx])?;
        }
        binio::write_f64(&mut w, code.residual_norm)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_codes(path: &Path) -> Result<Vec<SparseCode>> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, CODES_MAGIC)?;
    let n = binio::read_len(&mut r, CODES_LIMIT, "code count")?;
    let m = binio::read_len(&mut r, CODES_LIMIT, "code dimension")?;
    let mut codes = Vec::with_capacity(n);
    for _ in 0..n {
        let nnz = binio::read_len(&mut r, m, "entry count")?;
        let mut coeffs = DVector::zeros(m);
        let mut support = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let idx = binio::read_len(&mut r, m.saturating_sub(1), "atom index")?;
            coeffs[idx] = binio::read_f64(&mut r)?;
            support.push(idx);
        }
        let residual_norm = binio::read_f64(&mut r)?;
        codes.push(SparseCode { coeffs, support, residual_norm, iterations: 0, flag: None });
    }
    Ok(codes)
}

/// Long-format CSV debug export: `code,atom,value`.
pub fn export_codes_csv(codes: &[SparseCode], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "code,atom,value")?;
    for (i, code) in codes.iter().enumerate() {
        let mut entries = code.support.clone();
        entries.sort_unstable();
        for idx in entries {
            writeln!(w, "{i},{idx},{}", code.coeffs[idx])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back the CSV debug export (for tooling round trips).
pub fn import_codes_csv(path: &Path, n: usize, m: usize) -> Result<Vec<SparseCode>> {
    let r = BufReader::new(File::open(path)?);
    let mut codes = vec![SparseCode::zero(m); n];
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(ci), Some(ai), Some(v)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format(format!("codes csv line {}: bad row", lineno + 1)));
        };
        let ci: usize = ci
            .parse()
            .map_err(|_| Error::Format(format!("codes csv line {}: bad code id", lineno + 1)))?;
        let ai: usize = ai
            .parse()
            .map_err(|_| Error::Format(format!("codes csv line {}: bad atom id", lineno + 1)))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Format(format!("codes csv line {}: bad value", lineno + 1)))?;
        if ci >= n || ai >= m {
            return Err(Error::Format(format!("codes csv line {}: index out of range", lineno + 1)));
        }
        codes[ci].coeffs[ai] = v;
        codes[ci].support.push(ai);
    }
    Ok(codes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::Dictionary;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn gaussian_dict(p: usize, m: usize, seed: u64) -> Dictionary {
        let mut rng = crate::SeededRng::seed_from_u64(seed);
        let mut mat = DMatrix::zeros(p, m);
        for j in 0..m {
            for i in 0..p {
                mat[(i, j)] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        let (d, replaced) = Dictionary::from_unnormalized(mat, seed).unwrap();
        assert!(replaced.is_empty());
        d
    }

    /// Orthonormal dictionary from the QR of a seeded Gaussian matrix.
    fn orthonormal_dict(p: usize, seed: u64) -> Dictionary {
        let mut rng = crate::SeededRng::seed_from_u64(seed);
        let mat = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = mat.qr().q();
        Dictionary::new(q).unwrap()
    }

    #[test]
    fn mp_single_atom_signal() {
        let d = gaussian_dict(8, 12, 1);
        let y = d.atoms().column(5) * 2.0;
        let code = mp_encode(&d, &y.into_owned(), &PursuitConfig::default()).unwrap();
        assert_eq!(code.support, vec![5]);
        assert!((code.coeffs[5] - 2.0).abs() < 1e-12);
        assert!(code.residual_norm <= 1e-12);
        assert_eq!(code.iterations, 1);
    }

    #[test]
    fn mp_orthogonal_signal_gives_zero_code() {
        // p=4, m=2: atoms e1, e2; signal e3 is orthogonal to both.
        let mat = DMatrix::from_column_slice(
            4,
            2,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        );
        let d = Dictionary::new(mat).unwrap();
        let y = DVector::from_column_slice(&[0.0, 0.0, 3.0, 0.0]);
        let code = mp_encode(&d, &y, &PursuitConfig::default()).unwrap();
        assert!(code.support.is_empty());
        assert_eq!(code.nnz_raw(), 0);
        assert!((code.residual_norm - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mp_and_omp_residuals_decrease_monotonically() {
        let d = gaussian_dict(16, 32, 7);
        let mut rng = crate::SeededRng::seed_from_u64(77);
        let mut x = DVector::zeros(32);
        for &j in &[3usize, 11, 29] {
            x[j] = rng.random::<f64>() + 0.5;
        }
        let y = d.atoms() * x;
        // Prefix runs: encoding with max_iter=k is a prefix of max_iter=k+1.
        for encode in [mp_encode, omp_encode] {
            let mut prev = f64::INFINITY;
            for k in 1..=12 {
                let cfg = PursuitConfig {
                    max_iter: Some(k),
                    residual_tol: 0.0,
                    ..Default::default()
                };
                let code = encode(&d, &y, &cfg).unwrap();
                assert!(
                    code.residual_norm <= prev + 1e-12,
                    "residual rose at iteration {k}: {} -> {}",
                    prev,
                    code.residual_norm
                );
                prev = code.residual_norm;
            }
        }
    }

    #[test]
    fn omp_single_atom_signal() {
        let d = gaussian_dict(8, 12, 2);
        let y = d.atoms().column(5) * 2.0;
        let code = omp_encode(&d, &y.into_owned(), &PursuitConfig::default()).unwrap();
        assert_eq!(code.support, vec![5]);
        assert!((code.coeffs[5] - 2.0).abs() < 1e-12);
        assert!(code.residual_norm <= 1e-12);
    }

    #[test]
    fn omp_support_is_distinct_and_residual_orthogonal() {
        let d = gaussian_dict(20, 40, 3);
        let mut rng = crate::SeededRng::seed_from_u64(33);
        let y = DVector::from_fn(20, |_, _| rng.sample::<f64, _>(StandardNormal));
        let cfg = PursuitConfig { max_iter: Some(9), residual_tol: 0.0, ..Default::default() };
        let code = omp_encode(&d, &y, &cfg).unwrap();
        let mut sorted = code.support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), code.support.len(), "support has duplicates");
        assert!(code.support.len() <= 9);
        let residual = y - d.atoms() * &code.coeffs;
        for &j in &code.support {
            let dot = d.atoms().column(j).dot(&residual);
            assert!(dot.abs() <= 1e-8, "atom {j} not orthogonal to residual: {dot}");
        }
    }

    #[test]
    fn omp_first_pick_is_best_correlation_and_density_matches_budget() {
        let d = gaussian_dict(100, 1000, 4);
        let mut rng = crate::SeededRng::seed_from_u64(44);
        let y = DVector::from_fn(100, |_, _| rng.sample::<f64, _>(StandardNormal));
        let cfg = PursuitConfig { max_iter: Some(19), residual_tol: 0.0, ..Default::default() };
        let code = omp_encode(&d, &y, &cfg).unwrap();
        // First selected atom is the argmax correlation with y itself.
        let c0 = d.atoms().tr_mul(&y);
        let best = (0..1000).max_by(|&a, &b| c0[a].abs().partial_cmp(&c0[b].abs()).unwrap());
        assert_eq!(code.support[0], best.unwrap());
        // 19 iterations on 1000 atoms -> 1.9% density.
        assert_eq!(code.nnz_raw(), 19);
        assert!((code.density_raw() - 0.019).abs() < 1e-12);
    }

    #[test]
    fn omp_matches_brute_force_two_sparse_oracle() {
        let d = gaussian_dict(8, 16, 5);
        let mut x = DVector::zeros(16);
        x[4] = 3.0;
        x[11] = -1.5;
        let y = d.atoms() * &x;
        let cfg = PursuitConfig { max_iter: Some(2), residual_tol: 1e-9, ..Default::default() };
        let code = omp_encode(&d, &y, &cfg).unwrap();
        let mut got = code.support.clone();
        got.sort_unstable();

        // Oracle: enumerate all C(16,2) supports, solve 2x2 normal equations,
        // keep the smallest residual.
        let mut best = (f64::INFINITY, vec![]);
        for a in 0..16 {
            for b in (a + 1)..16 {
                let da = d.atoms().column(a);
                let db = d.atoms().column(b);
                let (g11, g12, g22) = (da.dot(&da), da.dot(&db), db.dot(&db));
                let (b1, b2) = (da.dot(&y), db.dot(&y));
                let det = g11 * g22 - g12 * g12;
                let xa = (b1 * g22 - b2 * g12) / det;
                let xb = (g11 * b2 - g12 * b1) / det;
                let res = (&y - da * xa - db * xb).norm_squared();
                if res < best.0 {
                    best = (res, vec![a, b]);
                }
            }
        }
        assert_eq!(got, best.1);
    }

    #[test]
    fn stomp_selects_single_dominant_atom() {
        let d = orthonormal_dict(16, 6);
        let y = d.atoms().column(5) * 2.0;
        let code = stomp_encode(&d, &y.into_owned(), &PursuitConfig::default()).unwrap();
        assert_eq!(code.support, vec![5]);
        assert_eq!(code.iterations, 1);
        assert!(code.residual_norm <= 1e-12);
    }

    #[test]
    fn stomp_support_is_scale_invariant() {
        let d = gaussian_dict(32, 64, 8);
        let mut x = DVector::zeros(64);
        for &j in &[2usize, 17, 40, 58] {
            x[j] = 1.0;
        }
        let y = d.atoms() * &x;
        let cfg = PursuitConfig { stomp_threshold: 2.0, ..Default::default() };
        let base = stomp_encode(&d, &y, &cfg).unwrap();
        let scaled = stomp_encode(&d, &(&y * 3.7), &cfg).unwrap();
        assert_eq!(base.support, scaled.support);
    }

    #[test]
    fn stomp_empty_first_stage_sets_flag() {
        // Signal built so every |correlation| = 1/4 < 2.5 * sigma = 0.625.
        let d = orthonormal_dict(16, 9);
        let spread = DVector::from_element(16, 0.25);
        let y = d.atoms() * spread;
        let code = stomp_encode(&d, &y, &PursuitConfig::default()).unwrap();
        assert_eq!(code.flag, Some(CodeFlag::NoAtomsAboveThreshold));
        assert_eq!(code.nnz_raw(), 0);
        assert!((code.residual_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = gaussian_dict(8, 12, 10);
        let y = DVector::zeros(7);
        for encode in [mp_encode, omp_encode, stomp_encode] {
            assert!(matches!(
                encode(&d, &y, &PursuitConfig::default()),
                Err(Error::DimensionMismatch(_))
            ));
        }
    }

    #[test]
    fn encoders_are_deterministic() {
        let d = gaussian_dict(16, 40, 11);
        let mut rng = crate::SeededRng::seed_from_u64(111);
        let y = DVector::from_fn(16, |_, _| rng.sample::<f64, _>(StandardNormal));
        for encode in [mp_encode, omp_encode, stomp_encode] {
            let a = encode(&d, &y, &PursuitConfig::default()).unwrap();
            let b = encode(&d, &y, &PursuitConfig::default()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn codes_file_roundtrip() {
        let d = gaussian_dict(10, 20, 12);
        let mut rng = crate::SeededRng::seed_from_u64(13);
        let codes: Vec<SparseCode> = (0..5)
            .map(|_| {
                let y = DVector::from_fn(10, |_, _| rng.sample::<f64, _>(StandardNormal));
                omp_encode(&d, &y, &PursuitConfig::with_max_iter(3)).unwrap()
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("codes.sacode");
        save_codes(&codes, 20, &path).unwrap();
        let back = load_codes(&path).unwrap();
        assert_eq!(back.len(), codes.len());
        for (a, b) in codes.iter().zip(&back) {
            assert_eq!(a.coeffs, b.coeffs);
            assert_eq!(a.residual_norm, b.residual_norm);
            let mut sa = a.support.clone();
            sa.sort_unstable();
            assert_eq!(sa, b.support);
        }
    }
}
