//! The overcomplete dictionary and its K-SVD trainer.
//!
//! Atoms are unit-norm columns of a `p x m` matrix, typically with `m > p`.
//! An optional block partition (contiguous, disjoint, covering) supports the
//! non-zero-concentration detector and blocked sub-dictionary projections.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::io as binio;
use crate::linalg::rank1_approx;
use crate::parallel;
use crate::pursuit::{self, PursuitConfig};
use crate::SeededRng;

/// Unit-norm tolerance enforced on every atom.
pub const ATOM_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
    blocks: Option<Vec<Range<usize>>>,
}

impl Dictionary {
    /// Wraps a matrix whose columns are already unit norm (within
    /// [`ATOM_NORM_TOL`]).
    pub fn new(atoms: DMatrix<f64>) -> Result<Self> {
        if atoms.nrows() == 0 || atoms.ncols() == 0 {
            return Err(Error::InvalidParameter("dictionary must be at least 1x1".into()));
        }
        for j in 0..atoms.ncols() {
            let norm = atoms.column(j).norm();
            if (norm - 1.0).abs() > ATOM_NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "atom {j} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self { atoms, blocks: None })
    }

    /// Normalizes columns first; zero columns are replaced by seeded random
    /// unit vectors. Returns the dictionary and the replaced column indices.
    pub fn from_unnormalized(atoms: DMatrix<f64>, seed: u64) -> Result<(Self, Vec<usize>)> {
        if atoms.nrows() == 0 || atoms.ncols() == 0 {
            return Err(Error::InvalidParameter("dictionary must be at least 1x1".into()));
        }
        let (normalized, replaced) = normalize_columns(atoms, seed);
        Ok((Self { atoms: normalized, blocks: None }, replaced))
    }

    pub fn p(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn m(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn atom(&self, j: usize) -> DVector<f64> {
        self.atoms.column(j).into_owned()
    }

    pub fn blocks(&self) -> Option<&[Range<usize>]> {
        self.blocks.as_deref()
    }

    /// Installs a block partition; ranges must tile `0..m` without gaps.
    pub fn set_blocks(&mut self, blocks: Vec<Range<usize>>) -> Result<()> {
        validate_blocks(self.m(), &blocks)?;
        self.blocks = Some(blocks);
        Ok(())
    }

    pub fn clear_blocks(&mut self) {
        self.blocks = None;
    }

    /// Partitions the atoms into `b` contiguous near-equal blocks.
    pub fn with_equal_blocks(mut self, b: usize) -> Result<Self> {
        self.set_blocks(equal_blocks(self.m(), b)?)?;
        Ok(self)
    }
}

/// Splits `0..m` into `b` contiguous blocks whose sizes differ by at most 1.
pub fn equal_blocks(m: usize, b: usize) -> Result<Vec<Range<usize>>> {
    if b == 0 || b > m {
        return Err(Error::InvalidBlocks(format!("cannot split {m} atoms into {b} blocks")));
    }
    let (base, extra) = (m / b, m % b);
    let mut blocks = Vec::with_capacity(b);
    let mut start = 0;
    for i in 0..b {
        let len = base + usize::from(i < extra);
        blocks.push(start..start + len);
        start += len;
    }
    Ok(blocks)
}

fn validate_blocks(m: usize, blocks: &[Range<usize>]) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::InvalidBlocks("no blocks".into()));
    }
    let mut sorted: Vec<&Range<usize>> = blocks.iter().collect();
    sorted.sort_by_key(|r| r.start);
    let mut cursor = 0;
    for r in sorted {
        if r.is_empty() {
            return Err(Error::InvalidBlocks(format!("empty block {r:?}")));
        }
        if r.start != cursor {
            return Err(Error::InvalidBlocks(format!(
                "blocks must tile 0..{m}; gap or overlap at index {cursor}"
            )));
        }
        cursor = r.end;
    }
    if cursor != m {
        return Err(Error::InvalidBlocks(format!("blocks cover 0..{cursor}, expected 0..{m}")));
    }
    Ok(())
}

/// Scales every column to unit L2 norm. Zero columns are replaced with
/// seeded random unit vectors (deterministic per seed) and reported.
pub fn normalize_columns(mut atoms: DMatrix<f64>, seed: u64) -> (DMatrix<f64>, Vec<usize>) {
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut replaced = Vec::new();
    for j in 0..atoms.ncols() {
        let norm = atoms.column(j).norm();
        if norm <= f64::MIN_POSITIVE {
            let v = random_unit_vector(atoms.nrows(), &mut rng);
            atoms.set_column(j, &v);
            replaced.push(j);
            log::warn!("dictionary column {j} was zero; replaced with a seeded random unit vector");
        } else {
            let mut col = atoms.column_mut(j);
            col /= norm;
        }
    }
    (atoms, replaced)
}

fn random_unit_vector(p: usize, rng: &mut SeededRng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// K-SVD hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub atom_count: usize,
    /// Max non-zeros per training code (the OMP budget T).
    pub sparsity: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Early-stop threshold on the per-sweep improvement of the total
    /// squared reconstruction error.
    pub tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { atom_count: 1000, sparsity: 8, sweeps: 20, seed: 0, tol: 1e-8 }
    }
}

/// K-SVD output: the dictionary plus the total squared reconstruction error
/// logged at the end of every sweep.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub dictionary: Dictionary,
    pub sweep_errors: Vec<f64>,
}

/// Learns an overcomplete dictionary with K-SVD.
///
/// Per sweep: every training row is re-coded with OMP at sparsity `T`
/// (keeping the previous code when it reconstructs better, so the coding
/// stage can never increase the objective), then each atom in turn is
/// replaced by the dominant rank-1 factor of its restricted residual matrix.
/// Atoms no code uses are re-seeded from the worst-reconstructed rows. The
/// total squared error is therefore non-increasing sweep over sweep, and the
/// whole procedure is deterministic given the seed.
pub fn ksvd_train(features: &FeatureMatrix, cfg: &TrainConfig) -> Result<TrainResult> {
    let n = features.n();
    let p = features.dim();
    if n == 0 || p == 0 {
        return Err(Error::NoTrainingData);
    }
    if cfg.atom_count == 0 {
        return Err(Error::InvalidParameter("atom_count must be at least 1".into()));
    }
    if cfg.sparsity == 0 || cfg.sparsity >= p {
        return Err(Error::InvalidParameter(format!(
            "sparsity T={} must satisfy 1 <= T < p={p}",
            cfg.sparsity
        )));
    }
    if cfg.sweeps == 0 {
        return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
    }

    let m = cfg.atom_count;
    let rows: Vec<DVector<f64>> = (0..n).map(|i| features.row_vector(i)).collect();
    let mut rng = SeededRng::seed_from_u64(cfg.seed);

    // Init: distinct training rows (normalized), padded with random unit
    // vectors when there are fewer rows than atoms.
    let mut atoms = DMatrix::zeros(p, m);
    let picked = sample_distinct(n, m.min(n), &mut rng);
    for (j, &row_idx) in picked.iter().enumerate() {
        let norm = rows[row_idx].norm();
        if norm <= f64::MIN_POSITIVE {
            atoms.set_column(j, &random_unit_vector(p, &mut rng));
        } else {
            atoms.set_column(j, &(&rows[row_idx] / norm));
        }
    }
    for j in picked.len()..m {
        atoms.set_column(j, &random_unit_vector(p, &mut rng));
    }

    let omp_cfg = PursuitConfig {
        max_iter: Some(cfg.sparsity),
        residual_tol: 0.0,
        ..Default::default()
    };

    // codes[i]: sparse (atom, coefficient) pairs; residuals[i] = y_i - D x_i.
    let mut codes: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut residuals: Vec<DVector<f64>> = rows.clone();
    let mut sweep_errors = Vec::with_capacity(cfg.sweeps);

    for sweep in 0..cfg.sweeps {
        // Sparse coding stage, data-parallel over rows with a read-only D.
        let coded: Vec<(Vec<(usize, f64)>, DVector<f64>)> = {
            let atoms_ref = &atoms;
            let codes_ref = &codes;
            let rows_ref = &rows;
            let residuals_ref = &residuals;
            parallel::map_indexed(n, move |i| {
                let y = &rows_ref[i];
                let cand = pursuit::omp_encode_mat(atoms_ref, y, &omp_cfg)
                    .expect("dimensions are consistent by construction");
                let prev_sq = residuals_ref[i].norm_squared();
                if sweep > 0 && prev_sq < cand.residual_norm * cand.residual_norm {
                    // Previous code still reconstructs better; keep it.
                    (codes_ref[i].clone(), residuals_ref[i].clone())
                } else {
                    let pairs: Vec<(usize, f64)> =
                        cand.support.iter().map(|&j| (j, cand.coeffs[j])).collect();
                    let mut r = y.clone();
                    for &(j, c) in &pairs {
                        r.axpy(-c, &atoms_ref.column(j).into_owned(), 1.0);
                    }
                    (pairs, r)
                }
            })
        };
        for (i, (pairs, r)) in coded.into_iter().enumerate() {
            codes[i] = pairs;
            residuals[i] = r;
        }

        // Which rows use each atom.
        let mut occupancy: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (i, pairs) in codes.iter().enumerate() {
            for &(j, _) in pairs {
                occupancy[j].push(i);
            }
        }

        // Atom update stage: dominant rank-1 factor of the restricted
        // residual matrix, warm-started at the current atom so each update
        // can only reduce the objective.
        let mut dead = Vec::new();
        for j in 0..m {
            if occupancy[j].is_empty() {
                dead.push(j);
                continue;
            }
            let users = &occupancy[j];
            let atom = atoms.column(j).into_owned();
            let cols: Vec<DVector<f64>> = users
                .iter()
                .map(|&i| {
                    let x_ij = codes[i]
                        .iter()
                        .find(|&&(a, _)| a == j)
                        .map(|&(_, c)| c)
                        .unwrap_or(0.0);
                    &residuals[i] + &atom * x_ij
                })
                .collect();
            let (mut u, mut coeffs) = rank1_approx(&cols, &atom, 40, 1e-13);
            // Fix the SVD sign: first non-negligible entry of the atom positive.
            if let Some(first) = u.iter().find(|v| v.abs() > 1e-12) {
                if *first < 0.0 {
                    u = -u;
                    for c in &mut coeffs {
                        *c = -*c;
                    }
                }
            }
            atoms.set_column(j, &u);
            for ((&i, col), &c_new) in users.iter().zip(&cols).zip(&coeffs) {
                for entry in codes[i].iter_mut() {
                    if entry.0 == j {
                        entry.1 = c_new;
                    }
                }
                residuals[i] = col - &u * c_new;
            }
        }

        // Re-seed unused atoms from the worst-reconstructed rows. Their
        // coefficients are all zero, so the objective is untouched.
        if !dead.is_empty() {
            let mut by_error: Vec<usize> = (0..n).collect();
            by_error.sort_by(|&a, &b| {
                residuals[b]
                    .norm_squared()
                    .partial_cmp(&residuals[a].norm_squared())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut next = 0;
            for j in dead {
                let mut assigned = false;
                while next < by_error.len() {
                    let row = &rows[by_error[next]];
                    next += 1;
                    let norm = row.norm();
                    if norm > f64::MIN_POSITIVE {
                        atoms.set_column(j, &(row / norm));
                        assigned = true;
                        break;
                    }
                }
                if !assigned {
                    atoms.set_column(j, &random_unit_vector(p, &mut rng));
                }
            }
        }

        let err: f64 = residuals.iter().map(|r| r.norm_squared()).sum();
        sweep_errors.push(err);
        if sweep > 0 {
            let prev = sweep_errors[sweep - 1];
            if prev - err <= cfg.tol {
                break;
            }
        } else if err <= cfg.tol {
            break;
        }
    }

    let dictionary = Dictionary::new(atoms)?;
    Ok(TrainResult { dictionary, sweep_errors })
}

/// First `k` entries of a seeded partial Fisher-Yates shuffle of `0..n`.
fn sample_distinct(n: usize, k: usize, rng: &mut SeededRng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

// ---------------------------------------------------------------------------
// Dictionary file format
// ---------------------------------------------------------------------------

const DICT_MAGIC: &[u8; 8] = b"SADICT01";
const DICT_LIMIT: usize = 1 << 24;

/// Binary layout: magic, then a CRC32-covered payload of u32 p, u32 m,
/// u32 block count, blocks as (u32 start, u32 len), and the p*m atom matrix
/// as column-major f64; the file ends with the payload CRC32.
pub fn save_dictionary(d: &Dictionary, path: &Path) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    // The magic sits outside the checksum so a corrupted magic reports as
    // BadMagic rather than ChecksumMismatch.
    binio::write_magic(&mut file, DICT_MAGIC)?;
    let mut w = binio::CrcWriter::new(file);
    binio::write_u32(&mut w, d.p() as u32)?;
    binio::write_u32(&mut w, d.m() as u32)?;
    let blocks = d.blocks().unwrap_or(&[]);
    binio::write_u32(&mut w, blocks.len() as u32)?;
    for b in blocks {
        binio::write_u32(&mut w, b.start as u32)?;
        binio::write_u32(&mut w, b.len() as u32)?;
    }
    for &v in d.atoms().iter() {
        binio::write_f64(&mut w, v)?;
    }
    let crc = w.crc();
    let mut file = w.into_inner();
    binio::write_u32(&mut file, crc)?;
    file.flush()?;
    Ok(())
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary> {
    let file = BufReader::new(File::open(path)?);
    let mut outer = file;
    binio::expect_magic(&mut outer, DICT_MAGIC)?;
    let mut r = binio::CrcReader::new(outer);
    let p = binio::read_len(&mut r, DICT_LIMIT, "feature dimension")?;
    let m = binio::read_len(&mut r, DICT_LIMIT, "atom count")?;
    if p == 0 || m == 0 {
        return Err(Error::Format(format!("dictionary dimensions {p}x{m} invalid")));
    }
    let b = binio::read_len(&mut r, m, "block count")?;
    let mut blocks = Vec::with_capacity(b);
    for _ in 0..b {
        let start = binio::read_len(&mut r, m, "block start")?;
        let len = binio::read_len(&mut r, m, "block length")?;
        blocks.push(start..start + len);
    }
    let mut atoms = DMatrix::zeros(p, m);
    for j in 0..m {
        for i in 0..p {
            atoms[(i, j)] = binio::read_f64(&mut r)?;
        }
    }
    let computed = r.crc();
    let mut inner = r.into_inner();
    let stored = binio::read_u32(&mut inner)?;
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    let mut d = Dictionary::new(atoms)?;
    if !blocks.is_empty() {
        d.set_blocks(blocks)?;
    }
    Ok(d)
}

/// CSV debug export, one atom (column) per line.
pub fn export_dictionary_csv(d: &Dictionary, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for j in 0..d.m() {
        let parts: Vec<String> = (0..d.p()).map(|i| d.atoms()[(i, j)].to_string()).collect();
        writeln!(w, "{}", parts.join(","))?;
    }
    w.flush()?;
    Ok(())
}
