//! Video ingestion and feature extraction.
//!
//! A grayscale clip is tiled into non-overlapping spatio-temporal cubes
//! (23x15 pixels by 5 frames by default). Each cube is summarized by
//! per-cell mean absolute 3D gradients: the cube is split into an 8x7x3
//! cell grid, each cell contributes (|Gx|, |Gy|, |Gt|) means, and the
//! concatenation is truncated to a 500-dimensional descriptor. Descriptors
//! can then be reduced with PCA (100 components by default).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::io as binio;
use crate::parallel;

/// Pixel-space footprint of a feature, `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

/// Where a feature vector came from in the source clip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Provenance {
    /// First frame of the cube.
    pub frame_index: u32,
    pub patch_row: u32,
    pub patch_col: u32,
    pub pixel_rect: PixelRect,
}

/// Feature vectors as rows, with per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
    provenance: Vec<Provenance>,
}

impl FeatureMatrix {
    pub fn new(data: DMatrix<f64>, provenance: Vec<Provenance>) -> Result<Self> {
        if data.nrows() != provenance.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows but {} provenance records",
                data.nrows(),
                provenance.len()
            )));
        }
        Ok(Self { data, provenance })
    }

    /// Builds a matrix from plain vectors with default provenance; handy for
    /// solver benchmarks where no video context exists.
    pub fn from_rows(rows: &[DVector<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::NoTrainingData);
        }
        let dim = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected feature dimension {dim}, found {}",
                bad.len()
            )));
        }
        let data = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        let provenance = (0..rows.len())
            .map(|i| Provenance { frame_index: i as u32, ..Default::default() })
            .collect();
        Ok(Self { data, provenance })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Owned copy of row `i` as a column vector.
    pub fn row_vector(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }
}

/// A grayscale clip, `frames x height x width`, intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct VideoTensor {
    t: usize,
    h: usize,
    w: usize,
    data: Vec<f32>,
}

impl VideoTensor {
    pub fn new(t: usize, h: usize, w: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != t * h * w {
            return Err(Error::DimensionMismatch(format!(
                "video payload has {} samples, expected {}x{}x{} = {}",
                data.len(),
                t,
                h,
                w,
                t * h * w
            )));
        }
        Ok(Self { t, h, w, data })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.t, self.h, self.w)
    }

    #[inline]
    pub fn get(&self, f: usize, r: usize, c: usize) -> f32 {
        self.data[(f * self.h + r) * self.w + c]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }
}

/// Cube geometry. Default stride equals the patch size, i.e. a
/// non-overlapping tiling; partial border patches are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeSpec {
    pub patch_w: usize,
    pub patch_h: usize,
    pub depth: usize,
    pub stride_x: usize,
    pub stride_y: usize,
    pub stride_t: usize,
}

impl Default for CubeSpec {
    fn default() -> Self {
        Self { patch_w: 23, patch_h: 15, depth: 5, stride_x: 23, stride_y: 15, stride_t: 5 }
    }
}

impl CubeSpec {
    pub fn validate(&self) -> Result<()> {
        let (gx, gy, gt) = CELL_GRID;
        if self.patch_w == 0 || self.patch_h == 0 || self.depth == 0 {
            return Err(Error::InvalidParameter("cube dimensions must be positive".into()));
        }
        if self.stride_x == 0 || self.stride_y == 0 || self.stride_t == 0 {
            return Err(Error::InvalidParameter("cube strides must be positive".into()));
        }
        if self.patch_w < gx || self.patch_h < gy || self.depth < gt {
            return Err(Error::InvalidParameter(format!(
                "cube {}x{}x{} smaller than the {}x{}x{} descriptor cell grid",
                self.patch_w, self.patch_h, self.depth, gx, gy, gt
            )));
        }
        Ok(())
    }

    pub fn voxels(&self) -> usize {
        self.patch_w * self.patch_h * self.depth
    }

    /// Number of (columns, rows, temporal slabs) the tiling produces.
    pub fn grid(&self, video: &VideoTensor) -> (usize, usize, usize) {
        let (t, h, w) = video.dims();
        let count = |len: usize, patch: usize, stride: usize| {
            if len < patch { 0 } else { (len - patch) / stride + 1 }
        };
        (
            count(w, self.patch_w, self.stride_x),
            count(h, self.patch_h, self.stride_y),
            count(t, self.depth, self.stride_t),
        )
    }
}

/// One raw spatio-temporal cube; `values` is laid out `[t][row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCube {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

/// Tiles the clip into cubes. Errors when the clip is shorter than the cube
/// depth or smaller than one patch.
pub fn extract_cubes(video: &VideoTensor, spec: &CubeSpec) -> Result<Vec<RawCube>> {
    spec.validate()?;
    let (t, h, w) = video.dims();
    if t < spec.depth {
        return Err(Error::DimensionMismatch(format!(
            "video has {t} frames, cube depth is {}",
            spec.depth
        )));
    }
    if h < spec.patch_h || w < spec.patch_w {
        return Err(Error::DimensionMismatch(format!(
            "frame {h}x{w} smaller than patch {}x{}",
            spec.patch_h, spec.patch_w
        )));
    }
    let (cols, rows, slabs) = spec.grid(video);
    let mut cubes = Vec::with_capacity(cols * rows * slabs);
    for slab in 0..slabs {
        let f0 = slab * spec.stride_t;
        for pr in 0..rows {
            let r0 = pr * spec.stride_y;
            for pc in 0..cols {
                let c0 = pc * spec.stride_x;
                let mut values = Vec::with_capacity(spec.voxels());
                for f in f0..f0 + spec.depth {
                    for r in r0..r0 + spec.patch_h {
                        for c in c0..c0 + spec.patch_w {
                            values.push(video.get(f, r, c) as f64);
                        }
                    }
                }
                cubes.push(RawCube {
                    values,
                    provenance: Provenance {
                        frame_index: f0 as u32,
                        patch_row: pr as u32,
                        patch_col: pc as u32,
                        pixel_rect: PixelRect {
                            x: c0 as u32,
                            y: r0 as u32,
                            w: spec.patch_w as u32,
                            h: spec.patch_h as u32,
                        },
                    },
                });
            }
        }
    }
    Ok(cubes)
}

/// Raw descriptor length.
pub const DESCRIPTOR_DIM: usize = 500;
/// Cells along (width, height, depth). 8*7*3 cells x 3 channels = 504,
/// truncated to [`DESCRIPTOR_DIM`].
pub const CELL_GRID: (usize, usize, usize) = (8, 7, 3);

/// Splits `0..len` into `cells` contiguous near-equal chunks and returns the
/// cell index of every position.
fn cell_lookup(len: usize, cells: usize) -> Vec<usize> {
    let mut lut = vec![0usize; len];
    for i in 0..cells {
        let lo = i * len / cells;
        let hi = (i + 1) * len / cells;
        for slot in lut.iter_mut().take(hi).skip(lo) {
            *slot = i;
        }
    }
    lut
}

/// Per-cell mean-absolute 3D gradients of one cube, concatenated
/// (`|Gx|, |Gy|, |Gt|` per cell, t-major cell order) and truncated to
/// [`DESCRIPTOR_DIM`] entries.
///
/// Gradients are central differences with replicate boundary handling, so a
/// constant cube maps to the zero vector and a global intensity offset leaves
/// the descriptor unchanged.
pub fn gradient_descriptor(cube: &RawCube, spec: &CubeSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let (pw, ph, pd) = (spec.patch_w, spec.patch_h, spec.depth);
    if cube.values.len() != spec.voxels() {
        return Err(Error::DimensionMismatch(format!(
            "cube has {} voxels, spec wants {}",
            cube.values.len(),
            spec.voxels()
        )));
    }
    let (gx_cells, gy_cells, gt_cells) = CELL_GRID;
    let lut_x = cell_lookup(pw, gx_cells);
    let lut_y = cell_lookup(ph, gy_cells);
    let lut_t = cell_lookup(pd, gt_cells);

    let ncells = gx_cells * gy_cells * gt_cells;
    let mut sums = vec![[0.0f64; 3]; ncells];
    let mut counts = vec![0usize; ncells];

    let at = |f: usize, r: usize, c: usize| cube.values[(f * ph + r) * pw + c];
    for f in 0..pd {
        let (fp, fm) = ((f + 1).min(pd - 1), f.saturating_sub(1));
        for r in 0..ph {
            let (rp, rm) = ((r + 1).min(ph - 1), r.saturating_sub(1));
            for c in 0..pw {
                let (cp, cm) = ((c + 1).min(pw - 1), c.saturating_sub(1));
                let gx = (at(f, r, cp) - at(f, r, cm)) / 2.0;
                let gy = (at(f, rp, c) - at(f, rm, c)) / 2.0;
                let gt = (at(fp, r, c) - at(fm, r, c)) / 2.0;
                let cell = (lut_t[f] * gy_cells + lut_y[r]) * gx_cells + lut_x[c];
                sums[cell][0] += gx.abs();
                sums[cell][1] += gy.abs();
                sums[cell][2] += gt.abs();
                counts[cell] += 1;
            }
        }
    }

    let mut out = Vec::with_capacity(ncells * 3);
    for (s, &n) in sums.iter().zip(&counts) {
        let n = n as f64;
        out.push(s[0] / n);
        out.push(s[1] / n);
        out.push(s[2] / n);
    }
    out.truncate(DESCRIPTOR_DIM.min(out.len()));
    Ok(out)
}

/// Extracts cubes and computes their descriptors (data-parallel per cube).
pub fn extract_features(video: &VideoTensor, spec: &CubeSpec) -> Result<FeatureMatrix> {
    let cubes = extract_cubes(video, spec)?;
    if cubes.is_empty() {
        return Err(Error::NoTrainingData);
    }
    let descriptors: Vec<Result<Vec<f64>>> =
        parallel::map_indexed(cubes.len(), |i| gradient_descriptor(&cubes[i], spec));
    let mut rows = Vec::with_capacity(cubes.len());
    for d in descriptors {
        rows.push(d?);
    }
    let dim = rows[0].len();
    let data = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let provenance = cubes.into_iter().map(|c| c.provenance).collect();
    FeatureMatrix::new(data, provenance)
}

/// PCA basis fitted on training descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// `raw_dim x k`, orthonormal columns, sorted by decreasing variance.
    pub basis: DMatrix<f64>,
    /// Variance captured per component, non-increasing.
    pub explained_variance: DVector<f64>,
    /// Trace of the covariance, for variance-ratio reporting.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn explained_variance_ratio(&self) -> f64 {
        if self.total_variance <= 0.0 {
            return 1.0;
        }
        self.explained_variance.sum() / self.total_variance
    }

    /// Projects one vector.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector has dim {}, PCA expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(self.basis.tr_mul(&(x - &self.mean)))
    }
}

/// Fits PCA by eigen-decomposition of the (population, i.e. 1/n) covariance.
///
/// Component signs are fixed so the largest-magnitude entry of each basis
/// vector is positive; with eigenvalues sorted in decreasing order this makes
/// the fit deterministic.
pub fn pca_fit(features: &FeatureMatrix, k: usize) -> Result<PcaModel> {
    let n = features.n();
    let dim = features.dim();
    if n < 2 {
        return Err(Error::InvalidParameter("PCA needs at least 2 samples".into()));
    }
    if k == 0 || k > n.min(dim) {
        return Err(Error::InvalidParameter(format!(
            "PCA k={k} out of range 1..=min(n={n}, dim={dim})"
        )));
    }
    let data = features.data();
    let mean = data.row_mean().transpose();
    let mut centered = data.clone();
    for i in 0..n {
        for j in 0..dim {
            centered[(i, j)] -= mean[j];
        }
    }
    let cov = centered.tr_mul(&centered) / n as f64;
    let eig = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut basis = DMatrix::zeros(dim, k);
    let mut explained = DVector::zeros(k);
    for (out_col, &src) in order.iter().take(k).enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        // Sign convention: largest-magnitude entry positive.
        let mut arg = 0;
        for i in 1..dim {
            if v[i].abs() > v[arg].abs() {
                arg = i;
            }
        }
        if v[arg] < 0.0 {
            v = -v;
        }
        basis.set_column(out_col, &v);
        explained[out_col] = eig.eigenvalues[src].max(0.0);
    }
    let total_variance: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0)).sum();
    Ok(PcaModel { mean, basis, explained_variance: explained, total_variance })
}

/// Projects every row: `(x - mean)^T basis`. Provenance is preserved.
pub fn pca_apply(model: &PcaModel, features: &FeatureMatrix) -> Result<FeatureMatrix> {
    if features.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "features have dim {}, PCA expects {}",
            features.dim(),
            model.input_dim()
        )));
    }
    let n = features.n();
    let mut centered = features.data().clone();
    for i in 0..n {
        for j in 0..model.input_dim() {
            centered[(i, j)] -= model.mean[j];
        }
    }
    let projected = centered * &model.basis;
    FeatureMatrix::new(projected, features.provenance().to_vec())
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

const VIDEO_MAGIC: &[u8; 8] = b"SAVID001";
const FEATURE_MAGIC: &[u8; 8] = b"SAFEA001";
const PCA_MAGIC: &[u8; 8] = b"SAPCA001";

/// Maximum per-axis size accepted from file headers.
const AXIS_LIMIT: usize = 1 << 24;

/// Raw binary tensor: magic, u32 T/H/W, then T*H*W float32.
pub fn save_video(video: &VideoTensor, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, VIDEO_MAGIC)?;
    let (t, h, wd) = video.dims();
    binio::write_u32(&mut w, t as u32)?;
    binio::write_u32(&mut w, h as u32)?;
    binio::write_u32(&mut w, wd as u32)?;
    for &v in video.data() {
        binio::write_f32(&mut w, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_video(path: &Path) -> Result<VideoTensor> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, VIDEO_MAGIC)?;
    let t = binio::read_len(&mut r, AXIS_LIMIT, "frame count")?;
    let h = binio::read_len(&mut r, AXIS_LIMIT, "height")?;
    let w = binio::read_len(&mut r, AXIS_LIMIT, "width")?;
    let mut data = Vec::with_capacity(t * h * w);
    for _ in 0..t * h * w {
        data.push(binio::read_f32(&mut r)?);
    }
    VideoTensor::new(t, h, w, data)
}

/// Loads a directory of binary (P5) PGM frames, sorted by file name.
/// Intensities are scaled to [0, 1] by the PGM maxval.
pub fn load_pgm_dir(dir: &Path) -> Result<VideoTensor> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension().map(|e| e.eq_ignore_ascii_case("pgm")).unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format(format!("no .pgm files in {}", dir.display())));
    }
    let mut frames: Vec<Vec<f32>> = Vec::with_capacity(paths.len());
    let mut dims: Option<(usize, usize)> = None;
    for p in &paths {
        let (w, h, pixels) = load_pgm(p)?;
        match dims {
            None => dims = Some((h, w)),
            Some(d) if d != (h, w) => {
                return Err(Error::Format(format!(
                    "frame {} is {h}x{w}, expected {}x{}",
                    p.display(),
                    d.0,
                    d.1
                )))
            }
            _ => {}
        }
        frames.push(pixels);
    }
    let (h, w) = dims.unwrap();
    let mut data = Vec::with_capacity(frames.len() * h * w);
    let t = frames.len();
    for f in frames {
        data.extend_from_slice(&f);
    }
    VideoTensor::new(t, h, w, data)
}

fn load_pgm(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut tokens = Vec::with_capacity(4);
    // Header: "P5", width, height, maxval; '#' starts a comment line.
    while tokens.len() < 4 {
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)?;
        match byte[0] {
            b'#' => {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip)?;
            }
            c if c.is_ascii_whitespace() => {}
            c => {
                let mut tok = vec![c];
                loop {
                    let mut nb = [0u8; 1];
                    r.read_exact(&mut nb)?;
                    if nb[0].is_ascii_whitespace() {
                        break;
                    }
                    if nb[0] == b'#' {
                        let mut skip = Vec::new();
                        r.read_until(b'\n', &mut skip)?;
                        break;
                    }
                    tok.push(nb[0]);
                }
                tokens.push(String::from_utf8_lossy(&tok).into_owned());
            }
        }
    }
    if tokens[0] != "P5" {
        return Err(Error::Format(format!("{}: not a binary PGM (P5)", path.display())));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("{}: bad {what} {s:?}", path.display())))
    };
    let w = parse(&tokens[1], "width")?;
    let h = parse(&tokens[2], "height")?;
    let maxval = parse(&tokens[3], "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("{}: bad maxval {maxval}", path.display())));
    }
    let wide = maxval > 255;
    let mut raw = vec![0u8; w * h * if wide { 2 } else { 1 }];
    r.read_exact(&mut raw)?;
    let scale = 1.0 / maxval as f32;
    let pixels = if wide {
        raw.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 * scale).collect()
    } else {
        raw.iter().map(|&b| b as f32 * scale).collect()
    };
    Ok((w, h, pixels))
}

/// Feature file: magic, u32 n, u32 dim, n*dim float64 row-major, then one
/// provenance block per row (frame, patch_row, patch_col, rect x/y/w/h as u32).
pub fn save_features(features: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, FEATURE_MAGIC)?;
    binio::write_u32(&mut w, features.n() as u32)?;
    binio::write_u32(&mut w, features.dim() as u32)?;
    for i in 0..features.n() {
        for j in 0..features.dim() {
            binio::write_f64(&mut w, features.data()[(i, j)])?;
        }
    }
    for p in features.provenance() {
        binio::write_u32(&mut w, p.frame_index)?;
        binio::write_u32(&mut w, p.patch_row)?;
        binio::write_u32(&mut w, p.patch_col)?;
        binio::write_u32(&mut w, p.pixel_rect.x)?;
        binio::write_u32(&mut w, p.pixel_rect.y)?;
        binio::write_u32(&mut w, p.pixel_rect.w)?;
        binio::write_u32(&mut w, p.pixel_rect.h)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, FEATURE_MAGIC)?;
    let n = binio::read_len(&mut r, AXIS_LIMIT, "feature count")?;
    let dim = binio::read_len(&mut r, AXIS_LIMIT, "feature dimension")?;
    let mut data = DMatrix::zeros(n, dim);
    for i in 0..n {
        for j in 0..dim {
            data[(i, j)] = binio::read_f64(&mut r)?;
        }
    }
    let mut provenance = Vec::with_capacity(n);
    for _ in 0..n {
        provenance.push(Provenance {
            frame_index: binio::read_u32(&mut r)?,
            patch_row: binio::read_u32(&mut r)?,
            patch_col: binio::read_u32(&mut r)?,
            pixel_rect: PixelRect {
                x: binio::read_u32(&mut r)?,
                y: binio::read_u32(&mut r)?,
                w: binio::read_u32(&mut r)?,
                h: binio::read_u32(&mut r)?,
            },
        });
    }
    FeatureMatrix::new(data, provenance)
}

/// PCA model file: magic, u32 dim, u32 k, mean (dim f64), basis (dim*k f64
/// column-major), explained variance (k f64), total variance (f64).
pub fn save_pca(model: &PcaModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, PCA_MAGIC)?;
    binio::write_u32(&mut w, model.input_dim() as u32)?;
    binio::write_u32(&mut w, model.k() as u32)?;
    for &v in model.mean.iter() {
        binio::write_f64(&mut w, v)?;
    }
    for &v in model.basis.iter() {
        binio::write_f64(&mut w, v)?;
    }
    for &v in model.explained_variance.iter() {
        binio::write_f64(&mut w, v)?;
    }
    binio::write_f64(&mut w, model.total_variance)?;
    w.flush()?;
    Ok(())
}

pub fn load_pca(path: &Path) -> Result<PcaModel> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, PCA_MAGIC)?;
    let dim = binio::read_len(&mut r, AXIS_LIMIT, "PCA dimension")?;
    let k = binio::read_len(&mut r, AXIS_LIMIT, "PCA component count")?;
    let mut mean = DVector::zeros(dim);
    for i in 0..dim {
        mean[i] = binio::read_f64(&mut r)?;
    }
    let mut basis = DMatrix::zeros(dim, k);
    for j in 0..k {
        for i in 0..dim {
            basis[(i, j)] = binio::read_f64(&mut r)?;
        }
    }
    let mut explained = DVector::zeros(k);
    for i in 0..k {
        explained[i] = binio::read_f64(&mut r)?;
    }
    let total_variance = binio::read_f64(&mut r)?;
    Ok(PcaModel { mean, basis, explained_variance: explained, total_variance })
}

/// Groups feature indices by their frame index.
pub fn features_by_frame(provenance: &[Provenance]) -> BTreeMap<u32, Vec<usize>> {
    let mut map: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, p) in provenance.iter().enumerate() {
        map.entry(p.frame_index).or_default().push(i);
    }
    map
}
