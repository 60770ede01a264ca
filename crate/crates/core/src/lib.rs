//! Sparse-representation toolkit for abnormal-event detection.
//!
//! The crate covers the full batch pipeline:
//!
//! - [`features`]: spatio-temporal cube extraction, 3D gradient descriptors,
//!   PCA reduction;
//! - [`dictionary`]: K-SVD learning of an overcomplete dictionary with
//!   unit-norm atoms and an optional block partition;
//! - [`pursuit`]: greedy sparse coders (MP, OMP, StOMP);
//! - [`convex`]: L1 coders (Lasso via coordinate descent, Basis Pursuit via
//!   ADMM);
//! - [`coder`]: a unified solver front-end with data-parallel batch encoding;
//! - [`detect`]: the four anomaly measurements (RE, ARE, MC, NC) and
//!   frame-level aggregation;
//! - [`evaluate`]: frame- and pixel-level ROC, AUC, EER and EDR;
//! - [`datagen`]: seeded synthetic recovery instances and toy video scenes.
//!
//! Batch stages (encoding, scoring, descriptor extraction) run on rayon when
//! the `parallel` feature is enabled (default) and fall back to sequential
//! loops otherwise. Outputs are schedule-independent either way: every
//! parallel loop is an indexed map over independent items.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators
//! (`rand_chacha` 0.9); identical seeds give bit-identical results.

pub mod coder;
pub mod convex;
pub mod datagen;
pub mod detect;
pub mod dictionary;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod io;
pub mod pursuit;

mod linalg;
mod parallel;

pub use error::{Error, Result};

/// The PRNG used everywhere randomness is needed.
///
/// Fixed to ChaCha8 so fixtures reproduce bit-exactly across platforms and
/// across ports of this pipeline.
pub type SeededRng = rand_chacha::ChaCha8Rng;
