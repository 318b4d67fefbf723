//! Robust reconstruction of signals that are sparse in the DFT domain and
//! carry impulsive outliers.
//!
//! Random sample subsets are reconstructed with a matching-pursuit solver;
//! a subset whose reconstruction agrees with enough of the observed samples
//! defines a consensus set, and the final estimate is recomputed from that
//! set alone. The crate also provides the seeded noise generators, the
//! closed-form trial-count and SNR predictions, and the Monte-Carlo
//! experiment harness used by the `ransac-cs` command-line tool.
//!
//! ```
//! use ransac_cs::noise::{gen_sparse_signal, SignalSpec};
//! use ransac_cs::ransac::{ransac_denoise, RansacConfig};
//!
//! let (clean, _truth) = gen_sparse_signal(&SignalSpec::new(64, 3, 7)).unwrap();
//! let cfg = RansacConfig::new(64, 3, 16, 1e-6, 1);
//! let outcome = ransac_denoise(&clean, &cfg).unwrap();
//! assert!(outcome.reached_consensus);
//! assert_eq!(outcome.consensus.len(), 64);
//! ```

pub mod error;
pub mod experiment;
pub mod format;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod ransac;
pub mod recovery;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use transform::{ComplexSignal, Spectrum};
