//! Sparse Grassmannian precoding codebooks.
//!
//! Codewords are `T×M` matrices with orthonormal columns whose nonzeros
//! follow Schubert-cell sparsity patterns. The crate builds such codebooks,
//! the dense baselines they compete with, and the link-level and waveform
//! simulations used to compare them.
//!
//! Indices in this library are 0-based.

pub mod audit;
pub mod forge;
pub mod grassmann;
pub mod linalg;
pub mod linksim;
pub mod schubert;
pub mod wavesim;

pub use forge::{ForgeError, OptimizerConfig, PatternFilter};
pub use grassmann::{min_chordal_distance, Codebook, CodebookMeta, Codeword, GrassmannError};
pub use linalg::{CMatrix, C64};
