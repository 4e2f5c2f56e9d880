//! Lattice quantizers: construction, closest-point decoding, Monte Carlo
//! estimation of second moments, optimal products and bounds.
//!
//! Lattices use the row convention: points are `u·B` for integer row
//! vectors `u`. The normalized second moment of a quantizer with mean
//! squared error `E` and cell volume `V` in dimension `n` is
//! `G = E/(n·V^{2/n})`.

pub mod bounds;
pub mod catalog;
pub mod compose;
pub mod decode;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod linalg;

pub use catalog::{get_lattice, Lattice};
pub use decode::{closest_point, closest_product, quantize_suboptimal, sphere_decode, DecodeResult, Decoder};
pub use error::{Error, Result};
pub use linalg::{volume, GeneratorMatrix, SymmetricMatrix};
