//! Layered permutation packing: exact pattern counting, layered permuton
//! densities, simplex optimization of layer profiles and the explicit
//! bound calculators used to diagnose whether optimal layered permutons
//! need infinitely many layers.

pub mod bounds;
pub mod counting;
pub mod error;
pub mod optimizer;
pub mod perm;
pub mod permuton;
pub mod verify;

pub use counting::{BigCount, ExactDensity};
pub use error::{Error, Result};
pub use perm::{
    canonical_decomposition, induced_pattern, parse_permutation, parse_shape, realize, Decomposition, LayeredPermuton,
    LayeredShape, Permutation,
};
