// Negated comparisons below are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod batch;
pub mod bounds;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod optimize;
pub mod scalar;
pub mod special;
pub mod testfn;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Lattice64 = lattice::Lattice<f64>;
pub type Lattice32 = lattice::Lattice<f32>;
pub type TestFunction64 = testfn::TestFunctionSpec<f64>;
pub type TestFunction32 = testfn::TestFunctionSpec<f32>;
pub type CertifiedSum64 = verify::CertifiedSum<f64>;
pub type Body64 = lattice::BodySpec<f64>;
