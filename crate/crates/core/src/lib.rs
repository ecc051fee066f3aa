// `!(x > 0.0)` guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dunkl;
pub mod error;
pub mod hermite;
pub mod hharmonics;
pub mod laguerre;
pub mod mixed_norm;
pub mod poly;
pub mod probe;
pub mod quadrature;
pub mod specfun;

pub use dunkl::ReflectionGroup;
pub use error::{Error, Result};
pub use poly::{FloatPoly, MultiPoly, Poly};
