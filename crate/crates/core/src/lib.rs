//! Exact arithmetic for uniform multiplicative Diophantine approximation:
//! witness search, nested-interval constructions and their certificates.

pub mod builder;
pub mod error;
pub mod evaluate;
pub mod json;
pub mod lattice;
pub mod optimize;
pub mod productset;
pub mod ratcore;
pub mod sarith;
pub mod stepfn;
pub mod twisted;
pub mod witness;
pub mod zaremba;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use ratcore::{CFWord, RatInterval};
