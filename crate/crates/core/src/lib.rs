pub mod coefficients;
pub mod corpus;
pub mod error;
pub mod function;
pub mod functional;
pub mod geometry;
pub mod levels;
pub mod nelder_mead;
pub mod norms;
pub mod numeric;
pub mod reduction;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
