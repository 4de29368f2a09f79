//! Explicit constructions around the failure of property (P2) for pairs of
//! normed planes, and its lift to higher-dimensional quotients.

pub mod construct;
pub mod convexity;
pub mod ellipsoid;
pub mod error;
pub mod figures;
pub mod norm2d;
pub mod operators;
pub mod quotient;
pub mod search;

pub use error::{Error, Result};
pub use norm2d::{Functional2, Mat2, Norm2, Vec2};
