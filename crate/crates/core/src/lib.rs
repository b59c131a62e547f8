//! Direction sets of point sets in AG(2,p), polynomial functions over F_p,
//! and exhaustive or sampled checks of the degree and direction bounds that
//! connect them.

pub mod census;
pub mod checks;
pub mod error;
pub mod fp;
pub mod geometry;
pub mod poly;

pub use error::{Error, Result};
pub use fp::{FieldElement, PrimeModulus};
pub use geometry::{AffineTransform, CanonicalForm, Direction, Point, PointSet};
pub use poly::{Polynomial, ValueTable};
