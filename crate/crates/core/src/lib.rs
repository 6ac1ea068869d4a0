pub mod construction;
pub mod error;
pub mod estimator;
pub mod formulas;
pub mod gale;
pub mod io;
pub mod numeric;
pub mod pentagram;
pub mod polygon;
pub mod projective;
pub mod selfdual;

pub use error::{Error, Result};
