pub mod almost_periodic;
pub mod error;
pub mod estimate;
pub mod field;
pub mod forcing;
pub mod gronwall;
pub mod io;
pub mod mild_solver;
pub mod scenario;
pub mod semigroup;
pub mod special;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
