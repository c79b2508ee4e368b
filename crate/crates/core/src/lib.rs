pub mod bounds;
pub mod coherent;
pub mod error;
pub mod export;
pub mod quad;
pub mod semiclassical;
pub mod smoothed;
pub mod specfun;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
