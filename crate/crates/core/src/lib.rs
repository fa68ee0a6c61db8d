pub mod atoms;
pub mod cz;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod harness;
pub mod lpaley;
pub mod maximal;
pub mod norms;
pub mod orlicz;

pub use error::{Error, Result};
