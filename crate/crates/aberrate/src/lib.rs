pub mod error;
pub mod harness;
pub mod imaging;
pub mod io;
pub mod merit;
pub mod segeval;
pub mod shapley;
pub mod optics;
pub mod zernike;

pub use error::{Error, Result};
