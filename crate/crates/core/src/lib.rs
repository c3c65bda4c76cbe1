pub mod assembly;
pub mod bddc;
pub mod driver;
pub mod error;
pub mod krylov;
pub mod ldlt;
pub mod mesh;
mod par;
pub mod partition;
pub mod sparse;
pub mod subsolve;

pub use error::{Error, Result};
