pub mod channel;
pub mod error;
pub mod fock;
pub mod field;
pub mod grid;
pub mod protocol;
pub mod weyl;

pub use error::{Error, Result};
