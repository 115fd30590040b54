//! Linear systems with repeated columns over finite fields: classification,
//! constructive search for shapes and generic solutions, and sumset
//! applications.

pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod constants;
pub mod error;
pub mod field;
pub mod finder;
pub mod io;
pub mod sumset;
pub mod system;
pub mod witness;

pub use error::{Error, Result};
