pub mod classical;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod ext;
pub mod neyman_pearson;
pub mod operator;
pub mod source;
pub mod typicality;

pub use error::{Error, Result};
pub use ext::ExtReal;
