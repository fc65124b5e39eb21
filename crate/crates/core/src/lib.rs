pub mod brauer;
pub mod category;
pub mod cyclotomic;
pub mod error;
pub mod experiments;
pub mod lsearch;
pub mod modmath;
pub mod report;
pub mod weil;

pub use error::{Result, WeilError};
