pub mod concordance;
pub mod diagram;
pub mod grope;
pub mod invariants;
pub mod poly;
mod sign;
pub mod table;
pub mod tower;

pub use sign::Sign;
