pub mod chsh;
pub mod filter_scan;
pub mod reproduce;
pub mod simulate;
pub mod witness;
