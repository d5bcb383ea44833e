pub mod accelerant;
pub mod direct;
pub mod error;
pub mod io;
pub mod krein;
pub mod matcore;
pub mod pipeline;
pub mod random;
pub mod reduction;
