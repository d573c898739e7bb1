pub mod compare;
pub mod denoise;
pub mod gen;
pub mod solve;
