pub mod artifact;
pub mod cli;
pub mod codec;
pub mod constructions;
pub mod galois;
pub mod matrix;
pub mod selftest;
pub mod verifier;
