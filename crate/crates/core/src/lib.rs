pub mod matrix;
pub mod pattern;
pub mod function;
pub mod operator;
pub mod witness;
pub mod verifier;
