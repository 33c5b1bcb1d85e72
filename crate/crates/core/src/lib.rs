//! Mutually unbiased bases for qubits, finite-field phase space and the
//! discrete Wigner function built on it.

pub mod field;
pub mod fixtures;
pub mod linalg;
pub mod mubtab;
pub mod pauli;
pub mod phasespace;
pub mod tomo;
pub mod wigner;
