//! n-qubit Pauli strings in symplectic form.
//!
//! A [`PauliString`] stores an X mask, a Z mask and a phase exponent. The
//! operator it denotes is `i^phase · P₁ ⊗ P₂ ⊗ … ⊗ Pₙ` where each `Pⱼ` is one of
//! the Hermitian letters I, X, Y, Z (Y when both mask bits are set). In the
//! X/Z-power form this is `i^(phase + |x∧z|) · X^x Z^z`, so phase 0 is always
//! the Hermitian representative.
//!
//! Bit `j` of a mask refers to qubit `j + 1`, which is the leftmost character
//! of the text form and the most significant Kronecker factor of the dense
//! matrix.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{CMatrix, I, ONE, ZERO};

/// Dense realizations are limited to five qubits (32×32).
pub const MAX_DENSE_QUBITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("expected {expected} Pauli letters, got {got} in {text:?}")]
    BadLength {
        text: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid character {ch:?} in Pauli string {text:?}")]
    BadChar { text: String, ch: char },
    #[error("Pauli strings act on different numbers of qubits ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("dense matrices are limited to {MAX_DENSE_QUBITS} qubits, got {0}")]
    TooLarge(usize),
    #[error("at most 32 qubits are supported, got {0}")]
    TooManyQubits(usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u32,
    z: u32,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 32);
        PauliString {
            n: n as u8,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    /// Hermitian Pauli string with the given masks.
    pub fn from_masks(n: usize, x: u32, z: u32) -> Self {
        assert!(n <= 32);
        let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        assert!(
            x & !mask == 0 && z & !mask == 0,
            "mask bits beyond qubit count"
        );
        PauliString {
            n: n as u8,
            x,
            z,
            phase: 0,
        }
    }

    pub fn with_phase(self, phase: u8) -> Self {
        PauliString {
            phase: phase % 4,
            ..self
        }
    }

    /// Single-qubit letter on qubit `q` (0-based), identity elsewhere.
    pub fn single(n: usize, q: usize, letter: char) -> Self {
        let (x, z) = match letter {
            'I' => (0, 0),
            'X' => (1, 0),
            'Y' => (1, 1),
            'Z' => (0, 1),
            _ => panic!("not a Pauli letter: {letter}"),
        };
        Self::from_masks(n, x << q, z << q)
    }

    pub fn num_qubits(&self) -> usize {
        usize::from(self.n)
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn z(&self) -> u32 {
        self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn is_identity_class(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Letter acting on qubit `q` (0-based).
    pub fn letter(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    /// The phase-free class `(x, z)`.
    pub fn class_key(&self) -> (u32, u32) {
        (self.x, self.z)
    }

    /// Drops the phase: products in generator tables are taken modulo phase.
    pub fn phase_free(self) -> Self {
        PauliString { phase: 0, ..self }
    }

    /// Phase chosen so that the dense realization is Hermitian:
    /// `i^|x∧z| · X^x Z^z`, i.e. a plain tensor product of I, X, Y, Z.
    pub fn hermitian_representative(self) -> Self {
        self.phase_free()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Symplectic form `x_p·z_q + z_p·x_q (mod 2)`.
    pub fn symplectic_product(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_size(other)?;
        Ok(!self.symplectic_product(other))
    }

    fn check_size(&self, other: &Self) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::SizeMismatch(
                self.num_qubits(),
                other.num_qubits(),
            ));
        }
        Ok(())
    }

    /// Full product including the phase.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_size(other)?;
        let e1 = u32::from(self.phase) + (self.x & self.z).count_ones();
        let e2 = u32::from(other.phase) + (other.x & other.z).count_ones();
        // Z^z1 X^x2 = (-1)^{|z1 ∧ x2|} X^x2 Z^z1
        let e = e1 + e2 + 2 * (self.z & other.x).count_ones();
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let phase = (e + 4 * 32 - (x & z).count_ones()) % 4;
        Ok(PauliString {
            n: self.n,
            x,
            z,
            phase: phase as u8,
        })
    }

    /// Relabels qubits: qubit `q` moves to position `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.num_qubits());
        let mut x = 0;
        let mut z = 0;
        for (q, &target) in perm.iter().enumerate() {
            x |= ((self.x >> q) & 1) << target;
            z |= ((self.z >> q) & 1) << target;
        }
        PauliString { x, z, ..*self }
    }

    /// Exchanges the roles of the x and z axes on every qubit (X ↔ Z, Y fixed).
    pub fn swap_axes(&self) -> Self {
        PauliString {
            x: self.z,
            z: self.x,
            ..*self
        }
    }

    /// Dense `2ⁿ×2ⁿ` matrix built as a Kronecker product of single-qubit
    /// matrices, qubit 1 most significant.
    pub fn to_matrix(&self) -> Result<CMatrix, PauliError> {
        let n = self.num_qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(PauliError::TooLarge(n));
        }
        let mut m = DMatrix::from_element(1, 1, ONE);
        for q in 0..n {
            m = m.kronecker(&letter_matrix(self.letter(q)));
        }
        let phase = match self.phase {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        Ok(m * phase)
    }

    /// Parses `"IXZ"`, optionally prefixed by a phase token
    /// (`+1`, `-1`, `+i`, `-i`, `+`, `-`, `i`).
    pub fn parse(text: &str, n: usize) -> Result<Self, PauliError> {
        let p: PauliString = text.parse()?;
        if p.num_qubits() != n {
            return Err(PauliError::BadLength {
                text: text.to_string(),
                expected: n,
                got: p.num_qubits(),
            });
        }
        Ok(p)
    }
}

fn letter_matrix(letter: char) -> CMatrix {
    match letter {
        'I' => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        'X' => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        'Y' => DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        'Z' => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => unreachable!(),
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        let (phase, letters) = if let Some(rest) = t.strip_prefix("+1") {
            (0, rest)
        } else if let Some(rest) = t.strip_prefix("-1") {
            (2, rest)
        } else if let Some(rest) = t.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = t.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = t.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = t.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = t.strip_prefix('-') {
            (2, rest)
        } else {
            (0, t)
        };
        let letters = letters.trim_start_matches(['*', ' ']);
        let n = letters.chars().count();
        if n == 0 {
            return Err(PauliError::BadLength {
                text: text.to_string(),
                expected: 1,
                got: 0,
            });
        }
        if n > 32 {
            return Err(PauliError::TooManyQubits(n));
        }
        let mut x = 0u32;
        let mut z = 0u32;
        for (q, ch) in letters.chars().enumerate() {
            let (bx, bz) = match ch {
                'I' | '1' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                _ => {
                    return Err(PauliError::BadChar {
                        text: text.to_string(),
                        ch,
                    })
                }
            };
            x |= bx << q;
            z |= bz << q;
        }
        Ok(PauliString {
            n: n as u8,
            x,
            z,
            phase,
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

/// Product with phase. Panics on a qubit-count mismatch; see
/// [`PauliString::multiply`].
impl Mul for PauliString {
    type Output = PauliString;

    fn mul(self, rhs: PauliString) -> PauliString {
        self.multiply(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

/// All `4ⁿ` Hermitian Pauli strings on `n` qubits, ordered by (x, z).
pub fn all_paulis(n: usize) -> Vec<PauliString> {
    let size = 1u32 << n;
    (0..size)
        .flat_map(|x| (0..size).map(move |z| PauliString::from_masks(n, x, z)))
        .collect()
}

/// Whether `candidate` lies in the phase-free span of `generators`.
pub fn in_span(generators: &[PauliString], candidate: &PauliString) -> bool {
    let target = candidate.class_key();
    (0u32..(1 << generators.len())).any(|sel| {
        let mut acc = (0u32, 0u32);
        for (i, g) in generators.iter().enumerate() {
            if (sel >> i) & 1 == 1 {
                acc.0 ^= g.x;
                acc.1 ^= g.z;
            }
        }
        acc == target
    })
}

/// Phase-free group generated by `generators`, in subset-enumeration order
/// (identity first).
pub fn span(generators: &[PauliString]) -> Vec<PauliString> {
    let n = generators.first().map(|g| g.num_qubits()).unwrap_or(0);
    (0u32..(1 << generators.len()))
        .map(|sel| {
            let mut p = PauliString::identity(n);
            for (i, g) in generators.iter().enumerate() {
                if (sel >> i) & 1 == 1 {
                    p = PauliString::from_masks(n, p.x ^ g.x, p.z ^ g.z);
                }
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff, trace, trace_product};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_masks() {
        let y = p("YII");
        assert_eq!((y.x(), y.z()), (0b001, 0b001));
        let z = p("ZII");
        assert_eq!((z.x(), z.z()), (0, 0b001));
        assert_eq!(p("IXZ").to_string(), "IXZ");
        assert_eq!(p("-iXY").phase(), 3);
        assert_eq!(p("-1ZZ"), p("-ZZ"));
        assert!(PauliString::parse("IXZ", 2).is_err());
        assert!(matches!(
            "IQZ".parse::<PauliString>(),
            Err(PauliError::BadChar { ch: 'Q', .. })
        ));
    }

    #[test]
    fn single_qubit_products() {
        // X·Z = −iY
        assert_eq!(p("X") * p("Z"), p("-iY"));
        assert_eq!(p("Z") * p("X"), p("+iY"));
        assert_eq!(p("X") * p("Y"), p("+iZ"));
        assert_eq!((p("XII") * p("ZII")).phase_free(), p("YII"));
    }

    #[test]
    fn square_is_identity_class() {
        for a in all_paulis(2) {
            let sq = a * a;
            assert!(sq.is_identity_class());
            assert_eq!(sq.phase(), 0, "Hermitian Paulis square to +I");
        }
    }

    #[test]
    fn dense_multiplication_agrees_for_all_two_qubit_pairs() {
        let phases = [0u8, 1, 2, 3];
        for a in all_paulis(2) {
            for b in all_paulis(2) {
                for &pa in &phases {
                    let a = a.with_phase(pa);
                    let prod = a * b;
                    let dense = a.to_matrix().unwrap() * b.to_matrix().unwrap();
                    assert!(
                        max_abs_diff(&prod.to_matrix().unwrap(), &dense) < 1e-14,
                        "{a} * {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn commutation_agrees_with_dense_commutator() {
        for a in all_paulis(2) {
            for b in all_paulis(2) {
                let (ma, mb) = (a.to_matrix().unwrap(), b.to_matrix().unwrap());
                let comm = &ma * &mb - &mb * &ma;
                let zero = comm.iter().all(|c| c.norm() < 1e-14);
                assert_eq!(a.commutes(&b).unwrap(), zero);
            }
        }
        assert!(p("ZII").commutes(&p("IIZ")).unwrap());
        assert!(!p("XII").commutes(&p("ZII")).unwrap());
        let (a, b) = (p("YZX"), p("ZZZ"));
        let (ma, mb) = (a.to_matrix().unwrap(), b.to_matrix().unwrap());
        let dense = max_abs_diff(&(&ma * &mb), &(&mb * &ma)) < 1e-14;
        assert_eq!(a.commutes(&b).unwrap(), dense);
    }

    #[test]
    fn hermitian_representatives() {
        let y = PauliString::from_masks(1, 1, 1).with_phase(3);
        let h = y.hermitian_representative();
        assert_eq!(h, p("Y"));
        assert_eq!(p("ZII").hermitian_representative(), p("ZII"));
        for a in all_paulis(2) {
            let m = a
                .with_phase(1)
                .hermitian_representative()
                .to_matrix()
                .unwrap();
            assert!(max_abs_diff(&m, &m.adjoint()) < 1e-15);
            assert!(max_abs_diff(&(&m * &m), &identity(4)) < 1e-15);
        }
    }

    #[test]
    fn dense_examples() {
        let id = PauliString::identity(3).to_matrix().unwrap();
        assert!(max_abs_diff(&id, &identity(8)) < 1e-15);
        let z = p("ZII").to_matrix().unwrap();
        let diag: Vec<f64> = z.diagonal().iter().map(|c| c.re).collect();
        assert_eq!(diag, [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
        assert!(matches!(
            PauliString::identity(6).to_matrix(),
            Err(PauliError::TooLarge(6))
        ));
    }

    #[test]
    fn orthogonality_of_two_qubit_paulis() {
        let all = all_paulis(2);
        for a in &all {
            let ma = a.to_matrix().unwrap();
            let t = trace(&ma).re;
            assert_eq!(t, if a.is_identity_class() { 4.0 } else { 0.0 });
            for b in &all {
                let tr = trace_product(&ma, &b.to_matrix().unwrap());
                let expected = if a == b { 4.0 } else { 0.0 };
                assert!((tr.re - expected).abs() < 1e-14 && tr.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn size_mismatch_errors() {
        assert_eq!(
            p("XI").multiply(&p("XII")),
            Err(PauliError::SizeMismatch(2, 3))
        );
        assert!(p("XI").commutes(&p("X")).is_err());
    }

    #[test]
    fn span_sizes() {
        let g = [p("ZII"), p("IZI"), p("IIZ")];
        assert_eq!(span(&g).len(), 8);
        assert!(in_span(&g, &p("ZIZ")));
        assert!(!in_span(&g, &p("XII")));
    }

    #[test]
    fn permutations_and_axis_swap() {
        assert_eq!(p("XZI").permute_qubits(&[0, 2, 1]), p("XIZ"));
        assert_eq!(p("XYZ").swap_axes(), p("ZYX"));
    }
}
