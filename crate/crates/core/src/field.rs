//! Arithmetic in the binary extension field GF(2ⁿ).
//!
//! Elements are stored in the polynomial basis `(1, μ, μ², …)`: bit `i` of an
//! element is the coefficient of `μⁱ`, where `μ` is a root of the defining
//! irreducible polynomial. Addition is XOR; multiplication is carry-less
//! multiplication followed by reduction modulo the polynomial.
//!
//! The field sizes of interest here are tiny (`n ≤ 8` in practice), so the
//! [`FieldSpec`] precomputes a table of powers of the primitive element and
//! answers discrete logarithms by lookup.

use std::fmt;
use std::ops::Add;

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field degree {0} is out of range 1..={MAX_DEGREE}")]
    BadDegree(u32),
    #[error("polynomial {0:#b} does not have degree {1}")]
    PolynomialDegree(u32, u32),
    #[error("polynomial {0:#b} is reducible over GF(2)")]
    Reducible(u32),
    #[error("field elements belong to fields of different degree ({0} vs {1})")]
    DegreeMismatch(u32, u32),
    #[error("bit pattern {bits:#b} is not an element of GF(2^{degree})")]
    NotAnElement { bits: u32, degree: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("element {0} is not primitive")]
    NotPrimitive(u32),
    #[error("cannot parse polynomial bit string {0:?}")]
    BadPolynomial(String),
    #[error("cannot parse field element {0:?}")]
    BadElement(String),
    #[error("self-dual basis search is limited to n <= 5, got {0}")]
    SearchTooLarge(u32),
    #[error("elements do not form a self-dual basis: {0}")]
    NotSelfDual(String),
}

/// An element of GF(2ⁿ) in the polynomial basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    degree: u8,
    bits: u32,
}

impl FieldElement {
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn degree(self) -> u32 {
        u32::from(self.degree)
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// Coefficient of `μⁱ`.
    pub fn coefficient(self, i: u32) -> bool {
        (self.bits >> i) & 1 == 1
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF(2^{})[{:0width$b}]",
            self.degree,
            self.bits,
            width = self.degree as usize
        )
    }
}

/// Characteristic-2 addition.
///
/// Panics when the operands come from fields of different degree; use
/// [`FieldSpec::try_add`] for a checked variant.
impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        assert_eq!(
            self.degree, rhs.degree,
            "adding elements of different fields"
        );
        FieldElement {
            degree: self.degree,
            bits: self.bits ^ rhs.bits,
        }
    }
}

/// GF(2ⁿ) defined by a monic irreducible polynomial together with a chosen
/// primitive element `μ`.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    n: u32,
    poly: u32,
    primitive: FieldElement,
    // powers[k] = μ^k for k in 0..2^n-1
    powers: Vec<u32>,
    // logs[bits] = k with μ^k = bits; logs[0] unused
    logs: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("n", &self.n)
            .field("poly", &self.poly_string())
            .field("primitive", &self.primitive.bits)
            .finish()
    }
}

/// Default irreducible polynomial for each degree (bit `i` = coefficient of θⁱ).
///
/// All of these are primitive, so θ itself generates the multiplicative group.
pub fn default_polynomial(n: u32) -> Option<u32> {
    Some(match n {
        1 => 0b11,
        2 => 0b111,
        3 => 0b1011,
        4 => 0b10011,
        5 => 0b100101,
        6 => 0b1000011,
        7 => 0b10000011,
        8 => 0b100011101,
        _ => return None,
    })
}

fn clmul_reduce(a: u32, b: u32, n: u32, poly: u32) -> u32 {
    let mut acc: u64 = 0;
    let mut a = u64::from(a);
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    let poly = u64::from(poly);
    for shift in (0..n).rev() {
        if (acc >> (n + shift)) & 1 == 1 {
            acc ^= poly << shift;
        }
    }
    acc as u32
}

fn poly_degree(p: u32) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(31 - p.leading_zeros())
    }
}

// remainder of polynomial division over GF(2)
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("division by zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree `1..=deg/2`.
pub fn is_irreducible(poly: u32) -> bool {
    let Some(deg) = poly_degree(poly) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for low in 0..(1u32 << d) {
            let divisor = (1 << d) | low;
            if poly_rem(poly, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Builds GF(2ⁿ) from a polynomial given as a bit mask (bit `i` is the
    /// coefficient of θⁱ, the θⁿ bit must be set). The primitive element is θ
    /// when θ is primitive, otherwise the smallest primitive element.
    pub fn new(n: u32, poly: u32) -> Result<Self, FieldError> {
        if n == 0 || n > MAX_DEGREE {
            return Err(FieldError::BadDegree(n));
        }
        if poly_degree(poly) != Some(n) {
            return Err(FieldError::PolynomialDegree(poly, n));
        }
        if !is_irreducible(poly) {
            return Err(FieldError::Reducible(poly));
        }
        let order = 1u32 << n;
        let theta = if n == 1 { 1 } else { 0b10 };
        let candidates = std::iter::once(theta).chain(1..order);
        for g in candidates {
            if let Some(spec) = Self::with_primitive_bits(n, poly, g) {
                return Ok(spec);
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic")
    }

    /// Builds the field with an explicitly chosen primitive element.
    pub fn with_primitive(n: u32, poly: u32, primitive_bits: u32) -> Result<Self, FieldError> {
        let base = Self::new(n, poly)?;
        base.element(primitive_bits)?;
        Self::with_primitive_bits(n, poly, primitive_bits)
            .ok_or(FieldError::NotPrimitive(primitive_bits))
    }

    fn with_primitive_bits(n: u32, poly: u32, g: u32) -> Option<Self> {
        let order = 1u32 << n;
        if g == 0 || g >= order {
            return None;
        }
        let group = (order - 1) as usize;
        let mut powers = Vec::with_capacity(group);
        let mut logs = vec![u32::MAX; order as usize];
        let mut x = 1u32;
        for k in 0..group {
            if logs[x as usize] != u32::MAX {
                return None;
            }
            logs[x as usize] = k as u32;
            powers.push(x);
            x = clmul_reduce(x, g, n, poly);
        }
        if x != 1 {
            return None;
        }
        Some(FieldSpec {
            n,
            poly,
            primitive: FieldElement {
                degree: n as u8,
                bits: g,
            },
            powers,
            logs,
        })
    }

    /// The field with the default polynomial for degree `n`.
    pub fn default_for(n: u32) -> Result<Self, FieldError> {
        let poly = default_polynomial(n).ok_or(FieldError::BadDegree(n))?;
        Self::new(n, poly)
    }

    /// GF(8) defined by θ³ + θ + 1.
    pub fn gf8() -> Self {
        Self::new(3, 0b1011).expect("θ³+θ+1 is irreducible")
    }

    /// Parses a polynomial bit string, most-significant coefficient first
    /// (`"1011"` is θ³ + θ + 1).
    pub fn parse_polynomial(text: &str) -> Result<u32, FieldError> {
        let text = text.trim();
        if text.is_empty()
            || text.len() > (MAX_DEGREE + 1) as usize
            || !text.chars().all(|c| c == '0' || c == '1')
        {
            return Err(FieldError::BadPolynomial(text.to_string()));
        }
        Ok(u32::from_str_radix(text, 2).expect("validated binary string"))
    }

    /// Builds a field from a degree and polynomial bit string.
    pub fn from_strings(n: u32, poly: &str) -> Result<Self, FieldError> {
        let bits = Self::parse_polynomial(poly)?;
        Self::new(n, bits)
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// Number of field elements, N = 2ⁿ.
    pub fn order(&self) -> usize {
        1 << self.n
    }

    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    /// Polynomial as a bit string, most-significant coefficient first.
    pub fn poly_string(&self) -> String {
        format!("{:0width$b}", self.poly, width = self.n as usize + 1)
    }

    pub fn primitive(&self) -> FieldElement {
        self.primitive
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            degree: self.n as u8,
            bits: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            degree: self.n as u8,
            bits: 1,
        }
    }

    pub fn element(&self, bits: u32) -> Result<FieldElement, FieldError> {
        if bits >= (1 << self.n) {
            return Err(FieldError::NotAnElement {
                bits,
                degree: self.n,
            });
        }
        Ok(FieldElement {
            degree: self.n as u8,
            bits,
        })
    }

    /// μᵏ for any integer k (negative exponents allowed).
    pub fn primitive_power(&self, k: i64) -> FieldElement {
        let group = self.powers.len() as i64;
        let k = k.rem_euclid(group) as usize;
        FieldElement {
            degree: self.n as u8,
            bits: self.powers[k],
        }
    }

    /// All elements in the order 0, 1, μ, μ², …, μ^(N−2).
    pub fn elements(&self) -> Vec<FieldElement> {
        std::iter::once(0)
            .chain(self.powers.iter().copied())
            .map(|bits| FieldElement {
                degree: self.n as u8,
                bits,
            })
            .collect()
    }

    /// Position of an element in [`FieldSpec::elements`] order.
    pub fn ordinal(&self, a: FieldElement) -> usize {
        match self.discrete_log(a) {
            None => 0,
            Some(k) => k as usize + 1,
        }
    }

    fn check(&self, a: FieldElement) -> Result<(), FieldError> {
        if u32::from(a.degree) != self.n {
            return Err(FieldError::DegreeMismatch(self.n, a.degree()));
        }
        Ok(())
    }

    pub fn try_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a + b)
    }

    pub fn try_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElement {
            degree: a.degree,
            bits: clmul_reduce(a.bits, b.bits, self.n, self.poly),
        })
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.try_add(a, b).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.try_mul(a, b).unwrap_or_else(|e| panic!("{e}"))
    }

    /// `a^k` by repeated squaring. `0^0` is 1.
    pub fn pow(&self, a: FieldElement, mut k: u64) -> FieldElement {
        let mut result = self.one();
        let mut base = a;
        while k > 0 {
            if k & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        result
    }

    pub fn inverse(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        // a^(N-2) = a^-1 in the multiplicative group of order N-1
        Ok(self.pow(a, (self.order() - 2) as u64))
    }

    /// Frobenius automorphism `a ↦ a²`.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// Absolute trace `Σ a^(2^i)`, i = 0..n−1, returned as a bit.
    pub fn trace(&self, a: FieldElement) -> bool {
        let mut acc = self.zero();
        let mut term = a;
        for _ in 0..self.n {
            acc = acc + term;
            term = self.frobenius(term);
        }
        debug_assert!(acc.bits <= 1, "trace must land in GF(2)");
        acc.bits == 1
    }

    /// `k` with `μᵏ = a`, or `None` for zero.
    pub fn discrete_log(&self, a: FieldElement) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(self.logs[a.bits as usize])
        }
    }

    /// Renders an element as `0`, `1`, `u`, `u^2`, …
    pub fn render(&self, a: FieldElement) -> String {
        match self.discrete_log(a) {
            None => "0".to_string(),
            Some(0) => "1".to_string(),
            Some(1) => "u".to_string(),
            Some(k) => format!("u^{k}"),
        }
    }

    /// Inverse of [`FieldSpec::render`]. Also accepts `mu` for `u`, and
    /// `b:<bits>` for a raw polynomial-basis bit string.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement, FieldError> {
        let t = text.trim();
        let bad = || FieldError::BadElement(text.to_string());
        if let Some(bits) = t.strip_prefix("b:") {
            let v = u32::from_str_radix(bits, 2).map_err(|_| bad())?;
            return self.element(v).map_err(|_| bad());
        }
        match t {
            "0" => return Ok(self.zero()),
            "1" => return Ok(self.one()),
            "u" | "mu" => return Ok(self.primitive_power(1)),
            _ => {}
        }
        let exp = t
            .strip_prefix("u^")
            .or_else(|| t.strip_prefix("mu^"))
            .ok_or_else(bad)?;
        let k: i64 = exp.parse().map_err(|_| bad())?;
        Ok(self.primitive_power(k))
    }

    /// Gram matrix `tr(dᵢ·dⱼ)` of a list of elements.
    pub fn trace_gram(&self, elements: &[FieldElement]) -> Vec<Vec<bool>> {
        elements
            .iter()
            .map(|&a| {
                elements
                    .iter()
                    .map(|&b| self.trace(self.mul(a, b)))
                    .collect()
            })
            .collect()
    }

    /// Exhaustive search for all ordered self-dual bases, in lexicographic
    /// order of their discrete-log tuples.
    pub fn find_self_dual_bases(&self) -> Result<Vec<SelfDualBasis>, FieldError> {
        if self.n > 5 {
            return Err(FieldError::SearchTooLarge(self.n));
        }
        // an element can sit in a self-dual basis only if tr(d²) = tr(d) = 1
        let candidates: Vec<FieldElement> = self
            .elements()
            .into_iter()
            .filter(|&d| !d.is_zero() && self.trace(d))
            .collect();
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(self.n as usize);
        self.extend_self_dual(&candidates, &mut current, &mut out);
        Ok(out)
    }

    fn extend_self_dual(
        &self,
        candidates: &[FieldElement],
        current: &mut Vec<FieldElement>,
        out: &mut Vec<SelfDualBasis>,
    ) {
        if current.len() == self.n as usize {
            out.push(SelfDualBasis {
                elements: current.clone(),
            });
            return;
        }
        for &d in candidates {
            // orthogonality to the chosen prefix implies distinctness and,
            // with tr(d²) = 1, linear independence
            if current.iter().all(|&c| !self.trace(self.mul(c, d))) && !current.contains(&d) {
                current.push(d);
                self.extend_self_dual(candidates, current, out);
                current.pop();
            }
        }
    }

    /// The first self-dual basis in search order. For GF(8) with θ³+θ+1 this
    /// is (μ³, μ⁵, μ⁶).
    pub fn default_self_dual_basis(&self) -> Result<SelfDualBasis, FieldError> {
        self.find_self_dual_bases()?
            .into_iter()
            .next()
            .ok_or_else(|| FieldError::NotSelfDual("field has no self-dual basis".into()))
    }
}

/// An ordered basis `(d₁, …, dₙ)` of GF(2ⁿ) over GF(2) with `tr(dᵢdⱼ) = δᵢⱼ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelfDualBasis {
    elements: Vec<FieldElement>,
}

impl SelfDualBasis {
    pub fn new(spec: &FieldSpec, elements: Vec<FieldElement>) -> Result<Self, FieldError> {
        if elements.len() != spec.degree() as usize {
            return Err(FieldError::NotSelfDual(format!(
                "expected {} elements, got {}",
                spec.degree(),
                elements.len()
            )));
        }
        for &e in &elements {
            spec.check(e)?;
        }
        let gram = spec.trace_gram(&elements);
        for (i, row) in gram.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if t != (i == j) {
                    return Err(FieldError::NotSelfDual(format!(
                        "tr(d{} d{}) = {}",
                        i + 1,
                        j + 1,
                        u8::from(t)
                    )));
                }
            }
        }
        Ok(SelfDualBasis { elements })
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Coordinates of `a` in this basis: `cᵢ = tr(a·dᵢ)`.
    pub fn coordinates(&self, spec: &FieldSpec, a: FieldElement) -> Vec<bool> {
        self.elements
            .iter()
            .map(|&d| spec.trace(spec.mul(a, d)))
            .collect()
    }
}
