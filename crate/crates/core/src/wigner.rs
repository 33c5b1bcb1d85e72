//! Quantum nets, phase-point operators and the discrete Wigner function.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::mubtab::{GeneratorTable, MubBasis, MubError};
use crate::phasespace::{striations_for_table, PhaseError, PhasePoint, Striation, TranslationMap};

/// Tolerance for validating density matrices.
pub const STATE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WignerError {
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error("{bases} bases for {striations} striations")]
    RowMismatch { bases: usize, striations: usize },
    #[error("ray assignment has {got} entries, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("pattern {pattern} out of range for striation {striation}")]
    BadPattern { striation: usize, pattern: usize },
    #[error("line {line} of striation {striation} receives inconsistent states")]
    Inconsistent { striation: usize, line: usize },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("matrix has trace {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("dimension {got} does not match {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("line {line} not in striation {striation}")]
    NoSuchLine { striation: usize, line: usize },
    #[error("unknown state {0:?}")]
    UnknownState(String),
}

/// Assignment of basis states to every line of every striation, obtained
/// from a choice on the homogeneous curves by Pauli-translation covariance.
#[derive(Debug, Clone)]
pub struct QuantumNet {
    map: TranslationMap,
    bases: Vec<MubBasis>,
    striations: Vec<Striation>,
    ray_assignment: Vec<usize>,
    // line_patterns[k][l]: sign pattern of the state on line l of striation k
    line_patterns: Vec<Vec<usize>>,
    // point_lines[index(p)][k]: line of striation k through p
    point_lines: Vec<Vec<usize>>,
}

/// Builds a net from a sign pattern per homogeneous curve. Line `ray + v`
/// carries the ray state conjugated by the Pauli at `v`; that flips the sign
/// of every generator anticommuting with it.
pub fn build_net(
    map: &TranslationMap,
    bases: Vec<MubBasis>,
    striations: Vec<Striation>,
    ray_assignment: &[usize],
) -> Result<QuantumNet, WignerError> {
    if bases.len() != striations.len() {
        return Err(WignerError::RowMismatch {
            bases: bases.len(),
            striations: striations.len(),
        });
    }
    if ray_assignment.len() != bases.len() {
        return Err(WignerError::AssignmentLength {
            expected: bases.len(),
            got: ray_assignment.len(),
        });
    }
    let mut line_patterns = Vec::with_capacity(bases.len());
    for (k, (basis, s)) in bases.iter().zip(&striations).enumerate() {
        let a = ray_assignment[k];
        if a >= basis.len() {
            return Err(WignerError::BadPattern {
                striation: k + 1,
                pattern: a,
            });
        }
        let mut patterns = Vec::with_capacity(s.lines().len());
        for (l, line) in s.lines().iter().enumerate() {
            let masks: BTreeSet<usize> = line
                .points()
                .iter()
                .map(|&v| basis.flip_mask(&map.point_to_op(v)))
                .collect();
            if masks.len() != 1 {
                return Err(WignerError::Inconsistent {
                    striation: k + 1,
                    line: l,
                });
            }
            patterns.push(a ^ masks.into_iter().next().unwrap_or(0));
        }
        line_patterns.push(patterns);
    }
    let point_lines = (0..map.size() * map.size())
        .map(|i| {
            let p = map.point_at(i);
            striations.iter().map(|s| s.line_index_of(&p)).collect()
        })
        .collect();
    Ok(QuantumNet {
        map: map.clone(),
        bases,
        striations,
        ray_assignment: ray_assignment.to_vec(),
        line_patterns,
        point_lines,
    })
}

impl QuantumNet {
    /// Net of `table` with pattern 0 (all generators +1) on every ray.
    pub fn default_for(table: &GeneratorTable, map: &TranslationMap) -> Result<Self, WignerError> {
        let rows = table.rows().len();
        Self::with_assignment(table, map, &vec![0; rows])
    }

    pub fn with_assignment(
        table: &GeneratorTable,
        map: &TranslationMap,
        ray_assignment: &[usize],
    ) -> Result<Self, WignerError> {
        build_net(
            map,
            table.bases()?,
            striations_for_table(table, map)?,
            ray_assignment,
        )
    }

    pub fn map(&self) -> &TranslationMap {
        &self.map
    }

    pub fn bases(&self) -> &[MubBasis] {
        &self.bases
    }

    pub fn striations(&self) -> &[Striation] {
        &self.striations
    }

    pub fn ray_assignment(&self) -> &[usize] {
        &self.ray_assignment
    }

    pub fn dim(&self) -> usize {
        self.map.size()
    }

    /// Sign pattern assigned to line `line` of striation `k`.
    pub fn line_pattern(&self, k: usize, line: usize) -> usize {
        self.line_patterns[k][line]
    }

    pub fn line_projector(&self, k: usize, line: usize) -> &CMatrix {
        self.bases[k].projector(self.line_patterns[k][line])
    }

    /// Index of the line of striation `k` through `p`.
    pub fn line_through(&self, k: usize, p: PhasePoint) -> usize {
        self.point_lines[self.map.index(p)][k]
    }

    /// Dense `A_p = Σₖ P_{k,ℓₖ(p)} − I`.
    pub fn point_operator(&self, p: PhasePoint) -> CMatrix {
        let mut a = -linalg::identity(self.dim());
        for (k, &l) in self.point_lines[self.map.index(p)].iter().enumerate() {
            a += self.line_projector(k, l);
        }
        a
    }

    /// Born probabilities `Tr(ρ P)` for every line, indexed `[k][line]`.
    pub fn line_probabilities(&self, rho: &CMatrix) -> Vec<Vec<f64>> {
        (0..self.bases.len())
            .map(|k| {
                (0..self.striations[k].lines().len())
                    .map(|l| linalg::trace_product(rho, self.line_projector(k, l)).re)
                    .collect()
            })
            .collect()
    }

    /// Wigner table from line probabilities `q[k][line]`:
    /// `W(p) = (Σₖ q_{k,ℓₖ(p)} − 1)/N`.
    pub fn wigner_from_probabilities(&self, q: &[Vec<f64>]) -> WignerTable {
        let n = self.dim();
        let values = self
            .point_lines
            .iter()
            .map(|lines| {
                (lines.iter().enumerate().map(|(k, &l)| q[k][l]).sum::<f64>() - 1.0) / n as f64
            })
            .collect();
        WignerTable { size: n, values }
    }

    /// Same net translated by `v`: every ray carries what the line `ray + v`
    /// carried before.
    pub fn translated_assignment(&self, v: PhasePoint) -> Vec<usize> {
        (0..self.bases.len())
            .map(|k| self.line_patterns[k][self.line_through(k, v)])
            .collect()
    }

    /// Compact description echoed next to net-dependent output.
    pub fn describe(&self) -> NetSpec {
        NetSpec {
            ray_assignment: self.ray_assignment.clone(),
        }
    }
}

/// Serialized net choice: one sign pattern per table row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub ray_assignment: Vec<usize>,
}

impl NetSpec {
    pub fn default_for(rows: usize) -> Self {
        NetSpec {
            ray_assignment: vec![0; rows],
        }
    }

    /// Accepts JSON, TOML, or a whitespace/comma separated list.
    pub fn parse(text: &str) -> Option<Self> {
        if let Ok(s) = serde_json::from_str::<NetSpec>(text) {
            return Some(s);
        }
        if let Ok(s) = toml::from_str::<NetSpec>(text) {
            return Some(s);
        }
        let ray_assignment = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().ok())
            .collect::<Option<Vec<usize>>>()?;
        (!ray_assignment.is_empty()).then_some(NetSpec { ray_assignment })
    }
}

/// Real values on the N×N grid, stored at [`TranslationMap::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    size: usize,
    values: Vec<f64>,
}

impl WignerTable {
    pub fn uniform(size: usize, value: f64) -> Self {
        WignerTable {
            size,
            values: vec![value; size * size],
        }
    }

    pub fn from_fn(map: &TranslationMap, f: impl Fn(PhasePoint) -> f64) -> Self {
        let values = (0..map.size() * map.size())
            .map(|i| f(map.point_at(i)))
            .collect();
        WignerTable {
            size: map.size(),
            values,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, map: &TranslationMap, p: PhasePoint) -> f64 {
        self.values[map.index(p)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `W′(p) = W(p − v)`.
    pub fn shifted(&self, map: &TranslationMap, v: PhasePoint) -> WignerTable {
        Self::from_fn(map, |p| self.get(map, p + v))
    }

    pub fn max_abs_diff(&self, other: &WignerTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn dot(&self, other: &WignerTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// CSV laid out like rendered grids: header of α values, then one line
    /// per β from the top (largest power) down to β = 0.
    pub fn to_csv(&self, map: &TranslationMap) -> String {
        let spec = map.spec();
        let els = spec.elements();
        let mut out = String::from("beta\\alpha");
        for &a in &els {
            let _ = write!(out, ",{}", spec.render(a));
        }
        out.push('\n');
        for &b in els.iter().rev() {
            out.push_str(&spec.render(b));
            for &a in &els {
                let _ = write!(out, ",{:.15e}", self.get(map, PhasePoint::new(a, b)));
            }
            out.push('\n');
        }
        out
    }

    /// Structured form: rows top to bottom as in [`WignerTable::to_csv`].
    pub fn to_json(&self, map: &TranslationMap) -> serde_json::Value {
        let spec = map.spec();
        let els = spec.elements();
        serde_json::json!({
            "alpha": els.iter().map(|&a| spec.render(a)).collect::<Vec<_>>(),
            "beta": els.iter().rev().map(|&b| spec.render(b)).collect::<Vec<_>>(),
            "values": els.iter().rev().map(|&b| els.iter().map(|&a| self.get(map, PhasePoint::new(a, b))).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    /// Inverse of [`WignerTable::to_csv`].
    pub fn from_csv(text: &str, map: &TranslationMap) -> Result<Self, WignerError> {
        let spec = map.spec();
        let bad = || WignerError::UnknownState("malformed Wigner CSV".into());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<_> = lines
            .next()
            .ok_or_else(bad)?
            .split(',')
            .skip(1)
            .map(str::trim)
            .collect();
        let alphas = header
            .iter()
            .map(|t| spec.parse_element(t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let mut values = vec![f64::NAN; map.size() * map.size()];
        for line in lines {
            let mut cells = line.split(',').map(str::trim);
            let beta = spec
                .parse_element(cells.next().ok_or_else(bad)?)
                .map_err(|_| bad())?;
            for (&a, c) in alphas.iter().zip(cells) {
                values[map.index(PhasePoint::new(a, beta))] = c.parse().map_err(|_| bad())?;
            }
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(bad());
        }
        Ok(WignerTable {
            size: map.size(),
            values,
        })
    }
}

/// `W(p) = Tr(ρ A_p)/N` for a Hermitian operator `rho`.
pub fn wigner(rho: &CMatrix, net: &QuantumNet) -> Result<WignerTable, WignerError> {
    check_dim(rho, net.dim())?;
    let defect = linalg::hermiticity_defect(rho);
    if defect > STATE_TOLERANCE {
        return Err(WignerError::NotHermitian(defect));
    }
    Ok(net.wigner_from_probabilities(&net.line_probabilities(rho)))
}

/// `ρ = Σ_p W(p) A_p`, grouped by lines. The result is Hermitian but need
/// not be a valid state.
pub fn invert(w: &WignerTable, net: &QuantumNet) -> CMatrix {
    let dim = net.dim();
    let mut rho = -linalg::identity(dim) * Complex64::from(w.sum());
    for (k, s) in net.striations().iter().enumerate() {
        for (l, line) in s.lines().iter().enumerate() {
            let mass: f64 = line.points().iter().map(|&p| w.get(net.map(), p)).sum();
            rho += net.line_projector(k, l) * Complex64::from(mass);
        }
    }
    rho
}

/// `Σ_{p∈ℓ} W(p)` for line `line` of striation `k`.
pub fn marginal(
    w: &WignerTable,
    net: &QuantumNet,
    k: usize,
    line: usize,
) -> Result<f64, WignerError> {
    let l = net
        .striations()
        .get(k)
        .and_then(|s| s.lines().get(line))
        .ok_or(WignerError::NoSuchLine {
            striation: k + 1,
            line,
        })?;
    Ok(l.points().iter().map(|&p| w.get(net.map(), p)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceCheck {
    pub displacement: String,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compares the Wigner table of `U_v ρ U_v†` with the table of ρ moved by `v`.
pub fn check_covariance(
    net: &QuantumNet,
    v: PhasePoint,
    rho: &CMatrix,
    tolerance: f64,
) -> Result<CovarianceCheck, WignerError> {
    let map = net.map();
    let u = map.point_to_op(v).to_matrix().map_err(MubError::from)?;
    let moved = &u * rho * u.adjoint();
    let w = wigner(rho, net)?;
    let w_moved = wigner(&moved, net)?;
    // W′(p) = W(p − v) and p − v = p + v
    let dev = w_moved.max_abs_diff(&w.shifted(map, v));
    Ok(CovarianceCheck {
        displacement: map.render_point(v),
        max_deviation: dev,
        passed: dev <= tolerance,
    })
}

fn check_dim(m: &CMatrix, dim: usize) -> Result<(), WignerError> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(WignerError::Dimension {
            expected: dim,
            got: m.nrows(),
        });
    }
    Ok(())
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct DenseForm {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity to [`STATE_TOLERANCE`].
    pub fn new(matrix: CMatrix) -> Result<Self, WignerError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(WignerError::Dimension {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > STATE_TOLERANCE {
            return Err(WignerError::NotHermitian(defect));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > STATE_TOLERANCE {
            return Err(WignerError::BadTrace(tr));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)[0];
        if min < -STATE_TOLERANCE {
            return Err(WignerError::NotPositive(min));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn pure(psi: &DVector<Complex64>) -> Result<Self, WignerError> {
        let norm = psi.norm();
        let v = psi / Complex64::from(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: linalg::identity(dim) * Complex64::from(1.0 / dim as f64),
        }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        DensityMatrix { matrix: m }
    }

    pub fn ghz(n: usize) -> Self {
        let dim = 1usize << n;
        let mut psi = DVector::from_element(dim, ZERO);
        psi[0] = ONE;
        psi[dim - 1] = ONE;
        Self::pure(&psi).expect("GHZ state is valid")
    }

    /// Haar-random pure state.
    pub fn random_pure(dim: usize, rng: &mut impl Rng) -> Self {
        let psi = DVector::from_fn(dim, |_, _| gaussian(rng));
        Self::pure(&psi).expect("normalized vector")
    }

    /// `U diag(λ) U†` with Haar-random `U` and a uniformly random spectrum.
    pub fn random_mixed(dim: usize, rng: &mut impl Rng) -> Self {
        let u = random_unitary(dim, rng);
        let raw: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().ln()).collect();
        let total: f64 = raw.iter().sum();
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            raw.iter().map(|x| Complex64::from(x / total)),
        ));
        let m = &u * d * u.adjoint();
        // symmetrize rounding noise
        let m = (&m + m.adjoint()) * Complex64::from(0.5);
        DensityMatrix::new(m).expect("random state is valid")
    }

    /// Named states: `mixed`, `zero`, `ghz`, `pure:<seed>`, `random:<seed>`.
    pub fn named(name: &str, n: usize) -> Result<Self, WignerError> {
        let dim = 1usize << n;
        let seeded = |prefix: &str| -> Option<u64> { name.strip_prefix(prefix)?.parse().ok() };
        match name {
            "mixed" => Ok(Self::maximally_mixed(dim)),
            "zero" => Ok(Self::basis_state(dim, 0)),
            "ghz" => Ok(Self::ghz(n)),
            _ => {
                if let Some(s) = seeded("pure:") {
                    Ok(Self::random_pure(dim, &mut ChaCha8Rng::seed_from_u64(s)))
                } else if let Some(s) = seeded("random:") {
                    Ok(Self::random_mixed(dim, &mut ChaCha8Rng::seed_from_u64(s)))
                } else {
                    Err(WignerError::UnknownState(name.into()))
                }
            }
        }
    }

    /// Reads `{"re": [[…]], "im": [[…]]}`.
    pub fn from_json(text: &str) -> Result<Self, WignerError> {
        let f: DenseForm =
            serde_json::from_str(text).map_err(|e| WignerError::UnknownState(e.to_string()))?;
        let dim = f.re.len();
        if f.im.len() != dim || f.re.iter().chain(&f.im).any(|r| r.len() != dim) {
            return Err(WignerError::UnknownState(
                "real and imaginary parts must be square and equal".into(),
            ));
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(f.re[i][j], f.im[i][j])
        }))
    }

    pub fn to_json(&self) -> serde_json::Value {
        dense_json(&self.matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `{"re": …, "im": …}` form of any complex matrix.
pub fn dense_json(m: &CMatrix) -> serde_json::Value {
    let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    serde_json::to_value(DenseForm {
        re: part(|c| c.re),
        im: part(|c| c.im),
    })
    .expect("serializable")
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary from the QR factorization of a complex Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g: CMatrix = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            ONE
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetCount {
    pub n: u32,
    pub total: u64,
    pub classes: u64,
    pub class_size: u64,
    /// Obtained by enumeration rather than from the closed formulas.
    pub verified: bool,
    pub formula_total: u64,
    pub formula_classes: u64,
    pub formula_class_size: u64,
}

impl NetCount {
    pub fn matches_formulas(&self) -> bool {
        self.total == self.formula_total
            && self.classes == self.formula_classes
            && self.class_size == self.formula_class_size
    }
}

/// Counts nets over the straight-ray table of GF(2ⁿ) and their classes
/// under the N² phase-space translations. Enumerates for n ≤ 2; larger n
/// only reports the closed formulas.
pub fn count_nets(n: u32) -> Result<NetCount, WignerError> {
    let size = 1u64 << n;
    let formula_total = size.pow(size as u32 + 1);
    let formula_classes = size.pow(size as u32 - 1);
    let formula_class_size = size * size;
    let unverified = NetCount {
        n,
        total: formula_total,
        classes: formula_classes,
        class_size: formula_class_size,
        verified: false,
        formula_total,
        formula_classes,
        formula_class_size,
    };
    if n > 2 {
        return Ok(unverified);
    }
    let map = TranslationMap::default_for(n)?;
    let table = crate::phasespace::ray_table(&map);
    let base = QuantumNet::default_for(&table, &map)?;
    let rows = table.rows().len();
    let radix = map.size();
    let assignments: Vec<Vec<usize>> = (0..radix.pow(rows as u32))
        .map(|mut code| {
            (0..rows)
                .map(|_| {
                    let d = code % radix;
                    code /= radix;
                    d
                })
                .collect()
        })
        .collect();
    // distinct nets, compared on every line
    let mut full: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    for a in &assignments {
        let net = build_net(&map, base.bases.clone(), base.striations.clone(), a)?;
        full.insert(net.line_patterns);
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut classes = 0u64;
    let mut sizes: BTreeSet<u64> = BTreeSet::new();
    for a in &assignments {
        if seen.contains(a) {
            continue;
        }
        let net = build_net(&map, base.bases.clone(), base.striations.clone(), a)?;
        let orbit: BTreeSet<Vec<usize>> = map
            .points()
            .into_iter()
            .map(|v| net.translated_assignment(v))
            .collect();
        sizes.insert(orbit.len() as u64);
        seen.extend(orbit);
        classes += 1;
    }
    let class_size = if sizes.len() == 1 {
        sizes.into_iter().next().unwrap_or(0)
    } else {
        0
    };
    Ok(NetCount {
        total: full.len() as u64,
        classes,
        class_size,
        verified: true,
        ..unverified
    })
}

/// Operator-Schmidt rank of `m` across qubit `q` versus the rest.
pub fn operator_schmidt_rank(m: &CMatrix, n: usize, q: usize) -> usize {
    let dim = 1usize << n;
    let rest = dim / 2;
    let shift = n - 1 - q;
    let split = |idx: usize| -> (usize, usize) {
        let bit = (idx >> shift) & 1;
        let high = idx >> (shift + 1);
        let low = idx & ((1 << shift) - 1);
        (bit, (high << shift) | low)
    };
    let mut r = CMatrix::zeros(4, rest * rest);
    for i in 0..dim {
        for j in 0..dim {
            let (bi, ri) = split(i);
            let (bj, rj) = split(j);
            r[(bi * 2 + bj, ri * rest + rj)] = m[(i, j)];
        }
    }
    let sv = r.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-9 * top.max(1e-300)).count()
}

/// Product `a⊗b⊗…` iff every single-qubit cut has operator-Schmidt rank 1.
pub fn is_fully_factorizable(m: &CMatrix, n: usize) -> bool {
    (0..n).all(|q| operator_schmidt_rank(m, n, q) == 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationHit {
    pub net: Vec<usize>,
    pub point: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationReport {
    pub self_check_passed: bool,
    pub nets_checked: usize,
    pub operators_checked: usize,
    pub hits: Vec<FactorizationHit>,
    /// Smallest operator-Schmidt rank seen on any single-qubit cut.
    pub min_rank: usize,
    pub seed: u64,
}

/// Tests every point operator of the default net and `random_nets` nets
/// drawn with `seed` for full tensor factorization.
pub fn search_factorizable_point_operator(
    table: &GeneratorTable,
    map: &TranslationMap,
    random_nets: usize,
    seed: u64,
) -> Result<FactorizationReport, WignerError> {
    let n = map.num_qubits();
    let single = |theta: f64, phi: f64| {
        let (c, s) = (theta.cos(), theta.sin());
        CMatrix::from_row_slice(
            2,
            2,
            &[
                ONE * c,
                Complex64::from_polar(s, phi),
                Complex64::from_polar(s, -phi),
                ONE * (1.5 - c),
            ],
        )
    };
    let product = (0..n).fold(CMatrix::identity(1, 1), |acc, q| {
        acc.kronecker(&single(0.3 + q as f64, 0.7 * q as f64))
    });
    let mut entangled = product.clone();
    let last = entangled.nrows() - 1;
    entangled[(0, last)] += ONE;
    entangled[(last, 0)] += ONE;
    let self_check_passed =
        is_fully_factorizable(&product, n) && !is_fully_factorizable(&entangled, n);

    let default = QuantumNet::default_for(table, map)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = table.rows().len();
    let mut assignments = vec![vec![0; rows]];
    for _ in 0..random_nets {
        assignments.push((0..rows).map(|_| rng.random_range(0..map.size())).collect());
    }
    let mut hits = Vec::new();
    let mut min_rank = usize::MAX;
    let mut operators_checked = 0;
    for a in &assignments {
        let net = build_net(map, default.bases.clone(), default.striations.clone(), a)?;
        for p in map.points() {
            let op = net.point_operator(p);
            let ranks: Vec<usize> = (0..n).map(|q| operator_schmidt_rank(&op, n, q)).collect();
            min_rank = min_rank.min(ranks.iter().copied().min().unwrap_or(0));
            if ranks.iter().all(|&r| r == 1) {
                hits.push(FactorizationHit {
                    net: a.clone(),
                    point: map.render_point(p),
                });
            }
            operators_checked += 1;
        }
    }
    Ok(FactorizationReport {
        self_check_passed,
        nets_checked: assignments.len(),
        operators_checked,
        hits,
        min_rank,
        seed,
    })
}
