//! Discrete phase space `F × F` over `F = GF(2ⁿ)`.
//!
//! A self-dual basis `(d₁, …, dₙ)` ties Pauli translations to points: qubit
//! `i` carrying an X factor adds `dᵢ` to the horizontal coordinate α, a Z
//! factor adds `dᵢ` to the vertical coordinate β. Each row of a generator
//! table then maps to an additive subgroup of order N (a homogeneous curve),
//! and its cosets form a striation of N parallel lines.

mod forms;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Add;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldSpec, SelfDualBasis};
use crate::mubtab::{GeneratorTable, MubError};
use crate::pauli::PauliString;

pub use forms::{
    fit_curve_forms, solve_linear, CurveForm, CurveFormReport, Linearized, LinearizedRelation,
    Parametric, ParametricCheck, RelationCheck,
};
pub use render::{
    best_relabeling, compare_grids, curves_csv, curves_json, parse_grid, render_grid, CellMismatch,
    FigureDiff, Labeling, RelabeledDiff,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error("Pauli string acts on {got} qubits, map expects {expected}")]
    QubitCount { expected: usize, got: usize },
    #[error("row images are not {0} distinct points of a subgroup")]
    NotASubgroup(usize),
    #[error("shift set yields {got} distinct cosets, expected {expected}")]
    BadShifts { expected: usize, got: usize },
    #[error("curve does not pass through the origin")]
    NotHomogeneous,
    #[error("cannot parse grid: {0}")]
    BadGrid(String),
}

/// A point `(α, β)` of the phase-space grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    pub alpha: FieldElement,
    pub beta: FieldElement,
}

impl PhasePoint {
    pub fn new(alpha: FieldElement, beta: FieldElement) -> Self {
        assert_eq!(
            alpha.degree(),
            beta.degree(),
            "coordinates from different fields"
        );
        PhasePoint { alpha, beta }
    }

    pub fn is_origin(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero()
    }
}

impl Add for PhasePoint {
    type Output = PhasePoint;

    fn add(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint {
            alpha: self.alpha + rhs.alpha,
            beta: self.beta + rhs.beta,
        }
    }
}

impl fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:b}, {:b})", self.alpha.bits(), self.beta.bits())
    }
}

/// Pauli class ↔ phase-space point association through a self-dual basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationMap {
    spec: FieldSpec,
    basis: SelfDualBasis,
}

impl TranslationMap {
    pub fn new(spec: FieldSpec, basis: SelfDualBasis) -> Self {
        TranslationMap { spec, basis }
    }

    /// The default field for `n` qubits with its first self-dual basis.
    pub fn default_for(n: u32) -> Result<Self, PhaseError> {
        let spec = FieldSpec::default_for(n)?;
        let basis = spec.default_self_dual_basis()?;
        Ok(TranslationMap { spec, basis })
    }

    /// GF(8) with θ³+θ+1 and the basis (μ³, μ⁵, μ⁶).
    pub fn gf8() -> Self {
        Self::default_for(3).expect("GF(8) map")
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn basis(&self) -> &SelfDualBasis {
        &self.basis
    }

    pub fn num_qubits(&self) -> usize {
        self.spec.degree() as usize
    }

    /// Side length N of the grid.
    pub fn size(&self) -> usize {
        self.spec.order()
    }

    pub fn origin(&self) -> PhasePoint {
        PhasePoint {
            alpha: self.spec.zero(),
            beta: self.spec.zero(),
        }
    }

    /// Parses `"alpha,beta"` with rendered field elements, e.g. `"0,u^3"`.
    pub fn parse_point(&self, text: &str) -> Result<PhasePoint, PhaseError> {
        let t = text.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| FieldError::BadElement(text.to_string()))?;
        Ok(PhasePoint::new(
            self.spec.parse_element(a)?,
            self.spec.parse_element(b)?,
        ))
    }

    pub fn render_point(&self, p: PhasePoint) -> String {
        format!(
            "({},{})",
            self.spec.render(p.alpha),
            self.spec.render(p.beta)
        )
    }

    /// All N² points, α-major in field-element order.
    pub fn points(&self) -> Vec<PhasePoint> {
        let els = self.spec.elements();
        els.iter()
            .flat_map(|&a| els.iter().map(move |&b| PhasePoint { alpha: a, beta: b }))
            .collect()
    }

    /// Dense index `α·N + β` over the bit representations.
    pub fn index(&self, p: PhasePoint) -> usize {
        p.alpha.bits() as usize * self.size() + p.beta.bits() as usize
    }

    pub fn point_at(&self, index: usize) -> PhasePoint {
        let n = self.size();
        PhasePoint {
            alpha: self
                .spec
                .element((index / n) as u32)
                .expect("index in range"),
            beta: self
                .spec
                .element((index % n) as u32)
                .expect("index in range"),
        }
    }

    pub fn op_to_point(&self, p: &PauliString) -> Result<PhasePoint, PhaseError> {
        if p.num_qubits() != self.num_qubits() {
            return Err(PhaseError::QubitCount {
                expected: self.num_qubits(),
                got: p.num_qubits(),
            });
        }
        let mut pt = self.origin();
        for (q, &d) in self.basis.elements().iter().enumerate() {
            if (p.x() >> q) & 1 == 1 {
                pt.alpha = pt.alpha + d;
            }
            if (p.z() >> q) & 1 == 1 {
                pt.beta = pt.beta + d;
            }
        }
        Ok(pt)
    }

    /// Inverse of [`TranslationMap::op_to_point`]; coordinates in the
    /// self-dual basis are read off with the trace, `cᵢ = tr(a·dᵢ)`.
    pub fn point_to_op(&self, pt: PhasePoint) -> PauliString {
        let xs = self.basis.coordinates(&self.spec, pt.alpha);
        let zs = self.basis.coordinates(&self.spec, pt.beta);
        let mask = |bits: Vec<bool>| {
            bits.iter()
                .enumerate()
                .fold(0u32, |m, (q, &b)| m | (u32::from(b) << q))
        };
        PauliString::from_masks(self.num_qubits(), mask(xs), mask(zs))
    }
}

/// An additive subgroup of the grid (homogeneous curve) or one of its cosets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Curve {
    #[serde(skip)]
    points: Vec<PhasePoint>,
    #[serde(skip)]
    generators: Vec<PhasePoint>,
}

impl Curve {
    /// Closure of `generators` under addition.
    pub fn from_generators(origin: PhasePoint, generators: Vec<PhasePoint>) -> Self {
        let mut set = BTreeSet::new();
        set.insert(origin);
        for &g in &generators {
            let shifted: Vec<_> = set.iter().map(|&p| p + g).collect();
            set.extend(shifted);
        }
        Curve {
            points: set.into_iter().collect(),
            generators,
        }
    }

    fn from_points(points: BTreeSet<PhasePoint>, generators: Vec<PhasePoint>) -> Self {
        Curve {
            points: points.into_iter().collect(),
            generators,
        }
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn generators(&self) -> &[PhasePoint] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &PhasePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn contains_origin(&self) -> bool {
        self.points.iter().any(PhasePoint::is_origin)
    }

    /// Contains the origin and is closed under addition.
    pub fn is_homogeneous(&self) -> bool {
        self.contains_origin()
            && self
                .points
                .iter()
                .all(|&p| self.points.iter().all(|&q| self.contains(&(p + q))))
    }

    pub fn translate(&self, v: PhasePoint) -> Curve {
        Curve::from_points(
            self.points.iter().map(|&p| p + v).collect(),
            self.generators.clone(),
        )
    }
}

/// Homogeneous curve of one table row: the origin together with the images
/// of the row's operators.
pub fn curve_from_row(row: &[PauliString], map: &TranslationMap) -> Result<Curve, PhaseError> {
    let images = row
        .iter()
        .map(|p| map.op_to_point(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut set: BTreeSet<PhasePoint> = images.iter().copied().collect();
    set.insert(map.origin());
    let n = map.num_qubits();
    let expected = map.size();
    // generators: first independent images in column order
    let mut generators: Vec<PhasePoint> = Vec::with_capacity(n);
    for &img in &images {
        if generators.len() == n {
            break;
        }
        let span = Curve::from_generators(map.origin(), generators.clone());
        if !span.contains(&img) {
            generators.push(img);
        }
    }
    let curve = Curve::from_points(set, generators);
    if curve.len() != expected || images.len() != expected - 1 || !curve.is_homogeneous() {
        return Err(PhaseError::NotASubgroup(expected));
    }
    Ok(curve)
}

/// N parallel lines: the cosets of one homogeneous curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Striation {
    pub row_index: usize,
    lines: Vec<Curve>,
}

impl Striation {
    pub fn lines(&self) -> &[Curve] {
        &self.lines
    }

    /// The line through the origin.
    pub fn ray(&self) -> &Curve {
        &self.lines[0]
    }

    pub fn line_index_of(&self, p: &PhasePoint) -> usize {
        self.lines
            .iter()
            .position(|l| l.contains(p))
            .expect("striation covers the grid")
    }
}

/// Translates a homogeneous curve by every combination of `shifts`.
pub fn striation_from_curve(
    curve: &Curve,
    shifts: &[PhasePoint],
    row_index: usize,
    map: &TranslationMap,
) -> Result<Striation, PhaseError> {
    if !curve.is_homogeneous() {
        return Err(PhaseError::NotHomogeneous);
    }
    let translations = Curve::from_generators(map.origin(), shifts.to_vec());
    let mut lines: Vec<Curve> = Vec::new();
    for &v in translations.points() {
        let line = curve.translate(v);
        if !lines.iter().any(|l| l.points == line.points) {
            lines.push(line);
        }
    }
    let expected = map.size();
    let covered: BTreeSet<_> = lines
        .iter()
        .flat_map(|l| l.points.iter().copied())
        .collect();
    if lines.len() != expected || covered.len() != expected * expected {
        return Err(PhaseError::BadShifts {
            expected,
            got: lines.len(),
        });
    }
    order_lines(&mut lines, map);
    Ok(Striation { row_index, lines })
}

/// Striation made of all cosets of `curve`.
pub fn striation_by_cosets(
    curve: &Curve,
    row_index: usize,
    map: &TranslationMap,
) -> Result<Striation, PhaseError> {
    if !curve.is_homogeneous() {
        return Err(PhaseError::NotHomogeneous);
    }
    let mut covered = BTreeSet::new();
    let mut lines = Vec::new();
    for p in map.points() {
        if covered.contains(&p) {
            continue;
        }
        let line = curve.translate(p);
        covered.extend(line.points.iter().copied());
        lines.push(line);
    }
    order_lines(&mut lines, map);
    Ok(Striation { row_index, lines })
}

// ray first, then by smallest point index
fn order_lines(lines: &mut [Curve], map: &TranslationMap) {
    lines.sort_by_key(|l| l.points.iter().map(|&p| map.index(p)).min());
}

/// One striation per table row.
pub fn striations_for_table(
    table: &GeneratorTable,
    map: &TranslationMap,
) -> Result<Vec<Striation>, PhaseError> {
    table
        .rows()
        .iter()
        .enumerate()
        .map(|(r, row)| striation_by_cosets(&curve_from_row(row, map)?, r, map))
        .collect()
}

/// Table whose rows are the straight rays `α = 0` and `β = λα` for every
/// λ ∈ F, mapped back to Pauli strings. Row order: vertical ray, then
/// λ = 0, 1, μ, μ², …; within a row the first `n` columns are the images of
/// the basis elements.
pub fn ray_table(map: &TranslationMap) -> GeneratorTable {
    let spec = map.spec();
    let zero = spec.zero();
    let n = map.num_qubits();
    // nonzero field elements with the self-dual basis first
    let mut order: Vec<FieldElement> = map.basis().elements().to_vec();
    for sel in 1u32..(1 << n) {
        if sel.count_ones() > 1 {
            let e = map
                .basis()
                .elements()
                .iter()
                .enumerate()
                .filter(|(i, _)| (sel >> i) & 1 == 1)
                .fold(zero, |acc, (_, &d)| acc + d);
            order.push(e);
        }
    }
    let mut rows = vec![order
        .iter()
        .map(|&b| map.point_to_op(PhasePoint::new(zero, b)))
        .collect::<Vec<_>>()];
    for lambda in spec.elements() {
        rows.push(
            order
                .iter()
                .map(|&a| map.point_to_op(PhasePoint::new(a, spec.mul(lambda, a))))
                .collect(),
        );
    }
    GeneratorTable::new(rows).expect("ray table has the right shape")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeometryReport {
    pub striations: usize,
    /// Every striation partitions the grid into N lines of N points.
    pub partitions: bool,
    /// Lines from different striations share exactly one point.
    pub single_intersection: bool,
    /// Homogeneous curves of different striations meet only at the origin.
    pub rays_meet_at_origin: bool,
    /// Every point lies on exactly one line per striation.
    pub uniform_incidence: bool,
    pub failures: Vec<String>,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn verify_geometry(striations: &[Striation], map: &TranslationMap) -> GeometryReport {
    let size = map.size();
    let mut failures = Vec::new();
    let mut partitions = true;
    for s in striations {
        let all: BTreeSet<_> = s
            .lines
            .iter()
            .flat_map(|l| l.points.iter().copied())
            .collect();
        let sizes_ok = s.lines.len() == size && s.lines.iter().all(|l| l.len() == size);
        if !sizes_ok || all.len() != size * size {
            partitions = false;
            failures.push(format!(
                "striation {} does not partition the grid",
                s.row_index + 1
            ));
        }
    }
    let mut single_intersection = true;
    let mut rays_meet_at_origin = true;
    for (i, a) in striations.iter().enumerate() {
        for b in &striations[i + 1..] {
            for la in &a.lines {
                for lb in &b.lines {
                    let shared = la.points.iter().filter(|p| lb.contains(p)).count();
                    if shared != 1 {
                        single_intersection = false;
                        failures.push(format!(
                            "lines of striations {} and {} share {shared} points",
                            a.row_index + 1,
                            b.row_index + 1
                        ));
                    }
                }
            }
            let common: Vec<_> = a
                .ray()
                .points
                .iter()
                .filter(|p| b.ray().contains(p))
                .collect();
            if common.len() != 1 || !common[0].is_origin() {
                rays_meet_at_origin = false;
                failures.push(format!(
                    "rays {} and {} meet off the origin",
                    a.row_index + 1,
                    b.row_index + 1
                ));
            }
        }
    }
    let mut uniform_incidence = true;
    for p in map.points() {
        let count: usize = striations
            .iter()
            .map(|s| s.lines.iter().filter(|l| l.contains(&p)).count())
            .sum();
        if count != striations.len() {
            uniform_incidence = false;
            failures.push(format!(
                "point {} lies on {count} lines",
                map.render_point(p)
            ));
        }
    }
    GeometryReport {
        striations: striations.len(),
        partitions,
        single_intersection,
        rays_meet_at_origin,
        uniform_incidence,
        failures,
    }
}
