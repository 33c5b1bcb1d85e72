//! Generator tables for mutually unbiased bases.
//!
//! A generator table for `n` qubits has `N + 1` rows (N = 2ⁿ), each holding
//! the `N − 1` non-identity elements of a maximal abelian subgroup of the
//! phase-free Pauli group. The joint eigenbases of the rows are mutually
//! unbiased. For three qubits the whole 9×7 table follows from a 2×3 seed via
//! the cyclic column rule `O[r][c] = O[r][c−2]·O[r][c−3]` (columns mod 7) for
//! the first two rows and `O[r][c] = O[2][c]·O[1][c+r−3]` for the remaining
//! seven.

mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMatrix};
use crate::pauli::{in_span, PauliError, PauliString};

pub use search::{
    enumerate_seeds, frobenius_qubit_permutations, seeds_for_pattern, Equivalence,
    EquivalenceClass, SeedEntry, SeedPattern, SeedSearchReport, TableSymmetry,
};

/// Overlap tolerance for unbiasedness checks.
pub const MUB_TOLERANCE: f64 = 1e-12;

/// Purity threshold separating pure from mixed reduced states.
const PURITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MubError {
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("invalid table shape: {0}")]
    BadShape(String),
    #[error("row is not a maximal abelian set: {0}")]
    InvalidRow(String),
    #[error("separability classification is defined for 3 qubits, got {0}")]
    UnsupportedQubitCount(usize),
    #[error("basis vectors disagree on separability ({0})")]
    InconsistentBasis(String),
    #[error("need at least two bases, got {0}")]
    TooFewBases(usize),
    #[error("unknown seed pattern {0:?}")]
    UnknownPattern(String),
    #[error("cannot parse structure signature {0:?}")]
    BadSignature(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// The 2×3 upper-left block that determines a three-qubit generator table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedTable {
    rows: [Vec<PauliString>; 2],
}

impl SeedTable {
    pub fn new(first: Vec<PauliString>, second: Vec<PauliString>) -> Result<Self, MubError> {
        for (r, row) in [&first, &second].into_iter().enumerate() {
            if row.len() != 3 {
                return Err(MubError::InvalidSeed(format!(
                    "row {} has {} entries, expected 3",
                    r + 1,
                    row.len()
                )));
            }
            for p in row {
                if p.num_qubits() != 3 {
                    return Err(MubError::InvalidSeed(format!(
                        "{p} does not act on 3 qubits"
                    )));
                }
            }
            for i in 0..3 {
                for j in 0..i {
                    if !row[i].commutes(&row[j])? {
                        return Err(MubError::InvalidSeed(format!(
                            "row {}: {} and {} anticommute",
                            r + 1,
                            row[j],
                            row[i]
                        )));
                    }
                }
                if row[i].is_identity_class() || in_span(&row[..i], &row[i]) {
                    return Err(MubError::InvalidSeed(format!(
                        "row {}: {} is dependent",
                        r + 1,
                        row[i]
                    )));
                }
            }
        }
        let strip = |row: Vec<PauliString>| row.into_iter().map(PauliString::phase_free).collect();
        Ok(SeedTable {
            rows: [strip(first), strip(second)],
        })
    }

    /// Parses two whitespace-separated rows of Pauli text.
    pub fn parse(first: &str, second: &str) -> Result<Self, MubError> {
        let row = |s: &str| -> Result<Vec<PauliString>, MubError> {
            s.split_whitespace()
                .map(|t| PauliString::parse(t, 3).map_err(MubError::from))
                .collect()
        };
        Self::new(row(first)?, row(second)?)
    }

    pub fn rows(&self) -> &[Vec<PauliString>; 2] {
        &self.rows
    }
}

impl fmt::Display for SeedTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |row: &[PauliString]| {
            row.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "{} / {}", join(&self.rows[0]), join(&self.rows[1]))
    }
}

/// `N + 1` rows of `N − 1` phase-free Pauli strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct GeneratorTable {
    n: usize,
    rows: Vec<Vec<PauliString>>,
}

impl TryFrom<Vec<Vec<String>>> for GeneratorTable {
    type Error = MubError;

    fn try_from(rows: Vec<Vec<String>>) -> Result<Self, MubError> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.parse::<PauliString>().map_err(MubError::from))
                    .collect()
            })
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        GeneratorTable::new(parsed)
    }
}

impl From<GeneratorTable> for Vec<Vec<String>> {
    fn from(t: GeneratorTable) -> Self {
        t.rows
            .iter()
            .map(|r| r.iter().map(|p| p.to_string()).collect())
            .collect()
    }
}

impl GeneratorTable {
    /// Wraps explicit rows after a shape check. Group-theoretic validity is
    /// reported by [`validate_table`], not enforced here.
    pub fn new(rows: Vec<Vec<PauliString>>) -> Result<Self, MubError> {
        let n = rows
            .first()
            .and_then(|r| r.first())
            .map(|p| p.num_qubits())
            .ok_or_else(|| MubError::BadShape("empty table".into()))?;
        if n > 16 {
            return Err(MubError::BadShape(format!("{n} qubits is too many")));
        }
        let big_n = 1usize << n;
        if rows.len() != big_n + 1 {
            return Err(MubError::BadShape(format!(
                "{} rows, expected {}",
                rows.len(),
                big_n + 1
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != big_n - 1 {
                return Err(MubError::BadShape(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    big_n - 1
                )));
            }
            if let Some(p) = row.iter().find(|p| p.num_qubits() != n) {
                return Err(MubError::BadShape(format!(
                    "{p} does not act on {n} qubits"
                )));
            }
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(PauliString::phase_free).collect())
            .collect();
        Ok(GeneratorTable { n, rows })
    }

    /// Parses one row per line of whitespace-separated Pauli strings.
    pub fn parse(text: &str) -> Result<Self, MubError> {
        let rows = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<PauliString>().map_err(MubError::from))
                    .collect()
            })
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        Self::new(rows)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<PauliString>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[PauliString] {
        &self.rows[r]
    }

    /// Cell by 1-based row and column, as printed.
    pub fn cell(&self, row: usize, col: usize) -> PauliString {
        self.rows[row - 1][col - 1]
    }

    pub fn map_cells(&self, f: impl Fn(&PauliString) -> PauliString) -> GeneratorTable {
        GeneratorTable {
            n: self.n,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
        }
    }

    /// Sorted class keys of each row, sorted: the table as a set of row groups.
    pub fn row_group_key(&self) -> Vec<Vec<(u32, u32)>> {
        let mut key: Vec<Vec<(u32, u32)>> = self
            .rows
            .iter()
            .map(|r| {
                let mut k: Vec<_> = r.iter().map(|p| p.class_key()).collect();
                k.sort_unstable();
                k
            })
            .collect();
        key.sort();
        key
    }

    /// Eigenbases of every row.
    pub fn bases(&self) -> Result<Vec<MubBasis>, MubError> {
        self.rows.iter().map(|r| eigenbasis(r)).collect()
    }

    pub fn to_text(&self) -> String {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
                    + "\n"
            })
            .collect()
    }
}

/// Expands a three-qubit seed into the full 9×7 table. All products are
/// phase-free.
pub fn expand_seed(seed: &SeedTable) -> GeneratorTable {
    let mut top: Vec<Vec<PauliString>> = seed.rows.to_vec();
    for row in &mut top {
        for c in 3..7 {
            let next = (row[c - 2] * row[c - 3]).phase_free();
            row.push(next);
        }
    }
    let mut rows = top.clone();
    for r in 3..=9 {
        let row = (0..7)
            .map(|c| (top[1][c] * top[0][(c + r - 3) % 7]).phase_free())
            .collect();
        rows.push(row);
    }
    GeneratorTable { n: 3, rows }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowCheck {
    pub row: usize,
    pub nonidentity: bool,
    pub commuting: bool,
    pub distinct: bool,
    pub closed: bool,
}

impl RowCheck {
    pub fn passed(&self) -> bool {
        self.nonidentity && self.commuting && self.distinct && self.closed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<RowCheck>,
    /// All cells are pairwise distinct classes.
    pub cells_distinct: bool,
    /// The rows cover every non-identity class exactly once.
    pub partition: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check_row(index: usize, row: &[PauliString]) -> RowCheck {
    let nonidentity = row.iter().all(|p| !p.is_identity_class());
    let commuting = row
        .iter()
        .enumerate()
        .all(|(i, a)| row[..i].iter().all(|b| !a.symplectic_product(b)));
    let keys: BTreeSet<_> = row.iter().map(|p| p.class_key()).collect();
    let distinct = keys.len() == row.len();
    let closed = row.iter().all(|a| {
        row.iter().all(|b| {
            let prod = (*a * *b).phase_free();
            prod.is_identity_class() || keys.contains(&prod.class_key())
        })
    });
    RowCheck {
        row: index + 1,
        nonidentity,
        commuting,
        distinct,
        closed,
    }
}

/// Checks every row is a maximal abelian group and the rows partition the
/// non-identity phase-free Paulis.
pub fn validate_table(table: &GeneratorTable) -> ValidationReport {
    let mut failures = Vec::new();
    let rows: Vec<RowCheck> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| check_row(i, r))
        .collect();
    for rc in &rows {
        if !rc.nonidentity {
            failures.push(format!("row {} contains the identity", rc.row));
        }
        if !rc.commuting {
            failures.push(format!("row {} has anticommuting entries", rc.row));
        }
        if !rc.distinct {
            failures.push(format!("row {} repeats an entry", rc.row));
        }
        if !rc.closed {
            failures.push(format!("row {} is not closed under multiplication", rc.row));
        }
    }
    let all: Vec<(u32, u32)> = table.rows.iter().flatten().map(|p| p.class_key()).collect();
    let unique: BTreeSet<_> = all.iter().copied().collect();
    let cells_distinct = unique.len() == all.len();
    if !cells_distinct {
        failures.push(format!(
            "{} repeated cells across rows",
            all.len() - unique.len()
        ));
    }
    let total = (1usize << (2 * table.n)) - 1;
    let partition = cells_distinct && !unique.contains(&(0, 0)) && unique.len() == total;
    if !partition {
        failures.push(format!(
            "rows cover {} of {} non-identity classes",
            unique.len(),
            total
        ));
    }
    ValidationReport {
        rows,
        cells_distinct,
        partition,
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparabilityClass {
    Triseparable,
    Biseparable,
    Nonseparable,
}

impl fmt::Display for SeparabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Triseparable => "triseparable",
            Self::Biseparable => "biseparable",
            Self::Nonseparable => "nonseparable",
        })
    }
}

/// Joint eigenbasis of one table row, as rank-1 projectors.
///
/// Projector `j` is `∏ᵢ (I + sᵢGᵢ)/2` with `sᵢ = −1` exactly when bit `i` of
/// `j` is set, so index 0 is the `(+,+,…,+)` sign pattern.
#[derive(Debug, Clone)]
pub struct MubBasis {
    generators: Vec<PauliString>,
    projectors: Vec<CMatrix>,
}

impl MubBasis {
    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, pattern: usize) -> &CMatrix {
        &self.projectors[pattern]
    }

    pub fn num_qubits(&self) -> usize {
        self.generators[0].num_qubits()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Sign-pattern bits flipped by conjugating with the Pauli `u`: bit `i`
    /// is set iff `u` anticommutes with generator `i`.
    pub fn flip_mask(&self, u: &PauliString) -> usize {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.symplectic_product(u))
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    /// Sign of generator `i` in pattern `j`.
    pub fn sign(pattern: usize, generator: usize) -> i8 {
        if (pattern >> generator) & 1 == 1 {
            -1
        } else {
            1
        }
    }
}

/// First independent `n`-subset of the row in column order.
fn choose_generators(row: &[PauliString], n: usize) -> Vec<PauliString> {
    let mut chosen = Vec::with_capacity(n);
    for p in row {
        if chosen.len() == n {
            break;
        }
        if !in_span(&chosen, p) {
            chosen.push(*p);
        }
    }
    chosen
}

/// Builds the joint eigenbasis of a maximal abelian row.
pub fn eigenbasis(row: &[PauliString]) -> Result<MubBasis, MubError> {
    let n = row
        .first()
        .map(|p| p.num_qubits())
        .ok_or_else(|| MubError::InvalidRow("empty row".into()))?;
    let dim = 1usize << n;
    if row.len() != dim - 1 {
        return Err(MubError::InvalidRow(format!(
            "{} entries, expected {}",
            row.len(),
            dim - 1
        )));
    }
    if row.iter().any(|p| p.num_qubits() != n) {
        return Err(MubError::InvalidRow("mixed qubit counts".into()));
    }
    let check = check_row(0, row);
    if !check.passed() {
        return Err(MubError::InvalidRow(format!("{check:?}")));
    }
    let generators = choose_generators(row, n);
    let mats = generators
        .iter()
        .map(|g| g.hermitian_representative().to_matrix())
        .collect::<Result<Vec<_>, _>>()?;
    let id = linalg::identity(dim);
    let projectors = (0..dim)
        .map(|pattern| {
            mats.iter().enumerate().fold(id.clone(), |acc, (i, g)| {
                let s = linalg::ONE * f64::from(MubBasis::sign(pattern, i));
                acc * ((&id + g * s) * (linalg::ONE * 0.5))
            })
        })
        .collect();
    Ok(MubBasis {
        generators,
        projectors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MubReport {
    pub bases: usize,
    pub pairs: usize,
    pub overlaps: usize,
    /// Largest `| |⟨e|f⟩|² − 1/N |` over cross-basis pairs.
    pub max_overlap_deviation: f64,
    /// Largest deviation of within-basis overlaps from `δ`.
    pub max_orthonormality_deviation: f64,
    pub passed: bool,
}

/// Checks every cross-basis overlap `Tr(P_e P_f)` equals `1/N`, and every
/// within-basis overlap is `δ`.
pub fn verify_mub(bases: &[MubBasis]) -> Result<MubReport, MubError> {
    if bases.len() < 2 {
        return Err(MubError::TooFewBases(bases.len()));
    }
    let dim = bases[0].len();
    let target = 1.0 / dim as f64;
    let mut max_dev: f64 = 0.0;
    let mut max_ortho: f64 = 0.0;
    let mut overlaps = 0;
    for (a, ba) in bases.iter().enumerate() {
        for (i, p) in ba.projectors.iter().enumerate() {
            for (j, q) in ba.projectors.iter().enumerate() {
                let t = linalg::trace_product(p, q);
                let expected = if i == j { 1.0 } else { 0.0 };
                max_ortho = max_ortho.max((t.re - expected).abs()).max(t.im.abs());
            }
        }
        for bb in &bases[a + 1..] {
            for p in &ba.projectors {
                for q in &bb.projectors {
                    let t = linalg::trace_product(p, q);
                    max_dev = max_dev.max((t.re - target).abs()).max(t.im.abs());
                    overlaps += 1;
                }
            }
        }
    }
    let k = bases.len();
    Ok(MubReport {
        bases: k,
        pairs: k * (k - 1) / 2,
        overlaps,
        max_overlap_deviation: max_dev,
        max_orthonormality_deviation: max_ortho,
        passed: max_dev <= MUB_TOLERANCE && max_ortho <= MUB_TOLERANCE,
    })
}

fn is_pure(rho: &CMatrix) -> bool {
    (linalg::purity(rho) - 1.0).abs() < PURITY_TOLERANCE
}

/// Separability of a single three-qubit pure state given as a projector.
pub fn classify_state(projector: &CMatrix) -> Result<SeparabilityClass, MubError> {
    if projector.nrows() != 8 {
        return Err(MubError::UnsupportedQubitCount(
            projector.nrows().trailing_zeros() as usize,
        ));
    }
    let pure: Vec<usize> = (0..3)
        .filter(|&q| is_pure(&linalg::partial_trace(projector, 3, &[q])))
        .collect();
    match pure.len() {
        3 => Ok(SeparabilityClass::Triseparable),
        0 => Ok(SeparabilityClass::Nonseparable),
        1 => {
            let rest: Vec<usize> = (0..3).filter(|&q| q != pure[0]).collect();
            let pair = linalg::partial_trace(projector, 3, &rest);
            if is_pure(&pair) {
                Ok(SeparabilityClass::Biseparable)
            } else {
                Err(MubError::InconsistentBasis(format!(
                    "qubit {} pure but pair {:?} mixed",
                    pure[0] + 1,
                    rest
                )))
            }
        }
        k => Err(MubError::InconsistentBasis(format!(
            "{k} of 3 single-qubit marginals pure"
        ))),
    }
}

/// Common separability class of all vectors of a three-qubit basis.
pub fn classify_separability(basis: &MubBasis) -> Result<SeparabilityClass, MubError> {
    if basis.num_qubits() != 3 {
        return Err(MubError::UnsupportedQubitCount(basis.num_qubits()));
    }
    let classes = basis
        .projectors
        .iter()
        .map(classify_state)
        .collect::<Result<Vec<_>, _>>()?;
    let first = classes[0];
    if classes.iter().any(|&c| c != first) {
        return Err(MubError::InconsistentBasis(format!("{classes:?}")));
    }
    Ok(first)
}

/// Counts `(s, b, ns)` of triseparable, biseparable and nonseparable bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MubStructure {
    pub triseparable: usize,
    pub biseparable: usize,
    pub nonseparable: usize,
}

impl MubStructure {
    pub fn new(triseparable: usize, biseparable: usize, nonseparable: usize) -> Self {
        MubStructure {
            triseparable,
            biseparable,
            nonseparable,
        }
    }

    pub fn total(&self) -> usize {
        self.triseparable + self.biseparable + self.nonseparable
    }
}

impl fmt::Display for MubStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.triseparable, self.biseparable, self.nonseparable
        )
    }
}

impl FromStr for MubStructure {
    type Err = MubError;

    fn from_str(s: &str) -> Result<Self, MubError> {
        let bad = || MubError::BadSignature(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let parts: Vec<usize> = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match parts.as_slice() {
            [s, b, ns] => Ok(MubStructure::new(*s, *b, *ns)),
            _ => Err(bad()),
        }
    }
}

/// Classifies every row of a three-qubit table.
pub fn structure_signature(table: &GeneratorTable) -> Result<MubStructure, MubError> {
    let mut sig = MubStructure::new(0, 0, 0);
    for basis in table.bases()? {
        match classify_separability(&basis)? {
            SeparabilityClass::Triseparable => sig.triseparable += 1,
            SeparabilityClass::Biseparable => sig.biseparable += 1,
            SeparabilityClass::Nonseparable => sig.nonseparable += 1,
        }
    }
    Ok(sig)
}
