//! Exhaustive seed enumeration and grouping of the resulting tables into
//! equivalence classes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{
    expand_seed, structure_signature, validate_table, GeneratorTable, MubError, MubStructure,
    SeedTable,
};
use crate::field::{FieldSpec, SelfDualBasis};
use crate::pauli::PauliString;

/// Families of three-qubit seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPattern {
    /// Row 1 an ordering of {ZII, IZI, IIZ}, row 2 an ordering of
    /// {XII, IXI, IIX}.
    SingleSingle,
    /// Each row one weight-2 single-axis operator and two weight-1
    /// operators generating the full single-axis group; the x row has the
    /// same supports as the z row, position by position.
    DoubleSingle,
}

impl FromStr for SeedPattern {
    type Err = MubError;

    fn from_str(s: &str) -> Result<Self, MubError> {
        match s {
            "single-single" | "A" | "a" => Ok(Self::SingleSingle),
            "double-single" | "B" | "b" => Ok(Self::DoubleSingle),
            _ => Err(MubError::UnknownPattern(s.to_string())),
        }
    }
}

impl fmt::Display for SeedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SingleSingle => "single-single",
            Self::DoubleSingle => "double-single",
        })
    }
}

/// Equivalence relation used to group tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equivalence {
    /// Qubit relabelings induced by the Frobenius automorphism acting on the
    /// self-dual basis of GF(8), combined with the x ↔ z axis swap. These
    /// are exactly the relabelings that map the phase-space line structure
    /// onto itself.
    PhaseSpace,
    /// Every qubit permutation combined with the axis swap.
    QubitRelabeling,
}

impl FromStr for Equivalence {
    type Err = MubError;

    fn from_str(s: &str) -> Result<Self, MubError> {
        match s {
            "phase-space" => Ok(Self::PhaseSpace),
            "qubit-relabeling" => Ok(Self::QubitRelabeling),
            _ => Err(MubError::UnknownPattern(s.to_string())),
        }
    }
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PhaseSpace => "phase-space",
            Self::QubitRelabeling => "qubit-relabeling",
        })
    }
}

/// A qubit permutation (`perm[q]` is the new position of qubit `q`),
/// optionally followed by the x ↔ z swap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TableSymmetry {
    pub perm: Vec<usize>,
    pub swap_axes: bool,
}

impl TableSymmetry {
    pub fn apply(&self, p: &PauliString) -> PauliString {
        let q = p.permute_qubits(&self.perm);
        if self.swap_axes {
            q.swap_axes()
        } else {
            q
        }
    }

    pub fn apply_table(&self, table: &GeneratorTable) -> GeneratorTable {
        table.map_cells(|p| self.apply(p))
    }

    /// Applies the symmetry to both seed rows. An axis swap also exchanges
    /// the rows so the z-type row stays first.
    pub fn apply_seed(&self, seed: &SeedTable) -> SeedTable {
        let map = |row: &Vec<PauliString>| row.iter().map(|p| self.apply(p)).collect::<Vec<_>>();
        let (a, b) = (map(&seed.rows[0]), map(&seed.rows[1]));
        let (first, second) = if self.swap_axes { (b, a) } else { (a, b) };
        SeedTable::new(first, second).expect("symmetries preserve seed validity")
    }
}

/// Qubit permutations realized by powers of the Frobenius map `a ↦ a²` on
/// the self-dual basis. Powers that do not permute the basis are skipped.
pub fn frobenius_qubit_permutations(spec: &FieldSpec, basis: &SelfDualBasis) -> Vec<Vec<usize>> {
    let els = basis.elements();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut images = els.to_vec();
    for _ in 0..spec.degree() {
        let perm: Option<Vec<usize>> = images
            .iter()
            .map(|img| els.iter().position(|d| d == img))
            .collect();
        if let Some(perm) = perm {
            if !out.contains(&perm) {
                out.push(perm);
            }
        }
        images = images.iter().map(|&a| spec.frobenius(a)).collect();
    }
    out
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

impl Equivalence {
    /// The symmetry group of this relation for three qubits, using the
    /// default GF(8) self-dual basis.
    pub fn symmetries(&self) -> Vec<TableSymmetry> {
        let perms = match self {
            Equivalence::QubitRelabeling => all_permutations(3),
            Equivalence::PhaseSpace => {
                let spec = FieldSpec::gf8();
                let basis = spec
                    .default_self_dual_basis()
                    .expect("GF(8) has a self-dual basis");
                frobenius_qubit_permutations(&spec, &basis)
            }
        };
        perms
            .into_iter()
            .flat_map(|perm| {
                [false, true]
                    .into_iter()
                    .map(move |swap_axes| TableSymmetry {
                        perm: perm.clone(),
                        swap_axes,
                    })
            })
            .collect()
    }

    /// Minimum row-group key over the symmetry orbit of `table`.
    pub fn canonical_key(&self, table: &GeneratorTable) -> Vec<Vec<(u32, u32)>> {
        self.symmetries()
            .iter()
            .map(|s| s.apply_table(table).row_group_key())
            .min()
            .expect("symmetry group is non-empty")
    }
}

/// All ordered seeds of a pattern, in a fixed enumeration order.
pub fn seeds_for_pattern(pattern: SeedPattern) -> Vec<SeedTable> {
    let z = |mask: u32| PauliString::from_masks(3, 0, mask);
    let x = |mask: u32| PauliString::from_masks(3, mask, 0);
    let perms = all_permutations(3);
    let mut seeds = Vec::new();
    match pattern {
        SeedPattern::SingleSingle => {
            for pz in &perms {
                for px in &perms {
                    let first = pz.iter().map(|&q| z(1 << q)).collect();
                    let second = px.iter().map(|&q| x(1 << q)).collect();
                    seeds
                        .push(SeedTable::new(first, second).expect("single-qubit seeds are valid"));
                }
            }
        }
        SeedPattern::DoubleSingle => {
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let pair = (1u32 << a) | (1 << b);
                let other = 0b111 & !pair;
                for single in [1u32 << a, 1 << b] {
                    let supports = [pair, other, single];
                    for p in &perms {
                        let ordered: Vec<u32> = p.iter().map(|&i| supports[i]).collect();
                        let first = ordered.iter().map(|&m| z(m)).collect();
                        let second = ordered.iter().map(|&m| x(m)).collect();
                        seeds.push(SeedTable::new(first, second).expect("pattern seeds are valid"));
                    }
                }
            }
        }
    }
    seeds
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedEntry {
    pub seed: String,
    #[serde(skip)]
    pub seed_table: SeedTable,
    #[serde(skip)]
    pub table: GeneratorTable,
    pub structure: MubStructure,
    pub class_id: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceClass {
    pub id: usize,
    pub structure: MubStructure,
    /// Indices into [`SeedSearchReport::entries`].
    pub members: Vec<usize>,
    pub representative_seed: String,
    #[serde(skip)]
    pub canonical_key: Vec<Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedSearchReport {
    pub pattern: SeedPattern,
    pub equivalence: Equivalence,
    pub seeds_total: usize,
    pub discarded: Vec<String>,
    pub entries: Vec<SeedEntry>,
    pub classes: Vec<EquivalenceClass>,
}

impl SeedSearchReport {
    /// Class containing `table`, if any.
    pub fn class_of(&self, table: &GeneratorTable) -> Option<usize> {
        let key = self.equivalence.canonical_key(table);
        self.classes
            .iter()
            .find(|c| c.canonical_key == key)
            .map(|c| c.id)
    }
}

/// Expands every seed of the pattern, discards invalid tables and groups the
/// rest. Class ids follow the order of canonical keys, so labeling does not
/// depend on enumeration order.
pub fn enumerate_seeds(
    pattern: SeedPattern,
    equivalence: Equivalence,
) -> Result<SeedSearchReport, MubError> {
    let seeds = seeds_for_pattern(pattern);
    let seeds_total = seeds.len();
    let mut discarded = Vec::new();
    let mut valid = Vec::new();
    for seed in seeds {
        let table = expand_seed(&seed);
        let report = validate_table(&table);
        if !report.is_valid() {
            discarded.push(format!("{seed}: {}", report.failures.join("; ")));
            continue;
        }
        let structure = structure_signature(&table)?;
        let key = equivalence.canonical_key(&table);
        valid.push((seed, table, structure, key));
    }
    let mut keys: BTreeMap<Vec<Vec<(u32, u32)>>, usize> = BTreeMap::new();
    for (.., key) in &valid {
        keys.entry(key.clone()).or_insert(0);
    }
    for (id, v) in keys.values_mut().enumerate() {
        *v = id;
    }
    let mut classes: Vec<EquivalenceClass> = keys
        .iter()
        .map(|(key, &id)| EquivalenceClass {
            id,
            structure: MubStructure::new(0, 0, 0),
            members: Vec::new(),
            representative_seed: String::new(),
            canonical_key: key.clone(),
        })
        .collect();
    let mut entries = Vec::with_capacity(valid.len());
    for (idx, (seed, table, structure, key)) in valid.into_iter().enumerate() {
        let class_id = keys[&key];
        let class = &mut classes[class_id];
        if class.members.is_empty() {
            class.structure = structure;
            class.representative_seed = seed.to_string();
        }
        class.members.push(idx);
        entries.push(SeedEntry {
            seed: seed.to_string(),
            seed_table: seed,
            table,
            structure,
            class_id,
        });
    }
    Ok(SeedSearchReport {
        pattern,
        equivalence,
        seeds_total,
        discarded,
        entries,
        classes,
    })
}
