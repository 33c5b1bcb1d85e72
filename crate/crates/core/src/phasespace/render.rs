//! Text grids and structured export of striations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use super::{PhaseError, PhasePoint, Striation, TranslationMap};

/// How table rows are labeled in a rendered grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Labeling {
    /// Row 2 prints `1`, row 1 prints `2`, row k ≥ 3 prints `k`.
    #[default]
    Figure,
    /// Row k prints `k`.
    Row,
}

impl Labeling {
    /// Label of the 0-based table row `r`.
    pub fn label(self, r: usize) -> String {
        match (self, r) {
            (Labeling::Figure, 0) => "2".into(),
            (Labeling::Figure, 1) => "1".into(),
            _ => (r + 1).to_string(),
        }
    }
}

impl FromStr for Labeling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "figure" => Ok(Labeling::Figure),
            "row" => Ok(Labeling::Row),
            _ => Err(format!("unknown labeling {s:?} (expected figure or row)")),
        }
    }
}

/// Marks the homogeneous curve of every striation, shifted by `displacement`,
/// with its label. The shifted origin prints `o`, unmarked cells `.`, and a
/// cell claimed by two curves `*`. The top line is β = μ^(N−2), the bottom
/// β = 0; columns run 0, 1, μ, μ², …
pub fn render_grid(
    striations: &[Striation],
    map: &TranslationMap,
    labeling: Labeling,
    displacement: Option<PhasePoint>,
) -> String {
    let cells = grid_cells(striations, map, labeling, displacement);
    let mut out = String::new();
    for row in cells.iter().rev() {
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

// cells[β ordinal][α ordinal]
fn grid_cells(
    striations: &[Striation],
    map: &TranslationMap,
    labeling: Labeling,
    displacement: Option<PhasePoint>,
) -> Vec<Vec<String>> {
    let spec = map.spec();
    let size = map.size();
    let v = displacement.unwrap_or_else(|| map.origin());
    let mut cells = vec![vec![".".to_string(); size]; size];
    for s in striations {
        let label = labeling.label(s.row_index);
        for &p in s.ray().points() {
            let q = p + v;
            let cell = &mut cells[spec.ordinal(q.beta)][spec.ordinal(q.alpha)];
            *cell = if cell == "." {
                label.clone()
            } else {
                "*".into()
            };
        }
    }
    cells[spec.ordinal(v.beta)][spec.ordinal(v.alpha)] = "o".into();
    cells
}

/// Splits a text grid into whitespace-separated tokens, top line first.
pub fn parse_grid(text: &str) -> Result<Vec<Vec<String>>, PhaseError> {
    let rows: Vec<Vec<String>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || rows.iter().any(|r| r.len() != width) || rows.len() != width {
        return Err(PhaseError::BadGrid(
            "grid must be square and non-empty".into(),
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellMismatch {
    pub alpha: String,
    pub beta: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FigureDiff {
    pub total: usize,
    pub matching: usize,
    pub mismatches: Vec<CellMismatch>,
}

impl FigureDiff {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Cell-wise comparison of two text grids over the field of `map`.
pub fn compare_grids(
    expected: &str,
    actual: &str,
    map: &TranslationMap,
) -> Result<FigureDiff, PhaseError> {
    let e = parse_grid(expected)?;
    let a = parse_grid(actual)?;
    let size = map.size();
    if e.len() != size || a.len() != size {
        return Err(PhaseError::BadGrid(format!("expected {size}×{size} grids")));
    }
    let els = map.spec().elements();
    let mut mismatches = Vec::new();
    for (top, (er, ar)) in e.iter().zip(&a).enumerate() {
        let beta = els[size - 1 - top];
        for (col, (ec, ac)) in er.iter().zip(ar).enumerate() {
            if ec != ac {
                mismatches.push(CellMismatch {
                    alpha: map.spec().render(els[col]),
                    beta: map.spec().render(beta),
                    expected: ec.clone(),
                    actual: ac.clone(),
                });
            }
        }
    }
    Ok(FigureDiff {
        total: size * size,
        matching: size * size - mismatches.len(),
        mismatches,
    })
}

/// A label substitution applied to the rendered grid before diffing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelabeledDiff {
    /// Rendered label → printed label, only for labels that change.
    pub mapping: BTreeMap<String, String>,
    pub diff: FigureDiff,
}

/// Finds the one-to-one label substitution that agrees with `expected` on
/// the most cells (greedy by co-occurrence count) and diffs under it.
pub fn best_relabeling(
    expected: &str,
    actual: &str,
    map: &TranslationMap,
) -> Result<RelabeledDiff, PhaseError> {
    let e = parse_grid(expected)?;
    let a = parse_grid(actual)?;
    let mut pairs: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (er, ar) in e.iter().zip(&a) {
        for (ec, ac) in er.iter().zip(ar) {
            *pairs.entry((ac.clone(), ec.clone())).or_default() += 1;
        }
    }
    let mut ranked: Vec<_> = pairs.into_iter().collect();
    ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    let mut forward: BTreeMap<String, String> = BTreeMap::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    for ((from, to), _) in ranked {
        if !forward.contains_key(&from) && !used.contains(&to) {
            used.insert(to.clone());
            forward.insert(from, to);
        }
    }
    let relabeled: String = a
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| forward.get(c).unwrap_or(c).as_str())
                .collect::<Vec<_>>()
                .join(" ")
                + "\n"
        })
        .collect();
    let diff = compare_grids(expected, &relabeled, map)?;
    forward.retain(|k, v| k != v);
    Ok(RelabeledDiff {
        mapping: forward,
        diff,
    })
}

fn log_or_empty(map: &TranslationMap, e: crate::field::FieldElement) -> String {
    map.spec()
        .discrete_log(e)
        .map(|k| k.to_string())
        .unwrap_or_default()
}

/// One CSV record per point of every line. Zero has an empty log column.
pub fn curves_csv(striations: &[Striation], map: &TranslationMap, labeling: Labeling) -> String {
    let mut out = String::from("striation,label,line,alpha,beta,alpha_log,beta_log\n");
    for s in striations {
        for (li, line) in s.lines().iter().enumerate() {
            for &p in line.points() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    s.row_index + 1,
                    labeling.label(s.row_index),
                    li,
                    map.spec().render(p.alpha),
                    map.spec().render(p.beta),
                    log_or_empty(map, p.alpha),
                    log_or_empty(map, p.beta)
                );
            }
        }
    }
    out
}

/// Structured export: discrete-log coordinate pairs, `null` for zero.
pub fn curves_json(
    striations: &[Striation],
    map: &TranslationMap,
    labeling: Labeling,
) -> serde_json::Value {
    let spec = map.spec();
    let coords = |p: &PhasePoint| json!([spec.discrete_log(p.alpha), spec.discrete_log(p.beta)]);
    json!({
        "field": { "n": spec.degree(), "polynomial": spec.poly_string() },
        "basis": map.basis().elements().iter().map(|&d| spec.render(d)).collect::<Vec<_>>(),
        "striations": striations.iter().map(|s| json!({
            "row": s.row_index + 1,
            "label": labeling.label(s.row_index),
            "lines": s.lines().iter().map(|l| l.points().iter().map(coords).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mubtab::{expand_seed, SeedTable};
    use crate::phasespace::striations_for_table;

    #[test]
    fn table1_cells() {
        let map = TranslationMap::gf8();
        let t = expand_seed(&SeedTable::parse("ZII IIZ IZI", "XII IXI IIX").unwrap());
        let s = striations_for_table(&t, &map).unwrap();
        let grid = render_grid(&s, &map, Labeling::Figure, None);
        let rows = parse_grid(&grid).unwrap();
        assert_eq!(rows[7].join(" "), "o 1 1 1 1 1 1 1");
        // α = μ³ is column 4, β = μ⁶ is the top line
        assert_eq!(rows[0][4], "4");
        assert!(rows.iter().take(7).all(|r| r[0] == "2"));
    }

    #[test]
    fn diff_reports_cells() {
        let map = TranslationMap::default_for(1).unwrap();
        let d = compare_grids("2 .\no 1", "2 3\no 1", &map).unwrap();
        assert_eq!(d.matching, 3);
        assert_eq!(d.mismatches[0].alpha, "1");
        assert_eq!(d.mismatches[0].beta, "1");
        assert!(parse_grid("1 2\n3").is_err());
    }

    #[test]
    fn relabeling_recovers_permuted_labels() {
        let map = TranslationMap::default_for(1).unwrap();
        let r = best_relabeling("2 3\no 1", "3 2\no 1", &map).unwrap();
        assert!(r.diff.is_exact());
        assert_eq!(r.mapping.get("3").map(String::as_str), Some("2"));
        assert_eq!(r.mapping.len(), 2);
    }

    #[test]
    fn labels() {
        assert_eq!(Labeling::Figure.label(0), "2");
        assert_eq!(Labeling::Figure.label(1), "1");
        assert_eq!(Labeling::Figure.label(5), "6");
        assert_eq!(Labeling::Row.label(0), "1");
        assert_eq!("row".parse::<Labeling>().unwrap(), Labeling::Row);
    }
}
