//! Linearized-polynomial descriptions of homogeneous curves.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{Curve, PhasePoint, TranslationMap};
use crate::field::{FieldElement, FieldSpec};

/// Solves the square system `a·x = b` over the field. `None` when singular.
pub fn solve_linear(
    spec: &FieldSpec,
    a: &[Vec<FieldElement>],
    b: &[FieldElement],
) -> Option<Vec<FieldElement>> {
    let n = b.len();
    let mut m: Vec<Vec<FieldElement>> = a
        .iter()
        .zip(b)
        .map(|(row, &r)| row.iter().copied().chain([r]).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = spec.inverse(m[col][col]).ok()?;
        for v in m[col].iter_mut() {
            *v = spec.mul(*v, inv);
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (v, &p) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                    *v = *v + spec.mul(f, p);
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n]).collect())
}

/// `L(x) = Σᵢ cᵢ x^(2ⁱ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearized {
    pub coefficients: Vec<FieldElement>,
}

impl Linearized {
    pub fn new(coefficients: Vec<FieldElement>) -> Self {
        Linearized { coefficients }
    }

    /// Parses `"c0 c1 c2"` as rendered field elements.
    pub fn parse(spec: &FieldSpec, text: &str) -> Result<Self, crate::field::FieldError> {
        let coefficients = text
            .split_whitespace()
            .map(|t| spec.parse_element(t))
            .collect::<Result<_, _>>()?;
        Ok(Linearized { coefficients })
    }

    pub fn eval(&self, spec: &FieldSpec, x: FieldElement) -> FieldElement {
        let mut acc = spec.zero();
        let mut power = x;
        for &c in &self.coefficients {
            acc = acc + spec.mul(c, power);
            power = spec.frobenius(power);
        }
        acc
    }

    pub fn render(&self, spec: &FieldSpec, var: &str) -> String {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| {
                let x = if i == 0 {
                    var.to_string()
                } else {
                    format!("{var}^{}", 1u32 << i)
                };
                if c == spec.one() {
                    x
                } else {
                    format!("{} {x}", spec.render(c))
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// Closed form of a homogeneous curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveForm {
    /// `α = 0`.
    Vertical,
    /// `β = L(α)`.
    Explicit(Linearized),
}

/// Summary of which closed forms a homogeneous curve admits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveFormReport {
    pub size: usize,
    pub vertical: bool,
    pub horizontal: bool,
    /// `β = λα` for this λ.
    #[serde(serialize_with = "ser_opt_element")]
    pub ray_slope: Option<FieldElement>,
    /// Coefficients of `β = Σ cᵢ α^(2ⁱ)` when α is injective on the curve.
    #[serde(skip)]
    pub beta_of_alpha: Option<Linearized>,
    /// Coefficients of `α = Σ cᵢ β^(2ⁱ)` when β is injective on the curve.
    #[serde(skip)]
    pub alpha_of_beta: Option<Linearized>,
    pub beta_of_alpha_text: Option<String>,
    pub alpha_of_beta_text: Option<String>,
    /// Largest number of curve points on one vertical line `α = const`.
    pub max_per_vertical_line: usize,
    /// Largest number of curve points on one horizontal line `β = const`.
    pub max_per_horizontal_line: usize,
    /// Curve points on each occupied horizontal line, keyed by rendered β.
    pub horizontal_counts: BTreeMap<String, usize>,
}

fn ser_opt_element<S: serde::Serializer>(
    v: &Option<FieldElement>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(e) => s.serialize_some(&e.bits()),
        None => s.serialize_none(),
    }
}

impl CurveFormReport {
    pub fn form(&self) -> Option<CurveForm> {
        if self.vertical {
            Some(CurveForm::Vertical)
        } else {
            self.beta_of_alpha.clone().map(CurveForm::Explicit)
        }
    }
}

// fits `target = L(source)` through n points with GF(2)-independent sources
fn fit_map(
    spec: &FieldSpec,
    points: &[PhasePoint],
    source: impl Fn(&PhasePoint) -> FieldElement,
    target: impl Fn(&PhasePoint) -> FieldElement,
) -> Option<Linearized> {
    let n = spec.degree() as usize;
    let mut chosen: Vec<PhasePoint> = Vec::new();
    let mut span = vec![spec.zero()];
    for p in points {
        if chosen.len() == n {
            break;
        }
        let s = source(p);
        if !span.contains(&s) {
            let shifted: Vec<_> = span.iter().map(|&x| x + s).collect();
            span.extend(shifted);
            chosen.push(*p);
        }
    }
    if chosen.len() < n {
        return None;
    }
    let moore: Vec<Vec<FieldElement>> = chosen
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(n);
            let mut x = source(p);
            for _ in 0..n {
                row.push(x);
                x = spec.frobenius(x);
            }
            row
        })
        .collect();
    let rhs: Vec<_> = chosen.iter().map(&target).collect();
    let l = Linearized::new(solve_linear(spec, &moore, &rhs)?);
    points
        .iter()
        .all(|p| l.eval(spec, source(p)) == target(p))
        .then_some(l)
}

pub fn fit_curve_forms(curve: &Curve, map: &TranslationMap) -> CurveFormReport {
    let spec = map.spec();
    let pts = curve.points();
    let vertical = pts.iter().all(|p| p.alpha.is_zero());
    let horizontal = pts.iter().all(|p| p.beta.is_zero());
    let beta_of_alpha = fit_map(spec, pts, |p| p.alpha, |p| p.beta);
    let alpha_of_beta = fit_map(spec, pts, |p| p.beta, |p| p.alpha);
    let ray_slope = beta_of_alpha
        .as_ref()
        .filter(|l| l.coefficients.iter().skip(1).all(|c| c.is_zero()))
        .map(|l| l.coefficients[0]);
    let mut vcount: BTreeMap<FieldElement, usize> = BTreeMap::new();
    let mut hcount: BTreeMap<FieldElement, usize> = BTreeMap::new();
    for p in pts {
        *vcount.entry(p.alpha).or_default() += 1;
        *hcount.entry(p.beta).or_default() += 1;
    }
    CurveFormReport {
        size: pts.len(),
        vertical,
        horizontal,
        ray_slope,
        beta_of_alpha_text: beta_of_alpha
            .as_ref()
            .map(|l| format!("b = {}", l.render(spec, "a"))),
        alpha_of_beta_text: alpha_of_beta
            .as_ref()
            .map(|l| format!("a = {}", l.render(spec, "b"))),
        beta_of_alpha,
        alpha_of_beta,
        max_per_vertical_line: vcount.values().copied().max().unwrap_or(0),
        max_per_horizontal_line: hcount.values().copied().max().unwrap_or(0),
        horizontal_counts: hcount
            .into_iter()
            .map(|(b, c)| (spec.render(b), c))
            .collect(),
    }
}

/// `κ ↦ (α(κ), β(κ))` with both coordinates linearized in κ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parametric {
    pub alpha: Linearized,
    pub beta: Linearized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParametricCheck {
    /// `(κ, image, on curve)` for every κ, rendered.
    pub images: Vec<(String, String, bool)>,
    pub on_curve: usize,
    pub distinct_images: usize,
    /// The images are exactly the curve.
    pub matches_curve: bool,
}

impl Parametric {
    pub fn point(&self, spec: &FieldSpec, k: FieldElement) -> PhasePoint {
        PhasePoint::new(self.alpha.eval(spec, k), self.beta.eval(spec, k))
    }

    pub fn check(&self, curve: &Curve, map: &TranslationMap) -> ParametricCheck {
        let spec = map.spec();
        let mut images = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        let mut on_curve = 0;
        for k in spec.elements() {
            let p = self.point(spec, k);
            let hit = curve.contains(&p);
            on_curve += usize::from(hit);
            seen.insert(p);
            images.push((spec.render(k), map.render_point(p), hit));
        }
        ParametricCheck {
            matches_curve: on_curve == spec.order() && seen.len() == curve.len(),
            distinct_images: seen.len(),
            on_curve,
            images,
        }
    }
}

/// `L₁(β) = L₂(α)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedRelation {
    pub beta: Linearized,
    pub alpha: Linearized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub curve_size: usize,
    pub satisfied_on_curve: usize,
    /// Number of grid points satisfying the relation.
    pub solutions: usize,
    pub contains_curve: bool,
    pub equals_curve: bool,
}

impl LinearizedRelation {
    pub fn holds(&self, spec: &FieldSpec, p: PhasePoint) -> bool {
        self.beta.eval(spec, p.beta) == self.alpha.eval(spec, p.alpha)
    }

    pub fn check(&self, curve: &Curve, map: &TranslationMap) -> RelationCheck {
        let spec = map.spec();
        let satisfied_on_curve = curve
            .points()
            .iter()
            .filter(|&&p| self.holds(spec, p))
            .count();
        let solutions = map
            .points()
            .into_iter()
            .filter(|&p| self.holds(spec, p))
            .count();
        let contains_curve = satisfied_on_curve == curve.len();
        RelationCheck {
            curve_size: curve.len(),
            satisfied_on_curve,
            solutions,
            contains_curve,
            equals_curve: contains_curve && solutions == curve.len(),
        }
    }
}

impl fmt::Display for CurveForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveForm::Vertical => write!(f, "a = 0"),
            CurveForm::Explicit(l) => {
                write!(f, "b = L(a) with {} coefficients", l.coefficients.len())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mubtab::{expand_seed, SeedTable};
    use crate::phasespace::curve_from_row;

    fn curve(first: &str, second: &str, row: usize) -> (Curve, TranslationMap) {
        let map = TranslationMap::gf8();
        let t = expand_seed(&SeedTable::parse(first, second).unwrap());
        (curve_from_row(t.row(row), &map).unwrap(), map)
    }

    #[test]
    fn solve_small_system() {
        let spec = FieldSpec::gf8();
        let u = |k| spec.primitive_power(k);
        let a = vec![vec![u(1), u(2)], vec![u(3), spec.one()]];
        let x = vec![u(5), u(6)];
        let b: Vec<_> = a
            .iter()
            .map(|r| spec.mul(r[0], x[0]) + spec.mul(r[1], x[1]))
            .collect();
        assert_eq!(solve_linear(&spec, &a, &b).unwrap(), x);
        let singular = vec![vec![u(1), u(2)], vec![u(2), u(3)]];
        assert!(solve_linear(&spec, &singular, &b).is_none());
    }

    #[test]
    fn rays_have_slopes() {
        let (z, map) = curve("ZII IIZ IZI", "XII IXI IIX", 0);
        let r = fit_curve_forms(&z, &map);
        assert!(r.vertical && r.beta_of_alpha.is_none());
        assert_eq!(r.form(), Some(CurveForm::Vertical));
        let (x, map) = curve("ZII IIZ IZI", "XII IXI IIX", 1);
        let r = fit_curve_forms(&x, &map);
        assert!(r.horizontal);
        assert_eq!(r.ray_slope, Some(map.spec().zero()));
    }

    #[test]
    fn explicit_form_reproduces_curve() {
        let (c, map) = curve("ZII IIZ IZI", "XII IXI IIX", 2);
        let r = fit_curve_forms(&c, &map);
        let l = r.beta_of_alpha.clone().unwrap();
        for p in c.points() {
            assert_eq!(l.eval(map.spec(), p.alpha), p.beta);
        }
        assert_eq!(r.max_per_vertical_line, 1);
    }

    #[test]
    fn linearized_render() {
        let spec = FieldSpec::gf8();
        let l = Linearized::parse(&spec, "u^6 0 1").unwrap();
        assert_eq!(l.render(&spec, "a"), "u^6 a + a^4");
    }
}
