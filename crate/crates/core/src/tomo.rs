//! Simulated tomography in the nine bases of a table.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures::{resolve_table, FixtureError};
use crate::linalg::{self, CMatrix};
use crate::mubtab::structure_signature;
use crate::phasespace::TranslationMap;
use crate::wigner::{NetSpec, QuantumNet, WignerError, WignerTable};

/// Recorded with every sampled result.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream k for basis k; multinomial as sequential Binomial (rand_distr 0.5)";

#[derive(Debug, Error)]
pub enum TomoError {
    #[error(transparent)]
    Wigner(#[from] WignerError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("shots per basis must be positive")]
    NoShots,
    #[error("counts cover {got} bases with {outcomes} outcomes, expected {expected} bases")]
    Incomplete {
        expected: usize,
        got: usize,
        outcomes: usize,
    },
    #[error("basis {basis} counts sum to {got}, expected {expected}")]
    BadTotal {
        basis: usize,
        expected: u64,
        got: u64,
    },
    #[error("malformed counts CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub table: String,
    #[serde(default)]
    pub net: Option<NetSpec>,
    pub shots: u64,
    pub seed: u64,
}

/// Outcome counts, `counts[k][j]` for sign pattern `j` of basis `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub shots: u64,
    pub counts: Vec<Vec<u64>>,
}

impl CountsRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("basis,outcome,count\n");
        for (k, row) in self.counts.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let _ = writeln!(out, "{},{j},{c}", k + 1);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TomoError> {
        let mut counts: Vec<Vec<u64>> = Vec::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match f.as_slice() {
                [k, j, c] => k
                    .parse::<usize>()
                    .ok()
                    .zip(j.parse::<usize>().ok())
                    .zip(c.parse::<u64>().ok()),
                _ => None,
            };
            let ((k, j), c) = parsed.ok_or_else(|| TomoError::Csv(format!("line {}", i + 1)))?;
            if k == 0 {
                return Err(TomoError::Csv(format!(
                    "line {}: bases count from 1",
                    i + 1
                )));
            }
            if counts.len() < k {
                counts.resize(k, Vec::new());
            }
            if counts[k - 1].len() <= j {
                counts[k - 1].resize(j + 1, 0);
            }
            counts[k - 1][j] = c;
        }
        let shots = counts.first().map_or(0, |r| r.iter().sum());
        Ok(CountsRecord { shots, counts })
    }

    fn validate(&self, bases: usize, outcomes: usize) -> Result<(), TomoError> {
        if self.counts.len() != bases || self.counts.iter().any(|r| r.len() != outcomes) {
            return Err(TomoError::Incomplete {
                expected: bases,
                got: self.counts.len(),
                outcomes,
            });
        }
        for (k, r) in self.counts.iter().enumerate() {
            let total: u64 = r.iter().sum();
            if total != self.shots {
                return Err(TomoError::BadTotal {
                    basis: k + 1,
                    expected: self.shots,
                    got: total,
                });
            }
        }
        Ok(())
    }
}

/// Born probabilities `Tr(ρ P_{k,j})`, indexed by basis and sign pattern.
pub fn exact_probabilities(rho: &CMatrix, net: &QuantumNet) -> Vec<Vec<f64>> {
    net.bases()
        .iter()
        .map(|b| {
            b.projectors()
                .iter()
                .map(|p| linalg::trace_product(rho, p).re)
                .collect()
        })
        .collect()
}

/// Draws `shots` outcomes per basis from the Born distribution of `rho`.
pub fn simulate(
    rho: &CMatrix,
    net: &QuantumNet,
    shots: u64,
    seed: u64,
) -> Result<CountsRecord, TomoError> {
    if shots == 0 {
        return Err(TomoError::NoShots);
    }
    crate::wigner::DensityMatrix::new(rho.clone())?;
    let probs = exact_probabilities(rho, net);
    let mut counts = Vec::with_capacity(probs.len());
    for (k, p) in probs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let clipped: Vec<f64> = p.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let mut mass: f64 = clipped.iter().sum();
        let mut left = shots;
        let mut row = Vec::with_capacity(p.len());
        for (j, &pj) in clipped.iter().enumerate() {
            let c = if j + 1 == clipped.len() || left == 0 {
                left
            } else {
                let q = if mass > 0.0 {
                    (pj / mass).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                Binomial::new(left, q)
                    .expect("probability in [0, 1]")
                    .sample(&mut rng)
            };
            row.push(c);
            left -= c;
            mass -= pj;
        }
        counts.push(row);
    }
    Ok(CountsRecord { shots, counts })
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub wigner: WignerTable,
    pub rho: CMatrix,
}

/// Linear inversion from per-pattern probabilities.
pub fn reconstruct_from_probabilities(probs: &[Vec<f64>], net: &QuantumNet) -> Reconstruction {
    let q: Vec<Vec<f64>> = (0..net.bases().len())
        .map(|k| {
            (0..net.striations()[k].lines().len())
                .map(|l| probs[k][net.line_pattern(k, l)])
                .collect()
        })
        .collect();
    let wigner = net.wigner_from_probabilities(&q);
    let rho = crate::wigner::invert(&wigner, net);
    Reconstruction { wigner, rho }
}

/// Linear inversion from sampled counts. The estimate may fail positivity.
pub fn reconstruct(counts: &CountsRecord, net: &QuantumNet) -> Result<Reconstruction, TomoError> {
    counts.validate(net.bases().len(), net.dim())?;
    let shots = counts.shots as f64;
    let probs: Vec<Vec<f64>> = counts
        .counts
        .iter()
        .map(|r| r.iter().map(|&c| c as f64 / shots).collect())
        .collect();
    Ok(reconstruct_from_probabilities(&probs, net))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomoReport {
    pub table: String,
    pub net: NetSpec,
    pub shots: u64,
    pub seed: u64,
    pub rng: String,
    pub trace_distance: f64,
    pub min_eigenvalue: f64,
    pub wigner_sum: f64,
}

/// Simulates and reconstructs `rho` according to `plan`.
pub fn run_plan(
    plan: &ExperimentPlan,
    rho: &CMatrix,
) -> Result<(TomoReport, CountsRecord, Reconstruction), TomoError> {
    let (id, table) = resolve_table(&plan.table)?;
    let map = TranslationMap::default_for(table.num_qubits() as u32).map_err(WignerError::from)?;
    let net = match &plan.net {
        Some(spec) => QuantumNet::with_assignment(&table, &map, &spec.ray_assignment)?,
        None => QuantumNet::default_for(&table, &map)?,
    };
    let counts = simulate(rho, &net, plan.shots, plan.seed)?;
    let rec = reconstruct(&counts, &net)?;
    let report = TomoReport {
        table: id,
        net: net.describe(),
        shots: plan.shots,
        seed: plan.seed,
        rng: RNG_DESCRIPTION.into(),
        trace_distance: linalg::trace_distance(&rec.rho, rho),
        min_eigenvalue: linalg::hermitian_eigenvalues(&rec.rho)[0],
        wigner_sum: rec.wigner.sum(),
    };
    Ok((report, counts, rec))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub shots: u64,
    pub mean_trace_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of log(distance) against log(shots).
    pub slope: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub rng: String,
}

/// Mean trace distance over `repetitions` runs per budget; run `r` at
/// budget index `i` uses seed `seed + 1000·i + r`.
pub fn scaling_study(
    rho: &CMatrix,
    net: &QuantumNet,
    budgets: &[u64],
    repetitions: usize,
    seed: u64,
) -> Result<ScalingReport, TomoError> {
    let mut points = Vec::with_capacity(budgets.len());
    for (i, &shots) in budgets.iter().enumerate() {
        let mut acc = 0.0;
        for r in 0..repetitions {
            let counts = simulate(rho, net, shots, seed + 1000 * i as u64 + r as u64)?;
            acc += linalg::trace_distance(&reconstruct(&counts, net)?.rho, rho);
        }
        points.push(ScalingPoint {
            shots,
            mean_trace_distance: acc / repetitions as f64,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.shots as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_trace_distance.ln()).collect();
    Ok(ScalingReport {
        slope: least_squares_slope(&xs, &ys),
        points,
        repetitions,
        seed,
        rng: RNG_DESCRIPTION.into(),
    })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureRow {
    pub table: String,
    pub structure: String,
    pub exact_error: f64,
    pub sampled_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureComparison {
    pub shots: u64,
    pub seed: u64,
    pub rng: String,
    pub rows: Vec<StructureRow>,
}

impl StructureComparison {
    pub fn to_text(&self) -> String {
        let mut out = format!("shots per basis {}, seed {}\n", self.shots, self.seed);
        let _ = writeln!(
            out,
            "{:<8} {:<9} {:>12} {:>12}",
            "table", "structure", "exact", "sampled"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:<9} {:>12.3e} {:>12.6}",
                r.table, r.structure, r.exact_error, r.sampled_error
            );
        }
        out
    }
}

/// Reconstruction error of the same state and budget across tables.
pub fn compare_structures(
    rho: &CMatrix,
    tables: &[&str],
    shots: u64,
    seed: u64,
) -> Result<StructureComparison, TomoError> {
    let mut rows = Vec::new();
    for &t in tables {
        let (id, table) = resolve_table(t)?;
        let map =
            TranslationMap::default_for(table.num_qubits() as u32).map_err(WignerError::from)?;
        let net = QuantumNet::default_for(&table, &map)?;
        let exact = reconstruct_from_probabilities(&exact_probabilities(rho, &net), &net);
        let sampled = reconstruct(&simulate(rho, &net, shots, seed)?, &net)?;
        rows.push(StructureRow {
            table: id,
            structure: structure_signature(&table)
                .map_err(WignerError::from)?
                .to_string(),
            exact_error: linalg::trace_distance(&exact.rho, rho),
            sampled_error: linalg::trace_distance(&sampled.rho, rho),
        });
    }
    Ok(StructureComparison {
        shots,
        seed,
        rng: RNG_DESCRIPTION.into(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::builtin;
    use crate::wigner::DensityMatrix;

    fn net() -> QuantumNet {
        let t = builtin("table1").unwrap().table().unwrap();
        QuantumNet::default_for(&t, &TranslationMap::gf8()).unwrap()
    }

    #[test]
    fn eigenstate_counts_are_certain() {
        let net = net();
        for k in [0, 4, 8] {
            let rho = net.bases()[k].projector(5).clone();
            let c = simulate(&rho, &net, 500, 9).unwrap();
            assert_eq!(c.counts[k][5], 500);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let net = net();
        let rho = DensityMatrix::named("random:2", 3).unwrap();
        let a = simulate(rho.matrix(), &net, 1000, 7).unwrap();
        assert_eq!(a, simulate(rho.matrix(), &net, 1000, 7).unwrap());
        assert_ne!(a, simulate(rho.matrix(), &net, 1000, 8).unwrap());
        assert!(a.counts.iter().all(|r| r.iter().sum::<u64>() == 1000));
    }

    #[test]
    fn exact_inversion() {
        let net = net();
        let rho = DensityMatrix::named("pure:4", 3).unwrap();
        let rec = reconstruct_from_probabilities(&exact_probabilities(rho.matrix(), &net), &net);
        assert!(linalg::max_abs_diff(&rec.rho, rho.matrix()) < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(8);
        let rec = reconstruct_from_probabilities(&exact_probabilities(mixed.matrix(), &net), &net);
        assert!(
            rec.wigner
                .max_abs_diff(&WignerTable::uniform(8, 1.0 / 64.0))
                < 1e-14
        );
    }

    #[test]
    fn sampled_estimate_is_normalized() {
        let net = net();
        let rho = DensityMatrix::named("random:3", 3).unwrap();
        let rec = reconstruct(&simulate(rho.matrix(), &net, 100, 1).unwrap(), &net).unwrap();
        assert!((rec.wigner.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counts_csv_round_trip_and_validation() {
        let net = net();
        let rho = DensityMatrix::maximally_mixed(8);
        let c = simulate(rho.matrix(), &net, 64, 0).unwrap();
        let back = CountsRecord::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
        let short = CountsRecord {
            shots: 64,
            counts: c.counts[..8].to_vec(),
        };
        assert!(matches!(
            reconstruct(&short, &net),
            Err(TomoError::Incomplete { .. })
        ));
        assert!(matches!(
            simulate(rho.matrix(), &net, 0, 0),
            Err(TomoError::NoShots)
        ));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs = [1.0f64, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 4.0 - 0.5 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 0.5).abs() < 1e-14);
    }
}
