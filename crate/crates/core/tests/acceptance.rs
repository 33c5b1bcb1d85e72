//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mubwigner::field::{FieldSpec, SelfDualBasis};
use mubwigner::fixtures::{all_builtin, builtin, figure};
use mubwigner::linalg::{self, CMatrix};
use mubwigner::mubtab::{
    enumerate_seeds, expand_seed, structure_signature, verify_mub, Equivalence, GeneratorTable,
    MubStructure, SeedPattern, MUB_TOLERANCE,
};
use mubwigner::phasespace::{
    best_relabeling, compare_grids, curve_from_row, fit_curve_forms, parse_grid, render_grid,
    striations_for_table, verify_geometry, Curve, Labeling, Linearized, LinearizedRelation,
    Parametric, PhasePoint, TranslationMap,
};
use mubwigner::tomo::{exact_probabilities, reconstruct_from_probabilities, scaling_study};
use mubwigner::wigner::{
    check_covariance, count_nets, invert, marginal, search_factorizable_point_operator, wigner,
    DensityMatrix, QuantumNet,
};

const TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// Schoolbook GF(8) product modulo θ³+θ+1, written independently of the crate.
fn gf8_mul(a: u32, b: u32) -> u32 {
    let mut acc = 0u32;
    for i in 0..3 {
        if (b >> i) & 1 == 1 {
            acc ^= a << i;
        }
    }
    for bit in (3..5).rev() {
        if (acc >> bit) & 1 == 1 {
            acc ^= 0b1011 << (bit - 3);
        }
    }
    acc
}

fn gf8_pow(k: u32) -> u32 {
    (0..k).fold(1, |acc, _| gf8_mul(acc, 0b010))
}

fn gf8_trace(a: u32) -> u32 {
    let a2 = gf8_mul(a, a);
    let a4 = gf8_mul(a2, a2);
    a ^ a2 ^ a4
}

fn criterion_1() -> Outcome {
    let u = gf8_pow;
    // printed expansions over {μ³, μ⁵, μ⁶}
    ensure(u(0) == u(3) ^ u(5) ^ u(6), "1 = u^3 + u^5 + u^6")?;
    ensure(u(1) == u(5) ^ u(6), "u = u^5 + u^6")?;
    ensure(u(2) == u(3) ^ u(5), "u^2 = u^3 + u^5")?;
    ensure(u(4) == u(3) ^ u(6), "u^4 = u^3 + u^6")?;
    let spec = FieldSpec::gf8();
    for k in 0..7 {
        ensure(
            spec.primitive_power(k).bits() == u(k as u32),
            format!("u^{k} disagrees with oracle"),
        )?;
    }
    let basis: Vec<_> = [3, 5, 6].iter().map(|&k| spec.primitive_power(k)).collect();
    for (i, &a) in basis.iter().enumerate() {
        for (j, &b) in basis.iter().enumerate() {
            let t = gf8_trace(gf8_mul(a.bits(), b.bits()));
            ensure(t == u32::from(i == j), "oracle Gram test")?;
            ensure(spec.trace(spec.mul(a, b)) == (i == j), "crate Gram test")?;
        }
    }
    SelfDualBasis::new(&spec, basis.clone()).map_err(|e| e.to_string())?;
    ensure(
        spec.default_self_dual_basis()
            .map_err(|e| e.to_string())?
            .elements()
            == basis.as_slice(),
        "default basis",
    )?;
    Ok("4 expansions and 9 Gram entries exact".into())
}

fn criterion_2() -> Outcome {
    let f = builtin("table1").map_err(|e| e.to_string())?;
    let printed = f.rows.clone().ok_or("fixture lacks printed rows")?;
    let expanded = expand_seed(
        &f.seed_table()
            .map_err(|e| e.to_string())?
            .ok_or("no seed")?,
    );
    let mut cells = 0;
    for (r, line) in printed.iter().enumerate() {
        for (c, cell) in line.split_whitespace().enumerate() {
            let got = expanded.cell(r + 1, c + 1).phase_free().to_string();
            ensure(
                got == cell,
                format!("cell ({},{}) printed {cell} expanded {got}", r + 1, c + 1),
            )?;
            cells += 1;
        }
    }
    ensure(cells == 63, format!("{cells} cells compared"))?;
    Ok("63/63 cells".into())
}

fn table_ids() -> Vec<String> {
    all_builtin().into_iter().map(|f| f.id).collect()
}

fn table(id: &str) -> GeneratorTable {
    builtin(id).expect("fixture").table().expect("table")
}

fn criterion_3() -> Outcome {
    let mut total = 0;
    let mut worst = 0.0f64;
    for id in table_ids() {
        let t = table(&id);
        let bases = t.bases().map_err(|e| e.to_string())?;
        let report = verify_mub(&bases).map_err(|e| e.to_string())?;
        ensure(report.passed, format!("{id}: crate verification failed"))?;
        // dense overlaps |⟨e|f⟩|² = Tr(PQ) for rank-one projectors
        let mut overlaps = 0;
        for (i, a) in bases.iter().enumerate() {
            for p in a.projectors() {
                ensure((linalg::trace(p).re - 1.0).abs() < MUB_TOLERANCE, "rank")?;
                ensure(
                    linalg::max_abs_diff(&(p * p), p) < MUB_TOLERANCE,
                    "idempotent",
                )?;
            }
            for b in &bases[i + 1..] {
                for p in a.projectors() {
                    for q in b.projectors() {
                        let d = (linalg::trace_product(p, q).re - 0.125).abs();
                        worst = worst.max(d);
                        ensure(d < MUB_TOLERANCE, format!("{id}: overlap off by {d:e}"))?;
                        overlaps += 1;
                    }
                }
            }
        }
        ensure(overlaps == 2304, format!("{id}: {overlaps} overlaps"))?;
        total += overlaps;
    }
    Ok(format!(
        "{total} overlaps over 10 tables, max deviation {worst:.1e}"
    ))
}

// Schmidt rank of a 3-qubit vector across qubit q | rest, from a 2×4 reshape.
fn schmidt_rank(psi: &[Complex64], q: usize) -> usize {
    let m = DMatrix::from_fn(2, 4, |b, r| {
        let hi = r >> (2 - q);
        let lo = r & ((1 << (2 - q)) - 1);
        psi[(hi << (3 - q)) | (b << (2 - q)) | lo]
    });
    m.singular_values().iter().filter(|&&s| s > 1e-9).count()
}

fn oracle_structure(t: &GeneratorTable) -> MubStructure {
    let mut counts = [0usize; 3];
    for b in t.bases().expect("bases") {
        let mut classes = BTreeSet::new();
        for p in b.projectors() {
            let col = (0..8)
                .max_by(|&i, &j| p[(i, i)].re.total_cmp(&p[(j, j)].re))
                .expect("column");
            let norm = p[(col, col)].re.sqrt();
            let psi: Vec<Complex64> = (0..8).map(|i| p[(i, col)] / norm).collect();
            let product_cuts = (0..3).filter(|&q| schmidt_rank(&psi, q) == 1).count();
            classes.insert(match product_cuts {
                3 => 0,
                1 => 1,
                _ => 2,
            });
        }
        assert_eq!(classes.len(), 1, "mixed classes within one basis");
        counts[classes.into_iter().next().expect("class")] += 1;
    }
    MubStructure::new(counts[0], counts[1], counts[2])
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    for f in all_builtin() {
        let t = f.table().map_err(|e| e.to_string())?;
        let expected = f
            .expected_structure()
            .map_err(|e| e.to_string())?
            .ok_or("no structure")?;
        let got = structure_signature(&t).map_err(|e| e.to_string())?;
        let oracle = oracle_structure(&t);
        ensure(
            got == expected,
            format!("{}: got {got}, printed {expected}", f.id),
        )?;
        ensure(
            oracle == expected,
            format!("{}: Schmidt oracle {oracle}", f.id),
        )?;
        lines.push(format!("{}={got}", f.id));
    }
    Ok(lines.join(" "))
}

fn render_figure(name: &str, map: &TranslationMap) -> Result<(String, String), String> {
    let (f, fig) = figure(name).ok_or(format!("no figure {name}"))?;
    let t = f.table().map_err(|e| e.to_string())?;
    let s = striations_for_table(&t, map).map_err(|e| e.to_string())?;
    let g = verify_geometry(&s, map);
    ensure(g.passed(), format!("{name}: geometry {:?}", g.failures))?;
    let disp = fig
        .displacement
        .as_deref()
        .map(|d| map.parse_point(d))
        .transpose()
        .map_err(|e| e.to_string())?;
    Ok((
        fig.grid.clone(),
        render_grid(&s, map, Labeling::Figure, disp),
    ))
}

fn criterion_5() -> Outcome {
    let map = TranslationMap::gf8();
    let mut notes = Vec::new();
    for name in ["fig1", "fig3l", "fig3r"] {
        let (printed, rendered) = render_figure(name, &map)?;
        let d = compare_grids(&printed, &rendered, &map).map_err(|e| e.to_string())?;
        ensure(
            d.is_exact(),
            format!("{name}: {}/64, {:?}", d.matching, d.mismatches),
        )?;
        notes.push(format!("{name} 64/64"));
    }
    let fig1 = parse_grid(&render_figure("fig1", &map)?.1).map_err(|e| e.to_string())?;
    ensure(fig1[7].join(" ") == "o 1 1 1 1 1 1 1", "fig1 bottom row")?;
    ensure(fig1[0][4] == "4", "fig1 cell (u^3, u^6)")?;
    for name in ["fig2l", "fig2r", "fig4", "fig5", "fig6"] {
        let (printed, rendered) = render_figure(name, &map)?;
        let d = compare_grids(&printed, &rendered, &map).map_err(|e| e.to_string())?;
        let r = best_relabeling(&printed, &rendered, &map).map_err(|e| e.to_string())?;
        notes.push(format!(
            "{name} {}/64 (suspected typos: {}; after relabeling {:?}: {}/64)",
            d.matching,
            d.mismatches.len(),
            r.mapping,
            r.diff.matching
        ));
    }
    Ok(notes.join("; "))
}

fn curve_of(id: &str, row: usize, map: &TranslationMap) -> Result<Curve, String> {
    curve_from_row(table(id).row(row), map).map_err(|e| e.to_string())
}

fn lin(spec: &FieldSpec, text: &str) -> Linearized {
    Linearized::parse(spec, text).expect("coefficients")
}

fn criterion_6() -> Outcome {
    let map = TranslationMap::gf8();
    let spec = map.spec().clone();
    let mut notes = Vec::new();

    // table1 row 3: β² + μβ = α² + μα
    let c3 = curve_of("table1", 2, &map)?;
    let implicit = LinearizedRelation {
        beta: lin(&spec, "u 1"),
        alpha: lin(&spec, "u 1"),
    };
    let rc = implicit.check(&c3, &map);
    ensure(
        rc.satisfied_on_curve == 8,
        format!("implicit holds on {}/8", rc.satisfied_on_curve),
    )?;
    ensure(
        rc.solutions == 16 && !rc.equals_curve,
        format!("implicit has {} solutions", rc.solutions),
    )?;
    let fitted = fit_curve_forms(&c3, &map)
        .beta_of_alpha
        .ok_or("curve 3 has no explicit form")?;
    ensure(
        fitted == lin(&spec, "u^6 u^3 u^5"),
        format!("fitted {}", fitted.render(&spec, "a")),
    )?;
    let param = Parametric {
        alpha: lin(&spec, "u^3 u^5 u^6"),
        beta: lin(&spec, "u^2 1 u^4"),
    };
    let at_one = param.point(&spec, spec.one());
    let pc = param.check(&c3, &map);
    notes.push(format!(
        "T1 c3: implicit 8/8 (16 solutions), explicit b = {}; parametric at k=1 gives {} (on curve: {}), {}/8 images on curve",
        fitted.render(&spec, "a"),
        map.render_point(at_one),
        c3.contains(&at_one),
        pc.on_curve
    ));

    // table5, label 1 (row 2)
    let c1 = curve_of("table5", 1, &map)?;
    let f1 = fit_curve_forms(&c1, &map);
    let printed_explicit = lin(&spec, "u^3 u^5 u^6");
    let holds = c1
        .points()
        .iter()
        .filter(|p| printed_explicit.eval(&spec, p.alpha) == p.beta)
        .count();
    let imp5 = LinearizedRelation {
        beta: lin(&spec, "u^4 1"),
        alpha: lin(&spec, "u^2 u^3"),
    }
    .check(&c1, &map);
    let par5 = Parametric {
        alpha: lin(&spec, "0 0 u^2"),
        beta: lin(&spec, "u^2 1 u"),
    }
    .check(&c1, &map);
    notes.push(format!(
        "T5 c1: fitted {:?}; printed explicit holds on {holds}/8; printed implicit {}/8; parametric {}/8",
        f1.beta_of_alpha_text, imp5.satisfied_on_curve, par5.on_curve
    ));

    // table5: the curve drawn with label 6 in the printed grid
    let (_, fig) = figure("fig5").ok_or("no fig5")?;
    let grid = parse_grid(&fig.grid).map_err(|e| e.to_string())?;
    let els = spec.elements();
    let mut drawn: BTreeSet<PhasePoint> = BTreeSet::new();
    drawn.insert(map.origin());
    for (top, row) in grid.iter().enumerate() {
        for (col, cell) in row.iter().enumerate() {
            if cell == "6" {
                drawn.insert(PhasePoint::new(els[col], els[7 - top]));
            }
        }
    }
    let t5 = table("table5");
    let row = (0..9)
        .find(|&r| {
            let c = curve_from_row(t5.row(r), &map).expect("curve");
            c.points().iter().copied().collect::<BTreeSet<_>>() == drawn
        })
        .ok_or("printed curve 6 is not a curve of the table")?;
    let c6 = curve_of("table5", row, &map)?;
    let f6 = fit_curve_forms(&c6, &map);
    let zero = f6.horizontal_counts.get("0").copied().unwrap_or(0);
    let u4 = f6.horizontal_counts.get("u^4").copied().unwrap_or(0);
    ensure(
        zero == 4 && u4 == 4,
        format!("curve 6 horizontal counts {:?}", f6.horizontal_counts),
    )?;
    for v in ["u^4,0", "u^5,0"] {
        let p = map.parse_point(v).map_err(|e| e.to_string())?;
        ensure(
            c6.translate(p) == c6,
            format!("curve 6 not invariant under ({v})"),
        )?;
    }
    notes.push(format!(
        "T5 c6 (table row {}): 4 points on b=0 and b=u^4",
        row + 1
    ));
    Ok(notes.join("; "))
}

fn random_states(count: usize, seed: u64) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                DensityMatrix::random_mixed(8, &mut rng)
            } else {
                DensityMatrix::random_pure(8, &mut rng)
            }
            .matrix()
            .clone()
        })
        .collect()
}

fn default_net(id: &str) -> Result<QuantumNet, String> {
    QuantumNet::default_for(&table(id), &TranslationMap::gf8()).map_err(|e| e.to_string())
}

fn criterion_7() -> Outcome {
    let net = default_net("table1")?;
    let map = net.map().clone();
    let ops: Vec<CMatrix> = map
        .points()
        .into_iter()
        .map(|p| net.point_operator(p))
        .collect();
    for a in &ops {
        ensure(
            (linalg::trace(a) - Complex64::from(1.0)).norm() < TOL,
            "Tr A != 1",
        )?;
        ensure(linalg::hermiticity_defect(a) < TOL, "A not Hermitian")?;
    }
    let mut worst = 0.0f64;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            let expected = if i == j { 8.0 } else { 0.0 };
            worst = worst.max((linalg::trace_product(a, b) - Complex64::from(expected)).norm());
        }
    }
    ensure(worst < TOL, format!("orthogonality defect {worst:e}"))?;
    let states = random_states(100, 7);
    let mut rt = 0.0f64;
    for rho in &states {
        let w = wigner(rho, &net).map_err(|e| e.to_string())?;
        ensure((w.sum() - 1.0).abs() < TOL, "sum W != 1")?;
        // W from the dense point operators
        for (k, p) in map.points().into_iter().enumerate() {
            let dense = linalg::trace_product(rho, &ops[k]).re / 8.0;
            ensure(
                (dense - w.get(&map, p)).abs() < TOL,
                "W disagrees with Tr(rho A)/8",
            )?;
        }
        rt = rt.max(linalg::max_abs_diff(&invert(&w, &net), rho));
    }
    ensure(rt < TOL, format!("round trip {rt:e}"))?;
    let mut pv = 0.0f64;
    for pair in random_states(100, 8).chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let lhs = linalg::trace_product(a, b).re;
        let rhs = 8.0
            * wigner(a, &net)
                .map_err(|e| e.to_string())?
                .dot(&wigner(b, &net).map_err(|e| e.to_string())?);
        pv = pv.max((lhs - rhs).abs());
    }
    ensure(pv < TOL, format!("Parseval {pv:e}"))?;
    Ok(format!(
        "orthogonality {worst:.1e}, round trip {rt:.1e}, Parseval {pv:.1e}"
    ))
}

fn criterion_8() -> Outcome {
    let net = default_net("table1")?;
    let mut worst = 0.0f64;
    for rho in random_states(20, 11) {
        for v in net.map().points() {
            let c = check_covariance(&net, v, &rho, TOL).map_err(|e| e.to_string())?;
            worst = worst.max(c.max_deviation);
            ensure(
                c.passed,
                format!(
                    "translation {} deviates {:e}",
                    c.displacement, c.max_deviation
                ),
            )?;
        }
    }
    Ok(format!("1280 checks, max deviation {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let states = random_states(20, 13);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for id in table_ids() {
        let net = default_net(&id)?;
        let map = net.map().clone();
        let ops: Vec<CMatrix> = (0..64)
            .map(|i| net.point_operator(map.point_at(i)))
            .collect();
        for rho in &states {
            let w = wigner(rho, &net).map_err(|e| e.to_string())?;
            for (k, s) in net.striations().iter().enumerate() {
                for (l, line) in s.lines().iter().enumerate() {
                    let born = linalg::trace_product(rho, net.line_projector(k, l)).re;
                    let from_ops: f64 = line
                        .points()
                        .iter()
                        .map(|&p| linalg::trace_product(rho, &ops[map.index(p)]).re / 8.0)
                        .sum();
                    let m = marginal(&w, &net, k, l).map_err(|e| e.to_string())?;
                    worst = worst.max((m - born).abs()).max((from_ops - born).abs());
                    checks += 1;
                }
            }
        }
    }
    ensure(worst < TOL, format!("marginal defect {worst:e}"))?;
    Ok(format!(
        "{checks} line marginals, max deviation {worst:.1e}"
    ))
}

fn criterion_10() -> Outcome {
    let a = enumerate_seeds(SeedPattern::SingleSingle, Equivalence::PhaseSpace)
        .map_err(|e| e.to_string())?;
    ensure(
        a.classes.len() == 1,
        format!("pattern A: {} classes", a.classes.len()),
    )?;
    for id in [
        "table1", "table2a", "table2b", "table2c", "table2d", "table2e",
    ] {
        ensure(
            a.class_of(&table(id)) == Some(0),
            format!("{id} not in the pattern A class"),
        )?;
    }
    let b = enumerate_seeds(SeedPattern::DoubleSingle, Equivalence::PhaseSpace)
        .map_err(|e| e.to_string())?;
    ensure(
        b.classes.len() == 2,
        format!("pattern B: {} classes", b.classes.len()),
    )?;
    let c3 = b.class_of(&table("table3")).ok_or("table3 unclassified")?;
    let c4 = b.class_of(&table("table4")).ok_or("table4 unclassified")?;
    ensure(c3 != c4, "tables 3 and 4 share a class")?;
    let relabel = enumerate_seeds(SeedPattern::DoubleSingle, Equivalence::QubitRelabeling)
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "A: {} of {} seeds valid, 1 class; B: {} of {} seeds valid, 2 classes (under full qubit relabeling B has {})",
        a.entries.len(),
        a.seeds_total,
        b.entries.len(),
        b.seeds_total,
        relabel.classes.len()
    ))
}

fn criterion_11() -> Outcome {
    let mut notes = Vec::new();
    for (n, expect) in [(1, (8, 2, 4)), (2, (1024, 64, 16))] {
        let c = count_nets(n).map_err(|e| e.to_string())?;
        ensure(c.verified, format!("n={n} not enumerated"))?;
        ensure(
            (c.total, c.classes, c.class_size) == expect,
            format!("n={n}: {c:?}"),
        )?;
        ensure(c.matches_formulas(), format!("n={n} formulas"))?;
        notes.push(format!(
            "N={}: {}/{}/{}",
            1 << n,
            c.total,
            c.classes,
            c.class_size
        ));
    }
    let c = count_nets(3).map_err(|e| e.to_string())?;
    notes.push(format!(
        "N=8 by formula: {} nets, {} classes of {}",
        c.total, c.classes, c.class_size
    ));
    Ok(notes.join("; "))
}

fn criterion_12() -> Outcome {
    let states = random_states(4, 17);
    let mut worst = 0.0f64;
    for id in table_ids() {
        let net = default_net(&id)?;
        for rho in &states {
            let rec = reconstruct_from_probabilities(&exact_probabilities(rho, &net), &net);
            worst = worst.max(linalg::max_abs_diff(&rec.rho, rho));
        }
    }
    ensure(worst < TOL, format!("exact reconstruction {worst:e}"))?;
    let net = default_net("table1")?;
    let rho = DensityMatrix::named("pure:2024", 3).map_err(|e| e.to_string())?;
    let report = scaling_study(rho.matrix(), &net, &[1_000, 10_000, 100_000], 8, 2024)
        .map_err(|e| e.to_string())?;
    ensure(
        (report.slope + 0.5).abs() <= 0.15,
        format!("slope {:.3}", report.slope),
    )?;
    let pts: Vec<String> = report
        .points
        .iter()
        .map(|p| format!("{}:{:.4}", p.shots, p.mean_trace_distance))
        .collect();
    Ok(format!(
        "exact {worst:.1e}; slope {:.3} ({})",
        report.slope,
        pts.join(", ")
    ))
}

fn criterion_13() -> Outcome {
    let map = TranslationMap::gf8();
    let r = search_factorizable_point_operator(&table("table1"), &map, 100, 13)
        .map_err(|e| e.to_string())?;
    ensure(r.self_check_passed, "self-check failed")?;
    Ok(format!(
        "self-check ok; {} nets, {} operators, {} triseparable (report only), min single-qubit Schmidt rank {}",
        r.nets_checked,
        r.operators_checked,
        r.hits.len(),
        r.min_rank
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 13] = [
        ("field identities", criterion_1),
        ("table reproduction", criterion_2),
        ("MUB verification", criterion_3),
        ("structure signatures", criterion_4),
        ("figures", criterion_5),
        ("curve forms", criterion_6),
        ("Wigner identities", criterion_7),
        ("covariance", criterion_8),
        ("marginals", criterion_9),
        ("uniqueness searches", criterion_10),
        ("net counting", criterion_11),
        ("tomography", criterion_12),
        ("factorizability probe", criterion_13),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        match f() {
            Ok(detail) => println!(
                "criterion {:>2} PASS {name} [{:.2?}]: {detail}",
                i + 1,
                start.elapsed()
            ),
            Err(why) => {
                println!(
                    "criterion {:>2} FAIL {name} [{:.2?}]: {why}",
                    i + 1,
                    start.elapsed()
                );
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
