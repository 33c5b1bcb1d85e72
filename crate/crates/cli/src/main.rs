//! `mubwigner` command-line interface.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors
//! (bad flags, unreadable files, unknown fixtures).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mubwigner::field::{default_polynomial, FieldSpec};
use mubwigner::fixtures::{all_builtin, builtin, figure, resolve_table, Fixture};
use mubwigner::linalg;
use mubwigner::mubtab::{
    enumerate_seeds, structure_signature, validate_table, verify_mub, Equivalence, GeneratorTable,
    SeedPattern,
};
use mubwigner::phasespace::{
    best_relabeling, compare_grids, curves_csv, curves_json, render_grid, striations_for_table,
    verify_geometry, Labeling, TranslationMap,
};
use mubwigner::tomo::{run_plan, scaling_study, ExperimentPlan, RNG_DESCRIPTION};
use mubwigner::wigner::{
    check_covariance, count_nets, dense_json, invert, wigner, DensityMatrix, NetSpec, QuantumNet,
    WignerTable,
};

#[derive(Parser)]
#[command(
    name = "mubwigner",
    version,
    about = "Mutually unbiased bases and discrete Wigner functions for qubits"
)]
struct Cli {
    /// Number of qubits (field degree).
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Irreducible polynomial as a bit string, highest degree first (1011 = x^3+x+1).
    #[arg(long, global = true)]
    poly: Option<String>,
    /// Built-in fixture id, fixture .toml, or a text table/seed file.
    #[arg(long, global = true, default_value = "table1")]
    table: String,
    /// `default` (all-plus ray patterns), a file, or an inline list of ray patterns.
    #[arg(long, global = true, default_value = "default")]
    net: String,
    /// Named state (mixed, zero, ghz, pure:SEED, random:SEED) or a JSON density-matrix file.
    #[arg(long, global = true, default_value = "mixed")]
    state: String,
    #[arg(long, global = true, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Field elements, trace, and the self-dual basis.
    FieldShow,
    /// Prints the full generator table.
    MubBuild,
    /// Checks the table rules and every basis overlap.
    MubVerify,
    /// Separability signature (s,b,ns) of the table.
    MubClassify,
    /// Enumerates seed tables of a pattern and groups them into classes.
    SeedSearch {
        #[arg(long, default_value = "single-single")]
        pattern: String,
        #[arg(long, default_value = "phase-space")]
        equivalence: String,
    },
    /// Renders the striations as a labeled grid.
    PhaseRender {
        #[arg(long, default_value = "figure")]
        labeling: String,
        /// Point `alpha,beta` the curves are moved to, e.g. `0,u^3`.
        #[arg(long)]
        displacement: Option<String>,
    },
    /// Wigner function of `--state`.
    WignerCompute,
    /// Operator reconstructed from a Wigner CSV.
    WignerInvert {
        #[arg(long)]
        wigner: PathBuf,
    },
    /// Translation covariance of the net for one or all displacements.
    CovarianceCheck {
        #[arg(long)]
        displacement: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Counts nets and translation classes for `--n` qubits.
    NetsCount,
    /// Simulated tomography of `--state`.
    TomoRun {
        /// Experiment plan file (JSON or TOML); overrides --table, --net, --shots and --seed.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Comma-separated shot budgets for an error-scaling study.
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<u64>,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
    },
    /// Cell-level comparison of rendered grids against the printed figures.
    FiguresDiff {
        #[arg(long)]
        figure: Option<String>,
        #[arg(long, default_value = "figure")]
        labeling: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FieldShow => "field-show",
            Command::MubBuild => "mub-build",
            Command::MubVerify => "mub-verify",
            Command::MubClassify => "mub-classify",
            Command::SeedSearch { .. } => "seed-search",
            Command::PhaseRender { .. } => "phase-render",
            Command::WignerCompute => "wigner-compute",
            Command::WignerInvert { .. } => "wigner-invert",
            Command::CovarianceCheck { .. } => "covariance-check",
            Command::NetsCount => "nets-count",
            Command::TomoRun { .. } => "tomo-run",
            Command::FiguresDiff { .. } => "figures-diff",
        }
    }
}

struct Output {
    text: String,
    csv: Option<String>,
    json: Value,
    passed: bool,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Output {
            text,
            csv: None,
            json,
            passed: true,
        }
    }

    fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type CmdResult = Result<Output, Usage>;

struct Context<'a> {
    cli: &'a Cli,
    map: TranslationMap,
}

fn build_map(cli: &Cli) -> Result<TranslationMap, Usage> {
    if cli.n.is_none() && cli.poly.is_none() {
        return Ok(TranslationMap::gf8());
    }
    let n = match (&cli.n, &cli.poly) {
        (Some(n), _) => *n,
        (None, Some(p)) => p.trim().len().saturating_sub(1) as u32,
        _ => unreachable!(),
    };
    let spec = match &cli.poly {
        Some(p) => FieldSpec::from_strings(n, p)?,
        None => {
            default_polynomial(n)
                .ok_or_else(|| Usage(format!("no default polynomial for n = {n}")))?;
            FieldSpec::default_for(n)?
        }
    };
    let basis = spec.default_self_dual_basis()?;
    Ok(TranslationMap::new(spec, basis))
}

impl Context<'_> {
    fn metadata(&self) -> Value {
        let spec = self.map.spec();
        json!({
            "n": spec.degree(),
            "polynomial": spec.poly_string(),
            "basis": self.map.basis().elements().iter().map(|&d| spec.render(d)).collect::<Vec<_>>(),
        })
    }

    fn overridden(&self) -> bool {
        self.cli.n.is_some() || self.cli.poly.is_some()
    }

    fn table(&self) -> Result<(String, GeneratorTable), Usage> {
        let (id, table) = resolve_table(&self.cli.table)?;
        if table.num_qubits() != self.map.num_qubits() {
            return Err(Usage(format!(
                "table {id} has {} qubits but the field has degree {}",
                table.num_qubits(),
                self.map.num_qubits()
            )));
        }
        Ok((id, table))
    }

    fn net(&self, table: &GeneratorTable) -> Result<QuantumNet, Usage> {
        if self.cli.net == "default" {
            return Ok(QuantumNet::default_for(table, &self.map)?);
        }
        let text = if Path::new(&self.cli.net).exists() {
            fs::read_to_string(&self.cli.net)?
        } else {
            self.cli.net.clone()
        };
        let spec = NetSpec::parse(&text)
            .ok_or_else(|| Usage(format!("cannot parse net {:?}", self.cli.net)))?;
        Ok(QuantumNet::with_assignment(
            table,
            &self.map,
            &spec.ray_assignment,
        )?)
    }

    fn state(&self) -> Result<DensityMatrix, Usage> {
        if Path::new(&self.cli.state).exists() {
            let rho = DensityMatrix::from_json(&fs::read_to_string(&self.cli.state)?)?;
            if rho.dim() != self.map.size() {
                return Err(Usage(format!(
                    "state has dimension {}, expected {}",
                    rho.dim(),
                    self.map.size()
                )));
            }
            return Ok(rho);
        }
        Ok(DensityMatrix::named(
            &self.cli.state,
            self.map.num_qubits(),
        )?)
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn field_show(ctx: &Context) -> CmdResult {
    let spec = ctx.map.spec();
    let mut text = format!("GF(2^{}) modulo {}\n", spec.degree(), spec.poly_string());
    let mut rows = Vec::new();
    let mut csv = String::from("element,bits,trace\n");
    for a in spec.elements() {
        let bits = format!("{:0width$b}", a.bits(), width = spec.degree() as usize);
        let tr = u8::from(spec.trace(a));
        text += &format!("{:>6}  {bits}  tr={tr}\n", spec.render(a));
        csv += &format!("{},{bits},{tr}\n", spec.render(a));
        rows.push(json!({ "element": spec.render(a), "bits": bits, "trace": tr }));
    }
    let basis = ctx.map.basis().elements();
    let gram = spec.trace_gram(basis);
    let self_dual = gram
        .iter()
        .enumerate()
        .all(|(i, r)| r.iter().enumerate().all(|(j, &t)| t == (i == j)));
    let names: Vec<String> = basis.iter().map(|&d| spec.render(d)).collect();
    text += &format!(
        "self-dual basis: {} (self-dual: {})\n",
        names.join(" "),
        yes(self_dual)
    );
    let json = json!({ "elements": rows, "basis": names, "gram": gram, "self_dual": self_dual });
    Ok(Output::new(text, json).csv(csv).passed(self_dual))
}

fn mub_build(ctx: &Context) -> CmdResult {
    let (id, table) = ctx.table()?;
    let mut csv = String::from("row,column,pauli\n");
    for (r, row) in table.rows().iter().enumerate() {
        for (c, p) in row.iter().enumerate() {
            csv += &format!("{},{},{p}\n", r + 1, c + 1);
        }
    }
    let rows: Vec<Vec<String>> = table
        .rows()
        .iter()
        .map(|r| r.iter().map(|p| p.to_string()).collect())
        .collect();
    Ok(Output::new(table.to_text(), json!({ "table": id, "rows": rows })).csv(csv))
}

fn mub_verify(ctx: &Context) -> CmdResult {
    let (id, table) = ctx.table()?;
    let rules = validate_table(&table);
    let overlaps = verify_mub(&table.bases()?)?;
    let passed = rules.is_valid() && overlaps.passed;
    let mut text = format!(
        "{id}: table rules {}; {} overlaps, max deviation {:.2e}, orthonormality {:.2e}\n",
        if rules.is_valid() { "ok" } else { "violated" },
        overlaps.overlaps,
        overlaps.max_overlap_deviation,
        overlaps.max_orthonormality_deviation
    );
    for f in &rules.failures {
        text += &format!("  {f}\n");
    }
    text += if passed { "PASS\n" } else { "FAIL\n" };
    let json = json!({ "table": id, "rules": rules, "overlaps": overlaps });
    Ok(Output::new(text, json).passed(passed))
}

fn mub_classify(ctx: &Context) -> CmdResult {
    let (id, table) = ctx.table()?;
    let sig = structure_signature(&table)?;
    let fixture = match builtin(&id) {
        Ok(f) => Some(f),
        Err(_) if ctx.cli.table.ends_with(".toml") => {
            Some(Fixture::from_toml(&fs::read_to_string(&ctx.cli.table)?)?)
        }
        Err(_) => None,
    };
    let expected = match fixture {
        Some(f) => f.expected_structure()?,
        None => None,
    };
    let passed = expected.is_none_or(|e| e == sig);
    let mut text = format!("{sig}\n");
    if !passed {
        text += &format!(
            "expected {}\n",
            expected.expect("mismatch implies expectation")
        );
    }
    let json = json!({
        "table": id,
        "structure": sig.to_string(),
        "expected": expected.map(|e| e.to_string()),
    });
    Ok(Output::new(text, json).passed(passed))
}

fn seed_search(pattern: &str, equivalence: &str) -> CmdResult {
    let pattern: SeedPattern = pattern.parse()?;
    let equivalence: Equivalence = equivalence.parse()?;
    let report = enumerate_seeds(pattern, equivalence)?;
    let k = report.classes.len();
    let mut text = format!("{k} equivalence class{}\n", if k == 1 { "" } else { "es" });
    text += &format!(
        "{} seeds, {} valid, {} discarded; equivalence {equivalence}\n",
        report.seeds_total,
        report.entries.len(),
        report.discarded.len()
    );
    let fixture_tables: Vec<(String, GeneratorTable)> = all_builtin()
        .into_iter()
        .filter_map(|f| Some((f.id.clone(), f.table().ok()?)))
        .collect();
    for c in &report.classes {
        let known: Vec<&str> = fixture_tables
            .iter()
            .filter(|(_, t)| report.class_of(t) == Some(c.id))
            .map(|(id, _)| id.as_str())
            .collect();
        text += &format!(
            "class {}: {} members, structure {}, representative {}{}\n",
            c.id,
            c.members.len(),
            c.structure,
            c.representative_seed,
            if known.is_empty() {
                String::new()
            } else {
                format!(", contains {}", known.join(" "))
            }
        );
    }
    let mut csv = String::from("seed,structure,class\n");
    for e in &report.entries {
        csv += &format!("{},{},{}\n", e.seed, e.structure, e.class_id);
    }
    Ok(Output::new(text, serde_json::to_value(&report)?).csv(csv))
}

fn phase_render(ctx: &Context, labeling: &str, displacement: Option<&str>) -> CmdResult {
    let labeling: Labeling = labeling.parse().map_err(Usage)?;
    let (id, table) = ctx.table()?;
    let striations = striations_for_table(&table, &ctx.map)?;
    let geometry = verify_geometry(&striations, &ctx.map);
    let disp = displacement.map(|d| ctx.map.parse_point(d)).transpose()?;
    let grid = render_grid(&striations, &ctx.map, labeling, disp);
    let mut json = curves_json(&striations, &ctx.map, labeling);
    json["table"] = json!(id);
    json["grid"] = json!(grid.lines().collect::<Vec<_>>());
    json["geometry"] = serde_json::to_value(&geometry)?;
    let csv = curves_csv(&striations, &ctx.map, labeling);
    let mut text = grid;
    for f in &geometry.failures {
        text += &format!("geometry: {f}\n");
    }
    Ok(Output::new(text, json).csv(csv).passed(geometry.passed()))
}

// Right-aligned text table from the Wigner CSV, values rounded for reading.
fn aligned(csv: &str) -> String {
    let rows: Vec<Vec<String>> = csv
        .lines()
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .enumerate()
                .map(|(j, c)| match c.parse::<f64>() {
                    Ok(v) if i > 0 && j > 0 => format!("{v:+.6}"),
                    _ => c.to_string(),
                })
                .collect()
        })
        .collect();
    let width = rows.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|c| format!("{c:>width$}"))
                .collect::<Vec<_>>()
                .join(" ")
                + "\n"
        })
        .collect()
}

fn wigner_compute(ctx: &Context) -> CmdResult {
    let (id, table) = ctx.table()?;
    let net = ctx.net(&table)?;
    let rho = ctx.state()?;
    let w = wigner(rho.matrix(), &net)?;
    let csv = w.to_csv(&ctx.map);
    let text = format!(
        "table {id}, net {:?}, state {}\n{}sum {:.12}\n",
        net.ray_assignment(),
        ctx.cli.state,
        aligned(&csv),
        w.sum()
    );
    let json = json!({
        "table": id,
        "net": net.describe(),
        "state": ctx.cli.state,
        "wigner": w.to_json(&ctx.map),
    });
    Ok(Output::new(text, json).csv(csv))
}

fn wigner_invert(ctx: &Context, path: &Path) -> CmdResult {
    let (id, table) = ctx.table()?;
    let net = ctx.net(&table)?;
    let w = WignerTable::from_csv(&fs::read_to_string(path)?, &ctx.map)?;
    let rho = invert(&w, &net);
    let eig = linalg::hermitian_eigenvalues(&rho);
    let min = eig.first().copied().unwrap_or(0.0);
    let trace = linalg::trace(&rho).re;
    let mut text = format!(
        "table {id}, net {:?}\ntrace {trace:.12}, min eigenvalue {min:.3e}",
        net.ray_assignment()
    );
    if min < -1e-10 {
        text += " (not positive semidefinite)";
    }
    text += "\n";
    for r in 0..rho.nrows() {
        let cells: Vec<String> = (0..rho.ncols())
            .map(|c| format!("{:+.6}{:+.6}i", rho[(r, c)].re, rho[(r, c)].im))
            .collect();
        text += &cells.join(" ");
        text += "\n";
    }
    let json = json!({
        "table": id,
        "net": net.describe(),
        "trace": trace,
        "eigenvalues": eig,
        "positive": min >= -1e-10,
        "matrix": dense_json(&rho),
    });
    Ok(Output::new(text, json))
}

fn covariance(ctx: &Context, displacement: Option<&str>, tolerance: f64) -> CmdResult {
    let (id, table) = ctx.table()?;
    let net = ctx.net(&table)?;
    let rho = ctx.state()?;
    let points = match displacement {
        Some(d) => vec![ctx.map.parse_point(d)?],
        None => ctx.map.points(),
    };
    let checks = points
        .into_iter()
        .map(|v| check_covariance(&net, v, rho.matrix(), tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = checks.iter().all(|c| c.passed);
    let worst = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let mut text = format!(
        "table {id}, net {:?}: {} displacements, max deviation {worst:.2e}\n",
        net.ray_assignment(),
        checks.len()
    );
    let mut csv = String::from("displacement,max_deviation,passed\n");
    for c in &checks {
        if !c.passed {
            text += &format!("  {} deviates by {:.2e}\n", c.displacement, c.max_deviation);
        }
        csv += &format!(
            "\"{}\",{:e},{}\n",
            c.displacement, c.max_deviation, c.passed
        );
    }
    text += if passed { "PASS\n" } else { "FAIL\n" };
    let json =
        json!({ "table": id, "net": net.describe(), "tolerance": tolerance, "checks": checks });
    Ok(Output::new(text, json).csv(csv).passed(passed))
}

fn nets_count(ctx: &Context) -> CmdResult {
    let c = count_nets(ctx.map.num_qubits() as u32)?;
    let text = format!(
        "N = {}: {} nets, {} translation classes of {} ({})\n",
        ctx.map.size(),
        c.total,
        c.classes,
        c.class_size,
        if c.verified {
            "enumerated"
        } else {
            "closed form"
        }
    );
    let passed = c.matches_formulas();
    Ok(Output::new(text, serde_json::to_value(&c)?).passed(passed))
}

fn tomo_run(ctx: &Context, plan: Option<&Path>, budgets: &[u64], repetitions: usize) -> CmdResult {
    let rho = ctx.state()?;
    if !budgets.is_empty() {
        let (id, table) = ctx.table()?;
        let net = ctx.net(&table)?;
        let report = scaling_study(rho.matrix(), &net, budgets, repetitions, ctx.cli.seed)?;
        let mut text = format!(
            "table {id}, net {:?}, state {}\n",
            net.ray_assignment(),
            ctx.cli.state
        );
        let mut csv = String::from("shots,mean_trace_distance\n");
        for p in &report.points {
            text += &format!(
                "{:>10} shots: mean trace distance {:.6}\n",
                p.shots, p.mean_trace_distance
            );
            csv += &format!("{},{}\n", p.shots, p.mean_trace_distance);
        }
        text += &format!(
            "log-log slope {:.4} ({} repetitions, {})\n",
            report.slope, repetitions, report.rng
        );
        let json = json!({ "table": id, "net": net.describe(), "state": ctx.cli.state, "scaling": report });
        return Ok(Output::new(text, json).csv(csv));
    }
    let plan = match plan {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<ExperimentPlan>(&text)
                .or_else(|_| toml::from_str::<ExperimentPlan>(&text))?
        }
        None => {
            let (_, table) = ctx.table()?;
            ExperimentPlan {
                table: ctx.cli.table.clone(),
                net: Some(ctx.net(&table)?.describe()),
                shots: ctx.cli.shots,
                seed: ctx.cli.seed,
            }
        }
    };
    let (report, counts, rec) = run_plan(&plan, rho.matrix())?;
    let text = format!(
        "table {}, net {:?}, {} shots per basis, seed {}\nrng: {}\ntrace distance {:.6}, min eigenvalue {:.3e}, wigner sum {:.12}\n",
        report.table,
        report.net.ray_assignment,
        report.shots,
        report.seed,
        RNG_DESCRIPTION,
        report.trace_distance,
        report.min_eigenvalue,
        report.wigner_sum
    );
    let json = json!({
        "report": report,
        "counts": counts.counts,
        "wigner": rec.wigner.to_json(&ctx.map),
        "rho": dense_json(&rec.rho),
    });
    Ok(Output::new(text, json).csv(counts.to_csv()))
}

fn figures_diff(ctx: &Context, only: Option<&str>, labeling: &str) -> CmdResult {
    let labeling: Labeling = labeling.parse().map_err(Usage)?;
    let figures: Vec<_> = match only {
        Some(name) => vec![figure(name).ok_or_else(|| Usage(format!("unknown figure {name:?}")))?],
        None => all_builtin()
            .into_iter()
            .flat_map(|f| f.figures.clone().into_iter().map(move |g| (f.clone(), g)))
            .collect(),
    };
    let mut text = String::new();
    let mut csv = String::from("figure,alpha,beta,printed,rendered\n");
    let mut reports = Vec::new();
    let mut passed = true;
    for (fixture, fig) in figures {
        let table = fixture.table()?;
        let striations = striations_for_table(&table, &ctx.map)?;
        let disp = fig
            .displacement
            .as_deref()
            .map(|d| ctx.map.parse_point(d))
            .transpose()?;
        let rendered = render_grid(&striations, &ctx.map, labeling, disp);
        let diff = compare_grids(&fig.grid, &rendered, &ctx.map)?;
        let relabeled = best_relabeling(&fig.grid, &rendered, &ctx.map)?;
        let ok = !fig.exact || diff.is_exact();
        passed &= ok;
        text += &format!(
            "{} ({}): {}/{} cells match{}\n",
            fig.name,
            fixture.id,
            diff.matching,
            diff.total,
            if fig.exact {
                if ok {
                    ", exact as required"
                } else {
                    ", EXACT MATCH REQUIRED"
                }
            } else {
                ""
            }
        );
        for m in &diff.mismatches {
            text += &format!(
                "  ({},{}) printed {} rendered {}\n",
                m.alpha, m.beta, m.expected, m.actual
            );
            csv += &format!(
                "{},{},{},{},{}\n",
                fig.name, m.alpha, m.beta, m.expected, m.actual
            );
        }
        if !relabeled.mapping.is_empty() && relabeled.diff.matching > diff.matching {
            let pairs: Vec<String> = relabeled
                .mapping
                .iter()
                .map(|(a, b)| format!("{a}->{b}"))
                .collect();
            text += &format!(
                "  with labels {} rendered as printed: {}/{} cells match\n",
                pairs.join(" "),
                relabeled.diff.matching,
                relabeled.diff.total
            );
        }
        reports.push(json!({
            "figure": fig.name,
            "table": fixture.id,
            "exact_required": fig.exact,
            "diff": diff,
            "best_relabeling": relabeled,
        }));
    }
    Ok(Output::new(text, json!({ "figures": reports }))
        .csv(csv)
        .passed(passed))
}

fn dispatch(ctx: &Context) -> CmdResult {
    match &ctx.cli.command {
        Command::FieldShow => field_show(ctx),
        Command::MubBuild => mub_build(ctx),
        Command::MubVerify => mub_verify(ctx),
        Command::MubClassify => mub_classify(ctx),
        Command::SeedSearch {
            pattern,
            equivalence,
        } => seed_search(pattern, equivalence),
        Command::PhaseRender {
            labeling,
            displacement,
        } => phase_render(ctx, labeling, displacement.as_deref()),
        Command::WignerCompute => wigner_compute(ctx),
        Command::WignerInvert { wigner } => wigner_invert(ctx, wigner),
        Command::CovarianceCheck {
            displacement,
            tolerance,
        } => covariance(ctx, displacement.as_deref(), *tolerance),
        Command::NetsCount => nets_count(ctx),
        Command::TomoRun {
            plan,
            budgets,
            repetitions,
        } => tomo_run(ctx, plan.as_deref(), budgets, *repetitions),
        Command::FiguresDiff { figure, labeling } => figures_diff(ctx, figure.as_deref(), labeling),
    }
}

fn run(cli: &Cli) -> Result<bool, Usage> {
    let ctx = Context {
        cli,
        map: build_map(cli)?,
    };
    let name = cli.command.name();
    let out = dispatch(&ctx)?;
    let body = match cli.format {
        Format::Text if ctx.overridden() => format!("# field {}\n{}", ctx.metadata(), out.text),
        Format::Text => out.text,
        Format::Csv => out
            .csv
            .ok_or_else(|| Usage(format!("{name} has no csv output")))?,
        Format::Structured => {
            let doc = json!({
                "command": name,
                "field": ctx.metadata(),
                "passed": out.passed,
                "result": out.json,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    if !out.passed {
        eprintln!(
            "{}",
            json!({ "status": "fail", "command": name, "report": out.json })
        );
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!(
                "{}",
                json!({ "status": "error", "command": cli.command.name(), "message": msg })
            );
            ExitCode::from(2)
        }
    }
}
