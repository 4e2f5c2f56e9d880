use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use latquant::bounds::{best_product_table, BoundsRow};
use latquant::catalog::{featured_names, golden_entry, Column, GoldenNsm, Precision};
use latquant::compose::{laminate_generator, lamination_bound, parse_composition, plan_product, ProductPlan};
use latquant::decode::ProductDecoder;
use latquant::estimate::{estimate_moments, whiteness, MomentReport, WhitenessReport};
use latquant::experiments::{
    product_factorization_check, saddle_experiment, whitening_experiment, whitening_experiment_lattice,
    ExperimentReport, SaddleFactor, Verdict,
};
use latquant::linalg::{format_matrix_text, parse_matrix_text};
use latquant::{closest_point, get_lattice, Decoder, GeneratorMatrix, Lattice};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::output::{self, fixed, vector, Format};
use crate::{Command, Experiment, MonteCarlo, Target, Usage};

pub fn run(command: Command, format: Format) -> Result<ExitCode> {
    match command {
        Command::Catalog { name } => catalog(name.as_deref(), format)?,
        Command::Decode { matrix, args } => decode(matrix.as_deref(), &args, format)?,
        Command::Nsm { target, mc } => nsm(&target, &mc, format)?,
        Command::Whiteness { target, mc } => whiteness_cmd(&target, &mc, format)?,
        Command::Product { spec, estimate, mc } => product(&spec, estimate.then_some(&mc), format)?,
        Command::Laminate { target, offset, spacing, estimate, mc } => {
            laminate(&target, &offset, spacing, estimate.then_some(&mc), format)?
        }
        Command::Bounds { n, n_max } => bounds(n, n_max, format)?,
        Command::Table { n_max } => table(n_max, format)?,
        Command::Verify { experiment, mc } => return verify(experiment.unwrap_or(Experiment::All), &mc, format),
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve(target: &Target) -> Result<Lattice> {
    match (&target.name, &target.matrix) {
        (Some(name), None) => Ok(get_lattice(name)?),
        (None, Some(path)) => Ok(Lattice::from_generator(path.display().to_string(), load_matrix(path)?)),
        _ => Err(Usage("give a lattice name or --matrix FILE".into()).into()),
    }
}

fn load_matrix(path: &Path) -> Result<GeneratorMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn precision_label(p: Precision) -> &'static str {
    match p {
        Precision::NineDecimal => "exact",
        Precision::FiveDecimal => "numerical",
    }
}

fn reference_text(g: &GoldenNsm) -> String {
    let digits = if g.precision == Precision::NineDecimal { 9 } else { 5 };
    format!("{} ({})", fixed(g.nsm, digits), precision_label(g.precision))
}

#[derive(Serialize)]
struct CatalogRow {
    name: String,
    n: usize,
    nsm: Option<f64>,
    precision: Option<Precision>,
    provenance: Option<String>,
    decoder: Option<String>,
    volume: Option<f64>,
}

impl CatalogRow {
    fn of(l: &Lattice) -> Self {
        let g = l.golden_nsm();
        CatalogRow {
            name: l.name.clone(),
            n: l.dim,
            nsm: g.map(|g| g.nsm),
            precision: g.map(|g| g.precision),
            provenance: g.map(|g| g.provenance.clone()),
            decoder: l.strategy().map(|s| s.to_string()),
            volume: l.volume().ok(),
        }
    }
}

#[derive(Serialize)]
struct CatalogEntry {
    #[serde(flatten)]
    row: CatalogRow,
    generator: Option<Vec<Vec<f64>>>,
}

fn catalog(name: Option<&str>, format: Format) -> Result<()> {
    if let Some(name) = name {
        format.reject_csv("catalog NAME")?;
        let l = get_lattice(name)?;
        let entry = CatalogEntry { row: CatalogRow::of(&l), generator: l.basis().ok().map(GeneratorMatrix::to_rows) };
        if format == Format::Json {
            return output::json(&entry);
        }
        println!("{} (n = {})", l.name, l.dim);
        if let Some(g) = l.golden_nsm() {
            println!("reference NSM: {}  [{}]", reference_text(g), g.provenance);
        }
        match l.basis() {
            Ok(b) => {
                println!("decoder: {}", entry.row.decoder.as_deref().unwrap_or("-"));
                println!("volume: {}", fixed(latquant::volume(b), 9));
                print!("generator:\n{}", format_matrix_text(b));
            }
            Err(_) => println!("no generator matrix in the catalog; NSM constant only"),
        }
        return Ok(());
    }
    let rows = featured_names().iter().map(|n| get_lattice(n).map(|l| CatalogRow::of(&l))).collect::<Result<Vec<_>, _>>()?;
    match format {
        Format::Json => output::json(&rows),
        Format::Csv => output::csv(&rows),
        Format::Text => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let reference = match (r.nsm, r.precision) {
                        (Some(v), Some(Precision::NineDecimal)) => fixed(v, 9),
                        (Some(v), _) => fixed(v, 5),
                        _ => "-".into(),
                    };
                    vec![
                        r.name.clone(),
                        r.n.to_string(),
                        reference,
                        r.precision.map_or("-", precision_label).to_string(),
                        r.decoder.clone().unwrap_or_else(|| "constant only".into()),
                    ]
                })
                .collect();
            output::table(&["name", "n", "NSM", "kind", "decoder"], &cells);
            Ok(())
        }
    }
}

fn decode(matrix: Option<&Path>, args: &[String], format: Format) -> Result<()> {
    format.reject_csv("decode")?;
    let (lattice, coords) = match matrix {
        Some(path) => (Lattice::from_generator(path.display().to_string(), load_matrix(path)?), args),
        None => (get_lattice(&args[0])?, &args[1..]),
    };
    let x = coords
        .iter()
        .map(|s| s.parse::<f64>().map_err(|_| Usage(format!("`{s}` is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    if x.len() != lattice.dim {
        return Err(Usage(format!("{} has dimension {}, got {} coordinates", lattice.name, lattice.dim, x.len())).into());
    }
    let r = closest_point(&lattice, &x)?;
    if format == Format::Json {
        return output::json(&r);
    }
    println!("u: {:?}", r.u);
    println!("point: {}", vector(&r.point));
    println!("error: {}", vector(&r.error));
    println!("d2: {}", fixed(r.d2, 9));
    Ok(())
}

fn estimate_target(target: &Target, mc: &MonteCarlo) -> Result<(Lattice, WhitenessReport)> {
    let l = resolve(target)?;
    let w = whiteness(&l.decoder()?, mc.samples, mc.seed)?;
    Ok((l, w))
}

/// A moment report without the covariance matrix, for CSV.
#[derive(Serialize)]
struct MomentRow<'a> {
    name: &'a str,
    n: usize,
    samples: u64,
    seed: u64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "se_G")]
    se_g: f64,
    rho: f64,
    anisotropy: f64,
    eigen_spread: f64,
    #[serde(rename = "V")]
    v: f64,
}

impl<'a> From<&'a MomentReport> for MomentRow<'a> {
    fn from(r: &'a MomentReport) -> Self {
        MomentRow {
            name: &r.name,
            n: r.n,
            samples: r.samples,
            seed: r.seed,
            e: r.e,
            g: r.g,
            se_g: r.se_g,
            rho: r.rho,
            anisotropy: r.anisotropy,
            eigen_spread: r.eigen_spread,
            v: r.v,
        }
    }
}

fn nsm(target: &Target, mc: &MonteCarlo, format: Format) -> Result<()> {
    let (l, w) = estimate_target(target, mc)?;
    let report = MomentReport::new(l.name.clone(), &w);
    match format {
        Format::Json => output::json(&report),
        Format::Csv => output::csv(&[MomentRow::from(&report)]),
        Format::Text => {
            println!(
                "{} (n = {}): G = {} ± {:.1e}  ({} samples, seed {})",
                l.name,
                l.dim,
                fixed(report.g, 9),
                report.se_g,
                report.samples,
                report.seed
            );
            if let Some(g) = l.golden_nsm() {
                println!("reference {}, z = {:.2}", reference_text(g), (report.g - g.nsm) / report.se_g);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct WhitenessJson {
    #[serde(flatten)]
    report: MomentReport,
    anisotropy_se: f64,
    eigen_spread_se: Option<f64>,
    #[serde(rename = "R_traceless")]
    rbar: Vec<f64>,
}

fn whiteness_cmd(target: &Target, mc: &MonteCarlo, format: Format) -> Result<()> {
    let (l, w) = estimate_target(target, mc)?;
    let report = MomentReport::new(l.name.clone(), &w);
    match format {
        Format::Json => output::json(&WhitenessJson {
            report,
            anisotropy_se: w.anisotropy_se,
            eigen_spread_se: w.eigen_spread_se.is_finite().then_some(w.eigen_spread_se),
            rbar: w.rbar.iter().flatten().copied().collect(),
        }),
        Format::Csv => output::csv(&[MomentRow::from(&report)]),
        Format::Text => {
            println!("{} (n = {}), {} samples, seed {}", l.name, l.dim, report.samples, report.seed);
            println!("G = {} ± {:.1e}", fixed(report.g, 9), report.se_g);
            println!("rho = tr R / n = {}", fixed(w.rho, 9));
            println!("traceless part of R:");
            for row in &w.rbar {
                println!("  {}", vector(row));
            }
            println!("anisotropy = {:.3e} (noise scale {:.1e})", w.anisotropy, w.anisotropy_se);
            println!("eigen spread = {:.3e} ± {:.1e}", w.eigen_spread, w.eigen_spread_se);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct McSummary {
    samples: u64,
    seed: u64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "se_G")]
    se_g: f64,
}

#[derive(Serialize)]
struct ProductJson {
    #[serde(flatten)]
    plan: ProductPlan,
    estimate: Option<McSummary>,
}

fn product(spec: &str, mc: Option<&MonteCarlo>, format: Format) -> Result<()> {
    let plan = plan_product(spec)?;
    let estimate = match mc {
        Some(mc) => {
            let names = parse_composition(spec)?;
            let lattices = names.iter().map(|f| get_lattice(&f.name)).collect::<Result<Vec<_>, _>>()?;
            let parts: Vec<(&Lattice, f64)> = lattices.iter().zip(plan.scales()).collect();
            let est = estimate_moments(&ProductDecoder::from_lattices(&parts)?, mc.samples, mc.seed)?;
            Some(McSummary { samples: mc.samples, seed: mc.seed, g: est.g_hat, se_g: est.se_g })
        }
        None => None,
    };
    match format {
        Format::Json => output::json(&ProductJson { plan, estimate }),
        Format::Csv => output::csv(&plan.parts),
        Format::Text => {
            let cells: Vec<Vec<String>> = plan
                .parts
                .iter()
                .map(|p| {
                    vec![
                        p.name.clone(),
                        p.n.to_string(),
                        fixed(p.nsm, 9),
                        p.volume.map_or("-".into(), |v| fixed(v, 9)),
                        fixed(p.scale, 9),
                    ]
                })
                .collect();
            output::table(&["factor", "n", "NSM", "volume", "scale"], &cells);
            println!("n = {}, predicted G = {}", plan.n, fixed(plan.predicted_g, 9));
            if let Some(e) = estimate {
                println!("Monte Carlo G = {} ± {:.1e}  ({} samples, seed {})", fixed(e.g, 9), e.se_g, e.samples, e.seed);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct LaminateJson {
    base: String,
    n: usize,
    generator: Vec<Vec<f64>>,
    volume: f64,
    bound: Option<f64>,
    estimate: Option<McSummary>,
}

fn laminate(target: &Target, offset: &[f64], spacing: f64, mc: Option<&MonteCarlo>, format: Format) -> Result<()> {
    format.reject_csv("laminate")?;
    let base = resolve(target)?;
    let offset = if offset.is_empty() { vec![0.0; base.dim] } else { offset.to_vec() };
    let b = laminate_generator(base.basis()?, &offset, spacing)?;
    let n = b.dim();
    let bound = base.golden_nsm().map(|g| lamination_bound(g.nsm, n)).transpose()?;
    let estimate = match mc {
        Some(mc) => {
            let est = estimate_moments(&Decoder::sphere(&b), mc.samples, mc.seed)?;
            Some(McSummary { samples: mc.samples, seed: mc.seed, g: est.g_hat, se_g: est.se_g })
        }
        None => None,
    };
    let out = LaminateJson { base: base.name, n, generator: b.to_rows(), volume: latquant::volume(&b), bound, estimate };
    if format == Format::Json {
        return output::json(&out);
    }
    println!("laminated {} (n = {}), volume {}", out.base, n, fixed(out.volume, 9));
    print!("generator:\n{}", format_matrix_text(&b));
    if let Some(bound) = bound {
        println!("lamination bound on the best offset: G <= {}", fixed(bound, 9));
    }
    if let Some(e) = out.estimate {
        println!("Monte Carlo G = {} ± {:.1e}  ({} samples, seed {})", fixed(e.g, 9), e.se_g, e.samples, e.seed);
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsLine {
    n: usize,
    lower: f64,
    upper: f64,
    best_reported: f64,
    best_reported_name: String,
}

fn check_n(n: usize) -> Result<()> {
    if !(1..=48).contains(&n) {
        return Err(Usage(format!("dimension must be between 1 and 48, got {n}")).into());
    }
    Ok(())
}

fn bounds(n: Option<usize>, n_max: usize, format: Format) -> Result<()> {
    let top = n.unwrap_or(n_max);
    check_n(top)?;
    let rows = best_product_table(top)?;
    let lines: Vec<BoundsLine> = rows
        .into_iter()
        .filter(|r| n.is_none_or(|n| r.n == n))
        .map(|r| BoundsLine {
            n: r.n,
            lower: r.cs_lower,
            upper: r.zador_upper,
            best_reported: r.best_reported,
            best_reported_name: r.best_reported_name,
        })
        .collect();
    match format {
        Format::Json if n.is_some() => output::json(&lines[0]),
        Format::Json => output::json(&lines),
        Format::Csv => output::csv(&lines),
        Format::Text => {
            let cells: Vec<Vec<String>> = lines
                .iter()
                .map(|l| {
                    vec![
                        l.n.to_string(),
                        fixed(l.lower, 9),
                        fixed(l.upper, 9),
                        format!("{} ({})", fixed(l.best_reported, 9), l.best_reported_name),
                    ]
                })
                .collect();
            output::table(&["n", "lower", "upper", "best reported"], &cells);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TableLine {
    n: usize,
    best_reported: String,
    best_reported_name: String,
    lower: String,
    upper: String,
    best_product: String,
    composition: String,
    flags: String,
}

fn digits(p: Precision) -> usize {
    if p == Precision::NineDecimal {
        9
    } else {
        5
    }
}

impl From<&BoundsRow> for TableLine {
    fn from(r: &BoundsRow) -> Self {
        let product_digits = golden_entry(Column::BestProduct, r.n).map_or(9, |g| digits(g.precision));
        TableLine {
            n: r.n,
            best_reported: fixed(r.best_reported, digits(r.best_reported_precision)),
            best_reported_name: r.best_reported_name.clone(),
            lower: fixed(r.cs_lower, 9),
            upper: fixed(r.zador_upper, 9),
            best_product: r.best_product.map_or(String::new(), |g| fixed(g, product_digits)),
            composition: r.composition.clone().unwrap_or_default(),
            flags: r.flags().join(" "),
        }
    }
}

fn table(n_max: usize, format: Format) -> Result<()> {
    check_n(n_max)?;
    let rows = best_product_table(n_max)?;
    match format {
        Format::Json => output::json(&rows),
        Format::Csv => output::csv(&rows.iter().map(TableLine::from).collect::<Vec<_>>()),
        Format::Text => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(TableLine::from)
                .map(|t| {
                    vec![
                        t.n.to_string(),
                        t.best_reported,
                        t.best_reported_name,
                        t.lower,
                        t.upper,
                        t.best_product,
                        t.composition,
                        t.flags,
                    ]
                })
                .collect();
            output::table(&["n", "best", "lattice", "lower", "upper", "product", "composition", "flags"], &cells);
            Ok(())
        }
    }
}

/// Whether a report contradicts what the theory requires of it.
fn failed(report: &ExperimentReport, improvement_required: bool) -> bool {
    !report.checks_passed() || (improvement_required && report.verdict == Verdict::NotImproved)
}

fn saddle(spec: &str, offset: &[f64], epsilon: f64, mc: &MonteCarlo) -> Result<ExperimentReport> {
    let factors = parse_composition(spec)?;
    let [first, second] = factors.as_slice() else {
        return Err(Usage(format!("saddle needs exactly two factors, got `{spec}`")).into());
    };
    if first.scale.is_some() || second.scale.is_some() {
        return Err(Usage("saddle factors take no explicit scale; the optimal one is used".into()).into());
    }
    let l1 = get_lattice(&first.name)?;
    let l2 = get_lattice(&second.name)?;
    if offset.len() != l1.dim * l2.dim {
        return Err(Usage(format!("--offset needs {} x {} = {} entries", l2.dim, l1.dim, l1.dim * l2.dim)).into());
    }
    let h = DMatrix::from_row_slice(l2.dim, l1.dim, offset);
    let mut r =
        saddle_experiment(&SaddleFactor::from_lattice(&l1)?, &SaddleFactor::from_lattice(&l2)?, &h, epsilon, mc.samples, mc.seed)?;
    r.composition = Some(spec.to_string());
    Ok(r)
}

fn factorization(spec: &str, points: usize, mc: &MonteCarlo) -> Result<ExperimentReport> {
    let plan = plan_product(spec)?;
    let lattices = plan.parts.iter().map(|p| get_lattice(&p.name)).collect::<Result<Vec<_>, _>>()?;
    let parts: Vec<(&Lattice, f64)> = lattices.iter().zip(plan.scales()).collect();
    let mut r = product_factorization_check(&parts, points, mc.samples, mc.seed)?;
    r.composition = Some(spec.to_string());
    Ok(r)
}

fn whitening(target: &Target, beta: f64, mc: &MonteCarlo) -> Result<ExperimentReport> {
    if target.name.is_none() && target.matrix.is_none() {
        let mut r = whitening_experiment(&GeneratorMatrix::diagonal(&[1.0, 2.0])?, beta, mc.samples, mc.seed)?;
        r.composition = Some("diag(1,2)".into());
        return Ok(r);
    }
    let l = resolve(target)?;
    Ok(whitening_experiment_lattice(&l, beta, mc.samples, mc.seed)?)
}

fn verify(experiment: Experiment, mc: &MonteCarlo, format: Format) -> Result<ExitCode> {
    format.reject_csv("verify")?;
    let default_target = Target { name: None, matrix: None };
    let runs: Vec<(ExperimentReport, bool)> = match experiment {
        Experiment::Whitening { target, beta } => vec![(whitening(&target, beta, mc)?, beta < 0.0)],
        Experiment::Saddle { spec, offset, epsilon } => {
            let nonzero = epsilon != 0.0 && offset.iter().any(|&h| h != 0.0);
            vec![(saddle(&spec, &offset, epsilon, mc)?, nonzero)]
        }
        Experiment::Factorization { spec, points } => vec![(factorization(&spec, points, mc)?, false)],
        Experiment::All => vec![
            (whitening(&default_target, -0.1, mc)?, true),
            (saddle("Z*Z", &[0.5], 1.0, mc)?, true),
            (factorization("D4*Z", 10_000, mc)?, false),
        ],
    };
    let any_failed = runs.iter().any(|(r, required)| failed(r, *required));
    if format == Format::Json {
        let reports: Vec<&ExperimentReport> = runs.iter().map(|(r, _)| r).collect();
        match reports.as_slice() {
            [one] => output::json(one)?,
            many => output::json(many)?,
        }
    } else {
        for (r, required) in &runs {
            println!("{} on {}", r.name, r.composition.as_deref().unwrap_or("-"));
            for (k, v) in &r.parameters {
                println!("  {k} = {v}");
            }
            println!("  baseline G  = {} ± {:.1e}", fixed(r.baseline_g, 9), r.baseline_se);
            println!("  perturbed G = {} ± {:.1e}", fixed(r.perturbed_g, 9), r.perturbed_se);
            println!("  verdict: {}", r.verdict);
            for c in &r.checks {
                println!("  [{}] {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail);
            }
            println!("  {}", if failed(r, *required) { "FAIL" } else { "PASS" });
        }
    }
    Ok(if any_failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
