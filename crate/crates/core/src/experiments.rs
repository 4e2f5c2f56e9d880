//! Numerical checks of the optimality conditions: whitening perturbations,
//! the off-diagonal block saddle, and product factorization.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Lattice;
use crate::compose::{optimal_product_nsm, optimal_scale, Moments};
use crate::decode::{block_lower_generator, Decoder, ProductDecoder, SuboptimalQuantizer};
use crate::error::{Error, Result};
use crate::estimate::{estimate_lattice, estimate_moments, MomentEstimate};
use crate::linalg::{sym_matrix_exp, volume, GeneratorMatrix, SymmetricMatrix};

/// `R − (tr R/n)·I`.
pub fn traceless_part(r: &SymmetricMatrix) -> SymmetricMatrix {
    let n = r.dim();
    let rho = r.trace() / n as f64;
    let mut m = r.matrix().clone();
    for i in 0..n {
        m[(i, i)] -= rho;
    }
    SymmetricMatrix::from_matrix_unchecked(m)
}

/// Comparison of a perturbed NSM against a baseline at three standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Improved,
    NotImproved,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Improved => "improved",
            Verdict::NotImproved => "not-improved",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl Verdict {
    pub fn judge(baseline: f64, baseline_se: f64, perturbed: f64, perturbed_se: f64) -> Self {
        if perturbed + 3.0 * perturbed_se < baseline - 3.0 * baseline_se {
            Verdict::Improved
        } else if perturbed - 3.0 * perturbed_se > baseline + 3.0 * baseline_se {
            Verdict::NotImproved
        } else {
            Verdict::Inconclusive
        }
    }
}

/// A named pass/fail check within an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composition: Option<String>,
    pub baseline_g: f64,
    pub baseline_se: f64,
    pub perturbed_g: f64,
    pub perturbed_se: f64,
    pub verdict: Verdict,
    pub samples: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Transforms `Λ(B)` by `A_β = exp(β·R̄)`, with `R̄` estimated from `Λ`, and
/// compares NSMs. For small `β < 0` and `R̄ ≠ 0` the NSM should decrease.
pub fn whitening_experiment(b: &GeneratorMatrix, beta: f64, samples: u64, seed: u64) -> Result<ExperimentReport> {
    whitening_with(&Decoder::sphere(b), beta, samples, seed)
}

/// As [`whitening_experiment`], with the baseline decoded by the lattice's
/// own rule.
pub fn whitening_experiment_lattice(lattice: &Lattice, beta: f64, samples: u64, seed: u64) -> Result<ExperimentReport> {
    let mut r = whitening_with(&lattice.decoder()?, beta, samples, seed)?;
    r.composition = Some(lattice.name.clone());
    Ok(r)
}

fn whitening_with(baseline_decoder: &Decoder, beta: f64, samples: u64, seed: u64) -> Result<ExperimentReport> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
    }
    let b = baseline_decoder.generator();
    let base = estimate_moments(baseline_decoder, samples, seed)?;
    let rbar = traceless_part(&base.r_matrix());
    let a = sym_matrix_exp(&rbar, beta);
    let perturbed_b = b.transformed(a.matrix())?;
    let pert = estimate_moments(&Decoder::sphere(&perturbed_b), samples, seed)?;

    let (v0, v1) = (volume(b), volume(&perturbed_b));
    let checks = vec![Check::new(
        "volume-preserved",
        (v1 - v0).abs() <= 1e-9 * v0.max(1.0),
        format!("V = {v0}, V(B·A_β) = {v1}"),
    )];
    Ok(ExperimentReport {
        name: "whitening".into(),
        parameters: BTreeMap::from([
            ("beta".into(), beta),
            ("rbar_frobenius".into(), rbar.frobenius_norm()),
        ]),
        composition: None,
        baseline_g: base.g_hat,
        baseline_se: base.se_g,
        perturbed_g: pert.g_hat,
        perturbed_se: pert.se_g,
        verdict: Verdict::judge(base.g_hat, base.se_g, pert.g_hat, pert.se_g),
        samples,
        seed,
        checks,
    })
}

/// A factor of the saddle experiment: a generator and, when known, its NSM.
/// Unknown NSMs are estimated.
#[derive(Debug, Clone)]
pub struct SaddleFactor {
    pub generator: GeneratorMatrix,
    pub nsm: Option<f64>,
}

impl SaddleFactor {
    pub fn new(generator: GeneratorMatrix, nsm: Option<f64>) -> Self {
        SaddleFactor { generator, nsm }
    }

    pub fn from_lattice(lattice: &Lattice) -> Result<Self> {
        Ok(SaddleFactor { generator: lattice.basis()?.clone(), nsm: lattice.golden_nsm().map(|g| g.nsm) })
    }

    fn nsm_with_se(&self, samples: u64, seed: u64) -> Result<(f64, f64)> {
        match self.nsm {
            Some(g) => Ok((g, 0.0)),
            None => {
                let e = estimate_moments(&Decoder::sphere(&self.generator), samples, seed)?;
                Ok((e.g_hat, e.se_g))
            }
        }
    }
}

/// Compares the optimally scaled product `Λ₁ × a·Λ₂` with the lattice
/// generated by `[[B₁, 0], [ε·H, a·B₂]]`, whose NSM is at most that of the
/// product and equal to it when `ε·H = 0`.
pub fn saddle_experiment(
    first: &SaddleFactor,
    second: &SaddleFactor,
    h_direction: &DMatrix<f64>,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let (b1, b2) = (&first.generator, &second.generator);
    let (n1, n2) = (b1.dim(), b2.dim());
    if h_direction.nrows() != n2 || h_direction.ncols() != n1 {
        return Err(Error::DimensionMismatch { expected: n2 * n1, got: h_direction.nrows() * h_direction.ncols() });
    }
    if !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be finite, got {epsilon}")));
    }
    let (g1, se1) = first.nsm_with_se(samples, seed)?;
    let (g2, se2) = second.nsm_with_se(samples, seed.wrapping_add(1))?;
    let a = optimal_scale(&Moments::from_nsm(n1, volume(b1), g1), &Moments::from_nsm(n2, volume(b2), g2))?;
    let baseline = optimal_product_nsm(&[(n1, g1), (n2, g2)])?;
    let n = (n1 + n2) as f64;
    // Delta method through log G = Σ (n_i/n)·log G_i.
    let baseline_se = baseline * ((n1 as f64 / n * se1 / g1).powi(2) + (n2 as f64 / n * se2 / g2).powi(2)).sqrt();

    let h = h_direction * epsilon;
    let b2s = b2.scaled(a)?;
    let mut checks = Vec::new();
    let (perturbed_g, perturbed_se) = if h.iter().all(|&v| v == 0.0) {
        (baseline, baseline_se)
    } else {
        let g = block_lower_generator(b1, &b2s, &h)?;
        let optimal = Decoder::sphere(&g);
        let pert = estimate_moments(&optimal, samples, seed)?;
        checks.extend(layered_checks(&optimal, b1, &b2s, &h, LAYERED_CHECK_POINTS, seed)?);
        (pert.g_hat, pert.se_g)
    };
    Ok(ExperimentReport {
        name: "saddle".into(),
        parameters: BTreeMap::from([("epsilon".into(), epsilon), ("a_opt".into(), a)]),
        composition: None,
        baseline_g: baseline,
        baseline_se,
        perturbed_g,
        perturbed_se,
        verdict: Verdict::judge(baseline, baseline_se, perturbed_g, perturbed_se),
        samples,
        seed,
        checks,
    })
}

const LAYERED_CHECK_POINTS: usize = 10_000;

/// Pointwise checks of the layered rule `Q̃` on random points: its error
/// lies in the product cell `Ω₁ × Ω₂`, and the closest-point rule is never
/// worse.
fn layered_checks(
    optimal: &Decoder,
    b1: &GeneratorMatrix,
    b2: &GeneratorMatrix,
    h: &DMatrix<f64>,
    points: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let layered = SuboptimalQuantizer::new(b1, b2, h)?;
    let cell = ProductDecoder::new(vec![(Decoder::sphere(b1), 1.0), (Decoder::sphere(b2), 1.0)])?;
    let g = layered.generator();
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7e);
    let (mut outside, mut worse) = (0usize, 0usize);
    for _ in 0..points {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = g.apply(&u);
        let q = layered.decode(&x)?;
        if cell.decode(&q.error)?.u.iter().any(|&c| c != 0) {
            outside += 1;
        }
        if optimal.decode(&x)?.d2 > q.d2 * (1.0 + 1e-12) {
            worse += 1;
        }
    }
    Ok(vec![
        Check::new(
            "layered-error-in-product-cell",
            outside == 0,
            format!("{outside} of {points} errors outside Ω₁×Ω₂"),
        ),
        Check::new("optimal-not-worse-than-layered", worse == 0, format!("{worse} of {points} points")),
    ])
}

/// Checks that a product of scaled lattices decodes blockwise, has additive
/// error and a block-diagonal covariance.
pub fn product_factorization_check(
    parts: &[(&Lattice, f64)],
    points: usize,
    samples: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let product = ProductDecoder::from_lattices(parts)?;
    let generator = product.generator()?;
    let sphere = Decoder::sphere(&generator);
    let n = generator.dim();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = generator.apply(&u);
        let a = product.decode(&x)?;
        let b = sphere.decode(&x)?;
        worst = worst.max((a.d2 - b.d2).abs());
    }

    let whole = estimate_moments(&product, samples, seed)?;
    let blocks: Vec<MomentEstimate> = parts
        .iter()
        .enumerate()
        .map(|(k, (l, a))| {
            let scaled = l.scaled(*a)?;
            estimate_lattice(&scaled, samples, seed.wrapping_add(1 + k as u64))
        })
        .collect::<Result<_>>()?;
    let e_sum: f64 = blocks.iter().map(|b| b.e_hat).sum();
    let e_sum_se = blocks.iter().map(|b| b.se_e * b.se_e).sum::<f64>().sqrt();
    let add_tol = 3.0 * (whole.se_e * whole.se_e + e_sum_se * e_sum_se).sqrt();

    let mut offsets = vec![0];
    for (l, _) in parts {
        offsets.push(offsets.last().unwrap() + l.dim);
    }
    let block_of = |i: usize| offsets.iter().rposition(|&o| o <= i).unwrap();
    let mut off_block_worst = 0.0f64;
    let mut off_block_ok = true;
    for i in 0..n {
        for j in 0..n {
            if block_of(i) != block_of(j) {
                let z = whole.r_hat[i][j].abs() / whole.r_se[i][j].max(f64::MIN_POSITIVE);
                off_block_worst = off_block_worst.max(z);
                off_block_ok &= z <= 3.0;
            }
        }
    }

    let per_dim: Vec<(f64, f64)> =
        blocks.iter().zip(parts).map(|(b, (l, _))| (b.e_hat / l.dim as f64, b.se_e / l.dim as f64)).collect();
    let mut per_dim_worst = 0.0f64;
    for w in per_dim.windows(2) {
        let z = (w[0].0 - w[1].0).abs() / (w[0].1 * w[0].1 + w[1].1 * w[1].1).sqrt();
        per_dim_worst = per_dim_worst.max(z);
    }

    let predicted_norm = whole.normalizer();
    let checks = vec![
        Check::new("decode-equivalence", worst <= 1e-9, format!("max |Δd2| = {worst:e} over {points} points")),
        Check::new(
            "error-additivity",
            (whole.e_hat - e_sum).abs() <= add_tol,
            format!("E = {} vs ΣE_i = {e_sum} (3σ = {add_tol:e})", whole.e_hat),
        ),
        Check::new("off-block-covariance", off_block_ok, format!("max |R_ij|/se = {off_block_worst:.3}")),
    ];
    let composition = parts.iter().map(|(l, a)| format!("{}@{a}", l.name)).collect::<Vec<_>>().join("*");
    Ok(ExperimentReport {
        name: "product-factorization".into(),
        parameters: BTreeMap::from([
            ("points".into(), points as f64),
            ("max_abs_d2_difference".into(), worst),
            ("per_dimension_error_max_z".into(), per_dim_worst),
        ]),
        composition: Some(composition),
        baseline_g: e_sum / predicted_norm,
        baseline_se: e_sum_se / predicted_norm,
        perturbed_g: whole.g_hat,
        perturbed_se: whole.se_g,
        verdict: Verdict::judge(e_sum / predicted_norm, e_sum_se / predicted_norm, whole.g_hat, whole.se_g),
        samples,
        seed,
        checks,
    })
}

/// NSM of the box with the given side lengths, `Σ d_i²/12 / (n·V^{2/n})`.
pub fn box_nsm(sides: &[f64]) -> f64 {
    let n = sides.len() as f64;
    let e: f64 = sides.iter().map(|d| d * d / 12.0).sum();
    let v: f64 = sides.iter().product();
    e / (n * v.powf(2.0 / n))
}

fn box_traceless(sides: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = sides.iter().map(|d| d * d / 12.0).collect();
    let rho = r.iter().sum::<f64>() / r.len() as f64;
    r.iter().map(|v| v - rho).collect()
}

/// NSM of the box `diag(d)·exp(β·R̄)`, itself a box since `R̄` is diagonal.
pub fn box_whitened_nsm(sides: &[f64], beta: f64) -> f64 {
    let s: Vec<f64> = sides.iter().zip(box_traceless(sides)).map(|(d, rb)| d * (beta * rb).exp()).collect();
    box_nsm(&s)
}

/// Exact first-order check on a box: the central difference of
/// `G(diag(d)·A_β)` at `β = 0` against `2·tr R̄²/(n·V^{2/n})`.
/// Returns `(finite_difference, predicted)`.
pub fn box_whitening_slope(sides: &[f64], step: f64) -> Result<(f64, f64)> {
    if sides.is_empty() || sides.iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(Error::InvalidParameter("box sides must be positive".into()));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let n = sides.len() as f64;
    let rbar = box_traceless(sides);
    let g = |beta: f64| box_whitened_nsm(sides, beta);
    let fd = (g(step) - g(-step)) / (2.0 * step);
    let v: f64 = sides.iter().product();
    let predicted = 2.0 * rbar.iter().map(|x| x * x).sum::<f64>() / (n * v.powf(2.0 / n));
    Ok((fd, predicted))
}
