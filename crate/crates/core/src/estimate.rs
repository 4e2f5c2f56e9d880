//! Monte Carlo second moments of a quantizer.
//!
//! Sample `i` draws `u ∈ [0,1)ⁿ` from a ChaCha stream keyed by the seed and
//! positioned at word `2n·i`, and quantizes `x = u·B`. Samples are split into
//! a fixed set of batches that depends only on the sample count, so results
//! do not depend on the thread count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::Lattice;
use crate::decode::{DecodeResult, Decoder, ProductDecoder, SuboptimalQuantizer};
use crate::error::{Error, Result};
use crate::linalg::{volume, GeneratorMatrix, SymmetricMatrix};

/// Upper bound on the number of batches.
const MAX_BATCHES: u64 = 256;

/// A quantization rule together with the generator of its lattice.
pub trait Quantizer: Sync {
    fn generator(&self) -> GeneratorMatrix;
    fn quantize(&self, x: &[f64]) -> Result<DecodeResult>;
}

impl Quantizer for Decoder {
    fn generator(&self) -> GeneratorMatrix {
        Decoder::generator(self).clone()
    }
    fn quantize(&self, x: &[f64]) -> Result<DecodeResult> {
        self.decode(x)
    }
}

impl Quantizer for ProductDecoder {
    fn generator(&self) -> GeneratorMatrix {
        ProductDecoder::generator(self).expect("product of valid generators")
    }
    fn quantize(&self, x: &[f64]) -> Result<DecodeResult> {
        self.decode(x)
    }
}

impl Quantizer for SuboptimalQuantizer {
    fn generator(&self) -> GeneratorMatrix {
        SuboptimalQuantizer::generator(self).clone()
    }
    fn quantize(&self, x: &[f64]) -> Result<DecodeResult> {
        self.decode(x)
    }
}

/// Monte Carlo estimates of `E`, `G` and `R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub volume: f64,
    pub e_hat: f64,
    pub g_hat: f64,
    pub r_hat: Vec<Vec<f64>>,
    pub se_e: f64,
    pub se_g: f64,
    /// Standard errors of the entries of `r_hat`.
    pub r_se: Vec<Vec<f64>>,
    /// Sample mean of `‖e‖⁴`.
    pub m4: f64,
    /// `R̂` of consecutive groups of samples, for batch-means errors.
    #[serde(skip)]
    group_r: Vec<DMatrix<f64>>,
}

impl MomentEstimate {
    pub fn r_matrix(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_matrix_unchecked(DMatrix::from_fn(self.n, self.n, |i, j| self.r_hat[i][j]))
    }

    /// `n·V^{2/n}`.
    pub fn normalizer(&self) -> f64 {
        self.n as f64 * self.volume.powf(2.0 / self.n as f64)
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    count: u64,
    d2: f64,
    d2_sq: f64,
    outer: DMatrix<f64>,
    outer_sq: DMatrix<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator { count: 0, d2: 0.0, d2_sq: 0.0, outer: DMatrix::zeros(n, n), outer_sq: DMatrix::zeros(n, n) }
    }

    fn add(&mut self, e: &[f64]) {
        let n = e.len();
        // d2 is the trace of the outer product, accumulated identically.
        let mut d2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = e[i] * e[j];
                self.outer[(i, j)] += p;
                self.outer_sq[(i, j)] += p * p;
            }
            d2 += e[i] * e[i];
        }
        self.count += 1;
        self.d2 += d2;
        self.d2_sq += d2 * d2;
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        self.count += other.count;
        self.d2 += other.d2;
        self.d2_sq += other.d2_sq;
        self.outer += &other.outer;
        self.outer_sq += &other.outer_sq;
        self
    }
}

/// Index-ordered pairwise reduction.
fn pairwise(parts: &[Accumulator]) -> Accumulator {
    match parts.len() {
        0 => unreachable!("at least one batch"),
        1 => parts[0].clone(),
        k => {
            let (l, r) = parts.split_at(k / 2);
            pairwise(l).merge(&pairwise(r))
        }
    }
}

fn batch_ranges(samples: u64) -> Vec<(u64, u64)> {
    let batches = samples.min(MAX_BATCHES);
    let size = samples.div_ceil(batches);
    (0..batches).map(|b| (b * size, ((b + 1) * size).min(samples))).filter(|(s, e)| s < e).collect()
}

fn run_batch<Q: Quantizer + ?Sized>(q: &Q, b: &GeneratorMatrix, seed: u64, start: u64, end: u64) -> Result<Accumulator> {
    let n = b.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(start as u128 * 2 * n as u128);
    let mut acc = Accumulator::new(n);
    let mut u = vec![0.0; n];
    for _ in start..end {
        u.iter_mut().for_each(|v| *v = rng.random::<f64>());
        let x = b.apply(&u);
        let r = q.quantize(&x)?;
        acc.add(&r.error);
    }
    Ok(acc)
}

/// Estimates `E = E‖x − Q(x)‖²/n`·n, `G` and `R` for the quantizer `q`.
pub fn estimate_moments<Q: Quantizer + ?Sized>(q: &Q, samples: u64, seed: u64) -> Result<MomentEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let b = q.generator();
    let n = b.dim();
    let ranges = batch_ranges(samples);
    let batches: Vec<Accumulator> =
        ranges.par_iter().map(|&(s, e)| run_batch(q, &b, seed, s, e)).collect::<Result<_>>()?;
    let total = pairwise(&batches);

    let nf = samples as f64;
    let e_hat = total.d2 / nf;
    let m4 = total.d2_sq / nf;
    let var_d2 = (m4 - e_hat * e_hat).max(0.0) * nf / (nf - 1.0).max(1.0);
    let se_e = (var_d2 / nf).sqrt();
    let v = volume(&b);
    let norm = n as f64 * v.powf(2.0 / n as f64);
    let r = &total.outer / nf;
    let r_hat: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (r[(i, j)] + r[(j, i)]) / 2.0).collect()).collect();
    let r_se = (0..n)
        .map(|i| (0..n).map(|j| ((total.outer_sq[(i, j)] / nf - r[(i, j)] * r[(i, j)]).max(0.0) / nf).sqrt()).collect())
        .collect();

    let groups = batches.len().min(32);
    let per = batches.len().div_ceil(groups);
    let group_r = batches
        .chunks(per)
        .map(|c| {
            let a = pairwise(c);
            &a.outer / a.count as f64
        })
        .collect();

    Ok(MomentEstimate {
        n,
        samples,
        seed,
        volume: v,
        e_hat,
        g_hat: e_hat / norm,
        r_hat,
        se_e,
        se_g: se_e / norm,
        r_se,
        m4,
        group_r,
    })
}

/// Estimate for a catalog lattice, using its fast decoder when available.
pub fn estimate_lattice(lattice: &Lattice, samples: u64, seed: u64) -> Result<MomentEstimate> {
    estimate_moments(&lattice.decoder()?, samples, seed)
}

/// Estimate for an arbitrary generator, decoded by sphere decoding.
pub fn estimate_generator(b: &GeneratorMatrix, samples: u64, seed: u64) -> Result<MomentEstimate> {
    estimate_moments(&Decoder::sphere(b), samples, seed)
}

/// Whiteness diagnostics of an estimated covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitenessReport {
    pub estimate: MomentEstimate,
    /// `tr R̂ / n`.
    pub rho: f64,
    pub rbar: Vec<Vec<f64>>,
    /// `‖R̄‖_F / (tr R̂/√n)`.
    pub anisotropy: f64,
    /// Sampling noise scale of `anisotropy` when `R ∝ I`.
    pub anisotropy_se: f64,
    /// `(λ_max − λ_min)/ρ`.
    pub eigen_spread: f64,
    pub eigen_spread_se: f64,
}

fn spread(r: &DMatrix<f64>) -> f64 {
    let n = r.nrows();
    let rho = r.trace() / n as f64;
    let ev = SymmetricMatrix::from_matrix_unchecked((r + r.transpose()) * 0.5).eigenvalues();
    (ev[n - 1] - ev[0]) / rho
}

/// Whiteness diagnostics computed from an existing estimate.
pub fn whiteness_of(estimate: MomentEstimate) -> WhitenessReport {
    let n = estimate.n;
    let nf = n as f64;
    let r = estimate.r_matrix();
    let rho = r.trace() / nf;
    let rbar = crate::experiments::traceless_part(&r);
    let fro = rbar.frobenius_norm();
    let scale = rho * nf.sqrt();
    // E‖T‖²_F for T = eeᵀ − (‖e‖²/n)I is (1 − 1/n)·E‖e‖⁴.
    let noise = (((1.0 - 1.0 / nf) * estimate.m4 - fro * fro).max(0.0) / estimate.samples as f64).sqrt();
    let eigen_spread = spread(r.matrix());
    let g = estimate.group_r.len();
    let eigen_spread_se = if g > 1 {
        let vals: Vec<f64> = estimate.group_r.iter().map(spread).collect();
        let mean = vals.iter().sum::<f64>() / g as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (g - 1) as f64;
        (var / g as f64).sqrt()
    } else {
        f64::INFINITY
    };
    WhitenessReport {
        rho,
        rbar: rbar.to_rows(),
        anisotropy: fro / scale,
        anisotropy_se: noise / scale,
        eigen_spread,
        eigen_spread_se,
        estimate,
    }
}

pub fn whiteness<Q: Quantizer + ?Sized>(q: &Q, samples: u64, seed: u64) -> Result<WhitenessReport> {
    Ok(whiteness_of(estimate_moments(q, samples, seed)?))
}

/// The JSON shape of a moment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub name: String,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "se_G")]
    pub se_g: f64,
    /// Row-major.
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub rho: f64,
    pub anisotropy: f64,
    pub eigen_spread: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

impl MomentReport {
    pub fn new(name: impl Into<String>, w: &WhitenessReport) -> Self {
        let e = &w.estimate;
        MomentReport {
            name: name.into(),
            n: e.n,
            samples: e.samples,
            seed: e.seed,
            e: e.e_hat,
            g: e.g_hat,
            se_g: e.se_g,
            r: e.r_hat.iter().flatten().copied().collect(),
            rho: w.rho,
            anisotropy: w.anisotropy,
            eigen_spread: w.eigen_spread,
            v: e.volume,
        }
    }
}
