//! Exact closest-point search by Schnorr–Euchner enumeration.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{lll_reduce_with, lq_decompose, GeneratorMatrix};

/// Default cap on visited enumeration nodes per query.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// LLL parameter used to precondition the search.
const PRECONDITION_DELTA: f64 = 0.99;

/// Relative slack under which two squared distances count as a tie.
const TIE_RTOL: f64 = 1e-12;

/// Sphere decoder for an arbitrary generator matrix.
#[derive(Debug, Clone)]
pub struct SphereDecoder {
    original: GeneratorMatrix,
    reduced_inv: DMatrix<f64>,
    /// Unimodular transform with `reduced = U·original`.
    transform: Vec<Vec<i64>>,
    /// `reduced = L·Q`, `L` lower triangular.
    l: DMatrix<f64>,
    q: DMatrix<f64>,
    node_cap: u64,
}

/// Outcome of a search, in coordinates of the original generator.
#[derive(Debug, Clone)]
pub(crate) struct SphereHit {
    pub u: Vec<i64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub d2: f64,
}

impl SphereDecoder {
    pub fn new(b: &GeneratorMatrix) -> Self {
        let (reduced, transform) = lll_reduce_with(b, PRECONDITION_DELTA);
        let (l, q) = lq_decompose(&reduced.to_rows());
        SphereDecoder {
            original: b.clone(),
            reduced_inv: reduced.inverse(),
            transform,
            l,
            q,
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.original
    }

    pub fn dim(&self) -> usize {
        self.original.dim()
    }

    fn to_original(&self, v: &[i64]) -> Vec<i64> {
        let n = v.len();
        (0..n).map(|k| (0..n).map(|i| v[i] * self.transform[i][k]).sum()).collect()
    }

    /// Coordinates of `x` in the orthonormal frame `Q`.
    fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|c| x[c] * self.q[(j, c)]).sum()).collect()
    }

    fn center(&self, y: &[f64], v: &[i64], k: usize) -> f64 {
        let n = self.dim();
        let mut s = y[k];
        for i in k + 1..n {
            s -= v[i] as f64 * self.l[(i, k)];
        }
        s / self.l[(k, k)]
    }

    pub(crate) fn search(&self, x: &[f64]) -> Result<SphereHit> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let y = self.rotate(x);

        // Babai rounding on the reduced basis supplies the starting radius.
        let v0: Vec<i64> = (0..n)
            .map(|j| (0..n).map(|i| x[i] * self.reduced_inv[(i, j)]).sum::<f64>().round() as i64)
            .collect();
        let mut best_d2 = self.residual(&y, &v0);
        let mut best_u = self.to_original(&v0);

        let mut v = vec![0i64; n];
        let mut base = vec![0i64; n];
        let mut dir = vec![1i64; n];
        let mut step = vec![0u32; n];
        let mut c = vec![0.0; n];
        let mut partial = vec![0.0; n + 1];
        let mut nodes: u64 = 0;

        let mut k = n - 1;
        self.start_level(&y, &mut v, &mut base, &mut dir, &mut step, &mut c, k);
        loop {
            nodes += 1;
            if nodes > self.node_cap {
                return Err(Error::SearchBudgetExceeded(self.node_cap));
            }
            let diff = v[k] as f64 - c[k];
            let t = self.l[(k, k)] * diff;
            let d = partial[k + 1] + t * t;
            if d <= best_d2 * (1.0 + TIE_RTOL) {
                if k == 0 {
                    let u = self.to_original(&v);
                    if d < best_d2 * (1.0 - TIE_RTOL) || lex_cmp(&u, &best_u) == Ordering::Less {
                        best_d2 = best_d2.min(d);
                        best_u = u;
                    }
                    next_sibling(&mut v, &base, &dir, &mut step, k);
                } else {
                    partial[k] = d;
                    k -= 1;
                    self.start_level(&y, &mut v, &mut base, &mut dir, &mut step, &mut c, k);
                }
            } else {
                if k == n - 1 {
                    break;
                }
                k += 1;
                next_sibling(&mut v, &base, &dir, &mut step, k);
            }
        }
        // Report the exact squared distance of the chosen point.
        let p = self.original.point(&best_u);
        let d2 = x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(SphereHit { u: best_u, d2 })
    }

    #[allow(clippy::too_many_arguments)]
    fn start_level(
        &self,
        y: &[f64],
        v: &mut [i64],
        base: &mut [i64],
        dir: &mut [i64],
        step: &mut [u32],
        c: &mut [f64],
        k: usize,
    ) {
        c[k] = self.center(y, v, k);
        let r = c[k].round();
        base[k] = r as i64;
        dir[k] = if c[k] >= r { 1 } else { -1 };
        step[k] = 0;
        v[k] = base[k];
    }

    fn residual(&self, y: &[f64], v: &[i64]) -> f64 {
        let n = self.dim();
        let mut d = 0.0;
        for j in 0..n {
            let mut s = y[j];
            for i in j..n {
                s -= v[i] as f64 * self.l[(i, j)];
            }
            d += s * s;
        }
        d
    }

    /// Counts lattice points within squared distance `r2` of `center`.
    pub fn count_within(&self, center: &[f64], r2: f64) -> Result<u64> {
        let n = self.dim();
        let y = self.rotate(center);
        let mut v = vec![0i64; n];
        let mut base = vec![0i64; n];
        let mut dir = vec![1i64; n];
        let mut step = vec![0u32; n];
        let mut c = vec![0.0; n];
        let mut partial = vec![0.0; n + 1];
        let mut count = 0u64;
        let mut nodes = 0u64;
        let mut k = n - 1;
        self.start_level(&y, &mut v, &mut base, &mut dir, &mut step, &mut c, k);
        loop {
            nodes += 1;
            if nodes > self.node_cap.saturating_mul(100) {
                return Err(Error::SearchBudgetExceeded(self.node_cap.saturating_mul(100)));
            }
            let t = self.l[(k, k)] * (v[k] as f64 - c[k]);
            let d = partial[k + 1] + t * t;
            if d <= r2 {
                if k == 0 {
                    count += 1;
                    next_sibling(&mut v, &base, &dir, &mut step, k);
                } else {
                    partial[k] = d;
                    k -= 1;
                    self.start_level(&y, &mut v, &mut base, &mut dir, &mut step, &mut c, k);
                }
            } else {
                if k == n - 1 {
                    break;
                }
                k += 1;
                next_sibling(&mut v, &base, &dir, &mut step, k);
            }
        }
        Ok(count)
    }
}

/// Zig-zag around the level's center: base, base±1, base∓1, base±2, ...
fn next_sibling(v: &mut [i64], base: &[i64], dir: &[i64], step: &mut [u32], k: usize) {
    step[k] += 1;
    let s = step[k] as i64;
    let offset = if s % 2 == 1 { (s + 1) / 2 } else { -s / 2 };
    v[k] = base[k] + dir[k] * offset;
}

pub(crate) fn lex_cmp(a: &[i64], b: &[i64]) -> Ordering {
    a.cmp(b)
}
