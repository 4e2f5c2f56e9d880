//! Fast closest-point rules for the classical root lattices, working in
//! their standard coordinates.

use std::cmp::Ordering;

use nalgebra::DMatrix;

/// A lattice in the coordinates where a fast rule applies.
#[derive(Debug, Clone, PartialEq)]
pub enum NativeLattice {
    /// `Zᵐ`.
    Integer,
    /// `D_m`: integer vectors with even coordinate sum.
    Checkerboard,
    /// `A_m`: integer vectors in `R^{m+1}` with zero coordinate sum.
    ZeroSum,
    /// Union of translates `base + g`.
    Cosets { base: Box<NativeLattice>, glue: Vec<Vec<f64>> },
}

/// Round half down, so that ties resolve toward the smaller integer.
pub(crate) fn round_tie_low(x: f64) -> f64 {
    (x - 0.5).ceil()
}

impl NativeLattice {
    pub fn cosets(base: NativeLattice, glue: Vec<Vec<f64>>) -> Self {
        NativeLattice::Cosets { base: Box::new(base), glue }
    }

    /// Closest point to `y`. Exact ties between coset candidates are passed
    /// to `tie`, which orders two candidate points.
    pub fn closest(&self, y: &[f64], tie: &dyn Fn(&[f64], &[f64]) -> Ordering) -> Vec<f64> {
        match self {
            NativeLattice::Integer => y.iter().map(|&v| round_tie_low(v)).collect(),
            NativeLattice::Checkerboard => closest_checkerboard(y),
            NativeLattice::ZeroSum => closest_zero_sum(y),
            NativeLattice::Cosets { base, glue } => {
                let mut best: Option<(f64, Vec<f64>)> = None;
                let mut shifted = vec![0.0; y.len()];
                for g in glue {
                    for ((s, &yv), &gv) in shifted.iter_mut().zip(y).zip(g) {
                        *s = yv - gv;
                    }
                    let mut p = base.closest(&shifted, tie);
                    for (pv, &gv) in p.iter_mut().zip(g) {
                        *pv += gv;
                    }
                    let d = sq_dist(y, &p);
                    let better = match &best {
                        None => true,
                        Some((bd, bp)) => d < *bd || (d == *bd && tie(&p, bp) == Ordering::Less),
                    };
                    if better {
                        best = Some((d, p));
                    }
                }
                best.expect("coset list is non-empty").1
            }
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn closest_checkerboard(y: &[f64]) -> Vec<f64> {
    let mut f: Vec<f64> = y.iter().map(|&v| round_tie_low(v)).collect();
    let parity = f.iter().sum::<f64>().rem_euclid(2.0);
    if parity != 0.0 {
        // Re-round the coordinate with the largest rounding error the other way.
        let mut worst = 0;
        let mut worst_err = -1.0;
        for (i, (&v, &r)) in y.iter().zip(&f).enumerate() {
            let e = (v - r).abs();
            if e > worst_err {
                worst_err = e;
                worst = i;
            }
        }
        f[worst] += if y[worst] >= f[worst] { 1.0 } else { -1.0 };
    }
    f
}

fn closest_zero_sum(y: &[f64]) -> Vec<f64> {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let p: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let mut f: Vec<f64> = p.iter().map(|&v| v.round()).collect();
    let deficiency = f.iter().sum::<f64>() as i64;
    if deficiency != 0 {
        let mut order: Vec<usize> = (0..p.len()).collect();
        // Sort by rounding residual p_i - f_i, ascending.
        order.sort_by(|&a, &b| (p[a] - f[a]).total_cmp(&(p[b] - f[b])).then(a.cmp(&b)));
        if deficiency > 0 {
            for &i in order.iter().take(deficiency as usize) {
                f[i] -= 1.0;
            }
        } else {
            for &i in order.iter().rev().take((-deficiency) as usize) {
                f[i] += 1.0;
            }
        }
    }
    f
}

/// A scaled isometry from lattice coordinates into native coordinates:
/// `native = x·Q·s`, where `Q` has orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    q: DMatrix<f64>,
    scale: f64,
}

impl Embedding {
    pub fn new(q: DMatrix<f64>, scale: f64) -> Self {
        Embedding { q, scale }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// The same embedding with its scale multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Embedding { q: self.q.clone(), scale: self.scale * factor }
    }

    pub fn to_native(&self, x: &[f64]) -> Vec<f64> {
        let m = self.q.ncols();
        let mut y = vec![0.0; m];
        for (i, &xi) in x.iter().enumerate() {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj += xi * self.q[(i, j)];
            }
        }
        y.iter_mut().for_each(|v| *v *= self.scale);
        y
    }

    pub fn from_native(&self, y: &[f64]) -> Vec<f64> {
        let n = self.q.nrows();
        (0..n).map(|i| (0..y.len()).map(|j| y[j] * self.q[(i, j)]).sum::<f64>() / self.scale).collect()
    }
}

/// The glue vectors `[i]` of `A_m*/A_m` in `R^{m+1}`.
pub fn zero_sum_dual_glue(m: usize) -> Vec<Vec<f64>> {
    let n1 = (m + 1) as f64;
    (0..=m)
        .map(|i| {
            let j = m + 1 - i;
            let mut g = vec![i as f64 / n1; j];
            g.extend(std::iter::repeat_n(-(j as f64) / n1, i));
            g
        })
        .collect()
}
