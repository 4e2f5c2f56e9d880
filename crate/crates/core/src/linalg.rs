//! Dense linear algebra shared by the rest of the crate.
//!
//! Lattices use the row convention throughout: the lattice generated by `B`
//! is the set of points `u·B` for integer row vectors `u`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative tolerance for the invertibility check, against the product of row norms.
pub const SINGULAR_TOL: f64 = 1e-12;

/// A square invertible generator matrix whose rows span a full-rank lattice.
///
/// Entries may additionally carry exact rational values; when every entry
/// does, determinants are evaluated exactly.
#[derive(Clone, PartialEq)]
pub struct GeneratorMatrix {
    rows: DMatrix<f64>,
    exact: Option<Vec<Vec<BigRational>>>,
}

impl fmt::Debug for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorMatrix")
            .field("n", &self.dim())
            .field("rows", &self.to_rows())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl GeneratorMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows_to_matrix(&rows)?;
        Self::from_matrix(m)
    }

    pub fn from_matrix(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() != rows.ncols() {
            return Err(Error::NotSquare { rows: rows.nrows(), cols: rows.ncols() });
        }
        if rows.nrows() == 0 {
            return Err(Error::InvalidParameter("generator matrix must have dimension >= 1".into()));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("generator matrix has non-finite entries".into()));
        }
        let g = GeneratorMatrix { rows, exact: None };
        g.check_invertible()?;
        Ok(g)
    }

    /// Builds a generator from exact rational entries.
    pub fn from_rationals(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("generator matrix must have dimension >= 1".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rational_to_f64(&rows[i][j]));
        let g = GeneratorMatrix { rows: m, exact: Some(rows) };
        g.check_invertible()?;
        Ok(g)
    }

    /// Integer generator, stored exactly.
    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rationals(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n]).expect("identity is invertible")
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.rows.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_rows(&self) -> Option<&[Vec<BigRational>]> {
        self.exact.as_deref()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.rows.row(i).iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.row(i)).collect()
    }

    /// Determinant, exact when all entries are rational.
    pub fn determinant(&self) -> f64 {
        match &self.exact {
            Some(q) => rational_to_f64(&exact_determinant(q)),
            None => self.rows.clone().lu().determinant(),
        }
    }

    /// The lattice point `u·B`.
    pub fn point(&self, u: &[i64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(u.len(), n, "coordinate vector length");
        let mut p = vec![0.0; n];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            let c = ui as f64;
            for (j, pj) in p.iter_mut().enumerate() {
                *pj += c * self.rows[(i, j)];
            }
        }
        p
    }

    /// `x·B` for a real row vector `x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut p = vec![0.0; n];
        for (i, &xi) in x.iter().enumerate() {
            for (j, pj) in p.iter_mut().enumerate() {
                *pj += xi * self.rows[(i, j)];
            }
        }
        p
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.rows.clone().try_inverse().expect("generator is invertible by construction")
    }

    /// Gram matrix `B·Bᵀ`.
    pub fn gram(&self) -> SymmetricMatrix {
        let g = &self.rows * self.rows.transpose();
        SymmetricMatrix::from_matrix_unchecked(symmetrize(g))
    }

    /// The generator of `c·Λ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_matrix(&self.rows * c)
    }

    /// Right multiplication `B·A` (a linear map applied to every lattice point).
    pub fn transformed(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.nrows() });
        }
        Self::from_matrix(&self.rows * a)
    }

    /// Left multiplication by an integer matrix `U·B`, exact when `B` is.
    pub fn left_multiply(&self, u: &[Vec<i64>]) -> Result<Self> {
        let n = self.dim();
        if u.len() != n || u.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        match &self.exact {
            Some(q) => {
                let rows = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let mut acc = BigRational::zero();
                                for (k, &c) in u[i].iter().enumerate() {
                                    if c != 0 {
                                        acc += &q[k][j] * BigRational::from_integer(BigInt::from(c));
                                    }
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect();
                Self::from_rationals(rows)
            }
            None => {
                let um = DMatrix::from_fn(n, n, |i, j| u[i][j] as f64);
                Self::from_matrix(um * &self.rows)
            }
        }
    }

    fn check_invertible(&self) -> Result<()> {
        let norms: f64 = (0..self.dim()).map(|i| self.rows.row(i).norm()).product();
        let tolerance = SINGULAR_TOL * norms;
        let det = self.determinant();
        if det.is_nan() || det.abs() <= tolerance {
            return Err(Error::Singular { det, tolerance });
        }
        Ok(())
    }
}

/// Volume of the fundamental cell, `|det B|`.
pub fn volume(b: &GeneratorMatrix) -> f64 {
    b.determinant().abs()
}

/// Real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let scale = m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(SymmetricMatrix { m })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows_to_matrix(&rows)?)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        SymmetricMatrix { m: DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }) }
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        SymmetricMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.m.row(i).iter().copied().collect()).collect()
    }

    /// Row-major flattening.
    pub fn row_major(&self) -> Vec<f64> {
        self.to_rows().into_iter().flatten().collect()
    }
}

/// `exp(β·M)` for symmetric `M`, through its eigendecomposition.
pub fn sym_matrix_exp(m: &SymmetricMatrix, beta: f64) -> SymmetricMatrix {
    let eig = SymmetricEigen::new(m.m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (beta * l).exp()));
    let v = &eig.eigenvectors;
    SymmetricMatrix { m: symmetrize(v * d * v.transpose()) }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|row| row.len() != c) {
        return Err(Error::NotSquare { rows: r, cols: bad.len() });
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    // Numerator and denominator may exceed f64 range individually.
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = q.numer().bits().max(q.denom().bits()) as i64 - 60;
            let n = (q.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

fn exact_determinant(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let mut det = BigRational::from_integer(BigInt::from(1));
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let pivot = a[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &pivot;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

/// LLL reduction with the standard parameter δ = 3/4.
pub fn lll_reduce(b: &GeneratorMatrix) -> GeneratorMatrix {
    lll_reduce_with(b, 0.75).0
}

/// LLL reduction with parameter `delta`, also returning the unimodular
/// transform `U` with `reduced = U·B`.
pub fn lll_reduce_with(b: &GeneratorMatrix, delta: f64) -> (GeneratorMatrix, Vec<Vec<i64>>) {
    let n = b.dim();
    let mut basis = b.to_rows();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    let (mut mu, mut bn) = gram_schmidt(&basis);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                for c in 0..n {
                    basis[k][c] -= q * basis[j][c];
                    u[k][c] -= qi * u[j][c];
                }
                mu[k][j] -= q;
                for l in 0..j {
                    mu[k][l] -= q * mu[j][l];
                }
            }
        }
        if bn[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            u.swap(k, k - 1);
            let gs = gram_schmidt(&basis);
            mu = gs.0;
            bn = gs.1;
            k = (k - 1).max(1);
        }
    }
    // Rebuild from the integer transform so that float drift does not accumulate.
    let reduced = b.left_multiply(&u).expect("unimodular transform preserves invertibility");
    (reduced, u)
}

fn gram_schmidt(basis: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = basis.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut bn = vec![0.0; n];
    for i in 0..n {
        let mut v = basis[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&basis[i], &star[j]) / bn[j];
            for (vc, sc) in v.iter_mut().zip(&star[j]) {
                *vc -= mu[i][j] * sc;
            }
        }
        bn[i] = dot(&v, &v);
        mu[i][i] = 1.0;
        star.push(v);
    }
    (mu, bn)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LQ factorization of a `k×m` matrix with independent rows (`k ≤ m`):
/// `rows = L·Q` with `L` lower triangular (`k×k`, positive diagonal) and `Q`
/// having orthonormal rows.
pub fn lq_decompose(rows: &[Vec<f64>]) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut l = DMatrix::zeros(k, k);
    for i in 0..k {
        let mut v = rows[i].clone();
        // Two passes of modified Gram-Schmidt keep Q orthonormal to round-off.
        for _ in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let c = dot(&v, qj);
                l[(i, j)] += c;
                for (vc, qc) in v.iter_mut().zip(qj) {
                    *vc -= c * qc;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        l[(i, i)] = norm;
        q.push(v.into_iter().map(|x| x / norm).collect());
    }
    let qm = DMatrix::from_fn(k, m, |i, j| q[i][j]);
    (l, qm)
}

/// Row basis (Hermite normal form) of the integer lattice spanned by `gens`.
pub fn integer_row_basis(gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let cols = gens.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = gens.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let rank = echelonize(&mut a, cols);
    a.truncate(rank);
    a.into_iter()
        .map(|r| r.into_iter().map(|v| i64::try_from(v).expect("entry fits in i64")).collect())
        .collect()
}

/// Integer basis of `{u ∈ Zⁿ : u·C = 0}` for an `n×k` integer matrix `C`.
pub fn integer_kernel(c: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = c.len();
    let k = c.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = c
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<i128> = row.iter().map(|&v| v as i128).collect();
            r.extend((0..n).map(|j| (i == j) as i128));
            r
        })
        .collect();
    let rank = echelonize(&mut a, k);
    a[rank..]
        .iter()
        .map(|r| r[k..].iter().map(|&v| i64::try_from(v).expect("entry fits in i64")).collect())
        .collect()
}

/// Row-echelon form over the integers using unimodular row operations,
/// pivoting only in the first `pivot_cols` columns. Returns the rank.
fn echelonize(a: &mut [Vec<i128>], pivot_cols: usize) -> usize {
    let m = a.len();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m {
            break;
        }
        loop {
            let Some(p) = (r..m).filter(|&i| a[i][c] != 0).min_by_key(|&i| a[i][c].abs()) else {
                break;
            };
            a.swap(r, p);
            let mut clean = true;
            for i in r + 1..m {
                if a[i][c] != 0 {
                    let q = a[i][c].div_euclid(a[r][c]);
                    let (head, tail) = a.split_at_mut(i);
                    for (x, y) in tail[0].iter_mut().zip(&head[r]) {
                        *x -= q * y;
                    }
                    if a[i][c] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if a[r][c] != 0 {
            if a[r][c] < 0 {
                a[r].iter_mut().for_each(|v| *v = -*v);
            }
            // Reduce entries above the pivot.
            for i in 0..r {
                let q = a[i][c].div_euclid(a[r][c]);
                if q != 0 {
                    let (head, tail) = a.split_at_mut(r);
                    for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                        *x -= q * y;
                    }
                }
            }
            r += 1;
        }
    }
    r
}

/// Parses the lattice matrix text format: a line holding `n`, followed by `n`
/// lines of `n` whitespace-separated entries (decimal literals or `p/q`).
/// Blank lines and `#` comments are ignored.
pub fn parse_matrix_text(text: &str) -> Result<GeneratorMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty matrix file".into() })?;
    let n: usize = header
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("expected dimension, found `{header}`") })?;
    if n == 0 {
        return Err(Error::Parse { line, msg: "dimension must be positive".into() });
    }
    let mut exact_rows: Vec<Option<Vec<BigRational>>> = Vec::with_capacity(n);
    let mut float_rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, l) = lines.next().ok_or(Error::Parse { line: 0, msg: format!("expected {n} matrix rows") })?;
        let entries: Vec<&str> = l.split_whitespace().collect();
        if entries.len() != n {
            return Err(Error::Parse { line, msg: format!("expected {n} entries, found {}", entries.len()) });
        }
        let mut fr = Vec::with_capacity(n);
        let mut er = Some(Vec::with_capacity(n));
        for e in entries {
            let (f, q) = parse_entry(e).ok_or_else(|| Error::Parse { line, msg: format!("bad entry `{e}`") })?;
            fr.push(f);
            match (q, er.as_mut()) {
                (Some(q), Some(v)) => v.push(q),
                _ => er = None,
            }
        }
        float_rows.push(fr);
        exact_rows.push(er);
    }
    if let Some((line, l)) = lines.next() {
        return Err(Error::Parse { line, msg: format!("trailing content `{l}`") });
    }
    if exact_rows.iter().all(Option::is_some) {
        GeneratorMatrix::from_rationals(exact_rows.into_iter().map(Option::unwrap).collect())
    } else {
        GeneratorMatrix::from_rows(float_rows)
    }
}

fn parse_entry(s: &str) -> Option<(f64, Option<BigRational>)> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.parse().ok()?;
        let q: BigInt = q.parse().ok()?;
        if q.is_zero() {
            return None;
        }
        let r = BigRational::new(p, q);
        return Some((rational_to_f64(&r), Some(r)));
    }
    let f: f64 = s.parse().ok()?;
    if !f.is_finite() {
        return None;
    }
    Some((f, parse_plain_decimal(s)))
}

/// Exact value of a literal like `-12.375`; `None` for exponent forms.
fn parse_plain_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if !(int.chars().all(|c| c.is_ascii_digit()) && frac.chars().all(|c| c.is_ascii_digit())) {
        return None;
    }
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let r = BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    Some(if neg { -r } else { r })
}

/// Serializes a generator in the matrix text format; exact entries are
/// written as integers or `p/q`.
pub fn format_matrix_text(b: &GeneratorMatrix) -> String {
    let n = b.dim();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = match b.exact_rows() {
            Some(q) => q[i]
                .iter()
                .map(|v| if v.is_integer() { v.numer().to_string() } else { format!("{}/{}", v.numer(), v.denom()) })
                .collect(),
            None => b.row(i).iter().map(|v| format!("{v:?}")).collect(),
        };
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume(&GeneratorMatrix::identity(3)), 1.0);
        let a2 = GeneratorMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).unwrap();
        assert!(close(volume(&a2), 0.866_025_403_784_438_6, 1e-15));
        let d = GeneratorMatrix::diagonal(&[1.0, 2.0]).unwrap();
        assert_eq!(volume(&d), 2.0);
    }

    #[test]
    fn singular_rejected() {
        let err = GeneratorMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
        let err = GeneratorMatrix::from_integers(&[vec![1, 1], vec![1, 1]]).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
        assert!(matches!(
            GeneratorMatrix::from_rows(vec![vec![1.0, 0.0]]).unwrap_err(),
            Error::NotSquare { .. }
        ));
    }

    #[test]
    fn exact_determinant_is_exact() {
        let b = GeneratorMatrix::from_rationals(vec![
            vec![rational(1, 3), rational(1, 7)],
            vec![rational(2, 5), rational(-1, 11)],
        ])
        .unwrap();
        let expect = rational(1, 3) * rational(-1, 11) - rational(1, 7) * rational(2, 5);
        assert_eq!(b.determinant(), rational_to_f64(&expect));
    }

    #[test]
    fn matrix_exp_examples() {
        let z = SymmetricMatrix::diagonal(&[0.0, 0.0, 0.0]);
        assert_eq!(sym_matrix_exp(&z, 3.5).matrix(), &DMatrix::<f64>::identity(3, 3));

        let m = SymmetricMatrix::diagonal(&[-0.125, 0.125]);
        let e = sym_matrix_exp(&m, -0.1);
        assert!(close(e.get(0, 0), 0.0125f64.exp(), 1e-14));
        assert!(close(e.get(1, 1), (-0.0125f64).exp(), 1e-14));
        assert!(close(e.get(0, 1), 0.0, 1e-15));
        let det = e.matrix().clone().determinant();
        assert!(close(det, 1.0, 1e-10));
    }

    #[test]
    fn matrix_exp_rejects_asymmetric() {
        assert!(matches!(
            SymmetricMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap_err(),
            Error::NotSymmetric(_)
        ));
    }

    #[test]
    fn lll_examples() {
        let id = GeneratorMatrix::identity(4);
        assert_eq!(lll_reduce(&id).to_rows(), id.to_rows());

        let b = GeneratorMatrix::from_rows(vec![vec![1.0, 0.0], vec![100.0, 1.0]]).unwrap();
        let r = lll_reduce(&b);
        for i in 0..2 {
            let norm = dot(&r.row(i), &r.row(i)).sqrt();
            assert!(norm <= 2f64.sqrt() + 1e-12, "row {i} norm {norm}");
        }
        assert!(close(volume(&r), 1.0, 1e-12));
    }

    #[test]
    fn lll_transform_is_unimodular() {
        let b = GeneratorMatrix::from_rows(vec![
            vec![3.0, 1.0, 4.0],
            vec![1.0, 5.0, 9.0],
            vec![2.0, 6.0, 5.3],
        ])
        .unwrap();
        let (r, u) = lll_reduce_with(&b, 0.75);
        let um = DMatrix::from_fn(3, 3, |i, j| u[i][j] as f64);
        assert!(close(um.determinant().abs(), 1.0, 1e-12));
        assert!(((um * b.matrix()) - r.matrix()).amax() < 1e-12);
        assert!(close(volume(&r), volume(&b), 1e-9 * volume(&b)));
    }

    #[test]
    fn integer_basis_and_kernel() {
        // D2 = {x : x1 + x2 even} from a redundant generating set.
        let gens = vec![vec![2, 0], vec![1, 1], vec![1, -1], vec![0, 2], vec![3, 1]];
        let b = integer_row_basis(&gens);
        assert_eq!(b.len(), 2);
        let g = GeneratorMatrix::from_integers(&b).unwrap();
        assert_eq!(volume(&g), 2.0);

        let k = integer_kernel(&[vec![1], vec![1], vec![1]]);
        assert_eq!(k.len(), 2);
        for row in &k {
            assert_eq!(row.iter().sum::<i64>(), 0);
        }
        // The kernel of the all-ones form is A2 with determinant 3.
        let gram: Vec<Vec<i64>> =
            k.iter().map(|a| k.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect()).collect();
        assert_eq!(gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0], 3);
    }

    #[test]
    fn lq_reconstructs() {
        let rows = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]];
        let (l, q) = lq_decompose(&rows);
        let back = &l * &q;
        for i in 0..2 {
            for j in 0..3 {
                assert!(close(back[(i, j)], rows[i][j], 1e-14));
            }
        }
        assert!((&q * q.transpose() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        assert_eq!(l[(0, 1)], 0.0);
    }

    #[test]
    fn text_format() {
        let b = parse_matrix_text("# A2\n2\n1 0\n1/2 8.660254037844386e-1\n").unwrap();
        assert!(!b.is_exact());
        assert!(parse_matrix_text("2\n1 0\n1/2 0.8660254037844386\n").unwrap().is_exact());
        assert!(close(volume(&b), 3f64.sqrt() / 2.0, 1e-15));

        let q = parse_matrix_text("2\n1 0\n1/2 -0.75\n").unwrap();
        assert!(q.is_exact());
        assert_eq!(q.exact_rows().unwrap()[1][1], rational(-3, 4));
        let again = parse_matrix_text(&format_matrix_text(&q)).unwrap();
        assert_eq!(again, q);

        let f = parse_matrix_text(&format_matrix_text(&b)).unwrap();
        assert_eq!(f.to_rows(), b.to_rows());

        assert!(matches!(parse_matrix_text("2\n1 0\n").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(parse_matrix_text("2\n1 0\n0 x\n").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(parse_matrix_text("2\n1 0 0\n0 1\n").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(parse_matrix_text("2\n1 1\n1 1\n").unwrap_err(), Error::Singular { .. }));
    }
}
