//! Generator matrices for the classical lattices and the record lattices in
//! dimensions 12, 16 and 24. Every generator is a full-rank `n×n` matrix;
//! lattices naturally living in a hyperplane of a larger space are rotated
//! into `Rⁿ` by an LQ factorization, and the rotation is kept so the fast
//! decoders can map back to standard coordinates.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::decode::{zero_sum_dual_glue, Embedding, NativeLattice};
use crate::linalg::{integer_kernel, integer_row_basis, lq_decompose, GeneratorMatrix};

pub(crate) struct Built {
    pub basis: GeneratorMatrix,
    pub native: Option<(NativeLattice, Option<Embedding>)>,
}

impl Built {
    fn generic(basis: GeneratorMatrix) -> Self {
        Built { basis, native: None }
    }
}

fn unit(n: usize, i: usize, scale: i64) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = scale;
    v
}

fn halves(rows: &[Vec<i64>]) -> GeneratorMatrix {
    let two = BigInt::from(2);
    let q: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::new(BigInt::from(v), two.clone())).collect())
        .collect();
    GeneratorMatrix::from_rationals(q).expect("full-rank construction")
}

fn float_basis(rows: &DMatrix<f64>) -> GeneratorMatrix {
    GeneratorMatrix::from_matrix(rows.clone()).expect("full-rank construction")
}

/// Basis rows of `D_n`: `e_i − e_{i+1}` and `e_{n−2} + e_{n−1}`.
fn checkerboard_rows(n: usize) -> Vec<Vec<i64>> {
    let mut rows: Vec<Vec<i64>> = (0..n - 1)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v[i + 1] = -1;
            v
        })
        .collect();
    let mut last = vec![0; n];
    last[n - 2] = 1;
    last[n - 1] = 1;
    rows.push(last);
    rows
}

fn half_glue(n: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; n], vec![0.5; n]]
}

pub(crate) fn integer(n: usize) -> Built {
    let rows: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i, 1)).collect();
    Built {
        basis: GeneratorMatrix::from_integers(&rows).expect("identity"),
        native: Some((NativeLattice::Integer, None)),
    }
}

pub(crate) fn checkerboard(n: usize) -> Built {
    assert!(n >= 2);
    Built {
        basis: GeneratorMatrix::from_integers(&checkerboard_rows(n)).expect("D_n basis"),
        native: Some((NativeLattice::Checkerboard, None)),
    }
}

/// `D_n* = Zⁿ ∪ (Zⁿ + ½·1)`.
pub(crate) fn checkerboard_dual(n: usize) -> Built {
    let mut gens: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i, 2)).collect();
    gens.push(vec![1; n]);
    Built {
        basis: halves(&integer_row_basis(&gens)),
        native: Some((NativeLattice::cosets(NativeLattice::Integer, half_glue(n)), None)),
    }
}

/// `D_n⁺ = D_n ∪ (D_n + ½·1)`, a lattice for even `n`; `D_8⁺` is `E_8`.
pub(crate) fn checkerboard_plus(n: usize) -> Built {
    assert!(n >= 2 && n.is_multiple_of(2));
    let mut gens: Vec<Vec<i64>> = checkerboard_rows(n).into_iter().map(|r| r.iter().map(|v| 2 * v).collect()).collect();
    gens.push(vec![1; n]);
    Built {
        basis: halves(&integer_row_basis(&gens)),
        native: Some((NativeLattice::cosets(NativeLattice::Checkerboard, half_glue(n)), None)),
    }
}

pub(crate) fn e8() -> Built {
    checkerboard_plus(8)
}

/// `A_n` with unit minimal distance, rotated out of the zero-sum hyperplane
/// of `R^{n+1}`. Returns the LQ factor too so the dual can share the frame.
fn zero_sum_frame(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n + 1];
            v[i] = 1.0;
            v[i + 1] = -1.0;
            v
        })
        .collect();
    lq_decompose(&rows)
}

pub(crate) fn zero_sum(n: usize) -> Built {
    let (l, q) = zero_sum_frame(n);
    let s = std::f64::consts::SQRT_2;
    let mut basis = float_basis(&(l / s));
    if n == 2 {
        // Present A2 as [[1, 0], [1/2, √3/2]].
        basis = basis.left_multiply(&[vec![1, 0], vec![1, 1]]).expect("unimodular");
    }
    Built { basis, native: Some((NativeLattice::ZeroSum, Some(Embedding::new(q, s)))) }
}

/// `A_n*`, normalized so that `vol(A_n)·vol(A_n*) = 1`. Generated by the
/// projections of `e_1, ..., e_n` onto the zero-sum hyperplane.
pub(crate) fn zero_sum_dual(n: usize) -> Built {
    let (_, q) = zero_sum_frame(n);
    let m = n + 1;
    let proj = DMatrix::from_fn(n, m, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64);
    let s = std::f64::consts::SQRT_2;
    Built {
        basis: float_basis(&(proj * q.transpose() * s)),
        native: Some((
            NativeLattice::cosets(NativeLattice::ZeroSum, zero_sum_dual_glue(n)),
            Some(Embedding::new(q, 1.0 / s)),
        )),
    }
}

/// Sublattice of `E_8` orthogonal to the given integer directions, as
/// embedded `k×8` rows.
fn e8_section(directions: &[[i64; 8]]) -> DMatrix<f64> {
    let e8 = e8().basis;
    // 2·B·r is integral for integral r.
    let c: Vec<Vec<i64>> = (0..8)
        .map(|i| {
            directions
                .iter()
                .map(|r| (0..8).map(|j| 2.0 * e8.entry(i, j) * r[j] as f64).sum::<f64>().round() as i64)
                .collect()
        })
        .collect();
    let kernel = integer_kernel(&c);
    let k = kernel.len();
    DMatrix::from_fn(k, 8, |i, j| (0..8).map(|t| kernel[i][t] as f64 * e8.entry(t, j)).sum())
}

fn section_lattice(directions: &[[i64; 8]], dual: bool) -> Built {
    let rows = e8_section(directions);
    let as_rows: Vec<Vec<f64>> = (0..rows.nrows()).map(|i| rows.row(i).iter().copied().collect()).collect();
    let (l, _) = lq_decompose(&as_rows);
    if dual {
        Built::generic(float_basis(&l.transpose().try_inverse().expect("invertible")))
    } else {
        Built::generic(float_basis(&l))
    }
}

const ALL_ONES: [i64; 8] = [1; 8];
const FIRST_PAIR: [i64; 8] = [1, 1, 0, 0, 0, 0, 0, 0];

/// `E_7 = {x ∈ E_8 : Σx = 0}`.
pub(crate) fn e7(dual: bool) -> Built {
    section_lattice(&[ALL_ONES], dual)
}

/// `E_6 = {x ∈ E_8 : Σx = 0, x₁ + x₂ = 0}`.
pub(crate) fn e6(dual: bool) -> Built {
    section_lattice(&[ALL_ONES, FIRST_PAIR], dual)
}

/// Generator rows of the extended binary Golay code, `[I | B]` with `B` the
/// bordered circulant of the quadratic non-residues modulo 11.
pub(crate) fn golay_generator() -> Vec<Vec<i64>> {
    let residues: Vec<usize> = (1..11).map(|i| (i * i) % 11).collect();
    let mut b = vec![vec![0i64; 12]; 12];
    for j in 1..12 {
        b[0][j] = 1;
        b[j][0] = 1;
    }
    for i in 0..11 {
        for j in 0..11 {
            let d = (j + 11 - i) % 11;
            if d == 0 || !residues.contains(&d) {
                b[1 + i][1 + j] = 1;
            }
        }
    }
    (0..12)
        .map(|i| {
            let mut row = unit(12, i, 1);
            row.extend(&b[i]);
            row
        })
        .collect()
}

/// Generator rows of the first-order Reed–Muller code RM(1, m).
pub(crate) fn reed_muller_1(m: u32) -> Vec<Vec<i64>> {
    let len = 1usize << m;
    let mut rows = vec![vec![1i64; len]];
    for bit in 0..m {
        rows.push((0..len).map(|i| ((i >> bit) & 1) as i64).collect());
    }
    rows
}

/// `{y ∈ Zⁿ : y mod 2 ∈ C, Σy ≡ 0 (mod 4)}` for a doubly even binary code `C`.
fn construction_b(code: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = code[0].len();
    let mut gens: Vec<Vec<i64>> = code.to_vec();
    gens.extend(checkerboard_rows(n).into_iter().map(|r| r.iter().map(|v| 2 * v).collect::<Vec<_>>()));
    integer_row_basis(&gens)
}

/// Barnes–Wall `Λ16`, minimal norm 4 and determinant 256.
pub(crate) fn barnes_wall_16() -> Built {
    let rows = construction_b(&reed_muller_1(4));
    let m = DMatrix::from_fn(16, 16, |i, j| rows[i][j] as f64 / std::f64::consts::SQRT_2);
    Built::generic(float_basis(&m))
}

/// Leech `Λ24 = (2M ∪ (2M + s))/√8` where `M` is Construction B on the Golay
/// code and `s = (−3, 1²³)`. Unimodular with minimal norm 4.
pub(crate) fn leech() -> Built {
    let m = construction_b(&golay_generator());
    let mut gens: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|v| 2 * v).collect()).collect();
    let mut s = vec![1i64; 24];
    s[0] = -3;
    gens.push(s);
    let rows = integer_row_basis(&gens);
    let scale = 8f64.sqrt();
    let mm = DMatrix::from_fn(24, 24, |i, j| rows[i][j] as f64 / scale);
    Built::generic(float_basis(&mm))
}

/// Basis of `{v ∈ Zᵐ : C·v ≡ 0 (mod p)}` for prime `p`.
fn congruence_lattice(constraints: &[Vec<i64>], p: i64) -> Vec<Vec<i64>> {
    let m = constraints[0].len();
    let md = |v: i64| v.rem_euclid(p);
    let inv = |a: i64| (1..p).find(|&b| md(a * b) == 1).expect("unit mod p");
    let mut a: Vec<Vec<i64>> = constraints.iter().map(|r| r.iter().map(|&v| md(v)).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(pr) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        let iv = inv(a[r][c]);
        a[r].iter_mut().for_each(|v| *v = md(*v * iv));
        for i in 0..a.len() {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x = md(*x - f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    // Null space over F_p: one vector per free column, plus p·Zᵐ.
    let mut gens: Vec<Vec<i64>> = Vec::new();
    for f in (0..m).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0i64; m];
        v[f] = 1;
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = md(-a[row][f]);
        }
        gens.push(v);
    }
    gens.extend((0..m).map(|i| unit(m, i, p)));
    integer_row_basis(&gens)
}

/// Coxeter–Todd `K12` as the Eisenstein lattice
/// `{x ∈ Z[ω]⁶ : x_i ≡ x_j (mod θ), Σx ≡ 0 (mod 3)}`, `θ = ω − ω̄`,
/// scaled to minimal norm 4 (determinant 729).
pub(crate) fn coxeter_todd() -> Built {
    // Coordinates (a_i, b_i) for x_i = a_i + b_i·ω. Modulo θ, a + bω ↦ a + b.
    let mut constraints = Vec::new();
    for i in 1..6 {
        let mut c = vec![0i64; 12];
        c[0] = 1;
        c[1] = 1;
        c[2 * i] = -1;
        c[2 * i + 1] = -1;
        constraints.push(c);
    }
    constraints.push((0..12).map(|k| (k % 2 == 0) as i64).collect());
    constraints.push((0..12).map(|k| (k % 2 == 1) as i64).collect());
    let rows = congruence_lattice(&constraints, 3);
    let scale = (2.0f64 / 3.0).sqrt();
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let m = DMatrix::from_fn(12, 12, |i, j| {
        let (a, b) = (rows[i][2 * (j / 2)] as f64, rows[i][2 * (j / 2) + 1] as f64);
        scale * if j % 2 == 0 { a - b / 2.0 } else { b * half_sqrt3 }
    });
    Built::generic(float_basis(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::SphereDecoder;
    use crate::linalg::volume;

    fn min_norm_and_kissing(b: &GeneratorMatrix, expected_min: f64) -> u64 {
        let dec = SphereDecoder::new(b);
        let n = b.dim();
        let below = dec.count_within(&vec![0.0; n], expected_min * (1.0 - 1e-9)).unwrap();
        assert_eq!(below, 1, "a nonzero vector shorter than {expected_min}");
        dec.count_within(&vec![0.0; n], expected_min * (1.0 + 1e-9)).unwrap() - 1
    }

    #[test]
    fn golay_weight_distribution() {
        let g = golay_generator();
        let mut counts = [0u32; 25];
        for mask in 0u32..4096 {
            let mut w = vec![0i64; 24];
            for (i, row) in g.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (a, b) in w.iter_mut().zip(row) {
                        *a ^= b;
                    }
                }
            }
            counts[w.iter().sum::<i64>() as usize] += 1;
        }
        assert_eq!((counts[0], counts[8], counts[12], counts[16], counts[24]), (1, 759, 2576, 759, 1));
    }

    #[test]
    fn root_lattices() {
        assert_eq!(volume(&checkerboard(4).basis), 2.0);
        assert_eq!(min_norm_and_kissing(&checkerboard(4).basis, 2.0), 24);
        let e8 = e8().basis;
        assert_eq!(volume(&e8), 1.0);
        assert!(e8.is_exact());
        assert_eq!(min_norm_and_kissing(&e8, 2.0), 240);
        let b7 = e7(false).basis;
        assert!((volume(&b7) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(min_norm_and_kissing(&b7, 2.0), 126);
        let b6 = e6(false).basis;
        assert!((volume(&b6) - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(min_norm_and_kissing(&b6, 2.0), 72);
        assert!((volume(&e6(true).basis) * volume(&b6) - 1.0).abs() < 1e-12);
        assert!((volume(&e7(true).basis) * volume(&b7) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sum_family() {
        for n in 1..7 {
            let a = zero_sum(n).basis;
            let v = ((n + 1) as f64).sqrt() / 2f64.powf(n as f64 / 2.0);
            assert!((volume(&a) - v).abs() < 1e-12 * v);
            assert!((volume(&a) * volume(&zero_sum_dual(n).basis) - 1.0).abs() < 1e-12);
            assert_eq!(min_norm_and_kissing(&a, 1.0), (n * (n + 1)) as u64);
        }
        let a2 = zero_sum(2).basis;
        assert!((a2.entry(1, 0) - 0.5).abs() < 1e-15 && (a2.entry(1, 1) - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn checkerboard_duality() {
        for n in 2..9 {
            assert_eq!(volume(&checkerboard(n).basis) * volume(&checkerboard_dual(n).basis), 1.0);
        }
        assert_eq!(volume(&checkerboard_plus(10).basis), 1.0);
    }

    #[test]
    fn coxeter_todd_parameters() {
        let k = coxeter_todd().basis;
        assert!((volume(&k) - 27.0).abs() < 1e-9);
        assert_eq!(min_norm_and_kissing(&k, 4.0), 756);
    }

    #[test]
    fn barnes_wall_parameters() {
        let b = barnes_wall_16().basis;
        assert!((volume(&b) - 16.0).abs() < 1e-9);
        assert_eq!(min_norm_and_kissing(&b, 4.0), 4320);
    }

    #[test]
    fn leech_parameters() {
        let l = leech().basis;
        assert!((volume(&l) - 1.0).abs() < 1e-9);
        assert_eq!(min_norm_and_kissing(&l, 4.0), 196_560);
    }
}
