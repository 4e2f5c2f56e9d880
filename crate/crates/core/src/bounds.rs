//! Dimension-wise bounds on the NSM and the best optimally scaled products
//! of the best known lattices.

use serde::{Deserialize, Serialize};

use crate::catalog::{exact_nsm, golden_entry, golden_reported, refined_estimate, Column, Precision};
use crate::error::{Error, Result};

/// Largest dimension covered by the tabulated constants.
pub const MAX_DIM: usize = 48;

/// Zador's upper bound `Γ(1+n/2)^{2/n}·Γ(1+2/n)/(nπ)`.
pub fn zador_upper(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let nf = n as f64;
    Ok((2.0 / nf * libm::lgamma(1.0 + nf / 2.0)).exp() * libm::tgamma(1.0 + 2.0 / nf) / (nf * std::f64::consts::PI))
}

/// The conjectured lower bound, from tabulated values.
pub fn cs_lower(n: usize) -> Result<f64> {
    golden_entry(Column::Lower, n)
        .map(|g| g.nsm)
        .ok_or_else(|| Error::InvalidParameter(format!("lower bound is tabulated only for 1 <= n <= {MAX_DIM}, got {n}")))
}

/// One row of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    pub zador_upper: f64,
    pub cs_lower: f64,
    pub best_reported: f64,
    pub best_reported_name: String,
    pub best_reported_precision: Precision,
    /// Absent for `n = 1`.
    pub best_product: Option<f64>,
    /// Factors joined by `*`, largest dimension first.
    pub composition: Option<String>,
    /// Product beats the best reported lattice.
    pub below_reported: bool,
    /// Product lies below the Zador bound.
    pub below_zador: bool,
}

impl BoundsRow {
    /// The `<G` / `<U` markers.
    pub fn flags(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if self.below_reported {
            f.push("<G");
        }
        if self.below_zador {
            f.push("<U");
        }
        f
    }
}

/// A best-known quantizer in dimension `n`: a list of `(dimension, name)`
/// factors with its NSM.
#[derive(Debug, Clone)]
struct Best {
    nsm: f64,
    factors: Vec<(usize, String)>,
}

/// The value used for a reported lattice in products: its closed form or
/// refined estimate when one is known, else the printed value.
fn seed_value(name: &str, printed: f64) -> f64 {
    exact_nsm(name).map(|(v, _)| v).or_else(|| refined_estimate(name)).unwrap_or(printed)
}

/// NSM of a best-reported lattice as used in products.
pub fn reference_nsm(name: &str) -> Option<f64> {
    golden_reported(name).map(|g| seed_value(name, g.nsm))
}

fn compose_name(factors: &[(usize, String)]) -> String {
    let mut f = factors.to_vec();
    f.sort_by_key(|p| std::cmp::Reverse(p.0));
    f.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join("*")
}

/// Best products for `n = 1..=n_max`: `best[n]` is the better of the
/// reported lattice and the best optimally scaled `best[n₁] × best[n−n₁]`.
pub fn best_product_table(n_max: usize) -> Result<Vec<BoundsRow>> {
    if n_max == 0 || n_max > MAX_DIM {
        return Err(Error::InvalidParameter(format!("n_max must be in 1..={MAX_DIM}, got {n_max}")));
    }
    let mut best: Vec<Best> = Vec::with_capacity(n_max + 1);
    best.push(Best { nsm: f64::NAN, factors: vec![] });
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let reported = golden_entry(Column::BestReported, n).expect("tabulated dimension");
        let seed = seed_value(&reported.name, reported.nsm);

        let mut product: Option<Best> = None;
        for n1 in 1..=n / 2 {
            let (a, b) = (&best[n1], &best[n - n1]);
            let g = ((n1 as f64 * a.nsm.ln() + (n - n1) as f64 * b.nsm.ln()) / n as f64).exp();
            let mut factors = a.factors.clone();
            factors.extend(b.factors.iter().cloned());
            let better = match &product {
                None => true,
                Some(p) => g < p.nsm || (g == p.nsm && factors.len() < p.factors.len()),
            };
            if better {
                product = Some(Best { nsm: g, factors });
            }
        }

        let zador = zador_upper(n)?;
        rows.push(BoundsRow {
            n,
            zador_upper: zador,
            cs_lower: cs_lower(n)?,
            best_reported: reported.nsm,
            best_reported_name: reported.name.clone(),
            best_reported_precision: reported.precision,
            best_product: product.as_ref().map(|p| p.nsm),
            composition: product.as_ref().map(|p| compose_name(&p.factors)),
            below_reported: product.as_ref().is_some_and(|p| p.nsm < seed),
            below_zador: product.as_ref().is_some_and(|p| p.nsm < zador),
        });

        let leaf = Best { nsm: seed, factors: vec![(n, reported.name.clone())] };
        best.push(match product {
            Some(p) if p.nsm < seed => p,
            _ => leaf,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zador_examples() {
        assert!((zador_upper(1).unwrap() - 0.5).abs() < 5e-10);
        assert!((zador_upper(2).unwrap() - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!((zador_upper(48).unwrap() - 0.063552764).abs() < 5e-10);
        assert!(zador_upper(0).is_err());
    }

    #[test]
    fn zador_decreasing() {
        for n in 1..MAX_DIM {
            assert!(zador_upper(n + 1).unwrap() < zador_upper(n).unwrap());
        }
    }

    #[test]
    fn lower_examples() {
        assert_eq!(cs_lower(1).unwrap(), 0.083333333);
        assert_eq!(cs_lower(2).unwrap(), 0.080187537);
        assert_eq!(cs_lower(24).unwrap(), 0.065607893);
        assert!(cs_lower(0).is_err() && cs_lower(49).is_err());
    }

    #[test]
    fn table_examples() {
        let t = best_product_table(48).unwrap();
        let r13 = &t[12];
        assert_eq!(r13.composition.as_deref(), Some("K12*Z"));
        assert!((r13.best_product.unwrap() - 0.071034583).abs() < 5e-10);
        assert_eq!(r13.flags(), vec!["<G", "<U"]);
        let r16 = &t[15];
        assert_eq!(r16.composition.as_deref(), Some("K12*D4"));
        assert!((r16.best_product.unwrap() - 0.071668753).abs() < 5e-10);
        assert!(r16.flags().is_empty());
        let r40 = &t[39];
        assert_eq!(r40.composition.as_deref(), Some("L24*L16"));
        assert!((r40.best_product.unwrap() - 0.06677).abs() < 5e-6);
        assert_eq!(r40.flags(), vec!["<G"]);
        assert!(t[0].best_product.is_none());
    }

    #[test]
    fn bounds_ordering() {
        for r in best_product_table(48).unwrap() {
            assert!(r.cs_lower < r.zador_upper);
            assert!(r.cs_lower <= r.best_reported);
            if let Some(p) = r.best_product {
                assert!(r.cs_lower < p);
            }
        }
        assert!(best_product_table(49).is_err());
    }
}
