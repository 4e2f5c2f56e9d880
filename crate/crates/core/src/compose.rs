//! Products of scaled lattices and lamination.
//!
//! For `Λ = Λ₁ × aΛ₂` the volume is `aⁿ²V₁V₂` and the error is
//! `E₁ + a²E₂`. The NSM is minimized when every block has the same
//! per-dimension error, giving `G = ∏ G_i^{n_i/n}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::catalog::{get_lattice, Lattice};
use crate::error::{Error, Result};
use crate::linalg::{volume, GeneratorMatrix};

fn check_positive(label: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{label} must be positive and finite, got {v}")))
    }
}

fn check_dim(label: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(format!("{label} must be at least 1")));
    }
    Ok(())
}

/// NSM of `Λ₁ × aΛ₂` as a function of the relative scale `a`.
#[allow(clippy::too_many_arguments)]
pub fn g_of_scale(n1: usize, v1: f64, g1: f64, n2: usize, v2: f64, g2: f64, a: f64) -> Result<f64> {
    check_dim("n1", n1)?;
    check_dim("n2", n2)?;
    for (label, v) in [("V1", v1), ("G1", g1), ("V2", v2), ("G2", g2), ("a", a)] {
        check_positive(label, v)?;
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let first = n1f / n * a.powf(-2.0 * n2f / n) * v1.powf(2.0 * n2f / (n * n1f)) * v2.powf(-2.0 / n) * g1;
    let second = n2f / n * a.powf(2.0 * n1f / n) * v1.powf(-2.0 / n) * v2.powf(2.0 * n1f / (n * n2f)) * g2;
    Ok(first + second)
}

/// Second-moment data of one component. At least one of `mse` (`E`) and
/// `nsm` (`G`) must be given; when both are, they must satisfy
/// `G = E/(n·V^{2/n})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub volume: f64,
    pub mse: Option<f64>,
    pub nsm: Option<f64>,
}

const CONSISTENCY_RTOL: f64 = 1e-9;

impl Moments {
    pub fn from_nsm(n: usize, volume: f64, nsm: f64) -> Self {
        Moments { n, volume, mse: None, nsm: Some(nsm) }
    }

    pub fn from_mse(n: usize, volume: f64, mse: f64) -> Self {
        Moments { n, volume, mse: Some(mse), nsm: None }
    }

    fn normalizer(&self) -> f64 {
        self.n as f64 * self.volume.powf(2.0 / self.n as f64)
    }

    /// `(E, G)`, validated.
    pub fn resolve(&self) -> Result<(f64, f64)> {
        check_dim("n", self.n)?;
        check_positive("V", self.volume)?;
        match (self.mse, self.nsm) {
            (None, None) => Err(Error::InvalidParameter("either E or G is required".into())),
            (Some(e), None) => {
                check_positive("E", e)?;
                Ok((e, e / self.normalizer()))
            }
            (None, Some(g)) => {
                check_positive("G", g)?;
                Ok((g * self.normalizer(), g))
            }
            (Some(e), Some(g)) => {
                check_positive("E", e)?;
                check_positive("G", g)?;
                let implied = e / self.normalizer();
                if (implied - g).abs() > CONSISTENCY_RTOL * g {
                    return Err(Error::Inconsistent(format!(
                        "G = {g} but E/(n·V^(2/n)) = {implied} for n = {}, V = {}",
                        self.n, self.volume
                    )));
                }
                Ok((e, g))
            }
        }
    }
}

/// The scale `a` minimizing the NSM of `Λ₁ × aΛ₂`. Computed from the NSMs
/// and volumes and from the errors, and the two must agree.
pub fn optimal_scale(first: &Moments, second: &Moments) -> Result<f64> {
    let (e1, g1) = first.resolve()?;
    let (e2, g2) = second.resolve()?;
    let (n1, n2) = (first.n as f64, second.n as f64);
    let from_g = first.volume.powf(1.0 / n1) / second.volume.powf(1.0 / n2) * (g1 / g2).sqrt();
    let from_e = (n2 * e1 / (n1 * e2)).sqrt();
    if (from_g - from_e).abs() > CONSISTENCY_RTOL * from_e {
        return Err(Error::Inconsistent(format!("a_opt from G ({from_g}) and from E ({from_e}) disagree")));
    }
    Ok(from_e)
}

/// `∏ G_i^{n_i/n}` with `n = Σ n_i`.
pub fn optimal_product_nsm(parts: &[(usize, f64)]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter("product needs at least one component".into()));
    }
    for &(n, g) in parts {
        check_dim("component dimension", n)?;
        check_positive("component NSM", g)?;
    }
    let n: usize = parts.iter().map(|p| p.0).sum();
    let log = parts.iter().map(|&(ni, g)| ni as f64 * g.ln()).sum::<f64>() / n as f64;
    Ok(log.exp())
}

/// Block-diagonal generator of `a₁Λ₁ × a₂Λ₂ × ...`.
pub fn product_generator(parts: &[(GeneratorMatrix, f64)]) -> Result<GeneratorMatrix> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter("product needs at least one component".into()));
    }
    for (_, a) in parts {
        check_positive("scale", *a)?;
    }
    let n: usize = parts.iter().map(|(b, _)| b.dim()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for (b, a) in parts {
        let k = b.dim();
        for i in 0..k {
            for j in 0..k {
                m[(off + i, off + j)] = a * b.entry(i, j);
            }
        }
        off += k;
    }
    GeneratorMatrix::from_matrix(m)
}

/// The laminated generator `[[B₁, 0], [h, a]]`.
pub fn laminate_generator(b1: &GeneratorMatrix, h: &[f64], a: f64) -> Result<GeneratorMatrix> {
    let m = b1.dim();
    if h.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: h.len() });
    }
    check_positive("layer spacing", a)?;
    let n = m + 1;
    let g = DMatrix::from_fn(n, n, |i, j| match (i < m, j < m) {
        (true, true) => b1.entry(i, j),
        (true, false) => 0.0,
        (false, true) => h[j],
        (false, false) => a,
    });
    GeneratorMatrix::from_matrix(g)
}

/// Upper bound `G₁^{1−1/n}/12^{1/n}` on the NSM of a lattice laminated from
/// an `(n−1)`-dimensional lattice with NSM `G₁`.
pub fn lamination_bound(g1: f64, n: usize) -> Result<f64> {
    check_positive("G1", g1)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("lamination needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(g1.powf(1.0 - 1.0 / nf) / 12f64.powf(1.0 / nf))
}

/// One factor of a composition string: a catalog name with an optional
/// explicit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub scale: Option<f64>,
}

/// Parses `NAME('*'NAME)*` with optional `@scale` suffixes. A `*` directly
/// after a name marks the dual when followed by another `*`, an `@` or the
/// end of the string, so `A3**Z` is `A3* × Z`.
pub fn parse_composition(spec: &str) -> Result<Vec<Factor>> {
    let chars: Vec<char> = spec.trim().chars().collect();
    let bad = |msg: String| Error::InvalidParameter(format!("composition `{spec}`: {msg}"));
    let mut factors = Vec::new();
    let mut i = 0;
    loop {
        let start = i;
        while i < chars.len() && chars[i] != '*' && chars[i] != '@' {
            i += 1;
        }
        let mut name: String = chars[start..i].iter().collect();
        if name.trim().is_empty() {
            return Err(bad("empty factor".into()));
        }
        if i < chars.len() && chars[i] == '*' && (i + 1 == chars.len() || chars[i + 1] == '*' || chars[i + 1] == '@') {
            name.push('*');
            i += 1;
        }
        let mut scale = None;
        if i < chars.len() && chars[i] == '@' {
            let s = i + 1;
            i = s;
            while i < chars.len() && chars[i] != '*' {
                i += 1;
            }
            let text: String = chars[s..i].iter().collect();
            let a: f64 = text.trim().parse().map_err(|_| bad(format!("bad scale `{text}`")))?;
            check_positive("scale", a)?;
            scale = Some(a);
        }
        factors.push(Factor { name: name.trim().to_string(), scale });
        if i == chars.len() {
            break;
        }
        // chars[i] == '*': separator.
        i += 1;
        if i == chars.len() {
            return Err(bad("trailing `*`".into()));
        }
    }
    Ok(factors)
}

/// A planned product, scaled per the composition string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanPart {
    pub name: String,
    pub n: usize,
    /// `None` for constant-only catalog entries.
    pub volume: Option<f64>,
    pub nsm: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductPlan {
    pub parts: Vec<PlanPart>,
    pub n: usize,
    pub predicted_g: f64,
    /// `E/n` of the scaled product.
    pub predicted_e_per_dim: f64,
    #[serde(skip)]
    pub generator: Option<GeneratorMatrix>,
}

impl ProductPlan {
    /// The scaled parts, for product decoding.
    pub fn scales(&self) -> Vec<f64> {
        self.parts.iter().map(|p| p.scale).collect()
    }
}

/// Plans a product of catalog lattices. Unscaled factors get the optimal
/// scale relative to everything to their left; the first defaults to 1.
/// Constant-only factors are taken at unit volume.
pub fn plan_product(spec: &str) -> Result<ProductPlan> {
    let factors = parse_composition(spec)?;
    let lattices = factors.iter().map(|f| get_lattice(&f.name)).collect::<Result<Vec<_>>>()?;
    let parts: Vec<(&Lattice, Option<f64>)> = lattices.iter().zip(&factors).map(|(l, f)| (l, f.scale)).collect();
    plan_from_lattices(&parts)
}

pub fn plan_from_lattices(parts: &[(&Lattice, Option<f64>)]) -> Result<ProductPlan> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter("product needs at least one component".into()));
    }
    let mut planned = Vec::with_capacity(parts.len());
    let (mut n_acc, mut e_acc, mut logv_acc) = (0usize, 0.0f64, 0.0f64);
    for (lattice, explicit) in parts {
        let nsm = lattice
            .golden_nsm()
            .map(|g| g.nsm)
            .ok_or_else(|| Error::InvalidParameter(format!("no reference NSM for `{}`", lattice.name)))?;
        let vol = if lattice.has_generator() { Some(lattice.volume()?) } else { None };
        let v = vol.unwrap_or(1.0);
        let n = lattice.dim;
        let e = Moments::from_nsm(n, v, nsm).resolve()?.0;
        let scale = match explicit {
            Some(a) => *a,
            None if n_acc == 0 => 1.0,
            None => {
                let acc = Moments::from_mse(n_acc, logv_acc.exp(), e_acc);
                optimal_scale(&acc, &Moments::from_mse(n, v, e))?
            }
        };
        n_acc += n;
        e_acc += scale * scale * e;
        logv_acc += n as f64 * scale.ln() + v.ln();
        planned.push(PlanPart { name: lattice.name.clone(), n, volume: vol, nsm, scale });
    }
    let n = n_acc as f64;
    let predicted_g = e_acc / (n * (2.0 * logv_acc / n).exp());
    let generator = if parts.iter().all(|(l, _)| l.has_generator()) {
        let blocks = parts
            .iter()
            .zip(&planned)
            .map(|((l, _), p)| Ok((l.basis()?.clone(), p.scale)))
            .collect::<Result<Vec<_>>>()?;
        Some(product_generator(&blocks)?)
    } else {
        None
    };
    Ok(ProductPlan { parts: planned, n: n_acc, predicted_g, predicted_e_per_dim: e_acc / n, generator })
}

/// Volume of a product generator, `∏ a_i^{n_i} V_i`.
pub fn product_volume(parts: &[(GeneratorMatrix, f64)]) -> f64 {
    parts.iter().map(|(b, a)| a.powi(b.dim() as i32) * volume(b)).product()
}
