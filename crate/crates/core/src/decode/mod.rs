//! Closest-point quantizers.
//!
//! [`Decoder`] dispatches on the lattice's strategy: coordinate rounding,
//! the `D_n` parity rule, the `A_n` zero-sum repair, unions of cosets of
//! those, or exact sphere decoding for anything else. [`ProductDecoder`]
//! decodes Cartesian products blockwise and [`SuboptimalQuantizer`] is the
//! layered rule for block lower-triangular generators.

mod family;
mod sphere;

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use family::{zero_sum_dual_glue, Embedding, NativeLattice};
pub use sphere::{SphereDecoder, DEFAULT_NODE_CAP};

use crate::catalog::Lattice;
use crate::error::{Error, Result};
use crate::linalg::GeneratorMatrix;

/// Decoder strategy tag carried by catalog lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Cubic,
    DFamily,
    AFamily,
    CosetUnion,
    GenericSphere,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Cubic => "cubic",
            Strategy::DFamily => "d-family",
            Strategy::AFamily => "a-family",
            Strategy::CosetUnion => "coset-union",
            Strategy::GenericSphere => "generic-sphere",
        })
    }
}

impl NativeLattice {
    pub fn strategy(&self) -> Strategy {
        match self {
            NativeLattice::Integer => Strategy::Cubic,
            NativeLattice::Checkerboard => Strategy::DFamily,
            NativeLattice::ZeroSum => Strategy::AFamily,
            NativeLattice::Cosets { .. } => Strategy::CosetUnion,
        }
    }
}

/// A quantized point: `point = u·B`, `error = x − point`, `d2 = ‖error‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub u: Vec<i64>,
    pub point: Vec<f64>,
    pub error: Vec<f64>,
    pub d2: f64,
}

impl DecodeResult {
    fn new(b: &GeneratorMatrix, x: &[f64], u: Vec<i64>) -> Self {
        let point = b.point(&u);
        let error: Vec<f64> = x.iter().zip(&point).map(|(a, p)| a - p).collect();
        let d2 = error.iter().map(|e| e * e).sum();
        DecodeResult { u, point, error, d2 }
    }

    fn concat(parts: Vec<DecodeResult>) -> Self {
        let mut out = DecodeResult { u: vec![], point: vec![], error: vec![], d2: 0.0 };
        for p in parts {
            out.u.extend(p.u);
            out.point.extend(p.point);
            out.error.extend(p.error);
        }
        out.d2 = out.error.iter().map(|e| e * e).sum();
        out
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Fast { native: NativeLattice, embed: Option<Embedding> },
    Sphere(SphereDecoder),
}

/// A prepared closest-point decoder for one lattice.
#[derive(Debug, Clone)]
pub struct Decoder {
    basis: GeneratorMatrix,
    inverse: DMatrix<f64>,
    engine: Engine,
}

impl Decoder {
    /// Decoder for a catalog lattice, using its fast rule when it has one.
    pub fn for_lattice(lattice: &Lattice) -> Result<Self> {
        let basis = lattice.basis()?.clone();
        let engine = match lattice.native() {
            Some((native, embed)) => Engine::Fast { native: native.clone(), embed: embed.cloned() },
            None => Engine::Sphere(SphereDecoder::new(&basis)),
        };
        Ok(Decoder { inverse: basis.inverse(), basis, engine })
    }

    /// Exact sphere decoder for an arbitrary generator.
    pub fn sphere(b: &GeneratorMatrix) -> Self {
        Decoder { inverse: b.inverse(), basis: b.clone(), engine: Engine::Sphere(SphereDecoder::new(b)) }
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        if let Engine::Sphere(s) = self.engine {
            self.engine = Engine::Sphere(s.with_node_cap(cap));
        }
        self
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn strategy(&self) -> Strategy {
        match &self.engine {
            Engine::Fast { native, .. } => native.strategy(),
            Engine::Sphere(_) => Strategy::GenericSphere,
        }
    }

    fn coordinates(&self, p: &[f64]) -> Vec<i64> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| p[i] * self.inverse[(i, j)]).sum::<f64>().round() as i64).collect()
    }

    pub fn decode(&self, x: &[f64]) -> Result<DecodeResult> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("input vector has non-finite entries".into()));
        }
        let u = match &self.engine {
            Engine::Sphere(s) => s.search(x)?.u,
            Engine::Fast { native, embed } => {
                let to_lattice = |p: &[f64]| match embed {
                    Some(e) => e.from_native(p),
                    None => p.to_vec(),
                };
                let tie = |a: &[f64], b: &[f64]| {
                    sphere::lex_cmp(&self.coordinates(&to_lattice(a)), &self.coordinates(&to_lattice(b)))
                };
                let y = match embed {
                    Some(e) => e.to_native(x),
                    None => x.to_vec(),
                };
                let p = native.closest(&y, &tie);
                self.coordinates(&to_lattice(&p))
            }
        };
        Ok(DecodeResult::new(&self.basis, x, u))
    }
}

/// Closest point of a catalog lattice to `x`.
pub fn closest_point(lattice: &Lattice, x: &[f64]) -> Result<DecodeResult> {
    Decoder::for_lattice(lattice)?.decode(x)
}

/// Exact closest point of the lattice generated by `b`.
pub fn sphere_decode(b: &GeneratorMatrix, x: &[f64]) -> Result<DecodeResult> {
    Decoder::sphere(b).decode(x)
}

/// Blockwise decoder for `a₁Λ₁ × a₂Λ₂ × ...`.
#[derive(Debug, Clone)]
pub struct ProductDecoder {
    parts: Vec<(Decoder, f64)>,
}

impl ProductDecoder {
    pub fn new(parts: Vec<(Decoder, f64)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("product needs at least one component".into()));
        }
        if let Some((_, a)) = parts.iter().find(|(_, a)| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter(format!("component scale must be positive, got {a}")));
        }
        Ok(ProductDecoder { parts })
    }

    pub fn from_lattices(parts: &[(&Lattice, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|(l, a)| Ok((Decoder::for_lattice(l)?, *a))).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|(d, _)| d.dim()).sum()
    }

    /// The block-diagonal generator of the scaled product.
    pub fn generator(&self) -> Result<GeneratorMatrix> {
        let blocks: Vec<(GeneratorMatrix, f64)> = self.parts.iter().map(|(d, a)| (d.generator().clone(), *a)).collect();
        crate::compose::product_generator(&blocks)
    }

    pub fn decode(&self, x: &[f64]) -> Result<DecodeResult> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut offset = 0;
        let mut results = Vec::with_capacity(self.parts.len());
        for (dec, a) in &self.parts {
            let n = dec.dim();
            let block: Vec<f64> = x[offset..offset + n].iter().map(|v| v / a).collect();
            let mut r = dec.decode(&block)?;
            r.point.iter_mut().for_each(|p| *p *= a);
            r.error = x[offset..offset + n].iter().zip(&r.point).map(|(v, p)| v - p).collect();
            r.d2 = r.error.iter().map(|e| e * e).sum();
            results.push(r);
            offset += n;
        }
        Ok(DecodeResult::concat(results))
    }
}

/// Closest point in the product of scaled catalog lattices.
pub fn closest_product(parts: &[(&Lattice, f64)], x: &[f64]) -> Result<DecodeResult> {
    ProductDecoder::from_lattices(parts)?.decode(x)
}

/// The layered quantizer for the generator `[[B₁, 0], [H, B₂]]`: quantize the
/// trailing block in `Λ₂`, shift the leading block by the induced offset
/// `u₂·H`, then quantize it in `Λ₁`.
#[derive(Debug, Clone)]
pub struct SuboptimalQuantizer {
    first: Decoder,
    second: Decoder,
    /// `n₂×n₁`.
    h: DMatrix<f64>,
    generator: GeneratorMatrix,
}

impl SuboptimalQuantizer {
    pub fn new(b1: &GeneratorMatrix, b2: &GeneratorMatrix, h: &DMatrix<f64>) -> Result<Self> {
        Self::with_decoders(Decoder::sphere(b1), Decoder::sphere(b2), h)
    }

    pub fn with_decoders(first: Decoder, second: Decoder, h: &DMatrix<f64>) -> Result<Self> {
        let (n1, n2) = (first.dim(), second.dim());
        if h.nrows() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, got: h.nrows() });
        }
        if h.ncols() != n1 {
            return Err(Error::DimensionMismatch { expected: n1, got: h.ncols() });
        }
        let generator = block_lower_generator(first.generator(), second.generator(), h)?;
        Ok(SuboptimalQuantizer { first, second, h: h.clone(), generator })
    }

    /// `[[B₁, 0], [H, B₂]]`.
    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn decode(&self, x: &[f64]) -> Result<DecodeResult> {
        let (n1, n2) = (self.first.dim(), self.second.dim());
        if x.len() != n1 + n2 {
            return Err(Error::DimensionMismatch { expected: n1 + n2, got: x.len() });
        }
        let second = self.second.decode(&x[n1..])?;
        // z₁ = x̂₂·B₂⁻¹·H = u₂·H.
        let z1: Vec<f64> =
            (0..n1).map(|j| second.u.iter().enumerate().map(|(i, &ui)| ui as f64 * self.h[(i, j)]).sum()).collect();
        let shifted: Vec<f64> = x[..n1].iter().zip(&z1).map(|(a, z)| a - z).collect();
        let first = self.first.decode(&shifted)?;
        let mut u = first.u;
        u.extend(&second.u);
        let mut point: Vec<f64> = first.point.iter().zip(&z1).map(|(p, z)| p + z).collect();
        point.extend(&second.point);
        let error: Vec<f64> = x.iter().zip(&point).map(|(a, p)| a - p).collect();
        let d2 = error.iter().map(|e| e * e).sum();
        Ok(DecodeResult { u, point, error, d2 })
    }
}

/// Assembles `[[B₁, 0], [H, B₂]]` with `H` of size `n₂×n₁`.
pub fn block_lower_generator(b1: &GeneratorMatrix, b2: &GeneratorMatrix, h: &DMatrix<f64>) -> Result<GeneratorMatrix> {
    let (n1, n2) = (b1.dim(), b2.dim());
    if h.nrows() != n2 || h.ncols() != n1 {
        return Err(Error::DimensionMismatch { expected: n2 * n1, got: h.nrows() * h.ncols() });
    }
    let n = n1 + n2;
    let m = DMatrix::from_fn(n, n, |i, j| match (i < n1, j < n1) {
        (true, true) => b1.entry(i, j),
        (true, false) => 0.0,
        (false, true) => h[(i - n1, j)],
        (false, false) => b2.entry(i - n1, j - n1),
    });
    GeneratorMatrix::from_matrix(m)
}

/// `Q̃` for the block generator `[[B₁, 0], [H, B₂]]`.
pub fn quantize_suboptimal(
    b1: &GeneratorMatrix,
    b2: &GeneratorMatrix,
    h: &DMatrix<f64>,
    x: &[f64],
) -> Result<DecodeResult> {
    SuboptimalQuantizer::new(b1, b2, h)?.decode(x)
}

/// Lexicographic order on integer coordinate vectors.
pub fn lex_order(a: &[i64], b: &[i64]) -> Ordering {
    sphere::lex_cmp(a, b)
}
