//! Named lattice registry.
//!
//! Names follow the usual notation: `Z`, `Zn`, `An`, `An*`, `Dn`, `Dn*`,
//! `Dn+` (even n), `E6`, `E7`, `E8` and duals, `K12`, `L16` (Barnes–Wall),
//! `L24` (Leech). `AE9` and `A11^3` are known only through their NSMs.

mod construct;
mod golden;

use serde::{Deserialize, Serialize};

pub use golden::{exact_nsm, golden_entry, golden_reported, golden_table, refined_estimate, Column, GoldenConstant, Precision};

use crate::decode::{Decoder, Embedding, NativeLattice, Strategy};
use crate::error::{Error, Result};
use crate::linalg::{volume, GeneratorMatrix};

use construct::Built;

/// Reference NSM attached to a catalog lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenNsm {
    pub nsm: f64,
    pub precision: Precision,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    pub name: String,
    pub dim: usize,
    basis: Option<GeneratorMatrix>,
    golden: Option<GoldenNsm>,
    native: Option<(NativeLattice, Option<Embedding>)>,
}

impl Lattice {
    /// A lattice given only by its generator; decoded by sphere decoding.
    pub fn from_generator(name: impl Into<String>, basis: GeneratorMatrix) -> Self {
        Lattice { name: name.into(), dim: basis.dim(), basis: Some(basis), golden: None, native: None }
    }

    fn from_built(name: &str, built: Built) -> Self {
        Lattice {
            name: name.to_string(),
            dim: built.basis.dim(),
            basis: Some(built.basis),
            golden: golden_for(name),
            native: built.native,
        }
    }

    fn constant_only(name: &str, dim: usize) -> Self {
        Lattice { name: name.to_string(), dim, basis: None, golden: golden_for(name), native: None }
    }

    pub fn with_golden(mut self, golden: GoldenNsm) -> Self {
        self.golden = Some(golden);
        self
    }

    pub fn has_generator(&self) -> bool {
        self.basis.is_some()
    }

    pub fn basis(&self) -> Result<&GeneratorMatrix> {
        self.basis.as_ref().ok_or_else(|| Error::NoGenerator(self.name.clone()))
    }

    pub fn golden_nsm(&self) -> Option<&GoldenNsm> {
        self.golden.as_ref()
    }

    pub fn volume(&self) -> Result<f64> {
        Ok(volume(self.basis()?))
    }

    /// Decoder strategy, or `None` for constant-only entries.
    pub fn strategy(&self) -> Option<Strategy> {
        self.basis.as_ref()?;
        Some(self.native.as_ref().map_or(Strategy::GenericSphere, |(n, _)| n.strategy()))
    }

    pub(crate) fn native(&self) -> Option<(&NativeLattice, Option<&Embedding>)> {
        self.native.as_ref().map(|(n, e)| (n, e.as_ref()))
    }

    pub fn decoder(&self) -> Result<Decoder> {
        Decoder::for_lattice(self)
    }

    /// The lattice `c·Λ`, keeping its fast decoder.
    pub fn scaled(&self, c: f64) -> Result<Lattice> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        let basis = self.basis()?.scaled(c)?;
        let native = self.native.as_ref().map(|(n, e)| {
            let e = match e {
                Some(e) => e.rescaled(1.0 / c),
                None => Embedding::new(nalgebra::DMatrix::identity(self.dim, self.dim), 1.0 / c),
            };
            (n.clone(), Some(e))
        });
        Ok(Lattice { name: format!("{c}·{}", self.name), dim: self.dim, basis: Some(basis), golden: self.golden.clone(), native })
    }
}

fn golden_for(name: &str) -> Option<GoldenNsm> {
    if let Some((nsm, form)) = exact_nsm(name) {
        return Some(GoldenNsm { nsm, precision: Precision::NineDecimal, provenance: format!("exact: {form}") });
    }
    if parse_family(name).is_some_and(|(f, _)| f == Family::Integer) {
        return Some(GoldenNsm { nsm: 1.0 / 12.0, precision: Precision::NineDecimal, provenance: "exact: 1/12".into() });
    }
    golden_reported(name).map(|g| GoldenNsm {
        nsm: g.nsm,
        precision: g.precision,
        provenance: match g.precision {
            Precision::NineDecimal => "tabulated (exact, 9 decimals)".into(),
            Precision::FiveDecimal => "tabulated (numerical estimate, 5 decimals)".into(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Integer,
    A,
    ADual,
    D,
    DDual,
    DPlus,
}

fn parse_family(name: &str) -> Option<(Family, usize)> {
    let name = name.replace('^', "");
    let (head, rest) = name.split_at(name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len()));
    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let (digits, suffix) = rest.split_at(digits_end);
    let n: usize = if digits.is_empty() { if head == "Z" { 1 } else { return None } } else { digits.parse().ok()? };
    if n == 0 {
        return None;
    }
    let fam = match (head, suffix) {
        ("Z", "") => Family::Integer,
        ("A", "") => Family::A,
        ("A", "*") => Family::ADual,
        ("D", "") if n >= 2 => Family::D,
        ("D", "*") if n >= 2 => Family::DDual,
        ("D", "+") if n >= 2 && n.is_multiple_of(2) => Family::DPlus,
        _ => return None,
    };
    Some((fam, n))
}

/// Canonical spelling of a lattice name.
pub fn canonical_name(name: &str) -> String {
    match name.trim() {
        "Z1" | "Z^1" => "Z".into(),
        "Λ16" | "BW16" | "Lambda16" => "L16".into(),
        "Λ24" | "Leech" | "Lambda24" => "L24".into(),
        "E8*" => "E8".into(),
        "A11^3" | "A113" => "A11^3".into(),
        other => {
            if let Some(("Z", n)) = other.split_at_checked(1).filter(|(h, _)| *h == "Z") {
                if let Some(n) = n.strip_prefix('^') {
                    return format!("Z{n}");
                }
            }
            other.to_string()
        }
    }
}

/// Looks up a lattice by name.
pub fn get_lattice(name: &str) -> Result<Lattice> {
    let name = canonical_name(name);
    let lattice = match name.as_str() {
        "E6" => Lattice::from_built(&name, construct::e6(false)),
        "E6*" => Lattice::from_built(&name, construct::e6(true)),
        "E7" => Lattice::from_built(&name, construct::e7(false)),
        "E7*" => Lattice::from_built(&name, construct::e7(true)),
        "E8" => Lattice::from_built(&name, construct::e8()),
        "K12" => Lattice::from_built(&name, construct::coxeter_todd()),
        "L16" => Lattice::from_built(&name, construct::barnes_wall_16()),
        "L24" => Lattice::from_built(&name, construct::leech()),
        "AE9" => Lattice::constant_only(&name, 9),
        "A11^3" => Lattice::constant_only(&name, 11),
        _ => {
            let (fam, n) = parse_family(&name).ok_or_else(|| Error::UnknownLattice(name.clone()))?;
            if n > 48 {
                return Err(Error::UnknownLattice(name));
            }
            let built = match fam {
                Family::Integer => construct::integer(n),
                Family::A => construct::zero_sum(n),
                Family::ADual => construct::zero_sum_dual(n),
                Family::D => construct::checkerboard(n),
                Family::DDual => construct::checkerboard_dual(n),
                Family::DPlus => construct::checkerboard_plus(n),
            };
            Lattice::from_built(&name, built)
        }
    };
    Ok(lattice)
}

/// The lattices listed as best previously reported, in order of dimension.
pub fn record_lattice_names() -> Vec<&'static str> {
    golden_table().iter().filter(|g| g.column == Column::BestReported).map(|g| g.name.as_str()).collect()
}

/// Names shown by `catalog`: the featured lattices of dimensions 1–24.
pub fn featured_names() -> &'static [&'static str] {
    &["Z", "A2", "A3*", "D4", "D5*", "E6*", "E7*", "E8", "AE9", "D10+", "A11^3", "K12", "L16", "L24"]
}
