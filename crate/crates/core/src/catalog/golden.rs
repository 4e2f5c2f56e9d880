//! Tabulated constants: best previously reported NSMs, the conjectured lower
//! bound, the Zador upper bound and the best product lattices, n = 1..48.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const TABLE_CSV: &str = include_str!("../../data/table1.csv");

/// Printed precision of a tabulated NSM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    /// Exact value printed to nine decimals.
    NineDecimal,
    /// Numerical estimate printed to five decimals.
    FiveDecimal,
}

impl Precision {
    /// Half a unit in the last printed place.
    pub fn tolerance(self) -> f64 {
        match self {
            Precision::NineDecimal => 5e-10,
            Precision::FiveDecimal => 5e-6,
        }
    }

    fn from_digits(d: usize) -> Option<Self> {
        match d {
            9 => Some(Precision::NineDecimal),
            5 => Some(Precision::FiveDecimal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    BestReported,
    Lower,
    Upper,
    BestProduct,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Column::BestReported => "best_reported",
            Column::Lower => "lower",
            Column::Upper => "upper",
            Column::BestProduct => "best_product",
        })
    }
}

/// One tabulated constant. For product rows `name` is a composition string
/// such as `L24*K12*Z` and `flags` holds the `<G` / `<U` markers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenConstant {
    pub name: String,
    pub dim: usize,
    pub nsm: f64,
    pub precision: Precision,
    pub column: Column,
    pub flags: Vec<String>,
}

fn parse_table() -> Vec<GoldenConstant> {
    let mut out = Vec::new();
    for (i, line) in TABLE_CSV.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6, "table1.csv line {}: expected 6 fields", i + 1);
        let digits = f[2].split_once('.').map_or(0, |(_, d)| d.len());
        let column = match f[4] {
            "best_reported" => Column::BestReported,
            "lower" => Column::Lower,
            "upper" => Column::Upper,
            "best_product" => Column::BestProduct,
            other => panic!("table1.csv line {}: unknown column {other}", i + 1),
        };
        out.push(GoldenConstant {
            name: f[0].to_string(),
            dim: f[1].parse().expect("dimension"),
            nsm: f[2].parse().expect("nsm"),
            precision: Precision::from_digits(digits).expect("9 or 5 decimals"),
            column,
            flags: f[5].split_whitespace().map(str::to_string).collect(),
        });
    }
    out
}

/// All tabulated constants, in file order.
pub fn golden_table() -> &'static [GoldenConstant] {
    static TABLE: OnceLock<Vec<GoldenConstant>> = OnceLock::new();
    TABLE.get_or_init(parse_table)
}

/// The tabulated entry of `column` in dimension `n`.
pub fn golden_entry(column: Column, n: usize) -> Option<&'static GoldenConstant> {
    golden_table().iter().find(|g| g.column == column && g.dim == n)
}

/// Best previously reported lattice with the given catalog name.
pub fn golden_reported(name: &str) -> Option<&'static GoldenConstant> {
    golden_table().iter().find(|g| g.column == Column::BestReported && g.name == name)
}

/// Closed forms of the NSMs printed with nine decimals, where known.
pub fn exact_nsm(name: &str) -> Option<(f64, &'static str)> {
    let v = match name {
        "Z" => (1.0 / 12.0, "1/12"),
        "A2" => (5.0 / (36.0 * 3f64.sqrt()), "5/(36·√3)"),
        "A3*" => (19.0 / (192.0 * 2f64.cbrt()), "19/(192·2^(1/3))"),
        "D4" => (13.0 / (120.0 * 2f64.sqrt()), "13/(120·√2)"),
        "D5*" => (2641.0 / 23040.0 * 2f64.powf(-0.6), "2641/23040·2^(-3/5)"),
        "E6*" => (12619.0 / 204120.0 * 3f64.powf(1.0 / 6.0), "12619/204120·3^(1/6)"),
        "E7*" => (21361.0 / 322560.0 * 2f64.powf(1.0 / 7.0), "21361/322560·2^(1/7)"),
        "E8" => (929.0 / 12960.0, "929/12960"),
        _ => return None,
    };
    Some(v)
}

/// Refined values for the two numerically estimated entries, used where
/// products must reproduce the tabulated five-decimal products.
pub fn refined_estimate(name: &str) -> Option<f64> {
    match name {
        "L16" => Some(0.0682989),
        "L24" => Some(0.0657708),
        _ => None,
    }
}
