//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use latquant::bounds::{best_product_table, reference_nsm, zador_upper};
use latquant::catalog::{golden_entry, Column, Precision};
use latquant::compose::{optimal_product_nsm, optimal_scale, parse_composition, Moments};
use latquant::estimate::{estimate_lattice, whiteness};
use latquant::experiments::{
    box_nsm, box_whitened_nsm, box_whitening_slope, product_factorization_check, saddle_experiment,
    whitening_experiment, SaddleFactor, Verdict,
};
use latquant::{get_lattice, GeneratorMatrix};
use nalgebra::DMatrix;

const MILLION: u64 = 1_000_000;

type Outcome = Result<String, String>;

fn within(label: &str, value: f64, target: f64, tol: f64) -> Outcome {
    let msg = format!("{label}: {value:.9} vs {target:.9} (|Δ| = {:.2e}, tol {tol:.2e})", (value - target).abs());
    if (value - target).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect::<Vec<_>>().join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn mc_nsm(name: &str, samples: u64, seed: u64, target: f64, floor: f64) -> Outcome {
    let l = get_lattice(name).map_err(|e| e.to_string())?;
    let e = estimate_lattice(&l, samples, seed).map_err(|e| e.to_string())?;
    within(&format!("{name} G ± {:.1e}", e.se_g), e.g_hat, target, (3.0 * e.se_g).max(floor))
}

fn criterion_1() -> Outcome {
    all(["Z", "Z2", "Z4"].iter().map(|n| mc_nsm(n, MILLION, 1, 0.083333333, 0.0)).collect())
}

fn criterion_2() -> Outcome {
    all(vec![
        mc_nsm("A2", MILLION, 2, 0.080187537, 0.0),
        mc_nsm("D4", MILLION, 2, 0.076603235, 0.0),
        mc_nsm("E8", MILLION, 2, 0.071682099, 0.0),
    ])
}

fn criterion_3() -> Outcome {
    all(vec![mc_nsm("K12", 100_000, 3, 0.070095600, 0.0), mc_nsm("L24", 100_000, 3, 0.06577, 5e-5)])
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let mut worst9 = 0.0f64;
    let mut worst5 = 0.0f64;
    for n in 2..=48 {
        let entry = golden_entry(Column::BestProduct, n).ok_or(format!("no product entry at n = {n}"))?;
        let mut parts = Vec::new();
        for f in parse_composition(&entry.name).map_err(|e| e.to_string())? {
            let g = reference_nsm(&f.name).ok_or(format!("no reference NSM for {}", f.name))?;
            let dim = get_lattice(&f.name).map_err(|e| e.to_string())?.dim;
            parts.push((dim, g));
        }
        let g = optimal_product_nsm(&parts).map_err(|e| e.to_string())?;
        let d = (g - entry.nsm).abs();
        let tol = if n <= 13 {
            worst9 = worst9.max(d);
            Precision::NineDecimal.tolerance()
        } else {
            worst5 = worst5.max(d);
            Precision::FiveDecimal.tolerance()
        };
        if d > tol {
            failures.push(format!("n = {n} {}: {g:.9} vs {}", entry.name, entry.nsm));
        }
    }
    let summary = format!("max |Δ| n=2..13: {worst9:.2e}; n=14..48: {worst5:.2e}");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join(", ")))
    }
}

fn factor_multiset(s: &str) -> Result<Vec<String>, String> {
    let mut v: Vec<String> = parse_composition(s).map_err(|e| e.to_string())?.into_iter().map(|f| f.name).collect();
    v.sort();
    Ok(v)
}

fn criterion_5() -> Outcome {
    let rows = best_product_table(48).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let mut below_zador = Vec::new();
    for r in &rows {
        let Some(entry) = golden_entry(Column::BestProduct, r.n) else {
            if r.composition.is_some() {
                failures.push(format!("n = {}: unexpected product", r.n));
            }
            continue;
        };
        let ours = r.composition.clone().unwrap_or_default();
        if factor_multiset(&ours)? != factor_multiset(&entry.name)? {
            failures.push(format!("n = {}: {ours} vs {}", r.n, entry.name));
        }
        let flags: Vec<String> = r.flags().into_iter().map(str::to_string).collect();
        if flags != entry.flags {
            failures.push(format!("n = {}: flags {flags:?} vs {:?}", r.n, entry.flags));
        }
        if r.below_zador {
            below_zador.push(r.n.to_string());
        }
    }
    for n in [13usize, 14, 17, 25] {
        if !rows[n - 1].below_zador {
            failures.push(format!("n = {n}: missing <U"));
        }
    }
    let summary = format!("47 compositions and flags compared; <U at n = {}", below_zador.join(","));
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join(", ")))
    }
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in 1..=48 {
        let printed = golden_entry(Column::Upper, n).ok_or(format!("no upper bound at n = {n}"))?.nsm;
        let d = (zador_upper(n).map_err(|e| e.to_string())? - printed).abs();
        worst = worst.max(d);
        if d > 5e-10 {
            failures.push(format!("n = {n}: |Δ| = {d:.2e}"));
        }
    }
    if failures.is_empty() {
        Ok(format!("48 values, max |Δ| = {worst:.2e}"))
    } else {
        Err(failures.join(", "))
    }
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    for (k, name) in ["Z2", "Z4", "A2", "D4", "E8"].iter().enumerate() {
        let l = get_lattice(name).map_err(|e| e.to_string())?;
        let w = whiteness(&l.decoder().map_err(|e| e.to_string())?, MILLION, 70 + k as u64).map_err(|e| e.to_string())?;
        let msg = format!("{name} anisotropy {:.2e} = {:.2}σ", w.anisotropy, w.anisotropy / w.anisotropy_se);
        parts.push(if w.anisotropy < 5.0 * w.anisotropy_se { Ok(msg) } else { Err(msg) });
    }
    let rect = latquant::Decoder::sphere(&GeneratorMatrix::diagonal(&[1.0, 2.0]).map_err(|e| e.to_string())?);
    let w = whiteness(&rect, MILLION, 77).map_err(|e| e.to_string())?;
    parts.push(within(
        &format!("Z×2Z eigen_spread ± {:.1e}", w.eigen_spread_se),
        w.eigen_spread,
        1.2,
        3.0 * w.eigen_spread_se,
    ));
    all(parts)
}

fn criterion_8() -> Outcome {
    let b = GeneratorMatrix::diagonal(&[1.0, 2.0]).map_err(|e| e.to_string())?;
    let r = whitening_experiment(&b, -0.1, MILLION, 8).map_err(|e| e.to_string())?;
    let s = 2.0 * (-0.025f64).exp();
    let exact = (1.0 + s * s) / (24.0 * s);
    let exact_alt = box_whitened_nsm(&[1.0, 2.0], -0.1);
    let verdict = if r.verdict == Verdict::Improved {
        Ok(format!("verdict {}", r.verdict))
    } else {
        Err(format!("verdict {}", r.verdict))
    };
    all(vec![
        verdict,
        within("exact perturbed G (two forms)", exact_alt, exact, 1e-15),
        within("exact decrease", box_nsm(&[1.0, 2.0]) - exact, 1.5e-3, 1e-4),
        within(&format!("baseline G ± {:.1e}", r.baseline_se), r.baseline_g, 5.0 / 48.0, 3.0 * r.baseline_se),
        within(&format!("perturbed G ± {:.1e}", r.perturbed_se), r.perturbed_g, exact, 3.0 * r.perturbed_se),
        if r.checks_passed() { Ok("volume preserved".into()) } else { Err(format!("{:?}", r.checks)) },
    ])
}

fn criterion_9() -> Outcome {
    let z = SaddleFactor::new(GeneratorMatrix::identity(1), Some(1.0 / 12.0));
    let h = DMatrix::from_element(1, 1, 0.5);
    let r = saddle_experiment(&z, &z, &h, 1.0, MILLION, 9).map_err(|e| e.to_string())?;
    let gap = (r.baseline_g - r.perturbed_g) / r.perturbed_se;
    let below = format!("G = {:.9} ± {:.1e}, {gap:.1}σ below 1/12", r.perturbed_g, r.perturbed_se);
    let bracket = (0.080187537..=0.083333333).contains(&r.perturbed_g);
    all(vec![
        if r.verdict == Verdict::Improved && gap > 3.0 { Ok(below) } else { Err(below) },
        if bracket { Ok("within [0.080187537, 0.083333333]".into()) } else { Err("outside bracket".into()) },
        if r.checks_passed() { Ok("layered quantizer consistent".into()) } else { Err(format!("{:?}", r.checks)) },
    ])
}

fn criterion_10() -> Outcome {
    let d4 = get_lattice("D4").map_err(|e| e.to_string())?;
    let z = get_lattice("Z").map_err(|e| e.to_string())?;
    let a2 = get_lattice("A2").map_err(|e| e.to_string())?;
    let a = optimal_scale(
        &Moments::from_nsm(2, a2.volume().map_err(|e| e.to_string())?, a2.golden_nsm().unwrap().nsm),
        &Moments::from_nsm(1, 1.0, 1.0 / 12.0),
    )
    .map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (label, spec, seed) in [("D4×Z", vec![(&d4, 1.0), (&z, 1.0)], 10u64), ("A2×aZ", vec![(&a2, 1.0), (&z, a)], 11)] {
        let r = product_factorization_check(&spec, 10_000, 400_000, seed).map_err(|e| e.to_string())?;
        let mut msg = format!("{label}: ");
        msg.push_str(&r.checks.iter().map(|c| format!("{} [{}]", c.name, c.detail)).collect::<Vec<_>>().join(", "));
        let mut ok = r.checks_passed();
        if label == "A2×aZ" {
            let z = r.parameters["per_dimension_error_max_z"];
            msg.push_str(&format!(", per-dimension E equal ({z:.2}σ)"));
            ok &= z <= 3.0;
        }
        parts.push(if ok { Ok(msg) } else { Err(msg) });
    }
    all(parts)
}

fn criterion_11() -> Outcome {
    let (central, predicted) = box_whitening_slope(&[1.0, 2.0], 0.01).map_err(|e| e.to_string())?;
    let g0 = box_nsm(&[1.0, 2.0]);
    let forward = (box_whitened_nsm(&[1.0, 2.0], 0.01) - g0) / 0.01;
    let backward = (g0 - box_whitened_nsm(&[1.0, 2.0], -0.01)) / 0.01;
    all(vec![
        within("central", central, predicted, 0.1 * predicted),
        within("β = +0.01", forward, predicted, 0.1 * predicted),
        within("β = -0.01", backward, predicted, 0.1 * predicted),
    ])
}

fn main() -> ExitCode {
    let criteria: BTreeMap<u32, (&str, fn() -> Outcome)> = BTreeMap::from([
        (1, ("cube NSM by Monte Carlo", criterion_1 as fn() -> Outcome)),
        (2, ("classical lattices by Monte Carlo", criterion_2)),
        (3, ("K12 and Leech by sphere decoding", criterion_3)),
        (4, ("closed-form product column", criterion_4)),
        (5, ("best-product table compositions and flags", criterion_5)),
        (6, ("Zador bound", criterion_6)),
        (7, ("whiteness", criterion_7)),
        (8, ("whitening improvement", criterion_8)),
        (9, ("saddle experiment", criterion_9)),
        (10, ("product factorization", criterion_10)),
        (11, ("first-order slope", criterion_11)),
    ]);
    let mut failed = 0;
    for (id, (title, f)) in criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {id} ({title}) [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {id} ({title}) [{secs:.1}s]: {d}");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
