use latquant::decode::ProductDecoder;
use latquant::estimate::{estimate_generator, estimate_lattice, estimate_moments, whiteness, MomentReport};
use latquant::{get_lattice, Decoder, GeneratorMatrix};

#[test]
fn deterministic_across_thread_counts() {
    let l = get_lattice("D4").unwrap();
    let d = l.decoder().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let multi = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| estimate_moments(&d, 30_001, 9).unwrap());
    let b = multi.install(|| estimate_moments(&d, 30_001, 9).unwrap());
    assert_eq!(a.g_hat.to_bits(), b.g_hat.to_bits());
    assert_eq!(a.r_hat, b.r_hat);
    let c = estimate_moments(&d, 30_001, 10).unwrap();
    assert_ne!(a.g_hat, c.g_hat);
}

#[test]
fn nsm_is_scale_invariant() {
    let b = get_lattice("A3*").unwrap().basis().unwrap().clone();
    let a = estimate_generator(&b, 20_000, 4).unwrap();
    let c = estimate_generator(&b.scaled(3.5).unwrap(), 20_000, 4).unwrap();
    assert!((a.g_hat - c.g_hat).abs() <= 1e-12 * a.g_hat);
}

#[test]
fn rectangle_nsm() {
    let est = estimate_generator(&GeneratorMatrix::diagonal(&[1.0, 2.0]).unwrap(), 200_000, 1).unwrap();
    assert!((est.g_hat - 5.0 / 48.0).abs() < 3.0 * est.se_g);
}

#[test]
fn hexagon_covariance() {
    let est = estimate_lattice(&get_lattice("A2").unwrap(), 200_000, 2).unwrap();
    let rho = (est.r_hat[0][0] + est.r_hat[1][1]) / 2.0;
    assert!((rho - 5.0 / 72.0).abs() < 3.0 * est.se_e / 2.0, "{rho}");
}

#[test]
fn error_is_additive_over_products() {
    let a2 = get_lattice("A2").unwrap();
    let z = get_lattice("Z").unwrap();
    let prod = ProductDecoder::from_lattices(&[(&a2, 1.0), (&z, 1.3)]).unwrap();
    let whole = estimate_moments(&prod, 200_000, 3).unwrap();
    let e1 = estimate_lattice(&a2, 200_000, 4).unwrap();
    let e2 = estimate_lattice(&z.scaled(1.3).unwrap(), 200_000, 5).unwrap();
    let se = (whole.se_e.powi(2) + e1.se_e.powi(2) + e2.se_e.powi(2)).sqrt();
    assert!((whole.e_hat - e1.e_hat - e2.e_hat).abs() < 3.0 * se);
}

#[test]
fn standard_error_scales_as_inverse_root() {
    let d = Decoder::sphere(&GeneratorMatrix::identity(2));
    let a = estimate_moments(&d, 50_000, 6).unwrap();
    let b = estimate_moments(&d, 200_000, 6).unwrap();
    let ratio = a.se_e / b.se_e;
    assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
}

#[test]
fn whiteness_of_rectangle() {
    let d = Decoder::sphere(&GeneratorMatrix::diagonal(&[1.0, 2.0]).unwrap());
    let w = whiteness(&d, 200_000, 7).unwrap();
    assert!((w.rbar[0][0] + 0.125).abs() < 0.01 && (w.rbar[1][1] - 0.125).abs() < 0.01);
    assert!(w.anisotropy > 50.0 * w.anisotropy_se);
    assert!((w.eigen_spread - 1.2).abs() < 3.0 * w.eigen_spread_se);
    // ‖R̄‖_F / (ρ√n) = (√2/8)/((5/24)·√2) = 0.6.
    assert!((w.anisotropy - 0.6).abs() < 0.01);
}

#[test]
fn report_fields() {
    let d = get_lattice("E8").unwrap().decoder().unwrap();
    let w = whiteness(&d, 5_000, 1).unwrap();
    let r = MomentReport::new("E8", &w);
    assert_eq!(r.n, 8);
    assert_eq!(r.r.len(), 64);
    assert!((r.g - r.e / (8.0 * r.v.powf(0.25))).abs() <= 1e-12 * r.g);
    let tr: f64 = (0..8).map(|i| r.r[i * 9]).sum();
    assert!((tr - r.e).abs() <= 1e-12 * r.e);
}
