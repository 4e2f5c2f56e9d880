use latquant::catalog::featured_names;
use latquant::decode::{closest_product, quantize_suboptimal, ProductDecoder, SuboptimalQuantizer};
use latquant::{closest_point, get_lattice, sphere_decode, Decoder, Error, GeneratorMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_force(b: &GeneratorMatrix, x: &[f64], range: i64) -> (Vec<f64>, f64) {
    let n = b.dim();
    let side = 2 * range + 1;
    let mut best = (vec![], f64::INFINITY);
    for idx in 0..side.pow(n as u32) {
        let mut r = idx;
        let u: Vec<i64> = (0..n)
            .map(|_| {
                let d = r % side - range;
                r /= side;
                d
            })
            .collect();
        let p = b.point(&u);
        let d: f64 = x.iter().zip(&p).map(|(a, c)| (a - c) * (a - c)).sum();
        if d < best.1 {
            best = (p, d);
        }
    }
    best
}

#[test]
fn cube_example() {
    let r = closest_point(&get_lattice("Z2").unwrap(), &[0.4, -1.7]).unwrap();
    assert_eq!(r.u, vec![0, -2]);
    assert!((r.d2 - 0.25).abs() < 1e-12);
}

#[test]
fn hexagonal_example() {
    let a2 = get_lattice("A2").unwrap();
    let r = closest_point(&a2, &[1.2, 0.4]).unwrap();
    assert!((r.point[0] - 1.0).abs() < 1e-12 && r.point[1].abs() < 1e-12);
    assert!((r.d2 - 0.20).abs() < 1e-12);
    let (p, d) = brute_force(a2.basis().unwrap(), &[1.2, 0.4], 3);
    assert!((d - r.d2).abs() < 1e-12 && (p[0] - r.point[0]).abs() < 1e-12);
}

#[test]
fn origin_decodes_to_origin() {
    for name in featured_names() {
        let l = get_lattice(name).unwrap();
        if !l.has_generator() {
            continue;
        }
        let r = closest_point(&l, &vec![0.0; l.dim]).unwrap();
        assert!(r.d2 == 0.0 && r.u.iter().all(|&c| c == 0), "{name}");
    }
}

#[test]
fn fast_rules_agree_with_sphere_decoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for name in ["Z3", "D3", "D4", "D5", "A2", "A3", "A5", "A2*", "A3*", "A6*", "D3*", "D5*", "E8", "D6+", "D10+"] {
        let l = get_lattice(name).unwrap();
        let fast = l.decoder().unwrap();
        let sphere = Decoder::sphere(l.basis().unwrap());
        for _ in 0..300 {
            let x: Vec<f64> = (0..l.dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let a = fast.decode(&x).unwrap();
            let b = sphere.decode(&x).unwrap();
            assert!((a.d2 - b.d2).abs() < 1e-9, "{name}: fast {} sphere {}", a.d2, b.d2);
        }
    }
}

#[test]
fn scaled_lattices_keep_fast_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in ["D4", "A3*", "E8"] {
        let l = get_lattice(name).unwrap().scaled(1.7).unwrap();
        let sphere = Decoder::sphere(l.basis().unwrap());
        let fast = l.decoder().unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..l.dim).map(|_| rng.random_range(-4.0..4.0)).collect();
            assert!((fast.decode(&x).unwrap().d2 - sphere.decode(&x).unwrap().d2).abs() < 1e-9, "{name}");
        }
    }
}

#[test]
fn result_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in ["A3*", "E7", "K12"] {
        let l = get_lattice(name).unwrap();
        let b = l.basis().unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..l.dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let r = closest_point(&l, &x).unwrap();
            let p = b.point(&r.u);
            assert!(p.iter().zip(&r.point).all(|(a, c)| (a - c).abs() < 1e-9));
            let d2: f64 = r.error.iter().map(|e| e * e).sum();
            assert!((d2 - r.d2).abs() <= 1e-12 * d2.max(1e-300));
        }
    }
}

#[test]
fn sphere_decoding_matches_brute_force() {
    let b = GeneratorMatrix::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.3, 0.9, 0.0], vec![-0.4, 0.5, 1.1]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let (_, d) = brute_force(&b, &x, 5);
        assert!((sphere_decode(&b, &x).unwrap().d2 - d).abs() < 1e-12);
    }
}

#[test]
fn errors() {
    let z2 = get_lattice("Z2").unwrap();
    assert!(matches!(closest_point(&z2, &[1.0]).unwrap_err(), Error::DimensionMismatch { .. }));
    assert!(matches!(closest_point(&get_lattice("AE9").unwrap(), &[0.0; 9]).unwrap_err(), Error::NoGenerator(_)));
    assert!(closest_point(&z2, &[f64::NAN, 0.0]).is_err());
}

#[test]
fn products_decode_blockwise() {
    let a2 = get_lattice("A2").unwrap();
    let z = get_lattice("Z").unwrap();
    let r = closest_product(&[(&a2, 1.0), (&z, 2.0)], &[1.2, 0.4, 2.9]).unwrap();
    assert!((r.point[2] - 2.0).abs() < 1e-12);
    assert!((r.d2 - (0.20 + 0.81)).abs() < 1e-12);

    let pd = ProductDecoder::from_lattices(&[(&a2, 1.0), (&z, 0.9)]).unwrap();
    let g = pd.generator().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        assert!((pd.decode(&x).unwrap().d2 - sphere_decode(&g, &x).unwrap().d2).abs() < 1e-9);
    }
}

#[test]
fn layered_rule_without_offset_is_the_product() {
    let b1 = get_lattice("A2").unwrap().basis().unwrap().clone();
    let b2 = GeneratorMatrix::diagonal(&[0.8]).unwrap();
    let h = DMatrix::zeros(1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let a = quantize_suboptimal(&b1, &b2, &h, &x).unwrap();
        let blocks = ProductDecoder::new(vec![(Decoder::sphere(&b1), 1.0), (Decoder::sphere(&b2), 1.0)]).unwrap();
        assert!((a.d2 - blocks.decode(&x).unwrap().d2).abs() < 1e-12);
    }
}

#[test]
fn layered_rule_returns_lattice_points() {
    let b1 = GeneratorMatrix::identity(1);
    let h = DMatrix::from_element(1, 1, 0.5);
    let q = SuboptimalQuantizer::new(&b1, &b1, &h).unwrap();
    assert_eq!(q.generator().to_rows(), vec![vec![1.0, 0.0], vec![0.5, 1.0]]);
    let r = q.decode(&[0.45, 0.55]).unwrap();
    // Second block rounds 0.55 to 1, shifting the first block by 0.5.
    assert_eq!(r.u, vec![0, 1]);
    assert!((r.point[0] - 0.5).abs() < 1e-15 && (r.point[1] - 1.0).abs() < 1e-15);
    let p = q.generator().point(&r.u);
    assert!(p.iter().zip(&r.point).all(|(a, c)| (a - c).abs() < 1e-12));
}
