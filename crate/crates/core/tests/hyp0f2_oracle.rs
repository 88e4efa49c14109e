//! ₀F₂ against an independent fixed-point series evaluated with big integers.

mod common;

use common::hyp0f2_oracle as oracle;
use num_complex::Complex64;
use qdiode::special::hyp0f2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}

#[test]
fn unit_parameters_match_oracle() {
    let one = Complex64::new(1.0, 0.0);
    let want = oracle(one, one, one);
    let got = hyp0f2(one, one, one).unwrap();
    assert!((want.re - 2.129_702_5).abs() < 1e-6, "oracle {want}");
    assert!(
        (got.re - want.re).abs() < 1e-6 && got.im.abs() < 1e-12,
        "{got} vs {want}"
    );
}

/// Random complex parameters kept at least 0.25 from the poles of the
/// Pochhammer symbols, arguments up to |z| = 30.
#[test]
fn random_complex_cases_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f2);
    let parameter = |rng: &mut ChaCha8Rng| loop {
        let p = Complex64::new(rng.random_range(-4.0..6.0), rng.random_range(-3.0..3.0));
        let near_pole = p.re < 0.5 && (p - Complex64::new(p.re.round(), 0.0)).norm() < 0.25;
        if !near_pole {
            return p;
        }
    };
    let mut worst = 0.0_f64;
    for case in 0..200 {
        let a = parameter(&mut rng);
        let b = parameter(&mut rng);
        let radius: f64 = 30.0 * rng.random::<f64>().powi(2);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let z = Complex64::from_polar(radius, phase);
        let want = oracle(a, b, z);
        let got = hyp0f2(a, b, z).unwrap();
        let err = rel_err(got, want);
        worst = worst.max(err);
        assert!(
            err < 1e-10,
            "case {case}: a={a} b={b} z={z}: got {got}, want {want} (rel {err:e})"
        );
    }
    eprintln!("worst relative error over 200 cases: {worst:e}");
}

/// The parameter pairs that occur in the transmission formula:
/// a = 1 − (Δ − iκ/2)/K, b = −(Δ + iκ/2)/K with small ζ.
#[test]
fn transmission_regime_matches_oracle() {
    let (k, kappa) = (-11.5e6, 1.1e6);
    for i in 0..=20 {
        let delta = -10e6 + 1e6 * i as f64;
        let minus = Complex64::new(delta, -kappa / 2.0) / k;
        let plus = Complex64::new(delta, kappa / 2.0) / k;
        for drive in [0.1, 1.0, 8.0] {
            let zeta = Complex64::new(2.0 * kappa * kappa * drive / (9.0 * k * k), 0.0);
            for (a, b) in [(1.0 - minus, -plus), (-minus, -plus)] {
                let want = oracle(a, b, zeta);
                let got = hyp0f2(a, b, zeta).unwrap();
                assert!(
                    rel_err(got, want) < 1e-12,
                    "Δ={delta} drive={drive}: {got} vs {want}"
                );
            }
        }
    }
}
