//! Normal modes of the two coupled resonators and their coupling to the lines.
//!
//! Mode frequencies are homogeneous of degree one in (f1, f2, g12), so they are
//! evaluated directly in Hz. Damping rates are reported as κ/2π in Hz. The
//! threshold power is the only routine that needs absolute angular units.

use crate::error::{Error, Result};
use crate::params::{CircuitParams, PowerLevel};
use crate::scalar::{two_pi, Real, HBAR};

/// Derived description of the hybridised resonator pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridMode<T> {
    pub f_h: T,
    pub f_l: T,
    /// Mixing angle from the closed form, principal branch.
    pub theta: T,
    pub kappa_c1: T,
    pub kappa_c2: T,
    pub kappa_h1: T,
    pub kappa_h2: T,
    /// Total width: `kappa_h1 + kappa_h2 + kappa_hi`.
    pub kappa_h: T,
    /// Theoretical splitting thresholds. Fitted thresholds live in
    /// [`KerrModel`](crate::kerr::KerrModel) and are never substituted here.
    pub p_star1: PowerLevel<T>,
    pub p_star2: PowerLevel<T>,
}

impl<T: Real> HybridMode<T> {
    pub fn from_params(p: &CircuitParams<T>) -> Result<Self> {
        let (f_h, f_l) = hybrid_frequencies(p);
        let theta = mixing_angle(p);
        let kappa_c1 = coupling_damping(p.f1, p.z0, p.ck1);
        let kappa_c2 = coupling_damping(p.f2, p.z0, p.ck2);
        let (kappa_h1, kappa_h2) = hybrid_damping(p, theta, f_h);
        let kappa_h = kappa_h1 + kappa_h2 + p.kappa_hi;
        if kappa_h1 <= T::zero() || kappa_h2 <= T::zero() {
            return Err(Error::DivisionByZero(
                "threshold power needs both partial damping rates to be positive",
            ));
        }
        let p_star1 = threshold_power(kappa_h, p.f1, kappa_h1, f_h)?;
        let p_star2 = threshold_power(kappa_h, p.f2, kappa_h2, f_h)?;
        Ok(Self {
            f_h,
            f_l,
            theta,
            kappa_c1,
            kappa_c2,
            kappa_h1,
            kappa_h2,
            kappa_h,
            p_star1,
            p_star2,
        })
    }
}

fn normal_mode_discriminant<T: Real>(a: T, b: T, g: T) -> T {
    (b * b - a * a).hypot(T::lit(4.0) * g * (a * b).sqrt())
}

/// Upper and lower normal modes of two oscillators `a`, `b` with coupling `g`.
///
/// Shared by the resonator hybridisation and the qubit-mode avoided crossing.
pub fn coupled_oscillator_modes<T: Real>(a: T, b: T, g: T) -> (T, T) {
    let disc = normal_mode_discriminant(a, b, g);
    let sum = a * a + b * b;
    let two = T::lit(2.0);
    let upper = ((sum + disc) / two).sqrt();
    // sum - disc loses precision when g is tiny; use the product form instead.
    let lower_sq = if sum + disc > T::zero() {
        // ab·(ab − 4g²) factored so single precision does not overflow
        let ab = a * b;
        two * ab / (sum + disc) * (ab - T::lit(4.0) * g * g)
    } else {
        T::zero()
    };
    (upper, lower_sq.max(T::zero()).sqrt())
}

/// (f_h, f_l) of the coupled resonators, Hz.
pub fn hybrid_frequencies<T: Real>(p: &CircuitParams<T>) -> (T, T) {
    coupled_oscillator_modes(p.f1, p.f2, p.g12)
}

/// θ = ½ asin(4 g12 √(f1 f2) / √((f2²−f1²)² + 16 g12² f1 f2)), in [0, π/4] for f2 > f1.
pub fn mixing_angle<T: Real>(p: &CircuitParams<T>) -> T {
    let disc = normal_mode_discriminant(p.f1, p.f2, p.g12);
    if disc == T::zero() {
        return T::zero();
    }
    let s = (T::lit(4.0) * p.g12 * (p.f1 * p.f2).sqrt() / disc).min(T::one());
    s.asin() / T::lit(2.0)
}

/// Capacitive line damping κ_c/2π = (2 ω³ Z0² C_K² / π) / 2π, Hz.
pub fn coupling_damping<T: Real>(f: T, z0: T, ck: T) -> T {
    let w = two_pi::<T>() * f;
    let kappa = T::lit(2.0) * w * w * w * z0 * z0 * ck * ck / T::PI();
    kappa / two_pi::<T>()
}

/// Partial hybrid-mode damping rates (κ_h1, κ_h2), Hz.
pub fn hybrid_damping<T: Real>(p: &CircuitParams<T>, theta: T, f_h: T) -> (T, T) {
    let kc1 = coupling_damping(p.f1, p.z0, p.ck1);
    let kc2 = coupling_damping(p.f2, p.z0, p.ck2);
    let (s, c) = theta.sin_cos();
    (p.f1 / f_h * s * s * kc1, p.f2 / f_h * c * c * kc2)
}

/// P1*/P2* = f1⁴ κ_h2 / (f2⁴ κ_h1).
pub fn threshold_ratio<T: Real>(p: &CircuitParams<T>, kappa_h1: T, kappa_h2: T) -> Result<T> {
    if kappa_h1 == T::zero() {
        return Err(Error::DivisionByZero("kappa_h1 is zero"));
    }
    let r = p.f1 / p.f2;
    Ok(r * r * r * r * kappa_h2 / kappa_h1)
}

/// P_j* = (2/9) ħ κ_h² ω_j⁴ / (κ_hj ω_h³), returned in watts.
///
/// Inputs are linear frequencies / rates over 2π in Hz.
pub fn threshold_power<T: Real>(kappa_h: T, f_j: T, kappa_hj: T, f_h: T) -> Result<PowerLevel<T>> {
    if kappa_hj <= T::zero() || f_h <= T::zero() {
        return Err(Error::DivisionByZero(
            "threshold power needs kappa_hj > 0 and f_h > 0",
        ));
    }
    let tau = two_pi::<T>();
    let kh = tau * kappa_h;
    let khj = tau * kappa_hj;
    let wj = tau * f_j;
    let wh = tau * f_h;
    // Split the ratio so f32 does not overflow on ω⁴.
    let freq = (wj / wh) * (wj / wh) * (wj / wh) * wj;
    let watts = T::lit(2.0 / 9.0) * T::lit(HBAR) * (kh * kh / khj) * freq;
    PowerLevel::watts(watts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> CircuitParams<f64> {
        CircuitParams::new(6.209e9, 6.595e9, 313e6, 50.0, 7e-15, 7e-15).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_hybrid_frequencies() {
        let (fh, fl) = hybrid_frequencies(&reference());
        assert!((fh - 6.762e9).abs() < 1e6, "fh = {fh}");
        assert!((fl - 6.026e9).abs() < 1e6, "fl = {fl}");
    }

    #[test]
    fn decoupled_limit() {
        let mut p = reference();
        p.g12 = 0.0;
        let (fh, fl) = hybrid_frequencies(&p);
        assert!(rel(fh, p.f2) < 1e-15);
        assert!(rel(fl, p.f1) < 1e-15);
        assert_eq!(mixing_angle(&p), 0.0);
    }

    #[test]
    fn degenerate_resonators() {
        // f1 == f2 violates the ordering invariant, so build the struct directly.
        let (f, g) = (6.4e9, 2.0e8);
        let p = CircuitParams {
            f2: f,
            f1: f,
            g12: g,
            ..reference()
        };
        let (fh, fl) = hybrid_frequencies(&p);
        assert!(rel(fh, (f * f + 2.0 * g * f).sqrt()) < 1e-14);
        assert!(rel(fl, (f * f - 2.0 * g * f).sqrt()) < 1e-14);
        assert!((mixing_angle(&p) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn reference_mixing_angle() {
        let theta = mixing_angle(&reference());
        assert!((theta - 0.51).abs() < 0.01, "theta = {theta}");
        let cot2 = 1.0 / theta.tan().powi(2);
        assert!((cot2 - 3.2).abs() < 0.1);
    }

    #[test]
    fn reference_damping_chain() {
        let p = reference();
        let kc1 = coupling_damping(p.f1, p.z0, p.ck1);
        let kc2 = coupling_damping(p.f2, p.z0, p.ck2);
        assert!(rel(kc1, 732.6e3) < 0.01, "kc1 = {kc1}");
        assert!(rel(kc2, 878e3) < 0.01, "kc2 = {kc2}");
        assert_eq!(coupling_damping(p.f1, p.z0, 0.0), 0.0);

        let (fh, _) = hybrid_frequencies(&p);
        let (kh1, kh2) = hybrid_damping(&p, mixing_angle(&p), fh);
        assert!(rel(kh1, 160e3) < 0.01, "kh1 = {kh1}");
        assert!(rel(kh2, 653e3) < 0.01, "kh2 = {kh2}");

        let (kh1, _) = hybrid_damping(&p, 0.0, fh);
        assert_eq!(kh1, 0.0);
        let (_, kh2) = hybrid_damping(&p, std::f64::consts::FRAC_PI_2, fh);
        assert!(kh2.abs() < 1e-10);
    }

    #[test]
    fn reference_threshold_ratios() {
        let p = reference();
        let r = threshold_ratio(&p, 160e3, 653e3).unwrap();
        assert!((r - 3.2).abs() < 0.1);
        let r = threshold_ratio(&p, 160e3, 430e3).unwrap();
        assert!((r - 2.1).abs() < 0.05);
        assert!(threshold_ratio(&p, 0.0, 430e3).is_err());

        let sym = CircuitParams { f2: p.f1, ..p };
        assert!((threshold_ratio(&sym, 3e5, 3e5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theoretical_threshold_power() {
        let p = threshold_power(1.1e6, 6.209e9, 160e3, 6.762e9).unwrap();
        let w = p.as_watts();
        assert!(rel(w, 3.4e-17) < 0.02, "P* = {w}");

        let doubled = threshold_power(2.2e6, 6.209e9, 160e3, 6.762e9).unwrap();
        assert!(rel(doubled.as_watts(), 4.0 * w) < 1e-12);
    }

    #[test]
    fn threshold_power_ratio_identity() {
        let p = reference();
        let mode = HybridMode::from_params(&p).unwrap();
        let direct = mode.p_star1.as_watts() / mode.p_star2.as_watts();
        let ratio = threshold_ratio(&p, mode.kappa_h1, mode.kappa_h2).unwrap();
        assert!(rel(direct, ratio) < 1e-12);
    }

    #[test]
    fn total_width_is_sum_of_partials() {
        let mut p = reference();
        p.kappa_hi = 197e3;
        let m = HybridMode::from_params(&p).unwrap();
        assert_eq!(m.kappa_h, m.kappa_h1 + m.kappa_h2 + 197e3);
    }

    #[test]
    fn equal_capacitors_give_cot_squared() {
        let p = reference();
        let m = HybridMode::from_params(&p).unwrap();
        let ratio = threshold_ratio(&p, m.kappa_h1, m.kappa_h2).unwrap();
        let cot2 = 1.0 / m.theta.tan().powi(2);
        assert!(rel(ratio, cot2) < 1e-9);
    }

    #[test]
    fn single_precision_agrees() {
        let p = CircuitParams::new(6.209e9_f32, 6.595e9, 313e6, 50.0, 7e-15, 7e-15).unwrap();
        let (fh, fl) = hybrid_frequencies(&p);
        assert!((fh as f64 - 6.762e9).abs() < 1e6);
        assert!((fl as f64 - 6.026e9).abs() < 1e6);
        let k = coupling_damping(p.f1, p.z0, p.ck1);
        assert!(((k as f64) / 736_954.9 - 1.0).abs() < 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn homogeneous_in_frequency_scale(
            f1 in 1e9_f64..8e9,
            df in 1e7_f64..2e9,
            g in 0.0_f64..5e8,
            s in proptest::sample::select(vec![0.5_f64, 2.0, 10.0]),
        ) {
            let p = CircuitParams::new(f1, f1 + df, g, 50.0, 7e-15, 7e-15).unwrap();
            let q = CircuitParams::new(s * f1, s * (f1 + df), s * g, 50.0, 7e-15, 7e-15).unwrap();
            let (h0, l0) = hybrid_frequencies(&p);
            let (h1, l1) = hybrid_frequencies(&q);
            proptest::prop_assert!(rel(h1, s * h0) < 1e-12);
            proptest::prop_assert!(rel(l1, s * l0) < 1e-12);
            proptest::prop_assert!((mixing_angle(&p) - mixing_angle(&q)).abs() < 1e-12);
        }

        #[test]
        fn upper_mode_monotone_in_coupling(g in 1e3_f64..4e8, dg in 1e3_f64..1e8) {
            let p = CircuitParams::new(6.209e9, 6.595e9, g, 50.0, 7e-15, 7e-15).unwrap();
            let q = CircuitParams { g12: g + dg, ..p };
            let (h0, l0) = hybrid_frequencies(&p);
            let (h1, l1) = hybrid_frequencies(&q);
            proptest::prop_assert!(h1 > h0);
            proptest::prop_assert!(l1 < l0);
            proptest::prop_assert!(h0 >= p.f2 && l0 <= p.f1);
            let theta = mixing_angle(&p);
            proptest::prop_assert!((0.0..=std::f64::consts::FRAC_PI_4 + 1e-15).contains(&theta));
        }
    }
}
