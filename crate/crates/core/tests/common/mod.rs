//! Test-only reference implementations shared by the integration targets.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

/// Fractional bits of the fixed-point representation.
const BITS: u32 = 320;

/// Complex number stored as (re, im) · 2^BITS.
#[derive(Clone)]
struct Fixed {
    re: BigInt,
    im: BigInt,
}

fn to_fixed_real(x: f64) -> BigInt {
    // f64 values are dyadic, so the conversion is exact for |x| ≥ 2^-BITS.
    let (mantissa, exponent, sign) = num_traits::float::FloatCore::integer_decode(x);
    let mut v = BigInt::from(mantissa);
    let shift = exponent as i64 + BITS as i64;
    v = if shift >= 0 {
        v << shift as u64
    } else {
        v >> (-shift) as u64
    };
    if sign < 0 {
        -v
    } else {
        v
    }
}

fn to_f64(v: &BigInt) -> f64 {
    // Keep 80 significant bits before converting to avoid overflow.
    let bits = v.bits() as i64;
    let drop = (bits - 80).max(0);
    let head = (v >> drop as u64).to_f64().unwrap();
    head * 2f64.powi((drop - BITS as i64) as i32)
}

impl Fixed {
    fn from(z: Complex64) -> Self {
        Fixed {
            re: to_fixed_real(z.re),
            im: to_fixed_real(z.im),
        }
    }
    fn one() -> Self {
        Fixed {
            re: BigInt::from(1) << BITS,
            im: BigInt::zero(),
        }
    }
    fn add(&self, o: &Fixed) -> Fixed {
        Fixed {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
    fn mul(&self, o: &Fixed) -> Fixed {
        Fixed {
            re: (&self.re * &o.re - &self.im * &o.im) >> BITS,
            im: (&self.re * &o.im + &self.im * &o.re) >> BITS,
        }
    }
    fn div(&self, o: &Fixed) -> Fixed {
        let norm = &o.re * &o.re + &o.im * &o.im;
        let re = (&self.re * &o.re + &self.im * &o.im) << BITS;
        let im = (&self.im * &o.re - &self.re * &o.im) << BITS;
        Fixed {
            re: re / &norm,
            im: im / norm,
        }
    }
    fn add_int(&self, k: u64) -> Fixed {
        Fixed {
            re: &self.re + (BigInt::from(k) << BITS),
            im: self.im.clone(),
        }
    }
    fn magnitude_bits(&self) -> u64 {
        self.re.abs().bits().max(self.im.abs().bits())
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

/// Σ zⁿ / ((a)_n (b)_n n!) until terms fall far below one unit in the last
/// fixed-point place and the term ratio is contracting.
pub fn hyp0f2_oracle(a: Complex64, b: Complex64, z: Complex64) -> Complex64 {
    let (fa, fb, fz) = (Fixed::from(a), Fixed::from(b), Fixed::from(z));
    let mut term = Fixed::one();
    let mut sum = Fixed::one();
    for n in 0u64..100_000 {
        let denom = fa
            .add_int(n)
            .mul(&fb.add_int(n))
            .mul(&Fixed::one().add_int(n));
        term = term.mul(&fz).div(&denom);
        sum = sum.add(&term);
        let contracting = (n as f64 + 1.0).powi(3) > 4.0 * z.norm();
        if contracting && term.magnitude_bits() < 16 {
            return sum.to_complex();
        }
    }
    panic!("oracle series did not terminate");
}
