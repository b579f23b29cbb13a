//! Exact reduction of `α·m mod 1` for a double `α` and a large integer `m`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::TAU;

/// `α = mant · 2^exp` with `mant` odd or zero.
fn decompose(alpha: f64) -> (i64, i32) {
    if alpha == 0.0 || !alpha.is_finite() {
        return (0, 0);
    }
    let bits = alpha.abs().to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i32;
    let signed = if alpha < 0.0 { -(mant as i64) } else { mant as i64 };
    (signed, exp)
}

/// Fractional part of `α·m`, in `[-1/2, 1/2)`, computed exactly before the
/// final rounding. Only `m mod 2^s` matters when `α = M·2^{-s}`, so callers
/// may pass `m` reduced modulo `2^128` whenever `s ≤ 128`.
pub fn frac_mul(alpha: f64, m: u128) -> f64 {
    let (mant, exp) = decompose(alpha);
    if mant == 0 || exp >= 0 {
        return 0.0;
    }
    let s = (-exp) as u32;
    let neg = mant < 0;
    let mant = mant.unsigned_abs() as u128;
    // 192-bit product mant · m as (hi, lo).
    let m_lo = m & u64::MAX as u128;
    let m_hi = m >> 64;
    let p0 = mant * m_lo;
    let p1 = mant * m_hi;
    let (lo, carry) = p0.overflowing_add(p1 << 64);
    let hi = (p1 >> 64) + carry as u128;
    let x = if s <= 128 {
        let r = if s == 128 { lo } else { lo & ((1u128 << s) - 1) };
        ldexp(r as f64, -(s as i32))
    } else {
        let hs = s - 128;
        let h = if hs >= 128 { hi } else { hi & ((1u128 << hs) - 1) };
        ldexp(h as f64, 128 - s as i32) + ldexp(lo as f64, -(s as i32))
    };
    centre(if neg { -x } else { x })
}

/// Like [`frac_mul`] for `m = x^e`, falling back to big integers only when
/// the power is needed beyond 128 bits.
pub fn frac_mul_pow(alpha: f64, x: u64, e: u32) -> f64 {
    let (mant, exp) = decompose(alpha);
    if mant == 0 || exp >= 0 {
        return 0.0;
    }
    if -exp <= 128 {
        return frac_mul(alpha, (x as u128).wrapping_pow(e));
    }
    if let Some(m) = (x as u128).checked_pow(e) {
        return frac_mul(alpha, m);
    }
    frac_mul_big(alpha, &BigUint::from(x).pow(e))
}

pub fn frac_mul_big(alpha: f64, m: &BigUint) -> f64 {
    let (mant, exp) = decompose(alpha);
    if mant == 0 || exp >= 0 {
        return 0.0;
    }
    let s = (-exp) as u32;
    let modulus = BigUint::one() << s;
    let prod = (BigUint::from(mant.unsigned_abs()) * m) % &modulus;
    if prod.is_zero() {
        return 0.0;
    }
    // keep the top 64 bits for the conversion
    let bits = prod.bits() as u32;
    let shift = bits.saturating_sub(64);
    let top = (&prod >> shift).to_u64().unwrap_or(u64::MAX);
    let x = ldexp(top as f64, shift as i32 - s as i32);
    centre(if mant < 0 { -x } else { x })
}

fn ldexp(x: f64, e: i32) -> f64 {
    // split to stay inside the exponent range of a single power
    let mut v = x;
    let mut e = e;
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    v * 2f64.powi(e)
}

fn centre(x: f64) -> f64 {
    let f = x - x.round();
    if f >= 0.5 {
        f - 1.0
    } else {
        f
    }
}

/// `e(θ) = exp(2πiθ)`.
pub fn e(theta: f64) -> Complex64 {
    let t = centre(theta);
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}
