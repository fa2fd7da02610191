//! Lehmer's gcd and fast rational normalization.
//!
//! The stock bignum gcd is a bitwise binary algorithm; on the few-hundred-digit
//! coefficients that jet computations produce it dominates run time. Lehmer's
//! method runs Euclid on the leading 64 bits and applies the accumulated
//! cofactors to the full numbers once per ~60 bits of progress.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `gcd(|a|, |b|)`; `gcd(0, 0) = 0`.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    BigInt::from(gcd_uint(a.magnitude(), b.magnitude()))
}

pub fn gcd_uint(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = if a >= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    loop {
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.to_u128(), b.to_u128()) {
            return BigUint::from(gcd_u128(x, y));
        }
        let shift = a.bits().saturating_sub(63);
        let ah = (&a >> shift).to_i128().unwrap();
        let bh = (&b >> shift).to_i128().unwrap();
        let (ca, cb, cc, cd) = lehmer_cofactors(ah, bh);
        if cb == 0 {
            let r = &a % &b;
            a = b;
            b = r;
            continue;
        }
        let (ai, bi) = (BigInt::from_biguint(Sign::Plus, a), BigInt::from_biguint(Sign::Plus, b));
        let na = &ai * ca + &bi * cb;
        let nb = &ai * cc + &bi * cd;
        a = na.into_parts().1;
        b = nb.into_parts().1;
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
    }
}

/// Knuth's algorithm L inner loop on leading digits `ah ≥ bh`. Returns the
/// cofactors `(A, B, C, D)` with `(a, b) ↦ (Aa + Bb, Ca + Db)`.
fn lehmer_cofactors(mut ah: i128, mut bh: i128) -> (i128, i128, i128, i128) {
    let (mut a, mut b, mut c, mut d) = (1i128, 0i128, 0i128, 1i128);
    while bh + c > 0 && bh + d > 0 && ah + a >= 0 && ah + b >= 0 {
        let q = (ah + a) / (bh + c);
        if q != (ah + b) / (bh + d) {
            break;
        }
        (a, c) = (c, a - q * c);
        (b, d) = (d, b - q * d);
        (ah, bh) = (bh, ah - q * bh);
    }
    (a, b, c, d)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `n/d` in lowest terms with a positive denominator. Panics on `d = 0`.
pub fn ratio(n: BigInt, d: BigInt) -> BigRational {
    assert!(!d.is_zero(), "zero denominator");
    if n.is_zero() {
        return BigRational::zero();
    }
    let (n, d) = if d.is_negative() { (-n, -d) } else { (n, d) };
    if d.is_one() {
        return BigRational::from_integer(n);
    }
    let g = gcd(&n, &d);
    if g.is_one() {
        BigRational::new_raw(n, d)
    } else {
        BigRational::new_raw(n / &g, d / &g)
    }
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_one() {
        return b.abs();
    }
    if b.is_one() || a.is_multiple_of(b) {
        return a.abs();
    }
    if b.is_multiple_of(a) {
        return b.abs();
    }
    (a / gcd(a, b) * b).abs()
}

pub fn add(x: &BigRational, y: &BigRational) -> BigRational {
    if x.is_zero() {
        return y.clone();
    }
    if y.is_zero() {
        return x.clone();
    }
    if x.denom() == y.denom() {
        return ratio(x.numer() + y.numer(), x.denom().clone());
    }
    ratio(
        x.numer() * y.denom() + y.numer() * x.denom(),
        x.denom() * y.denom(),
    )
}

pub fn mul(x: &BigRational, y: &BigRational) -> BigRational {
    if x.is_zero() || y.is_zero() {
        return BigRational::zero();
    }
    // cross-cancel first so the products stay small
    let g1 = gcd(x.numer(), y.denom());
    let g2 = gcd(y.numer(), x.denom());
    let n = (x.numer() / &g1) * (y.numer() / &g2);
    let d = (x.denom() / &g2) * (y.denom() / &g1);
    BigRational::new_raw(n, d)
}
