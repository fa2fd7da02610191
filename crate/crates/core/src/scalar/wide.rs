//! Allocation-free multiply-accumulate for the inner loops of series products.
//!
//! `BigInt` products allocate a fresh buffer each time, which costs about as
//! much as the multiplication itself at the sizes seen here. [`Wide`] keeps a
//! two's-complement buffer and adds products into it in place.

use num_bigint::{BigInt, BigUint, Sign};

/// A `BigInt` as sign and little-endian 64-bit magnitude.
#[derive(Clone, Debug)]
pub(crate) struct Limbs {
    neg: bool,
    mag: Vec<u64>,
}

impl Limbs {
    pub fn is_zero(&self) -> bool {
        self.mag.is_empty()
    }
}

impl From<&BigInt> for Limbs {
    fn from(b: &BigInt) -> Self {
        Self {
            neg: b.sign() == Sign::Minus,
            mag: b.magnitude().iter_u64_digits().collect(),
        }
    }
}

/// Two's-complement accumulator; grows so the running sum never overflows.
#[derive(Clone, Debug, Default)]
pub(crate) struct Wide(Vec<u64>);

impl Wide {
    fn negative(&self) -> bool {
        self.0.last().is_some_and(|&t| t >> 63 == 1)
    }

    fn reserve(&mut self, limbs: usize) {
        if self.0.len() < limbs {
            let fill = if self.negative() { u64::MAX } else { 0 };
            self.0.resize(limbs, fill);
        }
    }

    /// `self ± a·b`, subtracting when `negate` flips the product sign.
    pub fn add_product(&mut self, a: &Limbs, b: &Limbs, negate: bool) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        // two guard limbs: one for the carry, one for the sign
        self.reserve(a.mag.len() + b.mag.len() + 2);
        let w = &mut self.0;
        let len = w.len();
        if a.neg ^ b.neg ^ negate {
            for (i, &x) in a.mag.iter().enumerate() {
                let mut carry = 0u64;
                for (j, &y) in b.mag.iter().enumerate() {
                    let p = x as u128 * y as u128 + carry as u128;
                    let (r, borrow) = w[i + j].overflowing_sub(p as u64);
                    w[i + j] = r;
                    carry = (p >> 64) as u64 + borrow as u64;
                }
                let mut k = i + b.mag.len();
                while carry != 0 && k < len {
                    let (r, borrow) = w[k].overflowing_sub(carry);
                    w[k] = r;
                    carry = borrow as u64;
                    k += 1;
                }
            }
        } else {
            for (i, &x) in a.mag.iter().enumerate() {
                let mut carry = 0u64;
                for (j, &y) in b.mag.iter().enumerate() {
                    let p = x as u128 * y as u128 + w[i + j] as u128 + carry as u128;
                    w[i + j] = p as u64;
                    carry = (p >> 64) as u64;
                }
                let mut k = i + b.mag.len();
                while carry != 0 && k < len {
                    let (r, c) = w[k].overflowing_add(carry);
                    w[k] = r;
                    carry = c as u64;
                    k += 1;
                }
            }
        }
        // keep a spare sign limb so the next reserve sees the true sign
        if w[len - 1] != 0 && w[len - 1] != u64::MAX {
            w.push(if w[len - 1] >> 63 == 1 { u64::MAX } else { 0 });
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        let neg = self.negative();
        let mut mag = self.0.clone();
        if neg {
            let mut carry = true;
            for limb in &mut mag {
                let (r, c) = (!*limb).overflowing_add(carry as u64);
                *limb = r;
                carry = c;
            }
        }
        let digits: Vec<u32> = mag.iter().flat_map(|&l| [l as u32, (l >> 32) as u32]).collect();
        let m = BigUint::new(digits);
        if neg {
            BigInt::from_biguint(Sign::Minus, m)
        } else {
            BigInt::from(m)
        }
    }
}

/// A Gaussian integer ready for Gauss's three-product multiplication.
#[derive(Clone, Debug)]
pub(crate) struct Cplx {
    re: Limbs,
    im: Limbs,
    sum: Limbs,
    diff: Limbs,
}

impl Cplx {
    pub fn new(re: &BigInt, im: &BigInt) -> Self {
        Self {
            re: re.into(),
            im: im.into(),
            sum: (&(re + im)).into(),
            diff: (&(im - re)).into(),
        }
    }

    fn full(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }
}

fn schoolbook(out: &mut Vec<u64>, a: &[u64], b: &[u64]) {
    out.clear();
    out.resize(a.len() + b.len(), 0);
    for (i, &x) in a.iter().enumerate() {
        let mut carry = 0u64;
        for (j, &y) in b.iter().enumerate() {
            let p = x as u128 * y as u128 + out[i + j] as u128 + carry as u128;
            out[i + j] = p as u64;
            carry = (p >> 64) as u64;
        }
        out[i + b.len()] = carry;
    }
}

impl Wide {
    /// `self ± mag`.
    fn add_magnitude(&mut self, mag: &[u64], negative: bool) {
        self.reserve(mag.len() + 2);
        let w = &mut self.0;
        let len = w.len();
        let mut carry = 0u64;
        for (k, slot) in w.iter_mut().enumerate() {
            let m = mag.get(k).copied().unwrap_or(0);
            if k >= mag.len() && carry == 0 {
                break;
            }
            if negative {
                let (r1, b1) = slot.overflowing_sub(m);
                let (r2, b2) = r1.overflowing_sub(carry);
                *slot = r2;
                carry = (b1 | b2) as u64;
            } else {
                let (r1, c1) = slot.overflowing_add(m);
                let (r2, c2) = r1.overflowing_add(carry);
                *slot = r2;
                carry = (c1 | c2) as u64;
            }
        }
        if w[len - 1] != 0 && w[len - 1] != u64::MAX {
            w.push(if w[len - 1] >> 63 == 1 { u64::MAX } else { 0 });
        }
    }
}

/// `acc += x·y` on a pair of accumulators; `scratch` is reused storage.
#[inline]
pub(crate) fn gauss_mul_add(acc: &mut (Wide, Wide), x: &Cplx, y: &Cplx, scratch: &mut Vec<u64>) {
    if !(x.full() && y.full()) || x.sum.is_zero() || y.sum.is_zero() {
        acc.0.add_product(&x.re, &y.re, false);
        acc.0.add_product(&x.im, &y.im, true);
        acc.1.add_product(&x.re, &y.im, false);
        acc.1.add_product(&x.im, &y.re, false);
        return;
    }
    // k1 = c(a+b), k2 = a(d−c), k3 = b(c+d); re = k1 − k3, im = k1 + k2
    schoolbook(scratch, &y.re.mag, &x.sum.mag);
    let neg = y.re.neg ^ x.sum.neg;
    acc.0.add_magnitude(scratch, neg);
    acc.1.add_magnitude(scratch, neg);
    acc.1.add_product(&x.re, &y.diff, false);
    acc.0.add_product(&x.im, &y.sum, true);
}
