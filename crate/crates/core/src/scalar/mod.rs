//! Exact complex rationals `re + i·im`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) mod gcd;
pub(crate) mod wide;

use gcd::{add as radd, mul as rmul};

/// An element of `Q(i)`. Arithmetic is exact; nothing is ever rounded.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(rat(re, 1), rat(im, 1))
    }

    /// `re_num/re_den + i·im_num/im_den`.
    pub fn from_fracs(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        Self::new(rat(re_num, re_den), rat(im_num, im_den))
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `|z|²`, always a non-negative rational.
    pub fn norm_sqr(&self) -> BigRational {
        radd(&rmul(&self.re, &self.re), &rmul(&self.im, &self.im))
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        let n_inv = gcd::ratio(n.denom().clone(), n.numer().clone());
        Some(Self::new(rmul(&self.re, &n_inv), -rmul(&self.im, &n_inv)))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    pub fn to_complex64(&self) -> num_complex::Complex64 {
        let (re, im) = self.to_f64_pair();
        num_complex::Complex64::new(re, im)
    }

    /// Multiply-accumulate `self += a·b` without temporaries for the common
    /// purely-real and purely-imaginary cases.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        let (ar, ai) = (a.re.is_zero(), a.im.is_zero());
        let (br, bi) = (b.re.is_zero(), b.im.is_zero());
        if !ar && !br {
            self.re = radd(&self.re, &rmul(&a.re, &b.re));
        }
        if !ai && !bi {
            self.re = radd(&self.re, &-rmul(&a.im, &b.im));
        }
        if !ar && !bi {
            self.im = radd(&self.im, &rmul(&a.re, &b.im));
        }
        if !ai && !br {
            self.im = radd(&self.im, &rmul(&a.im, &b.re));
        }
    }
}

/// Lossy conversion used only by the numeric reflection code and for display.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact `p/q` string with `q ≥ 1`, e.g. `"-3/4"`, `"2/1"`.
pub fn fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, `"p"`, or a finite decimal like `"-0.25"` exactly.
pub fn parse_fraction(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n = BigInt::from_str(&digits).ok()?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    BigInt::from_str(s).ok().map(BigRational::from_integer)
}

impl From<i64> for GaussianRational {
    fn from(v: i64) -> Self {
        Self::from_ints(v, 0)
    }
}

impl From<BigRational> for GaussianRational {
    fn from(v: BigRational) -> Self {
        Self::real(v)
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(radd(&self.re, &o.re), radd(&self.im, &o.im))
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(radd(&self.re, &-o.re.clone()), radd(&self.im, &-o.im.clone()))
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        let mut out = GaussianRational::zero();
        out.add_product(self, o);
        out
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    /// Panics on division by zero; callers check with [`GaussianRational::inv`].
    fn div(self, o: &GaussianRational) -> GaussianRational {
        self * &o.inv().expect("division by zero GaussianRational")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: &GaussianRational) -> GaussianRational {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        if !o.re.is_zero() {
            self.re = radd(&self.re, &o.re);
        }
        if !o.im.is_zero() {
            self.im = radd(&self.im, &o.im);
        }
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        if !o.re.is_zero() {
            self.re = radd(&self.re, &-o.re.clone());
        }
        if !o.im.is_zero() {
            self.im = radd(&self.im, &-o.im.clone());
        }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "{} {} {}i", self.re, sign, self.im.abs())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_operations_are_exact() {
        let a = GaussianRational::from_fracs(1, 2, 1, 3);
        let b = GaussianRational::from_fracs(-2, 5, 3, 7);
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert_eq!(&(&a + &b) - &b, a);
        assert!(GaussianRational::zero().inv().is_none());
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(&i * &i, GaussianRational::from(-1));
        assert_eq!(i.conj(), -GaussianRational::i());
    }

    #[test]
    fn fraction_strings_round_trip() {
        let r = rat(-6, 8);
        assert_eq!(fraction_string(&r), "-3/4");
        assert_eq!(parse_fraction("-3/4"), Some(r));
        assert_eq!(parse_fraction("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_fraction("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_fraction("7"), Some(rat(7, 1)));
        assert_eq!(parse_fraction("1/0"), None);
    }

    #[test]
    fn display() {
        assert_eq!(GaussianRational::from_fracs(1, 2, -3, 4).to_string(), "1/2 - 3/4i");
        assert_eq!(GaussianRational::i().to_string(), "1i");
        assert_eq!(GaussianRational::from(3).to_string(), "3");
    }
}
