use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use super::intform::{limb_terms, narrow, Graded, Homog, WideAcc};
use super::{MultiIndex, SeriesRing, TruncatedSeries};
use crate::error::{Error, Result};
use crate::scalar::gcd::lcm;
use crate::scalar::wide::{gauss_mul_add, Cplx};

/// How constant terms in substituted series are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubstitutionMode {
    /// Every image must have zero constant term; composition is then exact
    /// through the target order.
    Composition,
    /// Constant terms are allowed (recentering `x ↦ x + a`). The source is
    /// expanded as the polynomial it stores, which is exact for polynomial
    /// data.
    AffineShift,
}

/// A variable assignment `source var ↦ series in target ring`, with a cache of
/// monomial images so several series can be pushed through the same map.
///
/// Source variables without an explicit image map to the target variable of
/// the same name. Those plain-variable images only shift exponents, so a
/// monomial image is the product of the nontrivial images (cached) moved by
/// the plain part.
pub struct Substitution {
    source: Arc<SeriesRing>,
    target: Arc<SeriesRing>,
    images: Vec<Image>,
    mode: SubstitutionMode,
    cache: HashMap<MultiIndex, Graded>,
}

#[derive(Clone)]
enum Image {
    Var(usize),
    Series(Graded),
    Missing,
}

impl Substitution {
    pub fn new(
        source: &Arc<SeriesRing>,
        target: &Arc<SeriesRing>,
        assignment: &[(&str, TruncatedSeries)],
        mode: SubstitutionMode,
    ) -> Result<Self> {
        let mut graded = Vec::with_capacity(assignment.len());
        for (name, image) in assignment {
            if !super::same_ring(image.ring(), target) {
                return Err(Error::RingMismatch);
            }
            graded.push((*name, Graded::from_series(image)));
        }
        Self::with_graded_images(source, target, &graded, mode)
    }

    /// Like [`Substitution::new`] with images already in graded form (and
    /// over the target ring).
    pub(crate) fn with_graded_images(
        source: &Arc<SeriesRing>,
        target: &Arc<SeriesRing>,
        assignment: &[(&str, Graded)],
        mode: SubstitutionMode,
    ) -> Result<Self> {
        let mut images: Vec<Image> = source
            .names()
            .iter()
            .map(|n| target.index_of(n).map(Image::Var).unwrap_or(Image::Missing))
            .collect();
        for (name, image) in assignment {
            let i = source.index_of(name)?;
            if mode == SubstitutionMode::Composition && !image.parts[0].is_empty() {
                return Err(Error::Contract(format!(
                    "image of `{name}` has a nonzero constant term; pass the affine-shift mode \
                     to recenter"
                )));
            }
            images[i] = Image::Series(image.truncated(target.order()));
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            images,
            mode,
            cache: HashMap::new(),
        })
    }

    pub fn target(&self) -> &Arc<SeriesRing> {
        &self.target
    }

    /// Splits `k` into its series-image part (a source index) and the
    /// target monomial contributed by plain-variable images.
    fn split(&self, k: &MultiIndex) -> Result<(MultiIndex, MultiIndex)> {
        let mut rest = MultiIndex::zero(k.len());
        let mut shift = MultiIndex::zero(self.target.nvars());
        for i in 0..k.len() {
            let e = k.get(i);
            if e == 0 {
                continue;
            }
            match &self.images[i] {
                Image::Var(j) => shift = shift.with(*j, shift.get(*j) + e),
                Image::Series(_) => rest = rest.with(i, e),
                Image::Missing => return Err(Error::UnknownVariable(self.source.names()[i].clone())),
            }
        }
        Ok((rest, shift))
    }

    /// Product of the series images for a monomial in series-image variables.
    fn series_image(&mut self, k: &MultiIndex) -> Result<()> {
        if self.cache.contains_key(k) {
            return Ok(());
        }
        let value = match (0..k.len()).rev().find(|&i| k.get(i) > 0) {
            None => {
                let one = TruncatedSeries::one(&self.target);
                Graded::from_series(&one)
            }
            Some(i) => {
                let Image::Series(image) = &self.images[i] else {
                    unreachable!("split keeps series images only")
                };
                let image = image.clone();
                let parent = k.with(i, k.get(i) - 1);
                self.series_image(&parent)?;
                self.cache[&parent].mul(&image)
            }
        };
        self.cache.insert(k.clone(), value);
        Ok(())
    }

    pub fn apply(&mut self, a: &TruncatedSeries) -> Result<TruncatedSeries> {
        Ok(self.apply_graded(a)?.to_series(&self.target))
    }

    /// [`Substitution::apply`] without the final reduction to lowest terms.
    pub(crate) fn apply_graded(&mut self, a: &TruncatedSeries) -> Result<Graded> {
        if a.ring().names() != self.source.names() {
            return Err(Error::RingMismatch);
        }
        self.apply_to_graded(&Graded::from_series(a))
    }

    /// Pushes a graded series over the source variables through the map.
    pub(crate) fn apply_to_graded(&mut self, a: &Graded) -> Result<Graded> {
        let cutoff = self.target.order();
        let mut used = Vec::new();
        let mut lc = BigInt::one();
        for (s, h) in a.parts.iter().enumerate() {
            if self.mode == SubstitutionMode::Composition && s as u32 > cutoff {
                break;
            }
            if h.is_empty() {
                continue;
            }
            lc = lcm(&lc, &h.den);
            for (k, re, im) in &h.terms {
                let (rest, shift) = self.split(k)?;
                if shift.degree() > cutoff {
                    continue;
                }
                self.series_image(&rest)?;
                used.push((rest, shift, re, im, &h.den));
            }
        }
        // Σ c_k·x^shift·M_k per output degree over lc·lcm(D)
        let mut out = Graded::zero(cutoff);
        for d in 0..=cutoff {
            let pieces: Vec<_> = used
                .iter()
                .filter(|(_, shift, ..)| shift.degree() <= d)
                .map(|(rest, shift, re, im, den)| (&self.cache[rest].parts[(d - shift.degree()) as usize], shift, *re, *im, *den))
                .filter(|(h, ..)| !h.is_empty())
                .collect();
            if pieces.is_empty() {
                continue;
            }
            let mut ld = BigInt::one();
            for (h, ..) in &pieces {
                ld = lcm(&ld, &h.den);
            }
            let mut acc = WideAcc::default();
            let mut scratch = Vec::new();
            for (h, shift, re, im, den) in pieces {
                let f = (&ld / &h.den) * (&lc / den);
                let x = Cplx::new(&(re * &f), &(im * &f));
                for (mk, y) in limb_terms(&h.terms) {
                    let slot = acc.entry(mk.plus(shift)).or_default();
                    gauss_mul_add(slot, &x, &y, &mut scratch);
                }
            }
            out.parts[d as usize] = Homog::from_acc(narrow(acc), &lc * &ld);
        }
        Ok(out)
    }
}

/// One-shot substitution; see [`Substitution`].
pub fn substitute(
    a: &TruncatedSeries,
    assignment: &[(&str, TruncatedSeries)],
    target: &Arc<SeriesRing>,
    mode: SubstitutionMode,
) -> Result<TruncatedSeries> {
    Substitution::new(a.ring(), target, assignment, mode)?.apply(a)
}

impl TruncatedSeries {
    /// See [`Substitution`]. Composition mode.
    pub fn substitute(
        &self,
        assignment: &[(&str, TruncatedSeries)],
        target: &Arc<SeriesRing>,
    ) -> Result<TruncatedSeries> {
        substitute(self, assignment, target, SubstitutionMode::Composition)
    }

    /// Expands `self` at shifted arguments `x ↦ x + shift(x)`.
    pub fn substitute_affine(
        &self,
        assignment: &[(&str, TruncatedSeries)],
        target: &Arc<SeriesRing>,
    ) -> Result<TruncatedSeries> {
        substitute(self, assignment, target, SubstitutionMode::AffineShift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational;

    fn gr(re: i64) -> GaussianRational {
        GaussianRational::from(re)
    }

    #[test]
    fn z_to_t_squared() {
        let src = SeriesRing::new(&["z"], 8).unwrap();
        let tgt = SeriesRing::new(&["t"], 8).unwrap();
        let a = TruncatedSeries::from_terms(&src, [(vec![1], gr(1)), (vec![0], gr(1))]).unwrap();
        let t2 = TruncatedSeries::from_terms(&tgt, [(vec![2], gr(1))]).unwrap();
        let got = a.substitute(&[("z", t2)], &tgt).unwrap();
        let want = TruncatedSeries::from_terms(&tgt, [(vec![2], gr(1)), (vec![0], gr(1))]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn zw_with_y_plus_y2() {
        let src = SeriesRing::new(&["z", "w"], 8).unwrap();
        let tgt = SeriesRing::new(&["y"], 8).unwrap();
        let zw = TruncatedSeries::from_terms(&src, [(vec![1, 1], gr(1))]).unwrap();
        let y = TruncatedSeries::var(&tgt, "y").unwrap();
        let z_img = &y + &(&y * &y);
        let got = zw.substitute(&[("z", z_img), ("w", y)], &tgt).unwrap();
        let want = TruncatedSeries::from_terms(&tgt, [(vec![2], gr(1)), (vec![3], gr(1))]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn constant_image_needs_affine_mode() {
        let r = SeriesRing::new(&["z"], 4).unwrap();
        let z = TruncatedSeries::var(&r, "z").unwrap();
        let shifted = &z + &TruncatedSeries::one(&r);
        assert!(matches!(
            z.pow(2).substitute(&[("z", shifted.clone())], &r),
            Err(Error::Contract(_))
        ));
        // (z+1)² = 1 + 2z + z²
        let got = z.pow(2).substitute_affine(&[("z", shifted)], &r).unwrap();
        let want =
            TruncatedSeries::from_terms(&r, [(vec![0], gr(1)), (vec![1], gr(2)), (vec![2], gr(1))]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn unmapped_variable_without_target_is_reported() {
        let src = SeriesRing::new(&["z", "w"], 4).unwrap();
        let tgt = SeriesRing::new(&["z"], 4).unwrap();
        let w = TruncatedSeries::var(&src, "w").unwrap();
        assert_eq!(w.substitute(&[], &tgt), Err(Error::UnknownVariable("w".into())));
    }
}
