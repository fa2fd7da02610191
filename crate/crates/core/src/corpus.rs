//! Seeded random polynomial hypersurfaces and exact points on them, for
//! property tests and the acceptance runs.
//!
//! Surfaces have the shape `ρ = (i/2)(w − ω) + φ(z, ζ, (w + ω)/2)` with `φ`
//! real, so `ρ(z, u + iv, z̄, u − iv) = −v + φ(z, z̄, u)` and points on `M`
//! are exact for rational `z`, `u`.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::hypersurface::{conj_swap, hypersurface_ring, Hypersurface, Point};
use crate::scalar::GaussianRational;
use crate::series::linalg;
use crate::series::{MultiIndex, SeriesRing, TruncatedSeries};

/// Numerators and denominators of random coefficients stay within this bound.
pub const COEFF_BOUND: i64 = 10;

#[derive(Clone, Copy, Debug)]
pub struct SurfaceSpec {
    pub n: usize,
    pub order: u32,
    /// Highest total degree of a term of `φ`.
    pub max_degree: u32,
    /// Number of random real terms added on top of the Levi block.
    pub extra_terms: usize,
    /// Allow a random linear `z` part (moves the chart center off `ξ = 0`).
    pub linear_part: bool,
}

impl SurfaceSpec {
    pub fn new(n: usize, order: u32) -> Self {
        Self {
            n,
            order,
            max_degree: 4,
            extra_terms: 3,
            linear_part: true,
        }
    }
}

pub fn random_rational<R: Rng>(rng: &mut R, bound: i64) -> BigRational {
    let num = rng.gen_range(-bound..=bound);
    let den = rng.gen_range(1..=bound);
    BigRational::new(num.into(), den.into())
}

fn nonzero_rational<R: Rng>(rng: &mut R, bound: i64) -> BigRational {
    loop {
        let r = random_rational(rng, bound);
        if r != BigRational::from_integer(0.into()) {
            return r;
        }
    }
}

pub fn random_gaussian<R: Rng>(rng: &mut R, bound: i64) -> GaussianRational {
    GaussianRational::new(random_rational(rng, bound), random_rational(rng, bound))
}

/// Exponents `(α in z, s in u, β in ζ)` with `2 ≤ |α| + s + |β| ≤ max_degree`.
fn random_exponents<R: Rng>(rng: &mut R, n: usize, max_degree: u32) -> (Vec<u32>, u32, Vec<u32>) {
    let d = rng.gen_range(2..=max_degree);
    let mut a = vec![0u32; n];
    let mut b = vec![0u32; n];
    let mut s = 0;
    for _ in 0..d {
        match rng.gen_range(0..(2 * n + 1)) {
            k if k < n => a[k] += 1,
            k if k < 2 * n => b[k - n] += 1,
            _ => s += 1,
        }
    }
    (a, s, b)
}

/// Adds `c·z^α ζ^β u^s + c̄·z^β ζ^α u^s` with `u = (w + ω)/2`.
fn add_real_term(
    rho: &mut TruncatedSeries,
    n: usize,
    c: &GaussianRational,
    alpha: &[u32],
    s: u32,
    beta: &[u32],
) {
    let ring = rho.ring().clone();
    let u = &TruncatedSeries::var(&ring, "w").unwrap() + &TruncatedSeries::var(&ring, "omega").unwrap();
    let u = u.scale(&GaussianRational::from_fracs(1, 2, 0, 1)).pow(s);
    let mono = |x: &[u32], y: &[u32], c: GaussianRational| {
        let mut e = vec![0u32; 2 * n + 2];
        e[..n].copy_from_slice(x);
        e[n + 1..2 * n + 1].copy_from_slice(y);
        TruncatedSeries::from_terms(&ring, [(e, c)]).unwrap()
    };
    let t = &mono(alpha, beta, c.clone()) + &mono(beta, alpha, c.conj());
    *rho = &*rho + &(&t * &u);
}

fn quadric_part<R: Rng>(rng: &mut R, spec: &SurfaceSpec) -> TruncatedSeries {
    let n = spec.n;
    let ring = hypersurface_ring(n, spec.order).unwrap();
    let mut e = vec![0u32; 2 * n + 2];
    e[n] = 1;
    let mut rho = TruncatedSeries::monomial(&ring, MultiIndex::new(&e), GaussianRational::from_fracs(0, 1, 1, 2));
    rho = &rho + &conj_swap(&rho, n);
    for j in 0..n {
        let mut e = vec![0u32; 2 * n + 2];
        e[j] = 1;
        e[n + 1 + j] = 1;
        let q = GaussianRational::real(nonzero_rational(rng, COEFF_BOUND));
        rho = &rho + &TruncatedSeries::from_terms(&ring, [(e, q)]).unwrap();
    }
    rho
}

/// Random surface, Levi-nondegenerate at the origin.
pub fn random_surface<R: Rng>(rng: &mut R, spec: &SurfaceSpec) -> Hypersurface {
    let n = spec.n;
    loop {
        let mut rho = quadric_part(rng, spec);
        if spec.linear_part && rng.gen_bool(0.5) {
            let j = rng.gen_range(0..n);
            let mut a = vec![0u32; n];
            a[j] = 1;
            add_real_term(&mut rho, n, &random_gaussian(rng, COEFF_BOUND), &a, 0, &vec![0; n]);
        }
        for _ in 0..spec.extra_terms {
            let (a, s, b) = random_exponents(rng, n, spec.max_degree);
            let mut c = random_gaussian(rng, COEFF_BOUND);
            if a == b {
                c = GaussianRational::real(c.re);
            }
            add_real_term(&mut rho, n, &c, &a, s, &b);
        }
        let Ok(m) = Hypersurface::new(n, rho) else { continue };
        if !linalg::determinant(&m.levi_form()).is_zero() {
            return m;
        }
    }
}

/// Random strictly pseudoconvex (or pseudoconcave, when `negative`) surface
/// with a random linear part, rotated `w`, and pure quadratic terms: the
/// input shape for the normalization.
pub fn random_definite_surface<R: Rng>(rng: &mut R, spec: &SurfaceSpec, negative: bool) -> Hypersurface {
    let n = spec.n;
    let ring = hypersurface_ring(n, spec.order).unwrap();
    loop {
        let mut rho = TruncatedSeries::zero(&ring);
        // ℓ + ℓ̄ with ℓ = b·z + c·w, c ≠ 0
        let mut e = vec![0u32; 2 * n + 2];
        e[n] = 1;
        let c = loop {
            let c = random_gaussian(rng, COEFF_BOUND);
            if !c.is_zero() {
                break c;
            }
        };
        let mut lin = TruncatedSeries::from_terms(&ring, [(e, c)]).unwrap();
        for j in 0..n {
            let mut e = vec![0u32; 2 * n + 2];
            e[j] = 1;
            lin = &lin + &TruncatedSeries::from_terms(&ring, [(e, random_gaussian(rng, COEFF_BOUND))]).unwrap();
        }
        rho = &rho + &(&lin + &conj_swap(&lin, n));
        // Q = diagonal dominant Hermitian
        let sign = if negative { -1 } else { 1 };
        for j in 0..n {
            let mut e = vec![0u32; 2 * n + 2];
            e[j] = 1;
            e[n + 1 + j] = 1;
            let q = GaussianRational::from(sign * rng.gen_range(n as i64 + 1..=COEFF_BOUND));
            rho = &rho + &TruncatedSeries::from_terms(&ring, [(e, q)]).unwrap();
            for k in 0..j {
                let mut a = vec![0u32; n];
                let mut b = vec![0u32; n];
                a[j] = 1;
                b[k] = 1;
                let off = GaussianRational::new(
                    BigRational::new(rng.gen_range(-1..=1i64).into(), 2.into()),
                    BigRational::new(rng.gen_range(-1..=1i64).into(), 2.into()),
                );
                add_real_term(&mut rho, n, &off, &a, 0, &b);
            }
        }
        // pure (anti)holomorphic quadratic terms in (z, w)
        for _ in 0..2 {
            let mut a = vec![0u32; n + 1];
            for _ in 0..2 {
                a[rng.gen_range(0..=n)] += 1;
            }
            let mut e = vec![0u32; 2 * n + 2];
            e[..n + 1].copy_from_slice(&a);
            let t = TruncatedSeries::from_terms(&ring, [(e, random_gaussian(rng, COEFF_BOUND))]).unwrap();
            rho = &rho + &(&t + &conj_swap(&t, n));
        }
        for _ in 0..spec.extra_terms {
            let (a, s, b) = random_exponents(rng, n, spec.max_degree.max(3));
            if a.iter().sum::<u32>() + s + b.iter().sum::<u32>() < 3 {
                continue;
            }
            let mut c = random_gaussian(rng, COEFF_BOUND);
            if a == b {
                c = GaussianRational::real(c.re);
            }
            add_real_term(&mut rho, n, &c, &a, s, &b);
        }
        if let Ok(m) = Hypersurface::new(n, rho) {
            return m;
        }
    }
}

/// `Σ|z_j|² + (i/2)(w − ω)` plus random real quartic terms with
/// coefficients of modulus at most `bound`.
pub fn quadric_plus_quartic<R: Rng>(rng: &mut R, n: usize, order: u32, terms: usize, bound: &BigRational) -> Hypersurface {
    let ring = hypersurface_ring(n, order).unwrap();
    let mut e = vec![0u32; 2 * n + 2];
    e[n] = 1;
    let half_i = TruncatedSeries::from_terms(&ring, [(e, GaussianRational::from_fracs(0, 1, 1, 2))]).unwrap();
    let mut rho = &half_i + &conj_swap(&half_i, n);
    for j in 0..n {
        let mut e = vec![0u32; 2 * n + 2];
        e[j] = 1;
        e[n + 1 + j] = 1;
        rho = &rho + &TruncatedSeries::from_terms(&ring, [(e, GaussianRational::from(1))]).unwrap();
    }
    let mut added = 0;
    while added < terms {
        let (a, s, b) = random_exponents(rng, n, 4);
        if a.iter().sum::<u32>() + s + b.iter().sum::<u32>() != 4 {
            continue;
        }
        // |c| ≤ bound via |re|, |im| ≤ bound/2
        let scale = |r: BigRational| r * bound.clone() / BigRational::from_integer((2 * COEFF_BOUND).into());
        let mut c = GaussianRational::new(scale(random_rational(rng, COEFF_BOUND)), scale(random_rational(rng, COEFF_BOUND)));
        if a == b {
            c = GaussianRational::real(c.re);
        }
        add_real_term(&mut rho, n, &c, &a, s, &b);
        added += 1;
    }
    Hypersurface::new(n, rho).expect("quadric plus quartic is a valid germ")
}

/// Random polynomial with up to `terms` monomials of degree `≤ max_degree`.
pub fn random_series<R: Rng>(rng: &mut R, ring: &Arc<SeriesRing>, terms: usize, max_degree: u32) -> TruncatedSeries {
    let nv = ring.nvars();
    let top = max_degree.min(ring.order());
    let mut out = TruncatedSeries::zero(ring);
    for _ in 0..terms {
        let mut e = vec![0u32; nv];
        for _ in 0..rng.gen_range(0..=top) {
            e[rng.gen_range(0..nv)] += 1;
        }
        let t = TruncatedSeries::monomial(ring, MultiIndex::new(&e), random_gaussian(rng, COEFF_BOUND));
        out = &out + &t;
    }
    out
}

/// A random system `F(x, y) = 0` over `x1..x{params}, y1..y{unknowns}` with
/// `F(0, 0) = 0` and `∂F/∂y (0)` invertible, so `y(x)` exists and is unique.
pub fn random_implicit_system<R: Rng>(
    rng: &mut R,
    params: usize,
    unknowns: usize,
    order: u32,
) -> (Arc<SeriesRing>, Vec<TruncatedSeries>) {
    let names: Vec<String> = (1..=params)
        .map(|i| format!("x{i}"))
        .chain((1..=unknowns).map(|i| format!("y{i}")))
        .collect();
    let ring = SeriesRing::new(&names, order).unwrap();
    loop {
        let mut jac = vec![vec![GaussianRational::from(0); unknowns]; unknowns];
        let system: Vec<TruncatedSeries> = (0..unknowns)
            .map(|i| {
                let mut f = random_series(rng, &ring, 4, 3);
                f = &f - &TruncatedSeries::constant(&ring, f.constant_term());
                for (j, slot) in jac[i].iter_mut().enumerate() {
                    *slot = f.coeff(&MultiIndex::unit(ring.nvars(), params + j));
                }
                f
            })
            .collect();
        if !linalg::determinant(&jac).is_zero() {
            return (ring, system);
        }
        // add a diagonal nudge and retry on the next round if still singular
        let nudged: Vec<TruncatedSeries> = system
            .iter()
            .enumerate()
            .map(|(i, f)| &TruncatedSeries::monomial(&ring, MultiIndex::unit(ring.nvars(), params + i), GaussianRational::from(1)) + f)
            .collect();
        for (i, f) in nudged.iter().enumerate() {
            for (j, slot) in jac[i].iter_mut().enumerate() {
                *slot = f.coeff(&MultiIndex::unit(ring.nvars(), params + j));
            }
        }
        if !linalg::determinant(&jac).is_zero() {
            return (ring, nudged);
        }
    }
}

/// Exact point of `M` over random small rational `z` and `Re w`.
pub fn random_point<R: Rng>(rng: &mut R, m: &Hypersurface) -> Point {
    let n = m.n();
    let small = |rng: &mut R| {
        let num = rng.gen_range(-COEFF_BOUND / 2..=COEFF_BOUND / 2);
        let den = rng.gen_range(COEFF_BOUND / 2..=COEFF_BOUND);
        BigRational::new(num.into(), den.into())
    };
    let z = (0..n).map(|_| GaussianRational::new(small(rng), small(rng))).collect();
    let u = small(rng);
    m.point_on(z, u).expect("corpus surfaces are affine in Im w")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn surfaces_are_valid_and_points_lie_on_them() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let m = random_surface(&mut rng, &SurfaceSpec::new(n, 6));
            for _ in 0..3 {
                let q = random_point(&mut rng, &m);
                assert!(m.residual_at(&q).unwrap().is_zero());
            }
            let d = random_definite_surface(&mut rng, &SurfaceSpec::new(n, 5), n == 2);
            assert!(d.normalize_to_quadric().is_ok());
        }
    }
}
