//! The reflection `τ(z, T_z S_ζ) = (ζ, T_ζ S_z)` on the jet chart, in double
//! precision.
//!
//! Coordinates are those of the defining series (offsets from its base
//! point). For `p = (z, w, ξ)`, the point `(c, d)` is found from "the Segre
//! variety of `(c, d)` passes through `(z, w)` with slope `ξ`":
//!
//! ```text
//! ρ(z, w, c̄, d̄) = 0,    ρ_{z_j}(z, w, c̄, d̄) + ξ_j ρ_w(z, w, c̄, d̄) = 0,
//! ```
//!
//! and `τ(p) = (c, d, ξ')` with `ξ' = −ρ_z/ρ_w` at `(c, d, z̄, w̄)`, the slope
//! of `S_{(z,w)}` at `(c, d)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypersurface::{z_name, zeta_name, Hypersurface, OMEGA, W};
use crate::pde::JetPoint;
use crate::series::linalg;
use crate::series::TruncatedSeries;

pub type NumericJetPoint = JetPoint<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionConfig {
    /// Residual target for the root and threshold for every deviation.
    pub tol: f64,
    pub max_iter: usize,
    /// Sampling radius around the chart center.
    pub radius: f64,
}

impl Default for ReflectionConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            radius: 0.25,
        }
    }
}

#[derive(Clone, Debug)]
struct Poly {
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl Poly {
    fn from_series(s: &TruncatedSeries) -> Self {
        Self {
            terms: s.terms().map(|(k, c)| (k.exponents(), c.to_complex64())).collect(),
        }
    }

    fn eval(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powu(k);
                }
            }
            acc += t;
        }
        acc
    }
}

/// Numeric form of a polynomial hypersurface, with the derivatives the
/// incidence system needs.
#[derive(Clone, Debug)]
pub struct Reflector {
    n: usize,
    rho: Poly,
    rho_z: Vec<Poly>,
    rho_w: Poly,
    /// `∂/∂ζ_k` and `∂/∂ω` of `ρ`, `ρ_{z_j}` and `ρ_w`.
    d_rho: Vec<Poly>,
    d_rho_z: Vec<Vec<Poly>>,
    d_rho_w: Vec<Poly>,
    /// Quadric model used for the seed: linear part and Levi block.
    lin_z: Vec<Complex64>,
    lin_w: Complex64,
    levi: DMatrix<Complex64>,
    levi_inv: DMatrix<Complex64>,
}

/// One evaluation of `τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionResult {
    pub input: NumericJetPoint,
    pub output: NumericJetPoint,
    /// Max-norm of the incidence system at the root.
    pub residual: f64,
    pub iterations: usize,
}

fn conj_vars(n: usize) -> Vec<String> {
    (0..n).map(zeta_name).chain([OMEGA.to_string()]).collect()
}

impl Reflector {
    pub fn new(m: &Hypersurface) -> Result<Self> {
        let n = m.n();
        let rho = m.rho();
        let cv = conj_vars(n);
        let d = |s: &TruncatedSeries| -> Result<Vec<Poly>> {
            cv.iter().map(|v| Ok(Poly::from_series(&s.differentiate(v)?))).collect()
        };
        let rw = rho.differentiate(W)?;
        let mut rho_z = Vec::new();
        let mut d_rho_z = Vec::new();
        for j in 0..n {
            let rz = rho.differentiate(&z_name(j))?;
            d_rho_z.push(d(&rz)?);
            rho_z.push(Poly::from_series(&rz));
        }
        let unit = |i: usize| {
            let mut e = vec![0u32; 2 * n + 2];
            e[i] = 1;
            e
        };
        let lin_z = (0..n).map(|j| rho.coeff_of(&unit(j)).to_complex64()).collect();
        let lin_w = rho.coeff_of(&unit(n)).to_complex64();
        if lin_w == Complex64::new(0.0, 0.0) {
            return Err(Error::BadCoordinates("ρ_w vanishes at the base point".into()));
        }
        let levi_exact = m.levi_form();
        if linalg::determinant(&levi_exact) == crate::GaussianRational::from(0) {
            return Err(Error::LeviDegenerate {
                determinant: crate::GaussianRational::from(0),
            });
        }
        let levi = DMatrix::from_fn(n, n, |j, k| levi_exact[j][k].to_complex64());
        let levi_inv = levi
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateConfiguration("Levi block is numerically singular".into()))?;
        Ok(Self {
            n,
            d_rho: d(rho)?,
            d_rho_w: d(&rw)?,
            rho: Poly::from_series(rho),
            rho_w: Poly::from_series(&rw),
            rho_z,
            d_rho_z,
            lin_z,
            lin_w,
            levi,
            levi_inv,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn point(z: &[Complex64], w: Complex64, zeta: &[Complex64], omega: Complex64) -> Vec<Complex64> {
        let mut x = z.to_vec();
        x.push(w);
        x.extend_from_slice(zeta);
        x.push(omega);
        x
    }

    fn system(&self, p: &NumericJetPoint, unknown: &[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>) {
        let n = self.n;
        let x = Self::point(&p.z, p.w, &unknown[..n], unknown[n]);
        let rw = self.rho_w.eval(&x);
        let mut f = DVector::zeros(n + 1);
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        f[0] = self.rho.eval(&x);
        let drw: Vec<Complex64> = self.d_rho_w.iter().map(|q| q.eval(&x)).collect();
        for c in 0..=n {
            jac[(0, c)] = self.d_rho[c].eval(&x);
        }
        for j in 0..n {
            f[j + 1] = self.rho_z[j].eval(&x) + p.xi[j] * rw;
            for c in 0..=n {
                jac[(j + 1, c)] = self.d_rho_z[j][c].eval(&x) + p.xi[j] * drw[c];
            }
        }
        (f, jac)
    }

    /// Root of the quadric model `ℓ + ℓ̄ + Q(z, ζ)` of the incidence system.
    fn seed(&self, p: &NumericJetPoint) -> Vec<Complex64> {
        let n = self.n;
        let rhs = DVector::from_fn(n, |j, _| -(self.lin_z[j] + self.lin_w * p.xi[j]));
        let alpha = &self.levi_inv * rhs;
        let zq = DVector::from_row_slice(&p.z).transpose() * &self.levi * &alpha;
        let mut s = self.lin_w * p.w + zq[(0, 0)];
        for j in 0..n {
            s += self.lin_z[j] * p.z[j] + self.lin_z[j].conj() * alpha[j];
        }
        let beta = -s / self.lin_w.conj();
        alpha.iter().copied().chain([beta]).collect()
    }

    /// `−ρ_z/ρ_w` at a point of `C^{2n+2}`.
    fn slope(&self, x: &[Complex64]) -> Vec<Complex64> {
        let rw = self.rho_w.eval(x);
        self.rho_z.iter().map(|q| -q.eval(x) / rw).collect()
    }

    pub fn reflect(&self, p: &NumericJetPoint, cfg: &ReflectionConfig) -> Result<ReflectionResult> {
        let n = self.n;
        let mut x = self.seed(p);
        let norm = |v: &DVector<Complex64>| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let (mut f, mut jac) = self.system(p, &x);
        let mut iterations = 0;
        while iterations < cfg.max_iter {
            if norm(&f) == 0.0 {
                break;
            }
            iterations += 1;
            let step = jac
                .clone()
                .lu()
                .solve(&(-&f))
                .ok_or_else(|| Error::DegenerateConfiguration("singular Newton step".into()))?;
            let f2 = f.norm_squared();
            let mut lambda = 1.0;
            let (mut trial, mut nf, mut nj);
            loop {
                trial = x.iter().zip(step.iter()).map(|(a, b)| a + b * lambda).collect::<Vec<_>>();
                (nf, nj) = self.system(p, &trial);
                if nf.norm_squared() <= (1.0 - 1e-4 * lambda) * f2 || lambda < 1e-6 {
                    break;
                }
                lambda *= 0.5;
            }
            let moved = norm(&step) * lambda;
            let scale = 1.0 + x.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if nf.norm_squared() > f2 {
                // no further progress possible at this precision
                break;
            }
            x = trial;
            f = nf;
            jac = nj;
            if moved <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        let residual = norm(&f);
        if !(residual <= cfg.tol) {
            return Err(Error::Convergence { iterations, residual });
        }
        let c: Vec<Complex64> = x[..n].iter().map(|a| a.conj()).collect();
        let d = x[n].conj();
        let zc: Vec<Complex64> = p.z.iter().map(|a| a.conj()).collect();
        let xi = self.slope(&Self::point(&c, d, &zc, p.w.conj()));
        Ok(ReflectionResult {
            input: p.clone(),
            output: JetPoint { z: c, w: d, xi },
            residual,
            iterations,
        })
    }

    /// `(Z, −ρ_z/ρ_w(Z, Z̄))` with `Z = (z, u + iv)` on `M`, `v` by Newton.
    pub fn lift_to_mj(&self, z: &[Complex64], u: f64, cfg: &ReflectionConfig) -> Result<NumericJetPoint> {
        let i = Complex64::new(0.0, 1.0);
        let zc: Vec<Complex64> = z.iter().map(|a| a.conj()).collect();
        let at = |v: f64| Self::point(z, Complex64::new(u, v), &zc, Complex64::new(u, -v));
        let mut v = 0.0;
        let mut g = 0.0;
        for _ in 0..cfg.max_iter.max(1) {
            let x = at(v);
            g = self.rho.eval(&x).re;
            let dg = (i * self.rho_w.eval(&x) - i * self.d_rho[self.n].eval(&x)).re;
            if dg == 0.0 {
                return Err(Error::DegenerateConfiguration("ρ does not depend on Im w here".into()));
            }
            let step = g / dg;
            v -= step;
            if step.abs() <= 4.0 * f64::EPSILON * (1.0 + v.abs()) {
                break;
            }
        }
        let x = at(v);
        g = g.abs().max(self.rho.eval(&x).norm());
        if !(g <= cfg.tol) {
            return Err(Error::Convergence {
                iterations: cfg.max_iter,
                residual: g,
            });
        }
        Ok(JetPoint {
            z: z.to_vec(),
            w: Complex64::new(u, v),
            xi: self.slope(&x),
        })
    }

    /// `(0, 0, ξ₀)`: the 1-jet of the base point's Segre variety.
    pub fn center(&self) -> NumericJetPoint {
        let o = Complex64::new(0.0, 0.0);
        let zero = vec![o; self.n];
        JetPoint {
            xi: self.slope(&Self::point(&zero, o, &zero, o)),
            z: zero,
            w: o,
        }
    }
}

/// `((i/2)ξ̄, w̄ − z̄·ξ̄, 2iz̄)`, the reflection of `Im w = |z|²`.
pub fn hyperquadric_tau(p: &NumericJetPoint) -> NumericJetPoint {
    let i = Complex64::new(0.0, 1.0);
    let mut w = p.w.conj();
    for (z, xi) in p.z.iter().zip(&p.xi) {
        w -= z.conj() * xi.conj();
    }
    JetPoint {
        z: p.xi.iter().map(|x| i * 0.5 * x.conj()).collect(),
        w,
        xi: p.z.iter().map(|z| i * 2.0 * z.conj()).collect(),
    }
}

/// Max-norm distance between jet points.
pub fn jet_distance(a: &NumericJetPoint, b: &NumericJetPoint) -> f64 {
    a.z.iter()
        .zip(&b.z)
        .chain(a.xi.iter().zip(&b.xi))
        .chain([(&a.w, &b.w)])
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Convenience wrapper around [`Reflector::reflect`].
pub fn reflect(m: &Hypersurface, p: &NumericJetPoint, cfg: &ReflectionConfig) -> Result<ReflectionResult> {
    Reflector::new(m)?.reflect(p, cfg)
}

pub const WIRTINGER_STEP: f64 = 1e-5;
pub const ANTIHOLOMORPHY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome {
    pub point: NumericJetPoint,
    pub on_mj: bool,
    /// `‖τ(τ(p)) − p‖`.
    pub involution: f64,
    /// `‖τ(p) − p‖` for points of `M_J`.
    pub fixed: Option<f64>,
    /// Largest holomorphic Wirtinger derivative of `τ` at `p`.
    pub holomorphic_part: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvolutionReport {
    pub samples: usize,
    pub outcomes: Vec<SampleOutcome>,
    /// Samples where a root could not be found, with the error.
    pub failures: Vec<(NumericJetPoint, String)>,
    pub tol: f64,
    pub max_involution: f64,
    pub max_fixed: f64,
    pub max_holomorphic_part: f64,
}

impl InvolutionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.max_involution < self.tol
            && self.max_fixed < self.tol
            && self.max_holomorphic_part < ANTIHOLOMORPHY_TOL
    }
}

fn random_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    loop {
        let x = rng.gen_range(-r..=r);
        let y = rng.gen_range(-r..=r);
        if x * x + y * y <= r * r {
            return Complex64::new(x, y);
        }
    }
}

/// `max_k |∂τ/∂p_k|` by central differences, `∂ = (∂_x − i∂_y)/2`.
fn holomorphic_part(r: &Reflector, p: &NumericJetPoint, cfg: &ReflectionConfig) -> Result<f64> {
    let n = r.n();
    let h = WIRTINGER_STEP;
    let flat = |q: &NumericJetPoint| -> Vec<Complex64> { q.z.iter().copied().chain([q.w]).chain(q.xi.iter().copied()).collect() };
    let unflat = |v: &[Complex64]| JetPoint {
        z: v[..n].to_vec(),
        w: v[n],
        xi: v[n + 1..].to_vec(),
    };
    let base = flat(p);
    let tau_at = |k: usize, delta: Complex64| -> Result<Vec<Complex64>> {
        let mut v = base.clone();
        v[k] += delta;
        Ok(flat(&r.reflect(&unflat(&v), cfg)?.output))
    };
    let mut worst: f64 = 0.0;
    for k in 0..base.len() {
        let re = Complex64::new(h, 0.0);
        let im = Complex64::new(0.0, h);
        let (xp, xm, yp, ym) = (tau_at(k, re)?, tau_at(k, -re)?, tau_at(k, im)?, tau_at(k, -im)?);
        for c in 0..base.len() {
            let dx = (xp[c] - xm[c]) / (2.0 * h);
            let dy = (yp[c] - ym[c]) / (2.0 * h);
            let d = (dx - Complex64::new(0.0, 1.0) * dy) * 0.5;
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

/// Samples alternate between points of `M_J` (even indices) and generic
/// points of the chart (odd indices), all within `cfg.radius` of the center
/// in each coordinate. Root-finding failures are counted, not fatal.
pub fn involution_check(m: &Hypersurface, samples: usize, seed: u64, cfg: &ReflectionConfig) -> Result<InvolutionReport> {
    let r = Reflector::new(m)?;
    let n = r.n();
    let center = r.center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for s in 0..samples {
        let on_mj = s % 2 == 0;
        let point = if on_mj {
            let z: Vec<Complex64> = (0..n).map(|_| random_disc(&mut rng, cfg.radius)).collect();
            let u = rng.gen_range(-cfg.radius..=cfg.radius);
            match r.lift_to_mj(&z, u, cfg) {
                Ok(p) => p,
                Err(e) => {
                    failures.push((
                        JetPoint {
                            z,
                            w: Complex64::new(u, 0.0),
                            xi: center.xi.clone(),
                        },
                        e.to_string(),
                    ));
                    continue;
                }
            }
        } else {
            JetPoint {
                z: (0..n).map(|_| random_disc(&mut rng, cfg.radius)).collect(),
                w: random_disc(&mut rng, cfg.radius),
                xi: center.xi.iter().map(|x| x + random_disc(&mut rng, cfg.radius)).collect(),
            }
        };
        let run = || -> Result<SampleOutcome> {
            let once = r.reflect(&point, cfg)?;
            let twice = r.reflect(&once.output, cfg)?;
            let holo = if on_mj { None } else { Some(holomorphic_part(&r, &point, cfg)?) };
            Ok(SampleOutcome {
                involution: jet_distance(&twice.output, &point),
                fixed: on_mj.then(|| jet_distance(&once.output, &point)),
                holomorphic_part: holo,
                point: point.clone(),
                on_mj,
            })
        };
        match run() {
            Ok(o) => outcomes.push(o),
            Err(e) => failures.push((point.clone(), e.to_string())),
        }
    }
    let max_of = |f: &dyn Fn(&SampleOutcome) -> Option<f64>| outcomes.iter().filter_map(f).fold(0.0, f64::max);
    Ok(InvolutionReport {
        samples,
        max_involution: max_of(&|o| Some(o.involution)),
        max_fixed: max_of(&|o| o.fixed),
        max_holomorphic_part: max_of(&|o| o.holomorphic_part),
        outcomes,
        failures,
        tol: cfg.tol,
    })
}
