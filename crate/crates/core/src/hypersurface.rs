//! Real-analytic hypersurface germs `ρ(Z, Z̄) = 0` and their complexification.
//!
//! The conjugate coordinates `ζ = z̄`, `ω = w̄` are independent ring
//! variables. The ring variable order is fixed: `z1..zn, w, zeta1..zetan,
//! omega`. A series is *real* when swapping the `(z, w)` and `(ζ, ω)`
//! exponent blocks and conjugating every coefficient gives it back.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;
use crate::series::linalg::{self, Matrix};
use crate::series::{implicit_solve, MultiIndex, SeriesRing, TruncatedSeries};

pub const DEFAULT_ORDER: u32 = 8;

pub fn z_name(j: usize) -> String {
    format!("z{}", j + 1)
}

pub fn zeta_name(j: usize) -> String {
    format!("zeta{}", j + 1)
}

pub fn xi_name(j: usize) -> String {
    format!("xi{}", j + 1)
}

pub const W: &str = "w";
pub const OMEGA: &str = "omega";

/// `z1..zn, w, zeta1..zetan, omega`.
pub fn hypersurface_variables(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..n).map(z_name).collect();
    v.push(W.into());
    v.extend((0..n).map(zeta_name));
    v.push(OMEGA.into());
    v
}

pub fn hypersurface_ring(n: usize, order: u32) -> Result<Arc<SeriesRing>> {
    if n == 0 {
        return Err(Error::InvalidRing("n must be positive".into()));
    }
    SeriesRing::new(&hypersurface_variables(n), order)
}

/// `z1..zn, w`.
pub fn holomorphic_variables(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..n).map(z_name).collect();
    v.push(W.into());
    v
}

/// Swaps the `(z, w)` and `(ζ, ω)` blocks and conjugates coefficients.
pub fn conj_swap(s: &TruncatedSeries, n: usize) -> TruncatedSeries {
    let half = n + 1;
    let perm: Vec<usize> = (0..2 * half).map(|i| if i < half { i + half } else { i - half }).collect();
    s.conjugate_permuted(&perm)
}

fn describe(idx: &MultiIndex, names: &[String]) -> String {
    let parts: Vec<String> = idx
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Checks the reality invariant, naming the first offending coefficient pair.
pub fn check_reality(s: &TruncatedSeries, n: usize) -> Result<()> {
    let swapped = conj_swap(s, n);
    if swapped == *s {
        return Ok(());
    }
    let half = n + 1;
    let names = s.ring().names().to_vec();
    let mut keys: Vec<&MultiIndex> = s.terms().map(|(k, _)| k).collect();
    keys.extend(swapped.terms().map(|(k, _)| k));
    for k in keys {
        let e = k.exponents();
        let mirrored: Vec<u32> = (0..2 * half).map(|i| e[(i + half) % (2 * half)]).collect();
        let m = MultiIndex::new(&mirrored);
        let a = s.coeff(k);
        let b = s.coeff(&m);
        if a != b.conj() {
            return Err(Error::Reality {
                first: describe(k, &names),
                first_value: a,
                second: describe(&m, &names),
                second_value: b,
            });
        }
    }
    unreachable!("conj_swap differs but no offending pair found")
}

/// A point `(z, w)` of `C^{n+1}` with exact coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub z: Vec<GaussianRational>,
    pub w: GaussianRational,
}

impl Point {
    pub fn origin(n: usize) -> Self {
        Self {
            z: vec![GaussianRational::zero(); n],
            w: GaussianRational::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `(z, w, z̄, w̄)` in hypersurface-ring order.
    pub fn complexified(&self) -> Vec<GaussianRational> {
        let mut v = self.z.clone();
        v.push(self.w.clone());
        v.extend(self.z.iter().map(|c| c.conj()));
        v.push(self.w.conj());
        v
    }

    fn minus(&self, other: &Point) -> Point {
        Point {
            z: self.z.iter().zip(&other.z).map(|(a, b)| a - b).collect(),
            w: &self.w - &other.w,
        }
    }
}

/// A real-analytic hypersurface germ at `base_point`. `rho` is expanded
/// around the base point: its variables are offsets from it.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypersurface {
    n: usize,
    rho: TruncatedSeries,
    base_point: Point,
}

/// The complex defining equation `w = θ(z, ζ, ω)` in the ring
/// `z1..zn, zeta1..zetan, omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexDefiner {
    pub n: usize,
    pub theta: TruncatedSeries,
}

impl Hypersurface {
    /// Germ at the origin. `rho` must live in [`hypersurface_ring`], vanish
    /// at the origin, be real, and have `dρ(0) ≠ 0`.
    pub fn new(n: usize, rho: TruncatedSeries) -> Result<Self> {
        Self::with_base_point(n, rho, Point::origin(n))
    }

    /// Same as [`Hypersurface::new`], with `rho` already expanded around `base_point`.
    pub fn with_base_point(n: usize, rho: TruncatedSeries, base_point: Point) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRing("n must be positive".into()));
        }
        if rho.ring().names() != hypersurface_variables(n).as_slice() {
            return Err(Error::Contract(format!(
                "defining series must use the variables {:?}",
                hypersurface_variables(n)
            )));
        }
        if base_point.n() != n {
            return Err(Error::Contract("base point has the wrong dimension".into()));
        }
        let c0 = rho.constant_term();
        if !c0.is_zero() {
            return Err(Error::NotOnSurface { residual: c0 });
        }
        check_reality(&rho, n)?;
        let has_linear = rho.terms_of_degree(1).next().is_some();
        if !has_linear {
            return Err(Error::BadCoordinates("dρ vanishes at the base point".into()));
        }
        Ok(Self { n, rho, base_point })
    }

    /// Ingests `Im w − φ(z, z̄, Re w)` (as a series) and returns the germ with
    /// `ρ = φ + (i/2)(w − ω)`.
    pub fn from_graph_form(n: usize, graph: &TruncatedSeries) -> Result<Self> {
        check_reality(graph, n)?;
        let rho = -graph;
        let ring = graph.ring().clone();
        let half_i = TruncatedSeries::constant(&ring, GaussianRational::from_fracs(0, 1, 1, 2));
        let im_part = &half_i * &(&TruncatedSeries::var(&ring, W)? - &TruncatedSeries::var(&ring, OMEGA)?);
        let phi = &rho - &im_part;
        // φ depends on w only through Re w  ⇔  ∂φ/∂w = ∂φ/∂ω
        if phi.differentiate(W)? != phi.differentiate(OMEGA)? {
            return Err(Error::Contract(
                "not in graph form Im w − φ(z, z̄, Re w): φ depends on Im w".into(),
            ));
        }
        Self::new(n, rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &TruncatedSeries {
        &self.rho
    }

    pub fn base_point(&self) -> &Point {
        &self.base_point
    }

    pub fn order(&self) -> u32 {
        self.rho.order()
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.rho.ring()
    }

    /// Same germ with a lower truncation order.
    pub fn truncated(&self, order: u32) -> Result<Self> {
        Ok(Self {
            n: self.n,
            rho: self.rho.truncate(order)?,
            base_point: self.base_point.clone(),
        })
    }

    /// `∂ρ/∂w` at the base point.
    pub fn rho_w0(&self) -> GaussianRational {
        let mut e = vec![0u32; 2 * self.n + 2];
        e[self.n] = 1;
        self.rho.coeff_of(&e)
    }

    /// `ρ(q, q̄)` for an absolute point `q`.
    pub fn residual_at(&self, q: &Point) -> Result<GaussianRational> {
        self.rho.eval(&q.minus(&self.base_point).complexified())
    }

    /// The same germ expanded around `q`; `q` must lie on the hypersurface.
    pub fn recentered(&self, q: &Point) -> Result<Hypersurface> {
        if q.n() != self.n {
            return Err(Error::Contract("point has the wrong dimension".into()));
        }
        let shift = q.minus(&self.base_point).complexified();
        let ring = self.ring().clone();
        let names = ring.names().to_vec();
        let assignment: Vec<(&str, TruncatedSeries)> = names
            .iter()
            .zip(&shift)
            .map(|(name, s)| {
                let img = &TruncatedSeries::var(&ring, name).unwrap() + &TruncatedSeries::constant(&ring, s.clone());
                (name.as_str(), img)
            })
            .collect();
        let rho = self.rho.substitute_affine(&assignment, &ring)?;
        Self::with_base_point(self.n, rho, q.clone())
    }

    /// The point `(z, u + iv)` on the hypersurface, with `v` solved exactly.
    /// Works when `ρ(z, u+iv, z̄, u−iv)` is affine in `v`.
    pub fn point_on(&self, z: Vec<GaussianRational>, re_w: BigRational) -> Result<Point> {
        if z.len() != self.n {
            return Err(Error::Contract("point has the wrong dimension".into()));
        }
        let vring = SeriesRing::new(&["v"], self.order().max(2))?;
        let v = TruncatedSeries::var(&vring, "v")?;
        let u_loc = &GaussianRational::real(re_w.clone()) - &GaussianRational::real(self.base_point.w.re.clone());
        let i = TruncatedSeries::constant(&vring, GaussianRational::i());
        let u = TruncatedSeries::constant(&vring, u_loc.clone());
        let names = self.ring().names().to_vec();
        let mut assignment = Vec::new();
        for j in 0..self.n {
            let a = &z[j] - &self.base_point.z[j];
            assignment.push((names[j].as_str(), TruncatedSeries::constant(&vring, a.clone())));
            assignment.push((names[self.n + 1 + j].as_str(), TruncatedSeries::constant(&vring, a.conj())));
        }
        assignment.push((W, &u + &(&i * &v)));
        assignment.push((OMEGA, &u - &(&i * &v)));
        let p = self.rho.substitute_affine(&assignment, &vring)?;
        if p.max_degree().unwrap_or(0) > 1 {
            return Err(Error::NotExactlySolvable(
                "the defining function is not affine in Im w at this point".into(),
            ));
        }
        let p0 = p.coeff_of(&[0]);
        let p1 = p.coeff_of(&[1]);
        let Some(p1_inv) = p1.inv() else {
            return Err(Error::NotExactlySolvable("no dependence on Im w".into()));
        };
        let vv = -(&p0 * &p1_inv);
        if !vv.is_real() {
            return Err(Error::NotExactlySolvable("non-real root for Im w".into()));
        }
        let w_loc = GaussianRational::new(u_loc.re, vv.re);
        Ok(Point {
            z,
            w: &self.base_point.w + &w_loc,
        })
    }

    /// Hermitian matrix of `z_j ζ_k` coefficients at the base point.
    pub fn levi_form(&self) -> Matrix {
        let n = self.n;
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let mut e = vec![0u32; 2 * n + 2];
                        e[j] += 1;
                        e[n + 1 + k] += 1;
                        self.rho.coeff_of(&e)
                    })
                    .collect()
            })
            .collect()
    }

    /// Solves `ρ(z, θ, ζ, ω) ≡ 0` for `θ`.
    pub fn complex_defining_equation(&self) -> Result<ComplexDefiner> {
        let theta = implicit_solve(std::slice::from_ref(&self.rho), &[W])
            .map_err(|e| match e {
                Error::LeviDegenerate { .. } => {
                    Error::BadCoordinates("ρ_w vanishes at the base point; rotate coordinates first".into())
                }
                other => other,
            })?
            .remove(0);
        Ok(ComplexDefiner { n: self.n, theta })
    }

    /// Determinant of the Jacobian of `w = θ(z, ā, b̄)`, `w_{z_j} = θ_{z_j}(z, ā, b̄)`
    /// with respect to `(ā_1..ā_n, b̄)` at `q`. Rows: the graph equation,
    /// then `j = 1..n`; columns `ā_1..ā_n, b̄`.
    pub fn levi_jacobian(&self, q: &Point) -> Result<GaussianRational> {
        let local = self.recentered(q)?.truncated(2)?;
        let theta = local.complex_defining_equation()?.theta;
        Ok(linalg::determinant(&segre_system_jacobian(&theta, self.n)))
    }

    /// Removes the pure holomorphic/antiholomorphic quadratic terms with a
    /// polynomial change of the `w` coordinate, producing
    /// `ρ = Q(z, ζ) + (i/2)(w − ω) + (mixed quadratic and higher)` with `Q`
    /// positive definite.
    pub fn normalize_to_quadric(&self) -> Result<Normalization> {
        let n = self.n;
        let hol = SeriesRing::new(&holomorphic_variables(n), self.order())?;
        let c = self.rho_w0();
        if c.is_zero() {
            return Err(Error::BadCoordinates("ρ_w vanishes at the base point".into()));
        }

        // Linear stage: w' = −2i(b·z + c·w) turns the linear part into (i/2)(w' − ω').
        let minus_two_i = GaussianRational::from_ints(0, -2);
        let mut linear = TruncatedSeries::zero(&hol);
        for j in 0..n {
            let mut e = vec![0u32; 2 * n + 2];
            e[j] = 1;
            let b = self.rho.coeff_of(&e);
            linear = &linear + &TruncatedSeries::var(&hol, &z_name(j))?.scale(&(&b * &minus_two_i));
        }
        linear = &linear + &TruncatedSeries::var(&hol, W)?.scale(&(&c * &minus_two_i));
        let stage1 = self.pull_back(&inverse_w_map(&linear, n)?)?;

        let sign = match linalg::hermitian_definiteness(&Hypersurface::levi_form_of(&stage1, n)) {
            Some(s) => s,
            None => {
                return Err(Error::NotStrictlyPseudoconvex(
                    "the Levi form at the base point is indefinite or degenerate".into(),
                ))
            }
        };
        let sgn = GaussianRational::from(sign as i64);
        let linear = linear.scale(&sgn);
        let stage1 = if sign < 0 {
            let flip = TruncatedSeries::var(&hol, W)?.scale(&sgn);
            pull_back_series(&stage1, &flip, n)?.scale(&sgn)
        } else {
            stage1
        };

        // Quadratic stage: w'' = w' − 2i·h(z, w') with h the holomorphic quadratic part.
        let mut h = TruncatedSeries::zero(&hol);
        for (k, v) in stage1.terms_of_degree(2) {
            let e = k.exponents();
            if e[n + 1..].iter().all(|&x| x == 0) {
                h.add_term(MultiIndex::new(&e[..n + 1]), v);
            }
        }
        let mut quad_assign = Vec::new();
        quad_assign.push((W, linear.clone()));
        let h_of_linear = h.substitute(&quad_assign, &hol)?;
        let w_image = &linear + &h_of_linear.scale(&minus_two_i);

        let map = CoordinateMap { n, w_image };
        let rho = self.pull_back(&map.inverse()?)?.scale(&sgn);
        let surface = Hypersurface::with_base_point(n, rho, self.base_point.clone())?;
        let levi = surface.levi_form();
        Ok(Normalization {
            surface,
            map,
            levi_form: levi,
            sign,
        })
    }

    fn levi_form_of(rho: &TruncatedSeries, n: usize) -> Matrix {
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let mut e = vec![0u32; 2 * n + 2];
                        e[j] += 1;
                        e[n + 1 + k] += 1;
                        rho.coeff_of(&e)
                    })
                    .collect()
            })
            .collect()
    }

    /// `ρ(z, g(z, w), ζ, ḡ(ζ, ω))` for a series `g` in `(z, w)`.
    fn pull_back(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        pull_back_series(&self.rho, g, self.n)
    }
}

/// `s(z, g(z, w), ζ, ḡ(ζ, ω))` with `g` a series in `(z, w)` without constant term.
fn pull_back_series(s: &TruncatedSeries, g: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    let ring = s.ring().clone();
    let g_full = g.embed(&ring)?;
    let g_conj = conj_swap(&g_full, n);
    s.substitute(&[(W, g_full), (OMEGA, g_conj)], &ring)
}

/// Formal inverse in `w` of `(z, w) ↦ (z, W(z, w))`.
fn inverse_w_map(w_image: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    let hol = w_image.ring().clone();
    let mut names = holomorphic_variables(n);
    names.push("y".into());
    let big = SeriesRing::new(&names, hol.order())?;
    let y = TruncatedSeries::var(&big, "y")?;
    let w_of_y = w_image.embed(&big)?.substitute(&[(W, y)], &big)?;
    let eq = &w_of_y - &TruncatedSeries::var(&big, W)?;
    let sol = implicit_solve(&[eq], &["y"])?.remove(0);
    sol.embed(&hol)
}

/// Jacobian of the Segre system `(θ − w, θ_z − ξ)` with respect to `(ζ, ω)`
/// at the origin, read off the coefficients of `θ`.
pub(crate) fn segre_system_jacobian(theta: &TruncatedSeries, n: usize) -> Matrix {
    // θ ring: z1..zn, zeta1..zetan, omega
    let nv = 2 * n + 1;
    let unknown_cols: Vec<usize> = (n..nv).collect();
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(
        unknown_cols
            .iter()
            .map(|&c| {
                let mut e = vec![0u32; nv];
                e[c] = 1;
                theta.coeff_of(&e)
            })
            .collect(),
    );
    for j in 0..n {
        rows.push(
            unknown_cols
                .iter()
                .map(|&c| {
                    let mut e = vec![0u32; nv];
                    e[j] = 1;
                    e[c] = 1;
                    theta.coeff_of(&e)
                })
                .collect(),
        );
    }
    rows
}

/// The holomorphic change of coordinates `(z, w) ↦ (z, W(z, w))`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    pub n: usize,
    /// New `w` as a polynomial in the old `(z1..zn, w)`.
    pub w_image: TruncatedSeries,
}

impl CoordinateMap {
    pub fn is_identity(&self) -> bool {
        TruncatedSeries::var(self.w_image.ring(), W).map(|w| w == self.w_image).unwrap_or(false)
    }

    /// Formal inverse: old `w` as a series in the new `(z, w)`.
    pub fn inverse(&self) -> Result<TruncatedSeries> {
        inverse_w_map(&self.w_image, self.n)
    }

    /// `W(z, g(z, w))`.
    pub fn compose_with(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.w_image.substitute(&[(W, g.clone())], self.w_image.ring())
    }
}

/// Output of [`Hypersurface::normalize_to_quadric`].
#[derive(Clone, Debug)]
pub struct Normalization {
    pub surface: Hypersurface,
    pub map: CoordinateMap,
    /// `Q`, Hermitian positive definite (not diagonalized).
    pub levi_form: Matrix,
    /// `+1`, or `−1` when `ρ` was negated to make `Q` positive.
    pub sign: i8,
}

impl Normalization {
    /// Floating-point eigenvalues of `Q`, for display only.
    pub fn levi_eigenvalues(&self) -> Vec<f64> {
        let n = self.levi_form.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| self.levi_form[i][j].to_complex64());
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }
}

impl ComplexDefiner {
    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.theta.ring()
    }
}
