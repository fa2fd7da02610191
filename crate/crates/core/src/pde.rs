//! The second-order system `w_{z_k z_l} = Φ_{kl}(z, w, w')` whose solutions
//! are the Segre graphs, on the 1-jet chart `E = {(z, w, ξ)}`.
//!
//! Jet-chart series use the variables `z1..zn, w, xi1..xin`, all measured
//! from the chart center `(a, b, ξ₀)`: the base point and the slope of its
//! own Segre variety there.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hypersurface::{holomorphic_variables, xi_name, z_name, zeta_name, Hypersurface, Point, OMEGA, W};
use crate::scalar::GaussianRational;
use crate::segre::segre_graph;
use crate::series::linalg::Matrix;
use crate::series::{implicit_solve_graded, Graded, SeriesRing, Substitution, SubstitutionMode, TruncatedSeries};

/// A point of the jet chart.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint<T = GaussianRational> {
    pub z: Vec<T>,
    pub w: T,
    pub xi: Vec<T>,
}

pub fn jet_variables(n: usize) -> Vec<String> {
    let mut v = holomorphic_variables(n);
    v.extend((0..n).map(xi_name));
    v
}

pub fn jet_ring(n: usize, order: u32) -> Result<Arc<SeriesRing>> {
    SeriesRing::build(jet_variables(n), order)
}

fn trusted(order: u32, lost: u32) -> Result<u32> {
    order
        .checked_sub(lost)
        .ok_or_else(|| Error::Truncation(format!("truncation order {order} is below {lost}")))
}

/// `ξ₀ = −ρ_z/ρ_w` at the base point.
pub fn base_slope(m: &Hypersurface) -> Result<Vec<GaussianRational>> {
    let n = m.n();
    let rw = m.rho_w0();
    let inv = rw
        .inv()
        .ok_or_else(|| Error::BadCoordinates("ρ_w vanishes at the base point".into()))?;
    Ok((0..n)
        .map(|j| {
            let mut e = vec![0u32; 2 * n + 2];
            e[j] = 1;
            -(&m.rho().coeff_of(&e) * &inv)
        })
        .collect())
}

/// `ā = A(z, w, ξ)`, `b̄ = B(z, w, ξ)`: the conjugate of the point whose
/// Segre variety passes through `(z, w)` with slope `ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ABSolution {
    pub a: Vec<TruncatedSeries>,
    pub b: TruncatedSeries,
    pub center: JetPoint,
}

/// [`solve_ab_to`] at the trusted degree `N − 1` of `ρ_z`.
pub fn solve_ab(m: &Hypersurface) -> Result<ABSolution> {
    solve_ab_to(m, trusted(m.order(), 1)?)
}

/// Solves `ρ(z, w, ζ, ω) = 0`, `ρ_{z_j} + ξ_j ρ_w = 0` for `(ζ, ω) = (A, B)`
/// through degree `order`.
pub fn solve_ab_to(m: &Hypersurface, order: u32) -> Result<ABSolution> {
    let n = m.n();
    if order + 1 > m.order() {
        return Err(Error::Truncation(format!(
            "A, B are trusted through degree {} only",
            m.order().saturating_sub(1)
        )));
    }
    let (a, b, center) = solve_ab_graded(m, order)?;
    let jet = jet_ring(n, order)?;
    Ok(ABSolution {
        a: a.iter().map(|g| g.to_series(&jet)).collect(),
        b: b.to_series(&jet),
        center,
    })
}

/// `(A, B)` as graded series over the jet variables, with the chart center.
fn solve_ab_graded(m: &Hypersurface, order: u32) -> Result<(Vec<Graded>, Graded, JetPoint)> {
    let xi0 = base_slope(m)?;
    // the linear terms carry the Jacobian, so never solve below degree 1
    let solve_order = order.max(1);
    let (a, b) = match rigid_part(m)? {
        Some(phi) => solve_ab_rigid(m, &phi, &xi0, solve_order)?,
        None => solve_ab_general(m, &xi0, solve_order)?,
    };
    let a = a.iter().map(|g| g.truncated(order)).collect();
    Ok((a, b.truncated(order), center_of(m, xi0)))
}

fn solve_ab_general(m: &Hypersurface, xi0: &[GaussianRational], order: u32) -> Result<(Vec<Graded>, Graded)> {
    let n = m.n();
    let mut names = jet_variables(n);
    names.extend((0..n).map(zeta_name));
    names.push(OMEGA.into());
    let ring = SeriesRing::build(names, order)?;
    let lift = |s: TruncatedSeries| -> Result<TruncatedSeries> { s.truncate(order)?.embed(&ring) };

    let rho = m.rho();
    let rw = lift(rho.differentiate(W)?)?;
    let mut eqs = vec![lift(rho.clone())?];
    for j in 0..n {
        let slope = &TruncatedSeries::var(&ring, &xi_name(j))? + &TruncatedSeries::constant(&ring, xi0[j].clone());
        eqs.push(&lift(rho.differentiate(&z_name(j))?)? + &(&slope * &rw));
    }
    let unknown_names: Vec<String> = (0..n).map(zeta_name).chain([OMEGA.to_string()]).collect();
    let unknowns: Vec<&str> = unknown_names.iter().map(String::as_str).collect();
    let (_, mut sol) = implicit_solve_graded(&eqs, &unknowns)?.expect("at least one equation");
    let b = sol.pop().expect("n + 1 unknowns");
    Ok((sol, b))
}

/// With `ρ_w ≡ i/2` only the slope equations are implicit; then
/// `B = w − 2i·φ(z, A)`.
fn solve_ab_rigid(
    m: &Hypersurface,
    phi: &TruncatedSeries,
    xi0: &[GaussianRational],
    order: u32,
) -> Result<(Vec<Graded>, Graded)> {
    let n = m.n();
    let mut names = jet_variables(n);
    names.extend((0..n).map(zeta_name));
    let ring = SeriesRing::build(names, order)?;
    let lift = |s: TruncatedSeries| -> Result<TruncatedSeries> { s.truncate(order)?.embed(&ring) };
    let half_i = GaussianRational::new(BigRational::zero(), BigRational::new(1.into(), 2.into()));
    let mut eqs = Vec::with_capacity(n);
    for j in 0..n {
        let slope = &TruncatedSeries::var(&ring, &xi_name(j))? + &TruncatedSeries::constant(&ring, xi0[j].clone());
        eqs.push(&lift(phi.differentiate(&z_name(j))?)? + &slope.scale(&half_i));
    }
    let zetas: Vec<String> = (0..n).map(zeta_name).collect();
    let unknowns: Vec<&str> = zetas.iter().map(String::as_str).collect();
    let (_, a) = implicit_solve_graded(&eqs, &unknowns)?.expect("n ≥ 1 equations");

    let jet = jet_ring(n, order)?;
    let mut images: Vec<(&str, Graded)> = unknowns.iter().copied().zip(a.iter().cloned()).collect();
    images.push((OMEGA, Graded::zero(order)));
    let src = m.ring().with_order(order);
    let mut sub = Substitution::with_graded_images(&src, &jet, &images, SubstitutionMode::Composition)?;
    let minus_two_i = GaussianRational::new(BigRational::zero(), BigRational::from_integer((-2).into()));
    let w = Graded::from_series(&TruncatedSeries::var(&jet, W)?);
    let b = w.add(&sub.apply_graded(&phi.truncate(order)?.scale(&minus_two_i))?);
    Ok((a, b))
}

fn center_of(m: &Hypersurface, xi: Vec<GaussianRational>) -> JetPoint {
    let bp = m.base_point();
    JetPoint {
        z: bp.z.clone(),
        w: bp.w.clone(),
        xi,
    }
}

/// `φ = ρ − (i/2)(w − ω)` when that is free of `w` and `ω`.
fn rigid_part(m: &Hypersurface) -> Result<Option<TruncatedSeries>> {
    let rho = m.rho();
    let half_i = GaussianRational::new(BigRational::zero(), BigRational::new(1.into(), 2.into()));
    let rw = rho.differentiate(W)?;
    let ro = rho.differentiate(OMEGA)?;
    if rw != TruncatedSeries::constant(rw.ring(), half_i.clone()) || ro != TruncatedSeries::constant(ro.ring(), -half_i.clone())
    {
        return Ok(None);
    }
    let r = rho.ring();
    let lin = &TruncatedSeries::var(r, W)? - &TruncatedSeries::var(r, OMEGA)?;
    Ok(Some(rho - &lin.scale(&half_i)))
}

/// `Φ_{kl}` on the jet chart, symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct PDESystem {
    pub n: usize,
    pub phi: Vec<Vec<TruncatedSeries>>,
    pub center: JetPoint,
}

impl PDESystem {
    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.phi[0][0].ring()
    }

    /// Trusted degree of `Φ`.
    pub fn order(&self) -> u32 {
        self.ring().order()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|k| (0..k).all(|l| self.phi[k][l] == self.phi[l][k]))
    }

    pub fn is_zero(&self) -> bool {
        self.phi.iter().flatten().all(TruncatedSeries::is_zero)
    }

    /// `Φ` at the chart center.
    pub fn at_center(&self) -> Matrix {
        self.phi
            .iter()
            .map(|row| row.iter().map(TruncatedSeries::constant_term).collect())
            .collect()
    }
}

/// `Φ_{kl} = −(ρ_{kl} + ρ_{kw}ξ_l + ρ_{lw}ξ_k + ρ_{ww}ξ_kξ_l)/ρ_w` at
/// `(z, w, A, B)`: the second derivatives of the Segre graph through `(z, w)`
/// with slope `ξ`. Trusted through degree `N − 2`.
pub fn associated_pde(m: &Hypersurface) -> Result<PDESystem> {
    let (jet, phi, center) = pde_graded(m)?;
    let phi = phi
        .iter()
        .map(|row| row.iter().map(|g| g.to_series(&jet)).collect())
        .collect();
    Ok(PDESystem { n: m.n(), phi, center })
}

/// Φ in graded form over the jet ring.
fn pde_graded(m: &Hypersurface) -> Result<(Arc<SeriesRing>, Vec<Vec<Graded>>, JetPoint)> {
    let n = m.n();
    let order = trusted(m.order(), 2)?;
    let (a, b, center) = solve_ab_graded(m, order)?;
    let jet = jet_ring(n, order)?;
    let src = m.ring().with_order(order);
    let names: Vec<String> = (0..n).map(zeta_name).chain([OMEGA.to_string()]).collect();
    let images: Vec<(&str, Graded)> = names.iter().map(String::as_str).zip(a.into_iter().chain([b])).collect();
    let mut sub = Substitution::with_graded_images(&src, &jet, &images, SubstitutionMode::Composition)?;

    // Everything up to the final Φ stays fraction-free.
    let rho = m.rho();
    let rw = rho.differentiate(W)?;
    let rww = sub.apply_graded(&rw.differentiate(W)?.truncate(order)?)?;
    let neg_inv_rw = sub
        .apply_graded(&rw.truncate(order)?)?
        .inverse()
        .ok_or_else(|| Error::BadCoordinates("ρ_w vanishes at the center".into()))?
        .neg();
    let mut rz = Vec::with_capacity(n);
    let mut rzw = Vec::with_capacity(n);
    for k in 0..n {
        let d = rho.differentiate(&z_name(k))?;
        rzw.push(sub.apply_graded(&d.differentiate(W)?.truncate(order)?)?);
        rz.push(d);
    }
    let slope: Vec<Graded> = (0..n)
        .map(|j| {
            let s = &TruncatedSeries::var(&jet, &xi_name(j))? + &TruncatedSeries::constant(&jet, center.xi[j].clone());
            Ok(Graded::from_series(&s))
        })
        .collect::<Result<_>>()?;

    // the numerator is symmetric in (k, l) term by term
    let mut phi = vec![vec![Graded::zero(order); n]; n];
    for k in 0..n {
        for l in k..n {
            let num = sub
                .apply_graded(&rz[k].differentiate(&z_name(l))?.truncate(order)?)?
                .add(&rzw[k].mul(&slope[l]))
                .add(&rzw[l].mul(&slope[k]))
                .add(&rww.mul(&slope[k].mul(&slope[l])));
            phi[k][l] = num.mul(&neg_inv_rw);
            phi[l][k] = phi[k][l].clone();
        }
    }
    Ok((jet, phi, center))
}

/// [`associated_pde`] of the germ recentered at `q`.
pub fn associated_pde_at(m: &Hypersurface, q: &Point) -> Result<PDESystem> {
    associated_pde(&m.recentered(q)?)
}

/// `L_j f = ∂f/∂z_j + ξ_j ∂f/∂w + Σ_s Φ_{sj} ∂f/∂ξ_s`, with `ξ_j` the
/// absolute slope. Trusted through `min(order(f) − 1, order(Φ))`.
pub fn total_derivative_apply(s: &PDESystem, f: &TruncatedSeries, j: usize) -> Result<TruncatedSeries> {
    let n = s.n;
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    if f.ring().names() != jet_variables(n).as_slice() {
        return Err(Error::RingMismatch);
    }
    if f.order() == 0 {
        return Err(Error::Truncation("differentiating a degree-0 series leaves nothing trusted".into()));
    }
    let order = (f.order() - 1).min(s.order());
    let ring = jet_ring(n, order)?;
    let cut = |x: TruncatedSeries| x.truncate(order);
    let mut out = cut(f.differentiate(&z_name(j))?)?;
    let slope = &TruncatedSeries::var(&ring, &xi_name(j))? + &TruncatedSeries::constant(&ring, s.center.xi[j].clone());
    out = &out + &(&slope * &cut(f.differentiate(W)?)?);
    for sidx in 0..n {
        let df = f.differentiate(&xi_name(sidx))?;
        if df.is_zero() {
            continue;
        }
        out = &out + &(&cut(s.phi[sidx][j].clone())? * &cut(df)?);
    }
    Ok(out)
}

/// All `L_jΦ_{kl} − L_kΦ_{jl}`, reported in full.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrabilityReport {
    pub n: usize,
    /// Trusted degree of every residual.
    pub order: u32,
    /// Indexed `[j][k][l]`.
    pub residuals: Vec<Vec<Vec<TruncatedSeries>>>,
}

impl IntegrabilityReport {
    pub fn is_zero(&self) -> bool {
        self.residuals.iter().flatten().flatten().all(TruncatedSeries::is_zero)
    }

    /// `(j, k, l)` and the lowest-degree nonzero coefficient of the first
    /// nonvanishing residual.
    pub fn first_nonzero(&self) -> Option<((usize, usize, usize), String)> {
        for (j, a) in self.residuals.iter().enumerate() {
            for (k, b) in a.iter().enumerate() {
                for (l, r) in b.iter().enumerate() {
                    if let Some((idx, c)) = r.terms().next() {
                        return Some(((j, k, l), format!("{c} at exponents {:?}", idx.exponents())));
                    }
                }
            }
        }
        None
    }
}

pub fn integrability_residual(s: &PDESystem) -> Result<IntegrabilityReport> {
    let n = s.n;
    let order = trusted(s.order(), 1)?;
    // ljphi[j][k][l] = L_j Φ_{kl}
    let mut ljphi = vec![vec![vec![None; n]; n]; n];
    for (j, slot) in ljphi.iter_mut().enumerate() {
        for k in 0..n {
            for l in 0..n {
                slot[k][l] = Some(total_derivative_apply(s, &s.phi[k][l], j)?);
            }
        }
    }
    let get = |j: usize, k: usize, l: usize| ljphi[j][k][l].as_ref().unwrap();
    let residuals = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| (0..n).map(|l| get(j, k, l) - get(k, j, l)).collect())
                .collect()
        })
        .collect();
    Ok(IntegrabilityReport { n, order, residuals })
}

/// Pullbacks of the contact forms along the lift `t ↦ (t, w(t), w'(t))` of a
/// Segre graph, as series in `t = z − a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactResidual {
    /// Coefficient of `dz_j` in `ω₀ = dw − Σ ξ_j dz_j`.
    pub omega0: Vec<TruncatedSeries>,
    /// `[k][l]`: coefficient of `dz_l` in `ω_k = dξ_k − Σ Φ_{kl} dz_l`.
    pub omega: Vec<Vec<TruncatedSeries>>,
}

impl ContactResidual {
    pub fn is_zero(&self) -> bool {
        self.omega0.iter().chain(self.omega.iter().flatten()).all(TruncatedSeries::is_zero)
    }
}

pub fn contact_residual(m: &Hypersurface, q: &Point) -> Result<ContactResidual> {
    let n = m.n();
    let g = segre_graph(m, q)?.graph;
    let (jet, phi, center) = pde_graded(&m.recentered(q)?)?;
    let grad: Vec<TruncatedSeries> = (0..n).map(|j| g.differentiate(&z_name(j))).collect::<Result<_>>()?;
    let grad_order = trusted(g.order(), 1)?;
    let omega0 = grad
        .iter()
        .map(|d| {
            let xi = d.truncate(grad_order)?;
            d.truncate(grad_order)?.try_sub(&xi)
        })
        .collect::<Result<Vec<_>>>()?;

    let order = jet.order();
    let target = g.ring().with_order(order);
    let mut assignment = vec![(W.to_string(), (&g - &TruncatedSeries::constant(g.ring(), q.w.clone())).truncate(order)?)];
    for j in 0..n {
        let shifted = &grad[j] - &TruncatedSeries::constant(grad[j].ring(), center.xi[j].clone());
        assignment.push((xi_name(j), shifted.truncate(order)?));
    }
    let refs: Vec<(&str, TruncatedSeries)> = assignment.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    let mut sub = Substitution::new(&jet, &target, &refs, SubstitutionMode::Composition)?;
    // both Φ and the Hessian of the graph are symmetric
    let mut omega = vec![vec![TruncatedSeries::zero(&target); n]; n];
    for k in 0..n {
        for l in k..n {
            let dxi = Graded::from_series(&grad[k].differentiate(&z_name(l))?.truncate(order)?);
            omega[k][l] = dxi.add(&sub.apply_to_graded(&phi[k][l])?.neg()).to_series(&target);
            omega[l][k] = omega[k][l].clone();
        }
    }
    Ok(ContactResidual { omega0, omega })
}

/// `w''_{kl}(t) − Φ_{kl}(t, w(t), w'(t))` along the Segre graph of `q`,
/// trusted through `N − 2`.
pub fn segre_solution_residual(m: &Hypersurface, q: &Point) -> Result<Vec<Vec<TruncatedSeries>>> {
    Ok(contact_residual(m, q)?.omega)
}

impl JetPoint {
    pub fn origin(n: usize) -> Self {
        Self {
            z: vec![GaussianRational::zero(); n],
            w: GaussianRational::zero(),
            xi: vec![GaussianRational::zero(); n],
        }
    }
}
