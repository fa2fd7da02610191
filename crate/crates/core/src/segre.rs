//! Segre varieties `S_q = {ρ(Z, q̄) = 0}` as graphs `w = w(z)`, their jets,
//! and the second-order invariant `Φ` computed two independent ways.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hypersurface::{z_name, zeta_name, Hypersurface, Point, OMEGA, W};
use crate::scalar::GaussianRational;
use crate::series::linalg::Matrix;
use crate::series::{implicit_solve, MultiIndex, SeriesRing, TruncatedSeries};

/// Graph of the Segre variety of `base`, in local coordinates `t = z − a`
/// (ring variables `z1..zn`). The constant term is `b`, since `q ∈ S_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegreGraph {
    pub base: Point,
    pub graph: TruncatedSeries,
}

impl SegreGraph {
    /// `w(z)` at an absolute point `z`.
    pub fn eval(&self, z: &[GaussianRational]) -> Result<GaussianRational> {
        let t: Vec<GaussianRational> = z.iter().zip(&self.base.z).map(|(a, b)| a - b).collect();
        self.graph.eval(&t)
    }
}

/// Partial derivatives of the Segre graph at `z = a`, up to `order`.
/// Keyed by exponent vector `α`, the value is `∂^α w(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegreJet {
    pub base: Point,
    pub order: u32,
    pub derivatives: BTreeMap<Vec<u32>, GaussianRational>,
}

impl SegreJet {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn derivative(&self, alpha: &[u32]) -> GaussianRational {
        self.derivatives.get(alpha).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn value(&self) -> GaussianRational {
        self.derivative(&vec![0; self.n()])
    }

    /// `(w_{z_1}, …, w_{z_n})` at `a`.
    pub fn gradient(&self) -> Vec<GaussianRational> {
        let n = self.n();
        (0..n)
            .map(|j| {
                let mut e = vec![0; n];
                e[j] = 1;
                self.derivative(&e)
            })
            .collect()
    }

    /// `(w_{z_i z_j})` at `a`. Requires `order ≥ 2`.
    pub fn hessian(&self) -> Matrix {
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut e = vec![0; n];
                        e[i] += 1;
                        e[j] += 1;
                        self.derivative(&e)
                    })
                    .collect()
            })
            .collect()
    }
}

fn factorial_weight(alpha: &[u32]) -> GaussianRational {
    let mut f: i64 = 1;
    for &e in alpha {
        for k in 2..=e as i64 {
            f *= k;
        }
    }
    GaussianRational::from(f)
}

fn graph_ring(n: usize, order: u32) -> Result<Arc<SeriesRing>> {
    SeriesRing::build((0..n).map(z_name).collect(), order)
}

fn trusted(order: u32, lost: u32) -> Result<u32> {
    order
        .checked_sub(lost)
        .ok_or_else(|| Error::Truncation(format!("truncation order {order} is below {lost}")))
}

/// Solves `ρ(z, w, q̄) = 0` for `w` near `q`.
pub fn segre_graph(m: &Hypersurface, q: &Point) -> Result<SegreGraph> {
    let n = m.n();
    let local = m.recentered(q)?;
    let target = graph_ring(n, m.order())?;
    let mut zw: Vec<String> = (0..n).map(z_name).collect();
    zw.push(W.into());
    let zw_ring = SeriesRing::build(zw, m.order())?;
    let conj_names: Vec<String> = (0..n).map(zeta_name).chain([OMEGA.to_string()]).collect();
    let conj_refs: Vec<&str> = conj_names.iter().map(String::as_str).collect();
    let slice = local.rho().restrict_zero(&conj_refs, &zw_ring)?;
    let w = implicit_solve(&[slice], &[W])
        .map_err(|e| match e {
            Error::LeviDegenerate { .. } => Error::BadCoordinates("ρ_w(q, q̄) = 0".into()),
            other => other,
        })?
        .remove(0);
    let graph = &w.embed(&target)? + &TruncatedSeries::constant(&target, q.w.clone());
    Ok(SegreGraph { base: q.clone(), graph })
}

/// Derivatives of [`segre_graph`] at `z = a` through order `k ≤ N − 1`.
pub fn segre_jet(m: &Hypersurface, q: &Point, k: u32) -> Result<SegreJet> {
    if k + 1 > m.order() {
        return Err(Error::Truncation(format!(
            "a {k}-jet needs truncation order at least {}, have {}",
            k + 1,
            m.order()
        )));
    }
    let g = segre_graph(m, q)?;
    let derivatives = g
        .graph
        .terms()
        .filter(|(idx, _)| idx.degree() <= k)
        .map(|(idx, c)| {
            let alpha = idx.exponents();
            let v = c * &factorial_weight(&alpha);
            (alpha, v)
        })
        .collect();
    Ok(SegreJet {
        base: q.clone(),
        order: k,
        derivatives,
    })
}

/// Symmetric `n × n` family of series.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiField {
    pub n: usize,
    pub entries: Vec<Vec<TruncatedSeries>>,
}

impl PhiField {
    pub fn entry(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i][j]
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        self.entries[0][0].ring()
    }

    pub fn order(&self) -> u32 {
        self.ring().order()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(TruncatedSeries::is_zero)
    }

    /// Constant terms.
    pub fn at_origin(&self) -> Matrix {
        self.entries
            .iter()
            .map(|row| row.iter().map(TruncatedSeries::constant_term).collect())
            .collect()
    }
}

/// Bordered determinant
///
/// ```text
///            | ρ       ρ_{z_j}      ρ_w      |
/// Φ_ij = 1/ρ_w³ · | ρ_{z_i}  ρ_{z_i z_j}  ρ_{z_i w} |
///            | ρ_w     ρ_{z_j w}    ρ_{ww}   |
/// ```
///
/// as series in `(z, w, ζ, ω)`, trusted (and truncated) through degree `N − 2`.
pub fn phi_determinant(m: &Hypersurface) -> Result<PhiField> {
    let n = m.n();
    let order = trusted(m.order(), 2)?;
    let t = |s: TruncatedSeries| s.truncate(order);
    let rho = m.rho();
    let r = t(rho.clone())?;
    let rw_full = rho.differentiate(W)?;
    let rw = t(rw_full.clone())?;
    let rww = t(rw_full.differentiate(W)?)?;
    let mut rz = Vec::with_capacity(n);
    let mut rzw = Vec::with_capacity(n);
    let mut rz_full = Vec::with_capacity(n);
    for i in 0..n {
        let d = rho.differentiate(&z_name(i))?;
        rz.push(t(d.clone())?);
        rzw.push(t(d.differentiate(W)?)?);
        rz_full.push(d);
    }
    let inv = rw.inverse()?;
    let inv3 = &(&inv * &inv) * &inv;

    let mut entries = vec![vec![TruncatedSeries::zero(r.ring()); n]; n];
    for i in 0..n {
        for j in 0..n {
            let rij = t(rz_full[i].differentiate(&z_name(j))?)?;
            let a = [
                [&r, &rz[j], &rw],
                [&rz[i], &rij, &rzw[i]],
                [&rw, &rzw[j], &rww],
            ];
            entries[i][j] = &det3(&a) * &inv3;
        }
    }
    Ok(PhiField { n, entries })
}

fn det3(a: &[[&TruncatedSeries; 3]; 3]) -> TruncatedSeries {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| &(a[r1][c1] * a[r2][c2]) - &(a[r1][c2] * a[r2][c1]);
    let t0 = a[0][0] * &minor(1, 2, 1, 2);
    let t1 = a[0][1] * &minor(1, 2, 0, 2);
    let t2 = a[0][2] * &minor(1, 2, 0, 1);
    &(&t0 - &t1) + &t2
}

/// [`phi_determinant`] evaluated at `(q, q̄)`.
pub fn phi_determinant_at(m: &Hypersurface, q: &Point) -> Result<Matrix> {
    let local = m.recentered(q)?.truncated(2)?;
    Ok(phi_determinant(&local)?.at_origin())
}

/// Second derivatives of the Segre graph of `q` at `q`, read off the graph
/// coefficients. Shares no code with [`phi_determinant`].
pub fn phi_oracle(m: &Hypersurface, q: &Point) -> Result<Matrix> {
    let g = segre_graph(m, q)?;
    let n = m.n();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0u32; n];
                    e[i] += 1;
                    e[j] += 1;
                    let c = g.graph.coeff(&MultiIndex::new(&e));
                    if i == j {
                        &c * &GaussianRational::from(2)
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect())
}

/// `θ_{z_i z_j}(z, ζ, ω)`: second derivatives of every Segre graph at once,
/// as series over `(z, ζ, ω)` through degree `N − 2`.
pub fn phi_oracle_series(m: &Hypersurface) -> Result<PhiField> {
    let theta = m.complex_defining_equation()?.theta;
    let n = m.n();
    let order = trusted(m.order(), 2)?;
    let mut entries = vec![vec![TruncatedSeries::zero(&theta.ring().with_order(order)); n]; n];
    for i in 0..n {
        let ti = theta.differentiate(&z_name(i))?;
        for j in 0..n {
            entries[i][j] = ti.differentiate(&z_name(j))?.truncate(order)?;
        }
    }
    Ok(PhiField { n, entries })
}

/// [`phi_determinant`] restricted to `M` by `w = θ(z, ζ, ω)`; a series over
/// `(z, ζ, ω)` comparable with [`phi_oracle_series`].
pub fn phi_determinant_on_surface(m: &Hypersurface) -> Result<PhiField> {
    let det = phi_determinant(m)?;
    let theta = m.complex_defining_equation()?.theta;
    restrict_to_surface(&det, &theta)
}

fn restrict_to_surface(det: &PhiField, theta: &TruncatedSeries) -> Result<PhiField> {
    let target = theta.ring().with_order(det.order());
    let image = theta.truncate(det.order())?;
    let mut sub = crate::series::Substitution::new(
        det.ring(),
        &target,
        &[(W, image)],
        crate::series::SubstitutionMode::Composition,
    )?;
    let entries = det
        .entries
        .iter()
        .map(|row| row.iter().map(|s| sub.apply(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiField { n: det.n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::hypersurface_ring;
    use num_rational::BigRational;

    fn gr(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_ints(re, im)
    }

    fn half(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_fracs(re, 2, im, 2)
    }

    fn quadric_terms() -> Vec<(Vec<u32>, GaussianRational)> {
        vec![(vec![1, 0, 1, 0], gr(1, 0)), (vec![0, 1, 0, 0], half(0, 1)), (vec![0, 0, 0, 1], half(0, -1))]
    }

    fn surface(extra: &[(Vec<u32>, GaussianRational)], order: u32) -> Hypersurface {
        let r = hypersurface_ring(1, order).unwrap();
        let mut terms = quadric_terms();
        terms.extend(extra.iter().cloned());
        Hypersurface::new(1, TruncatedSeries::from_terms(&r, terms).unwrap()).unwrap()
    }

    fn quartic(order: u32) -> Hypersurface {
        surface(&[(vec![2, 0, 2, 0], gr(1, 0))], order)
    }

    fn sample_point(m: &Hypersurface) -> Point {
        m.point_on(vec![GaussianRational::from_fracs(1, 3, -1, 4)], BigRational::new(1.into(), 5.into()))
            .unwrap()
    }

    #[test]
    fn quadric_graph_at_origin_is_zero() {
        let m = surface(&[], 6);
        assert!(segre_graph(&m, &Point::origin(1)).unwrap().graph.is_zero());
    }

    #[test]
    fn quadric_graph_is_affine() {
        let m = surface(&[], 6);
        let q = sample_point(&m);
        let g = segre_graph(&m, &q).unwrap();
        let abar = q.z[0].conj();
        // b̄ + 2i(a + t)ā = b + 2iā t
        let want = TruncatedSeries::from_terms(
            g.graph.ring(),
            [(vec![0], q.w.clone()), (vec![1], &gr(0, 2) * &abar)],
        )
        .unwrap();
        assert_eq!(g.graph, want);
    }

    #[test]
    fn quartic_jet_and_oracle() {
        let m = quartic(6);
        let q = sample_point(&m);
        let jet = segre_jet(&m, &q, 2).unwrap();
        let abar = q.z[0].conj();
        let want = &gr(0, 4) * &(&abar * &abar);
        assert_eq!(jet.hessian()[0][0], want);
        assert_eq!(phi_oracle(&m, &q).unwrap()[0][0], want);
        assert_eq!(phi_determinant_at(&m, &q).unwrap()[0][0], want);
        assert_eq!(jet.value(), q.w);
    }

    #[test]
    fn jet_order_is_bounded_by_truncation() {
        let m = surface(&[], 4);
        assert!(matches!(segre_jet(&m, &Point::origin(1), 4), Err(Error::Truncation(_))));
        assert!(segre_jet(&m, &Point::origin(1), 3).is_ok());
    }

    #[test]
    fn first_jet_is_complex_tangent() {
        let m = quartic(5);
        let q = sample_point(&m);
        let jet = segre_jet(&m, &q, 1).unwrap();
        // ρ_z + ρ_w·w' = 0 at (q, q̄)
        let local = m.recentered(&q).unwrap();
        let rz = local.rho().coeff_of(&[1, 0, 0, 0]);
        let rw = local.rho().coeff_of(&[0, 1, 0, 0]);
        assert!((&rz + &(&rw * &jet.gradient()[0])).is_zero());
    }

    #[test]
    fn quadric_phi_vanishes() {
        let m = surface(&[], 6);
        assert!(phi_determinant(&m).unwrap().is_zero());
    }

    #[test]
    fn quartic_phi_on_surface_matches_theta() {
        let m = quartic(6);
        let det = phi_determinant_on_surface(&m).unwrap();
        let oracle = phi_oracle_series(&m).unwrap();
        assert_eq!(det, oracle);
        // θ_zz = 4iζ² at this order
        let want = TruncatedSeries::from_terms(oracle.ring(), [(vec![0, 2, 0], gr(0, 4))]).unwrap();
        assert_eq!(oracle.entries[0][0], want);
    }

    #[test]
    fn phi_is_invariant_under_scaling() {
        let m = quartic(5);
        let scaled = Hypersurface::new(1, m.rho().scale(&GaussianRational::from_fracs(-3, 7, 0, 1))).unwrap();
        let q = sample_point(&m);
        assert_eq!(phi_determinant_at(&m, &q).unwrap(), phi_determinant_at(&scaled, &q).unwrap());
        assert_eq!(phi_determinant(&m).unwrap(), phi_determinant(&scaled).unwrap());
    }
}
