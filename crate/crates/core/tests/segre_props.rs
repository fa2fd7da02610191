use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segrejet_core::corpus::{random_gaussian, random_point, random_surface, SurfaceSpec};
use segrejet_core::hypersurface::{conj_swap, hypersurface_ring, Hypersurface, Point};
use segrejet_core::segre::{
    phi_determinant, phi_determinant_at, phi_determinant_on_surface, phi_oracle, phi_oracle_series, segre_graph,
    segre_jet,
};
use segrejet_core::{Error, GaussianRational, TruncatedSeries};

/// Keeps the terms of `ρ` free of `w, ω` plus `(i/2)(w − ω)`: a rigid surface
/// whose Segre graphs are polynomials.
fn rigid(m: &Hypersurface) -> Hypersurface {
    let n = m.n();
    let ring = m.ring().clone();
    let mut rho = TruncatedSeries::zero(&ring);
    for (k, c) in m.rho().terms() {
        let e = k.exponents();
        if e[n] == 0 && e[2 * n + 1] == 0 {
            rho = &rho + &TruncatedSeries::from_terms(&ring, [(e, c.clone())]).unwrap();
        }
    }
    let mut e = vec![0u32; 2 * n + 2];
    e[n] = 1;
    let lin = TruncatedSeries::from_terms(&ring, [(e, GaussianRational::from_fracs(0, 1, 1, 2))]).unwrap();
    Hypersurface::new(n, &rho + &(&lin + &conj_swap(&lin, n))).unwrap()
}

#[test]
fn determinant_matches_oracle_at_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for s in 0..12 {
        let m = random_surface(&mut rng, &SurfaceSpec::new(1 + s % 2, 6));
        for _ in 0..2 {
            let q = random_point(&mut rng, &m);
            assert_eq!(phi_determinant_at(&m, &q).unwrap(), phi_oracle(&m, &q).unwrap());
        }
    }
}

#[test]
fn determinant_matches_oracle_as_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for s in 0..6 {
        let m = random_surface(&mut rng, &SurfaceSpec::new(1 + s % 2, 6));
        assert_eq!(phi_determinant_on_surface(&m).unwrap(), phi_oracle_series(&m).unwrap());
    }
}

#[test]
fn phi_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for s in 0..9 {
        let m = random_surface(&mut rng, &SurfaceSpec::new(1 + s % 3, 5));
        assert!(phi_determinant(&m).unwrap().is_symmetric());
        let q = random_point(&mut rng, &m);
        let o = phi_oracle(&m, &q).unwrap();
        for i in 0..m.n() {
            for j in 0..i {
                assert_eq!(o[i][j], o[j][i]);
            }
        }
    }
}

#[test]
fn segre_incidence_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for s in 0..15 {
        let m = rigid(&random_surface(&mut rng, &SurfaceSpec::new(1 + s % 3, 8)));
        let q = random_point(&mut rng, &m);
        let g = segre_graph(&m, &q).unwrap();
        let zr: Vec<GaussianRational> = (0..m.n()).map(|_| random_gaussian(&mut rng, 3)).collect();
        let r = Point { w: g.eval(&zr).unwrap(), z: zr };
        // ρ(Z, W̄) with Z, W absolute points
        let incidence = |a: &Point, b: &Point| {
            let mut v = a.z.clone();
            v.push(a.w.clone());
            v.extend(b.z.iter().map(GaussianRational::conj));
            v.push(b.w.conj());
            m.rho().eval(&v).unwrap()
        };
        assert!(incidence(&r, &q).is_zero());
        assert!(incidence(&q, &r).is_zero(), "q ∉ S_r although r ∈ S_q");
        let off = Point { z: r.z.clone(), w: &r.w + &GaussianRational::from_fracs(1, 7, 0, 1) };
        assert!(!incidence(&off, &q).is_zero());
        assert!(!incidence(&q, &off).is_zero());
    }
}

#[test]
fn segre_graph_passes_through_its_base_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for s in 0..6 {
        let m = random_surface(&mut rng, &SurfaceSpec::new(1 + s % 3, 5));
        let q = random_point(&mut rng, &m);
        let jet = segre_jet(&m, &q, 2).unwrap();
        assert_eq!(jet.value(), q.w);
        assert_eq!(jet.hessian(), phi_oracle(&m, &q).unwrap());
        assert!(matches!(segre_jet(&m, &q, 5), Err(Error::Truncation(_))));
    }
}

/// A Hermitian quadric times a real unit `1 + Σ z_j ζ_j`: the Segre graphs are
/// affine in `z`, so `Φ` vanishes although `ρ` is not polynomial in `w` alone.
#[test]
fn phi_vanishes_for_affine_segre_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for n in 1..=2 {
        let ring = hypersurface_ring(n, 6).unwrap();
        let mono = |e: Vec<u32>, c: GaussianRational| TruncatedSeries::from_terms(&ring, [(e, c)]).unwrap();
        let mut e = vec![0u32; 2 * n + 2];
        e[n] = 1;
        let lin = mono(e, GaussianRational::from_fracs(0, 1, 1, 2));
        let mut rho = &lin + &conj_swap(&lin, n);
        let mut unit = TruncatedSeries::one(&ring);
        for j in 0..n {
            let mut e = vec![0u32; 2 * n + 2];
            e[j] = 1;
            e[n + 1 + j] = 1;
            rho = &rho + &mono(e.clone(), GaussianRational::from(rng.gen_range(1..5i64)));
            unit = &unit + &mono(e, GaussianRational::from(1));
            let mut e = vec![0u32; 2 * n + 2];
            e[j] = 1;
            let b = mono(e, random_gaussian(&mut rng, 5));
            rho = &rho + &(&b + &conj_swap(&b, n));
        }
        let m = Hypersurface::new(n, &rho * &unit).unwrap();
        assert!(phi_determinant_on_surface(&m).unwrap().is_zero());
        assert!(phi_oracle_series(&m).unwrap().is_zero());
    }
}
