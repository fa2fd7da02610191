//! Dense exact linear algebra over `Q(i)` for the small matrices that show up
//! here (Jacobians, Levi forms): at most a handful of rows.

use num_traits::{One, Zero};

use crate::scalar::GaussianRational;

pub type Matrix = Vec<Vec<GaussianRational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() })
                .collect()
        })
        .collect()
}

/// Determinant by Gaussian elimination over the field.
pub fn determinant(m: &Matrix) -> GaussianRational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = GaussianRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return GaussianRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = &det * &p;
        let pinv = p.inv().unwrap();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &pinv;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= &t;
            }
        }
    }
    det
}

/// Inverse, or `None` when singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let pinv = a[col][col].inv().unwrap();
        for c in 0..n {
            a[col][c] = &a[col][c] * &pinv;
            inv[col][c] = &inv[col][c] * &pinv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= &t;
                let t = &f * &inv[col][c];
                inv[r][c] -= &t;
            }
        }
    }
    Some(inv)
}

pub fn mat_vec(m: &Matrix, v: &[GaussianRational]) -> Vec<GaussianRational> {
    m.iter()
        .map(|row| {
            let mut acc = GaussianRational::zero();
            for (a, b) in row.iter().zip(v) {
                acc.add_product(a, b);
            }
            acc
        })
        .collect()
}

/// Sign of a Hermitian form by Sylvester's criterion on leading principal
/// minors: `Some(+1)` positive definite, `Some(-1)` negative definite,
/// `None` otherwise (indefinite or degenerate).
pub fn hermitian_definiteness(m: &Matrix) -> Option<i8> {
    use num_traits::Signed;
    let n = m.len();
    let minors: Vec<_> = (1..=n)
        .map(|k| {
            let sub: Matrix = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            determinant(&sub).re
        })
        .collect();
    if minors.iter().all(|d| d.is_positive()) {
        return Some(1);
    }
    // negative definite: minors alternate −, +, −, …
    let alternating = minors.iter().enumerate().all(|(k, d)| {
        if k % 2 == 0 {
            d.is_negative()
        } else {
            d.is_positive()
        }
    });
    alternating.then_some(-1)
}
