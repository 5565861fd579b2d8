//! Dense complex linear-algebra helpers shared by the model and the designers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest elementwise `|A_ij - conj(A_ji)|`.
pub fn hermitian_asymmetry(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^H) / 2`.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `v v^H`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// `Re(v^H A w)`.
pub fn quad_form(a: &CMat, v: &CVec) -> f64 {
    v.dotc(&(a * v)).re
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Real trace.
pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// The real embedding `H -> [[Re H, -Im H], [Im H, Re H]]`.
pub fn embed_hermitian(a: &CMat) -> RMat {
    let n = a.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`embed_hermitian`]. Averages the two copies so that an
/// unstructured symmetric input maps onto the nearest structured one.
pub fn unembed(x: &RMat) -> CMat {
    let n = x.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (x[(i, j)] + x[(i + n, j + n)]),
            0.5 * (x[(i + n, j)] - x[(i, j + n)]),
        )
    })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    herm_eigen(a).0[0]
}

pub fn max_eigenvalue(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    *herm_eigen(a).0.last().unwrap()
}

/// Factor `F` with `F F^H = A` through the eigen-decomposition, clipping
/// negative eigenvalues to zero.
pub fn psd_factor(a: &CMat) -> CMat {
    let (values, vectors) = herm_eigen(a);
    let mut f = vectors;
    for (c, &lam) in values.iter().enumerate() {
        let s = Complex64::new(lam.max(0.0).sqrt(), 0.0);
        for r in 0..f.nrows() {
            f[(r, c)] *= s;
        }
    }
    f
}

/// Frobenius norm of a complex matrix.
pub fn fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_hermitian, seeded};

    #[test]
    fn embedding_of_known_matrix() {
        let i = Complex64::new(0.0, 1.0);
        let h = CMat::from_row_slice(2, 2, &[ONE, i, -i, ONE]);
        let e = embed_hermitian(&h);
        assert!((&e - e.transpose()).amax() < 1e-15);
        let mut ev: Vec<f64> = e.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{ev:?}");
        }
        assert!(fro(&(unembed(&e) - &h)) < 1e-15);
    }

    #[test]
    fn psd_factor_reproduces_matrix() {
        let mut rng = seeded(3);
        let b = random_hermitian(&mut rng, 5);
        let a = &b * b.adjoint();
        let f = psd_factor(&a);
        assert!(fro(&(&f * f.adjoint() - &a)) < 1e-10 * (1.0 + fro(&a)));
    }

    #[test]
    fn trace_product_matches_dense() {
        let mut rng = seeded(4);
        let a = random_hermitian(&mut rng, 4);
        let b = random_hermitian(&mut rng, 4);
        let dense = (&a * &b).trace().re;
        assert!((trace_product(&a, &b) - dense).abs() < 1e-12);
    }
}
