//! Thin helpers over `faer` dense kernels: spectral norms, Hermitian
//! eigendecomposition, matrix exponentials of anti-Hermitian matrices.

use faer::complex_native::c64;
use faer::prelude::*;
use faer::Side;

pub type C64 = c64;
pub use faer::Mat;


/// Real scalar promoted to a complex entry.
pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> Mat<C64> {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { cr(1.0) } else { cr(0.0) })
}

pub fn adjoint(m: &Mat<C64>) -> Mat<C64> {
    m.adjoint().to_owned()
}

pub fn scale(z: C64, m: &Mat<C64>) -> Mat<C64> {
    faer::scale(z) * m
}

/// Largest singular value. 1x1 and empty matrices short-circuit; the engine
/// spends most of its time on 1x1 blocks.
pub fn spectral_norm(m: &Mat<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.singular_values()[0]
}

pub fn max_abs(m: &Mat<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        0.0
    } else {
        m.norm_max()
    }
}

/// Max-abs deviation from Hermitian symmetry.
pub fn hermitian_deviation(m: &Mat<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn symmetrize(m: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * cr(0.5)
    })
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending with
/// matching eigenvector columns. The input is symmetrized first so callers
/// may pass matrices that are Hermitian only up to round-off.
pub fn hermitian_eig(m: &Mat<C64>) -> (Vec<f64>, Mat<C64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eig needs a square matrix");
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    if n == 1 {
        return (vec![m[(0, 0)].re], identity(1));
    }
    let h = symmetrize(m);
    let evd = h.selfadjoint_eigendecomposition(Side::Lower);
    let sv = evd.s().column_vector().to_owned();
    let u = evd.u().to_owned();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[a].re.total_cmp(&sv[b].re));
    let vals: Vec<f64> = order.iter().map(|&i| sv[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Mat<C64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    hermitian_eig(m).0
}

/// exp(A) for anti-Hermitian A, computed through the Hermitian
/// eigendecomposition of iA. The result is unitary to round-off. Generators
/// far below round-off short-circuit to a truncated series.
pub fn expm_antihermitian(a: &Mat<C64>) -> Mat<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let scale = max_abs(a) * n as f64;
    if scale == 0.0 {
        return identity(n);
    }
    if scale < 1e-12 {
        // I + A + A²/2; the remainder is below ‖A‖³ ≤ 1e-36
        let a2 = a * a;
        return Mat::from_fn(n, n, |i, j| {
            let eye = if i == j { cr(1.0) } else { cr(0.0) };
            eye + a[(i, j)] + a2[(i, j)] * cr(0.5)
        });
    }
    let h = Mat::from_fn(n, n, |i, j| C64::new(0.0, 1.0) * a[(i, j)]);
    let (vals, q) = hermitian_eig(&h);
    // A = -iH, so exp(A) = Q diag(e^{-i lambda}) Q^H.
    let phase = Mat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(vals[i].cos(), -vals[i].sin())
        } else {
            cr(0.0)
        }
    });
    &q * &phase * q.adjoint()
}

/// Dense linear solve A x = b.
pub fn solve(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    a.partial_piv_lu().solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_1x1() {
        let m = Mat::from_fn(1, 1, |_, _| C64::new(3.0, 4.0));
        assert!((spectral_norm(&m) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eig_roundtrip() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                cr(i as f64)
            } else {
                C64::new(0.3, 0.1 * (i as f64 - j as f64))
            }
        });
        let h = symmetrize(&m);
        let (vals, q) = hermitian_eig(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = Mat::from_fn(3, 3, |i, j| if i == j { cr(vals[i]) } else { cr(0.0) });
        let back = &q * &d * q.adjoint();
        assert!(max_abs(&(&back - &h)) < 1e-12);
    }

    #[test]
    fn expm_antihermitian_is_unitary() {
        let a = Mat::from_fn(4, 4, |i, j| {
            C64::new(0.1 * (i as f64 - j as f64), 0.05 * (i + j) as f64)
        });
        let anti = Mat::from_fn(4, 4, |i, j| (a[(i, j)] - a[(j, i)].conj()) * cr(0.5));
        let u = expm_antihermitian(&anti);
        let dev = max_abs(&(u.adjoint() * &u - identity(4)));
        assert!(dev < 1e-13, "unitarity deviation {dev:e}");
    }

    #[test]
    fn solve_small_system() {
        let a = Mat::from_fn(3, 3, |i, j| {
            C64::new((i * 3 + j) as f64 + if i == j { 5.0 } else { 0.0 }, 0.2)
        });
        let b = Mat::from_fn(3, 1, |i, _| C64::new(i as f64, 1.0));
        let x = solve(&a, &b);
        assert!(max_abs(&(&a * &x - &b)) < 1e-12);
    }
}
