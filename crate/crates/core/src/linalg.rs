//! Dense linear algebra kernels used by the estimators.
//!
//! Everything here is generic over [`Real`] and hand-rolled on `ndarray`
//! storage: Householder least squares, one-sided Jacobi singular values
//! (accurate for small singular values, unlike normal-equation approaches),
//! a symmetric Jacobi eigensolver, and a normalized-squaring spectral radius.
//! Problem sizes in this crate are tiny (tens of rows/columns), so simplicity
//! and accuracy win over blocked performance.

use crate::error::{Error, Result};
use crate::scalar::Real;
use ndarray::Array2;

const MAX_JACOBI_SWEEPS: usize = 60;
const SPECTRAL_SQUARINGS: usize = 48;

/// Solves the least-squares problem `min ||A X - B||` by Householder QR.
///
/// `A` is `m x n` with `m >= n`; `B` is `m x k`. Returns the `n x k` solution.
///
/// # Errors
/// Shape mismatch, an underdetermined system, or an exactly rank-deficient
/// `A` (zero pivot). Callers that need a graded singularity test should check
/// [`cond2`] first; this routine only rejects exact breakdown.
pub fn lstsq<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Result<Array2<T>> {
    let (m, n) = a.dim();
    let k = b.ncols();
    if b.nrows() != m {
        return Err(Error::ShapeMismatch {
            context: "lstsq right-hand side",
            expected: format!("{m} rows"),
            actual: format!("{} rows", b.nrows()),
        });
    }
    if m < n {
        return Err(Error::InsufficientData {
            context: "lstsq".into(),
            required: n,
            actual: m,
        });
    }

    let mut r = a.to_owned();
    let mut y = b.to_owned();
    let mut v = vec![T::zero(); m];

    for j in 0..n {
        let mut s = T::zero();
        for i in j..m {
            s += r[[i, j]] * r[[i, j]];
        }
        let norm = s.sqrt();
        if norm == T::zero() {
            return Err(Error::RankDeficient { context: "lstsq" });
        }
        let alpha = if r[[j, j]] >= T::zero() { -norm } else { norm };
        v[j] = r[[j, j]] - alpha;
        for i in (j + 1)..m {
            v[i] = r[[i, j]];
        }
        let vtv = s - r[[j, j]] * r[[j, j]] + v[j] * v[j];
        let beta = T::from_const(2.0) / vtv;

        r[[j, j]] = alpha;
        for i in (j + 1)..m {
            r[[i, j]] = T::zero();
        }
        for c in (j + 1)..n {
            let mut w = T::zero();
            for i in j..m {
                w += v[i] * r[[i, c]];
            }
            w *= beta;
            for i in j..m {
                r[[i, c]] = r[[i, c]] - w * v[i];
            }
        }
        for c in 0..k {
            let mut w = T::zero();
            for i in j..m {
                w += v[i] * y[[i, c]];
            }
            w *= beta;
            for i in j..m {
                y[[i, c]] = y[[i, c]] - w * v[i];
            }
        }
    }

    let mut x = Array2::zeros((n, k));
    for c in 0..k {
        for row in (0..n).rev() {
            let mut acc = y[[row, c]];
            for col in (row + 1)..n {
                acc -= r[[row, col]] * x[[col, c]];
            }
            if r[[row, row]] == T::zero() {
                return Err(Error::RankDeficient { context: "lstsq" });
            }
            x[[row, c]] = acc / r[[row, row]];
        }
    }
    Ok(x)
}

/// Singular values of `A`, sorted descending, via one-sided Jacobi rotations.
///
/// Orthogonalizes column pairs until every pair is orthogonal relative to
/// machine precision; the singular values are then the column norms. This
/// keeps full relative accuracy for small singular values, which the
/// condition-number guard in the VAR fit depends on.
pub fn singular_values<T: Real>(a: &Array2<T>) -> Vec<T> {
    let (m, n) = a.dim();
    let mut u = a.to_owned();
    let tol = T::epsilon() * T::from_const(8.0);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for i in 0..m {
                    let up = u[[i, p]];
                    let uq = u[[i, q]];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::from_const(2.0) * gamma);
                let t = {
                    let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                    sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[[i, p]];
                    let uq = u[[i, q]];
                    u[[i, p]] = c * up - s * uq;
                    u[[i, q]] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<T> = (0..n)
        .map(|j| {
            let mut s = T::zero();
            for i in 0..m {
                s += u[[i, j]] * u[[i, j]];
            }
            s.sqrt()
        })
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sigma
}

/// Two-norm condition number `sigma_max / sigma_min` of a rectangular matrix.
///
/// Returns infinity when the smallest singular value is exactly zero (or the
/// matrix is empty).
pub fn cond2<T: Real>(a: &Array2<T>) -> T {
    let sigma = singular_values(a);
    match (sigma.first(), sigma.last()) {
        (Some(&max), Some(&min)) if min > T::zero() => max / min,
        _ => T::infinity(),
    }
}

/// Eigenvalues of a symmetric matrix, sorted ascending, via cyclic Jacobi.
///
/// The input is symmetrized (`(A + A') / 2`) before iteration, so tiny
/// asymmetries from accumulated rounding are tolerated.
///
/// # Errors
/// Returns a shape error for non-square input.
pub fn sym_eigenvalues<T: Real>(a: &Array2<T>) -> Result<Vec<T>> {
    let (n, nc) = a.dim();
    if n != nc {
        return Err(Error::ShapeMismatch {
            context: "sym_eigenvalues",
            expected: "square matrix".into(),
            actual: format!("{n} x {nc}"),
        });
    }
    let half = T::from_const(0.5);
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = (a[[i, j]] + a[[j, i]]) * half;
        }
    }

    let frob = frobenius(&m);
    let off_tol = T::epsilon() * frob.max(T::min_positive_value());

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += m[[p, q]] * m[[p, q]];
                }
            }
        }
        if off.sqrt() <= off_tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let tau = (m[[q, q]] - m[[p, p]]) / (T::from_const(2.0) * apq);
                let t = {
                    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                    sign / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = m[[i, p]];
                    let aiq = m[[i, q]];
                    m[[i, p]] = c * aip - s * aiq;
                    m[[i, q]] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = m[[p, j]];
                    let aqj = m[[q, j]];
                    m[[p, j]] = c * apj - s * aqj;
                    m[[q, j]] = s * apj + c * aqj;
                }
            }
        }
    }

    let mut eigs: Vec<T> = (0..n).map(|i| m[[i, i]]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    Ok(eigs)
}

/// Spectral radius of a square matrix by normalized repeated squaring.
///
/// Uses the norm-root limit of matrix powers: after `K` squarings with
/// per-step normalization, `ln rho = sum_k 2^{-k} ln ||M_k||` up to a
/// `O(2^{-K} log)` defect. Handles defective and complex spectra, and returns
/// exactly 0 for nilpotent input.
pub fn spectral_radius<T: Real>(a: &Array2<T>) -> T {
    let n = a.nrows();
    if n == 0 {
        return T::zero();
    }
    debug_assert_eq!(n, a.ncols(), "spectral radius needs a square matrix");

    let mut m = a.to_owned();
    let mut acc = T::zero();
    let mut weight = T::one();
    let half = T::from_const(0.5);

    for step in 0..=SPECTRAL_SQUARINGS {
        let norm = frobenius(&m);
        if norm == T::zero() {
            return T::zero();
        }
        if !norm.is_finite() {
            return T::infinity();
        }
        acc += weight * norm.ln();
        if step == SPECTRAL_SQUARINGS {
            break;
        }
        let scaled = m.mapv(|x| x / norm);
        m = scaled.dot(&scaled);
        weight *= half;
    }
    acc.exp()
}

fn frobenius<T: Real>(m: &Array2<T>) -> T {
    m.iter().map(|&x| x * x).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};
    use rand::prelude::*;

    #[test]
    fn lstsq_solves_exact_square_system() {
        let a = array![[2.0, 1.0], [1.0, 3.0]];
        let b = array![[5.0], [10.0]];
        let x = lstsq(&a, &b).unwrap();
        assert_relative_eq!(x[[0, 0]], 1.0, max_relative = 1e-12);
        assert_relative_eq!(x[[1, 0]], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn lstsq_recovers_exact_line_fit() {
        // y = 1 + 2 x sampled without noise: residual must vanish.
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let mut a = Array2::zeros((5, 2));
        let mut b = Array2::zeros((5, 1));
        for (i, &x) in xs.iter().enumerate() {
            a[[i, 0]] = 1.0;
            a[[i, 1]] = x;
            b[[i, 0]] = 1.0 + 2.0 * x;
        }
        let coef = lstsq(&a, &b).unwrap();
        assert_relative_eq!(coef[[0, 0]], 1.0, max_relative = 1e-12);
        assert_relative_eq!(coef[[1, 0]], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn lstsq_residual_is_orthogonal_to_regressors() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = Array2::from_shape_fn((40, 4), |_| rng.random::<f64>() - 0.5);
        let b = Array2::from_shape_fn((40, 2), |_| rng.random::<f64>() - 0.5);
        let x = lstsq(&a, &b).unwrap();
        let resid = &b - &a.dot(&x);
        let gram = a.t().dot(&resid);
        for &g in gram.iter() {
            assert!(g.abs() < 1e-10, "normal equations violated: {g}");
        }
    }

    #[test]
    fn lstsq_rejects_zero_column() {
        let a = array![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]];
        let b = array![[1.0], [1.0], [1.0]];
        assert!(lstsq(&a, &b).is_err());
    }

    #[test]
    fn singular_values_match_hand_computation() {
        // A = [[1,2],[3,4]]: eigenvalues of A'A are 15 +- sqrt(221).
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let s = singular_values(&a);
        let hi = (15.0 + 221.0_f64.sqrt()).sqrt();
        let lo = (15.0 - 221.0_f64.sqrt()).sqrt();
        assert_relative_eq!(s[0], hi, max_relative = 1e-12);
        assert_relative_eq!(s[1], lo, max_relative = 1e-12);
    }

    #[test]
    fn singular_values_detect_rank_deficiency() {
        let a: Array2<f64> = array![[1.0, 1.0], [1.0, 1.0]];
        let s = singular_values(&a);
        assert_relative_eq!(s[0], 2.0, max_relative = 1e-12);
        assert!(s[1].abs() < 1e-12);
        assert_eq!(cond2(&a), f64::INFINITY);
    }

    #[test]
    fn cond_of_orthogonal_matrix_is_one() {
        let (c, s) = (0.6, 0.8);
        let a = array![[c, -s], [s, c]];
        assert_relative_eq!(cond2(&a), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn cond_tracks_tiny_singular_values() {
        // diag(1, 1e-13) has condition 1e13; a Gram-matrix approach would
        // saturate near 1/sqrt(eps) and miss it.
        let a = array![[1.0, 0.0], [0.0, 1e-13]];
        assert_relative_eq!(cond2(&a), 1e13, max_relative = 1e-10);
    }

    #[test]
    fn sym_eigenvalues_match_hand_cases() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let e = sym_eigenvalues(&a).unwrap();
        assert_relative_eq!(e[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(e[1], 3.0, max_relative = 1e-12);

        // Block diagonal: 2x2 block [[3,4],[4,9]] has eigenvalues 6 -+ 5.
        let a = array![[2.0, 0.0, 0.0], [0.0, 3.0, 4.0], [0.0, 4.0, 9.0]];
        let e = sym_eigenvalues(&a).unwrap();
        assert_relative_eq!(e[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(e[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(e[2], 11.0, max_relative = 1e-12);
    }

    #[test]
    fn sym_eigenvalues_agree_with_singular_values_on_spd() {
        let mut rng = StdRng::seed_from_u64(11);
        let b = Array2::from_shape_fn((5, 5), |_| rng.random::<f64>() - 0.5);
        let spd = b.t().dot(&b);
        let mut eigs = sym_eigenvalues(&spd).unwrap();
        eigs.reverse();
        let svs = singular_values(&spd);
        for (e, s) in eigs.iter().zip(svs.iter()) {
            assert_relative_eq!(*e, *s, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_radius_matches_known_spectra() {
        let a = array![[0.5, 0.0], [0.0, -0.9]];
        assert_relative_eq!(spectral_radius(&a), 0.9, max_relative = 1e-9);

        // Plane rotation: both eigenvalues on the unit circle.
        let (c, s) = (0.6, 0.8);
        let rot = array![[c, -s], [s, c]];
        assert_relative_eq!(spectral_radius(&rot), 1.0, max_relative = 1e-9);

        // Scalar lag-2 recursion y_t = 0.5 y_{t-1} + 0.3 y_{t-2}:
        // largest root of z^2 - 0.5 z - 0.3.
        let comp = array![[0.5, 0.3], [1.0, 0.0]];
        let expected = (0.5 + (0.25_f64 + 1.2).sqrt()) / 2.0;
        assert_relative_eq!(spectral_radius(&comp), expected, max_relative = 1e-9);
    }

    #[test]
    fn spectral_radius_of_nilpotent_is_zero() {
        let a = array![[0.0, 1.0], [0.0, 0.0]];
        assert_eq!(spectral_radius(&a), 0.0);
    }

    #[test]
    fn spectral_radius_works_in_f32() {
        let a: Array2<f32> = array![[0.25, 0.0], [0.0, 0.5]];
        assert_relative_eq!(spectral_radius(&a), 0.5f32, max_relative = 1e-5);
    }
}
