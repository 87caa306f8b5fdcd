//! Generalized forecast-error variance decomposition and spillover indices.
//!
//! The decomposition allows correlated shocks and needs no factorization of
//! the residual covariance, so the resulting shares are invariant to variable
//! ordering. Share `omega[i][j]` measures how much of variable `i`'s H-step
//! forecast-error variance is attributable to shocks in variable `j`; rows
//! are then normalized to sum to one, and the index family aggregates the
//! off-diagonal mass into total, directional, net, and pairwise measures, all
//! in percent with a `1/N` convention.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::var::MaCoefficients;
use ndarray::{Array1, Array2};

/// How the shock variance of the source variable scales the decomposition.
///
/// `Variance` divides by the diagonal element of the residual covariance,
/// the convention of the generalized-decomposition literature and the
/// default here. `StdDev` divides by its square root instead; it is exposed
/// so the numerical impact of that alternative reading can be measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaConvention {
    #[default]
    Variance,
    StdDev,
}

impl SigmaConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            SigmaConvention::Variance => "variance",
            SigmaConvention::StdDev => "stddev",
        }
    }
}

impl std::str::FromStr for SigmaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(SigmaConvention::Variance),
            "stddev" => Ok(SigmaConvention::StdDev),
            other => Err(Error::InvalidParam {
                name: "sigma_convention",
                reason: format!("unknown convention '{other}', expected variance or stddev"),
            }),
        }
    }
}

/// Variance-decomposition matrices at one horizon.
#[derive(Debug, Clone)]
pub struct FevdResult<T> {
    /// Raw shares before normalization; non-negative.
    pub omega_raw: Array2<T>,
    /// Row-normalized shares; every row sums to one.
    pub omega_norm: Array2<T>,
    /// Forecast horizon used (number of moving-average terms).
    pub horizon: usize,
}

/// Diagonal of `sum_h psi[h] sigma psi[h]'`: the H-step forecast-error
/// variance of each variable. Exposed separately because it is the
/// decomposition denominator and a useful diagnostic in its own right.
pub fn forecast_error_variances<T: Real>(
    sigma_eps: &Array2<T>,
    psi: &MaCoefficients<T>,
) -> Array1<T> {
    accumulate(sigma_eps, psi).1
}

fn accumulate<T: Real>(sigma_eps: &Array2<T>, psi: &MaCoefficients<T>) -> (Array2<T>, Array1<T>) {
    let n = sigma_eps.nrows();
    let mut numerator = Array2::zeros((n, n));
    let mut denominator = Array1::zeros(n);
    for psi_h in &psi.psi {
        let a = psi_h.dot(sigma_eps);
        for i in 0..n {
            let mut fev = T::zero();
            for j in 0..n {
                numerator[[i, j]] += a[[i, j]] * a[[i, j]];
                fev += a[[i, j]] * psi_h[[i, j]];
            }
            denominator[i] += fev;
        }
    }
    (numerator, denominator)
}

/// Computes the generalized variance decomposition from a residual
/// covariance and moving-average coefficients.
///
/// # Errors
/// A non-positive shock variance or forecast-error variance (degenerate
/// covariance), or mismatched dimensions.
pub fn generalized_fevd<T: Real>(
    sigma_eps: &Array2<T>,
    psi: &MaCoefficients<T>,
    convention: SigmaConvention,
) -> Result<FevdResult<T>> {
    let n = sigma_eps.nrows();
    if sigma_eps.ncols() != n {
        return Err(Error::ShapeMismatch {
            context: "variance decomposition",
            expected: "square residual covariance".into(),
            actual: format!("{} x {}", n, sigma_eps.ncols()),
        });
    }
    if psi.psi.is_empty() {
        return Err(Error::InvalidParam {
            name: "psi",
            reason: "need at least one moving-average term".into(),
        });
    }
    for m in &psi.psi {
        if m.dim() != (n, n) {
            return Err(Error::ShapeMismatch {
                context: "variance decomposition",
                expected: format!("{n} x {n} moving-average terms"),
                actual: format!("{} x {}", m.nrows(), m.ncols()),
            });
        }
    }

    let (numerator, denominator) = accumulate(sigma_eps, psi);

    let mut scale = Array1::zeros(n);
    for j in 0..n {
        let var_j = sigma_eps[[j, j]];
        if var_j <= T::zero() {
            return Err(Error::DegenerateCovariance {
                reason: format!("shock variance {var_j} of variable {j} is not positive"),
            });
        }
        scale[j] = match convention {
            SigmaConvention::Variance => var_j,
            SigmaConvention::StdDev => var_j.sqrt(),
        };
    }
    for i in 0..n {
        if denominator[i] <= T::zero() {
            return Err(Error::DegenerateCovariance {
                reason: format!("forecast-error variance of variable {i} is not positive"),
            });
        }
    }

    let mut omega_raw = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let w = numerator[[i, j]] / (scale[j] * denominator[i]);
            debug_assert!(w >= T::zero(), "raw share must be non-negative");
            omega_raw[[i, j]] = w;
        }
    }

    let mut omega_norm = Array2::zeros((n, n));
    for i in 0..n {
        let row_sum = (0..n).map(|j| omega_raw[[i, j]]).sum::<T>();
        if row_sum <= T::zero() {
            return Err(Error::DegenerateCovariance {
                reason: format!("row {i} of the decomposition sums to {row_sum}"),
            });
        }
        for j in 0..n {
            omega_norm[[i, j]] = omega_raw[[i, j]] / row_sum;
        }
    }

    Ok(FevdResult {
        omega_raw,
        omega_norm,
        horizon: psi.psi.len(),
    })
}

/// The spillover-index family derived from one decomposition, in percent.
#[derive(Debug, Clone)]
pub struct SpilloverSet<T> {
    /// Share of forecast-error variance from cross-variable shocks, in
    /// `[0, 100)`.
    pub total: T,
    /// `from_others[i]`: spillover received by variable `i`.
    pub from_others: Array1<T>,
    /// `to_others[i]`: spillover transmitted by variable `i`.
    pub to_others: Array1<T>,
    /// `net[i] = to_others[i] - from_others[i]`.
    pub net: Array1<T>,
    /// `pairwise[[i, j]]`: net transmission from `i` to `j`; exactly
    /// antisymmetric with zero diagonal.
    pub pairwise: Array2<T>,
}

/// Aggregates a normalized decomposition into the index family.
pub fn spillover_indices<T: Real>(fevd: &FevdResult<T>) -> SpilloverSet<T> {
    let w = &fevd.omega_norm;
    let n = w.nrows();
    let hundred_over_n = T::from_const(100.0) / T::from_const(n as f64);

    let mut from_others = Array1::zeros(n);
    let mut to_others = Array1::zeros(n);
    let mut total = T::zero();
    for i in 0..n {
        let mut from = T::zero();
        let mut to = T::zero();
        for j in 0..n {
            if j != i {
                from += w[[i, j]];
                to += w[[j, i]];
            }
        }
        total += from;
        from_others[i] = hundred_over_n * from;
        to_others[i] = hundred_over_n * to;
    }
    let total = hundred_over_n * total;

    let net = Array1::from_shape_fn(n, |i| to_others[i] - from_others[i]);

    let mut pairwise = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let s = hundred_over_n * (w[[j, i]] - w[[i, j]]);
            pairwise[[i, j]] = s;
            pairwise[[j, i]] = -s;
        }
    }

    SpilloverSet {
        total,
        from_others,
        to_others,
        net,
        pairwise,
    }
}
