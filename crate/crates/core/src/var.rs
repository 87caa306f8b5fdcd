//! Least-squares vector autoregression and its moving-average representation.
//!
//! A VAR(p) is fitted equation by equation on lagged regressors (optionally
//! with an intercept). The residual covariance uses the
//! degrees-of-freedom-adjusted estimator `R'R / (T - p - k)` with `k` the
//! per-equation regressor count. Stability is diagnosed, never enforced: the
//! spectral radius of the companion matrix is recorded on every fit so that
//! rolling pipelines can flag near-unit-root windows while still producing
//! indices from the finitely many moving-average terms they need.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use ndarray::{Array1, Array2, ArrayView2};

/// Condition-number threshold above which a regressor matrix is treated as
/// numerically rank deficient.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Estimation settings for one VAR fit and its variance decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSpec {
    /// Lag order `p`.
    pub lag_order: usize,
    /// Whether each equation includes a constant term.
    pub include_intercept: bool,
    /// Forecast horizon `H` used by the variance decomposition.
    pub horizon: usize,
}

impl Default for VarSpec {
    fn default() -> Self {
        Self {
            lag_order: 2,
            include_intercept: true,
            horizon: 10,
        }
    }
}

impl VarSpec {
    /// Validates the numeric fields.
    pub fn validate(&self) -> Result<()> {
        if self.lag_order == 0 {
            return Err(Error::InvalidParam {
                name: "lag_order",
                reason: "lag order must be at least 1".into(),
            });
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParam {
                name: "horizon",
                reason: "horizon must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Per-equation regressor count for an `n`-variable system.
    pub fn regressor_count(&self, n_vars: usize) -> usize {
        n_vars * self.lag_order + usize::from(self.include_intercept)
    }

    /// Smallest window length this spec can be estimated on (one residual
    /// degree of freedom).
    pub fn min_window(&self, n_vars: usize) -> usize {
        self.lag_order + self.regressor_count(n_vars) + 1
    }
}

/// A fitted VAR(p).
#[derive(Debug, Clone)]
pub struct VarFit<T> {
    /// Coefficient matrices `phi[j]` for lag `j + 1`, each `N x N`.
    pub phi: Vec<Array2<T>>,
    /// Per-equation constant terms, when estimated.
    pub intercept: Option<Array1<T>>,
    /// Degrees-of-freedom-adjusted residual covariance, symmetric `N x N`.
    pub sigma_eps: Array2<T>,
    /// Residual matrix, `(T - p) x N`.
    pub residuals: Array2<T>,
    /// Spectral radius of the companion matrix (>= 1 means unstable).
    pub spectral_radius: T,
    /// Two-norm condition number of the regressor matrix.
    pub regressor_cond: T,
}

impl<T: Real> VarFit<T> {
    pub fn n_vars(&self) -> usize {
        self.sigma_eps.nrows()
    }

    /// Whether the companion matrix has an eigenvalue on or outside the unit
    /// circle.
    pub fn is_unstable(&self) -> bool {
        self.spectral_radius >= T::one()
    }
}

/// Moving-average coefficients `psi[0..H]`, with `psi[0]` the identity.
#[derive(Debug, Clone)]
pub struct MaCoefficients<T> {
    pub psi: Vec<Array2<T>>,
}

/// Fits a VAR(p) to a `T x N` window by per-equation least squares.
///
/// # Errors
/// Non-finite input, a window too short for one residual degree of freedom,
/// or a regressor matrix with condition number above [`SINGULAR_CONDITION`]
/// (reported as a singular fit; rolling drivers re-label it with the window
/// start date).
pub fn fit_var<T: Real>(window: ArrayView2<'_, T>, spec: &VarSpec) -> Result<VarFit<T>> {
    spec.validate()?;
    let (t_len, n) = window.dim();
    if n == 0 {
        return Err(Error::InvalidParam {
            name: "window",
            reason: "window has no columns".into(),
        });
    }
    if window.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "regression window",
        });
    }
    let p = spec.lag_order;
    let k = spec.regressor_count(n);
    if t_len < spec.min_window(n) {
        return Err(Error::InsufficientData {
            context: format!("VAR({p}) fit on {n} variables"),
            required: spec.min_window(n),
            actual: t_len,
        });
    }

    let rows = t_len - p;
    let mut x = Array2::zeros((rows, k));
    let mut y = Array2::zeros((rows, n));
    for r in 0..rows {
        let t = p + r;
        let mut c = 0;
        if spec.include_intercept {
            x[[r, 0]] = T::one();
            c = 1;
        }
        for lag in 1..=p {
            for m in 0..n {
                x[[r, c]] = window[[t - lag, m]];
                c += 1;
            }
        }
        for m in 0..n {
            y[[r, m]] = window[[t, m]];
        }
    }

    let cond = linalg::cond2(&x);
    if !cond.is_finite() || cond.as_f64() > SINGULAR_CONDITION {
        return Err(Error::SingularFit {
            condition: cond.as_f64(),
            window_start: "full input".into(),
        });
    }

    let beta = linalg::lstsq(&x, &y)?;

    let offset = usize::from(spec.include_intercept);
    let intercept = spec
        .include_intercept
        .then(|| Array1::from_shape_fn(n, |i| beta[[0, i]]));
    let phi: Vec<Array2<T>> = (0..p)
        .map(|lag| Array2::from_shape_fn((n, n), |(i, m)| beta[[offset + lag * n + m, i]]))
        .collect();

    let residuals = &y - &x.dot(&beta);
    let dof = T::from_const((rows - k) as f64);
    let gram = residuals.t().dot(&residuals);
    let half = T::from_const(0.5);
    let sigma_eps =
        Array2::from_shape_fn((n, n), |(i, j)| (gram[[i, j]] + gram[[j, i]]) * half / dof);

    let spectral_radius = linalg::spectral_radius(&companion_matrix(&phi));

    Ok(VarFit {
        phi,
        intercept,
        sigma_eps,
        residuals,
        spectral_radius,
        regressor_cond: cond,
    })
}

/// Companion form of the lag polynomial: an `Np x Np` matrix whose powers
/// generate the moving-average coefficients in the top-left block.
pub fn companion_matrix<T: Real>(phi: &[Array2<T>]) -> Array2<T> {
    let p = phi.len();
    let n = phi[0].nrows();
    let mut c = Array2::zeros((n * p, n * p));
    for (lag, phi_j) in phi.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                c[[i, lag * n + j]] = phi_j[[i, j]];
            }
        }
    }
    for block in 1..p {
        for i in 0..n {
            c[[block * n + i, (block - 1) * n + i]] = T::one();
        }
    }
    c
}

/// Moving-average coefficients by the lag recursion:
/// `psi[0] = I`, `psi[h] = sum_{j=1}^{min(h,p)} phi[j] psi[h-j]`.
///
/// Returns `horizon` matrices, `psi[0]` through `psi[horizon - 1]`.
///
/// # Errors
/// A zero horizon.
pub fn ma_coefficients<T: Real>(fit: &VarFit<T>, horizon: usize) -> Result<MaCoefficients<T>> {
    if horizon == 0 {
        return Err(Error::InvalidParam {
            name: "horizon",
            reason: "horizon must be at least 1".into(),
        });
    }
    let n = fit.n_vars();
    let p = fit.phi.len();
    let mut psi: Vec<Array2<T>> = Vec::with_capacity(horizon);
    psi.push(Array2::eye(n));
    for h in 1..horizon {
        let mut acc = Array2::zeros((n, n));
        for j in 1..=h.min(p) {
            acc = acc + fit.phi[j - 1].dot(&psi[h - j]);
        }
        psi.push(acc);
    }
    Ok(MaCoefficients { psi })
}

/// Information-criterion diagnostic for lag orders `1..=max_lag`.
///
/// All candidates are fitted on the common effective sample that drops the
/// first `max_lag` rows, so the criteria are comparable across orders. The
/// penalized quantity is `ln det` of the maximum-likelihood residual
/// covariance; the parameter count is `p N^2` plus `N` for the intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagDiagnostic<T> {
    pub lag_order: usize,
    pub aic: T,
    pub bic: T,
}

/// Computes AIC/BIC across candidate lag orders without changing any fit.
///
/// # Errors
/// Propagates fit errors; a residual covariance with a non-positive
/// eigenvalue is reported as degenerate.
pub fn lag_order_diagnostics<T: Real>(
    window: ArrayView2<'_, T>,
    max_lag: usize,
    include_intercept: bool,
) -> Result<Vec<LagDiagnostic<T>>> {
    if max_lag == 0 {
        return Err(Error::InvalidParam {
            name: "max_lag",
            reason: "need at least one candidate lag order".into(),
        });
    }
    let (t_len, n) = window.dim();
    if t_len <= max_lag {
        return Err(Error::InsufficientData {
            context: "lag-order diagnostics".into(),
            required: max_lag + 1,
            actual: t_len,
        });
    }
    let t_eff = T::from_const((t_len - max_lag) as f64);

    let mut out = Vec::with_capacity(max_lag);
    for p in 1..=max_lag {
        // Common effective sample: drop the first max_lag rows regardless of p.
        let sub = window.slice(ndarray::s![(max_lag - p).., ..]);
        let spec = VarSpec {
            lag_order: p,
            include_intercept,
            horizon: 1,
        };
        let fit = fit_var(sub, &spec)?;
        let rows = T::from_const(fit.residuals.nrows() as f64);
        let gram = fit.residuals.t().dot(&fit.residuals);
        let sigma_ml = gram.mapv(|g| g / rows);
        let mut log_det = T::zero();
        for eig in linalg::sym_eigenvalues(&sigma_ml)? {
            if eig <= T::zero() {
                return Err(Error::DegenerateCovariance {
                    reason: format!("non-positive eigenvalue {eig} in lag diagnostics"),
                });
            }
            log_det += eig.ln();
        }
        let params = T::from_const((p * n * n + if include_intercept { n } else { 0 }) as f64);
        let aic = log_det + T::from_const(2.0) * params / t_eff;
        let bic = log_det + t_eff.ln() * params / t_eff;
        out.push(LagDiagnostic {
            lag_order: p,
            aic,
            bic,
        });
    }
    Ok(out)
}
