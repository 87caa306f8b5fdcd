//! Monte Carlo engine: a two-asset factor stochastic-volatility model on a
//! per-second Euler grid, with optional compound-Poisson jumps.
//!
//! Both assets load on one common Brownian factor; each also has an
//! idiosyncratic Brownian whose increments drive that asset's log-volatility
//! state, so volatility reacts to the asset's own shocks. The state restarts
//! every day from its stationary law N(0, (-2a)^-1), which keeps days
//! exchangeable and the null distribution of downstream statistics symmetric.

use crate::bootstrap::substream;
use crate::error::{Error, Result};
use crate::realized::measures_from_returns;
use crate::scalar::Real;
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Poisson, StandardNormal};
use std::str::FromStr;

/// Model parameters. Time is measured in days: one day is the unit interval,
/// discretized into `steps_per_day` Euler steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvParams<T> {
    /// Drift per day, asset 1.
    pub mu1: T,
    /// Drift per day, asset 2.
    pub mu2: T,
    /// Log-volatility level.
    pub beta0: T,
    /// Log-volatility loading on the state v.
    pub beta1: T,
    /// Mean-reversion rate of v; must be negative.
    pub alpha: T,
    /// Idiosyncratic loading of asset 1; |gamma| < 1.
    pub gamma1: T,
    /// Idiosyncratic loading of asset 2; |gamma| < 1.
    pub gamma2: T,
    /// Standard deviation of jump sizes.
    pub jump_sd: T,
    /// Expected jumps per asset per day; 0 disables jumps entirely.
    pub jump_intensity: T,
    /// Euler steps per day.
    pub steps_per_day: usize,
}

impl<T: Real> Default for SvParams<T> {
    fn default() -> Self {
        Self {
            mu1: T::zero(),
            mu2: T::zero(),
            beta0: T::from_const(-0.3125),
            beta1: T::from_const(0.125),
            alpha: T::from_const(-0.025),
            gamma1: T::from_const(-0.3),
            gamma2: T::from_const(-0.3),
            jump_sd: T::from_const(0.01),
            jump_intensity: T::zero(),
            steps_per_day: 23_400,
        }
    }
}

impl<T: Real> SvParams<T> {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu1,
            self.mu2,
            self.beta0,
            self.beta1,
            self.alpha,
            self.gamma1,
            self.gamma2,
            self.jump_sd,
            self.jump_intensity,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParam {
                name: "sv_params",
                reason: "all model parameters must be finite".into(),
            });
        }
        if self.alpha >= T::zero() {
            return Err(Error::InvalidParam {
                name: "alpha",
                reason: format!("mean reversion requires alpha < 0, got {}", self.alpha),
            });
        }
        if self.gamma1.abs() >= T::one() || self.gamma2.abs() >= T::one() {
            return Err(Error::InvalidParam {
                name: "gamma",
                reason: "idiosyncratic loadings must satisfy |gamma| < 1".into(),
            });
        }
        if self.jump_intensity < T::zero() {
            return Err(Error::InvalidParam {
                name: "jump_intensity",
                reason: "expected jump count cannot be negative".into(),
            });
        }
        if self.jump_sd < T::zero() {
            return Err(Error::InvalidParam {
                name: "jump_sd",
                reason: "jump size deviation cannot be negative".into(),
            });
        }
        if self.steps_per_day == 0 {
            return Err(Error::InvalidParam {
                name: "steps_per_day",
                reason: "at least one step per day is required".into(),
            });
        }
        Ok(())
    }

    /// Standard deviation of the daily volatility-state restart,
    /// the stationary deviation sqrt(1 / (-2 alpha)).
    pub fn restart_sd(&self) -> T {
        (T::one() / (T::from_const(-2.0) * self.alpha)).sqrt()
    }
}

/// Intraday sampling grid for the simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Subsample {
    /// 78 returns per day (five-minute bars on the default grid).
    #[default]
    FiveMinute,
    /// 36 returns per day, mimicking sparser real-data sampling.
    ThirtySixObs,
}

impl Subsample {
    pub fn bars(self) -> usize {
        match self {
            Subsample::FiveMinute => 78,
            Subsample::ThirtySixObs => 36,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subsample::FiveMinute => "5min",
            Subsample::ThirtySixObs => "36obs",
        }
    }

    /// Steps between sampled grid points.
    ///
    /// # Errors
    /// The step grid must divide evenly into the requested bars.
    pub fn stride(self, steps_per_day: usize) -> Result<usize> {
        let bars = self.bars();
        if steps_per_day % bars != 0 {
            return Err(Error::InvalidParam {
                name: "steps_per_day",
                reason: format!("{steps_per_day} steps cannot form {bars} equal bars"),
            });
        }
        Ok(steps_per_day / bars)
    }
}

impl FromStr for Subsample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "5min" => Ok(Subsample::FiveMinute),
            "36obs" => Ok(Subsample::ThirtySixObs),
            other => Err(Error::InvalidParam {
                name: "subsample",
                reason: format!("unknown grid '{other}', expected 5min or 36obs"),
            }),
        }
    }
}

/// One simulated day: log-price and volatility-state paths on the full Euler
/// grid, `steps_per_day + 1` points each, prices starting at 0.
#[derive(Debug, Clone)]
pub struct DayPaths<T> {
    pub x1: Vec<T>,
    pub x2: Vec<T>,
    pub v1: Vec<T>,
    pub v2: Vec<T>,
}

impl<T: Real> DayPaths<T> {
    /// Volatility state at the end of the day.
    pub fn end_state(&self) -> (T, T) {
        (*self.v1.last().unwrap(), *self.v2.last().unwrap())
    }
}

/// Simulated daily measure panels for the two assets, `days x 2` each.
#[derive(Debug, Clone)]
pub struct SimulatedPanel<T> {
    pub rv: Array2<T>,
    pub rs_minus: Array2<T>,
    pub rs_plus: Array2<T>,
    pub seed: u64,
}

/// Draws the daily volatility-state restart for both assets.
///
/// Two standard normal draws, asset 1 first.
pub fn draw_restart<T: Real, R: Rng + ?Sized>(params: &SvParams<T>, rng: &mut R) -> (T, T) {
    let sd = params.restart_sd();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    (sd * T::from_const(z1), sd * T::from_const(z2))
}

/// Runs one day of Euler steps from the given volatility state.
///
/// Per step the draw order is fixed: the two idiosyncratic increments, the
/// common-factor increment, then (only when jumps are enabled) each asset's
/// jump count and sizes. Volatility enters at the left endpoint of the step;
/// the state update uses the same Brownian increment as the price, which is
/// what ties volatility to the asset's own shocks.
pub fn simulate_day<T: Real, R: Rng + ?Sized>(
    params: &SvParams<T>,
    v0: (T, T),
    rng: &mut R,
) -> DayPaths<T> {
    let steps = params.steps_per_day;
    let dt = T::one() / T::from_const(steps as f64);
    let sqrt_dt = dt.sqrt();
    let common1 = (T::one() - params.gamma1 * params.gamma1).sqrt();
    let common2 = (T::one() - params.gamma2 * params.gamma2).sqrt();
    let jumps = if params.jump_intensity > T::zero() {
        let rate = params.jump_intensity.as_f64() / steps as f64;
        Some(Poisson::new(rate).expect("positive finite per-step intensity"))
    } else {
        None
    };

    let mut x1 = vec![T::zero(); steps + 1];
    let mut x2 = vec![T::zero(); steps + 1];
    let mut v1 = vec![T::zero(); steps + 1];
    let mut v2 = vec![T::zero(); steps + 1];
    v1[0] = v0.0;
    v2[0] = v0.1;

    for s in 0..steps {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let zw: f64 = rng.sample(StandardNormal);
        let db1 = sqrt_dt * T::from_const(z1);
        let db2 = sqrt_dt * T::from_const(z2);
        let dw = sqrt_dt * T::from_const(zw);

        let sigma1 = (params.beta0 + params.beta1 * v1[s]).exp();
        let sigma2 = (params.beta0 + params.beta1 * v2[s]).exp();

        let mut dx1 = params.mu1 * dt + params.gamma1 * sigma1 * db1 + common1 * sigma1 * dw;
        let mut dx2 = params.mu2 * dt + params.gamma2 * sigma2 * db2 + common2 * sigma2 * dw;
        if let Some(poisson) = jumps {
            let n1: f64 = rng.sample(poisson);
            for _ in 0..n1 as u64 {
                let z: f64 = rng.sample(StandardNormal);
                dx1 += params.jump_sd * T::from_const(z);
            }
            let n2: f64 = rng.sample(poisson);
            for _ in 0..n2 as u64 {
                let z: f64 = rng.sample(StandardNormal);
                dx2 += params.jump_sd * T::from_const(z);
            }
        }

        x1[s + 1] = x1[s] + dx1;
        x2[s + 1] = x2[s] + dx2;
        v1[s + 1] = v1[s] + params.alpha * v1[s] * dt + db1;
        v2[s + 1] = v2[s] + params.alpha * v2[s] * dt + db2;
    }

    DayPaths { x1, x2, v1, v2 }
}

fn strided_returns<T: Real>(path: &[T], stride: usize) -> Vec<T> {
    let bars = (path.len() - 1) / stride;
    (0..bars)
        .map(|k| path[(k + 1) * stride] - path[k * stride])
        .collect()
}

/// Simulates `days` days and reduces each to the three daily measures.
///
/// Returns `(rv, rs_minus, rs_plus)`, each `days x 2`. Consumes the RNG
/// stream in a fixed order (restart draws, then step draws, day by day), so
/// equal streams give bitwise-equal panels.
pub fn simulate_measures<T: Real, R: Rng + ?Sized>(
    params: &SvParams<T>,
    days: usize,
    subsample: Subsample,
    rng: &mut R,
) -> Result<(Array2<T>, Array2<T>, Array2<T>)> {
    params.validate()?;
    if days == 0 {
        return Err(Error::InvalidParam {
            name: "days",
            reason: "at least one simulated day is required".into(),
        });
    }
    let stride = subsample.stride(params.steps_per_day)?;

    let mut rv = Array2::zeros((days, 2));
    let mut rs_minus = Array2::zeros((days, 2));
    let mut rs_plus = Array2::zeros((days, 2));
    for d in 0..days {
        let v0 = draw_restart(params, rng);
        let paths = simulate_day(params, v0, rng);
        for (a, path) in [&paths.x1, &paths.x2].into_iter().enumerate() {
            let (total, neg, pos) = measures_from_returns(strided_returns(path, stride));
            rv[[d, a]] = total;
            rs_minus[[d, a]] = neg;
            rs_plus[[d, a]] = pos;
        }
    }
    Ok((rv, rs_minus, rs_plus))
}

/// Seeded convenience wrapper around [`simulate_measures`].
///
/// Uses sub-stream 0 of the root seed, so a standalone panel equals the
/// first replication of a bootstrap run with the same root seed.
pub fn simulate_panel<T: Real>(
    params: &SvParams<T>,
    days: usize,
    subsample: Subsample,
    seed: u64,
) -> Result<SimulatedPanel<T>> {
    let mut rng = substream(seed, 0);
    let (rv, rs_minus, rs_plus) = simulate_measures(params, days, subsample, &mut rng)?;
    Ok(SimulatedPanel {
        rv,
        rs_minus,
        rs_plus,
        seed,
    })
}

/// Sampling diagnostics for calibration checks.
#[derive(Debug, Clone, Copy)]
pub struct SimDiagnostics<T> {
    /// Mean over days of the per-day sample correlation of the two assets'
    /// subsampled returns.
    pub mean_daily_correlation: T,
    /// Pooled sample variance of the volatility state at sampled grid points.
    pub v_variance: T,
    pub days: usize,
}

/// Simulates `days` days and reports correlation and state-variance
/// diagnostics. Days whose returns have zero variance are skipped in the
/// correlation average.
pub fn correlation_diagnostics<T: Real>(
    params: &SvParams<T>,
    days: usize,
    subsample: Subsample,
    seed: u64,
) -> Result<SimDiagnostics<T>> {
    params.validate()?;
    if days == 0 {
        return Err(Error::InvalidParam {
            name: "days",
            reason: "at least one simulated day is required".into(),
        });
    }
    let stride = subsample.stride(params.steps_per_day)?;
    let mut rng = substream(seed, 0);

    let mut corr_sum = T::zero();
    let mut corr_days = 0usize;
    // Welford accumulator over v at sampled grid points, both assets pooled.
    let mut count = T::zero();
    let mut mean = T::zero();
    let mut m2 = T::zero();

    for _ in 0..days {
        let v0 = draw_restart(params, &mut rng);
        let paths = simulate_day(params, v0, &mut rng);
        let r1 = strided_returns(&paths.x1, stride);
        let r2 = strided_returns(&paths.x2, stride);
        if let Some(rho) = pearson(&r1, &r2) {
            corr_sum += rho;
            corr_days += 1;
        }
        for path in [&paths.v1, &paths.v2] {
            for k in 0..=subsample.bars() {
                let v = path[k * stride];
                count += T::one();
                let delta = v - mean;
                mean += delta / count;
                m2 += delta * (v - mean);
            }
        }
    }

    if corr_days == 0 {
        return Err(Error::DegenerateCovariance {
            reason: "every simulated day had zero return variance".into(),
        });
    }
    Ok(SimDiagnostics {
        mean_daily_correlation: corr_sum / T::from_const(corr_days as f64),
        v_variance: m2 / (count - T::one()),
        days,
    })
}

fn pearson<T: Real>(a: &[T], b: &[T]) -> Option<T> {
    let n = T::from_const(a.len() as f64);
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let mut saa = T::zero();
    let mut sbb = T::zero();
    let mut sab = T::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        saa += dx * dx;
        sbb += dy * dy;
        sab += dx * dy;
    }
    let denom = (saa * sbb).sqrt();
    if denom > T::zero() {
        Some(sab / denom)
    } else {
        None
    }
}
