//! Simulated null distribution of the asymmetry measure, with quantile
//! confidence bands and the symmetry test they support.
//!
//! Each replication simulates a fresh panel, runs one full-panel spillover
//! estimation on the positive and negative semivariance panels, and records
//! the resulting SAM. Replications draw from counter-derived RNG sub-streams,
//! so the collected distribution is bitwise independent of thread count and
//! scheduling order.

use crate::asymmetry::{sam_from_levels, window_spillovers, SamFlag, SamSeries};
use crate::error::{Error, Result};
use crate::realized::log_shifted;
use crate::scalar::Real;
use crate::sim::{simulate_measures, Subsample, SvParams};
use crate::spillover::SigmaConvention;
use crate::var::VarSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// RNG sub-stream for one replication: a 32-byte seed carrying the root seed
/// in bytes 0..8 and the replication counter in bytes 8..16, little endian,
/// remaining bytes zero.
pub fn substream(root: u64, replication: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&root.to_le_bytes());
    seed[8..16].copy_from_slice(&replication.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// How each replication's panel is turned into a SAM value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub var_spec: VarSpec,
    pub subsample: Subsample,
    pub convention: SigmaConvention,
    /// Apply the measure log transform before fitting.
    pub log_transform: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            var_spec: VarSpec::default(),
            subsample: Subsample::default(),
            convention: SigmaConvention::default(),
            log_transform: false,
        }
    }
}

/// Collected SAM replications and their quantile summary.
#[derive(Debug, Clone)]
pub struct SamDistribution<T> {
    /// Replications requested.
    pub requested: usize,
    /// Retained SAM values in replication order.
    pub sam_values: Vec<T>,
    /// Originating replication counter of each retained value.
    pub replication_ids: Vec<u64>,
    /// Replications dropped for pipeline failure or non-finite output.
    pub dropped: usize,
    /// Empirical (2.5%, 50%, 97.5%) quantiles of the retained values.
    pub quantiles: (T, T, T),
    pub root_seed: u64,
}

impl<T: Real> SamDistribution<T> {
    pub fn retained(&self) -> usize {
        self.sam_values.len()
    }

    /// The 95% band, available once at least 100 replications survive.
    pub fn confidence_band(&self) -> Option<(T, T)> {
        if self.retained() >= 100 {
            Some((self.quantiles.0, self.quantiles.2))
        } else {
            None
        }
    }
}

/// Linear-interpolation empirical quantile (the common "type 7" rule):
/// rank h = (n-1)p, value interpolated between the surrounding order
/// statistics. `sorted` must be ascending and non-empty, `p` in [0, 1].
pub fn quantile_type7<T: Real>(sorted: &[T], p: f64) -> T {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let w = T::from_const(h - lo as f64);
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

fn replicate_sam<T: Real>(
    params: &SvParams<T>,
    panel_days: usize,
    cfg: &PipelineConfig,
    rng: &mut ChaCha8Rng,
) -> Result<T> {
    let (_, mut rs_minus, mut rs_plus) = simulate_measures(params, panel_days, cfg.subsample, rng)?;
    if cfg.log_transform {
        rs_minus.mapv_inplace(log_shifted);
        rs_plus.mapv_inplace(log_shifted);
    }
    let (plus, _) = window_spillovers(rs_plus.view(), &cfg.var_spec, cfg.convention)?;
    let (minus, _) = window_spillovers(rs_minus.view(), &cfg.var_spec, cfg.convention)?;
    Ok(sam_from_levels(plus.total, minus.total).0)
}

fn summarize<T: Real>(
    outcomes: Vec<Option<T>>,
    requested: usize,
    root_seed: u64,
) -> Result<SamDistribution<T>> {
    let mut sam_values = Vec::with_capacity(requested);
    let mut replication_ids = Vec::with_capacity(requested);
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Some(v) if v.is_finite() => {
                sam_values.push(v);
                replication_ids.push(rep as u64);
            }
            _ => {}
        }
    }
    let dropped = requested - sam_values.len();
    if dropped * 100 > requested {
        return Err(Error::ExcessiveDrops {
            dropped,
            total: requested,
        });
    }
    let mut sorted = sam_values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let quantiles = (
        quantile_type7(&sorted, 0.025),
        quantile_type7(&sorted, 0.5),
        quantile_type7(&sorted, 0.975),
    );
    Ok(SamDistribution {
        requested,
        sam_values,
        replication_ids,
        dropped,
        quantiles,
        root_seed,
    })
}

/// Collects the SAM null distribution over `replications` simulated panels.
///
/// Replications run in parallel but each owns a counter-derived sub-stream,
/// so results are identical under any thread count. Failed replications are
/// dropped and counted; more than 1% drops aborts the run.
pub fn bootstrap_sam<T: Real>(
    params: &SvParams<T>,
    panel_days: usize,
    replications: usize,
    cfg: &PipelineConfig,
    root_seed: u64,
) -> Result<SamDistribution<T>> {
    params.validate()?;
    cfg.var_spec.validate()?;
    if replications == 0 {
        return Err(Error::InvalidParam {
            name: "replications",
            reason: "at least one replication is required".into(),
        });
    }
    let min_days = cfg.var_spec.min_window(2);
    if panel_days < min_days {
        return Err(Error::InsufficientData {
            context: "replication panel".into(),
            required: min_days,
            actual: panel_days,
        });
    }

    let outcomes: Vec<Option<T>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(root_seed, rep);
            replicate_sam(params, panel_days, cfg, &mut rng).ok()
        })
        .collect();
    summarize(outcomes, replications, root_seed)
}

/// Outcome of the symmetry hypothesis check for one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Observed SAM lies strictly outside the simulated 95% band.
    Reject,
    /// Observed SAM lies inside the closed band.
    FailToReject,
    /// The window had no estimate to test.
    Skipped,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Reject => "reject",
            Decision::FailToReject => "fail-to-reject",
            Decision::Skipped => "skipped",
        }
    }
}

/// Decisions for a series against an explicit closed band `[lo, hi]`:
/// reject only strictly outside, skip missing windows.
pub fn decide_with_band<T: Real>(series: &SamSeries<T>, lo: T, hi: T) -> Vec<Decision> {
    series
        .sam
        .iter()
        .zip(series.flags.iter())
        .map(|(&sam, &flag)| match flag {
            SamFlag::Missing => Decision::Skipped,
            _ if sam < lo || sam > hi => Decision::Reject,
            _ => Decision::FailToReject,
        })
        .collect()
}

/// Tests each window's SAM against the simulated null band.
///
/// The band is closed: values on either endpoint fail to reject. Missing
/// windows are skipped.
///
/// # Errors
/// The distribution must carry a usable band (at least 100 retained
/// replications).
pub fn test_symmetry<T: Real>(
    series: &SamSeries<T>,
    dist: &SamDistribution<T>,
) -> Result<Vec<Decision>> {
    let (lo, hi) = dist.confidence_band().ok_or(Error::InvalidParam {
        name: "replications",
        reason: format!(
            "a confidence band needs at least 100 retained replications, have {}",
            dist.retained()
        ),
    })?;
    Ok(decide_with_band(series, lo, hi))
}
