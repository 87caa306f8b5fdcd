//! Rolling-window spillover series and spillover asymmetry measures.
//!
//! A window of fixed length slides over a daily measure panel; each position
//! gets a VAR fit, a variance decomposition, and the index family. Windows
//! whose fit breaks down numerically are emitted as missing so the series
//! keeps its time axis; unstable (but estimable) windows are flagged and
//! kept. The asymmetry measure compares the index computed on the positive
//! and negative semivariance panels: `sam = 100 (s+ - s-) / ((s+ + s-)/2)`,
//! a relative difference bounded by construction to `[-200, 200]`.

use crate::error::{Error, Result};
use crate::realized::MeasurePanel;
use crate::scalar::Real;
use crate::spillover::{generalized_fevd, spillover_indices, SigmaConvention, SpilloverSet};
use crate::var::{fit_var, ma_coefficients, VarSpec};
use chrono::NaiveDate;
use ndarray::ArrayView2;
use rayon::prelude::*;

/// Rolling-window geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RollingSpec {
    /// Window length in days.
    pub window_length: usize,
    /// Days between consecutive window starts.
    pub step: usize,
}

impl Default for RollingSpec {
    fn default() -> Self {
        Self {
            window_length: 200,
            step: 1,
        }
    }
}

impl RollingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 {
            return Err(Error::InvalidParam {
                name: "window_length",
                reason: "window length must be at least 1".into(),
            });
        }
        if self.step == 0 {
            return Err(Error::InvalidParam {
                name: "step",
                reason: "step must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Number of windows over a panel of `n_days` rows; zero when the panel
    /// is shorter than one window.
    pub fn window_count(&self, n_days: usize) -> usize {
        if n_days < self.window_length {
            0
        } else {
            (n_days - self.window_length) / self.step + 1
        }
    }
}

/// Estimation state of one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFlag {
    /// Estimated, companion spectral radius below one.
    Ok,
    /// Estimated, but the fitted system is not covariance stationary.
    Unstable,
    /// Fit broke down; the window is missing from the series.
    Failed,
}

impl WindowFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            WindowFlag::Ok => "ok",
            WindowFlag::Unstable => "unstable",
            WindowFlag::Failed => "failed",
        }
    }
}

/// Rolling spillover series: one entry per window position.
#[derive(Debug, Clone)]
pub struct RollingSpillovers<T> {
    pub assets: Vec<String>,
    /// Window end dates.
    pub dates: Vec<NaiveDate>,
    /// Index family per window; `None` where the fit failed.
    pub sets: Vec<Option<SpilloverSet<T>>>,
    pub flags: Vec<WindowFlag>,
    /// Diagnostic records for failed windows: (window index, cause).
    pub failures: Vec<(usize, String)>,
}

impl<T: Real> RollingSpillovers<T> {
    pub fn n_windows(&self) -> usize {
        self.dates.len()
    }

    /// Total-spillover series with missing windows as `None`.
    pub fn totals(&self) -> Vec<Option<T>> {
        self.sets.iter().map(|s| s.as_ref().map(|s| s.total)).collect()
    }
}

/// Fits one window and derives its index family.
///
/// This is the single evaluation the rolling driver repeats; it is exposed
/// for full-sample use (window = whole panel).
pub fn window_spillovers<T: Real>(
    window: ArrayView2<'_, T>,
    var_spec: &VarSpec,
    convention: SigmaConvention,
) -> Result<(SpilloverSet<T>, bool)> {
    let fit = fit_var(window, var_spec)?;
    let ma = ma_coefficients(&fit, var_spec.horizon)?;
    let fevd = generalized_fevd(&fit.sigma_eps, &ma, convention)?;
    Ok((spillover_indices(&fevd), fit.is_unstable()))
}

/// Runs the windowed pipeline over a measure panel.
///
/// Window `w` covers rows `[w step, w step + window_length)`; its date is the
/// window's last day. Windows are evaluated in parallel; output order and
/// values are independent of the parallelism degree.
///
/// # Errors
/// A panel shorter than one window, or a window length too short for the
/// requested lag order, are rejected before any computation (the request is
/// inconsistent, not the data). Numerical breakdown inside a window is not an
/// error: the window is flagged and skipped.
pub fn rolling_spillovers<T: Real>(
    panel: &MeasurePanel<T>,
    var_spec: &VarSpec,
    roll: &RollingSpec,
    convention: SigmaConvention,
) -> Result<RollingSpillovers<T>> {
    var_spec.validate()?;
    roll.validate()?;
    let n_days = panel.n_days();
    let n = panel.n_assets();
    if roll.window_length < var_spec.min_window(n) {
        return Err(Error::InvalidParam {
            name: "window_length",
            reason: format!(
                "window of {} days cannot identify a VAR({}) on {} variables (need {})",
                roll.window_length,
                var_spec.lag_order,
                n,
                var_spec.min_window(n)
            ),
        });
    }
    if n_days < roll.window_length {
        return Err(Error::InvalidParam {
            name: "window_length",
            reason: format!(
                "panel has {n_days} days, shorter than one window of {}",
                roll.window_length
            ),
        });
    }

    let count = roll.window_count(n_days);
    let results: Vec<(Option<SpilloverSet<T>>, WindowFlag, Option<String>)> = (0..count)
        .into_par_iter()
        .map(|w| {
            let start = w * roll.step;
            let window = panel
                .values
                .slice(ndarray::s![start..start + roll.window_length, ..]);
            match window_spillovers(window, var_spec, convention) {
                Ok((set, unstable)) => {
                    let flag = if unstable {
                        WindowFlag::Unstable
                    } else {
                        WindowFlag::Ok
                    };
                    (Some(set), flag, None)
                }
                Err(e) => {
                    let cause = match e {
                        Error::SingularFit { condition, .. } => Error::SingularFit {
                            condition,
                            window_start: panel.dates[start].to_string(),
                        }
                        .to_string(),
                        other => other.to_string(),
                    };
                    (None, WindowFlag::Failed, Some(cause))
                }
            }
        })
        .collect();

    let mut sets = Vec::with_capacity(count);
    let mut flags = Vec::with_capacity(count);
    let mut failures = Vec::new();
    for (w, (set, flag, cause)) in results.into_iter().enumerate() {
        sets.push(set);
        flags.push(flag);
        if let Some(cause) = cause {
            failures.push((w, cause));
        }
    }
    let dates = (0..count)
        .map(|w| panel.dates[w * roll.step + roll.window_length - 1])
        .collect();

    Ok(RollingSpillovers {
        assets: panel.assets.clone(),
        dates,
        sets,
        flags,
        failures,
    })
}

/// Which series a SAM value describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamKind {
    Total,
    FromAsset(usize),
    ToAsset(usize),
}

/// Directional component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    From,
    To,
}

/// Validity state of one SAM value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamFlag {
    Ok,
    /// Both spillovers were zero; the value is reported as 0.
    Degenerate,
    /// A window was missing on at least one side.
    Missing,
}

impl SamFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            SamFlag::Ok => "ok",
            SamFlag::Degenerate => "degenerate",
            SamFlag::Missing => "missing",
        }
    }
}

/// A SAM time series, optionally with a bootstrap confidence band.
#[derive(Debug, Clone)]
pub struct SamSeries<T> {
    pub kind: SamKind,
    /// Window end dates, shared with the input spillover series.
    pub dates: Vec<NaiveDate>,
    /// Values in percent; zero where flagged missing.
    pub sam: Vec<T>,
    pub flags: Vec<SamFlag>,
    /// Constant confidence band from the bootstrap null, when attached.
    pub ci: Option<(T, T)>,
}

/// The asymmetry value for one pair of spillover levels.
///
/// Returns 0 with a degenerate flag when both levels are zero.
pub fn sam_from_levels<T: Real>(plus: T, minus: T) -> (T, SamFlag) {
    let half = T::from_const(0.5);
    let denom = half * (plus + minus);
    if denom == T::zero() {
        (T::zero(), SamFlag::Degenerate)
    } else {
        let sam = T::from_const(100.0) * (plus - minus) / denom;
        debug_assert!(sam.abs() <= T::from_const(200.0) + T::epsilon());
        (sam, SamFlag::Ok)
    }
}

fn check_alignment<T: Real>(
    plus: &RollingSpillovers<T>,
    minus: &RollingSpillovers<T>,
) -> Result<()> {
    if plus.assets != minus.assets {
        return Err(Error::MisalignedPanels {
            reason: format!(
                "asset lists differ: [{}] vs [{}]",
                plus.assets.join(","),
                minus.assets.join(",")
            ),
        });
    }
    if plus.dates != minus.dates {
        let mismatching: Vec<String> = plus
            .dates
            .iter()
            .zip(minus.dates.iter())
            .filter(|(a, b)| a != b)
            .take(8)
            .map(|(a, b)| format!("{a}/{b}"))
            .collect();
        let detail = if mismatching.is_empty() {
            format!("{} vs {} windows", plus.dates.len(), minus.dates.len())
        } else {
            format!("mismatching dates: {}", mismatching.join(", "))
        };
        return Err(Error::MisalignedPanels { reason: detail });
    }
    Ok(())
}

fn sam_series<T: Real>(
    plus: &RollingSpillovers<T>,
    minus: &RollingSpillovers<T>,
    kind: SamKind,
    pick: impl Fn(&SpilloverSet<T>) -> T,
) -> Result<SamSeries<T>> {
    check_alignment(plus, minus)?;
    let mut sam = Vec::with_capacity(plus.n_windows());
    let mut flags = Vec::with_capacity(plus.n_windows());
    for (sp, sm) in plus.sets.iter().zip(minus.sets.iter()) {
        match (sp, sm) {
            (Some(sp), Some(sm)) => {
                let (value, flag) = sam_from_levels(pick(sp), pick(sm));
                sam.push(value);
                flags.push(flag);
            }
            _ => {
                sam.push(T::zero());
                flags.push(SamFlag::Missing);
            }
        }
    }
    Ok(SamSeries {
        kind,
        dates: plus.dates.clone(),
        sam,
        flags,
        ci: None,
    })
}

/// SAM of the total spillover index.
///
/// # Errors
/// Misaligned input series (different windows or assets).
pub fn sam_total<T: Real>(
    plus: &RollingSpillovers<T>,
    minus: &RollingSpillovers<T>,
) -> Result<SamSeries<T>> {
    sam_series(plus, minus, SamKind::Total, |s| s.total)
}

/// SAM of one asset's directional spillover (received or transmitted).
///
/// # Errors
/// Misaligned input series or an asset index out of range.
pub fn sam_directional<T: Real>(
    plus: &RollingSpillovers<T>,
    minus: &RollingSpillovers<T>,
    asset: usize,
    direction: Direction,
) -> Result<SamSeries<T>> {
    if asset >= plus.assets.len() {
        return Err(Error::InvalidParam {
            name: "asset",
            reason: format!(
                "index {asset} out of range for {} assets",
                plus.assets.len()
            ),
        });
    }
    let kind = match direction {
        Direction::From => SamKind::FromAsset(asset),
        Direction::To => SamKind::ToAsset(asset),
    };
    sam_series(plus, minus, kind, move |s| match direction {
        Direction::From => s.from_others[asset],
        Direction::To => s.to_others[asset],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realized::MeasureKind;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_distr::StandardNormal;

    fn measure_panel(values: Array2<f64>, kind: MeasureKind) -> MeasurePanel<f64> {
        let n_days = values.nrows();
        let n = values.ncols();
        MeasurePanel {
            kind,
            dates: (0..n_days)
                .map(|d| {
                    NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Duration::days(d as i64)
                })
                .collect(),
            assets: (0..n).map(|a| format!("a{a}")).collect(),
            values,
        }
    }

    fn noise_panel(seed: u64, n_days: usize, n: usize) -> MeasurePanel<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        // Positive, measure-like values: squared noise around a level.
        let values = Array2::from_shape_fn((n_days, n), |_| {
            let z: f64 = rng.sample(StandardNormal);
            1.0 + 0.2 * z + 0.1 * z * z
        });
        measure_panel(values, MeasureKind::Rv)
    }

    fn spec(p: usize, h: usize) -> VarSpec {
        VarSpec {
            lag_order: p,
            include_intercept: true,
            horizon: h,
        }
    }

    #[test]
    fn window_counts_match_the_formula() {
        let roll = RollingSpec {
            window_length: 200,
            step: 1,
        };
        assert_eq!(roll.window_count(200), 1);
        assert_eq!(roll.window_count(205), 6);
        assert_eq!(roll.window_count(199), 0);
        let strided = RollingSpec {
            window_length: 10,
            step: 3,
        };
        assert_eq!(strided.window_count(16), 3);
    }

    #[test]
    fn single_window_series_has_one_entry() {
        let panel = noise_panel(1, 40, 2);
        let roll = RollingSpec {
            window_length: 40,
            step: 1,
        };
        let out = rolling_spillovers(&panel, &spec(1, 5), &roll, SigmaConvention::Variance)
            .unwrap();
        assert_eq!(out.n_windows(), 1);
        assert_eq!(out.dates[0], panel.dates[39]);
        assert!(matches!(out.flags[0], WindowFlag::Ok | WindowFlag::Unstable));
    }

    #[test]
    fn too_short_panel_is_a_validation_error() {
        let panel = noise_panel(2, 30, 2);
        let roll = RollingSpec {
            window_length: 31,
            step: 1,
        };
        let err = rolling_spillovers(&panel, &spec(1, 5), &roll, SigmaConvention::Variance)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParam { .. }));
    }

    #[test]
    fn window_dates_are_window_ends() {
        let panel = noise_panel(3, 45, 2);
        let roll = RollingSpec {
            window_length: 40,
            step: 2,
        };
        let out = rolling_spillovers(&panel, &spec(1, 5), &roll, SigmaConvention::Variance)
            .unwrap();
        assert_eq!(out.n_windows(), 3);
        assert_eq!(out.dates[0], panel.dates[39]);
        assert_eq!(out.dates[1], panel.dates[41]);
        assert_eq!(out.dates[2], panel.dates[43]);
    }

    #[test]
    fn singular_window_is_flagged_and_series_continues() {
        // One window contains a constant column; later windows recover.
        let mut panel = noise_panel(4, 60, 2);
        for t in 0..20 {
            panel.values[[t, 1]] = 2.5;
        }
        let roll = RollingSpec {
            window_length: 20,
            step: 1,
        };
        let out = rolling_spillovers(&panel, &spec(1, 5), &roll, SigmaConvention::Variance)
            .unwrap();
        assert_eq!(out.flags[0], WindowFlag::Failed);
        assert!(out.sets[0].is_none());
        assert!(!out.failures.is_empty());
        assert!(out.failures[0].1.contains("2010-01-01"));
        let last = out.n_windows() - 1;
        assert!(out.sets[last].is_some());
    }

    #[test]
    fn iid_noise_series_is_flat() {
        // Independent noise has no cross-dynamics: the total series should
        // hover at a level set by finite-sample bias, with small dispersion.
        let panel = noise_panel(5, 500, 3);
        let roll = RollingSpec::default();
        let out = rolling_spillovers(&panel, &spec(2, 10), &roll, SigmaConvention::Variance)
            .unwrap();
        let totals: Vec<f64> = out.totals().into_iter().map(Option::unwrap).collect();
        assert_eq!(totals.len(), 301);
        let mean = totals.iter().sum::<f64>() / totals.len() as f64;
        let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / totals.len() as f64;
        assert!(
            var.sqrt() < 5.0,
            "total series too volatile: sd = {}",
            var.sqrt()
        );
    }

    #[test]
    fn sam_levels_match_hand_values() {
        assert_eq!(sam_from_levels(40.0, 40.0), (0.0, SamFlag::Ok));
        assert_eq!(sam_from_levels(60.0, 20.0), (100.0, SamFlag::Ok));
        assert_eq!(sam_from_levels(10.0, 30.0), (-100.0, SamFlag::Ok));
        assert_eq!(sam_from_levels(0.0, 0.0), (0.0, SamFlag::Degenerate));
        // Extremes of the relative-difference form.
        assert_eq!(sam_from_levels(50.0, 0.0).0, 200.0);
        assert_eq!(sam_from_levels(0.0, 50.0).0, -200.0);
    }

    #[test]
    fn identical_panels_give_zero_sam_everywhere() {
        let panel = noise_panel(6, 60, 2);
        let roll = RollingSpec {
            window_length: 40,
            step: 1,
        };
        let s = spec(1, 5);
        let plus = rolling_spillovers(&panel, &s, &roll, SigmaConvention::Variance).unwrap();
        let minus = rolling_spillovers(&panel, &s, &roll, SigmaConvention::Variance).unwrap();
        let sam = sam_total(&plus, &minus).unwrap();
        assert!(sam.sam.iter().all(|&x| x == 0.0));
        assert!(sam.flags.iter().all(|&f| f == SamFlag::Ok));
        assert_eq!(sam.dates, plus.dates);
    }

    #[test]
    fn swapping_sides_negates_sam_exactly() {
        let p1 = noise_panel(7, 70, 2);
        let p2 = noise_panel(8, 70, 2);
        let roll = RollingSpec {
            window_length: 50,
            step: 1,
        };
        let s = spec(1, 8);
        let a = rolling_spillovers(&p1, &s, &roll, SigmaConvention::Variance).unwrap();
        let b = rolling_spillovers(&p2, &s, &roll, SigmaConvention::Variance).unwrap();
        let ab = sam_total(&a, &b).unwrap();
        let ba = sam_total(&b, &a).unwrap();
        for (x, y) in ab.sam.iter().zip(ba.sam.iter()) {
            assert_eq!(*x, -*y);
        }
        for (i, x) in ab.sam.iter().enumerate() {
            assert!(x.abs() <= 200.0, "sam[{i}] = {x} out of range");
        }
    }

    #[test]
    fn directional_sam_picks_the_requested_component() {
        let p1 = noise_panel(9, 60, 3);
        let p2 = noise_panel(10, 60, 3);
        let roll = RollingSpec {
            window_length: 45,
            step: 1,
        };
        let s = spec(1, 5);
        let plus = rolling_spillovers(&p1, &s, &roll, SigmaConvention::Variance).unwrap();
        let minus = rolling_spillovers(&p2, &s, &roll, SigmaConvention::Variance).unwrap();
        let from = sam_directional(&plus, &minus, 1, Direction::From).unwrap();
        assert_eq!(from.kind, SamKind::FromAsset(1));
        let (expected, _) = sam_from_levels(
            plus.sets[0].as_ref().unwrap().from_others[1],
            minus.sets[0].as_ref().unwrap().from_others[1],
        );
        assert_eq!(from.sam[0], expected);

        let to = sam_directional(&plus, &minus, 2, Direction::To).unwrap();
        assert_eq!(to.kind, SamKind::ToAsset(2));
        assert!(sam_directional(&plus, &minus, 3, Direction::To).is_err());
    }

    #[test]
    fn misaligned_series_are_rejected_with_dates() {
        let p1 = noise_panel(11, 60, 2);
        let mut p2 = noise_panel(12, 61, 2);
        p2.dates.remove(0);
        p2.values = p2.values.slice(ndarray::s![1.., ..]).to_owned();
        let roll = RollingSpec {
            window_length: 50,
            step: 1,
        };
        let s = spec(1, 5);
        let a = rolling_spillovers(&p1, &s, &roll, SigmaConvention::Variance).unwrap();
        let b = rolling_spillovers(&p2, &s, &roll, SigmaConvention::Variance).unwrap();
        let err = sam_total(&a, &b).unwrap_err();
        assert!(matches!(err, Error::MisalignedPanels { .. }));
        assert!(err.to_string().contains("2010-02-19"));
    }

    #[test]
    fn missing_windows_propagate_to_sam() {
        let mut p1 = noise_panel(13, 60, 2);
        for t in 0..20 {
            p1.values[[t, 0]] = 1.0;
        }
        let p2 = noise_panel(14, 60, 2);
        let roll = RollingSpec {
            window_length: 20,
            step: 1,
        };
        let s = spec(1, 5);
        let plus = rolling_spillovers(&p1, &s, &roll, SigmaConvention::Variance).unwrap();
        let minus = rolling_spillovers(&p2, &s, &roll, SigmaConvention::Variance).unwrap();
        assert_eq!(plus.flags[0], WindowFlag::Failed);
        let sam = sam_total(&plus, &minus).unwrap();
        assert_eq!(sam.flags[0], SamFlag::Missing);
        assert_eq!(sam.sam[0], 0.0);
        assert_eq!(*sam.flags.last().unwrap(), SamFlag::Ok);
    }
}
