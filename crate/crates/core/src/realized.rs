//! Daily realized variance and signed semivariance measures.
//!
//! For each day and asset, intraday bar returns are first differences of the
//! log-price grid. Realized variance is the sum of squared returns; the
//! signed semivariances split that sum by return sign (strict inequalities,
//! so zero returns contribute to neither side). The three measures satisfy
//! `rv = rs_minus + rs_plus` up to summation rounding.

use crate::ingest::IntradayPanel;
use crate::scalar::Real;
use chrono::NaiveDate;
use ndarray::{Array1, Array2};

/// Which realized measure a panel holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Rv,
    RsMinus,
    RsPlus,
}

impl MeasureKind {
    /// Stable lowercase name used in file names and metadata.
    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Rv => "rv",
            MeasureKind::RsMinus => "rs_minus",
            MeasureKind::RsPlus => "rs_plus",
        }
    }
}

/// A daily measure panel: one row per day, one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePanel<T> {
    pub kind: MeasureKind,
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    pub values: Array2<T>,
}

impl<T: Real> MeasurePanel<T> {
    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// Returns a copy with [`log_shifted`] applied to every value, for
    /// numerical conditioning of downstream regressions.
    pub fn log_transformed(&self) -> Self {
        Self {
            kind: self.kind,
            dates: self.dates.clone(),
            assets: self.assets.clone(),
            values: self.values.mapv(log_shifted),
        }
    }
}

/// The measure log transform, `ln(x + 1e-12)`; the shift keeps zero-valued
/// measures finite.
pub fn log_shifted<T: Real>(x: T) -> T {
    (x + T::from_const(1e-12)).ln()
}

/// The three daily measure panels computed from one intraday panel.
#[derive(Debug, Clone)]
pub struct Measures<T> {
    pub rv: MeasurePanel<T>,
    pub rs_minus: MeasurePanel<T>,
    pub rs_plus: MeasurePanel<T>,
}

/// Intraday bar returns for one (day, asset): first differences of the
/// log-price grid, `bars_per_day` of them.
pub fn daily_returns<T: Real>(panel: &IntradayPanel<T>, day: usize, asset: usize) -> Array1<T> {
    let bars = panel.bars_per_day();
    Array1::from_shape_fn(bars, |b| {
        panel.log_prices[[day, asset, b + 1]] - panel.log_prices[[day, asset, b]]
    })
}

/// Sums squared returns in total and split by sign: `(rv, rs_minus, rs_plus)`.
///
/// Zero returns contribute to the total only, matching the strict-inequality
/// sign buckets.
pub fn measures_from_returns<T: Real>(returns: impl IntoIterator<Item = T>) -> (T, T, T) {
    let mut total = T::zero();
    let mut neg = T::zero();
    let mut pos = T::zero();
    for r in returns {
        let sq = r * r;
        total += sq;
        if r < T::zero() {
            neg += sq;
        } else if r > T::zero() {
            pos += sq;
        }
    }
    (total, neg, pos)
}

/// Computes RV, RS-, and RS+ for every day and asset of the panel.
pub fn realized_measures<T: Real>(panel: &IntradayPanel<T>) -> Measures<T> {
    let (n_days, n_assets) = (panel.n_days(), panel.n_assets());
    let bars = panel.bars_per_day();
    let mut rv = Array2::zeros((n_days, n_assets));
    let mut rs_minus = Array2::zeros((n_days, n_assets));
    let mut rs_plus = Array2::zeros((n_days, n_assets));

    for d in 0..n_days {
        for a in 0..n_assets {
            let (total, neg, pos) = measures_from_returns((0..bars).map(|b| {
                panel.log_prices[[d, a, b + 1]] - panel.log_prices[[d, a, b]]
            }));
            rv[[d, a]] = total;
            rs_minus[[d, a]] = neg;
            rs_plus[[d, a]] = pos;
        }
    }

    let make = |kind, values| MeasurePanel {
        kind,
        dates: panel.days.clone(),
        assets: panel.assets.clone(),
        values,
    };
    Measures {
        rv: make(MeasureKind::Rv, rv),
        rs_minus: make(MeasureKind::RsMinus, rs_minus),
        rs_plus: make(MeasureKind::RsPlus, rs_plus),
    }
}
