//! CSV readers and writers for panels, series, and distributions.
//!
//! All value columns are written in scientific notation. Measure and series
//! files carry 17 significant digits, enough to round-trip an f64 exactly,
//! so rereading a written file reproduces the original bits and reruns can
//! be compared byte for byte. Decomposition tables are rendered at 10
//! significant digits, a display precision chosen for side-by-side reading.
//! Missing entries are empty fields, never sentinel numbers.

use crate::asymmetry::{RollingSpillovers, SamFlag, SamSeries};
use crate::bootstrap::SamDistribution;
use crate::error::{Error, Result};
use crate::ingest::{IntradayPanel, TradingCalendar};
use crate::realized::{MeasureKind, MeasurePanel};
use crate::spillover::FevdResult;
use chrono::NaiveDate;
use ndarray::Array2;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Full-precision rendering: 17 significant digits, exact f64 round-trip.
pub fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Display rendering for decomposition tables: 10 significant digits.
pub fn format_sig10(x: f64) -> String {
    format!("{x:.9e}")
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_error(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(io_error(path))?,
    ))
}

/// Writes a daily measure panel as `date,<asset>,...` rows.
pub fn write_measure_csv(path: &Path, panel: &MeasurePanel<f64>) -> Result<()> {
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "date,{}", panel.assets.join(","))?;
        for (d, date) in panel.dates.iter().enumerate() {
            write!(out, "{date}")?;
            for a in 0..panel.n_assets() {
                write!(out, ",{}", format_full(panel.values[[d, a]]))?;
            }
            writeln!(out)?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

/// Reads a measure panel written by [`write_measure_csv`].
///
/// # Errors
/// Malformed headers, unparsable cells, non-finite values, and dates that
/// are not strictly increasing are data errors carrying the line number.
pub fn read_measure_csv(path: &Path, kind: MeasureKind) -> Result<MeasurePanel<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => parse_error(path, 0, format!("{other:?}")),
        })?;

    let header = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    if header.len() < 2 || &header[0] != "date" {
        return Err(parse_error(
            path,
            1,
            "expected header `date,<asset>,...` with at least one asset column",
        ));
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    for (i, a) in assets.iter().enumerate() {
        if a.is_empty() || assets[..i].contains(a) {
            return Err(parse_error(path, 1, format!("empty or duplicate asset column `{a}`")));
        }
    }

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        if record.len() != assets.len() + 1 {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, got {}", assets.len() + 1, record.len()),
            ));
        }
        let date = record[0]
            .parse::<NaiveDate>()
            .map_err(|e| parse_error(path, line, format!("bad date `{}`: {e}", &record[0])))?;
        if let Some(last) = dates.last() {
            if date <= *last {
                return Err(parse_error(
                    path,
                    line,
                    format!("dates must be strictly increasing, {date} follows {last}"),
                ));
            }
        }
        dates.push(date);
        for cell in record.iter().skip(1) {
            let value = cell
                .parse::<f64>()
                .map_err(|e| parse_error(path, line, format!("bad value `{cell}`: {e}")))?;
            if !value.is_finite() {
                return Err(parse_error(path, line, format!("non-finite value `{cell}`")));
            }
            rows.push(value);
        }
    }
    if dates.is_empty() {
        return Err(parse_error(path, 1, "no data rows"));
    }
    let values = Array2::from_shape_vec((dates.len(), assets.len()), rows)
        .expect("row-major cells match the recorded shape");
    Ok(MeasurePanel {
        kind,
        dates,
        assets,
        values,
    })
}

/// Writes the filled intraday log-price grid as `date,time,<asset>,...`
/// rows, one row per grid point.
pub fn write_grid_csv(
    path: &Path,
    panel: &IntradayPanel<f64>,
    calendar: &TradingCalendar,
) -> Result<()> {
    let boundaries = calendar.bar_boundaries();
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "date,time,{}", panel.assets.join(","))?;
        for (d, date) in panel.days.iter().enumerate() {
            for (b, time) in boundaries.iter().enumerate() {
                write!(out, "{date},{}", time.format("%H:%M:%S"))?;
                for a in 0..panel.assets.len() {
                    write!(out, ",{}", format_full(panel.log_prices[[d, a, b]]))?;
                }
                writeln!(out)?;
            }
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

/// Writes a rolling spillover series: one row per window with the total,
/// per-asset directional components, and the window flag. Failed windows
/// keep their row with empty value fields.
pub fn write_spillover_csv(path: &Path, series: &RollingSpillovers<f64>) -> Result<()> {
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        let tagged = |prefix: &str| {
            series
                .assets
                .iter()
                .map(|a| format!("{prefix}_{a}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(
            out,
            "date,total,{},{},{},flag",
            tagged("from"),
            tagged("to"),
            tagged("net")
        )?;
        let n = series.assets.len();
        for (w, date) in series.dates.iter().enumerate() {
            write!(out, "{date}")?;
            match &series.sets[w] {
                Some(set) => {
                    write!(out, ",{}", format_full(set.total))?;
                    for group in [&set.from_others, &set.to_others, &set.net] {
                        for value in group.iter() {
                            write!(out, ",{}", format_full(*value))?;
                        }
                    }
                }
                None => {
                    for _ in 0..1 + 3 * n {
                        write!(out, ",")?;
                    }
                }
            }
            writeln!(out, ",{}", series.flags[w].as_str())?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

/// Writes a SAM series as `date,sam,ci_low,ci_high,flag` rows. The band is
/// constant when present; missing windows keep empty value fields.
pub fn write_sam_csv(path: &Path, series: &SamSeries<f64>) -> Result<()> {
    let mut out = create(path)?;
    let band = series.ci.map(|(lo, hi)| (format_full(lo), format_full(hi)));
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "date,sam,ci_low,ci_high,flag")?;
        for (w, date) in series.dates.iter().enumerate() {
            let flag = series.flags[w];
            let sam = match flag {
                SamFlag::Missing => String::new(),
                _ => format_full(series.sam[w]),
            };
            let (lo, hi) = match &band {
                Some((lo, hi)) => (lo.as_str(), hi.as_str()),
                None => ("", ""),
            };
            writeln!(out, "{date},{sam},{lo},{hi},{}", flag.as_str())?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

/// Writes a normalized decomposition table: rows are receiving assets,
/// columns are shock sources.
pub fn write_fevd_csv(path: &Path, fevd: &FevdResult<f64>, assets: &[String]) -> Result<()> {
    let n = assets.len();
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "asset,{}", assets.join(","))?;
        for i in 0..n {
            write!(out, "{}", assets[i])?;
            for j in 0..n {
                write!(out, ",{}", format_sig10(fevd.omega_norm[[i, j]]))?;
            }
            writeln!(out)?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

/// Writes one decomposition table per window into a single long CSV:
/// `date,asset,<source>,...` with one row per (window, receiving asset).
pub fn write_fevd_snapshots_csv(
    path: &Path,
    assets: &[String],
    snapshots: &[(NaiveDate, FevdResult<f64>)],
) -> Result<()> {
    let n = assets.len();
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "date,asset,{}", assets.join(","))?;
        for (date, fevd) in snapshots {
            for i in 0..n {
                write!(out, "{date},{}", assets[i])?;
                for j in 0..n {
                    write!(out, ",{}", format_sig10(fevd.omega_norm[[i, j]]))?;
                }
                writeln!(out)?;
            }
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

/// Writes retained bootstrap replications as `replication,sam` rows.
pub fn write_distribution_csv(path: &Path, dist: &SamDistribution<f64>) -> Result<()> {
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "replication,sam")?;
        for (rep, sam) in dist.replication_ids.iter().zip(dist.sam_values.iter()) {
            writeln!(out, "{rep},{}", format_full(*sam))?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_error(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymmetry::{SamKind, WindowFlag};
    use crate::spillover::SpilloverSet;
    use ndarray::{array, Array1, Array3};
    use rand::prelude::*;
    use std::fs;
    use tempfile::TempDir;

    fn dates(n: usize) -> Vec<NaiveDate> {
        (0..n)
            .map(|d| NaiveDate::from_ymd_opt(2011, 3, 1).unwrap() + chrono::Duration::days(d as i64))
            .collect()
    }

    #[test]
    fn full_format_round_trips_exactly() {
        let mut rng = StdRng::seed_from_u64(1);
        let mut values = vec![
            0.1,
            1.0 / 3.0,
            -0.0,
            0.0,
            1e-300,
            5e-324,
            f64::MAX,
            -123456.789,
        ];
        for _ in 0..200 {
            values.push(rng.random::<f64>() * 10f64.powi(rng.random_range(-30..30)));
        }
        for v in values {
            let back: f64 = format_full(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "value {v}");
        }
    }

    #[test]
    fn sig10_format_is_stable() {
        assert_eq!(format_sig10(0.2), "2.000000000e-1");
        assert_eq!(format_sig10(1.0), "1.000000000e0");
    }

    #[test]
    fn measure_csv_round_trips_bitwise() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("rv.csv");
        let mut rng = StdRng::seed_from_u64(2);
        let values = Array2::from_shape_fn((7, 3), |_| rng.random::<f64>() * 1e-3);
        let panel = MeasurePanel {
            kind: MeasureKind::Rv,
            dates: dates(7),
            assets: vec!["aaa".into(), "bbb".into(), "ccc".into()],
            values,
        };
        write_measure_csv(&path, &panel).unwrap();
        let back = read_measure_csv(&path, MeasureKind::Rv).unwrap();
        assert_eq!(back.dates, panel.dates);
        assert_eq!(back.assets, panel.assets);
        for (a, b) in back.values.iter().zip(panel.values.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        // Rewriting what was read reproduces the file byte for byte.
        let copy = dir.path().join("rv2.csv");
        write_measure_csv(&copy, &back).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&copy).unwrap());
    }

    #[test]
    fn measure_csv_rejects_disorder_and_bad_cells() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.csv");

        fs::write(&path, "date,a\n2011-01-05,1.0\n2011-01-04,2.0\n").unwrap();
        let err = read_measure_csv(&path, MeasureKind::Rv).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"));
        assert!(err.to_string().contains(":3:"));

        fs::write(&path, "day,a\n2011-01-05,1.0\n").unwrap();
        assert!(read_measure_csv(&path, MeasureKind::Rv).is_err());

        fs::write(&path, "date,a\n2011-01-05,nan\n").unwrap();
        assert!(read_measure_csv(&path, MeasureKind::Rv).is_err());

        fs::write(&path, "date,a,a\n2011-01-05,1.0,2.0\n").unwrap();
        assert!(read_measure_csv(&path, MeasureKind::Rv).is_err());

        fs::write(&path, "date,a\n").unwrap();
        assert!(read_measure_csv(&path, MeasureKind::Rv).is_err());
    }

    #[test]
    fn spillover_csv_keeps_failed_rows_with_empty_cells() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("spill.csv");
        let set = SpilloverSet {
            total: 20.0,
            from_others: Array1::from(vec![10.0, 10.0]),
            to_others: Array1::from(vec![10.0, 10.0]),
            net: Array1::from(vec![0.0, 0.0]),
            pairwise: array![[0.0, 5.0], [-5.0, 0.0]],
        };
        let series = RollingSpillovers {
            assets: vec!["x".into(), "y".into()],
            dates: dates(2),
            sets: vec![Some(set), None],
            flags: vec![WindowFlag::Ok, WindowFlag::Failed],
            failures: vec![(1, "broke".into())],
        };
        write_spillover_csv(&path, &series).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "date,total,from_x,from_y,to_x,to_y,net_x,net_y,flag");
        assert!(lines[1].starts_with("2011-03-01,2.0000000000000000e1,"));
        assert!(lines[1].ends_with(",ok"));
        assert_eq!(lines[2], "2011-03-02,,,,,,,,failed");
    }

    #[test]
    fn sam_csv_renders_bands_and_missing_values() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("sam.csv");
        let mut series = SamSeries {
            kind: SamKind::Total,
            dates: dates(2),
            sam: vec![1.5, 0.0],
            flags: vec![SamFlag::Ok, SamFlag::Missing],
            ci: Some((-6.5, 6.5)),
        };
        write_sam_csv(&path, &series).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "date,sam,ci_low,ci_high,flag");
        assert_eq!(
            lines[1],
            "2011-03-01,1.5000000000000000e0,-6.5000000000000000e0,6.5000000000000000e0,ok"
        );
        assert_eq!(
            lines[2],
            "2011-03-02,,-6.5000000000000000e0,6.5000000000000000e0,missing"
        );

        series.ci = None;
        write_sam_csv(&path, &series).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",,,"));
    }

    #[test]
    fn fevd_csv_lists_receivers_by_row() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("fevd.csv");
        let fevd = FevdResult {
            omega_raw: array![[1.0, 0.25], [0.25, 1.0]],
            omega_norm: array![[0.8, 0.2], [0.2, 0.8]],
            horizon: 1,
        };
        let assets = vec!["x".to_string(), "y".to_string()];
        write_fevd_csv(&path, &fevd, &assets).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "asset,x,y");
        assert_eq!(lines[1], "x,8.000000000e-1,2.000000000e-1");
        assert_eq!(lines[2], "y,2.000000000e-1,8.000000000e-1");
    }

    #[test]
    fn fevd_snapshot_csv_stacks_windows() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("snaps.csv");
        let fevd = FevdResult {
            omega_raw: array![[1.0, 0.0], [0.0, 1.0]],
            omega_norm: array![[1.0, 0.0], [0.0, 1.0]],
            horizon: 2,
        };
        let assets = vec!["x".to_string(), "y".to_string()];
        let snaps = vec![(dates(2)[0], fevd.clone()), (dates(2)[1], fevd)];
        write_fevd_snapshots_csv(&path, &assets, &snaps).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "date,asset,x,y");
        assert_eq!(lines[1], "2011-03-01,x,1.000000000e0,0.000000000e0");
        assert_eq!(lines[4], "2011-03-02,y,0.000000000e0,1.000000000e0");
    }

    #[test]
    fn distribution_csv_lists_retained_replications() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("dist.csv");
        let dist = SamDistribution {
            requested: 3,
            sam_values: vec![-1.0, 2.0],
            replication_ids: vec![0, 2],
            dropped: 1,
            quantiles: (-1.0, 0.5, 2.0),
            root_seed: 9,
        };
        write_distribution_csv(&path, &dist).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "replication,sam\n0,-1.0000000000000000e0\n2,2.0000000000000000e0\n"
        );
    }

    #[test]
    fn grid_csv_writes_one_row_per_grid_point() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("grid.csv");
        let calendar = TradingCalendar::new(
            Default::default(),
            chrono::NaiveTime::from_hms_opt(9, 30, 0).unwrap(),
            chrono::NaiveTime::from_hms_opt(10, 0, 0).unwrap(),
            15,
        )
        .unwrap();
        let panel = IntradayPanel {
            assets: vec!["x".into()],
            days: dates(2),
            log_prices: Array3::zeros((2, 1, 3)),
        };
        write_grid_csv(&path, &panel, &calendar).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "date,time,x");
        assert_eq!(lines[1], "2011-03-01,09:30:00,0.0000000000000000e0");
        assert_eq!(lines[3], "2011-03-01,10:00:00,0.0000000000000000e0");
    }
}
