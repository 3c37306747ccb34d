//! CSV schemas for run records, ensemble curves and comparison tables.
//!
//! Floats are written with 9 significant digits, so writing what was read
//! reproduces the file byte for byte.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::{ComparisonRow, ComparisonTable, EnsembleCurve};
use crate::error::{Error, Result};
use crate::model::VehicleKind;
use crate::scenario::RunRecord;

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "vehicle", "kind", "position", "speed"];
pub const ENSEMBLE_HEADER: [&str; 3] = ["index", "mean_std", "stderr"];
pub const COMPARISON_HEADER: [&str; 7] = [
    "kind",
    "mpr",
    "n_equipped",
    "mean_std",
    "stderr",
    "reduction_pct",
    "reduction_stderr",
];

/// Label of the open-road leader in trajectory files.
pub const LEADER_LABEL: &str = "LEADER";

/// Which schema a CSV file follows, judged by its header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Trajectory,
    Speeds,
    Ensemble,
    Comparison,
}

/// `%.9g`-style rendering.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.8e}");
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::MalformedCsv {
        path: path.to_path_buf(),
        reason: format!("`{field}` is not a number"),
    })
}

/// One line of a trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    /// 0 is the open-road leader; followers are numbered from 1.
    pub vehicle: usize,
    pub kind: String,
    pub position: f64,
    pub speed: f64,
}

/// Long-form rows for every sample and vehicle, leader first on the open road.
pub fn trajectory_rows(record: &RunRecord) -> Vec<TrajectoryRow> {
    let mut rows = Vec::with_capacity(record.n_samples() * (record.n_vehicles() + 1));
    for k in 0..record.n_samples() {
        let t = record.time(k);
        if let Some(leader) = &record.leader {
            rows.push(TrajectoryRow {
                t,
                vehicle: 0,
                kind: LEADER_LABEL.to_string(),
                position: leader.positions[k],
                speed: leader.speed,
            });
        }
        for (v, kind) in record.kinds.iter().enumerate() {
            rows.push(TrajectoryRow {
                t,
                vehicle: v + 1,
                kind: kind.to_string(),
                position: record.position(k, v),
                speed: record.speed(k, v),
            });
        }
    }
    rows
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn write_trajectory<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for row in trajectory_rows(record) {
        w.write_record([
            fmt_sig9(row.t),
            row.vehicle.to_string(),
            row.kind,
            fmt_sig9(row.position),
            fmt_sig9(row.speed),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wide speed matrix: one row per sample, `t,v0,v1,...` with `v0` the
/// open-road leader (absent on the ring).
pub fn write_speeds<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = writer(out);
    let first = if record.leader.is_some() { 0 } else { 1 };
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((first..=record.n_vehicles()).map(|v| format!("v{v}")))
        .collect();
    w.write_record(&header)?;
    for k in 0..record.n_samples() {
        let mut line = vec![fmt_sig9(record.time(k))];
        if let Some(leader) = &record.leader {
            line.push(fmt_sig9(leader.speed));
        }
        line.extend(record.speed_row(k).iter().map(|&v| fmt_sig9(v)));
        w.write_record(&line)?;
    }
    w.flush()?;
    Ok(())
}

/// Ensemble curve; `first_index` is 1 for platoon positions and 0 for time steps.
pub fn write_ensemble<W: Write>(curve: &EnsembleCurve, first_index: usize, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(ENSEMBLE_HEADER)?;
    for (i, (m, e)) in curve.mean.iter().zip(&curve.stderr).enumerate() {
        w.write_record([(first_index + i).to_string(), fmt_sig9(*m), fmt_sig9(*e)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison<W: Write>(table: &ComparisonTable, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.kind.to_string(),
            fmt_sig9(r.mpr),
            r.n_equipped.to_string(),
            fmt_sig9(r.mean),
            fmt_sig9(r.stderr),
            fmt_sig9(r.reduction_pct),
            fmt_sig9(r.reduction_stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_records(path: &Path, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: format!(
                "header `{}` does not match `{}`",
                header.iter().collect::<Vec<_>>().join(","),
                expected.join(",")
            ),
        });
    }
    Ok(reader.records().collect::<Result<_, _>>()?)
}

/// Index column and curve of an ensemble file.
pub fn read_ensemble(path: impl AsRef<Path>) -> Result<(Vec<usize>, EnsembleCurve)> {
    let path = path.as_ref();
    let mut index = Vec::new();
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    for rec in read_records(path, &ENSEMBLE_HEADER)? {
        index.push(rec[0].trim().parse().map_err(|_| Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: format!("`{}` is not an index", &rec[0]),
        })?);
        mean.push(parse_f64(path, &rec[1])?);
        stderr.push(parse_f64(path, &rec[2])?);
    }
    Ok((
        index,
        EnsembleCurve {
            mean,
            stderr,
            n_runs: 0,
            spec: None,
        },
    ))
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Vec<TrajectoryRow>> {
    let path = path.as_ref();
    read_records(path, &TRAJECTORY_HEADER)?
        .into_iter()
        .map(|rec| {
            Ok(TrajectoryRow {
                t: parse_f64(path, &rec[0])?,
                vehicle: rec[1].trim().parse().map_err(|_| Error::MalformedCsv {
                    path: path.to_path_buf(),
                    reason: format!("`{}` is not a vehicle number", &rec[1]),
                })?,
                kind: rec[2].to_string(),
                position: parse_f64(path, &rec[3])?,
                speed: parse_f64(path, &rec[4])?,
            })
        })
        .collect()
}

pub fn read_comparison(path: impl AsRef<Path>) -> Result<ComparisonTable> {
    let path = path.as_ref();
    let rows = read_records(path, &COMPARISON_HEADER)?
        .into_iter()
        .map(|rec| {
            let kind: VehicleKind = rec[0].parse().map_err(|_| Error::MalformedCsv {
                path: path.to_path_buf(),
                reason: format!("`{}` is not a vehicle kind", &rec[0]),
            })?;
            Ok(ComparisonRow {
                kind,
                mpr: parse_f64(path, &rec[1])?,
                n_equipped: rec[2].trim().parse().map_err(|_| Error::MalformedCsv {
                    path: path.to_path_buf(),
                    reason: format!("`{}` is not a count", &rec[2]),
                })?,
                mean: parse_f64(path, &rec[3])?,
                stderr: parse_f64(path, &rec[4])?,
                reduction_pct: parse_f64(path, &rec[5])?,
                reduction_stderr: parse_f64(path, &rec[6])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonTable { rows })
}

/// Wide speed matrix as `(header, rows)`, the time in column 0.
pub fn read_speeds(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("t") || header.len() < 2 {
        return Err(Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: "speed matrix must start with a `t` column".into(),
        });
    }
    let rows = reader
        .records()
        .map(|rec| rec?.iter().map(|f| parse_f64(path, f)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Identify the schema of a CSV file from its header line.
pub fn detect(path: impl AsRef<Path>) -> Result<CsvKind> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let is = |expected: &[&str]| header.iter().map(String::as_str).eq(expected.iter().copied());
    if is(&TRAJECTORY_HEADER) {
        Ok(CsvKind::Trajectory)
    } else if is(&ENSEMBLE_HEADER) {
        Ok(CsvKind::Ensemble)
    } else if is(&COMPARISON_HEADER) {
        Ok(CsvKind::Comparison)
    } else if header.first().map(String::as_str) == Some("t") && header.len() >= 2 {
        Ok(CsvKind::Speeds)
    } else {
        Err(Error::MalformedCsv {
            path: path.to_path_buf(),
            reason: format!("unrecognized header `{}`", header.join(",")),
        })
    }
}

/// Create `path` (and its parent directory) and hand a writer to `f`.
pub fn write_file(path: impl AsRef<Path>, f: impl FnOnce(&mut std::io::BufWriter<File>) -> Result<()>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}
