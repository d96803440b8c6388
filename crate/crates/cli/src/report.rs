//! Turn per-round logs into plot data: per-policy curves of
//! (t, mean, min, max) cumulative regret over seeds.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

/// Read the cumulative-regret column of one per-round log.
pub fn read_log_curve(path: &Path) -> CliResult<Vec<f64>> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot read log {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let Some(header) = lines.next() else {
        return Err(CliError::Data(format!("{}: empty log", path.display())));
    };
    let header = header.map_err(crate::data_err)?;
    let columns: Vec<&str> = header.trim_end().split(',').collect();
    let regret_column = columns
        .iter()
        .position(|c| *c == "cumulative_regret")
        .ok_or_else(|| {
            CliError::Data(format!(
                "{}: header lacks a cumulative_regret column",
                path.display()
            ))
        })?;
    let mut curve = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(crate::data_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        let value: f64 = fields
            .get(regret_column)
            .ok_or_else(|| {
                CliError::Data(format!("{}: line {} is short", path.display(), i + 2))
            })?
            .parse()
            .map_err(|e| {
                CliError::Data(format!("{}: line {}: {e}", path.display(), i + 2))
            })?;
        curve.push(value);
    }
    if curve.is_empty() {
        return Err(CliError::Data(format!("{}: no rounds", path.display())));
    }
    Ok(curve)
}

/// Group log files by their name prefix before `.seed` (one group per
/// policy), preserving first-seen order.
pub fn group_logs(paths: &[PathBuf]) -> CliResult<Vec<(String, Vec<PathBuf>)>> {
    if paths.is_empty() {
        return Err(CliError::Data("no log files given".into()));
    }
    let mut groups: Vec<(String, Vec<PathBuf>)> = Vec::new();
    for path in paths {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CliError::Data(format!("bad log path {}", path.display())))?;
        let key = match name.find(".seed") {
            Some(pos) => name[..pos].to_string(),
            None => name.trim_end_matches(".log.csv").to_string(),
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(path.clone()),
            None => groups.push((key, vec![path.clone()])),
        }
    }
    Ok(groups)
}

/// Element-wise mean/min/max across seed curves. All curves must share one
/// horizon; a mismatch is an alignment error.
pub fn emit_plotdata(curves: &[Vec<f64>]) -> CliResult<Vec<(u64, f64, f64, f64)>> {
    let Some(first) = curves.first() else {
        return Err(CliError::Data("no curves to align".into()));
    };
    let horizon = first.len();
    for (i, curve) in curves.iter().enumerate() {
        if curve.len() != horizon {
            return Err(CliError::Data(format!(
                "alignment error: curve 0 has {horizon} rounds but curve {i} has {}",
                curve.len()
            )));
        }
    }
    let mut rows = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let values: Vec<f64> = curves.iter().map(|c| c[t]).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push((t as u64, mean, min, max));
    }
    Ok(rows)
}

pub fn write_plotdata(path: &Path, rows: &[(u64, f64, f64, f64)]) -> CliResult<()> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "t,mean_cumulative_regret,min_cumulative_regret,max_cumulative_regret")
        .map_err(crate::data_err)?;
    for (t, mean, min, max) in rows {
        writeln!(w, "{t},{mean},{min},{max}").map_err(crate::data_err)?;
    }
    w.flush().map_err(crate::data_err)
}

/// Produce one `<policy>.plot.csv` per log group under `out_dir`.
pub fn report(paths: &[PathBuf], out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let groups = group_logs(paths)?;
    let mut written = Vec::new();
    for (key, members) in groups {
        let curves = members
            .iter()
            .map(|p| read_log_curve(p))
            .collect::<CliResult<Vec<_>>>()?;
        let rows = emit_plotdata(&curves)?;
        let path = out_dir.join(format!("{key}.plot.csv"));
        write_plotdata(&path, &rows)?;
        written.push(path);
    }
    Ok(written)
}
