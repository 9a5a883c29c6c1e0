use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;

/// Column order of every front CSV.
pub const FRONT_COLUMNS: [&str; 5] = ["perf", "complexity", "tag", "runSeed", "solutionId"];

/// One rank-1 solution of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrontRecord {
    pub perf: f64,
    pub complexity: u64,
    /// Tag in `(a,b)` form.
    pub tag: String,
    pub run_seed: u64,
    pub solution_id: String,
}

pub fn write_front<W: std::io::Write>(w: W, rows: &[FrontRecord]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(FRONT_COLUMNS)?;
    }
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Parse a front CSV, rejecting any header other than [`FRONT_COLUMNS`].
pub fn read_front<R: std::io::Read>(r: R, origin: &Path) -> Result<Vec<FrontRecord>, ExperimentError> {
    let csv_err = |source| ExperimentError::Csv { path: origin.to_path_buf(), source };
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(FRONT_COLUMNS) {
        return Err(ExperimentError::Schema {
            path: origin.to_path_buf(),
            expected: FRONT_COLUMNS.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    rdr.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

/// Concatenated per-run fronts plus a complexity histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedFront {
    pub rows: Vec<FrontRecord>,
    pub histogram: BTreeMap<u64, usize>,
}

/// Concatenate front CSVs in the order given. Rows are not re-sorted or
/// re-ranked across runs.
pub fn merge_fronts(paths: &[PathBuf]) -> Result<MergedFront, ExperimentError> {
    if paths.is_empty() {
        return Err(ExperimentError::NothingToMerge);
    }
    let mut rows = Vec::new();
    for p in paths {
        let file = std::fs::File::open(p).map_err(|source| ExperimentError::Io { path: p.clone(), source })?;
        rows.extend(read_front(file, p)?);
    }
    let mut histogram = BTreeMap::new();
    for r in &rows {
        *histogram.entry(r.complexity).or_insert(0) += 1;
    }
    Ok(MergedFront { rows, histogram })
}

/// Histogram as `complexity,count` CSV.
pub fn write_histogram<W: std::io::Write>(w: W, histogram: &BTreeMap<u64, usize>) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["complexity", "count"])?;
    for (c, n) in histogram {
        out.write_record([c.to_string(), n.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
