//! Metric CSVs and load snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::read_values;
use crate::load::Load;
use crate::metrics::RoundRecord;

pub const METRICS_HEADER: &str = "round,total_load,max_above_avg,max_local_diff,potential_over_n,min_load,min_transient";

pub(crate) struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{METRICS_HEADER}")?;
        Ok(MetricsWriter { out })
    }

    pub fn write(&mut self, r: &RoundRecord) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{}",
            r.round, r.total_load, r.max_above_avg, r.max_local_diff, r.potential_over_n, r.min_load, r.min_transient
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn snapshot_file_name(round: u64) -> String {
    format!("snapshot_{round:08}.txt")
}

/// One load per line after a `# n=<n> round=<r>` header.
pub fn write_snapshot<L: Load>(path: &Path, round: u64, x: &[L]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# n={} round={round}", x.len())?;
    for v in x {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path, n: usize) -> Result<Vec<f64>> {
    let x = read_values(path)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    Ok(x)
}
