//! Snapshot file format "LBMCF-SNAPSHOT v1": ASCII header lines (version, n,
//! N, r, r_prime, bc, time) followed by whitespace-separated row-major node
//! values, one field per file. Values are printed with shortest
//! round-tripping decimal form, so write → read reproduces fields
//! bit-exactly.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::{BoundaryMode, Grid, GridConfig};
use std::fmt::Write as _;

pub const MAGIC: &str = "LBMCF-SNAPSHOT v1";

pub fn write_snapshot(grid: &Grid, field: &ScalarField, time: f64) -> Result<String> {
    field.check_shape(grid, "snapshot")?;
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "n {}", grid.n);
    let _ = writeln!(s, "N {}", grid.nodes_per_axis);
    let _ = writeln!(s, "r {}", grid.r);
    let _ = writeln!(s, "r_prime {}", grid.r_prime);
    let _ = writeln!(s, "bc {}", grid.bc);
    let _ = writeln!(s, "time {}", time);
    for (i, v) in field.data.iter().enumerate() {
        if i > 0 {
            s.push(if i % 8 == 0 { '\n' } else { ' ' });
        }
        let _ = write!(s, "{v}");
    }
    s.push('\n');
    Ok(s)
}

pub struct Snapshot {
    pub grid: Grid,
    pub field: ScalarField,
    pub time: f64,
}

pub fn read_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or("");
    if magic.trim() != MAGIC {
        return Err(CoreError::SnapshotParse(format!(
            "bad magic line {magic:?}"
        )));
    }
    let mut n = None;
    let mut nn = None;
    let mut r = None;
    let mut r_prime = None;
    let mut bc = None;
    let mut time = None;
    for _ in 0..6 {
        let line = lines
            .next()
            .ok_or_else(|| CoreError::SnapshotParse("truncated header".into()))?;
        let mut it = line.split_whitespace();
        let key = it.next().unwrap_or("");
        let val = it
            .next()
            .ok_or_else(|| CoreError::SnapshotParse(format!("missing value for {key}")))?;
        match key {
            "n" => {
                n = Some(
                    val.parse::<usize>()
                        .map_err(|e| CoreError::SnapshotParse(e.to_string()))?,
                )
            }
            "N" => {
                nn = Some(
                    val.parse::<usize>()
                        .map_err(|e| CoreError::SnapshotParse(e.to_string()))?,
                )
            }
            "r" => {
                r = Some(
                    val.parse::<f64>()
                        .map_err(|e| CoreError::SnapshotParse(e.to_string()))?,
                )
            }
            "r_prime" => {
                r_prime = Some(
                    val.parse::<f64>()
                        .map_err(|e| CoreError::SnapshotParse(e.to_string()))?,
                )
            }
            "bc" => {
                bc = Some(
                    BoundaryMode::parse(val)
                        .map_err(|e| CoreError::SnapshotParse(e.to_string()))?,
                )
            }
            "time" => {
                time = Some(
                    val.parse::<f64>()
                        .map_err(|e| CoreError::SnapshotParse(e.to_string()))?,
                )
            }
            other => {
                return Err(CoreError::SnapshotParse(format!(
                    "unknown header key {other:?}"
                )))
            }
        }
    }
    let grid = Grid::new(GridConfig {
        n: n.ok_or_else(|| CoreError::SnapshotParse("missing n".into()))?,
        r: r.ok_or_else(|| CoreError::SnapshotParse("missing r".into()))?,
        r_prime: r_prime.ok_or_else(|| CoreError::SnapshotParse("missing r_prime".into()))?,
        nodes_per_axis: nn.ok_or_else(|| CoreError::SnapshotParse("missing N".into()))?,
        bc: bc.ok_or_else(|| CoreError::SnapshotParse("missing bc".into()))?,
    })?;
    let mut data = Vec::with_capacity(grid.num_nodes());
    for line in lines {
        for tok in line.split_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|e| CoreError::SnapshotParse(format!("bad value {tok:?}: {e}")))?,
            );
        }
    }
    if data.len() != grid.num_nodes() {
        return Err(CoreError::SnapshotParse(format!(
            "expected {} values, found {}",
            grid.num_nodes(),
            data.len()
        )));
    }
    Ok(Snapshot {
        grid,
        field: ScalarField { data },
        time: time.unwrap(),
    })
}
