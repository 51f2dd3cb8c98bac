use std::io::{Read, Write};

use serde::Deserialize;

use super::{Field, Grid};
use crate::error::{Error, Result};

/// One row of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SnapshotRow {
    pub x: f64,
    pub u: f64,
    pub v: f64,
}

/// Writes `x,u,v` rows with 17 significant digits.
pub fn write_snapshot_csv<W: Write>(w: W, grid: &Grid, field: &Field) -> Result<()> {
    let err = |e: csv::Error| Error::Config(format!("CSV: {e}"));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "u", "v"]).map_err(err)?;
    for (i, (u, v)) in field.u.iter().zip(&field.v).enumerate() {
        out.write_record([format!("{:.16e}", grid.x(i)), format!("{u:.16e}"), format!("{v:.16e}")])
            .map_err(err)?;
    }
    out.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn read_snapshot_csv<R: Read>(r: R) -> Result<Vec<SnapshotRow>> {
    let err = |e: csv::Error| Error::Config(format!("CSV: {e}"));
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(err)?;
    if headers.iter().ne(["x", "u", "v"]) {
        return Err(Error::Config("snapshot header must be `x,u,v`".into()));
    }
    rdr.deserialize().map(|row| row.map_err(err)).collect()
}
