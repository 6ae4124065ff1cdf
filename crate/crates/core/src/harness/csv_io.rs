use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::sweep::{SweepRow, SweepTable};
use crate::error::Result;

pub const SWEEP_COLUMNS: [&str; 9] = [
    "algorithm",
    "n_cvl",
    "density",
    "trials",
    "mean_sum_rate",
    "std_sum_rate",
    "mean_avg_rate",
    "mean_admitted",
    "mean_runtime_s",
];

/// Header, then one record per row. Floats use the shortest round-trip
/// representation with a decimal point.
pub fn write_rows<T: Serialize, W: Write>(out: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn write_sweep<W: Write>(out: W, table: &SweepTable) -> Result<()> {
    write_rows(out, &SWEEP_COLUMNS, &table.rows)
}

pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<()> {
    write_sweep(std::fs::File::create(path)?, table)
}

pub fn parse_csv(path: &Path) -> Result<SweepTable> {
    let rows: Vec<SweepRow> = read_rows(std::fs::File::open(path)?)?;
    Ok(SweepTable { rows })
}
