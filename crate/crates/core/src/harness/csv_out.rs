use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of every results CSV.
pub const CSV_HEADER: &str = "experiment,seed,episode,arm,raw_return,normalized_return,phi_eliminated,\
ucb_q,lcb_q,ucb_phi,lcb_phi,jhat_q,jhat_phi";

/// One episode of one seed. Optional diagnostics serialize as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub experiment: String,
    pub seed: u64,
    pub episode: u32,
    pub arm: u8,
    pub raw_return: f64,
    pub normalized_return: f64,
    pub phi_eliminated: u8,
    pub ucb_q: Option<f64>,
    pub lcb_q: Option<f64>,
    pub ucb_phi: Option<f64>,
    pub lcb_phi: Option<f64>,
    pub jhat_q: Option<f64>,
    pub jhat_phi: Option<f64>,
}

pub fn write_rows<W: Write>(out: W, rows: &[RunRow]) -> Result<()> {
    let to_err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(to_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv flush failed: {e}")))?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::invalid(format!("csv header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected csv header `{}`", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::invalid(format!("csv row: {e}")))).collect()
}

pub(crate) fn write_csv_file(path: &Path, rows: &[RunRow]) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = File::create(path).map_err(io)?;
    write_rows(std::io::BufWriter::new(file), rows)
}
