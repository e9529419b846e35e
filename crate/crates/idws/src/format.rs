//! File formats: binary state arrays, CSV reports and text tables.
//!
//! A state file is an 8-byte little-endian element count followed by one
//! byte per element.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use idws_core::StateArray;

pub fn write_states<W: Write>(mut out: W, states: &StateArray) -> io::Result<()> {
    out.write_all(&(states.len() as u64).to_le_bytes())?;
    out.write_all(states.as_slice())?;
    out.flush()
}

pub fn read_states<R: Read>(mut input: R) -> io::Result<StateArray> {
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = usize::try_from(u64::from_le_bytes(len)).map_err(|_| {
        io::Error::new(
            io::ErrorKind::InvalidData,
            "state count does not fit in memory",
        )
    })?;
    let mut bytes = Vec::new();
    (&mut input).take(len as u64).read_to_end(&mut bytes)?;
    if bytes.len() != len {
        return Err(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            format!("state file holds {} of {len} elements", bytes.len()),
        ));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "trailing bytes after states",
        ));
    }
    StateArray::from_vec(bytes)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "state value above 3"))
}

pub fn write_states_file(path: &Path, states: &StateArray) -> io::Result<()> {
    write_states(BufWriter::new(File::create(path)?), states)
}

pub fn read_states_file(path: &Path) -> io::Result<StateArray> {
    read_states(BufReader::new(File::open(path)?))
}

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.999995 -> 10.00000)
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && rounded.abs().log10().floor() as i64 > magnitude && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

pub const CSV_HEADER: &str =
    "scheduler,distribution,n,threads,transport,repeat,wall_s,imbalance,steal_attempts,steals_granted,checksum";

/// One repeat of one matrix cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub scheduler: String,
    pub distribution: String,
    pub n: usize,
    pub threads: usize,
    pub transport: String,
    pub repeat: usize,
    pub wall_s: f64,
    pub imbalance: f64,
    pub steal_attempts: u64,
    pub steals_granted: u64,
    pub checksum: u64,
}

pub fn write_csv<W: Write>(mut out: W, rows: &[ReportRow]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scheduler,
            r.distribution,
            r.n,
            r.threads,
            r.transport,
            r.repeat,
            significant(r.wall_s, 6),
            significant(r.imbalance, 6),
            r.steal_attempts,
            r.steals_granted,
            r.checksum
        )?;
    }
    out.flush()
}

/// Median summary of one cell, as shown in the table.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub scheduler: String,
    pub distribution: String,
    pub median_wall_s: f64,
    pub median_imbalance: f64,
    pub median_steal_attempts: f64,
    pub median_steals_granted: f64,
    pub checksum: u64,
    pub verified: Option<bool>,
}

pub fn write_table<W: Write>(mut out: W, cells: &[CellSummary]) -> io::Result<()> {
    writeln!(
        out,
        "{:<10} {:<12} {:>12} {:>10} {:>12} {:>10} {:>22} {:>8}",
        "scheduler",
        "distribution",
        "median_s",
        "imbalance",
        "steal_tries",
        "granted",
        "checksum",
        "verify"
    )?;
    for c in cells {
        let verify = match c.verified {
            None => "-",
            Some(true) => "ok",
            Some(false) => "FAIL",
        };
        writeln!(
            out,
            "{:<10} {:<12} {:>12} {:>10} {:>12} {:>10} {:>22} {:>8}",
            c.scheduler,
            c.distribution,
            significant(c.median_wall_s, 6),
            significant(c.median_imbalance, 4),
            significant(c.median_steal_attempts, 6),
            significant(c.median_steals_granted, 6),
            c.checksum,
            verify
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(significant(1.23456789, 6), "1.23457");
        assert_eq!(significant(0.00123456789, 6), "0.00123457");
        assert_eq!(significant(123.456789, 6), "123.457");
        assert_eq!(significant(9.9999999, 6), "10.0000");
        assert_eq!(significant(2.0, 6), "2.00000");
        assert_eq!(significant(0.0, 6), "0");
        assert_eq!(significant(1234567.0, 6), "1234567");
    }

    #[test]
    fn states_binary_layout() {
        let states = StateArray::from_vec(vec![0, 1, 2, 3, 2]).unwrap();
        let mut buf = Vec::new();
        write_states(&mut buf, &states).unwrap();
        assert_eq!(&buf[..8], &5u64.to_le_bytes());
        assert_eq!(&buf[8..], &[0, 1, 2, 3, 2]);
        assert_eq!(read_states(&buf[..]).unwrap(), states);
    }

    #[test]
    fn truncated_and_invalid_state_files() {
        let mut buf = 4u64.to_le_bytes().to_vec();
        buf.extend([1, 2]);
        assert_eq!(
            read_states(&buf[..]).unwrap_err().kind(),
            io::ErrorKind::UnexpectedEof
        );
        let mut bad = 1u64.to_le_bytes().to_vec();
        bad.push(9);
        assert_eq!(
            read_states(&bad[..]).unwrap_err().kind(),
            io::ErrorKind::InvalidData
        );
        let mut long = 1u64.to_le_bytes().to_vec();
        long.extend([1, 1]);
        assert!(read_states(&long[..]).is_err());
    }

    #[test]
    fn csv_layout() {
        let row = ReportRow {
            scheduler: "idws".into(),
            distribution: "regular".into(),
            n: 100,
            threads: 4,
            transport: "poll".into(),
            repeat: 0,
            wall_s: 0.012345678,
            imbalance: 1.0,
            steal_attempts: 3,
            steals_granted: 2,
            checksum: 77,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            format!("{CSV_HEADER}\nidws,regular,100,4,poll,0,0.0123457,1.00000,3,2,77\n")
        );
    }
}
