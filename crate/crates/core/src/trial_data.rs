//! Per-subject trial records and their CSV form.
//!
//! ```text
//! arm,time,event,responder
//! 0,3.2,1,0
//! 1,5,0,
//! ```
//!
//! `arm` is `0` for control and `1` for treatment; `event` and `responder` are
//! `0`/`1`, and `responder` may be left empty.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    Control,
    Treatment,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Treatment => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub arm: Arm,
    /// Observed time `min(T, C)`.
    pub time: f64,
    /// `true` when the event time was observed.
    pub event: bool,
    pub responder: Option<bool>,
}

pub const HEADER: [&str; 4] = ["arm", "time", "event", "responder"];

fn parse_flag(field: &str, name: &str, line: usize) -> Result<bool> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            line,
            message: format!("{name} must be 0 or 1, got {other:?}"),
        }),
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<SubjectRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}, got {header:?}", HEADER.join(",")),
        });
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let arm = match row[0].trim() {
            "0" => Arm::Control,
            "1" => Arm::Treatment,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("arm must be 0 or 1, got {other:?}"),
                })
            }
        };
        let time: f64 = row[1].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("time is not a number: {:?}", &row[1]),
        })?;
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("time must be finite and non-negative, got {time}"),
            });
        }
        let event = parse_flag(&row[2], "event", line)?;
        let responder = if row[3].trim().is_empty() {
            None
        } else {
            Some(parse_flag(&row[3], "responder", line)?)
        };
        records.push(SubjectRecord {
            arm,
            time,
            event,
            responder,
        });
    }
    Ok(records)
}

pub fn write_csv<W: Write>(writer: W, records: &[SubjectRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        let flag = |b: bool| if b { "1" } else { "0" };
        // shortest representation that parses back to the same f64
        let time = format!("{:?}", r.time);
        w.write_record([
            r.arm.index().to_string().as_str(),
            time.as_str(),
            flag(r.event),
            r.responder.map_or("", flag),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv_file(path: &Path) -> Result<Vec<SubjectRecord>> {
    read_csv(std::fs::File::open(path)?)
}

pub fn write_csv_file(path: &Path, records: &[SubjectRecord]) -> Result<()> {
    write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), records)
}
