//! Per-flop trace files: `flop,error,i_pu_dbm,capacity,epsilon,mcs,explored`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::RunTrace;
use crate::pu_link::Mcs;

pub const TRACE_HEADER: &str = "flop,error,i_pu_dbm,capacity,epsilon,mcs,explored";

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub flop: usize,
    pub error: f64,
    pub i_pu_dbm: f64,
    pub capacity: f64,
    pub epsilon: f64,
    /// 1-based ladder index, 0 for outage.
    pub mcs: usize,
    pub explored: bool,
}

impl TraceRow {
    pub fn from_trace(trace: &RunTrace) -> Vec<TraceRow> {
        trace
            .records
            .iter()
            .map(|r| TraceRow {
                flop: r.flop,
                error: r.rel_error,
                i_pu_dbm: r.i_pu_dbm,
                capacity: r.capacity,
                epsilon: r.epsilon,
                mcs: r.mcs.code(),
                explored: r.explored,
            })
            .collect()
    }

    pub fn mcs(&self) -> Mcs {
        Mcs::from_code(self.mcs)
    }
}

/// Comma-separated trace text. Floats use the shortest representation that
/// parses back to the same value.
pub fn format_trace(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.flop, r.error, r.i_pu_dbm, r.capacity, r.epsilon, r.mcs, r.explored as u8
        );
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceParseError {
    #[error("missing or wrong header")]
    Header,
    #[error("line {line}: expected 7 fields")]
    FieldCount { line: usize },
    #[error("line {line}: bad value `{value}`")]
    Value { line: usize, value: String },
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, TraceParseError> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(TraceParseError::Header);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(TraceParseError::FieldCount { line: line_no });
        }
        let bad = |v: &str| TraceParseError::Value { line: line_no, value: v.to_string() };
        let float = |v: &str| v.parse::<f64>().map_err(|_| bad(v));
        let int = |v: &str| v.parse::<usize>().map_err(|_| bad(v));
        rows.push(TraceRow {
            flop: int(fields[0])?,
            error: float(fields[1])?,
            i_pu_dbm: float(fields[2])?,
            capacity: float(fields[3])?,
            epsilon: float(fields[4])?,
            mcs: int(fields[5])?,
            explored: match fields[6] {
                "0" => false,
                "1" => true,
                v => return Err(bad(v)),
            },
        });
    }
    Ok(rows)
}
