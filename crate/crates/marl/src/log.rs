//! Training-log CSV.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::MarlError;

/// One evaluation point for one agent slot, or for the whole team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub episode: usize,
    pub agent: String,
    pub eval_reward: f64,
    pub collision_rate: f64,
    pub avg_speed: f64,
    pub avg_pet: Option<f64>,
    pub lambda: f64,
}

impl LogRow {
    /// `agent` value of team-level rows.
    pub const TEAM: &'static str = "all";
    pub const HEADER: [&'static str; 7] =
        ["episode", "agent", "eval_reward", "collision_rate", "avg_speed", "avg_pet", "lambda"];
}

pub fn write_log<W: Write>(rows: &[LogRow], w: W) -> Result<(), MarlError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    if rows.is_empty() {
        out.write_record(LogRow::HEADER)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(r: R) -> Result<Vec<LogRow>, MarlError> {
    csv::Reader::from_reader(r).deserialize().map(|row| row.map_err(MarlError::from)).collect()
}
