use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Population;
use crate::Result;

/// One row of the evolution log. Untrained units have an empty loss and
/// failed ones `inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub id: usize,
    pub period: f64,
    pub loss: Option<f64>,
    pub ancestor: usize,
    pub generation: usize,
}

pub fn write_log(pop: &Population, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for u in &pop.units {
        out.serialize(LogRecord {
            id: u.id,
            period: u.period,
            loss: u.validation_loss,
            ancestor: u.root_ancestor,
            generation: u.generation_born,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_log(r: impl Read) -> Result<Vec<LogRecord>> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(r).deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}
