use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{create_parent, fmt_f64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub iteration: usize,
    pub raw_stress: f64,
    pub elapsed_seconds: f64,
}

/// Raw stress over time for one fit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub samples: Vec<TraceSample>,
}

impl RunTrace {
    pub const HEADER: [&'static str; 3] = ["iteration", "raw_stress", "elapsed_seconds"];

    /// Appends a sample, nudging the timestamp so it stays strictly increasing.
    pub fn push(&mut self, iteration: usize, raw_stress: f64, elapsed_seconds: f64) {
        let elapsed_seconds = match self.samples.last() {
            Some(last) if elapsed_seconds <= last.elapsed_seconds => last.elapsed_seconds + 1e-9,
            _ => elapsed_seconds,
        };
        self.samples.push(TraceSample {
            iteration,
            raw_stress,
            elapsed_seconds,
        });
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn final_stress(&self) -> Option<f64> {
        self.samples.last().map(|s| s.raw_stress)
    }

    pub fn elapsed(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.elapsed_seconds)
    }

    /// Raw stress after `iteration`, carrying the last value forward when
    /// the run stopped early.
    pub fn stress_at(&self, iteration: usize) -> Option<f64> {
        self.samples
            .iter()
            .take_while(|s| s.iteration <= iteration)
            .last()
            .map(|s| s.raw_stress)
    }

    /// Each sample's stress is at most the previous one plus `rel_slack` of it.
    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].raw_stress <= w[0].raw_stress + rel_slack * w[0].raw_stress.abs())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::HEADER)?;
        for s in &self.samples {
            w.write_record([
                s.iteration.to_string(),
                fmt_f64(s.raw_stress),
                fmt_f64(s.elapsed_seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        if rdr.headers()?.iter().ne(Self::HEADER) {
            return Err(Error::Range(format!(
                "trace header must be {}",
                Self::HEADER.join(",")
            )));
        }
        let mut trace = RunTrace::default();
        for rec in rdr.deserialize::<TraceSample>() {
            trace.samples.push(rec?);
        }
        Ok(trace)
    }
}
