//! JSON and CSV forms of [`MagnetizationLaw`].
//!
//! JSON uses the shortest representation that parses back to the same double. CSV writes
//! every double with 17 significant digits. Both round-trip bit for bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::law::{LawKind, MagnetizationLaw};
use crate::error::{PottsError, Result};
use crate::params::ModelParams;

/// Formats a double with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    counts: Vec<u32>,
    log_prob: f64,
}

#[derive(Serialize, Deserialize)]
struct LawRecord {
    n: u32,
    q: usize,
    kind: LawKind,
    params: ModelParams,
    log_z: Option<f64>,
    atoms: Vec<AtomRecord>,
}

#[derive(Serialize, Deserialize)]
struct CsvMeta {
    n: u32,
    q: usize,
    kind: LawKind,
    params: ModelParams,
    log_z: Option<f64>,
}

fn check_atom(counts: &[u32], n: u32, q: usize) -> Result<()> {
    if counts.len() != q {
        return Err(PottsError::Parse(format!(
            "atom has {} counts, expected {q}",
            counts.len()
        )));
    }
    if counts.iter().map(|&c| c as u64).sum::<u64>() != n as u64 {
        return Err(PottsError::Parse(format!(
            "atom counts {counts:?} do not sum to {n}"
        )));
    }
    Ok(())
}

impl MagnetizationLaw {
    pub fn to_json(&self) -> Result<String> {
        let record = LawRecord {
            n: self.n,
            q: self.q,
            kind: self.kind,
            params: self.params,
            log_z: self.log_z,
            atoms: (0..self.len())
                .map(|i| AtomRecord {
                    counts: self.atom_counts(i).to_vec(),
                    log_prob: self.log_probs[i],
                })
                .collect(),
        };
        Ok(serde_json::to_string(&record)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: LawRecord = serde_json::from_str(text)?;
        let mut counts = Vec::with_capacity(record.atoms.len() * record.q);
        let mut log_probs = Vec::with_capacity(record.atoms.len());
        for atom in record.atoms {
            check_atom(&atom.counts, record.n, record.q)?;
            counts.extend(atom.counts);
            log_probs.push(atom.log_prob);
        }
        Ok(MagnetizationLaw::from_parts(
            record.n,
            record.q,
            record.params,
            record.kind,
            record.log_z,
            counts,
            log_probs,
        ))
    }

    /// One atom per row (`n_1,…,n_q,log_prob`), preceded by a `#` line carrying the metadata
    /// as JSON.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let meta = CsvMeta {
            n: self.n,
            q: self.q,
            kind: self.kind,
            params: self.params,
            log_z: self.log_z,
        };
        writeln!(out, "# {}", serde_json::to_string(&meta)?)?;
        let mut writer = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.q).map(|r| format!("n_{r}")).collect();
        header.push("log_prob".into());
        writer.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.atom_counts(i).iter().map(|c| c.to_string()).collect();
            row.push(format_f64(self.log_probs[i]));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let meta_text = first
            .trim_end()
            .strip_prefix("# ")
            .ok_or_else(|| PottsError::Parse("missing metadata line".into()))?;
        let meta: CsvMeta = serde_json::from_str(meta_text)?;
        let mut reader = csv::Reader::from_reader(input);
        let mut counts = Vec::new();
        let mut log_probs = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record.len() != meta.q + 1 {
                return Err(PottsError::Parse(format!(
                    "row has {} fields",
                    record.len()
                )));
            }
            let row: Vec<u32> = (0..meta.q)
                .map(|r| {
                    record[r]
                        .parse::<u32>()
                        .map_err(|e| PottsError::Parse(e.to_string()))
                })
                .collect::<Result<_>>()?;
            check_atom(&row, meta.n, meta.q)?;
            counts.extend(row);
            let lp: f64 = record[meta.q]
                .parse()
                .map_err(|e: std::num::ParseFloatError| PottsError::Parse(e.to_string()))?;
            log_probs.push(lp);
        }
        Ok(MagnetizationLaw::from_parts(
            meta.n,
            meta.q,
            meta.params,
            meta.kind,
            meta.log_z,
            counts,
            log_probs,
        ))
    }
}
