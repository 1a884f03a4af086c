use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::format::format_sig9;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 15] = [
    "profile",
    "algorithm",
    "n",
    "k",
    "m",
    "theta",
    "trial",
    "seed",
    "stage",
    "sin_error",
    "recall",
    "refine_T",
    "operator",
    "wall_ms",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Pre,
    Post,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Pre => "pre",
            Stage::Post => "post",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
        }
    }
}

/// One `(profile, algorithm, m, trial, stage)` outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub profile: String,
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub theta: f64,
    pub trial: usize,
    pub seed: u64,
    pub stage: Stage,
    /// Empty for failed rows.
    pub sin_error: Option<f64>,
    pub recall: Option<f64>,
    /// Refinement iterations; 0 on pre rows.
    pub refine_t: usize,
    /// `centered`/`uncentered` on post rows, `none` on pre rows.
    pub operator: String,
    pub wall_ms: f64,
    pub status: Status,
}

impl TrialRecord {
    fn to_fields(&self) -> [String; 15] {
        let opt = |x: Option<f64>| x.map(format_sig9).unwrap_or_default();
        [
            self.profile.clone(),
            self.algorithm.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.m.to_string(),
            format_sig9(self.theta),
            self.trial.to_string(),
            self.seed.to_string(),
            self.stage.as_str().to_string(),
            opt(self.sin_error),
            opt(self.recall),
            self.refine_t.to_string(),
            self.operator.clone(),
            format_sig9(self.wall_ms),
            self.status.as_str().to_string(),
        ]
    }

    fn from_fields(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != CSV_HEADER.len() {
            return Err(Error::invalid(format!("row has {} fields", row.len())));
        }
        fn num<T: std::str::FromStr>(s: &str, col: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::invalid(format!("bad {col} value {s:?}")))
        }
        let opt = |s: &str, col: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, col).map(Some)
            }
        };
        Ok(TrialRecord {
            profile: row[0].to_string(),
            algorithm: row[1].to_string(),
            n: num(&row[2], "n")?,
            k: num(&row[3], "k")?,
            m: num(&row[4], "m")?,
            theta: num(&row[5], "theta")?,
            trial: num(&row[6], "trial")?,
            seed: num(&row[7], "seed")?,
            stage: match &row[8] {
                "pre" => Stage::Pre,
                "post" => Stage::Post,
                other => return Err(Error::invalid(format!("bad stage {other:?}"))),
            },
            sin_error: opt(&row[9], "sin_error")?,
            recall: opt(&row[10], "recall")?,
            refine_t: num(&row[11], "refine_T")?,
            operator: row[12].to_string(),
            wall_ms: num(&row[13], "wall_ms")?,
            status: match &row[14] {
                "ok" => Status::Ok,
                "failed" => Status::Failed,
                other => return Err(Error::invalid(format!("bad status {other:?}"))),
            },
        })
    }
}

pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes the header and one row per record, in the order given.
pub fn write_csv_to<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.to_fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_csv_to(records, file)
}

/// Parses a harness CSV, checking the header.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::invalid("CSV header does not match the trial schema"));
    }
    reader
        .records()
        .map(|row| TrialRecord::from_fields(&row?))
        .collect()
}
