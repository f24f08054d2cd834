//! Line-delimited JSON run log: a header, one record per iterate, and a
//! closing result line. Every line carries a `record` tag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::IterationRecord;

pub const RUNLOG_FORMAT: &str = "penner-runlog";
pub const RUNLOG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub format: String,
    pub version: u32,
    pub command: String,
    pub energy: String,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl RunHeader {
    pub fn new(command: &str, energy: &str, counts: [usize; 3]) -> Self {
        Self {
            format: RUNLOG_FORMAT.into(),
            version: RUNLOG_VERSION,
            command: command.into(),
            energy: energy.into(),
            vertices: counts[0],
            edges: counts[1],
            faces: counts[2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: String,
    pub iterations: usize,
    pub max_residual: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogLine {
    Header(RunHeader),
    Iteration(IterationRecord),
    Result(RunResult),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub iterations: Vec<IterationRecord>,
    pub result: RunResult,
}

impl RunLog {
    pub fn to_jsonl(&self) -> String {
        let mut lines = vec![LogLine::Header(self.header.clone())];
        lines.extend(self.iterations.iter().cloned().map(LogLine::Iteration));
        lines.push(LogLine::Result(self.result.clone()));
        lines
            .iter()
            .map(|l| serde_json::to_string(l).expect("plain data") + "\n")
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = None;
        let mut iterations = Vec::new();
        let mut result = None;
        for (k, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: k + 1,
                message,
            };
            let line: LogLine = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            match line {
                LogLine::Header(h) if header.is_none() && k == 0 => {
                    if h.format != RUNLOG_FORMAT || h.version != RUNLOG_VERSION {
                        return Err(err(format!("unsupported log {} v{}", h.format, h.version)));
                    }
                    header = Some(h)
                }
                LogLine::Iteration(r) if header.is_some() && result.is_none() => iterations.push(r),
                LogLine::Result(r) if header.is_some() && result.is_none() => result = Some(r),
                _ => return Err(err("record out of order".into())),
            }
        }
        match (header, result) {
            (Some(header), Some(result)) => Ok(Self {
                header,
                iterations,
                result,
            }),
            _ => Err(Error::Parse {
                line: text.lines().count(),
                message: "truncated run log".into(),
            }),
        }
    }
}
