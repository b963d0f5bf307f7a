use serde::Serialize;
use symred::solutions::ResidualReport;

/// Top-level verify output. Field order is fixed so equal runs give equal bytes.
#[derive(Serialize)]
pub struct Report {
    pub run: RunInfo,
    pub entries: Vec<ResidualReport>,
    pub summary: Summary,
}

#[derive(Serialize)]
pub struct RunInfo {
    pub seed: u64,
    /// `None` under `--no-timestamp`.
    pub timestamp: Option<String>,
    pub version: String,
}

#[derive(Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub discrepancies: usize,
}
