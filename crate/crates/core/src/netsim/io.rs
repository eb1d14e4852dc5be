use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PairRequest, ScheduleEntry, SimEvent};
use crate::error::{Error, Result};

pub const SCHEDULE_SCHEMA: &str = "ionfab-switch/1";
pub const DEMAND_SCHEMA: &str = "ionfab-demand/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    schema: String,
    entries: Vec<ScheduleEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandFile {
    schema: String,
    requests: Vec<PairRequest>,
}

fn check_schema(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Schema(format!("expected schema `{expected}`, found `{found}`")));
    }
    Ok(())
}

pub fn parse_schedule(text: &str) -> Result<Vec<ScheduleEntry>> {
    let f: ScheduleFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    check_schema(&f.schema, SCHEDULE_SCHEMA)?;
    Ok(f.entries)
}

pub fn load_schedule(path: impl AsRef<Path>) -> Result<Vec<ScheduleEntry>> {
    let path = path.as_ref();
    parse_schedule(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn parse_demand(text: &str) -> Result<Vec<PairRequest>> {
    let f: DemandFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    check_schema(&f.schema, DEMAND_SCHEMA)?;
    Ok(f.requests)
}

pub fn load_demand(path: impl AsRef<Path>) -> Result<Vec<PairRequest>> {
    let path = path.as_ref();
    parse_demand(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Event log as CSV with header `time_s,kind,link,elu_a,elu_b,seq`.
pub fn events_csv(events: &[SimEvent]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time_s", "kind", "link", "elu_a", "elu_b", "seq"])
        .expect("in-memory write");
    for e in events {
        w.write_record([
            e.time.to_string(),
            e.kind.as_str().to_string(),
            e.link.clone().unwrap_or_default(),
            e.elu_a.clone().unwrap_or_default(),
            e.elu_b.clone().unwrap_or_default(),
            e.seq.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_and_demand_parse() {
        let s = parse_schedule(r#"{"schema":"ionfab-switch/1","entries":[{"time_s":0,"links":[["A:0","B:19"]]}]}"#)
            .unwrap();
        assert_eq!(s[0].links.len(), 1);
        let d = parse_demand(r#"{"schema":"ionfab-demand/1","requests":[{"time_s":0.5,"elus":["A","B"]}]}"#).unwrap();
        assert_eq!(d[0].elus.1, "B");
        assert!(parse_demand(r#"{"schema":"ionfab-switch/1","requests":[]}"#).is_err());
        assert!(parse_schedule(
            r#"{"schema":"ionfab-switch/1","entries":[{"time_s":0,"links":[["A:0","B:1"],["A:0","C:1"]]}]}"#
        )
        .is_err());
    }
}
