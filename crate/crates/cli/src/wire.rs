//! JSONL wire format for recorded streams.
//!
//! Each line carries one record: an `id`, a `surrogate_loss` (the score the
//! online policy sees), an optional `target_loss` (the score used for
//! offline comparison), and an optional `fooled` marker. Unknown fields are
//! ignored on input and never re-emitted, so parse → serialize → parse is
//! the identity on the fields we care about.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use seclab_core::stream::{Stream, StreamItem};

use crate::error::{data, CliError};

/// One adversarial example as it appears on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub id: String,
    pub surrogate_loss: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fooled: Option<bool>,
}

fn check_loss(value: f64, what: &str, source: &str, line: usize) -> Result<(), CliError> {
    if !value.is_finite() || value < 0.0 {
        return Err(data(format!(
            "{source} line {line}: {what} must be finite and non-negative, got {value}"
        )));
    }
    Ok(())
}

/// Parses JSONL text into records. Blank lines are skipped; errors name the
/// 1-based line number in `source`.
pub fn parse_records(text: &str, source: &str) -> Result<Vec<StreamRecord>, CliError> {
    let mut records = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: StreamRecord = serde_json::from_str(line)
            .map_err(|e| data(format!("{source} line {line_no}: {e}")))?;
        check_loss(record.surrogate_loss, "surrogate_loss", source, line_no)?;
        if let Some(target) = record.target_loss {
            check_loss(target, "target_loss", source, line_no)?;
        }
        records.push(record);
    }
    Ok(records)
}

/// Reads and parses a JSONL stream file.
pub fn read_records(path: &Path) -> Result<Vec<StreamRecord>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| data(format!("cannot read {}: {e}", path.display())))?;
    parse_records(&text, &path.display().to_string())
}

/// Converts parsed records into an arrival-ordered stream.
pub fn to_stream(records: &[StreamRecord]) -> Result<Stream, CliError> {
    let items = records
        .iter()
        .enumerate()
        .map(|(index, record)| StreamItem {
            id: record.id.clone(),
            arrival: index + 1,
            observed_value: record.surrogate_loss,
            true_value: record.target_loss,
            fooled: record.fooled,
        })
        .collect();
    Stream::new(items).map_err(|e| data(e.to_string()))
}

/// Serializes records back to JSONL, one object per line.
pub fn record_lines(records: &[StreamRecord]) -> String {
    let mut out = String::new();
    for record in records {
        // Serialization of these fields cannot fail.
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_records() {
        let text = concat!(
            "{\"id\":\"a\",\"surrogate_loss\":1.5}\n",
            "\n",
            "{\"id\":\"b\",\"surrogate_loss\":2.0,\"target_loss\":3.0,\"fooled\":true,\"extra\":1}\n",
        );
        let records = parse_records(text, "test").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].target_loss, None);
        assert_eq!(records[1].fooled, Some(true));
    }

    #[test]
    fn errors_name_the_line() {
        let text = "{\"id\":\"a\",\"surrogate_loss\":1.0}\nnot json\n";
        let err = parse_records(text, "stream.jsonl").unwrap_err();
        assert!(err.to_string().contains("stream.jsonl line 2"));
    }

    #[test]
    fn rejects_negative_and_non_finite_losses() {
        let neg = "{\"id\":\"a\",\"surrogate_loss\":-1.0}\n";
        assert!(parse_records(neg, "t").is_err());
        let neg_target = "{\"id\":\"a\",\"surrogate_loss\":1.0,\"target_loss\":-2.0}\n";
        assert!(parse_records(neg_target, "t").is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        let text = concat!(
            "{\"id\":\"a\",\"surrogate_loss\":1.5,\"target_loss\":2.25,\"fooled\":false}\n",
            "{\"id\":\"b\",\"surrogate_loss\":0.0}\n",
        );
        let records = parse_records(text, "t").unwrap();
        let emitted = record_lines(&records);
        let reparsed = parse_records(&emitted, "t").unwrap();
        assert_eq!(records, reparsed);
        assert_eq!(record_lines(&reparsed), emitted);
    }

    #[test]
    fn stream_conversion_numbers_arrivals() {
        let records = parse_records(
            "{\"id\":\"x\",\"surrogate_loss\":4.0}\n{\"id\":\"y\",\"surrogate_loss\":5.0}\n",
            "t",
        )
        .unwrap();
        let stream = to_stream(&records).unwrap();
        assert_eq!(stream.n(), 2);
        assert_eq!(stream.items()[1].arrival, 2);
        assert_eq!(stream.items()[1].observed_value, 5.0);
    }
}
