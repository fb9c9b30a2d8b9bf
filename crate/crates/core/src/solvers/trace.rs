use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::DenseVector;

pub const CSV_HEADER: &str = "sweep,n,objective,step_norm,support_size,rmse,elapsed_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Update count at the time of the record.
    pub n: usize,
    pub sweep: usize,
    pub objective: f64,
    /// `‖x − x_prev_record‖₂`.
    pub step_norm: f64,
    pub support_size: usize,
    pub rmse: Option<f64>,
    pub elapsed_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

/// Per-record sign vectors and iterates, kept only when asked for.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshots {
    pub signs: Vec<Vec<i8>>,
    pub iterates: Vec<DenseVector>,
}

#[derive(Debug, thiserror::Error)]
#[error("trace CSV line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }

    /// True when no recorded objective exceeds its predecessor by more than `slack`.
    pub fn is_monotone_nonincreasing(&self, slack: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective + slack)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.sweep,
                r.n,
                format_f64(r.objective),
                format_f64(r.step_norm),
                r.support_size,
                opt(r.rmse),
                opt(r.elapsed_s)
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TraceParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(TraceParseError {
                    line: 1,
                    message: "missing or unexpected header".into(),
                })
            }
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| TraceParseError {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(err(format!("expected 7 fields, found {}", fields.len())));
            }
            let int = |s: &str| s.trim().parse::<usize>().map_err(|e| err(e.to_string()));
            let float = |s: &str| s.trim().parse::<f64>().map_err(|e| err(e.to_string()));
            let opt = |s: &str| {
                if s.trim().is_empty() {
                    Ok(None)
                } else {
                    float(s).map(Some)
                }
            };
            records.push(TraceRecord {
                sweep: int(fields[0])?,
                n: int(fields[1])?,
                objective: float(fields[2])?,
                step_norm: float(fields[3])?,
                support_size: int(fields[4])?,
                rmse: opt(fields[5])?,
                elapsed_s: opt(fields[6])?,
            });
        }
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record_strategy() -> impl Strategy<Value = TraceRecord> {
        (
            0usize..10_000,
            0usize..1_000_000,
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            0.0f64..1e6,
            0usize..500,
            proptest::option::of(0.0f64..10.0),
            proptest::option::of(0.0f64..100.0),
        )
            .prop_map(|(sweep, n, objective, step_norm, support_size, rmse, elapsed_s)| TraceRecord {
                n,
                sweep,
                objective,
                step_norm,
                support_size,
                rmse,
                elapsed_s,
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(records in proptest::collection::vec(record_strategy(), 0..20)) {
            let trace = IterationTrace { records };
            let parsed = IterationTrace::from_csv(&trace.to_csv()).unwrap();
            prop_assert_eq!(parsed, trace);
        }
    }

    #[test]
    fn bad_csv_rejected() {
        assert!(IterationTrace::from_csv("nope\n").is_err());
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        assert_eq!(IterationTrace::from_csv(&text).unwrap_err().line, 2);
    }

    #[test]
    fn monotonicity_check() {
        let mk = |o: f64| TraceRecord {
            n: 0,
            sweep: 0,
            objective: o,
            step_norm: 0.0,
            support_size: 0,
            rmse: None,
            elapsed_s: None,
        };
        let t = IterationTrace {
            records: vec![mk(3.0), mk(2.0), mk(2.0)],
        };
        assert!(t.is_monotone_nonincreasing(0.0));
        let t = IterationTrace {
            records: vec![mk(3.0), mk(3.5)],
        };
        assert!(!t.is_monotone_nonincreasing(0.1));
    }
}
