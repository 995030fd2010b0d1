//! Time-indexed simulation record and its CSV form.
//!
//! Floats are written with the shortest decimal representation that parses
//! back to the same bits, so write -> read round trips are lossless.

use crate::error::{Error, Result};
use std::path::Path;

/// One record per control tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub r: f64,
    pub x1: f64,
    pub x2: f64,
    pub xm1: f64,
    pub xm2: f64,
    pub e1: f64,
    pub e2: f64,
    pub z1: f64,
    pub z2: f64,
    pub v_x: f64,
    pub v_1: f64,
    pub u_eq: f64,
    pub kx1: f64,
    pub kx2: f64,
    pub kr: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub tau_d: f64,
    /// Lyapunov-function value; recorded when CLF diagnostics are on.
    pub v_clf: f64,
}

/// Fixed column order of the CSV schema (without the optional CLF column).
pub const COLUMNS: [&str; 19] = [
    "t", "r", "x1", "x2", "xm1", "xm2", "e1", "e2", "z1", "z2", "v_x", "v_1", "u_eq", "kx1",
    "kx2", "kr", "theta1", "theta2", "tau_d",
];
pub const CLF_COLUMN: &str = "v_clf";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
    /// Whether the optional `v_clf` column is populated (and serialized).
    pub with_clf: bool,
}

impl TraceRow {
    fn get(&self, idx: usize) -> f64 {
        [
            self.t,
            self.r,
            self.x1,
            self.x2,
            self.xm1,
            self.xm2,
            self.e1,
            self.e2,
            self.z1,
            self.z2,
            self.v_x,
            self.v_1,
            self.u_eq,
            self.kx1,
            self.kx2,
            self.kr,
            self.theta1,
            self.theta2,
            self.tau_d,
            self.v_clf,
        ][idx]
    }

    fn set(&mut self, idx: usize, v: f64) {
        let slot = [
            &mut self.t,
            &mut self.r,
            &mut self.x1,
            &mut self.x2,
            &mut self.xm1,
            &mut self.xm2,
            &mut self.e1,
            &mut self.e2,
            &mut self.z1,
            &mut self.z2,
            &mut self.v_x,
            &mut self.v_1,
            &mut self.u_eq,
            &mut self.kx1,
            &mut self.kx2,
            &mut self.kr,
            &mut self.theta1,
            &mut self.theta2,
            &mut self.tau_d,
            &mut self.v_clf,
        ];
        *slot.into_iter().nth(idx).unwrap() = v;
    }
}

impl SimTrace {
    pub fn column_names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = COLUMNS.to_vec();
        if self.with_clf {
            names.push(CLF_COLUMN);
        }
        names
    }

    /// Extract one column by header name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column_names()
            .iter()
            .position(|&c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|row| row.get(idx)).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let names = self.column_names();
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, _) in names.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // shortest round-trip float formatting
                out.push_str(&format!("{}", row.get(i)));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::BadCsv {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| bad(0, "missing header".to_string()))?;
        let names: Vec<&str> = header.split(',').collect();
        let with_clf = match names.len() {
            n if n == COLUMNS.len() => false,
            n if n == COLUMNS.len() + 1 && names[n - 1] == CLF_COLUMN => true,
            _ => return Err(bad(1, format!("unexpected header `{header}`"))),
        };
        for (i, expect) in COLUMNS.iter().enumerate() {
            if names[i] != *expect {
                return Err(bad(1, format!("column {i} is `{}`, expected `{expect}`", names[i])));
            }
        }
        let ncols = names.len();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut row = TraceRow::default();
            let mut count = 0;
            for (i, field) in line.split(',').enumerate() {
                if i >= ncols {
                    return Err(bad(idx + 1, "too many fields".to_string()));
                }
                let v: f64 = field
                    .parse()
                    .map_err(|e| bad(idx + 1, format!("bad float `{field}`: {e}")))?;
                row.set(i, v);
                count += 1;
            }
            if count != ncols {
                return Err(bad(idx + 1, "missing fields".to_string()));
            }
            rows.push(row);
        }
        Ok(SimTrace { rows, with_clf })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(seed: f64) -> TraceRow {
        let mut row = TraceRow::default();
        for i in 0..20 {
            row.set(i, seed * (i as f64 + 1.0) * 0.123456789);
        }
        row
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let trace = SimTrace {
            rows: vec![row(1.0), row(-3.7e-13), row(2.0f64.sqrt())],
            with_clf: true,
        };
        let text = trace.to_csv_string();
        let back = SimTrace::from_csv_str(&text, "mem").unwrap();
        assert_eq!(trace, back);
        assert_eq!(text, back.to_csv_string());
    }

    #[test]
    fn unknown_column_is_an_error() {
        let trace = SimTrace::default();
        assert!(matches!(
            trace.column("nope"),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn clf_column_only_when_enabled() {
        let without = SimTrace {
            rows: vec![row(1.0)],
            with_clf: false,
        };
        assert!(without.column("v_clf").is_err());
        assert!(!without.to_csv_string().contains("v_clf"));
        let with = SimTrace {
            rows: vec![row(1.0)],
            with_clf: true,
        };
        assert!(with.column("v_clf").is_ok());
    }

    proptest! {
        #[test]
        fn arbitrary_floats_round_trip(vals in proptest::collection::vec(-1e12f64..1e12, 20)) {
            let mut r0 = TraceRow::default();
            for (i, v) in vals.iter().enumerate() {
                r0.set(i, *v);
            }
            let trace = SimTrace { rows: vec![r0], with_clf: true };
            let back = SimTrace::from_csv_str(&trace.to_csv_string(), "mem").unwrap();
            prop_assert_eq!(trace, back);
        }
    }
}
