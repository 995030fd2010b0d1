//! Desired joint-angle trajectories.

use crate::error::{Error, Result};
use std::path::Path;

/// Reference signal r(t), the desired absolute joint angle.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceTrajectory {
    /// Two-harmonic stand-in for a hip swing over one gait cycle:
    /// `a1 sin(2 pi t / period) + a2 sin(4 pi t / period + phase2)`.
    ParametricWalk {
        a1: f64,
        a2: f64,
        period: f64,
        phase2: f64,
    },
    Constant {
        value: f64,
    },
    Step {
        value: f64,
        at: f64,
    },
    Sine {
        amplitude: f64,
        period: f64,
        phase: f64,
        offset: f64,
    },
    /// Piecewise-linear interpolation of sampled `(t, angle)` pairs,
    /// clamped at the endpoints.
    Samples {
        times: Vec<f64>,
        angles: Vec<f64>,
    },
}

impl ReferenceTrajectory {
    pub fn default_walk() -> Self {
        ReferenceTrajectory::ParametricWalk {
            a1: 0.25,
            a2: 0.10,
            period: 2.0,
            phase2: 0.6,
        }
    }

    pub fn sample(&self, t: f64) -> f64 {
        match self {
            ReferenceTrajectory::ParametricWalk {
                a1,
                a2,
                period,
                phase2,
            } => {
                let w = 2.0 * std::f64::consts::PI / period;
                a1 * (w * t).sin() + a2 * (2.0 * w * t + phase2).sin()
            }
            ReferenceTrajectory::Constant { value } => *value,
            ReferenceTrajectory::Step { value, at } => {
                if t >= *at {
                    *value
                } else {
                    0.0
                }
            }
            ReferenceTrajectory::Sine {
                amplitude,
                period,
                phase,
                offset,
            } => offset + amplitude * (2.0 * std::f64::consts::PI * t / period + phase).sin(),
            ReferenceTrajectory::Samples { times, angles } => {
                if t <= times[0] {
                    return angles[0];
                }
                if t >= *times.last().unwrap() {
                    return *angles.last().unwrap();
                }
                let i = times.partition_point(|&x| x <= t) - 1;
                let (t0, t1) = (times[i], times[i + 1]);
                let (a0, a1) = (angles[i], angles[i + 1]);
                a0 + (a1 - a0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Load a two-column `t, angle` CSV (optional header, comma-separated).
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut angles = Vec::new();
        let bad = |line: usize, message: &str| Error::BadCsv {
            path: origin.to_string(),
            line,
            message: message.to_string(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
            if parts.next().is_some() {
                return Err(bad(idx + 1, "expected exactly two columns"));
            }
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(t), Ok(angle)) => {
                    times.push(t);
                    angles.push(angle);
                }
                _ if idx == 0 && times.is_empty() => continue, // header row
                _ => return Err(bad(idx + 1, "could not parse two numbers")),
            }
        }
        if times.len() < 2 {
            return Err(bad(0, "need at least two samples"));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(bad(0, "times must be strictly increasing"));
        }
        if !times.iter().chain(angles.iter()).all(|v| v.is_finite()) {
            return Err(bad(0, "non-finite sample"));
        }
        Ok(ReferenceTrajectory::Samples { times, angles })
    }
}
