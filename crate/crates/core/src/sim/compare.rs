use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::SimReport;
use crate::math;

/// One empirical rate against its prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub empirical: f64,
    pub analytic: f64,
    /// Number of Bernoulli trials behind `empirical`.
    pub samples: usize,
    /// `(empirical - analytic) / sqrt(analytic (1 - analytic) / samples)`.
    pub z: f64,
}

impl ComparisonRow {
    fn new(label: String, successes: usize, samples: usize, analytic: f64) -> Self {
        let empirical = successes as f64 / samples as f64;
        let sigma = math::sqrt(analytic * (1.0 - analytic) / samples as f64);
        let diff = empirical - analytic;
        let z = if sigma > 0.0 {
            diff / sigma
        } else if diff.abs() <= 1e-12 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Self {
            label,
            empirical,
            analytic,
            samples,
            z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub rows: Vec<ComparisonRow>,
    pub z_max: f64,
    pub pass: bool,
}

/// Compares every empirical rate in `report` with its prediction. Rates with
/// no samples are skipped. Passes iff every `|z| <= z_max`.
pub fn compare_analytic(report: &SimReport, z_max: f64) -> Verdict {
    let mut rows = Vec::new();
    let mut push = |label: String, successes: usize, samples: usize, analytic: f64| {
        if samples > 0 {
            rows.push(ComparisonRow::new(label, successes, samples, analytic));
        }
    };

    push(
        "sift.fraction".into(),
        report.sifted,
        report.transmissions,
        report.sift_probability,
    );
    for c in &report.checks {
        push(
            format!("check.{}", c.basis),
            c.errors,
            c.checked,
            c.analytic,
        );
    }
    for s in &report.stages {
        let a = &s.analytic;
        if a.keep_probability < 1.0 {
            push(
                format!("{}.kept", s.kind),
                s.kept,
                s.trials,
                a.keep_probability,
            );
        }
        if let Some(r) = a.rates {
            for (name, i) in [("q_x", 1), ("q_y", 2), ("q_z", 3)] {
                push(
                    format!("{}.{name}", s.kind),
                    s.counts[i],
                    s.kept,
                    r.to_array()[i],
                );
            }
        }
        push(format!("{}.p_x", s.kind), s.bit_errors(), s.kept, a.p_x);
        push(format!("{}.p_z", s.kind), s.phase_errors(), s.kept, a.p_z);
    }

    let pass = rows.iter().all(|r| r.z.abs() <= z_max);
    Verdict { rows, z_max, pass }
}
