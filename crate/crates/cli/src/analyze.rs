//! Analysis of a sweep CSV: contrast at the proper phase points, fringe
//! fit, and the class decision.

use std::f64::consts::PI;
use std::fmt;

use deutsch_optics::deutsch::FunctionClass;
use deutsch_optics::labsim::{
    aggregate_contrast, classify_counts, contrast_ratio, fit_visibility, ContrastReport, FringeFit,
};
use deutsch_optics::{DetectionRecord, SweepConfig};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ProperPoint {
    pub voltage: f64,
    pub phase: f64,
    pub target_phase: f64,
    pub counts_d1: u64,
    pub counts_d2: u64,
    pub contrast: Option<ContrastReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub n_rows: usize,
    pub proper_points: Vec<ProperPoint>,
    pub overall: Option<ContrastReport>,
    pub fit: Option<FringeFit>,
    pub fit_note: Option<String>,
    pub decision: FunctionClass,
}

/// Rows nearest to φ = (2N+1)π, one per odd multiple inside the sweep,
/// kept only when within half a grid step of the target.
pub fn proper_points(records: &[DetectionRecord]) -> Vec<ProperPoint> {
    if records.is_empty() {
        return Vec::new();
    }
    let mut steps: Vec<f64> = records
        .windows(2)
        .map(|w| (w[1].phase - w[0].phase).abs())
        .filter(|d| *d > 0.0)
        .collect();
    steps.sort_by(f64::total_cmp);
    let half_step = steps.get(steps.len() / 2).map_or(0.0, |s| s / 2.0) + 1e-9;
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.phase), hi.max(r.phase))
        });
    let first = ((lo - half_step) / PI).ceil() as i64;
    let last = ((hi + half_step) / PI).floor() as i64;
    (first..=last)
        .filter(|m| m.rem_euclid(2) == 1)
        .filter_map(|m| {
            let target = m as f64 * PI;
            let r = records.iter().min_by(|a, b| {
                (a.phase - target)
                    .abs()
                    .total_cmp(&(b.phase - target).abs())
            })?;
            ((r.phase - target).abs() <= half_step).then(|| ProperPoint {
                voltage: r.voltage,
                phase: r.phase,
                target_phase: target,
                counts_d1: r.counts_d1,
                counts_d2: r.counts_d2,
                contrast: contrast_ratio(r.counts_d1 as f64, r.counts_d2 as f64).ok(),
            })
        })
        .collect()
}

pub fn analyze(records: &[DetectionRecord], drift_per_volt: f64, z: f64) -> Analysis {
    let points = proper_points(records);
    let cfg = SweepConfig {
        drift_per_volt,
        ..Default::default()
    };
    let (fit, fit_note) = match fit_visibility(records, &cfg) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let decision = if points.is_empty() {
        FunctionClass::Indeterminate
    } else {
        let c1 = points.iter().map(|p| p.counts_d1).sum();
        let c2 = points.iter().map(|p| p.counts_d2).sum();
        classify_counts(c1, c2, z)
    };
    Analysis {
        n_rows: records.len(),
        proper_points: points,
        overall: aggregate_contrast(records).ok(),
        fit,
        fit_note,
        decision,
    }
}

fn pct(r: &ContrastReport) -> String {
    format!("{:.4} ± {:.4} %", 100.0 * r.eta, 100.0 * r.eta_std)
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {}", self.n_rows)?;
        if self.proper_points.is_empty() {
            writeln!(f, "proper phase points: none in range")?;
        }
        for p in &self.proper_points {
            let eta = p.contrast.as_ref().map_or("undefined".into(), pct);
            writeln!(
                f,
                "proper point φ≈{:.0}π at {} V (φ = {:.6} rad): D1={} D2={} eta = {}",
                p.target_phase / PI,
                p.voltage,
                p.phase,
                p.counts_d1,
                p.counts_d2,
                eta
            )?;
        }
        if let Some(o) = &self.overall {
            writeln!(f, "overall contrast (summed counts): eta = {}", pct(o))?;
        }
        match (&self.fit, &self.fit_note) {
            (Some(fit), _) if fit.flat => {
                writeln!(f, "fringe: flat (no interference above shot noise)")?;
            }
            (Some(fit), _) => {
                writeln!(
                    f,
                    "fringe: fitted visibility = {:.6} (amplitude {:.3}, phase shift {:.4} rad)",
                    fit.visibility, fit.amplitude, fit.phase_shift
                )?;
            }
            (None, Some(note)) => writeln!(f, "fringe: fit unavailable ({note})")?,
            (None, None) => {}
        }
        writeln!(f, "decision: {}", self.decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use deutsch_optics::labsim::simulate_sweep;
    use deutsch_optics::OracleKind;

    #[test]
    fn default_grid_proper_points() {
        let recs = simulate_sweep(OracleKind::BalancedIdentity, &SweepConfig::default()).unwrap();
        let pts = proper_points(&recs);
        // 8.5 V and 25.5 V fall between grid points; both neighbours are equally close.
        assert_eq!(pts.len(), 2);
        assert!((pts[0].voltage - 8.5).abs() <= 0.5);
        assert!((pts[1].voltage - 25.5).abs() <= 0.5);
        let a = analyze(&recs, 0.0, 3.0);
        assert_eq!(a.decision, FunctionClass::Balanced);
        assert!(!a.fit.unwrap().flat);
    }

    #[test]
    fn constant_sweep_is_flat_and_constant() {
        let recs = simulate_sweep(OracleKind::ConstantZero, &SweepConfig::default()).unwrap();
        let a = analyze(&recs, 0.0, 3.0);
        assert_eq!(a.decision, FunctionClass::Constant);
        assert!(a.fit.unwrap().flat);
        assert_eq!(a.overall.unwrap().eta, 1.0);
        assert!(a
            .proper_points
            .iter()
            .all(|p| p.contrast.unwrap().eta == 1.0));
    }

    #[test]
    fn short_sweep_reports_fit_note() {
        let cfg = SweepConfig {
            v_end: 5.0,
            ..Default::default()
        };
        let recs = simulate_sweep(OracleKind::BalancedIdentity, &cfg).unwrap();
        let a = analyze(&recs, 0.0, 3.0);
        assert!(a.fit.is_none() && a.fit_note.is_some());
        assert_eq!(a.decision, FunctionClass::Indeterminate);
    }
}
