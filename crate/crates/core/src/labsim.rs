//! Photon-counting layer: PZT calibration, imperfection model, Poisson
//! sampling of the voltage sweep, and the analysis used on the resulting
//! curves (contrast ratio and fringe-visibility fit).

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deutsch::{run_deutsch, DeutschError, FunctionClass, GateSource};
use crate::optics::OracleKind;
use crate::qcore::{PolProbs, ALGEBRA_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),
    #[error("contrast undefined: no counts on either detector")]
    UndefinedContrast,
    #[error("counts must be finite and non-negative, got ({0}, {1})")]
    BadCounts(f64, f64),
    #[error("fit needs at least {needed} records, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("records span {span:.3} rad of phase; the fit needs at least one full period")]
    InsufficientSpan { span: f64 },
    #[error(transparent)]
    Deutsch(#[from] DeutschError),
}

/// Every knob of the simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Detected photon rate, counts per second.
    pub rate: f64,
    /// Seconds of integration per voltage point.
    pub integration_time: f64,
    pub v_start: f64,
    pub v_end: f64,
    pub v_step: f64,
    /// PZT voltage for a 2π phase change.
    pub volts_per_period: f64,
    pub phase_offset: f64,
    /// Fringe visibility ν in [0, 1].
    pub visibility: f64,
    /// Detector cross-talk ε in [0, 0.5].
    pub extinction: f64,
    /// Fiber-coupling loss per volt, κ in g(v) = max(0, 1 − κv).
    pub drift_per_volt: f64,
    /// Multiplicative accidental background from multi-photon events.
    pub background_prob: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rate: 150_000.0,
            integration_time: 1.0,
            v_start: 0.0,
            v_end: 34.0,
            v_step: 1.0,
            volts_per_period: 17.0,
            phase_offset: 0.0,
            visibility: 1.0,
            extinction: 0.0,
            drift_per_volt: 0.0,
            background_prob: 0.0,
            seed: 42,
        }
    }
}

/// Two-photon probability of the attenuated source.
pub const TWO_PHOTON_PROB: f64 = 2.5e-4;

impl SweepConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::InvalidConfig(msg));
        let fields = [
            ("rate", self.rate),
            ("integration_time", self.integration_time),
            ("v_start", self.v_start),
            ("v_end", self.v_end),
            ("v_step", self.v_step),
            ("volts_per_period", self.volts_per_period),
            ("phase_offset", self.phase_offset),
            ("visibility", self.visibility),
            ("extinction", self.extinction),
            ("drift_per_volt", self.drift_per_volt),
            ("background_prob", self.background_prob),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.v_step <= 0.0 {
            return bad(format!("v_step must be > 0, got {}", self.v_step));
        }
        if self.v_end < self.v_start {
            return bad(format!(
                "v_end ({}) must be >= v_start ({})",
                self.v_end, self.v_start
            ));
        }
        if self.rate < 0.0 || self.integration_time < 0.0 {
            return bad("rate and integration_time must be >= 0".into());
        }
        if self.volts_per_period <= 0.0 {
            return bad(format!(
                "volts_per_period must be > 0, got {}",
                self.volts_per_period
            ));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return bad(format!(
                "visibility must lie in [0, 1], got {}",
                self.visibility
            ));
        }
        if !(0.0..=0.5).contains(&self.extinction) {
            return bad(format!(
                "extinction must lie in [0, 0.5], got {}",
                self.extinction
            ));
        }
        if self.drift_per_volt < 0.0 {
            return bad(format!(
                "drift_per_volt must be >= 0, got {}",
                self.drift_per_volt
            ));
        }
        if !(0.0..1.0).contains(&self.background_prob) {
            return bad(format!(
                "background_prob must lie in [0, 1), got {}",
                self.background_prob
            ));
        }
        Ok(())
    }

    /// Voltage grid `v_start, v_start + v_step, …, ≤ v_end`.
    pub fn grid(&self) -> Result<Vec<f64>, LabError> {
        self.validate()?;
        // Slack so that e.g. 0..34 step 1 keeps the 34 V endpoint.
        let n = ((self.v_end - self.v_start) / self.v_step + 1e-9).floor() as usize + 1;
        if n == 0 {
            return Err(LabError::InvalidConfig("empty voltage grid".into()));
        }
        Ok((0..n)
            .map(|i| self.v_start + i as f64 * self.v_step)
            .collect())
    }

    /// Expected detected photons per point before splitting between detectors.
    pub fn photons_per_point(&self) -> f64 {
        self.rate * self.integration_time
    }

    /// Coupling efficiency g(v).
    pub fn coupling(&self, v: f64) -> f64 {
        (1.0 - self.drift_per_volt * v).max(0.0)
    }
}

/// PZT calibration: φ = 2πv / volts_per_period + phase_offset.
pub fn voltage_to_phase(v: f64, cfg: &SweepConfig) -> f64 {
    TAU * v / cfg.volts_per_period + cfg.phase_offset
}

/// Voltages in the sweep range where φ = (2N+1)π.
pub fn proper_phase_voltages(cfg: &SweepConfig) -> Vec<f64> {
    let to_v = |phase: f64| (phase - cfg.phase_offset) * cfg.volts_per_period / TAU;
    let lo = ((TAU * cfg.v_start / cfg.volts_per_period + cfg.phase_offset) / PI).floor() as i64;
    let hi = ((TAU * cfg.v_end / cfg.volts_per_period + cfg.phase_offset) / PI).ceil() as i64;
    (lo..=hi)
        .filter(|m| m.rem_euclid(2) == 1)
        .map(|m| to_v(m as f64 * PI))
        .filter(|&v| v >= cfg.v_start - 1e-9 && v <= cfg.v_end + 1e-9)
        .collect()
}

/// Detection probabilities with visibility loss and detector cross-talk.
pub fn detection_probs(
    kind: OracleKind,
    phi: f64,
    cfg: &SweepConfig,
) -> Result<PolProbs, LabError> {
    let ideal = run_deutsch(kind, phi, GateSource::IdealOracle)?.probs;
    let (mut p_h, mut p_v) = (ideal.p_h, ideal.p_v);
    if kind.is_balanced() {
        let nu = cfg.visibility;
        p_h = nu * p_h + (1.0 - nu) * 0.5;
        p_v = nu * p_v + (1.0 - nu) * 0.5;
    }
    let eps = cfg.extinction;
    let (h, v) = ((1.0 - eps) * p_h + eps * p_v, (1.0 - eps) * p_v + eps * p_h);
    debug_assert!((h + v - 1.0).abs() <= ALGEBRA_TOL);
    Ok(PolProbs { p_v: v, p_h: h })
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub voltage: f64,
    pub phase: f64,
    pub counts_d1: u64,
    pub counts_d2: u64,
}

/// Noise-free counterpart of [`DetectionRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedRecord {
    pub voltage: f64,
    pub phase: f64,
    pub mean_d1: f64,
    pub mean_d2: f64,
}

/// Mean counts (D₁, D₂) at voltage `v`.
pub fn expected_counts(
    kind: OracleKind,
    v: f64,
    cfg: &SweepConfig,
) -> Result<(f64, f64), LabError> {
    let p = detection_probs(kind, voltage_to_phase(v, cfg), cfg)?;
    let scale = cfg.photons_per_point() * cfg.coupling(v) * (1.0 + cfg.background_prob);
    Ok((scale * p.d1(), scale * p.d2()))
}

/// Counter-based random stream for one sweep point.
pub fn point_stream(seed: u64, kind: OracleKind, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind.index() << 48) | (index & 0xFFFF_FFFF_FFFF));
    rng
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u64
}

/// Draws one record at voltage `v`; D₁ is drawn before D₂ from `rng`.
pub fn sample_counts<R: Rng + ?Sized>(
    kind: OracleKind,
    v: f64,
    cfg: &SweepConfig,
    rng: &mut R,
) -> Result<DetectionRecord, LabError> {
    cfg.validate()?;
    let (m1, m2) = expected_counts(kind, v, cfg)?;
    Ok(DetectionRecord {
        voltage: v,
        phase: voltage_to_phase(v, cfg),
        counts_d1: poisson(m1, rng),
        counts_d2: poisson(m2, rng),
    })
}

/// Runs the full voltage sweep. Points are evaluated in parallel; each point
/// owns its random stream so the result does not depend on scheduling.
pub fn simulate_sweep(
    kind: OracleKind,
    cfg: &SweepConfig,
) -> Result<Vec<DetectionRecord>, LabError> {
    let grid = cfg.grid()?;
    grid.par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut rng = point_stream(cfg.seed, kind, i as u64);
            sample_counts(kind, v, cfg, &mut rng)
        })
        .collect()
}

pub fn expected_sweep(
    kind: OracleKind,
    cfg: &SweepConfig,
) -> Result<Vec<ExpectedRecord>, LabError> {
    cfg.grid()?
        .into_iter()
        .map(|v| {
            let (mean_d1, mean_d2) = expected_counts(kind, v, cfg)?;
            Ok(ExpectedRecord {
                voltage: v,
                phase: voltage_to_phase(v, cfg),
                mean_d1,
                mean_d2,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContrastReport {
    pub eta: f64,
    pub eta_std: f64,
    pub n_points: usize,
}

/// η = |c1 − c2| / (c1 + c2) with Poisson error propagation.
pub fn contrast_ratio(c1: f64, c2: f64) -> Result<ContrastReport, LabError> {
    if !(c1.is_finite() && c2.is_finite()) || c1 < 0.0 || c2 < 0.0 {
        return Err(LabError::BadCounts(c1, c2));
    }
    let total = c1 + c2;
    if total == 0.0 {
        return Err(LabError::UndefinedContrast);
    }
    Ok(ContrastReport {
        eta: (c1 - c2).abs() / total,
        eta_std: 2.0 * (c1 * c2 * total).sqrt() / (total * total),
        n_points: 1,
    })
}

/// Contrast of the summed counts over a set of records.
pub fn aggregate_contrast(records: &[DetectionRecord]) -> Result<ContrastReport, LabError> {
    let c1: u64 = records.iter().map(|r| r.counts_d1).sum();
    let c2: u64 = records.iter().map(|r| r.counts_d2).sum();
    let mut report = contrast_ratio(c1 as f64, c2 as f64)?;
    report.n_points = records.len();
    Ok(report)
}

/// Class decision from counts at a proper phase point. Requires the contrast
/// to exceed `z` standard deviations.
pub fn classify_counts(c1: u64, c2: u64, z: f64) -> FunctionClass {
    match contrast_ratio(c1 as f64, c2 as f64) {
        Ok(r) if r.eta > z * r.eta_std.max(f64::EPSILON) || r.eta == 1.0 => {
            if c1 > c2 {
                FunctionClass::Balanced
            } else {
                FunctionClass::Constant
            }
        }
        _ => FunctionClass::Indeterminate,
    }
}

/// Result of fitting `a·g·(1 − ν·cos(φ + δ))` to a fringe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    /// ν, clamped to [0, 1]; 0 when `flat`.
    pub visibility: f64,
    pub amplitude: f64,
    pub phase_shift: f64,
    /// No modulation above shot noise.
    pub flat: bool,
}

impl FringeFit {
    /// Fitted curve at phase `phi` and coupling `gain`.
    pub fn eval(&self, phi: f64, gain: f64) -> f64 {
        self.amplitude * gain * (1.0 - self.visibility * (phi + self.phase_shift).cos())
    }
}

/// Minimum points for a fringe fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Modulation must exceed this many shot-noise standard errors to count as a fringe.
const FLAT_SIGMA: f64 = 5.0;

/// Linear least squares over (phase, gain, counts) samples.
///
/// With the gain fixed the model is linear in the basis `g, g·cosφ, g·sinφ`,
/// so the normal equations give the exact least-squares optimum.
pub fn fit_fringe(samples: &[(f64, f64, f64)]) -> Result<FringeFit, LabError> {
    if samples.len() < MIN_FIT_POINTS {
        return Err(LabError::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: samples.len(),
        });
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.0), hi.max(s.0))
        });
    if hi - lo < TAU - 1e-9 {
        return Err(LabError::InsufficientSpan { span: hi - lo });
    }

    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(phi, g, y) in samples {
        let row = [g, g * phi.cos(), g * phi.sin()];
        for r in 0..3 {
            atb[r] += row[r] * y;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let flat = FringeFit {
        visibility: 0.0,
        amplitude: samples.iter().map(|s| s.2).sum::<f64>() / samples.len() as f64,
        phase_shift: 0.0,
        flat: true,
    };
    let Some([a, b, c]) = solve3(ata, atb) else {
        return Ok(flat);
    };
    let modulation = b.hypot(c);
    let n = samples.len() as f64;
    let mean = flat.amplitude.max(1.0);
    // Poisson noise: each Fourier coefficient has standard error ≈ sqrt(2·mean/n).
    let noise = (2.0 * mean / n).sqrt();
    if a <= 0.0 || modulation <= FLAT_SIGMA * noise {
        return Ok(FringeFit {
            amplitude: a.max(0.0),
            ..flat
        });
    }
    Ok(FringeFit {
        visibility: (modulation / a).clamp(0.0, 1.0),
        amplitude: a,
        phase_shift: c.atan2(-b),
        flat: false,
    })
}

/// Fits the D₁ fringe of a sweep, with the coupling drift fixed from `cfg`.
pub fn fit_visibility(
    records: &[DetectionRecord],
    cfg: &SweepConfig,
) -> Result<FringeFit, LabError> {
    let samples: Vec<_> = records
        .iter()
        .map(|r| (r.phase, cfg.coupling(r.voltage), r.counts_d1 as f64))
        .collect();
    fit_fringe(&samples)
}

/// Same fit on noise-free expected counts.
pub fn fit_expected_visibility(
    records: &[ExpectedRecord],
    cfg: &SweepConfig,
) -> Result<FringeFit, LabError> {
    let samples: Vec<_> = records
        .iter()
        .map(|r| (r.phase, cfg.coupling(r.voltage), r.mean_d1))
        .collect();
    fit_fringe(&samples)
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[r].iter_mut().zip(pivot_row).skip(col) {
                *dst -= f * src;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_points() {
        let cfg = SweepConfig::default();
        assert_eq!(voltage_to_phase(0.0, &cfg), 0.0);
        assert!((voltage_to_phase(8.5, &cfg) - PI).abs() < 1e-15);
        assert!((voltage_to_phase(34.0, &cfg) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn proper_points_in_default_range() {
        let v = proper_phase_voltages(&SweepConfig::default());
        assert_eq!(v.len(), 2);
        assert!((v[0] - 8.5).abs() < 1e-12 && (v[1] - 25.5).abs() < 1e-12);
    }

    #[test]
    fn default_grid_has_35_points() {
        let g = SweepConfig::default().grid().unwrap();
        assert_eq!(g.len(), 35);
        assert_eq!(g[34], 34.0);
    }

    #[test]
    fn config_validation() {
        let ok = SweepConfig::default();
        assert!(ok.validate().is_ok());
        let cases = [
            SweepConfig {
                v_step: 0.0,
                ..ok.clone()
            },
            SweepConfig {
                v_step: -1.0,
                ..ok.clone()
            },
            SweepConfig {
                v_end: -1.0,
                ..ok.clone()
            },
            SweepConfig {
                rate: -1.0,
                ..ok.clone()
            },
            SweepConfig {
                visibility: 1.1,
                ..ok.clone()
            },
            SweepConfig {
                extinction: 0.6,
                ..ok.clone()
            },
            SweepConfig {
                drift_per_volt: -0.1,
                ..ok.clone()
            },
            SweepConfig {
                background_prob: 1.0,
                ..ok.clone()
            },
            SweepConfig {
                volts_per_period: 0.0,
                ..ok.clone()
            },
            SweepConfig {
                rate: f64::NAN,
                ..ok.clone()
            },
        ];
        for c in cases {
            assert!(
                matches!(c.validate(), Err(LabError::InvalidConfig(_))),
                "{c:?}"
            );
            assert!(simulate_sweep(OracleKind::ConstantZero, &c).is_err());
        }
    }

    #[test]
    fn detection_probs_examples() {
        let cfg = SweepConfig::default();
        let p = detection_probs(OracleKind::BalancedIdentity, PI, &cfg).unwrap();
        assert!((p.p_h - 1.0).abs() < 1e-12 && p.p_v.abs() < 1e-12);

        let cfg96 = SweepConfig {
            visibility: 0.96,
            ..cfg.clone()
        };
        let p = detection_probs(OracleKind::BalancedInverse, PI, &cfg96).unwrap();
        assert!((p.p_h - 0.98).abs() < 1e-12 && (p.p_v - 0.02).abs() < 1e-12);
        let lo = detection_probs(OracleKind::BalancedInverse, 0.0, &cfg96)
            .unwrap()
            .p_h;
        let hi = p.p_h;
        assert!(((hi - lo) / (hi + lo) - 0.96).abs() < 1e-12);

        let cfg_eps = SweepConfig {
            extinction: 2e-4,
            ..cfg
        };
        for phi in [0.0, 1.0, PI, 5.0] {
            let p = detection_probs(OracleKind::ConstantOne, phi, &cfg_eps).unwrap();
            assert!((p.p_h - 2e-4).abs() < 1e-15 && (p.p_v - 0.9998).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rate_gives_zero_counts() {
        let cfg = SweepConfig {
            rate: 0.0,
            ..Default::default()
        };
        let mut rng = point_stream(1, OracleKind::BalancedIdentity, 0);
        let r = sample_counts(OracleKind::BalancedIdentity, 8.5, &cfg, &mut rng).unwrap();
        assert_eq!((r.counts_d1, r.counts_d2), (0, 0));
    }

    #[test]
    fn balanced_proper_point_mean() {
        let cfg = SweepConfig {
            rate: 1e5,
            ..Default::default()
        };
        let n = 100;
        let mut sum = 0.0;
        for i in 0..n {
            let mut rng = point_stream(7, OracleKind::BalancedIdentity, i);
            let r = sample_counts(OracleKind::BalancedIdentity, 8.5, &cfg, &mut rng).unwrap();
            assert_eq!(r.counts_d2, 0);
            sum += r.counts_d1 as f64;
        }
        let mean = sum / n as f64;
        // σ of the sample mean = sqrt(1e5 / 100).
        assert!(
            (mean - 1e5).abs() <= 3.0 * (1e5f64 / n as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn streams_differ_by_kind_and_index() {
        let a: u64 = point_stream(3, OracleKind::ConstantZero, 0).random();
        let b: u64 = point_stream(3, OracleKind::ConstantZero, 1).random();
        let c: u64 = point_stream(3, OracleKind::ConstantOne, 0).random();
        let a2: u64 = point_stream(3, OracleKind::ConstantZero, 0).random();
        assert_eq!(a, a2);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast_ratio(0.0, 17.0).unwrap().eta, 1.0);
        assert_eq!(contrast_ratio(0.0, 17.0).unwrap().eta_std, 0.0);
        assert!((contrast_ratio(100.0, 50.0).unwrap().eta - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(contrast_ratio(0.0, 0.0), Err(LabError::UndefinedContrast));
        assert!(contrast_ratio(-1.0, 3.0).is_err());
    }

    #[test]
    fn contrast_std_matches_finite_difference() {
        // Independent check: propagate σ_i = sqrt(c_i) through numerical partials.
        let (c1, c2) = (400.0, 900.0);
        let eta = |a: f64, b: f64| (a - b).abs() / (a + b);
        let h = 1e-4;
        let d1 = (eta(c1 + h, c2) - eta(c1 - h, c2)) / (2.0 * h);
        let d2 = (eta(c1, c2 + h) - eta(c1, c2 - h)) / (2.0 * h);
        let fd = ((d1 * d1) * c1 + (d2 * d2) * c2).sqrt();
        let got = contrast_ratio(c1, c2).unwrap().eta_std;
        assert!((got - fd).abs() < 1e-9, "{got} vs {fd}");
    }

    #[test]
    fn count_classifier() {
        assert_eq!(classify_counts(150_000, 0, 3.0), FunctionClass::Balanced);
        assert_eq!(classify_counts(30, 149_970, 3.0), FunctionClass::Constant);
        assert_eq!(
            classify_counts(1000, 1010, 3.0),
            FunctionClass::Indeterminate
        );
        assert_eq!(classify_counts(0, 0, 3.0), FunctionClass::Indeterminate);
    }

    #[test]
    fn fit_recovers_exact_model() {
        let cfg = SweepConfig::default();
        let rec = expected_sweep(OracleKind::BalancedIdentity, &cfg).unwrap();
        let fit = fit_expected_visibility(&rec, &cfg).unwrap();
        assert!(!fit.flat);
        assert!((fit.visibility - 1.0).abs() < 1e-6);
        assert!((fit.amplitude - 75_000.0).abs() < 1e-6);
    }

    #[test]
    fn fit_with_drift_and_offset() {
        let cfg = SweepConfig {
            visibility: 0.9,
            drift_per_volt: 0.005,
            phase_offset: 0.4,
            ..Default::default()
        };
        let rec = expected_sweep(OracleKind::BalancedInverse, &cfg).unwrap();
        let fit = fit_expected_visibility(&rec, &cfg).unwrap();
        assert!((fit.visibility - 0.9).abs() < 1e-9);
        for r in &rec {
            let model = fit.eval(r.phase, cfg.coupling(r.voltage));
            assert!((model - r.mean_d1).abs() < 1e-6);
        }
    }

    #[test]
    fn fit_noisy_visibility() {
        let cfg = SweepConfig {
            visibility: 0.96,
            seed: 42,
            ..Default::default()
        };
        let rec = simulate_sweep(OracleKind::BalancedIdentity, &cfg).unwrap();
        let fit = fit_visibility(&rec, &cfg).unwrap();
        assert!(
            (0.95..=0.97).contains(&fit.visibility),
            "{}",
            fit.visibility
        );
    }

    #[test]
    fn constant_records_are_flat() {
        let cfg = SweepConfig::default();
        for kind in [OracleKind::ConstantZero, OracleKind::ConstantOne] {
            let rec = simulate_sweep(kind, &cfg).unwrap();
            assert!(fit_visibility(&rec, &cfg).unwrap().flat);
        }
        let cfg = SweepConfig {
            extinction: 2e-4,
            drift_per_volt: 0.005,
            ..Default::default()
        };
        let rec = simulate_sweep(OracleKind::ConstantOne, &cfg).unwrap();
        let fit = fit_visibility(&rec, &cfg).unwrap();
        assert!(fit.flat && fit.visibility == 0.0);
    }

    #[test]
    fn fit_preconditions() {
        let cfg = SweepConfig::default();
        let rec = simulate_sweep(OracleKind::BalancedIdentity, &cfg).unwrap();
        assert!(matches!(
            fit_visibility(&rec[..5], &cfg),
            Err(LabError::TooFewPoints { got: 5, .. })
        ));
        assert!(matches!(
            fit_visibility(&rec[..12], &cfg),
            Err(LabError::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn drift_lowers_constant_counts() {
        let cfg = SweepConfig {
            drift_per_volt: 0.005,
            ..Default::default()
        };
        let rec = simulate_sweep(OracleKind::ConstantOne, &cfg).unwrap();
        let first = rec.first().unwrap().counts_d2 as f64;
        let last = rec.last().unwrap().counts_d2 as f64;
        // Expected drop 150000 * 0.005 * 34 = 25500 counts.
        assert!((first - last - 25_500.0).abs() < 5.0 * (2.0 * 150_000f64).sqrt());
        assert!(rec.iter().all(|r| r.counts_d1 == 0));
    }

    #[test]
    fn background_scales_means() {
        let cfg = SweepConfig {
            background_prob: TWO_PHOTON_PROB,
            ..Default::default()
        };
        let (m1, m2) = expected_counts(OracleKind::ConstantZero, 3.0, &cfg).unwrap();
        assert!(m1.abs() < 1e-9);
        assert!((m2 - 150_000.0 * (1.0 + 2.5e-4)).abs() < 1e-9);
    }

    #[test]
    fn solve3_singular() {
        assert!(solve3([[0.0; 3]; 3], [1.0; 3]).is_none());
        let x = solve3(
            [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [1.0, 0.0, 1.0]],
            [2.0, 8.0, 4.0],
        )
        .unwrap();
        assert_eq!(x, [1.0, 2.0, 3.0]);
    }
}
