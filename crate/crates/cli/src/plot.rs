//! Self-contained SVG of a sweep (D₁ squares, D₂ triangles, fitted curves,
//! dashed markers at the proper phase points) plus a text sidecar.

use std::f64::consts::PI;
use std::fmt::Write as _;

use deutsch_optics::labsim::{fit_fringe, FringeFit};
use deutsch_optics::DetectionRecord;

use crate::csvio::sig_digits;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const CURVE_SAMPLES: usize = 240;

pub struct PlotData {
    pub records: Vec<DetectionRecord>,
    pub fit_d1: Option<FringeFit>,
    pub fit_d2: Option<FringeFit>,
    /// Linear phase calibration φ = intercept + slope·v recovered from the CSV.
    pub calibration: Option<(f64, f64)>,
    pub markers: Vec<f64>,
    pub drift_per_volt: f64,
}

fn gain(drift: f64, v: f64) -> f64 {
    (1.0 - drift * v).max(0.0)
}

/// Least-squares line through (voltage, phase).
fn phase_calibration(records: &[DetectionRecord]) -> Option<(f64, f64)> {
    let n = records.len() as f64;
    let mv = records.iter().map(|r| r.voltage).sum::<f64>() / n;
    let mp = records.iter().map(|r| r.phase).sum::<f64>() / n;
    let sxx: f64 = records.iter().map(|r| (r.voltage - mv).powi(2)).sum();
    if records.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = records
        .iter()
        .map(|r| (r.voltage - mv) * (r.phase - mp))
        .sum();
    let slope = sxy / sxx;
    (slope != 0.0).then_some((mp - slope * mv, slope))
}

impl PlotData {
    pub fn new(records: Vec<DetectionRecord>, drift_per_volt: f64) -> Self {
        let samples = |pick: fn(&DetectionRecord) -> u64| -> Vec<(f64, f64, f64)> {
            records
                .iter()
                .map(|r| (r.phase, gain(drift_per_volt, r.voltage), pick(r) as f64))
                .collect()
        };
        let fit_d1 = fit_fringe(&samples(|r| r.counts_d1)).ok();
        let fit_d2 = fit_fringe(&samples(|r| r.counts_d2)).ok();
        let calibration = phase_calibration(&records);
        let markers = match calibration {
            Some((intercept, slope)) => {
                let (vlo, vhi) = voltage_range(&records);
                let (p1, p2) = (intercept + slope * vlo, intercept + slope * vhi);
                let (plo, phi) = (p1.min(p2), p1.max(p2));
                let first = (plo / PI).ceil() as i64;
                let last = (phi / PI).floor() as i64;
                let mut v: Vec<f64> = (first..=last)
                    .filter(|m| m.rem_euclid(2) == 1)
                    .map(|m| (m as f64 * PI - intercept) / slope)
                    .collect();
                v.sort_by(f64::total_cmp);
                v
            }
            None => Vec::new(),
        };
        Self {
            records,
            fit_d1,
            fit_d2,
            calibration,
            markers,
            drift_per_volt,
        }
    }

    fn curve(&self, fit: &FringeFit, v: f64) -> Option<f64> {
        let (intercept, slope) = self.calibration?;
        Some(fit.eval(intercept + slope * v, gain(self.drift_per_volt, v)))
    }

    pub fn sidecar(&self) -> String {
        let mut s = String::new();
        let fmt_fit = |f: &Option<FringeFit>| match f {
            Some(f) if f.flat => format!("flat (level {})", sig_digits(f.amplitude, 9)),
            Some(f) => format!(
                "visibility {} amplitude {} phase_shift {}",
                sig_digits(f.visibility, 9),
                sig_digits(f.amplitude, 9),
                sig_digits(f.phase_shift, 9)
            ),
            None => "unavailable".into(),
        };
        writeln!(s, "# fit D1: {}", fmt_fit(&self.fit_d1)).unwrap();
        writeln!(s, "# fit D2: {}", fmt_fit(&self.fit_d2)).unwrap();
        let markers: Vec<String> = self.markers.iter().map(|v| sig_digits(*v, 9)).collect();
        writeln!(s, "# proper phase voltages: {}", markers.join(" ")).unwrap();
        writeln!(
            s,
            "voltage_V\tphase_rad\tcounts_d1\tcounts_d2\tfit_d1\tfit_d2"
        )
        .unwrap();
        for r in &self.records {
            let fit = |f: &Option<FringeFit>| {
                f.as_ref()
                    .and_then(|f| self.curve(f, r.voltage))
                    .map_or("-".into(), |y| sig_digits(y, 9))
            };
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.voltage,
                sig_digits(r.phase, 9),
                r.counts_d1,
                r.counts_d2,
                fit(&self.fit_d1),
                fit(&self.fit_d2)
            )
            .unwrap();
        }
        s
    }

    pub fn svg(&self) -> String {
        let (vlo, vhi) = voltage_range(&self.records);
        let vspan = if vhi > vlo { vhi - vlo } else { 1.0 };
        let ymax_data = self
            .records
            .iter()
            .map(|r| r.counts_d1.max(r.counts_d2) as f64)
            .fold(0.0, f64::max);
        let ymax = nice_ceiling(ymax_data * 1.05);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let x = |v: f64| LEFT + (v - vlo) / vspan * pw;
        let y = |c: f64| TOP + ph - (c / ymax).clamp(0.0, 1.05) * ph;

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

        // Axes and ticks.
        writeln!(
            s,
            r#"<path d="M{LEFT} {TOP} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
            TOP + ph,
            LEFT + pw
        )
        .unwrap();
        for i in 0..=5 {
            let c = ymax * i as f64 / 5.0;
            let yy = y(c);
            writeln!(
                s,
                r#"<line x1="{:.2}" y1="{yy:.2}" x2="{LEFT}" y2="{yy:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                yy + 4.0,
                c.round()
            )
            .unwrap();
        }
        let vt = tick_step(vspan);
        let mut v = (vlo / vt).ceil() * vt;
        while v <= vhi + 1e-9 {
            let xx = x(v);
            writeln!(
                s,
                r#"<line x1="{xx:.2}" y1="{:.2}" x2="{xx:.2}" y2="{:.2}" stroke="black"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 20.0,
                sig_digits(v, 6).trim_end_matches('0').trim_end_matches('.')
            )
            .unwrap();
            v += vt;
        }
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">PZT voltage (V)</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 15.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">photon counts</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0
        )
        .unwrap();

        // Proper phase markers.
        for &m in &self.markers {
            let xx = x(m);
            writeln!(
                s,
                r#"<line class="marker" x1="{xx:.2}" y1="{TOP}" x2="{xx:.2}" y2="{:.2}" stroke="green" stroke-dasharray="6 4"/>"#,
                TOP + ph
            )
            .unwrap();
        }

        // Fitted curves.
        for (fit, color, id) in [
            (&self.fit_d1, "black", "fit-d1"),
            (&self.fit_d2, "red", "fit-d2"),
        ] {
            let Some(fit) = fit else { continue };
            let pts: Vec<String> = (0..=CURVE_SAMPLES)
                .filter_map(|i| {
                    let v = vlo + vspan * i as f64 / CURVE_SAMPLES as f64;
                    self.curve(fit, v)
                        .map(|c| format!("{:.2},{:.2}", x(v), y(c)))
                })
                .collect();
            if !pts.is_empty() {
                writeln!(
                    s,
                    r#"<polyline id="{id}" points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                    pts.join(" ")
                )
                .unwrap();
            }
        }

        // Data points.
        writeln!(s, r#"<g id="d1" fill="black">"#).unwrap();
        for r in &self.records {
            let (xx, yy) = (x(r.voltage), y(r.counts_d1 as f64));
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="6" height="6"/>"#,
                xx - 3.0,
                yy - 3.0
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
        writeln!(s, r#"<g id="d2" fill="red">"#).unwrap();
        for r in &self.records {
            let (xx, yy) = (x(r.voltage), y(r.counts_d2 as f64));
            writeln!(
                s,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
                xx,
                yy - 4.0,
                xx - 4.0,
                yy + 3.0,
                xx + 4.0,
                yy + 3.0
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();

        // Legend.
        let lx = LEFT + pw - 130.0;
        writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="6" height="6" fill="black"/><text x="{:.2}" y="{:.2}">D1 (H)</text>"#,
            TOP + 6.0,
            lx + 12.0,
            TOP + 12.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="red"/><text x="{:.2}" y="{:.2}">D2 (V)</text>"#,
            lx + 3.0,
            TOP + 21.0,
            lx - 1.0,
            TOP + 28.0,
            lx + 7.0,
            TOP + 28.0,
            lx + 12.0,
            TOP + 29.0
        )
        .unwrap();
        writeln!(s, "</svg>").unwrap();
        s
    }
}

fn voltage_range(records: &[DetectionRecord]) -> (f64, f64) {
    records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.voltage), hi.max(r.voltage))
        })
}

fn nice_ceiling(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&c| c >= x)
        .unwrap_or(10.0 * mag)
}

fn tick_step(span: f64) -> f64 {
    nice_ceiling(span / 8.0)
}
