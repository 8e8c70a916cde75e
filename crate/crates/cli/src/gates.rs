//! Self-check of the gate algebra.

use deutsch_optics::optics::{
    config_for, hwp_unitary, oracle_unitary, phase_shifter_unitary, pol_flip_unitary,
    sagnac_unitary, OracleKind, SagnacConfig, WavePlateAngle,
};
use deutsch_optics::qcore::{tensor_lift, Unitary4, C64};

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Runs every gate identity. `wrong_dp` flips the dove-prism sign in the
/// configuration table (negative control).
pub fn verify(wrong_dp: bool) -> Vec<Check> {
    let config = |k: OracleKind| {
        let cfg = config_for(k);
        if wrong_dp {
            SagnacConfig::new(cfg.pbs_present, cfg.dp.flipped())
        } else {
            cfg
        }
    };
    let mut out = Vec::new();

    for k in OracleKind::ALL {
        let cfg = config(k);
        let s = sagnac_unitary(cfg);
        let o = oracle_unitary(k);
        let detail = match (s.permutation(), o.permutation()) {
            (Some(a), Some(b)) if a != b => format!("sagnac({cfg}) maps {a:?}, oracle maps {b:?}"),
            _ => String::new(),
        };
        out.push(check(
            format!(
                "oracle {} = sagnac({cfg}) [{}]",
                k.gate_name(),
                k.short_name()
            ),
            s == o,
            detail,
        ));
    }
    for k in OracleKind::ALL {
        let s = sagnac_unitary(config(k));
        out.push(check(
            format!("{} is a permutation involution", k.gate_name()),
            s.is_permutation() && s * s == Unitary4::identity(),
            "",
        ));
    }

    let x = pol_flip_unitary();
    let conj = x * sagnac_unitary(config(OracleKind::BalancedIdentity)) * x;
    let d = conj.max_abs_diff(&sagnac_unitary(config(OracleKind::BalancedInverse)));
    out.push(check(
        "Z-CNOT = (X⊗I)·CNOT·(X⊗I)",
        d <= 1e-12,
        format!("max deviation {d:.3e}"),
    ));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = tensor_lift(
        Some(&[
            [C64::new(h, 0.0), C64::new(h, 0.0)],
            [C64::new(h, 0.0), C64::new(-h, 0.0)],
        ]),
        None,
    )
    .expect("Hadamard is unitary");
    let d = hwp_unitary(WavePlateAngle::HADAMARD).max_abs_diff(&hadamard);
    out.push(check(
        "HWP(22.5°) = Hadamard⊗I",
        d <= 1e-12,
        format!("max deviation {d:.3e}"),
    ));

    let worst = (0..36)
        .map(|i| {
            let u = hwp_unitary(WavePlateAngle::new(i as f64 * 5.0).expect("finite"));
            (u * u).max_abs_diff(&Unitary4::identity())
        })
        .fold(0.0, f64::max);
    out.push(check(
        "HWP(θ)² = I for θ = 0°, 5°, …, 175°",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    let worst = (0..16)
        .map(|i| {
            let (a, b) = (0.37 * i as f64, -1.1 + 0.5 * i as f64);
            let lhs = phase_shifter_unitary(a).expect("finite")
                * phase_shifter_unitary(b).expect("finite");
            lhs.max_abs_diff(&phase_shifter_unitary(a + b).expect("finite"))
        })
        .fold(0.0, f64::max);
    out.push(check(
        "phase(a)·phase(b) = phase(a+b)",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    ));
    out
}
