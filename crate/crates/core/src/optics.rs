//! Optical elements of the bench as [`Unitary4`] operators, and the four
//! oracle gates built from the Sagnac loop.
//!
//! Inside the loop the PBS sends `H` photons counterclockwise and `V`
//! photons clockwise. A dove prism inclined at ±45° rotates the transverse
//! mode by ±90° for counterclockwise travel and by ∓90° for clockwise travel.
//! A +90° rotation maps `l → d`, `r → u` (spatial flip); a −90° rotation maps
//! `l → u`, `r → d` (no flip). With PBS₁ removed every photon goes
//! counterclockwise regardless of polarization.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{tensor_lift, Mat2, Unitary4, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("dove prism angle must be +45 or -45 degrees, got {0}")]
    BadDoveAngle(f64),
}

/// Fast-axis angle of a half-wave plate, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlateAngle(f64);

impl WavePlateAngle {
    pub const HADAMARD: WavePlateAngle = WavePlateAngle(22.5);

    pub fn new(degrees: f64) -> Result<Self, OpticsError> {
        if !degrees.is_finite() {
            return Err(OpticsError::NonFinite {
                what: "wave-plate angle",
                value: degrees,
            });
        }
        Ok(Self(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }
}

/// Dove-prism inclination. Only the two bench settings exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DoveAngle {
    Plus45,
    Minus45,
}

impl DoveAngle {
    pub fn from_degrees(deg: f64) -> Result<Self, OpticsError> {
        if deg == 45.0 {
            Ok(DoveAngle::Plus45)
        } else if deg == -45.0 {
            Ok(DoveAngle::Minus45)
        } else {
            Err(OpticsError::BadDoveAngle(deg))
        }
    }

    pub fn degrees(self) -> f64 {
        match self {
            DoveAngle::Plus45 => 45.0,
            DoveAngle::Minus45 => -45.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            DoveAngle::Plus45 => DoveAngle::Minus45,
            DoveAngle::Minus45 => DoveAngle::Plus45,
        }
    }

    fn sign(self) -> i32 {
        match self {
            DoveAngle::Plus45 => 1,
            DoveAngle::Minus45 => -1,
        }
    }
}

impl fmt::Display for DoveAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DoveAngle::Plus45 => f.write_str("+45"),
            DoveAngle::Minus45 => f.write_str("-45"),
        }
    }
}

/// Sagnac-loop configuration: PBS₁ inserted or removed, and the dove-prism angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SagnacConfig {
    pub pbs_present: bool,
    pub dp: DoveAngle,
}

impl SagnacConfig {
    pub const fn new(pbs_present: bool, dp: DoveAngle) -> Self {
        Self { pbs_present, dp }
    }

    pub const ALL: [SagnacConfig; 4] = [
        SagnacConfig::new(false, DoveAngle::Minus45),
        SagnacConfig::new(false, DoveAngle::Plus45),
        SagnacConfig::new(true, DoveAngle::Plus45),
        SagnacConfig::new(true, DoveAngle::Minus45),
    ];
}

impl fmt::Display for SagnacConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pbs = if self.pbs_present { "on" } else { "off" };
        write!(f, "pbs={pbs} dp={}", self.dp)
    }
}

/// The four one-bit functions `f` and their oracles `|x,y⟩ → |x, y⊕f(x)⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleKind {
    /// f(x) = 0, oracle I.
    ConstantZero,
    /// f(x) = 1, oracle NOT on the target.
    ConstantOne,
    /// f(x) = x, oracle CNOT.
    BalancedIdentity,
    /// f(x) = inv(x), oracle zero-controlled NOT.
    BalancedInverse,
}

impl OracleKind {
    pub const ALL: [OracleKind; 4] = [
        OracleKind::ConstantZero,
        OracleKind::ConstantOne,
        OracleKind::BalancedIdentity,
        OracleKind::BalancedInverse,
    ];

    /// Truth table of `f`.
    pub fn eval(self, x: u8) -> u8 {
        let x = x & 1;
        match self {
            OracleKind::ConstantZero => 0,
            OracleKind::ConstantOne => 1,
            OracleKind::BalancedIdentity => x,
            OracleKind::BalancedInverse => x ^ 1,
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, OracleKind::ConstantZero | OracleKind::ConstantOne)
    }

    pub fn is_balanced(self) -> bool {
        !self.is_constant()
    }

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            OracleKind::ConstantZero => "const0",
            OracleKind::ConstantOne => "const1",
            OracleKind::BalancedIdentity => "id",
            OracleKind::BalancedInverse => "inv",
        }
    }

    pub fn gate_name(self) -> &'static str {
        match self {
            OracleKind::ConstantZero => "I",
            OracleKind::ConstantOne => "NOT",
            OracleKind::BalancedIdentity => "CNOT",
            OracleKind::BalancedInverse => "Z-CNOT",
        }
    }

    /// Stable small integer, used to derive per-oracle random streams.
    pub fn index(self) -> u64 {
        match self {
            OracleKind::ConstantZero => 0,
            OracleKind::ConstantOne => 1,
            OracleKind::BalancedIdentity => 2,
            OracleKind::BalancedInverse => 3,
        }
    }

    pub fn from_short_name(name: &str) -> Option<Self> {
        OracleKind::ALL.into_iter().find(|k| k.short_name() == name)
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Jones matrix of a half-wave plate, `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
pub fn hwp_jones(theta: WavePlateAngle) -> Mat2 {
    let two_theta = 2.0 * theta.degrees().to_radians();
    let (s, c) = two_theta.sin_cos();
    [
        [C64::new(c, 0.0), C64::new(s, 0.0)],
        [C64::new(s, 0.0), C64::new(-c, 0.0)],
    ]
}

pub fn hwp_unitary(theta: WavePlateAngle) -> Unitary4 {
    tensor_lift(Some(&hwp_jones(theta)), None).expect("half-wave plate is unitary")
}

/// Relative phase `e^{iφ}` on the `r` path (PZT-driven mirror).
pub fn phase_shifter_unitary(phi: f64) -> Result<Unitary4, OpticsError> {
    if !phi.is_finite() {
        return Err(OpticsError::NonFinite {
            what: "phase",
            value: phi,
        });
    }
    let spat: Mat2 = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::from_polar(1.0, phi)],
    ];
    Ok(tensor_lift(None, Some(&spat)).expect("phase shifter is unitary"))
}

/// 50/50 beam splitter plus mirror, `l → (l + r)/√2`.
pub fn beam_splitter_unitary() -> Unitary4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let spat: Mat2 = [
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(-h, 0.0)],
    ];
    tensor_lift(None, Some(&spat)).expect("beam splitter is unitary")
}

/// Net input→output map of the Sagnac loop.
pub fn sagnac_unitary(cfg: SagnacConfig) -> Unitary4 {
    let mut dest = [0usize; 4];
    for pol in 0..2usize {
        // +1 counterclockwise, -1 clockwise.
        let travel = if cfg.pbs_present && pol == 0 { -1 } else { 1 };
        let rotation = cfg.dp.sign() * travel;
        for spatial in 0..2usize {
            let out = if rotation > 0 { spatial ^ 1 } else { spatial };
            dest[2 * pol + spatial] = 2 * pol + out;
        }
    }
    Unitary4::from_permutation(dest)
}

/// Oracle matrix straight from the truth table: `|x,y⟩ → |x, y⊕f(x)⟩`.
pub fn oracle_unitary(kind: OracleKind) -> Unitary4 {
    let mut dest = [0usize; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let src = 2 * x as usize + y as usize;
            dest[src] = 2 * x as usize + (y ^ kind.eval(x)) as usize;
        }
    }
    Unitary4::from_permutation(dest)
}

/// Bench setting that realizes each oracle.
pub fn config_for(kind: OracleKind) -> SagnacConfig {
    match kind {
        OracleKind::ConstantZero => SagnacConfig::new(false, DoveAngle::Minus45),
        OracleKind::ConstantOne => SagnacConfig::new(false, DoveAngle::Plus45),
        OracleKind::BalancedIdentity => SagnacConfig::new(true, DoveAngle::Plus45),
        OracleKind::BalancedInverse => SagnacConfig::new(true, DoveAngle::Minus45),
    }
}

/// Inverse of [`config_for`].
pub fn kind_for(cfg: SagnacConfig) -> OracleKind {
    OracleKind::ALL
        .into_iter()
        .find(|&k| config_for(k) == cfg)
        .expect("config_for is a bijection")
}

/// Polarization flip `X ⊗ I` (HWP at 45°).
pub fn pol_flip_unitary() -> Unitary4 {
    hwp_unitary(WavePlateAngle(45.0))
}
