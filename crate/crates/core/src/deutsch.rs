//! Deutsch's algorithm on the optical model.
//!
//! The bench prepares `(|V⟩+|H⟩)(|l⟩+e^{iφ}|r⟩)/2`, applies the oracle in the
//! Sagnac loop, applies a polarization Hadamard (HWP₃ at 22.5°) and reads the
//! polarization only: `H` clicks D₁, `V` clicks D₂. At φ = (2N+1)π a single
//! photon decides the class (constant → D₂, balanced → D₁); at φ = 2Nπ both
//! classes give the same distribution.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optics::{
    beam_splitter_unitary, config_for, hwp_unitary, oracle_unitary, phase_shifter_unitary,
    sagnac_unitary, OpticsError, OracleKind, SagnacConfig, WavePlateAngle,
};
use crate::qcore::{pol_marginal, PolProbs, QError, StateVector, Unitary4, C64};

/// Tolerance used by [`classify`] when none is given.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeutschError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Algebra(#[from] QError),
    #[error("sagnac configuration ({cfg}) realizes {realized}, not the requested {requested}")]
    ConfigMismatch {
        cfg: SagnacConfig,
        requested: OracleKind,
        realized: &'static str,
    },
    #[error("classification tolerance must lie in (0, 0.5), got {0}")]
    BadTolerance(f64),
}

/// How the input state is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepMode {
    /// Closed-form amplitudes.
    Direct,
    /// `|V,l⟩` pushed through BS, phase shifter and HWP₂ at 22.5°.
    Composed,
}

/// Where the oracle matrix comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSource {
    /// Truth-table permutation.
    IdealOracle,
    /// Modeled Sagnac loop with the given setting.
    Sagnac(SagnacConfig),
}

impl fmt::Display for GateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSource::IdealOracle => f.write_str("ideal"),
            GateSource::Sagnac(cfg) => write!(f, "sagnac({cfg})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionClass {
    Constant,
    Balanced,
    Indeterminate,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionClass::Constant => "Constant",
            FunctionClass::Balanced => "Balanced",
            FunctionClass::Indeterminate => "Indeterminate",
        })
    }
}

impl FunctionClass {
    pub fn of(kind: OracleKind) -> Self {
        if kind.is_constant() {
            FunctionClass::Constant
        } else {
            FunctionClass::Balanced
        }
    }
}

/// An oracle that counts how often it is consulted.
#[derive(Debug)]
pub struct CountingOracle {
    kind: OracleKind,
    matrix: Unitary4,
    queries: AtomicUsize,
}

impl CountingOracle {
    pub fn new(kind: OracleKind, source: GateSource) -> Result<Self, DeutschError> {
        let matrix = match source {
            GateSource::IdealOracle => oracle_unitary(kind),
            GateSource::Sagnac(cfg) => {
                let m = sagnac_unitary(cfg);
                if m != oracle_unitary(kind) {
                    let realized = OracleKind::ALL
                        .into_iter()
                        .find(|&k| oracle_unitary(k) == m)
                        .map_or("an unknown gate", |k| k.gate_name());
                    return Err(DeutschError::ConfigMismatch {
                        cfg,
                        requested: kind,
                        realized,
                    });
                }
                m
            }
        };
        Ok(Self {
            kind,
            matrix,
            queries: AtomicUsize::new(0),
        })
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    /// One quantum query: apply `U_f` to a state.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.matrix.apply(s)
    }

    /// One classical query: evaluate `f(x)`.
    pub fn evaluate(&self, x: u8) -> u8 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.kind.eval(x)
    }

    pub fn queries(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeutschOutcome {
    #[serde(skip)]
    pub output_state: StateVector,
    /// `p_h` is the D₁ click probability, `p_v` the D₂ click probability.
    pub probs: PolProbs,
    pub phi: f64,
    /// Number of times the oracle was applied.
    pub oracle_queries: usize,
}

fn check_phase(phi: f64) -> Result<(), DeutschError> {
    if phi.is_finite() {
        Ok(())
    } else {
        Err(OpticsError::NonFinite {
            what: "phase",
            value: phi,
        }
        .into())
    }
}

/// Input state `(|V⟩+|H⟩)(|l⟩+e^{iφ}|r⟩)/2`.
pub fn prepare_input(phi: f64, mode: PrepMode) -> Result<StateVector, DeutschError> {
    check_phase(phi)?;
    match mode {
        PrepMode::Direct => {
            let one = C64::new(0.5, 0.0);
            let e = C64::from_polar(0.5, phi);
            Ok(StateVector::new([one, e, one, e])?)
        }
        PrepMode::Composed => {
            let chain = [
                beam_splitter_unitary(),
                phase_shifter_unitary(phi)?,
                hwp_unitary(WavePlateAngle::HADAMARD),
            ];
            Ok(chain.iter().fold(StateVector::basis(0), |s, u| u.apply(&s)))
        }
    }
}

/// Runs the circuit on a caller-supplied oracle, so query counts are observable.
pub fn run_with_oracle(oracle: &CountingOracle, phi: f64) -> Result<DeutschOutcome, DeutschError> {
    let before = oracle.queries();
    let input = prepare_input(phi, PrepMode::Direct)?;
    let after_oracle = oracle.apply(&input);
    let output_state = hwp_unitary(WavePlateAngle::HADAMARD).apply(&after_oracle);
    let probs = pol_marginal(&output_state)?;
    Ok(DeutschOutcome {
        output_state,
        probs,
        phi,
        oracle_queries: oracle.queries() - before,
    })
}

pub fn run_deutsch(
    kind: OracleKind,
    phi: f64,
    source: GateSource,
) -> Result<DeutschOutcome, DeutschError> {
    let oracle = CountingOracle::new(kind, source)?;
    run_with_oracle(&oracle, phi)
}

/// Convenience: run through the Sagnac setting that realizes `kind`.
pub fn run_on_bench(kind: OracleKind, phi: f64) -> Result<DeutschOutcome, DeutschError> {
    run_deutsch(kind, phi, GateSource::Sagnac(config_for(kind)))
}

pub fn classify_probs(probs: &PolProbs, tol: f64) -> Result<FunctionClass, DeutschError> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(DeutschError::BadTolerance(tol));
    }
    Ok(if probs.p_v >= 1.0 - tol {
        FunctionClass::Constant
    } else if probs.p_h >= 1.0 - tol {
        FunctionClass::Balanced
    } else {
        FunctionClass::Indeterminate
    })
}

/// Whether a single detection at input phase `phi` separates the classes:
/// the balanced D₁ probability `(1−cosφ)/2` must reach `1−tol`.
pub fn phase_discriminates(phi: f64, tol: f64) -> bool {
    (1.0 + phi.cos()) / 2.0 <= tol
}

/// Classifies a run. Away from φ = (2N+1)π the two classes overlap, so the
/// result is [`FunctionClass::Indeterminate`] whatever the photon did.
pub fn classify(outcome: &DeutschOutcome, tol: f64) -> Result<FunctionClass, DeutschError> {
    let by_probs = classify_probs(&outcome.probs, tol)?;
    Ok(if phase_discriminates(outcome.phi, tol) {
        by_probs
    } else {
        FunctionClass::Indeterminate
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassicalResult {
    pub class: FunctionClass,
    pub queries: usize,
}

/// Classical baseline: query `f(0)` and `f(1)` and compare.
pub fn classical_with_oracle(oracle: &CountingOracle) -> ClassicalResult {
    let before = oracle.queries();
    let f0 = oracle.evaluate(0);
    let f1 = oracle.evaluate(1);
    let class = if f0 == f1 {
        FunctionClass::Constant
    } else {
        FunctionClass::Balanced
    };
    ClassicalResult {
        class,
        queries: oracle.queries() - before,
    }
}

pub fn classical_evaluations(kind: OracleKind) -> ClassicalResult {
    let oracle =
        CountingOracle::new(kind, GateSource::IdealOracle).expect("ideal oracle always constructs");
    classical_with_oracle(&oracle)
}
