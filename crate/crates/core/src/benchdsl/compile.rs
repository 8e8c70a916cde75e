use std::collections::BTreeMap;

use thiserror::Error;

use super::{BenchProgram, Element, PhaseValue};
use crate::optics::{
    beam_splitter_unitary, hwp_unitary, phase_shifter_unitary, sagnac_unitary, OpticsError,
    SagnacConfig, WavePlateAngle,
};
use crate::qcore::{pol_marginal, PolProbs, QError, Spatial, StateVector, Unitary4};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("line {line}: unbound symbol `{symbol}`")]
    Unbound { symbol: String, line: usize },
    #[error("line {line}: {source}")]
    Optics {
        line: usize,
        #[source]
        source: OpticsError,
    },
    #[error("bench has no source")]
    NoSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledStep {
    /// Pretty-printed directive the step came from.
    pub label: String,
    pub line: usize,
    pub unitary: Unitary4,
}

/// A bench lowered to an initial state and an ordered list of unitaries,
/// followed by a polarization measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledBench {
    pub initial: StateVector,
    pub steps: Vec<CompiledStep>,
    pub sagnac: Vec<SagnacConfig>,
}

impl CompiledBench {
    /// Product of all steps, last step leftmost.
    pub fn composed(&self) -> Unitary4 {
        self.steps
            .iter()
            .fold(Unitary4::identity(), |acc, s| s.unitary.after(&acc))
    }

    pub fn final_state(&self) -> StateVector {
        self.steps
            .iter()
            .fold(self.initial, |s, step| step.unitary.apply(&s))
    }

    pub fn run(&self) -> Result<PolProbs, QError> {
        pol_marginal(&self.final_state())
    }
}

pub fn compile(
    program: &BenchProgram,
    bindings: &BTreeMap<String, f64>,
) -> Result<CompiledBench, CompileError> {
    let mut initial = None;
    let mut steps = Vec::new();
    let mut sagnac = Vec::new();
    for node in &program.elements {
        let line = node.span.line;
        let optics = |source| CompileError::Optics { line, source };
        let unitary = match &node.element {
            Element::Polarizer(pol) => {
                initial = Some(StateVector::ket(*pol, Spatial::Near));
                continue;
            }
            Element::Measure => continue,
            Element::Hwp { angle_deg } => {
                hwp_unitary(WavePlateAngle::new(*angle_deg).map_err(optics)?)
            }
            Element::BeamSplitter => beam_splitter_unitary(),
            Element::Phase { value } => {
                let phi = match value {
                    PhaseValue::Radians(v) => *v,
                    PhaseValue::Symbol(s) => {
                        *bindings.get(s).ok_or_else(|| CompileError::Unbound {
                            symbol: s.clone(),
                            line,
                        })?
                    }
                };
                phase_shifter_unitary(phi).map_err(optics)?
            }
            Element::Sagnac(cfg) => {
                sagnac.push(*cfg);
                sagnac_unitary(*cfg)
            }
        };
        steps.push(CompiledStep {
            label: node.element.to_string(),
            line,
            unitary,
        });
    }
    Ok(CompiledBench {
        initial: initial.ok_or(CompileError::NoSource)?,
        steps,
        sagnac,
    })
}
