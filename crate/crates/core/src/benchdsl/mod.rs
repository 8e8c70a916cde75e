//! A line-oriented description language for serial optical benches.
//!
//! ```text
//! # CNOT oracle bench
//! polarizer V
//! bs
//! phase mode=r value=PHI
//! hwp angle=22.5
//! sagnac pbs=on dp=+45
//! hwp angle=22.5
//! measure pol
//! ```
//!
//! `#` starts a comment. The first directive must be the `polarizer` source
//! and the last must be `measure pol`. Angles are in degrees, phases in
//! radians or a symbol bound at compile time.

mod compile;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::optics::SagnacConfig;
use crate::qcore::Pol;

pub use compile::{compile, CompileError, CompiledBench, CompiledStep};
pub use parser::{parse, parse_bytes};

/// 1-based source position of a directive or argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub(crate) fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub(crate) fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
            severity: Severity::Warning,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Phase argument: a literal in radians or a symbol bound at compile time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PhaseValue {
    Radians(f64),
    Symbol(String),
}

impl fmt::Display for PhaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseValue::Radians(v) => write!(f, "{v}"),
            PhaseValue::Symbol(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Element {
    /// Source preparation: photon in the given polarization on path `l`.
    Polarizer(Pol),
    /// Half-wave plate, fast axis in degrees.
    Hwp {
        angle_deg: f64,
    },
    /// 50/50 beam splitter plus mirror.
    BeamSplitter,
    /// Relative phase on path `r`.
    Phase {
        value: PhaseValue,
    },
    Sagnac(SagnacConfig),
    /// Polarization readout.
    Measure,
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Polarizer(Pol::V) => f.write_str("polarizer V"),
            Element::Polarizer(Pol::H) => f.write_str("polarizer H"),
            Element::Hwp { angle_deg } => write!(f, "hwp angle={angle_deg}"),
            Element::BeamSplitter => f.write_str("bs"),
            Element::Phase { value } => write!(f, "phase mode=r value={value}"),
            Element::Sagnac(cfg) => write!(f, "sagnac {cfg}"),
            Element::Measure => f.write_str("measure pol"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementNode {
    pub element: Element,
    pub span: Span,
}

/// A parsed bench: source, optical pipeline, and measurement, in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchProgram {
    pub elements: Vec<ElementNode>,
    /// Symbols referenced by phase elements.
    pub symbols: BTreeSet<String>,
    /// Non-fatal diagnostics from parsing.
    pub warnings: Vec<ParseDiagnostic>,
}

impl BenchProgram {
    /// Equality of element sequence and symbols, ignoring spans and warnings.
    pub fn same_structure(&self, other: &BenchProgram) -> bool {
        self.symbols == other.symbols
            && self.elements.len() == other.elements.len()
            && self
                .elements
                .iter()
                .zip(&other.elements)
                .all(|(a, b)| a.element == b.element)
    }

    pub fn sagnac_configs(&self) -> Vec<SagnacConfig> {
        self.elements
            .iter()
            .filter_map(|n| match n.element {
                Element::Sagnac(cfg) => Some(cfg),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for BenchProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for node in &self.elements {
            writeln!(f, "{}", node.element)?;
        }
        Ok(())
    }
}

/// Text of the Deutsch bench with the given Sagnac setting and phase symbol `PHI`.
pub fn deutsch_bench_text(cfg: SagnacConfig) -> String {
    format!(
        "polarizer V\nbs\nphase mode=r value=PHI\nhwp angle=22.5\nsagnac {cfg}\nhwp angle=22.5\nmeasure pol\n"
    )
}
