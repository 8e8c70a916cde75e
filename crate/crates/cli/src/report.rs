use std::fmt;

use deutsch_optics::deutsch::{
    classical_evaluations, classify_probs, phase_discriminates, FunctionClass,
};
use deutsch_optics::qcore::PolProbs;
use deutsch_optics::OracleKind;
use serde::Serialize;

/// Result of one algorithm run, printed by `run` and `bench run`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub oracle: Option<String>,
    pub gate: Option<String>,
    pub phase_rad: Option<String>,
    pub p_d1: String,
    pub p_d2: String,
    pub classification: FunctionClass,
    pub quantum_queries: usize,
    pub classical_queries: usize,
    pub classical_class: Option<FunctionClass>,
    pub source: String,
}

pub fn fixed12(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl RunReport {
    pub fn new(
        kind: Option<OracleKind>,
        phi: Option<f64>,
        probs: PolProbs,
        tol: f64,
        quantum_queries: usize,
        source: &str,
    ) -> Self {
        let classical = kind.map(classical_evaluations);
        Self {
            oracle: kind.map(|k| k.short_name().to_string()),
            gate: kind.map(|k| k.gate_name().to_string()),
            phase_rad: phi.map(fixed12),
            p_d1: fixed12(probs.d1()),
            p_d2: fixed12(probs.d2()),
            classification: match classify_probs(&probs, tol)
                .expect("tolerance validated by caller")
            {
                _ if phi.is_some_and(|p| !phase_discriminates(p, tol)) => {
                    FunctionClass::Indeterminate
                }
                c => c,
            },
            quantum_queries,
            classical_queries: classical.map_or(2, |c| c.queries),
            classical_class: classical.map(|c| c.class),
            source: source.to_string(),
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let na = || "n/a".to_string();
        writeln!(
            f,
            "oracle:         {} ({})",
            self.oracle.clone().unwrap_or_else(na),
            self.gate.clone().unwrap_or_else(na)
        )?;
        writeln!(
            f,
            "phase (rad):    {}",
            self.phase_rad.clone().unwrap_or_else(na)
        )?;
        writeln!(f, "gate source:    {}", self.source)?;
        writeln!(f, "P(D1) [H]:      {}", self.p_d1)?;
        writeln!(f, "P(D2) [V]:      {}", self.p_d2)?;
        writeln!(f, "classification: {}", self.classification)?;
        write!(
            f,
            "queries:        quantum={} classical={}",
            self.quantum_queries, self.classical_queries
        )?;
        if let Some(c) = self.classical_class {
            write!(f, " (classical answer: {c})")?;
        }
        writeln!(f)
    }
}
