//! Sample-based axiom reports shared by the F-norm and orthogonality checkers.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AxiomStatus {
    Pass,
    Fail { counterexample: String },
    /// Existential axioms without a witness provider cannot be refuted or
    /// confirmed by sampling.
    NotCheckable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    /// Samples on which the axiom's hypothesis applied.
    pub checked: usize,
    /// Samples that exercised the axiom non-vacuously (e.g. `x ⊥ x` with `x ≠ 0`).
    pub nontrivial: usize,
    pub violations: usize,
    pub status: AxiomStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub subject: String,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn new(subject: impl Into<String>) -> Self {
        AxiomReport {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    /// True when no check failed. Not-checkable entries do not count as failures.
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, AxiomStatus::Fail { .. }))
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, AxiomStatus::Fail { .. }))
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.subject)?;
        for c in &self.checks {
            let status = match &c.status {
                AxiomStatus::Pass => "pass".to_string(),
                AxiomStatus::Fail { counterexample } => format!("FAIL  {counterexample}"),
                AxiomStatus::NotCheckable { reason } => format!("not checkable ({reason})"),
            };
            writeln!(
                f,
                "  {:<28} checked={:<6} nontrivial={:<6} {}",
                c.axiom, c.checked, c.nontrivial, status
            )?;
        }
        Ok(())
    }
}

/// Incrementally builds one [`AxiomCheck`], keeping the first counterexample.
#[derive(Debug)]
pub(crate) struct CheckBuilder {
    axiom: String,
    checked: usize,
    nontrivial: usize,
    violations: usize,
    first: Option<String>,
}

impl CheckBuilder {
    pub(crate) fn new(axiom: &str) -> Self {
        CheckBuilder {
            axiom: axiom.to_string(),
            checked: 0,
            nontrivial: 0,
            violations: 0,
            first: None,
        }
    }

    pub(crate) fn record(&mut self, ok: bool, nontrivial: bool, counterexample: impl FnOnce() -> String) {
        self.checked += 1;
        if nontrivial {
            self.nontrivial += 1;
        }
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(counterexample());
            }
        }
    }

    pub(crate) fn finish(self) -> AxiomCheck {
        let status = match self.first {
            Some(counterexample) => AxiomStatus::Fail { counterexample },
            None => AxiomStatus::Pass,
        };
        AxiomCheck {
            axiom: self.axiom,
            checked: self.checked,
            nontrivial: self.nontrivial,
            violations: self.violations,
            status,
        }
    }

    pub(crate) fn not_checkable(axiom: &str, reason: &str) -> AxiomCheck {
        AxiomCheck {
            axiom: axiom.to_string(),
            checked: 0,
            nontrivial: 0,
            violations: 0,
            status: AxiomStatus::NotCheckable {
                reason: reason.to_string(),
            },
        }
    }
}
