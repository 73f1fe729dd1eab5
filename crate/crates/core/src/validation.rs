//! Report-carried validation findings.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    // graph
    EnhancementMismatch,
    LevelGap,
    Disconnected,
    NoCrossingEdge,
    Unstable,
    DegreeMismatch,
    LegOrderMismatch,
    // homology model
    KroneckerRule,
    AlphaOrthogonality,
    LowerLevelOrthogonality,
    VanishingCyclePairing,
    VanishingCycleLevel,
    MissingRestriction,
    MissingBoundaryCoordinates,
    LevelSpanning,
    SpecializationMismatch,
    GrcLift,
    // residues
    ResidueRelation,
    GlobalResidueCondition,
    // monodromy
    MonodromyType,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub rule: Rule,
    pub subject: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rule: Rule, subject: impl Into<String>, detail: impl Into<String>) {
        self.findings.push(Finding { rule, subject: subject.into(), detail: detail.into() });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }

    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.findings.iter().any(|f| f.rule == rule)
    }

    pub fn has_subject(&self, rule: Rule, subject: &str) -> bool {
        self.findings.iter().any(|f| f.rule == rule && f.subject == subject)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return writeln!(f, "ok");
        }
        for x in &self.findings {
            writeln!(f, "{} [{}]: {}", x.rule, x.subject, x.detail)?;
        }
        Ok(())
    }
}
