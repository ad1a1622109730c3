use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ranked, CandidatePatch, GeneratorError, PatchGenerator, SpecError};
use crate::encoder::ModelInput;
use crate::java::token_texts;

/// Echoes the buggy statement: the degenerate "no change" repair.
pub struct IdentityGenerator {
    label: String,
}

impl IdentityGenerator {
    pub fn new(label: impl Into<String>) -> Self {
        IdentityGenerator { label: label.into() }
    }
}

impl PatchGenerator for IdentityGenerator {
    fn id(&self) -> &str {
        &self.label
    }

    fn generate(&self, _id: &str, input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError> {
        Ok(ranked(&self.label, [input.buggy_text()], k))
    }
}

/// Fixed candidate lists per instance id; unknown ids get no candidates.
pub struct ReplayGenerator {
    label: String,
    table: BTreeMap<String, Vec<String>>,
}

impl ReplayGenerator {
    pub fn from_table(label: impl Into<String>, table: BTreeMap<String, Vec<String>>) -> Self {
        ReplayGenerator { label: label.into(), table }
    }

    /// Reads a JSON object mapping instance id to candidate texts.
    pub fn load(label: impl Into<String>, path: &Path) -> Result<Self, SpecError> {
        let load_err = |message: String| SpecError::Load { path: path.to_path_buf(), message };
        let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
        let table = serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))?;
        Ok(Self::from_table(label, table))
    }
}

impl PatchGenerator for ReplayGenerator {
    fn id(&self) -> &str {
        &self.label
    }

    fn generate(&self, id: &str, _input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError> {
        Ok(ranked(&self.label, self.table.get(id).into_iter().flatten().cloned(), k))
    }
}

/// Serves previously recorded responses, errors included.
pub struct CachedGenerator {
    label: String,
    responses: BTreeMap<String, Result<Vec<CandidatePatch>, GeneratorError>>,
}

impl CachedGenerator {
    pub fn new(
        label: impl Into<String>,
        responses: BTreeMap<String, Result<Vec<CandidatePatch>, GeneratorError>>,
    ) -> Self {
        CachedGenerator { label: label.into(), responses }
    }
}

impl PatchGenerator for CachedGenerator {
    fn id(&self) -> &str {
        &self.label
    }

    fn generate(&self, id: &str, _input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError> {
        match self.responses.get(id) {
            Some(Ok(c)) => Ok(c.iter().take(k).cloned().collect()),
            Some(Err(e)) => Err(e.clone()),
            None => {
                Err(GeneratorError::Io { id: id.into(), message: format!("no recorded response from {}", self.label) })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationRule {
    /// `==` ↔ `!=`
    EqNe,
    /// `&&` ↔ `||`
    AndOr,
    /// `+` ↔ `-`
    PlusMinus,
    /// `<` ↔ `<=`, `>` ↔ `>=`
    Relational,
    /// `true` ↔ `false`
    Boolean,
    /// drop one token
    Delete,
}

impl MutationRule {
    pub const ALL: &'static [MutationRule] = &[
        MutationRule::EqNe,
        MutationRule::AndOr,
        MutationRule::PlusMinus,
        MutationRule::Relational,
        MutationRule::Boolean,
        MutationRule::Delete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationRule::EqNe => "eq-ne",
            MutationRule::AndOr => "and-or",
            MutationRule::PlusMinus => "plus-minus",
            MutationRule::Relational => "relational",
            MutationRule::Boolean => "boolean",
            MutationRule::Delete => "delete",
        }
    }

    fn swap(self, tok: &str) -> Option<&'static str> {
        let pairs: &[(&str, &str)] = match self {
            MutationRule::EqNe => &[("==", "!="), ("!=", "==")],
            MutationRule::AndOr => &[("&&", "||"), ("||", "&&")],
            MutationRule::PlusMinus => &[("+", "-"), ("-", "+")],
            MutationRule::Relational => &[("<", "<="), ("<=", "<"), (">", ">="), (">=", ">")],
            MutationRule::Boolean => &[("true", "false"), ("false", "true")],
            MutationRule::Delete => &[],
        };
        pairs.iter().find(|(from, _)| *from == tok).map(|(_, to)| *to)
    }

    /// Every single-site application, left to right.
    pub fn apply(self, tokens: &[String]) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for i in 0..tokens.len() {
            if self == MutationRule::Delete {
                if tokens.len() > 1 {
                    let mut t = tokens.to_vec();
                    t.remove(i);
                    out.push(t);
                }
            } else if let Some(to) = self.swap(&tokens[i]) {
                let mut t = tokens.to_vec();
                t[i] = to.to_string();
                out.push(t);
            }
        }
        out
    }
}

impl fmt::Display for MutationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationRule {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        MutationRule::ALL.iter().copied().find(|r| r.name() == s).ok_or_else(|| SpecError::UnknownRule(s.to_string()))
    }
}

/// Applies its rules in order to the buggy statement's tokens.
pub struct MutateGenerator {
    label: String,
    rules: Vec<MutationRule>,
}

impl MutateGenerator {
    pub fn new(label: impl Into<String>, rules: Vec<MutationRule>) -> Self {
        MutateGenerator { label: label.into(), rules }
    }
}

impl PatchGenerator for MutateGenerator {
    fn id(&self) -> &str {
        &self.label
    }

    fn generate(&self, _id: &str, input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError> {
        let tokens = token_texts(&input.buggy_text());
        let texts = self.rules.iter().flat_map(|r| r.apply(&tokens)).map(|t| t.join(" "));
        Ok(ranked(&self.label, texts, k))
    }
}
