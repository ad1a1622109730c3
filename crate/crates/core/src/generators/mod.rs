//! Patch generator contract, spec strings, and the built-in and external
//! implementations.

mod builtin;
mod external;
pub mod protocol;
mod serve;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builtin::{CachedGenerator, IdentityGenerator, MutateGenerator, MutationRule, ReplayGenerator};
pub use external::{CommandGenerator, HttpGenerator};
pub use serve::serve_lines;

use crate::encoder::ModelInput;
use protocol::WireCandidate;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePatch {
    pub rank: usize,
    pub text: String,
    pub score: f64,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GeneratorError {
    #[error("{id}: backend timed out after {millis} ms")]
    Timeout { id: String, millis: u64 },
    #[error("{id}: protocol violation: {message}")]
    Protocol { id: String, message: String },
    #[error("{id}: backend reported: {message}")]
    Backend { id: String, message: String },
    #[error("{id}: {message}")]
    Io { id: String, message: String },
}

impl GeneratorError {
    pub fn id(&self) -> &str {
        match self {
            GeneratorError::Timeout { id, .. }
            | GeneratorError::Protocol { id, .. }
            | GeneratorError::Backend { id, .. }
            | GeneratorError::Io { id, .. } => id,
        }
    }

    pub(crate) fn protocol(id: &str, message: impl Into<String>) -> Self {
        GeneratorError::Protocol { id: id.to_string(), message: message.into() }
    }
}

pub trait PatchGenerator: Send + Sync {
    fn id(&self) -> &str;

    /// Same input and k always yield the same candidates.
    fn deterministic(&self) -> bool {
        true
    }

    fn generate(&self, id: &str, input: &ModelInput, k: usize) -> Result<Vec<CandidatePatch>, GeneratorError>;
}

/// Runs `g` and checks the response against the candidate contract.
pub fn checked_generate(
    g: &dyn PatchGenerator,
    id: &str,
    input: &ModelInput,
    k: usize,
) -> Result<Vec<CandidatePatch>, GeneratorError> {
    if k == 0 {
        return Err(GeneratorError::protocol(id, "k must be at least 1"));
    }
    let out = g.generate(id, input, k)?;
    let wire: Vec<WireCandidate> =
        out.iter().map(|c| WireCandidate { rank: c.rank, text: c.text.clone(), score: c.score }).collect();
    validate_candidates(id, k, &wire)?;
    Ok(out)
}

/// At most `k` candidates, ranks 1..n in order, single-line texts, finite
/// scores that never increase with rank.
pub fn validate_candidates(id: &str, k: usize, cands: &[WireCandidate]) -> Result<(), GeneratorError> {
    if cands.len() > k {
        return Err(GeneratorError::protocol(id, format!("{} candidates for k = {k}", cands.len())));
    }
    for (i, c) in cands.iter().enumerate() {
        if c.rank != i + 1 {
            return Err(GeneratorError::protocol(id, format!("rank {} at position {}", c.rank, i + 1)));
        }
        if !c.score.is_finite() {
            return Err(GeneratorError::protocol(id, format!("non-finite score at rank {}", c.rank)));
        }
        if c.text.contains(['\n', '\r']) {
            return Err(GeneratorError::protocol(id, format!("multi-line text at rank {}", c.rank)));
        }
        if i > 0 && c.score > cands[i - 1].score {
            return Err(GeneratorError::protocol(id, format!("score increases at rank {}", c.rank)));
        }
    }
    Ok(())
}

pub(crate) fn ranked(generator: &str, texts: impl IntoIterator<Item = String>, k: usize) -> Vec<CandidatePatch> {
    texts
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, text)| CandidatePatch { rank: i + 1, text, score: 1.0 / (i + 1) as f64, generator: generator.into() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("empty generator spec")]
    Empty,
    #[error("unknown generator kind `{0}`")]
    UnknownKind(String),
    #[error("`{0}` needs an argument")]
    MissingArgument(String),
    #[error("unknown mutation rule `{0}`")]
    UnknownRule(String),
    #[error("unbalanced quotes in `{0}`")]
    Unbalanced(String),
    #[error("cannot load {path}: {message}")]
    Load { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorKind {
    Identity,
    Replay(PathBuf),
    Mutate(Vec<MutationRule>),
    Command(String),
    Http(String),
}

/// `[name=]identity | replay:PATH | mutate[:RULE+RULE..] | cmd:COMMAND | http:URL`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct GeneratorSpec {
    pub name: Option<String>,
    pub kind: GeneratorKind,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        GeneratorSpec { name: None, kind }
    }

    pub fn named(name: impl Into<String>, kind: GeneratorKind) -> Self {
        GeneratorSpec { name: Some(name.into()), kind }
    }

    /// Name used in traces and reports.
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match &self.kind {
            GeneratorKind::Identity => "identity".into(),
            GeneratorKind::Replay(p) => {
                p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "replay".into())
            }
            GeneratorKind::Mutate(_) => "mutate".into(),
            GeneratorKind::Command(_) => "cmd".into(),
            GeneratorKind::Http(_) => "http".into(),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self.kind, GeneratorKind::Command(_) | GeneratorKind::Http(_))
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            write!(f, "{n}=")?;
        }
        match &self.kind {
            GeneratorKind::Identity => f.write_str("identity"),
            GeneratorKind::Replay(p) => write!(f, "replay:{}", p.display()),
            GeneratorKind::Mutate(rules) if rules.as_slice() == MutationRule::ALL => f.write_str("mutate"),
            GeneratorKind::Mutate(rules) => {
                let names: Vec<&str> = rules.iter().map(|r| r.name()).collect();
                write!(f, "mutate:{}", names.join("+"))
            }
            GeneratorKind::Command(c) => write!(f, "cmd:\"{c}\""),
            GeneratorKind::Http(u) => write!(f, "http:{u}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(SpecError::Empty);
        }
        let (name, body) = match s.split_once('=') {
            Some((n, rest))
                if !n.is_empty()
                    && !n.contains(':')
                    && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') =>
            {
                (Some(n.to_string()), rest)
            }
            _ => (None, s),
        };
        let (kind, arg) = match body.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (body, None),
        };
        let need = |a: Option<&str>| -> Result<String, SpecError> {
            match a.map(unquote) {
                Some(v) if !v.is_empty() => Ok(v.to_string()),
                _ => Err(SpecError::MissingArgument(kind.to_string())),
            }
        };
        let kind = match kind {
            "identity" => GeneratorKind::Identity,
            "replay" => GeneratorKind::Replay(PathBuf::from(need(arg)?)),
            "mutate" => match arg {
                None | Some("") => GeneratorKind::Mutate(MutationRule::ALL.to_vec()),
                Some(a) => GeneratorKind::Mutate(a.split('+').map(str::parse).collect::<Result<_, _>>()?),
            },
            "cmd" => GeneratorKind::Command(need(arg)?),
            "http" => {
                let a = need(arg)?;
                GeneratorKind::Http(if a.starts_with("//") { format!("http:{a}") } else { a })
            }
            other => return Err(SpecError::UnknownKind(other.to_string())),
        };
        Ok(GeneratorSpec { name, kind })
    }
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(s)
}

impl From<GeneratorSpec> for String {
    fn from(s: GeneratorSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for GeneratorSpec {
    type Error = SpecError;

    fn try_from(s: String) -> Result<Self, SpecError> {
        s.parse()
    }
}

/// Splits a comma-separated spec list; commas inside double quotes stay.
pub fn parse_spec_list(s: &str) -> Result<Vec<GeneratorSpec>, SpecError> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in s.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                cur.push(c);
            }
            ',' if !quoted => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if quoted {
        return Err(SpecError::Unbalanced(s.to_string()));
    }
    parts.push(cur);
    parts.iter().map(|p| p.parse()).collect()
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Decoding seed forwarded to external backends.
    pub seed: Option<u64>,
    pub timeout: Duration,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { seed: None, timeout: DEFAULT_TIMEOUT }
    }
}

pub fn build_generator(spec: &GeneratorSpec, opts: &BuildOptions) -> Result<Box<dyn PatchGenerator>, SpecError> {
    let label = spec.label();
    Ok(match &spec.kind {
        GeneratorKind::Identity => Box::new(IdentityGenerator::new(label)),
        GeneratorKind::Replay(path) => Box::new(ReplayGenerator::load(label, path)?),
        GeneratorKind::Mutate(rules) => Box::new(MutateGenerator::new(label, rules.clone())),
        GeneratorKind::Command(cmd) => Box::new(CommandGenerator::new(label, cmd.clone(), opts.seed, opts.timeout)),
        GeneratorKind::Http(url) => Box::new(HttpGenerator::new(label, url.clone(), opts.seed, opts.timeout)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire(v: &[(usize, &str, f64)]) -> Vec<WireCandidate> {
        v.iter().map(|&(rank, t, score)| WireCandidate { rank, text: t.into(), score }).collect()
    }

    #[test]
    fn validation_catches_each_violation() {
        assert!(validate_candidates("b", 3, &wire(&[(1, "a", 0.9), (2, "b", 0.9), (3, "c", 0.1)])).is_ok());
        assert!(validate_candidates("b", 3, &[]).is_ok());
        let bad = [
            wire(&[(1, "a", 1.0), (2, "b", 0.5)]),
            wire(&[(2, "a", 1.0)]),
            wire(&[(1, "a", 0.1), (2, "b", 0.5)]),
            wire(&[(1, "a", f64::NAN)]),
            wire(&[(1, "a\nb", 1.0)]),
        ];
        let ks = [1, 3, 3, 3, 3];
        for (c, k) in bad.iter().zip(ks) {
            let err = validate_candidates("bug7", k, c).unwrap_err();
            assert_eq!(err.id(), "bug7");
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "identity",
            "replay:tables/codet5.json",
            "mutate",
            "mutate:eq-ne+delete",
            "gen2=cmd:\"python3 serve.py --seed 1\"",
            "http:http://localhost:8080/generate",
        ] {
            let spec: GeneratorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(spec.to_string().parse::<GeneratorSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn spec_labels() {
        assert_eq!("replay:x/codet5.json".parse::<GeneratorSpec>().unwrap().label(), "codet5");
        assert_eq!("a=identity".parse::<GeneratorSpec>().unwrap().label(), "a");
        assert_eq!("http://h:1/g".parse::<GeneratorSpec>().unwrap().kind, GeneratorKind::Http("http://h:1/g".into()));
    }

    #[test]
    fn spec_errors() {
        assert_eq!("".parse::<GeneratorSpec>(), Err(SpecError::Empty));
        assert_eq!("replay".parse::<GeneratorSpec>(), Err(SpecError::MissingArgument("replay".into())));
        assert_eq!("beam:4".parse::<GeneratorSpec>(), Err(SpecError::UnknownKind("beam".into())));
        assert_eq!("mutate:swap".parse::<GeneratorSpec>(), Err(SpecError::UnknownRule("swap".into())));
    }

    #[test]
    fn list_split_respects_quotes() {
        let specs = parse_spec_list("identity,cmd:\"sh -c 'echo a,b'\",mutate:eq-ne").unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[1].kind, GeneratorKind::Command("sh -c 'echo a,b'".into()));
        assert!(parse_spec_list("cmd:\"x").is_err());
    }
}
