//! Newline-delimited JSON wire format shared by every external backend.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub input_tokens: Vec<String>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireCandidate {
    pub rank: usize,
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    #[serde(default)]
    pub candidates: Vec<WireCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Response {
    pub fn failure(id: impl Into<String>, message: impl Into<String>) -> Self {
        Response { id: id.into(), candidates: Vec::new(), error: Some(message.into()) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_omits_absent_seed() {
        let r = Request { id: "b1".into(), input_tokens: vec!["<GLB>".into()], k: 10, seed: None };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"id":"b1","input_tokens":["<GLB>"],"k":10}"#);
    }

    #[test]
    fn response_fields_default() {
        let r: Response = serde_json::from_str(r#"{"id":"x","error":"boom"}"#).unwrap();
        assert!(r.candidates.is_empty());
        assert_eq!(r.error.as_deref(), Some("boom"));
        let r: Response =
            serde_json::from_str(r#"{"id":"x","candidates":[{"rank":1,"text":"a ;","score":-0.5}]}"#).unwrap();
        assert_eq!(r.candidates[0].text, "a ;");
        assert!(r.error.is_none());
    }
}
