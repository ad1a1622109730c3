use std::io::{self, BufRead, Write};

use super::protocol::{Request, Response, WireCandidate};
use super::{checked_generate, PatchGenerator};
use crate::encoder::input_from_tokens;

/// Answers newline-delimited requests with `g`, one response per line,
/// until `reader` is exhausted. Bad requests get an error response.
pub fn serve_lines(g: &dyn PatchGenerator, reader: impl BufRead, mut writer: impl Write) -> io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<Request>(&line) {
            Err(e) => Response::failure("", format!("bad request: {e}")),
            Ok(req) => match input_from_tokens(req.input_tokens) {
                Err(e) => Response::failure(req.id, e.to_string()),
                Ok(input) => match checked_generate(g, &req.id, &input, req.k) {
                    Err(e) => Response::failure(req.id, e.to_string()),
                    Ok(c) => Response {
                        id: req.id,
                        candidates: c
                            .into_iter()
                            .map(|c| WireCandidate { rank: c.rank, text: c.text, score: c.score })
                            .collect(),
                        error: None,
                    },
                },
            },
        };
        serde_json::to_writer(&mut writer, &resp)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::IdentityGenerator;

    fn serve(input: &str) -> Vec<Response> {
        let mut out = Vec::new();
        serve_lines(&IdentityGenerator::new("identity"), input.as_bytes(), &mut out).unwrap();
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    }

    #[test]
    fn answers_each_request() {
        let req = r#"{"id":"b1","input_tokens":["<GLB>","<CTX>","<BOL>","a","=","b",";","<EOL>"],"k":10}"#;
        let resp = serve(&format!("{req}\n\n{req}\n"));
        assert_eq!(resp.len(), 2);
        assert_eq!(resp[0].candidates, [WireCandidate { rank: 1, text: "a = b ;".into(), score: 1.0 }]);
    }

    #[test]
    fn empty_buggy_segment_is_an_error_response() {
        let resp = serve(r#"{"id":"b2","input_tokens":["<GLB>","<CTX>","<BOL>","<EOL>"],"k":10}"#);
        assert_eq!(resp[0].id, "b2");
        assert!(resp[0].error.as_deref().unwrap().contains("empty buggy segment"));
        assert!(serve("not json")[0].error.is_some());
    }
}
