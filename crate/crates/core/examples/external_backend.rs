//! Talks the line protocol to external backends: a child process reading
//! requests on stdin, and an HTTP endpoint served from a local thread.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use slicefix::encoder::{encode_input, ModelInput};
use slicefix::generators::protocol::{Request, Response, WireCandidate};
use slicefix::generators::{checked_generate, CandidatePatch, CommandGenerator, GeneratorError, HttpGenerator};
use slicefix::java::StatementId;
use slicefix::slicer::{SliceContext, SlicedStatement};

const SHELL_BACKEND: &str = r#"while IFS= read -r line; do
  id=$(printf '%s' "$line" | sed 's/.*"id":"\([^"]*\)".*/\1/')
  printf '{"id":"%s","candidates":[{"rank":1,"text":"x = 2 ;","score":0.9},{"rank":2,"text":"x = 3 ;","score":0.4}]}\n' "$id"
done"#;

fn input() -> ModelInput {
    let ctx = SliceContext {
        buggy: SlicedStatement { id: StatementId(0), line: 1, text: "x = 1 ;".into() },
        intra: vec![],
        global: vec![],
    };
    encode_input(&ctx, 32).unwrap()
}

/// Answers each POSTed request by flipping the first `1` in the buggy line.
fn spawn_http_backend() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut stream = stream;
            loop {
                let mut len = 0;
                let mut line = String::new();
                loop {
                    line.clear();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    if line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap_or(0);
                    }
                }
                let mut body = vec![0; len];
                if reader.read_exact(&mut body).is_err() {
                    break;
                }
                let req: Request = serde_json::from_slice(&body).unwrap();
                let fixed: Vec<String> =
                    req.input_tokens.iter().map(|t| if t == "1" { "2".into() } else { t.clone() }).collect();
                let bol = fixed.iter().position(|t| t == "<BOL>").unwrap();
                let text = fixed[bol + 1..fixed.len() - 1].join(" ");
                let resp =
                    Response { id: req.id, candidates: vec![WireCandidate { rank: 1, text, score: 1.0 }], error: None };
                let out = serde_json::to_vec(&resp).unwrap();
                let head = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n",
                    out.len()
                );
                if stream.write_all(head.as_bytes()).and_then(|_| stream.write_all(&out)).is_err() {
                    break;
                }
            }
        }
    });
    format!("http://{addr}/generate")
}

pub fn run_example() -> (Vec<CandidatePatch>, Result<Vec<CandidatePatch>, GeneratorError>) {
    let inp = input();
    let cmd = CommandGenerator::new("shell", SHELL_BACKEND.to_string(), Some(7), Duration::from_secs(10));
    let from_child = checked_generate(&cmd, "bug-7", &inp, 10).expect("child backend answers");
    let http = HttpGenerator::new("http", spawn_http_backend(), Some(7), Duration::from_secs(10));
    let from_http = checked_generate(&http, "bug-8", &inp, 10);
    (from_child, from_http)
}

fn main() {
    let (child, http) = run_example();
    for c in &child {
        println!("child  {}. {} ({:.2})", c.rank, c.text, c.score);
    }
    match http {
        Ok(list) => list.iter().for_each(|c| println!("http   {}. {} ({:.2})", c.rank, c.text, c.score)),
        Err(e) => println!("http   error: {e}"),
    }
}
