//! The live backend against a one-shot HTTP server on localhost.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use simforge_llm::cache::{ReplayBackend, ReplayCache};
use simforge_llm::{ApiKey, Backend, CompletionRequest, GenerationParams, LiveBackend, LlmConfig, LlmError};

const SECRET: &str = "sk-test-7f3a9c0e-do-not-leak";

struct Captured {
    head: String,
    body: String,
}

/// Serve one request with the given status line, extra headers and body.
fn serve_once(status: &'static str, headers: &'static str, body: &'static str) -> (String, mpsc::Receiver<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut head = String::new();
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            if line == "\r\n" {
                break;
            }
            head.push_str(&line);
        }
        let mut body_bytes = vec![0; len];
        reader.read_exact(&mut body_bytes).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\n{headers}Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        tx.send(Captured { head, body: String::from_utf8(body_bytes).unwrap() }).unwrap();
    });
    (url, rx)
}

fn backend(url: String) -> LiveBackend {
    LiveBackend::new(LlmConfig { endpoint: url, timeout_secs: 5, ..LlmConfig::default() }, ApiKey::new(SECRET))
}

fn request() -> CompletionRequest {
    CompletionRequest::new("## prompt", GenerationParams::default()).unwrap()
}

#[test]
fn sends_request_and_reads_first_choice() {
    let (url, rx) = serve_once(
        "200 OK",
        "",
        r###"{"choices":[{"text":"## simscript v1\nx = 1\n"},{"text":"ignored"}],"usage":{"total_tokens":42}}"###,
    );
    let resp = backend(url).complete(&request()).unwrap();
    assert_eq!(resp.completion, "## simscript v1\nx = 1\n");
    assert_eq!(resp.reported_tokens, 42);
    let got = rx.recv().unwrap();
    assert!(got.head.starts_with("POST /v1/completions"));
    assert!(got.head.to_ascii_lowercase().contains(&format!("authorization: bearer {}", SECRET.to_ascii_lowercase())));
    let body: serde_json::Value = serde_json::from_str(&got.body).unwrap();
    assert_eq!(body["model"], "davinci-codex");
    assert_eq!(body["max_tokens"], 1024);
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["stop"][0], "## end");
}

#[test]
fn maps_rate_limit() {
    let (url, _rx) = serve_once("429 Too Many Requests", "Retry-After: 2\r\n", "{}");
    assert_eq!(backend(url).complete(&request()), Err(LlmError::RateLimited { retry_after_ms: Some(2000) }));
}

#[test]
fn maps_auth_failure() {
    let (url, _rx) = serve_once("401 Unauthorized", "", "{}");
    assert_eq!(backend(url).complete(&request()), Err(LlmError::AuthMissing));
}

#[test]
fn unreachable_endpoint() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = backend(format!("http://127.0.0.1:{port}/")).complete(&request()).unwrap_err();
    assert!(matches!(err, LlmError::BackendUnavailable { .. }), "{err:?}");
}

#[test]
fn secret_never_escapes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.bin");
    let (url, _rx) = serve_once("200 OK", "", r#"{"choices":[{"text":"done"}]}"#);
    let live = backend(url);
    let debug = format!("{live:?}");
    assert!(!debug.contains(SECRET));
    assert!(debug.contains("redacted"));

    let rec = ReplayBackend::recording(ReplayCache::open(&path).unwrap(), std::sync::Arc::new(live));
    let resp = rec.complete(&request()).unwrap();
    assert!(!serde_json::to_string(&resp).unwrap().contains(SECRET));
    let bytes = std::fs::read(&path).unwrap();
    assert!(!String::from_utf8_lossy(&bytes).contains(SECRET));

    // Errors carry no credential either.
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = backend(format!("http://127.0.0.1:{port}/")).complete(&request()).unwrap_err();
    assert!(!err.to_string().contains(SECRET));
    assert!(!serde_json::to_string(&err).unwrap().contains(SECRET));
}

#[test]
fn key_from_environment() {
    // Only this test touches the variable.
    std::env::remove_var(simforge_llm::API_KEY_VAR);
    assert!(matches!(LiveBackend::from_env(LlmConfig::default()), Err(LlmError::AuthMissing)));
    std::env::set_var(simforge_llm::API_KEY_VAR, SECRET);
    let b = LiveBackend::from_env(LlmConfig::default()).unwrap();
    assert!(!format!("{b:?}").contains(SECRET));
    std::env::remove_var(simforge_llm::API_KEY_VAR);
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("llm.toml");
    std::fs::write(&path, "endpoint = \"http://localhost:9/x\"\nengine_id = \"other\"\n").unwrap();
    let c = LlmConfig::load(&path).unwrap();
    assert_eq!(c.endpoint, "http://localhost:9/x");
    assert_eq!(c.engine_id, "other");
    assert_eq!(c.timeout_secs, 60);
    std::fs::write(&path, "endpont = 1\n").unwrap();
    assert!(LlmConfig::load(&path).is_err());
}
