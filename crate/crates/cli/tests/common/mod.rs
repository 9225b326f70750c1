#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use fakeaudit::corpus::write_corpus;
use fakeaudit::synthetic::{synthetic_corpus, SyntheticSpec};

pub const KEY_ENV: &str = "FAKEAUDIT_TEST_KEY";

pub fn fakeaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fakeaudit"))
        .args(args)
        .env(KEY_ENV, "test-key")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

/// Runs the binary and fails with its stderr unless it exits 0.
pub fn ok(args: &[&str]) -> String {
    let out = fakeaudit(args);
    assert!(
        out.status.success(),
        "fakeaudit {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn write_synthetic(path: &Path, spec: &SyntheticSpec) {
    let c = synthetic_corpus(spec, "synthetic").unwrap();
    write_corpus(&c, path).unwrap();
}

/// Payload of a provenance-stamped JSON document.
pub fn json_data(path: &Path) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert!(v["provenance"].as_str().unwrap().starts_with("fakeaudit "));
    v["data"].clone()
}

pub fn accuracy(report: &Path, group: &str) -> f64 {
    json_data(report)["per_subgroup_accuracy"][group].as_f64().unwrap()
}

/// Every file under `dir` except the run log, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.file_name() != Some("run.log".as_ref()) {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub struct MockServer {
    pub base_url: String,
    pub requests: Arc<AtomicUsize>,
}

/// A chat-completion endpoint answering every request with `status` and,
/// on 200, a fixed message `content`.
pub fn mock_server(status: u16, content: &str) -> MockServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let requests = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&requests);
    let body = if status == 200 {
        serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
    } else {
        r#"{"error":{"message":"mock failure"}}"#.to_string()
    };
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap_or(0);
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut req = vec![0u8; len];
            let _ = reader.read_exact(&mut req);
            counter.fetch_add(1, Ordering::SeqCst);
            let reason = if status == 200 { "OK" } else { "Error" };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    MockServer { base_url: format!("http://127.0.0.1:{port}/v1"), requests }
}

/// A long enough machine-style article body.
pub fn mock_article() -> String {
    let mut text = String::from("Officials confirmed the report on Monday. ");
    for i in 0..12 {
        text.push_str(&format!("Residents in district {i} said the plan would change local services. "));
    }
    text
}

pub fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}
