//! Record answers from a chat-completions endpoint, then replay them
//! offline. A throwaway local server stands in for the real endpoint.
//!
//! Against a real service, point `endpoint` at it and export
//! `TMPROB_API_KEY`.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use tmprob::campaign::{cases_from_records, run_campaign, CaseRecord, Dataset, GroundtruthRecord};
use tmprob::oracle::OracleKind;
use tmprob::tm::{BackendConfig, TMConfig, Tm};

fn serve(listener: TcpListener) {
    for (n, stream) in listener.incoming().flatten().enumerate() {
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        let mut line = String::new();
        while reader.read_line(&mut line).unwrap() > 2 {
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            line.clear();
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let answer = ["ensures r == x + 1;", "ensures r > x;", "ensures r - 1 == x;"][n % 3];
        let payload = serde_json::json!({"choices": [{"message": {"content": answer}}]}).to_string();
        let mut w = stream;
        write!(w, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}", payload.len()).unwrap();
    }
}

fn main() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    std::thread::spawn(move || serve(listener));

    let cases = cases_from_records(vec![CaseRecord {
        id: "inc".into(),
        docstring: "Adds one to x.".into(),
        signature: "method Inc(x: int) returns (r: int)".into(),
        groundtruth: Some(GroundtruthRecord {
            requires: vec![],
            ensures: vec!["r == x + 1".into()],
        }),
    }])
    .unwrap();
    let ds = Dataset { id: "inline".into(), cases };

    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("answers.jsonl");
    let mut cfg = TMConfig::new(
        "recorded",
        BackendConfig::HttpChat {
            endpoint,
            model: "local".into(),
            cache: cache.clone(),
            backend_id: None,
            max_attempts: 3,
            timeout_secs: 10,
        },
    );
    cfg.sampling.n_samples = 9;
    let live = Tm::new(cfg.clone()).unwrap();
    let first = run_campaign(&live, &ds, OracleKind::default());
    println!("live run: {} calls", live.backend().network_calls());

    cfg.backend = BackendConfig::Replay { cache, backend_id: "http-chat:local".into() };
    let replay = Tm::new(cfg).unwrap();
    let second = run_campaign(&replay, &ds, OracleKind::default());
    println!("replay:   {} calls, identical report: {}", replay.backend().network_calls(), first.to_json() == second.to_json());
    println!("{:?}", second.per_input["inc"].verdict);
}
