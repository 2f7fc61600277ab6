use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use subtrack_core::protocol::Service;
use subtrack_core::server;

const SMALL: &str = r#"{"seq":0,"op":"load_data","source":{"kind":"tube_stick","n_tube":120,"n_stick":30,"dims":5,"seed":3}}"#;

fn one(svc: &mut Service, line: &str) -> Value {
    let mut out = svc.handle_line(line);
    let last = out.pop().unwrap();
    assert_eq!(last["ok"], true, "{line} -> {last}");
    last
}

#[test]
fn identity_frame_shows_centered_columns() {
    let mut svc = Service::default();
    let r = one(
        &mut svc,
        r#"{"op":"load_data","source":{"kind":"inline","attributes":["a","b","c"],"rows":[[1,10,3],[2,30,1],[4,20,2],[3,40,0]]}}"#,
    );
    // min-max to [0, 1], then mean-centred
    let a = [0.0, 1.0 / 3.0, 1.0, 2.0 / 3.0];
    let b = [0.0, 2.0 / 3.0, 1.0 / 3.0, 1.0];
    let (ma, mb) = (a.iter().sum::<f64>() / 4.0, b.iter().sum::<f64>() / 4.0);
    for (i, p) in r["frame"]["points"].as_array().unwrap().iter().enumerate() {
        assert!((p["x"].as_f64().unwrap() - (a[i] - ma)).abs() < 1e-15);
        assert!((p["y"].as_f64().unwrap() - (b[i] - mb)).abs() < 1e-15);
    }
    assert_eq!(r["dataset"]["attributes"], json!(["a", "b", "c"]));
}

#[test]
fn zero_drag_leaves_frame() {
    let mut svc = Service::default();
    let before = one(&mut svc, SMALL)["frame"].clone();
    for b in ["left", "right", "middle"] {
        let r = one(&mut svc, &format!(r#"{{"op":"drag","button":"{b}","from":[0.3,0.1],"to":[0.3,0.1]}}"#));
        assert_eq!(r["frame"], before);
    }
}

#[test]
fn optimize_then_restore_is_bit_exact() {
    let mut svc = Service::default();
    one(&mut svc, SMALL);
    one(&mut svc, r#"{"op":"drag","button":"left","from":[0,0],"to":[0.4,-0.2]}"#);
    let saved = one(&mut svc, r#"{"op":"save_view","name":"before"}"#);
    let id = saved["view_id"].as_u64().unwrap();
    one(&mut svc, r#"{"op":"set_config","config":{"aco":{"generations":8}}}"#);
    let opt = one(&mut svc, r#"{"op":"optimize","metric":{"kind":"holes"},"scope":"expanded"}"#);
    assert!(opt["score"].as_f64().unwrap() >= opt["incoming"].as_f64().unwrap());
    let back = one(&mut svc, &format!(r#"{{"op":"restore_view","id":{id}}}"#));
    let strip = |mut f: Value| {
        f["score"] = Value::Null;
        f["view_count"] = Value::Null;
        f
    };
    assert_eq!(strip(back["frame"].clone()), strip(saved["frame"].clone()));
}

#[test]
fn views_paths_and_sessions_over_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = Service::default();
    one(&mut svc, SMALL);
    one(&mut svc, r#"{"op":"save_view"}"#);
    one(&mut svc, r#"{"op":"equal_express","dims":[1,3]}"#);
    one(&mut svc, r#"{"op":"save_view"}"#);
    one(&mut svc, r#"{"op":"deep","amount":0.7}"#);
    one(&mut svc, r#"{"op":"drag","button":"right","from":[0.1,0.1],"to":[0.5,0.3],"pinned_dim":2}"#);
    one(&mut svc, r#"{"op":"save_view"}"#);
    let lv = one(&mut svc, r#"{"op":"list_views"}"#);
    assert_eq!(lv["views"].as_array().unwrap().len(), 3);
    assert_eq!(lv["layout"]["positions"].as_array().unwrap().len(), 3);
    one(&mut svc, r#"{"op":"build_path","ids":[1,2,3]}"#);
    let r = one(&mut svc, r#"{"op":"path_next","frames":true}"#);
    assert_eq!(r["steps"].as_array().unwrap().len(), 30);
    assert_eq!(r["frame"]["path"]["keyframe"], 1);
    one(&mut svc, r#"{"op":"path_t","t":0.25}"#);
    one(&mut svc, r#"{"op":"brush","ids":[0,1,2],"action":"deactivate"}"#);
    one(&mut svc, r#"{"op":"generate_subspaces","k":2,"seed":4}"#);
    let path = dir.path().join("s.json");
    one(&mut svc, &json!({"op": "save_session", "path": path}).to_string());
    let frame = one(&mut svc, r#"{"op":"get_frame"}"#)["frame"].clone();
    let inline = one(&mut svc, r#"{"op":"save_session"}"#)["session"].clone();

    let mut other = Service::default();
    let loaded = one(&mut other, &json!({"op": "load_session", "path": path}).to_string());
    assert_eq!(loaded["frame"], frame);
    let mut third = Service::default();
    let loaded = one(&mut third, &json!({"op": "load_session", "session": inline}).to_string());
    assert_eq!(loaded["frame"], frame);
    assert!(!frame["points"][0]["active"].as_bool().unwrap());
}

#[test]
fn errors_are_structured() {
    let mut svc = Service::default();
    one(&mut svc, SMALL);
    let cases = [
        (r#"{"op":"restore_view","id":42}"#, "unknown_view"),
        (r#"{"op":"build_path","ids":[1]}"#, "path_too_short"),
        (r#"{"op":"path_t","t":0.5}"#, "bad_request"),
        (r#"{"op":"set_config","config":{"nope":1}}"#, "bad_config"),
        (r#"{"op":"equal_express","dims":[0,99]}"#, "projection_error"),
        (r#"{"op":"teleport"}"#, "unknown_op"),
        (r#"{"op":"load_data","source":{"kind":"csv","path":"/no/such/file.csv"}}"#, "data_error"),
    ];
    for (line, code) in cases {
        let r = svc.handle_line(line).pop().unwrap();
        assert_eq!(r["ok"], false, "{line}");
        assert_eq!(r["error"]["code"], code, "{line}: {r}");
        assert!(r["error"]["message"].as_str().unwrap().len() > 3);
    }
}

struct Client {
    out: TcpStream,
    lines: std::io::Lines<BufReader<TcpStream>>,
}

impl Client {
    fn connect(port: u16) -> Self {
        let s = TcpStream::connect(("127.0.0.1", port)).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(60))).unwrap();
        Self { out: s.try_clone().unwrap(), lines: BufReader::new(s).lines() }
    }

    fn send(&mut self, line: &str) {
        writeln!(self.out, "{line}").unwrap();
    }

    fn recv(&mut self) -> Value {
        serde_json::from_str(&self.lines.next().unwrap().unwrap()).unwrap()
    }

    /// Next reply that is not a progress event.
    fn reply(&mut self) -> Value {
        loop {
            let v = self.recv();
            if v.get("event").is_none() {
                return v;
            }
        }
    }
}

fn start() -> u16 {
    let listener = server::bind(0).unwrap();
    let port = listener.local_addr().unwrap().port();
    thread::spawn(move || server::serve(listener, Service::default()));
    port
}

#[test]
fn pipelined_requests_apply_once_each() {
    let port = start();
    let mut c = Client::connect(port);
    c.send(SMALL);
    assert_eq!(c.reply()["ok"], true);
    let reqs: Vec<String> = (0..15)
        .map(|i| {
            let a = 0.05 * i as f64;
            format!(r#"{{"seq":{i},"op":"drag","button":"left","from":[{a},0],"to":[{},0.1]}}"#, a + 0.05)
        })
        .collect();
    // all at once, then compare with a local replay
    c.out.write_all((reqs.join("\n") + "\n").as_bytes()).unwrap();
    let mut local = Service::default();
    one(&mut local, SMALL);
    for (i, r) in reqs.iter().enumerate() {
        let remote = c.reply();
        assert_eq!(remote["seq"], i);
        assert_eq!(remote["frame"], one(&mut local, r)["frame"]);
    }
}

#[test]
fn optimize_streams_progress_blocks_writes_and_cancels() {
    let port = start();
    let mut c = Client::connect(port);
    c.send(r#"{"op":"load_data","source":{"kind":"tube_stick","n_tube":400,"n_stick":50,"dims":6,"seed":1}}"#);
    assert_eq!(c.reply()["ok"], true);
    c.send(r#"{"op":"set_config","config":{"aco":{"generations":100000}}}"#);
    assert_eq!(c.reply()["ok"], true);
    c.send(r#"{"seq":"opt","op":"optimize","scope":"within_view"}"#);
    let first = c.recv();
    assert_eq!(first["event"], "progress");
    assert_eq!(first["seq"], "opt");

    // a second client sees the same session
    let mut d = Client::connect(port);
    d.send(r#"{"seq":1,"op":"deep","amount":0.3}"#);
    let busy = d.reply();
    assert_eq!(busy["error"]["code"], "busy");
    d.send(r#"{"seq":2,"op":"get_frame"}"#);
    assert_eq!(d.reply()["ok"], true);
    d.send(r#"{"seq":3,"op":"cancel"}"#);
    let cancel = d.reply();
    assert_eq!(cancel["cancelled"], true);

    let done = c.reply();
    assert_eq!(done["seq"], "opt");
    assert_eq!(done["error"]["code"], "cancelled");
    c.send(r#"{"op":"deep","amount":0.3}"#);
    assert_eq!(c.reply()["ok"], true);
    c.send(r#"{"op":"cancel"}"#);
    assert_eq!(c.reply()["cancelled"], false);
}

#[test]
fn finished_optimize_reports_trace() {
    let port = start();
    let mut c = Client::connect(port);
    c.send(SMALL);
    c.reply();
    c.send(r#"{"op":"set_config","config":{"aco":{"generations":5}}}"#);
    c.reply();
    c.send(r#"{"seq":9,"op":"optimize"}"#);
    let mut events = 0;
    let done = loop {
        let v = c.recv();
        if v["event"] == "progress" {
            events += 1;
        } else {
            break v;
        }
    };
    assert_eq!(events, 5);
    assert_eq!(done["ok"], true);
    assert_eq!(done["trace"].as_array().unwrap().len(), 5);
}

#[test]
fn port_env_fallback() {
    // the variable is unset in the test environment unless a user exports it
    if std::env::var(server::PORT_ENV).is_err() {
        assert_eq!(server::port_from_env(), server::DEFAULT_PORT);
    }
}
