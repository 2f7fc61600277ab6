//! TCP front end for [`Service`]: one JSON request per line in, one JSON
//! reply (plus progress events) per line out.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

use crate::aco::RunHooks;
use crate::protocol::{self, error_response, progress_event, Dispatch, ProtoError, Request, Service};

pub const DEFAULT_PORT: u16 = 7878;
pub const PORT_ENV: &str = "SUBTRACK_PORT";

/// Port from the environment, else the default.
pub fn port_from_env() -> u16 {
    std::env::var(PORT_ENV).ok().and_then(|p| p.trim().parse().ok()).unwrap_or(DEFAULT_PORT)
}

pub fn bind(port: u16) -> io::Result<TcpListener> {
    TcpListener::bind(("127.0.0.1", port))
}

struct Shared {
    service: Service,
    /// Cancel flag of the optimization in flight.
    running: Option<Arc<AtomicBool>>,
}

type Writer = Arc<Mutex<TcpStream>>;

fn send(w: &Writer, v: &Value) {
    let mut s = w.lock().expect("writer lock");
    // a vanished client only loses its own replies
    let _ = writeln!(s, "{v}").and_then(|_| s.flush());
}

/// Accepts connections until the listener fails. All connections share the
/// one session.
pub fn serve(listener: TcpListener, service: Service) -> io::Result<()> {
    let shared = Arc::new(Mutex::new(Shared { service, running: None }));
    for stream in listener.incoming() {
        let stream = stream?;
        let shared = Arc::clone(&shared);
        thread::spawn(move || {
            let _ = connection(stream, shared);
        });
    }
    Ok(())
}

fn connection(stream: TcpStream, shared: Arc<Mutex<Shared>>) -> io::Result<()> {
    let writer: Writer = Arc::new(Mutex::new(stream.try_clone()?));
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        handle(&line, &shared, &writer);
    }
    Ok(())
}

fn handle(line: &str, shared: &Arc<Mutex<Shared>>, writer: &Writer) {
    let (id, req) = protocol::parse(line);
    let req = match req {
        Ok(r) => r,
        Err(e) => return send(writer, &error_response(&id, &e)),
    };
    let mut guard = shared.lock().expect("session lock");
    if let Request::Cancel = req {
        let cancelled = guard.running.as_ref().map(|f| f.store(true, Ordering::SeqCst)).is_some();
        return send(writer, &json!({"seq": id, "ok": true, "cancelled": cancelled}));
    }
    if guard.running.is_some() && req.is_mutating() {
        return send(writer, &error_response(&id, &ProtoError::new("busy", "an optimization is running")));
    }
    match guard.service.dispatch(&id, req) {
        Dispatch::Reply(v) => send(writer, &v),
        Dispatch::Optimize(job) => {
            let flag = Arc::new(AtomicBool::new(false));
            guard.running = Some(Arc::clone(&flag));
            drop(guard);
            let shared = Arc::clone(shared);
            let writer = Arc::clone(writer);
            thread::spawn(move || {
                let progress = |g: usize, best: f64| send(&writer, &progress_event(&id, g, best));
                let result = job.run(RunHooks { progress: Some(&progress), cancel: Some(&flag) });
                let mut guard = shared.lock().expect("session lock");
                let reply = guard.service.finish_optimize(&id, result);
                guard.running = None;
                // reply while holding the lock so no later request overtakes it
                send(&writer, &reply);
            });
        }
    }
}
