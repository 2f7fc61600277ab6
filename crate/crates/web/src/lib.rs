//! Browser demo: the session service compiled to WebAssembly. The page talks
//! to it with the same JSON requests the TCP service accepts.

use serde_json::{json, Value};
use subtrack_core::protocol::Service;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Explorer {
    service: Service,
}

#[wasm_bindgen]
impl Explorer {
    /// Loads a built-in fixture: "tube_stick" or "three_clusters".
    #[wasm_bindgen(constructor)]
    pub fn new(fixture: &str, seed: u32) -> Result<Explorer, JsError> {
        let source = match fixture {
            "tube_stick" => json!({"kind": "tube_stick", "n_tube": 600, "n_stick": 80, "dims": 6, "seed": seed}),
            "three_clusters" => json!({"kind": "three_clusters", "n_per": 150, "seed": seed}),
            other => return Err(JsError::new(&format!("unknown fixture `{other}`"))),
        };
        let mut ex = Explorer { service: Service::default() };
        ex.request(json!({"op": "load_data", "source": source}))?;
        // colour points by their generating class
        let classes = ex.service.session.as_ref().and_then(|s| s.dataset().labels().map(<[usize]>::to_vec));
        if let Some(classes) = classes {
            let k = classes.iter().max().map_or(0, |m| m + 1);
            for c in 0..k {
                let ids: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == c).collect();
                ex.request(json!({"op": "brush", "ids": ids, "action": "color", "color": c + 1}))?;
            }
        }
        Ok(ex)
    }

    /// Handles one protocol request; returns the output lines (progress
    /// events, then the reply) joined by newlines.
    pub fn handle(&mut self, line: &str) -> String {
        self.service.handle_line(line).iter().map(Value::to_string).collect::<Vec<_>>().join("\n")
    }

    pub fn frame(&mut self) -> Result<String, JsError> {
        self.request(json!({"op": "get_frame"}))
    }

    /// Left button rotates, right chases the dimensions under the drag,
    /// middle changes depth emphasis.
    pub fn drag(&mut self, button: &str, fx: f64, fy: f64, tx: f64, ty: f64, is_final: bool) -> Result<String, JsError> {
        self.request(json!({"op": "drag", "button": button, "from": [fx, fy], "to": [tx, ty], "final": is_final}))
    }

    pub fn optimize(&mut self, metric: &str, scope: &str) -> Result<String, JsError> {
        self.request(json!({"op": "optimize", "metric": {"kind": metric}, "scope": scope}))
    }

    pub fn save_view(&mut self) -> Result<String, JsError> {
        self.request(json!({"op": "save_view"}))
    }

    pub fn list_views(&mut self) -> Result<String, JsError> {
        self.request(json!({"op": "list_views"}))
    }

    /// Builds a path through every saved view, in order of saving.
    pub fn path_all(&mut self) -> Result<String, JsError> {
        let ids: Vec<u64> = self.service.session.as_ref().map_or(Vec::new(), |s| s.views.iter().map(|v| v.view_id).collect());
        self.request(json!({"op": "build_path", "ids": ids}))
    }

    pub fn path_t(&mut self, t: f64) -> Result<String, JsError> {
        self.request(json!({"op": "path_t", "t": t}))
    }
}

impl Explorer {
    fn request(&mut self, req: Value) -> Result<String, JsError> {
        let mut out = self.service.handle_line(&req.to_string());
        let reply = out.pop().unwrap_or(Value::Null);
        if reply["ok"] != true {
            let msg = reply["error"]["message"].as_str().unwrap_or("request failed");
            return Err(JsError::new(msg));
        }
        Ok(reply.to_string())
    }
}
