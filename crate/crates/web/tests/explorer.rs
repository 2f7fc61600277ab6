use serde_json::Value;
use subtrack_web::Explorer;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn fixture_loads_coloured_by_class() {
    let mut ex = Explorer::new("three_clusters", 1).unwrap_or_else(|_| panic!("load"));
    let f = parse(&ex.frame().unwrap_or_else(|_| panic!("frame")));
    let pts = f["frame"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 450);
    let mut colors: Vec<u64> = pts.iter().map(|p| p["color"].as_u64().unwrap()).collect();
    colors.sort();
    colors.dedup();
    assert_eq!(colors, vec![1, 2, 3]);
}

#[test]
fn drag_optimize_and_path() {
    let mut ex = Explorer::new("tube_stick", 0).unwrap_or_else(|_| panic!("load"));
    let before = parse(&ex.frame().unwrap_or_else(|_| panic!("frame")));
    ex.drag("left", 0.0, 0.0, 0.3, 0.1, true).unwrap_or_else(|_| panic!("drag"));
    let after = parse(&ex.frame().unwrap_or_else(|_| panic!("frame")));
    assert_ne!(before["frame"]["points"][0], after["frame"]["points"][0]);
    ex.save_view().unwrap_or_else(|_| panic!("save"));
    let r = parse(&ex.optimize("holes", "narrow").unwrap_or_else(|_| panic!("optimize")));
    assert!(r["score"].as_f64().unwrap() >= r["incoming"].as_f64().unwrap());
    ex.save_view().unwrap_or_else(|_| panic!("save"));
    let views = parse(&ex.list_views().unwrap_or_else(|_| panic!("list")));
    assert_eq!(views["views"].as_array().unwrap().len(), 2);
    ex.path_all().unwrap_or_else(|_| panic!("path"));
    let mid = parse(&ex.path_t(0.5).unwrap_or_else(|_| panic!("path_t")));
    assert_eq!(mid["ok"], true);
}

#[test]
fn handle_passes_raw_protocol_lines() {
    let mut ex = Explorer::new("tube_stick", 2).unwrap_or_else(|_| panic!("load"));
    let out = ex.handle(r#"{"seq":9,"op":"get_config"}"#);
    let v = parse(out.lines().last().unwrap());
    assert_eq!(v["seq"], 9);
    assert_eq!(v["ok"], true);
    let bad = parse(&ex.handle("{nope"));
    assert_eq!(bad["ok"], false);
    assert_eq!(bad["error"]["code"], "invalid_json");
}
