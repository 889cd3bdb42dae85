mod common;

use common::*;
use minebench::boardgen::{rng, uniform_below, SuiteSpec};
use minebench::engine::{enumerate_actions, Coord, MineField};
use minebench::suite::write_suite;
use minebench_server::ServerConfig;
use serde_json::{json, Value};

const FORBIDDEN_KEYS: [&str; 4] = ["mines", "field", "board", "created_from"];
/// Coordinates under these keys are chosen by the player.
const PLAYER_KEYS: [&str; 3] = ["action", "first_action", "flag_changes"];

fn coord(v: &Value) -> Option<Coord> {
    let o = v.as_object()?;
    if o.len() != 2 {
        return None;
    }
    Some(Coord::new(o.get("row")?.as_i64()? as i32, o.get("col")?.as_i64()? as i32))
}

/// Every coordinate object in `v` outside player-chosen fields.
fn server_coords(v: &Value, out: &mut Vec<Coord>) {
    if let Some(c) = coord(v) {
        out.push(c);
        return;
    }
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                assert!(!FORBIDDEN_KEYS.contains(&k.as_str()), "response exposes {k:?}: {v}");
                if !PLAYER_KEYS.contains(&k.as_str()) {
                    server_coords(x, out);
                }
            }
        }
        Value::Array(a) => a.iter().for_each(|x| server_coords(x, out)),
        _ => {}
    }
}

fn check(field: &MineField, body: &Value) {
    let game = if body.get("game").is_some() { &body["game"] } else { body };
    if game["status"]["state"] != "in_progress" {
        return;
    }
    let mut coords = vec![];
    server_coords(body, &mut coords);
    for c in coords {
        assert!(!field.is_mine(c), "mine {c} named in {body}");
    }
    for m in field.mines() {
        let t = &game["view"]["cells"][m.row as usize - 1][m.col as usize - 1];
        assert!(t == "?" || t == "F", "mine {m} rendered as {t}");
        let coordinate = game["view"]["renders"]["coordinate"].as_str().unwrap();
        let line = coordinate.lines().find(|l| l.starts_with(&format!("{m}:"))).unwrap();
        assert!(line.ends_with(": ?") || line.ends_with(": F"), "{line}");
    }
}

#[tokio::test]
async fn random_play_never_reveals_mines() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SuiteSpec::gameplay_default();
    spec.pool_size = 200;
    spec.keep = 20;
    let suite = write_suite(&dir.path().join("s"), &spec).unwrap();
    let app = app(ServerConfig { suites_dir: Some(dir.path().to_path_buf()), ..Default::default() });
    let mut r = rng(11);
    let mut responses = 0;
    for (index, (_, field)) in suite.boards.iter().enumerate() {
        let actions = enumerate_actions(7, 7);
        let (_, g) = post(&app, "/api/games?format=both", json!({ "suite": "s", "index": index })).await;
        check(field, &g);
        let id = g["id"].as_str().unwrap().to_string();
        let uri = format!("/api/games/{id}/actions?format=both");
        for step in 0..60 {
            let a = if step == 0 { "L(3,3)".to_string() } else {
                actions[uniform_below(&mut r, actions.len() as u64) as usize].to_string()
            };
            let (s, body) = post(&app, &uri, json!({ "action": a })).await;
            if s == 409 {
                break;
            }
            check(field, &body);
            let (_, view) = get(&app, &format!("/api/games/{id}?format=both")).await;
            check(field, &view);
            responses += 2;
        }
    }
    assert!(responses > 200);
}

/// Two fields that differ only where the player cannot see must produce
/// identical responses.
#[tokio::test]
async fn hidden_layouts_are_indistinguishable() {
    let wall_col2: Vec<Coord> = (1..=5).map(|r| Coord::new(r, 2)).collect();
    let a = MineField::new(5, 9, wall_col2.iter().copied().chain([Coord::new(1, 1)])).unwrap();
    let b = MineField::new(5, 9, wall_col2.iter().copied().chain([Coord::new(3, 1)])).unwrap();
    let app = app(ServerConfig::default());
    let script = ["R(3,5)", "L(3,5)", "R(1,2)", "R(2,2)", "M(1,3)", "R(1,2)", "L(1,3)", "M(3,3)", "R(9,9)", "M(3,4)"];
    let mut transcripts = vec![];
    for f in [&a, &b] {
        let (_, g) = post(&app, "/api/games?format=both", json!({ "field": f.to_text() })).await;
        let id = g["id"].as_str().unwrap().to_string();
        let mut t = vec![];
        for step in script {
            let (s, mut body) = post(&app, &format!("/api/games/{id}/actions?format=both"), json!({ "action": step })).await;
            body["game"]["id"] = Value::Null;
            t.push((s, body));
        }
        assert_eq!(t.last().unwrap().1["game"]["status"]["state"], "in_progress");
        transcripts.push(t);
    }
    assert_eq!(transcripts[0], transcripts[1]);
}
