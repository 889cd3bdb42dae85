mod common;

use common::*;
use minebench::boardgen::SuiteSpec;
use minebench::session::{run_session, SessionConfig, SinglePointAgent};
use minebench::suite::write_suite;
use minebench_server::ServerConfig;

#[tokio::test]
async fn stored_logs_list_fetch_and_replay() {
    let suites = tempfile::tempdir().unwrap();
    let mut spec = SuiteSpec::gameplay_default();
    spec.pool_size = 100;
    spec.keep = 4;
    let suite = write_suite(suites.path(), &spec).unwrap();

    let sessions = tempfile::tempdir().unwrap();
    let run = sessions.path().join("run1");
    let mut logs = vec![];
    for (id, field) in &suite.boards {
        let mut agent = SinglePointAgent::guessing(3);
        let log = run_session(id, field, &mut agent, &SessionConfig::default()).unwrap();
        log.save(&run).unwrap();
        logs.push(log);
    }
    std::fs::write(run.join("manifest.json"), "{\"not\": \"a log\"}").unwrap();

    let app = app(ServerConfig { sessions_dir: Some(sessions.path().to_path_buf()), ..Default::default() });
    let (_, list) = get(&app, "/api/sessions").await;
    let list = list["sessions"].as_array().unwrap();
    assert_eq!(list.len(), 4);
    assert_eq!(list[0]["id"], "run1/board-000");
    assert_eq!(list[0]["agent"], "builtin:single-point-guess");

    let (s, fetched) = get(&app, "/api/sessions/run1/board-001").await;
    assert_eq!(s, 200);
    assert_eq!(fetched, serde_json::to_value(&logs[1]).unwrap());

    for log in &logs {
        let id = format!("run1/{}", log.board_id);
        let (_, r) = get(&app, &format!("/api/replay/{id}?turn=0")).await;
        assert_eq!(r["view"]["cells"], tokens(&log.opening.view_after));
        for (k, turn) in log.turns.iter().enumerate() {
            let (s, r) = get(&app, &format!("/api/replay/{id}?turn={}&format=coordinate", k + 1)).await;
            assert_eq!(s, 200, "{r}");
            assert_eq!(r["view"]["cells"], tokens(&turn.view_after), "{id} turn {}", k + 1);
            assert_eq!(r["raw_response"], turn.raw_response.as_str());
        }
        let past = log.turns.len() + 1;
        let (s, _) = get(&app, &format!("/api/replay/{id}?turn={past}")).await;
        assert_eq!(s, 400);
    }

    let (s, _) = get(&app, "/api/sessions/run1/manifest").await;
    assert_eq!(s, 422);
    let (s, _) = get(&app, "/api/sessions/../etc/passwd").await;
    assert_eq!(s, 404);
    let (s, _) = get(&app, "/api/replay/run1/board-999").await;
    assert_eq!(s, 404);
}

#[tokio::test]
async fn empty_catalogs() {
    let app = app(ServerConfig::default());
    assert_eq!(get(&app, "/api/sessions").await.1["sessions"], serde_json::json!([]));
    assert_eq!(get(&app, "/api/suites").await.1["suites"], serde_json::json!([]));
    assert_eq!(get(&app, "/api/health").await.1["status"], "ok");
}
