mod common;

use std::collections::BTreeSet;

use common::{fetch, fixture, spawn, state};
use fundscape_service::ServiceConfig;
use fundscape_testkit::http::get;
use fundscape_testkit::predictor::PATENT_FIELD;

fn kinds(body: &serde_json::Value) -> BTreeSet<String> {
    body["layout"]["clusters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["kind"].as_str().unwrap().to_string())
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn health_reports_snapshot() {
    let addr = spawn(state(ServiceConfig::default(), true));
    let (r, body) = fetch(addr, "/api/health");
    assert_eq!(r.status, 200);
    assert_eq!(r.content_type.as_deref(), Some("application/json"));
    assert_eq!(body["status"], "ok");
    assert_eq!(body["snapshot_id"], fixture().snapshot.id());
    assert_eq!(body["grants"], fixture().snapshot.grants().len());
    assert!(body["models"].as_u64().unwrap() > 0);
}

#[test]
fn every_endpoint_answers_with_its_schema() {
    let addr = spawn(state(ServiceConfig::default(), true));
    let field = PATENT_FIELD.split('/').next().unwrap();
    for path in [
        "/api/grants".to_string(),
        "/api/grants?year_min=2015&year_max=2018&amount_min=10000".into(),
        "/api/fields".into(),
        "/api/fields?level=2&funder_org=NSF-X".into(),
        "/api/pis".into(),
        format!("/api/pis?field={field}&rank_by=productivity&limit=5"),
        "/api/pis?rank_by=avg_log_c10".into(),
        "/api/landscape".into(),
        format!("/api/landscape?field={field}&mode=broad"),
        "/api/landscape?threshold=0.5".into(),
        "/api/landscape?impact_types=direct_patent,direct_paper".into(),
        "/api/impact-types".into(),
        "/api/impact-types?mode=broad&year_min=2010".into(),
        "/api/entity-distribution?doc_type=patent&dimension=assignee".into(),
        "/api/entity-distribution?doc_type=newsfeed&dimension=source_country&year_max=2010".into(),
        format!("/api/topics/grant:{field}/keywords?top_n=10"),
        "/api/topics/patent:G06/keywords".into(),
        "/api/predictions?impact_type=direct_patent&threshold=0.5".into(),
        "/api/predictions?topic=G06/G06N&rank_by=grant_count".into(),
    ] {
        let (r, _) = fetch(addr, &path);
        assert_eq!(r.status, 200, "{path}: {}", r.text());
    }
}

#[test]
fn bad_requests_use_the_error_body() {
    let addr = spawn(state(ServiceConfig::default(), true));
    for (path, status) in [
        ("/api/grants?year_min=2019&year_max=2001", 400),
        ("/api/grants?year_min=soon", 400),
        ("/api/pis?rank_by=fame", 400),
        ("/api/pis?field=Nowhere", 404),
        ("/api/landscape?mode=sideways", 400),
        ("/api/landscape?field=Nowhere", 404),
        ("/api/landscape?threshold=1.5", 400),
        ("/api/landscape?mode=direct&impact_types=broad_policy", 400),
        ("/api/entity-distribution?doc_type=patent", 400),
        ("/api/entity-distribution?doc_type=patent&dimension=outlet", 400),
        ("/api/topics/grant:Nowhere/keywords", 404),
        ("/api/topics/bogus/keywords", 404),
        ("/api/predictions?impact_type=fame", 400),
        ("/api/nothing-here", 404),
    ] {
        let (r, body) = fetch(addr, path);
        assert_eq!(r.status, status, "{path}: {}", r.text());
        assert!(!body["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[test]
fn impact_type_means_against_baseline() {
    let addr = spawn(state(ServiceConfig::default(), true));
    let (_, all) = fetch(addr, "/api/impact-types");
    for t in all["types"].as_array().unwrap() {
        assert_eq!(t["mean"], t["baseline"], "{t}");
    }
    let (_, planted) = fetch(addr, &format!("/api/impact-types?field={PATENT_FIELD}"));
    let patent = planted["types"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["impact_type"] == "direct_patent")
        .unwrap();
    assert!(
        patent["mean"].as_f64().unwrap() > patent["baseline"].as_f64().unwrap(),
        "{patent}"
    );
    let (_, empty) = fetch(addr, "/api/impact-types?year_min=1900&year_max=1901");
    assert_eq!(empty["filtered_grants"], 0);
    for t in empty["types"].as_array().unwrap() {
        assert!(t["mean"].is_null());
        assert!(t["baseline"].is_number());
    }
}

#[test]
fn landscape_modes_and_prediction_ring() {
    let addr = spawn(state(ServiceConfig::default(), true));
    let (_, direct) = fetch(addr, "/api/landscape?mode=direct");
    assert_eq!(kinds(&direct), set(&["paper", "patent", "clinical_trial"]));
    assert_eq!(direct["layout"]["glyph_mode"], "historical");
    let (_, broad) = fetch(addr, "/api/landscape?mode=broad");
    assert_eq!(kinds(&broad), set(&["patent", "clinical_trial", "policy", "newsfeed"]));
    let (_, only) = fetch(addr, "/api/landscape?mode=direct&impact_types=direct_patent");
    assert_eq!(kinds(&only), set(&["patent"]));
    assert!(only["layout"]["edges"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["impact_kind"] == "patent"));

    let (_, predicted) = fetch(addr, "/api/landscape?mode=direct&threshold=0.5");
    assert_eq!(predicted["layout"]["glyph_mode"], "prediction");
    let glyphs = predicted["layout"]["glyphs"].as_array().unwrap();
    assert!(glyphs.iter().all(|g| g.get("prediction_ring_radius").is_some()));
    assert!(direct["layout"]["glyphs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|g| g.get("prediction_ring_radius").is_none()));
}

#[test]
fn landscape_requests_share_one_computation() {
    let state = state(ServiceConfig::default(), false);
    let addr = spawn(state.clone());
    let field = PATENT_FIELD.split('/').next().unwrap();
    let path = format!("/api/landscape?field={field}&mode=broad&seed=3");
    let bodies: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..6).map(|_| s.spawn(|| get(addr, &path).unwrap().text())).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(state.cache.len(), 1);
    fetch(addr, &format!("/api/landscape?field={field}&mode=broad&seed=3&impact_types=broad_policy"));
    assert_eq!(state.cache.len(), 1, "type selection must reuse the cached layout");
    fetch(addr, &format!("/api/landscape?field={field}&mode=direct&seed=3"));
    assert_eq!(state.cache.len(), 2);
}

#[test]
fn landscape_cache_is_bounded() {
    let config = ServiceConfig {
        cache_capacity: 2,
        ..ServiceConfig::default()
    };
    let state = state(config, false);
    let addr = spawn(state.clone());
    for seed in 0..4 {
        fetch(addr, &format!("/api/landscape?seed={seed}"));
    }
    assert_eq!(state.cache.len(), 2);
}

#[test]
fn predictions_need_a_registry() {
    let addr = spawn(state(ServiceConfig::default(), false));
    let (r, body) = fetch(addr, "/api/predictions");
    assert_eq!(r.status, 503);
    assert_eq!(body["error"]["code"], "unavailable");
    let (r, _) = fetch(addr, "/api/landscape?threshold=0.5");
    assert_eq!(r.status, 503);
    let (_, health) = fetch(addr, "/api/health");
    assert_eq!(health["registry"], false);
}

#[test]
fn predictions_highlight_marked_grants() {
    let addr = spawn(state(ServiceConfig::default(), true));
    let (_, body) = fetch(addr, "/api/predictions?impact_type=direct_patent&threshold=0.5&topic=G06/G06N");
    let snapshot = &fixture().snapshot;
    let highlighted: Vec<&str> = body["highlighted"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(!highlighted.is_empty());
    let marked = highlighted
        .iter()
        .filter(|id| snapshot.grant(id).unwrap().abstract_text.contains("zephyrmarker"))
        .count();
    assert!(
        marked * 10 >= highlighted.len() * 9,
        "{marked} of {} highlighted grants carry the marker",
        highlighted.len()
    );
    for pi in body["pis"].as_array().unwrap() {
        for g in pi["highlighted_grants"].as_array().unwrap() {
            assert!(highlighted.contains(&g.as_str().unwrap()));
        }
    }
    let (_, missing) = fetch(addr, "/api/predictions?topic=Z99/Z99Z");
    assert_eq!(missing["scores"].as_array().unwrap().len(), 0);
    assert_eq!(missing["skipped"][0]["topic"], serde_json::json!(["Z99", "Z99Z"]));
}

#[test]
fn requests_never_touch_the_registry() {
    let f = fixture();
    let before = f.registry().manifest().unwrap();
    let files = |dir: &std::path::Path| -> usize { walk(dir) };
    let count = files(&f.registry);
    let addr = spawn(state(ServiceConfig::default(), true));
    for path in ["/api/predictions", "/api/landscape?threshold=0.3", "/api/predictions?threshold=0.9"] {
        fetch(addr, path);
    }
    assert_eq!(f.registry().manifest().unwrap(), before);
    assert_eq!(files(&f.registry), count);
}

fn walk(dir: &std::path::Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p)
            } else {
                1
            }
        })
        .sum()
}

#[test]
fn entity_distribution_follows_the_filter() {
    let addr = spawn(state(ServiceConfig::default(), true));
    let (_, all) = fetch(addr, "/api/entity-distribution?doc_type=patent&dimension=assignee");
    let patents = fixture().snapshot.docs_of(fundscape::store::DocType::Patent).count();
    assert_eq!(all["documents"], patents);
    let total: u64 = all["bins"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert!(total as usize <= patents);
    let (_, some) = fetch(
        addr,
        &format!("/api/entity-distribution?doc_type=patent&dimension=assignee&field={PATENT_FIELD}&mode=direct"),
    );
    let n = some["documents"].as_u64().unwrap();
    assert!(n > 0 && (n as usize) < patents);
}

#[test]
fn static_assets_are_served_at_root() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>explorer</html>").unwrap();
    let config = ServiceConfig {
        static_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    };
    let addr = spawn(state(config, false));
    let r = get(addr, "/").unwrap();
    assert_eq!(r.status, 200);
    assert_eq!(r.text(), "<html>explorer</html>");
    let (r, _) = fetch(addr, "/api/health");
    assert_eq!(r.status, 200);
}
