//! Human-readable tables and the structured metric report.
//!
//! The JSON metric report:
//!
//! ```json
//! {
//!   "schema": "hybridsearch.metrics/v1",
//!   "run_tag": "b5",
//!   "cutoff": 10,
//!   "queries": [{"query_id": "q1", "ndcg": 0.8597, "precision": 0.2, "mrr": 1.0,
//!                "map": 0.75, "hit_rate": 1.0, "ild": 0.41, "ild_degenerate": false}],
//!   "summary": {"evaluated": 1, "skipped": [], "ndcg": ..., "precision": ..., ...}
//! }
//! ```

use std::fmt::Write as _;

use hybridsearch_core::metrics::{MetricReport, MetricValues};
use serde_json::{json, Value};

use crate::runner::{Bench, Sweep};

pub const METRICS_SCHEMA: &str = "hybridsearch.metrics/v1";

fn values_json(v: &MetricValues) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("ndcg".into(), json!(v.ndcg));
    m.insert("precision".into(), json!(v.precision));
    m.insert("mrr".into(), json!(v.mrr));
    m.insert("map".into(), json!(v.map));
    m.insert("hit_rate".into(), json!(v.hit_rate));
    m.insert("ild".into(), json!(v.ild));
    m
}

pub fn metrics_json(report: &MetricReport) -> Value {
    let queries: Vec<Value> = report
        .per_query
        .iter()
        .map(|q| {
            let mut m = serde_json::Map::new();
            m.insert("query_id".into(), json!(q.query_id));
            m.extend(values_json(&q.values));
            m.insert("ild_degenerate".into(), json!(q.ild_degenerate));
            Value::Object(m)
        })
        .collect();
    let mut summary = serde_json::Map::new();
    summary.insert("evaluated".into(), json!(report.evaluated()));
    summary.insert("skipped".into(), json!(report.skipped));
    summary.extend(values_json(&report.mean));
    json!({
        "schema": METRICS_SCHEMA,
        "run_tag": report.run_tag,
        "cutoff": report.cutoff,
        "queries": queries,
        "summary": summary,
    })
}

pub fn metrics_text(report: &MetricReport) -> String {
    let k = report.cutoff;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>9} {:>9} {:>9} {:>9} {:>11} {:>9}",
        "query",
        format!("ndcg@{k}"),
        format!("p@{k}"),
        format!("mrr@{k}"),
        format!("map@{k}"),
        format!("hitrate@{k}"),
        format!("ild@{k}")
    );
    let row = |out: &mut String, name: &str, v: &MetricValues| {
        let _ = writeln!(
            out,
            "{:<16} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>11.6} {:>9.6}",
            name, v.ndcg, v.precision, v.mrr, v.map, v.hit_rate, v.ild
        );
    };
    for q in &report.per_query {
        row(&mut out, &q.query_id, &q.values);
    }
    row(&mut out, "mean", &report.mean);
    let _ = writeln!(
        out,
        "run {}: {} queries evaluated, {} skipped without judgments",
        report.run_tag,
        report.evaluated(),
        report.skipped.len()
    );
    out
}

pub fn sweep_text(sweep: &Sweep) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>11} {:>9} {:>9} {:>9}", "alpha_query", "ndcg@10", "p@10", "ild@10");
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{:>11.2} {:>9.4} {:>9.4} {:>9.4}",
            r.alpha_query, r.ndcg, r.precision, r.ild
        );
    }
    for w in &sweep.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn bench_text(bench: &Bench) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>10} {:>10} {:>14} {:>14} {:>14}",
        "method", "avg_ms", "p95_ms", "avg_ms+encode", "p95_ms+encode", "index_queries"
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
    for r in &bench.rows {
        let _ = writeln!(
            out,
            "{:<16} {:>10.3} {:>10.3} {:>14} {:>14} {:>14.2}",
            format!("{} ({})", r.method, r.label),
            r.avg_ms,
            r.p95_ms,
            opt(r.encoded_avg_ms),
            opt(r.encoded_p95_ms),
            r.index_queries_per_search
        );
    }
    let _ = writeln!(out, "{} queries x {} rounds", bench.queries, bench.rounds);
    out
}
