//! TREC qrels and run files.
//!
//! ```text
//! qrels:  <query_id> 0 <doc_id> <grade>
//! run:    <query_id> Q0 <doc_id> <rank> <score> <tag>
//! ```
//!
//! Fields are whitespace separated, blank lines are ignored. Run scores are
//! written with six decimals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use hybridsearch_core::metrics::{Qrels, RunFile};
use hybridsearch_core::RankedList;

use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    parse_qrels(&read(path)?, path)
}

/// `origin` is only used in error messages.
pub fn parse_qrels(text: &str, origin: impl AsRef<Path>) -> Result<Qrels> {
    let origin = origin.as_ref();
    let mut qrels = Qrels::new();
    for (n, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [query_id, _iteration, doc_id, grade] = fields[..] else {
            return Err(Error::parse(origin, n + 1, format!("expected 4 fields, found {}", fields.len())));
        };
        let grade: u32 = grade
            .parse()
            .map_err(|_| Error::parse(origin, n + 1, format!("grade {grade:?} is not a non-negative integer")))?;
        qrels
            .insert(query_id, doc_id, grade)
            .map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
    }
    Ok(qrels)
}

pub fn format_qrels(qrels: &Qrels) -> String {
    let mut out = String::new();
    for (q, d, g) in qrels.iter() {
        let _ = writeln!(out, "{q} 0 {d} {g}");
    }
    out
}

pub fn format_run(run: &RunFile) -> String {
    let mut out = String::new();
    for list in run.lists.values() {
        for hit in &list.hits {
            let _ = writeln!(
                out,
                "{} Q0 {} {} {:.6} {}",
                list.query_id, hit.doc_id, hit.rank, hit.score, run.tag
            );
        }
    }
    out
}

pub fn write_run(path: impl AsRef<Path>, run: &RunFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_run(run)).map_err(|e| Error::io(path, e))
}

pub fn read_run(path: impl AsRef<Path>) -> Result<RunFile> {
    let path = path.as_ref();
    parse_run(&read(path)?, path)
}

pub fn parse_run(text: &str, origin: impl AsRef<Path>) -> Result<RunFile> {
    let origin = origin.as_ref();
    let mut tag: Option<String> = None;
    // query -> (rank, doc, score, line)
    let mut rows: BTreeMap<String, Vec<(u32, String, f64, usize)>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [query_id, _q0, doc_id, rank, score, run_tag] = fields[..] else {
            return Err(Error::parse(origin, line_no, format!("expected 6 fields, found {}", fields.len())));
        };
        let rank: u32 = rank
            .parse()
            .ok()
            .filter(|r| *r >= 1)
            .ok_or_else(|| Error::parse(origin, line_no, format!("rank {rank:?} is not a positive integer")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(origin, line_no, format!("score {score:?} is not a finite number")))?;
        match &tag {
            None => tag = Some(run_tag.to_string()),
            Some(t) if t != run_tag => {
                return Err(Error::parse(origin, line_no, format!("run tag {run_tag:?} differs from {t:?}")));
            }
            Some(_) => {}
        }
        rows.entry(query_id.to_string())
            .or_default()
            .push((rank, doc_id.to_string(), score, line_no));
    }

    let mut run = RunFile::new(tag.unwrap_or_default());
    for (query_id, mut entries) in rows {
        entries.sort_by_key(|e| e.0);
        for (i, e) in entries.iter().enumerate() {
            if e.0 as usize != i + 1 {
                return Err(Error::parse(
                    origin,
                    e.3,
                    format!("query {query_id}: ranks must run 1..n without gaps or repeats"),
                ));
            }
        }
        let list = RankedList::from_ordered(
            query_id.clone(),
            entries.into_iter().map(|(_, d, s, _)| (d, s)).collect(),
        );
        list.validate()
            .map_err(|e| Error::format(origin, format!("query {query_id}: {e}")))?;
        run.insert(list);
    }
    Ok(run)
}
