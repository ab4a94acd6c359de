//! Table corpus runner: computed Π̃ beside the golden values.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use zdense::density::primes_for_dense;
use zdense::group::catalog_spec;
use zdense::params::Params;
use zdense::Error;

use crate::{io_err, Failure};

const GOLDEN: &str = include_str!("../data/golden.json");

struct Row {
    family: String,
    group: String,
    expected: Vec<u64>,
}

fn parse_rows(text: &str) -> Result<Vec<Row>, Failure> {
    let schema = |m: &str| Failure { error: Error::Schema(m.into()) };
    let v: Value = serde_json::from_str(text).map_err(|e| schema(&e.to_string()))?;
    let rows = v.get("rows").and_then(Value::as_array).ok_or_else(|| schema("golden file needs `rows`"))?;
    rows.iter()
        .map(|r| {
            let family = r.get("family").and_then(Value::as_str).ok_or_else(|| schema("row needs `family`"))?.to_string();
            let group = r.get("group").and_then(Value::as_str).ok_or_else(|| schema("row needs `group`"))?.to_string();
            let expected = r
                .get("pi_tilde")
                .and_then(Value::as_array)
                .and_then(|xs| xs.iter().map(Value::as_u64).collect::<Option<Vec<_>>>())
                .ok_or_else(|| schema("row needs integer list `pi_tilde`"))?;
            Ok(Row { family, group, expected })
        })
        .collect()
}

/// Runs every row; returns whether all of them matched.
pub fn run(golden: Option<&Path>, family: Option<&str>, seed: u64) -> Result<bool, Failure> {
    let text = match golden {
        Some(p) => fs::read_to_string(p).map_err(io_err)?,
        None => GOLDEN.to_string(),
    };
    let params = Params::with_seed(seed);
    let mut all = true;
    let mut out = Vec::new();
    for row in parse_rows(&text)? {
        if family.is_some_and(|f| f != row.family) {
            continue;
        }
        let start = Instant::now();
        let g = catalog_spec(&row.group)?;
        let (computed, error) = match primes_for_dense(&g, &params) {
            Ok(r) => (Some(r.pi_tilde), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let matched = computed.as_ref() == Some(&row.expected);
        all &= matched;
        eprintln!(
            "{:<4} {:<12} expected {:?} computed {:?} {} ({:.1}s)",
            row.family,
            row.group,
            row.expected,
            computed.as_deref().unwrap_or(&[]),
            if matched { "ok" } else { "MISMATCH" },
            start.elapsed().as_secs_f64()
        );
        out.push(json!({
            "family": row.family,
            "group": row.group,
            "expected": row.expected,
            "computed": computed,
            "error": error,
            "match": matched,
        }));
    }
    println!("{}", serde_json::to_string_pretty(&json!({"command": "corpus", "seed": seed, "rows": out, "all_match": all})).expect("json"));
    Ok(all)
}
