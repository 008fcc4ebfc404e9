//! Human-readable summaries of result files: sep counts vs n per ε, slopes,
//! verdict tallies, measured separation thresholds and derived lower bounds.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde_json::Value;

fn f(v: &Value, key: &str) -> Option<f64> {
    v.get(key).and_then(Value::as_f64)
}

fn u(v: &Value, key: &str) -> Option<u64> {
    v.get(key).and_then(Value::as_u64)
}

fn s<'a>(v: &'a Value, key: &str) -> Option<&'a str> {
    v.get(key).and_then(Value::as_str)
}

pub fn render_report(jsonl: &str) -> Result<String> {
    let mut records: Vec<Value> = Vec::new();
    for (i, line) in jsonl.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(line).with_context(|| format!("bad record on line {}", i + 1))?,
        );
    }
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };

    for header in records.iter().filter(|r| s(r, "record") == Some("header")) {
        push(&mut out, format!(
            "run: {} on {} / {}   (version {}, scenario {})",
            s(header, "experiment").unwrap_or("?"),
            s(header, "space").unwrap_or("?"),
            s(header, "map").unwrap_or("?"),
            s(header, "version").unwrap_or("?"),
            s(header, "scenario_hash").map(|h| &h[..12]).unwrap_or("?"),
        ));
        if let Some(sp) = f(header, "hausdorff_spacing") {
            push(&mut out, format!("hausdorff sampling spacing: {sp}"));
        }
        if let Some(d) = f(header, "truncation_discarded_fan_diameter") {
            push(&mut out, format!("first discarded fan diameter: {d:.6}"));
        }
    }

    // separation counts: pivot epsilon x n
    let seps: Vec<&Value> = records
        .iter()
        .filter(|r| s(r, "record") == Some("sep"))
        .collect();
    if !seps.is_empty() {
        let mut ns: Vec<u64> = seps.iter().filter_map(|r| u(r, "n")).collect();
        ns.sort_unstable();
        ns.dedup();
        let mut by_eps: BTreeMap<String, BTreeMap<u64, u64>> = BTreeMap::new();
        for r in &seps {
            let eps = f(r, "epsilon").unwrap_or(f64::NAN);
            by_eps
                .entry(format!("{eps}"))
                .or_default()
                .insert(u(r, "n").unwrap_or(0), u(r, "count").unwrap_or(0));
        }
        push(&mut out, String::new());
        push(&mut out, "separated counts (net-relative lower bounds)".into());
        let head: Vec<String> = ns.iter().map(|n| format!("{n:>8}")).collect();
        push(&mut out, format!("{:>10} |{}", "eps \\ n", head.join("")));
        for (eps, row) in by_eps.iter().rev() {
            let cells: Vec<String> = ns
                .iter()
                .map(|n| {
                    row.get(n)
                        .map(|c| format!("{c:>8}"))
                        .unwrap_or_else(|| format!("{:>8}", "-"))
                })
                .collect();
            push(&mut out, format!("{eps:>10} |{}", cells.join("")));
        }
        // best single-horizon rate per epsilon; the fitted slope, not this
        // number, is the growth estimate
        push(&mut out, String::new());
        push(&mut out, "finite-horizon separation rates ln(count)/n (per epsilon)".into());
        for (eps, row) in by_eps.iter().rev() {
            let best = row
                .iter()
                .filter(|(n, _)| **n > 0)
                .map(|(n, c)| (*c as f64).ln() / *n as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                push(&mut out, format!("  eps {eps:>10}: {best:.6}"));
            }
        }
    }

    let slopes: Vec<&Value> = records
        .iter()
        .filter(|r| s(r, "record") == Some("slope"))
        .collect();
    if !slopes.is_empty() {
        push(&mut out, String::new());
        push(&mut out, "fitted growth slopes of ln(count) vs n".into());
        for r in slopes {
            match f(r, "slope") {
                Some(v) => push(
                    &mut out,
                    format!(
                        "  eps {:>10}: slope {v:.6}  (fit on n in [{}, {}])",
                        f(r, "epsilon").unwrap_or(f64::NAN),
                        u(r, "fit_n_lo").unwrap_or(0),
                        u(r, "fit_n_hi").unwrap_or(0)
                    ),
                ),
                None => push(
                    &mut out,
                    format!(
                        "  eps {:>10}: not enough n-values for a fit",
                        f(r, "epsilon").unwrap_or(f64::NAN)
                    ),
                ),
            }
        }
    }

    for r in records.iter().filter(|r| s(r, "record") == Some("witness5")) {
        push(&mut out, String::new());
        push(&mut out, format!(
            "fan witness: k={} m={} horizon={}  cardinality={} connected={}",
            u(r, "k").unwrap_or(0),
            u(r, "m").unwrap_or(0),
            u(r, "horizon").unwrap_or(0),
            u(r, "cardinality").unwrap_or(0),
            r.get("all_connected").and_then(Value::as_bool).unwrap_or(false),
        ));
        push(&mut out, format!(
            "  eps measured = {:.6} (target 1/k = {:.6}, met: {})  bound = {:.6} (ln k = {:.6})",
            f(r, "eps_measured").unwrap_or(f64::NAN),
            f(r, "eps_target").unwrap_or(f64::NAN),
            r.get("eps_meets_target").and_then(Value::as_bool).unwrap_or(false),
            f(r, "entropy_lower_bound").unwrap_or(f64::NAN),
            f(r, "bound_target").unwrap_or(f64::NAN),
        ));
    }

    for r in records.iter().filter(|r| s(r, "record") == Some("witness32")) {
        push(&mut out, String::new());
        push(&mut out, format!(
            "backward-orbit witness: {} points, horizon {}, tail depth {}  cardinality={}",
            u(r, "n_points").unwrap_or(0),
            u(r, "horizon_k").unwrap_or(0),
            u(r, "j_max").unwrap_or(0),
            u(r, "cardinality").unwrap_or(0),
        ));
        push(&mut out, format!(
            "  margin = {:.6}  eps measured = {:.6}  bound = {:.6}",
            f(r, "margin").unwrap_or(f64::NAN),
            f(r, "eps_measured").unwrap_or(f64::NAN),
            f(r, "entropy_lower_bound").unwrap_or(f64::NAN),
        ));
    }

    for r in records.iter().filter(|r| s(r, "record") == Some("tally")) {
        push(&mut out, String::new());
        push(&mut out, "pair verdicts".into());
        for key in ["distal", "proximal_only", "asymptotic", "li_yorke"] {
            push(&mut out, format!("  {key:>14}: {}", u(r, key).unwrap_or(0)));
        }
    }

    for r in records.iter().filter(|r| s(r, "record") == Some("omega")) {
        push(&mut out, String::new());
        push(&mut out, format!(
            "limit-set estimate ({}): {} points, diameter {:.6}, resolution {:.6}",
            s(r, "direction").unwrap_or("?"),
            u(r, "points").unwrap_or(0),
            f(r, "diameter").unwrap_or(f64::NAN),
            f(r, "resolution").unwrap_or(f64::NAN),
        ));
    }

    for r in records.iter().filter(|r| s(r, "record") == Some("omega_mask")) {
        push(&mut out, String::new());
        push(&mut out, format!(
            "non-wandering candidate: covered fraction {:.6} (delta {}, {} steps)",
            f(r, "covered_fraction").unwrap_or(f64::NAN),
            f(r, "delta").unwrap_or(f64::NAN),
            u(r, "n_steps").unwrap_or(0),
        ));
    }
    let comps: Vec<&Value> = records
        .iter()
        .filter(|r| s(r, "record") == Some("component"))
        .collect();
    if !comps.is_empty() {
        push(&mut out, format!("wandering components: {}", comps.len()));
        for r in comps {
            push(&mut out, format!(
                "  component {}: diameter {:.6}, best return q={} at d_H {:.6}",
                u(r, "index").unwrap_or(0),
                f(r, "diameter").unwrap_or(f64::NAN),
                u(r, "best_return_q").unwrap_or(0),
                f(r, "best_return_distance").unwrap_or(f64::NAN),
            ));
        }
    }

    for r in records.iter().filter(|r| s(r, "record") == Some("containment")) {
        push(&mut out, String::new());
        push(&mut out, format!(
            "containment check: {} components, {} violations",
            u(r, "components").unwrap_or(0),
            u(r, "violations").unwrap_or(0),
        ));
    }
    for r in records
        .iter()
        .filter(|r| s(r, "record") == Some("difference_component"))
    {
        push(&mut out, format!(
            "  difference component {}: returns={} best q={} d_H={:.6}",
            u(r, "component").unwrap_or(0),
            r.get("returns").and_then(Value::as_bool).unwrap_or(false),
            u(r, "best_q").unwrap_or(0),
            f(r, "best_distance").unwrap_or(f64::NAN),
        ));
    }

    let assertions: Vec<&Value> = records
        .iter()
        .filter(|r| s(r, "record") == Some("assertion"))
        .collect();
    if !assertions.is_empty() {
        push(&mut out, String::new());
        push(&mut out, "assertions".into());
        for r in assertions {
            push(&mut out, format!(
                "  [{}] {}: {}",
                if r.get("pass").and_then(Value::as_bool).unwrap_or(false) {
                    "pass"
                } else {
                    "FAIL"
                },
                s(r, "name").unwrap_or("?"),
                s(r, "detail").unwrap_or(""),
            ));
        }
    }

    if out.is_empty() {
        out.push_str("(no records)\n");
    }
    Ok(out)
}
