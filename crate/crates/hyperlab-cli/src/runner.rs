//! Experiment orchestration: build the stage and the map from a scenario,
//! run the named experiment, stream records to `results.jsonl` (one JSON
//! object per line, flushed as produced) with a CSV mirror for the tabular
//! part, and evaluate assertions.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hyperlab_core::dynamics::{
    check_component_containment, check_difference_returns, classify_pair, nonwandering_estimate,
    omega_limit_estimate, wandering_components, ClassifyParams, OrbitDirection, PairLabel,
};
use hyperlab_core::entropy::{
    entropy_profile, fan_arc_witness, verify_separated, wandering_witness, witness_bound,
    SepMethod, WanderingWitnessParams,
};
use hyperlab_core::geometry::{EdgeId, GraphPoint, SubsetMask};
use hyperlab_core::hyperspace::{
    hyper_net, CompactSet, HausdorffConfig, HyperNet, NetConfig, NetMode,
};
use hyperlab_core::dynamics::detect_period;
use hyperlab_core::spaces::{
    build_circle, build_fan_map, build_fan_space, build_identity, build_interval, build_rotation,
    build_square_map, FanSpec, Homeo,
};
use hyperlab_core::{Space64, VERSION};

use crate::scenario::{
    render, ConditionKind, ExperimentSpec, MapSpec, MaskItem, MethodSpec, NetModeSpec, PointSpec,
    Scenario, SpaceSpec,
};

pub struct RunConfig {
    pub assert_mode: bool,
    pub out_dir: PathBuf,
}

pub struct RunOutcome {
    pub records_written: usize,
    pub assertion_failures: Vec<String>,
    pub results_path: PathBuf,
    pub csv_path: PathBuf,
}

enum Stage {
    Plain(Space64),
    Fan(hyperlab_core::FanSpace64),
}

impl Stage {
    fn space(&self) -> &Space64 {
        match self {
            Stage::Plain(s) => s,
            Stage::Fan(f) => f.space(),
        }
    }
}

fn build_stage(spec: &SpaceSpec) -> Result<Stage> {
    Ok(match spec {
        SpaceSpec::Interval => Stage::Plain(build_interval()),
        SpaceSpec::Circle { circumference } => Stage::Plain(build_circle(*circumference)?),
        SpaceSpec::Star {
            branches,
            branch_length,
        } => Stage::Plain(hyperlab_core::spaces::build_star(*branches, *branch_length)?),
        SpaceSpec::Fan { n_max } => Stage::Fan(build_fan_space(FanSpec::new(*n_max)?)?),
    })
}

fn build_map(stage: &Stage, spec: &MapSpec) -> Result<Homeo<f64>> {
    Ok(match (stage, spec) {
        (_, MapSpec::Identity) => build_identity(stage.space()),
        (Stage::Plain(s), MapSpec::Square) => build_square_map(s)?,
        (Stage::Plain(s), MapSpec::Rotation { alpha }) => build_rotation(s, *alpha)?,
        (Stage::Fan(f), MapSpec::FanRotation) => build_fan_map(f),
        _ => bail!("map does not act on this space"),
    })
}

fn to_point(space: &Space64, p: &PointSpec) -> Result<GraphPoint<f64>> {
    if p.edge >= space.n_edges() {
        bail!(
            "point references edge {} but the space has {} edges",
            p.edge,
            space.n_edges()
        );
    }
    Ok(GraphPoint::new(p.edge, p.t))
}

fn to_compact_set(space: &Space64, items: &[MaskItem]) -> Result<CompactSet<f64>> {
    let mut mask = SubsetMask::empty(space.n_edges(), 0.0);
    for item in items {
        if item.edge >= space.n_edges() {
            bail!(
                "mask references edge {} but the space has {} edges",
                item.edge,
                space.n_edges()
            );
        }
        mask.add_interval(EdgeId(item.edge), item.lo, item.hi);
    }
    Ok(CompactSet::new(space, mask)?)
}

fn mask_string(mask: &SubsetMask<f64>) -> String {
    mask.iter()
        .map(|(e, iv)| {
            if iv.is_degenerate() {
                format!("{}:{}", e.0, iv.lo)
            } else {
                format!("{}:{}:{}", e.0, iv.lo, iv.hi)
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Streams records to disk as they are produced.
struct Sink {
    jsonl: BufWriter<fs::File>,
    csv: BufWriter<fs::File>,
    csv_header_written: bool,
    records: usize,
}

impl Sink {
    fn new(results_path: &Path, csv_path: &Path) -> Result<Self> {
        Ok(Self {
            jsonl: BufWriter::new(
                fs::File::create(results_path)
                    .with_context(|| format!("creating {}", results_path.display()))?,
            ),
            csv: BufWriter::new(
                fs::File::create(csv_path)
                    .with_context(|| format!("creating {}", csv_path.display()))?,
            ),
            csv_header_written: false,
            records: 0,
        })
    }

    fn emit(&mut self, value: &Value) -> Result<()> {
        serde_json::to_writer(&mut self.jsonl, value)?;
        self.jsonl.write_all(b"\n")?;
        self.jsonl.flush()?;
        self.records += 1;
        Ok(())
    }

    fn csv_row(&mut self, header: &str, row: &str) -> Result<()> {
        if !self.csv_header_written {
            writeln!(self.csv, "{header}")?;
            self.csv_header_written = true;
        }
        writeln!(self.csv, "{row}")?;
        self.csv.flush()?;
        Ok(())
    }
}

struct Asserter {
    active: bool,
    failures: Vec<String>,
    checks: Vec<Value>,
}

impl Asserter {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(json!({
            "record": "assertion",
            "name": name,
            "pass": pass,
            "detail": detail,
        }));
        if self.active && !pass {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

pub fn scenario_hash(s: &Scenario) -> String {
    let mut hasher = Sha256::new();
    hasher.update(render(s).as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_scenario(scenario: &Scenario, cfg: &RunConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let results_path = cfg.out_dir.join("results.jsonl");
    let csv_path = cfg.out_dir.join("results.csv");
    let mut sink = Sink::new(&results_path, &csv_path)?;

    let stage = build_stage(&scenario.space)?;
    let homeo = build_map(&stage, &scenario.map)?;
    let space = stage.space();
    let spacing = scenario
        .hausdorff_spacing
        .unwrap_or_else(|| space.diameter() * 1e-3);
    let hcfg = HausdorffConfig::with_spacing(spacing);

    let mut header = json!({
        "record": "header",
        "version": VERSION,
        "scenario_hash": scenario_hash(scenario),
        "experiment": scenario.experiment.kind(),
        "space": space.name,
        "space_diameter": space.diameter(),
        "map": homeo.name,
        "hausdorff_spacing": spacing,
        "seed": scenario.experiment.seed(),
        "certification": "all separation counts are net-relative lower bounds",
    });
    if let Stage::Fan(fan) = &stage {
        header["truncation_discarded_fan_diameter"] = json!(fan.discarded_fan_diameter());
    }
    sink.emit(&header)?;

    let mut asserter = Asserter {
        active: cfg.assert_mode,
        failures: Vec::new(),
        checks: Vec::new(),
    };

    match &scenario.experiment {
        ExperimentSpec::EntropyProfile {
            epsilon_list,
            n_list,
            delta,
            budget,
            mode,
            method,
            max_cardinality,
            seed,
            inject_points,
            inject_horizon,
            inject_j_max,
            assert_slope_max,
            assert_slope_min,
        } => {
            let net_mode = match mode {
                NetModeSpec::Full => NetMode::Full,
                NetModeSpec::Connected => NetMode::Connected,
            };
            let net_cfg = NetConfig {
                max_cardinality: *max_cardinality,
                ..NetConfig::default()
            };
            // budget 0 means: profile the injected witness family alone
            let mut net = if *budget == 0 {
                HyperNet {
                    elements: Vec::new(),
                    mode: net_mode,
                    delta: *delta,
                }
            } else {
                hyper_net(space, *delta, net_mode, *budget, *seed, net_cfg)?
            };
            if !inject_points.is_empty() {
                let pts: Vec<GraphPoint<f64>> = inject_points
                    .iter()
                    .map(|p| to_point(space, p))
                    .collect::<Result<_>>()?;
                let witness = wandering_witness(
                    space,
                    &homeo,
                    &pts,
                    *inject_horizon,
                    WanderingWitnessParams {
                        j_max: *inject_j_max,
                        alpha_window: (*inject_j_max / 4).max(1),
                    },
                )?;
                sink.emit(&json!({
                    "record": "injected_witness",
                    "cardinality": witness.sets.len(),
                    "margin": witness.margin,
                    "tail_resolution": witness.tail_resolution,
                }))?;
                net.elements.extend(witness.sets);
            }
            sink.emit(&json!({"record": "net", "elements": net.elements.len(),
                              "mode": if net_mode == NetMode::Full {"full"} else {"connected"},
                              "delta": delta}))?;
            let sep_method = match method {
                MethodSpec::Exact => SepMethod::Exact,
                MethodSpec::Greedy => SepMethod::Greedy,
            };
            let profile =
                entropy_profile(space, &homeo, &net, epsilon_list, n_list, sep_method, &hcfg)?;
            for cell in &profile.cells {
                sink.emit(&json!({
                    "record": "sep",
                    "epsilon": cell.epsilon,
                    "n": cell.n,
                    "count": cell.count,
                    "method": cell.method.tag(),
                    "fell_back": cell.fell_back,
                    "witness": cell.witness,
                }))?;
                sink.csv_row(
                    "record,epsilon,n,count,method,fell_back",
                    &format!(
                        "sep,{},{},{},{},{}",
                        cell.epsilon,
                        cell.n,
                        cell.count,
                        cell.method.tag(),
                        cell.fell_back
                    ),
                )?;
            }
            for fit in &profile.slopes {
                sink.emit(&json!({
                    "record": "slope",
                    "epsilon": fit.epsilon,
                    "slope": fit.slope,
                    "fit_n_lo": fit.fit_n_lo,
                    "fit_n_hi": fit.fit_n_hi,
                }))?;
                if let Some(slope) = fit.slope {
                    if let Some(cap) = assert_slope_max {
                        asserter.check(
                            "slope_below_cap",
                            slope < *cap,
                            format!("epsilon {}: slope {} vs cap {}", fit.epsilon, slope, cap),
                        );
                    }
                    if let Some(floor) = assert_slope_min {
                        asserter.check(
                            "slope_above_floor",
                            slope >= *floor,
                            format!("epsilon {}: slope {} vs floor {}", fit.epsilon, slope, floor),
                        );
                    }
                }
            }
        }

        ExperimentSpec::WitnessExample5 {
            k,
            m,
            horizon,
            assert_eps_at_least,
        } => {
            let Stage::Fan(fan) = &stage else {
                bail!("witness-example5 needs the fan space");
            };
            let sets = fan_arc_witness(fan, *k, *m)?;
            let cardinality = sets.len();
            let all_connected = sets.iter().all(|s| s.connected);
            let eps_target = 1.0 / *k as f64;
            let check = verify_separated(space, &homeo, &sets, *horizon, eps_target, &hcfg)?;
            let bound = witness_bound::<f64>(cardinality, *horizon);
            let bound_target = (*k as f64).ln();
            let record = json!({
                "record": "witness5",
                "k": k,
                "m": m,
                "horizon": horizon,
                "cardinality": cardinality,
                "all_connected": all_connected,
                "eps_measured": check.eps_measured,
                "eps_target": eps_target,
                "eps_meets_target": check.is_separated,
                "measurement_error_bound": check.error_bound,
                "entropy_lower_bound": bound,
                "bound_target": bound_target,
            });
            sink.emit(&record)?;
            sink.csv_row(
                "record,k,m,horizon,cardinality,all_connected,eps_measured,eps_target,eps_meets_target,entropy_lower_bound",
                &format!(
                    "witness5,{k},{m},{horizon},{cardinality},{all_connected},{},{eps_target},{},{bound}",
                    check.eps_measured, check.is_separated
                ),
            )?;
            let expected_card = k.pow(2 * *m as u32);
            asserter.check(
                "cardinality",
                cardinality == expected_card,
                format!("{cardinality} sets vs k^(2m) = {expected_card}"),
            );
            asserter.check(
                "all_connected",
                all_connected,
                "every witness set must be connected".into(),
            );
            asserter.check(
                "eps_positive",
                check.eps_measured > 0.0,
                format!("eps_measured = {}", check.eps_measured),
            );
            asserter.check(
                "bound_is_ln_k",
                (bound - bound_target).abs() <= 1e-12,
                format!("bound {} vs ln k {}", bound, bound_target),
            );
            if let Some(floor) = assert_eps_at_least {
                asserter.check(
                    "eps_at_least",
                    check.eps_measured >= *floor,
                    format!("eps_measured {} vs floor {}", check.eps_measured, floor),
                );
            }
        }

        ExperimentSpec::WitnessLemma32 {
            points,
            horizon_k,
            j_max,
            alpha_window,
            assert_slope_min,
        } => {
            let pts: Vec<GraphPoint<f64>> = points
                .iter()
                .map(|p| to_point(space, p))
                .collect::<Result<_>>()?;
            let witness = wandering_witness(
                space,
                &homeo,
                &pts,
                *horizon_k,
                WanderingWitnessParams {
                    j_max: *j_max,
                    alpha_window: *alpha_window,
                },
            )?;
            let cardinality = witness.sets.len();
            let check = verify_separated(space, &homeo, &witness.sets, *horizon_k, 0.0, &hcfg)?;
            let bound = witness_bound::<f64>(cardinality, *horizon_k);
            sink.emit(&json!({
                "record": "witness32",
                "n_points": points.len(),
                "horizon_k": horizon_k,
                "j_max": j_max,
                "cardinality": cardinality,
                "margin": witness.margin,
                "tail_resolution": witness.tail_resolution,
                "eps_measured": check.eps_measured,
                "measurement_error_bound": check.error_bound,
                "entropy_lower_bound": bound,
            }))?;
            sink.csv_row(
                "record,n_points,horizon_k,j_max,cardinality,margin,eps_measured,entropy_lower_bound",
                &format!(
                    "witness32,{},{horizon_k},{j_max},{cardinality},{},{},{bound}",
                    points.len(),
                    witness.margin,
                    check.eps_measured
                ),
            )?;
            let expected_card = 1usize << (points.len() * horizon_k);
            asserter.check(
                "cardinality",
                cardinality == expected_card,
                format!("{cardinality} sets vs 2^(n*k) = {expected_card}"),
            );
            asserter.check(
                "margin_positive",
                witness.margin > 0.0,
                format!("margin = {}", witness.margin),
            );
            asserter.check(
                "eps_at_least_margin",
                check.eps_measured >= witness.margin * (1.0 - 1e-9),
                format!("eps_measured {} vs margin {}", check.eps_measured, witness.margin),
            );
            if let Some(floor) = assert_slope_min {
                asserter.check(
                    "bound_above_floor",
                    bound >= *floor,
                    format!("bound {} vs floor {}", bound, floor),
                );
            }
        }

        ExperimentSpec::LiyorkeScan {
            pairs,
            delta,
            horizon,
            tail_window,
            delta_prox,
            delta_asym,
            seed,
        } => {
            let net: HyperNet<f64> = hyper_net(
                space,
                *delta,
                NetMode::Connected,
                2 * pairs,
                *seed,
                NetConfig::default(),
            )?;
            let params = ClassifyParams {
                horizon: *horizon,
                tail_window: *tail_window,
                delta_prox: *delta_prox,
                delta_asym: *delta_asym,
            };
            use rayon::prelude::*;
            let verdicts: Vec<_> = (0..*pairs)
                .into_par_iter()
                .map(|i| {
                    classify_pair(
                        space,
                        &homeo,
                        &net.elements[2 * i],
                        &net.elements[2 * i + 1],
                        params,
                        &hcfg,
                    )
                })
                .collect::<hyperlab_core::Result<_>>()?;
            let mut tally = [0usize; 4];
            for (i, v) in verdicts.iter().enumerate() {
                let slot = match v.label {
                    PairLabel::Distal => 0,
                    PairLabel::ProximalOnly => 1,
                    PairLabel::Asymptotic => 2,
                    PairLabel::LiYorke => 3,
                };
                tally[slot] += 1;
                sink.emit(&json!({
                    "record": "pair",
                    "index": i,
                    "label": v.label.tag(),
                    "min_over_horizon": v.min_over_horizon,
                    "tail_max": v.tail_max,
                }))?;
                sink.csv_row(
                    "record,index,label,min_over_horizon,tail_max",
                    &format!(
                        "pair,{i},{},{},{}",
                        v.label.tag(),
                        v.min_over_horizon,
                        v.tail_max
                    ),
                )?;
            }
            sink.emit(&json!({
                "record": "tally",
                "distal": tally[0],
                "proximal_only": tally[1],
                "asymptotic": tally[2],
                "li_yorke": tally[3],
            }))?;
            asserter.check(
                "no_li_yorke",
                tally[3] == 0,
                format!("{} Li-Yorke labels among {} pairs", tally[3], pairs),
            );
        }

        ExperimentSpec::OmegaReport {
            point,
            burn_in,
            window,
            delta,
            backward,
        } => {
            let p = to_point(space, point)?;
            let direction = if *backward {
                OrbitDirection::Backward
            } else {
                OrbitDirection::Forward
            };
            let est = omega_limit_estimate(space, &homeo, &p, *burn_in, *window, *delta, direction)?;
            let sampled = hyperlab_core::hyperspace::SampledSet::build(space, &est.set.mask, spacing);
            let diameter = hyperlab_core::hyperspace::diameter_sampled(space, &sampled);
            sink.emit(&json!({
                "record": "omega",
                "direction": if *backward { "backward" } else { "forward" },
                "seed_point": format!("{}:{}", p.edge.0, p.t),
                "points": est.set.mask.iter().count(),
                "diameter": diameter,
                "resolution": est.set.resolution(),
                "mask": mask_string(&est.set.mask),
            }))?;
            sink.csv_row(
                "record,direction,points,diameter,resolution",
                &format!(
                    "omega,{},{},{diameter},{}",
                    if *backward { "backward" } else { "forward" },
                    est.set.mask.iter().count(),
                    est.set.resolution()
                ),
            )?;
        }

        ExperimentSpec::ComponentsReport {
            delta,
            n_steps,
            assert_components,
            assert_covers_space,
        } => {
            let omega = nonwandering_estimate(space, &homeo, *delta, *n_steps)?;
            let covered = omega.total_length(space) / space.total_length();
            sink.emit(&json!({
                "record": "omega_mask",
                "delta": delta,
                "n_steps": n_steps,
                "covered_fraction": covered,
                "mask": mask_string(&omega),
            }))?;
            let comps = wandering_components(space, &homeo, *delta, *n_steps, &hcfg)?;
            for (i, c) in comps.iter().enumerate() {
                sink.emit(&json!({
                    "record": "component",
                    "index": i,
                    "diameter": c.diameter,
                    "best_return_q": c.best_return.map(|(q, _)| q),
                    "best_return_distance": c.best_return.map(|(_, d)| d),
                    "mask": mask_string(&c.mask),
                }))?;
                sink.csv_row(
                    "record,index,diameter,best_return_q,best_return_distance",
                    &format!(
                        "component,{i},{},{},{}",
                        c.diameter,
                        c.best_return.map(|(q, _)| q as i64).unwrap_or(-1),
                        c.best_return.map(|(_, d)| d).unwrap_or(f64::NAN)
                    ),
                )?;
            }
            if let Some(expected) = assert_components {
                asserter.check(
                    "component_count",
                    comps.len() == *expected,
                    format!("{} components vs expected {}", comps.len(), expected),
                );
            }
            if *assert_covers_space {
                asserter.check(
                    "covers_space",
                    (covered - 1.0).abs() < 1e-9,
                    format!("covered fraction {covered}"),
                );
            }
        }

        ExperimentSpec::ConditionCheck {
            condition,
            a_mask,
            b_mask,
            p_max,
            tol,
            q_max,
            delta,
            n_steps,
        } => {
            let a = to_compact_set(space, a_mask)?;
            let period = detect_period(space, &homeo, &a, *p_max, *tol, &hcfg);
            let Some(period) = period else {
                bail!("the set `a_mask` is not periodic within p_max = {p_max} at tol = {tol}");
            };
            sink.emit(&json!({"record": "period", "set": "a", "period": period}))?;
            match condition {
                ConditionKind::Containment => {
                    let comps: Vec<SubsetMask<f64>> =
                        wandering_components(space, &homeo, *delta, *n_steps, &hcfg)?
                            .into_iter()
                            .map(|c| c.mask)
                            .collect();
                    let violations = check_component_containment(space, &a, &comps, &hcfg);
                    sink.emit(&json!({
                        "record": "containment",
                        "components": comps.len(),
                        "violations": violations.len(),
                    }))?;
                    for v in &violations {
                        sink.emit(&json!({
                            "record": "containment_violation",
                            "component": v.component,
                            "contact": v.contact,
                            "escape": v.escape,
                        }))?;
                        sink.csv_row(
                            "record,component,contact,escape",
                            &format!("containment_violation,{},{},{}", v.component, v.contact, v.escape),
                        )?;
                    }
                    asserter.check(
                        "containment_holds",
                        violations.is_empty(),
                        format!("{} violations", violations.len()),
                    );
                }
                ConditionKind::Returns => {
                    let b = to_compact_set(space, b_mask)?;
                    if detect_period(space, &homeo, &b, *p_max, *tol, &hcfg).is_none() {
                        bail!("the set `b_mask` is not periodic within p_max = {p_max}");
                    }
                    let report =
                        check_difference_returns(space, &homeo, &a, &b, *q_max, *tol, &hcfg)?;
                    for r in &report.components {
                        sink.emit(&json!({
                            "record": "difference_component",
                            "component": r.component,
                            "returns": r.returns,
                            "best_q": r.best_q,
                            "best_distance": r.best_distance,
                        }))?;
                        sink.csv_row(
                            "record,component,returns,best_q,best_distance",
                            &format!(
                                "difference_component,{},{},{},{}",
                                r.component, r.returns, r.best_q, r.best_distance
                            ),
                        )?;
                    }
                    asserter.check(
                        "all_components_return",
                        report.all_return,
                        format!(
                            "{} of {} components returned",
                            report.components.iter().filter(|r| r.returns).count(),
                            report.components.len()
                        ),
                    );
                }
            }
        }
    }

    for check in &asserter.checks {
        sink.emit(check)?;
    }
    sink.emit(&json!({
        "record": "end",
        "records": sink.records + 1,
        "assertion_failures": asserter.failures.len(),
    }))?;

    Ok(RunOutcome {
        records_written: sink.records,
        assertion_failures: asserter.failures,
        results_path,
        csv_path,
    })
}
