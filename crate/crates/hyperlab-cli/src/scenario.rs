//! Scenario file format: flat key-value sections `[space]`, `[map]`,
//! `[experiment]`, `[params]`, `[output]`. Keys are lowercase snake case,
//! lists are comma-separated, `#` starts a comment. Parsing reports every
//! error with its line number; `render` emits the canonical form, and
//! `parse(render(s)) == s`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub type ParseResult<T> = Result<T, Vec<ParseError>>;

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Interval,
    Circle { circumference: f64 },
    Star { branches: usize, branch_length: f64 },
    Fan { n_max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Identity,
    Square,
    Rotation { alpha: f64 },
    FanRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetModeSpec {
    Full,
    Connected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub edge: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskItem {
    pub edge: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentSpec {
    EntropyProfile {
        epsilon_list: Vec<f64>,
        n_list: Vec<usize>,
        delta: f64,
        budget: usize,
        mode: NetModeSpec,
        method: MethodSpec,
        max_cardinality: usize,
        seed: u64,
        inject_points: Vec<PointSpec>,
        inject_horizon: usize,
        inject_j_max: usize,
        assert_slope_max: Option<f64>,
        assert_slope_min: Option<f64>,
    },
    WitnessExample5 {
        k: usize,
        m: usize,
        horizon: usize,
        assert_eps_at_least: Option<f64>,
    },
    WitnessLemma32 {
        points: Vec<PointSpec>,
        horizon_k: usize,
        j_max: usize,
        alpha_window: usize,
        assert_slope_min: Option<f64>,
    },
    LiyorkeScan {
        pairs: usize,
        delta: f64,
        horizon: usize,
        tail_window: usize,
        delta_prox: f64,
        delta_asym: f64,
        seed: u64,
    },
    OmegaReport {
        point: PointSpec,
        burn_in: usize,
        window: usize,
        delta: f64,
        backward: bool,
    },
    ComponentsReport {
        delta: f64,
        n_steps: usize,
        assert_components: Option<usize>,
        assert_covers_space: bool,
    },
    ConditionCheck {
        condition: ConditionKind,
        a_mask: Vec<MaskItem>,
        b_mask: Vec<MaskItem>,
        p_max: usize,
        tol: f64,
        q_max: usize,
        delta: f64,
        n_steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Containment,
    Returns,
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::EntropyProfile { .. } => "entropy-profile",
            ExperimentSpec::WitnessExample5 { .. } => "witness-example5",
            ExperimentSpec::WitnessLemma32 { .. } => "witness-lemma32",
            ExperimentSpec::LiyorkeScan { .. } => "liyorke-scan",
            ExperimentSpec::OmegaReport { .. } => "omega-report",
            ExperimentSpec::ComponentsReport { .. } => "components-report",
            ExperimentSpec::ConditionCheck { .. } => "condition-check",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentSpec::EntropyProfile { seed, .. } => Some(*seed),
            ExperimentSpec::LiyorkeScan { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: SpaceSpec,
    pub map: MapSpec,
    pub experiment: ExperimentSpec,
    /// Hausdorff sampling spacing; `None` means one thousandth of the space
    /// diameter.
    pub hausdorff_spacing: Option<f64>,
    pub output_dir: Option<String>,
}

// ---------------------------------------------------------------------------
// raw section parsing

struct RawScenario {
    // section -> key -> (value, line)
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

fn parse_sections(text: &str) -> ParseResult<RawScenario> {
    let mut errors = Vec::new();
    let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !["space", "map", "experiment", "params", "output"].contains(&name.as_str()) {
                errors.push(ParseError {
                    line: line_no,
                    message: format!("unknown section [{name}]"),
                });
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(ParseError {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
            continue;
        };
        let Some(section) = current.clone() else {
            errors.push(ParseError {
                line: line_no,
                message: "key outside any section".into(),
            });
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let entries = sections.entry(section).or_default();
        match entries.entry(key) {
            std::collections::btree_map::Entry::Occupied(e) => errors.push(ParseError {
                line: line_no,
                message: format!("duplicate key `{}`", e.key()),
            }),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert((value, line_no));
            }
        }
    }
    if errors.is_empty() {
        Ok(RawScenario { sections })
    } else {
        Err(errors)
    }
}

/// Typed access to one section, collecting errors with line numbers.
struct SectionReader<'a> {
    name: &'a str,
    entries: BTreeMap<String, (String, usize)>,
    taken: std::cell::RefCell<Vec<String>>,
    errors: &'a mut Vec<ParseError>,
}

impl<'a> SectionReader<'a> {
    fn get(&self, key: &str) -> Option<(String, usize)> {
        self.taken.borrow_mut().push(key.to_string());
        self.entries.get(key).cloned()
    }

    fn require(&mut self, key: &str) -> Option<(String, usize)> {
        let v = self.get(key);
        if v.is_none() {
            self.errors.push(ParseError {
                line: 0,
                message: format!("[{}] is missing required key `{key}`", self.name),
            });
        }
        v
    }

    fn push_err(&mut self, line: usize, message: String) {
        self.errors.push(ParseError { line, message });
    }

    fn finish(self) {
        let taken = self.taken.borrow();
        for (key, (_, line)) in &self.entries {
            if !taken.contains(key) {
                self.errors.push(ParseError {
                    line: *line,
                    message: format!("unknown key `{key}` in [{}]", self.name),
                });
            }
        }
    }
}

macro_rules! typed_getter {
    ($fn_name:ident, $ty:ty, $what:literal) => {
        fn $fn_name(reader: &mut SectionReader<'_>, key: &str, default: Option<$ty>) -> Option<$ty> {
            match reader.get(key) {
                Some((raw, line)) => match raw.parse::<$ty>() {
                    Ok(v) => Some(v),
                    Err(_) => {
                        reader.push_err(line, format!("`{key}` must be {}, got `{raw}`", $what));
                        None
                    }
                },
                None => default,
            }
        }
    };
}

typed_getter!(get_f64, f64, "a number");
typed_getter!(get_usize, usize, "a non-negative integer");
typed_getter!(get_bool, bool, "true or false");

fn require_f64(reader: &mut SectionReader<'_>, key: &str) -> Option<f64> {
    let present = reader.require(key)?;
    match present.0.parse::<f64>() {
        Ok(v) => Some(v),
        Err(_) => {
            reader.push_err(present.1, format!("`{key}` must be a number"));
            None
        }
    }
}

fn require_usize(reader: &mut SectionReader<'_>, key: &str) -> Option<usize> {
    let present = reader.require(key)?;
    match present.0.parse::<usize>() {
        Ok(v) => Some(v),
        Err(_) => {
            reader.push_err(present.1, format!("`{key}` must be a non-negative integer"));
            None
        }
    }
}

fn get_f64_list(reader: &mut SectionReader<'_>, key: &str) -> Option<(Vec<f64>, usize)> {
    let (raw, line) = reader.require(key)?;
    let mut out = Vec::new();
    for item in raw.split(',') {
        match item.trim().parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) => {
                reader.push_err(line, format!("`{key}` contains a non-number `{}`", item.trim()));
                return None;
            }
        }
    }
    Some((out, line))
}

fn get_usize_list(reader: &mut SectionReader<'_>, key: &str) -> Option<(Vec<usize>, usize)> {
    let (raw, line) = reader.require(key)?;
    let mut out = Vec::new();
    for item in raw.split(',') {
        match item.trim().parse::<usize>() {
            Ok(v) => out.push(v),
            Err(_) => {
                reader.push_err(
                    line,
                    format!("`{key}` contains a non-integer `{}`", item.trim()),
                );
                return None;
            }
        }
    }
    Some((out, line))
}

fn parse_point(raw: &str) -> Result<PointSpec, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let (edge, t) = match parts.as_slice() {
        [t] => (0usize, t.trim()),
        [e, t] => (
            e.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad edge index in point `{raw}`"))?,
            t.trim(),
        ),
        _ => return Err(format!("point `{raw}` must be `t` or `edge:t`")),
    };
    let t: f64 = t.parse().map_err(|_| format!("bad parameter in point `{raw}`"))?;
    if !(0.0..=1.0).contains(&t) {
        return Err(format!("point parameter {t} outside [0,1]"));
    }
    Ok(PointSpec { edge, t })
}

fn get_points(reader: &mut SectionReader<'_>, key: &str) -> Option<Vec<PointSpec>> {
    let (raw, line) = reader.require(key)?;
    let mut out = Vec::new();
    for item in raw.split(',') {
        match parse_point(item.trim()) {
            Ok(p) => out.push(p),
            Err(msg) => {
                reader.push_err(line, msg);
                return None;
            }
        }
    }
    Some(out)
}

fn parse_mask_item(raw: &str) -> Result<MaskItem, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        [e, t] => {
            let p = parse_point(&format!("{e}:{t}"))?;
            Ok(MaskItem {
                edge: p.edge,
                lo: p.t,
                hi: p.t,
            })
        }
        [e, lo, hi] => {
            let edge = e
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("bad edge index in `{raw}`"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound in `{raw}`"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound in `{raw}`"))?;
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(format!("mask interval `{raw}` outside [0,1] or inverted"));
            }
            Ok(MaskItem { edge, lo, hi })
        }
        _ => Err(format!("mask item `{raw}` must be `edge:t` or `edge:lo:hi`")),
    }
}

fn get_mask(reader: &mut SectionReader<'_>, key: &str, required: bool) -> Option<Vec<MaskItem>> {
    let entry = if required {
        reader.require(key)?
    } else {
        reader.get(key)?
    };
    let (raw, line) = entry;
    let mut out = Vec::new();
    for item in raw.split(',') {
        match parse_mask_item(item.trim()) {
            Ok(m) => out.push(m),
            Err(msg) => {
                reader.push_err(line, msg);
                return None;
            }
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// the scenario parser

pub fn parse_scenario(text: &str) -> ParseResult<Scenario> {
    let raw = parse_sections(text)?;
    let mut errors: Vec<ParseError> = Vec::new();

    let section = |name: &str, errors_missing: &mut Vec<ParseError>| -> BTreeMap<String, (String, usize)> {
        match raw.sections.get(name) {
            Some(s) => s.clone(),
            None => {
                errors_missing.push(ParseError {
                    line: 0,
                    message: format!("missing section [{name}]"),
                });
                BTreeMap::new()
            }
        }
    };

    // [space]
    let space_entries = section("space", &mut errors);
    let mut space_reader = SectionReader {
        name: "space",
        entries: space_entries,
        taken: Default::default(),
        errors: &mut errors,
    };
    let space = match space_reader.require("kind") {
        Some((kind, line)) => match kind.as_str() {
            "interval" => Some(SpaceSpec::Interval),
            "circle" => {
                let c = get_f64(&mut space_reader, "circumference", Some(1.0)).unwrap_or(1.0);
                if c <= 0.0 {
                    space_reader.push_err(line, "circumference must be positive".into());
                    None
                } else {
                    Some(SpaceSpec::Circle { circumference: c })
                }
            }
            "star" => {
                let branches = require_usize(&mut space_reader, "branches");
                let branch_length =
                    get_f64(&mut space_reader, "branch_length", Some(1.0)).unwrap_or(1.0);
                match branches {
                    Some(b) if b >= 3 && branch_length > 0.0 => Some(SpaceSpec::Star {
                        branches: b,
                        branch_length,
                    }),
                    Some(_) => {
                        space_reader
                            .push_err(line, "a star needs branches >= 3 and positive length".into());
                        None
                    }
                    None => None,
                }
            }
            "fan" => {
                let n_max = require_usize(&mut space_reader, "n_max");
                match n_max {
                    Some(n) if n >= 1 => Some(SpaceSpec::Fan { n_max: n }),
                    Some(_) => {
                        space_reader.push_err(line, "n_max must be at least 1".into());
                        None
                    }
                    None => None,
                }
            }
            other => {
                space_reader.push_err(
                    line,
                    format!("unknown space kind `{other}` (interval, circle, star, fan)"),
                );
                None
            }
        },
        None => None,
    };
    space_reader.finish();

    // [map]
    let map_entries = section("map", &mut errors);
    let mut map_reader = SectionReader {
        name: "map",
        entries: map_entries,
        taken: Default::default(),
        errors: &mut errors,
    };
    let map = match map_reader.require("kind") {
        Some((kind, line)) => match kind.as_str() {
            "identity" => Some(MapSpec::Identity),
            "square" => Some(MapSpec::Square),
            "rotation" => require_f64(&mut map_reader, "alpha").map(|alpha| MapSpec::Rotation { alpha }),
            "fan_rotation" => Some(MapSpec::FanRotation),
            other => {
                map_reader.push_err(
                    line,
                    format!("unknown map kind `{other}` (identity, square, rotation, fan_rotation)"),
                );
                None
            }
        },
        None => None,
    };
    map_reader.finish();

    // map/space compatibility (static)
    if let (Some(space), Some(map)) = (&space, &map) {
        let ok = match map {
            MapSpec::Identity => true,
            MapSpec::Square => matches!(space, SpaceSpec::Interval),
            MapSpec::Rotation { .. } => matches!(space, SpaceSpec::Circle { .. }),
            MapSpec::FanRotation => matches!(space, SpaceSpec::Fan { .. }),
        };
        if !ok {
            errors.push(ParseError {
                line: 0,
                message: format!("map `{}` does not act on space `{}`", map_kind(map), space_kind(space)),
            });
        }
    }

    // [experiment]
    let exp_entries = section("experiment", &mut errors);
    let mut exp_reader = SectionReader {
        name: "experiment",
        entries: exp_entries,
        taken: Default::default(),
        errors: &mut errors,
    };
    let experiment_kind = exp_reader.require("kind");
    exp_reader.finish();

    // [params]
    let params_entries = raw.sections.get("params").cloned().unwrap_or_default();
    let mut params = SectionReader {
        name: "params",
        entries: params_entries,
        taken: Default::default(),
        errors: &mut errors,
    };

    let experiment = match &experiment_kind {
        Some((kind, line)) => {
            let line = *line;
            match kind.as_str() {
                "entropy-profile" => parse_entropy_profile(&mut params),
                "witness-example5" => parse_witness_example5(&mut params, space.as_ref()),
                "witness-lemma32" => parse_witness_lemma32(&mut params),
                "liyorke-scan" => parse_liyorke_scan(&mut params),
                "omega-report" => parse_omega_report(&mut params),
                "components-report" => parse_components_report(&mut params),
                "condition-check" => parse_condition_check(&mut params),
                other => {
                    params.push_err(
                        line,
                        format!(
                            "unknown experiment `{other}` (entropy-profile, witness-example5, \
                             witness-lemma32, liyorke-scan, omega-report, components-report, \
                             condition-check)"
                        ),
                    );
                    None
                }
            }
        }
        None => None,
    };
    let hausdorff_spacing = get_f64(&mut params, "hausdorff_spacing", None);
    if let Some(s) = hausdorff_spacing {
        if s <= 0.0 {
            params.push_err(0, "hausdorff_spacing must be positive".into());
        }
    }
    params.finish();

    // [output]
    let output_entries = raw.sections.get("output").cloned().unwrap_or_default();
    let output_reader = SectionReader {
        name: "output",
        entries: output_entries,
        taken: Default::default(),
        errors: &mut errors,
    };
    let output_dir = output_reader.get("dir").map(|(v, _)| v);
    output_reader.finish();

    match (space, map, experiment) {
        (Some(space), Some(map), Some(experiment)) if errors.is_empty() => Ok(Scenario {
            space,
            map,
            experiment,
            hausdorff_spacing,
            output_dir,
        }),
        _ => {
            if errors.is_empty() {
                errors.push(ParseError {
                    line: 0,
                    message: "scenario is incomplete".into(),
                });
            }
            Err(errors)
        }
    }
}

fn parse_entropy_profile(params: &mut SectionReader<'_>) -> Option<ExperimentSpec> {
    let epsilon_list = get_f64_list(params, "epsilon_list");
    if let Some((eps, line)) = &epsilon_list {
        if eps.iter().any(|&e| e <= 0.0) {
            params.push_err(*line, "epsilon must be positive".into());
            return None;
        }
    }
    let n_list = get_usize_list(params, "n_list");
    let delta = require_f64(params, "delta");
    let budget = require_usize(params, "budget");
    let seed = match params.require("seed") {
        Some((raw, line)) => match raw.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                params.push_err(line, "`seed` must be a non-negative integer".into());
                None
            }
        },
        None => None, // seed is mandatory for randomized experiments
    };
    let mode = match params.get("mode") {
        Some((raw, line)) => match raw.as_str() {
            "full" => Some(NetModeSpec::Full),
            "connected" => Some(NetModeSpec::Connected),
            other => {
                params.push_err(line, format!("mode must be full or connected, got `{other}`"));
                None
            }
        },
        None => Some(NetModeSpec::Connected),
    };
    let method = match params.get("method") {
        Some((raw, line)) => match raw.as_str() {
            "exact" => Some(MethodSpec::Exact),
            "greedy" => Some(MethodSpec::Greedy),
            other => {
                params.push_err(line, format!("method must be exact or greedy, got `{other}`"));
                None
            }
        },
        None => Some(MethodSpec::Exact),
    };
    let max_cardinality = get_usize(params, "max_cardinality", Some(8))?;
    let inject_points = match params.get("inject_points") {
        Some((raw, line)) => {
            let mut pts = Vec::new();
            for item in raw.split(',') {
                match parse_point(item.trim()) {
                    Ok(p) => pts.push(p),
                    Err(msg) => {
                        params.push_err(line, msg);
                        return None;
                    }
                }
            }
            pts
        }
        None => Vec::new(),
    };
    let inject_horizon = get_usize(params, "inject_horizon", Some(0))?;
    let inject_j_max = get_usize(params, "inject_j_max", Some(64))?;
    if !inject_points.is_empty() && inject_horizon == 0 {
        params.push_err(0, "inject_points requires inject_horizon >= 1".into());
        return None;
    }
    let assert_slope_max = get_f64(params, "assert_slope_max", None);
    let assert_slope_min = get_f64(params, "assert_slope_min", None);
    let delta = delta?;
    if delta <= 0.0 {
        params.push_err(0, "delta must be positive".into());
        return None;
    }
    let budget = budget?;
    if budget == 0 && inject_points.is_empty() {
        params.push_err(
            0,
            "budget must be at least 1 (0 is allowed only with injected witness points)".into(),
        );
        return None;
    }
    Some(ExperimentSpec::EntropyProfile {
        epsilon_list: epsilon_list?.0,
        n_list: n_list?.0,
        delta,
        budget,
        mode: mode?,
        method: method?,
        max_cardinality,
        seed: seed?,
        inject_points,
        inject_horizon,
        inject_j_max,
        assert_slope_max,
        assert_slope_min,
    })
}

fn parse_witness_example5(
    params: &mut SectionReader<'_>,
    space: Option<&SpaceSpec>,
) -> Option<ExperimentSpec> {
    let k = require_usize(params, "k")?;
    let m = require_usize(params, "m")?;
    if k < 2 || m < 1 {
        params.push_err(0, "need k >= 2 and m >= 1".into());
        return None;
    }
    if let Some(SpaceSpec::Fan { n_max }) = space {
        if *n_max < 2 * m {
            params.push_err(0, format!("fan truncation n_max={n_max} < 2m={}", 2 * m));
            return None;
        }
    }
    let horizon = get_usize(params, "horizon", Some(2 * m))?;
    let assert_eps_at_least = get_f64(params, "assert_eps_at_least", None);
    Some(ExperimentSpec::WitnessExample5 {
        k,
        m,
        horizon,
        assert_eps_at_least,
    })
}

fn parse_witness_lemma32(params: &mut SectionReader<'_>) -> Option<ExperimentSpec> {
    let points = get_points(params, "points")?;
    let horizon_k = require_usize(params, "horizon_k")?;
    let j_max = get_usize(params, "j_max", Some(64))?;
    let alpha_window = get_usize(params, "alpha_window", Some(16))?;
    if horizon_k == 0 {
        params.push_err(0, "horizon_k must be at least 1".into());
        return None;
    }
    let assert_slope_min = get_f64(params, "assert_slope_min", None);
    Some(ExperimentSpec::WitnessLemma32 {
        points,
        horizon_k,
        j_max,
        alpha_window,
        assert_slope_min,
    })
}

fn parse_liyorke_scan(params: &mut SectionReader<'_>) -> Option<ExperimentSpec> {
    let pairs = require_usize(params, "pairs")?;
    let delta = require_f64(params, "delta")?;
    let horizon = require_usize(params, "horizon")?;
    let tail_window = require_usize(params, "tail_window")?;
    let delta_prox = require_f64(params, "delta_prox")?;
    let delta_asym = require_f64(params, "delta_asym")?;
    let seed = match params.require("seed") {
        Some((raw, line)) => match raw.parse::<u64>() {
            Ok(v) => v,
            Err(_) => {
                params.push_err(line, "`seed` must be a non-negative integer".into());
                return None;
            }
        },
        None => return None,
    };
    if pairs == 0 || horizon <= tail_window || tail_window == 0 {
        params.push_err(0, "need pairs >= 1 and horizon > tail_window >= 1".into());
        return None;
    }
    if delta <= 0.0 || delta_prox <= 0.0 || delta_asym <= 0.0 {
        params.push_err(0, "delta, delta_prox and delta_asym must be positive".into());
        return None;
    }
    Some(ExperimentSpec::LiyorkeScan {
        pairs,
        delta,
        horizon,
        tail_window,
        delta_prox,
        delta_asym,
        seed,
    })
}

fn parse_omega_report(params: &mut SectionReader<'_>) -> Option<ExperimentSpec> {
    let point = {
        let (raw, line) = params.require("point")?;
        match parse_point(&raw) {
            Ok(p) => p,
            Err(msg) => {
                params.push_err(line, msg);
                return None;
            }
        }
    };
    let burn_in = get_usize(params, "burn_in", Some(64))?;
    let window = get_usize(params, "window", Some(64))?;
    let delta = get_f64(params, "delta", Some(0.01))?;
    let backward = get_bool(params, "backward", Some(false))?;
    if burn_in == 0 || window == 0 || delta <= 0.0 {
        params.push_err(0, "need burn_in, window >= 1 and positive delta".into());
        return None;
    }
    Some(ExperimentSpec::OmegaReport {
        point,
        burn_in,
        window,
        delta,
        backward,
    })
}

fn parse_components_report(params: &mut SectionReader<'_>) -> Option<ExperimentSpec> {
    let delta = require_f64(params, "delta")?;
    let n_steps = require_usize(params, "n_steps")?;
    if delta <= 0.0 || n_steps == 0 {
        params.push_err(0, "need positive delta and n_steps >= 1".into());
        return None;
    }
    let assert_components = get_usize(params, "assert_components", None);
    let assert_covers_space = get_bool(params, "assert_covers_space", Some(false))?;
    Some(ExperimentSpec::ComponentsReport {
        delta,
        n_steps,
        assert_components,
        assert_covers_space,
    })
}

fn parse_condition_check(params: &mut SectionReader<'_>) -> Option<ExperimentSpec> {
    let condition = {
        let (raw, line) = params.require("condition")?;
        match raw.as_str() {
            "containment" => ConditionKind::Containment,
            "returns" => ConditionKind::Returns,
            other => {
                params.push_err(
                    line,
                    format!("condition must be containment or returns, got `{other}`"),
                );
                return None;
            }
        }
    };
    let a_mask = get_mask(params, "a_mask", true)?;
    let b_mask = match condition {
        ConditionKind::Returns => get_mask(params, "b_mask", true)?,
        ConditionKind::Containment => get_mask(params, "b_mask", false).unwrap_or_default(),
    };
    let p_max = get_usize(params, "p_max", Some(16))?;
    let tol = get_f64(params, "tol", Some(1e-6))?;
    let q_max = get_usize(params, "q_max", Some(16))?;
    let delta = get_f64(params, "delta", Some(0.01))?;
    let n_steps = get_usize(params, "n_steps", Some(64))?;
    if tol <= 0.0 || delta <= 0.0 {
        params.push_err(0, "tol and delta must be positive".into());
        return None;
    }
    Some(ExperimentSpec::ConditionCheck {
        condition,
        a_mask,
        b_mask,
        p_max,
        tol,
        q_max,
        delta,
        n_steps,
    })
}

fn space_kind(s: &SpaceSpec) -> &'static str {
    match s {
        SpaceSpec::Interval => "interval",
        SpaceSpec::Circle { .. } => "circle",
        SpaceSpec::Star { .. } => "star",
        SpaceSpec::Fan { .. } => "fan",
    }
}

fn map_kind(m: &MapSpec) -> &'static str {
    match m {
        MapSpec::Identity => "identity",
        MapSpec::Square => "square",
        MapSpec::Rotation { .. } => "rotation",
        MapSpec::FanRotation => "fan_rotation",
    }
}

// ---------------------------------------------------------------------------
// canonical rendering

fn fmt_num(x: f64) -> String {
    // shortest representation that round-trips
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn fmt_point(p: &PointSpec) -> String {
    format!("{}:{}", p.edge, fmt_num(p.t))
}

fn fmt_mask(items: &[MaskItem]) -> String {
    items
        .iter()
        .map(|m| format!("{}:{}:{}", m.edge, fmt_num(m.lo), fmt_num(m.hi)))
        .collect::<Vec<_>>()
        .join(",")
}

/// Canonical textual form; `parse_scenario(render(s)) == s`.
pub fn render(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str("[space]\n");
    match &s.space {
        SpaceSpec::Interval => out.push_str("kind = interval\n"),
        SpaceSpec::Circle { circumference } => {
            let _ = writeln!(out, "kind = circle\ncircumference = {}", fmt_num(*circumference));
        }
        SpaceSpec::Star {
            branches,
            branch_length,
        } => {
            let _ = writeln!(
                out,
                "kind = star\nbranches = {branches}\nbranch_length = {}",
                fmt_num(*branch_length)
            );
        }
        SpaceSpec::Fan { n_max } => {
            let _ = writeln!(out, "kind = fan\nn_max = {n_max}");
        }
    }
    out.push_str("\n[map]\n");
    match &s.map {
        MapSpec::Identity => out.push_str("kind = identity\n"),
        MapSpec::Square => out.push_str("kind = square\n"),
        MapSpec::Rotation { alpha } => {
            let _ = writeln!(out, "kind = rotation\nalpha = {}", fmt_num(*alpha));
        }
        MapSpec::FanRotation => out.push_str("kind = fan_rotation\n"),
    }
    let _ = writeln!(out, "\n[experiment]\nkind = {}", s.experiment.kind());
    out.push_str("\n[params]\n");
    match &s.experiment {
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
            let eps: Vec<String> = epsilon_list.iter().map(|&e| fmt_num(e)).collect();
            let ns: Vec<String> = n_list.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(out, "epsilon_list = {}", eps.join(","));
            let _ = writeln!(out, "n_list = {}", ns.join(","));
            let _ = writeln!(out, "delta = {}", fmt_num(*delta));
            let _ = writeln!(out, "budget = {budget}");
            let _ = writeln!(
                out,
                "mode = {}",
                if *mode == NetModeSpec::Full { "full" } else { "connected" }
            );
            let _ = writeln!(
                out,
                "method = {}",
                if *method == MethodSpec::Exact { "exact" } else { "greedy" }
            );
            let _ = writeln!(out, "max_cardinality = {max_cardinality}");
            let _ = writeln!(out, "seed = {seed}");
            if !inject_points.is_empty() {
                let pts: Vec<String> = inject_points.iter().map(fmt_point).collect();
                let _ = writeln!(out, "inject_points = {}", pts.join(","));
            }
            if *inject_horizon != 0 {
                let _ = writeln!(out, "inject_horizon = {inject_horizon}");
            }
            if *inject_j_max != 64 {
                let _ = writeln!(out, "inject_j_max = {inject_j_max}");
            }
            if let Some(v) = assert_slope_max {
                let _ = writeln!(out, "assert_slope_max = {}", fmt_num(*v));
            }
            if let Some(v) = assert_slope_min {
                let _ = writeln!(out, "assert_slope_min = {}", fmt_num(*v));
            }
        }
        ExperimentSpec::WitnessExample5 {
            k,
            m,
            horizon,
            assert_eps_at_least,
        } => {
            let _ = writeln!(out, "k = {k}\nm = {m}\nhorizon = {horizon}");
            if let Some(v) = assert_eps_at_least {
                let _ = writeln!(out, "assert_eps_at_least = {}", fmt_num(*v));
            }
        }
        ExperimentSpec::WitnessLemma32 {
            points,
            horizon_k,
            j_max,
            alpha_window,
            assert_slope_min,
        } => {
            let pts: Vec<String> = points.iter().map(fmt_point).collect();
            let _ = writeln!(out, "points = {}", pts.join(","));
            let _ = writeln!(out, "horizon_k = {horizon_k}");
            let _ = writeln!(out, "j_max = {j_max}");
            let _ = writeln!(out, "alpha_window = {alpha_window}");
            if let Some(v) = assert_slope_min {
                let _ = writeln!(out, "assert_slope_min = {}", fmt_num(*v));
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
            let _ = writeln!(out, "pairs = {pairs}");
            let _ = writeln!(out, "delta = {}", fmt_num(*delta));
            let _ = writeln!(out, "horizon = {horizon}");
            let _ = writeln!(out, "tail_window = {tail_window}");
            let _ = writeln!(out, "delta_prox = {}", fmt_num(*delta_prox));
            let _ = writeln!(out, "delta_asym = {}", fmt_num(*delta_asym));
            let _ = writeln!(out, "seed = {seed}");
        }
        ExperimentSpec::OmegaReport {
            point,
            burn_in,
            window,
            delta,
            backward,
        } => {
            let _ = writeln!(out, "point = {}", fmt_point(point));
            let _ = writeln!(out, "burn_in = {burn_in}");
            let _ = writeln!(out, "window = {window}");
            let _ = writeln!(out, "delta = {}", fmt_num(*delta));
            let _ = writeln!(out, "backward = {backward}");
        }
        ExperimentSpec::ComponentsReport {
            delta,
            n_steps,
            assert_components,
            assert_covers_space,
        } => {
            let _ = writeln!(out, "delta = {}", fmt_num(*delta));
            let _ = writeln!(out, "n_steps = {n_steps}");
            if let Some(v) = assert_components {
                let _ = writeln!(out, "assert_components = {v}");
            }
            let _ = writeln!(out, "assert_covers_space = {assert_covers_space}");
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
            let _ = writeln!(
                out,
                "condition = {}",
                match condition {
                    ConditionKind::Containment => "containment",
                    ConditionKind::Returns => "returns",
                }
            );
            let _ = writeln!(out, "a_mask = {}", fmt_mask(a_mask));
            if !b_mask.is_empty() {
                let _ = writeln!(out, "b_mask = {}", fmt_mask(b_mask));
            }
            let _ = writeln!(out, "p_max = {p_max}");
            let _ = writeln!(out, "tol = {}", fmt_num(*tol));
            let _ = writeln!(out, "q_max = {q_max}");
            let _ = writeln!(out, "delta = {}", fmt_num(*delta));
            let _ = writeln!(out, "n_steps = {n_steps}");
        }
    }
    if let Some(spacing) = s.hausdorff_spacing {
        let _ = writeln!(out, "hausdorff_spacing = {}", fmt_num(spacing));
    }
    if let Some(dir) = &s.output_dir {
        let _ = writeln!(out, "\n[output]\ndir = {dir}");
    }
    out
}
