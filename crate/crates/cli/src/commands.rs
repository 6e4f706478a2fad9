use std::path::Path;

use freespace_core::attainment::{strongly_attains, verify_na_equals_sna, AttainmentReport};
use freespace_core::extremal::{
    check_verdict, classify_all, classify_pair, default_eps_grid, oracle_extreme_points_with_cap, ClassificationRow,
    ClassifyOptions, Status, Verdict,
};
use freespace_core::free_space::{kr_norm_dual, kr_norm_primal, slice_diameter, FreeElement, TransportArc};
use freespace_core::lipschitz::{slice_molecules, LipFunction};
use freespace_core::metric::{self, gallery, metric_segment, space_to_json, validate, SpaceFile, Violation};
use freespace_core::rational::{self, Rational};
use freespace_core::{MetricSpace, PointId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{emit, Envelope, Table};
use crate::{AssertProperty, Command, Failure, Format, Method, SpaceArgs};

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn rat(r: &Rational) -> String {
    rational::format(r)
}

pub fn load_space(args: &SpaceArgs) -> Result<MetricSpace, Failure> {
    let space = match args.space.strip_prefix("gallery:") {
        Some(rest) => {
            let (name, n) = rest
                .rsplit_once(':')
                .ok_or_else(|| input(format!("expected gallery:NAME:N, got `{}`", args.space)))?;
            let n: usize = n.parse().map_err(|_| input(format!("gallery depth `{n}` is not a number")))?;
            gallery(name, n)?
        }
        None => metric::load_space(Path::new(&args.space)).map_err(|e| input(format!("{}: {e}", args.space)))?,
    };
    match &args.snowflake {
        None => Ok(space),
        Some(p) => {
            let p = rational::parse(p).map_err(|e| input(format!("--snowflake: {e}")))?;
            Ok(metric::snowflake(&space, &p)?)
        }
    }
}

fn load_metric(args: &SpaceArgs) -> Result<MetricSpace, Failure> {
    let space = load_space(args)?;
    let violations = validate(&space);
    if let Some(first) = violations.first() {
        return Err(input(format!(
            "{} is not a metric space ({} violation(s)); first: {first}",
            args.space,
            violations.len()
        )));
    }
    Ok(space)
}

fn point(space: &MetricSpace, label: &str) -> Result<PointId, Failure> {
    Ok(space.point(label)?)
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read `{}`: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: invalid JSON: {e}", path.display())))
}

fn read_function(space: &MetricSpace, path: &Path) -> Result<LipFunction, Failure> {
    LipFunction::from_json(space, &read_json(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_eps_grid(text: &str) -> Result<Vec<Rational>, Failure> {
    text.split(',')
        .map(|t| rational::parse(t).map_err(|e| input(format!("--eps-grid: {e}"))))
        .collect()
}

#[derive(Serialize)]
struct ValidateResult {
    points: usize,
    valid: bool,
    violations: Vec<Violation>,
}

#[derive(Serialize)]
struct SegmentResult {
    pair: [String; 2],
    segment: Vec<String>,
    trivial: bool,
}

#[derive(Serialize)]
struct DualNorm {
    value: String,
    witness: LipFunction,
}

#[derive(Serialize)]
struct PrimalNorm {
    value: String,
    plan: Vec<TransportArc>,
}

#[derive(Serialize)]
struct NormResult {
    element: FreeElement,
    #[serde(skip_serializing_if = "Option::is_none")]
    dual: Option<DualNorm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    primal: Option<PrimalNorm>,
}

#[derive(Serialize, Deserialize)]
pub struct ClassifyResult {
    pub space: SpaceFile,
    pub depth: usize,
    pub eps_grid: Vec<String>,
    pub rows: Vec<ClassificationRow>,
}

#[derive(Serialize)]
struct OracleResult {
    molecules: usize,
    vertices: Vec<[String; 2]>,
}

#[derive(Serialize)]
struct AttainOne {
    function: LipFunction,
    #[serde(flatten)]
    report: AttainmentReport,
    strongly_attains: bool,
}

#[derive(Serialize)]
struct SliceResult {
    alpha: String,
    molecules: Vec<[String; 2]>,
    restricted: bool,
    diameter: String,
}

#[derive(Serialize)]
struct CheckResult {
    rows: usize,
    verdicts: usize,
    passed: bool,
    failures: Vec<String>,
}

fn config(cmd: &Command) -> Value {
    serde_json::to_value(cmd).expect("commands serialize")
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate { .. } => "validate",
        Command::Segment { .. } => "segment",
        Command::Norm { .. } => "norm",
        Command::Classify { .. } => "classify",
        Command::Oracle { .. } => "oracle",
        Command::Attain { .. } => "attain",
        Command::Gallery { .. } => "gallery",
        Command::Slice { .. } => "slice",
        Command::Check { .. } => "check",
    }
}

fn property_name(v: &Verdict) -> String {
    serde_json::to_value(v.property).ok().and_then(|p| p.as_str().map(String::from)).unwrap_or_default()
}

fn verdicts(row: &ClassificationRow) -> [&Verdict; 4] {
    [&row.extreme, &row.exposed_by_fxy, &row.denting, &row.strongly_exposed]
}

fn envelope<T>(cmd: &Command, space: &MetricSpace, result: T) -> Envelope<T> {
    Envelope::new(name(cmd), config(cmd), space.kind().arithmetic_mode(), result)
}

pub fn run(cmd: &Command, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    match cmd {
        Command::Validate { space } => {
            let s = load_space(space)?;
            let violations = validate(&s);
            let mut table = Table::new(&["violation"]);
            for v in &violations {
                table.push(vec![v.to_string()]);
            }
            let count = violations.len();
            let result = ValidateResult { points: s.len(), valid: count == 0, violations };
            emit(&envelope(cmd, &s, result), &table, format, out)?;
            if count > 0 {
                for v in validate(&s) {
                    eprintln!("violation: {v}");
                }
                return Err(input(format!("{} is not a metric space ({count} violation(s))", space.space)));
            }
            Ok(())
        }
        Command::Segment { space, pair } => {
            let s = load_metric(space)?;
            let (x, y) = (point(&s, &pair[0])?, point(&s, &pair[1])?);
            let seg = metric_segment(&s, x, y)?;
            let mut table = Table::new(&["point"]);
            let labels: Vec<String> = seg.iter().map(|&p| s.label(p).to_string()).collect();
            for l in &labels {
                table.push(vec![l.clone()]);
            }
            let result = SegmentResult { pair: [pair[0].clone(), pair[1].clone()], trivial: seg.len() == 2, segment: labels };
            emit(&envelope(cmd, &s, result), &table, format, out)
        }
        Command::Norm { space, element, method } => {
            let s = load_metric(space)?;
            let mu = FreeElement::from_json(&s, &read_json(element)?)
                .map_err(|e| input(format!("{}: {e}", element.display())))?;
            let mut table = Table::new(&["method", "value"]);
            let dual = match method {
                Method::Dual | Method::Both => {
                    let (v, witness) = kr_norm_dual(&s, &mu)?;
                    table.push(vec!["dual".into(), rat(&v)]);
                    Some(DualNorm { value: rat(&v), witness })
                }
                Method::Primal => None,
            };
            let primal = match method {
                Method::Primal | Method::Both => {
                    let (v, plan) = kr_norm_primal(&s, &mu)?;
                    table.push(vec!["primal".into(), rat(&v)]);
                    Some(PrimalNorm { value: rat(&v), plan })
                }
                Method::Dual => None,
            };
            if let (Some(d), Some(p)) = (&dual, &primal) {
                if d.value != p.value {
                    return Err(Failure::Assertion(format!("dual {} and primal {} disagree", d.value, p.value)));
                }
            }
            emit(&envelope(cmd, &s, NormResult { element: mu, dual, primal }), &table, format, out)
        }
        Command::Classify { space, pair, depth, eps_grid, oracle_cap, assert } => {
            let s = load_metric(space)?;
            let opts = ClassifyOptions {
                depth: *depth,
                eps_grid: match eps_grid {
                    Some(text) => parse_eps_grid(text)?,
                    None => default_eps_grid(),
                },
                oracle_cap: *oracle_cap,
            };
            let rows = match pair {
                Some(p) => vec![classify_pair(&s, point(&s, &p[0])?, point(&s, &p[1])?, &opts)?],
                None => classify_all(&s, &opts)?,
            };
            let mut table = Table::new(&["x", "y", "extreme", "exposed_by_fxy", "denting", "strongly_exposed", "oracle_extreme"]);
            for r in &rows {
                let mut line = vec![r.molecule[0].clone(), r.molecule[1].clone()];
                line.extend(verdicts(r).iter().map(|v| v.status.to_string()));
                line.push(r.oracle_extreme.map_or(String::new(), |b| b.to_string()));
                table.push(line);
            }
            let failed: Vec<String> = match assert {
                None => Vec::new(),
                Some(prop) => rows
                    .iter()
                    .filter(|r| {
                        let v = match prop {
                            AssertProperty::Extreme => &r.extreme,
                            AssertProperty::ExposedByFxy => &r.exposed_by_fxy,
                            AssertProperty::Denting => &r.denting,
                            AssertProperty::StronglyExposed => &r.strongly_exposed,
                        };
                        v.status != Status::Proven
                    })
                    .map(|r| format!("m({},{})", r.molecule[0], r.molecule[1]))
                    .collect(),
            };
            let result = ClassifyResult {
                space: space_to_json(&s),
                depth: opts.depth,
                eps_grid: opts.eps_grid.iter().map(rat).collect(),
                rows,
            };
            emit(&envelope(cmd, &s, result), &table, format, out)?;
            if !failed.is_empty() {
                return Err(Failure::Assertion(format!(
                    "asserted property is not proven for {}",
                    failed.join(", ")
                )));
            }
            Ok(())
        }
        Command::Oracle { space, oracle_cap } => {
            let s = load_metric(space)?;
            let vertices = oracle_extreme_points_with_cap(&s, *oracle_cap)?;
            let mut table = Table::new(&["x", "y"]);
            let names: Vec<[String; 2]> = vertices
                .iter()
                .map(|m| [s.label(m.x).to_string(), s.label(m.y).to_string()])
                .collect();
            for [x, y] in &names {
                table.push(vec![x.clone(), y.clone()]);
            }
            let result = OracleResult { molecules: s.len() * (s.len() - 1), vertices: names };
            emit(&envelope(cmd, &s, result), &table, format, out)
        }
        Command::Attain { space, function, random, seed } => {
            let s = load_metric(space)?;
            let mut table = Table::new(&["sample", "functional_norm", "x", "y", "strongly_attains"]);
            if let Some(path) = function {
                let f = read_function(&s, path)?;
                let r = strongly_attains(&s, &f)?;
                let ok = r.trivial_segment_pair.is_some();
                let [x, y] = r.trivial_segment_pair.clone().unwrap_or_default();
                table.push(vec!["0".into(), rat(&r.lip_norm), x, y, ok.to_string()]);
                return emit(&envelope(cmd, &s, AttainOne { function: f, report: r, strongly_attains: ok }), &table, format, out);
            }
            let k = random.expect("clap requires --function or --random");
            let r = verify_na_equals_sna(&s, k, *seed)?;
            for (i, o) in r.outcomes.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    rat(&o.functional_norm),
                    o.vertex[0].clone(),
                    o.vertex[1].clone(),
                    o.strongly_attains.to_string(),
                ]);
            }
            let passed = r.passed;
            emit(&envelope(cmd, &s, r), &table, format, out)?;
            if !passed {
                return Err(Failure::Assertion("a sampled function does not strongly attain its norm".into()));
            }
            Ok(())
        }
        Command::Gallery { name, n } => {
            let s = gallery(name, *n)?;
            let file = space_to_json(&s);
            let mut headers = vec![""];
            headers.extend(s.labels().iter().map(String::as_str));
            let mut table = Table::new(&headers);
            for (label, row) in s.labels().iter().zip(s.matrix()) {
                let mut line = vec![label.clone()];
                line.extend(row.iter().map(rat));
                table.push(line);
            }
            emit(&file, &table, format, out)
        }
        Command::Slice { space, function, alpha, restrict } => {
            let s = load_metric(space)?;
            let f = read_function(&s, function)?;
            let a = rational::parse(alpha).map_err(|e| input(format!("--alpha: {e}")))?;
            let molecules = slice_molecules(&s, &f, &a)?;
            let diameter = slice_diameter(&s, &f, &a, *restrict)?;
            let mut table = Table::new(&["x", "y"]);
            let names: Vec<[String; 2]> = molecules
                .iter()
                .map(|m| [s.label(m.x).to_string(), s.label(m.y).to_string()])
                .collect();
            for [x, y] in &names {
                table.push(vec![x.clone(), y.clone()]);
            }
            let result = SliceResult { alpha: rat(&a), molecules: names, restricted: *restrict, diameter: rat(&diameter) };
            emit(&envelope(cmd, &s, result), &table, format, out)
        }
        Command::Check { report: path } => {
            let value = read_json(path)?;
            let loaded: Envelope<ClassifyResult> = serde_path_to_error::deserialize(value)
                .map_err(|e| input(format!("{}: malformed report at `{}`: {}", path.display(), e.path(), e.inner())))?;
            if loaded.command != "classify" {
                return Err(input(format!("only classify reports can be checked, got `{}`", loaded.command)));
            }
            let text = serde_json::to_string(&loaded.result.space).expect("space files serialize");
            let s = metric::parse_space(&text).map_err(|e| input(format!("{}: {}", path.display(), e.at("result.space."))))?;
            let mut failures = Vec::new();
            let mut count = 0;
            let mut table = Table::new(&["x", "y", "property", "status", "check"]);
            for row in &loaded.result.rows {
                if !row.chain_holds() {
                    failures.push(format!("m({},{}): implication chain broken", row.molecule[0], row.molecule[1]));
                }
                for v in verdicts(row) {
                    count += 1;
                    let outcome = check_verdict(&s, v);
                    let pair_ok = v.pair == row.molecule;
                    table.push(vec![
                        row.molecule[0].clone(),
                        row.molecule[1].clone(),
                        property_name(v),
                        v.status.to_string(),
                        match (&outcome, pair_ok) {
                            (Ok(()), true) => "ok".to_string(),
                            (Err(e), _) => e.clone(),
                            (Ok(()), false) => "verdict belongs to another pair".to_string(),
                        },
                    ]);
                    if let Err(e) = outcome {
                        failures.push(format!("m({},{}) {}: {e}", row.molecule[0], row.molecule[1], property_name(v)));
                    } else if !pair_ok {
                        failures.push(format!("m({},{}) {}: verdict belongs to another pair", row.molecule[0], row.molecule[1], property_name(v)));
                    }
                }
            }
            let passed = failures.is_empty();
            let result = CheckResult { rows: loaded.result.rows.len(), verdicts: count, passed, failures };
            let first = result.failures.first().cloned();
            emit(&envelope(cmd, &s, result), &table, format, out)?;
            match first {
                Some(f) => Err(Failure::Assertion(format!("report failed verification: {f}"))),
                None => Ok(()),
            }
        }
    }
}
