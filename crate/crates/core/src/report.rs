//! Serializable run reports. Exact values are always `"num/den"` strings.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::certify::{Monotonicity, SignCertificate};
use crate::gadget::{K4WeightMap, Value};
use crate::nlp::{ChainReport, CheckResult, ScalarPoint};
use crate::optimize::SearchResult;
use crate::rational::{format_rational, Rational};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    GraphVerify,
    ChainCheck,
    Certify,
    Optimize,
    Gen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Tag of the claim the check exercises.
    #[serde(rename = "paper_ref")]
    pub claim: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Json>,
    pub exact_values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub verdict: Outcome,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub schema: u32,
    pub mode: Mode,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    pub tool_version: String,
    pub timing_ms: u64,
}

impl CertificationReport {
    pub fn new(mode: Mode, inputs: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            mode,
            inputs,
            seed,
            checks: Vec::new(),
            summary: Summary { verdict: Outcome::Pass, exit_code: 0 },
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timing_ms: 0,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome == Outcome::Pass)
    }

    pub fn finish(&mut self, exit_code: i32, timing_ms: u64) {
        self.summary = Summary { verdict: Outcome::from_bool(exit_code == 0), exit_code };
        self.timing_ms = timing_ms;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn rat(r: &Rational) -> String {
    format_rational(r)
}

fn value_string(v: &Value) -> String {
    match v {
        Value::Exact(r) => rat(r),
        Value::Float(f) => format!("{f:e}"),
    }
}

fn point_json(p: &ScalarPoint) -> Json {
    Json::Object(p.iter().map(|(v, x)| (v.name().to_string(), Json::String(rat(x)))).collect())
}

/// Checks of a weight sweep: nonnegativity and unit edge sums.
pub fn weight_checks(map: &K4WeightMap, tolerance: f64) -> Vec<CheckRecord> {
    let mut values = BTreeMap::new();
    values.insert("k4_count".into(), map.len().to_string());
    values.insert("max_edge_sum_deviation".into(), value_string(&map.max_edge_sum_deviation));
    let mut min_values = values.clone();
    let witness = map.min_weight.as_ref().map(|(v, t)| {
        min_values.insert("min_weight".into(), value_string(v));
        json!({ "k4": t, "weight": value_string(v) })
    });
    let nonneg = map.all_nonnegative(tolerance);
    vec![
        CheckRecord {
            name: "weights nonnegative".into(),
            claim: "gadget-weights-nonnegative".into(),
            outcome: Outcome::from_bool(nonneg),
            witness: if nonneg { None } else { witness },
            exact_values: min_values,
        },
        CheckRecord {
            name: "edge sums equal one".into(),
            claim: "gadget-edge-sums".into(),
            outcome: Outcome::from_bool(map.edge_sums_are_one(tolerance)),
            witness: None,
            exact_values: values,
        },
    ]
}

fn chain_check(c: &CheckResult) -> CheckRecord {
    let mut values = BTreeMap::new();
    values.insert("samples".into(), c.samples.to_string());
    values.insert("witnesses".into(), c.witness_count.to_string());
    let witness = c.witnesses.first().map(|w| {
        json!({
            "sample": w.sample,
            "relation": w.relation,
            "point": w.point,
            "left": w.left.as_ref().map(rat),
            "right": w.right.as_ref().map(rat),
        })
    });
    CheckRecord {
        name: c.name.clone(),
        claim: c.claim.to_string(),
        outcome: Outcome::from_bool(c.passed()),
        witness,
        exact_values: values,
    }
}

pub fn chain_checks(r: &ChainReport) -> Vec<CheckRecord> {
    r.checks.iter().map(chain_check).collect()
}

/// One record per step of a sign certificate; a failed chain keeps the
/// steps it completed and names the failing one.
pub fn certificate_checks(c: &SignCertificate, failure: Option<(usize, &str)>) -> Vec<CheckRecord> {
    let mut out: Vec<CheckRecord> = c
        .records
        .iter()
        .map(|r| {
            let mut values = BTreeMap::new();
            values.insert("endpoint".into(), rat(&r.endpoint));
            values.insert("value".into(), rat(&r.value));
            values.insert("direction".into(), format!("{:?}", r.direction).to_lowercase());
            values.insert(
                "sign".into(),
                r.sign.map_or("none".into(), |s| format!("{s:?}").to_lowercase()),
            );
            match &r.monotonicity {
                Monotonicity::Degenerate => {
                    values.insert("monotonicity".into(), "single point".into());
                }
                Monotonicity::Vertex { leading, vertex } => {
                    values.insert("monotonicity".into(), "vertex".into());
                    values.insert("leading".into(), rat(leading));
                    values.insert("vertex".into(), rat(vertex));
                }
                Monotonicity::NextDerivative(s) => {
                    values.insert(
                        "monotonicity".into(),
                        format!("derivative {}", format!("{s:?}").to_lowercase()),
                    );
                }
            }
            let ok = r.sign.is_some() && failure.map_or(true, |(step, _)| step != r.order);
            CheckRecord {
                name: format!("order {} sign", r.order),
                claim: "threshold-sign-chain".into(),
                outcome: Outcome::from_bool(ok),
                witness: None,
                exact_values: values,
            }
        })
        .collect();
    if let Some((step, reason)) = failure {
        if !c.records.iter().any(|r| r.order == step) {
            out.push(CheckRecord {
                name: format!("order {step} sign"),
                claim: "threshold-sign-chain".into(),
                outcome: Outcome::Fail,
                witness: Some(json!({ "reason": reason })),
                exact_values: BTreeMap::new(),
            });
        } else if let Some(rec) = out.iter_mut().find(|r| r.name == format!("order {step} sign")) {
            rec.witness = Some(json!({ "reason": reason }));
        }
    }
    out
}

pub fn search_checks(r: &SearchResult) -> Vec<CheckRecord> {
    let mut values = BTreeMap::new();
    values.insert("best_value".into(), rat(&r.exact_value));
    values.insert("upper_bound".into(), rat(&r.upper_bound));
    values.insert("margin".into(), rat(&r.margin));
    values.insert("float_value".into(), format!("{:e}", r.float_value));
    values.insert("float_error".into(), format!("{:e}", r.float_error));
    values.insert("evaluations".into(), r.evaluations.to_string());
    values.insert("denominator".into(), r.denominator.to_string());
    let ok = r.margin >= Rational::from_integer(0.into());
    vec![CheckRecord {
        name: format!("{} maximum below W13", r.program),
        claim: "closed-form-bound".into(),
        outcome: Outcome::from_bool(ok),
        witness: Some(json!({ "point": point_json(&r.point) })),
        exact_values: values,
    }]
}
