//! One checker per bound or identity. Each returns a [`CheckReport`] whose
//! witness holds the numbers on both sides of the comparison.
//!
//! Outcomes are disjoint: a report is skipped (hypothesis not met, with
//! `skipped_reason` set and `passed = false`), passed, or failed.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fp::PrimeModulus;
use crate::geometry::{
    direction_set, is_line, projection_counts, projection_polynomial, Direction, PointSet,
};
use crate::poly::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementId {
    Redei,
    Main,
    KissSomlai,
    Proposition,
    ProjectionSupport,
    GacsGap,
    Szonyi,
    DswProduct,
    ParityIdentity,
    SumCriterion,
}

impl StatementId {
    pub const ALL: [StatementId; 10] = [
        StatementId::Redei,
        StatementId::Main,
        StatementId::KissSomlai,
        StatementId::Proposition,
        StatementId::ProjectionSupport,
        StatementId::GacsGap,
        StatementId::Szonyi,
        StatementId::DswProduct,
        StatementId::ParityIdentity,
        StatementId::SumCriterion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatementId::Redei => "redei",
            StatementId::Main => "main",
            StatementId::KissSomlai => "kiss_somlai",
            StatementId::Proposition => "proposition",
            StatementId::ProjectionSupport => "projection_support",
            StatementId::GacsGap => "gacs_gap",
            StatementId::Szonyi => "szonyi",
            StatementId::DswProduct => "dsw_product",
            StatementId::ParityIdentity => "parity_identity",
            StatementId::SumCriterion => "sum_criterion",
        }
    }

    /// Short human label printed next to verdicts.
    pub fn label(self) -> &'static str {
        match self {
            StatementId::Redei => "Rédei–Megyesi bound (p+3)/2",
            StatementId::Main => "value-sum degree bound (p-1)/2",
            StatementId::KissSomlai => "Kiss–Somlai bound d >= deg(r)+2",
            StatementId::Proposition => "pigeonhole degree bound (p-1)/3",
            StatementId::ProjectionSupport => "projection support bound p-min(a,b)+2",
            StatementId::GacsGap => "Gács gap ((p+3)/2, floor(2(p-1)/3)+1)",
            StatementId::Szonyi => "Szőnyi bound (k+3)/2",
            StatementId::DswProduct => "Di Benedetto–Solymosi–White bound |A||B|-min+2",
            StatementId::ParityIdentity => "square-composition parity identity",
            StatementId::SumCriterion => "sum criterion: deg < p-1 iff sum = 0",
        }
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatementId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s {
            "redei" => StatementId::Redei,
            "main" => StatementId::Main,
            "kiss_somlai" | "kiss-somlai" | "lemma" => StatementId::KissSomlai,
            "proposition" | "prop" => StatementId::Proposition,
            "projection_support" | "projection-support" | "support" => {
                StatementId::ProjectionSupport
            }
            "gacs_gap" | "gacs" => StatementId::GacsGap,
            "szonyi" => StatementId::Szonyi,
            "dsw_product" | "dsw" | "product" => StatementId::DswProduct,
            "parity_identity" | "parity" => StatementId::ParityIdentity,
            "sum_criterion" | "sum" => StatementId::SumCriterion,
            other => return Err(Error::Parse(format!("unknown statement {other:?}"))),
        };
        Ok(id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    IsLine,
    SumNotP,
    NonzeroAtZero,
    ProductIsLine,
    BoundExceedsDirections,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub statement_id: StatementId,
    pub p: u32,
    pub instance: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<SkipReason>,
    pub witness: Map<String, Value>,
}

impl CheckReport {
    fn new(statement_id: StatementId, p: PrimeModulus, instance: String) -> Self {
        CheckReport {
            statement_id,
            p: p.get(),
            instance,
            passed: false,
            skipped_reason: None,
            witness: Map::new(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.witness.insert(key.to_string(), value);
        self
    }

    fn verdict(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }

    fn skip(mut self, reason: SkipReason) -> Self {
        self.passed = false;
        self.skipped_reason = Some(reason);
        self
    }

    pub fn outcome(&self) -> Outcome {
        match (self.skipped_reason, self.passed) {
            (Some(_), _) => Outcome::Skip,
            (None, true) => Outcome::Pass,
            (None, false) => Outcome::Fail,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn degree_json(d: Option<usize>) -> Value {
    d.map_or(Value::Null, |d| json!(d))
}

fn directions_json(ds: &BTreeSet<Direction>) -> Value {
    serde_json::to_value(ds).expect("directions serialize")
}

fn expect_cardinality(h: &PointSet, expected: usize) -> Result<()> {
    if h.len() != expected {
        return Err(Error::WrongCardinality {
            expected,
            actual: h.len(),
        });
    }
    Ok(())
}

/// `(p+3)/2` for odd p.
pub fn redei_bound(p: PrimeModulus) -> u32 {
    (p.get() + 3) / 2
}

/// Verdict used both by [`check_redei`] and the streaming census.
#[inline]
pub fn redei_holds(p: u32, d: u32, line: bool) -> bool {
    (line && d == 1) || 2 * d >= p + 3
}

pub fn check_redei(h: &PointSet) -> Result<CheckReport> {
    let p = h.modulus();
    expect_cardinality(h, p.order())?;
    let ds = direction_set(h)?;
    let d = ds.len() as u32;
    let line = is_line(h);
    Ok(CheckReport::new(StatementId::Redei, p, h.to_string())
        .with("d", json!(d))
        .with("is_line", json!(line))
        .with("lhs", json!(d))
        .with("rhs", json!(redei_bound(p)))
        .with("directions", directions_json(&ds))
        .verdict(redei_holds(p.get(), d, line)))
}

pub fn check_main(g: &Polynomial) -> CheckReport {
    let p = g.modulus();
    let sum = g.lifted_value_sum();
    let degree = g.degree();
    let report = CheckReport::new(StatementId::Main, p, g.to_string())
        .with("sum", json!(sum))
        .with("degree", degree_json(degree))
        .with("constant", json!(g.is_constant()))
        .with("rhs", json!(p.half()));
    if sum != p.get() as u64 {
        return report.skip(SkipReason::SumNotP);
    }
    let ok = g.is_constant() || degree.is_some_and(|d| d >= p.half() as usize);
    report.with("lhs", degree_json(degree)).verdict(ok)
}

/// Lemma check with `k = 1` over all `p + 1` projection directions.
pub fn check_kiss_somlai(h: &PointSet) -> Result<CheckReport> {
    let p = h.modulus();
    expect_cardinality(h, p.order())?;
    kiss_somlai_report(h, 1)
}

/// Exploratory form for `|A| = k p`. A direction counts as special when some
/// line in that direction does not meet A in exactly `k` points; for `k = 1`
/// this is the same as being determined. Not an authoritative definition
/// for `k >= 2`.
pub fn check_kiss_somlai_general(a: &PointSet, k: usize) -> Result<CheckReport> {
    let p = a.modulus();
    if k == 0 || k >= p.order() {
        return Err(Error::WrongCardinality {
            expected: k * p.order(),
            actual: a.len(),
        });
    }
    expect_cardinality(a, k * p.order())?;
    kiss_somlai_report(a, k)
}

fn kiss_somlai_report(a: &PointSet, k: usize) -> Result<CheckReport> {
    let p = a.modulus();
    let report = CheckReport::new(StatementId::KissSomlai, p, a.to_string());
    let report = if k > 1 {
        report.with("k", json!(k)).with("exploratory", json!(true))
    } else {
        report
    };
    if is_line(a) {
        return Ok(report.skip(SkipReason::IsLine));
    }
    let mut special = Vec::new();
    let mut degrees = Vec::new();
    let mut zero_projections = Vec::new();
    for c in Direction::all(p) {
        let counts = projection_counts(a, c);
        if counts.iter().any(|&n| n as usize != k) {
            special.push(c);
        }
        let deg = projection_polynomial(a, c).degree();
        if deg.is_none() {
            zero_projections.push(c);
        }
        degrees.push(deg);
    }
    let d = special.len();
    let max_degree = degrees.iter().flatten().copied().max();
    let violations: Vec<Direction> = Direction::all(p)
        .zip(&degrees)
        .filter(|(_, deg)| deg.is_some_and(|deg| d < deg + 2))
        .map(|(c, _)| c)
        .collect();
    let per_direction: Map<String, Value> = Direction::all(p)
        .zip(&degrees)
        .map(|(c, &deg)| (c.to_string(), degree_json(deg)))
        .collect();
    Ok(report
        .with("d", json!(d))
        .with("lhs", json!(d))
        .with("rhs", max_degree.map_or(Value::Null, |m| json!(m + 2)))
        .with("degree", degree_json(max_degree))
        .with("degrees", Value::Object(per_direction))
        .with(
            "zero_projections",
            serde_json::to_value(&zero_projections).unwrap(),
        )
        .with("violations", serde_json::to_value(&violations).unwrap())
        .verdict(violations.is_empty()))
}

pub fn check_proposition(g: &Polynomial) -> CheckReport {
    let p = g.modulus();
    let sum = g.lifted_value_sum();
    let degree = g.degree();
    let mult0 = g.value_multiplicity(p.zero());
    let mult1 = g.value_multiplicity(p.one());
    let report = CheckReport::new(StatementId::Proposition, p, g.to_string())
        .with("sum", json!(sum))
        .with("degree", degree_json(degree))
        .with("mult0", json!(mult0))
        .with("mult1", json!(mult1))
        .with("rhs", json!(format!("{}/3", p.get() - 1)));
    if sum != p.get() as u64 {
        return report.skip(SkipReason::SumNotP);
    }
    if g.is_constant() {
        return report.with("constant", json!(true)).verdict(true);
    }
    let target = (p.get() - 1) as usize;
    let mult_ok = 3 * mult0.max(mult1) >= target;
    let degree_ok = degree.is_some_and(|d| 3 * d >= target);
    report
        .with("constant", json!(false))
        .with("lhs", json!(mult0.max(mult1)))
        .with("multiplicity_ok", json!(mult_ok))
        .with("degree_ok", json!(degree_ok))
        .verdict(mult_ok && degree_ok)
}

pub fn check_projection_support(h: &PointSet) -> Result<CheckReport> {
    let p = h.modulus();
    expect_cardinality(h, p.order())?;
    let report = CheckReport::new(StatementId::ProjectionSupport, p, h.to_string());
    if is_line(h) {
        return Ok(report.skip(SkipReason::IsLine));
    }
    let a = h.x_support();
    let b = h.y_support();
    let d = direction_set(h)?.len();
    let bound = p.order() - a.min(b) + 2;
    Ok(report
        .with("a", json!(a))
        .with("b", json!(b))
        .with("d", json!(d))
        .with("lhs", json!(d))
        .with("rhs", json!(bound))
        .verdict(d >= bound))
}

pub fn check_dsw_product(
    p: PrimeModulus,
    xs: &BTreeSet<u32>,
    ys: &BTreeSet<u32>,
) -> Result<CheckReport> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyFactor);
    }
    if xs.len() * ys.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            actual: xs.len() * ys.len(),
        });
    }
    let h = crate::geometry::cartesian_product(p, xs, ys)?;
    let fmt_set = |s: &BTreeSet<u32>| {
        s.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    };
    let instance = format!("A={{{}}} B={{{}}}", fmt_set(xs), fmt_set(ys));
    let (na, nb) = (xs.len(), ys.len());
    let bound = na * nb - na.min(nb) + 2;
    let report = CheckReport::new(StatementId::DswProduct, p, instance)
        .with("size_a", json!(na))
        .with("size_b", json!(nb))
        .with("rhs", json!(bound));
    if na == 1 || nb == 1 {
        return Ok(report.skip(SkipReason::ProductIsLine));
    }
    if bound > p.order() + 1 {
        return Ok(report.skip(SkipReason::BoundExceedsDirections));
    }
    let ds = direction_set(&h)?;
    Ok(report
        .with("d", json!(ds.len()))
        .with("lhs", json!(ds.len()))
        .with("directions", directions_json(&ds))
        .verdict(ds.len() >= bound))
}

pub fn check_parity_identity(g: &Polynomial) -> CheckReport {
    let p = g.modulus();
    let sum = g.lifted_value_sum();
    let report = CheckReport::new(StatementId::ParityIdentity, p, g.to_string())
        .with("sum", json!(sum))
        .with("g0", json!(g.eval_raw(0)));
    if sum != p.get() as u64 {
        return report.skip(SkipReason::SumNotP);
    }
    if g.eval_raw(0) != 0 {
        return report.skip(SkipReason::NonzeroAtZero);
    }
    let f = g.compose_square();
    let mut f_values = f.values().raw().to_vec();
    f_values.sort_unstable();
    let mut expected = vec![g.eval_raw(0)];
    for s in p.elements().filter(|s| s.legendre() == 1) {
        let v = g.eval_raw(s.lift());
        expected.extend([v, v]);
    }
    expected.sort_unstable();
    let multiset_ok = f_values == expected;
    let f_sum = f.lifted_value_sum();
    let even = f_sum.is_multiple_of(2);
    let bounded = f_sum <= 2 * p.get() as u64;
    report
        .with("f", json!(f.to_string()))
        .with("f_sum", json!(f_sum))
        .with("f_sum_mod_p", json!(f_sum % p.get() as u64))
        .with("lhs", json!(f_sum))
        .with("rhs", json!(2 * p.get() as u64))
        .with("multiset_ok", json!(multiset_ok))
        .with("even", json!(even))
        .verdict(multiset_ok && even && bounded)
}

pub fn check_sum_criterion(h: &Polynomial) -> CheckReport {
    let p = h.modulus();
    let m = p;
    let field_sum = (0..p.get()).fold(0, |acc, x| m.add_raw(acc, h.eval_raw(x)));
    let degree = h.degree();
    let low_degree = degree.is_none_or(|d| d < p.order() - 1);
    CheckReport::new(StatementId::SumCriterion, p, h.to_string())
        .with("field_sum", json!(field_sum))
        .with("degree", degree_json(degree))
        .with("lhs", json!(h.sum_criterion()))
        .with("rhs", json!(low_degree))
        .verdict(h.sum_criterion() == low_degree)
}

pub fn check_szonyi(h: &PointSet, k: usize) -> Result<CheckReport> {
    let p = h.modulus();
    if k > p.order() {
        return Err(Error::WrongCardinality {
            expected: p.order(),
            actual: k,
        });
    }
    expect_cardinality(h, k)?;
    let report = CheckReport::new(StatementId::Szonyi, p, h.to_string()).with("k", json!(k));
    if is_line(h) {
        return Ok(report.skip(SkipReason::IsLine));
    }
    let d = direction_set(h)?.len();
    Ok(report
        .with("d", json!(d))
        .with("lhs", json!(2 * d))
        .with("rhs", json!(k + 3))
        .verdict(2 * d >= k + 3))
}

/// Whether a census was exhaustive or sampled; sampled passes are only
/// evidence that no counterexample exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Exhaustive,
    Sampled,
}

/// Open interval `((p+3)/2, floor(2(p-1)/3) + 1)` of forbidden direction counts.
pub fn gacs_interval(p: PrimeModulus) -> (u32, u32) {
    let p = p.get();
    ((p + 3) / 2, 2 * (p - 1) / 3 + 1)
}

/// `census` lists `(d, exemplar)` pairs observed on `p`-point non-line sets.
pub fn check_gacs_gap(p: PrimeModulus, census: &[(u32, String)], grade: Grade) -> CheckReport {
    let (lo, hi) = gacs_interval(p);
    let vacuous = hi <= lo + 1;
    let hits: Vec<&(u32, String)> = census.iter().filter(|(d, _)| lo < *d && *d < hi).collect();
    let forbidden: Vec<u32> = (lo + 1..hi).collect();
    let note = match (vacuous, grade, hits.is_empty()) {
        (true, _, _) => "interval is empty; vacuously true",
        (false, _, false) => "counterexample found",
        (false, Grade::Exhaustive, true) => "no direction count in the interval (exhaustive)",
        (false, Grade::Sampled, true) => "no counterexample found (sampled, evidence only)",
    };
    CheckReport::new(
        StatementId::GacsGap,
        p,
        format!("census(p={p}, entries={})", census.len()),
    )
    .with("interval", json!([lo, hi]))
    .with("forbidden", json!(forbidden))
    .with("vacuous", json!(vacuous))
    .with("grade", serde_json::to_value(grade).unwrap())
    .with(
        "observed_d",
        json!(census.iter().map(|(d, _)| *d).collect::<BTreeSet<_>>()),
    )
    .with(
        "hits",
        json!(hits
            .iter()
            .map(|(d, ex)| json!({"d": d, "exemplar": ex}))
            .collect::<Vec<_>>()),
    )
    .with("note", json!(note))
    .verdict(hits.is_empty())
}
