use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use serde_json::{json, Value};

use dirgeom::census::{
    census_point_sets, classify_extremal_sets, classify_half_degree_polynomials,
    hunt_counterexamples, EnumerationPlan, HuntSummary, Target,
};
use dirgeom::checks::{
    check_dsw_product, check_kiss_somlai, check_kiss_somlai_general, check_main, check_parity_identity,
    check_projection_support, check_proposition, check_redei, check_sum_criterion, check_szonyi,
    CheckReport, Outcome, StatementId,
};
use dirgeom::geometry::{direction_set, is_line, projection_polynomial, Direction};
use dirgeom::{Polynomial, PrimeModulus};

use crate::input::{self, CliError, CliResult};
use crate::{ClassifyTarget, Common, Format, PlanArgs};

fn emit(common: &Common, text: &str) -> CliResult<()> {
    match &common.out {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn degree_str(d: Option<usize>) -> String {
    d.map_or_else(|| "None".to_string(), |d| d.to_string())
}

fn exit_for(failed: bool) -> ExitCode {
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn directions(common: &Common, points: Option<String>, file: Option<PathBuf>) -> CliResult<ExitCode> {
    let p = input::modulus(common.p)?;
    let h = input::points(p, &input::literal(points, file, "--points")?)?;
    let ds = direction_set(&h)?;
    let line = is_line(&h);
    let degrees: Vec<(Direction, Option<usize>)> = Direction::all(p)
        .map(|c| (c, projection_polynomial(&h, c).degree()))
        .collect();
    let text = match common.format {
        Format::Human => {
            let mut s = String::new();
            writeln!(s, "p = {p}, |H| = {}", h.len()).unwrap();
            writeln!(s, "points: {h}").unwrap();
            writeln!(s, "d = {}", ds.len()).unwrap();
            let list: Vec<String> = ds.iter().map(Direction::to_string).collect();
            writeln!(s, "directions: {}", list.join(" ")).unwrap();
            writeln!(s, "is_line: {line}").unwrap();
            writeln!(s, "projection degrees:").unwrap();
            for (c, d) in &degrees {
                writeln!(s, "  {c}: {}", degree_str(*d)).unwrap();
            }
            s
        }
        Format::Json => {
            let per: serde_json::Map<String, Value> = degrees
                .iter()
                .map(|(c, d)| (c.to_string(), json!(d)))
                .collect();
            pretty(&json!({
                "p": p.get(),
                "points": h.to_string(),
                "size": h.len(),
                "d": ds.len(),
                "directions": ds,
                "is_line": line,
                "projection_degrees": per,
            }))
        }
        Format::Csv => {
            let mut s = String::from("p,direction,determined,projection_degree\n");
            for (c, d) in &degrees {
                let deg = d.map(|d| d.to_string()).unwrap_or_default();
                writeln!(s, "{p},{c},{},{deg}", ds.contains(c)).unwrap();
            }
            s
        }
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn interpolate(common: &Common, values: Option<String>, file: Option<PathBuf>) -> CliResult<ExitCode> {
    let p = input::modulus(common.p)?;
    let table = input::values(p, &input::literal(values, file, "--values")?)?;
    let g = Polynomial::interpolate(&table);
    let degree = g.degree();
    let sum = g.lifted_value_sum();
    let criterion = g.sum_criterion();
    let text = match common.format {
        Format::Human => format!(
            "p = {p}\ncoefficients: {g}\nalgebraic: {}\ndegree: {}\nlifted value sum: {sum}\nsum criterion (sum = 0 mod p, i.e. degree < p-1): {criterion}\n",
            g.to_algebraic(),
            degree_str(degree),
        ),
        Format::Json => pretty(&json!({
            "p": p.get(),
            "values": table.raw(),
            "coefficients": g.to_string(),
            "algebraic": g.to_algebraic(),
            "degree": degree,
            "lifted_value_sum": sum,
            "sum_criterion": criterion,
        })),
        Format::Csv => format!(
            "p,coefficients,degree,lifted_value_sum,sum_criterion\n{p},\"{g}\",{},{sum},{criterion}\n",
            degree.map(|d| d.to_string()).unwrap_or_default()
        ),
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn report_text(format: Format, report: &CheckReport) -> String {
    match format {
        Format::Human => {
            let verdict = match report.outcome() {
                Outcome::Pass => "PASS".to_string(),
                Outcome::Fail => "FAIL".to_string(),
                Outcome::Skip => format!(
                    "SKIP ({})",
                    serde_json::to_value(report.skipped_reason).unwrap().as_str().unwrap_or("")
                ),
            };
            let mut s = String::new();
            writeln!(s, "{} [{}]", report.statement_id, report.statement_id.label()).unwrap();
            writeln!(s, "p = {}", report.p).unwrap();
            writeln!(s, "instance: {}", report.instance).unwrap();
            for (k, v) in &report.witness {
                writeln!(s, "  {k}: {v}").unwrap();
            }
            writeln!(s, "verdict: {verdict}").unwrap();
            s
        }
        Format::Json => pretty(report),
        Format::Csv => {
            let skip = report
                .skipped_reason
                .map(|r| serde_json::to_value(r).unwrap().as_str().unwrap().to_string())
                .unwrap_or_default();
            let witness = serde_json::to_string(&report.witness).unwrap().replace('"', "\"\"");
            format!(
                "statement_id,p,instance,passed,skipped_reason,witness\n{},{},\"{}\",{},{},\"{}\"\n",
                report.statement_id, report.p, report.instance, report.passed, skip, witness
            )
        }
    }
}

fn single_instance(
    statement: StatementId,
    p: PrimeModulus,
    points: Option<String>,
    values: Option<String>,
    poly: Option<String>,
) -> CliResult<CheckReport> {
    match statement.target() {
        Target::PointSets => {
            let text = points.ok_or_else(|| {
                CliError::Input(format!("{statement} checks a point set: use --points"))
            })?;
            let h = input::points(p, &text)?;
            Ok(match statement {
                StatementId::Redei => check_redei(&h)?,
                StatementId::KissSomlai if h.len() > p.order() && h.len() % p.order() == 0 => {
                    check_kiss_somlai_general(&h, h.len() / p.order())?
                }
                StatementId::KissSomlai => check_kiss_somlai(&h)?,
                StatementId::ProjectionSupport => check_projection_support(&h)?,
                StatementId::Szonyi => check_szonyi(&h, h.len())?,
                _ => {
                    return Err(CliError::Input(format!(
                        "{statement} needs a census: use --exhaustive or --sample"
                    )))
                }
            })
        }
        Target::Functions => {
            let g = match (values, poly) {
                (Some(v), None) => Polynomial::interpolate(&input::values(p, &v)?),
                (None, Some(c)) => input::polynomial(p, &c)?,
                _ => {
                    return Err(CliError::Input(format!(
                        "{statement} checks a function: use exactly one of --values or --poly"
                    )))
                }
            };
            Ok(match statement {
                StatementId::Main => check_main(&g),
                StatementId::Proposition => check_proposition(&g),
                StatementId::ParityIdentity => check_parity_identity(&g),
                StatementId::SumCriterion => check_sum_criterion(&g),
                _ => unreachable!(),
            })
        }
        _ => Err(CliError::Input(
            "single products are checked with the `product` subcommand".into(),
        )),
    }
}

fn build_plan(p: PrimeModulus, target: Target, args: &PlanArgs) -> CliResult<EnumerationPlan> {
    let plan = match (args.exhaustive, args.sample) {
        (true, None) => EnumerationPlan::exhaustive(p, target),
        (false, Some(n)) => {
            let mut plan = EnumerationPlan::sampled(p, target, n, args.seed);
            plan.seed = args.seed;
            plan
        }
        _ => {
            return Err(CliError::Input(
                "choose --exhaustive or --sample N".into(),
            ))
        }
    };
    let chunks = args.chunks.unwrap_or(args.workers.max(1) * 4);
    let mut plan = plan.with_workers(args.workers, chunks);
    plan.k = args.k;
    plan.max_witnesses = args.max_witnesses;
    Ok(plan)
}

fn summary_text(format: Format, s: &HuntSummary) -> String {
    let k = s.k.map(|k| k.to_string()).unwrap_or_default();
    let mode = serde_json::to_value(s.mode).unwrap().as_str().unwrap().to_string();
    match format {
        Format::Human => {
            let mut out = String::new();
            writeln!(out, "{} [{}]", s.statement_id, s.statement_id.label()).unwrap();
            write!(out, "p = {}", s.p).unwrap();
            if let Some(k) = s.k {
                write!(out, ", k = {k}").unwrap();
            }
            write!(out, ", mode = {mode}").unwrap();
            if let Some(seed) = s.seed {
                write!(out, ", seed = {seed}").unwrap();
            }
            writeln!(out).unwrap();
            writeln!(
                out,
                "scanned {}: pass {}, skip {}, fail {}",
                s.scanned, s.passed, s.skipped, s.failed
            )
            .unwrap();
            for r in &s.summary_reports {
                for key in ["interval", "forbidden", "observed_d", "grade", "note"] {
                    if let Some(v) = r.witness.get(key) {
                        writeln!(out, "  {key}: {v}").unwrap();
                    }
                }
            }
            for r in s.failures.iter().take(10) {
                writeln!(out, "counterexample: {}", r.to_json_line()).unwrap();
            }
            let verdict = if s.failed == 0 {
                if s.mode == dirgeom::census::Mode::Sampled {
                    "PASS (no counterexample found; sampled evidence)"
                } else {
                    "PASS"
                }
            } else {
                "FAIL"
            };
            writeln!(out, "verdict: {verdict}").unwrap();
            out
        }
        Format::Json => pretty(s),
        Format::Csv => format!(
            "statement_id,p,k,mode,seed,scanned,passed,skipped,failed\n{},{},{k},{mode},{},{},{},{},{}\n",
            s.statement_id,
            s.p,
            s.seed.map(|v| v.to_string()).unwrap_or_default(),
            s.scanned,
            s.passed,
            s.skipped,
            s.failed
        ),
    }
}

pub fn verify(
    statement: &str,
    common: &Common,
    args: &PlanArgs,
    points: Option<String>,
    values: Option<String>,
    poly: Option<String>,
) -> CliResult<ExitCode> {
    let statement: StatementId = statement.parse()?;
    let p = input::modulus(common.p)?;
    if points.is_some() || values.is_some() || poly.is_some() {
        let report = single_instance(statement, p, points, values, poly)?;
        emit(common, &report_text(common.format, &report))?;
        return Ok(exit_for(report.outcome() == Outcome::Fail));
    }
    let plan = build_plan(p, statement.target(), args)?;
    let summary = hunt_counterexamples(&plan, statement)?;
    // --out receives the counterexample stream, one report per line
    if let Some(path) = &common.out {
        let mut jsonl = String::new();
        for r in summary.failures.iter().chain(&summary.summary_reports) {
            jsonl.push_str(&r.to_json_line());
            jsonl.push('\n');
        }
        write_file(path, &jsonl)?;
    }
    print!("{}", summary_text(common.format, &summary));
    Ok(exit_for(summary.failed > 0))
}

pub fn classify(target: ClassifyTarget, common: &Common, workers: usize) -> CliResult<ExitCode> {
    let p = input::modulus(common.p)?;
    let (json_value, classes, human) = match target {
        ClassifyTarget::Polys => {
            let c = classify_half_degree_polynomials(p, workers)?;
            let mut h = String::new();
            writeln!(h, "p = {p}: polynomials of degree {} with lifted value sum {p}", c.degree).unwrap();
            writeln!(h, "scanned {}, qualifying {}, orbits {}", c.scanned, c.qualifying, c.orbit_count).unwrap();
            writeln!(h, "reference {} present: {}", c.reference, c.reference_present).unwrap();
            writeln!(h, "reference orbit is the only orbit: {}", c.reference_is_only_orbit).unwrap();
            for o in &c.output_images_of_reference {
                writeln!(
                    h,
                    "class {} = {}*g + {} for g in the reference orbit (output map)",
                    o.canonical, o.alpha, o.beta
                )
                .unwrap();
            }
            for n in &c.notes {
                writeln!(h, "note: {n}").unwrap();
            }
            (serde_json::to_value(&c).unwrap(), c.classes, h)
        }
        ClassifyTarget::Sets => {
            let c = classify_extremal_sets(p, workers)?;
            let mut h = String::new();
            writeln!(h, "p = {p}: {p}-point non-line sets with exactly {} directions", c.target_d).unwrap();
            writeln!(h, "scanned {}, extremal {}, orbits {}", c.scanned, c.extremal, c.orbit_count).unwrap();
            writeln!(h, "all members re-verified: {}", c.all_reverified).unwrap();
            (serde_json::to_value(&c).unwrap(), c.classes, h)
        }
    };
    let text = match common.format {
        Format::Json => pretty(&json_value),
        Format::Human => {
            let mut h = human;
            for c in &classes {
                writeln!(
                    h,
                    "  {} | {} | orbit size {} | seen {}",
                    c.canonical, c.representative, c.orbit_size, c.members_seen
                )
                .unwrap();
            }
            h
        }
        Format::Csv => {
            let mut s = String::from("canonical,representative,orbit_size,members_seen\n");
            for c in &classes {
                writeln!(
                    s,
                    "\"{}\",\"{}\",{},{}",
                    c.canonical, c.representative, c.orbit_size, c.members_seen
                )
                .unwrap();
            }
            s
        }
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn product(common: &Common, xs: &str, ys: &str) -> CliResult<ExitCode> {
    let p = input::modulus(common.p)?;
    let a = input::residue_set(p, xs)?;
    let b = input::residue_set(p, ys)?;
    let report = check_dsw_product(p, &a, &b)?;
    emit(common, &report_text(common.format, &report))?;
    Ok(exit_for(report.outcome() == Outcome::Fail))
}

pub fn census(common: &Common, args: &PlanArgs) -> CliResult<ExitCode> {
    let p = input::modulus(common.p)?;
    let plan = build_plan(p, Target::PointSets, args)?;
    let c = census_point_sets(&plan)?;
    let text = match common.format {
        Format::Csv => c.to_csv(),
        Format::Json => pretty(&json!({
            "p": c.p,
            "k": c.k,
            "grade": c.grade,
            "scanned": c.scanned,
            "rows": c.counts.iter().map(|(d, n)| json!({
                "d": d,
                "count": n,
                "exemplar": c.exemplar(*d).map(|h| h.to_string()),
            })).collect::<Vec<_>>(),
        })),
        Format::Human => {
            let mut s = String::new();
            writeln!(s, "p = {}, k = {}, scanned {}", c.p, c.k, c.scanned).unwrap();
            for (d, n) in &c.counts {
                let ex = c.exemplar(*d).map(|h| h.to_string()).unwrap_or_default();
                writeln!(s, "  d = {d}: {n} (e.g. {ex})").unwrap();
            }
            s
        }
    };
    emit(common, &text)?;
    Ok(ExitCode::SUCCESS)
}
