//! Exhaustive and sampled instance streams, streaming censuses,
//! counterexample hunts and orbit classification.
//!
//! Every run is split into contiguous index ranges ("chunks") processed on a
//! rayon pool and merged in chunk order. Sampled instance `i` draws from its
//! own ChaCha stream keyed by `(seed, i)`, so the chunking never changes what
//! is sampled.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::Range;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{
    check_dsw_product, check_gacs_gap, check_kiss_somlai, check_main, check_parity_identity,
    check_projection_support, check_proposition, check_redei, check_sum_criterion,
    check_szonyi, redei_bound, redei_holds, CheckReport, Grade, Outcome, StatementId,
};
use crate::error::{Error, Result};
use crate::fp::PrimeModulus;
use crate::geometry::{
    direction_of, for_each_image, grid_key_bytes, grid_key_insert, line_index, Direction, GridKey,
    Point, PointSet,
};
use crate::poly::{Polynomial, PowerTable, ValueTable};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const FUNCTIONS_EXHAUSTIVE_MAX_P: u32 = 7;
pub const SUBSETS_EXHAUSTIVE_MAX: u64 = 100_000_000;
pub const POLY_CLASSIFY_MAX_P: u32 = 13;
pub const SET_CLASSIFY_MAX_P: u32 = 7;
pub const PRODUCTS_EXHAUSTIVE_MAX_P: u32 = 11;
/// Direction bitmasks need `p + 1 <= 64` bits and a `p^4` lookup table.
pub const KERNEL_MAX_P: u32 = 31;
pub const DEFAULT_MAX_WITNESSES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Functions,
    PointSets,
    PolynomialsHalfDegree,
    ProductSets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

impl Mode {
    pub fn grade(self) -> Grade {
        match self {
            Mode::Exhaustive => Grade::Exhaustive,
            Mode::Sampled => Grade::Sampled,
        }
    }
}

impl StatementId {
    /// The instance family each statement is checked over.
    pub fn target(self) -> Target {
        match self {
            StatementId::Main
            | StatementId::Proposition
            | StatementId::ParityIdentity
            | StatementId::SumCriterion => Target::Functions,
            StatementId::Redei
            | StatementId::KissSomlai
            | StatementId::ProjectionSupport
            | StatementId::GacsGap
            | StatementId::Szonyi => Target::PointSets,
            StatementId::DswProduct => Target::ProductSets,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationPlan {
    pub p: PrimeModulus,
    pub target: Target,
    pub mode: Mode,
    pub sample_count: u64,
    pub seed: u64,
    pub worker_chunks: usize,
    pub workers: usize,
    /// Point-set cardinality; `None` means `p`.
    pub k: Option<usize>,
    pub max_witnesses: usize,
}

impl EnumerationPlan {
    pub fn exhaustive(p: PrimeModulus, target: Target) -> Self {
        EnumerationPlan {
            p,
            target,
            mode: Mode::Exhaustive,
            sample_count: 0,
            seed: DEFAULT_SEED,
            worker_chunks: 1,
            workers: 1,
            k: None,
            max_witnesses: DEFAULT_MAX_WITNESSES,
        }
    }

    pub fn sampled(p: PrimeModulus, target: Target, sample_count: u64, seed: u64) -> Self {
        EnumerationPlan {
            mode: Mode::Sampled,
            sample_count,
            seed,
            ..Self::exhaustive(p, target)
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_workers(mut self, workers: usize, worker_chunks: usize) -> Self {
        self.workers = workers.max(1);
        self.worker_chunks = worker_chunks.max(1);
        self
    }

    pub fn cardinality(&self) -> usize {
        self.k.unwrap_or(self.p.order())
    }

    /// Number of instances the plan streams.
    pub fn instance_count(&self) -> u64 {
        if self.mode == Mode::Sampled {
            return self.sample_count;
        }
        let p = self.p.get() as u64;
        match self.target {
            Target::Functions => p.pow(p as u32),
            Target::PointSets => {
                binomial(p * p, self.cardinality() as u64).min(u64::MAX as u128) as u64
            }
            Target::PolynomialsHalfDegree => (p - 1) * p.pow(self.p.half()),
            Target::ProductSets => {
                let s = (1u64 << p) - 1;
                s * s
            }
        }
    }

    /// Hard feasibility guards.
    pub fn validate(&self) -> Result<()> {
        let p = self.p.get();
        let k = self.cardinality();
        if self.target == Target::PointSets {
            if k < 2 || k > self.p.order() * self.p.order() {
                return Err(Error::Guard(format!("point-set size k = {k} must be in 2..=p^2")));
            }
            if p > KERNEL_MAX_P {
                return Err(Error::Guard(format!(
                    "point-set censuses support p <= {KERNEL_MAX_P} (got {p})"
                )));
            }
        }
        if self.mode == Mode::Sampled {
            return Ok(());
        }
        match self.target {
            Target::Functions if p > FUNCTIONS_EXHAUSTIVE_MAX_P => Err(Error::Guard(format!(
                "exhaustive function enumeration needs p <= {FUNCTIONS_EXHAUSTIVE_MAX_P} (got {p})"
            ))),
            Target::PointSets => {
                let n = binomial((p as u64).pow(2), k as u64);
                if n > SUBSETS_EXHAUSTIVE_MAX as u128 {
                    Err(Error::Guard(format!(
                        "C({}, {k}) = {n} exceeds the exhaustive limit {SUBSETS_EXHAUSTIVE_MAX}",
                        p * p
                    )))
                } else {
                    Ok(())
                }
            }
            Target::PolynomialsHalfDegree if p > POLY_CLASSIFY_MAX_P => Err(Error::Guard(format!(
                "half-degree polynomial enumeration needs p <= {POLY_CLASSIFY_MAX_P} (got {p})"
            ))),
            Target::ProductSets if p > PRODUCTS_EXHAUSTIVE_MAX_P => Err(Error::Guard(format!(
                "exhaustive product enumeration needs p <= {PRODUCTS_EXHAUSTIVE_MAX_P} (got {p})"
            ))),
            _ => Ok(()),
        }
    }
}

/// Per-instance generator; independent of how instances are chunked.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Split `0..total` into at most `chunks` contiguous ranges.
pub fn chunk_ranges(total: u64, chunks: usize) -> Vec<Range<u64>> {
    let chunks = (chunks.max(1) as u64).min(total.max(1));
    let base = total / chunks;
    let extra = total % chunks;
    let mut out = Vec::with_capacity(chunks as usize);
    let mut start = 0;
    for i in 0..chunks {
        let len = base + u64::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Run `f` over the plan's chunks on a pool of `plan.workers` threads;
/// results come back in chunk order.
fn run_chunks<T, F>(plan: &EnumerationPlan, total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    let ranges = chunk_ranges(total, plan.worker_chunks);
    if plan.workers <= 1 {
        return ranges.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .expect("thread pool");
    pool.install(|| ranges.into_par_iter().map(f).collect())
}

// ---------------------------------------------------------------------------
// Functions F_p -> F_p

/// Value table number `index` in lexicographic order (x = 0 most significant).
pub fn function_values_at(p: PrimeModulus, mut index: u64, out: &mut [u32]) {
    let base = p.get() as u64;
    for slot in out.iter_mut().rev() {
        *slot = (index % base) as u32;
        index /= base;
    }
}

pub fn sampled_function_values(p: PrimeModulus, seed: u64, index: u64, out: &mut [u32]) {
    let mut rng = instance_rng(seed, index);
    for slot in out.iter_mut() {
        *slot = rng.gen_range(0..p.get());
    }
}

fn fill_function(plan: &EnumerationPlan, index: u64, out: &mut [u32]) {
    match plan.mode {
        Mode::Exhaustive => function_values_at(plan.p, index, out),
        Mode::Sampled => sampled_function_values(plan.p, plan.seed, index, out),
    }
}

/// Every function exactly once (or a seeded sample), optionally keeping
/// only those whose lifted values sum to `p`.
pub fn enumerate_functions(
    plan: &EnumerationPlan,
    filter_sum_p: bool,
) -> Result<impl Iterator<Item = Polynomial> + '_> {
    check_target(plan, Target::Functions)?;
    plan.validate()?;
    let p = plan.p;
    let mut buf = vec![0u32; p.order()];
    Ok((0..plan.instance_count()).filter_map(move |i| {
        fill_function(plan, i, &mut buf);
        let sum: u64 = buf.iter().map(|&v| v as u64).sum();
        if filter_sum_p && sum != p.get() as u64 {
            return None;
        }
        Some(Polynomial::interpolate(&ValueTable::from_raw(p, buf.clone())))
    }))
}

fn check_target(plan: &EnumerationPlan, target: Target) -> Result<()> {
    if plan.target != target {
        return Err(Error::Guard(format!(
            "plan target {:?} does not match {:?}",
            plan.target, target
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// k-subsets of the p^2 cells

/// The combination of rank `rank` among k-subsets of `0..n` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for i in 0..k {
        loop {
            let rest = binomial((n - next - 1) as u64, (k - i - 1) as u64) as u64;
            if rank < rest {
                break;
            }
            rank -= rest;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Advance to the next combination; returns the first changed position.
#[inline]
fn next_combination(c: &mut [usize], n: usize) -> Option<usize> {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return Some(i);
        }
    }
    None
}

/// Lookup of `1 << direction_index` for every ordered pair of cells.
#[derive(Clone, Debug)]
pub struct DirectionKernel {
    p: PrimeModulus,
    n: usize,
    bits: Vec<u64>,
}

impl DirectionKernel {
    pub fn new(p: PrimeModulus) -> Result<Self> {
        if p.get() > KERNEL_MAX_P {
            return Err(Error::Guard(format!(
                "direction kernel supports p <= {KERNEL_MAX_P} (got {p})"
            )));
        }
        let q = p.order();
        let n = q * q;
        let mut bits = vec![0u64; n * n];
        for a in 0..n {
            let pa = Point::new((a / q) as u32, (a % q) as u32);
            for b in 0..n {
                if a != b {
                    let pb = Point::new((b / q) as u32, (b % q) as u32);
                    let dir = direction_of(p, pa, pb).expect("distinct");
                    bits[a * n + b] = 1 << dir.index(p);
                }
            }
        }
        Ok(DirectionKernel { p, n, bits })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn pair(&self, a: usize, b: usize) -> u64 {
        self.bits[a * self.n + b]
    }

    /// Bitmask of directions determined by the cells.
    pub fn mask(&self, cells: &[usize]) -> u64 {
        let mut m = 0;
        for (i, &a) in cells.iter().enumerate() {
            let row = &self.bits[a * self.n..(a + 1) * self.n];
            for &b in &cells[i + 1..] {
                m |= row[b];
            }
        }
        m
    }

    /// Visit the k-subsets with lexicographic ranks in `range`, maintaining
    /// direction masks of every prefix so that each step only pays for the
    /// positions that changed.
    pub fn scan_subsets<F: FnMut(&[usize], u64)>(&self, k: usize, range: Range<u64>, mut f: F) {
        if range.is_empty() {
            return;
        }
        let n = self.n;
        let mut c = unrank_combination(n, k, range.start);
        let mut prefix = vec![0u64; k];
        let mut from = 0;
        let mut remaining = range.end - range.start;
        loop {
            for i in from.max(1)..k {
                let row = &self.bits[c[i] * n..(c[i] + 1) * n];
                let mut m = prefix[i - 1];
                for &a in &c[..i] {
                    m |= row[a];
                }
                prefix[i] = m;
            }
            f(&c, prefix[k - 1]);
            remaining -= 1;
            if remaining == 0 {
                break;
            }
            match next_combination(&mut c, n) {
                Some(i) => from = i,
                None => break,
            }
        }
    }
}

/// Sorted cells of sampled subset number `index`.
pub fn sampled_subset(n: usize, k: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = instance_rng(seed, index);
    let mut cells = sample_indices(&mut rng, n, k).into_vec();
    cells.sort_unstable();
    cells
}

fn for_each_subset<F: FnMut(&[usize], u64)>(
    plan: &EnumerationPlan,
    kernel: &DirectionKernel,
    range: Range<u64>,
    mut f: F,
) {
    let k = plan.cardinality();
    match plan.mode {
        Mode::Exhaustive => kernel.scan_subsets(k, range, f),
        Mode::Sampled => {
            for i in range {
                let cells = sampled_subset(kernel.cells(), k, plan.seed, i);
                let m = kernel.mask(&cells);
                f(&cells, m);
            }
        }
    }
}

pub fn enumerate_point_sets(plan: &EnumerationPlan) -> Result<impl Iterator<Item = PointSet> + '_> {
    check_target(plan, Target::PointSets)?;
    plan.validate()?;
    let p = plan.p;
    let n = p.order() * p.order();
    let k = plan.cardinality();
    let total = plan.instance_count();
    let mut current: Option<Vec<usize>> = None;
    Ok((0..total).map(move |i| {
        let cells = match plan.mode {
            Mode::Sampled => sampled_subset(n, k, plan.seed, i),
            Mode::Exhaustive => {
                let next = match current.take() {
                    None => unrank_combination(n, k, 0),
                    Some(mut c) => {
                        next_combination(&mut c, n);
                        c
                    }
                };
                current = Some(next.clone());
                next
            }
        };
        PointSet::from_cells(p, &cells)
    }))
}

fn cells_to_string(p: PrimeModulus, cells: &[usize]) -> String {
    PointSet::from_cells(p, cells).to_string()
}

/// Counts of direction numbers over a point-set stream. Lines are exactly
/// the sets with `d = 1`. The exemplar for each `d` is the lexicographically
/// least cell list observed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub p: u32,
    pub k: usize,
    pub grade: Grade,
    pub scanned: u64,
    pub counts: BTreeMap<u32, u64>,
    pub exemplars: BTreeMap<u32, Vec<usize>>,
}

impl Census {
    fn empty(plan: &EnumerationPlan) -> Self {
        Census {
            p: plan.p.get(),
            k: plan.cardinality(),
            grade: plan.mode.grade(),
            scanned: 0,
            counts: BTreeMap::new(),
            exemplars: BTreeMap::new(),
        }
    }

    fn merge(&mut self, other: Census) {
        self.scanned += other.scanned;
        for (d, c) in other.counts {
            *self.counts.entry(d).or_default() += c;
        }
        for (d, ex) in other.exemplars {
            match self.exemplars.get(&d) {
                Some(cur) if *cur <= ex => {}
                _ => {
                    self.exemplars.insert(d, ex);
                }
            }
        }
    }

    fn modulus(&self) -> PrimeModulus {
        PrimeModulus::new(self.p as u64).expect("census prime")
    }

    pub fn lines(&self) -> u64 {
        self.counts.get(&1).copied().unwrap_or(0)
    }

    /// Smallest `d` among non-line sets.
    pub fn min_nonline_d(&self) -> Option<u32> {
        self.counts.keys().copied().find(|&d| d > 1)
    }

    pub fn count(&self, d: u32) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    pub fn exemplar(&self, d: u32) -> Option<PointSet> {
        self.exemplars
            .get(&d)
            .map(|cells| PointSet::from_cells(self.modulus(), cells))
    }

    /// `(d, exemplar)` for every non-line direction count.
    pub fn nonline_entries(&self) -> Vec<(u32, String)> {
        let p = self.modulus();
        self.exemplars
            .iter()
            .filter(|(&d, _)| d > 1)
            .map(|(&d, cells)| (d, cells_to_string(p, cells)))
            .collect()
    }

    /// CSV with columns `p,k,d,count,exemplar`.
    pub fn to_csv(&self) -> String {
        let p = self.modulus();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["p", "k", "d", "count", "exemplar"]).unwrap();
        for (&d, &count) in &self.counts {
            let ex = self
                .exemplars
                .get(&d)
                .map(|c| cells_to_string(p, c))
                .unwrap_or_default();
            w.write_record([
                self.p.to_string(),
                self.k.to_string(),
                d.to_string(),
                count.to_string(),
                ex,
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub fn census_point_sets(plan: &EnumerationPlan) -> Result<Census> {
    check_target(plan, Target::PointSets)?;
    plan.validate()?;
    let kernel = DirectionKernel::new(plan.p)?;
    let exhaustive = plan.mode == Mode::Exhaustive;
    let parts = run_chunks(plan, plan.instance_count(), |range| {
        let mut counts = [0u64; 65];
        let mut exemplars: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut scanned = 0u64;
        for_each_subset(plan, &kernel, range, |cells, mask| {
            let d = mask.count_ones();
            scanned += 1;
            counts[d as usize] += 1;
            // lexicographic scans meet the least exemplar first
            if counts[d as usize] == 1 || !exhaustive {
                match exemplars.get(&d) {
                    Some(cur) if cur.as_slice() <= cells => {}
                    _ => {
                        exemplars.insert(d, cells.to_vec());
                    }
                }
            }
        });
        let mut part = Census::empty(plan);
        part.scanned = scanned;
        part.exemplars = exemplars;
        for (d, &c) in counts.iter().enumerate() {
            if c > 0 {
                part.counts.insert(d as u32, c);
            }
        }
        part
    });
    let mut census = Census::empty(plan);
    for part in parts {
        census.merge(part);
    }
    Ok(census)
}

// ---------------------------------------------------------------------------
// Counterexample hunting

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
struct Tally {
    scanned: u64,
    passed: u64,
    skipped: u64,
    failed: u64,
    failures: Vec<CheckReport>,
}

impl Tally {
    fn record(&mut self, report: CheckReport, cap: usize) {
        self.scanned += 1;
        match report.outcome() {
            Outcome::Pass => self.passed += 1,
            Outcome::Skip => self.skipped += 1,
            Outcome::Fail => {
                self.failed += 1;
                if self.failures.len() < cap {
                    self.failures.push(report);
                }
            }
        }
    }

    fn merge(&mut self, other: Tally, cap: usize) {
        self.scanned += other.scanned;
        self.passed += other.passed;
        self.skipped += other.skipped;
        self.failed += other.failed;
        let room = cap.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HuntSummary {
    pub statement_id: StatementId,
    pub p: u32,
    pub k: Option<usize>,
    pub target: Target,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub scanned: u64,
    pub passed: u64,
    pub skipped: u64,
    pub failed: u64,
    /// Failing reports, at most `max_witnesses` of them, in stream order.
    pub failures: Vec<CheckReport>,
    /// Extra reports that summarize the whole run (the gap check).
    pub summary_reports: Vec<CheckReport>,
}

/// Run a statement's checker over every instance of the plan.
pub fn hunt_counterexamples(plan: &EnumerationPlan, statement: StatementId) -> Result<HuntSummary> {
    check_target(plan, statement.target())?;
    plan.validate()?;
    let cap = plan.max_witnesses;
    let total = plan.instance_count();
    let mut summary_reports = Vec::new();
    let tally = match statement.target() {
        Target::Functions => hunt_functions(plan, statement, total),
        Target::PointSets if statement == StatementId::GacsGap => {
            let census = census_point_sets(plan)?;
            let report = check_gacs_gap(plan.p, &census.nonline_entries(), plan.mode.grade());
            let mut t = Tally {
                scanned: census.scanned,
                skipped: census.lines(),
                passed: census.scanned - census.lines(),
                ..Tally::default()
            };
            if report.outcome() == Outcome::Fail {
                t.passed = census.scanned - census.lines() - hits_count(&census, plan.p);
                t.failed = hits_count(&census, plan.p);
                t.failures.push(report.clone());
            }
            summary_reports.push(report);
            t
        }
        Target::PointSets => hunt_point_sets(plan, statement, total)?,
        Target::ProductSets => hunt_products(plan, total),
        Target::PolynomialsHalfDegree => unreachable!("no statement targets this family"),
    };
    let mut failures = tally.failures;
    failures.truncate(cap);
    Ok(HuntSummary {
        statement_id: statement,
        p: plan.p.get(),
        k: (statement.target() == Target::PointSets).then(|| plan.cardinality()),
        target: plan.target,
        mode: plan.mode,
        seed: (plan.mode == Mode::Sampled).then_some(plan.seed),
        scanned: tally.scanned,
        passed: tally.passed,
        skipped: tally.skipped,
        failed: tally.failed,
        failures,
        summary_reports,
    })
}

fn hits_count(census: &Census, p: PrimeModulus) -> u64 {
    let (lo, hi) = crate::checks::gacs_interval(p);
    census
        .counts
        .iter()
        .filter(|(&d, _)| lo < d && d < hi)
        .map(|(_, &c)| c)
        .sum()
}

fn hunt_functions(plan: &EnumerationPlan, statement: StatementId, total: u64) -> Tally {
    let p = plan.p;
    let cap = plan.max_witnesses;
    let parts = run_chunks(plan, total, |range| {
        let mut tally = Tally::default();
        let mut buf = vec![0u32; p.order()];
        for i in range {
            fill_function(plan, i, &mut buf);
            let sum: u64 = buf.iter().map(|&v| v as u64).sum();
            if statement != StatementId::SumCriterion && sum != p.get() as u64 {
                // the checker would report SumNotP; no need to interpolate
                tally.scanned += 1;
                tally.skipped += 1;
                continue;
            }
            let g = Polynomial::interpolate(&ValueTable::from_raw(p, buf.clone()));
            let report = match statement {
                StatementId::Main => check_main(&g),
                StatementId::Proposition => check_proposition(&g),
                StatementId::ParityIdentity => check_parity_identity(&g),
                StatementId::SumCriterion => check_sum_criterion(&g),
                _ => unreachable!(),
            };
            tally.record(report, cap);
        }
        tally
    });
    merge_tallies(parts, cap)
}

fn merge_tallies(parts: Vec<Tally>, cap: usize) -> Tally {
    let mut out = Tally::default();
    for t in parts {
        out.merge(t, cap);
    }
    out
}

fn hunt_point_sets(plan: &EnumerationPlan, statement: StatementId, total: u64) -> Result<Tally> {
    let p = plan.p;
    let k = plan.cardinality();
    if matches!(
        statement,
        StatementId::Redei | StatementId::KissSomlai | StatementId::ProjectionSupport
    ) && k != p.order()
    {
        return Err(Error::WrongCardinality {
            expected: p.order(),
            actual: k,
        });
    }
    if statement == StatementId::Szonyi && k > p.order() {
        return Err(Error::Guard(format!("Szőnyi checks need k <= p (got k = {k})")));
    }
    let kernel = DirectionKernel::new(p)?;
    let powers = PowerTable::new(p);
    let cap = plan.max_witnesses;
    let parts = run_chunks(plan, total, |range| {
        let mut tally = Tally::default();
        let mut counts = vec![0u32; p.order()];
        for_each_subset(plan, &kernel, range, |cells, mask| {
            let d = mask.count_ones();
            let line = d == 1;
            let full = || PointSet::from_cells(p, cells);
            match statement {
                StatementId::Redei => {
                    if redei_holds(p.get(), d, line) {
                        tally.scanned += 1;
                        tally.passed += 1;
                    } else {
                        tally.record(check_redei(&full()).expect("p points"), cap);
                    }
                }
                StatementId::Szonyi => {
                    tally.scanned += 1;
                    if line {
                        tally.skipped += 1;
                    } else if 2 * d as usize >= k + 3 {
                        tally.passed += 1;
                    } else {
                        tally.scanned -= 1;
                        tally.record(check_szonyi(&full(), k).expect("k points"), cap);
                    }
                }
                StatementId::KissSomlai | StatementId::ProjectionSupport => {
                    if line {
                        tally.scanned += 1;
                        tally.skipped += 1;
                        return;
                    }
                    if statement == StatementId::KissSomlai
                        && !lemma_violated(p, &powers, cells, d, &mut counts)
                    {
                        tally.scanned += 1;
                        tally.passed += 1;
                        return;
                    }
                    let h = full();
                    let report = if statement == StatementId::KissSomlai {
                        check_kiss_somlai(&h)
                    } else {
                        check_projection_support(&h)
                    };
                    tally.record(report.expect("p points"), cap);
                }
                _ => unreachable!(),
            }
        });
        tally
    });
    Ok(merge_tallies(parts, cap))
}

/// Some direction has a projection polynomial of degree `> d - 2`.
fn lemma_violated(p: PrimeModulus, powers: &PowerTable, cells: &[usize], d: u32, counts: &mut [u32]) -> bool {
    let n = p.get();
    Direction::all(p).any(|c| {
        counts.fill(0);
        for &cell in cells {
            let pt = Point::new(cell as u32 / n, cell as u32 % n);
            counts[line_index(p, c, pt) as usize] += 1;
        }
        powers.has_degree_at_least(counts, (d as usize).saturating_sub(1))
    })
}

fn subset_from_mask(mask: u64) -> BTreeSet<u32> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

fn hunt_products(plan: &EnumerationPlan, total: u64) -> Tally {
    let p = plan.p;
    let side = (1u64 << p.get()) - 1;
    let cap = plan.max_witnesses;
    let parts = run_chunks(plan, total, |range| {
        let mut tally = Tally::default();
        for i in range {
            let (ma, mb) = match plan.mode {
                Mode::Exhaustive => (i / side + 1, i % side + 1),
                Mode::Sampled => {
                    let mut rng = instance_rng(plan.seed, i);
                    (rng.gen_range(1..=side), rng.gen_range(1..=side))
                }
            };
            if ma.count_ones() * mb.count_ones() < 2 {
                // a single point has no direction
                tally.scanned += 1;
                tally.skipped += 1;
                continue;
            }
            let report = check_dsw_product(p, &subset_from_mask(ma), &subset_from_mask(mb))
                .expect("nonempty factors");
            tally.record(report, cap);
        }
        tally
    });
    merge_tallies(parts, cap)
}

// ---------------------------------------------------------------------------
// Orbit classification

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub canonical: String,
    pub representative: String,
    pub orbit_size: u64,
    pub members_seen: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyClassification {
    pub p: u32,
    pub degree: u32,
    pub scanned: u64,
    pub qualifying: u64,
    pub orbit_count: usize,
    pub classes: Vec<OrbitClass>,
    pub reference: String,
    pub reference_present: bool,
    pub reference_is_only_orbit: bool,
    /// Canonical forms of classes reachable from the reference orbit by an
    /// output map `g -> alpha*g + beta`, with one such `(alpha, beta)`.
    pub output_images_of_reference: Vec<OutputImage>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputImage {
    pub canonical: String,
    pub alpha: u32,
    pub beta: u32,
}

/// `(alpha, beta)` with `alpha * g + beta` in `targets`, if any.
fn output_map_into(g: &Polynomial, targets: &BTreeSet<Polynomial>) -> Option<(u32, u32)> {
    let p = g.modulus();
    for alpha in 1..p.get() {
        for beta in 0..p.get() {
            let coeffs: Vec<u64> = g
                .coefficients()
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let v = p.mul_raw(alpha, c);
                    (if i == 0 { p.add_raw(v, beta) } else { v }) as u64
                })
                .collect();
            if targets.contains(&Polynomial::from_coeffs(p, &coeffs)) {
                return Some((alpha, beta));
            }
        }
    }
    None
}

/// Least coefficient vector in the orbit of `g` under `x -> a x + b`, and the orbit itself.
pub fn polynomial_orbit(g: &Polynomial) -> BTreeSet<Polynomial> {
    let p = g.modulus();
    let mut orbit = BTreeSet::new();
    for a in 1..p.get() {
        for b in 0..p.get() {
            orbit.insert(g.substitute_raw(a, b));
        }
    }
    orbit
}

/// All polynomials of degree exactly `(p-1)/2` with lifted value sum `p`,
/// grouped into orbits under input substitutions `x -> a x + b`.
pub fn classify_half_degree_polynomials(p: PrimeModulus, workers: usize) -> Result<PolyClassification> {
    let plan = EnumerationPlan::exhaustive(p, Target::PolynomialsHalfDegree)
        .with_workers(workers, p.order() - 1);
    plan.validate()?;
    let q = p.order();
    let h = p.half() as usize;
    let pm = p.get();
    let powers: Vec<Vec<u32>> = (0..pm)
        .map(|x| (0..=h as u64).map(|e| p.pow_raw(x, e)).collect())
        .collect();
    let lower_count = (pm as u64).pow(h as u32);

    // one chunk per leading coefficient
    let found: Vec<Vec<Vec<u32>>> = run_chunks(&plan, (q - 1) as u64, |range| {
        let mut hits = Vec::new();
        for lc_index in range {
            let lc = lc_index as u32 + 1;
            let mut values: Vec<u32> = (0..q).map(|x| p.mul_raw(lc, powers[x][h])).collect();
            let mut digits = vec![0u32; h];
            for _ in 0..lower_count {
                let sum: u32 = values.iter().sum();
                if sum == pm {
                    let mut coeffs = digits.clone();
                    coeffs.push(lc);
                    coeffs.resize(q, 0);
                    hits.push(coeffs);
                }
                // odometer step; adding 1 to digit j adds x^j to every value
                for (j, digit) in digits.iter_mut().enumerate() {
                    *digit += 1;
                    for (x, v) in values.iter_mut().enumerate() {
                        *v += powers[x][j];
                        if *v >= pm {
                            *v -= pm;
                        }
                    }
                    if *digit < pm {
                        break;
                    }
                    *digit = 0;
                }
            }
        }
        hits
    });

    let qualifying: Vec<Polynomial> = found
        .into_iter()
        .flatten()
        .map(|c| Polynomial::from_raw(p, c))
        .collect();

    let mut seen: HashMap<Polynomial, usize> = HashMap::new();
    let mut classes: Vec<OrbitClass> = Vec::new();
    let mut canonicals: Vec<Polynomial> = Vec::new();
    for g in &qualifying {
        let idx = match seen.get(g) {
            Some(&i) => i,
            None => {
                let orbit = polynomial_orbit(g);
                let canonical = orbit.iter().next().expect("nonempty orbit").clone();
                let i = classes.len();
                classes.push(OrbitClass {
                    canonical: canonical.to_string(),
                    representative: canonical.to_algebraic(),
                    orbit_size: orbit.len() as u64,
                    members_seen: 0,
                });
                canonicals.push(canonical);
                for member in orbit {
                    seen.insert(member, i);
                }
                i
            }
        };
        classes[idx].members_seen += 1;
    }
    classes.sort_by(|a, b| a.canonical.cmp(&b.canonical));

    let mut ref_coeffs = vec![0u64; h + 1];
    ref_coeffs[0] = 1;
    ref_coeffs[h] = 1;
    let reference = Polynomial::from_coeffs(p, &ref_coeffs);
    let ref_orbit = polynomial_orbit(&reference);
    let ref_canonical = ref_orbit.iter().next().expect("nonempty orbit").to_string();
    let reference_present = classes.iter().any(|c| c.canonical == ref_canonical);
    let mut output_images_of_reference: Vec<OutputImage> = canonicals
        .iter()
        .filter(|g| g.to_string() != ref_canonical)
        .filter_map(|g| {
            output_map_into(g, &ref_orbit).map(|(a, b)| {
                // alpha * g + beta lies in the reference orbit; invert the map
                let ai = p.inv_raw(a).expect("nonzero");
                OutputImage {
                    canonical: g.to_string(),
                    alpha: ai,
                    beta: p.mul_raw(p.neg_raw(b), ai),
                }
            })
        })
        .collect();
    output_images_of_reference.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    let reference_is_only_orbit = reference_present && classes.len() == 1;
    Ok(PolyClassification {
        p: pm,
        degree: h as u32,
        scanned: plan.instance_count(),
        qualifying: qualifying.len() as u64,
        orbit_count: classes.len(),
        classes,
        reference: reference.to_string(),
        reference_present,
        reference_is_only_orbit,
        output_images_of_reference,
        notes: vec![
            "orbits are taken under input substitutions x -> a*x + b only".to_string(),
            "output maps g -> alpha*g + beta are not applied; classes that are output images of the reference are listed"
                .to_string(),
            "exploratory classification; no uniqueness claim is asserted".to_string(),
        ],
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetClassification {
    pub p: u32,
    pub target_d: u32,
    pub scanned: u64,
    pub extremal: u64,
    pub orbit_count: usize,
    pub classes: Vec<OrbitClass>,
    /// Every member of every orbit was recomputed to determine exactly `target_d` directions.
    pub all_reverified: bool,
}

fn key_cells(p: PrimeModulus, key: &GridKey) -> Vec<usize> {
    let n = p.order() * p.order();
    (0..n)
        .filter(|&c| key[c / 64] >> (63 - c % 64) & 1 == 1)
        .collect()
}

/// `p`-point non-line sets with exactly `(p+3)/2` directions, grouped into
/// AGL(2,p) orbits.
pub fn classify_extremal_sets(p: PrimeModulus, workers: usize) -> Result<SetClassification> {
    if p.get() > SET_CLASSIFY_MAX_P {
        return Err(Error::Guard(format!(
            "extremal set classification needs p <= {SET_CLASSIFY_MAX_P} (got {p})"
        )));
    }
    let plan = EnumerationPlan::exhaustive(p, Target::PointSets).with_workers(workers, workers * 4);
    plan.validate()?;
    let kernel = DirectionKernel::new(p)?;
    let target = redei_bound(p);
    let parts: Vec<Vec<GridKey>> = run_chunks(&plan, plan.instance_count(), |range| {
        let mut keys = Vec::new();
        kernel.scan_subsets(p.order(), range, |cells, mask| {
            if mask.count_ones() == target {
                let mut key = [0u64; 3];
                for &c in cells {
                    grid_key_insert(&mut key, c);
                }
                keys.push(key);
            }
        });
        keys
    });
    let keys: Vec<GridKey> = parts.into_iter().flatten().collect();

    let mut seen: HashMap<GridKey, usize> = HashMap::new();
    let mut classes: Vec<OrbitClass> = Vec::new();
    let mut all_reverified = true;
    for key in &keys {
        let idx = match seen.get(key) {
            Some(&i) => i,
            None => {
                let pts: Vec<Point> = PointSet::from_cells(p, &key_cells(p, key)).to_vec();
                let mut orbit: HashSet<GridKey> = HashSet::new();
                for_each_image(p, &pts, |img| {
                    orbit.insert(img);
                });
                let canonical = *orbit.iter().min().expect("nonempty orbit");
                for member in &orbit {
                    let d = kernel.mask(&key_cells(p, member)).count_ones();
                    all_reverified &= d == target;
                }
                let i = classes.len();
                classes.push(OrbitClass {
                    canonical: grid_key_bytes(p, &canonical)
                        .iter()
                        .map(|b| format!("{b:02x}"))
                        .collect(),
                    representative: cells_to_string(p, &key_cells(p, &canonical)),
                    orbit_size: orbit.len() as u64,
                    members_seen: 0,
                });
                for member in orbit {
                    seen.insert(member, i);
                }
                i
            }
        };
        classes[idx].members_seen += 1;
    }
    classes.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    Ok(SetClassification {
        p: p.get(),
        target_d: target,
        scanned: plan.instance_count(),
        extremal: keys.len() as u64,
        orbit_count: classes.len(),
        classes,
        all_reverified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonical_form, direction_set, is_line};

    fn m(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 3), 84);
        assert_eq!(binomial(25, 5), 53_130);
        assert_eq!(binomial(49, 7), 85_900_584);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn unranking_matches_iteration() {
        let (n, k) = (9, 3);
        let mut c = unrank_combination(n, k, 0);
        for rank in 0..binomial(n as u64, k as u64) as u64 {
            assert_eq!(unrank_combination(n, k, rank), c, "rank {rank}");
            next_combination(&mut c, n);
        }
    }

    #[test]
    fn chunking_covers_range() {
        let r = chunk_ranges(10, 3);
        assert_eq!(r, vec![0..4, 4..7, 7..10]);
        assert_eq!(chunk_ranges(2, 8), vec![0..1, 1..2]);
        assert_eq!(chunk_ranges(0, 4), vec![0..0]);
    }

    #[test]
    fn function_counts() {
        let plan = EnumerationPlan::exhaustive(m(3), Target::Functions);
        assert_eq!(enumerate_functions(&plan, false).unwrap().count(), 27);
        // oracle: count value tables over {0,1,2}^3 with sum 3
        let mut oracle = 0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if a + b + c == 3 {
                        oracle += 1;
                    }
                }
            }
        }
        assert_eq!(oracle, 7);
        assert_eq!(enumerate_functions(&plan, true).unwrap().count(), 7);
        let plan = EnumerationPlan::exhaustive(m(5), Target::Functions);
        let all: HashSet<Polynomial> = enumerate_functions(&plan, false).unwrap().collect();
        assert_eq!(all.len(), 3125);
        let plan = EnumerationPlan::exhaustive(m(11), Target::Functions);
        assert!(matches!(enumerate_functions(&plan, false), Err(Error::Guard(_))));
    }

    #[test]
    fn point_set_counts() {
        let plan = EnumerationPlan::exhaustive(m(3), Target::PointSets);
        let sets: Vec<PointSet> = enumerate_point_sets(&plan).unwrap().collect();
        assert_eq!(sets.len(), 84);
        assert_eq!(sets.iter().collect::<HashSet<_>>().len(), 84);
        assert_eq!(sets.iter().filter(|h| is_line(h)).count(), 12);
        let plan = EnumerationPlan::exhaustive(m(11), Target::PointSets);
        assert!(matches!(plan.validate(), Err(Error::Guard(_))));
        assert_eq!(
            EnumerationPlan::exhaustive(m(7), Target::PointSets).instance_count(),
            85_900_584
        );
    }

    #[test]
    fn kernel_mask_matches_direction_set() {
        let p = m(5);
        let kernel = DirectionKernel::new(p).unwrap();
        let plan = EnumerationPlan::sampled(p, Target::PointSets, 300, 11);
        for h in enumerate_point_sets(&plan).unwrap() {
            let cells: Vec<usize> = h.cells().collect();
            let mask = kernel.mask(&cells);
            let ds = direction_set(&h).unwrap();
            let from_mask: BTreeSet<_> = (0..=5)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| crate::geometry::Direction::from_index(p, i))
                .collect();
            assert_eq!(from_mask, ds);
        }
    }

    #[test]
    fn scan_prefix_masks_match_direct_masks() {
        let p = m(5);
        let kernel = DirectionKernel::new(p).unwrap();
        let mut seen = 0;
        kernel.scan_subsets(5, 1000..3000, |cells, mask| {
            assert_eq!(mask, kernel.mask(cells));
            seen += 1;
        });
        assert_eq!(seen, 2000);
    }

    #[test]
    fn census_p5() {
        let plan = EnumerationPlan::exhaustive(m(5), Target::PointSets);
        let c = census_point_sets(&plan).unwrap();
        assert_eq!(c.scanned, 53_130);
        assert_eq!(c.lines(), 30);
        assert_eq!(c.min_nonline_d(), Some(4));
        assert_eq!(c.counts.values().sum::<u64>(), 53_130);
        let ex = c.exemplar(4).unwrap();
        assert_eq!(direction_set(&ex).unwrap().len(), 4);
    }

    #[test]
    fn census_is_chunking_independent() {
        let base = EnumerationPlan::exhaustive(m(5), Target::PointSets);
        let a = census_point_sets(&base).unwrap();
        let b = census_point_sets(&base.clone().with_workers(3, 7)).unwrap();
        assert_eq!(a, b);
        let s = EnumerationPlan::sampled(m(7), Target::PointSets, 2000, 9);
        let a = census_point_sets(&s).unwrap();
        let b = census_point_sets(&s.clone().with_workers(2, 5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn csv_shape() {
        let plan = EnumerationPlan::exhaustive(m(3), Target::PointSets);
        let c = census_point_sets(&plan).unwrap();
        let text = c.to_csv();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p,k,d,count,exemplar"));
        assert_eq!(lines.next(), Some("3,3,1,12,\"0,0 0,1 0,2\""));
        assert_eq!(lines.next(), Some("3,3,3,72,\"0,0 0,1 1,0\""));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn hunts_small() {
        let plan = EnumerationPlan::exhaustive(m(5), Target::Functions);
        let s = hunt_counterexamples(&plan, StatementId::Main).unwrap();
        assert_eq!(s.scanned, 3125);
        assert_eq!(s.failed, 0);
        assert!(s.passed > 0);
        let plan = EnumerationPlan::exhaustive(m(5), Target::PointSets);
        let s = hunt_counterexamples(&plan, StatementId::Redei).unwrap();
        assert_eq!((s.scanned, s.failed), (53_130, 0));
        let plan = EnumerationPlan::exhaustive(m(5), Target::Functions);
        assert!(hunt_counterexamples(&plan, StatementId::Redei).is_err());
    }

    #[test]
    fn tally_caps_witnesses_but_counts_all_failures() {
        let r = check_gacs_gap(m(19), &[(12, "0,0".into())], Grade::Sampled);
        assert_eq!(r.outcome(), Outcome::Fail);
        let mut t = Tally::default();
        t.record(r.clone(), 1);
        t.record(r, 1);
        assert_eq!(t.failed, 2);
        assert_eq!(t.failures.len(), 1);
    }

    #[test]
    fn poly_classification_p5() {
        let c = classify_half_degree_polynomials(m(5), 1).unwrap();
        assert_eq!(c.scanned, 4 * 25);
        assert!(c.reference_present);
        assert_eq!(
            c.classes.iter().map(|k| k.members_seen).sum::<u64>(),
            c.qualifying
        );
        for class in &c.classes {
            assert_eq!(class.members_seen, class.orbit_size);
        }
        // brute-force oracle over all degree-2 polynomials
        let p = m(5);
        let mut oracle = 0;
        for c0 in 0..5 {
            for c1 in 0..5 {
                for c2 in 1..5 {
                    let g = Polynomial::from_coeffs(p, &[c0, c1, c2]);
                    if g.lifted_value_sum() == 5 {
                        oracle += 1;
                    }
                }
            }
        }
        assert_eq!(c.qualifying, oracle);
        // 2*(x^2 + 1) + 1 has a nonresidue leading coefficient, so no input
        // substitution reaches it from x^2 + 1
        assert_eq!(c.orbit_count, 2);
        assert_eq!(c.output_images_of_reference.len(), 1);
        let o = &c.output_images_of_reference[0];
        let image = Polynomial::from_coeffs(p, &[(o.alpha + o.beta) as u64, 0, o.alpha as u64]);
        let orbit = polynomial_orbit(&image);
        assert_eq!(orbit.iter().next().unwrap().to_string(), o.canonical);
        let big = classify_half_degree_polynomials(m(17), 1);
        assert!(matches!(big, Err(Error::Guard(_))));
    }

    #[test]
    fn reference_orbit_size_bound() {
        for p in [5u64, 7, 11] {
            let p = m(p);
            let h = p.half() as usize;
            let mut c = vec![0u64; h + 1];
            c[0] = 1;
            c[h] = 1;
            let orbit = polynomial_orbit(&Polynomial::from_coeffs(p, &c));
            assert!(orbit.len() as u64 <= 2 * p.get() as u64);
            assert_eq!(orbit.len() as u64, 2 * p.get() as u64);
        }
    }

    #[test]
    fn set_classification_small() {
        let c = classify_extremal_sets(m(3), 1).unwrap();
        assert_eq!(c.target_d, 3);
        assert_eq!(c.extremal, 72);
        assert!(c.all_reverified);
        assert_eq!(c.classes.iter().map(|k| k.members_seen).sum::<u64>(), 72);
        let c5 = classify_extremal_sets(m(5), 1).unwrap();
        assert!(c5.all_reverified);
        let cube = PointSet::graph(&Polynomial::from_coeffs(m(5), &[0, 0, 0, 1]));
        let hex = canonical_form(&cube).unwrap().to_hex();
        assert!(c5.classes.iter().any(|k| k.canonical == hex));
        for class in &c5.classes {
            assert_eq!(class.members_seen, class.orbit_size);
            let rep = PointSet::parse(m(5), &class.representative).unwrap();
            assert_eq!(canonical_form(&rep).unwrap().to_hex(), class.canonical);
        }
        assert!(matches!(classify_extremal_sets(m(11), 1), Err(Error::Guard(_))));
    }
}
