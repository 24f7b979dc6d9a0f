//! Exhaustive enumeration of magical configurations.
//!
//! The enumerator walks a static plan: a short list of branching
//! vertices, after each of which every vertex fixed by the face equations is
//! derived exactly instead of being branched on. For C24 and C26 that leaves
//! 10 and 11 branching levels. Labels in use are a `u64` bit set; bit `l`
//! stands for label `l`.
//!
//! After each step every face it touched is checked:
//!
//! * a closed face must hit its constant exactly;
//! * a face with one unknown vertex needs its remainder to be an unused label;
//! * a face with two unknown vertices needs two distinct unused labels adding
//!   up to the remainder;
//! * otherwise the remainder must lie between the sums of the `k` smallest
//!   and the `k` largest unused labels.
//!
//! Counts are raw: no symmetry is broken inside the search.

use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{check_pair, MagicPair};
use crate::error::{Error, Result};
use crate::graph::{FaceKind, FullereneGraph};

mod oracle;
mod plan;

use plan::Plan;

pub use oracle::oracle_enumerate;

/// Default cap on visited search nodes per pair.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000_000;

/// A vertex labelling; position `i` holds the label of `v_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    labels: Vec<u8>,
}

impl Configuration {
    pub fn new(labels: Vec<u8>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label of the 0-based vertex `v`.
    pub fn label(&self, v: usize) -> u8 {
        self.labels[v]
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.labels.len();
        let mut seen = 0u64;
        for &l in &self.labels {
            if l == 0 || l as usize > n || seen & (1 << l) != 0 {
                return false;
            }
            seen |= 1 << l;
        }
        true
    }

    /// Parses one line of a solution stream: comma-separated labels.
    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        line.split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `true` iff `c` is a permutation of `1..=n` and every face sums to its
/// constant.
pub fn verify_configuration(g: &FullereneGraph, c: &Configuration, pair: MagicPair) -> Result<bool> {
    if c.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: c.len() });
    }
    if !c.is_permutation() {
        return Ok(false);
    }
    Ok(g.faces().iter().enumerate().all(|(i, face)| {
        let sum: i64 = face.iter().map(|&v| c.label(v) as i64).sum();
        sum == target(g, i, pair)
    }))
}

fn target(g: &FullereneGraph, face: usize, pair: MagicPair) -> i64 {
    match g.face_kind(face) {
        FaceKind::Pentagon => pair.sp,
        FaceKind::Hexagon => pair.sh,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    CountOnly,
    Store,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub mode: Mode,
    /// Worker threads; 1 runs inline on the calling thread.
    pub workers: usize,
    pub node_budget: u64,
    /// Sort stored solutions lexicographically.
    pub sorted: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { mode: Mode::CountOnly, workers: 1, node_budget: DEFAULT_NODE_BUDGET, sorted: false }
    }
}

impl SearchOptions {
    pub fn store() -> Self {
        Self { mode: Mode::Store, ..Self::default() }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn sorted(mut self, sorted: bool) -> Self {
        self.sorted = sorted;
        self
    }
}

/// Solutions of one graph for one pair of constants.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionSet {
    pub n: usize,
    pub pair: MagicPair,
    pub count: u64,
    /// `true` when the node budget ran out; `count` is then a lower bound.
    pub partial: bool,
    pub nodes: u64,
    #[serde(skip)]
    pub solutions: Option<Vec<Configuration>>,
}

impl SolutionSet {
    pub fn solutions(&self) -> Result<&[Configuration]> {
        self.solutions.as_deref().ok_or(Error::SolutionsNotStored)
    }
}

/// `constant − Σ coeff·x_v`, with its terms split into vertices labelled
/// before the step (`pre`) and vertices labelled by it (`step`).
struct Form {
    constant: i32,
    pre: Vec<(u8, i32)>,
    step: Vec<(u8, i32)>,
}

impl Form {
    fn new(constant: i64, terms: impl IntoIterator<Item = (usize, i64)>, before: u64) -> Self {
        let (pre, step) =
            terms.into_iter().map(|(v, c)| (v as u8, c as i32)).partition(|&(v, _)| before & (1 << v) != 0);
        Self { constant: constant as i32, pre, step }
    }

    #[inline]
    fn base(&self, labels: &[u8; 64]) -> i32 {
        self.pre.iter().fold(self.constant, |s, &(v, c)| s - c * labels[v as usize] as i32)
    }

    #[inline]
    fn value(&self, base: i32, labels: &[u8; 64]) -> i32 {
        self.step.iter().fold(base, |s, &(v, c)| s - c * labels[v as usize] as i32)
    }
}

/// `den · x_vertex = base − branch_coeff · x_branch`.
struct Derived {
    vertex: u8,
    den: i32,
    branch_coeff: i32,
}

enum Check {
    /// Target minus the face sum, with `open` vertices still unlabelled.
    Face { open: u8 },
    /// Weighted sum of the remaining unknowns must equal the form.
    Residual { unknown: Vec<i32> },
}

struct Step {
    branch: u8,
    derived: Vec<Derived>,
    /// One form per derived vertex (first) and per check (after).
    forms: Vec<Form>,
    checks: Vec<Check>,
}

/// A plan specialised to one pair of constants.
struct Problem {
    n: usize,
    full: u64,
    steps: Vec<Step>,
}

impl Problem {
    fn new(g: &FullereneGraph, pair: MagicPair) -> Self {
        let n = g.n();
        let constant = |sp: i64, sh: i64| sp * pair.sp + sh * pair.sh;
        let mut before = 0u64;
        let mut steps = Vec::new();
        for s in Plan::build(g).steps {
            let mut forms = Vec::new();
            let mut derived = Vec::new();
            for d in &s.derived {
                let others = d.terms.iter().copied().filter(|&(k, _)| k != s.branch);
                forms.push(Form::new(constant(d.sp, d.sh), others, before));
                let branch_coeff = d.terms.iter().find(|&&(k, _)| k == s.branch).map_or(0, |&(_, c)| c as i32);
                derived.push(Derived { vertex: d.vertex as u8, den: d.den as i32, branch_coeff });
            }
            let mut checks = Vec::new();
            for c in &s.checks {
                let face = &g.faces()[c.face];
                let after = before | 1 << s.branch | s.derived.iter().fold(0u64, |m, d| m | 1 << d.vertex);
                let labelled = face.iter().filter(|&&v| after & (1 << v) != 0).map(|&v| (v, 1));
                forms.push(Form::new(target(g, c.face, pair), labelled, before));
                checks.push(Check::Face { open: c.open });
            }
            for r in &s.residuals {
                forms.push(Form::new(constant(r.sp, r.sh), r.known.iter().copied(), before));
                checks.push(Check::Residual { unknown: r.unknown.iter().map(|&(_, c)| c as i32).collect() });
            }
            before |= 1 << s.branch;
            for d in &s.derived {
                before |= 1 << d.vertex;
            }
            steps.push(Step { branch: s.branch as u8, derived, forms, checks });
        }
        Self { n, full: ((1u128 << (n + 1)) - 2) as u64, steps }
    }
}

#[derive(Clone)]
struct State {
    labels: [u8; 64],
    used: u64,
    level: usize,
}

impl State {
    fn root() -> Self {
        Self { labels: [0; 64], used: 0, level: 0 }
    }
}

fn sum_smallest(mut mask: u64, k: u8) -> i32 {
    let mut s = 0;
    for _ in 0..k {
        s += mask.trailing_zeros() as i32;
        mask &= mask - 1;
    }
    s
}

fn sum_largest(mut mask: u64, k: u8) -> i32 {
    let mut s = 0;
    for _ in 0..k {
        let b = 63 - mask.leading_zeros();
        s += b as i32;
        mask &= !(1u64 << b);
    }
    s
}

/// `{ c − x : x ∈ mask }` as a bit set, dropping values outside `0..64`.
#[inline]
fn mirror(mask: u64, c: i32) -> u64 {
    let rev = mask.reverse_bits();
    match c {
        c if !(0..=126).contains(&c) => 0,
        c if c <= 63 => rev >> (63 - c),
        c => rev << (c - 63),
    }
}

/// `{ x + c : x ∈ mask }` as a bit set, dropping values outside `0..64`.
#[inline]
fn shift(mask: u64, c: i32) -> u64 {
    match c {
        c if c.abs() >= 64 => 0,
        c if c >= 0 => mask << c,
        c => mask >> -c,
    }
}

/// Whether two distinct labels from `mask` add up to `rem`.
fn has_pair_sum(mask: u64, rem: i32) -> bool {
    let mut both = mask & mirror(mask, rem);
    if rem % 2 == 0 && (0..128).contains(&rem) {
        both &= !(1u64 << (rem / 2));
    }
    both != 0
}

/// Whether `a·x + b·y = rem` for distinct `x`, `y` in `mask`.
fn has_weighted_pair(mask: u64, a: i32, b: i32, rem: i32) -> bool {
    if a == b {
        return rem % a == 0 && has_pair_sum(mask, rem / a);
    }
    if a == -b {
        // x − y = d
        return rem % a == 0 && rem != 0 && mask & shift(mask, rem / a) != 0;
    }
    let mut xs = mask;
    while xs != 0 {
        let x = xs.trailing_zeros() as i32;
        xs &= xs - 1;
        let rest = rem - a * x;
        if rest % b == 0 {
            let y = rest / b;
            if y != x && (1..64).contains(&y) && mask & (1 << y) != 0 {
                return true;
            }
        }
    }
    false
}

/// Relaxed bounds on `Σ a_j x_j` over distinct labels from `mask`: positive
/// and negative coefficients are optimised separately.
fn weighted_extremes(coeffs: &[i32], mask: u64) -> (i32, i32) {
    let mut pos = [0i32; 8];
    let mut neg = [0i32; 8];
    let (mut np, mut nn) = (0, 0);
    for &c in coeffs {
        if c > 0 {
            pos[np] = c;
            np += 1;
        } else {
            neg[nn] = -c;
            nn += 1;
        }
    }
    pos[..np].sort_unstable_by(|a, b| b.cmp(a));
    neg[..nn].sort_unstable_by(|a, b| b.cmp(a));
    let small_first = |ws: &[i32]| {
        let mut m = mask;
        ws.iter().fold(0, |s, w| {
            let l = m.trailing_zeros() as i32;
            m &= m - 1;
            s + w * l
        })
    };
    let large_first = |ws: &[i32]| {
        let mut m = mask;
        ws.iter().fold(0, |s, w| {
            let l = 63 - m.leading_zeros();
            m &= !(1u64 << l);
            s + w * l as i32
        })
    };
    (small_first(&pos[..np]) - large_first(&neg[..nn]), large_first(&pos[..np]) - small_first(&neg[..nn]))
}

struct Shared {
    nodes: AtomicU64,
    budget: u64,
    exhausted: AtomicBool,
}

impl Shared {
    fn new(budget: u64) -> Self {
        Self { nodes: AtomicU64::new(0), budget, exhausted: AtomicBool::new(false) }
    }
}

const FLUSH_EVERY: u64 = 1 << 12;

/// Largest number of forms a single step may carry.
const MAX_FORMS: usize = 128;

/// Mutable per-worker search context.
struct Walker<'a, F> {
    p: &'a Problem,
    state: State,
    count: u64,
    unflushed: u64,
    shared: &'a Shared,
    on_solution: F,
}

impl<'a, F: FnMut(&[u8])> Walker<'a, F> {
    fn new(p: &'a Problem, state: State, shared: &'a Shared, on_solution: F) -> Self {
        Self { p, state, count: 0, unflushed: 0, shared, on_solution }
    }

    #[inline]
    fn take(&mut self, v: u8, label: i32) -> bool {
        let s = &mut self.state;
        if label < 1 || label > self.p.n as i32 || s.used & (1 << label) != 0 {
            return false;
        }
        s.labels[v as usize] = label as u8;
        s.used |= 1 << label;
        true
    }

    /// Branch labels not excluded by a unit-coefficient derivation.
    fn candidates(&self, step: &Step, bases: &[i32]) -> u64 {
        let free = self.p.full & !self.state.used;
        let mut mask = free;
        for (d, &base) in step.derived.iter().zip(bases) {
            // x = (base − a·l)/den must be a free label.
            if d.branch_coeff.abs() != d.den {
                continue;
            }
            if base % d.den != 0 {
                return 0;
            }
            mask &= if d.branch_coeff > 0 { mirror(free, base / d.den) } else { shift(free, -base / d.den) };
        }
        mask
    }

    /// Labels the branch vertex of `step`, derives the rest and runs every
    /// check. Leaves partial work for [`Self::clear`].
    #[inline]
    fn place(&mut self, step: &Step, bases: &[i32], label: u8) -> bool {
        if !self.take(step.branch, label as i32) {
            return false;
        }
        for (d, &base) in step.derived.iter().zip(bases) {
            let num = base - d.branch_coeff * label as i32;
            if num % d.den != 0 || !self.take(d.vertex, num / d.den) {
                return false;
            }
        }
        let free = self.p.full & !self.state.used;
        let labels = &self.state.labels;
        let offset = step.derived.len();
        step.checks.iter().zip(&step.forms[offset..]).zip(&bases[offset..]).all(|((check, form), &base)| {
            let rem = form.value(base, labels);

            match check {
                Check::Face { open: 0 } => rem == 0,
                Check::Face { open: 1 } => (1..=63).contains(&rem) && free & (1 << rem) != 0,
                Check::Face { open: 2 } => has_pair_sum(free, rem),
                &Check::Face { open } => rem >= sum_smallest(free, open) && rem <= sum_largest(free, open),
                Check::Residual { unknown } => match unknown[..] {
                    [a, b] => has_weighted_pair(free, a, b, rem),
                    _ => {
                        let (low, high) = weighted_extremes(unknown, free);
                        low <= rem && rem <= high
                    }
                },
            }
        })
    }

    #[inline]
    fn clear(&mut self, step: &Step) {
        let s = &mut self.state;
        for v in std::iter::once(step.branch).chain(step.derived.iter().map(|d| d.vertex)) {
            let l = s.labels[v as usize];
            if l != 0 {
                s.used &= !(1 << l);
                s.labels[v as usize] = 0;
            }
        }
    }

    fn tick(&mut self) -> bool {
        self.unflushed += 1;
        if self.unflushed == FLUSH_EVERY {
            let total = self.shared.nodes.fetch_add(self.unflushed, Ordering::Relaxed) + self.unflushed;
            self.unflushed = 0;
            if total > self.shared.budget {
                self.shared.exhausted.store(true, Ordering::Relaxed);
            }
        }
        !self.shared.exhausted.load(Ordering::Relaxed)
    }

    fn finish(&mut self) {
        self.shared.nodes.fetch_add(self.unflushed, Ordering::Relaxed);
        self.unflushed = 0;
    }

    /// Depth-first search below the current state. With `cutoff`, states
    /// reaching that level are collected instead of expanded.
    fn run(&mut self, cutoff: &mut Option<(usize, &mut Vec<State>)>) {
        if !self.tick() {
            return;
        }
        let level = self.state.level;
        if level == self.p.steps.len() {
            self.count += 1;
            (self.on_solution)(&self.state.labels[..self.p.n]);
            return;
        }
        if let Some((depth, frontier)) = cutoff {
            if level == *depth {
                frontier.push(self.state.clone());
                return;
            }
        }
        let p = self.p;
        let step = &p.steps[level];
        let mut bases = [0i32; MAX_FORMS];
        let derived = step.derived.len();
        for (b, form) in bases.iter_mut().zip(&step.forms[..derived]) {
            *b = form.base(&self.state.labels);
        }
        let mut candidates = self.candidates(step, &bases[..derived]);
        if candidates == 0 {
            return;
        }
        for (b, form) in bases[derived..].iter_mut().zip(&step.forms[derived..]) {
            *b = form.base(&self.state.labels);
        }
        let bases = &bases[..step.forms.len()];
        while candidates != 0 {
            let label = candidates.trailing_zeros() as u8;
            candidates &= candidates - 1;
            if self.place(step, bases, label) {
                self.state.level += 1;
                self.run(cutoff);
                self.state.level -= 1;
            }
            self.clear(step);
        }
    }
}

/// Splits the tree into independent subtrees at the shallowest level with
/// at least `min_tasks` live states. Subtrees come out in depth-first order.
fn frontier(p: &Problem, min_tasks: usize) -> Vec<State> {
    let mut states = vec![State::root()];
    for depth in 1..p.steps.len() {
        if states.len() >= min_tasks {
            break;
        }
        let mut next = Vec::new();
        let scratch = Shared::new(u64::MAX);
        let mut walker = Walker::new(p, State::root(), &scratch, |_: &[u8]| {});
        walker.run(&mut Some((depth, &mut next)));
        states = next;
    }
    states
}

/// Enumerates every magical configuration of `g` with constants `pair`.
pub fn enumerate(g: &FullereneGraph, pair: MagicPair, opts: &SearchOptions) -> Result<SolutionSet> {
    enumerate_inner(g, pair, opts, None::<&(dyn Fn(&Configuration) + Sync)>)
}

/// Like [`enumerate`], calling `sink` once per solution as it is found.
/// With more than one worker, calls arrive concurrently and unordered.
pub fn enumerate_streaming<S>(
    g: &FullereneGraph,
    pair: MagicPair,
    opts: &SearchOptions,
    sink: &S,
) -> Result<SolutionSet>
where
    S: Fn(&Configuration) + Sync,
{
    enumerate_inner(g, pair, opts, Some(sink))
}

fn enumerate_inner<S>(
    g: &FullereneGraph,
    pair: MagicPair,
    opts: &SearchOptions,
    sink: Option<&S>,
) -> Result<SolutionSet>
where
    S: Fn(&Configuration) + Sync + ?Sized,
{
    check_pair(g.n(), pair)?;
    let p = Problem::new(g, pair);
    let shared = Shared::new(opts.node_budget);
    let store = opts.mode == Mode::Store;

    let run_task = |state: State| -> (u64, Vec<Configuration>) {
        let mut found = Vec::new();
        let mut walker = Walker::new(&p, state, &shared, |labels: &[u8]| {
            if store || sink.is_some() {
                let c = Configuration::new(labels.to_vec());
                if let Some(sink) = sink {
                    sink(&c);
                }
                if store {
                    found.push(c);
                }
            }
        });
        walker.run(&mut None);
        walker.finish();
        (walker.count, found)
    };

    let results: Vec<(u64, Vec<Configuration>)> = if opts.workers <= 1 {
        vec![run_task(State::root())]
    } else {
        let tasks = frontier(&p, 4 * opts.workers);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers).build().expect("thread pool");
        pool.install(|| tasks.into_par_iter().map(run_task).collect())
    };

    let count = results.iter().map(|(c, _)| c).sum();
    let solutions = store.then(|| {
        let mut all: Vec<Configuration> = results.into_iter().flat_map(|(_, s)| s).collect();
        if opts.sorted {
            all.sort_unstable();
        }
        all
    });

    Ok(SolutionSet {
        n: g.n(),
        pair,
        count,
        partial: shared.exhausted.load(Ordering::Relaxed),
        nodes: shared.nodes.load(Ordering::Relaxed),
        solutions,
    })
}

/// Reads a solution stream (one configuration per line, blank lines
/// ignored), checking every line against `g` and `pair`.
pub fn read_solutions(g: &FullereneGraph, pair: MagicPair, text: &str) -> Result<SolutionSet> {
    let mut solutions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::SolutionFile { line: i + 1, reason };
        let c = Configuration::parse_line(line).map_err(bad)?;
        if c.len() != g.n() {
            return Err(bad(format!("{} labels, expected {}", c.len(), g.n())));
        }
        if !verify_configuration(g, &c, pair)? {
            return Err(bad(format!("not a magical configuration for {pair}")));
        }
        solutions.push(c);
    }
    Ok(SolutionSet {
        n: g.n(),
        pair,
        count: solutions.len() as u64,
        partial: false,
        nodes: 0,
        solutions: Some(solutions),
    })
}

/// One row of a count table.
#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub sp: i64,
    pub sh: i64,
    pub count: u64,
    pub partial: bool,
    pub nodes: u64,
}

/// Counts every pair that survives the feasibility filters, by ascending `S_h`.
pub fn count_all(g: &FullereneGraph, opts: &SearchOptions) -> Result<Vec<CountRow>> {
    let opts = SearchOptions { mode: Mode::CountOnly, ..opts.clone() };
    crate::constants::feasible_pairs(g)
        .pairs
        .into_iter()
        .map(|pair| {
            let s = enumerate(g, pair, &opts)?;
            Ok(CountRow { sp: pair.sp, sh: pair.sh, count: s.count, partial: s.partial, nodes: s.nodes })
        })
        .collect()
}
