//! Static search plans built from the linear face system.
//!
//! Every face gives an equation `Σ_{v ∈ F} x_v = S_F`. Once some vertices are
//! labelled, Gauss–Jordan elimination over the remaining unknowns shows which
//! of them are already pinned down by the labelled ones: exactly those whose
//! reduced row has a single unknown left. A plan is a sequence of branching
//! vertices; after each branch it lists the vertices that become derived and
//! the integer formula deriving each of them.
//!
//! The branching order comes from a beam search over a crude cost model:
//! the expected number of nodes at a level is the product of the label
//! choices so far times a fixed survival rate per derived vertex.

use crate::graph::{FaceKind, FullereneGraph};

/// `den · x_vertex = sp·S_p + sh·S_h − Σ coeff · x_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Derivation {
    pub vertex: usize,
    pub den: i64,
    pub sp: i64,
    pub sh: i64,
    pub terms: Vec<(usize, i64)>,
}

/// A face touched in a step, with the number of its vertices still unknown
/// after the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct FaceCheck {
    pub face: usize,
    pub open: u8,
}

/// A reduced equation that still has two or three unknowns after a step:
/// `Σ a_j x_j (unknown) = sp·S_p + sh·S_h − Σ b_k x_k (known)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Residual {
    pub sp: i64,
    pub sh: i64,
    pub known: Vec<(usize, i64)>,
    pub unknown: Vec<(usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Step {
    pub branch: usize,
    pub derived: Vec<Derivation>,
    pub checks: Vec<FaceCheck>,
    pub residuals: Vec<Residual>,
}

/// Residual equations with more unknowns than this are not checked.
const MAX_RESIDUAL_UNKNOWNS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Plan {
    pub steps: Vec<Step>,
}

/// Beam width of the order search.
const BEAM_WIDTH: usize = 16;
/// Assumed probability that a derived value is a usable label.
const SURVIVAL: f64 = 0.25;

/// Integer row `Σ a_j x_j = a_n S_p + a_{n+1} S_h`.
type Row = Vec<i64>;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn normalize(row: &mut Row) {
    let g = row.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        row.iter_mut().for_each(|x| *x /= g);
    }
}

pub(crate) fn face_rows(g: &FullereneGraph) -> Vec<Row> {
    let n = g.n();
    g.faces()
        .iter()
        .enumerate()
        .map(|(i, face)| {
            let mut row = vec![0; n + 2];
            for &v in face {
                row[v] = 1;
            }
            match g.face_kind(i) {
                FaceKind::Pentagon => row[n] = 1,
                FaceKind::Hexagon => row[n + 1] = 1,
            }
            row
        })
        .collect()
}

/// Gauss–Jordan elimination on the unknown columns (those not in `known`).
/// Returns nonzero reduced rows paired with their pivot column.
fn reduce(rows: &[Row], n: usize, known: u64) -> Vec<(usize, Row)> {
    let mut rows: Vec<Row> = rows.to_vec();
    let mut reduced: Vec<(usize, Row)> = Vec::new();
    for col in (0..n).filter(|&c| known & (1 << c) == 0) {
        let Some(pos) = rows.iter().position(|r| r[col] != 0) else {
            continue;
        };
        let mut pivot = rows.swap_remove(pos);
        if pivot[col] < 0 {
            pivot.iter_mut().for_each(|x| *x = -*x);
        }
        normalize(&mut pivot);
        let p = pivot[col];
        let eliminate = |r: &mut Row| {
            let a = r[col];
            if a != 0 {
                for (x, &y) in r.iter_mut().zip(&pivot) {
                    *x = *x * p - a * y;
                }
                normalize(r);
            }
        };
        rows.iter_mut().for_each(eliminate);
        reduced.iter_mut().for_each(|(_, r)| eliminate(r));
        reduced.push((col, pivot));
    }
    reduced
}

/// Unknown vertices fixed by the known ones, with their derivations.
fn derivable(rows: &[Row], n: usize, known: u64) -> Vec<Derivation> {
    let mut out: Vec<Derivation> = reduce(rows, n, known)
        .into_iter()
        .filter(|(col, r)| (0..n).all(|c| c == *col || known & (1 << c) != 0 || r[c] == 0))
        .map(|(col, r)| Derivation {
            vertex: col,
            den: r[col],
            sp: r[n],
            sh: r[n + 1],
            terms: (0..n).filter(|&c| c != col && r[c] != 0).map(|c| (c, r[c])).collect(),
        })
        .collect();
    out.sort_by_key(|d| d.vertex);
    out
}

fn closure(rows: &[Row], n: usize, known: u64) -> u64 {
    derivable(rows, n, known).iter().fold(known, |k, d| k | (1 << d.vertex))
}

#[derive(Clone)]
struct Candidate {
    known: u64,
    order: Vec<usize>,
    log_nodes: f64,
    total: f64,
}

/// Branching order minimising the modelled tree size.
fn choose_order(rows: &[Row], n: usize) -> Vec<usize> {
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut beam = vec![Candidate { known: 0, order: Vec::new(), log_nodes: 0.0, total: 0.0 }];
    while beam.iter().any(|c| c.known != all) {
        let mut next: Vec<Candidate> = Vec::new();
        for c in &beam {
            if c.known == all {
                next.push(c.clone());
                continue;
            }
            let unknown = n - c.known.count_ones() as usize;
            for v in (0..n).filter(|&v| c.known & (1 << v) == 0) {
                let known = closure(rows, n, c.known | (1 << v));
                let derived = known.count_ones() as usize - (n - unknown) - 1;
                let log_nodes = c.log_nodes + (unknown as f64).ln() + SURVIVAL.ln() * derived as f64;
                let mut order = c.order.clone();
                order.push(v);
                next.push(Candidate { known, order, log_nodes, total: c.total + log_nodes.exp() });
            }
        }
        next.sort_by(|a, b| a.total.total_cmp(&b.total).then_with(|| a.order.cmp(&b.order)));
        let mut seen = Vec::new();
        next.retain(|c| {
            if seen.contains(&c.known) {
                false
            } else {
                seen.push(c.known);
                true
            }
        });
        next.truncate(BEAM_WIDTH);
        beam = next;
    }
    beam.swap_remove(0).order
}

impl Plan {
    pub(crate) fn build(g: &FullereneGraph) -> Self {
        let n = g.n();
        let rows = face_rows(g);
        let order = choose_order(&rows, n);
        Self::from_order(g, &rows, &order)
    }

    /// Replays a branching order. Vertices in `order` that are already known
    /// when reached are skipped.
    fn from_order(g: &FullereneGraph, rows: &[Row], order: &[usize]) -> Self {
        let n = g.n();
        let mut known = 0u64;
        let mut steps = Vec::new();
        for &v in order {
            if known & (1 << v) != 0 {
                continue;
            }
            known |= 1 << v;
            let derived = derivable(rows, n, known);
            let mut fresh = vec![v];
            for d in &derived {
                known |= 1 << d.vertex;
                fresh.push(d.vertex);
            }
            let mut checks: Vec<FaceCheck> = Vec::new();
            for (face, verts) in g.faces().iter().enumerate() {
                if verts.iter().any(|w| fresh.contains(w)) {
                    let open = verts.iter().filter(|&&w| known & (1 << w) == 0).count() as u8;
                    checks.push(FaceCheck { face, open });
                }
            }
            let residuals = reduce(rows, n, known)
                .into_iter()
                .map(|(_, r)| {
                    let (unknown, known): (Vec<_>, Vec<_>) =
                        (0..n).filter(|&c| r[c] != 0).map(|c| (c, r[c])).partition(|&(c, _)| known & (1 << c) == 0);
                    Residual { sp: r[n], sh: r[n + 1], known, unknown }
                })
                .filter(|r| r.unknown.len() <= MAX_RESIDUAL_UNKNOWNS)
                .collect();
            steps.push(Step { branch: v, derived, checks, residuals });
        }
        debug_assert_eq!(known.count_ones() as usize, n);
        Self { steps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::builtin;

    #[test]
    fn branching_levels_equal_nullity() {
        // Every face system here has full row rank: 12, 14 and 15.
        for (name, free) in [("C24", 10), ("C26", 11), ("C20", 8)] {
            let g = builtin(name).unwrap();
            let plan = Plan::build(&g);
            assert_eq!(plan.steps.len(), free, "{name}");
            let mut seen: Vec<usize> = plan
                .steps
                .iter()
                .flat_map(|s| std::iter::once(s.branch).chain(s.derived.iter().map(|d| d.vertex)))
                .collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..g.n()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn derivations_reference_earlier_vertices() {
        let g = builtin("C26").unwrap();
        let plan = Plan::build(&g);
        let mut known = Vec::new();
        for step in &plan.steps {
            known.push(step.branch);
            for d in &step.derived {
                assert!(d.den > 0);
                assert!(d.terms.iter().all(|(k, _)| known.contains(k)));
            }
            known.extend(step.derived.iter().map(|d| d.vertex));
        }
    }

    #[test]
    fn single_face_completion_is_derived() {
        // Four labelled vertices of a pentagon pin the fifth.
        let g = builtin("C24").unwrap();
        let rows = face_rows(&g);
        let face = &g.faces()[2];
        let known = face[..4].iter().fold(0u64, |k, &v| k | (1 << v));
        let d = derivable(&rows, 24, known);
        let fifth = d.iter().find(|d| d.vertex == face[4]).expect("fifth vertex derived");
        assert_eq!(fifth.den, 1);
        assert_eq!((fifth.sp, fifth.sh), (1, 0));
        let mut terms: Vec<_> = fifth.terms.clone();
        terms.sort_unstable();
        let mut expect: Vec<_> = face[..4].iter().map(|&v| (v, 1)).collect();
        expect.sort_unstable();
        assert_eq!(terms, expect);
    }
}
