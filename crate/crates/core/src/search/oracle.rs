//! A second, deliberately plain enumerator used to cross-check counts.
//!
//! It shares no code with the main search. One vertex per orbit of the
//! automorphism group is fixed to label 1 and the rest is counted, so each
//! run covers a slice of the solutions (see [`oracle_enumerate`]).
//!
//! Vertices are visited in one fixed order, computed up front. Faces are
//! scanned in reverse input order to rank vertices; the next vertex to
//! branch on is the first one, in that ranking, that pins down the most
//! further vertices, and the pinned vertices follow it. Pinned values come
//! from a reduced row echelon form over exact fractions, with the columns
//! ordered from the last visited vertex to the first. After each block the
//! search checks the faces it touched and every implied equation with at
//! most three open vertices, one equation at a time. Every leaf is checked
//! against all faces.

use crate::constants::{check_pair, MagicPair};
use crate::error::Result;
use crate::graph::{FaceKind, FullereneGraph};
use crate::symmetry::automorphisms;

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Fraction {
    num: i128,
    den: i128,
}

impl Fraction {
    const ZERO: Self = Self { num: 0, den: 1 };

    fn new(num: i128, den: i128) -> Self {
        let g = gcd(num, den).max(1) * den.signum();
        Self { num: num / g, den: den / g }
    }

    fn int(x: i128) -> Self {
        Self { num: x, den: 1 }
    }

    fn sub(self, o: Self) -> Self {
        Self::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.num * o.num, self.den * o.den)
    }

    fn div(self, o: Self) -> Self {
        Self::new(self.num * o.den, self.den * o.num)
    }

    fn is_zero(self) -> bool {
        self.num == 0
    }
}

/// `den · x_v = constant + Σ coeff · x_k` over earlier vertices `k`.
struct Formula {
    den: i64,
    constant: i64,
    terms: Vec<(usize, i64)>,
}

impl Formula {
    fn from_row(constant: Fraction, terms: Vec<(usize, Fraction)>) -> Self {
        let lcm = |a: i128, b: i128| a / gcd(a, b) * b;
        let den = terms.iter().fold(constant.den, |d, (_, c)| lcm(d, c.den));
        let scale = |f: Fraction| (f.num * (den / f.den)) as i64;
        Self {
            den: den as i64,
            constant: scale(constant),
            terms: terms.into_iter().map(|(k, c)| (k, scale(c))).collect(),
        }
    }
}

/// Reduced row echelon form with columns taken in `columns` order.
/// Returns each pivot's position in `columns` with its row.
fn rref(system: &[Vec<Fraction>], columns: &[usize]) -> Vec<(usize, Vec<Fraction>)> {
    let mut rows = system.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for (c, &col) in columns.iter().enumerate() {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][col];
        for x in rows[r].iter_mut() {
            *x = x.div(lead);
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col];
                for j in 0..rows[i].len() {
                    let d = rows[r][j].mul(f);
                    rows[i][j] = rows[i][j].sub(d);
                }
            }
        }
        pivots.push((c, r));
        r += 1;
    }
    pivots.into_iter().map(|(c, r)| (c, rows[r].clone())).collect()
}

/// Unknown vertices whose value follows from the `known` ones.
fn determined(system: &[Vec<Fraction>], n: usize, known: &[usize]) -> Vec<usize> {
    let unknown: Vec<usize> = (0..n).filter(|v| !known.contains(v)).collect();
    let columns: Vec<usize> = unknown.iter().chain(known).copied().collect();
    rref(system, &columns)
        .into_iter()
        .filter(|(c, row)| *c < unknown.len() && unknown.iter().all(|&u| u == unknown[*c] || row[u].is_zero()))
        .map(|(c, _)| unknown[c])
        .collect()
}

/// `Σ coeff · x_v = rhs`.
#[derive(PartialEq, Eq)]
struct Equation {
    terms: Vec<(usize, i64)>,
    rhs: i64,
}

impl Equation {
    /// Clears denominators of a row over `n` vertex columns and a
    /// right-hand side.
    fn from_row(row: &[Fraction], n: usize) -> Self {
        let den = row.iter().fold(1, |d, f| d / gcd(d, f.den) * f.den);
        let scale = |f: Fraction| (f.num * (den / f.den)) as i64;
        Self { terms: (0..n).filter(|&v| !row[v].is_zero()).map(|v| (v, scale(row[v]))).collect(), rhs: scale(row[n]) }
    }
}

struct Block {
    branch: usize,
    pinned: Vec<usize>,
    /// Indices into the equation list.
    checks: Vec<usize>,
}

struct Oracle {
    n: usize,
    /// `Some` for vertices computed from earlier ones.
    formulas: Vec<Option<Formula>>,
    faces: Vec<Vec<usize>>,
    targets: Vec<i64>,
    /// The face equations followed by the echelon rows.
    equations: Vec<Equation>,
    blocks: Vec<Block>,
    labels: Vec<i64>,
    /// Bit `l` set when label `l` is taken.
    used: u64,
    /// Bits `1..=n`.
    full: u64,
    count: u64,
}

impl Oracle {
    /// A search that gives `anchor` the label 1 and counts the rest.
    fn new(g: &FullereneGraph, pair: MagicPair, anchor: usize) -> Self {
        let n = g.n();
        let targets: Vec<i64> = (0..g.faces().len())
            .map(|f| match g.face_kind(f) {
                FaceKind::Pentagon => pair.sp,
                FaceKind::Hexagon => pair.sh,
            })
            .collect();
        let system: Vec<Vec<Fraction>> = g
            .faces()
            .iter()
            .zip(&targets)
            .map(|(face, &t)| {
                let mut row = vec![Fraction::ZERO; n + 1];
                for &v in face {
                    row[v] = Fraction::int(1);
                }
                row[n] = Fraction::int(t as i128);
                row
            })
            .collect();

        let mut ranking = Vec::with_capacity(n);
        for face in g.faces().iter().rev() {
            for &v in face {
                if !ranking.contains(&v) {
                    ranking.push(v);
                }
            }
        }
        let mut order: Vec<usize> = vec![anchor];
        order.extend(ranking.iter().filter(|w| determined(&system, n, &[anchor]).contains(w)));
        while order.len() < n {
            let mut best: Option<(usize, Vec<usize>)> = None;
            for &v in ranking.iter().filter(|v| !order.contains(v)) {
                let mut known = order.clone();
                known.push(v);
                let pinned = determined(&system, n, &known);
                if best.as_ref().is_none_or(|(_, b)| pinned.len() > b.len()) {
                    best = Some((v, pinned));
                }
            }
            let (v, pinned) = best.expect("an unvisited vertex remains");
            order.push(v);
            order.extend(ranking.iter().filter(|w| pinned.contains(w)));
        }

        let mut formulas: Vec<Option<Formula>> = (0..n).map(|_| None).collect();
        let columns: Vec<usize> = order.iter().rev().copied().collect();
        for (c, row) in rref(&system, &columns) {
            let terms = columns[c + 1..]
                .iter()
                .filter(|&&w| !row[w].is_zero())
                .map(|&w| (w, Fraction::ZERO.sub(row[w])))
                .collect();
            formulas[columns[c]] = Some(Formula::from_row(row[n], terms));
        }

        // A block is a branching vertex and the vertices it pins. After a
        // block: the faces through any of its vertices plus every equation
        // implied by the system with at most three vertices still open.
        let mut equations: Vec<Equation> = Vec::new();
        let mut blocks: Vec<Block> = Vec::new();
        let mut start = 0;
        while start < n {
            let end = (start + 1..n).find(|&i| formulas[order[i]].is_none()).unwrap_or(n);
            let later = &order[end..];
            let mut here: Vec<Equation> = g
                .faces()
                .iter()
                .zip(&targets)
                .filter(|(face, _)| face.iter().any(|v| order[start..end].contains(v)))
                .map(|(face, &t)| Equation { terms: face.iter().map(|&v| (v, 1)).collect(), rhs: t })
                .collect();
            let columns: Vec<usize> = later.iter().chain(&order[..end]).copied().collect();
            for (_, row) in rref(&system, &columns) {
                let open = later.iter().filter(|&&w| !row[w].is_zero()).count();
                if (1..=3).contains(&open) {
                    here.push(Equation::from_row(&row, n));
                }
            }
            // Equations closest to closing first; they reject most often.
            here.sort_by_key(|eq| eq.terms.iter().filter(|(w, _)| later.contains(w)).count());
            let mut checks = Vec::new();
            for eq in here {
                let e = equations.iter().position(|x| *x == eq).unwrap_or_else(|| {
                    equations.push(eq);
                    equations.len() - 1
                });
                if !checks.contains(&e) {
                    checks.push(e);
                }
            }
            blocks.push(Block { branch: order[start], pinned: order[start + 1..end].to_vec(), checks });
            start = end;
        }
        Self {
            n,
            formulas,
            faces: g.faces().to_vec(),
            targets,
            equations,
            blocks,
            labels: vec![0; n],
            used: 0,
            full: ((1u128 << (n + 1)) - 2) as u64,
            count: 0,
        }
    }

    fn is_free(&self, label: i64) -> bool {
        label >= 1 && label <= self.n as i64 && self.used & (1 << label) == 0
    }

    /// Unused labels, ascending.
    fn free_labels(&self) -> impl Iterator<Item = i64> {
        let mut free = self.full & !self.used;
        std::iter::from_fn(move || {
            (free != 0).then(|| {
                let l = free.trailing_zeros();
                free &= free - 1;
                l as i64
            })
        })
    }

    /// Unused labels, descending.
    fn free_labels_descending(&self) -> impl Iterator<Item = i64> {
        let mut free = self.full & !self.used;
        std::iter::from_fn(move || {
            (free != 0).then(|| {
                let l = 63 - free.leading_zeros();
                free &= !(1 << l);
                l as i64
            })
        })
    }

    /// Whether unused, distinct labels can satisfy `eq` given the labels
    /// placed so far.
    fn satisfiable(&self, eq: &Equation) -> bool {
        let mut rem = eq.rhs;
        let mut open = [0i64; 8];
        let mut k = 0;
        for &(w, a) in &eq.terms {
            match self.labels[w] {
                0 => {
                    open[k] = a;
                    k += 1;
                }
                l => rem -= a * l,
            }
        }
        match open[..k] {
            [] => rem == 0,
            [a] => rem % a == 0 && self.is_free(rem / a),
            [a, b] => self.free_labels().any(|x| {
                let rest = rem - a * x;
                match b {
                    1 => rest != x && self.is_free(rest),
                    -1 => -rest != x && self.is_free(-rest),
                    _ => rest % b == 0 && rest / b != x && self.is_free(rest / b),
                }
            }),
            ref many if many.iter().all(|&a| a == 1) => {
                let low: i64 = self.free_labels().take(k).sum();
                let high: i64 = self.free_labels_descending().take(k).sum();
                low <= rem && rem <= high
            }
            ref many => {
                // Each open vertex independently between the extreme labels.
                let lo = self.free_labels().next().unwrap_or(0);
                let hi = self.free_labels_descending().next().unwrap_or(0);
                let low: i64 = many.iter().map(|&a| (a * lo).min(a * hi)).sum();
                let high: i64 = many.iter().map(|&a| (a * lo).max(a * hi)).sum();
                low <= rem && rem <= high
            }
        }
    }

    fn take(&mut self, v: usize, label: i64) -> bool {
        if !self.is_free(label) {
            return false;
        }
        self.labels[v] = label;
        self.used |= 1 << label;
        true
    }

    fn release(&mut self, v: usize) {
        let label = std::mem::take(&mut self.labels[v]);
        if label != 0 {
            self.used &= !(1 << label);
        }
    }

    /// Computes the pinned vertices of block `b`, stopping at the first
    /// one without a usable label.
    fn pin(&mut self, b: usize) -> bool {
        for i in 0..self.blocks[b].pinned.len() {
            let v = self.blocks[b].pinned[i];
            let f = self.formulas[v].as_ref().expect("pinned vertices have formulas");
            let num = f.terms.iter().fold(f.constant, |s, &(k, c)| s + c * self.labels[k]);
            if num % f.den != 0 || !self.take(v, num / f.den) {
                return false;
            }
        }
        true
    }

    fn descend(&mut self, b: usize) {
        if b == self.blocks.len() {
            let magical = self
                .faces
                .iter()
                .zip(&self.targets)
                .all(|(face, &t)| face.iter().map(|&w| self.labels[w]).sum::<i64>() == t);
            if magical {
                self.count += 1;
            }
            return;
        }
        let branch = self.blocks[b].branch;
        let labels = if b == 0 { 1..=1 } else { 1..=self.n as i64 };
        for label in labels {
            if !self.take(branch, label) {
                continue;
            }
            if self.pin(b) && self.blocks[b].checks.iter().all(|&e| self.satisfiable(&self.equations[e])) {
                self.descend(b + 1);
            }
            for i in 0..self.blocks[b].pinned.len() {
                let v = self.blocks[b].pinned[i];
                self.release(v);
            }
            self.release(branch);
        }
    }
}

/// Counts magical configurations with an independent search strategy.
///
/// Automorphisms permute magical configurations, so the number of them
/// giving label 1 to a vertex is the same across its orbit. The count is
/// therefore the sum, over one vertex per orbit, of the orbit size times
/// the number of configurations labelling that vertex 1.
pub fn oracle_enumerate(g: &FullereneGraph, pair: MagicPair) -> Result<u64> {
    check_pair(g.n(), pair)?;
    let group = automorphisms(g);
    let mut total = 0;
    for (anchor, size) in vertex_orbits(g.n(), group.elements()) {
        let mut oracle = Oracle::new(g, pair, anchor);
        oracle.descend(0);
        total += size as u64 * oracle.count;
    }
    Ok(total)
}

/// The least vertex of each orbit (0-based) with the orbit size.
fn vertex_orbits(n: usize, elements: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut seen = vec![false; n];
    let mut orbits = Vec::new();
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let mut size = 0;
        for sigma in elements {
            let w = sigma[v] - 1;
            if !seen[w] {
                seen[w] = true;
                size += 1;
            }
        }
        orbits.push((v, size));
    }
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::builtin;

    fn visit_order(o: &Oracle) -> Vec<usize> {
        o.blocks.iter().flat_map(|b| std::iter::once(b.branch).chain(b.pinned.iter().copied())).collect()
    }

    #[test]
    fn static_order_covers_all_vertices() {
        let g = builtin("C26").unwrap();
        let o = Oracle::new(&g, MagicPair::new(72, 63), 5);
        let order = visit_order(&o);
        assert_eq!(order[0], 5);
        let mut seen = order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..26).collect::<Vec<_>>());
        // Rank 15 leaves 11 vertices to branch on.
        assert_eq!(o.blocks.len(), 11);
        assert_eq!(o.formulas.iter().filter(|f| f.is_none()).count(), 11);
    }

    #[test]
    fn formulas_only_use_earlier_branch_vertices() {
        let g = builtin("C24").unwrap();
        let o = Oracle::new(&g, MagicPair::new(57, 108), 0);
        let mut position = [0; 24];
        for (i, v) in visit_order(&o).into_iter().enumerate() {
            position[v] = i;
        }
        for (v, f) in o.formulas.iter().enumerate() {
            if let Some(f) = f {
                assert!(f.den > 0);
                assert!(f.terms.iter().all(|&(k, _)| position[k] < position[v] && o.formulas[k].is_none()));
            }
        }
    }

    #[test]
    fn orbit_slices_add_up() {
        // Summing the slices over every vertex counts each solution once.
        let g = builtin("C24").unwrap();
        let pair = MagicPair::new(57, 108);
        let total: u64 = (0..24)
            .map(|v| {
                let mut o = Oracle::new(&g, pair, v);
                o.descend(0);
                o.count
            })
            .sum();
        assert_eq!(total, 576);
        let group = automorphisms(&g);
        assert_eq!(vertex_orbits(24, group.elements()), vec![(0, 12), (12, 12)]);
        assert_eq!(vertex_orbits(3, &[vec![1, 2, 3]]), vec![(0, 1), (1, 1), (2, 1)]);
    }

    #[test]
    fn smallest_classes() {
        let c24 = builtin("C24").unwrap();
        assert_eq!(oracle_enumerate(&c24, MagicPair::new(57, 108)).unwrap(), 576);
        let c26 = builtin("C26").unwrap();
        assert_eq!(oracle_enumerate(&c26, MagicPair::new(73, 59)).unwrap(), 0);
        assert!(oracle_enumerate(&c24, MagicPair::new(57, 107)).is_err());
    }
}
