//! Necessary conditions on the magic constants.
//!
//! Summing every face of a configuration counts each label three times, so
//! any magical configuration on an `n`-vertex fullerene satisfies
//!
//! ```text
//! 24·S_p + (n − 20)·S_h = 3n(n + 1)
//! ```
//!
//! Reducing that relation modulo 8 and 3 gives residue conditions on `S_h`,
//! and the rearrangement inequality bounds both sums. Everything here is a
//! necessary condition only; whether a surviving pair is realised is decided
//! by enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FullereneGraph;

/// A candidate pair of magic constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MagicPair {
    pub sp: i64,
    pub sh: i64,
}

impl MagicPair {
    pub fn new(sp: i64, sh: i64) -> Self {
        Self { sp, sh }
    }

    /// Constants of the configuration obtained by relabelling `x ↦ n+1−x`.
    pub fn complement(self, n: usize) -> Self {
        let n = n as i64;
        Self { sp: 5 * n + 5 - self.sp, sh: 6 * n + 6 - self.sh }
    }
}

impl fmt::Display for MagicPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.sp, self.sh)
    }
}

/// Coefficients of `pent·S_p + hex·S_h = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub pent: i64,
    pub hex: i64,
    pub rhs: i64,
}

impl Relation {
    pub fn holds(&self, pair: MagicPair) -> bool {
        self.pent * pair.sp + self.hex * pair.sh == self.rhs
    }

    /// `S_p` determined by `S_h`, when it is an integer.
    pub fn solve_sp(&self, sh: i64) -> Option<i64> {
        let rest = self.rhs - self.hex * sh;
        (rest % self.pent == 0).then(|| rest / self.pent)
    }

    /// Whether the relation has any integer solution at all.
    pub fn has_integer_solution(&self) -> bool {
        self.rhs % gcd(self.pent, self.hex) == 0
    }

    pub fn display(&self) -> String {
        format!("{}·S_p + {}·S_h = {}", self.pent, self.hex, self.rhs)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A congruence `S_h ≡ residue (mod modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Congruence {
    pub modulus: i64,
    pub residue: i64,
}

impl Congruence {
    pub fn admits(&self, value: i64) -> bool {
        value.rem_euclid(self.modulus) == self.residue
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S_h ≡ {} (mod {})", self.residue, self.modulus)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 20 || !n.is_multiple_of(2) || n == 22 {
        return Err(Error::InvalidVertexCount(n));
    }
    Ok(())
}

/// The face-sum relation for `n` vertices, unreduced.
pub fn magic_relation(n: usize) -> Result<Relation> {
    check_n(n)?;
    let n = n as i64;
    Ok(Relation { pent: 24, hex: n - 20, rhs: 3 * n * (n + 1) })
}

/// `false` exactly when `n ≡ 4 (mod 8)`: then the left side of the relation
/// is divisible by 8 while the right side is 4 mod 8.
pub fn mod8_feasible(n: usize) -> bool {
    n % 8 != 4
}

/// Congruences on `S_h` implied by the relation modulo 8 and modulo 3.
pub fn residue_constraints(n: usize) -> Vec<Congruence> {
    let mut out = Vec::new();
    match n % 8 {
        0 => out.push(Congruence { modulus: 2, residue: 0 }),
        2 | 6 => out.push(Congruence { modulus: 4, residue: 3 }),
        _ => {}
    }
    if n % 3 != 2 {
        out.push(Congruence { modulus: 3, residue: 0 });
    }
    out
}

/// Inward-rounded bounds on a face sum from the rearrangement inequality.
///
/// `weights[v]` is the number of faces of the kind in question containing
/// `v` and `faces` is how many such faces exist. The sum over those faces of
/// the face sum is `Σ weights[v]·f(v)`; it is smallest when the heaviest
/// vertices carry the smallest labels.
fn rearrangement_bounds(weights: &[u8], faces: usize) -> (i64, i64) {
    let mut sorted: Vec<i64> = weights.iter().map(|&w| w as i64).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len() as i64;
    let low: i64 = sorted.iter().zip(1..).map(|(w, l)| w * l).sum();
    let high: i64 = sorted.iter().zip((1..=n).rev()).map(|(w, l)| w * l).sum();
    let faces = faces as i64;
    (div_ceil(low, faces), high.div_euclid(faces))
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

pub fn hexagon_sum_bounds(g: &FullereneGraph) -> Result<(i64, i64)> {
    let hexagons = g.hexagon_count();
    if hexagons == 0 {
        return Err(Error::NoHexagons);
    }
    Ok(rearrangement_bounds(&g.incidence_profile().hex_multiplicity, hexagons))
}

pub fn pentagon_sum_bounds(g: &FullereneGraph) -> (i64, i64) {
    rearrangement_bounds(&g.incidence_profile().pent_multiplicity, g.pentagon_count())
}

/// How many candidate `S_h` values each filter removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterDiagnostics {
    pub scanned: usize,
    pub residue: usize,
    pub non_integral: usize,
    pub pentagon_bounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub n: usize,
    pub relation: Relation,
    pub mod8_ok: bool,
    pub residue_note: Vec<Congruence>,
    pub hex_bounds: Option<(i64, i64)>,
    pub pent_bounds: (i64, i64),
    pub pairs: Vec<MagicPair>,
    pub diagnostics: FilterDiagnostics,
    /// Set when `pairs` is empty.
    pub reason: Option<String>,
}

/// Every `(S_p, S_h)` surviving the relation, residue and bound filters,
/// sorted by ascending `S_h`.
pub fn feasible_pairs(g: &FullereneGraph) -> FeasibilityReport {
    let n = g.n();
    let relation = magic_relation(n).expect("validated graphs have a valid vertex count");
    let mod8_ok = mod8_feasible(n);
    let residue_note = residue_constraints(n);
    let hex_bounds = hexagon_sum_bounds(g).ok();
    let pent_bounds = pentagon_sum_bounds(g);
    let mut diagnostics = FilterDiagnostics::default();
    let mut pairs = Vec::new();

    let accept_sp = |sp: i64| sp > 0 && sp >= pent_bounds.0 && sp <= pent_bounds.1;

    let reason = if !relation.has_integer_solution() {
        let why = if mod8_ok { String::new() } else { format!(" (n = {n} ≡ 4 mod 8)") };
        Some(format!("relation {} has no integer solution{why}", relation.display()))
    } else if !mod8_ok {
        Some(format!("n = {n} ≡ 4 (mod 8): relation impossible modulo 8"))
    } else {
        match hex_bounds {
            Some((lo, hi)) => {
                for sh in lo.max(1)..=hi {
                    diagnostics.scanned += 1;
                    if !residue_note.iter().all(|c| c.admits(sh)) {
                        diagnostics.residue += 1;
                        continue;
                    }
                    let Some(sp) = relation.solve_sp(sh) else {
                        diagnostics.non_integral += 1;
                        continue;
                    };
                    if !accept_sp(sp) {
                        diagnostics.pentagon_bounds += 1;
                        continue;
                    }
                    pairs.push(MagicPair { sp, sh });
                }
            }
            // Only C20 has no hexagons; S_h is then a placeholder 0.
            None => {
                if let Some(sp) = relation.solve_sp(0).filter(|&sp| accept_sp(sp)) {
                    pairs.push(MagicPair { sp, sh: 0 });
                }
            }
        }
        pairs.is_empty().then(|| "no pair survives the residue and bound filters".to_string())
    };

    FeasibilityReport { n, relation, mod8_ok, residue_note, hex_bounds, pent_bounds, pairs, diagnostics, reason }
}

/// Checks a pair against the relation for `n`, with an explanation on failure.
pub fn check_pair(n: usize, pair: MagicPair) -> Result<()> {
    let relation = magic_relation(n)?;
    if relation.holds(pair) {
        return Ok(());
    }
    let lhs = relation.pent * pair.sp + relation.hex * pair.sh;
    Err(Error::InfeasiblePair {
        sp: pair.sp,
        sh: pair.sh,
        reason: format!("violates {} (left side is {lhs})", relation.display()),
    })
}
