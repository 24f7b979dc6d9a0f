//! Symmetries of the face structure and their action on configurations.
//!
//! Permutations are written 1-based, like configurations: `sigma[i]` is the
//! image of `v_{i+1}`. A permutation acts on a configuration `f` by
//! `f ↦ f ∘ σ`. The complement `x ↦ n+1−x` acts on labels instead and moves
//! a configuration to the complementary pair of constants.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::constants::MagicPair;
use crate::error::{Error, Result};
use crate::graph::FullereneGraph;
use crate::search::{Configuration, SolutionSet};

/// A bijection on `1..=n`; entry `i` is the image of vertex `i + 1`.
pub type Permutation = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AutomorphismGroup {
    n: usize,
    /// Sorted, identity first.
    elements: Vec<Permutation>,
}

impl AutomorphismGroup {
    /// The group containing only the identity.
    pub fn trivial(n: usize) -> Self {
        Self { n, elements: vec![identity(n)] }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, sigma: &[usize]) -> bool {
        self.elements.binary_search_by(|e| e.as_slice().cmp(sigma)).is_ok()
    }

    /// Whether the elements are closed under composition and inverses.
    pub fn is_group(&self) -> bool {
        self.contains(&identity(self.n))
            && self
                .elements
                .iter()
                .all(|a| self.contains(&inverse(a)) && self.elements.iter().all(|b| self.contains(&compose(a, b))))
    }

    /// A small generating set, picked greedily in element order.
    pub fn generators(&self) -> Vec<Permutation> {
        let mut gens: Vec<Permutation> = Vec::new();
        let mut span: BTreeSet<Permutation> = BTreeSet::from([identity(self.n)]);
        for e in &self.elements {
            if span.contains(e) {
                continue;
            }
            gens.push(e.clone());
            span = generate(self.n, &gens);
        }
        gens
    }
}

pub fn identity(n: usize) -> Permutation {
    (1..=n).collect()
}

/// `(a ∘ b)(v) = a(b(v))`.
pub fn compose(a: &[usize], b: &[usize]) -> Permutation {
    b.iter().map(|&v| a[v - 1]).collect()
}

pub fn inverse(a: &[usize]) -> Permutation {
    let mut inv = vec![0; a.len()];
    for (i, &v) in a.iter().enumerate() {
        inv[v - 1] = i + 1;
    }
    inv
}

fn is_permutation(sigma: &[usize]) -> bool {
    let mut seen = vec![false; sigma.len()];
    sigma.iter().all(|&v| v >= 1 && v <= sigma.len() && !std::mem::replace(&mut seen[v - 1], true))
}

fn generate(n: usize, gens: &[Permutation]) -> BTreeSet<Permutation> {
    let mut span = BTreeSet::from([identity(n)]);
    let mut queue = vec![identity(n)];
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = compose(g, &x);
            if span.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    span
}

/// Whether `sigma` (1-based) maps every face onto a face of the same size.
pub fn preserves_faces(g: &FullereneGraph, sigma: &[usize]) -> bool {
    let faces: HashSet<BTreeSet<usize>> = g.faces().iter().map(|f| f.iter().copied().collect()).collect();
    sigma.len() == g.n()
        && is_permutation(sigma)
        && g.faces().iter().all(|f| faces.contains(&f.iter().map(|&v| sigma[v] - 1).collect()))
}

/// Every vertex permutation that maps faces to faces.
///
/// Vertices are mapped in breadth-first order. Each vertex after the first
/// is adjacent to one mapped earlier, so its image must be a neighbour of
/// that image; candidates must also keep adjacency with every mapped
/// vertex and the hexagon count of the vertex. Complete maps are checked
/// against the face list.
pub fn automorphisms(g: &FullereneGraph) -> AutomorphismGroup {
    let n = g.n();
    let hex = g.incidence_profile().hex_multiplicity;
    let mut order = vec![0usize];
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for w in g.neighbours(v) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                order.push(w);
            }
        }
        i += 1;
    }

    struct Search<'a> {
        g: &'a FullereneGraph,
        hex: &'a [u8],
        order: &'a [usize],
        parent: &'a [usize],
        image: Vec<usize>,
        taken: Vec<bool>,
        found: Vec<Permutation>,
    }

    impl Search<'_> {
        fn extend(&mut self, depth: usize) {
            if depth == self.order.len() {
                let sigma: Permutation = self.image.iter().map(|&w| w + 1).collect();
                if preserves_faces(self.g, &sigma) {
                    self.found.push(sigma);
                }
                return;
            }
            let v = self.order[depth];
            let candidates: Vec<usize> = if depth == 0 {
                (0..self.g.n()).collect()
            } else {
                self.g.neighbours(self.image[self.parent[v]]).to_vec()
            };
            for w in candidates {
                if self.taken[w] || self.hex[w] != self.hex[v] {
                    continue;
                }
                let consistent = self.order[..depth]
                    .iter()
                    .all(|&u| self.g.are_adjacent(u, v) == self.g.are_adjacent(self.image[u], w));
                if !consistent {
                    continue;
                }
                self.image[v] = w;
                self.taken[w] = true;
                self.extend(depth + 1);
                self.taken[w] = false;
            }
        }
    }

    let mut search = Search {
        g,
        hex: &hex,
        order: &order,
        parent: &parent,
        image: vec![0; n],
        taken: vec![false; n],
        found: Vec::new(),
    };
    search.extend(0);
    let mut elements = search.found;
    elements.sort_unstable();
    AutomorphismGroup { n, elements }
}

/// The configuration `f ∘ σ`: vertex `v` receives the label `f` gives `σ(v)`.
pub fn apply_automorphism(c: &Configuration, sigma: &[usize]) -> Result<Configuration> {
    if sigma.len() != c.len() {
        return Err(Error::LengthMismatch { expected: c.len(), got: sigma.len() });
    }
    if !is_permutation(sigma) {
        return Err(Error::NotPermutation(sigma.len()));
    }
    Ok(Configuration::new(sigma.iter().map(|&v| c.label(v - 1)).collect()))
}

/// Replaces every label `x` by `n + 1 − x`.
pub fn complement(c: &Configuration) -> Configuration {
    let n = c.len() as u8;
    Configuration::new(c.labels().iter().map(|&x| n + 1 - x).collect())
}

/// Orbits of one pair's solutions under the automorphism group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    pub pair: MagicPair,
    pub solutions: usize,
    pub orbit_count: usize,
    /// Common size of all orbits; `None` when there are none or sizes differ.
    pub orbit_size: Option<usize>,
    pub group_order: usize,
    /// Lexicographically least member of each orbit, in ascending order.
    #[serde(serialize_with = "as_strings")]
    pub representatives: Vec<Configuration>,
}

fn as_strings<S: serde::Serializer>(cs: &[Configuration], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(cs.iter().map(|c| c.to_string()))
}

fn orbit_of(c: &Configuration, grp: &AutomorphismGroup) -> BTreeSet<Configuration> {
    grp.elements.iter().map(|s| apply_automorphism(c, s).expect("group element fits")).collect()
}

pub fn orbit_partition(s: &SolutionSet, grp: &AutomorphismGroup) -> Result<OrbitReport> {
    let solutions = s.solutions()?;
    let mut seen: HashSet<&Configuration> = HashSet::new();
    let members: HashSet<&Configuration> = solutions.iter().collect();
    let mut representatives = Vec::new();
    let mut sizes = BTreeSet::new();
    for c in solutions {
        if seen.contains(c) {
            continue;
        }
        let orbit = orbit_of(c, grp);
        for o in &orbit {
            if let Some(&m) = members.get(o) {
                seen.insert(m);
            }
        }
        sizes.insert(orbit.len());
        representatives.push(orbit.into_iter().next().expect("orbit contains c"));
    }
    representatives.sort_unstable();
    let orbit_size = match sizes.len() {
        1 => sizes.first().copied(),
        _ => None,
    };
    Ok(OrbitReport {
        pair: s.pair,
        solutions: solutions.len(),
        orbit_count: representatives.len(),
        orbit_size,
        group_order: grp.order(),
        representatives,
    })
}

/// `true` iff no nontrivial group element fixes any stored solution.
pub fn check_free_action(s: &SolutionSet, grp: &AutomorphismGroup) -> Result<bool> {
    let id = identity(grp.n);
    Ok(s.solutions()?
        .iter()
        .all(|c| grp.elements.iter().filter(|&e| *e != id).all(|e| apply_automorphism(c, e).is_ok_and(|d| d != *c))))
}

/// How the complement map relates the solutions of a pair and its
/// complementary pair, and the orbits of `Aut × Z2` on their union.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplementReport {
    pub pair: MagicPair,
    pub complement_pair: MagicPair,
    /// Complementing the first set gives exactly the second.
    pub bijective: bool,
    /// Complementing twice returns every solution unchanged.
    pub involution: bool,
    pub combined_orbits: usize,
    /// Common size of the combined orbits; `None` when there are none or
    /// sizes differ. Equals `2·|Aut|` when the combined action is free.
    pub combined_orbit_size: Option<usize>,
}

pub fn complement_report(a: &SolutionSet, b: &SolutionSet, grp: &AutomorphismGroup) -> Result<ComplementReport> {
    let sa = a.solutions()?;
    let sb = b.solutions()?;
    let image: BTreeSet<Configuration> = sa.iter().map(complement).collect();
    let target: BTreeSet<Configuration> = sb.iter().cloned().collect();
    let involution = sa.iter().all(|c| complement(&complement(c)) == *c);

    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut sizes = BTreeSet::new();
    let mut orbits = 0;
    let union = if a.pair == b.pair { sa.to_vec() } else { sa.iter().chain(sb).cloned().collect() };
    for c in &union {
        if seen.contains(c) {
            continue;
        }
        let mut orbit = orbit_of(c, grp);
        orbit.extend(orbit_of(&complement(c), grp));
        sizes.insert(orbit.len());
        orbits += 1;
        seen.extend(orbit);
    }
    Ok(ComplementReport {
        pair: a.pair,
        complement_pair: b.pair,
        bijective: image == target && sa.len() == sb.len(),
        involution,
        combined_orbits: orbits,
        combined_orbit_size: if sizes.len() == 1 { sizes.first().copied() } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::builtin;
    use crate::search::{enumerate, SearchOptions};

    #[test]
    fn group_orders() {
        for (name, order) in [("C20", 120), ("C24", 24), ("C26", 12)] {
            let g = builtin(name).unwrap();
            let grp = automorphisms(&g);
            assert_eq!(grp.order(), order, "{name}");
            assert!(grp.is_group());
            assert!(grp.elements().iter().all(|s| preserves_faces(&g, s)));
            assert_eq!(grp.elements()[0], identity(g.n()));
            let span = generate(g.n(), &grp.generators());
            assert_eq!(span.len(), order);
        }
    }

    #[test]
    fn action_preserves_constants() {
        let g = builtin("C24").unwrap();
        let grp = automorphisms(&g);
        let pair = MagicPair::new(57, 108);
        let set = enumerate(&g, pair, &SearchOptions::store()).unwrap();
        let c = &set.solutions().unwrap()[0];
        for s in grp.elements() {
            let d = apply_automorphism(c, s).unwrap();
            assert!(crate::search::verify_configuration(&g, &d, pair).unwrap());
        }
        assert_eq!(apply_automorphism(c, &identity(24)).unwrap(), *c);
        let comp = complement(c);
        assert!(crate::search::verify_configuration(&g, &comp, MagicPair::new(68, 42)).unwrap());
        assert_eq!(complement(&comp), *c);
    }

    #[test]
    fn rejects_bad_permutations() {
        let c = Configuration::new(vec![1, 2, 3]);
        assert!(matches!(apply_automorphism(&c, &[1, 1, 2]), Err(Error::NotPermutation(3))));
        assert!(matches!(apply_automorphism(&c, &[1, 2]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn trivial_group_orbits() {
        let g = builtin("C24").unwrap();
        let set = enumerate(&g, MagicPair::new(57, 108), &SearchOptions::store()).unwrap();
        let report = orbit_partition(&set, &AutomorphismGroup::trivial(24)).unwrap();
        assert_eq!(report.orbit_count, 576);
        assert_eq!(report.orbit_size, Some(1));
        assert!(check_free_action(&set, &AutomorphismGroup::trivial(24)).unwrap());

        let empty = SolutionSet { solutions: Some(Vec::new()), count: 0, ..set.clone() };
        let report = orbit_partition(&empty, &automorphisms(&g)).unwrap();
        assert_eq!((report.orbit_count, report.orbit_size), (0, None));

        let unstored = SolutionSet { solutions: None, ..set };
        assert!(matches!(orbit_partition(&unstored, &automorphisms(&g)), Err(Error::SolutionsNotStored)));
    }
}
