use std::collections::BTreeSet;
use std::sync::OnceLock;

use fullerene_magic::constants::{feasible_pairs, MagicPair};
use fullerene_magic::graph::{builtin, parse_fullerene, zigzag_tube, FullereneGraph};
use fullerene_magic::pca::{center, eigendecompose, format_float, Matrix, SolutionMatrix, DEFAULT_TOLERANCE};
use fullerene_magic::search::{enumerate, verify_configuration, Configuration, SearchOptions, SolutionSet};
use fullerene_magic::symmetry::{
    apply_automorphism, automorphisms, complement, compose, identity, inverse, preserves_faces, AutomorphismGroup,
};
use proptest::prelude::*;

fn graphs() -> Vec<FullereneGraph> {
    let mut out: Vec<_> = ["C20", "C24", "C26"].iter().map(|n| builtin(n).unwrap()).collect();
    out.extend((1..=5).map(|k| zigzag_tube(k).unwrap()));
    out
}

/// The same graph with vertices renamed by `perm` (0-based image of each
/// vertex), faces shuffled, rotated and some of them reversed.
fn relabel(g: &FullereneGraph, perm: &[usize], rotate: &[usize], reverse: &[bool], order: &[usize]) -> FullereneGraph {
    let mut faces: Vec<Vec<usize>> = g
        .faces()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut f: Vec<usize> = f.iter().map(|&v| perm[v] + 1).collect();
            let len = f.len();
            f.rotate_left(rotate[i] % len);
            if reverse[i] {
                f.reverse();
            }
            f
        })
        .collect();
    let mut shuffled = Vec::new();
    for &i in order {
        shuffled.push(std::mem::take(&mut faces[i]));
    }
    FullereneGraph::from_faces(g.n(), shuffled).expect("relabelled graph stays valid")
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn relabelled(g: FullereneGraph) -> impl Strategy<Value = FullereneGraph> {
    let (n, f) = (g.n(), g.faces().len());
    (permutation(n), prop::collection::vec(0..6usize, f), prop::collection::vec(any::<bool>(), f), permutation(f))
        .prop_map(move |(p, rot, rev, order)| relabel(&g, &p, &rot, &rev, &order))
}

fn any_graph() -> impl Strategy<Value = FullereneGraph> {
    prop::sample::select(graphs()).prop_flat_map(relabelled)
}

struct Classes {
    c24: FullereneGraph,
    group: AutomorphismGroup,
    small: SolutionSet,
    small_complement: SolutionSet,
}

/// The two smallest C24 classes, enumerated once.
fn classes() -> &'static Classes {
    static CELL: OnceLock<Classes> = OnceLock::new();
    CELL.get_or_init(|| {
        let c24 = builtin("C24").unwrap();
        let opts = SearchOptions::store().sorted(true);
        let small = enumerate(&c24, MagicPair::new(57, 108), &opts).unwrap();
        let small_complement = enumerate(&c24, MagicPair::new(68, 42), &opts).unwrap();
        Classes { group: automorphisms(&c24), c24, small, small_complement }
    })
}

fn solution(i: usize) -> &'static Configuration {
    let s = classes().small.solutions().unwrap();
    &s[i % s.len()]
}

fn labels(n: usize) -> impl Strategy<Value = Configuration> {
    Just((1..=n as u8).collect::<Vec<u8>>()).prop_shuffle().prop_map(Configuration::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn incidence_totals(g in any_graph()) {
        let p = g.incidence_profile();
        let hex: usize = p.hex_multiplicity.iter().map(|&m| m as usize).sum();
        let pent: usize = p.pent_multiplicity.iter().map(|&m| m as usize).sum();
        prop_assert_eq!(hex, 6 * (g.n() / 2 - 10));
        prop_assert_eq!(pent, 60);
    }

    #[test]
    fn edges_form_a_cubic_graph(g in any_graph()) {
        let edges = g.edges();
        prop_assert_eq!(edges.len(), 3 * g.n() / 2);
        let mut degree = vec![0; g.n()];
        for (u, w) in edges {
            prop_assert!(u != w);
            degree[u] += 1;
            degree[w] += 1;
        }
        prop_assert!(degree.iter().all(|&d| d == 3));
    }

    #[test]
    fn json_round_trip(g in any_graph()) {
        prop_assert_eq!(parse_fullerene(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn feasible_pairs_satisfy_relation_and_complement(g in any_graph()) {
        let report = feasible_pairs(&g);
        let n = g.n() as i64;
        let set: BTreeSet<MagicPair> = report.pairs.iter().copied().collect();
        for p in &report.pairs {
            prop_assert_eq!(24 * p.sp + (n - 20) * p.sh, 3 * n * (n + 1));
            prop_assert!(set.contains(&p.complement(g.n())));
        }
        if g.n() % 8 == 4 {
            prop_assert!(report.pairs.is_empty());
        }
    }

    #[test]
    fn pairs_do_not_depend_on_numbering(
        (g, h) in prop::sample::select(graphs()).prop_flat_map(|g| (Just(g.clone()), relabelled(g)))
    ) {
        prop_assert_eq!(feasible_pairs(&g).pairs, feasible_pairs(&h).pairs);
    }

    #[test]
    fn group_closure_and_inverses(i in 0..24usize, j in 0..24usize) {
        let group = &classes().group;
        let (a, b) = (&group.elements()[i], &group.elements()[j]);
        prop_assert!(group.contains(&compose(a, b)));
        prop_assert!(group.contains(&inverse(a)));
        prop_assert_eq!(compose(a, &inverse(a)), identity(24));
        prop_assert!(preserves_faces(&classes().c24, a));
    }

    #[test]
    fn action_is_free_and_composes(k in 0..576usize, i in 1..24usize, j in 0..24usize) {
        let group = &classes().group;
        let f = solution(k);
        let (a, b) = (&group.elements()[i], &group.elements()[j]);
        prop_assert_ne!(a, &identity(24));
        let fa = apply_automorphism(f, a).unwrap();
        prop_assert_ne!(&fa, f);
        prop_assert!(verify_configuration(&classes().c24, &fa, MagicPair::new(57, 108)).unwrap());
        // (f∘a)∘b = f∘(a∘b)
        let lhs = apply_automorphism(&fa, b).unwrap();
        let rhs = apply_automorphism(f, &compose(a, b)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn complement_is_an_involution(c in labels(26)) {
        prop_assert!(complement(&c).is_permutation());
        prop_assert_eq!(complement(&complement(&c)), c);
    }

    #[test]
    fn complement_maps_classes(k in 0..576usize) {
        let f = solution(k);
        let image = complement(f);
        prop_assert!(verify_configuration(&classes().c24, &image, MagicPair::new(68, 42)).unwrap());
        prop_assert!(classes().small_complement.solutions().unwrap().binary_search(&image).is_ok());
    }

    #[test]
    fn swapped_labels_verify_only_inside_the_class(k in 0..576usize, a in 0..24usize, b in 0..24usize) {
        let mut labels = solution(k).labels().to_vec();
        labels.swap(a, b);
        let c = Configuration::new(labels);
        let magical = verify_configuration(&classes().c24, &c, MagicPair::new(57, 108)).unwrap();
        let member = classes().small.solutions().unwrap().binary_search(&c).is_ok();
        prop_assert_eq!(magical, member);
    }

    #[test]
    fn symmetric_eigendecomposition(entries in prop::collection::vec(-10.0..10.0f64, 36)) {
        let mut m = Matrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..=i {
                m[(i, j)] = entries[6 * i + j];
                m[(j, i)] = entries[6 * i + j];
            }
        }
        let e = eigendecompose(&m, DEFAULT_TOLERANCE).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&m) < 1e-9);
        prop_assert!((e.values.iter().sum::<f64>() - m.trace()).abs() < 1e-9);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = (0..6).map(|r| e.vectors[i][r] * e.vectors[j][r]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - delta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn centering_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-50i32..50, 5), 1..20)) {
        let m = Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect::<Vec<_>>());
        let (once, _) = center(&m).unwrap();
        let (twice, mean) = center(&once).unwrap();
        prop_assert!(once.max_abs_diff(&twice) < 1e-12);
        prop_assert!(mean.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn ones_direction_is_null_for_permutation_rows(rows in prop::collection::vec(labels(12), 2..30)) {
        // Every row sums to the same value, so all-ones spans a null direction.
        let m = SolutionMatrix::new(MagicPair::new(0, 0), 12, rows).unwrap();
        let cov = m.covariance().unwrap();
        let u = Matrix::from_rows(&[vec![1.0 / 12f64.sqrt(); 12]]);
        prop_assert!(u.mul(&cov).mul(&u.transpose())[(0, 0)].abs() < 1e-9);
    }

    #[test]
    fn twelve_significant_digits(x in -1e6..1e6f64) {
        let s = format_float(x);
        let digits = s.trim_start_matches('-').split(['e', 'E']).next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
        prop_assert!(digits <= 13, "{s}");
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300), "{x} -> {s}");
    }
}

#[test]
fn relabelled_c24_keeps_its_counts() {
    let g = builtin("C24").unwrap();
    let n = g.faces().len();
    let perm: Vec<usize> = (0..24).map(|v| (7 * v + 5) % 24).collect();
    let h = relabel(&g, &perm, &vec![2; n], &vec![true; n], &(0..n).rev().collect::<Vec<_>>());
    for pair in [MagicPair::new(57, 108), MagicPair::new(68, 42), MagicPair::new(58, 102)] {
        let a = enumerate(&g, pair, &SearchOptions::default()).unwrap().count;
        let b = enumerate(&h, pair, &SearchOptions::default()).unwrap().count;
        assert_eq!(a, b, "{pair}");
    }
    assert_eq!(automorphisms(&h).order(), 24);
}

#[test]
fn every_stored_solution_verifies() {
    let c = classes();
    for s in [&c.small, &c.small_complement] {
        assert_eq!(s.count, 576);
        for f in s.solutions().unwrap() {
            assert!(verify_configuration(&c.c24, f, s.pair).unwrap());
        }
    }
}
