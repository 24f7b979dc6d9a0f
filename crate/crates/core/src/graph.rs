//! Fullerene face structures: parsing, validation and the builtin instances.
//!
//! A [`FullereneGraph`] is described entirely by its faces. Every face is a
//! cyclic sequence of 1-based vertex ids; its length decides whether it is a
//! pentagon or a hexagon. The edge set is recovered from consecutive vertex
//! pairs, so the cyclic order of each face matters for validation and for
//! nothing else.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count supported. Label sets are tracked as `u64` bit sets.
pub const MAX_VERTICES: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceKind {
    Pentagon,
    Hexagon,
}

impl FaceKind {
    pub fn size(self) -> usize {
        match self {
            FaceKind::Pentagon => 5,
            FaceKind::Hexagon => 6,
        }
    }
}

/// A validated fullerene face structure.
///
/// Instances only exist after every structural invariant has been checked,
/// so downstream code never re-validates. Internally vertices are 0-based;
/// every public accessor that deals in ids says which convention it uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullereneGraph {
    n: usize,
    /// Faces as 0-based vertex indices, in input order and orientation.
    faces: Vec<Vec<usize>>,
    /// For every vertex, the indices of the three faces containing it.
    vertex_faces: Vec<[usize; 3]>,
    /// Sorted neighbour lists, 0-based.
    neighbours: Vec<[usize; 3]>,
}

/// Per-vertex face multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceProfile {
    /// Number of hexagons containing each vertex (position `i` is `v_{i+1}`).
    pub hex_multiplicity: Vec<u8>,
    /// Number of pentagons containing each vertex; always `3 - hex`.
    pub pent_multiplicity: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    faces: Vec<Vec<usize>>,
}

impl FullereneGraph {
    /// Validates a face list given with 1-based vertex ids.
    pub fn from_faces(n: usize, faces: Vec<Vec<usize>>) -> Result<Self> {
        let fail = |msg: String| Err(Error::Validation(msg));

        if n == 0 || !n.is_multiple_of(2) {
            return fail(format!("vertex count {n} must be a positive even integer"));
        }
        if n < 20 {
            return fail(format!("vertex count {n} is below 20, the smallest fullerene"));
        }
        if n > MAX_VERTICES {
            return fail(format!("vertex count {n} exceeds the supported maximum of {MAX_VERTICES}"));
        }

        for (i, face) in faces.iter().enumerate() {
            if face.len() != 5 && face.len() != 6 {
                return fail(format!("face {} has {} vertices, expected 5 or 6", i + 1, face.len()));
            }
            for &v in face {
                if v == 0 || v > n {
                    return fail(format!("face {} contains vertex {v} outside 1..{n}", i + 1));
                }
            }
            for (a, &u) in face.iter().enumerate() {
                if face[a + 1..].contains(&u) {
                    return fail(format!("face {} repeats vertex {u}", i + 1));
                }
            }
        }

        let pentagons = faces.iter().filter(|f| f.len() == 5).count();
        let hexagons = faces.len() - pentagons;
        if pentagons != 12 {
            return fail(format!("{pentagons} pentagons, expected 12"));
        }
        let expected_hex = n / 2 - 10;
        if hexagons != expected_hex {
            return fail(format!("{hexagons} hexagons, expected {expected_hex}"));
        }

        let faces: Vec<Vec<usize>> = faces.into_iter().map(|f| f.into_iter().map(|v| v - 1).collect()).collect();

        let mut membership: Vec<Vec<usize>> = vec![Vec::with_capacity(3); n];
        for (i, face) in faces.iter().enumerate() {
            for &v in face {
                membership[v].push(i);
            }
        }
        for (v, m) in membership.iter().enumerate() {
            if m.len() != 3 {
                return fail(format!("vertex {} appears in {} faces", v + 1, m.len()));
            }
        }

        let mut edge_faces: HashMap<(usize, usize), usize> = HashMap::new();
        for face in &faces {
            for (a, &u) in face.iter().enumerate() {
                let w = face[(a + 1) % face.len()];
                *edge_faces.entry((u.min(w), u.max(w))).or_default() += 1;
            }
        }
        let mut edges: Vec<_> = edge_faces.into_iter().collect();
        edges.sort_unstable();
        for &((u, w), count) in &edges {
            if count != 2 {
                return fail(format!("edge {}-{} bounds {count} faces, expected 2", u + 1, w + 1));
            }
        }

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(3); n];
        for &((u, w), _) in &edges {
            adjacency[u].push(w);
            adjacency[w].push(u);
        }
        let mut neighbours = Vec::with_capacity(n);
        for (v, adj) in adjacency.iter_mut().enumerate() {
            if adj.len() != 3 {
                return fail(format!("vertex {} has degree {}, expected 3", v + 1, adj.len()));
            }
            adj.sort_unstable();
            neighbours.push([adj[0], adj[1], adj[2]]);
        }

        let vertex_faces = membership.iter().map(|m| [m[0], m[1], m[2]]).collect();

        Ok(Self { n, faces, vertex_faces, neighbours })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Faces as 0-based vertex indices.
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn face_kind(&self, face: usize) -> FaceKind {
        if self.faces[face].len() == 5 {
            FaceKind::Pentagon
        } else {
            FaceKind::Hexagon
        }
    }

    pub fn pentagon_count(&self) -> usize {
        self.faces.iter().filter(|f| f.len() == 5).count()
    }

    pub fn hexagon_count(&self) -> usize {
        self.faces.len() - self.pentagon_count()
    }

    /// The three faces containing a 0-based vertex.
    pub fn faces_of(&self, vertex: usize) -> [usize; 3] {
        self.vertex_faces[vertex]
    }

    /// The three neighbours of a 0-based vertex, ascending.
    pub fn neighbours(&self, vertex: usize) -> [usize; 3] {
        self.neighbours[vertex]
    }

    pub fn are_adjacent(&self, u: usize, w: usize) -> bool {
        self.neighbours[u].contains(&w)
    }

    /// Undirected edges as ascending 0-based pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(3 * self.n / 2);
        for (u, nb) in self.neighbours.iter().enumerate() {
            out.extend(nb.iter().filter(|&&w| w > u).map(|&w| (u, w)));
        }
        out
    }

    /// Faces rendered with 1-based ids, as they appear in graph files.
    pub fn faces_one_based(&self) -> Vec<Vec<usize>> {
        self.faces.iter().map(|f| f.iter().map(|v| v + 1).collect()).collect()
    }

    pub fn incidence_profile(&self) -> IncidenceProfile {
        let hex: Vec<u8> =
            self.vertex_faces.iter().map(|fs| fs.iter().filter(|&&f| self.faces[f].len() == 6).count() as u8).collect();
        let pent = hex.iter().map(|m| 3 - m).collect();
        IncidenceProfile { hex_multiplicity: hex, pent_multiplicity: pent }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile { n: self.n, faces: self.faces_one_based() })
            .expect("graph serialization cannot fail")
    }
}

impl fmt::Display for FullereneGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{} ({} pentagons, {} hexagons)", self.n, self.pentagon_count(), self.hexagon_count())
    }
}

/// Parses and validates a JSON graph file `{"n": .., "faces": [[..], ..]}`.
pub fn parse_fullerene(text: &str) -> Result<FullereneGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    FullereneGraph::from_faces(file.n, file.faces)
}

// Faces are stored in cyclic order. The vertex sets are exactly those of the
// published constraint tables; a few pentagons there are written out of
// cyclic order and have been rotated into boundary order here.

const C24_FACES: [&[usize]; 14] = [
    &[1, 2, 3, 4, 5, 6],
    &[7, 8, 9, 10, 11, 12],
    &[3, 4, 21, 20, 19],
    &[4, 5, 23, 22, 21],
    &[5, 6, 13, 24, 23],
    &[6, 1, 15, 14, 13],
    &[1, 2, 17, 16, 15],
    &[2, 3, 19, 18, 17],
    &[19, 20, 10, 9, 18],
    &[21, 22, 11, 10, 20],
    &[23, 24, 12, 11, 22],
    &[13, 14, 7, 12, 24],
    &[15, 16, 8, 7, 14],
    &[17, 18, 9, 8, 16],
];

const C26_FACES: [&[usize]; 15] = [
    &[5, 6, 7, 18, 17, 16],
    &[8, 9, 10, 11, 21, 20],
    &[12, 13, 14, 15, 24, 23],
    &[19, 20, 21, 22, 26],
    &[11, 12, 23, 22, 21],
    &[3, 10, 11, 12, 13],
    &[1, 2, 4, 5, 6],
    &[2, 3, 13, 14, 4],
    &[1, 2, 3, 10, 9],
    &[4, 5, 16, 15, 14],
    &[1, 6, 7, 8, 9],
    &[15, 16, 17, 25, 24],
    &[17, 18, 19, 26, 25],
    &[22, 23, 24, 25, 26],
    &[7, 8, 20, 19, 18],
];

// Dodecahedron: outer pentagon 1..5, a middle ring 6..15 and an inner
// pentagon 16..20. Outer vertex i is joined to ring vertex 4+2i, inner
// vertex 15+j to ring vertex 5+2j.
const C20_FACES: [&[usize]; 12] = [
    &[1, 2, 3, 4, 5],
    &[16, 17, 18, 19, 20],
    &[1, 2, 8, 7, 6],
    &[2, 3, 10, 9, 8],
    &[3, 4, 12, 11, 10],
    &[4, 5, 14, 13, 12],
    &[5, 1, 6, 15, 14],
    &[7, 8, 9, 17, 16],
    &[9, 10, 11, 18, 17],
    &[11, 12, 13, 19, 18],
    &[13, 14, 15, 20, 19],
    &[15, 6, 7, 16, 20],
];

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["C20", "C24", "C26"];

/// One of the embedded graphs `C20`, `C24` or `C26` (case-insensitive).
pub fn builtin(name: &str) -> Result<FullereneGraph> {
    let (n, faces): (usize, &[&[usize]]) = match name.to_ascii_uppercase().as_str() {
        "C20" => (20, &C20_FACES),
        "C24" => (24, &C24_FACES),
        "C26" => (26, &C26_FACES),
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    FullereneGraph::from_faces(n, faces.iter().map(|f| f.to_vec()).collect())
}

/// The `(5,0)` nanotube fullerene with `rings` zigzag rings of ten vertices
/// between two pentagonal caps; `n = 10 + 10·rings`. One ring gives the
/// dodecahedron (numbered differently from the `C20` builtin), five give a
/// `D5h` isomer of C60.
pub fn zigzag_tube(rings: usize) -> Result<FullereneGraph> {
    if rings == 0 {
        return Err(Error::Validation("a zigzag tube needs at least one ring".into()));
    }
    let n = 10 + 10 * rings;
    // Top cap 1..=5, ring j (0-based) at 6+10j.., bottom cap n-4..=n.
    let top = |i: usize| 1 + i % 5;
    let ring = |j: usize, i: usize| 6 + 10 * j + i % 10;
    let bottom = |i: usize| n - 4 + i % 5;
    let mut faces = vec![(0..5).map(top).collect::<Vec<_>>()];
    for i in 0..5 {
        faces.push(vec![top(i), top(i + 1), ring(0, 2 * i + 2), ring(0, 2 * i + 1), ring(0, 2 * i)]);
    }
    // Odd vertices of a ring meet the even vertices of the next one.
    for j in 0..rings - 1 {
        for i in 0..5 {
            faces.push(vec![
                ring(j, 2 * i + 1),
                ring(j, 2 * i + 2),
                ring(j, 2 * i + 3),
                ring(j + 1, 2 * i + 4),
                ring(j + 1, 2 * i + 3),
                ring(j + 1, 2 * i + 2),
            ]);
        }
    }
    let last = rings - 1;
    for i in 0..5 {
        faces.push(vec![bottom(i + 1), bottom(i), ring(last, 2 * i + 1), ring(last, 2 * i + 2), ring(last, 2 * i + 3)]);
    }
    faces.push((0..5).rev().map(bottom).collect());
    FullereneGraph::from_faces(n, faces)
}
