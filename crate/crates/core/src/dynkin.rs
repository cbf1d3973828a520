//! Extended Dynkin subdiagrams of a dual graph of (−2)-curves and the
//! elliptic fibrations they support.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix;
use crate::short_vectors::{classify_dynkin_tree, AdeType, Family};

/// Largest graph accepted by the exhaustive subdiagram search.
pub const MAX_GRAPH_VERTICES: usize = 24;

/// Weighted dual graph: `weights[i][j]` is `Cᵢ·Cⱼ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct DualGraph {
    pub label: String,
    pub vertices: Vec<String>,
    pub weights: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawGraph {
    #[serde(default)]
    label: String,
    vertices: Vec<String>,
    weights: Vec<Vec<i64>>,
}

impl TryFrom<RawGraph> for DualGraph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        DualGraph::new(raw.label, raw.vertices, raw.weights)
    }
}

impl DualGraph {
    pub fn new(label: impl Into<String>, vertices: Vec<String>, weights: Vec<Vec<i64>>) -> Result<Self> {
        let n = vertices.len();
        if weights.len() != n || weights.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGram(format!("weights must be {n}×{n}")));
        }
        for i in 0..n {
            if weights[i][i] != -2 {
                return Err(Error::InvalidGram(format!("vertex {} has self-intersection {}", vertices[i], weights[i][i])));
            }
            for j in 0..i {
                if weights[i][j] != weights[j][i] {
                    return Err(Error::InvalidGram(format!("weights not symmetric at ({i}, {j})")));
                }
                if weights[i][j] < 0 {
                    return Err(Error::InvalidGram(format!("negative weight at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            vertices,
            weights,
        })
    }

    /// Graph with unnamed vertices `C1, C2, …`.
    pub fn from_weights(label: impl Into<String>, weights: Vec<Vec<i64>>) -> Result<Self> {
        let vertices = (1..=weights.len()).map(|i| format!("C{i}")).collect();
        Self::new(label, vertices, weights)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Intersection number of two integer combinations of the vertices.
    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        let n = self.len();
        let mut s = 0;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                s += x[i] * self.weights[i][j] * y[j];
            }
        }
        s
    }
}

/// Affine (extended) diagram type; wraps the underlying finite type, so
/// `Ã₂` is stored as `A2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtendedKind(pub AdeType);

impl fmt::Display for ExtendedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}~{}", self.0.family, self.0.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtendedDiagram {
    pub kind: ExtendedKind,
    /// sorted vertex indices
    pub vertices: Vec<usize>,
    /// multiplicities, aligned with `vertices`
    pub multiplicities: Vec<i64>,
}

fn induced_adjacency(g: &DualGraph, s: &[usize]) -> Option<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); s.len()];
    for a in 0..s.len() {
        for b in 0..s.len() {
            if a != b {
                match g.weights[s[a]][s[b]] {
                    0 => {}
                    1 => adj[a].push(b),
                    _ => return None,
                }
            }
        }
    }
    Some(adj)
}

fn is_finite_dynkin(g: &DualGraph, s: &[usize]) -> bool {
    induced_adjacency(g, s).is_some_and(|adj| classify_dynkin_tree(&adj).is_some())
}

fn affine_kind(g: &DualGraph, s: &[usize]) -> Option<ExtendedKind> {
    let k = s.len();
    if k == 2 && g.weights[s[0]][s[1]] == 2 {
        return Some(ExtendedKind(AdeType { family: Family::A, index: 1 }));
    }
    let adj = induced_adjacency(g, s)?;
    let edges: usize = adj.iter().map(|a| a.len()).sum::<usize>() / 2;
    if k >= 3 && edges == k && adj.iter().all(|a| a.len() == 2) {
        // connected and 2-regular: a single cycle
        return Some(ExtendedKind(AdeType { family: Family::A, index: k - 1 }));
    }
    if edges + 1 != k {
        return None;
    }
    let degrees: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let branch: Vec<usize> = (0..k).filter(|&v| degrees[v] >= 3).collect();
    match branch.as_slice() {
        [c] if degrees[*c] == 4 => (k == 5).then_some(ExtendedKind(AdeType { family: Family::D, index: 4 })),
        [c] if degrees[*c] == 3 => {
            let mut arms = arm_lengths(&adj, *c);
            arms.sort_unstable();
            let family_index = match arms.as_slice() {
                [2, 2, 2] => (Family::E, 6),
                [1, 3, 3] => (Family::E, 7),
                [1, 2, 5] => (Family::E, 8),
                _ => return None,
            };
            Some(ExtendedKind(AdeType {
                family: family_index.0,
                index: family_index.1,
            }))
        }
        [a, b] if degrees[*a] == 3 && degrees[*b] == 3 => {
            // two forks joined by a path, each fork ending in two leaves
            let leaves = |c: usize| adj[c].iter().filter(|&&w| degrees[w] == 1).count();
            (leaves(*a) == 2 && leaves(*b) == 2).then_some(ExtendedKind(AdeType { family: Family::D, index: k - 1 }))
        }
        _ => None,
    }
}

fn arm_lengths(adj: &[Vec<usize>], c: usize) -> Vec<usize> {
    adj[c]
        .iter()
        .map(|&start| {
            let (mut prev, mut cur, mut len) = (c, start, 1);
            loop {
                let next: Vec<usize> = adj[cur].iter().copied().filter(|&w| w != prev).collect();
                match next.as_slice() {
                    [] => break len,
                    [w] => {
                        prev = cur;
                        cur = *w;
                        len += 1;
                    }
                    _ => break usize::MAX,
                }
            }
        })
        .collect()
}

/// Positive primitive generator of the kernel of the induced intersection
/// matrix; for an affine diagram these are the fibre multiplicities.
fn multiplicities(g: &DualGraph, s: &[usize]) -> Vec<i64> {
    let m: Vec<Vec<BigInt>> = s
        .iter()
        .map(|&i| s.iter().map(|&j| BigInt::from(g.weights[i][j])).collect())
        .collect();
    let ker = matrix::integer_kernel(&m, s.len());
    assert_eq!(ker.len(), 1, "affine diagrams have one-dimensional kernel");
    let sign = if ker[0].iter().any(|x| x.is_negative()) { -1 } else { 1 };
    ker[0].iter().map(|x| sign * x.to_i64().expect("small multiplicity")).collect()
}

/// All vertex subsets whose induced subgraph is an extended Dynkin diagram,
/// sorted by vertex set.
pub fn find_extended_diagrams(g: &DualGraph) -> Result<Vec<ExtendedDiagram>> {
    let n = g.len();
    if n > MAX_GRAPH_VERTICES {
        return Err(Error::GraphTooLarge(n));
    }
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && g.weights[i][j] > 0).collect())
        .collect();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    // grow connected sets; proper connected subsets of an affine diagram are
    // finite Dynkin diagrams, so only those are extended further
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(s) = stack.pop() {
        let frontier: BTreeSet<usize> = s
            .iter()
            .flat_map(|&v| neighbours[v].iter().copied())
            .filter(|w| !s.contains(w))
            .collect();
        for w in frontier {
            let mut t = s.clone();
            t.push(w);
            t.sort_unstable();
            if !seen.insert(t.clone()) {
                continue;
            }
            if affine_kind(g, &t).is_some() {
                found.insert(t);
            } else if is_finite_dynkin(g, &t) {
                stack.push(t);
            }
        }
    }
    let mut out: Vec<ExtendedDiagram> = found
        .into_iter()
        .map(|s| {
            let kind = affine_kind(g, &s).expect("checked above");
            let multiplicities = multiplicities(g, &s);
            ExtendedDiagram {
                kind,
                vertices: s,
                multiplicities,
            }
        })
        .collect();
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    for d in &out {
        let f = fiber_class(g, d);
        assert_eq!(g.pair(&f, &f), 0);
        for &v in &d.vertices {
            let mut c = vec![0; n];
            c[v] = 1;
            assert_eq!(g.pair(&f, &c), 0, "fibre class must be orthogonal to its components");
        }
    }
    Ok(out)
}

/// `F = Σ mᵢ Cᵢ` over all vertices of the graph.
pub fn fiber_class(g: &DualGraph, d: &ExtendedDiagram) -> Vec<i64> {
    let mut f = vec![0; g.len()];
    for (&v, &m) in d.vertices.iter().zip(&d.multiplicities) {
        f[v] = m;
    }
    f
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibrationCount {
    pub count: usize,
    pub diagrams: Vec<ExtendedDiagram>,
    /// indices into `diagrams`, one group per fibration
    pub groups: Vec<Vec<usize>>,
    /// `Fᵢ·Fⱼ` for all pairs of diagrams
    pub products: Vec<Vec<i64>>,
}

/// Groups the extended diagrams into fibrations: two diagrams belong to the
/// same fibration iff their fibre classes are orthogonal.
pub fn count_fibrations(g: &DualGraph) -> Result<FibrationCount> {
    let diagrams = find_extended_diagrams(g)?;
    let classes: Vec<Vec<i64>> = diagrams.iter().map(|d| fiber_class(g, d)).collect();
    let k = diagrams.len();
    let products: Vec<Vec<i64>> = (0..k)
        .map(|i| (0..k).map(|j| g.pair(&classes[i], &classes[j])).collect())
        .collect();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..k {
        for j in i + 1..k {
            if products[i][j] < 0 {
                return Err(Error::InconsistentGrouping(format!(
                    "diagrams {i} and {j} have negative product {}",
                    products[i][j]
                )));
            }
            if products[i][j] == 0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<usize> = Vec::new();
    for i in 0..k {
        let r = find(&mut parent, i);
        match root_of.iter().position(|&x| x == r) {
            Some(gi) => groups[gi].push(i),
            None => {
                root_of.push(r);
                groups.push(vec![i]);
            }
        }
    }
    for grp in &groups {
        for &i in grp {
            for &j in grp {
                if products[i][j] != 0 {
                    return Err(Error::InconsistentGrouping(format!(
                        "diagrams {i} and {j} are linked by orthogonality but meet with product {}",
                        products[i][j]
                    )));
                }
            }
        }
    }
    Ok(FibrationCount {
        count: groups.len(),
        diagrams,
        groups,
        products,
    })
}

/// Graph examples used in tests and fixtures.
pub mod examples {
    use super::DualGraph;

    /// Two `Ã₂` and one `Ã₃` with pairwise fibre products 2.
    pub fn three_fibrations() -> DualGraph {
        DualGraph::from_weights(
            "two-A2-one-A3",
            vec![
                vec![-2, 0, 0, 1, 0, 1],
                vec![0, -2, 1, 0, 1, 1],
                vec![0, 1, -2, 0, 0, 1],
                vec![1, 0, 0, -2, 1, 1],
                vec![0, 1, 0, 1, -2, 0],
                vec![1, 1, 1, 1, 0, -2],
            ],
        )
        .expect("valid graph")
    }

    /// Three disjoint `Ã₁`.
    pub fn three_disjoint_a1() -> DualGraph {
        let mut w = vec![vec![0i64; 6]; 6];
        for i in 0..6 {
            w[i][i] = -2;
        }
        for p in [0, 2, 4] {
            w[p][p + 1] = 2;
            w[p + 1][p] = 2;
        }
        DualGraph::from_weights("three-A1", w).expect("valid graph")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, i64)]) -> DualGraph {
        let mut w = vec![vec![0; n]; n];
        for i in 0..n {
            w[i][i] = -2;
        }
        for &(a, b, x) in edges {
            w[a][b] = x;
            w[b][a] = x;
        }
        DualGraph::from_weights("t", w).unwrap()
    }

    fn kinds(g: &DualGraph) -> Vec<String> {
        find_extended_diagrams(g)
            .unwrap()
            .iter()
            .map(|d| d.kind.to_string())
            .collect()
    }

    #[test]
    fn templates() {
        assert_eq!(kinds(&graph(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)])), vec!["A~2"]);
        assert_eq!(kinds(&graph(2, &[(0, 1, 2)])), vec!["A~1"]);
        assert_eq!(kinds(&graph(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])), vec!["A~3"]);
        assert!(kinds(&graph(2, &[(0, 1, 3)])).is_empty());
        let star = graph(5, &[(4, 0, 1), (4, 1, 1), (4, 2, 1), (4, 3, 1)]);
        let d = find_extended_diagrams(&star).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind.to_string(), "D~4");
        assert_eq!(fiber_class(&star, &d[0]), vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn exceptional_and_long_d() {
        // Ẽ6: centre 0 with arms of two vertices
        let e6 = graph(7, &[(0, 1, 1), (1, 2, 1), (0, 3, 1), (3, 4, 1), (0, 5, 1), (5, 6, 1)]);
        let d = find_extended_diagrams(&e6).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind.to_string(), "E~6");
        assert_eq!(d[0].multiplicities, vec![3, 2, 1, 2, 1, 2, 1]);
        // Ẽ8 arms 1, 2, 5
        let e8 = graph(
            9,
            &[(0, 1, 1), (0, 2, 1), (2, 3, 1), (0, 4, 1), (4, 5, 1), (5, 6, 1), (6, 7, 1), (7, 8, 1)],
        );
        let d = find_extended_diagrams(&e8).unwrap();
        assert_eq!(d.iter().map(|x| x.kind.to_string()).collect::<Vec<_>>(), vec!["E~8"]);
        assert_eq!(d[0].multiplicities.iter().sum::<i64>(), 30);
        // D̃6: forks at 0 and 3
        let d6 = graph(7, &[(0, 1, 1), (0, 2, 1), (0, 4, 1), (4, 3, 1), (3, 5, 1), (3, 6, 1)]);
        assert_eq!(kinds(&d6), vec!["D~6"]);
    }

    #[test]
    fn four_cycle_has_no_triangle() {
        let g = graph(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]);
        let d = find_extended_diagrams(&g).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn graph_examples() {
        let c = count_fibrations(&examples::three_fibrations()).unwrap();
        let mut k: Vec<String> = c.diagrams.iter().map(|d| d.kind.to_string()).collect();
        k.sort();
        assert_eq!(k, vec!["A~2", "A~2", "A~3"]);
        assert_eq!(c.count, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(c.products[i][j], 2);
                }
            }
        }
        let c = count_fibrations(&examples::three_disjoint_a1()).unwrap();
        assert_eq!((c.diagrams.len(), c.count), (3, 1));
    }

    #[test]
    fn triangle_plus_pair() {
        // one unit edge between an Ã₂ and an Ã₁ gives F₁·F₂ = 1
        let g = graph(5, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 2), (2, 3, 1)]);
        let c = count_fibrations(&g).unwrap();
        assert_eq!(c.count, 2);
        assert_eq!(c.products[0][1], 1);
        // two unit edges from the same triangle vertex give F₁·F₂ = 2
        let g = graph(5, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 2), (2, 3, 1), (2, 4, 1)]);
        let c = count_fibrations(&g).unwrap();
        assert_eq!(c.count, c.diagrams.len());
    }

    #[test]
    fn validation() {
        assert!(DualGraph::from_weights("x", vec![vec![-2, 1], vec![0, -2]]).is_err());
        assert!(DualGraph::from_weights("x", vec![vec![-4]]).is_err());
        assert!(DualGraph::from_weights("x", vec![vec![-2, -1], vec![-1, -2]]).is_err());
        let big = DualGraph::from_weights("x", (0..25).map(|i| (0..25).map(|j| if i == j { -2 } else { 0 }).collect()).collect())
            .unwrap();
        assert_eq!(find_extended_diagrams(&big).unwrap_err(), Error::GraphTooLarge(25));
        let json = r#"{"label":"p","vertices":["a","b"],"weights":[[-2,2],[2,-2]]}"#;
        let g: DualGraph = serde_json::from_str(json).unwrap();
        assert_eq!(count_fibrations(&g).unwrap().count, 1);
    }
}
