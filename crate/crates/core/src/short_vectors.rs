//! Exact short-vector enumeration in definite lattices and ADE
//! classification of root sublattices.
//!
//! Enumeration is Fincke–Pohst over the fraction-free (Bareiss) form of the
//! Cholesky decomposition: with leading minors `d_i` and Bareiss rows `a_ij`,
//!
//! ```text
//! Q(x) = Σ_i (Σ_{j≥i} a_ij x_j)² / (d_{i-1} d_i)
//! ```
//!
//! so every pruning bound is an integer square root of an integer.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeVector};
use crate::matrix;

/// Integer data for enumerating a positive definite Gram matrix.
struct Triangular<T> {
    /// upper-triangular Bareiss rows, `rows[i][i] = d_i`
    rows: Vec<Vec<T>>,
    /// `Den / (d_{i-1} d_i)`
    weights: Vec<T>,
    den: T,
}

fn bareiss_rows(g: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let n = g.len();
    let mut a = g.to_vec();
    let mut prev = BigInt::one();
    for k in 0..n {
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let minors: Vec<BigInt> = (0..n).map(|i| a[i][i].clone()).collect();
    for (i, row) in a.iter_mut().enumerate() {
        for x in row.iter_mut().take(i) {
            *x = BigInt::zero();
        }
    }
    (a, minors)
}

fn triangular_big(g: &[Vec<BigInt>]) -> Triangular<BigInt> {
    let (rows, minors) = bareiss_rows(g);
    let mut prev = BigInt::one();
    let mut den = BigInt::one();
    let mut prods = Vec::with_capacity(minors.len());
    for d in &minors {
        let p = &prev * d;
        den = den.lcm(&p);
        prods.push(p);
        prev = d.clone();
    }
    let weights = prods.iter().map(|p| &den / p).collect();
    Triangular { rows, weights, den }
}

trait Arith: Clone + Integer + Signed + Roots + From<i64> {
    fn to_i64_checked(&self) -> i64;
}

impl Arith for i128 {
    fn to_i64_checked(&self) -> i64 {
        i64::try_from(*self).expect("coordinate overflow")
    }
}

impl Arith for BigInt {
    fn to_i64_checked(&self) -> i64 {
        self.to_i64().expect("coordinate overflow")
    }
}

fn narrow(t: &Triangular<BigInt>) -> Triangular<i128> {
    let cv = |x: &BigInt| x.to_i128().unwrap();
    Triangular {
        rows: t.rows.iter().map(|r| r.iter().map(cv).collect()).collect(),
        weights: t.weights.iter().map(cv).collect(),
        den: cv(&t.den),
    }
}

/// Visits every nonzero `x` with `0 < Q(x) ≤ bound`; `f(x, Den·Q(x))`.
/// Stops as soon as `f` returns `false`.
fn enumerate<T: Arith>(tri: &Triangular<T>, budget: T, f: &mut dyn FnMut(&[i64], &T) -> bool) {
    let n = tri.rows.len();
    if n == 0 {
        return;
    }
    let mut x = vec![0i64; n];
    recurse(tri, n - 1, budget.clone(), &budget, &mut x, f);
}

fn recurse<T: Arith>(
    tri: &Triangular<T>,
    level: usize,
    remaining: T,
    budget: &T,
    x: &mut [i64],
    f: &mut dyn FnMut(&[i64], &T) -> bool,
) -> bool {
    let row = &tri.rows[level];
    let d = &row[level];
    let mut s = T::zero();
    for j in level + 1..x.len() {
        if x[j] != 0 {
            s = s + row[j].clone() * T::from(x[j]);
        }
    }
    let w = &tri.weights[level];
    let r = (remaining.clone() / w.clone()).sqrt();
    // d·x + s ∈ [-r, r]
    let lo = (-(r.clone()) - s.clone()).div_ceil(d);
    let hi = (r - s.clone()).div_floor(d);
    let mut xi = lo;
    while xi <= hi {
        let y = d.clone() * xi.clone() + s.clone();
        let rem = remaining.clone() - w.clone() * y.clone() * y;
        x[level] = xi.to_i64_checked();
        if level == 0 {
            if x.iter().any(|&c| c != 0) {
                let used = budget.clone() - rem;
                if !f(x, &used) {
                    x[level] = 0;
                    return false;
                }
            }
        } else if !recurse(tri, level - 1, rem, budget, x, f) {
            x[level] = 0;
            return false;
        }
        xi = xi + T::one();
    }
    x[level] = 0;
    true
}

/// Calls `f(coords, norm)` for every nonzero vector of a positive definite
/// lattice with norm at most `bound` (both signs are visited).
pub fn for_each_vector_up_to(
    l: &Lattice,
    bound: i64,
    f: &mut dyn FnMut(&[i64], i64),
) -> Result<()> {
    for_each_vector_while(l, bound, &mut |x, n| {
        f(x, n);
        true
    })
    .map(|_| ())
}

/// Like [`for_each_vector_up_to`], but stops once `f` returns `false`.
/// Returns whether the enumeration ran to completion.
pub fn for_each_vector_while(
    l: &Lattice,
    bound: i64,
    f: &mut dyn FnMut(&[i64], i64) -> bool,
) -> Result<bool> {
    if !l.is_positive_definite() {
        return Err(Error::IndefiniteLattice);
    }
    if bound <= 0 || l.rank() == 0 {
        return Ok(true);
    }
    let mut complete = true;
    let tri = triangular_big(&l.gram_big());
    let budget = &tri.den * BigInt::from(bound);
    let max_row_bits = tri
        .rows
        .iter()
        .flatten()
        .chain(tri.weights.iter())
        .map(|x| x.bits())
        .max()
        .unwrap_or(0);
    if budget.bits() <= 96 && max_row_bits <= 40 {
        let t = narrow(&tri);
        let den = t.den;
        enumerate(&t, budget.to_i128().unwrap(), &mut |x, used| {
            complete = f(x, (*used / den) as i64);
            complete
        });
    } else {
        let den = tri.den.clone();
        enumerate(&tri, budget, &mut |x, used| {
            complete = f(x, (used / &den).to_i64().expect("norm overflow"));
            complete
        });
    }
    Ok(complete)
}

fn first_nonzero_positive(x: &[i64]) -> bool {
    x.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Sign-pair representatives of all vectors with `0 < |v·v| ≤ |bound|` in a
/// definite lattice, sorted by absolute norm then coordinates. Norms are
/// reported with the lattice's own sign.
pub fn vectors_up_to(l: &Lattice, bound: i64) -> Result<Vec<(LatticeVector, i64)>> {
    let (pos, sign) = positive_form(l)?;
    let mut out = Vec::new();
    for_each_vector_up_to(&pos, bound.abs(), &mut |x, n| {
        if first_nonzero_positive(x) {
            out.push((LatticeVector::new(x.to_vec()), sign * n));
        }
    })?;
    out.sort_by(|a, b| (a.1.abs(), &a.0).cmp(&(b.1.abs(), &b.0)));
    Ok(out)
}

/// Rescales a definite lattice to be positive definite; returns the sign used.
pub(crate) fn positive_form(l: &Lattice) -> Result<(Lattice, i64)> {
    match l.definite_sign() {
        None => Err(Error::IndefiniteLattice),
        Some(-1) => Ok((l.rescale(-1), -1)),
        Some(_) => Ok((l.clone(), 1)),
    }
}

/// All vectors of norm exactly `t`, one per `±` pair (the lexicographically
/// larger), in lexicographic order.
pub fn vectors_of_norm(l: &Lattice, t: i64) -> Result<Vec<LatticeVector>> {
    let (pos, sign) = positive_form(l)?;
    if l.rank() > 0 && (t == 0 || t.signum() != sign) {
        return Err(Error::InvalidParams(format!(
            "norm {t} has the wrong sign for this lattice"
        )));
    }
    let target = t.abs();
    let mut out = Vec::new();
    for_each_vector_up_to(&pos, target, &mut |x, n| {
        if n == target && first_nonzero_positive(x) {
            out.push(LatticeVector::new(x.to_vec()));
        }
    })?;
    out.sort();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

/// One irreducible ADE summand, e.g. `D₄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdeType {
    pub family: Family,
    pub index: usize,
}

impl AdeType {
    pub fn new(family: Family, index: usize) -> Result<Self> {
        let ok = match family {
            Family::A => index >= 1,
            Family::D => index >= 4,
            Family::E => (6..=8).contains(&index),
        };
        if !ok {
            return Err(Error::InvalidParams(format!("no root system {family:?}{index}")));
        }
        Ok(Self { family, index })
    }

    /// The negative definite root lattice of this type.
    pub fn lattice(&self) -> Lattice {
        match self.family {
            Family::A => Lattice::a(self.index),
            Family::D => Lattice::d(self.index),
            Family::E => Lattice::e(self.index),
        }
    }

    pub fn root_count(&self) -> usize {
        let n = self.index;
        match (self.family, n) {
            (Family::A, _) => n * (n + 1),
            (Family::D, _) => 2 * n * (n - 1),
            (Family::E, 6) => 72,
            (Family::E, 7) => 126,
            (Family::E, _) => 240,
        }
    }

    pub fn disc(&self) -> u64 {
        match self.family {
            Family::A => self.index as u64 + 1,
            Family::D => 4,
            Family::E => 9 - self.index as u64,
        }
    }
}

impl fmt::Display for AdeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.index)
    }
}

/// ADE decomposition of the root sublattice of a definite lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootDecomposition {
    pub components: Vec<AdeType>,
    pub total_rank: usize,
    /// simple roots, grouped by component in the order of `components`
    pub simple_roots: Vec<LatticeVector>,
}

impl RootDecomposition {
    pub fn empty() -> Self {
        Self {
            components: Vec::new(),
            total_rank: 0,
            simple_roots: Vec::new(),
        }
    }

    pub fn root_count(&self) -> usize {
        self.components.iter().map(|c| c.root_count()).sum()
    }

    pub fn name(&self) -> String {
        if self.components.is_empty() {
            "0".to_string()
        } else {
            self.components
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("+")
        }
    }
}

impl fmt::Display for RootDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Classifies a connected simply-laced Dynkin graph given by adjacency lists.
pub(crate) fn classify_dynkin_tree(adj: &[Vec<usize>]) -> Option<AdeType> {
    let k = adj.len();
    let edges: usize = adj.iter().map(|a| a.len()).sum::<usize>() / 2;
    if k == 0 || edges != k - 1 {
        return None;
    }
    let branch: Vec<usize> = (0..k).filter(|&v| adj[v].len() >= 3).collect();
    if branch.is_empty() {
        return if adj.iter().all(|a| a.len() <= 2) {
            Some(AdeType { family: Family::A, index: k })
        } else {
            None
        };
    }
    if branch.len() > 1 || adj[branch[0]].len() != 3 {
        return None;
    }
    let c = branch[0];
    let mut arms: Vec<usize> = adj[c]
        .iter()
        .map(|&start| {
            let (mut prev, mut cur, mut len) = (c, start, 1);
            loop {
                let next: Vec<usize> = adj[cur].iter().copied().filter(|&w| w != prev).collect();
                if next.is_empty() {
                    break len;
                }
                prev = cur;
                cur = next[0];
                len += 1;
            }
        })
        .collect();
    arms.sort_unstable();
    match (arms[0], arms[1], arms[2]) {
        (1, 1, s) => Some(AdeType { family: Family::D, index: s + 3 }),
        (1, 2, 2) => Some(AdeType { family: Family::E, index: 6 }),
        (1, 2, 3) => Some(AdeType { family: Family::E, index: 7 }),
        (1, 2, 4) => Some(AdeType { family: Family::E, index: 8 }),
        _ => None,
    }
}

/// Sublattice generated by the norm −2 vectors of a negative definite lattice
/// together with its ADE type.
///
/// Positive roots are those whose first nonzero coordinate is positive; the
/// simple roots are the positive roots that are not a sum of two positive
/// roots.
pub fn root_sublattice(n: &Lattice) -> Result<(Lattice, RootDecomposition)> {
    if n.rank() == 0 {
        return Ok((Lattice::new(vec![]).unwrap(), RootDecomposition::empty()));
    }
    if !n.is_negative_definite() {
        return Err(Error::IndefiniteLattice);
    }
    let positive = vectors_of_norm(n, -2)?;
    let as_set: HashSet<&LatticeVector> = positive.iter().collect();
    let mut decomposable = vec![false; positive.len()];
    let index: std::collections::HashMap<&LatticeVector, usize> =
        positive.iter().enumerate().map(|(i, v)| (v, i)).collect();
    for i in 0..positive.len() {
        for j in i + 1..positive.len() {
            let s = positive[i].add(&positive[j]);
            if as_set.contains(&s) {
                decomposable[index[&s]] = true;
            }
        }
    }
    let simple: Vec<LatticeVector> = positive
        .iter()
        .zip(&decomposable)
        .filter(|(_, &d)| !d)
        .map(|(v, _)| v.clone())
        .collect();

    // components of the Dynkin graph
    let k = simple.len();
    let mut adj = vec![Vec::new(); k];
    for i in 0..k {
        for j in i + 1..k {
            match n.pair(&simple[i], &simple[j]) {
                0 => {}
                1 => {
                    adj[i].push(j);
                    adj[j].push(i);
                }
                other => panic!("simple roots with product {other}"),
            }
        }
    }
    let mut seen = vec![false; k];
    let mut parts: Vec<(AdeType, Vec<usize>)> = Vec::new();
    for s in 0..k {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            for &w in &adj[comp[i]] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        let local: Vec<Vec<usize>> = comp
            .iter()
            .map(|&v| {
                adj[v]
                    .iter()
                    .map(|w| comp.iter().position(|c| c == w).unwrap())
                    .collect()
            })
            .collect();
        let t = classify_dynkin_tree(&local).expect("simple roots form an ADE diagram");
        parts.push((t, comp));
    }
    parts.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let simple_roots: Vec<LatticeVector> = parts
        .iter()
        .flat_map(|(_, c)| c.iter().map(|&i| simple[i].clone()))
        .collect();
    let decomposition = RootDecomposition {
        components: parts.iter().map(|p| p.0).collect(),
        total_rank: k,
        simple_roots,
    };
    let lattice = n.sublattice(&decomposition.simple_roots)?;
    debug_assert_eq!(decomposition.root_count(), 2 * positive.len());
    Ok((lattice, decomposition))
}

/// True iff the roots of `n` span a full-rank sublattice.
pub fn is_root_overlattice(n: &Lattice) -> Result<bool> {
    let (_, d) = root_sublattice(n)?;
    Ok(d.total_rank == n.rank())
}

/// Coordinate box `|x_i| ≤ ⌊√(t·(G⁻¹)_ii)⌋` containing every vector of norm
/// at most `t` in a positive definite lattice.
pub fn dual_gram_box(l: &Lattice, t: i64) -> Vec<i64> {
    let inv = matrix::inverse(&l.gram_big()).expect("definite lattice is invertible");
    inv.iter()
        .enumerate()
        .map(|(i, row)| {
            let v = &row[i] * BigInt::from(t);
            v.floor().to_integer().sqrt().to_i64().unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: exhaustive scan of the dual-Gram box.
    fn box_search(l: &Lattice, t: i64) -> Vec<LatticeVector> {
        let (pos, _) = positive_form(l).unwrap();
        let bounds = dual_gram_box(&pos, t.abs());
        let n = l.rank();
        let mut out = Vec::new();
        let mut x: Vec<i64> = bounds.iter().map(|b| -b).collect();
        loop {
            let v = LatticeVector::new(x.clone());
            if l.norm(&v) == t && first_nonzero_positive(&x) {
                out.push(v);
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                if x[i] < bounds[i] {
                    x[i] += 1;
                    break;
                }
                x[i] = -bounds[i];
                i += 1;
            }
        }
    }

    #[test]
    fn standard_root_counts() {
        assert_eq!(vectors_of_norm(&Lattice::a(2), -2).unwrap().len(), 3);
        assert_eq!(vectors_of_norm(&Lattice::e(8), -2).unwrap().len(), 120);
        assert!(vectors_of_norm(&Lattice::diagonal(&[-4]).unwrap(), -2)
            .unwrap()
            .is_empty());
        for n in 1..=6 {
            assert_eq!(vectors_of_norm(&Lattice::a(n), -2).unwrap().len() * 2, n * (n + 1));
        }
        for n in 4..=7 {
            assert_eq!(vectors_of_norm(&Lattice::d(n), -2).unwrap().len() * 2, 2 * n * (n - 1));
        }
    }

    #[test]
    fn matches_box_oracle() {
        for l in [Lattice::a(3), Lattice::d(4), Lattice::a(2).direct_sum(&Lattice::a(1))] {
            for t in [-2, -4, -6] {
                assert_eq!(vectors_of_norm(&l, t).unwrap(), box_search(&l, t));
            }
        }
    }

    /// Independent oracle for E8: close the simple roots under the simple
    /// reflections `s_i(v) = v + (v·α_i)α_i`.
    #[test]
    fn e8_roots_match_reflection_closure() {
        let e8 = Lattice::e(8);
        let simple: Vec<LatticeVector> = (0..8).map(|i| LatticeVector::basis(8, i)).collect();
        let mut roots: HashSet<LatticeVector> = simple.iter().cloned().collect();
        let mut frontier: Vec<LatticeVector> = simple.clone();
        while let Some(v) = frontier.pop() {
            for a in &simple {
                let w = v.add(&a.scale(e8.pair(&v, a)));
                if roots.insert(w.clone()) {
                    frontier.push(w);
                }
            }
        }
        let mut reps: Vec<LatticeVector> = roots
            .into_iter()
            .filter(|v| first_nonzero_positive(&v.coords))
            .collect();
        reps.sort();
        assert_eq!(reps.len(), 120);
        assert_eq!(vectors_of_norm(&e8, -2).unwrap(), reps);
    }

    #[test]
    fn wrong_sign_and_indefinite() {
        assert!(vectors_of_norm(&Lattice::a(2), 2).is_err());
        assert_eq!(
            vectors_of_norm(&Lattice::hyperbolic_plane(), -2),
            Err(Error::IndefiniteLattice)
        );
    }

    #[test]
    fn root_sublattices() {
        let l = Lattice::diagonal(&[-4, -6]).unwrap();
        assert_eq!(root_sublattice(&l).unwrap().1.total_rank, 0);
        let t = Lattice::new(vec![vec![-4, -2], vec![-2, -4]]).unwrap();
        assert_eq!(root_sublattice(&t).unwrap().1.total_rank, 0);
        let (_, d) = root_sublattice(&Lattice::d(4)).unwrap();
        assert_eq!(d.name(), "D4");
        assert_eq!(d.total_rank, 4);
        for (l, name) in [
            (Lattice::e(6), "E6"),
            (Lattice::e(7), "E7"),
            (Lattice::e(8), "E8"),
            (Lattice::d(6).direct_sum(&Lattice::a(1)), "A1+D6"),
        ] {
            assert_eq!(root_sublattice(&l).unwrap().1.name(), name);
        }
        let g = Lattice::new(vec![vec![-2, 1, 0], vec![1, -2, 0], vec![0, 0, -8]]).unwrap();
        assert!(!is_root_overlattice(&g).unwrap());
        assert!(is_root_overlattice(&Lattice::a(2)).unwrap());
        assert!(!is_root_overlattice(&Lattice::diagonal(&[-4]).unwrap()).unwrap());
    }

    #[test]
    fn root_sublattice_is_idempotent() {
        let g = Lattice::new(vec![vec![-2, 1, 0], vec![1, -2, 0], vec![0, 0, -8]]).unwrap();
        let (r, d) = root_sublattice(&g).unwrap();
        let (_, d2) = root_sublattice(&r).unwrap();
        assert_eq!(d.components, d2.components);
    }
}
