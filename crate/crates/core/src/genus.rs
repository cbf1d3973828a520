//! Genus equality, definite isometry testing and Kneser neighbour walks.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeVector, Signature};
use crate::quadform::{discriminant_form, span_over, FiniteQuadraticForm, FormSummary};
use crate::short_vectors::{for_each_vector_while, positive_form};

/// Signature together with the discriminant quadratic form. For even
/// lattices these two invariants determine the genus.
#[derive(Clone, Debug)]
pub struct GenusTag {
    pub signature: Signature,
    pub disc_form: FiniteQuadraticForm,
}

impl GenusTag {
    pub fn of(l: &Lattice) -> Result<Self> {
        l.require_nondegenerate()?;
        Ok(Self {
            signature: l.signature(),
            disc_form: discriminant_form(l)?,
        })
    }

    pub fn summary(&self) -> FormSummary {
        FormSummary::from(&self.disc_form)
    }
}

impl PartialEq for GenusTag {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature && self.disc_form.is_isomorphic(&other.disc_form)
    }
}

pub fn genus_tag(l: &Lattice) -> Result<GenusTag> {
    GenusTag::of(l)
}

pub fn same_genus(a: &Lattice, b: &Lattice) -> Result<bool> {
    Ok(a.rank() == b.rank() && GenusTag::of(a)? == GenusTag::of(b)?)
}

/// Isometry tests give up once a lattice has more short vectors than this.
pub const MAX_CACHED_VECTORS: usize = 50_000;

/// Partial assignments tried by one isometry test before it gives up.
pub const MAX_ISOMETRY_NODES: u64 = 2_000_000;

/// Short vectors of a fixed positive definite lattice, bucketed by norm,
/// with `G·x` cached so pairings cost one dot product.
struct VectorCache {
    lattice: Lattice,
    bound: i64,
    by_norm: BTreeMap<i64, Vec<Cached>>,
}

struct Cached {
    coords: Vec<i64>,
    image: Vec<i64>,
    lead_positive: bool,
}

impl VectorCache {
    fn new(lattice: Lattice) -> Self {
        Self {
            lattice,
            bound: 0,
            by_norm: BTreeMap::new(),
        }
    }

    fn ensure(&mut self, bound: i64) -> Result<()> {
        if bound <= self.bound {
            return Ok(());
        }
        let g = self.lattice.gram().to_vec();
        let mut by_norm: BTreeMap<i64, Vec<Cached>> = BTreeMap::new();
        let mut total = 0usize;
        for_each_vector_while(&self.lattice, bound, &mut |x, n| {
            total += 1;
            if total > MAX_CACHED_VECTORS {
                return false;
            }
            let image = g
                .iter()
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect();
            let lead_positive = x.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
            by_norm.entry(n).or_default().push(Cached {
                coords: x.to_vec(),
                image,
                lead_positive,
            });
            true
        })?;
        if total > MAX_CACHED_VECTORS {
            return Err(Error::SearchLimit(format!("more than {MAX_CACHED_VECTORS} short vectors")));
        }
        for list in by_norm.values_mut() {
            list.sort_by(|a, b| a.coords.cmp(&b.coords));
        }
        self.by_norm = by_norm;
        self.bound = bound;
        Ok(())
    }

    fn count(&self, norm: i64) -> usize {
        self.by_norm.get(&norm).map_or(0, Vec::len)
    }

    /// Vectors of `self.lattice` whose Gram matrix is `target`, one per
    /// target basis vector, or `None`.
    fn embed(&mut self, target: &[Vec<i64>]) -> Result<Option<Vec<Vec<i64>>>> {
        let r = target.len();
        let top = target.iter().enumerate().map(|(i, row)| row[i]).max().unwrap_or(0);
        self.ensure(top)?;
        let mut lists: Vec<&[Cached]> = Vec::with_capacity(r);
        for (i, row) in target.iter().enumerate() {
            match self.by_norm.get(&row[i]) {
                Some(v) => lists.push(v),
                None => return Ok(None),
            }
        }
        let mut chosen: Vec<&Cached> = Vec::with_capacity(r);
        let mut nodes = 0u64;
        if backtrack(target, &lists, &mut chosen, &mut nodes)? {
            Ok(Some(chosen.iter().map(|c| c.coords.clone()).collect()))
        } else {
            Ok(None)
        }
    }
}

fn backtrack<'a>(
    target: &[Vec<i64>],
    lists: &[&'a [Cached]],
    chosen: &mut Vec<&'a Cached>,
    nodes: &mut u64,
) -> Result<bool> {
    let i = chosen.len();
    if i == target.len() {
        return Ok(true);
    }
    *nodes += 1;
    if *nodes > MAX_ISOMETRY_NODES {
        return Err(Error::SearchLimit(format!(
            "isometry test exceeded {MAX_ISOMETRY_NODES} steps"
        )));
    }
    for c in lists[i] {
        // -1 is always an automorphism, so the first image can be taken
        // with positive leading coordinate
        if i == 0 && !c.lead_positive {
            continue;
        }
        let fits = chosen
            .iter()
            .enumerate()
            .all(|(j, d)| dot(&d.image, &c.coords) == target[j][i]);
        if !fits {
            continue;
        }
        chosen.push(c);
        if backtrack(target, lists, chosen, nodes)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Counts of vectors per norm up to `bound`; an isometry invariant used for
/// pruning and for ordering classes.
fn vector_profile(cache: &mut VectorCache, bound: i64) -> Result<Vec<usize>> {
    cache.ensure(bound)?;
    Ok((1..=bound).map(|n| cache.count(n)).collect())
}

fn max_diagonal(l: &Lattice) -> i64 {
    l.gram().iter().enumerate().map(|(i, row)| row[i]).max().unwrap_or(0)
}

/// Isometry of two positive definite lattices, comparing vector counts
/// before the backtracking search.
fn same_class(a: &mut VectorCache, b: &mut VectorCache) -> Result<bool> {
    let top = max_diagonal(&b.lattice);
    if vector_profile(a, top)? != vector_profile(b, top)? {
        return Ok(false);
    }
    let other = b.lattice.clone();
    Ok(isometry_via_cache(a, &other)?.is_some())
}

fn check_definite_pair(a: &Lattice, b: &Lattice) -> Result<Option<(Lattice, Lattice)>> {
    let (pa, sa) = positive_form(a)?;
    let (pb, sb) = positive_form(b)?;
    if a.rank() != b.rank() || (a.rank() > 0 && sa != sb) || a.determinant() != b.determinant() {
        return Ok(None);
    }
    Ok(Some((pa, pb)))
}

/// An integer matrix `P` (row-major) with `Pᵀ·gram_A·P = gram_B`, if the two
/// definite lattices are isometric. Column `j` of `P` is the image of the
/// `j`-th basis vector of `B`, written in the basis of `A`.
pub fn is_isometric(a: &Lattice, b: &Lattice) -> Result<Option<Vec<Vec<i64>>>> {
    let Some((pa, pb)) = check_definite_pair(a, b)? else {
        return Ok(None);
    };
    let mut cache = VectorCache::new(pa);
    isometry_via_cache(&mut cache, &pb)
}

fn isometry_via_cache(cache: &mut VectorCache, b: &Lattice) -> Result<Option<Vec<Vec<i64>>>> {
    let r = b.rank();
    if r == 0 {
        return Ok(Some(vec![]));
    }
    let (reduced, basis) = b.lll_reduce()?;
    let Some(images) = cache.embed(reduced.gram())? else {
        return Ok(None);
    };
    // images are the reduced basis of B expressed in A; undo the reduction
    // by writing B's original basis vectors in the reduced basis.
    let rows: Vec<Vec<i64>> = basis.iter().map(|v| v.coords.clone()).collect();
    let inv = crate::matrix::unimodular_inverse(&crate::matrix::to_big(&rows));
    let inv = crate::matrix::to_i64(&inv).ok_or(Error::Overflow("inverting a reduction basis"))?;
    let mut p = vec![vec![0i64; r]; r];
    for j in 0..r {
        for (k, c) in inv[j].iter().enumerate() {
            for i in 0..r {
                p[i][j] += c * images[k][i];
            }
        }
    }
    debug_assert!(verify_isometry(&cache.lattice, b, &p));
    Ok(Some(p))
}

/// Exact check of `Pᵀ·gram_A·P = gram_B`.
pub fn verify_isometry(a: &Lattice, b: &Lattice, p: &[Vec<i64>]) -> bool {
    let r = a.rank();
    if b.rank() != r || p.len() != r || p.iter().any(|row| row.len() != r) {
        return false;
    }
    let col = |j: usize| LatticeVector::new((0..r).map(|i| p[i][j]).collect());
    (0..r).all(|i| (0..r).all(|j| a.pair(&col(i), &col(j)) == b.gram()[i][j]))
}

fn check_prime(p: u64, l: &Lattice) -> Result<()> {
    let prime = p >= 3 && p % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= p).all(|d| p % d != 0);
    let disc = l.disc();
    if !prime || (disc.clone() % p).to_u64() == Some(0) {
        return Err(Error::BadPrime(p));
    }
    Ok(())
}

/// Number of lines in `(Z/p)^r`.
fn line_count(p: u64, r: usize) -> Option<u64> {
    let pr = p.checked_pow(r as u32)?;
    Some((pr - 1) / (p - 1))
}

/// Calls `f` for every `p`-neighbour of a positive definite even lattice, in
/// a fixed order. Stops early when `f` returns `false`.
fn walk_neighbors(l: &Lattice, p: u64, f: &mut dyn FnMut(Lattice) -> Result<bool>) -> Result<()> {
    let r = l.rank();
    if r < 2 {
        return Ok(());
    }
    let pi = p as i64;
    let g = l.gram();
    let mut v = vec![0i64; r];
    for lead in 0..r {
        // v = (0,…,0,1,*,…,*) with the tail running over (Z/p)^(r-lead-1)
        v.iter_mut().for_each(|x| *x = 0);
        v[lead] = 1;
        loop {
            if let Some(n) = neighbor(g, &v, pi, l)? {
                if !f(n)? {
                    return Ok(());
                }
            }
            // increment the tail
            let mut k = r - 1;
            loop {
                if k == lead {
                    break;
                }
                v[k] += 1;
                if v[k] < pi {
                    break;
                }
                v[k] = 0;
                k -= 1;
            }
            if k == lead {
                break;
            }
        }
    }
    Ok(())
}

fn neighbor(g: &[Vec<i64>], v: &[i64], p: i64, l: &Lattice) -> Result<Option<Lattice>> {
    let r = v.len();
    let gv: Vec<i128> = g
        .iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| *a as i128 * *b as i128).sum())
        .collect();
    let vv: i128 = gv.iter().zip(v).map(|(a, b)| a * *b as i128).sum();
    let p128 = p as i128;
    if vv % p128 != 0 {
        return Ok(None);
    }
    let j0 = gv
        .iter()
        .position(|x| x.rem_euclid(p128) != 0)
        .expect("p does not divide the discriminant");
    let gj = gv[j0].rem_euclid(p128);
    let inv = mod_inverse(gj, p128);
    // v' = v + p t e_j0 with v'·v' ≡ 0 mod p²
    let t = (-(vv / p128) * mod_inverse(2 * gj % p128, p128)).rem_euclid(p128);
    let mut lifted: Vec<i64> = v.to_vec();
    lifted[j0] += (p128 * t) as i64;
    // {x : x·v ≡ 0 mod p} is spanned by p e_j0 and e_i − c_i e_j0
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(r + 1);
    for i in 0..r {
        let mut row = vec![0i64; r];
        if i == j0 {
            row[j0] = p * p;
        } else {
            let c = (gv[i].rem_euclid(p128) * inv % p128) as i64;
            row[i] = p;
            row[j0] = -c * p;
        }
        rows.push(row);
    }
    rows.push(lifted);
    let (_, n, _) = span_over(l, p, &rows)?;
    Ok(Some(n.lll_reduce()?.0))
}

fn mod_inverse(a: i128, p: i128) -> i128 {
    // p is prime: a^(p-2)
    let mut result = 1i128;
    let mut base = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// All `p`-neighbours of a definite even lattice, returned with the input's
/// sign. Every neighbour is checked to lie in the same genus.
pub fn kneser_neighbors(l: &Lattice, p: u64) -> Result<Vec<Lattice>> {
    let (pos, sign) = positive_form(l)?;
    check_prime(p, l)?;
    let tag = GenusTag::of(&pos)?;
    let mut out = Vec::new();
    walk_neighbors(&pos, p, &mut |n| {
        assert!(GenusTag::of(&n)? == tag, "neighbour left the genus");
        out.push(if sign < 0 { n.rescale(-1) } else { n });
        Ok(true)
    })?;
    Ok(out)
}

/// Effort bound for [`unique_in_genus`]: at most
/// `class_cap * NEIGHBORS_PER_CLASS` neighbours are examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusEffort {
    pub class_cap: usize,
}

pub const DEFAULT_CLASS_CAP: usize = 64;
pub const NEIGHBORS_PER_CLASS: u64 = 4096;
/// Rank from which a definite lattice is never alone in its genus; taken
/// as a known fact, not re-derived.
pub const SINGLE_CLASS_RANK_BOUND: usize = 11;

impl Default for GenusEffort {
    fn default() -> Self {
        Self {
            class_cap: DEFAULT_CLASS_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GenusStatus {
    UniqueInGenus,
    NotUnique { witness: Option<Lattice>, reason: String },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenusVerdict {
    #[serde(flatten)]
    pub status: GenusStatus,
    pub primes: Vec<u64>,
    /// The input first; the walk stops at the first class not isometric to it.
    pub classes_found: Vec<Lattice>,
}

impl GenusVerdict {
    pub fn is_unique(&self) -> bool {
        matches!(self.status, GenusStatus::UniqueInGenus)
    }

    pub fn is_not_unique(&self) -> bool {
        matches!(self.status, GenusStatus::NotUnique { .. })
    }
}

/// The first `k` odd primes not dividing `disc(l)`.
pub fn good_primes(l: &Lattice, k: usize) -> Vec<u64> {
    (3u64..)
        .step_by(2)
        .filter(|&p| check_prime(p, l).is_ok())
        .take(k)
        .collect()
}

/// Decides whether a definite even lattice is the only class in its genus by
/// closing the Kneser neighbour graph at the two smallest good odd primes.
pub fn unique_in_genus(w: &Lattice, effort: GenusEffort) -> Result<GenusVerdict> {
    match close_genus(w, effort) {
        Err(Error::SearchLimit(why)) => Ok(GenusVerdict {
            status: GenusStatus::Inconclusive { reason: why },
            primes: good_primes(&positive_form(w)?.0, 2),
            classes_found: vec![w.clone()],
        }),
        other => other,
    }
}

fn close_genus(w: &Lattice, effort: GenusEffort) -> Result<GenusVerdict> {
    let (pos, sign) = positive_form(w)?;
    let r = pos.rank();
    if r >= SINGLE_CLASS_RANK_BOUND {
        return Ok(GenusVerdict {
            status: GenusStatus::NotUnique {
                witness: None,
                reason: format!(
                    "definite lattices of rank >= {SINGLE_CLASS_RANK_BOUND} have class number > 1"
                ),
            },
            primes: vec![],
            classes_found: vec![w.clone()],
        });
    }
    let primes = good_primes(&pos, 2);
    let back = |l: &Lattice| if sign < 0 { l.rescale(-1) } else { l.clone() };
    let budget = effort.class_cap.max(1) as u64 * NEIGHBORS_PER_CLASS;
    let too_many = primes
        .iter()
        .any(|&p| line_count(p, r).is_none_or(|n| n > budget));
    if too_many {
        return Ok(GenusVerdict {
            status: GenusStatus::Inconclusive {
                reason: format!("neighbour enumeration exceeds the effort budget of {budget}"),
            },
            primes,
            classes_found: vec![w.clone()],
        });
    }

    // If every neighbour of W is isometric to W, the neighbour graph of the
    // genus closes on W alone; otherwise the first stranger is a witness.
    let tag = GenusTag::of(&pos)?;
    let mut own = VectorCache::new(pos.clone());
    let mut examined: u64 = 0;
    let mut witness: Option<Lattice> = None;
    for &p in &primes {
        walk_neighbors(&pos, p, &mut |n| {
            examined += 1;
            assert!(GenusTag::of(&n)? == tag, "neighbour left the genus");
            let mut fresh = VectorCache::new(n);
            if !same_class(&mut own, &mut fresh)? {
                witness = Some(fresh.lattice);
                return Ok(false);
            }
            Ok(examined <= budget)
        })?;
        if witness.is_some() || examined > budget {
            break;
        }
    }

    let mut found: Vec<Lattice> = vec![w.clone()];
    let status = if let Some(other) = witness {
        let other = back(&other);
        found.push(other.clone());
        GenusStatus::NotUnique {
            witness: Some(other),
            reason: "neighbour walk found a second class".into(),
        }
    } else if examined > budget {
        GenusStatus::Inconclusive {
            reason: "effort bound reached before the neighbour graph closed".into(),
        }
    } else {
        GenusStatus::UniqueInGenus
    };
    Ok(GenusVerdict {
        status,
        primes,
        classes_found: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::even_overlattices;

    fn permuted_a2() -> Lattice {
        Lattice::new(vec![vec![-2, -1], vec![-1, -2]]).unwrap()
    }

    #[test]
    fn tags() {
        let e8 = GenusTag::of(&Lattice::e(8)).unwrap();
        assert_eq!(e8.signature, Signature { plus: 0, zero: 0, minus: 8 });
        assert!(e8.disc_form.is_trivial());
        let a1_4 = Lattice::direct_sum_all(&[Lattice::a(1), Lattice::a(1), Lattice::a(1), Lattice::a(1)]);
        assert!(!same_genus(&a1_4, &Lattice::d(4)).unwrap());
        assert!(same_genus(&Lattice::a(2), &permuted_a2()).unwrap());
        assert_eq!(
            GenusTag::of(&Lattice::diagonal(&[0, -2]).unwrap()).unwrap_err(),
            Error::DegenerateLattice
        );
    }

    #[test]
    fn isometries() {
        let p = is_isometric(&Lattice::a(2), &permuted_a2()).unwrap().unwrap();
        assert!(verify_isometry(&Lattice::a(2).rescale(-1), &permuted_a2().rescale(-1), &p));
        let a1_4 = Lattice::direct_sum_all(&[Lattice::a(1), Lattice::a(1), Lattice::a(1), Lattice::a(1)]);
        assert!(is_isometric(&a1_4, &Lattice::d(4)).unwrap().is_none());
        assert!(is_isometric(&Lattice::a(2), &Lattice::a(2).rescale(-1)).unwrap().is_none());
        assert_eq!(
            is_isometric(&crate::named::l1(), &crate::named::l1()).unwrap_err(),
            Error::IndefiniteLattice
        );
    }

    #[test]
    fn e8_from_d8_glue() {
        let d8 = Lattice::d(8);
        let overs = even_overlattices(&d8, 10_000).unwrap();
        // two of the three order-2 glue vectors give E8, the third is odd
        assert!(!overs.is_empty());
        for cert in &overs {
            assert!(cert.verify(&d8));
            let p = is_isometric(&Lattice::e(8), &cert.result).unwrap().unwrap();
            assert!(verify_isometry(&Lattice::e(8).rescale(-1), &cert.result.rescale(-1), &p));
        }
    }

    #[test]
    fn neighbors_stay_in_class() {
        // A2 is anisotropic mod 5, so that list is empty
        assert!(kneser_neighbors(&Lattice::a(2), 5).unwrap().is_empty());
        for (l, p) in [(Lattice::a(2), 7), (Lattice::d(4), 3)] {
            let ns = kneser_neighbors(&l, p).unwrap();
            assert!(!ns.is_empty());
            for n in &ns {
                assert!(is_isometric(&l, n).unwrap().is_some());
            }
        }
        assert_eq!(kneser_neighbors(&Lattice::a(2), 3).unwrap_err(), Error::BadPrime(3));
        assert_eq!(kneser_neighbors(&Lattice::a(2), 9).unwrap_err(), Error::BadPrime(9));
    }

    #[test]
    fn small_class_number_one() {
        for l in [Lattice::a(1), Lattice::a(2), Lattice::d(4), Lattice::a(3)] {
            let v = unique_in_genus(&l, GenusEffort::default()).unwrap();
            assert!(v.is_unique(), "{:?}", l.label());
            assert_eq!(v.classes_found.len(), 1);
        }
    }

    #[test]
    fn e8_is_alone() {
        let e8 = Lattice::e(8);
        let ns = kneser_neighbors(&e8, 3).unwrap();
        assert_eq!(ns.len(), 1120);
        for n in ns.iter().step_by(37) {
            assert!(is_isometric(&e8, n).unwrap().is_some());
        }
        let v = unique_in_genus(&e8, GenusEffort::default()).unwrap();
        assert!(v.is_unique());
        assert_eq!(v.primes, vec![3, 5]);
    }

    #[test]
    fn rank_eleven_shortcut() {
        let w = Lattice::e(8).direct_sum(&Lattice::a(3));
        let v = unique_in_genus(&w, GenusEffort::default()).unwrap();
        assert!(v.is_not_unique());
    }

    #[test]
    fn binary_genus_with_two_classes() {
        // x²+xy+6y² and 2x²+xy+3y² (discriminant −23), doubled to be even
        let a = Lattice::new(vec![vec![2, 1], vec![1, 12]]).unwrap();
        let b = Lattice::new(vec![vec![4, 1], vec![1, 6]]).unwrap();
        assert!(same_genus(&a, &b).unwrap());
        assert!(is_isometric(&a, &b).unwrap().is_none());
        for l in [&a, &b] {
            let v = unique_in_genus(l, GenusEffort::default()).unwrap();
            let GenusStatus::NotUnique { witness: Some(wit), .. } = &v.status else {
                panic!("expected a witness");
            };
            assert!(same_genus(l, wit).unwrap());
            assert!(is_isometric(l, wit).unwrap().is_none());
            assert_eq!(v.classes_found.len(), 2);
        }
    }
}
