//! Decision criteria for elliptic fibrations on K3 surfaces, phrased on the
//! Picard lattice: stabilizer test, `U ⊕ W` splitting, genus/overlattice
//! criterion, root-overlattice obstruction, divisibility reduction, the
//! rank-2 ray/orbit model and Tate–Shafarevich twist bookkeeping.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genus::{unique_in_genus, GenusEffort, GenusStatus};
use crate::lattice::{Lattice, LatticeVector};
use crate::matrix;
use crate::quadform::{discriminant_form, divide_vector, even_overlattices, DEFAULT_GROUP_BOUND};
use crate::short_vectors::{for_each_vector_while, root_sublattice, AdeType, Family};

/// Default bound on the height `v·h` in isotropic-vector searches.
pub const DEFAULT_HEIGHT_BOUND: i64 = 10;
/// Vectors visited per isotropic search before giving up.
pub const DEFAULT_SEARCH_CAP: u64 = 2_000_000;
/// Rank from which every indefinite form represents zero.
pub const MEYER_RANK: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    #[default]
    Unknown,
}

/// Geometric hypotheses the tool cannot verify on its own.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    #[serde(default)]
    pub infinite_aut: Tri,
    #[serde(default)]
    pub zero_entropy: Tri,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Options {
    pub genus_effort: GenusEffort,
    pub group_bound: u64,
    pub height_bound: i64,
    pub search_cap: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            genus_effort: GenusEffort::default(),
            group_bound: DEFAULT_GROUP_BOUND,
            height_bound: DEFAULT_HEIGHT_BOUND,
            search_cap: DEFAULT_SEARCH_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NoFibration,
    Unique,
    Multiple,
    Inconclusive,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::NoFibration => "no_fibration",
            Status::Unique => "unique",
            Status::Multiple => "multiple",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// One replayable step of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub criterion: String,
    pub inputs: serde_json::Value,
    pub outcome: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub reason: String,
    pub certificate: Vec<Step>,
}

fn hyperbolic(l: &Lattice) -> bool {
    l.signature().is_hyperbolic()
}

fn require_hyperbolic(l: &Lattice) -> Result<()> {
    l.require_nondegenerate()?;
    if hyperbolic(l) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "expected signature (1, {}), got {}",
            l.rank().saturating_sub(1),
            l.signature()
        )))
    }
}

fn require_primitive_isotropic(l: &Lattice, f: &LatticeVector) -> Result<()> {
    if f.len() != l.rank() {
        return Err(Error::DimensionMismatch {
            expected: l.rank(),
            got: f.len(),
        });
    }
    if f.is_zero() {
        return Err(Error::ZeroVector);
    }
    if l.norm(f) != 0 {
        return Err(Error::NotIsotropic);
    }
    if !f.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shioda–Tate

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerData {
    pub rho: usize,
    pub root_rank: usize,
    pub roots: String,
    pub infinite_stabilizer: bool,
}

/// `ρ − 2 − rank((F^⊥/⟨F⟩)_root)` and its sign.
pub fn stabilizer_data(pic: &Lattice, f: &LatticeVector) -> Result<StabilizerData> {
    require_primitive_isotropic(pic, f)?;
    let q = pic.isotropic_quotient(f)?;
    let (_, roots) = root_sublattice(&q)?;
    let rho = pic.rank();
    Ok(StabilizerData {
        rho,
        root_rank: roots.total_rank,
        roots: roots.name(),
        infinite_stabilizer: rho as i64 - 2 - roots.total_rank as i64 > 0,
    })
}

/// Whether the fibration with class `F` has infinite stabilizer in Aut(X).
pub fn shioda_tate_infinite_stabilizer(pic: &Lattice, f: &LatticeVector) -> Result<bool> {
    Ok(stabilizer_data(pic, f)?.infinite_stabilizer)
}

// ---------------------------------------------------------------------------
// isotropic vectors

/// Outcome of a bounded search for isotropic vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "vector", rename_all = "snake_case")]
pub enum IsotropicSearch {
    Found(LatticeVector),
    NotFoundWithinBound,
    AlwaysByRank,
}

/// Isotropic vectors of a hyperbolic lattice ordered by height against a
/// fixed positive vector `h`: with `H = h·h` and `g = G h`, the form
/// `P = 2 g gᵀ − H G` is positive definite and `P(v) = 2 (v·h)²` for every
/// isotropic `v`, so heights up to `K` lie in a finite ellipsoid.
struct HeightSearch {
    pic: Lattice,
    h: LatticeVector,
    slice: Lattice,
}

impl HeightSearch {
    fn new(pic: &Lattice) -> Result<Self> {
        require_hyperbolic(pic)?;
        let h = pic.positive_vector().expect("hyperbolic lattices have positive vectors");
        let big_h = pic.norm(&h);
        let g = pic.pairings_with_basis(&h);
        let r = pic.rank();
        let mut p = vec![vec![0i64; r]; r];
        for i in 0..r {
            for j in 0..r {
                p[i][j] = 2 * g[i] * g[j] - big_h * pic.gram()[i][j];
            }
        }
        Ok(Self {
            pic: pic.clone(),
            h,
            slice: Lattice::new(p)?,
        })
    }

    /// First primitive isotropic vector (oriented by `v·h > 0`), by height
    /// then coordinates, accepted by `accept`. `None` if the height bound or
    /// the visit cap is reached first.
    fn find(
        &self,
        max_height: i64,
        cap: u64,
        accept: &mut dyn FnMut(&LatticeVector) -> bool,
    ) -> Result<Option<LatticeVector>> {
        let mut visited = 0u64;
        for k in 1..=max_height {
            let target = 2 * k * k;
            let mut shell: Vec<LatticeVector> = Vec::new();
            let complete = for_each_vector_while(&self.slice, target, &mut |x, n| {
                visited += 1;
                if n == target {
                    let v = LatticeVector::new(x.to_vec());
                    if self.pic.norm(&v) == 0 && self.pic.pair(&v, &self.h) > 0 && v.is_primitive() {
                        shell.push(v);
                    }
                }
                visited <= cap
            })?;
            shell.sort();
            if let Some(v) = shell.into_iter().find(|v| accept(v)) {
                return Ok(Some(v));
            }
            if !complete {
                break;
            }
        }
        Ok(None)
    }
}

/// Some primitive isotropic vector of a rank-2 lattice, exactly.
fn binary_isotropic(l: &Lattice) -> Option<LatticeVector> {
    let g = l.gram();
    let (a, b, c) = (g[0][0] as i128, g[0][1] as i128, g[1][1] as i128);
    if a == 0 {
        return Some(LatticeVector::new(vec![1, 0]));
    }
    if c == 0 {
        return Some(LatticeVector::new(vec![0, 1]));
    }
    // a x² + 2b xy + c y² = 0 with y = a: (x + b)² = b² − ac
    let d = b * b - a * c;
    if d < 0 {
        return None;
    }
    let s = d.sqrt();
    if s * s != d {
        return None;
    }
    let (x, y) = (s - b, a);
    let gcd = x.gcd(&y);
    Some(LatticeVector::new(vec![(x / gcd) as i64, (y / gcd) as i64]))
}

/// Bounded search for a nonzero isotropic vector.
pub fn exists_isotropic_vector(l: &Lattice, bound: i64) -> Result<IsotropicSearch> {
    let r = l.rank();
    if r == 0 {
        return Ok(IsotropicSearch::NotFoundWithinBound);
    }
    if l.is_degenerate() {
        let kernel = matrix::integer_kernel(&l.gram_big(), r);
        let v = matrix::to_i64(&kernel[..1]).ok_or(Error::Overflow("kernel vector"))?;
        return Ok(IsotropicSearch::Found(LatticeVector::new(v[0].clone())));
    }
    if l.is_definite() {
        return Ok(IsotropicSearch::NotFoundWithinBound);
    }
    if r == 2 {
        return Ok(match binary_isotropic(l) {
            Some(v) => IsotropicSearch::Found(v),
            None => IsotropicSearch::NotFoundWithinBound,
        });
    }
    if r >= MEYER_RANK {
        return Ok(IsotropicSearch::AlwaysByRank);
    }
    let sig = l.signature();
    let oriented = if sig.is_hyperbolic() {
        Some(l.clone())
    } else if sig.plus + 1 == r {
        Some(l.rescale(-1))
    } else {
        None
    };
    let found = match oriented {
        Some(p) => HeightSearch::new(&p)?.find(bound, DEFAULT_SEARCH_CAP, &mut |_| true)?,
        None => box_search(l, bound),
    };
    Ok(match found {
        Some(v) => IsotropicSearch::Found(v),
        None => IsotropicSearch::NotFoundWithinBound,
    })
}

/// Isotropic vector with coordinates in `[-bound, bound]`, first nonzero
/// coordinate positive.
fn box_search(l: &Lattice, bound: i64) -> Option<LatticeVector> {
    let r = l.rank();
    let mut x = vec![-bound; r];
    loop {
        let v = LatticeVector::new(x.clone());
        if !v.is_zero() && l.norm(&v) == 0 && v.sign_normalized() == v {
            return Some(v);
        }
        let mut i = 0;
        loop {
            if i == r {
                return None;
            }
            x[i] += 1;
            if x[i] <= bound {
                break;
            }
            x[i] = -bound;
            i += 1;
        }
    }
}

/// Some primitive isotropic vector (of any divisibility) of a hyperbolic
/// lattice, by height search.
pub fn find_isotropic(pic: &Lattice, opts: &Options) -> Result<Option<LatticeVector>> {
    find_isotropic_with(pic, opts, &mut |_| true)
}

/// First primitive isotropic vector by height that satisfies `accept`.
pub fn find_isotropic_with(
    pic: &Lattice,
    opts: &Options,
    accept: &mut dyn FnMut(&LatticeVector) -> bool,
) -> Result<Option<LatticeVector>> {
    if pic.rank() == 2 {
        require_hyperbolic(pic)?;
        return Ok(binary_isotropic(pic).filter(|v| accept(v)));
    }
    HeightSearch::new(pic)?.find(opts.height_bound, opts.search_cap, accept)
}

// ---------------------------------------------------------------------------
// U ⊕ W

/// `Pic = U ⊕ W` with `U = ⟨e, f⟩`, `e² = f² = 0`, `e·f = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UwSplit {
    pub e: LatticeVector,
    pub f: LatticeVector,
    pub w: Lattice,
    /// basis of `W` in the coordinates of `Pic`
    pub w_basis: Vec<LatticeVector>,
}

impl UwSplit {
    /// `(e, f, w_1, …)` as the columns of a unimodular change of basis.
    pub fn basis(&self) -> Vec<LatticeVector> {
        let mut b = vec![self.e.clone(), self.f.clone()];
        b.extend(self.w_basis.iter().cloned());
        b
    }
}

/// Completes a divisibility-1 isotropic `e` to a split `U ⊕ W`.
pub fn split_along(pic: &Lattice, e: &LatticeVector) -> Result<UwSplit> {
    require_primitive_isotropic(pic, e)?;
    let pairings = pic.pairings_with_basis(e);
    let x = bezout(&pairings).ok_or_else(|| Error::InvalidParams("vector has divisibility > 1".into()))?;
    let x = LatticeVector::new(x);
    debug_assert_eq!(pic.pair(e, &x), 1);
    let half = pic.norm(&x) / 2;
    let f = x.add(&e.scale(-half));
    let (w_raw, w_basis_raw) = pic.orthogonal_complement_of(&[e.clone(), f.clone()])?;
    // reduce W for readable Gram matrices
    let (w, red) = if w_raw.rank() > 0 {
        w_raw.lll_reduce()?
    } else {
        (w_raw, vec![])
    };
    let w_basis: Vec<LatticeVector> = red
        .iter()
        .map(|c| crate::lattice::combine(&w_basis_raw, &c.coords))
        .collect();
    let w = w.with_label(format!("W({})", pic.label().unwrap_or("Pic")));
    Ok(UwSplit {
        e: e.clone(),
        f,
        w,
        w_basis,
    })
}

/// Integer coefficients `x` with `Σ aᵢ xᵢ = 1`.
fn bezout(a: &[i64]) -> Option<Vec<i64>> {
    let mut g: i64 = 0;
    let mut x = vec![0i64; a.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        if g == 0 {
            g = ai;
            x[i] = 1;
            continue;
        }
        let e = g.extended_gcd(&ai);
        for xj in x.iter_mut().take(i) {
            *xj *= e.x;
        }
        x[i] = e.y;
        g = e.gcd;
    }
    match g {
        1 => Some(x),
        -1 => Some(x.into_iter().map(|v| -v).collect()),
        _ => None,
    }
}

/// Looks for `Pic ≅ U ⊕ W` by searching isotropic vectors of divisibility 1
/// up to the height bound. `None` means "not found within the bound".
pub fn u_w_split(pic: &Lattice, opts: &Options) -> Result<Option<UwSplit>> {
    require_hyperbolic(pic)?;
    let e = if pic.rank() == 2 {
        binary_isotropic(pic).filter(|e| pic.divisibility(e).ok() == Some(1))
    } else {
        HeightSearch::new(pic)?.find(opts.height_bound, opts.search_cap, &mut |v| {
            pic.divisibility(v).ok() == Some(1)
        })?
    };
    e.map(|e| split_along(pic, &e)).transpose()
}

// ---------------------------------------------------------------------------
// genus + overlattice criterion

/// Constructive witness that `U ⊕ W` has a fibration without section: the
/// isotropic `v = n·u + w` with `u ∈ U` of norm `2k` and `w² = −2kn²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlatticeWitness {
    pub n: i64,
    pub k: i64,
    pub w: LatticeVector,
    /// in the basis `(e, f, W)` of `U ⊕ W`
    pub v: LatticeVector,
    pub divisibility: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop43Outcome {
    pub rank_shortcut: bool,
    pub overlattice: Option<OverlatticeWitness>,
    pub genus: Option<GenusStatus>,
    pub status: Status,
    pub note: String,
}

/// Builds the isotropic witness from the first even overlattice of `W`.
pub fn overlattice_witness(w: &Lattice, group_bound: u64) -> Result<Option<OverlatticeWitness>> {
    let overs = even_overlattices(w, group_bound)?;
    let Some(cert) = overs.first() else {
        return Ok(None);
    };
    let q = discriminant_form(w)?;
    let g = &cert.glue[0];
    let n = q.element_order(g) as i64;
    let num = q.lift(g).expect("lifts are recorded");
    let den = q.exponent() as i64;
    // n·x is integral; its primitive part w has w/n in the same overlattice
    let full: Vec<i64> = num.iter().map(|&c| c * n / den).collect();
    debug_assert!(num.iter().all(|&c| (c * n) % den == 0));
    let wv = LatticeVector::new(full);
    let content = wv.content();
    let wv = LatticeVector::new(wv.coords.iter().map(|c| c / content).collect());
    let norm = w.norm(&wv);
    if norm >= 0 || norm % (2 * n * n) != 0 {
        return Err(Error::InvalidParams("overlattice glue does not give an even witness".into()));
    }
    let k = -norm / (2 * n * n);
    let uw = Lattice::hyperbolic_plane().direct_sum(w);
    let mut v = vec![n, n * k];
    v.extend(wv.coords.iter().copied());
    let v = LatticeVector::new(v);
    debug_assert_eq!(uw.norm(&v), 0);
    let divisibility = uw.divisibility(&v)?;
    Ok(Some(OverlatticeWitness {
        n,
        k,
        w: wv,
        v,
        divisibility,
    }))
}

/// The genus/overlattice criterion for `Pic ≅ U ⊕ W`. A failure of either
/// condition is a proof of a second fibration; when both hold, `Unique`
/// additionally needs zero entropy and an infinite automorphism group.
pub fn prop43_decide(w: &Lattice, hyp: &Hypotheses, opts: &Options) -> Result<Prop43Outcome> {
    if !w.is_negative_definite() {
        return Err(Error::IndefiniteLattice);
    }
    if w.rank() >= crate::genus::SINGLE_CLASS_RANK_BOUND {
        return Ok(Prop43Outcome {
            rank_shortcut: true,
            overlattice: None,
            genus: None,
            status: Status::Multiple,
            note: "W of rank >= 11 is never alone in its genus".into(),
        });
    }
    let overlattice = overlattice_witness(w, opts.group_bound)?;
    if overlattice.is_some() {
        return Ok(Prop43Outcome {
            rank_shortcut: false,
            overlattice,
            genus: None,
            status: Status::Multiple,
            note: "W has a nontrivial even overlattice".into(),
        });
    }
    let genus = unique_in_genus(w, opts.genus_effort)?;
    let (status, note) = match &genus.status {
        GenusStatus::NotUnique { .. } => (Status::Multiple, "W is not unique in its genus".to_string()),
        GenusStatus::Inconclusive { reason } => (Status::Inconclusive, format!("genus: {reason}")),
        GenusStatus::UniqueInGenus => {
            if hyp.zero_entropy == Tri::Yes && hyp.infinite_aut == Tri::Yes {
                (Status::Unique, "both conditions hold; zero entropy and infinite Aut(X)".into())
            } else {
                (
                    Status::Inconclusive,
                    "both conditions hold, but uniqueness needs zero entropy and infinite Aut(X)".into(),
                )
            }
        }
    };
    Ok(Prop43Outcome {
        rank_shortcut: false,
        overlattice: None,
        genus: Some(genus.status),
        status,
        note,
    })
}

// ---------------------------------------------------------------------------
// root overlattices and the obstruction

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootOverlattice {
    /// ADE type of the root system, e.g. `A1+A2`
    pub roots: String,
    pub lattice: Lattice,
    pub disc: u64,
    /// index over the root lattice
    pub index: u64,
}

fn ade_partitions(r: usize) -> Vec<Vec<AdeType>> {
    let mut kinds: Vec<AdeType> = Vec::new();
    for i in 1..=r {
        kinds.push(AdeType::new(Family::A, i).unwrap());
        if i >= 4 {
            kinds.push(AdeType::new(Family::D, i).unwrap());
        }
        if (6..=8).contains(&i) {
            kinds.push(AdeType::new(Family::E, i).unwrap());
        }
    }
    kinds.sort();
    let mut out = Vec::new();
    fn go(kinds: &[AdeType], start: usize, left: usize, cur: &mut Vec<AdeType>, out: &mut Vec<Vec<AdeType>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..kinds.len() {
            if kinds[i].index <= left {
                cur.push(kinds[i]);
                go(kinds, i, left - kinds[i].index, cur, out);
                cur.pop();
            }
        }
    }
    go(&kinds, 0, r, &mut Vec::new(), &mut out);
    out
}

/// Root lattices of rank `r` and their even overlattices whose root system
/// is unchanged, deduplicated up to isometry. With `disc_filter`, only
/// lattices whose discriminant passes the filter are returned (and root
/// lattices that cannot produce one are skipped).
pub fn enumerate_root_overlattices(
    r: usize,
    disc_filter: Option<&dyn Fn(u64) -> bool>,
    group_bound: u64,
) -> Result<Vec<RootOverlattice>> {
    if r == 0 {
        return Err(Error::InvalidParams("rank must be at least 1".into()));
    }
    let mut out: Vec<RootOverlattice> = Vec::new();
    for parts in ade_partitions(r) {
        let disc: u64 = parts.iter().map(|t| t.disc()).product();
        let name = parts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("+");
        let passes = |d: u64| disc_filter.is_none_or(|f| f(d));
        let possible = (1..).take_while(|k: &u64| k * k <= disc).any(|k| disc % (k * k) == 0 && passes(disc / (k * k)));
        if !possible {
            continue;
        }
        let lattice = Lattice::direct_sum_all(parts.iter().map(|t| t.lattice()).collect::<Vec<_>>().iter())
            .with_label(name.clone());
        let root_count: usize = parts.iter().map(|t| t.root_count()).sum();
        let mut found: Vec<RootOverlattice> = Vec::new();
        if passes(disc) {
            found.push(RootOverlattice {
                roots: name.clone(),
                lattice: lattice.clone(),
                disc,
                index: 1,
            });
        }
        if disc > 1 {
            for cert in even_overlattices(&lattice, group_bound)? {
                let d = disc / (cert.index * cert.index);
                if !passes(d) {
                    continue;
                }
                let (_, dec) = root_sublattice(&cert.result)?;
                if dec.root_count() != root_count {
                    continue;
                }
                let mut isometric = false;
                for other in found.iter().filter(|o| o.disc == d) {
                    if crate::genus::is_isometric(&other.lattice, &cert.result)?.is_some() {
                        isometric = true;
                        break;
                    }
                }
                if !isometric {
                    let (reduced, _) = cert.result.lll_reduce()?;
                    found.push(RootOverlattice {
                        roots: name.clone(),
                        lattice: reduced.with_label(format!("{name}[{}]", cert.index)),
                        disc: d,
                        index: cert.index,
                    });
                }
            }
        }
        out.extend(found);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop44Candidate {
    pub roots: String,
    pub index: u64,
    pub disc: u64,
    pub n: u64,
    pub isotropic_element: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop44Outcome {
    pub disc: u64,
    pub candidates: Vec<Prop44Candidate>,
    /// true when some candidate passes both tests, i.e. a second fibration
    /// is not excluded
    pub second_fibration_possible: bool,
}

/// Searches for root overlattices `N` of rank `ρ − 2` with
/// `disc(Pic)/disc(N) = n²` and an isotropic element of order `n` in the
/// discriminant group of `Pic`. If none exists, a surface of zero entropy
/// with infinite automorphism group has a unique fibration.
pub fn prop44_obstruction(pic: &Lattice, group_bound: u64) -> Result<Prop44Outcome> {
    require_hyperbolic(pic)?;
    if pic.rank() < 3 {
        return Err(Error::InvalidParams("needs Picard rank at least 3".into()));
    }
    let disc = pic.disc().to_u64().ok_or(Error::Overflow("discriminant"))?;
    let q = discriminant_form(pic)?;
    if q.order() > group_bound {
        return Err(Error::GroupTooLarge {
            order: q.order(),
            bound: group_bound,
        });
    }
    let square_ratio = |d: u64| d > 0 && disc % d == 0 && is_square(disc / d);
    let ns = enumerate_root_overlattices(pic.rank() - 2, Some(&square_ratio), group_bound)?;
    let mut candidates = Vec::new();
    for n in ns {
        let ratio = (disc / n.disc).sqrt();
        candidates.push(Prop44Candidate {
            roots: n.roots,
            index: n.index,
            disc: n.disc,
            n: ratio,
            isotropic_element: q.isotropic_element_of_order(ratio),
        });
    }
    let possible = candidates.iter().any(|c| c.isotropic_element.is_some());
    Ok(Prop44Outcome {
        disc,
        candidates,
        second_fibration_possible: possible,
    })
}

fn is_square(x: u64) -> bool {
    let s = x.sqrt();
    s * s == x
}

// ---------------------------------------------------------------------------
// divisibility reduction

/// The overlattice obtained by dividing an isotropic class by its
/// divisibility. A second fibration on the result forces one on `Pic`.
pub fn reduce_by_divisibility(pic: &Lattice, f: &LatticeVector) -> Result<Lattice> {
    require_primitive_isotropic(pic, f)?;
    let m = pic.divisibility(f)?;
    if m < 2 {
        return Err(Error::InvalidParams("class already has divisibility 1".into()));
    }
    divide_vector(pic, f, m)
}

// ---------------------------------------------------------------------------
// rank 2

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank2Outcome {
    pub n: i64,
    pub k: i64,
    pub rays: Vec<LatticeVector>,
    pub roots: Vec<LatticeVector>,
    pub orbits: usize,
    pub status: Status,
}

/// Rays, roots and reflection orbits for `[[0, n], [n, −2k]]`: one orbit of
/// isotropic rays means one fibration.
pub fn rank2_classify(n: i64, k: i64) -> Result<Rank2Outcome> {
    if n <= 0 || k <= 0 {
        return Err(Error::InvalidParams("n and k must be positive".into()));
    }
    let l = crate::named::binary(n, k);
    let g = k.gcd(&n);
    let rays = vec![LatticeVector::new(vec![1, 0]), LatticeVector::new(vec![k / g, n / g])];
    // (x, y)² = 2y(nx − ky) = −2 forces y = ±1, so up to sign the only
    // candidate is ((k − 1)/n, 1)
    let roots: Vec<LatticeVector> = if (k - 1) % n == 0 {
        vec![LatticeVector::new(vec![(k - 1) / n, 1])]
    } else {
        vec![]
    };
    debug_assert!(roots.iter().all(|r| l.norm(r) == -2));
    let h = rays[0].add(&rays[1]);
    let orient = |v: LatticeVector| {
        let v = LatticeVector::new(v.coords.iter().map(|c| c / v.content()).collect());
        if l.pair(&v, &h) < 0 {
            v.neg()
        } else {
            v
        }
    };
    let mut parent = vec![0usize, 1];
    for r in &roots {
        for (i, ray) in rays.iter().enumerate() {
            let img = orient(ray.add(&r.scale(l.pair(ray, r))));
            if let Some(j) = rays.iter().position(|x| *x == img) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let orbits = (0..2).filter(|&i| find(&mut parent, i) == i).count();
    Ok(Rank2Outcome {
        n,
        k,
        rays,
        roots,
        orbits,
        status: if orbits == 1 { Status::Unique } else { Status::Multiple },
    })
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// `(n, k)` with `Pic ≅ [[0, n], [n, −2k]]`, `1 ≤ k ≤ n`, or `None` when the
/// binary lattice has no isotropic vector.
pub fn rank2_normal_form(pic: &Lattice) -> Result<Option<(i64, i64)>> {
    if pic.rank() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pic.rank(),
        });
    }
    require_hyperbolic(pic)?;
    let Some(e) = binary_isotropic(pic) else {
        return Ok(None);
    };
    let basis = matrix::complete_to_basis(&e.coords.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
    let f = LatticeVector::new(vec![
        basis[0][1].to_i64().ok_or(Error::Overflow("basis completion"))?,
        basis[1][1].to_i64().ok_or(Error::Overflow("basis completion"))?,
    ]);
    let a = pic.pair(&e, &f).abs();
    let c = pic.norm(&f);
    let k = (-c / 2).rem_euclid(a);
    Ok(Some((a, if k == 0 { a } else { k })))
}

// ---------------------------------------------------------------------------
// twists

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShaClass {
    pub order: u64,
    pub jacobian_disc: i64,
    pub fibration_base: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwistOp {
    MultiplyBy(u64),
    PDivide(u64),
}

impl ShaClass {
    pub fn new(order: u64, jacobian_disc: i64, fibration_base: impl Into<String>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParams("class order must be positive".into()));
        }
        Ok(Self {
            order,
            jacobian_disc,
            fibration_base: fibration_base.into(),
        })
    }

    /// Picard discriminant of the torsor: `d² · disc(J)`.
    pub fn picard_disc(&self) -> BigInt {
        BigInt::from(self.order).pow(2) * BigInt::from(self.jacobian_disc)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

pub fn twist_arithmetic(c: &ShaClass, op: TwistOp) -> Result<ShaClass> {
    let order = match op {
        TwistOp::MultiplyBy(0) => return Err(Error::InvalidParams("multiplier must be positive".into())),
        TwistOp::MultiplyBy(n) => c.order / c.order.gcd(&n),
        TwistOp::PDivide(p) if !is_prime(p) => return Err(Error::InvalidParams(format!("{p} is not prime"))),
        TwistOp::PDivide(p) => c.order.checked_mul(p).ok_or(Error::Overflow("class order"))?,
    };
    ShaClass::new(order, c.jacobian_disc, c.fibration_base.clone())
}

// ---------------------------------------------------------------------------
// over-exceptional part

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverExceptional {
    pub complement: Lattice,
    pub rank: usize,
    pub root_rank: usize,
    pub roots: String,
    pub within_bound: bool,
}

/// The saturated sublattice orthogonal to all supplied fibration classes and
/// the root part of its nondegenerate quotient.
pub fn over_exceptional_from_fibrations(pic: &Lattice, fibs: &[LatticeVector]) -> Result<OverExceptional> {
    for f in fibs {
        require_primitive_isotropic(pic, f)?;
    }
    let (complement, rank) = if fibs.is_empty() {
        (pic.clone(), pic.rank())
    } else {
        let (c, _) = pic.orthogonal_complement_of(fibs)?;
        let r = c.rank();
        (c, r)
    };
    let quotient = complement.radical_quotient();
    let (root_rank, roots) = if quotient.rank() > 0 && quotient.is_negative_definite() {
        let (_, dec) = root_sublattice(&quotient)?;
        (dec.total_rank, dec.name())
    } else {
        (0, "0".to_string())
    };
    let span = matrix::rank(&fibs.iter().map(|f| f.coords.iter().map(|&c| BigInt::from(c)).collect()).collect::<Vec<Vec<BigInt>>>());
    if span >= 2 {
        // two independent isotropic classes span a hyperbolic plane over Q
        assert!(rank + 2 <= pic.rank(), "orthogonal part too large");
    }
    Ok(OverExceptional {
        complement,
        rank,
        root_rank,
        roots,
        within_bound: span < 2 || rank <= 17,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::{is_isometric, same_genus};
    use crate::named::{l1, l2, u_plus};
    use num_traits::Signed;

    fn opts() -> Options {
        Options::default()
    }

    #[test]
    fn stabilizer_examples() {
        let e = LatticeVector::new(vec![1, 0, 0]);
        let u4 = u_plus(&Lattice::diagonal(&[-4]).unwrap());
        assert!(shioda_tate_infinite_stabilizer(&u4, &e).unwrap());
        let u2 = u_plus(&Lattice::a(1));
        assert!(!shioda_tate_infinite_stabilizer(&u2, &e).unwrap());
        let ue8 = u_plus(&Lattice::e(8));
        let mut f = vec![0i64; 10];
        f[0] = 1;
        let d = stabilizer_data(&ue8, &LatticeVector::new(f)).unwrap();
        assert_eq!((d.rho, d.root_rank, d.infinite_stabilizer), (10, 8, false));
        assert_eq!(
            shioda_tate_infinite_stabilizer(&u4, &LatticeVector::new(vec![1, 1, 0])).unwrap_err(),
            Error::NotIsotropic
        );
        assert_eq!(
            shioda_tate_infinite_stabilizer(&u4, &LatticeVector::new(vec![2, 0, 0])).unwrap_err(),
            Error::NotPrimitive
        );
    }

    #[test]
    fn split_recovers_w_from_scrambled_basis() {
        let pic = u_plus(&Lattice::a(2));
        // a unimodular scramble
        let t = [vec![1, 2, 0, 1], vec![0, 1, 1, 0], vec![1, 2, 1, 3], vec![0, 0, 0, 1]];
        let basis: Vec<LatticeVector> = (0..4)
            .map(|j| LatticeVector::new((0..4).map(|i| t[i][j]).collect()))
            .collect();
        let scrambled = pic.change_basis(&basis).unwrap();
        assert_ne!(scrambled.gram(), pic.gram());
        let split = u_w_split(&scrambled, &opts()).unwrap().unwrap();
        assert_eq!(scrambled.norm(&split.e), 0);
        assert_eq!(scrambled.norm(&split.f), 0);
        assert_eq!(scrambled.pair(&split.e, &split.f), 1);
        assert!(same_genus(&split.w, &Lattice::a(2)).unwrap());
        assert!(is_isometric(&split.w, &Lattice::a(2)).unwrap().is_some());
        let b = matrix::to_big(&split.basis().iter().map(|v| v.coords.clone()).collect::<Vec<_>>());
        assert!(matrix::determinant(&b).abs() == BigInt::from(1));
    }

    #[test]
    fn binary_without_section() {
        for n in 2..6 {
            let pic = crate::named::binary(n, 1);
            assert!(u_w_split(&pic, &opts()).unwrap().is_none());
        }
        assert!(u_w_split(&crate::named::binary(1, 1), &opts()).unwrap().is_some());
    }

    #[test]
    fn l1_and_l2_have_no_split() {
        // length of the discriminant group exceeds rank(W)
        assert!(u_w_split(&l1(), &opts()).unwrap().is_none());
        assert!(u_w_split(&l2(), &opts()).unwrap().is_none());
    }

    #[test]
    fn isotropic_existence() {
        let two = Lattice::diagonal(&[2]).unwrap();
        assert_eq!(exists_isotropic_vector(&two, 100).unwrap(), IsotropicSearch::NotFoundWithinBound);
        let u = u_plus(&Lattice::a(3));
        assert!(matches!(exists_isotropic_vector(&u, 3).unwrap(), IsotropicSearch::AlwaysByRank));
        let small = u_plus(&Lattice::a(1));
        let IsotropicSearch::Found(v) = exists_isotropic_vector(&small, 3).unwrap() else {
            panic!()
        };
        assert_eq!(small.norm(&v), 0);
        // −det = 5 is not a square
        let b = Lattice::new(vec![vec![2, 1], vec![1, -2]]).unwrap();
        assert_eq!(exists_isotropic_vector(&b, 50).unwrap(), IsotropicSearch::NotFoundWithinBound);
        // ⟨2⟩ ⊕ ⟨−2⟩ ⊕ ⟨−2⟩ has (1,1,0)
        let d = Lattice::diagonal(&[2, -2, -2]).unwrap();
        assert!(matches!(exists_isotropic_vector(&d, 3).unwrap(), IsotropicSearch::Found(_)));
    }

    #[test]
    fn prop43_examples() {
        let hyp = Hypotheses {
            infinite_aut: Tri::Yes,
            zero_entropy: Tri::Yes,
        };
        let a2 = prop43_decide(&Lattice::a(2), &hyp, &opts()).unwrap();
        assert_eq!(a2.status, Status::Unique);
        let a2_unknown = prop43_decide(&Lattice::a(2), &Hypotheses::default(), &opts()).unwrap();
        assert_eq!(a2_unknown.status, Status::Inconclusive);

        let a1_4 = Lattice::direct_sum_all(&vec![Lattice::a(1); 4]);
        let out = prop43_decide(&a1_4, &Hypotheses::default(), &opts()).unwrap();
        assert_eq!(out.status, Status::Multiple);
        let wit = out.overlattice.unwrap();
        assert_eq!(wit.n, 2);
        assert!(wit.divisibility >= 2);
        let uw = u_plus(&a1_4);
        assert_eq!(uw.norm(&wit.v), 0);
        assert!(wit.v.is_primitive());

        let rank11 = Lattice::e(8).direct_sum(&Lattice::a(3));
        let out = prop43_decide(&rank11, &hyp, &opts()).unwrap();
        assert!(out.rank_shortcut);
        assert_eq!(out.status, Status::Multiple);
    }

    #[test]
    fn root_overlattices_small_ranks() {
        let names = |r| {
            enumerate_root_overlattices(r, None, DEFAULT_GROUP_BOUND)
                .unwrap()
                .into_iter()
                .map(|n| (n.roots, n.disc))
                .collect::<Vec<_>>()
        };
        assert_eq!(names(1), vec![("A1".to_string(), 2)]);
        let mut two = names(2);
        two.sort();
        assert_eq!(two, vec![("A1+A1".to_string(), 4), ("A2".to_string(), 3)]);
        let mut three = names(3);
        three.sort();
        assert_eq!(
            three,
            vec![("A1+A1+A1".to_string(), 8), ("A1+A2".to_string(), 6), ("A3".to_string(), 4)]
        );
        // rank 8: E8 appears once, as itself and not again as a D8 glue
        let eight = enumerate_root_overlattices(8, Some(&|d| d == 1), DEFAULT_GROUP_BOUND).unwrap();
        assert_eq!(eight.iter().map(|n| n.roots.as_str()).collect::<Vec<_>>(), vec!["E8"]);
    }

    #[test]
    fn prop44_on_named_lattices() {
        let o1 = prop44_obstruction(&l1(), DEFAULT_GROUP_BOUND).unwrap();
        assert_eq!(o1.disc, 48);
        assert!(!o1.second_fibration_possible);
        assert_eq!(o1.candidates.len(), 1);
        assert_eq!((o1.candidates[0].roots.as_str(), o1.candidates[0].n), ("A2", 4));

        let o2 = prop44_obstruction(&l2(), DEFAULT_GROUP_BOUND).unwrap();
        assert_eq!(o2.disc, 96);
        assert!(!o2.second_fibration_possible);
        assert_eq!(o2.candidates.len(), 1);
        assert_eq!((o2.candidates[0].roots.as_str(), o2.candidates[0].n), ("A1+A2", 4));

        let o3 = prop44_obstruction(&u_plus(&Lattice::direct_sum_all(&vec![Lattice::a(1); 4])), DEFAULT_GROUP_BOUND)
            .unwrap();
        assert!(o3.second_fibration_possible);
        assert!(o3.candidates.iter().any(|c| c.n == 1 && c.roots == "A1+A1+A1+A1"));
    }

    #[test]
    fn divisibility_reduction() {
        let red = reduce_by_divisibility(&l2(), &LatticeVector::basis(5, 0)).unwrap();
        assert_eq!(red.rank(), 5);
        assert_eq!(red.disc(), BigInt::from(24));
        assert!(u_w_split(&red, &opts()).unwrap().is_some());
        let u = u_plus(&Lattice::a(1));
        assert!(reduce_by_divisibility(&u, &LatticeVector::basis(3, 0)).is_err());
        // [[0,n],[n,−2]] with F = (1,0) of divisibility n becomes unimodular
        for n in 2..6 {
            let red = reduce_by_divisibility(&crate::named::binary(n, 1), &LatticeVector::basis(2, 0)).unwrap();
            assert_eq!(red.disc(), BigInt::from(1));
        }
    }

    #[test]
    fn rank2_family() {
        for n in 1..=20 {
            assert_eq!(rank2_classify(n, 1).unwrap().status, Status::Unique, "n={n}");
            for m in 1..=10i64 {
                if (m * m - 1) % n != 0 {
                    assert_eq!(rank2_classify(n, m * m).unwrap().status, Status::Multiple, "n={n} m={m}");
                }
            }
        }
        let o = rank2_classify(1, 1).unwrap();
        assert_eq!((o.orbits, o.status), (1, Status::Unique));
        assert!(rank2_classify(0, 1).is_err());
        assert!(rank2_classify(3, 0).is_err());
    }

    #[test]
    fn rank2_normal_forms() {
        assert_eq!(rank2_normal_form(&crate::named::binary(5, 4)).unwrap(), Some((5, 4)));
        assert_eq!(rank2_normal_form(&crate::named::binary(5, 9)).unwrap(), Some((5, 4)));
        assert_eq!(rank2_normal_form(&Lattice::hyperbolic_plane()).unwrap(), Some((1, 1)));
        let b = Lattice::new(vec![vec![2, 1], vec![1, -2]]).unwrap();
        assert_eq!(rank2_normal_form(&b).unwrap(), None);
        // basis (1,1), (0,1) of ⟨2⟩ ⊕ ⟨−2⟩ gives [[0,−2],[−2,−2]]
        let d = Lattice::diagonal(&[2, -2]).unwrap();
        assert_eq!(rank2_normal_form(&d).unwrap(), Some((2, 1)));
    }

    #[test]
    fn twists() {
        let c = ShaClass::new(6, -3, "P1").unwrap();
        assert_eq!(twist_arithmetic(&c, TwistOp::MultiplyBy(6)).unwrap().order, 1);
        let p = twist_arithmetic(&c, TwistOp::PDivide(5)).unwrap();
        assert_eq!(p.order, 30);
        assert_eq!(p.picard_disc(), BigInt::from(25 * 36 * -3));
        assert_eq!(twist_arithmetic(&p, TwistOp::MultiplyBy(5)).unwrap().order, 6);
        assert!(twist_arithmetic(&c, TwistOp::PDivide(4)).is_err());
        assert!(twist_arithmetic(&c, TwistOp::MultiplyBy(0)).is_err());
        assert!(ShaClass::new(0, 1, "P1").is_err());
    }

    #[test]
    fn over_exceptional() {
        let u = Lattice::hyperbolic_plane();
        let both = [LatticeVector::basis(2, 0), LatticeVector::basis(2, 1)];
        let o = over_exceptional_from_fibrations(&u, &both).unwrap();
        assert_eq!(o.rank, 0);
        let u4 = u_plus(&Lattice::diagonal(&[-4]).unwrap());
        let o = over_exceptional_from_fibrations(&u4, &[LatticeVector::basis(3, 0)]).unwrap();
        assert_eq!(o.rank, 2);
        assert_eq!(o.complement.radical_quotient().gram(), &[vec![-4]]);
        assert_eq!(o.root_rank, 0);
        let ue8 = u_plus(&Lattice::e(8));
        let o = over_exceptional_from_fibrations(&ue8, &[LatticeVector::basis(10, 0), LatticeVector::basis(10, 1)])
            .unwrap();
        assert_eq!((o.rank, o.root_rank), (8, 8));
        assert!(o.within_bound);
        assert_eq!(
            over_exceptional_from_fibrations(&u4, &[LatticeVector::new(vec![1, 1, 0])]).unwrap_err(),
            Error::NotIsotropic
        );
    }
}
