//! Even integral lattices given by symmetric Gram matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, IntMatrix};

/// Integer coordinate vector in the basis of some lattice.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector {
    pub coords: Vec<i64>,
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    /// The `i`-th standard basis vector of `Z^rank`.
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut coords = vec![0; rank];
        coords[i] = 1;
        Self { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&x| x == 0)
    }

    pub fn content(&self) -> i64 {
        self.coords.iter().fold(0i64, |g, &x| g.gcd(&x))
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coords.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, s: i64) -> Self {
        Self::new(self.coords.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Canonical sign representative: the lexicographically larger of `±v`.
    pub fn sign_normalized(&self) -> Self {
        let n = self.neg();
        if n.coords > self.coords {
            n
        } else {
            self.clone()
        }
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

/// Sylvester inertia `(n₊, n₀, n₋)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub zero: usize,
    pub minus: usize,
}

impl Signature {
    pub fn is_hyperbolic(&self) -> bool {
        self.plus == 1 && self.zero == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.plus, self.zero, self.minus)
    }
}

/// A finitely generated free Z-module with an even symmetric integer pairing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLattice")]
pub struct Lattice {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    gram: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawLattice {
    #[serde(default)]
    label: Option<String>,
    gram: Vec<Vec<i64>>,
}

impl TryFrom<RawLattice> for Lattice {
    type Error = Error;

    fn try_from(raw: RawLattice) -> Result<Self> {
        let mut l = Lattice::new(raw.gram)?;
        l.label = raw.label;
        Ok(l)
    }
}

impl Lattice {
    /// Validates squareness, symmetry and evenness. Degenerate pairings are
    /// accepted here; operations that need nondegeneracy check it themselves.
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let r = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != r {
                return Err(Error::InvalidGram(format!(
                    "row {i} has {} entries, expected {r}",
                    row.len()
                )));
            }
        }
        for i in 0..r {
            if gram[i][i] % 2 != 0 {
                return Err(Error::InvalidGram(format!(
                    "diagonal entry {i} is odd ({})",
                    gram[i][i]
                )));
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidGram(format!(
                        "not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { label: None, gram })
    }

    pub fn from_big(gram: &[Vec<BigInt>]) -> Result<Self> {
        let g = matrix::to_i64(gram).ok_or(Error::Overflow("converting a Gram matrix"))?;
        Self::new(g)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn gram_big(&self) -> IntMatrix {
        matrix::to_big(&self.gram)
    }

    // --- standard lattices -------------------------------------------------

    /// The hyperbolic plane with Gram `[[0,1],[1,0]]`.
    pub fn hyperbolic_plane() -> Self {
        Self::new(vec![vec![0, 1], vec![1, 0]]).unwrap().with_label("U")
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let r = entries.len();
        let mut g = vec![vec![0; r]; r];
        for (i, &e) in entries.iter().enumerate() {
            g[i][i] = e;
        }
        Self::new(g)
    }

    /// Negative definite `A_n` (n ≥ 1).
    pub fn a(n: usize) -> Self {
        let mut g = vec![vec![0; n]; n];
        for i in 0..n {
            g[i][i] = -2;
            if i + 1 < n {
                g[i][i + 1] = 1;
                g[i + 1][i] = 1;
            }
        }
        Self::new(g).unwrap().with_label(format!("A{n}"))
    }

    /// Negative definite `D_n` (n ≥ 4): a path of length n−1 with a fork at
    /// vertex n−3.
    pub fn d(n: usize) -> Self {
        assert!(n >= 4, "D_n needs n >= 4");
        let mut g = Self::a(n - 1).gram;
        for row in g.iter_mut() {
            row.push(0);
        }
        g.push(vec![0; n]);
        g[n - 1][n - 1] = -2;
        g[n - 1][n - 3] = 1;
        g[n - 3][n - 1] = 1;
        Self::new(g).unwrap().with_label(format!("D{n}"))
    }

    /// Negative definite `E_n` for n ∈ {6,7,8}: path of length n−1 with a
    /// pendant vertex attached at the third node.
    pub fn e(n: usize) -> Self {
        assert!((6..=8).contains(&n), "E_n needs n in 6..=8");
        let mut g = Self::a(n - 1).gram;
        for row in g.iter_mut() {
            row.push(0);
        }
        g.push(vec![0; n]);
        g[n - 1][n - 1] = -2;
        g[n - 1][2] = 1;
        g[2][n - 1] = 1;
        Self::new(g).unwrap().with_label(format!("E{n}"))
    }

    // --- arithmetic -------------------------------------------------------

    pub fn pair(&self, a: &LatticeVector, b: &LatticeVector) -> i64 {
        let mut acc: i128 = 0;
        for (i, &ai) in a.coords.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let row = &self.gram[i];
            let mut s: i128 = 0;
            for (j, &bj) in b.coords.iter().enumerate() {
                s += row[j] as i128 * bj as i128;
            }
            acc += ai as i128 * s;
        }
        i64::try_from(acc).expect("pairing overflows i64")
    }

    pub fn norm(&self, v: &LatticeVector) -> i64 {
        self.pair(v, v)
    }

    /// `v·e_i` for every basis vector.
    pub fn pairings_with_basis(&self, v: &LatticeVector) -> Vec<i64> {
        (0..self.rank())
            .map(|i| {
                let s: i128 = (0..self.rank())
                    .map(|j| self.gram[i][j] as i128 * v.coords[j] as i128)
                    .sum();
                i64::try_from(s).expect("pairing overflows i64")
            })
            .collect()
    }

    fn check_dim(&self, v: &LatticeVector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn determinant(&self) -> BigInt {
        matrix::determinant(&self.gram_big())
    }

    /// `|det|`, the discriminant used in every ratio check.
    pub fn disc(&self) -> BigInt {
        self.determinant().abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.determinant().is_zero()
    }

    pub(crate) fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateLattice)
        } else {
            Ok(())
        }
    }

    /// Inertia: by the sign changes of the leading minors when none of them
    /// vanishes, otherwise by exact symmetric pivoting over the rationals.
    pub fn signature(&self) -> Signature {
        let signs = matrix::leading_minor_signs(&self.gram);
        if signs.iter().all(|&s| s != 0) {
            let minus = std::iter::once(&1i8)
                .chain(signs.iter())
                .zip(signs.iter())
                .filter(|(a, b)| a != b)
                .count();
            return Signature {
                plus: self.rank() - minus,
                zero: 0,
                minus,
            };
        }
        let mut a: Vec<Vec<BigRational>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        let mut sig = Signature {
            plus: 0,
            zero: 0,
            minus: 0,
        };
        let mut n = a.len();
        while n > 0 {
            let p = (0..n).find(|&i| !a[i][i].is_zero());
            let p = match p {
                Some(p) => p,
                None => {
                    let off = (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .find(|&(i, j)| i != j && !a[i][j].is_zero());
                    let Some((i, j)) = off else {
                        sig.zero += n;
                        break;
                    };
                    // e_i ← e_i + e_j makes the diagonal entry 2·a_ij ≠ 0
                    for k in 0..n {
                        let v = a[j][k].clone();
                        a[i][k] += v;
                    }
                    for k in 0..n {
                        let v = a[k][j].clone();
                        a[k][i] += v;
                    }
                    i
                }
            };
            if a[p][p].is_positive() {
                sig.plus += 1;
            } else {
                sig.minus += 1;
            }
            let piv = a[p][p].clone();
            let row = a[p].clone();
            let mut next = Vec::with_capacity(n - 1);
            for i in (0..n).filter(|&i| i != p) {
                let f = &row[i] / &piv;
                let r: Vec<BigRational> = (0..n)
                    .filter(|&j| j != p)
                    .map(|j| &a[i][j] - &f * &row[j])
                    .collect();
                next.push(r);
            }
            a = next;
            n -= 1;
        }
        sig
    }

    /// `Some(1)` / `Some(-1)` for positive / negative definite lattices,
    /// by Sylvester's criterion on the leading minors.
    pub fn definite_sign(&self) -> Option<i64> {
        let signs = matrix::leading_minor_signs(&self.gram);
        if signs.iter().all(|&s| s > 0) {
            Some(1)
        } else if signs.iter().enumerate().all(|(k, &s)| s == if k % 2 == 0 { -1 } else { 1 }) {
            Some(-1)
        } else {
            None
        }
    }

    pub fn is_negative_definite(&self) -> bool {
        self.rank() == 0 || self.definite_sign() == Some(-1)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.definite_sign() == Some(1)
    }

    pub fn is_definite(&self) -> bool {
        self.definite_sign().is_some()
    }

    /// Some primitive vector of positive norm, if there is one.
    pub fn positive_vector(&self) -> Option<LatticeVector> {
        let n = self.rank();
        let q = |x: i64| BigRational::from_integer(x.into());
        // current basis vectors (rational, old coordinates) and their Gram
        let mut basis: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| q(i64::from(i == j))).collect())
            .collect();
        let mut a: Vec<Vec<BigRational>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(|&x| q(x)).collect())
            .collect();
        loop {
            let m = basis.len();
            if m == 0 {
                return None;
            }
            if let Some(i) = (0..m).find(|&i| a[i][i].is_positive()) {
                return Some(integral_primitive(&basis[i]));
            }
            let Some(p) = (0..m).find(|&i| a[i][i].is_negative()) else {
                let (i, j) = (0..m)
                    .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[i][j].is_zero())?;
                let sign = if a[i][j].is_positive() { 1 } else { -1 };
                let v: Vec<BigRational> = basis[i]
                    .iter()
                    .zip(&basis[j])
                    .map(|(x, y)| x + y * q(sign))
                    .collect();
                return Some(integral_primitive(&v));
            };
            let piv = a[p][p].clone();
            let keep: Vec<usize> = (0..m).filter(|&i| i != p).collect();
            let new_basis: Vec<Vec<BigRational>> = keep
                .iter()
                .map(|&j| {
                    let f = &a[j][p] / &piv;
                    basis[j].iter().zip(&basis[p]).map(|(x, y)| x - &f * y).collect()
                })
                .collect();
            let new_a: Vec<Vec<BigRational>> = keep
                .iter()
                .map(|&i| keep.iter().map(|&j| &a[i][j] - &a[i][p] * &a[p][j] / &piv).collect())
                .collect();
            basis = new_basis;
            a = new_a;
        }
    }

    /// `L / rad(L)` with its induced (nondegenerate) form.
    pub fn radical_quotient(&self) -> Lattice {
        let n = self.rank();
        let kernel = matrix::integer_kernel(&self.gram_big(), n);
        if kernel.is_empty() {
            return self.clone();
        }
        // rows of right⁻¹ form a basis of Zⁿ whose first k rows span the
        // (saturated) radical
        let snf = crate::snf::smith_normal_form(&kernel);
        let inv = matrix::unimodular_inverse(&snf.right);
        let rest: Vec<LatticeVector> = inv[kernel.len()..]
            .iter()
            .map(|row| LatticeVector::new(row.iter().map(|x| x.to_i64().expect("overflow")).collect()))
            .collect();
        let mut q = self.sublattice(&rest).expect("complement basis is valid");
        q.label = self.label.clone();
        q
    }

    /// Positive generator of the ideal `v·L ⊆ Z`.
    pub fn divisibility(&self, v: &LatticeVector) -> Result<i64> {
        self.check_dim(v)?;
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        self.require_nondegenerate()?;
        let g = self
            .pairings_with_basis(v)
            .iter()
            .fold(0i64, |g, &x| g.gcd(&x));
        Ok(g)
    }

    /// Saturated sublattice `{x : x·v = 0}` with its induced Gram, and the
    /// embedding: each returned vector is a complement basis vector written
    /// in the coordinates of `self`.
    pub fn orthogonal_complement(
        &self,
        v: &LatticeVector,
    ) -> Result<(Lattice, Vec<LatticeVector>)> {
        self.orthogonal_complement_of(std::slice::from_ref(v))
    }

    /// Saturated orthogonal complement of a set of vectors.
    pub fn orthogonal_complement_of(
        &self,
        vs: &[LatticeVector],
    ) -> Result<(Lattice, Vec<LatticeVector>)> {
        for v in vs {
            self.check_dim(v)?;
            if v.is_zero() {
                return Err(Error::ZeroVector);
            }
        }
        let rows: IntMatrix = vs
            .iter()
            .map(|v| {
                self.pairings_with_basis(v)
                    .into_iter()
                    .map(BigInt::from)
                    .collect()
            })
            .collect();
        let kernel = matrix::hermite_basis(&matrix::integer_kernel(&rows, self.rank()));
        let basis: Vec<LatticeVector> = kernel
            .iter()
            .map(|row| {
                LatticeVector::new(
                    row.iter()
                        .map(|x| x.to_i64().expect("kernel coordinate overflow"))
                        .collect(),
                )
            })
            .collect();
        Ok((self.sublattice(&basis)?, basis))
    }

    /// Gram matrix of the span of `basis` (vectors in the coordinates of self).
    pub fn sublattice(&self, basis: &[LatticeVector]) -> Result<Lattice> {
        let k = basis.len();
        let mut g = vec![vec![0i64; k]; k];
        for i in 0..k {
            for j in i..k {
                let p = self.pair(&basis[i], &basis[j]);
                g[i][j] = p;
                g[j][i] = p;
            }
        }
        Lattice::new(g)
    }

    /// The negative definite lattice `F⊥/⟨F⟩` for a primitive isotropic `F`.
    pub fn isotropic_quotient(&self, f: &LatticeVector) -> Result<Lattice> {
        self.check_dim(f)?;
        if f.is_zero() {
            return Err(Error::ZeroVector);
        }
        if !f.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        if self.norm(f) != 0 {
            return Err(Error::NotIsotropic);
        }
        let (perp, embed) = self.orthogonal_complement(f)?;
        // coordinates of F inside the complement basis
        let coords = solve_in_basis(&embed, f).expect("F lies in its own complement");
        let big: Vec<BigInt> = coords.iter().map(|&x| BigInt::from(x)).collect();
        let completion = matrix::complete_to_basis(&big);
        let rest: Vec<LatticeVector> = (1..perp.rank())
            .map(|j| {
                LatticeVector::new(
                    (0..perp.rank())
                        .map(|i| completion[i][j].to_i64().expect("basis overflow"))
                        .collect(),
                )
            })
            .collect();
        perp.sublattice(&rest)
    }

    /// Block-diagonal orthogonal sum.
    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let (a, b) = (self.rank(), other.rank());
        let mut g = vec![vec![0i64; a + b]; a + b];
        for i in 0..a {
            g[i][..a].copy_from_slice(&self.gram[i]);
        }
        for i in 0..b {
            g[a + i][a..].copy_from_slice(&other.gram[i]);
        }
        let label = match (self.label(), other.label()) {
            (Some(x), Some(y)) => Some(format!("{x}+{y}")),
            _ => None,
        };
        Lattice { label, gram: g }
    }

    pub fn direct_sum_all<'a, I: IntoIterator<Item = &'a Lattice>>(parts: I) -> Lattice {
        parts
            .into_iter()
            .fold(Lattice { label: None, gram: vec![] }, |acc, l| {
                if acc.rank() == 0 {
                    l.clone()
                } else {
                    acc.direct_sum(l)
                }
            })
    }

    /// Multiplies the pairing by `s`.
    pub fn rescale(&self, s: i64) -> Lattice {
        assert!(s != 0, "rescale factor must be nonzero");
        Lattice {
            label: self.label.clone(),
            gram: self
                .gram
                .iter()
                .map(|row| row.iter().map(|x| x * s).collect())
                .collect(),
        }
    }

    /// Gram in a new basis given by `basis` (vectors in current coordinates).
    pub fn change_basis(&self, basis: &[LatticeVector]) -> Result<Lattice> {
        let mut l = self.sublattice(basis)?;
        l.label = self.label.clone();
        Ok(l)
    }

    /// LLL reduction of a definite lattice (exact, `δ = 99/100`). Returns the
    /// reduced lattice and the new basis in the old coordinates.
    pub fn lll_reduce(&self) -> Result<(Lattice, Vec<LatticeVector>)> {
        if !self.is_definite() {
            return Err(Error::IndefiniteLattice);
        }
        let sign = if self.rank() > 0 && self.gram[0][0] < 0 { -1 } else { 1 };
        let pos: Vec<Vec<i64>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(|&x| x * sign).collect())
            .collect();
        let (basis, reduced) = crate::lll::lll_gram(&pos);
        let gram = reduced
            .into_iter()
            .map(|row| row.into_iter().map(|x| x * sign).collect())
            .collect();
        let l = Lattice {
            label: self.label.clone(),
            gram,
        };
        Ok((l, basis.into_iter().map(LatticeVector::new).collect()))
    }

    /// Pairwise size reduction of a definite basis: repeatedly subtract
    /// rounded multiples of shorter basis vectors. Returns the reduced lattice
    /// and the new basis in the old coordinates.
    pub fn pair_reduce(&self) -> (Lattice, Vec<LatticeVector>) {
        let r = self.rank();
        let sign = if r > 0 && self.gram[0][0] < 0 { -1 } else { 1 };
        let mut g: Vec<Vec<i128>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(|&x| (x * sign) as i128).collect())
            .collect();
        let mut basis: Vec<Vec<i128>> = (0..r)
            .map(|i| (0..r).map(|j| i128::from(i == j)).collect())
            .collect();
        loop {
            let mut changed = false;
            for i in 0..r {
                for j in 0..r {
                    if i == j || g[j][j] == 0 {
                        continue;
                    }
                    // q = round(g_ij / g_jj)
                    let num = 2 * g[i][j] + g[j][j];
                    let q = num.div_euclid(2 * g[j][j]);
                    if q == 0 {
                        continue;
                    }
                    let new_norm = g[i][i] - 2 * q * g[i][j] + q * q * g[j][j];
                    if new_norm >= g[i][i] {
                        continue;
                    }
                    // b_i ← b_i − q b_j
                    for k in 0..r {
                        basis[i][k] -= q * basis[j][k];
                    }
                    let gij = g[i][j];
                    for k in 0..r {
                        if k != i {
                            let v = g[k][i] - q * g[k][j];
                            g[k][i] = v;
                            g[i][k] = v;
                        }
                    }
                    g[i][i] = g[i][i] - 2 * q * gij + q * q * g[j][j];
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by_key(|&i| (g[i][i], basis[i].clone()));
        let basis: Vec<LatticeVector> = order
            .iter()
            .map(|&i| {
                LatticeVector::new(
                    basis[i]
                        .iter()
                        .map(|&x| i64::try_from(x).expect("reduction overflow"))
                        .collect(),
                )
            })
            .collect();
        let mut reduced = self.change_basis(&basis).expect("basis change stays even");
        reduced.label = self.label.clone();
        (reduced, basis)
    }
}

fn integral_primitive(v: &[BigRational]) -> LatticeVector {
    let den = v.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &den).to_integer()).collect();
    let g = matrix::gcd_all(&ints);
    LatticeVector::new(ints.iter().map(|x| (x / &g).to_i64().expect("overflow")).collect())
}

/// Integer coordinates of `v` in the (linearly independent) `basis`, if any.
pub fn solve_in_basis(basis: &[LatticeVector], v: &LatticeVector) -> Option<Vec<i64>> {
    let k = basis.len();
    let n = v.len();
    // augmented system basisᵀ x = v
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = basis
                .iter()
                .map(|b| BigRational::from_integer(b.coords[i].into()))
                .collect();
            row.push(BigRational::from_integer(v.coords[i].into()));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &piv;
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..=k {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if (r..n).any(|i| !a[i][k].is_zero()) {
        return None;
    }
    let mut x = vec![0i64; k];
    for (row, &c) in pivots.iter().enumerate() {
        let val = &a[row][k];
        if !val.is_integer() {
            return None;
        }
        x[c] = val.to_integer().to_i64()?;
    }
    Some(x)
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            write!(f, "{l} ")?;
        }
        write!(f, "{:?}", self.gram)
    }
}

/// `Σ_i x_i·b_i` for rows of `basis`.
pub fn combine(basis: &[LatticeVector], x: &[i64]) -> LatticeVector {
    let n = basis.first().map_or(0, |b| b.len());
    let mut out = vec![0i64; n];
    for (b, &c) in basis.iter().zip(x) {
        if c == 0 {
            continue;
        }
        for (o, &bi) in out.iter_mut().zip(&b.coords) {
            *o += c * bi;
        }
    }
    LatticeVector::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::named::{l1, l2};

    /// Cofactor expansion along the first row.
    fn cofactor_det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn rejects_bad_grams() {
        assert!(Lattice::new(vec![vec![1]]).is_err());
        assert!(Lattice::new(vec![vec![0, 1], vec![2, 0]]).is_err());
        assert!(Lattice::new(vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn determinants() {
        assert_eq!(Lattice::hyperbolic_plane().determinant(), BigInt::from(-1));
        assert_eq!(cofactor_det(l1().gram()), -48);
        assert_eq!(cofactor_det(l2().gram()), 96);
        assert_eq!(l1().determinant(), BigInt::from(-48));
        assert_eq!(l2().determinant(), BigInt::from(96));
        for l in [Lattice::a(4), Lattice::d(5), Lattice::e(7)] {
            assert_eq!(l.determinant(), BigInt::from(cofactor_det(l.gram())));
        }
    }

    #[test]
    fn signatures() {
        let s = Lattice::hyperbolic_plane().signature();
        assert_eq!((s.plus, s.zero, s.minus), (1, 0, 1));
        let s = l1().signature();
        assert_eq!((s.plus, s.zero, s.minus), (1, 0, 3));
        let s = Lattice::diagonal(&[-2, -2]).unwrap().signature();
        assert_eq!((s.plus, s.zero, s.minus), (0, 0, 2));
        let deg = Lattice::new(vec![vec![0, 0], vec![0, -2]]).unwrap();
        let s = deg.signature();
        assert_eq!((s.plus, s.zero, s.minus), (0, 1, 1));
        assert!(Lattice::e(8).is_negative_definite());
    }

    #[test]
    fn divisibility_examples() {
        let u = Lattice::hyperbolic_plane();
        assert_eq!(u.divisibility(&vec![1, 0].into()).unwrap(), 1);
        assert_eq!(l2().divisibility(&LatticeVector::basis(5, 0)).unwrap(), 2);
        let d = Lattice::diagonal(&[-2, -2]).unwrap();
        assert_eq!(d.divisibility(&vec![2, 0].into()).unwrap(), 4);
        assert_eq!(d.divisibility(&vec![0, 0].into()), Err(Error::ZeroVector));
    }

    #[test]
    fn complements() {
        let u = Lattice::hyperbolic_plane();
        let (c, emb) = u.orthogonal_complement(&vec![1, 0].into()).unwrap();
        assert_eq!(c.gram(), &[vec![0]]);
        assert_eq!(emb, vec![LatticeVector::new(vec![1, 0])]);

        let u2 = u.direct_sum(&Lattice::diagonal(&[-2]).unwrap());
        let (c, emb) = u2.orthogonal_complement(&vec![1, 0, 0].into()).unwrap();
        assert_eq!(c.rank(), 2);
        assert!(c.is_degenerate());
        assert!(solve_in_basis(&emb, &vec![1, 0, 0].into()).is_some());
        assert!(solve_in_basis(&emb, &vec![0, 0, 1].into()).is_some());

        let (c, emb) = l1().orthogonal_complement(&LatticeVector::basis(4, 0)).unwrap();
        assert_eq!(c.rank(), 3);
        let s = c.signature();
        assert_eq!((s.plus, s.zero, s.minus), (0, 1, 2));
        for b in &emb {
            assert_eq!(b.coords[1], 0);
        }
    }

    #[test]
    fn quotients() {
        let u = Lattice::hyperbolic_plane();
        let q = u
            .direct_sum(&Lattice::diagonal(&[-2]).unwrap())
            .isotropic_quotient(&vec![1, 0, 0].into())
            .unwrap();
        assert_eq!(q.gram(), &[vec![-2]]);
        let q = u
            .direct_sum(&Lattice::a(2))
            .isotropic_quotient(&vec![1, 0, 0, 0].into())
            .unwrap();
        assert_eq!(q.determinant(), BigInt::from(3));
        assert!(q.is_negative_definite());
        let q = l1().isotropic_quotient(&LatticeVector::basis(4, 0)).unwrap();
        assert_eq!(q.determinant(), BigInt::from(12));
        assert!(q.is_negative_definite());
        assert_eq!(
            l1().isotropic_quotient(&LatticeVector::basis(4, 1)),
            Err(Error::NotIsotropic)
        );
        assert_eq!(
            l1().isotropic_quotient(&vec![2, 0, 0, 0].into()),
            Err(Error::NotPrimitive)
        );
    }

    #[test]
    fn sums_and_rescale() {
        let u = Lattice::hyperbolic_plane();
        let s = u.direct_sum(&Lattice::diagonal(&[-2]).unwrap());
        assert_eq!(s.rank(), 3);
        assert_eq!(s.determinant(), BigInt::from(2));
        assert!(Lattice::a(2).rescale(-1).is_positive_definite());
        assert_eq!(u.direct_sum(&Lattice::a(2)).determinant(), BigInt::from(-3));
        assert_eq!(u.direct_sum(&Lattice::a(2)).disc(), BigInt::from(3));
    }

    #[test]
    fn pair_reduce_keeps_lattice() {
        let l = Lattice::new(vec![vec![2, 7], vec![7, 26]]).unwrap();
        let (r, basis) = l.pair_reduce();
        assert_eq!(r.determinant(), l.determinant());
        assert!(r.gram()[0][0] <= 2 && r.gram()[1][1] <= 4);
        assert_eq!(basis.len(), 2);
    }
}
