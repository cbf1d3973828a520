//! Discriminant groups `L*/L` as finite quadratic forms, their isotropic
//! subgroups, and the even overlattices they glue.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeVector};
use crate::matrix;
use crate::snf::smith_normal_form;

/// Default cap on `|Q|` for subgroup and isomorphism enumeration.
pub const DEFAULT_GROUP_BOUND: u64 = 10_000;

/// An element of `⊕ Z/d_i`, stored as residues.
pub type Element = Vec<u64>;

/// `Z/d₁ ⊕ … ⊕ Z/d_k` (d_i | d_{i+1}, d_i ≥ 2) with a quadratic form valued in
/// `Q/2Z`. Values are stored as numerators over the exponent `den = d_k`:
/// `b(g_i,g_j) = bil[i][j]/den mod 1`, `q(g_i) = quad[i]/den mod 2`.
#[derive(Clone, Debug)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    den: u64,
    bil: Vec<Vec<u64>>,
    quad: Vec<u64>,
    /// generator lifts in `L ⊗ Q`, as numerators over `den`
    lifts: Option<Vec<Vec<i64>>>,
}

impl FiniteQuadraticForm {
    /// Builds a form from generator data. `bil[i][i]` must agree with
    /// `quad[i]` mod 1.
    pub fn new(orders: Vec<u64>, den: u64, bil: Vec<Vec<u64>>, quad: Vec<u64>) -> Result<Self> {
        let k = orders.len();
        if bil.len() != k || quad.len() != k || bil.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParams("generator data has inconsistent sizes".into()));
        }
        if orders.iter().any(|&d| d < 2 || den % d != 0) {
            return Err(Error::InvalidParams("orders must be ≥ 2 and divide den".into()));
        }
        for w in orders.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(Error::InvalidParams("orders must form a divisibility chain".into()));
            }
        }
        let bil = bil
            .into_iter()
            .map(|r| r.into_iter().map(|x| x % den).collect())
            .collect();
        let quad = quad.into_iter().map(|x| x % (2 * den)).collect();
        Ok(Self {
            orders,
            den,
            bil,
            quad,
            lifts: None,
        })
    }

    pub fn trivial() -> Self {
        Self {
            orders: vec![],
            den: 1,
            bil: vec![],
            quad: vec![],
            lifts: Some(vec![]),
        }
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn exponent(&self) -> u64 {
        self.den
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn zero(&self) -> Element {
        vec![0; self.orders.len()]
    }

    /// Numerator of `q(x)` over `den`, in `[0, 2·den)`.
    pub fn q_num(&self, x: &[u64]) -> u64 {
        let m = 2 * self.den as u128;
        let mut acc: u128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as u128;
            acc += xi * xi % m * self.quad[i] as u128;
            for j in i + 1..x.len() {
                if x[j] != 0 {
                    acc += 2 * (xi * x[j] as u128 % m) * self.bil[i][j] as u128;
                }
            }
            acc %= m;
        }
        (acc % m) as u64
    }

    /// Numerator of `b(x, y)` over `den`, in `[0, den)`.
    pub fn b_num(&self, x: &[u64], y: &[u64]) -> u64 {
        let m = self.den as u128;
        let mut acc: u128 = 0;
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..y.len() {
                if y[j] != 0 {
                    acc += (x[i] as u128 * y[j] as u128 % m) * self.bil[i][j] as u128;
                    acc %= m;
                }
            }
        }
        acc as u64
    }

    /// `q(x) ∈ [0, 2)` as a reduced fraction.
    pub fn q(&self, x: &[u64]) -> Ratio<i64> {
        Ratio::new(self.q_num(x) as i64, self.den as i64)
    }

    pub fn b(&self, x: &[u64], y: &[u64]) -> Ratio<i64> {
        Ratio::new(self.b_num(x, y) as i64, self.den as i64)
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.orders)
            .map(|((a, b), d)| (a + b) % d)
            .collect()
    }

    pub fn scale(&self, x: &[u64], k: u64) -> Element {
        x.iter()
            .zip(&self.orders)
            .map(|(a, d)| (a % d) * (k % d) % d)
            .collect()
    }

    pub fn element_order(&self, x: &[u64]) -> u64 {
        x.iter()
            .zip(&self.orders)
            .fold(1u64, |acc, (&a, &d)| acc.lcm(&(d / d.gcd(&a))))
    }

    fn index_of(&self, x: &[u64]) -> usize {
        let mut idx = 0usize;
        for (a, d) in x.iter().zip(&self.orders) {
            idx = idx * *d as usize + *a as usize;
        }
        idx
    }

    fn element_at(&self, mut idx: usize) -> Element {
        let mut x = vec![0u64; self.orders.len()];
        for i in (0..self.orders.len()).rev() {
            let d = self.orders[i] as usize;
            x[i] = (idx % d) as u64;
            idx /= d;
        }
        x
    }

    /// All elements in mixed-radix order (first generator most significant).
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }

    fn check_bound(&self, bound: u64) -> Result<()> {
        if self.order() > bound {
            return Err(Error::GroupTooLarge {
                order: self.order(),
                bound,
            });
        }
        Ok(())
    }

    /// All elements of exact order `n` with their `q`-values.
    pub fn elements_of_order(&self, n: u64) -> Vec<(Element, Ratio<i64>)> {
        self.elements()
            .filter(|x| self.element_order(x) == n)
            .map(|x| {
                let q = self.q(&x);
                (x, q)
            })
            .collect()
    }

    /// Some element of exact order `n` with `q ≡ 0 (mod 2)`.
    pub fn isotropic_element_of_order(&self, n: u64) -> Option<Element> {
        if n == 0 || self.den % n != 0 && n != 1 {
            return None;
        }
        self.elements()
            .find(|x| self.element_order(x) == n && self.q_num(x) == 0)
    }

    /// Count of elements by `(order, q numerator)`, an isomorphism invariant.
    fn profile(&self) -> HashMap<(u64, u64), usize> {
        let mut m = HashMap::new();
        for x in self.elements() {
            *m.entry((self.element_order(&x), self.q_num(&x))).or_insert(0) += 1;
        }
        m
    }

    /// Brute-force isometry test of finite quadratic forms: match generator
    /// images order by order with consistent `q` and `b` values.
    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.find_isomorphism(other).is_some()
    }

    /// Images of the generators of `self` in `other` under an isometry.
    pub fn find_isomorphism(&self, other: &Self) -> Option<Vec<Element>> {
        if self.orders != other.orders {
            return None;
        }
        if self.is_trivial() {
            return Some(vec![]);
        }
        if self.profile() != other.profile() {
            return None;
        }
        let candidates: Vec<Vec<Element>> = (0..self.orders.len())
            .map(|i| {
                let g = unit(self.orders.len(), i);
                let qg = self.q_num(&g);
                other
                    .elements()
                    .filter(|y| other.element_order(y) == self.orders[i] && other.q_num(y) == qg)
                    .collect()
            })
            .collect();
        let mut chosen: Vec<Element> = Vec::new();
        if self.match_generators(other, &candidates, &mut chosen) {
            Some(chosen)
        } else {
            None
        }
    }

    fn match_generators(
        &self,
        other: &Self,
        candidates: &[Vec<Element>],
        chosen: &mut Vec<Element>,
    ) -> bool {
        let i = chosen.len();
        if i == candidates.len() {
            return other.span(chosen).len() as u64 == other.order();
        }
        for y in &candidates[i] {
            let ok = (0..i).all(|j| self.bil[i][j] == other.b_num(y, &chosen[j]));
            if !ok {
                continue;
            }
            chosen.push(y.clone());
            if self.match_generators(other, candidates, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn span(&self, gens: &[Element]) -> Vec<Element> {
        let mut elems: BTreeSet<Element> = BTreeSet::new();
        elems.insert(self.zero());
        for g in gens {
            let current: Vec<Element> = elems.iter().cloned().collect();
            let ord = self.element_order(g);
            for h in current {
                let mut acc = h;
                for _ in 1..ord {
                    acc = self.add(&acc, g);
                    elems.insert(acc.clone());
                }
            }
        }
        elems.into_iter().collect()
    }

    /// All subgroups `H` with `q|_H ≡ 0`, trivial one included, ordered by
    /// size then by element list.
    pub fn isotropic_subgroups(&self, bound: u64) -> Result<Vec<IsotropicSubgroup>> {
        self.check_bound(bound)?;
        let n = self.order() as usize;
        let isotropic: Vec<usize> = (1..n)
            .filter(|&i| self.q_num(&self.element_at(i)) == 0)
            .collect();
        let trivial = IsotropicSubgroup {
            generators: vec![],
            elements: vec![self.zero()],
        };
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(vec![0]);
        let mut out = vec![trivial];
        let mut i = 0;
        while i < out.len() {
            let h = out[i].clone();
            let members: HashSet<usize> = h.elements.iter().map(|e| self.index_of(e)).collect();
            for &x in &isotropic {
                if members.contains(&x) {
                    continue;
                }
                let xe = self.element_at(x);
                if h.generators.iter().any(|g| self.b_num(g, &xe) != 0) {
                    continue;
                }
                let mut gens = h.generators.clone();
                gens.push(xe);
                let elems = self.span(&gens);
                let mut key: Vec<usize> = elems.iter().map(|e| self.index_of(e)).collect();
                key.sort_unstable();
                if seen.insert(key) {
                    out.push(IsotropicSubgroup {
                        generators: gens,
                        elements: elems,
                    });
                }
            }
            i += 1;
        }
        out.sort_by(|a, b| {
            (a.elements.len(), &a.elements).cmp(&(b.elements.len(), &b.elements))
        });
        Ok(out)
    }

    /// Rational lift of `x` in the coordinates of the underlying lattice, as
    /// numerators over `den`; `None` for abstract forms.
    pub fn lift(&self, x: &[u64]) -> Option<Vec<i64>> {
        let lifts = self.lifts.as_ref()?;
        let r = lifts.first().map_or(0, |l| l.len());
        let mut v = vec![0i64; r];
        for (a, g) in x.iter().zip(lifts) {
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi += *a as i64 * gi;
            }
        }
        Some(v)
    }

    /// Sorted `q`-values of the generators, for display.
    pub fn generator_q_values(&self) -> Vec<Ratio<i64>> {
        (0..self.orders.len())
            .map(|i| self.q(&unit(self.orders.len(), i)))
            .collect()
    }
}

fn unit(k: usize, i: usize) -> Element {
    let mut e = vec![0u64; k];
    e[i] = 1;
    e
}

impl fmt::Display for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("trivial");
        }
        let parts: Vec<String> = self
            .orders
            .iter()
            .zip(self.generator_q_values())
            .map(|(d, q)| format!("Z/{d}[q={q}]"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Serializable canonical data of a finite quadratic form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSummary {
    pub orders: Vec<u64>,
    pub q_values: Vec<String>,
}

impl From<&FiniteQuadraticForm> for FormSummary {
    fn from(q: &FiniteQuadraticForm) -> Self {
        Self {
            orders: q.orders.clone(),
            q_values: q.generator_q_values().iter().map(|r| r.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicSubgroup {
    pub generators: Vec<Element>,
    pub elements: Vec<Element>,
}

impl IsotropicSubgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// `L*/L` with `q(x) = x·x mod 2`, generators from the Smith form of the Gram
/// matrix.
pub fn discriminant_form(l: &Lattice) -> Result<FiniteQuadraticForm> {
    l.require_nondegenerate()?;
    let r = l.rank();
    if r == 0 {
        return Ok(FiniteQuadraticForm::trivial());
    }
    let g = l.gram_big();
    let snf = smith_normal_form(&g);
    let keep: Vec<usize> = (0..r).filter(|&i| snf.diag[i] > BigInt::from(1)).collect();
    if keep.is_empty() {
        return Ok(FiniteQuadraticForm::trivial());
    }
    let to_u64 = |x: &BigInt| x.to_u64().ok_or(Error::Overflow("reading group orders"));
    let orders: Vec<u64> = keep.iter().map(|&i| to_u64(&snf.diag[i])).collect::<Result<_>>()?;
    let den = *orders.last().unwrap();
    let m = matrix::congruence(&g, &snf.right);
    let big_den = BigInt::from(den);
    let reduce = |num: BigInt, d: &BigInt, modulus: &BigInt| -> Result<u64> {
        // (num / d)·den mod modulus, where d | num·den
        let scaled = num * &big_den;
        debug_assert!(scaled.is_multiple_of(d));
        to_u64(&(scaled / d).mod_floor(modulus))
    };
    let k = keep.len();
    let mut bil = vec![vec![0u64; k]; k];
    let mut quad = vec![0u64; k];
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            let d = &snf.diag[i] * &snf.diag[j];
            bil[a][b] = reduce(m[i][j].clone(), &d, &big_den)?;
        }
        let d = &snf.diag[i] * &snf.diag[i];
        quad[a] = reduce(m[i][i].clone(), &d, &(&big_den * 2))?;
    }
    let lifts: Vec<Vec<i64>> = keep
        .iter()
        .map(|&i| {
            let factor = &big_den / &snf.diag[i];
            (0..r)
                .map(|row| {
                    (&snf.right[row][i] * &factor)
                        .to_i64()
                        .ok_or(Error::Overflow("lifting discriminant generators"))
                })
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<_>>()?;
    let mut q = FiniteQuadraticForm::new(orders, den, bil, quad)?;
    q.lifts = Some(lifts);
    Ok(q)
}

/// Certificate for an even overlattice `L ⊂ M` of finite index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlatticeCert {
    pub index: u64,
    /// isotropic subgroup generators, as residues in the discriminant group
    pub glue: Vec<Element>,
    pub result: Lattice,
    /// basis of the overlattice in the coordinates of `L`, numerators over `den`
    pub basis: Vec<Vec<i64>>,
    pub den: i64,
}

/// Span of `Zʳ` together with `gens/den`, returned as (basis numerators over
/// `den`, Gram matrix, index).
fn adjoin(l: &Lattice, den: i64, gens: &[Vec<i64>]) -> Result<(Vec<Vec<i64>>, Lattice, u64)> {
    let r = l.rank();
    let mut rows: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { den } else { 0 }).collect())
        .collect();
    rows.extend(gens.iter().cloned());
    span_over(l, den, &rows)
}

/// The lattice spanned by `rows/den` inside `L ⊗ Q` (rows must span a
/// full-rank module). Returns (basis numerators over `den`, Gram, index of
/// `L` in the result when it contains `L`).
pub(crate) fn span_over(
    l: &Lattice,
    den: i64,
    rows: &[Vec<i64>],
) -> Result<(Vec<Vec<i64>>, Lattice, u64)> {
    let r = l.rank();
    let d = BigInt::from(den);
    let rows: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let basis = matrix::hermite_basis(&rows);
    if basis.len() != r {
        return Err(Error::InvalidParams("generators do not span a full-rank lattice".into()));
    }
    let cols = matrix::transpose(&basis);
    let gram = matrix::congruence(&l.gram_big(), &cols);
    let d2 = &d * &d;
    let mut out = vec![vec![0i64; r]; r];
    for i in 0..r {
        for j in 0..r {
            let (q, rem) = gram[i][j].div_rem(&d2);
            if !rem.is_zero() {
                return Err(Error::NotIntegral);
            }
            out[i][j] = q.to_i64().ok_or(Error::Overflow("computing an overlattice Gram"))?;
        }
        if out[i][i] % 2 != 0 {
            return Err(Error::NotEven);
        }
    }
    let det = matrix::determinant(&basis).abs();
    let index = (d.pow(r as u32) / det)
        .to_u64()
        .ok_or(Error::Overflow("computing an overlattice index"))?;
    let basis = matrix::to_i64(&basis).ok_or(Error::Overflow("computing an overlattice basis"))?;
    Ok((basis, Lattice::new(out)?, index))
}

/// One certificate per nontrivial isotropic subgroup of `A_L`.
pub fn even_overlattices(l: &Lattice, bound: u64) -> Result<Vec<OverlatticeCert>> {
    let q = discriminant_form(l)?;
    let subgroups = q.isotropic_subgroups(bound)?;
    let den = q.exponent() as i64;
    subgroups
        .into_iter()
        .filter(|h| h.order() > 1)
        .map(|h| {
            let gens: Vec<Vec<i64>> = h
                .generators
                .iter()
                .map(|g| q.lift(g).expect("discriminant form carries lifts"))
                .collect();
            let (basis, result, index) = adjoin(l, den, &gens)?;
            debug_assert_eq!(index as usize, h.order());
            Ok(OverlatticeCert {
                index,
                glue: h.generators,
                result,
                basis,
                den,
            })
        })
        .collect()
}

/// The overlattice `L[w/n]`.
pub fn divide_vector(l: &Lattice, w: &LatticeVector, n: i64) -> Result<Lattice> {
    divide_vector_with_basis(l, w, n).map(|(m, _)| m)
}

/// As [`divide_vector`], also returning the new basis as numerators over `n`.
pub fn divide_vector_with_basis(
    l: &Lattice,
    w: &LatticeVector,
    n: i64,
) -> Result<(Lattice, Vec<Vec<i64>>)> {
    if n < 1 {
        return Err(Error::InvalidParams(format!("cannot divide by {n}")));
    }
    if w.len() != l.rank() {
        return Err(Error::DimensionMismatch {
            expected: l.rank(),
            got: w.len(),
        });
    }
    if n == 1 {
        let id = (0..l.rank())
            .map(|i| LatticeVector::basis(l.rank(), i).coords)
            .collect();
        return Ok((l.clone(), id));
    }
    if l.pairings_with_basis(w).iter().any(|p| p % n != 0) {
        return Err(Error::NotIntegral);
    }
    let norm = l.norm(w);
    if norm % (n * n) != 0 {
        return Err(Error::NotIntegral);
    }
    if (norm / (n * n)) % 2 != 0 {
        return Err(Error::NotEven);
    }
    let (basis, m, _) = adjoin(l, n, std::slice::from_ref(&w.coords))?;
    Ok((m, basis))
}

/// `x·x` of a rational vector (numerators over `den`) as an exact rational.
pub fn rational_norm(l: &Lattice, num: &[i64], den: i64) -> BigRational {
    let v = LatticeVector::new(num.to_vec());
    BigRational::new(BigInt::from(l.norm(&v)), BigInt::from(den) * BigInt::from(den))
}

impl OverlatticeCert {
    /// Re-derives the certificate's invariants: index² · disc(M) = disc(L).
    pub fn verify(&self, l: &Lattice) -> bool {
        let lhs = self.result.disc() * BigInt::from(self.index) * BigInt::from(self.index);
        lhs == l.disc() && self.result.signature() == l.signature()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{l1, l2};

    fn a1(n: usize) -> Lattice {
        Lattice::diagonal(&vec![-2; n]).unwrap()
    }

    #[test]
    fn small_forms() {
        assert!(discriminant_form(&Lattice::hyperbolic_plane()).unwrap().is_trivial());
        let q = discriminant_form(&a1(1)).unwrap();
        assert_eq!(q.orders(), &[2]);
        assert_eq!(q.q(&[1]), Ratio::new(3, 2));
        let q = discriminant_form(&Lattice::a(2)).unwrap();
        assert_eq!(q.orders(), &[3]);
        assert_eq!(q.q(&[1]), Ratio::new(4, 3));
        assert_eq!(q.q(&[2]), Ratio::new(4, 3));
        assert!(discriminant_form(&Lattice::e(8)).unwrap().is_trivial());
        assert_eq!(
            discriminant_form(&Lattice::new(vec![vec![0, 0], vec![0, -2]]).unwrap()).unwrap_err(),
            Error::DegenerateLattice
        );
    }

    #[test]
    fn form_axioms_hold() {
        for l in [l1(), l2(), Lattice::d(5), a1(3).direct_sum(&Lattice::a(2))] {
            let q = discriminant_form(&l).unwrap();
            assert_eq!(BigInt::from(q.order()), l.disc());
            let els: Vec<Element> = q.elements().collect();
            for x in &els {
                let negx = q.scale(x, q.exponent() - 1);
                assert_eq!(q.q_num(x), q.q_num(&negx));
                for y in &els {
                    let lhs = (q.q_num(&q.add(x, y)) + 4 * q.exponent() - q.q_num(x) - q.q_num(y))
                        % (2 * q.exponent());
                    assert_eq!(lhs, 2 * q.b_num(x, y) % (2 * q.exponent()));
                }
            }
        }
    }

    #[test]
    fn q_values_match_inverse_gram() {
        // q(x) = x·x for the lift x = (lift numerators)/den
        for l in [l1(), l2()] {
            let q = discriminant_form(&l).unwrap();
            for x in q.elements().take(50) {
                let v = q.lift(&x).unwrap();
                let direct = rational_norm(&l, &v, q.exponent() as i64);
                let diff = direct - BigRational::new(q.q_num(&x).into(), q.exponent().into());
                assert!((diff / BigInt::from(2)).is_integer());
            }
        }
    }

    #[test]
    fn l1_and_l2_order_four() {
        let q1 = discriminant_form(&l1()).unwrap();
        assert_eq!(q1.order(), 48);
        assert!(q1.elements_of_order(4).is_empty());
        let q2 = discriminant_form(&l2()).unwrap();
        assert_eq!(q2.order(), 96);
        let o4 = q2.elements_of_order(4);
        assert!(!o4.is_empty());
        for (_, v) in &o4 {
            assert!(*v == Ratio::new(1, 2) || *v == Ratio::new(3, 2));
        }
        assert!(q2.isotropic_element_of_order(4).is_none());
        assert!(FiniteQuadraticForm::trivial().elements_of_order(2).is_empty());
    }

    #[test]
    fn isotropic_elements_and_subgroups() {
        let q = discriminant_form(&a1(2)).unwrap();
        assert_eq!(q.q(&[1, 1]), Ratio::from_integer(1));
        assert!(q.isotropic_element_of_order(2).is_none());
        let q4 = discriminant_form(&a1(4)).unwrap();
        assert_eq!(q4.isotropic_element_of_order(2), Some(vec![1, 1, 1, 1]));
        let subs = q4.isotropic_subgroups(DEFAULT_GROUP_BOUND).unwrap();
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[1].elements, vec![vec![0, 0, 0, 0], vec![1, 1, 1, 1]]);
        assert_eq!(discriminant_form(&Lattice::a(2)).unwrap().isotropic_subgroups(10).unwrap().len(), 1);
        assert_eq!(FiniteQuadraticForm::trivial().isotropic_subgroups(1).unwrap().len(), 1);
        assert!(matches!(
            q4.isotropic_subgroups(8),
            Err(Error::GroupTooLarge { order: 16, bound: 8 })
        ));
    }

    #[test]
    fn overlattices() {
        assert!(even_overlattices(&Lattice::a(2), DEFAULT_GROUP_BOUND).unwrap().is_empty());
        let certs = even_overlattices(&a1(4), DEFAULT_GROUP_BOUND).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].index, 2);
        assert_eq!(certs[0].result.disc(), BigInt::from(4));
        assert!(certs[0].verify(&a1(4)));
        for c in even_overlattices(&l1(), DEFAULT_GROUP_BOUND).unwrap() {
            assert!(c.verify(&l1()));
            assert_eq!(c.result.disc() * BigInt::from(c.index * c.index), BigInt::from(48));
        }
    }

    #[test]
    fn divide() {
        let m = divide_vector(&a1(4), &vec![1, 1, 1, 1].into(), 2).unwrap();
        assert_eq!(m.disc(), BigInt::from(4));
        assert_eq!(divide_vector(&l1(), &vec![1, 0, 0, 0].into(), 1).unwrap(), l1());
        let m = divide_vector(&l2(), &LatticeVector::basis(5, 0), 2).unwrap();
        assert_eq!(m.rank(), 5);
        assert_eq!(m.disc(), BigInt::from(24));
        assert_eq!(
            divide_vector(&a1(2), &vec![1, 1].into(), 2).unwrap_err(),
            Error::NotEven
        );
        assert_eq!(
            divide_vector(&Lattice::diagonal(&[-6]).unwrap(), &vec![1].into(), 2).unwrap_err(),
            Error::NotIntegral
        );
        assert_eq!(
            divide_vector(&a1(2), &vec![1, 0].into(), 3).unwrap_err(),
            Error::NotIntegral
        );
        assert_eq!(
            divide_vector(&Lattice::diagonal(&[-8]).unwrap(), &vec![1].into(), 2).unwrap(),
            Lattice::diagonal(&[-2]).unwrap()
        );
    }

    #[test]
    fn isomorphism_of_forms() {
        let a = discriminant_form(&Lattice::a(2)).unwrap();
        let b = discriminant_form(&Lattice::e(6)).unwrap();
        assert!(a.is_isomorphic(&b) == (a.q(&[1]) == b.q(&[1])));
        let d4 = discriminant_form(&Lattice::d(4)).unwrap();
        let a1a1 = discriminant_form(&a1(2)).unwrap();
        assert!(!d4.is_isomorphic(&a1a1));
        assert!(d4.is_isomorphic(&d4.clone()));
    }
}
