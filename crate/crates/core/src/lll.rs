//! Fraction-free LLL reduction of a positive definite Gram matrix.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

/// Exact ring operations with overflow reporting, so the same code runs on
/// `i128` first and on `BigInt` when that overflows.
trait Ring: Clone + Ord + Sized {
    fn from_i64(x: i64) -> Self;
    fn to_i64(&self) -> Option<i64>;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// exact quotient
    fn div(&self, o: &Self) -> Self;
    fn div_floor(&self, o: &Self) -> Self;
    fn abs(&self) -> Self;
    fn is_positive(&self) -> bool;
}

impl Ring for i128 {
    fn from_i64(x: i64) -> Self {
        x as i128
    }
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(*self).ok()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn div_floor(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn abs(&self) -> Self {
        i128::abs(*self)
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
}

impl Ring for BigInt {
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn div_floor(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

/// Reduces the basis of a positive definite Gram matrix with `δ = 99/100`.
/// Returns the new basis (rows, in old coordinates) and its Gram matrix.
/// All arithmetic is exact; the algorithm keeps the integral Gram–Schmidt
/// data `d_i` and `λ_ij` instead of rationals.
pub fn lll_gram(gram: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    run::<i128>(gram)
        .or_else(|| run::<BigInt>(gram))
        .expect("LLL entry overflow")
}

struct State<T> {
    g: Vec<Vec<T>>,
    h: Vec<Vec<T>>,
    lam: Vec<Vec<T>>,
    d: Vec<T>,
}

fn run<T: Ring>(gram: &[Vec<i64>]) -> Option<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let n = gram.len();
    let zero = T::from_i64(0);
    let mut st = State {
        g: gram.iter().map(|r| r.iter().map(|&x| T::from_i64(x)).collect()).collect(),
        h: (0..n)
            .map(|i| (0..n).map(|j| T::from_i64(i64::from(i == j))).collect())
            .collect(),
        lam: vec![vec![zero.clone(); n + 1]; n + 1],
        d: vec![zero; n + 1],
    };
    if n > 1 {
        lll_loop(&mut st, n)?;
    }
    let conv = |m: &[Vec<T>]| -> Option<Vec<Vec<i64>>> {
        m.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
    };
    Some((conv(&st.h)?, conv(&st.g)?))
}

fn lll_loop<T: Ring>(st: &mut State<T>, n: usize) -> Option<()> {
    // 1-based indices as in the textbook version; d[0] = 1
    st.d[0] = T::from_i64(1);
    st.d[1] = st.g[0][0].clone();
    let hundred = T::from_i64(100);
    let ninety_nine = T::from_i64(99);
    let mut k = 2usize;
    let mut kmax = 1usize;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = st.g[k - 1][j - 1].clone();
                for i in 1..j {
                    u = st.d[i].mul(&u)?.sub(&st.lam[k][i].mul(&st.lam[j][i])?)?.div(&st.d[i - 1]);
                }
                if j < k {
                    st.lam[k][j] = u;
                } else {
                    assert!(u.is_positive(), "Gram matrix is not positive definite");
                    st.d[k] = u;
                }
            }
        }
        reduce(st, k, k - 1)?;
        // Lovász test: 100 (d_k d_{k-2} + λ²) < 99 d_{k-1}²
        let l = &st.lam[k][k - 1];
        let lhs = st.d[k].mul(&st.d[k - 2])?.add(&l.mul(l)?)?.mul(&hundred)?;
        let rhs = st.d[k - 1].mul(&st.d[k - 1])?.mul(&ninety_nine)?;
        if lhs < rhs {
            swap(st, k, kmax)?;
            k = (k - 1).max(2);
        } else {
            for l in (1..k - 1).rev() {
                reduce(st, k, l)?;
            }
            k += 1;
        }
    }
    Some(())
}

/// b_k ← b_k − q b_l with q the nearest integer to λ_kl / d_l.
fn reduce<T: Ring>(st: &mut State<T>, k: usize, l: usize) -> Option<()> {
    let two_lam = st.lam[k][l].add(&st.lam[k][l])?;
    if two_lam.abs() <= st.d[l] {
        return Some(());
    }
    let q = two_lam.add(&st.d[l])?.div_floor(&st.d[l].add(&st.d[l])?);
    let (ki, li) = (k - 1, l - 1);
    let n = st.g.len();
    for c in 0..n {
        st.h[ki][c] = st.h[ki][c].sub(&q.mul(&st.h[li][c])?)?;
    }
    // Gram update: row then column
    for c in 0..n {
        st.g[ki][c] = st.g[ki][c].sub(&q.mul(&st.g[li][c])?)?;
    }
    for r in 0..n {
        st.g[r][ki] = st.g[r][ki].sub(&q.mul(&st.g[r][li])?)?;
    }
    st.lam[k][l] = st.lam[k][l].sub(&q.mul(&st.d[l])?)?;
    for i in 1..l {
        st.lam[k][i] = st.lam[k][i].sub(&q.mul(&st.lam[l][i])?)?;
    }
    Some(())
}

fn swap<T: Ring>(st: &mut State<T>, k: usize, kmax: usize) -> Option<()> {
    let (a, b) = (k - 1, k - 2);
    st.h.swap(a, b);
    st.g.swap(a, b);
    for row in st.g.iter_mut() {
        row.swap(a, b);
    }
    for j in 1..k - 1 {
        let t = st.lam[k][j].clone();
        st.lam[k][j] = st.lam[k - 1][j].clone();
        st.lam[k - 1][j] = t;
    }
    let l = st.lam[k][k - 1].clone();
    let d = &mut st.d;
    let bb = d[k - 2].mul(&d[k])?.add(&l.mul(&l)?)?.div(&d[k - 1]);
    for i in k + 1..=kmax {
        let t = st.lam[i][k].clone();
        st.lam[i][k] = d[k].mul(&st.lam[i][k - 1])?.sub(&l.mul(&t)?)?.div(&d[k - 1]);
        st.lam[i][k - 1] = bb.mul(&t)?.add(&l.mul(&st.lam[i][k])?)?.div(&d[k]);
    }
    d[k - 1] = bb;
    Some(())
}
