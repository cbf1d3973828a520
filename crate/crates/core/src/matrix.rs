//! Dense exact integer and rational matrix helpers.
//!
//! Matrices are plain row-major `Vec<Vec<_>>`. Everything here is exact:
//! `BigInt` for integer work and `BigRational` where division is needed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn to_big(m: &[Vec<i64>]) -> IntMatrix {
    m.iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Converts back to machine integers, `None` if any entry does not fit.
pub fn to_i64(m: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
    m.iter()
        .map(|row| row.iter().map(|x| x.to_i64()).collect())
        .collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() {
                            acc += &row[k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `basisᵀ · gram · basis` where the columns of `basis` are the new basis vectors.
pub fn congruence(gram: &[Vec<BigInt>], basis: &[Vec<BigInt>]) -> IntMatrix {
    let bt = transpose(basis);
    mul(&mul(&bt, gram), basis)
}

/// Fraction-free Gaussian elimination (Bareiss). Exact for any square matrix.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IntMatrix = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Leading principal minors `d_1, …, d_n` of a square matrix, by
/// fraction-free elimination without pivoting (a zero minor ends the
/// elimination and the remaining minors are computed directly).
pub fn leading_minors(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut out = Vec::with_capacity(n);
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            out.extend((k + 1..=n).map(|j| {
                let sub: IntMatrix = m[..j].iter().map(|row| row[..j].to_vec()).collect();
                determinant(&sub)
            }));
            return out;
        }
        out.push(a[k][k].clone());
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    out
}

/// Signs of the leading principal minors of a small integer matrix, using
/// `i128` while it does not overflow.
pub fn leading_minor_signs(m: &[Vec<i64>]) -> Vec<i8> {
    fn fast(m: &[Vec<i64>]) -> Option<Vec<i8>> {
        let n = m.len();
        let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let mut out = Vec::with_capacity(n);
        let mut prev: i128 = 1;
        for k in 0..n {
            if a[k][k] == 0 {
                return None;
            }
            out.push(a[k][k].signum() as i8);
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                    a[i][j] = v / prev;
                }
            }
            prev = a[k][k];
        }
        Some(out)
    }
    fast(m).unwrap_or_else(|| {
        leading_minors(&to_big(m))
            .iter()
            .map(|d| if d.is_zero() { 0 } else if d.is_positive() { 1 } else { -1 })
            .collect()
    })
}

pub fn rank(m: &[Vec<BigInt>]) -> usize {
    let mut a: RatMatrix = m
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    row_echelon(&mut a)
}

/// In-place row echelon form, returns the rank.
fn row_echelon(a: &mut RatMatrix) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[r][c];
            for j in c..cols {
                let v = &f * &a[r][j];
                a[i][j] -= v;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Exact inverse over the rationals, `None` when singular.
pub fn inverse(m: &[Vec<BigInt>]) -> Option<RatMatrix> {
    let n = m.len();
    let mut a: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let piv = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x /= &piv;
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..2 * n {
                let v = &f * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(m: &[Vec<BigInt>]) -> IntMatrix {
    let inv = inverse(m).expect("unimodular matrix is invertible");
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "matrix is not unimodular");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

/// Row-style Hermite normal form of the Z-span of `rows`; zero rows dropped.
///
/// The result is a basis of the module generated by the input rows.
pub fn hermite_basis(rows: &[Vec<BigInt>]) -> IntMatrix {
    if rows.is_empty() {
        return Vec::new();
    }
    let cols = rows[0].len();
    let mut a: IntMatrix = rows.to_vec();
    let mut r = 0;
    for c in 0..cols {
        loop {
            // smallest nonzero |entry| in column c at or below r
            let pivot = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(p) = pivot else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                for j in c..cols {
                    let v = &q * &a[r][j];
                    a[i][j] -= v;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < a.len() && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                for x in a[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let q = a[i][c].div_floor(&a[r][c]);
                if !q.is_zero() {
                    for j in c..cols {
                        let v = &q * &a[r][j];
                        a[i][j] -= v;
                    }
                }
            }
            r += 1;
        }
        if r == a.len() {
            break;
        }
    }
    a.truncate(r);
    a
}

/// Basis (as columns packed into rows of the result) of the saturated integer
/// kernel `{x ∈ Zⁿ : A·x = 0}`.
pub fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    if a.is_empty() {
        return transpose(&identity(n));
    }
    let snf = crate::snf::smith_normal_form(a);
    let nonzero = snf.diag.iter().filter(|d| !d.is_zero()).count();
    let right_t = transpose(&snf.right);
    right_t[nonzero..].to_vec()
}

pub fn gcd_all<'a, I: IntoIterator<Item = &'a BigInt>>(it: I) -> BigInt {
    it.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Unimodular matrix whose first column is the primitive vector `v`.
pub fn complete_to_basis(v: &[BigInt]) -> IntMatrix {
    let col: IntMatrix = v.iter().map(|x| vec![x.clone()]).collect();
    let snf = crate::snf::smith_normal_form(&col);
    debug_assert!(snf.diag[0].is_one());
    // left · v · right = e₁ with right = ±1, so v = left⁻¹ · e₁ · right⁻¹
    let mut basis = unimodular_inverse(&snf.left);
    if snf.right[0][0].is_negative() {
        for row in basis.iter_mut() {
            row[0] = -row[0].clone();
        }
    }
    basis
}
