//! Named lattices that recur throughout the fixtures.

use crate::lattice::Lattice;

/// `[[0,2],[2,-2]] ⊕ [[-4,-2],[-2,-4]]`, rank 4, determinant −48.
pub fn l1() -> Lattice {
    Lattice::new(vec![
        vec![0, 2, 0, 0],
        vec![2, -2, 0, 0],
        vec![0, 0, -4, -2],
        vec![0, 0, -2, -4],
    ])
    .unwrap()
    .with_label("L1")
}

/// Rank 5, determinant 96.
pub fn l2() -> Lattice {
    Lattice::new(vec![
        vec![0, 2, 0, 0, 0],
        vec![2, -2, 1, 0, 0],
        vec![0, 1, -2, 0, 0],
        vec![0, 0, 0, -4, -2],
        vec![0, 0, 0, -2, -4],
    ])
    .unwrap()
    .with_label("L2")
}

/// `[[0,n],[n,-2k]]`.
pub fn binary(n: i64, k: i64) -> Lattice {
    Lattice::new(vec![vec![0, n], vec![n, -2 * k]])
        .unwrap()
        .with_label(format!("B({n},{k})"))
}

/// `U ⊕ W`.
pub fn u_plus(w: &Lattice) -> Lattice {
    let l = Lattice::hyperbolic_plane().direct_sum(w);
    match w.label() {
        Some(name) => l.with_label(format!("U+{name}")),
        None => l,
    }
}
