//! Oracles computed with plain integer arithmetic, independent of the
//! library's field and Witt code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// `w_k(a) = sum_(i <= k) p^i a_i^(p^(k-i))` for `k < a.len()`.
pub fn ghost(p: u32, a: &[BigInt]) -> Vec<BigInt> {
    let pb = BigInt::from(p);
    (0..a.len())
        .map(|k| {
            (0..=k)
                .map(|i| pb.pow(i as u32) * a[i].pow(p.pow((k - i) as u32)))
                .fold(BigInt::zero(), |acc, t| acc + t)
        })
        .collect()
}

/// Integer Witt coordinates with the given ghost components, by exact
/// division; panics if a division is inexact.
pub fn from_ghost(p: u32, w: &[BigInt]) -> Vec<BigInt> {
    let pb = BigInt::from(p);
    let mut out: Vec<BigInt> = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        let lower = (0..k)
            .map(|i| pb.pow(i as u32) * out[i].pow(p.pow((k - i) as u32)))
            .fold(BigInt::zero(), |acc, t| acc + t);
        let (q, r) = (&w[k] - lower).div_rem(&pb.pow(k as u32));
        assert!(r.is_zero(), "inexact ghost division at index {k}");
        out.push(q);
    }
    out
}

/// Sum and product in `W_n(F_p)` of coordinates given as residues in
/// `0..p`, via integer lifts and ghost components.
pub fn ghost_add_mul(p: u32, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let lift = |v: &[u64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    let (ga, gb) = (ghost(p, &lift(a)), ghost(p, &lift(b)));
    let sum: Vec<BigInt> = ga.iter().zip(&gb).map(|(x, y)| x + y).collect();
    let prod: Vec<BigInt> = ga.iter().zip(&gb).map(|(x, y)| x * y).collect();
    let reduce = |v: Vec<BigInt>| -> Vec<u64> {
        v.iter()
            .map(|x| {
                let r = x.mod_floor(&BigInt::from(p));
                r.to_u64_digits().1.first().copied().unwrap_or(0)
            })
            .collect()
    };
    (reduce(from_ghost(p, &sum)), reduce(from_ghost(p, &prod)))
}

/// Legendre symbol by Euler's criterion on integers.
pub fn legendre(x: i64, p: i64) -> i64 {
    let x = x.rem_euclid(p);
    if x == 0 {
        return 0;
    }
    let mut acc = 1i64;
    let (mut base, mut e) = (x, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// `#E(F_p)` for `y^2 = x^3 + a x + b`.
pub fn elliptic_count(p: i64, a: i64, b: i64) -> i64 {
    1 + (0..p).map(|x| 1 + legendre(x * x * x + a * x + b, p)).sum::<i64>()
}

/// Coefficient of `x^(p-1)` in `(x^3 + a x + b)^((p-1)/2)` mod `p`.
pub fn hasse_invariant(p: i64, a: i64, b: i64) -> i64 {
    let cubic = [b.rem_euclid(p), a.rem_euclid(p), 0, 1];
    let mut acc = vec![1i64];
    for _ in 0..(p - 1) / 2 {
        let mut next = vec![0i64; acc.len() + 3];
        for (i, &x) in acc.iter().enumerate() {
            for (j, &y) in cubic.iter().enumerate() {
                next[i + j] = (next[i + j] + x * y) % p;
            }
        }
        acc = next;
    }
    acc.get((p - 1) as usize).copied().unwrap_or(0)
}

/// Sanity check of the ghost oracle on `W_n(F_p) ≅ Z/p^n`: the vector
/// `(1, 0, ..)` added to itself `p` times is `(0, 1, 0, ..)`.
pub fn ghost_self_test(p: u32, n: usize) -> bool {
    let mut one = vec![0u64; n];
    one[0] = 1;
    let mut acc = vec![0u64; n];
    for _ in 0..p {
        acc = ghost_add_mul(p, &acc, &one).0;
    }
    let mut expected = vec![0u64; n];
    if n > 1 {
        expected[1] = 1;
    }
    acc == expected
}
