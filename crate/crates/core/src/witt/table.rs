//! Universal Witt addition and multiplication polynomials.
//!
//! `S_i` and `P_i` are solved from the ghost components
//! `w_i(x) = sum_{j<=i} p^j x_j^(p^(i-j))` over the integers. Variables are
//! numbered `a_0..a_{n-1}` then `b_0..b_{n-1}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::WittError;
use crate::fields::Ring;

/// Sparse multivariate polynomial with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    nvars: usize,
    terms: HashMap<Vec<u32>, BigInt>,
}

impl IntPoly {
    pub fn zero(nvars: usize) -> Self {
        IntPoly { nvars, terms: HashMap::new() }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut out = Self::zero(nvars);
        out.add_term(vec![0; nvars], c);
        out
    }

    /// `c * x_var^exp`.
    pub fn monomial(nvars: usize, var: usize, exp: u32, c: BigInt) -> Self {
        let mut mono = vec![0; nvars];
        mono[var] = exp;
        let mut out = Self::zero(nvars);
        out.add_term(mono, c);
        out
    }

    fn add_term(&mut self, mono: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms sorted by exponent vector.
    pub fn terms(&self) -> Vec<(Vec<u32>, BigInt)> {
        let mut out: Vec<_> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        out.sort();
        out
    }

    pub fn coeff(&self, mono: &[u32]) -> BigInt {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    pub fn add_scaled(&mut self, other: &IntPoly, scale: &BigInt) {
        for (m, c) in &other.terms {
            let slot = self.terms.entry(m.clone()).or_insert_with(BigInt::zero);
            *slot += c * scale;
        }
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut terms: HashMap<Vec<u32>, BigInt> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mono: Vec<u32> = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                *terms.entry(mono).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        IntPoly { nvars: self.nvars, terms }
    }

    pub fn pow(&self, mut e: u64) -> IntPoly {
        let mut acc = IntPoly::constant(self.nvars, BigInt::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division of every coefficient; fails if any remainder is nonzero.
    fn div_exact(&mut self, d: &BigInt) -> Result<(), WittError> {
        for c in self.terms.values_mut() {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(WittError::InexactDivision);
            }
            *c = q;
        }
        Ok(())
    }

    pub fn eval_int(&self, point: &[BigInt]) -> BigInt {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(point)
                    .fold(c.clone(), |acc, (&e, x)| acc * x.pow(e))
            })
            .sum()
    }

    /// Evaluates with coefficients reduced mod `p` into a characteristic-`p`
    /// ring. `point` has one entry per variable.
    pub fn eval_ring<R: Ring>(&self, point: &[R]) -> R {
        let p = BigInt::from(point[0].characteristic());
        let zero = point[0].zero_like();
        let mut powers: Vec<HashMap<u32, R>> = vec![HashMap::new(); self.nvars];
        let mut acc = zero.clone();
        for (mono, c) in &self.terms {
            let c = c.mod_floor(&p).to_i64().expect("residue fits");
            if c == 0 {
                continue;
            }
            let mut term = zero.from_int_like(c);
            for (v, &e) in mono.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = powers[v].entry(e).or_insert_with(|| point[v].pow(e as u64));
                term = term * pw.clone();
            }
            acc = acc + term;
        }
        acc
    }
}

/// Ghost component `w_i` of the variables `offset..offset+i`.
fn ghost(nvars: usize, p: u64, offset: usize, i: usize) -> IntPoly {
    let mut g = IntPoly::zero(nvars);
    for j in 0..=i {
        let exp = p.pow((i - j) as u32) as u32;
        g.add_scaled(&IntPoly::monomial(nvars, offset + j, exp, BigInt::from(p).pow(j as u32)), &BigInt::one());
    }
    g
}

fn ghost_int(p: &BigInt, xs: &[BigInt], i: usize) -> BigInt {
    (0..=i)
        .map(|j| p.pow(j as u32) * xs[j].pow(p.to_u32().unwrap().pow((i - j) as u32)))
        .sum()
}

/// Universal Witt polynomials for `W_n` at the prime `p`.
#[derive(Debug, Clone)]
pub struct WittPolyTable {
    pub p: u32,
    pub n: usize,
    pub sum_polys: Vec<IntPoly>,
    pub prod_polys: Vec<IntPoly>,
}

/// Symbolic verification is skipped above this length.
pub const SYMBOLIC_CHECK_MAX_LEN: usize = 4;

impl WittPolyTable {
    /// Builds and verifies the table. Prefer [`build_witt_table`], which
    /// caches.
    pub fn build(p: u32, n: usize) -> Result<WittPolyTable, WittError> {
        if n == 0 {
            return Err(WittError::ZeroLength);
        }
        let nv = 2 * n;
        let pp = p as u64;
        let pb = BigInt::from(p);
        let solve = |combine: &dyn Fn(usize) -> IntPoly| -> Result<Vec<IntPoly>, WittError> {
            let mut polys: Vec<IntPoly> = Vec::with_capacity(n);
            // powers[j] holds polys[j]^(p^(i-j)) for the current i
            let mut powers: Vec<IntPoly> = Vec::with_capacity(n);
            for i in 0..n {
                let target = combine(i);
                let mut lower = IntPoly::zero(nv);
                for (j, pw) in powers.iter_mut().enumerate() {
                    *pw = pw.pow(pp);
                    lower.add_scaled(pw, &pb.pow(j as u32));
                }
                let mut next = target.clone();
                next.add_scaled(&lower, &-BigInt::one());
                next.div_exact(&pb.pow(i as u32))?;
                if n <= SYMBOLIC_CHECK_MAX_LEN {
                    lower.add_scaled(&next, &pb.pow(i as u32));
                    if lower != target {
                        return Err(WittError::GhostIdentity { index: i });
                    }
                }
                powers.push(next.clone());
                polys.push(next);
            }
            Ok(polys)
        };
        let sum_polys = solve(&|i| {
            let mut g = ghost(nv, pp, 0, i);
            g.add_scaled(&ghost(nv, pp, n, i), &BigInt::one());
            g
        })?;
        let prod_polys = solve(&|i| ghost(nv, pp, 0, i).mul(&ghost(nv, pp, n, i)))?;
        let table = WittPolyTable { p, n, sum_polys, prod_polys };
        table.check_random_points(100, 0x5eed)?;
        Ok(table)
    }

    /// Checks the ghost identities at random integer points.
    pub fn check_random_points(&self, count: usize, seed: u64) -> Result<(), WittError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pb = BigInt::from(self.p);
        for _ in 0..count {
            let point: Vec<BigInt> =
                (0..2 * self.n).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect();
            let (a, b) = point.split_at(self.n);
            let sums: Vec<BigInt> = self.sum_polys.iter().map(|s| s.eval_int(&point)).collect();
            let prods: Vec<BigInt> = self.prod_polys.iter().map(|s| s.eval_int(&point)).collect();
            for i in 0..self.n {
                let (ga, gb) = (ghost_int(&pb, a, i), ghost_int(&pb, b, i));
                if ghost_int(&pb, &sums, i) != &ga + &gb || ghost_int(&pb, &prods, i) != ga * gb {
                    return Err(WittError::GhostIdentity { index: i });
                }
            }
        }
        Ok(())
    }

    /// Applies the table to coordinate vectors over a characteristic-`p` ring.
    pub fn eval<R: Ring>(&self, a: &[R], b: &[R]) -> (Vec<R>, Vec<R>) {
        let point: Vec<R> = a.iter().chain(b).cloned().collect();
        (
            self.sum_polys.iter().map(|s| s.eval_ring(&point)).collect(),
            self.prod_polys.iter().map(|s| s.eval_ring(&point)).collect(),
        )
    }
}

/// Cached table for `(p, n)`; concurrent callers share the first build.
pub fn build_witt_table(p: u32, n: usize) -> Result<Arc<WittPolyTable>, WittError> {
    type Cache = Mutex<HashMap<(u32, usize), Arc<OnceLock<Result<Arc<WittPolyTable>, WittError>>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cell = {
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
        map.entry((p, n)).or_default().clone()
    };
    cell.get_or_init(|| WittPolyTable::build(p, n).map(Arc::new)).clone()
}

/// Coefficients of the Teichmüller sums `sigma_i(x, y) = S_i(x,0,..;y,0,..)`,
/// reduced mod `p`. Row `i` lists `(c, k)` for the terms `c x^k y^(p^i-k)`.
#[derive(Debug, Clone)]
pub struct TeichmullerSums {
    pub p: u32,
    pub rows: Vec<Vec<(u32, u32)>>,
}

impl TeichmullerSums {
    fn build(p: u32, n: usize) -> TeichmullerSums {
        let pb = BigInt::from(p);
        let pp = p as u64;
        let mut powers: Vec<IntPoly> = Vec::new();
        let mut rows = Vec::new();
        for i in 0..n {
            let deg = pp.pow(i as u32) as u32;
            let mut next = IntPoly::monomial(2, 0, deg, BigInt::one());
            next.add_scaled(&IntPoly::monomial(2, 1, deg, BigInt::one()), &BigInt::one());
            for (j, pw) in powers.iter_mut().enumerate() {
                *pw = pw.pow(pp);
                next.add_scaled(pw, &-pb.pow(j as u32));
            }
            next.div_exact(&pb.pow(i as u32)).expect("Teichmüller sums are integral");
            let mut row: Vec<(u32, u32)> = next
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let r = c.mod_floor(&pb).to_u32().unwrap();
                    (r != 0).then_some((r, m[0]))
                })
                .collect();
            row.sort_by_key(|&(_, k)| k);
            rows.push(row);
            powers.push(next);
        }
        TeichmullerSums { p, rows }
    }

    /// Teichmüller-sum coefficients for `(p, n)`, cached.
    pub fn get(p: u32, n: usize) -> Arc<TeichmullerSums> {
        type Cache = Mutex<HashMap<u32, Arc<TeichmullerSums>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
        let entry = map.entry(p).or_insert_with(|| Arc::new(TeichmullerSums::build(p, n)));
        if entry.rows.len() < n {
            *entry = Arc::new(TeichmullerSums::build(p, n));
        }
        entry.clone()
    }

    /// `(sigma_0(x,y), .., sigma_{n-1}(x,y))` in the ring of `x`.
    pub fn eval<R: Ring>(&self, x: &R, y: &R, n: usize) -> Vec<R> {
        let top = (self.p as usize).pow(n as u32 - 1);
        let mut xp = Vec::with_capacity(top + 1);
        let mut yp = Vec::with_capacity(top + 1);
        xp.push(x.one_like());
        yp.push(x.one_like());
        for k in 1..=top {
            xp.push(xp[k - 1].clone() * x.clone());
            yp.push(yp[k - 1].clone() * y.clone());
        }
        self.rows[..n]
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let deg = (self.p as usize).pow(i as u32);
                row.iter().fold(x.zero_like(), |acc, &(c, k)| {
                    let k = k as usize;
                    acc + x.from_int_like(c as i64) * xp[k].clone() * yp[deg - k].clone()
                })
            })
            .collect()
    }
}
