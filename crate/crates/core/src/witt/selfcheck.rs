//! Randomised check of the Witt-vector relations, used by the
//! `witt selfcheck` subcommand.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{build_witt_table, serre_d, WittError, WittVec};
use crate::fields::{FieldElement, PrimeSpec, Ring, TruncatedDiffElem};

#[derive(Debug, Clone)]
pub struct SelfcheckConfig {
    pub p: u32,
    pub deg: usize,
    pub len: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct RelationResult {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
}

impl RelationResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally(Vec<RelationResult>);

impl Tally {
    fn record(&mut self, name: &'static str, ok: bool) {
        let slot = match self.0.iter().position(|r| r.name == name) {
            Some(i) => &mut self.0[i],
            None => {
                self.0.push(RelationResult { name, checked: 0, failures: 0 });
                self.0.last_mut().unwrap()
            }
        };
        slot.checked += 1;
        if !ok {
            slot.failures += 1;
        }
    }
}

fn random_vec<R: Ring>(n: usize, mut draw: impl FnMut() -> R) -> WittVec<R> {
    WittVec::new((0..n).map(|_| draw()).collect()).expect("n >= 1")
}

/// Largest `p^(n-1)` for which the full polynomial table is cross-checked.
const TABLE_CHECK_LIMIT: u64 = 125;

/// Truncated-ring samples are costlier; at most this many per run.
const SERRE_SAMPLES_CAP: usize = 200;

/// Runs every relation on `samples` random vectors in `W_len(F_{p^deg})`,
/// and the Serre-map relations over `F_p[x]/(x^(p^2+1))`.
pub fn selfcheck(cfg: &SelfcheckConfig) -> Result<Vec<RelationResult>, WittError> {
    let spec = PrimeSpec::extension(cfg.p, cfg.deg)?;
    if cfg.len == 0 {
        return Err(WittError::ZeroLength);
    }
    let n = cfg.len;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tally = Tally(Vec::new());
    let template = spec.zero();
    let one = WittVec::one_like(&template, n);
    let zero = WittVec::zero_like(&template, n);
    let table = if (cfg.p as u64).pow(n as u32 - 1) <= TABLE_CHECK_LIMIT {
        Some(build_witt_table(cfg.p, n)?)
    } else {
        None
    };
    let p = cfg.p as u64;

    for _ in 0..cfg.samples {
        let mut draw = || spec.random(&mut rng);
        let a: WittVec<FieldElement> = random_vec(n, &mut draw);
        let b = random_vec(n, &mut draw);
        let c = random_vec(n, &mut draw);
        let long = random_vec(n + 1, &mut draw);

        let ab = a.add(&b)?;
        tally.record("add associative", ab.add(&c)? == a.add(&b.add(&c)?)?);
        tally.record("add commutative", ab == b.add(&a)?);
        tally.record("add identity", a.add(&zero)? == a);
        tally.record("add inverse", a.add(&a.neg())? == zero);
        let m_ab = a.mul(&b)?;
        tally.record("mul associative", m_ab.mul(&c)? == a.mul(&b.mul(&c)?)?);
        tally.record("mul commutative", m_ab == b.mul(&a)?);
        tally.record("mul identity", a.mul(&one)? == a);
        tally.record("distributive", a.mul(&b.add(&c)?)? == m_ab.add(&a.mul(&c)?)?);

        let pa = a.mul_int(p);
        tally.record("RVF = p", a.frobenius().verschiebung().restrict()? == pa);
        tally.record("FRV = p", a.verschiebung().restrict()?.frobenius() == pa);
        tally.record("RFV = p", a.verschiebung().frobenius().restrict()? == pa);
        // a lifted to length n + 1 with an arbitrary last coordinate
        let mut lifted = a.coords().to_vec();
        lifted.push(spec.random(&mut rng));
        let p_lift = WittVec::new(lifted)?.mul_int(p);
        let fv = a.verschiebung().frobenius();
        let vf = a.frobenius().verschiebung();
        tally.record("FV = VF = p", fv == vf && vf == p_lift);
        tally.record("F additive", ab.frobenius() == a.frobenius().add(&b.frobenius())?);
        tally.record("F multiplicative", m_ab.frobenius() == a.frobenius().mul(&b.frobenius())?);
        tally.record("V additive", ab.verschiebung() == a.verschiebung().add(&b.verschiebung())?);
        let projection = long.frobenius().truncate(n).mul(&b)?.verschiebung();
        tally.record("V(F(a) b) = a V(b)", projection == long.mul(&b.verschiebung())?);

        if let Some(table) = &table {
            let (s, m) = a.add_mul_via_table(&b, table)?;
            tally.record("table agreement", s == ab && m == m_ab);
        }
    }

    let prime = PrimeSpec::prime_field(cfg.p).expect("validated above");
    let m = (cfg.p * cfg.p + 1) as usize;
    for _ in 0..cfg.samples.min(SERRE_SAMPLES_CAP) {
        let mut draw = || TruncatedDiffElem::random(prime, m, &mut rng);
        let a = random_vec(n, &mut draw);
        let b = random_vec(n, &mut draw);
        tally.record("D additive", serre_d(&a.add(&b)?) == serre_d(&a) + serre_d(&b));
        tally.record("D V = D", serre_d(&a.verschiebung()) == serre_d(&a));
        tally.record("D F = 0", serre_d(&a.frobenius()).is_zero());
    }
    Ok(tally.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_selfcheck_passes() {
        for (p, deg, len) in [(3, 1, 2), (3, 2, 3), (5, 1, 2)] {
            let results = selfcheck(&SelfcheckConfig { p, deg, len, samples: 20, seed: 1 }).unwrap();
            assert!(results.iter().all(|r| r.passed()), "{results:?}");
            assert!(results.iter().any(|r| r.name == "table agreement"));
        }
    }
}
