//! Brute-force values of `H` by exact enumeration of the coset `nu + N`.
//!
//! Points `y = x + nu` are handled through `z = 2y`, an integral vector with
//! `z = w (mod 2)`, so `Q(y) = z^T G z / 4`. Bounds come from the adjugate of
//! `G` and integer square roots; nothing is rounded.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::primes_up_to;
use crate::coset::CosetInstance;
use crate::error::{Error, Result};

/// Default cap on the number of lattice points visited by [`spectrum`].
pub const DEFAULT_BUDGET: u64 = 2_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectrumConfig {
    pub budget: u64,
    pub parallel: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { budget: DEFAULT_BUDGET, parallel: true }
    }
}

/// Which `t` in `0..=bound` are values of `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bound: u64,
    words: Vec<u64>,
    pub exceptions: Vec<u64>,
    /// Lattice points visited.
    pub vectors: u64,
}

impl Spectrum {
    pub fn represented(&self, t: u64) -> bool {
        t <= self.bound && self.words[(t / 64) as usize] >> (t % 64) & 1 == 1
    }

    /// Exceptions in `(lo, hi]`.
    pub fn exceptions_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        self.exceptions.iter().copied().filter(move |&t| t > lo && t <= hi)
    }

    /// Largest distance between consecutive exceptions, counting from 0.
    pub fn largest_gap(&self) -> u64 {
        let mut prev = 0;
        let mut best = 0;
        for &e in &self.exceptions {
            best = best.max(e - prev);
            prev = e;
        }
        best
    }
}

/// `G` and the parity class of `z`, in native integers.
struct Enumerator {
    g: [[i128; 3]; 3],
    parity: [i128; 3],
    det: i128,
}

/// Conservative check that every intermediate of the bounds fits in `i128`.
fn fits(max_entry: &BigInt, max_norm: &BigInt) -> bool {
    let k = max_entry.bits() + 1;
    let m = max_norm.bits() + 1;
    m + 4 * k + 6 <= 126
}

impl Enumerator {
    fn new(inst: &CosetInstance, max_norm: &BigInt) -> Result<Self> {
        let max_entry = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| inst.gram.entry(i, j).abs())
            .max()
            .expect("3x3");
        if !fits(&max_entry, max_norm) {
            return Err(Error::Overflow(format!("Gram entries up to {max_entry} with norms up to {max_norm}")));
        }
        let mut g = [[0i128; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = inst.gram.entry(i, j).to_i128().expect("checked");
            }
        }
        let parity = [0, 1, 2].map(|i| inst.w[i].mod_floor(&BigInt::from(2)).to_i128().expect("bit"));
        let det = inst.det.to_i128().expect("checked");
        Ok(Enumerator { g, parity, det })
    }

    fn norm(&self, z: [i128; 3]) -> i128 {
        let g = &self.g;
        let mut s = 0;
        for i in 0..3 {
            for j in 0..3 {
                s += z[i] * g[i][j] * z[j];
            }
        }
        s
    }

    /// Values of `z_1` with a completion of norm at most `m`.
    fn first_coords(&self, m: i128) -> Vec<i128> {
        let g = &self.g;
        let adj11 = g[1][1] * g[2][2] - g[1][2] * g[1][2];
        let r = (m * adj11 / self.det).sqrt();
        aligned(-r, r, self.parity[0]).collect()
    }

    /// Calls `f(z, Q(z))` for each `z` in the parity class with the given
    /// first coordinate and `Q(z) <= m` (or `= m` when `exact`). Stops when
    /// `f` returns false; returns false in that case. `steps` counts the
    /// `(z_1, z_2)` prefixes examined.
    fn walk<F: FnMut([i128; 3], i128) -> bool>(
        &self,
        z1: i128,
        m: i128,
        exact: bool,
        steps: &mut u64,
        f: &mut F,
    ) -> bool {
        let g = &self.g;
        let a = g[1][1] * g[2][2] - g[1][2] * g[1][2];
        let bz = z1 * (g[0][1] * g[2][2] - g[0][2] * g[1][2]);
        let cz = z1 * z1 * (g[0][0] * g[2][2] - g[0][2] * g[0][2]);
        let d2 = bz * bz - a * (cz - g[2][2] * m);
        if d2 < 0 {
            return true;
        }
        let (lo, hi) = centered_range(a, bz, d2.sqrt());
        for z2 in aligned(lo, hi, self.parity[1]) {
            *steps += 1;
            let b = g[0][2] * z1 + g[1][2] * z2;
            let c = g[0][0] * z1 * z1 + 2 * g[0][1] * z1 * z2 + g[1][1] * z2 * z2;
            let d3 = b * b - g[2][2] * (c - m);
            if d3 < 0 {
                continue;
            }
            let s = d3.sqrt();
            if exact {
                if s * s != d3 {
                    continue;
                }
                // g33 z3 + b = +-s
                let mut roots = vec![s - b];
                if s != 0 {
                    roots.push(-s - b);
                }
                for r in roots {
                    if r % g[2][2] == 0 {
                        let z3 = r / g[2][2];
                        let z = [z1, z2, z3];
                        if (z3 - self.parity[2]).rem_euclid(2) == 0 && self.norm(z) == m && !f(z, m) {
                            return false;
                        }
                    }
                }
            } else {
                let (lo, hi) = centered_range(g[2][2], b, s);
                for z3 in aligned(lo, hi, self.parity[2]) {
                    let n = c + 2 * b * z3 + g[2][2] * z3 * z3;
                    debug_assert!(n <= m);
                    if !f([z1, z2, z3], n) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Integers `z` with `|a z + b| <= s`, for `a > 0`.
fn centered_range(a: i128, b: i128, s: i128) -> (i128, i128) {
    (-Integer::div_floor(&(b + s), &a), Integer::div_floor(&(s - b), &a))
}

/// `lo..=hi` restricted to one parity class.
fn aligned(lo: i128, hi: i128, parity: i128) -> impl Iterator<Item = i128> {
    let start = if (lo - parity).rem_euclid(2) == 0 { lo } else { lo + 1 };
    (start..=hi).step_by(2)
}

fn to_big(z: [i128; 3]) -> [BigInt; 3] {
    z.map(BigInt::from)
}

/// All `z = 2y`, `y` in `nu + N`, with `Q(y) = m`. Coordinates are doubled.
pub fn shell_vectors(inst: &CosetInstance, m: &BigInt) -> Result<Vec<[BigInt; 3]>> {
    if !m.is_positive() {
        return Err(Error::PreconditionViolated(format!("shell norm must be positive, got {m}")));
    }
    let target: BigInt = m * 4;
    let en = Enumerator::new(inst, &target)?;
    let t = target.to_i128().expect("checked");
    let mut out = Vec::new();
    let mut steps = 0;
    for z1 in en.first_coords(t) {
        en.walk(z1, t, true, &mut steps, &mut |z, _| {
            out.push(to_big(z));
            true
        });
    }
    Ok(out)
}

/// Outcome of a budgeted search for one value of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellSearch {
    pub witness: Option<[BigInt; 3]>,
    pub steps: u64,
    /// The budget ran out before the search finished.
    pub exhausted: bool,
}

/// Looks for `x` with `H(x) = t`, examining at most `budget` prefixes.
pub fn h_witness_budgeted(inst: &CosetInstance, t: &BigInt, budget: u64) -> Result<ShellSearch> {
    let m = (t << inst.alpha) + &inst.q_nu;
    let mut out = ShellSearch { witness: None, steps: 0, exhausted: false };
    if !m.is_positive() {
        return Ok(out);
    }
    let target: BigInt = &m * 4;
    let en = Enumerator::new(inst, &target)?;
    let tm = target.to_i128().expect("checked");
    let mut found = None;
    for z1 in en.first_coords(tm) {
        en.walk(z1, tm, true, &mut out.steps, &mut |z, _| {
            found = Some(z);
            false
        });
        if let Some(z) = found {
            out.witness = Some([0, 1, 2].map(|i| (BigInt::from(z[i]) - &inst.w[i]) / 2));
            return Ok(out);
        }
        if out.steps > budget {
            out.exhausted = true;
            return Ok(out);
        }
    }
    Ok(out)
}

/// Some `x` with `H(x) = t`, if any.
pub fn h_witness(inst: &CosetInstance, t: &BigInt) -> Result<Option<[BigInt; 3]>> {
    Ok(h_witness_budgeted(inst, t, u64::MAX)?.witness)
}

pub fn represents_h(inst: &CosetInstance, t: &BigInt) -> Result<bool> {
    Ok(h_witness(inst, t)?.is_some())
}

/// Values of `H` in `0..=bound`, from one pass over `Q(y) <= 2^alpha bound + Q(nu)`.
pub fn spectrum(inst: &CosetInstance, bound: u64, cfg: &SpectrumConfig) -> Result<Spectrum> {
    if bound == 0 {
        return Err(Error::PreconditionViolated("bound must be positive".into()));
    }
    let scale: BigInt = BigInt::one() << (inst.alpha + 2);
    let qw: BigInt = &inst.q_nu * 4;
    let max = &scale * bound + &qw;
    let en = Enumerator::new(inst, &max)?;
    let m = max.to_i128().expect("checked");
    let qw = qw.to_i128().expect("checked");
    let scale = scale.to_i128().expect("checked");
    let nwords = (bound / 64 + 1) as usize;

    let visited = AtomicU64::new(0);
    let over = AtomicBool::new(false);
    let run = |z1: i128| -> Vec<u64> {
        let mut words = vec![0u64; nwords];
        let mut local = 0u64;
        let mut steps = 0;
        en.walk(z1, m, false, &mut steps, &mut |_, n| {
            let d = n - qw;
            if d >= 0 {
                let t = (d / scale) as u64;
                words[(t / 64) as usize] |= 1 << (t % 64);
            }
            local += 1;
            if local.is_multiple_of(4096) {
                let total = visited.fetch_add(4096, Ordering::Relaxed) + 4096;
                if total > cfg.budget {
                    over.store(true, Ordering::Relaxed);
                }
                return !over.load(Ordering::Relaxed);
            }
            true
        });
        visited.fetch_add(local % 4096, Ordering::Relaxed);
        words
    };
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(&b).for_each(|(x, y)| *x |= y);
        a
    };
    let firsts = en.first_coords(m);
    let words = if cfg.parallel {
        firsts.into_par_iter().map(run).reduce(|| vec![0u64; nwords], merge)
    } else {
        firsts.into_iter().map(run).fold(vec![0u64; nwords], merge)
    };
    let vectors = visited.load(Ordering::Relaxed);
    if over.load(Ordering::Relaxed) || vectors > cfg.budget {
        return Err(Error::EnumerationBudgetExceeded { budget: cfg.budget });
    }
    let mut spec = Spectrum { bound, words, exceptions: Vec::new(), vectors };
    spec.exceptions = (0..=bound).filter(|&t| !spec.represented(t)).collect();
    Ok(spec)
}

/// Candidate exception from a prime `q`, paired with it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissCandidate {
    pub q: u64,
    pub n: BigInt,
}

/// `(rad q^2 - eps) / 2^k` for odd primes `q <= q_limit` not dividing `det`,
/// kept when integral and positive.
pub fn miss_candidates(rad_odd: &BigInt, epsilon: &BigInt, k: u32, det: &BigInt, q_limit: u64) -> Vec<MissCandidate> {
    let d = BigInt::one() << k;
    primes_up_to(q_limit)
        .into_iter()
        .filter(|&q| q != 2 && !(det % q).is_zero())
        .filter_map(|q| {
            let num = rad_odd * q * q - epsilon;
            let (n, r) = num.div_rem(&d);
            (r.is_zero() && n.is_positive()).then_some(MissCandidate { q, n })
        })
        .collect()
}

/// The progression of integers expected to be missed on the branch where
/// clauses (2) and (3) fail. `on_branch` states whether the caller's verdict
/// reached that branch.
pub fn predicted_misses(inst: &CosetInstance, on_branch: bool, q_limit: u64) -> Result<Vec<MissCandidate>> {
    let k = inst.alpha - inst.beta;
    if !on_branch || !(k == 2 || k == 3) {
        return Err(Error::PreconditionViolated(
            "predicted misses exist only when clause (4) was reached and failed".into(),
        ));
    }
    Ok(miss_candidates(&inst.rad_odd, &inst.epsilon, k, &inst.det, q_limit))
}

/// Exceptions among the candidates, decided against `spec` when in range and
/// by a shell search otherwise.
pub fn confirmed_misses(inst: &CosetInstance, spec: &Spectrum, cands: &[MissCandidate]) -> Result<Vec<MissCandidate>> {
    let mut out = Vec::new();
    for c in cands {
        let missed = match c.n.to_u64() {
            Some(n) if n <= spec.bound => !spec.represented(n),
            _ => !represents_h(inst, &c.n)?,
        };
        if missed {
            out.push(c.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::FactorConfig;
    use crate::coset::{normalize, InstanceInput};

    fn inst(gram: [i64; 6], w: [i64; 3]) -> CosetInstance {
        normalize(&InstanceInput::lattice(gram, w), &FactorConfig::default()).unwrap()
    }

    fn triangular() -> CosetInstance {
        inst([4, 0, 0, 4, 0, 4], [1, 1, 1])
    }

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn shells() {
        let t = triangular();
        let s3 = shell_vectors(&t, &bi(3)).unwrap();
        assert_eq!(s3.len(), 8);
        assert!(s3.iter().all(|z| z.iter().all(|c| c.abs() == bi(1))));
        assert!(shell_vectors(&t, &bi(1)).unwrap().is_empty());
        let s11 = shell_vectors(&t, &bi(11)).unwrap();
        assert_eq!(s11.len(), 24);
        for z in &s11 {
            let mut a: Vec<BigInt> = z.iter().map(|c| c.abs()).collect();
            a.sort();
            assert_eq!(a, vec![bi(1), bi(1), bi(3)]);
            let neg = [-&z[0], -&z[1], -&z[2]];
            assert!(s11.contains(&neg));
        }
    }

    #[test]
    fn witnesses() {
        let t = triangular();
        let x = h_witness(&t, &bi(10)).unwrap().unwrap();
        assert_eq!(t.eval_h(&x), bi(10));
        assert!(represents_h(&t, &bi(0)).unwrap());
        let d = inst([2, 0, 0, 2, 0, 18], [1, 1, 0]);
        assert!(!represents_h(&d, &bi(1)).unwrap());
        assert!(represents_h(&d, &bi(0)).unwrap());
        assert!(!represents_h(&d, &bi(-5)).unwrap());
    }

    #[test]
    fn negative_values() {
        // H(x) = (Q(x) + 2B(nu, x)) / 2, nu = (1/2, 0, 0) on <2, 2, 2>: H(-1, 0, 0) = (2 - 2)/2 = 0,
        // and with w = (3, 1, 0), Q(nu) = 5 while H(-1, 0, 0) = (2 - 6) / 2 = -2
        let d = inst([2, 0, 0, 2, 0, 2], [3, 1, 0]);
        assert_eq!(d.eval_h(&crate::lattice::vec_i64(&[-1, 0, 0])), bi(-2));
        assert!(represents_h(&d, &bi(-2)).unwrap());
    }

    #[test]
    fn small_spectra() {
        let t = spectrum(&triangular(), 30, &SpectrumConfig::default()).unwrap();
        assert!(t.exceptions.is_empty());
        let d = spectrum(&inst([2, 0, 0, 2, 0, 18], [1, 1, 0]), 30, &SpectrumConfig::default()).unwrap();
        assert!(d.exceptions.contains(&1));
        assert!(d.represented(0));
        let one = spectrum(&triangular(), 1, &SpectrumConfig::default()).unwrap();
        assert!(one.represented(0));
    }

    #[test]
    fn budget() {
        let cfg = SpectrumConfig { budget: 100, parallel: true };
        assert_eq!(
            spectrum(&triangular(), 10_000, &cfg).unwrap_err(),
            Error::EnumerationBudgetExceeded { budget: 100 }
        );
    }

    #[test]
    fn candidates() {
        let det = bi(64);
        let c = miss_candidates(&bi(1), &bi(1), 2, &det, 3);
        assert_eq!(c, vec![MissCandidate { q: 3, n: bi(2) }]);
        let c = miss_candidates(&bi(3), &bi(3), 3, &bi(64), 5);
        assert!(c.contains(&MissCandidate { q: 5, n: bi(9) }));
        assert!(miss_candidates(&bi(1), &bi(3), 2, &det, 3).is_empty());
        // q | det is skipped
        assert!(miss_candidates(&bi(1), &bi(1), 2, &bi(9), 3).is_empty());
        assert!(matches!(predicted_misses(&triangular(), false, 50), Err(Error::PreconditionViolated(_))));
    }
}
