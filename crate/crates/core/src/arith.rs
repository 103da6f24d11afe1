//! Elementary p-adic and multiplicative number theory on exact integers.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `k` with `p^k | n`. Panics on `n = 0`.
pub fn ordp(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "ordp of zero");
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

pub fn ordp_i64(n: i64, p: u64) -> u32 {
    ordp(&BigInt::from(n), p)
}

/// `n / p^ordp(n)`.
pub fn strip(n: &BigInt, p: u64) -> BigInt {
    let k = ordp(n, p);
    n / BigInt::from(p).pow(k)
}

/// Effort knobs for [`factor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorConfig {
    pub trial_limit: u64,
    pub rho_iterations: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { trial_limit: 1_000_000, rho_iterations: 1 << 20 }
    }
}

/// Prime factorization of `|n|` as sorted `(prime, exponent)` pairs.
pub fn factor(n: &BigInt, cfg: &FactorConfig) -> Result<Vec<(BigUint, u32)>> {
    if n.is_zero() {
        return Err(Error::Malformed("cannot factor 0".into()));
    }
    let mut m = n.magnitude().clone();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    let push = |p: BigUint, out: &mut Vec<(BigUint, u32)>| match out.iter_mut().find(|(q, _)| *q == p) {
        Some(e) => e.1 += 1,
        None => out.push((p, 1)),
    };

    let mut d: u64 = 2;
    while d <= cfg.trial_limit {
        let db = BigUint::from(d);
        if &db * &db > m {
            break;
        }
        while (&m % &db).is_zero() {
            m /= &db;
            push(db.clone(), &mut out);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut stack = vec![m];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            push(m, &mut out);
            continue;
        }
        let f = pollard_rho(&m, cfg.rho_iterations).ok_or_else(|| Error::FactorizationLimit(n.to_string()))?;
        stack.push(&m / &f);
        stack.push(f);
    }
    out.sort();
    Ok(out)
}

/// Distinct odd primes dividing `n`.
pub fn odd_prime_divisors(n: &BigInt, cfg: &FactorConfig) -> Result<Vec<u64>> {
    factor(n, cfg)?
        .into_iter()
        .filter(|(p, _)| *p != BigUint::from(2u32))
        .map(|(p, _)| p.to_u64().ok_or_else(|| Error::Overflow(format!("prime {p} exceeds u64"))))
        .collect()
}

/// Odd part of `|n|` divided by its largest square divisor.
pub fn odd_squarefree_part(n: &BigInt, cfg: &FactorConfig) -> Result<BigInt> {
    let mut out = BigInt::one();
    for (p, e) in factor(n, cfg)? {
        if p != BigUint::from(2u32) && e % 2 == 1 {
            out *= BigInt::from_biguint(Sign::Plus, p);
        }
    }
    Ok(out)
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with the first twelve prime bases; deterministic below 3.3e24.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in &MR_BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'bases: for &b in &MR_BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Pollard rho with Floyd cycle detection; returns a nontrivial factor or `None`
/// when the iteration cap is exhausted.
fn pollard_rho(n: &BigUint, max_iter: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut x, mut y, mut g) = (BigUint::from(2u32), BigUint::from(2u32), BigUint::one());
        while g.is_one() {
            x = f(&x);
            y = f(&f(&y));
            g = if x > y { &x - &y } else { &y - &x }.gcd(n);
            spent += 1;
            if spent > max_iter {
                return None;
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    None
}

/// Legendre symbol `(a | p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: u64) -> i8 {
    assert!(p % 2 == 1, "legendre needs an odd prime");
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb);
    if a.is_zero() {
        return 0;
    }
    let e = BigInt::from((p - 1) / 2);
    if a.modpow(&e, &pb).is_one() {
        1
    } else {
        -1
    }
}

pub fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&r| legendre(&BigInt::from(r), p) == -1).expect("odd primes have nonresidues")
}

/// Hilbert symbol `(a, b)_2` from the closed formula in terms of the
/// 2-adic valuations and the units' residues mod 8.
pub fn hilbert2(a: &BigInt, b: &BigInt) -> i8 {
    assert!(!a.is_zero() && !b.is_zero(), "hilbert2 of zero");
    let (alpha, u) = (ordp(a, 2), unit_mod8(a));
    let (beta, v) = (ordp(b, 2), unit_mod8(b));
    let eps = |x: u8| u32::from(((x - 1) / 2) % 2);
    let omega = |x: u8| ((u32::from(x) * u32::from(x) - 1) / 8) % 2;
    let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Odd part of `n` reduced mod 8, in `{1, 3, 5, 7}`.
pub fn unit_mod8(n: &BigInt) -> u8 {
    strip(n, 2).mod_floor(&BigInt::from(8)).to_u8().expect("residue")
}

/// Hilbert symbol `(a, b)_p` for an odd prime `p`.
pub fn hilbert_odd(a: &BigInt, b: &BigInt, p: u64) -> i8 {
    let (alpha, u) = (ordp(a, p), strip(a, p));
    let (beta, v) = (ordp(b, p), strip(b, p));
    let mut s: i8 = if (alpha * beta) % 2 == 1 && p % 4 == 3 { -1 } else { 1 };
    if beta % 2 == 1 {
        s *= legendre(&u, p);
    }
    if alpha % 2 == 1 {
        s *= legendre(&v, p);
    }
    s
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&n| (2..=n.sqrt()).all(|d| n % d != 0)).collect()
}
