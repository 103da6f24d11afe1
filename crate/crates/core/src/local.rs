//! Local representation decisions over the p-adic integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{hilbert2, least_nonresidue, legendre, ordp};
use crate::jordan::jordan_split;
use crate::lattice::{GramMatrix, IdealExponent};

/// A vector `x` with `ord_p(Q(x) - t) = residual > 2 * gradient`, where
/// `gradient = min_i ord_p((2Gx)_i)`; Newton iteration lifts it to an exact
/// p-adic representation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HenselWitness {
    pub x: Vec<BigInt>,
    pub gradient: u32,
    pub residual: IdealExponent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalVerdict {
    pub represented: bool,
    pub witness: Option<HenselWitness>,
}

impl HenselWitness {
    pub fn is_valid(&self, g: &GramMatrix, t: &BigInt, p: u64) -> bool {
        let diff = g.eval_quadratic(&self.x) - t;
        let e = if diff.is_zero() { IdealExponent::Infinity } else { IdealExponent::Finite(ordp(&diff, p)) };
        let grad = g.apply(&self.x).into_iter().map(|v| v * 2).collect::<Vec<_>>();
        let v = IdealExponent::of_gcd(&grad, p);
        e == self.residual && v == IdealExponent::Finite(self.gradient) && e > IdealExponent::Finite(2 * self.gradient)
    }
}

/// Decides whether `t != 0` is represented by `g` over `Z_p`.
///
/// A representation `x = p^s y` with `y` primitive has
/// `ord_p(2Gy) <= ord_p(2 det G)` (multiply by the adjugate), so for each
/// admissible `s` the search runs over primitive `y` digit by digit. A residue
/// `y mod p^k` whose gradient has valuation `w` (capped at `k`) determines
/// `Q(y) mod p^(k+w)`; states failing that congruence are pruned, and a state
/// with `w < k` already satisfies the lifting condition.
pub fn local_represents(g: &GramMatrix, t: &BigInt, p: u64) -> LocalVerdict {
    assert!(!t.is_zero(), "local_represents needs t != 0");
    let depth = ordp(&(g.determinant() * 2), p) + 1;
    let ord_t = ordp(t, p);
    let pb = BigInt::from(p);
    for s in 0..=ord_t / 2 {
        let ps = pb.pow(s);
        let t_red = t / (&ps * &ps);
        if let Some((y, v)) = search_primitive(g, &t_red, p, depth) {
            let x: Vec<BigInt> = y.iter().map(|c| c * &ps).collect();
            let diff = g.eval_quadratic(&x) - t;
            let residual = if diff.is_zero() { IdealExponent::Infinity } else { IdealExponent::Finite(ordp(&diff, p)) };
            let witness = HenselWitness { x, gradient: v + s, residual };
            return LocalVerdict { represented: true, witness: Some(witness) };
        }
    }
    LocalVerdict { represented: false, witness: None }
}

fn search_primitive(g: &GramMatrix, t: &BigInt, p: u64, depth: u32) -> Option<(Vec<BigInt>, u32)> {
    let modulus = BigInt::from(p).pow(2 * depth);
    if modulus.bits() <= 32 {
        let m = modulus.to_u64().expect("fits");
        let red = |v: &BigInt| v.mod_floor(&modulus).to_u64().expect("reduced");
        let gm: Vec<Vec<u64>> = g.rows().iter().map(|r| r.iter().map(red).collect()).collect();
        digit_search(&gm, red(t), p, depth, m, Small)
            .map(|(y, v)| (y.into_iter().map(BigInt::from).collect(), v))
    } else if modulus.bits() <= 60 {
        let m = modulus.to_i128().expect("fits");
        let red = |v: &BigInt| v.mod_floor(&modulus).to_i128().expect("reduced");
        let gm: Vec<Vec<i128>> = g.rows().iter().map(|r| r.iter().map(red).collect()).collect();
        digit_search(&gm, red(t), p, depth, m, Native)
            .map(|(y, v)| (y.into_iter().map(BigInt::from).collect(), v))
    } else {
        let gm: Vec<Vec<BigInt>> = g.rows().iter().map(|r| r.iter().map(|v| v.mod_floor(&modulus)).collect()).collect();
        digit_search(&gm, t.mod_floor(&modulus), p, depth, modulus, Big)
    }
}

/// Residue arithmetic used by the digit search: `u64` below 2^32 and `i128`
/// below 2^60 (products of reduced values then fit), `BigInt` otherwise.
trait Ring<T> {
    fn lift(&self, v: u64) -> T;
    fn add(&self, a: &T, b: &T) -> T;
    fn mul_mod(&self, a: &T, b: &T, m: &T) -> T;
    fn mul_exact(&self, a: &T, b: &T) -> T;
    fn rem(&self, a: &T, m: &T) -> T;
    fn is_zero(&self, a: &T) -> bool;
    fn eq(&self, a: &T, b: &T) -> bool;
}

struct Small;
struct Native;
struct Big;

impl Ring<u64> for Small {
    fn lift(&self, v: u64) -> u64 {
        v
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        a + b
    }
    fn mul_mod(&self, a: &u64, b: &u64, m: &u64) -> u64 {
        a * b % m
    }
    fn mul_exact(&self, a: &u64, b: &u64) -> u64 {
        a * b
    }
    fn rem(&self, a: &u64, m: &u64) -> u64 {
        a % m
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn eq(&self, a: &u64, b: &u64) -> bool {
        a == b
    }
}

impl Ring<i128> for Native {
    fn lift(&self, v: u64) -> i128 {
        i128::from(v)
    }
    fn add(&self, a: &i128, b: &i128) -> i128 {
        a + b
    }
    fn mul_mod(&self, a: &i128, b: &i128, m: &i128) -> i128 {
        (a * b).rem_euclid(*m)
    }
    fn mul_exact(&self, a: &i128, b: &i128) -> i128 {
        a * b
    }
    fn rem(&self, a: &i128, m: &i128) -> i128 {
        a.rem_euclid(*m)
    }
    fn is_zero(&self, a: &i128) -> bool {
        *a == 0
    }
    fn eq(&self, a: &i128, b: &i128) -> bool {
        a == b
    }
}

impl Ring<BigInt> for Big {
    fn lift(&self, v: u64) -> BigInt {
        BigInt::from(v)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul_mod(&self, a: &BigInt, b: &BigInt, m: &BigInt) -> BigInt {
        (a * b).mod_floor(m)
    }
    fn mul_exact(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn rem(&self, a: &BigInt, m: &BigInt) -> BigInt {
        a.mod_floor(m)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        Zero::is_zero(a)
    }
    fn eq(&self, a: &BigInt, b: &BigInt) -> bool {
        a == b
    }
}

fn digit_search<T: Clone, R: Ring<T>>(
    g: &[Vec<T>],
    t: T,
    p: u64,
    depth: u32,
    modulus: T,
    ring: R,
) -> Option<(Vec<T>, u32)> {
    let n = g.len();
    let zero = ring.lift(0);
    // p^k for k = 0..=2*depth
    let mut powers = vec![ring.lift(1)];
    for k in 1..=2 * depth as usize {
        let prev = powers[k - 1].clone();
        powers.push(ring.mul_exact(&prev, &ring.lift(p)));
    }
    let val_capped = |x: &T, cap: u32| -> u32 {
        // smallest j < cap with x != 0 mod p^(j+1)
        for j in 0..cap {
            if !ring.is_zero(&ring.rem(x, &powers[j as usize + 1])) {
                return j;
            }
        }
        cap
    };
    let combos = p.pow(n as u32);
    // base-p digits of a counter, one per coordinate
    let digits = |mut c: u64| -> [u64; 3] {
        let mut d = [0; 3];
        for di in d.iter_mut().take(n) {
            *di = c % p;
            c /= p;
        }
        d
    };

    let mut stack: Vec<([T; 3], u32)> = (1..combos)
        .rev()
        .map(|c| (digits(c).map(|x| ring.lift(x)), 1))
        .collect();

    while let Some((y, k)) = stack.pop() {
        let mut gy = [zero.clone(), zero.clone(), zero.clone()];
        for (i, gyi) in gy.iter_mut().enumerate().take(n) {
            for j in 0..n {
                *gyi = ring.rem(&ring.add(gyi, &ring.mul_mod(&g[i][j], &y[j], &modulus)), &modulus);
            }
        }
        let w = (0..n).map(|i| val_capped(&ring.rem(&ring.add(&gy[i], &gy[i]), &modulus), k)).min().unwrap_or(k);
        let mut q = zero.clone();
        for i in 0..n {
            q = ring.rem(&ring.add(&q, &ring.mul_mod(&gy[i], &y[i], &modulus)), &modulus);
        }
        // y mod p^k fixes Q(y) mod p^(k+w)
        let target = &powers[(k + w) as usize];
        if !ring.eq(&ring.rem(&q, target), &ring.rem(&t, target)) {
            continue;
        }
        if w < k {
            return Some((y[..n].to_vec(), w));
        }
        if k >= depth {
            // unreachable for primitive y by the adjugate bound
            continue;
        }
        let pk = &powers[k as usize];
        for c in (0..combos).rev() {
            let d = digits(c);
            let child = [0, 1, 2].map(|i| ring.add(&y[i], &ring.mul_mod(&ring.lift(d[i]), pk, &modulus)));
            stack.push((child, k + 1));
        }
    }
    None
}

/// `N_p` represents every p-adic integer (odd `p`, rank 3).
///
/// Only the unimodular constituent `L_0` reaches units. It must have rank 3,
/// or rank 2 and be a hyperbolic plane; an anisotropic binary `L_0` misses
/// one of the classes `p u`.
pub fn represents_all_odd(g: &GramMatrix, p: u64) -> bool {
    assert!(p % 2 == 1, "represents_all_odd needs an odd prime");
    let js = jordan_split(g, p);
    let unimodular = js.constituents.iter().find(|c| c.scale_exp == 0);
    match unimodular {
        Some(c) if c.rank >= 3 => true,
        Some(c) if c.rank == 2 => {
            let class = c.det_unit_class.expect("odd prime");
            legendre(&BigInt::from(-1), p) * class == 1
        }
        _ => false,
    }
}

/// Square-class search behind [`represents_all_odd`]: the four classes
/// `1, r, p, pr` with `r` the least nonresidue, `p^2 t` following from `t`.
pub fn represents_all_odd_by_search(g: &GramMatrix, p: u64) -> bool {
    assert!(p % 2 == 1, "represents_all_odd needs an odd prime");
    let r = least_nonresidue(p);
    [1, r, p, p * r].iter().all(|&t| local_represents(g, &BigInt::from(t), p).represented)
}

/// Rational diagonalization of a nondegenerate form, each entry replaced by
/// an integer in the same square class.
pub fn rational_diagonal(g: &GramMatrix) -> Vec<BigInt> {
    let n = g.rank();
    let mut a: Vec<Vec<BigRational>> =
        g.rows().iter().map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect()).collect();
    let mut out = Vec::new();
    let mut active: Vec<usize> = (0..n).collect();
    while let Some(&first) = active.first() {
        let pivot = match active.iter().copied().find(|&i| !a[i][i].is_zero()) {
            Some(i) => i,
            None => {
                // all diagonal entries vanish: e_i + e_j has Q = 2 B(e_i, e_j) != 0
                let j = active.iter().copied().find(|&j| j != first && !a[first][j].is_zero()).expect("nondegenerate");
                for k in 0..n {
                    let v = a[k][j].clone();
                    a[k][first] += v;
                }
                for k in 0..n {
                    let v = a[j][k].clone();
                    a[first][k] += v;
                }
                first
            }
        };
        for &j in &active {
            if j == pivot {
                continue;
            }
            let c = &a[pivot][j] / &a[pivot][pivot];
            for k in 0..n {
                let v = &c * &a[k][pivot];
                a[k][j] -= v;
            }
            for k in 0..n {
                let v = &c * &a[pivot][k];
                a[j][k] -= v;
            }
        }
        let d = &a[pivot][pivot];
        out.push(d.numer() * d.denom());
        active.retain(|&i| i != pivot);
    }
    out
}

/// The ternary space `Q_2 G` has no nontrivial zero. A ternary form
/// `<a, b, c>` is isotropic at 2 exactly when its Hasse invariant
/// `(a,b)(a,c)(b,c)` equals `(-1, -abc)`.
pub fn is_anisotropic2(g: &GramMatrix) -> bool {
    assert_eq!(g.rank(), 3, "is_anisotropic2 expects a ternary form");
    let d = rational_diagonal(g);
    let hasse = hilbert2(&d[0], &d[1]) * hilbert2(&d[0], &d[2]) * hilbert2(&d[1], &d[2]);
    let disc: BigInt = d.iter().product();
    hasse != hilbert2(&BigInt::from(-1), &-disc)
}
