//! Cosets `nu + N` of conductor 2 and the invariants that drive classification.
//!
//! Instances are stored through `w = 2 nu`, an integral vector in the
//! coordinates of `N`, so `Q(nu) = w^T G w / 4` and `B(nu, x) = (Gw)^T x / 2`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{odd_prime_divisors, odd_squarefree_part, ordp, FactorConfig};
use crate::error::{Error, Result};
use crate::lattice::{integer_kernel, GramMatrix, IdealExponent};

/// Raw description of an inhomogeneous polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceInput {
    /// `f(x) = sum q_ij x_i x_j + sum l_i x_i + c`, coefficients listed as
    /// `q11 q12 q13 q22 q23 q33`.
    Polynomial { quadratic: [BigInt; 6], linear: [BigInt; 3], constant: BigInt },
    /// Gram matrix `b11 b12 b13 b22 b23 b33` of `N` and `w = 2 nu`.
    Lattice { gram: [BigInt; 6], w: [BigInt; 3] },
}

impl InstanceInput {
    pub fn lattice(gram: [i64; 6], w: [i64; 3]) -> Self {
        InstanceInput::Lattice { gram: gram.map(BigInt::from), w: w.map(BigInt::from) }
    }

    pub fn polynomial(quadratic: [i64; 6], linear: [i64; 3], constant: i64) -> Self {
        InstanceInput::Polynomial {
            quadratic: quadratic.map(BigInt::from),
            linear: linear.map(BigInt::from),
            constant: BigInt::from(constant),
        }
    }
}

/// A validated coset with every derived invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetInstance {
    pub gram: GramMatrix,
    pub w: [BigInt; 3],
    pub conductor: u32,
    pub alpha: u32,
    pub beta: u32,
    /// `Q(nu) / 2^beta`, odd, kept exactly.
    pub epsilon: BigInt,
    pub q_nu: BigInt,
    pub det: BigInt,
    pub ord2_det: u32,
    pub lambda: u8,
    pub rad_odd: BigInt,
    pub odd_primes: Vec<u64>,
    /// `ord_2` of the ideal `B(nu, N_2)`.
    pub b_nu_exp: IdealExponent,
}

/// Orthogonal complement of `nu` in `N`, saturated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G2Lattice {
    pub basis: [Vec<BigInt>; 2],
    pub gram: GramMatrix,
    pub norm_exp2: IdealExponent,
}

pub fn normalize(input: &InstanceInput, cfg: &FactorConfig) -> Result<CosetInstance> {
    let (gram, w) = match input {
        InstanceInput::Lattice { gram, w } => (GramMatrix::from_upper(gram)?, w.clone()),
        InstanceInput::Polynomial { quadratic, linear, .. } => {
            let mut upper = Vec::with_capacity(6);
            let mut k = 0;
            for i in 0..3 {
                for j in i..3 {
                    let q = &quadratic[k];
                    k += 1;
                    if i == j {
                        upper.push(q.clone());
                    } else if q.is_odd() {
                        return Err(Error::NonClassicForm(i + 1, j + 1));
                    } else {
                        upper.push(q / 2);
                    }
                }
            }
            let gram = GramMatrix::from_upper(&upper)?;
            if !gram.is_positive_definite() {
                return Err(Error::NotPositiveDefinite);
            }
            (gram.clone(), solve_w(&gram, linear)?)
        }
    };
    if gram.rank() != 3 {
        return Err(Error::OutOfScope("only ternary forms are handled".into()));
    }
    if !gram.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    if w.iter().all(|c| c.is_even()) {
        return Err(Error::OutOfScope("conductor 1: nu lies in N".into()));
    }
    let det = gram.determinant();
    let rad_odd = odd_squarefree_part(&det, cfg)?;
    let odd_primes = odd_prime_divisors(&det, cfg)?;
    derive(gram, w, det, rad_odd, odd_primes)
}

/// `w` with `G w = l`, which must be integral for conductor <= 2.
fn solve_w(gram: &GramMatrix, linear: &[BigInt; 3]) -> Result<[BigInt; 3]> {
    let det = gram.determinant();
    let adj = adjugate3(gram);
    let mut w: [BigInt; 3] = Default::default();
    for i in 0..3 {
        let num: BigInt = (0..3).map(|j| &adj[i][j] * &linear[j]).sum();
        let (q, r) = num.div_rem(&det);
        if !r.is_zero() {
            return Err(Error::OutOfScope("2 nu is not in N (conductor > 2)".into()));
        }
        w[i] = q;
    }
    Ok(w)
}

fn adjugate3(g: &GramMatrix) -> [[BigInt; 3]; 3] {
    let m = |i: usize, j: usize| g.entry(i, j);
    let mut out: [[BigInt; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            // cofactor of (j, i)
            let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
            let minor = m(rows[0], cols[0]) * m(rows[1], cols[1]) - m(rows[0], cols[1]) * m(rows[1], cols[0]);
            out[i][j] = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    out
}

fn derive(gram: GramMatrix, w: [BigInt; 3], det: BigInt, rad_odd: BigInt, odd_primes: Vec<u64>) -> Result<CosetInstance> {
    let gw = gram.apply(&w);
    if gw.iter().any(|v| v.is_odd()) {
        return Err(Error::AssumptionViolated("B(nu, N) is not integral".into()));
    }
    let qw = gram.eval_quadratic(&w);
    if !qw.is_multiple_of(&BigInt::from(4)) {
        return Err(Error::AssumptionViolated("Q(nu) is not an integer".into()));
    }
    let q_nu = &qw / 4;

    // n(nu, N) is generated by Q(e_i) + 2B(nu, e_i) and 2B(e_i, e_j)
    let mut g = BigInt::zero();
    for i in 0..3 {
        g = g.gcd(&(gram.entry(i, i) + &gw[i]));
        for j in i..3 {
            g = g.gcd(&(gram.entry(i, j) * 2));
        }
    }
    let alpha = ordp(&g, 2);
    if g != BigInt::from(2).pow(alpha) {
        return Err(Error::AssumptionViolated(format!("n(nu, N) = {g}Z is not a power of 2")));
    }
    if alpha == 0 {
        return Err(Error::AssumptionViolated("n(nu, N) = Z (alpha = 0)".into()));
    }

    let beta = ordp(&q_nu, 2);
    let epsilon = &q_nu >> beta;
    let ord2_det = ordp(&det, 2);
    let lambda = if (i64::from(ord2_det) - 3 * i64::from(beta)).rem_euclid(2) == 0 { 1 } else { 2 };
    let halves: Vec<BigInt> = gw.iter().map(|v| v / 2).collect();
    let b_nu_exp = IdealExponent::of_gcd(&halves, 2);
    Ok(CosetInstance {
        gram,
        w,
        conductor: 2,
        alpha,
        beta,
        epsilon,
        q_nu,
        det,
        ord2_det,
        lambda,
        rad_odd,
        odd_primes,
        b_nu_exp,
    })
}

impl CosetInstance {
    /// `nu + x0` in place of `nu`; `det` and its factorization carry over.
    pub fn translate(&self, x0: &[BigInt; 3]) -> CosetInstance {
        let w = [&self.w[0] + &x0[0] * 2, &self.w[1] + &x0[1] * 2, &self.w[2] + &x0[2] * 2];
        derive(self.gram.clone(), w, self.det.clone(), self.rad_odd.clone(), self.odd_primes.clone())
            .expect("translation preserves the coset assumptions")
    }

    pub fn complement_g2(&self) -> G2Lattice {
        let gw = self.gram.apply(&self.w);
        let row = [gw[0].clone(), gw[1].clone(), gw[2].clone()];
        let basis = integer_kernel(&row).expect("Gw != 0 for nondegenerate G");
        let gram = self.gram.restrict(&basis).expect("restriction of a definite form");
        let (_, norm_exp2) = gram.scale_norm_exponents(2);
        G2Lattice { basis, gram, norm_exp2 }
    }

    pub fn b_nu_exponent(&self) -> IdealExponent {
        self.b_nu_exp
    }

    /// `H(x) = (Q(x) + 2B(nu, x)) / 2^alpha`.
    pub fn eval_h(&self, x: &[BigInt]) -> BigInt {
        let num = self.gram.eval_quadratic(x) + self.gram.bilinear(x, &self.w);
        let d = BigInt::one() << self.alpha;
        debug_assert!(num.is_multiple_of(&d));
        num / d
    }

    /// `Q(x + nu) = (x + nu)^T G (x + nu)` for integral `x`.
    pub fn q_shifted(&self, x: &[BigInt]) -> BigInt {
        let z: Vec<BigInt> = x.iter().zip(&self.w).map(|(a, b)| a * 2 + b).collect();
        self.gram.eval_quadratic(&z) / 4
    }

    /// Polynomial-form coefficients of `Q(x) + 2B(nu, x)` (constant 0).
    pub fn to_polynomial(&self) -> InstanceInput {
        let g = &self.gram;
        let quadratic = [
            g.entry(0, 0).clone(),
            g.entry(0, 1) * 2,
            g.entry(0, 2) * 2,
            g.entry(1, 1).clone(),
            g.entry(1, 2) * 2,
            g.entry(2, 2).clone(),
        ];
        let gw = g.apply(&self.w);
        let linear = [gw[0].clone(), gw[1].clone(), gw[2].clone()];
        InstanceInput::Polynomial { quadratic, linear, constant: BigInt::zero() }
    }

    pub fn to_lattice(&self) -> InstanceInput {
        let u = self.gram.upper();
        InstanceInput::Lattice {
            gram: [u[0].clone(), u[1].clone(), u[2].clone(), u[3].clone(), u[4].clone(), u[5].clone()],
            w: self.w.clone(),
        }
    }

    pub fn epsilon_mod8(&self) -> u8 {
        use num_traits::ToPrimitive;
        self.epsilon.mod_floor(&BigInt::from(8)).to_u8().expect("residue")
    }

}
