//! Exact integer linear algebra for symmetric bilinear forms of rank 2 and 3.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::ordp;
use crate::error::{Error, Result};

/// Valuation of a fractional ideal `p^k Z_p`; `Infinity` stands for the zero ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdealExponent {
    Finite(u32),
    Infinity,
}

impl IdealExponent {
    /// Valuation of the ideal generated by `values` (zero entries ignored).
    pub fn of_gcd<'a, I>(values: I, p: u64) -> Self
    where
        I: IntoIterator<Item = &'a BigInt>,
    {
        values
            .into_iter()
            .filter(|v| !v.is_zero())
            .map(|v| IdealExponent::Finite(ordp(v, p)))
            .min()
            .unwrap_or(IdealExponent::Infinity)
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            IdealExponent::Finite(k) => Some(k),
            IdealExponent::Infinity => None,
        }
    }

    /// True when the exponent equals the given integer (never for `Infinity`).
    pub fn is(self, k: i64) -> bool {
        matches!(self, IdealExponent::Finite(e) if i64::from(e) == k)
    }
}

impl fmt::Display for IdealExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealExponent::Finite(k) => write!(f, "{k}"),
            IdealExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Gram matrix of an integral bilinear form: entry `(i, j)` is `B(e_i, e_j)`.
///
/// Construction checks symmetry and non-degeneracy; positive definiteness is
/// a separate predicate because local computations also handle indefinite
/// forms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GramMatrix {
    entries: Vec<Vec<BigInt>>,
}

impl GramMatrix {
    pub fn new(entries: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = entries.len();
        if !(2..=3).contains(&n) || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Malformed(format!("Gram matrix must be 2x2 or 3x3, got {n} rows")));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::Malformed(format!("Gram matrix not symmetric at ({i},{j})")));
                }
            }
        }
        let g = GramMatrix { entries };
        if g.determinant().is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(g)
    }

    pub fn from_i64<const N: usize>(rows: [[i64; N]; N]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())
    }

    pub fn diagonal(diag: &[i64]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![vec![BigInt::zero(); n]; n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i][i] = BigInt::from(d);
        }
        Self::new(entries)
    }

    /// Upper-triangle form `b11 b12 b13 b22 b23 b33` (rank 3) or `b11 b12 b22` (rank 2).
    pub fn from_upper(values: &[BigInt]) -> Result<Self> {
        let n = match values.len() {
            3 => 2,
            6 => 3,
            k => return Err(Error::Malformed(format!("expected 3 or 6 upper-triangle entries, got {k}"))),
        };
        let mut entries = vec![vec![BigInt::zero(); n]; n];
        let mut it = values.iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().expect("length checked").clone();
                entries[i][j] = v.clone();
                entries[j][i] = v;
            }
        }
        Self::new(entries)
    }

    pub fn upper(&self) -> Vec<BigInt> {
        let n = self.rank();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.entries[i][j].clone());
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    pub fn determinant(&self) -> BigInt {
        determinant(&self.entries)
    }

    /// All leading principal minors positive.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.rank()).all(|k| {
            let minor: Vec<Vec<BigInt>> = self.entries[..k].iter().map(|r| r[..k].to_vec()).collect();
            determinant(&minor).is_positive()
        })
    }

    /// `(ord_p s(L), ord_p n(L))`: the scale is generated by all entries, the
    /// norm by the diagonal entries and twice the off-diagonal ones.
    pub fn scale_norm_exponents(&self, p: u64) -> (IdealExponent, IdealExponent) {
        let n = self.rank();
        let all: Vec<&BigInt> = self.entries.iter().flatten().collect();
        let scale = IdealExponent::of_gcd(all, p);
        let mut norm_gens = Vec::new();
        for i in 0..n {
            norm_gens.push(self.entries[i][i].clone());
            for j in i + 1..n {
                norm_gens.push(&self.entries[i][j] * 2);
            }
        }
        (scale, IdealExponent::of_gcd(&norm_gens, p))
    }

    /// Positive generator of the global scale ideal.
    pub fn scale_gcd(&self) -> BigInt {
        self.entries.iter().flatten().fold(BigInt::zero(), |g, v| g.gcd(v))
    }

    /// Positive generator of the global norm ideal.
    pub fn norm_gcd(&self) -> BigInt {
        let n = self.rank();
        let mut g = BigInt::zero();
        for i in 0..n {
            g = g.gcd(&self.entries[i][i]);
            for j in i + 1..n {
                g = g.gcd(&(&self.entries[i][j] * 2));
            }
        }
        g
    }

    /// `G x`.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.rank(), "dimension mismatch");
        self.entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.apply(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// `x^T G x`.
    pub fn eval_quadratic(&self, x: &[BigInt]) -> BigInt {
        self.bilinear(x, x)
    }

    /// Gram matrix of the sublattice spanned by `basis` (vectors in the
    /// coordinates of this lattice).
    pub fn restrict(&self, basis: &[Vec<BigInt>]) -> Result<GramMatrix> {
        let entries = basis
            .iter()
            .map(|u| basis.iter().map(|v| self.bilinear(u, v)).collect())
            .collect();
        GramMatrix::new(entries)
    }

    /// `U^T G U` for a square change of basis `U` given by columns.
    pub fn transform(&self, columns: &[Vec<BigInt>]) -> Result<GramMatrix> {
        self.restrict(columns)
    }
}

impl fmt::Debug for GramMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GramMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Determinant by cofactor expansion; exact for the small ranks used here.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    match m.len() {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => {
            let mut acc = BigInt::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<BigInt>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &m[0][j] * determinant(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

/// Basis of the saturated rank-2 sublattice `{x in Z^3 : row . x = 0}`.
///
/// Column operations reduce `row` to `(g, 0, 0)`; the accumulated unimodular
/// matrix then carries the kernel in its last two columns, which is saturated
/// because the transform is invertible over `Z`. The pair is returned in row
/// Hermite normal form so the output is canonical.
pub fn integer_kernel(row: &[BigInt; 3]) -> Result<[Vec<BigInt>; 2]> {
    if row.iter().all(Zero::is_zero) {
        return Err(Error::Malformed("integer_kernel of the zero functional".into()));
    }
    let mut r: Vec<BigInt> = row.to_vec();
    // columns of U, stored as vectors
    let mut u: Vec<Vec<BigInt>> = (0..3)
        .map(|i| (0..3).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    loop {
        let nonzero: Vec<usize> = (0..3).filter(|&i| !r[i].is_zero()).collect();
        if nonzero.len() == 1 {
            let k = nonzero[0];
            r.swap(0, k);
            u.swap(0, k);
            break;
        }
        let piv = *nonzero.iter().min_by_key(|&&i| r[i].abs()).expect("nonempty");
        for &i in &nonzero {
            if i == piv {
                continue;
            }
            let q = r[i].div_floor(&r[piv]);
            r[i] = &r[i] - &q * &r[piv];
            let col = u[piv].clone();
            for (a, b) in u[i].iter_mut().zip(col) {
                *a -= &q * b;
            }
        }
    }
    Ok(hermite_pair(u[1].clone(), u[2].clone()))
}

/// Row Hermite normal form of a rank-2 integer 2x3 matrix.
pub(crate) fn hermite_pair(a: Vec<BigInt>, b: Vec<BigInt>) -> [Vec<BigInt>; 2] {
    let mut rows = [a, b];
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..3 {
        if pivot_row == 2 {
            break;
        }
        // Euclid on the column entries among rows >= pivot_row
        loop {
            let live: Vec<usize> = (pivot_row..2).filter(|&i| !rows[i][col].is_zero()).collect();
            if live.len() <= 1 {
                if let Some(&i) = live.first() {
                    rows.swap(pivot_row, i);
                }
                break;
            }
            let (small, big) = if rows[live[0]][col].abs() <= rows[live[1]][col].abs() {
                (live[0], live[1])
            } else {
                (live[1], live[0])
            };
            let q = rows[big][col].div_floor(&rows[small][col]);
            let src = rows[small].clone();
            for (x, s) in rows[big].iter_mut().zip(src) {
                *x -= &q * s;
            }
        }
        if rows[pivot_row][col].is_zero() {
            continue;
        }
        if rows[pivot_row][col].is_negative() {
            for x in rows[pivot_row].iter_mut() {
                *x = -x.clone();
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    // reduce entries above pivots into [0, pivot)
    for &(pr, col) in &pivots {
        for i in 0..pr {
            let q = rows[i][col].div_floor(&rows[pr][col]);
            if !q.is_zero() {
                let src = rows[pr].clone();
                for (x, s) in rows[i].iter_mut().zip(src) {
                    *x -= &q * s;
                }
            }
        }
    }
    rows
}

pub fn vec_i64(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
