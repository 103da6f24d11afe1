//! Jordan splittings of integral forms over the p-adic integers.
//!
//! The reduction runs over rationals whose denominators are prime to `p`, so
//! every step is exact and the accumulated change of basis is invertible
//! over `Z_p`. At `p = 2` the greedy rule splits off a rank-one block when a
//! diagonal entry attains the minimal valuation and a rank-two improper block
//! otherwise; blocks of equal scale are then merged into one constituent.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{legendre, ordp, strip};
use crate::lattice::GramMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstituentType {
    /// Odd (proper): norm equals scale; diagonalizable.
    I,
    /// Even (improper): norm is twice the scale; only at `p = 2`.
    II,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constituent {
    pub scale_exp: u32,
    pub rank: usize,
    pub kind: ConstituentType,
    /// Unit parts of a diagonalization: residues mod 8 at `p = 2` (type I
    /// only), Legendre classes `+-1` at odd `p`. At 2 these are the canonical
    /// choice below, which `blocks` need not display literally.
    pub units: Vec<i64>,
    /// Unit part of the constituent determinant mod 8 (`p = 2` only).
    ///
    /// Raw values move under sign walking and oddity fusion
    /// (`<1> + <2>` is isometric to `<3> + <6>`), so the reported tuple is the
    /// least one over all Jordan splittings with the same canonical 2-adic
    /// symbol. That makes it an isometry invariant.
    pub det_unit_mod8: Option<u8>,
    /// Legendre class of the unit part of the determinant (odd `p` only).
    pub det_unit_class: Option<i8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanSplitting {
    pub prime: u64,
    pub constituents: Vec<Constituent>,
    /// Change of basis (columns) with `T^T G T` block diagonal.
    pub transform: Vec<Vec<BigRational>>,
    /// The block-diagonal Gram matrix `T^T G T`, basis ordered by constituent.
    pub blocks: Vec<Vec<BigRational>>,
}

impl JordanSplitting {
    /// Checks `T^T G T = blocks` exactly and that `T` is invertible over `Z_p`.
    pub fn verify(&self, g: &GramMatrix) -> bool {
        let n = g.rank();
        let gq: Vec<Vec<BigRational>> =
            g.rows().iter().map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for a in 0..n {
                    for b in 0..n {
                        acc += &self.transform[i][a] * &gq[a][b] * &self.transform[j][b];
                    }
                }
                if acc != self.blocks[i][j] {
                    return false;
                }
            }
        }
        let det = rational_det(&self.transform);
        !det.is_zero() && is_p_unit(&det, self.prime)
    }

    /// Block-diagonal form scaled by the square of a common denominator
    /// (a unit square at `p`), as an integral Gram matrix.
    pub fn block_gram(&self) -> GramMatrix {
        let den = self.blocks.iter().flatten().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let sq = BigRational::from_integer(&den * &den);
        let rows = self.blocks.iter().map(|r| r.iter().map(|q| (q * &sq).to_integer()).collect()).collect();
        GramMatrix::new(rows).expect("block form of a nondegenerate form")
    }

    /// Genus-invariant part of each constituent: scale, rank, type and the
    /// determinant residue (mod 8 at 2, Legendre class at odd p).
    pub fn signature(&self) -> Vec<(u32, usize, ConstituentType, i64)> {
        self.constituents
            .iter()
            .map(|c| {
                let d = c.det_unit_mod8.map(i64::from).or(c.det_unit_class.map(i64::from)).unwrap_or(0);
                (c.scale_exp, c.rank, c.kind, d)
            })
            .collect()
    }
}

fn is_p_unit(q: &BigRational, p: u64) -> bool {
    let p = BigInt::from(p);
    !q.numer().is_multiple_of(&p) && !q.denom().is_multiple_of(&p)
}

/// p-adic valuation of a nonzero p-integral rational.
fn val(q: &BigRational, p: u64) -> u32 {
    debug_assert!(!q.denom().is_multiple_of(&BigInt::from(p)));
    ordp(q.numer(), p)
}

fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    match m.len() {
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {
            &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
        }
    }
}

/// Odd part of a 2-integral rational reduced mod 8 (`1/b = b mod 8` for odd `b`).
fn unit_mod8(q: &BigRational) -> u8 {
    let n = strip(q.numer(), 2);
    let d = q.denom();
    (n * d).mod_floor(&BigInt::from(8)).to_u8().expect("residue")
}

fn unit_part(q: &BigRational, p: u64) -> BigInt {
    // numerator unit times denominator (a square class representative of 1/den)
    strip(q.numer(), p) * q.denom()
}

struct Work {
    p: u64,
    a: Vec<Vec<BigRational>>,
    t: Vec<Vec<BigRational>>, // t[col][row]
}

impl Work {
    /// Basis change `e_j <- e_j + c e_i`.
    fn add_col(&mut self, j: usize, i: usize, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let n = self.a.len();
        for k in 0..n {
            let v = c * &self.a[k][i];
            self.a[k][j] += v;
        }
        for k in 0..n {
            let v = c * &self.a[i][k];
            self.a[j][k] += v;
        }
        let col = self.t[i].clone();
        for (x, y) in self.t[j].iter_mut().zip(col) {
            *x += c * y;
        }
    }

    fn min_val(&self, idx: &[usize]) -> Option<u32> {
        idx.iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| !self.a[i][j].is_zero())
            .map(|(i, j)| val(&self.a[i][j], self.p))
            .min()
    }

    /// One greedy pass over `idx`; returns blocks as `(scale, indices)`.
    fn split(&mut self, idx: &[usize]) -> Vec<(u32, Vec<usize>)> {
        let mut active: Vec<usize> = idx.to_vec();
        let mut blocks = Vec::new();
        while !active.is_empty() {
            let m = self.min_val(&active).expect("nondegenerate");
            let diag = active.iter().copied().find(|&i| !self.a[i][i].is_zero() && val(&self.a[i][i], self.p) == m);
            if let Some(i) = diag {
                for &j in &active {
                    if j != i {
                        let c = -(&self.a[i][j] / &self.a[i][i]);
                        self.add_col(j, i, &c);
                    }
                }
                blocks.push((m, vec![i]));
                active.retain(|&k| k != i);
                continue;
            }
            let (i, j) = active
                .iter()
                .flat_map(|&i| active.iter().map(move |&j| (i, j)))
                .find(|&(i, j)| i < j && !self.a[i][j].is_zero() && val(&self.a[i][j], self.p) == m)
                .expect("minimum attained off the diagonal");
            if self.p != 2 {
                // Q(e_i + e_j) has valuation m at odd p
                self.add_col(i, j, &BigRational::one());
                continue;
            }
            let (x, b, y) = (self.a[i][i].clone(), self.a[i][j].clone(), self.a[j][j].clone());
            let det = &x * &y - &b * &b;
            for &k in &active {
                if k == i || k == j {
                    continue;
                }
                let (u, v) = (self.a[i][k].clone(), self.a[j][k].clone());
                let ci = (&y * &u - &b * &v) / &det;
                let cj = (&x * &v - &b * &u) / &det;
                self.add_col(k, i, &-ci);
                self.add_col(k, j, &-cj);
            }
            blocks.push((m, vec![i, j]));
            active.retain(|&k| k != i && k != j);
        }
        blocks
    }
}

/// Jordan splitting of `g` at the prime `p`.
pub fn jordan_split(g: &GramMatrix, p: u64) -> JordanSplitting {
    let n = g.rank();
    let a: Vec<Vec<BigRational>> =
        g.rows().iter().map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect()).collect();
    let t = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let mut w = Work { p, a, t };
    let mut blocks = w.split(&(0..n).collect::<Vec<_>>());

    // Odd constituents that still contain an improper block: fold a rank-one
    // vector of the same scale into the block and split that scale again.
    if p == 2 {
        for _ in 0..n {
            let Some((scale, pair, single)) = find_mixed(&blocks) else { break };
            w.add_col(pair[0], single, &BigRational::one());
            // the modified vector goes first so it becomes the next pivot
            let mut group: Vec<usize> = vec![pair[0]];
            for (_, ix) in blocks.iter().filter(|(s, _)| *s == scale) {
                group.extend(ix.iter().copied().filter(|&i| i != pair[0]));
            }
            blocks.retain(|(s, _)| *s != scale);
            blocks.extend(w.split(&group));
        }
        assert!(find_mixed(&blocks).is_none(), "diagonalization of odd constituents failed");
    }
    blocks.sort_by_key(|(s, ix)| (*s, ix.len()));
    assemble(w, blocks)
}

fn find_mixed(blocks: &[(u32, Vec<usize>)]) -> Option<(u32, Vec<usize>, usize)> {
    for (s, ix) in blocks {
        if ix.len() == 2 {
            if let Some((_, single)) = blocks.iter().find(|(t, jx)| t == s && jx.len() == 1) {
                return Some((*s, ix.clone(), single[0]));
            }
        }
    }
    None
}

fn assemble(w: Work, blocks: Vec<(u32, Vec<usize>)>) -> JordanSplitting {
    let p = w.p;
    let order: Vec<usize> = blocks.iter().flat_map(|(_, ix)| ix.iter().copied()).collect();
    let transform: Vec<Vec<BigRational>> = order.iter().map(|&i| w.t[i].clone()).collect();
    let block_matrix: Vec<Vec<BigRational>> =
        order.iter().map(|&i| order.iter().map(|&j| w.a[i][j].clone()).collect()).collect();

    let mut constituents: Vec<Constituent> = Vec::new();
    let mut k = 0;
    while k < blocks.len() {
        let scale = blocks[k].0;
        let group: Vec<&Vec<usize>> = blocks[k..].iter().take_while(|(s, _)| *s == scale).map(|(_, ix)| ix).collect();
        k += group.len();
        let rank: usize = group.iter().map(|ix| ix.len()).sum();
        let kind = if group.iter().any(|ix| ix.len() == 1) { ConstituentType::I } else { ConstituentType::II };
        let mut det = BigRational::one();
        for ix in &group {
            let sub: Vec<Vec<BigRational>> = ix.iter().map(|&i| ix.iter().map(|&j| w.a[i][j].clone()).collect()).collect();
            det *= rational_det(&sub);
        }
        let (units, det_unit_mod8, det_unit_class) = if p == 2 {
            let units = if kind == ConstituentType::I {
                group.iter().map(|ix| i64::from(unit_mod8(&w.a[ix[0]][ix[0]]))).collect()
            } else {
                Vec::new()
            };
            (units, Some(unit_mod8(&det)), None)
        } else {
            let units = group.iter().map(|ix| i64::from(legendre(&unit_part(&w.a[ix[0]][ix[0]], p), p))).collect();
            (units, None, Some(legendre(&unit_part(&det, p), p)))
        };
        constituents.push(Constituent { scale_exp: scale, rank, kind, units, det_unit_mod8, det_unit_class });
    }
    if p == 2 {
        canonicalize_units(&mut constituents);
    }
    JordanSplitting { prime: p, constituents, transform, blocks: block_matrix }
}

/// Entry of the 2-adic symbol after reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub scale_exp: u32,
    pub rank: usize,
    pub kind: ConstituentType,
    /// `+1` when the determinant unit is `+-1 mod 8`, else `-1`.
    pub sign: i8,
    /// Oddity of the compartment this entry starts, 0 elsewhere.
    pub oddity: u8,
}

fn sign_mod8(d: u8) -> i8 {
    if d == 1 || d == 7 {
        1
    } else {
        -1
    }
}

/// Canonical 2-adic symbol of constituents given with their raw units.
///
/// Compartments are maximal runs of type I constituents at consecutive
/// scales; only their total oddity is invariant, so it is moved to the first
/// member. Trains link neighbours whose scales differ by 1 (unless both are
/// type II) or by 2 (both type I); signs walk pairwise inside a train, each
/// step adding 4 to the oddity of every compartment it touches, until only
/// the first sign of a train can be negative.
pub fn canonical_symbol2(cs: &[Constituent]) -> Vec<SymbolEntry> {
    let mut sym: Vec<SymbolEntry> = cs
        .iter()
        .map(|c| SymbolEntry {
            scale_exp: c.scale_exp,
            rank: c.rank,
            kind: c.kind,
            sign: sign_mod8(c.det_unit_mod8.expect("2-adic constituent")),
            oddity: (c.units.iter().sum::<i64>().rem_euclid(8)) as u8,
        })
        .collect();
    let n = sym.len();
    // compartment[i] = index of the first member of i's compartment
    let mut compartment: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if sym[i].kind != ConstituentType::I {
            continue;
        }
        let joins = i > 0 && sym[i - 1].kind == ConstituentType::I && sym[i].scale_exp == sym[i - 1].scale_exp + 1;
        compartment[i] = Some(if joins { compartment[i - 1].unwrap() } else { i });
    }
    for i in 0..n {
        if let Some(h) = compartment[i] {
            if h != i {
                sym[h].oddity = (sym[h].oddity + sym[i].oddity) % 8;
                sym[i].oddity = 0;
            }
        }
    }
    let linked = |a: &SymbolEntry, b: &SymbolEntry| {
        let odd = (a.kind == ConstituentType::I, b.kind == ConstituentType::I);
        match b.scale_exp - a.scale_exp {
            1 => odd.0 || odd.1,
            2 => odd.0 && odd.1,
            _ => false,
        }
    };
    for i in (1..n).rev() {
        if sym[i].sign < 0 && linked(&sym[i - 1], &sym[i]) {
            sym[i].sign = 1;
            sym[i - 1].sign = -sym[i - 1].sign;
            let mut touched: Vec<usize> = [compartment[i - 1], compartment[i]].into_iter().flatten().collect();
            touched.dedup();
            for h in touched {
                sym[h].oddity = (sym[h].oddity + 4) % 8;
            }
        }
    }
    sym
}

/// Replaces raw 2-adic units by the least `(det, units)` assignment with
/// the same canonical symbol.
fn canonicalize_units(cs: &mut [Constituent]) {
    let target = canonical_symbol2(cs);
    let options: Vec<Vec<(u8, Vec<i64>)>> = cs
        .iter()
        .map(|c| match c.kind {
            ConstituentType::II => vec![(3, Vec::new()), (7, Vec::new())],
            ConstituentType::I => sorted_unit_tuples(c.rank)
                .into_iter()
                .map(|u| ((u.iter().product::<i64>() % 8) as u8, u))
                .collect(),
        })
        .collect();
    let mut best: Option<(Vec<u8>, Vec<Vec<i64>>)> = None;
    let mut pick = vec![0usize; cs.len()];
    let mut trial = cs.to_vec();
    loop {
        for (k, c) in trial.iter_mut().enumerate() {
            let (d, u) = &options[k][pick[k]];
            c.det_unit_mod8 = Some(*d);
            c.units = u.clone();
        }
        if canonical_symbol2(&trial) == target {
            let key = (
                trial.iter().map(|c| c.det_unit_mod8.unwrap()).collect::<Vec<_>>(),
                trial.iter().map(|c| c.units.clone()).collect::<Vec<_>>(),
            );
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        // odometer over the option lists
        let mut k = 0;
        while k < pick.len() {
            pick[k] += 1;
            if pick[k] < options[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            break;
        }
    }
    let (dets, units) = best.expect("the raw units realize their own symbol");
    for ((c, d), u) in cs.iter_mut().zip(dets).zip(units) {
        c.det_unit_mod8 = Some(d);
        c.units = u;
    }
}

fn sorted_unit_tuples(rank: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..rank {
        let mut next = Vec::new();
        for t in &out {
            for u in [1i64, 3, 5, 7] {
                if t.last().is_none_or(|&l| u >= l) {
                    let mut t = t.clone();
                    t.push(u);
                    next.push(t);
                }
            }
        }
        out = next;
    }
    out
}

/// No improper constituent at 2, i.e. the form has an orthogonal basis over `Z_2`.
pub fn is_diagonalizable2(g: &GramMatrix) -> bool {
    jordan_split(g, 2).constituents.iter().all(|c| c.kind == ConstituentType::I)
}

/// `ord_p` of the determinant as recovered from the constituents.
pub fn det_valuation(js: &JordanSplitting) -> u32 {
    js.constituents.iter().map(|c| c.scale_exp * c.rank as u32).sum()
}

impl Constituent {
    pub fn summary(&self) -> String {
        let kind = match self.kind {
            ConstituentType::I => "I",
            ConstituentType::II => "II",
        };
        let mut s = format!("2^{} rank {} type {}", self.scale_exp, self.rank, kind);
        if let Some(d) = self.det_unit_mod8 {
            s.push_str(&format!(" det-unit {d}"));
        }
        if let Some(c) = self.det_unit_class {
            s.push_str(&format!(" det-class {c}"));
        }
        s
    }
}

impl JordanSplitting {
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .constituents
            .iter()
            .map(|c| {
                let s = c.summary();
                if self.prime == 2 {
                    s
                } else {
                    s.replacen("2^", &format!("{}^", self.prime), 1)
                }
            })
            .collect();
        parts.join(" + ")
    }
}
