//! Almost-universality decision for a coset of conductor 2.
//!
//! After an odd-local gate and the range check `beta < alpha <= beta + 3`, the
//! clauses are tested in the fixed order 1a..1b.iii, 2a.i..2b.iii, 3a..3f, 4;
//! the first that holds is reported.

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::legendre;
use crate::coset::{CosetInstance, G2Lattice};
use crate::error::{Error, Result};
use crate::jordan::{is_diagonalizable2, jordan_split, ConstituentType, JordanSplitting};
use crate::lattice::IdealExponent;
use crate::local::{local_represents, represents_all_odd};
use crate::spectrum::{h_witness_budgeted, ShellSearch};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    AlmostUniversal,
    NotAlmostUniversal,
    AssumptionViolated,
    OutOfScope,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

macro_rules! clause_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum ClauseId { $($variant),* }

        impl ClauseId {
            pub const ALL: &'static [ClauseId] = &[$(ClauseId::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self { $(ClauseId::$variant => $name),* }
            }
        }

        impl FromStr for ClauseId {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(ClauseId::$variant),)*
                    _ => Err(Error::Malformed(format!("unknown clause id {s:?}"))),
                }
            }
        }
    };
}

clause_ids! {
    OddLocal => "odd-local",
    AlphaRange => "alpha-range",
    C1a => "1a",
    C1bi => "1b.i",
    C1bii => "1b.ii",
    C1biii => "1b.iii",
    C2ai => "2a.i",
    C2aii => "2a.ii",
    C2aiii => "2a.iii",
    C2aiv => "2a.iv",
    C2bi => "2b.i",
    C2bii => "2b.ii",
    C2biii => "2b.iii",
    C3a => "3a",
    C3b => "3b",
    C3c => "3c",
    C3d => "3d",
    C3e => "3e",
    C3f => "3f",
    C4 => "4",
    Exhausted => "exhausted",
}

impl ClauseId {
    /// Clauses whose truth implies almost-universality, in evaluation order.
    pub fn positive() -> &'static [ClauseId] {
        &ClauseId::ALL[2..20]
    }

    /// `alpha - beta` that a positive clause applies to (clause 4 covers 2 and 3).
    fn case(self) -> Option<&'static [u32]> {
        use ClauseId::*;
        match self {
            C1a | C1bi | C1bii | C1biii => Some(&[1]),
            C2ai | C2aii | C2aiii | C2aiv | C2bi | C2bii | C2biii => Some(&[2]),
            C3a | C3b | C3c | C3d | C3e | C3f => Some(&[3]),
            C4 => Some(&[2, 3]),
            _ => None,
        }
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ClauseId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ClauseId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub predicate: String,
    pub inputs: String,
    pub value: bool,
}

/// The global search behind clause (4).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub target: BigInt,
    pub budget: u64,
    pub steps: u64,
    /// `None` when the budget ran out.
    pub represented: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub clause: Option<ClauseId>,
    pub trace: Vec<TraceEntry>,
    pub oracle_budget: Option<OracleBudget>,
}

impl Verdict {
    /// The verdict for an instance rejected before classification.
    pub fn rejected(err: &Error) -> Option<Verdict> {
        let status = match err {
            Error::AssumptionViolated(_) | Error::NonClassicForm(..) | Error::NotPositiveDefinite | Error::Degenerate => {
                Status::AssumptionViolated
            }
            Error::OutOfScope(_) => Status::OutOfScope,
            _ => return None,
        };
        Some(Verdict {
            status,
            clause: None,
            trace: vec![TraceEntry { predicate: "normalize".into(), inputs: err.to_string(), value: false }],
            oracle_budget: None,
        })
    }

    pub fn is_au(&self) -> bool {
        self.status == Status::AlmostUniversal
    }

    /// True when clause (4) was reached and failed, i.e. the branch with a
    /// predicted progression of misses.
    pub fn on_spinor_branch(&self) -> bool {
        self.status == Status::NotAlmostUniversal
            && self.clause == Some(ClauseId::Exhausted)
            && self.trace.iter().any(|e| e.predicate == "4")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassifierConfig {
    /// Cap on search steps for the global representation test of clause (4).
    pub enum_budget: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { enum_budget: 50_000_000 }
    }
}

/// Lazily computed data shared by the clauses.
struct Ctx<'a> {
    inst: &'a CosetInstance,
    cfg: ClassifierConfig,
    jordan: OnceCell<JordanSplitting>,
    g2: OnceCell<G2Lattice>,
    g2_diag: OnceCell<bool>,
    oracle: Option<OracleBudget>,
}

/// `d - 3 beta`.
fn excess(inst: &CosetInstance) -> i64 {
    i64::from(inst.ord2_det) - 3 * i64::from(inst.beta)
}

impl<'a> Ctx<'a> {
    fn new(inst: &'a CosetInstance, cfg: ClassifierConfig) -> Self {
        Ctx { inst, cfg, jordan: OnceCell::new(), g2: OnceCell::new(), g2_diag: OnceCell::new(), oracle: None }
    }

    fn jordan(&self) -> &JordanSplitting {
        self.jordan.get_or_init(|| jordan_split(&self.inst.gram, 2))
    }

    fn n_diagonalizable(&self) -> bool {
        self.jordan().constituents.iter().all(|c| c.kind == ConstituentType::I)
    }

    fn g2(&self) -> &G2Lattice {
        self.g2.get_or_init(|| self.inst.complement_g2())
    }

    fn g2_diagonalizable(&self) -> bool {
        *self.g2_diag.get_or_init(|| is_diagonalizable2(&self.g2().gram))
    }

    fn b(&self) -> IdealExponent {
        self.inst.b_nu_exp
    }

    fn beta(&self) -> i64 {
        i64::from(self.inst.beta)
    }

    /// Some prime `q | rad(dN)'` with `(-lambda / q) = -1`.
    fn legendre_condition(&self) -> bool {
        let neg_lambda = BigInt::from(-i64::from(self.inst.lambda));
        self.inst
            .odd_primes
            .iter()
            .filter(|&&q| (&self.inst.rad_odd % q).is_zero())
            .any(|&q| legendre(&neg_lambda, q) == -1)
    }

    /// A binary constituent at 2 with unit determinant 5 mod 8; a rank-3
    /// single-scale constituent contributes the products of pairs of its units.
    fn binary_det5(&self) -> bool {
        self.jordan().constituents.iter().any(|c| match c.rank {
            2 => c.det_unit_mod8 == Some(5),
            3 if c.kind == ConstituentType::I => {
                let u = &c.units;
                [(0, 1), (0, 2), (1, 2)].iter().any(|&(i, j)| (u[i] * u[j]).rem_euclid(8) == 5)
            }
            _ => false,
        })
    }

    fn inputs(&self, id: ClauseId) -> String {
        let i = self.inst;
        let b = self.b();
        let d = i.ord2_det;
        let beta = i.beta;
        use ClauseId::*;
        match id {
            C1a => format!("b={b} beta={beta}"),
            C1bi => {
                let (s, n) = i.gram.scale_norm_exponents(2);
                format!("b={b} scale2={s} norm2={n} norm={}", i.gram.norm_gcd())
            }
            C1bii | C1biii => format!("b={b} d={d} beta={beta} diag2={}", self.n_diagonalizable()),
            C2ai | C2aii => format!("b={b} d={d} beta={beta}"),
            C2aiii | C3d => format!("b={b} rad={} lambda={}", i.rad_odd, i.lambda),
            C2aiv => format!("b={b} jordan2=[{}]", self.jordan().summary()),
            C2bi | C2bii => format!("b={b} d={d} beta={beta} g2norm={}", self.g2().norm_exp2),
            C2biii => format!("b={b} g2norm={} rad={} lambda={}", self.g2().norm_exp2, i.rad_odd, i.lambda),
            C3a => format!("g2={}", self.g2().gram),
            C3b | C3c => format!("g2norm={} d={d} beta={beta}", self.g2().norm_exp2),
            C3e => format!("rad={} eps={}", i.rad_odd, i.epsilon),
            C3f => format!("g2norm={} target={}", self.g2().norm_exp2, (BigInt::one() << i.alpha) * &i.q_nu),
            C4 => format!("rad={} q_nu={} beta={beta} alpha={}", i.rad_odd, i.q_nu, i.alpha),
            _ => String::new(),
        }
    }

    fn clause(&mut self, id: ClauseId) -> Result<bool> {
        let inst = self.inst;
        let beta = self.beta();
        let b = self.b();
        let e = excess(inst);
        let b_ge = |k: i64| b.finite().is_some_and(|v| i64::from(v) >= k);
        use ClauseId::*;
        Ok(match id {
            C1a => b.is(beta - 1),
            C1bi => {
                let (s, n) = inst.gram.scale_norm_exponents(2);
                b_ge(beta)
                    && s.is(beta + 1)
                    && n.is(beta + 2)
                    && inst.gram.norm_gcd() == BigInt::one() << (inst.beta + 2)
            }
            C1bii => b_ge(beta) && self.n_diagonalizable() && e == 3,
            C1biii => b_ge(beta) && self.n_diagonalizable() && e == 5 && b.is(beta + 1),
            C2ai => b.is(beta) && e.rem_euclid(2) == 1,
            C2aii => b.is(beta) && e == 4,
            C2aiii => b.is(beta) && self.legendre_condition(),
            C2aiv => b.is(beta) && self.binary_det5(),
            C2bi | C2bii | C2biii => {
                let guard = b.is(beta + 1) && self.g2().norm_exp2.is(beta + 2);
                guard
                    && match id {
                        C2bi => e.rem_euclid(2) == 1,
                        C2bii => e == 6,
                        _ => self.legendre_condition(),
                    }
            }
            C3a => !self.g2_diagonalizable(),
            C3b => {
                let alpha = i64::from(inst.alpha);
                self.g2().norm_exp2.is(alpha) && (e.rem_euclid(2) == 0 || e == 9)
            }
            C3c => self.g2().norm_exp2.is(i64::from(inst.alpha) + 1) && e.rem_euclid(2) == 1,
            C3d => self.legendre_condition(),
            C3e => inst.rad_odd.mod_floor(&BigInt::from(8)) != inst.epsilon.mod_floor(&BigInt::from(8)),
            C3f => {
                let g2 = self.g2();
                g2.norm_exp2.is(i64::from(inst.alpha))
                    && !local_represents(&g2.gram, &((BigInt::one() << inst.alpha) * &inst.q_nu), 2).represented
            }
            C4 => self.clause4()?,
            OddLocal | AlphaRange | Exhausted => {
                return Err(Error::PreconditionViolated(format!("{id} is not a clause of the disjunction")))
            }
        })
    }

    fn clause4(&mut self) -> Result<bool> {
        let inst = self.inst;
        let t = (&inst.rad_odd << inst.beta) - &inst.q_nu;
        let d = BigInt::one() << inst.alpha;
        let (target, r) = t.div_rem(&d);
        if !r.is_zero() {
            return Ok(false);
        }
        let ShellSearch { witness, steps, exhausted } = h_witness_budgeted(inst, &target, self.cfg.enum_budget)?;
        let represented = (!exhausted).then_some(witness.is_some());
        self.oracle = Some(OracleBudget { target, budget: self.cfg.enum_budget, steps, represented });
        if exhausted {
            return Err(Error::EnumerationBudgetExceeded { budget: self.cfg.enum_budget });
        }
        Ok(witness.is_some())
    }
}

/// Truth value of one clause, without gates. The clause must belong to the
/// instance's case `alpha - beta`.
pub fn evaluate_clause(inst: &CosetInstance, id: ClauseId, cfg: &ClassifierConfig) -> Result<bool> {
    let k = inst.alpha.checked_sub(inst.beta);
    match (id.case(), k) {
        (Some(cases), Some(k)) if cases.contains(&k) => Ctx::new(inst, *cfg).clause(id),
        _ => Err(Error::PreconditionViolated(format!(
            "clause {id} does not apply when alpha = {} and beta = {}",
            inst.alpha, inst.beta
        ))),
    }
}

pub fn evaluate(inst: &CosetInstance, cfg: &ClassifierConfig) -> Result<Verdict> {
    let mut trace = Vec::new();
    let done = |status, clause, trace, oracle_budget| Ok(Verdict { status, clause: Some(clause), trace, oracle_budget });

    for &p in &inst.odd_primes {
        let ok = represents_all_odd(&inst.gram, p);
        trace.push(TraceEntry { predicate: "odd-local".into(), inputs: format!("p={p}"), value: ok });
        if !ok {
            return done(Status::NotAlmostUniversal, ClauseId::OddLocal, trace, None);
        }
    }
    let k = i64::from(inst.alpha) - i64::from(inst.beta);
    let in_range = (1..=3).contains(&k);
    trace.push(TraceEntry {
        predicate: "alpha-range".into(),
        inputs: format!("alpha={} beta={}", inst.alpha, inst.beta),
        value: in_range,
    });
    if !in_range {
        return done(Status::NotAlmostUniversal, ClauseId::AlphaRange, trace, None);
    }
    let k = k as u32;

    let mut ctx = Ctx::new(inst, *cfg);
    if k == 2 && inst.b_nu_exp.is(ctx.beta()) {
        trace.push(TraceEntry {
            predicate: "check:diagonalizable2".into(),
            inputs: format!("jordan2=[{}]", ctx.jordan().summary()),
            value: ctx.n_diagonalizable(),
        });
    }
    for &id in ClauseId::positive() {
        if !id.case().is_some_and(|c| c.contains(&k)) {
            continue;
        }
        if id == ClauseId::C4 {
            let modulus = BigInt::one() << k;
            let congruent = (&inst.epsilon - &inst.rad_odd).mod_floor(&modulus).is_zero();
            trace.push(TraceEntry {
                predicate: "check:eps-rad".into(),
                inputs: format!("eps={} rad={} mod 2^{k}", inst.epsilon, inst.rad_odd),
                value: congruent,
            });
        }
        let inputs = ctx.inputs(id);
        match ctx.clause(id) {
            Ok(value) => {
                trace.push(TraceEntry { predicate: id.as_str().into(), inputs, value });
                if value {
                    return done(Status::AlmostUniversal, id, trace, ctx.oracle.take());
                }
            }
            Err(Error::EnumerationBudgetExceeded { .. }) => {
                return Ok(Verdict { status: Status::Inconclusive, clause: None, trace, oracle_budget: ctx.oracle.take() });
            }
            Err(e) => return Err(e),
        }
    }
    done(Status::NotAlmostUniversal, ClauseId::Exhausted, trace, ctx.oracle.take())
}
