//! Reports in two renderings: aligned text, and JSON with a fixed key order.
//!
//! Integers that can grow without bound are carried as decimal strings so
//! the JSON stays exact in any consumer.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use ternary_au::classifier::{ClauseId, Status, TraceEntry, Verdict};
use ternary_au::coset::{CosetInstance, InstanceInput};
use ternary_au::jordan::{is_diagonalizable2, jordan_split};
use ternary_au::spectrum::{MissCandidate, Spectrum};
use ternary_au::verify::{Consistency, VerifyReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub echo: Echo,
    pub invariants: Option<Invariants>,
    pub verdict: Option<VerdictSummary>,
    pub spectrum: Option<SpectrumSummary>,
    pub verify: Option<VerifySummary>,
}

/// The instance as read, before normalization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Echo {
    pub form: String,
    pub quadratic: Option<Vec<String>>,
    pub linear: Option<Vec<String>>,
    pub constant: Option<String>,
    pub gram: Option<Vec<String>>,
    pub w: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    /// Canonical lattice form: upper triangle of the Gram matrix and `w = 2 nu`.
    pub gram: Vec<String>,
    pub w: Vec<String>,
    pub m: u32,
    pub alpha: u32,
    pub beta: u32,
    pub epsilon: String,
    #[serde(rename = "dN")]
    pub d_n: String,
    #[serde(rename = "ord2_dN")]
    pub ord2_d_n: u32,
    pub lambda: u8,
    pub rad_odd: String,
    pub b_nu_exp: Option<u32>,
    pub jordan2: String,
    pub g2: G2Summary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct G2Summary {
    pub gram: Vec<String>,
    pub norm_exp2: Option<u32>,
    pub diagonalizable2: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub status: Status,
    pub clause: Option<ClauseId>,
    pub trace: Vec<TraceEntry>,
    pub oracle_budget: Option<BudgetSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSummary {
    pub target: String,
    pub budget: u64,
    pub steps: u64,
    pub represented: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub bound: u64,
    pub vectors: u64,
    pub exception_count: usize,
    pub largest_gap: u64,
    pub exceptions: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub bound: u64,
    pub q_limit: u64,
    pub consistency: Consistency,
    pub reason: String,
    pub top_half_exceptions: Vec<u64>,
    pub exception_count: usize,
    pub predicted: Option<Vec<Miss>>,
    pub confirmed: Option<Vec<Miss>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Miss {
    pub q: u64,
    pub n: String,
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(BigInt::to_string).collect()
}

impl Echo {
    pub fn of(input: &InstanceInput) -> Echo {
        match input {
            InstanceInput::Polynomial { quadratic, linear, constant } => Echo {
                form: "polynomial".into(),
                quadratic: Some(strings(quadratic)),
                linear: Some(strings(linear)),
                constant: Some(constant.to_string()),
                gram: None,
                w: None,
            },
            InstanceInput::Lattice { gram, w } => Echo {
                form: "lattice".into(),
                quadratic: None,
                linear: None,
                constant: None,
                gram: Some(strings(gram)),
                w: Some(strings(w)),
            },
        }
    }
}

impl Invariants {
    pub fn of(inst: &CosetInstance) -> Invariants {
        let g2 = inst.complement_g2();
        Invariants {
            gram: strings(&inst.gram.upper()),
            w: strings(&inst.w),
            m: inst.conductor,
            alpha: inst.alpha,
            beta: inst.beta,
            epsilon: inst.epsilon.to_string(),
            d_n: inst.det.to_string(),
            ord2_d_n: inst.ord2_det,
            lambda: inst.lambda,
            rad_odd: inst.rad_odd.to_string(),
            b_nu_exp: inst.b_nu_exp.finite(),
            jordan2: jordan_split(&inst.gram, 2).summary(),
            g2: G2Summary {
                gram: strings(&g2.gram.upper()),
                norm_exp2: g2.norm_exp2.finite(),
                diagonalizable2: is_diagonalizable2(&g2.gram),
            },
        }
    }
}

impl VerdictSummary {
    pub fn of(v: &Verdict) -> VerdictSummary {
        VerdictSummary {
            status: v.status,
            clause: v.clause,
            trace: v.trace.clone(),
            oracle_budget: v.oracle_budget.as_ref().map(|b| BudgetSummary {
                target: b.target.to_string(),
                budget: b.budget,
                steps: b.steps,
                represented: b.represented,
            }),
        }
    }
}

impl SpectrumSummary {
    pub fn of(s: &Spectrum) -> SpectrumSummary {
        SpectrumSummary {
            bound: s.bound,
            vectors: s.vectors,
            exception_count: s.exceptions.len(),
            largest_gap: s.largest_gap(),
            exceptions: s.exceptions.clone(),
        }
    }
}

fn misses(v: &Option<Vec<MissCandidate>>) -> Option<Vec<Miss>> {
    v.as_ref().map(|c| c.iter().map(|m| Miss { q: m.q, n: m.n.to_string() }).collect())
}

impl VerifySummary {
    pub fn of(r: &VerifyReport, q_limit: u64) -> VerifySummary {
        VerifySummary {
            bound: r.bound,
            q_limit,
            consistency: r.consistency,
            reason: r.reason.clone(),
            top_half_exceptions: r.top_half_exceptions.clone(),
            exception_count: r.exception_count,
            predicted: misses(&r.predicted),
            confirmed: misses(&r.confirmed),
        }
    }
}

impl Report {
    pub fn new(input: &InstanceInput) -> Report {
        Report { echo: Echo::of(input), invariants: None, verdict: None, spectrum: None, verify: None }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => self.to_machine(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_machine(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let e = &self.echo;
        let _ = writeln!(out, "instance");
        let _ = writeln!(out, "  form          {}", e.form);
        for (key, v) in [("quadratic", &e.quadratic), ("linear", &e.linear), ("gram", &e.gram), ("w", &e.w)] {
            if let Some(v) = v {
                let _ = writeln!(out, "  {key:<13} {}", v.join(" "));
            }
        }
        if let Some(c) = &e.constant {
            let _ = writeln!(out, "  constant      {c}");
        }
        if let Some(i) = &self.invariants {
            let _ = writeln!(out, "invariants");
            let rows: [(&str, String); 13] = [
                ("gram", i.gram.join(" ")),
                ("w", i.w.join(" ")),
                ("m", i.m.to_string()),
                ("alpha", i.alpha.to_string()),
                ("beta", i.beta.to_string()),
                ("epsilon", i.epsilon.clone()),
                ("dN", i.d_n.clone()),
                ("ord2_dN", i.ord2_d_n.to_string()),
                ("lambda", i.lambda.to_string()),
                ("rad_odd", i.rad_odd.clone()),
                ("b_nu_exp", opt(i.b_nu_exp)),
                ("jordan2", i.jordan2.clone()),
                (
                    "g2",
                    format!(
                        "gram {} norm_exp2 {} diagonalizable2 {}",
                        i.g2.gram.join(" "),
                        opt(i.g2.norm_exp2),
                        i.g2.diagonalizable2
                    ),
                ),
            ];
            for (k, v) in rows {
                let _ = writeln!(out, "  {k:<13} {v}");
            }
        }
        if let Some(v) = &self.verdict {
            let _ = writeln!(out, "verdict");
            let _ = writeln!(out, "  status        {}", v.status);
            let _ = writeln!(out, "  clause        {}", v.clause.map_or("-", |c| c.as_str()));
            let _ = writeln!(out, "  trace");
            for t in &v.trace {
                let _ = writeln!(out, "    {:<22} {:<5} {}", t.predicate, t.value, t.inputs);
            }
            if let Some(b) = &v.oracle_budget {
                let rep = b.represented.map_or("unknown".to_string(), |r| r.to_string());
                let _ = writeln!(
                    out,
                    "  oracle_budget target {} budget {} steps {} represented {rep}",
                    b.target, b.budget, b.steps
                );
            }
        }
        if let Some(s) = &self.spectrum {
            let _ = writeln!(out, "spectrum");
            let _ = writeln!(out, "  bound         {}", s.bound);
            let _ = writeln!(out, "  vectors       {}", s.vectors);
            let _ = writeln!(out, "  exceptions    {}", s.exception_count);
            let _ = writeln!(out, "  largest_gap   {}", s.largest_gap);
            let _ = writeln!(out, "  list          {}", list(&s.exceptions));
        }
        if let Some(r) = &self.verify {
            let _ = writeln!(out, "verify");
            let _ = writeln!(out, "  bound         {}", r.bound);
            let _ = writeln!(out, "  q_limit       {}", r.q_limit);
            let _ = writeln!(out, "  consistency   {:?}", r.consistency);
            let _ = writeln!(out, "  reason        {}", r.reason);
            let _ = writeln!(out, "  exceptions    {}", r.exception_count);
            let _ = writeln!(out, "  top_half      {}", list(&r.top_half_exceptions));
            for (k, m) in [("predicted", &r.predicted), ("confirmed", &r.confirmed)] {
                if let Some(m) = m {
                    let items: Vec<String> = m.iter().map(|x| format!("{} (q={})", x.n, x.q)).collect();
                    let _ = writeln!(out, "  {k:<13} {}", if items.is_empty() { "none".into() } else { items.join(" ") });
                }
            }
        }
        out
    }
}

fn opt(v: Option<u32>) -> String {
    v.map_or("inf".to_string(), |k| k.to_string())
}

fn list(v: &[u64]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
    }
}
