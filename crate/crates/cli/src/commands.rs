use std::fs;
use std::path::{Path, PathBuf};

use ternary_au::arith::FactorConfig;
use ternary_au::classifier::{evaluate, ClassifierConfig, Status, Verdict};
use ternary_au::coset::{normalize, CosetInstance, InstanceInput};
use ternary_au::generate::{generate, GeneratorConfig};
use ternary_au::spectrum::{spectrum, SpectrumConfig, DEFAULT_BUDGET};
use ternary_au::verify::{check, Consistency};
use ternary_au::Error;

use crate::instance_file;
use crate::report::{Format, Invariants, Report, SpectrumSummary, VerdictSummary, VerifySummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

pub const DEFAULT_BOUND: u64 = 20_000;
pub const DEFAULT_QLIMIT: u64 = 50;

#[derive(Clone, Debug)]
pub struct Options {
    pub format: Format,
    pub factor: FactorConfig,
    /// Overrides both the clause (4) search budget and the spectrum budget.
    pub enum_budget: Option<u64>,
    pub bound: u64,
    pub q_limit: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            format: Format::Text,
            factor: FactorConfig::default(),
            enum_budget: None,
            bound: DEFAULT_BOUND,
            q_limit: DEFAULT_QLIMIT,
        }
    }
}

impl Options {
    fn classifier(&self) -> ClassifierConfig {
        let mut c = ClassifierConfig::default();
        if let Some(b) = self.enum_budget {
            c.enum_budget = b;
        }
        c
    }

    fn spectrum(&self) -> SpectrumConfig {
        SpectrumConfig { budget: self.enum_budget.unwrap_or(DEFAULT_BUDGET), ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn fail(code: i32, msg: impl Into<String>) -> Output {
        let mut stderr = msg.into();
        stderr.push('\n');
        Output { code, stdout: String::new(), stderr }
    }

    fn report(code: i32, report: &Report, format: Format) -> Output {
        Output { code, stdout: report.render(format), stderr: String::new() }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::FactorizationLimit(_) | Error::EnumerationBudgetExceeded { .. } | Error::Overflow(_) => EXIT_RESOURCE,
        _ => EXIT_INVALID,
    }
}

fn read_instance(path: &Path) -> Result<InstanceInput, Output> {
    let text = fs::read_to_string(path).map_err(|e| Output::fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    instance_file::parse(&text).map_err(|e| Output::fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

/// Reads and normalizes; an invalid instance comes back as a finished report.
fn load(path: &Path, opts: &Options) -> Result<(InstanceInput, CosetInstance), Output> {
    let input = read_instance(path)?;
    match normalize(&input, &opts.factor) {
        Ok(inst) => Ok((input, inst)),
        Err(e) => match Verdict::rejected(&e) {
            Some(v) => {
                let mut report = Report::new(&input);
                report.verdict = Some(VerdictSummary::of(&v));
                Err(Output::report(EXIT_INVALID, &report, opts.format))
            }
            None => Err(Output::fail(exit_code(&e), format!("{}: {e}", path.display()))),
        },
    }
}

pub fn cmd_classify(path: &Path, opts: &Options) -> Output {
    let (input, inst) = match load(path, opts) {
        Ok(x) => x,
        Err(out) => return out,
    };
    let mut report = Report::new(&input);
    report.invariants = Some(Invariants::of(&inst));
    match evaluate(&inst, &opts.classifier()) {
        Ok(v) => {
            report.verdict = Some(VerdictSummary::of(&v));
            let code = if v.status == Status::Inconclusive { EXIT_RESOURCE } else { EXIT_OK };
            Output::report(code, &report, opts.format)
        }
        Err(e) => Output::fail(exit_code(&e), format!("{}: {e}", path.display())),
    }
}

pub fn cmd_enumerate(path: &Path, opts: &Options) -> Output {
    if opts.bound == 0 {
        return Output::fail(EXIT_USAGE, "--bound must be positive");
    }
    let (input, inst) = match load(path, opts) {
        Ok(x) => x,
        Err(out) => return out,
    };
    let mut report = Report::new(&input);
    report.invariants = Some(Invariants::of(&inst));
    match spectrum(&inst, opts.bound, &opts.spectrum()) {
        Ok(s) => {
            report.spectrum = Some(SpectrumSummary::of(&s));
            Output::report(EXIT_OK, &report, opts.format)
        }
        Err(e) => Output::fail(exit_code(&e), format!("{}: {e}", path.display())),
    }
}

pub type Classifier<'a> = dyn Fn(&CosetInstance, &ClassifierConfig) -> ternary_au::Result<Verdict> + 'a;

pub fn cmd_verify(path: &Path, opts: &Options) -> Output {
    cmd_verify_with(path, opts, &evaluate)
}

/// [`cmd_verify`] with the classifier supplied by the caller.
pub fn cmd_verify_with(path: &Path, opts: &Options, classify: &Classifier<'_>) -> Output {
    if opts.bound == 0 {
        return Output::fail(EXIT_USAGE, "--bound must be positive");
    }
    let (input, inst) = match load(path, opts) {
        Ok(x) => x,
        Err(out) => return out,
    };
    let mut report = Report::new(&input);
    report.invariants = Some(Invariants::of(&inst));
    let verdict = match classify(&inst, &opts.classifier()) {
        Ok(v) => v,
        Err(e) => return Output::fail(exit_code(&e), format!("{}: {e}", path.display())),
    };
    report.verdict = Some(VerdictSummary::of(&verdict));
    if verdict.status == Status::Inconclusive {
        return Output::report(EXIT_RESOURCE, &report, opts.format);
    }
    let spec = match spectrum(&inst, opts.bound, &opts.spectrum()) {
        Ok(s) => s,
        Err(e) => return Output::fail(exit_code(&e), format!("{}: {e}", path.display())),
    };
    let r = match check(&inst, &verdict, &spec, opts.q_limit) {
        Ok(r) => r,
        Err(e) => return Output::fail(exit_code(&e), format!("{}: {e}", path.display())),
    };
    report.spectrum = Some(SpectrumSummary::of(&spec));
    report.verify = Some(VerifySummary::of(&r, opts.q_limit));
    let mut out = Output::report(EXIT_OK, &report, opts.format);
    if r.consistency == Consistency::Inconsistent {
        out.code = EXIT_INCONSISTENT;
        // the text report already carries the trace; keep it visible on stderr too
        out.stderr = format!("INCONSISTENT: {}\n{}", r.reason, Report { spectrum: None, ..report }.to_text());
    }
    out
}

#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub config: GeneratorConfig,
    pub out: PathBuf,
}

pub fn cmd_generate(opts: &GenerateOptions) -> Output {
    let instances = match generate(&opts.config) {
        Ok(v) => v,
        Err(e) => return Output::fail(EXIT_RESOURCE, e.to_string()),
    };
    if let Err(e) = fs::create_dir_all(&opts.out) {
        return Output::fail(EXIT_USAGE, format!("{}: {e}", opts.out.display()));
    }
    let c = &opts.config;
    let mut stdout = String::new();
    for (k, (input, _)) in instances.iter().enumerate() {
        let path = opts.out.join(format!("instance-{:04}.txt", k + 1));
        let text = format!(
            "# generated: seed {} entry-bound {}{} index {}\n{}",
            c.seed,
            c.entry_bound,
            if c.dyadic { " dyadic" } else { "" },
            k + 1,
            instance_file::render(input)
        );
        if let Err(e) = fs::write(&path, text) {
            return Output::fail(EXIT_USAGE, format!("{}: {e}", path.display()));
        }
        stdout.push_str(&format!("{}\n", path.display()));
    }
    Output { code: EXIT_OK, stdout, stderr: String::new() }
}
