use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use ternary_au::arith::FactorConfig;
use ternary_au::classifier::{ClauseId, Status, Verdict};
use ternary_au::coset::{normalize, InstanceInput};
use ternary_au::generate::GeneratorConfig;
use ternary_au_cli::commands::{EXIT_INCONSISTENT, EXIT_INVALID, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};
use ternary_au_cli::instance_file::{parse, render};
use ternary_au_cli::{cmd_classify, cmd_enumerate, cmd_generate, cmd_verify, cmd_verify_with, Format, GenerateOptions, Options, Report};

const TRIANGULAR: &str = "# three triangular numbers\nform = polynomial\nquadratic = 4 0 0 4 0 4\nlinear = 4 4 4\nconstant = 0\n";
const DIAG_2_2_18: &str = "form = lattice\ngram = 2 0 0 2 0 18\nw = 1 1 0\n";

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn machine() -> Options {
    Options { format: Format::Machine, ..Default::default() }
}

fn parsed(out: &ternary_au_cli::Output) -> Report {
    Report::from_machine(&out.stdout).expect("machine report")
}

#[test]
fn parses_both_schemas_with_comments() {
    let p = parse(TRIANGULAR).unwrap();
    assert_eq!(p, InstanceInput::polynomial([4, 0, 0, 4, 0, 4], [4, 4, 4], 0));
    let l = parse("form = lattice   # trailing comment\n\n  gram = 2 0 0 2 0 8\nw = 1 1 0\n").unwrap();
    assert_eq!(l, InstanceInput::lattice([2, 0, 0, 2, 0, 8], [1, 1, 0]));
    // constant may be left out
    let p = parse("form = polynomial\nquadratic = 1 0 0 1 0 1\nlinear = 1 0 0\n").unwrap();
    assert_eq!(p, InstanceInput::polynomial([1, 0, 0, 1, 0, 1], [1, 0, 0], 0));
}

#[test]
fn parse_errors_name_the_line() {
    let cases = [
        ("form = lattice\ngram = 2 0 0 2 0 x\nw = 1 1 0\n", 2, "not an integer"),
        ("form = lattice\ngram = 2 0 0 2 0\nw = 1 1 0\n", 2, "takes 6 integers"),
        ("form = lattice\ngram = 2 0 0 2 0 8\nw = 1 1 0\nw = 1 0 0\n", 4, "duplicate"),
        ("form = lattice\ncolour = blue\n", 2, "unknown key"),
        ("form = lattice\ngram 2 0 0 2 0 8\n", 2, "key = value"),
        ("form = cubic\n", 1, "polynomial"),
        ("form = lattice\ngram = 2 0 0 2 0 8\n", 1, "needs a `w`"),
        ("form = lattice\ngram = 2 0 0 2 0 8\nw = 1 1 0\nlinear = 1 1 1\n", 4, "does not belong"),
    ];
    for (text, line, needle) in cases {
        let e = parse(text).unwrap_err();
        assert_eq!(e.line, Some(line), "{text:?}: {e}");
        assert!(e.to_string().contains(needle), "{text:?}: {e}");
        assert!(e.to_string().starts_with(&format!("line {line}:")));
    }
    assert!(parse("# nothing\n").unwrap_err().to_string().contains("form"));
}

#[test]
fn render_round_trips() {
    for input in [
        InstanceInput::polynomial([4, 0, 0, 4, 0, 4], [4, 4, 4], -7),
        InstanceInput::lattice([12, -3, 0, 5, 1, 9], [1, 0, 1]),
    ] {
        assert_eq!(parse(&render(&input)).unwrap(), input);
    }
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_classify(&file(dir.path(), "tri.txt", TRIANGULAR), &machine());
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let r = parsed(&out);
    let v = r.verdict.unwrap();
    assert_eq!((v.status, v.clause), (Status::AlmostUniversal, Some(ClauseId::C3a)));
    let inv = r.invariants.unwrap();
    assert_eq!((inv.m, inv.alpha, inv.beta, inv.lambda), (2, 3, 0, 1));
    assert_eq!((inv.epsilon.as_str(), inv.rad_odd.as_str(), inv.d_n.as_str()), ("3", "1", "64"));
    // polynomial input is echoed as given and canonicalized to lattice form
    assert_eq!(r.echo.form, "polynomial");
    assert_eq!(inv.w, ["1", "1", "1"]);

    let out = cmd_classify(&file(dir.path(), "six.txt", "form = lattice\ngram = 6 0 0 6 0 6\nw = 1 1 0\n"), &machine());
    assert_eq!(out.code, EXIT_INVALID);
    assert_eq!(parsed(&out).verdict.unwrap().status, Status::AssumptionViolated);

    let nc = "form = polynomial\nquadratic = 1 1 0 1 0 1\nlinear = 0 0 0\n";
    let out = cmd_classify(&file(dir.path(), "nc.txt", nc), &machine());
    assert_eq!(out.code, EXIT_INVALID);
    let v = parsed(&out).verdict.unwrap();
    assert_eq!(v.status, Status::AssumptionViolated);
    assert!(v.trace[0].inputs.contains("x1x2"));

    let out = cmd_classify(&file(dir.path(), "bad.txt", "form = lattice\ngram = 1 2\nw = 1 0 0\n"), &machine());
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("line 2"));
}

#[test]
fn machine_reports_round_trip_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let tri = file(dir.path(), "tri.txt", TRIANGULAR);
    let d18 = file(dir.path(), "d18.txt", DIAG_2_2_18);
    let opts = Options { bound: 2000, ..machine() };
    for out in [cmd_classify(&tri, &opts), cmd_enumerate(&d18, &opts), cmd_verify(&d18, &opts), cmd_verify(&tri, &opts)] {
        let again = parsed(&out).to_machine();
        assert_eq!(again, out.stdout);
    }
    assert_eq!(cmd_classify(&d18, &opts), cmd_classify(&d18, &opts));
    assert_eq!(cmd_classify(&tri, &Options::default()), cmd_classify(&tri, &Options::default()));
}

#[test]
fn text_report_carries_the_machine_fields() {
    let dir = tempfile::tempdir().unwrap();
    let tri = file(dir.path(), "tri.txt", TRIANGULAR);
    let text = cmd_verify(&tri, &Options { bound: 1000, ..Default::default() }).stdout;
    for key in [
        "form", "quadratic", "linear", "constant", "gram", "alpha", "beta", "epsilon", "dN", "ord2_dN", "lambda", "rad_odd",
        "b_nu_exp", "jordan2", "g2", "status", "clause", "trace", "bound", "vectors", "largest_gap", "consistency",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn enumerate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let tri = file(dir.path(), "tri.txt", TRIANGULAR);
    let out = cmd_enumerate(&tri, &Options { bound: 10_000, ..machine() });
    assert_eq!(out.code, EXIT_OK);
    assert!(parsed(&out).spectrum.unwrap().exceptions.is_empty());

    let d18 = file(dir.path(), "d18.txt", DIAG_2_2_18);
    let out = cmd_enumerate(&d18, &Options { bound: 100, ..machine() });
    assert!(parsed(&out).spectrum.unwrap().exceptions.contains(&1));

    assert_eq!(cmd_enumerate(&tri, &Options { bound: 0, ..machine() }).code, EXIT_USAGE);
    let out = cmd_enumerate(&tri, &Options { bound: 10_000, enum_budget: Some(100), ..machine() });
    assert_eq!(out.code, EXIT_RESOURCE);
    assert!(out.stderr.contains("budget"));
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let opts = Options { bound: 10_000, ..machine() };
    for text in [TRIANGULAR, DIAG_2_2_18] {
        let out = cmd_verify(&file(dir.path(), "x.txt", text), &opts);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    }
}

#[test]
fn corrupted_classifier_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let d18 = file(dir.path(), "d18.txt", DIAG_2_2_18);
    let liar = |_: &_, _: &_| {
        Ok(Verdict { status: Status::AlmostUniversal, clause: Some(ClauseId::C3a), trace: Vec::new(), oracle_budget: None })
    };
    let out = cmd_verify_with(&d18, &Options { bound: 10_000, ..Default::default() }, &liar);
    assert_eq!(out.code, EXIT_INCONSISTENT);
    assert!(out.stderr.starts_with("INCONSISTENT"));
    assert!(out.stderr.contains("trace"));
}

#[test]
fn generate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let one = GenerateOptions { config: GeneratorConfig { count: 1, seed: 7, ..Default::default() }, out: dir.path().join("one") };
    let out = cmd_generate(&one);
    assert_eq!(out.code, EXIT_OK);
    let files: Vec<_> = fs::read_dir(dir.path().join("one")).unwrap().collect();
    assert_eq!(files.len(), 1);
    let text = fs::read_to_string(files[0].as_ref().unwrap().path()).unwrap();
    assert!(normalize(&parse(&text).unwrap(), &FactorConfig::default()).is_ok());

    let hundred = GenerateOptions { config: GeneratorConfig { count: 100, seed: 1, ..Default::default() }, out: dir.path().join("h") };
    assert_eq!(cmd_generate(&hundred).code, EXIT_OK);
    let mut n = 0;
    for f in fs::read_dir(dir.path().join("h")).unwrap() {
        let text = fs::read_to_string(f.unwrap().path()).unwrap();
        normalize(&parse(&text).unwrap(), &FactorConfig::default()).unwrap();
        n += 1;
    }
    assert_eq!(n, 100);
    // same seed, same corpus
    let again = GenerateOptions { out: dir.path().join("h2"), ..hundred.clone() };
    cmd_generate(&again);
    let a = fs::read_to_string(dir.path().join("h/instance-0042.txt")).unwrap();
    let b = fs::read_to_string(dir.path().join("h2/instance-0042.txt")).unwrap();
    assert_eq!(a, b);

    // entry bound 1 either yields valid files or gives up with a message
    let tiny = GenerateOptions {
        config: GeneratorConfig { count: 5, seed: 1, entry_bound: 1, max_rejections: 20_000, dyadic: false },
        out: dir.path().join("tiny"),
    };
    let out = cmd_generate(&tiny);
    match out.code {
        EXIT_OK => assert_eq!(out.stdout.lines().count(), 5),
        code => {
            assert_eq!(code, EXIT_RESOURCE);
            assert!(out.stderr.contains("gave up"));
        }
    }
    let zero = GenerateOptions {
        config: GeneratorConfig { count: 1, seed: 1, entry_bound: 0, max_rejections: 100, dyadic: false },
        out: dir.path().join("zero"),
    };
    let out = cmd_generate(&zero);
    assert_eq!(out.code, EXIT_RESOURCE);
    assert!(out.stderr.contains("gave up after 100"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ternary-au");
    let dir = tempfile::tempdir().unwrap();
    let tri = file(dir.path(), "tri.txt", TRIANGULAR);
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let t = tri.to_str().unwrap();

    let o = run(&["classify", t, "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::from_machine(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(r.verdict.unwrap().clause, Some(ClauseId::C3a));

    assert_eq!(run(&["enumerate", t, "--bound", "0"]).status.code(), Some(4));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(run(&["classify", t, "--format", "yaml"]).status.code(), Some(4));
    assert_eq!(run(&["classify", "/nonexistent/file.txt"]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let bad = file(dir.path(), "bad.txt", "form = lattice\ngram = 1 2 3 4 5 q\nw = 1 0 0\n");
    let o = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 2"));

    let out = dir.path().join("gen");
    let o = run(&["generate", "--count", "3", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 3);
}
