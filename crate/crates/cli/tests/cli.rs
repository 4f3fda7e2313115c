use std::path::PathBuf;
use std::process::{Command, Output};

use bergpoly::{assemble_kernel, BergmanKernelForm, IntegerMatrix};
use serde_json::Value;

fn bergpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergpoly"))
        .args(args)
        .env_remove("BERGPOLY_MAX_N")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bergpoly-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn hartogs_latex() {
    let o = bergpoly(&["kernel", "--matrix", "1 -1 / 0 1", "--format", "latex"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).trim_end(),
        r"K(p,q) = \frac{1}{\pi^{2}} \cdot \frac{t_{2}}{\left(t_{2} - t_{1}\right)^{2}\left(1 - t_{2}\right)^{2}}"
    );
}

#[test]
fn unbounded_matrix_is_rejected() {
    let o = bergpoly(&["validate", "--matrix", "1 1 / 0 1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnboundedDomain"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn verify_example_is_clean() {
    let o = bergpoly(&["verify", "--matrix", "2 -1 / 0 1", "--window", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["mismatches"].as_array().unwrap().len(), 0);
    assert_eq!(report["checked"], report["matched"]);
    assert!(report["checked"].as_u64().unwrap() > 0);
}

#[test]
fn park_zhang_matches_kernel_bytes() {
    let special = bergpoly(&[
        "special", "--family", "pz", "--params", "1,1", "--format", "json",
    ]);
    let kernel = bergpoly(&["kernel", "--matrix", "1 -1 / 0 1", "--format", "json"]);
    assert_eq!(special.status.code(), Some(0), "{}", stderr(&special));
    assert_eq!(kernel.status.code(), Some(0));
    assert_eq!(special.stdout, kernel.stdout);
}

#[test]
fn special_families_agree_with_kernel() {
    let cases: &[&[&str]] = &[
        &["--family", "sig1", "--params", "2,3"],
        &["--family", "sig1", "--params", "1,2,3"],
        &["--family", "pz", "--params", "2,3"],
        &["--family", "pz", "--params", "1,2,1"],
        &["--family", "dim2", "--matrix", "3 -2 / -1 1"],
        &["--family", "det1", "--matrix", "1 -1 0 / 0 1 -1 / 0 0 1"],
    ];
    for args in cases {
        let mut full = vec!["special"];
        full.extend_from_slice(args);
        let o = bergpoly(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let form = BergmanKernelForm::from_json_value(&serde_json::from_str(&stdout(&o)).unwrap())
            .unwrap();
        assert!(form.equivalent(&assemble_kernel(form.source.matrix()).unwrap()));
    }
}

#[test]
fn special_parameter_errors() {
    let o = bergpoly(&["special", "--family", "pz", "--params", "2,4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("GcdViolation"));
    let o = bergpoly(&["special", "--family", "det1", "--matrix", "2 -1 / 0 1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NotUnimodular"));
    let o = bergpoly(&[
        "special",
        "--family",
        "dim2",
        "--matrix",
        "1 -1 0 / 0 1 -1 / 0 0 1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("WrongDimension"));
    let o = bergpoly(&["special", "--family", "sig1"]);
    assert_eq!(o.status.code(), Some(64));
    let o = bergpoly(&["special", "--family", "dim2", "--params", "1,2"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn invalid_input_exits_one() {
    for m in [
        "1 2 / 2 4",
        "1 1 / 0 1",
        "0 0 / 0 1",
        "1 x / 0 1",
        "1 2 3 / 4 5",
    ] {
        let o = bergpoly(&["kernel", "--matrix", m]);
        assert_eq!(o.status.code(), Some(1), "{m}");
        assert!(o.stdout.is_empty());
    }
    let o = bergpoly(&["validate", "--matrix", "1 2 / 2 4"]);
    assert!(stderr(&o).contains("SingularMatrix"));
    let o = bergpoly(&["kernel", "--matrix-file", "/nonexistent/bergpoly/matrix"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_64() {
    let cases: &[&[&str]] = &[
        &[],
        &["kernel"],
        &["frobnicate"],
        &["kernel", "--matrix", "1 -1 / 0 1", "--format", "yaml"],
        &["kernel", "--matrix", "1 -1 / 0 1", "--matrix-file", "x"],
        &["verify", "--matrix", "1 -1 / 0 1", "--window", "0"],
        &["verify", "--window", "3"],
        &["verify", "--matrix", "1 -1 / 0 1", "--point-p", "0.1,0.1"],
        &["eval", "--matrix", "1 -1 / 0 1", "--point-p", "0.1,0.1"],
        &[
            "eval",
            "--matrix",
            "1 -1 / 0 1",
            "--point-p",
            "0.1,zz",
            "--point-q",
            "0.1,0.1",
        ],
        &["--jobs", "0", "kernel", "--matrix", "1 -1 / 0 1"],
    ];
    for args in cases {
        assert_eq!(bergpoly(args).status.code(), Some(64), "{args:?}");
    }
    assert_eq!(bergpoly(&["--help"]).status.code(), Some(0));
}

#[test]
fn dimension_cap_from_environment() {
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_bergpoly"))
            .args(["validate", "--matrix", "1 0 0 / 0 1 0 / 0 0 1"])
            .env("BERGPOLY_MAX_N", cap)
            .output()
            .unwrap()
    };
    assert_eq!(run("3").status.code(), Some(0));
    let o = run("2");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceeds"));
    assert_eq!(run("lots").status.code(), Some(64));
}

#[test]
fn tampered_kernel_fails_verification() {
    let good = stdout(&bergpoly(&["kernel", "--matrix", "2 -1 / 0 1"]));
    let path = scratch("good.json", &good);
    let o = bergpoly(&[
        "verify",
        "--kernel-file",
        path.to_str().unwrap(),
        "--window",
        "12",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut form =
        BergmanKernelForm::from_json_value(&serde_json::from_str(&good).unwrap()).unwrap();
    let (e, _) = form.numerator.sorted_terms()[0].clone();
    form.numerator
        .add_term(e.clone(), num_rational::BigRational::from_integer(1.into()));
    let path = scratch("bad.json", &form.to_json_string());
    let o = bergpoly(&[
        "verify",
        "--kernel-file",
        path.to_str().unwrap(),
        "--window",
        "12",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["mismatches"].as_array().unwrap().len(), 1);
}

#[test]
fn non_canonical_kernel_exits_three() {
    // the same rational function with a common factor left in
    let mut form = assemble_kernel(&IntegerMatrix::parse("2 -1 / 0 1").unwrap()).unwrap();
    let f = form.denominator_factors[0].clone();
    form.numerator = &form.numerator * &(&f * &f);
    form.denominator_factors.push(f);
    let path = scratch("reducible.json", &form.to_json_string());
    let o = bergpoly(&[
        "verify",
        "--kernel-file",
        path.to_str().unwrap(),
        "--window",
        "12",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("CanonicityViolation"));
}

#[test]
fn json_output_is_deterministic_and_round_trips() {
    for m in ["1 -1 / 0 1", "3 -2 / -1 1", "2 -1 0 / 0 2 -1 / -1 0 2"] {
        let a = bergpoly(&["--jobs", "1", "kernel", "--matrix", m]);
        let b = bergpoly(&["--jobs", "4", "kernel", "--matrix", m]);
        assert_eq!(a.status.code(), Some(0), "{m}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{m}");
        let text = stdout(&a);
        let form =
            BergmanKernelForm::from_json_value(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(format!("{}\n", form.to_json_string()), text);
    }
}

#[test]
fn matrix_file_and_inline_agree() {
    let path = scratch("m.txt", "2 -1\n0 1\n");
    let a = bergpoly(&[
        "kernel",
        "--matrix-file",
        path.to_str().unwrap(),
        "--format",
        "text",
    ]);
    let b = bergpoly(&["kernel", "--matrix", "2 -1 / 0 1", "--format", "text"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let path = scratch("m.json", "[[2, -1], [0, 1]]");
    let c = bergpoly(&[
        "kernel",
        "--matrix-file",
        path.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(c.stdout, b.stdout);
}

#[test]
fn eval_matches_direct_evaluation() {
    let o = bergpoly(&[
        "eval",
        "--matrix",
        "1 -1 / 0 1",
        "--point-p",
        "0.3,0.5i",
        "--point-q",
        "0.2-0.1i,0.4",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (re, im) = (
        v["value"]["re"].as_f64().unwrap(),
        v["value"]["im"].as_f64().unwrap(),
    );

    use num_complex::Complex64 as C;
    let t1 = C::new(0.3, 0.0) * C::new(0.2, -0.1).conj();
    let t2 = C::new(0.0, 0.5) * C::new(0.4, 0.0);
    let pi2 = std::f64::consts::PI.powi(2);
    let expected = t2 / (pi2 * (t2 - t1).powi(2) * (C::new(1.0, 0.0) - t2).powi(2));
    assert!((C::new(re, im) - expected).norm() <= 1e-12 * expected.norm());
}

#[test]
fn eval_at_singularity_exits_one() {
    // t_2 = t_1 makes the first factor vanish
    let o = bergpoly(&[
        "eval",
        "--matrix",
        "1 -1 / 0 1",
        "--point-p",
        "0.5,0.5",
        "--point-q",
        "0.5,0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("singular"));
}

#[test]
fn verify_with_spot_check() {
    let o = bergpoly(&[
        "verify",
        "--matrix",
        "2 -1 / 0 1",
        "--window",
        "6",
        "--point-p",
        "0.3,0.5",
        "--point-q",
        "0.4,0.2i",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["spotCheck"]["relativeError"].as_f64().unwrap() < 1e-8);
}
