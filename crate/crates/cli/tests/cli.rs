use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use segrejet_cli::{canonical_surface, classify, load_surface, point_arg, CliError, ErrorKind};
use segrejet_core::document::SeriesDocument;
use segrejet_core::segre::segre_graph;
use segrejet_core::{Error, GaussianRational};
use serde_json::Value;
use tempfile::NamedTempFile;

const HYPERQUADRIC: &str = "n = 1\nIm(w) - z*conj(z)\n";
const QUARTIC: &str = "n = 1\nIm(w) - z*conj(z) - z^2*conj(z)^2\n";
const TWO_DIM: &str = "n = 2\nIm(w) - z1*conj(z1) - 2*z2*conj(z2) - 1/5*Re(w)*z1*conj(z1) - Re(z1^2*conj(z2))\n";

fn surface(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn segrejet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segrejet")).args(args).output().unwrap()
}

fn on(file: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--surface", file.to_str().unwrap()];
    all.extend_from_slice(args);
    segrejet(&all)
}

/// Checks the exit status and the JSON error record on stderr.
fn expect_error(out: &Output, code: i32, kind: &str) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let last = stderr.lines().last().expect("an error record");
    let record: Value = serde_json::from_str(last).unwrap();
    assert_eq!(record["error"]["exit_code"], code);
    assert_eq!(record["error"]["kind"], kind);
    assert!(record["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
}

fn structured(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn successful_commands_exit_zero() {
    let f = surface(TWO_DIM);
    for args in [
        vec!["levi"],
        vec!["normalize"],
        vec!["segre", "--point", "1/2, 1/3"],
        vec!["phi"],
        vec!["pde"],
        vec!["integrability"],
        vec!["contact", "--point", "1/2, 1/3*i"],
        vec!["reflect", "--samples", "6"],
    ] {
        let mut a = vec!["--order", "5"];
        a.extend(args.iter().copied());
        let out = on(f.path(), &a);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(segrejet(&["--help"]).status.code(), Some(0));
}

#[test]
fn parse_errors_exit_2() {
    let f = surface(HYPERQUADRIC);
    expect_error(&segrejet(&["levi"]), 2, "parse");
    expect_error(&segrejet(&["--surface", "/nonexistent/surface", "levi"]), 2, "parse");
    expect_error(&on(f.path(), &["frobnicate"]), 2, "parse");
    expect_error(&on(f.path(), &["--order", "1", "levi"]), 2, "parse");
    expect_error(&on(f.path(), &["--tol", "-1", "reflect"]), 2, "parse");
    expect_error(&on(f.path(), &["segre", "--point", "1/2 +"]), 2, "parse");
    for bad in [
        "n = 1\nIm(w) - z^(1/2)\n",
        "n = 1\nIm(w) - exp(z)\n",
        "Im(w) - z*conj(z)\n",
        "n = 1\nIm(w) - z2*conj(z2)\n",
        "n = 1\nIm(w) - (z*conj(z)\n",
    ] {
        expect_error(&on(surface(bad).path(), &["levi"]), 2, "parse");
    }
}

#[test]
fn validation_errors_exit_3() {
    let f = surface(HYPERQUADRIC);
    expect_error(&on(surface("n = 1\nIm(w) - i*z\n").path(), &["levi"]), 3, "validation");
    expect_error(&on(surface("n = 1\nIm(w) - (z*conj(z))^2\n").path(), &["levi"]), 3, "validation");
    expect_error(&on(surface("n = 1\n1 + Im(w) - z*conj(z)\n").path(), &["levi"]), 3, "validation");
    expect_error(
        &on(surface("n = 2\nIm(w) - z1*conj(z1) + z2*conj(z2)\n").path(), &["normalize"]),
        3,
        "validation",
    );
    expect_error(&on(f.path(), &["segre", "--point", "1/2, 0"]), 3, "validation");
    expect_error(&on(f.path(), &["segre", "--point", "1, 2, 3"]), 3, "validation");
    expect_error(&on(f.path(), &["--order", "2", "integrability"]), 3, "validation");
}

#[test]
fn convergence_failures_exit_4() {
    let f = surface(QUARTIC);
    let out = on(f.path(), &["--tol", "1e-30", "reflect", "--samples", "4"]);
    expect_error(&out, 4, "convergence");
    // the report itself still reaches stdout
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail"));
}

#[test]
fn internal_errors_map_to_5() {
    for e in [Error::RingMismatch, Error::UnknownVariable("q".into()), Error::NotExactlySolvable("x".into())] {
        let c = CliError::from(e);
        assert_eq!(c.kind, ErrorKind::Internal);
        assert_eq!(c.record()["error"]["exit_code"], 5);
    }
    assert_eq!(classify(&Error::Convergence { iterations: 3, residual: 1.0 }), ErrorKind::Convergence);
}

#[test]
fn emitted_surface_reparses_to_itself() {
    for text in [
        HYPERQUADRIC,
        QUARTIC,
        TWO_DIM,
        "n = 1\n# comment\nIm(w) - (z + 1/2*i*z^2)*conj(z + 1/2*i*z^2) - -3/7*Re(z^3*conj(z))\n",
        "n = 2\nIm(w) - Re(z1*conj(z2)) - z1*conj(z1) - z2*conj(z2) - 0.25*Im(w*z1^2)\n",
    ] {
        let f = surface(text);
        let first = structured(&on(f.path(), &["--format", "structured", "levi"]));
        let emitted = first["surface"].as_str().unwrap().to_string();
        let g = surface(&emitted);
        let second = structured(&on(g.path(), &["--format", "structured", "levi"]));
        assert_eq!(second["surface"].as_str().unwrap(), emitted);
        assert_eq!(canonical_surface(&emitted).unwrap(), emitted);
        assert_eq!(second["levi_form"], first["levi_form"]);
    }
}

#[test]
fn structured_series_reingest_identically() {
    let f = surface(TWO_DIM);
    let out = structured(&on(f.path(), &["--order", "6", "--format", "structured", "segre", "--point", "1/3, -1/4"]));
    let doc: SeriesDocument = serde_json::from_value(out["graph"].clone()).unwrap();
    let series = doc.to_series().unwrap();
    assert_eq!(SeriesDocument::from_series(&series), doc);

    let m = load_surface(TWO_DIM, 6).unwrap();
    let q = point_arg(&m, "1/3, -1/4").unwrap();
    assert_eq!(segre_graph(&m, &q).unwrap().graph, series);
}

#[test]
fn phi_reports_agreement_and_the_quartic_value() {
    let f = surface(QUARTIC);
    let out = structured(&on(f.path(), &["--format", "structured", "phi", "--point", "1/2 + 1/3*i"]));
    assert_eq!(out["verdict"], "exact");
    assert_eq!(out["point"]["verdict"], "exact");
    // 4i·ā² at a = 1/2 + i/3
    let a = GaussianRational::from_fracs(1, 2, 1, 3);
    let want = &(&GaussianRational::from_ints(0, 4) * &a.conj()) * &a.conj();
    let entry = &out["point"]["oracle"][0][0];
    assert_eq!(entry["re"], segrejet_core::scalar::fraction_string(&want.re));
    assert_eq!(entry["im"], segrejet_core::scalar::fraction_string(&want.im));
}

#[test]
fn hyperquadric_is_flat() {
    let f = surface(HYPERQUADRIC);
    let pde = structured(&on(f.path(), &["--format", "structured", "pde"]));
    for row in pde["phi"].as_array().unwrap() {
        for s in row.as_array().unwrap() {
            assert!(s["terms"].as_array().unwrap().is_empty());
        }
    }
    let integ = structured(&on(f.path(), &["--format", "structured", "integrability"]));
    assert_eq!(integ["zero"], true);
    let text = String::from_utf8(on(f.path(), &["reflect", "--samples", "8"]).stdout).unwrap();
    assert!(text.trim_end().ends_with("pass"));
}
