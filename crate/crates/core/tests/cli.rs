use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mrlocal::artifact::{self, reseal, CodeArtifactFile};
use mrlocal::codec::{pack_symbols, symbol_width};
use mrlocal::galois::FieldSpec;
use tempfile::TempDir;

fn mrlocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrlocal"))
        .args(args)
        .env_remove("MRLOCAL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build(dir: &TempDir, name: &str, construction: &str, k: u32, r: u32, h: u32) -> PathBuf {
    let path = dir.path().join(name);
    let (k, r, h) = (k.to_string(), r.to_string(), h.to_string());
    let out = mrlocal(&[
        "build",
        "--construction",
        construction,
        "--k",
        &k,
        "--r",
        &r,
        "--h",
        &h,
        "--out",
        p(&path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    path
}

#[test]
fn build_reports_improved_field_size() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("improved.json");
    let out = mrlocal(&[
        "build",
        "--construction",
        "vandermonde-improved",
        "--k",
        "2",
        "--r",
        "3",
        "--h",
        "4",
        "--out",
        p(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("q = 64 (formula 64), t = 4, n = 8, g = 2"),
        "{text}"
    );
    let (_, code) = artifact::load(&path).unwrap();
    assert_eq!(code.field_order(), 64);
}

#[test]
fn build_sd_desk_instance() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let (_, code) = artifact::load(&path).unwrap();
    assert_eq!(code.field_order(), 512);
    assert_eq!(code.params().n, 16);
}

#[test]
fn invalid_params_exit_2_with_condition() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("x.json");
    let out = mrlocal(&[
        "build",
        "--construction",
        "linearized",
        "--k",
        "1",
        "--r",
        "3",
        "--h",
        "2",
        "--out",
        p(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("g >= 2"), "{}", stderr(&out));
    assert!(!out_path.exists());

    let out = mrlocal(&[
        "build",
        "--construction",
        "vandermonde-improved",
        "--k",
        "3",
        "--r",
        "3",
        "--h",
        "3",
        "--out",
        p(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("h ≢ 1 (mod g)"), "{}", stderr(&out));

    let out = mrlocal(&[
        "build",
        "--construction",
        "nonsense",
        "--k",
        "1",
        "--r",
        "3",
        "--h",
        "2",
        "--out",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = mrlocal(&["verify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn normalize_rounds_up() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("lin.json");
    let out = mrlocal(&[
        "build",
        "--construction",
        "linearized",
        "--k",
        "5",
        "--r",
        "3",
        "--h",
        "2",
        "--normalize",
        "--out",
        p(&path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("normalized k: 5 -> 10"));
}

#[test]
fn verify_sd_desk_instance() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let out = mrlocal(&[
        "verify",
        p(&path),
        "--property",
        "sd",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("880 patterns checked, 0 failing -> PASS"));
}

#[test]
fn census_counts_failures() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let out = mrlocal(&["verify", p(&path), "--property", "mr", "--census"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("census:")).unwrap();
    let failing: u64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(
        failing > 0 && line.ends_with("of 56320 patterns failing"),
        "{line}"
    );
}

#[test]
fn corrupted_artifact_report_matches_exit() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "general.json", "vandermonde-general", 3, 3, 3);
    let text = std::fs::read_to_string(&path).unwrap();

    // Editing without resealing is rejected as a usage error.
    let mut file: CodeArtifactFile = serde_json::from_str(&text).unwrap();
    // Column 0 has point 0, so its heavy entries are already zero; column 1 does not.
    assert_ne!(file.body.parity_check[2][1], vec![0; 6]);
    file.body.parity_check[2][1] = vec![0; 6];
    let edited = file.to_json();
    std::fs::write(&path, &edited).unwrap();
    let out = mrlocal(&["verify", p(&path), "--property", "mr"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("hash mismatch"));

    std::fs::write(&path, reseal(&edited).unwrap()).unwrap();
    let out = mrlocal(&["verify", p(&path), "--property", "mr", "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let passed = report["passed"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if passed { 0 } else { 1 }));
    // Whether one zeroed entry breaks a pattern is up to the verifier; the
    // exit status must agree with the report and a failure names columns.
    if !passed {
        let cols = report["first_counterexample"]["pattern"]["columns"]
            .as_array()
            .unwrap();
        assert_eq!(cols.len(), 5);
    }
}

#[test]
fn corrupting_a_whole_column_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "general.json", "vandermonde-general", 3, 3, 3);
    let mut file: CodeArtifactFile =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for row in 2..5 {
        file.body.parity_check[row][1] = vec![0; 6];
    }
    std::fs::write(&path, reseal(&file.to_json()).unwrap()).unwrap();
    let out = mrlocal(&["verify", p(&path), "--property", "mr"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("first counterexample"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn sample_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let args = [
        "verify",
        p(&path),
        "--property",
        "mr",
        "--mode",
        "sample",
        "500",
        "--seed",
        "42",
        "--json",
    ];
    let a = mrlocal(&args);
    let b = mrlocal(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    let c = mrlocal(&[
        "verify",
        p(&path),
        "--property",
        "mr",
        "--mode",
        "sample",
        "500",
        "--seed",
        "43",
        "--json",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bad_thread_count_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let out = Command::new(env!("CARGO_BIN_EXE_mrlocal"))
        .args(["verify", p(&path), "--property", "sd"])
        .env("MRLOCAL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_mrlocal"))
        .args(["verify", p(&path), "--property", "sd"])
        .env("MRLOCAL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

const HEADER: usize = 4 + 1 + 32 + 4 + 2;

/// Sets the erasure bitmap of a stripe file.
fn set_mask(stripe: &mut [u8], n: usize, erased: &[usize]) {
    let mask = &mut stripe[HEADER..HEADER + n.div_ceil(8)];
    mask.fill(0);
    for &i in erased {
        mask[i / 8] |= 1 << (i % 8);
    }
}

fn data_bytes(field: &FieldSpec, k: usize) -> Vec<u8> {
    let symbols: Vec<_> = (0..k as u64)
        .map(|i| field.from_index((7 * i + 3) % field.order()).unwrap())
        .collect();
    pack_symbols(&symbols)
}

#[test]
fn encode_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let art = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let (file, code) = artifact::load(&art).unwrap();
    let data = data_bytes(code.field(), 9);
    assert_eq!(data.len(), 9 * symbol_width(code.field()));
    let data_path = dir.path().join("data.bin");
    let stripe_path = dir.path().join("stripe.bin");
    let back_path = dir.path().join("back.bin");
    std::fs::write(&data_path, &data).unwrap();

    let out = mrlocal(&[
        "encode",
        p(&art),
        "--data",
        p(&data_path),
        "--out",
        p(&stripe_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stripe = std::fs::read(&stripe_path).unwrap();
    assert_eq!(&stripe[..4], b"MRLS");
    assert_eq!(&stripe[5..37], &file.hash_bytes());

    // Empty mask.
    let out = mrlocal(&[
        "decode",
        p(&art),
        "--stripe",
        p(&stripe_path),
        "--out",
        p(&back_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&back_path).unwrap(), data);

    // One symbol per group (including data positions) is always recoverable.
    let mut damaged = stripe.clone();
    set_mask(&mut damaged, 16, &[0, 5, 10, 15]);
    std::fs::write(&stripe_path, &damaged).unwrap();
    let out = mrlocal(&[
        "decode",
        p(&art),
        "--stripe",
        p(&stripe_path),
        "--out",
        p(&back_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&back_path).unwrap(), data);

    // g + h + 1 erasures exceed the redundancy.
    let mut damaged = stripe.clone();
    set_mask(&mut damaged, 16, &[0, 1, 2, 3, 4, 5, 6, 7]);
    std::fs::write(&stripe_path, &damaged).unwrap();
    let out = mrlocal(&[
        "decode",
        p(&art),
        "--stripe",
        p(&stripe_path),
        "--out",
        p(&back_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not correctable"));
}

#[test]
fn stripe_errors() {
    let dir = TempDir::new().unwrap();
    let art = build(&dir, "sd.json", "sd-h3", 9, 3, 3);
    let other = build(&dir, "general.json", "vandermonde-general", 3, 3, 3);
    let (_, code) = artifact::load(&art).unwrap();
    let data_path = dir.path().join("data.bin");
    let stripe_path = dir.path().join("stripe.bin");
    let back_path = dir.path().join("back.bin");
    std::fs::write(&data_path, data_bytes(code.field(), 9)).unwrap();
    assert_eq!(
        mrlocal(&[
            "encode",
            p(&art),
            "--data",
            p(&data_path),
            "--out",
            p(&stripe_path)
        ])
        .status
        .code(),
        Some(0)
    );

    // Stripe made for another artifact.
    let out = mrlocal(&[
        "decode",
        p(&other),
        "--stripe",
        p(&stripe_path),
        "--out",
        p(&back_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("different artifact"));

    // Broken magic and truncation.
    let good = std::fs::read(&stripe_path).unwrap();
    let mut bad = good.clone();
    bad[0] = b'X';
    std::fs::write(&stripe_path, &bad).unwrap();
    let out = mrlocal(&[
        "decode",
        p(&art),
        "--stripe",
        p(&stripe_path),
        "--out",
        p(&back_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(&stripe_path, &good[..good.len() - 1]).unwrap();
    let out = mrlocal(&[
        "decode",
        p(&art),
        "--stripe",
        p(&stripe_path),
        "--out",
        p(&back_path),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Data file of the wrong length.
    std::fs::write(&data_path, [0u8; 3]).unwrap();
    let out = mrlocal(&[
        "encode",
        p(&art),
        "--data",
        p(&data_path),
        "--out",
        p(&stripe_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_is_deterministic() {
    let a = mrlocal(&["selftest"]);
    let b = mrlocal(&["selftest"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    for label in [
        "linearized",
        "sd-h3",
        "vandermonde-general",
        "vandermonde-improved",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(label)),
            "{label} missing from\n{text}"
        );
    }
    assert_eq!(
        text.lines().filter(|l| l.starts_with("criterion")).count(),
        10
    );
    // Exit status reflects the criteria: 0 iff every line passes.
    let all_pass = !text.contains("FAIL:");
    assert_eq!(a.status.code(), Some(if all_pass { 0 } else { 1 }));
}
