//! End-to-end CLI checks: exit-code contract, file formats, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nft-toolkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("nft-toolkit-test-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

const SECH_SPECTRUM: &str =
    r#"{"eigenvalues":[{"re":0.0,"im":0.5}],"qd":[{"re":0.0,"im":-1.0}]}"#;

#[test]
fn inft_single_soliton_is_sech() {
    let dir = TempDir::new("sech");
    let spec = dir.path("spec.json");
    let pulse = dir.path("pulse.csv");
    std::fs::write(&spec, SECH_SPECTRUM).unwrap();
    let out = run(&["inft", &spec, "--out", &pulse, "--T0", "20", "--N", "1024"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&pulse).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re_q,im_q"));
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let expected = 1.0 / fields[0].cosh();
        assert!(
            (fields[1] - expected).abs() < 1e-6 && fields[2].abs() < 1e-12,
            "bad sample {line}"
        );
    }
}

#[test]
fn nft_recovers_the_sech_spectrum() {
    let dir = TempDir::new("detect");
    let spec = dir.path("spec.json");
    let pulse = dir.path("pulse.csv");
    let detected = dir.path("detected.json");
    std::fs::write(&spec, SECH_SPECTRUM).unwrap();
    assert!(run(&["inft", &spec, "--out", &pulse, "--T0", "20", "--N", "1024"])
        .status
        .success());
    let out = run(&[
        "nft",
        &pulse,
        "--out",
        &detected,
        "--lambda-grid",
        "-1:1:11",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&detected).unwrap()).unwrap();
    let eigen = json["eigenvalues"].as_array().unwrap();
    assert_eq!(eigen.len(), 1);
    assert!((eigen[0]["im"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    let qd = &json["qd"][0];
    assert!((qd["im"].as_f64().unwrap() + 1.0).abs() < 1e-2);
    // metadata block for reproducibility
    assert_eq!(json["meta"]["kernel"], "trapezoid");
    assert_eq!(json["meta"]["n_intervals"], 1024);
    // soliton carries almost no continuous spectrum
    for v in json["qc"]["re"].as_array().unwrap() {
        assert!(v.as_f64().unwrap().abs() < 1e-2);
    }
}

#[test]
fn zero_pulse_yields_empty_spectrum() {
    let dir = TempDir::new("zero");
    let pulse = dir.path("pulse.csv");
    let spec = dir.path("spec.json");
    let mut csv = String::from("t,re_q,im_q\n");
    for i in 0..=64 {
        csv.push_str(&format!("{},0,0\n", -4.0 + 0.125 * i as f64));
    }
    std::fs::write(&pulse, csv).unwrap();
    let out = run(&["nft", &pulse, "--out", &spec, "--lambda-grid", "-1:1:5"]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&spec).unwrap()).unwrap();
    assert!(json["eigenvalues"].as_array().unwrap().is_empty());
    for v in json["qc"]["re"].as_array().unwrap() {
        assert_eq!(v.as_f64().unwrap(), 0.0);
    }
}

#[test]
fn exit_codes_for_malformed_inputs() {
    let dir = TempDir::new("codes");
    let bad_json = dir.path("bad.json");
    std::fs::write(&bad_json, "{ not json").unwrap();
    let out = run(&["inft", &bad_json, "--out", &dir.path("x.csv")]);
    assert_eq!(out.status.code(), Some(2));

    // missing input file
    let out = run(&["inft", &dir.path("absent.json"), "--out", &dir.path("x.csv")]);
    assert_eq!(out.status.code(), Some(2));

    // non-uniform t column
    let bad_csv = dir.path("bad.csv");
    std::fs::write(&bad_csv, "t,re_q,im_q\n-1,0,0\n0.3,0,0\n1,0,0\n").unwrap();
    let out = run(&["nft", &bad_csv, "--out", &dir.path("y.json")]);
    assert_eq!(out.status.code(), Some(2));

    // duplicate eigenvalues
    let dup = dir.path("dup.json");
    std::fs::write(
        &dup,
        r#"{"eigenvalues":[{"re":0.0,"im":0.5},{"re":0.0,"im":0.5}],
           "qd":[{"re":1.0,"im":0.0},{"re":1.0,"im":0.0}]}"#,
    )
    .unwrap();
    let out = run(&["inft", &dup, "--out", &dir.path("z.csv")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn roundtrip_count_mismatch_exits_4() {
    // N = 16 cannot resolve a three-soliton: detection disagrees on the count
    let out = run(&["roundtrip", "--random", "3", "--seed", "5", "--N", "16"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn roundtrip_random_spectrum_passes() {
    let out = run(&["roundtrip", "--random", "3", "--seed", "1"]);
    assert!(
        out.status.success(),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new("determinism");
    let spec = dir.path("spec.json");
    std::fs::write(&spec, SECH_SPECTRUM).unwrap();
    let p1 = dir.path("p1.csv");
    let p2 = dir.path("p2.csv");
    assert!(run(&["inft", &spec, "--out", &p1, "--T0", "15", "--N", "256"])
        .status
        .success());
    assert!(run(&["inft", &spec, "--out", &p2, "--T0", "15", "--N", "256"])
        .status
        .success());
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

    let s1 = dir.path("s1.json");
    let s2 = dir.path("s2.json");
    for s in [&s1, &s2] {
        assert!(run(&["nft", &p1, "--out", s, "--lambda-grid", "-2:2:21"])
            .status
            .success());
    }
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
}

#[test]
fn evolve_round_trip_restores_spectrum() {
    let dir = TempDir::new("evolve");
    let spec = dir.path("spec.json");
    std::fs::write(&spec, SECH_SPECTRUM).unwrap();
    let fwd = dir.path("fwd.json");
    let back = dir.path("back.json");
    assert!(run(&["evolve", &spec, "--z", "2.5", "--out", &fwd]).status.success());
    assert!(run(&["evolve", &fwd, "--z", "-2.5", "--out", &back]).status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    assert!((json["qd"][0]["im"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!(json["qd"][0]["re"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn convergence_scalar_mode_orders_schemes() {
    let out = run(&["convergence", "--mode", "scalar", "--f", "t"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,kernel,quantity,value,error"));
    let mut trap_err = Vec::new();
    let mut euler_err = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let err: f64 = fields[4].parse().unwrap();
        match fields[1] {
            "trapezoid" => trap_err.push(err),
            "euler" => euler_err.push(err),
            _ => {}
        }
    }
    assert_eq!(trap_err.len(), 9); // N = 4..1024 in doublings
    for (t, e) in trap_err.iter().zip(&euler_err) {
        assert!(t <= e, "trapezoid {t} vs euler {e}");
    }
}

#[test]
fn convergence_two_soliton_mode_reproduces_reference_values() {
    let out = run(&["convergence", "--mode", "two-soliton"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    // spot checks against the reference table, printed precision
    let mut fb_qd_05_n32 = None;
    let mut fb_qd_1_n1024 = None;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let (n, tag, quantity): (u32, &str, &str) =
            (fields[0].parse().unwrap(), fields[1], fields[2]);
        if tag == "fb-trapezoid" && quantity == "re_qd(0.5j)" && n == 32 {
            fb_qd_05_n32 = Some(fields[3].parse::<f64>().unwrap());
        }
        if tag == "fb-trapezoid" && quantity == "re_qd(1j)" && n == 1024 {
            fb_qd_1_n1024 = Some(fields[3].parse::<f64>().unwrap());
        }
    }
    assert!((fb_qd_05_n32.unwrap() - 2.75).abs() <= 0.01);
    assert!((fb_qd_1_n1024.unwrap() + 5.991).abs() <= 0.001);
}

#[test]
fn two_soliton_pulse_peaks_near_three() {
    let dir = TempDir::new("peak");
    let spec = dir.path("spec.json");
    std::fs::write(
        &spec,
        r#"{"eigenvalues":[{"re":0.0,"im":0.5},{"re":0.0,"im":1.0}],
           "qd":[{"re":3.0,"im":0.0},{"re":-6.0,"im":0.0}]}"#,
    )
    .unwrap();
    let pulse = dir.path("pulse.csv");
    assert!(run(&["inft", &spec, "--out", &pulse, "--T0", "5", "--N", "256"])
        .status
        .success());
    let peak = std::fs::read_to_string(&pulse)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1] * f[1] + f[2] * f[2]).sqrt()
        })
        .fold(0.0, f64::max);
    assert!((2.5..=3.5).contains(&peak), "peak {peak}");
}

#[test]
fn empty_spectrum_synthesizes_zero_pulse() {
    let dir = TempDir::new("empty");
    let spec = dir.path("spec.json");
    std::fs::write(&spec, r#"{"eigenvalues":[],"qd":[]}"#).unwrap();
    let pulse = dir.path("pulse.csv");
    assert!(run(&["inft", &spec, "--out", &pulse, "--T0", "5", "--N", "64"])
        .status
        .success());
    for line in std::fs::read_to_string(&pulse).unwrap().lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "0");
        assert_eq!(fields[2], "0");
    }
}
