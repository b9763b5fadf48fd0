use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hsi-lrmr");

/// PSNR of the 24x24x8 pipeline below, pinned bit for bit.
const GOLDEN_PSNR_BITS: u64 = 0x403c_212d_ac78_0470;

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(BIN).current_dir(dir).args(args).output().unwrap();
    out
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn psnr(dir: &Path, reference: &str, test: &str) -> f64 {
    let json: serde_json::Value =
        serde_json::from_str(&ok(dir, &["psnr", "--ref", reference, "--test", test])).unwrap();
    json["psnr_db"].as_f64().unwrap()
}

fn pipeline(dir: &Path, workers: &str) -> (Vec<u8>, String) {
    ok(
        dir,
        &[
            "synth", "--out", "clean", "--rows", "24", "--cols", "24", "--bands", "8",
        ],
    );
    ok(dir, &["corrupt", "--in", "clean", "--out", "noisy", "--seed", "3"]);
    ok(
        dir,
        &[
            "denoise",
            "--in",
            "noisy",
            "--out",
            "den",
            "--r",
            "3",
            "--b",
            "8",
            "--s",
            "4",
            "--workers",
            workers,
            "--report",
            "report.json",
        ],
    );
    let psnr_json = ok(dir, &["psnr", "--ref", "clean", "--test", "den"]);
    (std::fs::read(dir.join("den.raw")).unwrap(), psnr_json)
}

#[test]
fn pipeline_is_reproducible_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (cube_a, psnr_a) = pipeline(a.path(), "1");
    let (cube_b, psnr_b) = pipeline(b.path(), "2");
    assert_eq!(cube_a, cube_b);
    assert_eq!(psnr_a, psnr_b);

    let denoised = psnr(a.path(), "clean", "den");
    assert_eq!(denoised.to_bits(), GOLDEN_PSNR_BITS, "psnr {denoised}");
    assert!(denoised > psnr(a.path(), "clean", "noisy") + 10.0);

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["patches"], 25);
    assert_eq!(report["cardinality"], 77);
}

#[test]
fn sweep_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth", "--out", "clean", "--rows", "16", "--cols", "16", "--bands", "6",
        ],
    );
    ok(
        d,
        &[
            "sweep", "--clean", "clean", "--param", "r", "--values", "1..3", "--b", "8", "--s", "8", "--out",
            "rank.csv",
        ],
    );
    let csv = std::fs::read_to_string(d.join("rank.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("param,value,psnr,seconds,grad_psnr,grad_seconds"));

    let md = ok(d, &["report", "rank.csv", "--plot-dir", "plots"]);
    assert!(md.contains("| r | PSNR | ∇PSNR | t | ∇t |"));
    assert!(d.join("plots/rank_psnr.dat").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        run(d, &["denoise", "--in", "missing", "--out", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(run(d, &["denoise", "--bogus"]).status.code(), Some(1));
    ok(
        d,
        &["synth", "--out", "c", "--rows", "8", "--cols", "8", "--bands", "3"],
    );
    let big_block = run(d, &["denoise", "--in", "c", "--out", "x", "--b", "40"]);
    assert_eq!(big_block.status.code(), Some(2));
    assert!(!big_block.stderr.is_empty());
    assert_eq!(
        run(d, &["denoise", "--in", "c", "--out", "x", "--workers", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn convert_reads_interleaved_samples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // 1x2 pixels, 3 bands, BIP u16 big-endian: pixel-major band values.
    let values: [u16; 6] = [10, 20, 30, 11, 21, 31];
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_be_bytes()).collect();
    std::fs::write(d.join("in.bin"), bytes).unwrap();
    ok(
        d,
        &[
            "convert",
            "--in",
            "in.bin",
            "--out",
            "cube",
            "--rows",
            "1",
            "--cols",
            "2",
            "--bands",
            "3",
            "--interleave",
            "bip",
            "--dtype",
            "u16",
            "--endian",
            "big",
        ],
    );
    let raw = std::fs::read(d.join("cube.raw")).unwrap();
    let got: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert_eq!(got, [10.0, 11.0, 20.0, 21.0, 30.0, 31.0]);
}
