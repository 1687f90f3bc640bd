//! End-to-end tests of the `zdshift` binary: spawn the real executable and
//! check output, files, and exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zdshift"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn zdshift")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("Usage"));
    for sub in [
        "scan", "sample", "encode", "decode", "entropy", "kdensity", "census", "pressure",
    ] {
        assert!(stdout(&out).contains(sub), "help lacks {sub}");
        let sub_help = run(&[sub, "--help"]);
        assert!(sub_help.status.success(), "{sub} --help failed");
    }
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["scan", "--d", "1", "--kind", "sideways", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["scan"]); // missing --n
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_order_golden() {
    let out = run(&["scan", "--d", "2", "--kind", "onesided", "--n", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "(0,0) 0\n(0,1) 1\n(1,0) 2\n(1,1) 3\n");

    let out = run(&["scan", "--d", "1", "--kind", "twosided", "--n", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "(0) 0\n(-1) 1\n(1) 2\n");
}

#[test]
fn sample_encode_decode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("pat.bin");
    let code = dir.path().join("code.bin");
    let back = dir.path().join("back.bin");

    let out = run(&[
        "sample",
        "--d",
        "2",
        "--kind",
        "onesided",
        "--n",
        "12",
        "--seed",
        "5",
        "--measure",
        "bernoulli",
        "--probs",
        "0.2,0.3,0.5",
        "--out",
        pat.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "sample failed: {}", stderr(&out));

    let out = run(&[
        "encode",
        "--input",
        pat.to_str().unwrap(),
        "--out",
        code.to_str().unwrap(),
        "--m",
        "2",
    ]);
    assert!(out.status.success(), "encode failed: {}", stderr(&out));
    let report = stdout(&out);
    assert!(report.starts_with("field\tvalue\n"));
    for key in ["mode", "bits_x", "bits_y", "bits_z", "payload", "total"] {
        assert!(report.contains(key), "report lacks {key}");
    }

    let out = run(&[
        "decode",
        "--input",
        code.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "decode failed: {}", stderr(&out));

    let original = std::fs::read(&pat).unwrap();
    let decoded = std::fs::read(&back).unwrap();
    assert_eq!(original, decoded, "pattern files must match byte for byte");
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let draw = |name: &str, seed: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let out = run(&[
            "sample",
            "--d",
            "1",
            "--n",
            "256",
            "--seed",
            seed,
            "--measure",
            "markov1d",
            "--transition",
            "0.9,0.1;0.2,0.8",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "sample failed: {}", stderr(&out));
        std::fs::read(&path).unwrap()
    };
    let a = draw("a.bin", "42");
    let b = draw("b.bin", "42");
    let c = draw("c.bin", "43");
    assert_eq!(a, b, "same seed must reproduce the file");
    assert_ne!(a, c, "different seeds should differ");
}

#[test]
fn measure_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let mfile = dir.path().join("measure.txt");
    std::fs::write(&mfile, "# biased coin\nmeasure=bernoulli\nprobs=0.3,0.7\n").unwrap();
    let pat = dir.path().join("pat.bin");
    let out = run(&[
        "sample",
        "--d",
        "1",
        "--n",
        "32",
        "--measure-file",
        mfile.to_str().unwrap(),
        "--out",
        pat.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "sample failed: {}", stderr(&out));
    assert!(pat.exists());
}

#[test]
fn entropy_prints_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("pat.bin");
    let out = run(&[
        "sample",
        "--d",
        "1",
        "--n",
        "128",
        "--seed",
        "9",
        "--measure",
        "bernoulli",
        "--probs",
        "0.8,0.2",
        "--out",
        pat.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = run(&[
        "entropy",
        "--input",
        pat.to_str().unwrap(),
        "--m",
        "2",
        "--measure",
        "bernoulli",
        "--probs",
        "0.8,0.2",
    ]);
    assert!(out.status.success(), "entropy failed: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method\td\tkind\tn\tm\tseed\tvalue");
    assert_eq!(lines.len(), 4, "header plus three estimator rows");
    for line in &lines[1..] {
        assert_eq!(line.split('\t').count(), 7, "bad row {line:?}");
    }
    assert!(lines[1].starts_with("plugin\t"));
    assert!(lines[2].starts_with("code_rate\t"));
    assert!(lines[3].starts_with("information_density\t"));
}

#[test]
fn entropy_accepts_radius_lists_and_short_flags() {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("pat.bin");
    assert!(run(&[
        "sample", "--d", "1", "--n", "64", "--measure", "bernoulli", "--probs", "0.5,0.5", "-o",
        pat.to_str().unwrap(),
    ])
    .status
    .success());
    let out = run(&["entropy", "-i", pat.to_str().unwrap(), "--m", "1,2"]);
    assert!(out.status.success(), "entropy failed: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    // Header plus plugin and code-rate rows for each radius.
    assert_eq!(lines.len(), 5, "got: {text}");
    assert!(lines[1].starts_with("plugin\t1\tonesided\t64\t1"));
    assert!(lines[2].starts_with("code_rate\t1\tonesided\t64\t1"));
    assert!(lines[3].starts_with("plugin\t1\tonesided\t64\t2"));
    assert!(lines[4].starts_with("code_rate\t1\tonesided\t64\t2"));

    // Identical flags must reproduce identical bytes, encode included.
    let code = dir.path().join("code.bin");
    let report1 = run(&[
        "encode",
        "-i",
        pat.to_str().unwrap(),
        "-o",
        code.to_str().unwrap(),
        "--m",
        "2",
    ]);
    assert!(report1.status.success());
    let bytes1 = std::fs::read(&code).unwrap();
    let report2 = run(&[
        "encode",
        "-i",
        pat.to_str().unwrap(),
        "-o",
        code.to_str().unwrap(),
        "--m",
        "2",
    ]);
    assert_eq!(stdout(&report1), stdout(&report2));
    assert_eq!(bytes1, std::fs::read(&code).unwrap());
}

#[test]
fn kdensity_prints_one_number() {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("pat.bin");
    assert!(run(&[
        "sample",
        "--d",
        "1",
        "--n",
        "128",
        "--measure",
        "bernoulli",
        "--probs",
        "0.5,0.5",
        "--out",
        pat.to_str().unwrap(),
    ])
    .status
    .success());
    let out = run(&["kdensity", "--input", pat.to_str().unwrap(), "--m", "1"]);
    assert!(out.status.success());
    let value: f64 = stdout(&out).trim().parse().expect("a number");
    assert!(value > 0.5 && value < 1.5, "implausible density {value}");
}

#[test]
fn census_histogram_covers_every_pattern() {
    let out = run(&[
        "census", "--d", "1", "--kind", "onesided", "--n", "4", "--sigma", "2", "--m", "2",
    ]);
    assert!(out.status.success(), "census failed: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("payload_bits\tcount"));
    let total: u64 = lines
        .map(|l| l.split('\t').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 16, "2^4 patterns in total");
}

#[test]
fn pressure_reports_exact_and_sampled_values() {
    let dir = tempfile::tempdir().unwrap();
    let psi = dir.path().join("psi.txt");
    std::fs::write(&psi, "0 0 0.5\n0 1 -0.5\n1 0 -0.5\n1 1 0.5\n").unwrap();

    let out = run(&["pressure", "--potential", psi.to_str().unwrap()]);
    assert!(out.status.success(), "pressure failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pressure\t1.084963"), "got: {text}");
    assert!(text.contains("transition\t0\t0.666667,0.333333"));

    let pat = dir.path().join("pat.bin");
    assert!(run(&[
        "sample",
        "--d",
        "1",
        "--n",
        "4096",
        "--measure",
        "bernoulli",
        "--probs",
        "0.5,0.5",
        "--out",
        pat.to_str().unwrap(),
    ])
    .status
    .success());
    let out = run(&[
        "pressure",
        "--potential",
        psi.to_str().unwrap(),
        "--sample",
        pat.to_str().unwrap(),
        "--m",
        "2",
    ]);
    assert!(out.status.success(), "pressure failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("label\trate\tpsi_mean\tsum"));
    assert!(text.contains("sup_estimate"));
    assert!(text.contains("oracle_pressure\t-\t-\t1.084963"));
}

#[test]
fn data_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.bin");
    let out = run(&[
        "decode",
        "--input",
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("x.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());

    // A file that is not a pattern container.
    let garbage = dir.path().join("garbage.bin");
    std::fs::write(&garbage, b"this is not a pattern").unwrap();
    let out = run(&[
        "encode",
        "--input",
        garbage.to_str().unwrap(),
        "--out",
        dir.path().join("y.bin").to_str().unwrap(),
        "--m",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());

    // Probabilities that do not sum to one.
    let out = run(&[
        "sample",
        "--d",
        "1",
        "--n",
        "8",
        "--measure",
        "bernoulli",
        "--probs",
        "0.5,0.6",
        "--out",
        dir.path().join("z.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
