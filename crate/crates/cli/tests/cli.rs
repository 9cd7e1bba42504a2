use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crowdelo::dataset::{write_comparisons, SimulatedDataset};
use crowdelo::sim::{RaterAssignment, SimParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crowdelo"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn rate_listing_fixture() {
    let path = fixture("listing.csv");
    let out = stdout(&run(&["rate", path.to_str().unwrap(), "--preset", "chess"]));
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("item,rating,rank,label_sign,label_median")
    );
    assert_eq!(
        lines.next(),
        Some("p1,1428.3358360702414,0,positive,positive")
    );
    assert_eq!(
        lines.next(),
        Some("p2,1371.6641639297586,1,positive,negative")
    );

    // The same settings spelled out flag by flag.
    let flags = stdout(&run(&[
        "rate",
        path.to_str().unwrap(),
        "--k",
        "30",
        "--denom",
        "400",
        "--base",
        "natural",
        "--default-rating",
        "1400",
        "--epochs",
        "1",
        "--no-shuffle",
    ]));
    assert_eq!(flags, out);
}

#[test]
fn rate_json_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("r.json");
    let out = run(&[
        "rate",
        fixture("listing.csv").to_str().unwrap(),
        "--preset",
        "chess",
        "--format",
        "json",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&target).unwrap()).unwrap();
    assert_eq!(v[0]["item"], "p1");
    assert_eq!(v[0]["rating"].as_f64().unwrap(), 1428.3358360702414);
    assert_eq!(v[1]["label_median"], "negative");
}

#[test]
fn rate_failures() {
    let out = run(&["rate", "no/such/file.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot open"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "item_a,item_b,outcome,rater_id\na,b,0.7,r\n").unwrap();
    let out = run(&["rate", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn rate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let sim = SimulatedDataset::generate(
        &SimParams {
            n_items: 30,
            n_raters: 8,
            ..SimParams::default()
        },
        200,
        RaterAssignment::Uniform,
        4,
    )
    .unwrap();
    write_comparisons(&sim.dataset, fs::File::create(&data).unwrap()).unwrap();
    let a = stdout(&run(&["rate", data.to_str().unwrap(), "--seed", "9"]));
    let b = stdout(&run(&["rate", data.to_str().unwrap(), "--seed", "9"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 31);
}

#[test]
fn simulate_sweep_rows() {
    let args = [
        "simulate",
        "--items",
        "40",
        "--raters",
        "10",
        "--runs",
        "3",
        "--sweep",
        "threshold_diversity=0,0.5,1.0",
        "--ratios",
        "1",
        "--seed",
        "3",
    ];
    let a = stdout(&run(&args));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("parameter,value,task_ratio,n_comparisons,n_runs,delta_f1_mean"));
    assert!(lines[1].starts_with("threshold_diversity,0.0,1.0,120,3,"));
    assert_eq!(a, stdout(&run(&args)));
}

#[test]
fn simulate_rejects_bad_input() {
    let out = run(&["simulate", "--items", "20", "--raters", "5", "--runs", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("standard error"));

    let out = run(&["simulate", "--sweep", "colour=1,2"]);
    assert_eq!(out.status.code(), Some(2));
}

fn scaling_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn scaling_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let go = |name: &str| {
        let dir = tmp.path().join(name);
        let out = run(&[
            "scaling",
            "--simulate",
            "16,24",
            "--replicates",
            "4",
            "--points",
            "6",
            "--include-full",
            "--target-f1",
            "0.7",
            "--target-n",
            "100",
            "--output",
            dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        dir
    };
    let first = go("a");
    let names: Vec<String> = scaling_files(&first).into_iter().map(|f| f.0).collect();
    assert_eq!(
        names,
        [
            "budget.csv",
            "collapse.csv",
            "collapse_n.csv",
            "collapse_n_log_n.csv",
            "collapse_n_squared.csv",
            "trajectories.csv"
        ]
    );
    let traj = fs::read_to_string(first.join("trajectories.csv")).unwrap();
    assert!(traj.starts_with("N,n_comparisons,rescaled_x,mean_f1,sem,n_replicates\n"));
    // Endpoint rows: every pair of 16 and of 24 items.
    assert!(traj
        .lines()
        .any(|l| l.starts_with("16,120,") && l.ends_with(",1,0,4")));
    assert!(traj
        .lines()
        .any(|l| l.starts_with("24,276,") && l.ends_with(",1,0,4")));
    let collapse = fs::read_to_string(first.join("collapse.csv")).unwrap();
    assert!(collapse.starts_with("law,gap,domain_lo,domain_hi,band_lo,band_hi,band_gap\nn,"));
    let budget = fs::read_to_string(first.join("budget.csv")).unwrap();
    assert!(budget.starts_with("pilot_n,target_f1,target_n,comparisons\n24,0.7,100,"));

    assert_eq!(scaling_files(&first), scaling_files(&go("b")));
}

#[test]
fn scaling_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let out = run(&[
        "scaling",
        "--simulate",
        "16,24",
        "--target-f1",
        "1.1",
        "--target-n",
        "100",
        "--output",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "scaling",
        "--simulate",
        "16,24",
        "--replicates",
        "3",
        "--points",
        "4",
        "--x-max",
        "0.2",
        "--target-f1",
        "1.0",
        "--target-n",
        "100",
        "--output",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("never reached"));
}

#[test]
fn scaling_from_input_subsets() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "scaling",
        "--input",
        fixture("listing.csv").to_str().unwrap(),
        "--replicates",
        "2",
        "--points",
        "2",
        "--include-full",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let traj = fs::read_to_string(out_dir.join("trajectories.csv")).unwrap();
    assert!(traj.lines().last().unwrap().starts_with("2,3,"));
    assert!(!out_dir.join("collapse.csv").exists());

    let data = tmp.path().join("d.csv");
    let sim = SimulatedDataset::generate(
        &SimParams {
            n_items: 30,
            n_raters: 8,
            ..SimParams::default()
        },
        435,
        RaterAssignment::Uniform,
        1,
    )
    .unwrap();
    write_comparisons(&sim.dataset, fs::File::create(&data).unwrap()).unwrap();
    let sized = tmp.path().join("sized");
    let out = run(&[
        "scaling",
        "--input",
        data.to_str().unwrap(),
        "--sizes",
        "12,20",
        "--replicates",
        "3",
        "--points",
        "3",
        "--output",
        sized.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let traj = fs::read_to_string(sized.join("trajectories.csv")).unwrap();
    let sizes: std::collections::BTreeSet<&str> = traj
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(sizes.into_iter().collect::<Vec<_>>(), ["12", "20"]);
    assert!(sized.join("collapse.csv").exists());
}

#[test]
fn spam_audit_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.csv");
    let params = SimParams {
        n_items: 60,
        n_raters: 20,
        spam_fraction: 0.1,
        ..SimParams::default()
    };
    let sim = SimulatedDataset::generate(&params, 20 * 30, RaterAssignment::Balanced, 2).unwrap();
    write_comparisons(&sim.dataset, fs::File::create(&data).unwrap()).unwrap();
    let out = stdout(&run(&["spam-audit", data.to_str().unwrap()]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "rater_id,n_comparisons,outcome_correlation,median_selection_probability,flags"
    );
    assert_eq!(lines.len(), 21);
    for (i, spam) in sim.raters.spam_flags.iter().enumerate() {
        let flagged = lines[i + 1].contains("low_");
        if !spam {
            assert!(!flagged, "{}", lines[i + 1]);
        }
    }
}

#[test]
fn anchor_offsets_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let probes = tmp.path().join("probes.csv");
    let out = stdout(&run(&[
        "anchor",
        "--baseline",
        fixture("baseline.csv").to_str().unwrap(),
        "--benchmark",
        fixture("benchmark.csv").to_str().unwrap(),
        "--answers",
        fixture("answers.csv").to_str().unwrap(),
        "--probes",
        "2",
        "--probes-output",
        probes.to_str().unwrap(),
    ]));
    // Offset ((-20 - -1) + (50 - 2)) / 2 = 14.5.
    assert!(out.contains("\nw,113.5,0,"));
    assert!(out.contains("\nz,-85.5,3,"));
    let probes = fs::read_to_string(probes).unwrap();
    assert_eq!(
        probes,
        "item,baseline_rating,position,implied_rating,queries,offset\n\
         x,-1.0,1,-20.0,3,14.5\n\
         y,2.0,4,50.0,2,14.5\n"
    );

    let missing = run(&[
        "anchor",
        "--baseline",
        fixture("baseline.csv").to_str().unwrap(),
        "--benchmark",
        fixture("benchmark.csv").to_str().unwrap(),
        "--answers",
        fixture("answers.csv").to_str().unwrap(),
    ]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no answer"));
}
