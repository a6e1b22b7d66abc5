//! End-to-end pipeline tests through the `probesched` binary: generate,
//! solve, schedule, evaluate, export, compare, plus exit codes and file
//! round-trips.

use std::path::{Path, PathBuf};
use std::process::Command;

use probesched::evaluator::CyclicSchedule;
use probesched::instance::Instance;
use probesched::memoryless::Frequencies;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_probesched"))
}

fn run_ok(args: &[&str]) {
    let out = bin().args(args).output().expect("spawn probesched");
    assert!(
        out.status.success(),
        "probesched {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn run_code(args: &[&str]) -> i32 {
    let out = bin().args(args).output().expect("spawn probesched");
    out.status.code().unwrap_or(-1)
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn pipeline_singletons() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = path(dir.path(), "inst.json");
    let freqs_path = path(dir.path(), "q.json");
    let sched_path = path(dir.path(), "sched.json");
    let report_path = path(dir.path(), "report.csv");

    run_ok(&[
        "gen",
        "singletons",
        "--n",
        "8",
        "--weights",
        "uniform",
        "-o",
        &s(&inst_path),
    ]);
    let inst = Instance::read(&inst_path).unwrap();
    assert!(inst.validate().is_ok());
    assert_eq!(inst.num_tests(), 8);

    run_ok(&["solve", "sum", "-i", &s(&inst_path), "-o", &s(&freqs_path)]);
    let freqs = Frequencies::read(&freqs_path, &inst).unwrap();
    for &q in &freqs.q {
        assert_eq!(q, 0.125);
    }

    run_ok(&[
        "eval",
        "-i",
        &s(&inst_path),
        "--freqs",
        &s(&freqs_path),
        "-o",
        &s(&report_path),
    ]);
    let report = std::fs::read_to_string(&report_path).unwrap();
    assert!(report.starts_with("kind,name,value,mt,et\n"));
    // SUM value 8 for uniform n=8.
    assert!(report.contains("objective,eeet,8,,"), "{report}");

    run_ok(&[
        "schedule",
        "rtree",
        "-i",
        &s(&inst_path),
        "--freqs",
        &s(&freqs_path),
        "--objective",
        "eemt",
        "--trials",
        "32",
        "--seed",
        "7",
        "-o",
        &s(&sched_path),
    ]);
    let sched = CyclicSchedule::read(&sched_path, &inst).unwrap();
    assert_eq!(sched.len(), 8);
    run_ok(&[
        "eval",
        "-i",
        &s(&inst_path),
        "--sched",
        &s(&sched_path),
        "-o",
        &s(&report_path),
    ]);
    let report = std::fs::read_to_string(&report_path).unwrap();
    assert!(report.contains("objective,eemt,8,,"), "{report}");
    assert!(report.contains("objective,eeet,4.5,,"), "{report}");
}

#[test]
fn pipeline_schedulers_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = path(dir.path(), "clos.json");
    run_ok(&[
        "gen",
        "clos",
        "--levels",
        "3",
        "--radix",
        "2",
        "-o",
        &s(&inst_path),
    ]);
    let inst = Instance::read(&inst_path).unwrap();

    for kind in ["kt", "setcover"] {
        let sched_path = path(dir.path(), &format!("{kind}.json"));
        run_ok(&[
            "schedule",
            kind,
            "-i",
            &s(&inst_path),
            "-o",
            &s(&sched_path),
        ]);
        let sched = CyclicSchedule::read(&sched_path, &inst).unwrap();
        assert!(!sched.is_empty());
        // Round-trip: re-emitting the parsed schedule is identical.
        let text = std::fs::read_to_string(&sched_path).unwrap();
        assert_eq!(text.trim_end(), sched.to_json(&inst));
    }

    let table_path = path(dir.path(), "table.csv");
    run_ok(&[
        "compare",
        "-i",
        &s(&inst_path),
        "--all",
        "-o",
        &s(&table_path),
    ]);
    let table = std::fs::read_to_string(&table_path).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheduler,eeet,mtee,eemt,meet,etme,memt"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for name in [
        "conv",
        "lp",
        "uniform",
        "samp_sc",
        "samp_kt",
        "sc",
        "kt",
        "rtree_sum",
        "rtree_max",
    ] {
        assert!(
            rows.iter().any(|r| r.starts_with(&format!("{name},"))),
            "{name}"
        );
    }
    // Memoryless rows carry one value per family.
    for row in rows
        .iter()
        .filter(|r| r.starts_with("conv,") || r.starts_with("lp,"))
    {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[1], cells[2]);
        assert_eq!(cells[2], cells[3]);
        assert_eq!(cells[4], cells[5]);
        assert_eq!(cells[5], cells[6]);
    }
}

#[test]
fn pipeline_lowerbound_random_and_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let lb_path = path(dir.path(), "lb.json");
    run_ok(&[
        "gen",
        "lowerbound",
        "--m",
        "6",
        "--ell",
        "3",
        "-o",
        &s(&lb_path),
    ]);
    let inst = Instance::read(&lb_path).unwrap();
    assert_eq!(inst.num_elements(), 20);

    let rand_path = path(dir.path(), "rand.json");
    run_ok(&[
        "gen",
        "random",
        "--n",
        "5",
        "--m",
        "4",
        "--seed",
        "3",
        "-o",
        &s(&rand_path),
    ]);
    // Determinism: the same seed regenerates the identical file.
    let first = std::fs::read_to_string(&rand_path).unwrap();
    run_ok(&[
        "gen",
        "random",
        "--n",
        "5",
        "--m",
        "4",
        "--seed",
        "3",
        "-o",
        &s(&rand_path),
    ]);
    assert_eq!(first, std::fs::read_to_string(&rand_path).unwrap());

    let freqs_path = path(dir.path(), "q.json");
    run_ok(&["solve", "max", "-i", &s(&lb_path), "-o", &s(&freqs_path)]);

    let cdf_path = path(dir.path(), "cdf.csv");
    run_ok(&[
        "cdf",
        "-i",
        &s(&lb_path),
        "--freqs",
        &s(&freqs_path),
        "--stat",
        "mean",
        "-o",
        &s(&cdf_path),
    ]);
    let cdf = std::fs::read_to_string(&cdf_path).unwrap();
    assert!(cdf.starts_with("value,fraction_of_elements_at_least\n"));
    // Symmetric instance: all rates equal, single row with fraction 1.
    assert_eq!(cdf.lines().count(), 2);
    assert!(cdf.lines().nth(1).unwrap().ends_with(",1"));

    run_ok(&[
        "cdf",
        "-i",
        &s(&lb_path),
        "--freqs",
        &s(&freqs_path),
        "--stat",
        "p99",
        "-o",
        &s(&cdf_path),
    ]);

    let sched_path = path(dir.path(), "kt.json");
    run_ok(&["schedule", "kt", "-i", &s(&lb_path), "-o", &s(&sched_path)]);
    for stat in ["mean", "max", "p99"] {
        run_ok(&[
            "cdf",
            "-i",
            &s(&lb_path),
            "--sched",
            &s(&sched_path),
            "--stat",
            stat,
            "-o",
            &s(&cdf_path),
        ]);
    }
}

#[test]
fn subset_seeding() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = path(dir.path(), "inst.json");
    run_ok(&[
        "gen",
        "clos",
        "--levels",
        "3",
        "--radix",
        "2",
        "-o",
        &s(&inst_path),
    ]);
    let inst = Instance::read(&inst_path).unwrap();

    // Restrict the solve to the tests of the greedy cover.
    let cover = probesched::cover::set_cover_schedule(&inst).unwrap();
    let ids: Vec<String> = cover
        .slots()
        .iter()
        .flatten()
        .map(|&t| inst.test(t).id().to_string())
        .collect();
    let subset_path = path(dir.path(), "subset.json");
    std::fs::write(
        &subset_path,
        serde_json::to_string(&serde_json::json!({ "tests": ids })).unwrap(),
    )
    .unwrap();

    let freqs_path = path(dir.path(), "q.json");
    run_ok(&[
        "solve",
        "sum",
        "-i",
        &s(&inst_path),
        "--subset",
        &s(&subset_path),
        "-o",
        &s(&freqs_path),
    ]);
    let freqs = Frequencies::read(&freqs_path, &inst).unwrap();
    assert_eq!(freqs.q.len(), inst.num_tests());
    // Excluded tests carry zero frequency; the subset still covers.
    let positive = freqs.q.iter().filter(|&&q| q > 0.0).count();
    assert!(positive <= ids.len());
    freqs.validate(&inst).unwrap();

    let sched_path = path(dir.path(), "rtree.json");
    run_ok(&[
        "schedule",
        "rtree",
        "-i",
        &s(&inst_path),
        "--freqs",
        &s(&freqs_path),
        "--objective",
        "eeet",
        "--trials",
        "16",
        "--seed",
        "1",
        "-o",
        &s(&sched_path),
    ]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = path(dir.path(), "bad.json");

    // Uncovered element: validation failure, exit 1.
    std::fs::write(
        &inst_path,
        r#"{"weight_mode":"sum","elements":[{"id":"a","weight":0.5},{"id":"b","weight":0.5}],
           "tests":[{"id":"t","elements":["a"]}]}"#,
    )
    .unwrap();
    let out_path = path(dir.path(), "out.json");
    assert_eq!(
        run_code(&["solve", "sum", "-i", &s(&inst_path), "-o", &s(&out_path)]),
        1
    );

    // Malformed JSON: exit 3.
    std::fs::write(&inst_path, "{not json").unwrap();
    assert_eq!(
        run_code(&["solve", "sum", "-i", &s(&inst_path), "-o", &s(&out_path)]),
        3
    );

    // Missing file: exit 3.
    assert_eq!(
        run_code(&[
            "eval",
            "-i",
            &s(&path(dir.path(), "missing.json")),
            "--freqs",
            "x",
            "-o",
            "y"
        ]),
        3
    );

    // Unknown subcommand: usage error, exit 1.
    assert_eq!(run_code(&["frobnicate"]), 1);

    // Degenerate generator parameters: exit 1.
    assert_eq!(
        run_code(&[
            "gen",
            "clos",
            "--levels",
            "1",
            "--radix",
            "2",
            "-o",
            &s(&out_path)
        ]),
        1
    );
}

#[test]
fn emitted_files_reparse_identically() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = path(dir.path(), "inst.json");
    run_ok(&[
        "gen",
        "singletons",
        "--n",
        "5",
        "--weights",
        "0.4,0.3,0.15,0.1,0.05",
        "-o",
        &s(&inst_path),
    ]);
    let inst = Instance::read(&inst_path).unwrap();
    let re_emitted = inst.to_json() + "\n";
    assert_eq!(std::fs::read_to_string(&inst_path).unwrap(), re_emitted);

    let freqs_path = path(dir.path(), "q.json");
    run_ok(&["solve", "sum", "-i", &s(&inst_path), "-o", &s(&freqs_path)]);
    let text = std::fs::read_to_string(&freqs_path).unwrap();
    let parsed = Frequencies::read(&freqs_path, &inst).unwrap();
    assert_eq!(text.trim_end(), parsed.to_json(&inst));
}
