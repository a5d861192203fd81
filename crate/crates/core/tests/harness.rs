use opcache::harness::accept::{run_suite, AcceptOptions, Status, Suite};
use opcache::harness::{sweep, write_csv_file, Axis, Scenario, SweepSpec};
use opcache::{Error, Placement, Scheme};

fn small_sweep() -> SweepSpec {
    SweepSpec {
        axis: Axis::Snr,
        values: vec![0.0, 10.0, 20.0],
        base: Scenario::new(4, 0.0, 0.1, Placement::Centralized),
        placements: vec![Placement::Decentralized],
        schemes: Scheme::ALL.to_vec(),
        trials: 300,
        seed: 12,
    }
}

#[test]
fn sweep_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("opcache-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig.csv");
    let rows = sweep(&small_sweep()).unwrap();
    write_csv_file(&rows, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    write_csv_file(&sweep(&small_sweep()).unwrap(), &path).unwrap();
    assert_eq!(first, std::fs::read(&path).unwrap());

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 15);
    assert_eq!(&records[0][0], "baseline");
    assert_eq!(&records[0][1], "decentralized");
    assert_eq!(&records[0][3], "0");
    assert_eq!(&records[14][3], "20");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn io_errors_name_the_path() {
    let rows = sweep(&small_sweep()).unwrap();
    let bad = std::path::Path::new("/nonexistent-dir/out.csv");
    match write_csv_file(&rows, bad) {
        Err(Error::Io(msg)) => assert!(msg.contains("/nonexistent-dir/out.csv"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn low_trial_asymptotic_suite_is_inconclusive() {
    let summary = run_suite(Suite::Asymptotic, &AcceptOptions { trials: Some(100), seed: 0 });
    assert!(summary.reports.iter().all(|r| r.status != Status::Fail));
    assert!(summary.inconclusive >= 1);
    assert!(summary.ok());
}

#[test]
fn summary_serializes() {
    let summary = run_suite(Suite::Oracle, &AcceptOptions::default());
    let json = serde_json::to_value(&summary).unwrap();
    assert_eq!(json["suite"], "oracle");
    assert_eq!(json["reports"].as_array().unwrap().len(), 2);
    assert_eq!(json["reports"][0]["status"], "pass");
}
