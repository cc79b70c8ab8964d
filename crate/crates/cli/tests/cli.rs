use std::path::PathBuf;
use std::process::{Command, Output};

use sdnplace::experiments::{compare_solvers, ExperimentConfig, GapRow, GatewaySpec};

fn zoo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/topologyzoo/{name}.graphml"))
}

fn sdnplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdnplace"))
        .args(args)
        .env_remove("SDNPLACE_OUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn inspect_reports_nsfnet_size() {
    let p = zoo("Nsfnet");
    let o = sdnplace(&["inspect", "--topology", p.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], &["Nsfnet", "13", "15"]);
    let pretty = sdnplace(&["inspect", "--topology", p.to_str().unwrap(), "--pretty"]);
    assert!(stdout(&pretty).starts_with("Nsfnet: 13 nodes, 15 links"));
}

#[test]
fn exit_codes() {
    assert_eq!(sdnplace(&["--help"]).status.code(), Some(0));
    assert_eq!(sdnplace(&[]).status.code(), Some(1));
    assert_eq!(sdnplace(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(sdnplace(&["solve"]).status.code(), Some(1));
    let p = zoo("Nsfnet");
    let p = p.to_str().unwrap();
    assert_eq!(sdnplace(&["solve", "--topology", p, "--case", "9"]).status.code(), Some(1));
    assert_eq!(sdnplace(&["sweep", "--topology", p, "--alpha", "1"]).status.code(), Some(1));

    let missing = sdnplace(&["inspect", "--topology", "no/such/file.graphml"]);
    assert_eq!(missing.status.code(), Some(2));
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.starts_with("error: ") && err.lines().count() == 1, "{err}");
    assert!(missing.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.graphml");
    std::fs::write(&bad, "<graphml><graph><node id=\"a\"/></graph>").unwrap();
    assert_eq!(sdnplace(&["inspect", "--topology", bad.to_str().unwrap()]).status.code(), Some(2));
    let tinet = zoo("Tinet");
    let big = sdnplace(&["solve", "--topology", tinet.to_str().unwrap()]);
    assert_eq!(big.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&big.stderr).contains("greedy"));
}

#[test]
fn solve_writes_a_replayable_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let p = zoo("Ans");
    let args = ["solve", "--topology", p.to_str().unwrap(), "--alpha", "0.001", "--seed", "7"];
    let o = sdnplace(&[&args[..], &["--out", dir.path().to_str().unwrap()]].concat());
    assert!(o.status.success());
    for f in ["result.csv", "failures.csv", "error_matrix.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert_eq!(stdout(&o), std::fs::read_to_string(dir.path().join("result.csv")).unwrap());
    let bundle = dir.path().join("instance");
    let replay = sdnplace(&["solve", "--instance", bundle.to_str().unwrap(), "--alpha", "0.001", "--seed", "7"]);
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(stdout(&replay), stdout(&o));
}

#[test]
fn gateways_from_file_or_inline_list() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("g.txt");
    std::fs::write(&list, "# gateways\n0\n5\n").unwrap();
    let p = zoo("Nsfnet");
    let p = p.to_str().unwrap();
    let from_file = sdnplace(&["solve", "--topology", p, "--gateways", list.to_str().unwrap()]);
    let inline = sdnplace(&["solve", "--topology", p, "--gateways", "0,5"]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&inline));
    let unknown = sdnplace(&["solve", "--topology", p, "--gateways", "0,nowhere"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn compare_matches_the_library() {
    let p = zoo("Ans");
    let o = sdnplace(&[
        "compare",
        "--topology",
        p.to_str().unwrap(),
        "--case",
        "1,2",
        "--alpha",
        "0.0001",
        "--repeats",
        "8",
        "--seed",
        "7",
    ]);
    assert!(o.status.success());
    let cfg = ExperimentConfig {
        topology: Some(p),
        gateways: GatewaySpec::Heuristic(5),
        cases: vec![sdnplace::FailureCase::builtin(1).unwrap(), sdnplace::FailureCase::builtin(2).unwrap()],
        alphas: vec![0.0001],
        repeats: 8,
        seed: 7,
        ..Default::default()
    };
    let topo = cfg.load_topology().unwrap();
    let (_, gaps) = compare_solvers(&topo, &cfg, true).unwrap();
    let mut expected = format!("{}\n", GapRow::CSV_HEADER);
    for g in &gaps {
        expected.push_str(&g.csv_row());
    }
    assert_eq!(stdout(&o), expected);
}

#[test]
fn experiment_reads_a_config_file_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let topo = zoo("Nsfnet");
    std::fs::write(
        &cfg,
        format!("topology = {}\nrepeats = 50\ncases = 1, 4\nseed = 3\n", topo.display()),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = sdnplace(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--repeats",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    // 2 repeats x 2 cases x 2 solvers
    assert_eq!(trials.lines().count(), 1 + 8);
    assert_eq!(stdout(&o), std::fs::read_to_string(out.join("summary.csv")).unwrap());
    assert!(std::fs::read_to_string(out.join("run.txt")).unwrap().contains("k-median fallback"));
}
