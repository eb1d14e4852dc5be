use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn ionfab(args: &[&str]) -> Output {
    ionfab_env(args, &[])
}

fn ionfab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ionfab"));
    cmd.args(args).env_remove("IONFAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = format!("{}/schemas/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&v).expect("schema compiles")
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let s = schema(schema_name);
    let msgs: Vec<String> = match s.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{schema_name}: {msgs:#?}");
}

#[test]
fn rates_happy_path() {
    let o = ionfab(&["rates", &data("example.json")]);
    let v = json(&o);
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[0]["elu"], "A");
    let err = stderr(&o);
    let manifest: Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "rates");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&ionfab(&["bogus"])), 2);
    assert_eq!(code(&ionfab(&[])), 2);
    let missing = ionfab(&["schedule", &data("example.json"), "missing.iqc"]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("missing.iqc"));
    // stochastic command without a seed
    let no_seed = ionfab(&[
        "simulate",
        &data("example.json"),
        "--schedule",
        &data("schedule.json"),
        "--horizon",
        "1",
    ]);
    assert_eq!(code(&no_seed), 2);
    assert!(stderr(&no_seed).contains("--seed"));
    assert_eq!(code(&ionfab(&["rates", &data("example.json"), "--format", "dot"])), 2);
    assert_eq!(code(&ionfab(&["rates", &data("example.json"), "--elu", "Q"])), 1);
    assert_eq!(code(&ionfab(&["--help"])), 0);
}

#[test]
fn validate_reports_violations() {
    assert_eq!(json(&ionfab(&["validate", &data("example.json")]))["valid"], true);
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(data("example.json")).unwrap()).unwrap();
    v["link"]["detector_efficiency"] = 1.5.into();
    v["elus"][0]["comm_ion_indices"] = serde_json::json!([0, 30]);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, v.to_string()).unwrap();
    let o = ionfab(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["violations"].as_array().unwrap().len(), 2);
}

const HELP_PATHS: &[&[&str]] = &[
    &[],
    &["validate"],
    &["rates"],
    &["graph"],
    &["ising"],
    &["ising", "solve"],
    &["ising", "adiabatic"],
    &["ising", "anneal"],
    &["qec"],
    &["qec", "surface"],
    &["qec", "steane"],
    &["qec", "hgp"],
    &["qec", "embed"],
    &["simulate"],
    &["schedule"],
];

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn help_text_matches_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for path in HELP_PATHS {
        let mut args: Vec<&str> = path.to_vec();
        args.push("--help");
        let o = ionfab(&args);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        for global in ["--seed", "--format", "--out", "--summary"] {
            assert!(text.contains(global), "{path:?} help lacks {global}");
        }
        let name = if path.is_empty() {
            "ionfab".to_string()
        } else {
            format!("ionfab-{}", path.join("-"))
        };
        let file = golden_dir().join(format!("{name}.txt"));
        if update {
            fs::create_dir_all(golden_dir()).unwrap();
            fs::write(&file, &text).unwrap();
            continue;
        }
        let expected = fs::read_to_string(&file)
            .unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", file.display()));
        assert_eq!(text, expected, "help for {path:?} changed; run with UPDATE_GOLDEN=1");
    }
}

#[test]
fn fixtures_validate_against_schemas() {
    for (schema_name, file) in [
        ("arch", "example.json"),
        ("switch", "schedule.json"),
        ("demand", "demand.json"),
    ] {
        let v: Value = serde_json::from_str(&fs::read_to_string(data(file)).unwrap()).unwrap();
        assert_valid(schema_name, &v);
    }
    let mut bad: Value = serde_json::from_str(&fs::read_to_string(data("schedule.json")).unwrap()).unwrap();
    bad["entries"][0]["links"][0] = serde_json::json!(["A19", "B:0"]);
    assert!(!schema("switch").is_valid(&bad));
}

#[test]
fn outputs_validate_against_schemas() {
    let arch = data("example.json");
    assert_valid("rates", &json(&ionfab(&["rates", &arch])));
    let sim = json(&ionfab(&[
        "simulate",
        &arch,
        "--schedule",
        &data("schedule.json"),
        "--demand",
        &data("demand.json"),
        "--horizon",
        "2",
        "--seed",
        "5",
    ]));
    assert_valid("sim", &sim);
    for pairs in [["--pairs", "ideal"], ["--pairs", "buffered"]] {
        let sched = json(&ionfab(&[
            "schedule",
            &arch,
            &data("ghz_teleport.iqc"),
            "--map",
            "file",
            "--map-file",
            &data("map_ghz.json"),
            pairs[0],
            pairs[1],
            "--seed",
            "9",
        ]));
        assert_valid("schedule", &sched);
    }
    assert_valid("qec", &json(&ionfab(&["qec", "surface", "--d", "5"])));
    assert_valid(
        "qec",
        &json(&ionfab(&[
            "qec",
            "hgp",
            "--h1",
            &data("rep3.csv"),
            "--h2",
            &data("rep3.csv"),
        ])),
    );
    assert_valid("ising", &json(&ionfab(&["ising", "--n", "6", "--alpha", "1.3"])));
    assert_valid(
        "ising",
        &json(&ionfab(&["ising", "--n", "6", "--random", "--seed", "2"])),
    );
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let out = dir.path().join(format!("sim-{tag}.json"));
        let log = dir.path().join(format!("events-{tag}.csv"));
        let o = ionfab(&[
            "simulate",
            &data("example.json"),
            "--schedule",
            &data("schedule.json"),
            "--demand",
            &data("demand.json"),
            "--horizon",
            "3",
            "--seed",
            "42",
            "--log",
            log.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (fs::read(out).unwrap(), fs::read(log).unwrap())
    };
    let (a_json, a_log) = run("a");
    let (b_json, b_log) = run("b");
    assert_eq!(a_json, b_json);
    assert_eq!(a_log, b_log);
    assert!(String::from_utf8(a_log)
        .unwrap()
        .starts_with("time_s,kind,link,elu_a,elu_b,seq\n"));
}

#[test]
fn ensemble_output_is_independent_of_thread_count() {
    let args = [
        "simulate",
        &data("example.json"),
        "--schedule",
        &data("schedule.json"),
        "--horizon",
        "0.5",
        "--seed",
        "1",
        "--ensemble",
        "6",
    ];
    let one = ionfab_env(&args, &[("IONFAB_THREADS", "1")]);
    let four = ionfab_env(&args, &[("IONFAB_THREADS", "4")]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&ionfab_env(&args, &[("IONFAB_THREADS", "zero")])), 2);
}

#[test]
fn schedule_timeline_csv() {
    let dir = tempfile::tempdir().unwrap();
    let timeline = dir.path().join("t.csv");
    let o = ionfab(&[
        "schedule",
        &data("example.json"),
        &data("ghz_teleport.iqc"),
        "--map",
        "roundrobin",
        "--pairs",
        "buffered",
        "--seed",
        "4",
        "--timeline",
        timeline.to_str().unwrap(),
    ]);
    // round robin splits the GLOBAL_MS operands across ELUs
    assert_eq!(code(&o), 1);
    let o = ionfab(&[
        "schedule",
        &data("example.json"),
        &data("ghz_teleport.iqc"),
        "--timeline",
        timeline.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(&timeline).unwrap();
    assert!(csv.starts_with("start_s,dur_s,gate,operands,elus,resource\n"));
    assert_eq!(csv.lines().count(), 1 + 15);
    assert_eq!(
        code(&ionfab(&[
            "schedule",
            &data("example.json"),
            &data("ghz_teleport.iqc"),
            "--pairs",
            "buffered"
        ])),
        2
    );
}

#[test]
fn ising_generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let o = ionfab(&["ising", "--n", "5", "--alpha", "0", "--out", inst.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let solved = json(&ionfab(&["ising", "solve", inst.to_str().unwrap()]));
    assert_eq!(solved["energy"], -10.0);
    assert_eq!(solved["degeneracy"], 2);
    let annealed = json(&ionfab(&["ising", "anneal", inst.to_str().unwrap(), "--seed", "3"]));
    assert_eq!(annealed["energy"], -10.0);
    assert_eq!(code(&ionfab(&["ising", "anneal", inst.to_str().unwrap()])), 2);
    let adiabatic = json(&ionfab(&[
        "ising",
        "adiabatic",
        inst.to_str().unwrap(),
        "--time",
        "20",
        "--steps",
        "400",
    ]));
    assert!(adiabatic["overlap"].as_f64().unwrap() > 0.9);
}

#[test]
fn graph_and_embed() {
    let dot = ionfab(&["graph", &data("example.json"), "--tier", "fast", "--format", "dot"]);
    assert_eq!(code(&dot), 0);
    assert!(stdout(&dot).starts_with("graph ionfab {"));
    let g = json(&ionfab(&["graph", &data("example.json")]));
    assert_eq!(g["distance_profile"]["max_distance"], 1);

    let dir = tempfile::tempdir().unwrap();
    let code_path = dir.path().join("code.json");
    let o = ionfab(&[
        "qec",
        "hgp",
        "--h1",
        &data("rep3.csv"),
        "--h2",
        &data("rep3.csv"),
        "--out",
        code_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let grid = json(&ionfab(&[
        "qec",
        "embed",
        "--code",
        code_path.to_str().unwrap(),
        "--host",
        "grid",
    ]));
    assert!(grid["max_check_span"].as_u64().unwrap() >= 1);
    let modular = json(&ionfab(&[
        "qec",
        "embed",
        "--code",
        code_path.to_str().unwrap(),
        "--host",
        &data("example.json"),
    ]));
    assert_eq!(modular["max_intra_hop"], 1);
    let random = [
        "qec",
        "embed",
        "--code",
        code_path.to_str().unwrap(),
        "--host",
        "grid",
        "--placement",
        "random",
    ];
    assert_eq!(code(&ionfab(&random)), 2);
}
