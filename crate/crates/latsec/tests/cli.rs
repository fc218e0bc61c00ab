use std::path::Path;
use std::process::{Command, Output};

use latsec::envelope::{emit, Field, Format, Number, ResultEnvelope};

fn latsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latsec")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn envelope(out: &Output) -> ResultEnvelope {
    ResultEnvelope::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn lemmas_on_two_point_scalar_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "c.conf", "kind = lemmas\np = 2\nk = 1\nn = 1\n");
    let out = latsec(&["verify", "lemmas", "--config", &conf]);
    assert_eq!(out.status.code(), Some(0));
    let env = envelope(&out);
    let r = &env.results[0];
    assert_eq!(r.get("sumBoundPass"), Some(&Field::Flag(true)));
    assert_eq!(
        r.get("mutualInfo"),
        Some(&Field::Number(Number::Exact {
            value: 0.5,
            exact: "1/2".to_string()
        }))
    );
    assert!(env.wall_clock.is_some());
}

#[test]
fn pipeline_with_large_gain_is_very_strong() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "c.conf", "a = 1.5\nP = 1\n");
    let out = latsec(&["simulate", "pipeline", "--config", &conf, "--trials", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let env = envelope(&out);
    assert_eq!(env.kind, "pipeline");
    assert_eq!(env.results[0].get("regime"), Some(&Field::Text("VeryStrong".to_string())));
    assert_eq!(env.config["trials"], "500");
}

#[test]
fn sweep_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(
        dir.path(),
        "s.conf",
        "kind = sweep\nsweep = lemmas\nprimes = 2,3,5\nmaxN = 1\nseeds = 0\n",
    );
    let out_path = dir.path().join("out.csv");
    let out = latsec(&["sweep", "--config", &conf, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    assert_eq!(&header[0], "p");
    assert!(header.iter().any(|h| h == "mutualInfo_exact"));
    let rows: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn csv_columns_depend_only_on_kind() {
    let weak = latsec(&["simulate", "pipeline", "--format", "csv", "--trials", "50"]);
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "c.conf", "a = 10\n");
    let strong = latsec(&["simulate", "pipeline", "--config", &conf, "--format", "csv", "--trials", "50"]);
    let header = |o: &Output| String::from_utf8(o.stdout.clone()).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header(&weak), header(&strong));
}

#[test]
fn json_round_trips() {
    let out = latsec(&["compare", "random", "--config", "/dev/null", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let env = envelope(&out);
    assert_eq!(env.config["rootSeed"], "3");
    let again = ResultEnvelope::from_json(&env.to_json()).unwrap();
    assert_eq!(again, env);
}

#[test]
fn determinism_across_processes() {
    let a = envelope(&latsec(&["simulate", "pipeline", "--seed", "9", "--trials", "300"]));
    let b = envelope(&latsec(&["simulate", "pipeline", "--seed", "9", "--trials", "300"]));
    assert_eq!(a.payload_json(), b.payload_json());
    let c = envelope(&latsec(&["simulate", "pipeline", "--seed", "10", "--trials", "300"]));
    assert_ne!(a.payload_json(), c.payload_json());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.conf", "kind = lemmas\nfrobnicate = 1\n");
    let out = latsec(&["verify", "lemmas", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let invalid = write(dir.path(), "invalid.conf", "p = 4\n");
    let out = latsec(&["verify", "lemmas", "--config", &invalid]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));

    let wrong_kind = write(dir.path(), "kind.conf", "kind = baseline\n");
    assert_eq!(latsec(&["verify", "lemmas", "--config", &wrong_kind]).status.code(), Some(2));

    let big = write(dir.path(), "big.conf", "p = 7\nk = 3\nn = 3\n");
    assert_eq!(latsec(&["verify", "lemmas", "--config", &big, "--budget", "100"]).status.code(), Some(3));

    let missing = dir.path().join("no/such/dir/out.json");
    let out = latsec(&["verify", "lemmas", "--out", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let env = envelope(&latsec(&["verify", "lemmas"]));
    let dir = tempfile::tempdir().unwrap();
    let err = emit(&env, Format::Json, Some(&dir.path().join("missing/out.json"))).unwrap_err();
    assert!(matches!(err, latsec::envelope::EmitError::Io(_)));
}
