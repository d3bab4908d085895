use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/reference.toml");

fn lorentz_wall(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentz-wall"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn variant(dir: &Path, from: &str, to: &str) -> PathBuf {
    let text = fs::read_to_string(FIXTURE).unwrap();
    assert!(text.contains(from), "fixture lacks {from:?}");
    let path = dir.join("config.toml");
    fs::write(&path, text.replace(from, to)).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 4] = ["--n", "1000", "--samples", "12"];

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["simulate-lorentz", "simulate-walk", "sample-limit"] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        for (out, threads) in [(&a, "1"), (&b, "2")] {
            let o = lorentz_wall(
                Path::new(FIXTURE),
                out,
                &[
                    cmd,
                    "--seed",
                    "1",
                    "--threads",
                    threads,
                    SMALL[0],
                    SMALL[1],
                    SMALL[2],
                    SMALL[3],
                ],
            );
            assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        }
        let (ta, tb) = (tree(&a), tree(&b));
        assert!(ta.len() > 3, "{cmd}: {:?}", ta.keys());
        assert_eq!(ta, tb, "{cmd}");
    }
}

#[test]
fn every_file_carries_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = lorentz_wall(
        Path::new(FIXTURE),
        &out,
        &["simulate-lorentz", "--seed", "3", "--n", "500", "--samples", "5"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    let hash = summary["config_hash"].as_str().unwrap().to_owned();
    assert_eq!(hash.len(), 64);
    for (name, bytes) in tree(&out) {
        let text = String::from_utf8(bytes).unwrap();
        if name.extension().is_some_and(|e| e == "json") {
            assert!(text.contains(&hash), "{name:?}");
        } else {
            let first = text.lines().next().unwrap();
            assert!(
                first.starts_with('#') && first.contains(&hash),
                "{name:?}: {first}"
            );
        }
    }
    let record = fs::read_to_string(out.join("records/sample_00000.csv")).unwrap();
    let mut lines = record.lines().skip(1);
    assert_eq!(lines.next(), Some("k,kappa,S,L,crossed,alpha,position"));
    assert_eq!(lines.count(), 500);
    let path = fs::read_to_string(out.join("paths/sample_00000_w.csv")).unwrap();
    assert_eq!(path.lines().nth(1), Some("t,value"));
}

#[test]
fn alpha_column_ends_at_one_hundredth() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(
        tmp.path(),
        "family = \"inv_sqrt\"\nc = 0.15",
        "family = \"inv_sqrt\"\nc = 1.0",
    );
    let out = tmp.path().join("walk");
    let o = lorentz_wall(&cfg, &out, &["simulate-walk", "--n", "10000", "--samples", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let record = fs::read_to_string(out.join("records/sample_00000.csv")).unwrap();
    let last = record.lines().last().unwrap();
    let cols: Vec<&str> = last.split(',').collect();
    assert_eq!(cols[0], "10000");
    assert_eq!(cols[5].parse::<f64>().unwrap(), 0.01);
}

#[test]
fn mismatched_rerun_refuses_to_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let args = |seed| {
        [
            "simulate-walk",
            "--seed",
            seed,
            SMALL[0],
            SMALL[1],
            SMALL[2],
            SMALL[3],
        ]
    };
    assert!(lorentz_wall(Path::new(FIXTURE), &out, &args("1"))
        .status
        .success());
    let before = tree(&out);

    let o = lorentz_wall(Path::new(FIXTURE), &out, &args("2"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refusing to overwrite"), "{}", stderr(&o));
    assert_eq!(tree(&out), before);

    let o = lorentz_wall(
        Path::new(FIXTURE),
        &out,
        &[
            "sample-limit",
            "--seed",
            "1",
            SMALL[0],
            SMALL[1],
            SMALL[2],
            SMALL[3],
        ],
    );
    assert_eq!(o.status.code(), Some(2));

    assert!(lorentz_wall(Path::new(FIXTURE), &out, &args("1"))
        .status
        .success());
    assert_eq!(tree(&out), before);
}

#[test]
fn failed_runs_leave_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    // a bound far below the true free path makes the simulation itself fail
    let cfg = variant(tmp.path(), "max_free_path = 1.5798667041", "max_free_path = 0.05");
    let out = tmp.path().join("run");
    let o = lorentz_wall(
        &cfg,
        &out,
        &["simulate-lorentz", SMALL[0], SMALL[1], SMALL[2], SMALL[3]],
    );
    assert_eq!(o.status.code(), Some(2));
    let left: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(left, vec![std::ffi::OsString::from("config.toml")]);
}

#[test]
fn validation_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(
        tmp.path(),
        "family = \"inv_sqrt\"\nc = 0.15",
        "family = \"const\"\nalpha = 0.3",
    );
    let o = lorentz_wall(&cfg, &tmp.path().join("run"), &["simulate-lorentz"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schedule.alpha"), "{}", stderr(&o));

    let cfg = variant(
        tmp.path(),
        "components = [[0.4, 0.6]]",
        "components = [[0.3, 0.6]]",
    );
    let o = lorentz_wall(&cfg, &tmp.path().join("run"), &["simulate-lorentz"]);
    assert!(stderr(&o).contains("wall.components"), "{}", stderr(&o));

    let o = lorentz_wall(
        Path::new(FIXTURE),
        &tmp.path().join("run"),
        &["sample-limit", "--samples", "0"],
    );
    assert!(stderr(&o).contains("samples"), "{}", stderr(&o));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn verify_passes_on_the_shipped_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("verify");
    let o = lorentz_wall(Path::new(FIXTURE), &out, &["verify"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}{}", stderr(&o));
    let reports = tree(&out.join("reports"));
    assert_eq!(
        reports.len(),
        stdout.lines().filter(|l| l.starts_with("PASS")).count()
    );
    for bytes in reports.values() {
        let r: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        for key in ["name", "statistic", "threshold", "pass", "seed", "config_hash"] {
            assert!(r.get(key).is_some(), "{key} missing in {r}");
        }
        assert_eq!(r["pass"], true);
        assert_eq!(r["seed"], 20_240_601);
    }
}
