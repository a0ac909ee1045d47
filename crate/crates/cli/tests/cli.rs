mod common;

use std::fs;
use std::path::Path;

use common::{dir_contents, fixture_dir, path_str, ubi};

fn copy_fixture(to: &Path) {
    for e in fs::read_dir(fixture_dir()).unwrap() {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            fs::copy(e.path(), to.join(e.file_name())).unwrap();
        }
    }
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_accepts_fixture() {
    let o = ubi(&["validate", "--data", path_str(&fixture_dir())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 violations"));
}

#[test]
fn validate_names_row_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    copy_fixture(tmp.path());
    let areas = tmp.path().join("areas.csv");
    let text = fs::read_to_string(&areas).unwrap().replace("AAA-02,AAA,10000,1000", "AAA-02,AAA,10000,-5");
    fs::write(&areas, text).unwrap();
    let o = ubi(&["validate", "--data", path_str(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("area_km2"), "{out}");
    assert!(out.contains("3"), "expected the line number in: {out}");
}

#[test]
fn validate_missing_file_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    copy_fixture(tmp.path());
    fs::remove_file(tmp.path().join("wages.csv")).unwrap();
    let o = ubi(&["validate", "--data", path_str(tmp.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = tmp.path().join("bad.toml");
    fs::write(&sc, "name = \"x\"\nmonthly_gigs = 3\n").unwrap();
    let out = tmp.path().join("out");
    let o = ubi(&["run", "--data", path_str(&fixture_dir()), "--scenario", path_str(&sc), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("monthly_gigs"), "{}", stderr(&o));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn run_writes_results_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let sc = fixture_dir().join("scenario.toml");
    let o = ubi(&["run", "--data", path_str(&fixture_dir()), "--scenario", path_str(&sc), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let names: Vec<String> = dir_contents(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["deciles.csv", "manifest.json", "results_aggregate.csv", "results_country.csv", "results_decile.csv"]);

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["scenario_name"], "fixture");
    assert!(manifest["timestamp"].is_null());
    for role in ["areas", "countries", "wages", "costbook", "scenario"] {
        assert_eq!(manifest["inputs"][role]["sha256"].as_str().unwrap().len(), 64, "{role}");
    }
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);

    let countries = fs::read_to_string(out.join("results_country.csv")).unwrap();
    assert!(countries.lines().any(|l| l.starts_with("fixture,AAA,") && l.contains(",5738000.00,")), "{countries}");
}

#[test]
fn sweep_writes_delta_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let sc = fixture_dir().join("sweep.toml");
    let o = ubi(&["sweep", "--data", path_str(&fixture_dir()), "--scenario", path_str(&sc), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.lines().next().unwrap().contains("delta"));
    assert!(out.join("manifest.json").exists());
}

fn write_lookup_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("lookup.toml");
    fs::write(&p, "density_grid = [0.0, 0.1, 1.0, 10.0]\n\n[simulation]\niterations = 500\n").unwrap();
    p
}

fn lookup(cfg: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    let data = fixture_dir();
    let mut args = vec!["lookup", "--data", path_str(&data)];
    args.extend(["--config", path_str(cfg), "--out", path_str(out)]);
    args.extend(extra);
    ubi(&args)
}

fn assert_monotone_table(text: &str) {
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows[0], (0.0, 0.0));
    for w in rows.windows(2) {
        assert!(w[1].0 > w[0].0 && w[1].1 >= w[0].1, "{w:?}");
    }
}

#[test]
fn lookup_is_reproducible_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_lookup_config(tmp.path());
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, extra) in [(&a, &[][..]), (&b, &["--jobs", "1"][..]), (&c, &["--seed", "99"][..])] {
        let o = lookup(&cfg, dir, extra);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(dir_contents(&a), dir_contents(&b));

    let table = "lookup_800_95.csv";
    let (ta, tc) = (fs::read_to_string(a.join(table)).unwrap(), fs::read_to_string(c.join(table)).unwrap());
    assert_ne!(ta, tc);
    assert_monotone_table(&ta);
    assert_monotone_table(&tc);
}

#[test]
fn help_lists_config_keys() {
    let o = ubi(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for key in ["monthly_gb", "reliability_pct", "busy_hour_share_pct", "rng_seed", "horizon_years", "baseline"] {
        assert!(out.contains(key), "help lacks {key}");
    }
}
