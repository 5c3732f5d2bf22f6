//! End-to-end tests of the `bkf` binary: exit codes, output files, and
//! determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bkf() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bkf"));
    cmd.env("BKF_LOG", "quiet");
    cmd
}

struct TempDir {
    path: PathBuf,
}

impl TempDir {
    fn new(name: &str) -> Self {
        let path = std::env::temp_dir().join(format!(
            "bkf-cli-{}-{}-{name}",
            std::process::id(),
            std::thread::current()
                .name()
                .unwrap_or("t")
                .replace("::", "-")
        ));
        let _ = fs::remove_dir_all(&path);
        fs::create_dir_all(&path).expect("create temp dir");
        TempDir { path }
    }

    fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.path);
    }
}

const PARAMS: &str = "\
seed = 42
countries = AA,BB,CC
period = 2004..2008
cutoff = 2017-06-10
journals = 20
scs = 8
areas = 3
citation_density = 2.5
tie_rate = 0.08
collab_rate = 0.3
pubs.AA = 90
pubs.BB = 70
pubs.CC = 50
home_bias.AA = 0.7
home_bias.BB = 0.6
home_bias.CC = 0.5
";

fn generate_fixture(dir: &TempDir) -> PathBuf {
    let params = dir.join("params.txt");
    fs::write(&params, PARAMS).unwrap();
    let data = dir.join("data");
    let output = bkf()
        .args(["generate", "--params"])
        .arg(&params)
        .arg("--out")
        .arg(&data)
        .output()
        .expect("run generate");
    assert!(output.status.success(), "generate failed: {output:?}");
    data
}

fn write_tiny_corpus(dir: &Path, duplicate_id: bool, dangling: bool) {
    fs::create_dir_all(dir).unwrap();
    let mut pubs = String::new();
    pubs.push_str(r#"{"id":"P1","year":2005,"doc_type":"article","journal_id":"J1","affiliations":[{"institution_id":"i1","country":"AA"}]}"#);
    pubs.push('\n');
    let second_id = if duplicate_id { "P1" } else { "Q1" };
    pubs.push_str(&format!(
        r#"{{"id":"{second_id}","year":2006,"doc_type":"article","journal_id":"J1","affiliations":[{{"institution_id":"i2","country":"BB"}}]}}"#
    ));
    pubs.push('\n');
    fs::write(dir.join("publications.jsonl"), pubs).unwrap();
    let mut citations = String::from("citing_id,cited_id\nQ1,P1\n");
    if dangling {
        citations.push_str("GHOST,P1\n");
    }
    fs::write(dir.join("citations.csv"), citations).unwrap();
    fs::write(dir.join("journals.csv"), "J1,SC1\n").unwrap();
    fs::write(dir.join("sc_areas.csv"), "SC1,AREA1\n").unwrap();
    fs::write(
        dir.join("config.txt"),
        "countries = AA,BB\nperiod = 2004..2008\ncutoff = 2017-06-10\n",
    )
    .unwrap();
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn validate_clean_fixture_exits_zero() {
    let tmp = TempDir::new("validate-clean");
    let data = generate_fixture(&tmp);
    let out = tmp.join("out");
    let output = bkf()
        .arg("validate")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["dangling_links"]["count"], 0);
    assert_eq!(report["rejected_records"]["count"], 0);
}

#[test]
fn validate_reports_dangling_links_but_exits_zero() {
    let tmp = TempDir::new("validate-dangling");
    let data = tmp.join("data");
    write_tiny_corpus(&data, false, true);
    let out = tmp.join("out");
    let output = bkf()
        .arg("validate")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["dangling_links"]["count"], 1);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("dangling links"), "{stdout}");
}

#[test]
fn validate_duplicate_publication_id_exits_one() {
    let tmp = TempDir::new("validate-dup");
    let data = tmp.join("data");
    write_tiny_corpus(&data, true, false);
    let output = bkf()
        .arg("validate")
        .arg(&data)
        .arg("--out")
        .arg(tmp.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1, "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("P1"), "{stderr}");
}

#[test]
fn missing_input_file_exits_two() {
    let tmp = TempDir::new("missing-input");
    let output = bkf()
        .arg("validate")
        .arg(tmp.join("nope"))
        .arg("--out")
        .arg(tmp.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2, "{output:?}");
}

#[test]
fn unwritable_output_dir_exits_two() {
    let tmp = TempDir::new("unwritable-out");
    let data = generate_fixture(&tmp);
    // A regular file where the output directory should go.
    let blocked = tmp.join("blocked");
    fs::write(&blocked, "not a directory").unwrap();
    let output = bkf()
        .arg("compute")
        .arg(&data)
        .arg("--out")
        .arg(&blocked)
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2, "{output:?}");
}

#[test]
fn compute_writes_all_tables_deterministically() {
    let tmp = TempDir::new("compute-determinism");
    let data = generate_fixture(&tmp);

    let expected = [
        "summary.csv",
        "bkf.csv",
        "flow_matrix.csv",
        "bkf_by_sc.csv",
        "bkf_by_area.csv",
        "kosi.csv",
        "kisi.csv",
    ];

    let mut digests: Vec<Vec<(String, String)>> = Vec::new();
    for (run, jobs) in [("run1", "1"), ("run2", "4")] {
        // Different --jobs settings must never change the output bytes.
        let out = tmp.join(run);
        let output = bkf()
            .arg("compute")
            .arg(&data)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .output()
            .unwrap();
        assert_eq!(exit_code(&output), 0, "{output:?}");
        for name in expected {
            assert!(out.join(name).exists(), "{name} missing");
        }
        assert!(out.join("tables.json").exists());
        assert!(out.join("manifest.json").exists());

        let mut files: Vec<(String, String)> = expected
            .iter()
            .map(|name| {
                (
                    name.to_string(),
                    fs::read_to_string(out.join(name)).unwrap(),
                )
            })
            .collect();
        files.push((
            "tables.json".to_string(),
            fs::read_to_string(out.join("tables.json")).unwrap(),
        ));
        digests.push(files);
    }
    assert_eq!(digests[0], digests[1], "outputs differ between runs");

    // The manifests agree on every digest even though timings differ.
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.join("run1").join("manifest.json")).unwrap())
            .unwrap();
    let manifest2: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.join("run2").join("manifest.json")).unwrap())
            .unwrap();
    let digests_of = |m: &serde_json::Value| -> Vec<String> {
        m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["sha256"].as_str().unwrap().to_string())
            .collect()
    };
    assert_eq!(digests_of(&manifest), digests_of(&manifest2));
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 5);
}

#[test]
fn compute_balances_sum_to_zero() {
    let tmp = TempDir::new("compute-zero-sum");
    let data = generate_fixture(&tmp);
    let out = tmp.join("out");
    let output = bkf()
        .arg("compute")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    let bkf_csv = fs::read_to_string(out.join("bkf.csv")).unwrap();
    let total: i64 = bkf_csv
        .lines()
        .skip(1)
        .map(|line| line.rsplit(',').next().unwrap().parse::<i64>().unwrap())
        .sum();
    assert_eq!(total, 0);
}

#[test]
fn compute_dump_gains_writes_record_file() {
    let tmp = TempDir::new("compute-gains");
    let data = generate_fixture(&tmp);
    let out = tmp.join("out");
    let output = bkf()
        .arg("compute")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .arg("--dump-gains")
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    let gains = fs::read_to_string(out.join("gains.csv")).unwrap();
    assert!(gains.starts_with("cited_id,citing_id,generator,earner,domestic,sc_codes\n"));
    assert!(gains.lines().count() > 1, "gains dump is empty");
    // Conservation against the matrix total in tables.json.
    let tables: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("tables.json")).unwrap()).unwrap();
    let matrix_total: u64 = tables["flow_matrix"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap())
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(gains.lines().count() as u64 - 1, matrix_total);
}

#[test]
fn pair_tables_negate_between_perspectives() {
    let tmp = TempDir::new("pair-antisym");
    let data = generate_fixture(&tmp);
    let out = tmp.join("out");
    for (k, l) in [("AA", "BB"), ("BB", "AA")] {
        let output = bkf()
            .arg("pair")
            .arg(&data)
            .args([k, l])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(exit_code(&output), 0, "{output:?}");
    }
    let ab = fs::read_to_string(out.join("bilateral_AA_BB.csv")).unwrap();
    let ba = fs::read_to_string(out.join("bilateral_BB_AA.csv")).unwrap();
    let parse = |text: &str| -> Vec<(String, u64, u64, i64)> {
        text.lines()
            .skip(1)
            .map(|line| {
                let cells: Vec<&str> = line.split(',').collect();
                (
                    cells[0].to_string(),
                    cells[1].parse().unwrap(),
                    cells[2].parse().unwrap(),
                    cells[3].parse().unwrap(),
                )
            })
            .collect()
    };
    let ab_rows = parse(&ab);
    let ba_rows = parse(&ba);
    assert_eq!(ab_rows.len(), ba_rows.len());
    for (x, y) in ab_rows.iter().zip(&ba_rows) {
        assert_eq!(x.0, y.0);
        assert_eq!(x.1, y.2);
        assert_eq!(x.2, y.1);
        assert_eq!(x.3, -y.3);
    }
}

#[test]
fn pair_rejects_same_or_unknown_country() {
    let tmp = TempDir::new("pair-errors");
    let data = generate_fixture(&tmp);
    let output = bkf()
        .arg("pair")
        .arg(&data)
        .args(["AA", "AA"])
        .arg("--out")
        .arg(tmp.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1);
    let output = bkf()
        .arg("pair")
        .arg(&data)
        .args(["AA", "XX"])
        .arg("--out")
        .arg(tmp.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn top_prints_ranked_lists() {
    let tmp = TempDir::new("top");
    let data = generate_fixture(&tmp);
    let output = bkf()
        .arg("top")
        .arg(&data)
        .args(["--table", "bkf", "--country", "AA", "-n", "3"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("deficits"), "{stdout}");
    assert!(stdout.contains("surpluses"), "{stdout}");

    let output = bkf()
        .arg("top")
        .arg(&data)
        .args(["--table", "kosi", "--country", "BB"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0);
    assert!(String::from_utf8_lossy(&output.stdout).contains("outflow"));

    let output = bkf()
        .arg("top")
        .arg(&data)
        .args(["--table", "kosi", "--country", "XX"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn generate_is_deterministic_per_seed() {
    let tmp = TempDir::new("generate-determinism");
    let params = tmp.join("params.txt");
    fs::write(&params, PARAMS).unwrap();
    let mut contents = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.join(run);
        let output = bkf()
            .args(["generate", "--params"])
            .arg(&params)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(exit_code(&output), 0);
        let mut bundle = String::new();
        for name in [
            "publications.jsonl",
            "citations.csv",
            "journals.csv",
            "sc_areas.csv",
            "config.txt",
        ] {
            bundle.push_str(&fs::read_to_string(out.join(name)).unwrap());
        }
        contents.push(bundle);
    }
    assert_eq!(contents[0], contents[1]);
}

#[test]
fn config_overrides_apply() {
    let tmp = TempDir::new("overrides");
    let data = generate_fixture(&tmp);
    // Restricting the analysis to two countries still computes cleanly
    // and the summary carries exactly those two rows.
    let out = tmp.join("out");
    let output = bkf()
        .arg("compute")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .args(["--countries", "AA,BB", "--threshold", "2/3"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let countries: Vec<&str> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(countries, ["AA", "BB"]);
}
