//! End-to-end runs of the `peakscope` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const WELL: &str = r#"# quadratic well
n = 3
p = 2
q = 4
alpha = "1"
V = "1 + (x1 - 0.3)^2 + (x2 + 0.2)^2 + (x3 - 0.1)^2"
K = "1"
box = "-1,1"
grid_n = 4
seed = 3
"#;

const FLAT: &str =
    "n = 3\np = 2\nq = 4\nalpha = \"1\"\nV = \"1\"\nK = \"1\"\nbox = \"-1,1\"\ngrid_n = 4\n";

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("run.cfg"), config).unwrap();
        Self { dir }
    }

    fn cfg(&self) -> PathBuf {
        self.dir.path().join("run.cfg")
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, out: &str, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_peakscope"))
            .arg("--out")
            .arg(self.out(out))
            .args(args)
            .env_remove("PEAKSCOPE_SEED")
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn solve_writes_profile_and_energy_deterministically() {
    let run = Run::new(FLAT);
    let cfg = run.cfg();
    let cfg = cfg.to_str().unwrap();
    let a = run.exec("a", &["solve", "--config", cfg, "--at", "0,0,0"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let energy: Value = serde_json::from_str(&read(&run.out("a/energy.json"))).unwrap();
    assert!(energy["I_value"].as_f64().unwrap() > 0.0);
    for key in ["A", "B", "C", "Phi"] {
        assert!(energy[key].is_number(), "{key}");
    }
    assert!(read(&run.out("a/profile.csv")).starts_with("r,w,w_prime\n"));
    let b = run.exec("b", &["solve", "--config", cfg, "--at", "0,0,0"]);
    assert_eq!(code(&b), 0);
    for f in ["energy.json", "profile.csv"] {
        assert_eq!(
            read(&run.out(&format!("a/{f}"))),
            read(&run.out(&format!("b/{f}")))
        );
    }
}

#[test]
fn nonpositive_coefficient_is_a_config_error_naming_it() {
    let run = Run::new(&FLAT.replace("V = \"1\"", "V = \"x1\""));
    let o = run.exec(
        "o",
        &[
            "solve",
            "--config",
            run.cfg().to_str().unwrap(),
            "--at",
            "-1,0,0",
        ],
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("V"), "{}", stderr(&o));
}

#[test]
fn malformed_config_reports_key_and_offset() {
    let text = FLAT.replace("q = 4", "q = four");
    let offset = text.find("four").unwrap();
    let run = Run::new(&text);
    let o = run.exec(
        "o",
        &["scan-sigma", "--config", run.cfg().to_str().unwrap()],
    );
    assert_eq!(code(&o), 1);
    let msg = stderr(&o);
    assert!(
        msg.contains("`q`") && msg.contains(&format!("byte {offset}")),
        "{msg}"
    );
}

#[test]
fn usage_errors_exit_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_peakscope"))
        .args(["solve", "--config"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn scan_rows_are_ordered_and_independent_of_jobs() {
    let run = Run::new(WELL);
    let cfg = run.cfg();
    let cfg = cfg.to_str().unwrap();
    let one = run.exec("one", &["--jobs", "1", "scan-sigma", "--config", cfg]);
    let four = run.exec("four", &["--jobs", "4", "scan-sigma", "--config", cfg]);
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(code(&four), 0);
    let text = read(&run.out("one/sigma_scan.csv"));
    assert_eq!(text, read(&run.out("four/sigma_scan.csv")));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z1,z2,z3,sigma,grad1,grad2,grad3,error");
    assert_eq!(lines.len(), 65);
    // Smallest Σ sits at the node closest to z*.
    let rows: Vec<Vec<f64>> = lines[1..]
        .iter()
        .map(|l| l.split(',').take(4).map(|x| x.parse().unwrap()).collect())
        .collect();
    let best = rows.iter().min_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    let dist = |r: &Vec<f64>| (r[0] - 0.3).powi(2) + (r[1] + 0.2).powi(2) + (r[2] - 0.1).powi(2);
    let nearest = rows
        .iter()
        .min_by(|a, b| dist(a).total_cmp(&dist(b)))
        .unwrap();
    assert_eq!(best, nearest);
    // Lexicographic order: first axis slowest.
    assert!(rows[0][0] == -1.0 && rows[1][0] == -1.0 && rows[1][2] > rows[0][2]);
}

#[test]
fn two_point_grid_on_constant_field() {
    let run = Run::new(&FLAT.replace("grid_n = 4", "grid_n = 2"));
    let o = run.exec(
        "o",
        &["scan-sigma", "--config", run.cfg().to_str().unwrap()],
    );
    assert_eq!(code(&o), 0);
    let text = read(&run.out("o/sigma_scan.csv"));
    let sigmas: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(sigmas.len(), 8);
    assert!(sigmas.iter().all(|s| s == &sigmas[0]));
}

#[test]
fn rejected_grid_points_become_error_rows() {
    let run = Run::new(&FLAT.replace("V = \"1\"", "V = \"x1\""));
    let o = run.exec(
        "o",
        &["scan-sigma", "--config", run.cfg().to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = read(&run.out("o/sigma_scan.csv"));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 64);
    let errors = rows.iter().filter(|r| r.contains("not positive")).count();
    // x1 ∈ {−1, −1/3} rows fail, x1 ∈ {1/3, 1} rows succeed.
    assert_eq!(errors, 32);
}

#[test]
fn locate_finds_the_well_and_flags_constant_fields() {
    let run = Run::new(&WELL.replace("grid_n = 4", "grid_n = 6"));
    let o = run.exec("o", &["locate", "--config", run.cfg().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = read(&run.out("o/candidates.jsonl"));
    let records: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 1);
    let c = &records[0];
    assert_eq!(c["certification"]["certified"], Value::Bool(true));
    assert_eq!(c["in_C_set"], Value::Bool(true));
    let z: Vec<f64> = c["z"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((z[0] - 0.3).abs() < 1e-6 && (z[1] + 0.2).abs() < 1e-6 && (z[2] - 0.1).abs() < 1e-6);
    for key in [
        "N",
        "N_norm",
        "gram_rank",
        "lin_dep",
        "grad_sigma_fd",
        "refinement_trace",
    ] {
        assert!(!c[key].is_null(), "{key}");
    }

    let flat = Run::new(FLAT);
    let o = flat.exec("o", &["locate", "--config", flat.cfg().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let record: Value = serde_json::from_str(read(&flat.out("o/candidates.jsonl")).trim()).unwrap();
    assert_eq!(record["degenerate_landscape"], Value::Bool(true));
}

#[test]
fn candidates_never_have_full_gram_rank() {
    let text = WELL
        .replace("alpha = \"1\"", "alpha = \"2 + 0.1*x3\"")
        .replace("K = \"1\"", "K = \"1 + 0.1*x2\"")
        .replace("grid_n = 4", "grid_n = 5");
    let run = Run::new(&text);
    let o = run.exec("o", &["locate", "--config", run.cfg().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let body = read(&run.out("o/candidates.jsonl"));
    let records: Vec<Value> = body
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!records.is_empty());
    for r in records.iter().filter(|r| r["refined"] == Value::Bool(true)) {
        assert!(r["gram_rank"].as_u64().unwrap() <= 2, "{r}");
    }
}

#[test]
fn seed_comes_from_the_environment_when_set() {
    let run = Run::new(&WELL.replace("grid_n = 4", "grid_n = 5"));
    let cfg = run.cfg();
    let go = |out: &str, seed: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_peakscope"))
            .args([
                "--out",
                run.out(out).to_str().unwrap(),
                "locate",
                "--config",
                cfg.to_str().unwrap(),
            ])
            .env("PEAKSCOPE_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        read(&run.out(&format!("{out}/candidates.jsonl")))
    };
    assert_eq!(go("a", "9"), go("b", "9"));
    assert_ne!(go("a", "9"), go("c", "10"));
    let bad = Command::new(env!("CARGO_BIN_EXE_peakscope"))
        .args([
            "--out",
            run.out("d").to_str().unwrap(),
            "locate",
            "--config",
            cfg.to_str().unwrap(),
        ])
        .env("PEAKSCOPE_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn check_passes_solver_output_and_fails_perturbed_profiles() {
    let run = Run::new(FLAT);
    let cfg = run.cfg();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(
        code(&run.exec("s", &["solve", "--config", cfg, "--at", "0,0,0"])),
        0
    );
    let profile = run.out("s/profile.csv");
    let o = run.exec(
        "c",
        &[
            "check",
            "--config",
            cfg,
            "--profile",
            profile.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&read(&run.out("c/check.json"))).unwrap();
    assert_eq!(report["verdict"], "pass");

    // Bump w by 1% near the origin.
    let text = read(&profile);
    let mut bent = String::from("r,w,w_prime\n");
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let w = v[1] * (1.0 + 0.01 * (-v[0] * v[0]).exp());
        bent.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", v[0], w, v[2]));
    }
    let bent_path = run.out("bent.csv");
    fs::write(&bent_path, bent).unwrap();
    let o = run.exec(
        "c2",
        &[
            "check",
            "--config",
            cfg,
            "--profile",
            bent_path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 3);
    let report: Value = serde_json::from_str(&read(&run.out("c2/check.json"))).unwrap();
    assert_eq!(report["verdict"], "fail");

    let mut zero = String::from("r,w,w_prime\n");
    for line in text.lines().skip(1) {
        zero.push_str(&format!("{},0,0\n", line.split(',').next().unwrap()));
    }
    let zero_path = run.out("zero.csv");
    fs::write(&zero_path, zero).unwrap();
    let o = run.exec(
        "c3",
        &[
            "check",
            "--config",
            cfg,
            "--profile",
            zero_path.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&read(&run.out("c3/check.json"))).unwrap();
    assert_eq!(report["verdict"], "trivial");

    let o = run.exec(
        "c4",
        &["check", "--config", cfg, "--profile", "/nonexistent.csv"],
    );
    assert_eq!(code(&o), 1);
}
