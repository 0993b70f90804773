//! End-to-end runs of the `repair` binary against scripted runners.
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const REPAIR: &str = env!("CARGO_BIN_EXE_repair");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../testkit/fixtures/repair").join(name).join("classes")
}

struct Setup {
    dir: tempfile::TempDir,
}

impl Setup {
    /// A config in a fresh directory; `script` becomes `runner.sh` next to it.
    fn new(classes: &Path, script: &str, extra: &str) -> Setup {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("runner.sh"), script).unwrap();
        fs::write(dir.path().join("locations.txt"), "app/Arrays2:5\napp/Arrays2:6\n").unwrap();
        let conf = format!(
            "# scripted runner\nclasses_dir = {}\ntest_command = REPAIR={REPAIR} sh runner.sh\npov_tests = pov\n\
             fl_mode = perfect\nperfect_locations_file = locations.txt\nper_test_timeout = 10\n{extra}",
            classes.display()
        );
        fs::write(dir.path().join("repair.conf"), conf).unwrap();
        Setup { dir }
    }

    fn config(&self) -> PathBuf {
        self.dir.path().join("repair.conf")
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("repair-out")
    }

    fn run(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(REPAIR);
        cmd.arg("run").arg("--config").arg(self.config()).args(args).env("RUST_LOG", "warn");
        cmd.output().unwrap()
    }

    fn report(&self) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out().join("report.json")).unwrap()).unwrap()
    }
}

// passes pov only when the bounds test became `i < xs.length`
const OPERATOR_ORACLE: &str = r#"
dump=$("$REPAIR" inspect "$REPAIR_CLASSPATH_DIR/app/Arrays2.class") || exit 1
{
  echo "inside PASS"
  if echo "$dump" | grep -q if_icmpgt; then echo "pov FAIL"
  elif echo "$dump" | grep -q if_icmpge; then echo "pov PASS"
  else echo "pov FAIL"; fi
} > "$REPAIR_RESULT_FILE"
"#;

// any change at all fixes pov
const ANY_CHANGE: &str = r#"
if cmp -s "$REPAIR_CLASSPATH_DIR/app/Arrays2.class" "$ORIG"; then s=FAIL; else s=PASS; fi
printf 'inside PASS\npov %s\n' "$s" > "$REPAIR_RESULT_FILE"
"#;

#[test]
fn operator_swap_is_found() {
    let s = Setup::new(&fixture("f10-boundary"), OPERATOR_ORACLE, "");
    let out = s.run(&[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = s.report();
    assert_eq!(r["schema"], 1);
    assert_eq!(r["status"], "completed");
    assert_eq!(r["fl_mode"], "perfect");
    let patches = r["patches"].as_array().unwrap();
    assert_eq!(patches.len(), 1);
    assert_eq!(patches[0]["templates"], serde_json::json!(["T10.1"]));
    assert_eq!(patches[0]["rank"], 1);
    let class = s.out().join("patch-1/app/Arrays2.class");
    let dump = Command::new(REPAIR).arg("inspect").arg(&class).output().unwrap();
    assert!(String::from_utf8_lossy(&dump.stdout).contains("if_icmpge"));
    assert!(r["candidates_validated"].as_u64().unwrap() > 1);
}

#[test]
fn patches_in_rank_order_and_rerun_is_identical() {
    let orig = fixture("f10-boundary").join("app/Arrays2.class");
    let script = format!("ORIG={}\n{ANY_CHANGE}", orig.display());
    let s = Setup::new(&fixture("f10-boundary"), &script, "worker_slots = 3\n");
    assert_eq!(s.run(&[]).status.code(), Some(0));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let first = strip(s.report());
    let patches = first["patches"].as_array().unwrap();
    assert!(patches.len() > 2);
    assert_eq!(patches.len() as u64, first["candidates_validated"].as_u64().unwrap());
    let key = |p: &Value| {
        (p["locations"].as_array().unwrap().len(), p["instruction_delta"].as_u64().unwrap(), -p["max_score"].as_f64().unwrap(), p["id"].as_u64().unwrap())
    };
    for (i, w) in patches.windows(2).enumerate() {
        assert!(key(&w[0]) < key(&w[1]), "{i}");
        assert_eq!(w[0]["rank"].as_u64().unwrap() as usize, i + 1);
    }
    for p in patches {
        assert!(s.out().join(p["dir"].as_str().unwrap()).join("app/Arrays2.class").is_file());
    }
    assert_eq!(s.run(&[]).status.code(), Some(0));
    assert_eq!(strip(s.report()), first);
}

#[test]
fn unrepairable_exits_2_with_statistics() {
    let s = Setup::new(&fixture("f10-boundary"), "printf 'inside PASS\\npov FAIL\\n' > \"$REPAIR_RESULT_FILE\"\n", "");
    assert_eq!(s.run(&[]).status.code(), Some(2));
    let r = s.report();
    assert_eq!(r["patches"], serde_json::json!([]));
    assert!(r["attempted"]["incorrect"].as_u64().unwrap() > 0);
    assert!(!r["attempted"]["by_template"].as_object().unwrap().is_empty());
    assert_eq!(r["baseline"]["pov"], "FAIL");
}

#[test]
fn subpatch_only_run() {
    // pov1 is fixed by any change, pov2 never; composition turned off
    let orig = fixture("f10-boundary").join("app/Arrays2.class");
    let script = format!(
        "if cmp -s \"$REPAIR_CLASSPATH_DIR/app/Arrays2.class\" {}; then s=FAIL; else s=PASS; fi\n\
         printf 'inside PASS\\npov %s\\npov2 FAIL\\n' \"$s\" > \"$REPAIR_RESULT_FILE\"\n",
        orig.display()
    );
    let s = Setup::new(&fixture("f10-boundary"), &script, "subpatch_depth = 1\n");
    assert_eq!(s.run(&[]).status.code(), Some(2));
    let r = s.report();
    assert_eq!(r["patches"], serde_json::json!([]));
    let subs = r["subpatches"].as_array().unwrap();
    assert!(!subs.is_empty());
    assert_eq!(subs[0]["fixed_tests"], serde_json::json!(["pov"]));
    assert_eq!(subs[0]["still_failing"], serde_json::json!(["pov2"]));
    assert!(s.out().join(subs[0]["dir"].as_str().unwrap()).join("app/Arrays2.class").is_file());
}

#[test]
fn budget_abort_is_reported() {
    let s = Setup::new(&fixture("f10-boundary"), "sleep 1\nprintf 'inside PASS\\npov FAIL\\n' > \"$REPAIR_RESULT_FILE\"\n", "");
    let out = s.run(&["--budget", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    let r = s.report();
    assert_eq!(r["status"], "budget_exhausted");
    assert!(r["candidates_validated"].as_u64().unwrap() <= 2);
}

#[test]
fn configuration_errors_exit_3() {
    let s = Setup::new(&fixture("f10-boundary"), "", "budget = 0\n");
    let out = s.run(&[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    // --fl spectrum without traces names the missing key
    let s = Setup::new(&fixture("f10-boundary"), "", "");
    let out = s.run(&["--fl", "spectrum"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("traces_dir"));
}

#[test]
fn nothing_failing_is_an_environment_error() {
    let s = Setup::new(&fixture("f10-boundary"), "printf 'inside PASS\\npov PASS\\n' > \"$REPAIR_RESULT_FILE\"\n", "");
    assert_eq!(s.run(&[]).status.code(), Some(3));
    assert_eq!(s.report()["status"], "error");
}

#[test]
fn out_flag_redirects_output() {
    let s = Setup::new(&fixture("f10-boundary"), OPERATOR_ORACLE, "");
    let elsewhere = s.dir.path().join("elsewhere");
    assert_eq!(s.run(&["--out", elsewhere.to_str().unwrap()]).status.code(), Some(0));
    assert!(elsewhere.join("report.json").is_file());
    assert!(elsewhere.join("patch-1/app/Arrays2.class").is_file());
    assert!(!s.out().exists());
}

#[test]
fn inspect_and_fl_commands() {
    let out = Command::new(REPAIR).arg("inspect").arg(fixture("f10-boundary").join("app/Arrays2.class")).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("class app/Arrays2 version 50.0"));
    assert!(text.contains("method get([II)I"));
    assert!(text.contains("line 5") && text.contains("if_icmpgt"));
    assert!(text.contains("lines "));

    let s = Setup::new(&fixture("f10-boundary"), "", "");
    let out = Command::new(REPAIR).arg("fl").arg("--config").arg(s.config()).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1.000000\tapp/Arrays2:5\n1.000000\tapp/Arrays2:6\n");

    let bad = Command::new(REPAIR).arg("inspect").arg(s.config()).output().unwrap();
    assert_eq!(bad.status.code(), Some(3));
}
