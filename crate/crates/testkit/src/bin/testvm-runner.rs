//! Test command for repair runs: executes a suite on `testvm` against the classes in
//! `REPAIR_CLASSPATH_DIR` and writes `<test_id> <STATUS>` lines to `REPAIR_RESULT_FILE`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;

use bytefix_testkit::runner::{load_classes, parse_suite, run_test, trace_text, write_file};

#[derive(Parser)]
#[command(about = "Run a fixture test suite on the bundled interpreter")]
struct Args {
    /// Suite file: `<test_id> <class> <method>` per line.
    suite: PathBuf,
    /// Directory of compiled test classes.
    #[arg(long)]
    tests: PathBuf,
    /// Program classes; defaults to $REPAIR_CLASSPATH_DIR.
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Result file; defaults to $REPAIR_RESULT_FILE, else stdout.
    #[arg(long)]
    result: Option<PathBuf>,
    /// Write one coverage trace per test here.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 5_000_000)]
    step_limit: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("testvm-runner: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(args: Args) -> Result<(), String> {
    let classes = args
        .classes
        .or_else(|| std::env::var_os("REPAIR_CLASSPATH_DIR").map(PathBuf::from))
        .ok_or("no classes directory (set REPAIR_CLASSPATH_DIR or --classes)")?;
    let result = args.result.or_else(|| std::env::var_os("REPAIR_RESULT_FILE").map(PathBuf::from));
    let text = std::fs::read_to_string(&args.suite).map_err(|e| format!("{}: {e}", args.suite.display()))?;
    let suite = parse_suite(&text)?;
    let (set, traced) = load_classes(&classes, &args.tests)?;
    let (set, traced) = (Arc::new(set), Arc::new(traced));
    let mut out = String::new();
    for e in &suite {
        let r = run_test(set.clone(), traced.clone(), e, args.step_limit);
        if !r.detail.is_empty() {
            eprintln!("{} {}: {}", e.id, r.verdict.as_str(), r.detail);
        }
        let _ = writeln!(out, "{} {}", e.id, r.verdict.as_str());
        if let Some(d) = &args.trace_dir {
            write_file(&d.join(format!("{}.trace", e.id)), &trace_text(&e.id, &r))?;
        }
    }
    match result {
        Some(p) => write_file(&p, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}
