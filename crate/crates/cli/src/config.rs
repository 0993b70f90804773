//! Run configuration: a flat `key = value` file, with command-line overrides.
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlMode {
    Perfect,
    Spectrum,
}

impl FlMode {
    pub fn parse(s: &str) -> Option<FlMode> {
        match s.to_ascii_lowercase().as_str() {
            "perfect" => Some(FlMode::Perfect),
            "spectrum" => Some(FlMode::Spectrum),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FlMode::Perfect => "perfect",
            FlMode::Spectrum => "spectrum",
        }
    }
}

impl fmt::Display for FlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairConfig {
    pub classes_dir: PathBuf,
    /// Run with `sh -c` from `base_dir`.
    pub test_command: String,
    pub pov_tests: Vec<String>,
    pub fl_mode: FlMode,
    pub perfect_locations_file: Option<PathBuf>,
    pub traces_dir: Option<PathBuf>,
    pub budget: Duration,
    pub per_test_timeout: Duration,
    pub output_dir: PathBuf,
    pub max_donors: usize,
    pub subpatch_depth: usize,
    pub worker_slots: usize,
    /// Directory of the config file; relative paths resolve against it.
    pub base_dir: PathBuf,
}

pub const DEFAULT_BUDGET_SECS: f64 = 14400.0;
pub const DEFAULT_PER_TEST_SECS: f64 = 60.0;
pub const DEFAULT_MAX_DONORS: usize = 50;
pub const DEFAULT_SUBPATCH_DEPTH: usize = 3;
pub const DEFAULT_WORKER_SLOTS: usize = 1;

const KEYS: &[&str] = &[
    "classes_dir",
    "test_command",
    "pov_tests",
    "fl_mode",
    "perfect_locations_file",
    "traces_dir",
    "budget",
    "per_test_timeout",
    "output_dir",
    "max_donors",
    "subpatch_depth",
    "worker_slots",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl ConfigError {
    /// The offending key, or `config` when the file itself is the problem.
    pub fn key(&self) -> &str {
        match self {
            ConfigError::Invalid { key, .. } => key,
            ConfigError::Io { .. } => "config",
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

/// Values given on the command line; they replace the file's entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub fl_mode: Option<FlMode>,
    pub budget: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<RepairConfig, ConfigError> {
    load_config_with(path, &Overrides::default())
}

pub fn load_config_with(path: &Path, overrides: &Overrides) -> Result<RepairConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
    let base = fs::canonicalize(&base).unwrap_or(base);
    parse_config(&text, &base, overrides)
}

/// Splits the document into entries. Blank lines and lines starting with `#` are skipped.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(invalid(&format!("line {}", n + 1), "expected `key = value`"));
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(invalid(k, "unknown key"));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(invalid(k, "given more than once"));
        }
    }
    Ok(out)
}

pub fn parse_config(text: &str, base: &Path, overrides: &Overrides) -> Result<RepairConfig, ConfigError> {
    let mut e = parse_entries(text)?;
    if let Some(m) = overrides.fl_mode {
        e.insert("fl_mode".into(), m.as_str().into());
        // a mode switch on the command line drops the other mode's input
        e.remove(match m {
            FlMode::Perfect => "traces_dir",
            FlMode::Spectrum => "perfect_locations_file",
        });
    }
    if let Some(b) = overrides.budget {
        e.insert("budget".into(), b.to_string());
    }
    let resolve = |v: &str| {
        let p = PathBuf::from(v);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let required = |k: &str| -> Result<String, ConfigError> {
        match e.get(k) {
            Some(v) if !v.is_empty() => Ok(v.clone()),
            _ => Err(invalid(k, "required")),
        }
    };
    let fl_mode = {
        let v = required("fl_mode")?;
        FlMode::parse(&v).ok_or_else(|| invalid("fl_mode", format!("expected perfect or spectrum, got {v:?}")))?
    };
    let classes_dir = resolve(&required("classes_dir")?);
    let test_command = required("test_command")?;
    let pov_tests: Vec<String> =
        required("pov_tests")?.split([',', ' ', '\t']).filter(|s| !s.is_empty()).map(str::to_string).collect();
    if pov_tests.is_empty() {
        return Err(invalid("pov_tests", "required"));
    }
    let path_key = |k: &str| e.get(k).filter(|v| !v.is_empty()).map(|v| resolve(v));
    let perfect_locations_file = path_key("perfect_locations_file");
    let traces_dir = path_key("traces_dir");
    match fl_mode {
        FlMode::Perfect if perfect_locations_file.is_none() => {
            return Err(invalid("perfect_locations_file", "required when fl_mode = perfect"))
        }
        FlMode::Perfect if traces_dir.is_some() => {
            return Err(invalid("traces_dir", "only used when fl_mode = spectrum"))
        }
        FlMode::Spectrum if traces_dir.is_none() => return Err(invalid("traces_dir", "required when fl_mode = spectrum")),
        FlMode::Spectrum if perfect_locations_file.is_some() => {
            return Err(invalid("perfect_locations_file", "only used when fl_mode = perfect"))
        }
        _ => {}
    }
    let seconds = |k: &str, default: f64| -> Result<Duration, ConfigError> {
        let Some(v) = e.get(k) else { return Ok(Duration::from_secs_f64(default)) };
        let s: f64 = v.parse().map_err(|_| invalid(k, format!("expected seconds, got {v:?}")))?;
        if !s.is_finite() || s <= 0.0 || s > 1e9 {
            return Err(invalid(k, "must be a positive number of seconds"));
        }
        Ok(Duration::from_secs_f64(s))
    };
    let bounded = |k: &str, default: usize, max: usize| -> Result<usize, ConfigError> {
        let Some(v) = e.get(k) else { return Ok(default) };
        let n: usize = v.parse().map_err(|_| invalid(k, format!("expected an integer, got {v:?}")))?;
        if n == 0 || n > max {
            return Err(invalid(k, format!("must be between 1 and {max}")));
        }
        Ok(n)
    };
    let output_dir = match &overrides.output_dir {
        Some(p) => p.clone(),
        None => e.get("output_dir").filter(|v| !v.is_empty()).map(|v| resolve(v)).unwrap_or_else(|| base.join("repair-out")),
    };
    Ok(RepairConfig {
        classes_dir,
        test_command,
        pov_tests,
        fl_mode,
        perfect_locations_file,
        traces_dir,
        budget: seconds("budget", DEFAULT_BUDGET_SECS)?,
        per_test_timeout: seconds("per_test_timeout", DEFAULT_PER_TEST_SECS)?,
        output_dir,
        max_donors: bounded("max_donors", DEFAULT_MAX_DONORS, 10_000)?,
        subpatch_depth: bounded("subpatch_depth", DEFAULT_SUBPATCH_DEPTH, 16)?,
        worker_slots: bounded("worker_slots", DEFAULT_WORKER_SLOTS, 256)?,
        base_dir: base.to_path_buf(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "classes_dir = classes\ntest_command = ./run.sh\npov_tests = pov\nfl_mode = spectrum\ntraces_dir = traces\n";

    fn parse(text: &str) -> Result<RepairConfig, ConfigError> {
        parse_config(text, Path::new("/work"), &Overrides::default())
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.budget, Duration::from_secs(14400));
        assert_eq!(c.per_test_timeout, Duration::from_secs(60));
        assert_eq!((c.max_donors, c.subpatch_depth, c.worker_slots), (50, 3, 1));
        assert_eq!(c.classes_dir, PathBuf::from("/work/classes"));
        assert_eq!(c.output_dir, PathBuf::from("/work/repair-out"));
        assert_eq!(c.pov_tests, vec!["pov"]);
    }

    #[test]
    fn perfect_needs_locations() {
        let e = parse("classes_dir = c\ntest_command = t\npov_tests = p\nfl_mode = PERFECT\n").unwrap_err();
        assert_eq!(e.key(), "perfect_locations_file");
    }

    #[test]
    fn mode_files_are_exclusive() {
        let e = parse(&format!("{MINIMAL}perfect_locations_file = locs.txt\n")).unwrap_err();
        assert_eq!(e.key(), "perfect_locations_file");
    }

    #[test]
    fn zero_budget_rejected() {
        assert_eq!(parse(&format!("{MINIMAL}budget = 0\n")).unwrap_err().key(), "budget");
        assert_eq!(parse(&format!("{MINIMAL}per_test_timeout = -1\n")).unwrap_err().key(), "per_test_timeout");
    }

    #[test]
    fn bounds_and_unknown_keys() {
        assert_eq!(parse(&format!("{MINIMAL}worker_slots = 0\n")).unwrap_err().key(), "worker_slots");
        assert_eq!(parse(&format!("{MINIMAL}max_donors = many\n")).unwrap_err().key(), "max_donors");
        assert_eq!(parse(&format!("{MINIMAL}colour = red\n")).unwrap_err().key(), "colour");
        assert_eq!(parse(&format!("{MINIMAL}budget = 1\nbudget = 2\n")).unwrap_err().key(), "budget");
    }

    #[test]
    fn overrides_win() {
        let text = format!("{MINIMAL}budget = 100\n");
        let o = Overrides { fl_mode: Some(FlMode::Perfect), budget: Some(5.0), output_dir: Some("/tmp/o".into()) };
        let e = parse_config(&text, Path::new("/w"), &o).unwrap_err();
        assert_eq!(e.key(), "perfect_locations_file");
        let text = format!("{text}perfect_locations_file = l.txt\n").replace("traces_dir = traces\n", "");
        let o2 = Overrides { fl_mode: Some(FlMode::Spectrum), ..o.clone() };
        assert_eq!(parse_config(&text, Path::new("/w"), &o2).unwrap_err().key(), "traces_dir");
        let c = parse_config(&text, Path::new("/w"), &o).unwrap();
        assert_eq!(c.budget, Duration::from_secs(5));
        assert_eq!(c.output_dir, PathBuf::from("/tmp/o"));
        assert_eq!(c.traces_dir, None);
    }

    #[test]
    fn pov_list_separators() {
        let c = parse(&MINIMAL.replace("pov_tests = pov", "pov_tests = a, b c")).unwrap();
        assert_eq!(c.pov_tests, vec!["a", "b", "c"]);
    }
}
