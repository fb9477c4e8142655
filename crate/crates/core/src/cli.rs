//! Configuration ingestion and CSV emission behind the `ccbeam` binary.
//!
//! Configs are JSON objects whose keys mirror [`SimConfig`]; missing keys fall
//! back to a base config, and flag overrides (dotted keys such as
//! `ga.iterations`) win over the file. Output files start with `#` comment
//! lines holding the seed, a SHA-256 of the resolved config, and the config
//! itself, so every file carries what is needed to regenerate it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::orchestrator::{convergence_trace, sweep, SimConfig, SweepRow};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header of the sweep CSV.
pub const SWEEP_HEADER: &str = "power_db,scheme,method,beta_star,stp,throughput_npcu,realizations,seed";
/// Header of the convergence CSV.
pub const CONVERGE_HEADER: &str = "realization_id,iteration,min_sinr_db";

/// Flag overrides keyed by (dotted) config key. Values are JSON text; anything
/// that does not parse as JSON is taken as a string.
pub type Overrides = BTreeMap<String, String>;

/// Reads a config file on top of the reference defaults, then applies `overrides`.
pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<SimConfig> {
    parse_config_with_base(SimConfig::default(), Some(path), overrides)
}

/// Like [`parse_config`] but with an explicit base and an optional file.
pub fn parse_config_with_base(base: SimConfig, path: Option<&Path>, overrides: &Overrides) -> Result<SimConfig> {
    let mut value = serde_json::to_value(&base).expect("SimConfig always serializes");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        if !text.trim().is_empty() {
            let file: Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("malformed config file {}: {e}", path.display())))?;
            if !file.is_object() {
                return Err(Error::InvalidConfig(format!(
                    "config file {} must hold a JSON object",
                    path.display()
                )));
            }
            merge(&mut value, file);
        }
    }
    for (key, raw) in overrides {
        let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        set_path(&mut value, key, parsed)?;
    }
    let config: SimConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let key = e.path().to_string();
        Error::key(key, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            for (k, v) in patch {
                match base.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        base.insert(k, v);
                    }
                }
            }
        }
        (base, patch) => *base = patch,
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::key(key, "empty component in override key"));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::key(key, "override targets a non-object value"))?;
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Serializes a config in the format [`parse_config`] reads.
pub fn write_config(config: &SimConfig) -> String {
    serde_json::to_string_pretty(config).expect("SimConfig always serializes")
}

/// SHA-256 of the compact JSON form of `config`, hex encoded.
pub fn config_hash(config: &SimConfig) -> String {
    let json = serde_json::to_string(config).expect("SimConfig always serializes");
    Sha256::digest(json.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Parses `start:step:stop` (inclusive) or a single number into a power list.
pub fn parse_power_range(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::key("powers_db", format!("`{spec}`: {msg}"));
    let nums = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
        .collect::<Result<Vec<_>>>()?;
    match nums[..] {
        [single] if single.is_finite() => Ok(vec![single]),
        [start, step, stop] => {
            if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) {
                return Err(bad("step must be positive and bounds finite"));
            }
            if stop < start {
                return Err(bad("stop must not be below start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(bad("expected start:step:stop or a single value")),
    }
}

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num(x: f64) -> String {
    format_sig(x, 6)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Converge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Converge => "converge",
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: SimConfig,
    pub command: Command,
    pub output: PathBuf,
    /// Seconds since the Unix epoch when the manifest was built. Not written
    /// to output files, which must not depend on when they were produced.
    pub timestamp: u64,
    pub version: String,
    /// Number of traces for `converge`.
    pub trace_examples: usize,
}

impl RunManifest {
    pub fn new(command: Command, config: SimConfig, output: impl Into<PathBuf>) -> Self {
        RunManifest {
            config,
            command,
            output: output.into(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            version: VERSION.to_string(),
            trace_examples: 10,
        }
    }

    fn preamble(&self) -> String {
        let c = &self.config;
        format!(
            "# ccbeam {} {}\n# seed={} config_sha256={}\n# config={}\n",
            self.version,
            self.command.name(),
            c.master_seed,
            config_hash(c),
            serde_json::to_string(c).expect("SimConfig always serializes"),
        )
    }
}

/// Renders sweep rows as CSV body lines (no header).
pub fn sweep_csv_rows(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.power_db),
            r.scheme,
            r.method.map(|m| m.name()).unwrap_or(""),
            r.beta_star.map(num).unwrap_or_default(),
            num(r.stp),
            num(r.throughput_npcu),
            r.realizations,
            r.master_seed,
        );
    }
    out
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs the power sweep and writes its CSV to `manifest.output`.
pub fn run_sweep(manifest: &RunManifest) -> Result<Vec<SweepRow>> {
    let rows = sweep(&manifest.config)?;
    let mut text = manifest.preamble();
    text.push_str(SWEEP_HEADER);
    text.push('\n');
    text.push_str(&sweep_csv_rows(&rows));
    write_output(&manifest.output, &text)?;
    Ok(rows)
}

/// Runs the GA convergence study at the single configured power and writes
/// its CSV to `manifest.output`.
pub fn run_converge(manifest: &RunManifest) -> Result<()> {
    let power = match manifest.config.powers_db[..] {
        [p] => p,
        _ => {
            return Err(Error::key(
                "powers_db",
                "converge needs exactly one power point",
            ))
        }
    };
    if manifest.trace_examples == 0 {
        return Err(Error::InvalidConfig("converge needs at least one example".into()));
    }
    let traces = convergence_trace(&manifest.config, power, manifest.trace_examples)?;
    let mut text = manifest.preamble();
    text.push_str(CONVERGE_HEADER);
    text.push('\n');
    for (id, trace) in traces.iter().enumerate() {
        for (it, v) in trace.values().iter().enumerate() {
            let _ = writeln!(text, "{id},{},{}", it + 1, num(*v));
        }
    }
    write_output(&manifest.output, &text)
}

/// Process exit code for a failed run: 1 for configuration, 2 for I/O.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_config() {
        1
    } else {
        2
    }
}
