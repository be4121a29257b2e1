//! Recording, trial and prediction files, and companion config documents.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chaos_bci::features::csv::format_decimal;
use chaos_bci::{Error, Label, TimeSeries};
use serde::Serialize;

/// Channels of a recording file, in header order.
pub struct Recording {
    pub names: Vec<String>,
    pub channels: Vec<Vec<f64>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_recording(path: &Path) -> Result<Recording> {
    let text = read(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty recording"))?;
    let names: Vec<String> = header.trim_end().split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(parse_err(1, "empty channel name in header").into());
    }
    let mut channels = vec![Vec::new(); names.len()];
    for (i, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(parse_err(i + 1, format!("expected {} fields, found {}", names.len(), fields.len())).into());
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|e| parse_err(i + 1, format!("value `{f}`: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(i + 1, format!("non-finite value `{f}`")).into());
            }
            channels[c].push(v);
        }
    }
    Ok(Recording { names, channels })
}

impl Recording {
    pub fn channel(&self, name: &str, rate: f64) -> Result<TimeSeries> {
        let Some(c) = self.names.iter().position(|n| n == name) else {
            bail!("channel `{name}` not found; recording has {:?}", self.names);
        };
        Ok(TimeSeries::new(self.channels[c].clone(), rate)?)
    }
}

pub fn write_recording(path: &Path, samples: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(24 * samples.len() + 8);
    s.push_str("value\n");
    for v in samples {
        s.push_str(&format_decimal(*v));
        s.push('\n');
    }
    write(path, &s)
}

pub const TRIALS_HEADER: &str = "trial_id,channel,onset_sample,offset_sample,label";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial_id: u64,
    pub channel: String,
    pub onset: usize,
    pub offset: usize,
    pub label: Label,
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRow>> {
    let text = read(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty trials file"))?;
    if header.trim_end() != TRIALS_HEADER {
        return Err(parse_err(1, format!("expected header `{TRIALS_HEADER}`")).into());
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let no = i + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(parse_err(no, format!("expected 5 fields, found {}", f.len())).into());
        }
        let int = |s: &str, what: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|e| parse_err(no, format!("{what} `{s}`: {e}")).into())
        };
        out.push(TrialRow {
            trial_id: int(f[0], "trial_id")?,
            channel: f[1].to_string(),
            onset: int(f[2], "onset_sample")? as usize,
            offset: int(f[3], "offset_sample")? as usize,
            label: f[4].parse().map_err(|e: Error| parse_err(no, e.to_string()))?,
        });
    }
    Ok(out)
}

pub const PREDICTIONS_HEADER: &str = "predicted,actual";

/// `predicted,actual` label pairs.
pub fn read_predictions(path: &Path) -> Result<(Vec<Label>, Vec<Label>)> {
    let text = read(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty predictions file"))?;
    if header.trim_end() != PREDICTIONS_HEADER {
        return Err(parse_err(1, format!("expected header `{PREDICTIONS_HEADER}`")).into());
    }
    let (mut p, mut a) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 2 {
            return Err(parse_err(i + 1, format!("expected 2 fields, found {}", f.len())).into());
        }
        let lab = |s: &str| s.parse::<Label>().map_err(|e| parse_err(i + 1, e.to_string()));
        p.push(lab(f[0])?);
        a.push(lab(f[1])?);
    }
    Ok((p, a))
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn companion_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Companion<'a, T> {
    command: &'a str,
    version: &'a str,
    config: &'a T,
}

/// Writes `<out>.config.json` holding the resolved command configuration.
pub fn write_companion<T: Serialize>(out: &Path, command: &str, config: &T) -> Result<()> {
    let doc = Companion {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
    };
    write(&companion_path(out), &(serde_json::to_string_pretty(&doc)? + "\n"))
}
