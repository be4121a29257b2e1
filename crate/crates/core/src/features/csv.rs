//! Text formats: the feature table and histogram export.

use std::io::{BufRead, Write};

use super::extract::FeatureVector;
use super::matrix::Histogram;
use crate::error::{Error, Result};
use crate::label::Label;

pub const FEATURE_HEADER: &str = "trial_id,label,lle,mi,med,d2";
pub const HISTOGRAM_HEADER: &str = "bin_center,freq_pos,freq_neg";

/// Shortest decimal that reads back as the identical double, padded with
/// trailing zeros to at least nine significant digits.
pub fn format_decimal(v: f64) -> String {
    let mut s = format!("{v}");
    if !v.is_finite() {
        return s;
    }
    if !s.contains('.') {
        s.push('.');
    }
    let significant = s
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count();
    for _ in significant..9 {
        s.push('0');
    }
    s
}

pub fn write_features(mut w: impl Write, rows: &[FeatureVector]) -> std::io::Result<()> {
    writeln!(w, "{FEATURE_HEADER}")?;
    for f in rows {
        write!(w, "{},{}", f.trial_id, f.label)?;
        for v in f.values() {
            write!(w, ",{}", format_decimal(v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn io_err(line: usize, e: std::io::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Line numbers in errors are 1-based and count the header.
pub fn read_features(r: impl BufRead) -> Result<Vec<FeatureVector>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or(Error::Parse {
            line: 1,
            message: "empty feature file".into(),
        })?
        .map_err(|e| io_err(1, e))?;
    if header.trim_end() != FEATURE_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{FEATURE_HEADER}`, found `{header}`"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let no = i + 2;
        let line = line.map_err(|e| io_err(no, e))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: no, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let trial_id = fields[0]
            .parse::<u64>()
            .map_err(|e| bad(format!("trial_id `{}`: {e}", fields[0])))?;
        let label = fields[1].parse::<Label>().map_err(|e| bad(e.to_string()))?;
        let mut v = [0.0; 4];
        for k in 0..4 {
            v[k] = fields[k + 2]
                .parse::<f64>()
                .map_err(|e| bad(format!("value `{}`: {e}", fields[k + 2])))?;
            if !v[k].is_finite() {
                return Err(bad(format!("non-finite value `{}`", fields[k + 2])));
            }
        }
        out.push(FeatureVector::from_values(trial_id, label, v));
    }
    Ok(out)
}

pub fn write_histogram(mut w: impl Write, h: &Histogram) -> std::io::Result<()> {
    writeln!(w, "{HISTOGRAM_HEADER}")?;
    for (b, c) in h.centers.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            format_decimal(*c),
            format_decimal(h.freq[0][b]),
            format_decimal(h.freq[1][b])
        )?;
    }
    Ok(())
}
