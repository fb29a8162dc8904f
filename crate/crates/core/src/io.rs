//! File formats: CSV writers with fixed headers and JSON helpers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::auction::BatchMetrics;
use crate::error::Result;
use crate::eval::SweepRow;
use crate::market::Dataset;
use crate::mechanism::Outcome;

pub const DATASET_HEADER: [&str; 5] = ["profile_id", "vsp_id", "valuation", "t_total_s", "t_req_s"];
pub const METRICS_HEADER: [&str; 5] = ["iter", "revenue", "ir_penalty", "ic_penalty", "loss"];
pub const SWEEP_HEADER: [&str; 5] = ["param", "mechanism", "revenue", "ir_penalty", "max_regret"];

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let parsed: f64 = s.parse().expect("formatted float parses");
    let exp = parsed.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, parsed);
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exponent}")
    }
}

fn sig(x: f64) -> String {
    fmt_sig(x, 9)
}

pub fn write_dataset_csv<W: Write>(out: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DATASET_HEADER)?;
    for (i, profile) in data.profiles.iter().enumerate() {
        for (n, &v) in profile.values.iter().enumerate() {
            let (t_total, t_req) = match data.draws.get(i).and_then(|row| row.get(n)) {
                Some(d) => (sig(d.t_total_s), sig(d.t_req_s)),
                None => (String::new(), String::new()),
            };
            w.write_record([i.to_string(), n.to_string(), sig(v), t_total, t_req])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(out: W, metrics: &[BatchMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for m in metrics {
        w.write_record([
            m.iter.to_string(),
            sig(m.revenue),
            sig(m.ir_penalty),
            sig(m.ic_penalty),
            sig(m.loss),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.param.clone(),
            r.mechanism.clone(),
            sig(r.revenue),
            sig(r.ir_penalty),
            sig(r.max_regret),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per bidder: `bidder,z_0..z_{M-1},payment`.
pub fn write_outcome_csv<W: Write>(out: W, outcome: &Outcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["bidder".to_string()];
    header.extend((0..outcome.n_units()).map(|m| format!("z_{m}")));
    header.push("payment".into());
    w.write_record(&header)?;
    for (n, row) in outcome.alloc.iter().enumerate() {
        let mut rec = vec![n.to_string()];
        rec.extend(row.iter().map(|&z| sig(z)));
        rec.push(sig(outcome.payments[n]));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `profile_id,vsp_id,valuation,...` back into per-profile value rows.
pub fn read_dataset_values<R: std::io::Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| crate::Error::Config(format!("bad dataset field {k} in {rec:?}")))
        };
        let id = parse(0)? as usize;
        if id == rows.len() {
            rows.push(Vec::new());
        }
        rows.last_mut()
            .ok_or_else(|| crate::Error::Config("dataset rows out of order".into()))?
            .push(parse(2)?);
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(r)?)
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
