use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use super::TrialRecord;
use crate::error::{Error, Result};
use crate::training::Scheme;

pub const CSV_HEADER: &str = "scheme,snr_db,trial,seed,pe_m2,oe_rad2,rate_bits,slots";

const AGGREGATE_HEADER: &str =
    "scheme,snr_db,trials,mean_pe_m2,median_pe_m2,mean_oe_rad2,median_oe_rad2,mean_rate_bits,median_rate_bits";

/// `%.10g`: 10 significant digits, trailing zeros dropped, exponent form
/// outside `1e-5 ..< 1e10`.
pub fn format_number(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn record_line(r: &TrialRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        r.scheme.name(),
        format_number(r.snr_db),
        r.trial,
        r.seed,
        format_number(r.pe),
        format_number(r.oe),
        format_number(r.rate),
        r.slots
    )
}

/// Writes records to any sink, header first, LF line endings.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        out.write_all(record_line(r).as_bytes())?;
    }
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(records, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Parses a results CSV written by [`write_csv`].
pub fn read_records<R: BufRead>(input: R, source: &str) -> Result<Vec<TrialRecord>> {
    let err = |line: usize, message: String| Error::Config {
        path: source.into(),
        line,
        message,
    };
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != CSV_HEADER {
                return Err(err(lineno, format!("expected header `{CSV_HEADER}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 8 {
            return Err(err(lineno, format!("expected 8 fields, found {}", fields.len())));
        }
        let bad = |name: &str| err(lineno, format!("invalid {name} `{}`", line.trim()));
        records.push(TrialRecord {
            scheme: fields[0].parse().map_err(|_| bad("scheme"))?,
            snr_db: fields[1].parse().map_err(|_| bad("snr_db"))?,
            trial: fields[2].parse().map_err(|_| bad("trial"))?,
            seed: fields[3].parse().map_err(|_| bad("seed"))?,
            pe: fields[4].parse().map_err(|_| bad("pe_m2"))?,
            oe: fields[5].parse().map_err(|_| bad("oe_rad2"))?,
            rate: fields[6].parse().map_err(|_| bad("rate_bits"))?,
            slots: fields[7].parse().map_err(|_| bad("slots"))?,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: usize,
    pub mean_pe: f64,
    pub median_pe: f64,
    pub mean_oe: f64,
    pub median_oe: f64,
    pub mean_rate: f64,
    pub median_rate: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Mean and median per (scheme, SNR), in canonical order.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(Scheme, i64), (f64, Vec<&TrialRecord>)> = BTreeMap::new();
    for r in records {
        // Order by the SNR's bit pattern mapped to a total order.
        let key = r.snr_db.to_bits() as i64;
        let key = key ^ (((key >> 63) as u64) >> 1) as i64;
        groups
            .entry((r.scheme, key))
            .or_insert_with(|| (r.snr_db, Vec::new()))
            .1
            .push(r);
    }
    groups
        .into_iter()
        .map(|((scheme, _), (snr_db, rows))| {
            let pe: Vec<f64> = rows.iter().map(|r| r.pe).collect();
            let oe: Vec<f64> = rows.iter().map(|r| r.oe).collect();
            let rate: Vec<f64> = rows.iter().map(|r| r.rate).collect();
            AggregateRow {
                scheme,
                snr_db,
                trials: rows.len(),
                mean_pe: mean(&pe),
                median_pe: median(&pe),
                mean_oe: mean(&oe),
                median_oe: median(&oe),
                mean_rate: mean(&rate),
                median_rate: median(&rate),
            }
        })
        .collect()
}

pub fn write_aggregate<W: Write>(rows: &[AggregateRow], out: &mut W) -> Result<()> {
    writeln!(out, "{AGGREGATE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme.name(),
            format_number(r.snr_db),
            r.trials,
            format_number(r.mean_pe),
            format_number(r.median_pe),
            format_number(r.mean_oe),
            format_number(r.median_oe),
            format_number(r.mean_rate),
            format_number(r.median_rate)
        )?;
    }
    Ok(())
}
