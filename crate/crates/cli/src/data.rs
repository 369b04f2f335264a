//! Benchmark data ingestion: two-column CSV of `p,throughput`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use uslkit::fitting::ThroughputSample;

/// Parsed input file: one averaged sample per distinct `p`, plus notices
/// about anything the reader had to do on the way in.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub samples: Vec<ThroughputSample>,
    pub rows_read: usize,
    pub notices: Vec<String>,
}

pub fn read_data_file(path: &Path) -> Result<DataFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_data(&text)
}

/// Parse CSV text. The first line may be a header (detected by failing to
/// parse as numbers); every later row must be numeric. Repeated `p` values
/// are averaged with a notice.
pub fn parse_data(text: &str) -> Result<DataFile> {
    let mut rows: Vec<(u32, f64)> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();

    if let Some(&(_, first)) = lines.peek() {
        if !first.trim().is_empty() && parse_row(first).is_err() {
            // Header line; consume it.
            lines.next();
        }
    }
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (p, x) = parse_row(line).map_err(|e| anyhow!("line {}: {e}", idx + 1))?;
        rows.push((p, x));
    }
    if rows.is_empty() {
        bail!("no data rows found");
    }

    let mut notices = Vec::new();
    let mut samples: Vec<ThroughputSample> = Vec::new();
    let mut order: Vec<u32> = Vec::new();
    let mut sums: Vec<(f64, u32)> = Vec::new();
    for (p, x) in &rows {
        match order.iter().position(|q| q == p) {
            Some(i) => {
                sums[i].0 += x;
                sums[i].1 += 1;
            }
            None => {
                order.push(*p);
                sums.push((*x, 1));
            }
        }
    }
    for (p, (sum, count)) in order.iter().zip(&sums) {
        if *count > 1 {
            notices.push(format!("averaged {count} rows for p = {p}"));
        }
        samples.push(ThroughputSample::new(*p, sum / f64::from(*count))?);
    }
    samples.sort_by_key(|s| s.p);

    Ok(DataFile {
        samples,
        rows_read: rows.len(),
        notices,
    })
}

fn parse_row(line: &str) -> Result<(u32, f64)> {
    let mut parts = line.split(',');
    let p_text = parts.next().unwrap_or("").trim();
    let x_text = parts
        .next()
        .ok_or_else(|| anyhow!("expected `p,throughput`"))?
        .trim();
    if parts.next().is_some() {
        bail!("expected exactly two columns");
    }
    let p: u32 = p_text
        .parse()
        .map_err(|_| anyhow!("invalid processor count '{p_text}'"))?;
    if p < 1 {
        bail!("processor count must be at least 1, got {p}");
    }
    let x: f64 = x_text
        .parse()
        .map_err(|_| anyhow!("invalid throughput '{x_text}'"))?;
    if !x.is_finite() || x <= 0.0 {
        bail!("throughput must be positive, got {x}");
    }
    Ok((p, x))
}
