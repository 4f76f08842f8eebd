use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum HistogramError {
    #[error("score {0} lies outside [0, 1]")]
    OutOfRange(f64),
    #[error("bin count must be positive")]
    NoBins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Equal-width bins over [0, 1]; bin `i` is `[i/n, (i+1)/n)`, the last bin
/// also takes 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

pub fn histogram(scores: &[f64], bins: usize) -> Result<Histogram, HistogramError> {
    if bins == 0 {
        return Err(HistogramError::NoBins);
    }
    let edge = |i: usize| i as f64 / bins as f64;
    let mut counts = vec![0u64; bins];
    for &s in scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(HistogramError::OutOfRange(s));
        }
        let mut i = ((s * bins as f64).floor() as usize).min(bins - 1);
        // keep the index consistent with the printed edges
        if i > 0 && s < edge(i) {
            i -= 1;
        } else if i + 1 < bins && s >= edge(i + 1) {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok(Histogram {
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                low: edge(i),
                high: edge(i + 1),
                count,
            })
            .collect(),
    })
}

/// `round(10 * log10(count + 1))`.
pub fn bar_length(count: u64) -> usize {
    (10.0 * ((count + 1) as f64).log10()).round() as usize
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// One line per bin with a log-scaled bar.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.bins.iter().enumerate() {
            let close = if i + 1 == self.bins.len() { ']' } else { ')' };
            out.push_str(&format!(
                "[{:.2}, {:.2}{close} {:<width$} {}\n",
                b.low,
                b.high,
                "#".repeat(bar_length(b.count)),
                b.count,
                width = 30
            ));
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_low", "bin_high", "count"])?;
        for b in &self.bins {
            w.write_record([b.low.to_string(), b.high.to_string(), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
