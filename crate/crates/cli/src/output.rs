//! Output sinks and number formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// `%.12g`: 12 significant digits, trailing zeros trimmed, scientific
/// notation outside `[1e-5, 1e12)`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Destination named by `--out`; `None` or `-` is stdout.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Self {
        Self { path: path.filter(|p| p.as_os_str() != "-").map(Path::to_path_buf) }
    }

    fn describe(&self) -> String {
        self.path.as_ref().map_or_else(|| "<stdout>".into(), |p| p.display().to_string())
    }

    pub fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => {
                Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// Writes a header and rows of already formatted fields.
    pub fn write_csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let ctx = || format!("writing {}", self.describe());
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(self.open()?);
        w.write_record(header).with_context(ctx)?;
        for r in rows {
            w.write_record(&r).with_context(ctx)?;
        }
        w.flush().with_context(ctx)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, value: &T) -> Result<()> {
        let ctx = || format!("writing {}", self.describe());
        let mut w = self.open()?;
        serde_json::to_writer_pretty(&mut w, value).with_context(ctx)?;
        writeln!(w).with_context(ctx)?;
        w.flush().with_context(ctx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.625), "0.625");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(2.0f64.sqrt()), "1.41421356237");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(-0.974512345678912), "-0.974512345679");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(1e-7), "1e-07");
        assert_eq!(fmt_sig(2.5e-6), "2.5e-06");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(1e15), "1e+15");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.99999999999999), "1");
    }
}
