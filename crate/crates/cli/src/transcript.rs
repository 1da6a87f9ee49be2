//! Transcript CSV: `i,x,y,alpha,beta,a,b`, with empty fields for the
//! detection bits of labs that did not block.

use std::io::Read;

use anyhow::{bail, Context, Result};
use cekit_core::protocol::RoundRecord;

use crate::output::Sink;

pub const HEADER: [&str; 7] = ["i", "x", "y", "alpha", "beta", "a", "b"];

pub fn write(sink: &Sink, rounds: &[RoundRecord]) -> Result<()> {
    let bit = |v: Option<u8>| v.map(|b| b.to_string()).unwrap_or_default();
    sink.write_csv(
        &HEADER,
        rounds.iter().map(|r| {
            vec![
                r.i.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                bit(r.alpha),
                bit(r.beta),
                r.a.to_string(),
                r.b.to_string(),
            ]
        }),
    )
}

pub fn read(source: impl Read, what: &str) -> Result<Vec<RoundRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = rdr.headers().with_context(|| format!("reading {what}"))?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        bail!("{what}: expected header `{}`", HEADER.join(","));
    }
    let mut rounds = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {what}"))?;
        let ctx = || format!("{what}: bad record on data line {}", line + 1);
        let bit = |k: usize| -> Result<u8> {
            let v: u8 = rec[k].parse().with_context(ctx)?;
            if v > 1 {
                bail!("{}: field `{}` must be 0 or 1", ctx(), HEADER[k]);
            }
            Ok(v)
        };
        let opt = |k: usize| -> Result<Option<u8>> {
            if rec[k].is_empty() {
                Ok(None)
            } else {
                bit(k).map(Some)
            }
        };
        rounds.push(RoundRecord {
            i: rec[0].parse().with_context(ctx)?,
            x: bit(1)?,
            y: bit(2)?,
            alpha: opt(3)?,
            beta: opt(4)?,
            a: bit(5)?,
            b: bit(6)?,
        });
    }
    Ok(rounds)
}
