//! Plain (`P1`) portable bitmaps: one text row per lattice row, `1` = black = high.

use std::io::{self, Write};

use donation_ca_core::{Reputation, SpaceTime};

use crate::error::CliError;

pub fn write_pbm<W: Write>(mut out: W, matrix: &SpaceTime) -> io::Result<()> {
    writeln!(out, "P1")?;
    writeln!(out, "{} {}", matrix.width(), matrix.height())?;
    let mut line = Vec::with_capacity(matrix.width() + 1);
    for row in matrix.rows().take(matrix.height()) {
        line.clear();
        line.extend(row.iter().map(|s| if s.is_high() { b'1' } else { b'0' }));
        line.push(b'\n');
        out.write_all(&line)?;
    }
    Ok(())
}

pub fn to_pbm_string(matrix: &SpaceTime) -> String {
    let mut buf = Vec::new();
    write_pbm(&mut buf, matrix).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("PBM output is ASCII")
}

/// Parses any plain PBM: comments, arbitrary whitespace and packed or
/// space-separated pixels are accepted.
pub fn parse_pbm(text: &str) -> Result<SpaceTime, CliError> {
    let bad = |msg: &str| CliError::config(format!("malformed PBM: {msg}"));
    let cleaned: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let mut tokens = cleaned.split_whitespace();
    if tokens.next() != Some("P1") {
        return Err(bad("missing P1 magic"));
    }
    let mut dim = || -> Result<usize, CliError> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad dimensions"))
    };
    let width = dim()?;
    let height = dim()?;
    let pixels: Vec<Reputation> = tokens
        .flat_map(str::chars)
        .map(|c| match c {
            '0' => Ok(Reputation::Low),
            '1' => Ok(Reputation::High),
            _ => Err(bad("unexpected pixel character")),
        })
        .collect::<Result<_, _>>()?;
    if pixels.len() != width * height {
        return Err(bad("pixel count does not match dimensions"));
    }
    let rows = pixels.chunks(width.max(1)).take(height);
    Ok(SpaceTime::from_rows(width, rows)?)
}
