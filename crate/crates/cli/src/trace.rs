//! `trace.csv` writing and parsing.

use std::fmt::Write as _;
use std::path::Path;

use proxlp::proxlp::{OuterRecord, Phase};

use crate::error::{io_err, CliError, Result};

pub const HEADER: &str = "phase,k,t,wall_ms,lp_energy,ip_energy,active_labels,uncertain_pixels";

/// Renders the outer records. Floats use shortest round-trip formatting;
/// `timing = false` writes every `wall_ms` as 0.
pub fn render(records: &[OuterRecord], timing: bool) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in records {
        let wall = if timing {
            format!("{:.3}", r.wall_ms)
        } else {
            "0".into()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.phase, r.k, r.t, wall, r.lp_energy, r.ip_energy, r.active_labels, r.uncertain_pixels
        )
        .unwrap();
    }
    out
}

pub fn parse(text: &str) -> std::result::Result<Vec<OuterRecord>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err("missing trace header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || format!("line {}: malformed record", i + 2);
            if f.len() != 8 {
                return Err(bad());
            }
            Ok(OuterRecord {
                phase: Phase::parse(f[0]).ok_or_else(bad)?,
                k: f[1].parse().map_err(|_| bad())?,
                t: f[2].parse().map_err(|_| bad())?,
                wall_ms: f[3].parse().map_err(|_| bad())?,
                lp_energy: f[4].parse().map_err(|_| bad())?,
                ip_energy: f[5].parse().map_err(|_| bad())?,
                active_labels: f[6].parse().map_err(|_| bad())?,
                uncertain_pixels: f[7].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn read(path: &Path) -> Result<Vec<OuterRecord>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse(&text).map_err(|msg| CliError::Format {
        path: path.to_path_buf(),
        offset: 0,
        msg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let recs = vec![
            OuterRecord {
                phase: Phase::Init,
                k: 0,
                t: 0,
                wall_ms: 0.125,
                lp_energy: 12345.678901234567,
                ip_energy: 1.0 / 3.0,
                active_labels: 4,
                uncertain_pixels: 4096,
            },
            OuterRecord {
                phase: Phase::Prox,
                k: 1,
                t: 5,
                wall_ms: 17.5,
                lp_energy: -2.5e-17,
                ip_energy: 9.87654321e8,
                active_labels: 3,
                uncertain_pixels: 0,
            },
        ];
        assert_eq!(parse(&render(&recs, true)).unwrap(), recs);
        let untimed = parse(&render(&recs, false)).unwrap();
        assert!(untimed.iter().all(|r| r.wall_ms == 0.0));
        assert!(parse("phase\n").is_err());
        assert!(parse(&format!("{HEADER}\nprox,1,2\n")).is_err());
    }
}
