//! Plain-text fixture format for instances and power profiles.
//!
//! ```text
//! # comments and blank lines are ignored
//! num_users = 3
//! target_rate = 4
//! gamma
//! 12000
//! 830.5 9100
//! 410.25 77.5 5000
//! ```
//!
//! Header lines are `key = value`. A bare `gamma` (instances) or `power`
//! (profiles) line opens the matrix block, which holds the lower triangle in
//! row-major order: row `m` (user) lists its `m + 1` slot entries. Numbers are
//! written in shortest round-trip form, so write-then-parse is bit exact.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{PowerProfile, SystemInstance};
use crate::tri::TriMatrix;

pub fn write_instance(inst: &SystemInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "num_users = {}", inst.num_users());
    let _ = writeln!(out, "target_rate = {}", inst.target_rate());
    out.push_str("gamma\n");
    write_matrix(&mut out, inst.gains());
    out
}

pub fn write_profile(p: &PowerProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "num_users = {}", p.num_users());
    out.push_str("power\n");
    write_matrix(&mut out, p.matrix());
    out
}

fn write_matrix(out: &mut String, t: &TriMatrix) {
    for m in 0..t.dim() {
        let row: Vec<String> = t.row(m).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

struct Parsed {
    num_users: Option<usize>,
    target_rate: Option<f64>,
    matrix: Option<TriMatrix>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_document(text: &str, block: &str, rate_allowed: bool) -> Result<Parsed> {
    let mut parsed = Parsed {
        num_users: None,
        target_rate: None,
        matrix: None,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    while let Some((lineno, line)) = lines.next() {
        if line == block {
            let n = parsed
                .num_users
                .ok_or_else(|| parse_err(lineno, "num_users must precede the matrix block"))?;
            let mut data = Vec::with_capacity(n * (n + 1) / 2);
            for m in 0..n {
                let (rowno, row) = lines
                    .next()
                    .ok_or_else(|| parse_err(lineno, format!("missing matrix row {m}")))?;
                let values = row
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .map_err(|e| parse_err(rowno, format!("bad number {tok:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if values.len() != m + 1 {
                    return Err(parse_err(
                        rowno,
                        format!("row {m} needs {} entries, found {}", m + 1, values.len()),
                    ));
                }
                data.extend(values);
            }
            parsed.matrix = TriMatrix::from_packed(n, data);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(lineno, format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "num_users" => {
                let n = value
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("num_users: {e}")))?;
                parsed.num_users = Some(n);
            }
            "target_rate" if rate_allowed => {
                let r = value
                    .parse::<f64>()
                    .map_err(|e| parse_err(lineno, format!("target_rate: {e}")))?;
                parsed.target_rate = Some(r);
            }
            other => return Err(parse_err(lineno, format!("unknown key {other:?}"))),
        }
    }
    Ok(parsed)
}

pub fn parse_instance(text: &str) -> Result<SystemInstance> {
    let parsed = parse_document(text, "gamma", true)?;
    let rate = parsed.target_rate.ok_or_else(|| parse_err(0, "missing target_rate"))?;
    let gamma = parsed.matrix.ok_or_else(|| parse_err(0, "missing gamma block"))?;
    SystemInstance::new(gamma, rate)
}

pub fn parse_profile(text: &str) -> Result<PowerProfile> {
    let parsed = parse_document(text, "power", false)?;
    let p = parsed.matrix.ok_or_else(|| parse_err(0, "missing power block"))?;
    PowerProfile::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = "# fixture\nnum_users = 3\ntarget_rate = 4\n\ngamma\n12000\n830.5 9100\n410.25 77.5 5000\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.num_users(), 3);
        assert_eq!(inst.target_rate(), 4.0);
        assert_eq!(inst.gamma(2, 1), 77.5);
        assert_eq!(inst.gamma(1, 1), 9100.0);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "num_users = 2\ntarget_rate = 1\ngamma\n1\n2\n";
        match parse_instance(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_instance("gamma\n1\n").is_err());
        assert!(parse_instance("num_users = 1\nbogus = 2\n").is_err());
        assert!(parse_profile("num_users = 1\ntarget_rate = 1\npower\n1\n").is_err());
    }

    #[test]
    fn profile_round_trip() {
        let p = PowerProfile::new(TriMatrix::from_fn(3, |m, i| 0.1 * (m + 2 * i) as f64)).unwrap();
        assert_eq!(parse_profile(&write_profile(&p)).unwrap(), p);
    }
}
