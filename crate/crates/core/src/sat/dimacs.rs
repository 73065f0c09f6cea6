use std::fmt::Write as _;

use super::solver::Lit;
use super::SatError;

pub fn write_dimacs(num_vars: usize, clauses: &[Vec<Lit>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p cnf {} {}", num_vars, clauses.len());
    for c in clauses {
        for l in c {
            let _ = write!(s, "{} ", l.to_dimacs());
        }
        s.push_str("0\n");
    }
    s
}

/// Parses DIMACS CNF into (variable count, clauses).
pub fn parse_dimacs(text: &str) -> Result<(usize, Vec<Vec<Lit>>), SatError> {
    let mut nvars = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(SatError::Dimacs(i + 1, "bad header".into()));
            }
            nvars = Some(
                parts[2]
                    .parse()
                    .map_err(|_| SatError::Dimacs(i + 1, "bad variable count".into()))?,
            );
            continue;
        }
        let n = nvars.ok_or_else(|| SatError::Dimacs(i + 1, "clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| SatError::Dimacs(i + 1, format!("bad literal `{tok}`")))?;
            if x == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                if x.unsigned_abs() as usize > n {
                    return Err(SatError::Dimacs(i + 1, format!("variable {x} out of range")));
                }
                cur.push(Lit::from_dimacs(x));
            }
        }
    }
    if !cur.is_empty() {
        clauses.push(cur);
    }
    Ok((nvars.unwrap_or(0), clauses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let text = "c demo\np cnf 3 2\n1 -2 0\n2 3 -1 0\n";
        let (n, cl) = parse_dimacs(text).unwrap();
        assert_eq!(n, 3);
        assert_eq!(cl.len(), 2);
        let again = parse_dimacs(&write_dimacs(n, &cl)).unwrap();
        assert_eq!(again, (n, cl));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
    }
}
