use std::fmt::Write as _;

use super::{Circuit, CircuitBuilder, GateKind, NetlistError, Result};

fn syntax(line: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']' | '$' | '\\' | '/'))
}

fn paren_arg(rest: &str, line: usize) -> Result<&str> {
    let rest = rest.trim();
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| syntax(line, "expected `(name)`"))?
        .trim();
    if !valid_ident(inner) {
        return Err(syntax(line, format!("bad net name `{inner}`")));
    }
    Ok(inner)
}

/// Parses an ISCAS-style BENCH netlist.
pub fn parse_bench(text: &str) -> Result<Circuit> {
    parse_bench_named(text, "top")
}

pub fn parse_bench_named(text: &str, name: &str) -> Result<Circuit> {
    let mut b = CircuitBuilder::new(name);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        let upper = s.to_ascii_uppercase();
        if upper.starts_with("INPUT") && !s.contains('=') {
            b.add_input(paren_arg(&s[5..], line)?);
        } else if upper.starts_with("OUTPUT") && !s.contains('=') {
            b.add_output(paren_arg(&s[6..], line)?);
        } else if let Some((lhs, rhs)) = s.split_once('=') {
            let out = lhs.trim();
            if !valid_ident(out) {
                return Err(syntax(line, format!("bad net name `{out}`")));
            }
            let rhs = rhs.trim();
            let open = rhs
                .find('(')
                .ok_or_else(|| syntax(line, "expected `GATE(...)`"))?;
            if !rhs.ends_with(')') {
                return Err(syntax(line, "missing `)`"));
            }
            let kname = rhs[..open].trim();
            let kind = GateKind::from_name(kname)
                .ok_or_else(|| syntax(line, format!("unknown gate type `{kname}`")))?;
            let args = rhs[open + 1..rhs.len() - 1].trim();
            let inputs: Vec<&str> = if args.is_empty() {
                Vec::new()
            } else {
                args.split(',').map(str::trim).collect()
            };
            if let Some(bad) = inputs.iter().find(|i| !valid_ident(i)) {
                return Err(syntax(line, format!("bad net name `{bad}`")));
            }
            if !kind.arity_ok(inputs.len()) {
                return Err(NetlistError::Arity {
                    net: out.to_string(),
                    kind,
                    got: inputs.len(),
                });
            }
            b.add_gate(kind, out, &inputs);
        } else {
            return Err(syntax(line, format!("cannot parse `{s}`")));
        }
    }
    b.build()
}

/// Writes the circuit in BENCH syntax; gates appear in topological order.
pub fn emit_bench(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", c.name());
    for n in c.ports() {
        let _ = writeln!(s, "INPUT({})", c.net_name(n));
    }
    for n in c.outputs() {
        let _ = writeln!(s, "OUTPUT({})", c.net_name(*n));
    }
    s.push('\n');
    for g in c.topo_order() {
        let g = c.gate(*g);
        let args: Vec<&str> = g.inputs.iter().map(|i| c.net_name(*i)).collect();
        let _ = writeln!(
            s,
            "{} = {}({})",
            c.net_name(g.output),
            g.kind.name(),
            args.join(", ")
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)").unwrap();
        assert_eq!(c.inputs().len(), 2);
        assert_eq!(c.outputs().len(), 1);
        assert_eq!(c.num_gates(), 1);
    }

    #[test]
    fn undriven_is_error() {
        let e = parse_bench("OUTPUT(y)\ny = AND(a, b)").unwrap_err();
        assert!(matches!(e, NetlistError::Undriven(_)));
    }

    #[test]
    fn syntax_error_has_line() {
        let e = parse_bench("INPUT(a)\n\ny = FOO(a)").unwrap_err();
        assert_eq!(
            e,
            NetlistError::Syntax {
                line: 3,
                msg: "unknown gate type `FOO`".into()
            }
        );
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_bench("# hi\n  INPUT( a )  # x\nOUTPUT(y)\n y=NOT( a )\n").unwrap();
        assert_eq!(c.num_gates(), 1);
    }

    #[test]
    fn roundtrip() {
        let src = "INPUT(a)\nINPUT(keyinput0)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(t)\nt = NAND(a, b, keyinput0)\ny = XOR(t, a)\n";
        let c = parse_bench(src).unwrap();
        let d = parse_bench(&emit_bench(&c)).unwrap();
        assert!(c.same_structure(&d));
    }
}
