use std::collections::HashSet;
use std::fmt::Write as _;

use super::{Circuit, CircuitBuilder, GateKind, NetlistError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    while i < bytes.len() {
        let c = bytes[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && bytes.get(i + 1) == Some(&'/') {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && bytes.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < bytes.len() && !(bytes[i] == '*' && bytes[i + 1] == '/') {
                if bytes[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i += 2;
        } else if c == '\\' {
            let start = i + 1;
            i += 1;
            while i < bytes.len() && !bytes[i].is_whitespace() {
                i += 1;
            }
            out.push((Tok::Ident(bytes[start..i].iter().collect()), line));
        } else if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_' || bytes[i] == '$') {
                i += 1;
            }
            out.push((Tok::Ident(bytes[start..i].iter().collect()), line));
        } else {
            out.push((Tok::Punct(c), line));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.1)
            .unwrap_or(1)
    }

    fn err(&self, msg: impl Into<String>) -> NetlistError {
        NetlistError::Syntax {
            line: self.line(),
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(Tok::Punct('[')) => Err(NetlistError::Unsupported("bus/vector".into())),
            other => Err(self.err(format!("expected identifier, found {other:?}"))),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            Some(Tok::Punct('[')) => Err(NetlistError::Unsupported("bus/vector".into())),
            other => Err(self.err(format!("expected `{c}`, found {other:?}"))),
        }
    }

    fn ident_list(&mut self, end: char) -> Result<Vec<String>> {
        let mut v = Vec::new();
        if self.peek() == Some(&Tok::Punct(end)) {
            self.pos += 1;
            return Ok(v);
        }
        loop {
            v.push(self.ident()?);
            match self.next() {
                Some(Tok::Punct(',')) => continue,
                Some(Tok::Punct(p)) if p == end => return Ok(v),
                Some(Tok::Punct('[')) => return Err(NetlistError::Unsupported("bus/vector".into())),
                other => return Err(self.err(format!("expected `,` or `{end}`, found {other:?}"))),
            }
        }
    }
}

const BEHAVIORAL: &[&str] = &[
    "assign", "always", "initial", "reg", "integer", "function", "task", "generate", "if", "case",
    "parameter", "localparam", "begin",
];

/// Parses a single-module structural Verilog netlist built from primitive gates.
pub fn parse_structural_verilog(text: &str) -> Result<Circuit> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    match p.next() {
        Some(Tok::Ident(s)) if s == "module" => {}
        _ => return Err(p.err("expected `module`")),
    }
    let name = p.ident()?;
    let mut ports = Vec::new();
    if p.peek() == Some(&Tok::Punct('(')) {
        p.pos += 1;
        ports = p.ident_list(')')?;
    }
    p.expect(';')?;

    let mut declared_in: Vec<String> = Vec::new();
    let mut declared_out: Vec<String> = Vec::new();
    let mut b = CircuitBuilder::new(&name);
    let mut driven = HashSet::new();
    loop {
        let kw = match p.next() {
            Some(Tok::Ident(s)) => s,
            Some(t) => return Err(p.err(format!("unexpected {t:?}"))),
            None => return Err(p.err("missing `endmodule`")),
        };
        if kw == "endmodule" {
            break;
        }
        if BEHAVIORAL.contains(&kw.as_str()) {
            return Err(NetlistError::Unsupported(kw));
        }
        match kw.as_str() {
            "input" | "output" | "wire" => {
                if p.peek() == Some(&Tok::Punct('[')) {
                    return Err(NetlistError::Unsupported("bus/vector".into()));
                }
                let names = p.ident_list(';')?;
                match kw.as_str() {
                    "input" => declared_in.extend(names),
                    "output" => declared_out.extend(names),
                    _ => {}
                }
            }
            prim => {
                let kind = match prim {
                    "and" => GateKind::And,
                    "nand" => GateKind::Nand,
                    "or" => GateKind::Or,
                    "nor" => GateKind::Nor,
                    "xor" => GateKind::Xor,
                    "xnor" => GateKind::Xnor,
                    "not" => GateKind::Inv,
                    "buf" => GateKind::Buf,
                    other => return Err(NetlistError::Unsupported(format!("instance of `{other}`"))),
                };
                let inst = match p.peek() {
                    Some(Tok::Ident(_)) => Some(p.ident()?),
                    _ => None,
                };
                p.expect('(')?;
                let conns = p.ident_list(')')?;
                p.expect(';')?;
                if conns.is_empty() {
                    return Err(p.err("gate without connections"));
                }
                let out = &conns[0];
                let ins = &conns[1..];
                if !kind.arity_ok(ins.len()) {
                    return Err(NetlistError::Arity {
                        net: out.clone(),
                        kind,
                        got: ins.len(),
                    });
                }
                driven.insert(out.clone());
                match inst {
                    Some(n) => b.add_named_gate(&n, kind, out, ins),
                    None => b.add_gate(kind, out, ins),
                };
            }
        }
    }
    if declared_in.is_empty() && declared_out.is_empty() {
        for port in &ports {
            if driven.contains(port) {
                declared_out.push(port.clone());
            } else {
                declared_in.push(port.clone());
            }
        }
    }
    for i in &declared_in {
        b.add_input(i);
    }
    for o in &declared_out {
        b.add_output(o);
    }
    b.build()
}

fn vname(s: &str) -> String {
    let simple = s
        .chars()
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false)
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$');
    if simple {
        s.to_string()
    } else {
        format!("\\{s} ")
    }
}

pub fn emit_verilog(c: &Circuit) -> String {
    let mut s = String::new();
    let ports: Vec<String> = c
        .ports()
        .chain(c.outputs().iter().copied())
        .map(|n| vname(c.net_name(n)))
        .collect::<Vec<_>>();
    let mut seen = HashSet::new();
    let ports: Vec<String> = ports.into_iter().filter(|p| seen.insert(p.clone())).collect();
    let _ = writeln!(s, "module {}({});", vname(c.name()), ports.join(", "));
    for n in c.ports() {
        let _ = writeln!(s, "  input {};", vname(c.net_name(n)));
    }
    for n in c.outputs() {
        let _ = writeln!(s, "  output {};", vname(c.net_name(*n)));
    }
    for g in c.topo_order() {
        let o = c.gate(*g).output;
        if !c.is_output(o) {
            let _ = writeln!(s, "  wire {};", vname(c.net_name(o)));
        }
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        let prim = match g.kind {
            GateKind::And => "and",
            GateKind::Nand => "nand",
            GateKind::Or => "or",
            GateKind::Nor => "nor",
            GateKind::Xor => "xor",
            GateKind::Xnor => "xnor",
            GateKind::Inv => "not",
            GateKind::Buf => "buf",
            GateKind::Const0 | GateKind::Const1 => {
                // No primitive for constants: x ^ x and its complement.
                let src = c.ports().next().map(|n| vname(c.net_name(n)));
                let src = src.unwrap_or_else(|| "1'b0".into());
                let k = if g.kind == GateKind::Const0 { "xor" } else { "xnor" };
                let _ = writeln!(
                    s,
                    "  {k} {}({}, {src}, {src});",
                    vname(&g.name),
                    vname(c.net_name(g.output))
                );
                continue;
            }
        };
        let mut conns = vec![vname(c.net_name(g.output))];
        conns.extend(g.inputs.iter().map(|i| vname(c.net_name(*i))));
        let _ = writeln!(s, "  {prim} {}({});", vname(&g.name), conns.join(", "));
    }
    s.push_str("endmodule\n");
    s
}
