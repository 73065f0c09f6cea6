use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cnf::Encoder;
use super::solver::{Lit, SatResult};
use super::SatError;
use crate::netlist::Circuit;
use crate::sim::eval_words;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A port assignment (in the first circuit's port order) on which the
    /// two circuits differ.
    Counterexample(Vec<bool>),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Position in `b`'s port list of each of `a`'s ports, and likewise for outputs.
fn align(a: &Circuit, b: &Circuit) -> Result<(Vec<usize>, Vec<usize>), SatError> {
    let names = |c: &Circuit, v: Vec<crate::netlist::NetId>| -> Vec<String> {
        v.into_iter().map(|n| c.net_name(n).to_string()).collect()
    };
    let pa = names(a, a.ports().collect());
    let pb = names(b, b.ports().collect());
    let oa = names(a, a.outputs().to_vec());
    let ob = names(b, b.outputs().to_vec());
    let map = |x: &[String], y: &[String], what: &str| -> Result<Vec<usize>, SatError> {
        if x.len() != y.len() {
            return Err(SatError::Signature(format!(
                "{what} count differs: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        x.iter()
            .map(|n| {
                y.iter()
                    .position(|m| m == n)
                    .ok_or_else(|| SatError::Signature(format!("{what} `{n}` missing")))
            })
            .collect()
    };
    Ok((map(&pa, &pb, "input")?, map(&oa, &ob, "output")?))
}

/// Decides whether two circuits with the same named ports compute the same
/// function. Random simulation runs first; a SAT miter settles the rest.
pub fn check_equivalence(a: &Circuit, b: &Circuit) -> Result<Equivalence, SatError> {
    let (pmap, omap) = align(a, b)?;
    let n = a.num_ports();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..16 {
        let wa: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
        let mut wb = vec![0u64; n];
        for (i, j) in pmap.iter().enumerate() {
            wb[*j] = wa[i];
        }
        let va = eval_words(a, &wa).map_err(|e| SatError::Signature(e.to_string()))?;
        let vb = eval_words(b, &wb).map_err(|e| SatError::Signature(e.to_string()))?;
        for (oi, oj) in omap.iter().enumerate() {
            let d = va[a.outputs()[oi].index()] ^ vb[b.outputs()[*oj].index()];
            if d != 0 {
                let bit = d.trailing_zeros();
                return Ok(Equivalence::Counterexample(
                    wa.iter().map(|w| w >> bit & 1 == 1).collect(),
                ));
            }
        }
    }

    let mut e = Encoder::new();
    let ports_a = e.fresh_ports(n);
    let mut ports_b = vec![e.false_lit(); n];
    for (i, j) in pmap.iter().enumerate() {
        ports_b[*j] = ports_a[i];
    }
    let la = e.encode_circuit(a, &ports_a, None);
    let lb = e.encode_circuit(b, &ports_b, None);
    let diffs: Vec<Lit> = omap
        .iter()
        .enumerate()
        .map(|(oi, oj)| e.xor(la[a.outputs()[oi].index()], lb[b.outputs()[*oj].index()]))
        .collect();
    let any = e.or(&diffs);
    if e.as_const(any) == Some(false) {
        return Ok(Equivalence::Equivalent);
    }
    match e.solve(&[any]) {
        SatResult::Unsat => Ok(Equivalence::Equivalent),
        SatResult::Sat => Ok(Equivalence::Counterexample(
            ports_a.iter().map(|l| e.value(*l)).collect(),
        )),
        SatResult::Unknown => Err(SatError::Budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;
    use crate::sim::eval;

    #[test]
    fn demorgan_equivalent() {
        let a = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a, b)").unwrap();
        let b = parse_bench("INPUT(b)\nINPUT(a)\nOUTPUT(y)\nna = NOT(a)\nnb = NOT(b)\ny = OR(na, nb)")
            .unwrap();
        assert_eq!(check_equivalence(&a, &b).unwrap(), Equivalence::Equivalent);
        assert_eq!(check_equivalence(&b, &a).unwrap(), Equivalence::Equivalent);
    }

    #[test]
    fn rare_difference_found_by_sat() {
        // Differ only on one of 2^20 patterns: simulation will almost surely miss it.
        let ins: Vec<String> = (0..20).map(|i| format!("i{i}")).collect();
        let mut t1 = String::new();
        for i in &ins {
            t1.push_str(&format!("INPUT({i})\n"));
        }
        t1.push_str("OUTPUT(y)\n");
        let mut t2 = t1.clone();
        t1.push_str(&format!("y = AND({})\n", ins.join(", ")));
        t2.push_str(&format!("y = AND({})\n", ins[..19].join(", ")));
        let a = parse_bench(&t1).unwrap();
        let b = parse_bench(&t2).unwrap();
        match check_equivalence(&a, &b).unwrap() {
            Equivalence::Counterexample(p) => {
                assert_ne!(eval(&a, &p).unwrap(), eval(&b, &p).unwrap());
            }
            Equivalence::Equivalent => panic!("should differ"),
        }
    }

    #[test]
    fn signature_mismatch() {
        let a = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)").unwrap();
        let b = parse_bench("INPUT(b)\nOUTPUT(y)\ny = NOT(b)").unwrap();
        assert!(check_equivalence(&a, &b).is_err());
    }
}
