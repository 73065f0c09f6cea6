//! Seeded generator for ISCAS-like combinational benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netlist::{Circuit, CircuitBuilder, GateKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub name: String,
    pub gates: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(name: &str, gates: usize, inputs: usize, outputs: usize, seed: u64) -> Self {
        GenSpec {
            name: name.to_string(),
            gates,
            inputs,
            outputs,
            seed,
        }
    }
}

/// The four evaluation circuits, smallest first.
pub fn benchmark_suite() -> Vec<GenSpec> {
    vec![
        GenSpec::new("g250", 250, 70, 20, 1),
        GenSpec::new("g900", 900, 96, 40, 2),
        GenSpec::new("g1800", 1800, 128, 64, 3),
        GenSpec::new("g3400", 3400, 160, 100, 4),
    ]
}

/// A circuit of roughly ten thousand gates for scalability runs.
pub fn large_spec() -> GenSpec {
    GenSpec::new("g10k", 10_000, 256, 128, 5)
}

fn pick_kind(rng: &mut ChaCha8Rng) -> GateKind {
    match rng.gen_range(0..100) {
        0..=21 => GateKind::And,
        22..=43 => GateKind::Nand,
        44..=59 => GateKind::Or,
        60..=75 => GateKind::Nor,
        76..=81 => GateKind::Xor,
        82..=85 => GateKind::Xnor,
        86..=95 => GateKind::Inv,
        _ => GateKind::Buf,
    }
}

/// Builds a random circuit. Every input and every gate lies on a path to
/// some output; there are no constants and no dangling logic.
pub fn generate(spec: &GenSpec) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut b = CircuitBuilder::new(&spec.name);
    let mut nets: Vec<String> = Vec::new();
    let mut unused: Vec<String> = Vec::new();
    for i in 0..spec.inputs.max(1) {
        let n = format!("G{i}");
        b.add_input(&n);
        nets.push(n.clone());
        unused.push(n);
    }
    let window = (spec.gates / 8).max(16);
    for _ in 0..spec.gates {
        let kind = pick_kind(&mut rng);
        let arity = match kind {
            GateKind::Inv | GateKind::Buf => 1,
            GateKind::Xor | GateKind::Xnor => 2,
            _ => *[2, 2, 2, 3, 3, 4].choose(&mut rng).unwrap(),
        };
        let mut ins: Vec<String> = Vec::new();
        while ins.len() < arity.min(nets.len()) {
            let cand = if !unused.is_empty() && rng.gen_bool(0.55) {
                let j = rng.gen_range(0..unused.len().min(window));
                unused[j].clone()
            } else {
                let lo = nets.len().saturating_sub(window);
                nets[rng.gen_range(lo..nets.len())].clone()
            };
            if !ins.contains(&cand) {
                ins.push(cand);
            } else if nets.len() <= arity {
                break;
            }
        }
        let kind = if ins.len() == 1 && !matches!(kind, GateKind::Inv | GateKind::Buf) {
            GateKind::Inv
        } else {
            kind
        };
        unused.retain(|u| !ins.contains(u));
        let out = b.gate(kind, "n", &ins);
        nets.push(out.clone());
        unused.push(out);
    }
    // Fold leftover unused nets into the outputs.
    let n_out = spec.outputs.max(1);
    let mut outs: Vec<String> = Vec::new();
    unused.reverse();
    while unused.len() > n_out {
        let take = (unused.len() - n_out + 1).min(3);
        let group: Vec<String> = unused.drain(..take).collect();
        let kind = if rng.gen_bool(0.5) { GateKind::Or } else { GateKind::And };
        let out = b.gate(kind, "n", &group);
        unused.push(out);
    }
    outs.extend(unused);
    let mut k = nets.len();
    while outs.len() < n_out && k > spec.inputs {
        k -= 1;
        if !outs.contains(&nets[k]) {
            outs.push(nets[k].clone());
        }
    }
    for (i, o) in outs.iter().enumerate() {
        let name = format!("PO{i}");
        b.add_gate(GateKind::Buf, &name, &[o]);
        b.add_output(&name);
    }
    b.build().expect("generator produced a valid circuit")
}
