use rand::Rng;

use super::tree::{cascade, pairwise_and, plain_and, point_tree, Node};
use super::{Ctx, LockArtifact, LockError, Technique};
use crate::netlist::{CircuitBuilder, GateKind, PortRoles};

fn key_gate(b: &mut CircuitBuilder, pip: &str, key: &str, xnor: bool) -> String {
    let kind = if xnor { GateKind::Xnor } else { GateKind::Xor };
    b.gate(kind, "lk_k", &[pip, key])
}

/// The g side and the f side of one unit, as trees over key-gate outputs.
fn unit_plan(ctx: &mut Ctx<'_>, m: usize) -> Result<(Node, Node), LockError> {
    let t = ctx.spec.technique;
    let g = match t {
        Technique::AntiSat | Technique::Sas => plain_and(m),
        Technique::AntiSatDtl => {
            let pairs = m / 2;
            let count = ctx.spec.dtl_replacements.unwrap_or((pairs / 4).max(1));
            if pairs == 0 || count > pairs {
                return Err(LockError::BadOption(format!(
                    "{count} replacements do not fit a {m}-leaf tree"
                )));
            }
            let mut marks = vec![false; pairs];
            let mut idx: Vec<usize> = (0..pairs).collect();
            rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut ctx.rng);
            for i in idx.into_iter().take(count) {
                marks[i] = true;
            }
            pairwise_and(m, &marks)
        }
        Technique::Caslock => {
            let config: Vec<bool> = (0..m.max(2)).map(|_| ctx.rng.gen()).collect();
            cascade(m, &config)
        }
        Technique::GenAntiSatComp | Technique::GenAntiSatNoncomp => {
            let leaves: Vec<usize> = (0..m).collect();
            point_tree(&mut ctx.rng, &leaves)
        }
        _ => unreachable!("hard-coded technique routed to the key-gate builder"),
    };
    let f = if t == Technique::GenAntiSatNoncomp {
        let leaves: Vec<usize> = (0..m).collect();
        point_tree(&mut ctx.rng, &leaves).with_root_complemented()
    } else {
        g.with_root_complemented()
    };
    Ok((g, f))
}

fn parities(n: &Node, m: usize) -> Vec<bool> {
    let mut v = Vec::new();
    n.leaf_parity(&mut v);
    let mut out = vec![false; m];
    for (i, p) in v {
        out[i] = p;
    }
    out
}

pub(super) fn build(ctx: &mut Ctx<'_>) -> Result<LockArtifact, LockError> {
    let spec = ctx.spec;
    let t = spec.technique;
    let k = spec.key_size;
    let blocks = if t == Technique::Sas { spec.sas_blocks } else { 1 };
    if blocks == 0 || k % (2 * blocks) != 0 {
        return Err(LockError::KeySize(k, t));
    }
    let m = k / (2 * blocks);
    let pops = ctx.pick_pops(blocks)?;
    let all_pips = if spec.pip.is_some() || ctx.c.inputs().len() >= m * blocks {
        ctx.pick_pips(m * blocks)?
    } else {
        let mut v = Vec::new();
        for _ in 0..blocks {
            v.extend(ctx.pick_pips(m)?);
        }
        v
    };
    let key = ctx.planted_key()?;
    let mut b = CircuitBuilder::from_circuit(ctx.c);
    let keys: Vec<String> = (0..k).map(|i| format!("keyinput{i}")).collect();
    for kn in &keys {
        b.add_input(kn);
    }
    let mut mapping = Vec::new();
    for blk in 0..blocks {
        let base = blk * 2 * m;
        let pips = &all_pips[blk * m..(blk + 1) * m];
        let (g, f) = unit_plan(ctx, m)?;
        let p1 = parities(&g, m);
        let p2 = parities(&f, m);
        let w1: Vec<String> = (0..m)
            .map(|i| key_gate(&mut b, &pips[i], &keys[base + i], key[base + i] ^ p1[i]))
            .collect();
        let w2: Vec<String> = (0..m)
            .map(|i| key_gate(&mut b, &pips[i], &keys[base + m + i], !(key[base + m + i] ^ p2[i])))
            .collect();
        let gn = g.emit(&mut b, &w1);
        let fnet = f.emit(&mut b, &w2);
        let y = b.gate(GateKind::And, "lk_y", &[gn, fnet]);
        let pop = &pops[blk];
        let old = b
            .detach_driver(pop, "lk_o")
            .ok_or_else(|| LockError::DegeneratePop(pop.clone()))?;
        b.add_gate(GateKind::Xor, pop, &[old, y]);
        mapping.extend((0..m).map(|i| key[base + i] ^ key[base + m + i]));
    }
    Ok(LockArtifact {
        locked: b.build()?,
        secret_key: key,
        roles: PortRoles {
            pip: all_pips,
            pop: pops,
        },
        protected_patterns: Vec::new(),
        spec: spec.clone(),
        mapping,
    })
}
