use std::collections::HashSet;

use rand::seq::SliceRandom;

use super::tree::{and_tree, combine, dtl_plan, DtlGate, Shape};
use super::{Ctx, LockArtifact, LockError, Technique};
use crate::netlist::{Circuit, CircuitBuilder, GateKind, PortRoles};
use crate::resynth::flatten_cone;

fn key_name(i: usize) -> String {
    format!("keyinput{i}")
}

fn xor_into(b: &mut CircuitBuilder, pop: &str, net: &str) -> Result<(), LockError> {
    let old = b
        .detach_driver(pop, "lk_o")
        .ok_or_else(|| LockError::DegeneratePop(pop.to_string()))?;
    b.add_gate(GateKind::Xor, pop, &[old, net.to_string()]);
    Ok(())
}

fn literal(b: &mut CircuitBuilder, net: &str, value: bool) -> String {
    if value {
        net.to_string()
    } else {
        b.gate(GateKind::Inv, "lk_n", &[net])
    }
}

/// OR of point functions, one per pattern, over `pips`.
fn perturb(b: &mut CircuitBuilder, pips: &[String], patterns: &[Vec<bool>], shape: Shape) -> String {
    let roots: Vec<String> = patterns
        .iter()
        .map(|p| {
            let lits: Vec<String> = pips.iter().zip(p).map(|(x, v)| literal(b, x, *v)).collect();
            and_tree(b, &lits, shape, &[]).0
        })
        .collect();
    combine(b, roots, GateKind::Or, Shape::Balanced)
}

/// `original` with `pop` flipped exactly on `patterns` over `pips`.
pub fn perturbed_circuit(
    original: &Circuit,
    pop: &str,
    pips: &[String],
    patterns: &[Vec<bool>],
) -> Result<Circuit, LockError> {
    let mut b = CircuitBuilder::from_circuit(original);
    let p = perturb(&mut b, pips, patterns, Shape::Balanced);
    xor_into(&mut b, pop, &p)?;
    Ok(b.build()?)
}

fn comparators(b: &mut CircuitBuilder, pips: &[String], keys: &[String]) -> Vec<String> {
    pips.iter()
        .zip(keys)
        .map(|(x, k)| b.gate(GateKind::Xnor, "lk_c", &[x, k]))
        .collect()
}

fn dtl_for(ctx: &mut Ctx<'_>, n: usize) -> Result<Vec<Option<DtlGate>>, LockError> {
    if !ctx.spec.technique.is_dtl() {
        return Ok(Vec::new());
    }
    let pairs = n / 2;
    let count = ctx.spec.dtl_replacements.unwrap_or((n / 8).max(1));
    if count >= n.saturating_sub(1).max(1) || count > pairs {
        return Err(LockError::BadOption(format!(
            "{count} replacements do not fit a {n}-leaf tree"
        )));
    }
    Ok(dtl_plan(&mut ctx.rng, pairs, count, ctx.spec.dtl_gate))
}

fn flipped_leaves(plan: &[Option<DtlGate>], n: usize) -> Vec<bool> {
    let mut f = vec![false; n];
    for (j, d) in plan.iter().enumerate() {
        if matches!(d, Some(DtlGate::Or) | Some(DtlGate::Nor)) {
            f[2 * j] = true;
            f[2 * j + 1] = true;
        }
    }
    f
}

fn distinct_words(ctx: &mut Ctx<'_>, count: usize, width: usize) -> Vec<Vec<bool>> {
    let mut words: Vec<Vec<bool>> = Vec::new();
    let mut tries = 0;
    while words.len() < count {
        let w = ctx.random_bits(width);
        tries += 1;
        let far = words
            .iter()
            .all(|o| o.iter().zip(&w).filter(|(a, b)| a != b).count() >= 2.min(width));
        if far || tries > 10_000 {
            if !words.contains(&w) {
                words.push(w);
            }
        }
    }
    words
}

pub(super) fn build(ctx: &mut Ctx<'_>) -> Result<LockArtifact, LockError> {
    let spec = ctx.spec;
    let t = spec.technique;
    let k = spec.key_size;
    let pop = ctx.pick_pops(1)?.remove(0);
    if ctx.c.driver(ctx.c.net(&pop).unwrap()).is_none() {
        return Err(LockError::DegeneratePop(pop));
    }
    let keys: Vec<String> = (0..k).map(key_name).collect();

    match t {
        Technique::Sarlock | Technique::SarlockDtl | Technique::Ece => {
            let radius = if t == Technique::Ece { spec.ece_radius } else { 0 };
            if radius >= k {
                return Err(LockError::KeySize(k, t));
            }
            let mut kept: Vec<usize> = (0..k).collect();
            if radius > 0 {
                let mut order = kept.clone();
                order.shuffle(&mut ctx.rng);
                let dropped: HashSet<usize> = order.into_iter().take(radius).collect();
                kept.retain(|i| !dropped.contains(i));
            }
            let pips = ctx.pick_pips(kept.len())?;
            let secret = ctx.planted_key()?;
            let plan = dtl_for(ctx, kept.len())?;
            let mut b = CircuitBuilder::from_circuit(ctx.c);
            for key in &keys {
                b.add_input(key);
            }
            let kept_keys: Vec<String> = kept.iter().map(|i| keys[*i].clone()).collect();
            let cmps = comparators(&mut b, &pips, &kept_keys);
            let (eq, _) = and_tree(&mut b, &cmps, Shape::Balanced, &plan);
            let lits: Vec<String> = keys
                .iter()
                .zip(&secret)
                .map(|(kn, v)| literal(&mut b, kn, *v))
                .collect();
            let (mask, _) = and_tree(&mut b, &lits, Shape::Balanced, &[]);
            let nmask = b.gate(GateKind::Inv, "lk_m", &[mask]);
            let flip = b.gate(GateKind::And, "lk_f", &[eq, nmask]);
            xor_into(&mut b, &pop, &flip)?;
            Ok(LockArtifact {
                locked: b.build()?,
                secret_key: secret.clone(),
                roles: PortRoles {
                    pip: pips,
                    pop: vec![pop],
                },
                protected_patterns: vec![secret],
                spec: spec.clone(),
                mapping: Vec::new(),
            })
        }
        Technique::SfllHd0 | Technique::SfllRem | Technique::Cac | Technique::CacDtl => {
            let shape = if matches!(t, Technique::Cac | Technique::CacDtl) {
                Shape::Chain
            } else {
                Shape::Balanced
            };
            let pips = ctx.pick_pips(k)?;
            let secret = ctx.planted_key()?;
            let plan = dtl_for(ctx, k)?;
            let flips = flipped_leaves(&plan, k);
            let pp: Vec<bool> = secret.iter().zip(&flips).map(|(a, b)| a ^ b).collect();

            let mut b = CircuitBuilder::from_circuit(ctx.c);
            let p = perturb(&mut b, &pips, std::slice::from_ref(&pp), shape);
            xor_into(&mut b, &pop, &p)?;
            if t == Technique::SfllRem {
                let cmod = b.build()?;
                let po = cmod.net(&pop).unwrap();
                b = CircuitBuilder::from_circuit(&flatten_cone(&cmod, po));
            }
            for key in &keys {
                b.add_input(key);
            }
            let cmps = comparators(&mut b, &pips, &keys);
            let (r, _) = and_tree(&mut b, &cmps, shape, &plan);
            xor_into(&mut b, &pop, &r)?;
            Ok(LockArtifact {
                locked: b.build()?,
                secret_key: secret,
                roles: PortRoles {
                    pip: pips,
                    pop: vec![pop],
                },
                protected_patterns: vec![pp],
                spec: spec.clone(),
                mapping: Vec::new(),
            })
        }
        Technique::SfllFlex => {
            let n_pp = spec.effective_num_pp();
            if n_pp == 0 || k % n_pp != 0 || k / n_pp == 0 {
                return Err(LockError::KeySize(k, t));
            }
            let w = k / n_pp;
            if n_pp as u128 > 1u128 << w.min(100) {
                return Err(LockError::BadOption(format!("{n_pp} patterns do not fit {w} bits")));
            }
            let pips = ctx.pick_pips(w)?;
            let words: Vec<Vec<bool>> = match &spec.key {
                Some(key) => {
                    if key.len() != k {
                        return Err(LockError::BadOption("planted key width".into()));
                    }
                    let words: Vec<Vec<bool>> = key.chunks(w).map(|c| c.to_vec()).collect();
                    let uniq: HashSet<&Vec<bool>> = words.iter().collect();
                    if uniq.len() != words.len() {
                        return Err(LockError::BadOption("protected patterns must be distinct".into()));
                    }
                    words
                }
                None => distinct_words(ctx, n_pp, w),
            };
            let secret: Vec<bool> = words.concat();
            let mut b = CircuitBuilder::from_circuit(ctx.c);
            let p = perturb(&mut b, &pips, &words, Shape::Balanced);
            xor_into(&mut b, &pop, &p)?;
            for key in &keys {
                b.add_input(key);
            }
            let roots: Vec<String> = keys
                .chunks(w)
                .map(|kw| {
                    let cmps = comparators(&mut b, &pips, kw);
                    and_tree(&mut b, &cmps, Shape::Balanced, &[]).0
                })
                .collect();
            let r = combine(&mut b, roots, GateKind::Or, Shape::Balanced);
            xor_into(&mut b, &pop, &r)?;
            Ok(LockArtifact {
                locked: b.build()?,
                secret_key: secret,
                roles: PortRoles {
                    pip: pips,
                    pop: vec![pop],
                },
                protected_patterns: words,
                spec: spec.clone(),
                mapping: Vec::new(),
            })
        }
        _ => unreachable!("key-gate technique routed to the hard-coded builder"),
    }
}
