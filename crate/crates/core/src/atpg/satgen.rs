use super::DetectChecker;
use crate::sat::{Lit, SatResult};
use crate::sim::{Ternary, TernaryPattern};

fn block(checker: &mut DetectChecker, cube: &TernaryPattern) {
    let clause: Vec<Lit> = cube
        .0
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            t.to_bool()
                .map(|v| if v { !checker.port_lits[i] } else { checker.port_lits[i] })
        })
        .collect();
    checker.enc.add_clause(&clause);
}

/// Continues an enumeration that already emitted `cubes`: find a detecting
/// minterm outside them, lift it, block it, repeat.
pub(super) fn enumerate(
    checker: &mut DetectChecker,
    ports: &[usize],
    width: usize,
    mut cubes: Vec<TernaryPattern>,
    max: usize,
) -> (Vec<TernaryPattern>, bool) {
    for c in cubes.clone() {
        block(checker, &c);
    }
    loop {
        let detected = checker.detected;
        match checker.enc.solve(&[detected]) {
            SatResult::Unsat => return (cubes, true),
            SatResult::Unknown => return (cubes, false),
            SatResult::Sat => {}
        }
        if cubes.len() >= max {
            return (cubes, false);
        }
        let mut model = TernaryPattern::all_x(width);
        for &i in ports {
            model.set(i, Ternary::from_bool(checker.enc.value(checker.port_lits[i])));
        }
        let cube = checker.lift(&model, &cubes);
        block(checker, &cube);
        cubes.push(cube);
    }
}

/// True when a detecting minterm exists outside `cubes`. Leaves blocking
/// clauses behind.
pub(super) fn has_more(checker: &mut DetectChecker, cubes: &[TernaryPattern]) -> bool {
    for c in cubes {
        block(checker, c);
    }
    let detected = checker.detected;
    checker.enc.solve(&[detected]) != SatResult::Unsat
}
