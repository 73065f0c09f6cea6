use psll::attack::{
    attack, attack_hard_coded, attack_non_hard_coded, candidate_nets, extract_locking_unit, extract_nets,
    get_attributes, key_input_mapping, key_mapping, AttackError, AttackOptions, Bin, BitSource, EntryGate,
    FamilyChoice,
};
use psll::fixtures::{self, Fixture};
use psll::netlist::{parse_bench, Circuit, SupportMap};
use psll::sat::{check_equivalence, substitute_key};
use psll::sim::{Oracle, TernaryPattern};

fn bits(s: &str) -> Vec<bool> {
    s.bytes().map(|b| b == b'1').collect()
}

fn oracle(f: &Fixture) -> Oracle {
    Oracle::with_key(f.locked.clone(), f.key.clone())
}

fn accepted_candidates(c: &Circuit) -> Vec<String> {
    let sup = SupportMap::compute(c);
    let (pops, nets) = extract_nets(c, &sup);
    let map = key_input_mapping(c, &sup, &nets);
    candidate_nets(c, &sup, &nets, &pops, &map, 1)
        .into_iter()
        .filter(|cd| psll::attack::probe(c, cd.net, 1).is_some())
        .map(|cd| c.net_name(cd.net).to_string())
        .collect()
}

#[test]
fn pf_candidates_and_oracle_less_key() {
    let f = fixtures::pf();
    let mut acc = accepted_candidates(&f.locked);
    acc.sort();
    assert_eq!(acc, vec!["n1", "n2"]);
    let out = attack_hard_coded(&f.locked, None, &AttackOptions::default()).unwrap();
    assert_eq!(out.key.to_string(), "1001");
    assert!(out.oracle_less());
    assert_eq!(out.anchors, vec!["n2"]);
    assert_eq!(out.count(BitSource::Structural), 4);
}

#[test]
fn pf_merged_partial_key_then_oracle() {
    let f = fixtures::pf_merged();
    assert_eq!(accepted_candidates(&f.locked), vec!["n1"]);
    let out = attack_hard_coded(&f.locked, None, &AttackOptions::default()).unwrap();
    assert_eq!(out.key.to_string(), "00x0");
    assert!(!out.complete());
    assert_eq!(out.count(BitSource::Unresolved), 1);

    let o = oracle(&f);
    let out = attack_hard_coded(&f.locked, Some(&o), &AttackOptions::default()).unwrap();
    assert_eq!(out.structural.to_string(), "00x0");
    assert_eq!(out.count(BitSource::Sat), 1);
    assert!(!out.oracle_less());
    let k = out.key.to_bools().unwrap();
    let a = substitute_key(&f.locked, &TernaryPattern::from_bools(&k)).unwrap();
    assert!(check_equivalence(&f.original(), &a).unwrap().is_equivalent());
    // Brute force over the residual bit: only one completion is correct.
    let good: Vec<String> = ["0000", "0010"]
        .iter()
        .filter(|s| {
            let a = substitute_key(&f.locked, &TernaryPattern::from_bools(&bits(s))).unwrap();
            check_equivalence(&f.original(), &a).unwrap().is_equivalent()
        })
        .map(|s| s.to_string())
        .collect();
    assert_eq!(good, vec![out.key.to_string()]);
}

#[test]
fn unlocked_circuit_has_no_candidates() {
    let c = fixtures::parse(fixtures::PF_HOST);
    let sup = SupportMap::compute(&c);
    let (pops, nets) = extract_nets(&c, &sup);
    assert!(pops.is_empty());
    let map = key_input_mapping(&c, &sup, &nets);
    assert!(candidate_nets(&c, &sup, &nets, &pops, &map, 1).is_empty());
    assert!(matches!(
        attack(&c, None, &AttackOptions::default()),
        Err(AttackError::NoKeyInputs)
    ));
}

#[test]
fn merged_comparator_drops_out_of_the_map() {
    let text = fixtures::PF_LOCKED
        .lines()
        .filter(|l| !l.starts_with("r2") && !l.starts_with("r3") && !l.starts_with("restore"))
        .collect::<Vec<_>>()
        .join("\n")
        + "\nkx = XOR(keyinput2, keyinput3)\ncd = XOR(c, d)\nr23 = XNOR(cd, kx)\nrestore = AND(r0, r1, r23)\n";
    let c = parse_bench(&text).unwrap();
    let sup = SupportMap::compute(&c);
    let (_, nets) = extract_nets(&c, &sup);
    let map = key_input_mapping(&c, &sup, &nets);
    assert_eq!(map.pairs.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn full_bijection_on_restore_unit() {
    let f = fixtures::pf();
    let c = &f.locked;
    let sup = SupportMap::compute(c);
    let (_, nets) = extract_nets(c, &sup);
    let map = key_input_mapping(c, &sup, &nets);
    let pips: Vec<&str> = map.pairs.values().map(|p| c.net_name(p.pip)).collect();
    assert_eq!(pips, vec!["a", "b", "c", "d"]);
    assert!(map.pairs.values().all(|p| p.offset == Some(false)));
}

#[test]
fn kg_and_kg_inverted_oracle_less() {
    for f in [fixtures::kg(), fixtures::kg_inverted()] {
        let out = attack_non_hard_coded(&f.locked, None, &AttackOptions::default()).unwrap();
        assert_eq!(out.key.to_string(), "01101011", "{}", f.name);
        assert!(out.oracle_less());
        assert_eq!(out.mapping, bits("1101"));
        assert_eq!(out.anchors, vec!["Y"]);
        let auto = attack(&f.locked, None, &AttackOptions::default()).unwrap();
        assert_eq!(auto.key, out.key);
    }
}

#[test]
fn kg_inverted_attributes() {
    let u = extract_locking_unit(&fixtures::kg_inverted().locked).unwrap();
    let a = get_attributes(&u);
    assert_eq!((a[0].bin, a[0].gate, a[0].inverted), (Some(Bin::One), Some(EntryGate::Xor), Some(false)));
    assert_eq!((a[4].bin, a[4].gate, a[4].inverted), (Some(Bin::Two), Some(EntryGate::Xnor), Some(true)));
}

#[test]
fn kg_decomposed_needs_two_sat_bits() {
    let f = fixtures::kg_decomposed();
    let u = extract_locking_unit(&f.locked).unwrap();
    let a = get_attributes(&u);
    for k in [0, 1, 4, 5] {
        assert_eq!(a[k].bit(), None, "k{k}");
    }
    assert_eq!((a[2].bin, a[2].gate, a[2].inverted), (Some(Bin::One), Some(EntryGate::Xor), Some(true)));

    let none = attack_non_hard_coded(&f.locked, None, &AttackOptions::default()).unwrap();
    assert!(!none.complete());

    let o = oracle(&f);
    let out = attack_non_hard_coded(&f.locked, Some(&o), &AttackOptions::default()).unwrap();
    assert_eq!(out.key.to_string(), "11100011");
    assert_eq!(out.count(BitSource::Sat), 2);
    assert_eq!(out.count(BitSource::Structural), 6);
}

#[test]
fn key_gate_mapping_table() {
    use Bin::*;
    use EntryGate::*;
    let rows = [
        (One, Xor, false, false),
        (One, Xor, true, true),
        (One, Xnor, false, true),
        (One, Xnor, true, false),
        (Two, Xor, false, true),
        (Two, Xor, true, false),
        (Two, Xnor, false, false),
        (Two, Xnor, true, true),
    ];
    for (bin, gate, inv, want) in rows {
        assert_eq!(key_mapping(bin, gate, inv), want);
        // A one-input unit where the row's key sits in its bin and the
        // partner is a plain XOR; the mapped key must unlock it.
        let g = |k: &str, kind: EntryGate, inv: bool, out: &str| {
            let name = if kind == Xor { "XOR" } else { "XNOR" };
            if inv {
                format!("{out}_e = {name}(a, {k})\n{out} = NOT({out}_e)\n")
            } else {
                format!("{out} = {name}(a, {k})\n")
            }
        };
        let (p0, p1) = match bin {
            One => (g("keyinput0", gate, inv, "p0"), g("keyinput1", Xor, false, "p1")),
            Two => (g("keyinput0", Xor, false, "p0"), g("keyinput1", gate, inv, "p1")),
        };
        let text = format!(
            "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nINPUT(keyinput1)\nOUTPUT(O)\n{p0}{p1}Y = AND(p0, p1)\nh = AND(a, b)\nO = XOR(h, Y)\n"
        );
        let c = parse_bench(&text).unwrap();
        let host = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(O)\nO = AND(a, b)\n").unwrap();
        let out = attack_non_hard_coded(&c, None, &AttackOptions::default()).unwrap();
        let k = out.key.to_bools().unwrap();
        let a = substitute_key(&c, &TernaryPattern::from_bools(&k)).unwrap();
        assert!(check_equivalence(&host, &a).unwrap().is_equivalent(), "{bin:?} {gate:?} {inv}");
        let row_key = if bin == One { 0 } else { 1 };
        assert_eq!(k[row_key], want);
    }
}

#[test]
fn misrouted_families_give_diagnostics() {
    let hc = fixtures::pf();
    assert!(matches!(
        attack_non_hard_coded(&hc.locked, None, &AttackOptions::default()),
        Err(AttackError::NotNonHardCoded)
    ));
    let nhc = fixtures::kg();
    let opts = AttackOptions {
        family: FamilyChoice::Hc,
        ..AttackOptions::default()
    };
    let e = attack(&nhc.locked, None, &opts).unwrap_err();
    assert!(matches!(e, AttackError::ExhaustedCandidates { .. }));
    assert!(e.to_string().contains("--family nhc"));
}

#[test]
fn oracle_never_changes_structural_bits() {
    for f in fixtures::locked_fixtures() {
        let plain = attack(&f.locked, None, &AttackOptions::default()).unwrap();
        let o = oracle(&f);
        let guided = attack(&f.locked, Some(&o), &AttackOptions::default()).unwrap();
        assert_eq!(plain.structural, guided.structural, "{}", f.name);
        for (i, t) in plain.key.0.iter().enumerate() {
            if let Some(b) = t.to_bool() {
                assert_eq!(guided.key.get(i).to_bool(), Some(b), "{}", f.name);
            }
        }
        let k = guided.key.to_bools().unwrap();
        let a = substitute_key(&f.locked, &TernaryPattern::from_bools(&k)).unwrap();
        assert!(check_equivalence(&f.original(), &a).unwrap().is_equivalent(), "{}", f.name);
    }
}
