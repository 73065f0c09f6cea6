use psll::fixtures;
use psll::gen::{generate, GenSpec};
use psll::lock::{correct_key_set, lock, perturbed_circuit, LockError, LockSpec, Technique, Family};
use psll::netlist::{parse_bench, Circuit, GateKind};
use psll::sat::{check_equivalence, substitute_key};
use psll::sim::{eval, TernaryPattern};

const HOST: &str = "INPUT(I0)\nINPUT(I1)\nINPUT(I2)\nINPUT(I3)\nINPUT(I4)\nOUTPUT(O)\n\
    h1 = NAND(I0, I4)\nh2 = NOR(I2, I3)\nh3 = AND(h1, I1)\nO = OR(h3, h2)\n";

fn bits(s: &str) -> Vec<bool> {
    s.bytes().map(|b| b == b'1').collect()
}

fn unlocked(c: &Circuit, key: &[bool]) -> Circuit {
    substitute_key(c, &TernaryPattern::from_bools(key)).unwrap()
}

fn host() -> Circuit {
    generate(&GenSpec::new("h", 150, 40, 12, 77))
}

#[test]
fn every_technique_restores_with_planted_key_only() {
    let orig = host();
    for t in Technique::ALL {
        for seed in 0..2 {
            let art = lock(&orig, &LockSpec::new(t, 16, seed)).unwrap();
            assert_eq!(art.locked.key_inputs().len(), 16, "{t}");
            assert!(
                check_equivalence(&orig, &unlocked(&art.locked, &art.secret_key)).unwrap().is_equivalent(),
                "{t} seed {seed}"
            );
            for i in 0..16 {
                let mut k = art.secret_key.clone();
                k[i] = !k[i];
                assert!(
                    !check_equivalence(&orig, &unlocked(&art.locked, &k)).unwrap().is_equivalent(),
                    "{t} seed {seed}: flipping bit {i} still correct"
                );
            }
        }
    }
}

#[test]
fn key_gates_drive_exactly_one_xor() {
    let orig = host();
    for t in Technique::ALL.into_iter().filter(|t| t.family() == Family::KeyGate) {
        let art = lock(&orig, &LockSpec::new(t, 16, 3)).unwrap();
        let c = &art.locked;
        for k in c.key_inputs() {
            let fo = c.fanout(*k);
            assert_eq!(fo.len(), 1, "{t}");
            assert!(c.gate(fo[0]).kind.is_xor_like(), "{t}");
        }
    }
}

#[test]
fn hard_coded_modification_matches_pf() {
    let orig = fixtures::parse(fixtures::PF_HOST);
    let pips: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let cmod = perturbed_circuit(&orig, "Y", &pips, &[bits("1001")]).unwrap();
    let expected = fixtures::parse(fixtures::PF_PERTURBED);
    assert!(check_equivalence(&expected, &cmod).unwrap().is_equivalent());
}

#[test]
fn sfll_hd0_on_pf_host_with_planted_pattern() {
    let orig = fixtures::parse(fixtures::PF_HOST);
    let mut spec = LockSpec::new(Technique::SfllHd0, 4, 0);
    spec.pip = Some(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
    spec.key = Some(bits("1001"));
    let art = lock(&orig, &spec).unwrap();
    assert_eq!(art.protected_patterns, vec![bits("1001")]);
    let locked = fixtures::pf();
    assert!(check_equivalence(&locked.locked, &art.locked).unwrap().is_equivalent());
}

fn kg_artifact() -> psll::lock::LockArtifact {
    let orig = parse_bench(HOST).unwrap();
    let mut spec = LockSpec::new(Technique::AntiSat, 8, 0);
    spec.pip = Some((0..4).map(|i| format!("I{i}")).collect());
    spec.key = Some(bits("01101011"));
    lock(&orig, &spec).unwrap()
}

#[test]
fn anti_sat_reproduces_kg_gate_types() {
    let art = kg_artifact();
    let c = &art.locked;
    let kinds: Vec<GateKind> = c
        .key_inputs()
        .iter()
        .map(|k| c.gate(c.fanout(*k)[0]).kind)
        .collect();
    use GateKind::{Xnor, Xor};
    assert_eq!(kinds, vec![Xor, Xnor, Xnor, Xor, Xnor, Xor, Xnor, Xnor]);
    assert!(check_equivalence(&fixtures::kg().locked, c).unwrap().is_equivalent());
}

#[test]
fn anti_sat_correct_keys_share_one_mapping() {
    let art = kg_artifact();
    let keys = correct_key_set(&art, usize::MAX).unwrap();
    assert_eq!(keys.len(), 16);
    assert!(keys.contains(&bits("01101011")));
    for k in &keys {
        let m: Vec<bool> = (0..4).map(|i| k[i] ^ k[i + 4]).collect();
        assert_eq!(m, bits("1101"));
    }
    assert_eq!(art.mapping, bits("1101"));
}

#[test]
fn key_gate_family_has_half_key_many_correct_keys() {
    let orig = generate(&GenSpec::new("s", 60, 12, 4, 8));
    for t in [
        Technique::AntiSat,
        Technique::GenAntiSatComp,
        Technique::GenAntiSatNoncomp,
        Technique::Caslock,
        Technique::AntiSatDtl,
    ] {
        let art = lock(&orig, &LockSpec::new(t, 8, 1)).unwrap();
        let keys = correct_key_set(&art, usize::MAX).unwrap();
        if t != Technique::AntiSatDtl {
            assert_eq!(keys.len(), 16, "{t}");
        }
        for k in &keys {
            let m: Vec<bool> = (0..4).map(|i| k[i] ^ k[i + 4]).collect();
            if t != Technique::AntiSatDtl {
                assert_eq!(m, art.mapping, "{t}");
            }
        }
        assert!(keys.contains(&art.secret_key));
    }
}

#[test]
fn sarlock_has_a_unique_key_and_one_corrupted_pattern_per_wrong_key() {
    let orig = generate(&GenSpec::new("s", 60, 8, 4, 9));
    let art = lock(&orig, &LockSpec::new(Technique::Sarlock, 8, 2)).unwrap();
    let keys = correct_key_set(&art, usize::MAX).unwrap();
    assert_eq!(keys, vec![art.secret_key.clone()]);
    for m in 0..256u32 {
        let key: Vec<bool> = (0..8).map(|i| m >> i & 1 == 1).collect();
        if key == art.secret_key {
            continue;
        }
        let mut corrupted = 0;
        for x in 0..256u32 {
            let xs: Vec<bool> = (0..8).map(|i| x >> i & 1 == 1).collect();
            let mut full = xs.clone();
            full.extend_from_slice(&key);
            if eval(&orig, &xs).unwrap() != eval(&art.locked, &full).unwrap() {
                corrupted += 1;
            }
        }
        assert_eq!(corrupted, 1);
    }
}

#[test]
fn ece_corrupts_two_patterns_per_wrong_key() {
    let orig = generate(&GenSpec::new("s", 60, 8, 4, 9));
    let art = lock(&orig, &LockSpec::new(Technique::Ece, 8, 2)).unwrap();
    let mut key = art.secret_key.clone();
    key[3] = !key[3];
    let mut corrupted = 0;
    for x in 0..256u32 {
        let xs: Vec<bool> = (0..8).map(|i| x >> i & 1 == 1).collect();
        let mut full = xs.clone();
        full.extend_from_slice(&key);
        if eval(&orig, &xs).unwrap() != eval(&art.locked, &full).unwrap() {
            corrupted += 1;
        }
    }
    assert_eq!(corrupted, 2);
}

#[test]
fn flex_plants_distinct_patterns() {
    let art = lock(&host(), &LockSpec::new(Technique::SfllFlex, 16, 4)).unwrap();
    assert_eq!(art.protected_patterns.len(), 2);
    assert_ne!(art.protected_patterns[0], art.protected_patterns[1]);
    let mut spec = LockSpec::new(Technique::SfllFlex, 16, 4);
    spec.num_pp = Some(4);
    let art = lock(&host(), &spec).unwrap();
    assert_eq!(art.protected_patterns.len(), 4);
    assert_eq!(art.roles.pip.len(), 4);
}

#[test]
fn rejects_bad_specs() {
    let orig = host();
    assert!(matches!(lock(&orig, &LockSpec::new(Technique::Sarlock, 0, 0)), Err(LockError::KeySize(..))));
    assert!(matches!(lock(&orig, &LockSpec::new(Technique::AntiSat, 7, 0)), Err(LockError::KeySize(..))));
    assert!(matches!(
        lock(&orig, &LockSpec::new(Technique::SfllHd0, 64, 0)),
        Err(LockError::InsufficientInputs { .. })
    ));
    let art = lock(&orig, &LockSpec::new(Technique::AntiSat, 8, 0)).unwrap();
    assert!(lock(&art.locked, &LockSpec::new(Technique::AntiSat, 8, 0)).is_err());
}

#[test]
fn technique_names_round_trip() {
    for t in Technique::ALL {
        assert_eq!(t.name().parse::<Technique>().unwrap(), t);
        let j = serde_json::to_string(&t).unwrap();
        assert_eq!(j, format!("\"{}\"", t.name()));
    }
}

#[test]
fn locking_is_deterministic() {
    let orig = host();
    for t in Technique::ALL {
        let a = lock(&orig, &LockSpec::new(t, 16, 5)).unwrap();
        let b = lock(&orig, &LockSpec::new(t, 16, 5)).unwrap();
        assert!(a.locked.same_structure(&b.locked));
        assert_eq!(a.secret_key, b.secret_key);
    }
}
