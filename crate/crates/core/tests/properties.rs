use proptest::prelude::*;

use psll::attack::{attack, key_mapping, AttackOptions, Bin, EntryGate};
use psll::gen::{generate, GenSpec};
use psll::lock::{lock, LockSpec, Technique};
use psll::netlist::{emit_bench, parse_bench_named};
use psll::resynth::{remap_standard, sweep, Recipe};
use psll::sat::{check_equivalence, substitute_key};
use psll::sim::{eval, Oracle, Ternary, TernaryPattern};

fn ternary() -> impl Strategy<Value = Ternary> {
    prop_oneof![Just(Ternary::Zero), Just(Ternary::One), Just(Ternary::X)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bench_round_trip(seed in 0u64..10_000, inputs in 2usize..12, gates in 1usize..60) {
        let c = generate(&GenSpec::new("p", gates, inputs, 1 + gates % 4, seed));
        let back = parse_bench_named(&emit_bench(&c), c.name()).unwrap();
        prop_assert!(c.same_structure(&back));
        prop_assert_eq!(emit_bench(&back), emit_bench(&c));
    }

    #[test]
    fn recipes_preserve_function(seed in 0u64..10_000, inputs in 2usize..10, gates in 4usize..80) {
        let c = generate(&GenSpec::new("p", gates, inputs, 2, seed));
        for r in [Recipe::Light, Recipe::Medium, Recipe::Heavy] {
            prop_assert!(check_equivalence(&c, &r.apply(&c)).unwrap().is_equivalent(), "{}", r.name());
        }
        prop_assert!(check_equivalence(&c, &remap_standard(&c)).unwrap().is_equivalent());
    }

    #[test]
    fn sweep_is_idempotent(seed in 0u64..10_000, inputs in 2usize..10, gates in 4usize..80) {
        let c = generate(&GenSpec::new("p", gates, inputs, 2, seed));
        let once = sweep(&c);
        prop_assert!(sweep(&once).same_structure(&once));
    }

    #[test]
    fn ternary_pattern_string_round_trip(v in prop::collection::vec(ternary(), 0..40)) {
        let p = TernaryPattern(v);
        let back: TernaryPattern = p.to_string().parse().unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(p.count_x() == 0, p.to_bools().is_some());
    }

    #[test]
    fn planted_key_restores_and_simulation_agrees(seed in 0u64..1000, t in 0usize..14) {
        let t = Technique::ALL[t];
        let host = generate(&GenSpec::new("h", 80, 20, 4, 500 + seed));
        let art = lock(&host, &LockSpec::new(t, 16, seed)).unwrap();
        let unlocked = substitute_key(&art.locked, &TernaryPattern::from_bools(&art.secret_key)).unwrap();
        prop_assert!(check_equivalence(&host, &unlocked).unwrap().is_equivalent());
        let xs: Vec<bool> = (0..20).map(|i| (seed >> (i % 10)) & 1 == 1).collect();
        let mut full = xs.clone();
        full.extend_from_slice(&art.secret_key);
        prop_assert_eq!(eval(&host, &xs).unwrap(), eval(&art.locked, &full).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn oracle_attack_returns_a_correct_key(seed in 0u64..1000, t in 0usize..14) {
        let t = Technique::ALL[t];
        let host = generate(&GenSpec::new("h", 120, 24, 6, 900 + seed));
        let art = lock(&host, &LockSpec::new(t, 16, seed)).unwrap();
        let oracle = Oracle::with_key(art.locked.clone(), art.secret_key.clone());
        let opts = AttackOptions { num_pp: art.spec.effective_num_pp(), ..AttackOptions::default() };
        let out = attack(&art.locked, Some(&oracle), &opts).unwrap();
        let k = out.key.to_bools().unwrap();
        let unlocked = substitute_key(&art.locked, &TernaryPattern::from_bools(&k)).unwrap();
        prop_assert!(check_equivalence(&host, &unlocked).unwrap().is_equivalent());
        for (i, s) in out.structural.0.iter().enumerate() {
            if let Some(b) = s.to_bool() {
                prop_assert_eq!(Some(b), out.key.get(i).to_bool());
            }
        }
    }
}

#[test]
fn key_mapping_flips_with_each_attribute() {
    for bin in [Bin::One, Bin::Two] {
        for gate in [EntryGate::Xor, EntryGate::Xnor] {
            for inv in [false, true] {
                let b = key_mapping(bin, gate, inv);
                assert_ne!(b, key_mapping(bin, gate, !inv));
                let other_gate = if gate == EntryGate::Xor { EntryGate::Xnor } else { EntryGate::Xor };
                assert_ne!(b, key_mapping(bin, other_gate, inv));
                let other_bin = if bin == Bin::One { Bin::Two } else { Bin::One };
                assert_ne!(b, key_mapping(other_bin, gate, inv));
            }
        }
    }
}
