mod common;

use psll::atpg::{count_activations, generate_test_patterns, AtpgOptions, Engine, Fault};
use psll::fixtures;
use psll::gen::{generate, GenSpec};
use psll::netlist::Circuit;
use proptest::prelude::*;

fn fault(c: &Circuit, net: &str, sa: bool) -> Fault {
    Fault::new(c.net(net).unwrap(), sa)
}

#[test]
fn nor_probe_nand_input_pattern() {
    let c = fixtures::parse(fixtures::NOR_PROBE);
    let r = generate_test_patterns(&c, fault(&c, "n1", false), &AtpgOptions::new(1));
    assert_eq!(r.cubes.len(), 1);
    assert_eq!(&r.cubes[0].to_string()[..4], "1100");
}

#[test]
fn pf_n2_single_pattern() {
    let c = fixtures::parse(fixtures::PF_PERTURBED);
    let r = generate_test_patterns(&c, fault(&c, "n2", false), &AtpgOptions::new(2));
    assert!(r.complete);
    let got: Vec<String> = r.cubes.iter().map(|p| p.to_string()).collect();
    assert_eq!(got, vec!["1001x"]);
}

#[test]
fn pf_n1_pattern() {
    let c = fixtures::parse(fixtures::PF_PERTURBED);
    let r = generate_test_patterns(&c, fault(&c, "n1", false), &AtpgOptions::new(2));
    let got: Vec<String> = r.cubes.iter().map(|p| p.to_string()).collect();
    assert_eq!(got, vec!["1x01x"]);
}

#[test]
fn pf_merged_n1_pattern() {
    let c = fixtures::parse(fixtures::PF_MERGED_PERTURBED);
    let r = generate_test_patterns(&c, fault(&c, "n1", false), &AtpgOptions::new(2));
    let got: Vec<String> = r.cubes.iter().map(|p| p.to_string()).collect();
    assert_eq!(got, vec!["00x0x"]);
}

#[test]
fn activation_counts_on_pf() {
    let c = fixtures::parse(fixtures::PF_PERTURBED);
    assert_eq!(count_activations(&c, c.net("n2").unwrap(), true, 1 << 20).value, 1);
    assert_eq!(count_activations(&c, c.net("n0").unwrap(), true, 1 << 20).value, 2);
}

#[test]
fn activation_counts_partition_startpoints() {
    let c = generate(&GenSpec::new("p", 60, 10, 4, 3));
    for n in c.net_ids() {
        let s = c.startpoints(n).unwrap().len() as u32;
        let z = count_activations(&c, n, false, u128::MAX).value;
        let o = count_activations(&c, n, true, u128::MAX).value;
        assert_eq!(z + o, 1u128 << s, "{}", c.net_name(n));
    }
}

#[test]
fn activation_counts_match_brute_force() {
    let c = generate(&GenSpec::new("p", 50, 8, 3, 11));
    let vals = common::sim_all(&c, None);
    for n in c.net_ids() {
        let s = c.startpoints(n).unwrap().len() as u32;
        let ones: u32 = vals[n.index()].iter().map(|w| w.count_ones()).sum();
        let scale = 1u128 << (c.num_ports() as u32 - s);
        assert_eq!(count_activations(&c, n, true, u128::MAX).value * scale, ones as u128);
    }
}

#[test]
fn podem_and_sat_engines_agree_with_brute_force() {
    for seed in 0..6 {
        let c = generate(&GenSpec::new("r", 30, 7, 3, 100 + seed));
        let mut opts = AtpgOptions::new(1 << 12);
        common::atpg_matches_brute_force(&c, &opts).unwrap();
        opts.engine = Engine::Sat;
        common::atpg_matches_brute_force(&c, &opts).unwrap();
    }
}

#[test]
fn decision_budget_falls_back_to_sat() {
    let c = generate(&GenSpec::new("r", 40, 9, 3, 7));
    let mut opts = AtpgOptions::new(1 << 12);
    opts.max_decisions = 3;
    let mut fallbacks = 0;
    for n in c.net_ids() {
        for sa in [false, true] {
            let f = Fault::new(n, sa);
            let r = generate_test_patterns(&c, f, &opts);
            fallbacks += r.used_fallback as usize;
            assert!(r.complete);
            common::compare_cubes(&c, f, &r.cubes).unwrap();
        }
    }
    assert!(fallbacks > 0);
}

#[test]
fn budget_limited_results_are_flagged() {
    let c = fixtures::parse(fixtures::NOR_PROBE);
    let r = generate_test_patterns(&c, fault(&c, "n2", true), &AtpgOptions::new(1));
    assert_eq!(r.cubes.len(), 1);
    assert!(!r.complete);
}

#[test]
fn deterministic_pattern_lists() {
    let c = generate(&GenSpec::new("r", 60, 10, 4, 5));
    for n in c.net_ids().take(20) {
        let f = Fault::new(n, true);
        let a = generate_test_patterns(&c, f, &AtpgOptions::new(5));
        let b = generate_test_patterns(&c, f, &AtpgOptions::new(5));
        assert_eq!(a, b);
    }
}

#[test]
fn cubes_are_maximally_lifted() {
    let c = generate(&GenSpec::new("r", 40, 8, 3, 21));
    for n in c.net_ids() {
        let f = Fault::new(n, false);
        let r = generate_test_patterns(&c, f, &AtpgOptions::new(1));
        let Some(cube) = r.cubes.first() else { continue };
        let set = common::detecting_set(&c, f);
        for i in 0..cube.width() {
            if cube.get(i).is_x() {
                continue;
            }
            let mut wider = cube.clone();
            wider.set(i, psll::sim::Ternary::X);
            let all = wider.completions().all(|m| set[common::minterm_index(&m)]);
            assert!(!all, "bit {i} of {cube} could be lifted");
        }
    }
}

#[test]
fn shipped_locked_fixtures_are_testable() {
    for f in fixtures::locked_fixtures() {
        let bad = common::untestable_faults(&f.locked);
        assert!(bad.is_empty(), "{}: {:?}", f.name, bad);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn emitted_cubes_detect_on_every_completion(seed in 0u64..1000, inputs in 3usize..9) {
        let c = generate(&GenSpec::new("p", 3 * inputs, inputs, 2, seed));
        prop_assert!(common::atpg_matches_brute_force(&c, &AtpgOptions::new(1 << 10)).is_ok());
    }
}

#[test]
fn lifted_cube_overlapping_a_sibling_piece_keeps_the_remainder() {
    let c = generate(&GenSpec::new("r", 18, 6, 3, 9002));
    common::atpg_matches_brute_force(&c, &AtpgOptions::new(1 << 12)).unwrap();
}
