mod common;

use common::*;
use pge_core::experiment::PAGIE_GRAMMAR;
use pge_core::grammar::{parse_bnf, Pcfg};
use pge_core::mapper::{map_ge, map_pge, sentential_form};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ge_matches_recursive_interpreter_exhaustively() {
    let g = grammar(TWO_RULE_GRAMMAR);
    let genotypes = all_genotypes(8, 4);
    assert_eq!(genotypes.len(), 8 + 64 + 512 + 4096);
    for wraps in 0..=2 {
        for codons in &genotypes {
            let got = as_derivation(&map_ge(codons, &g, wraps));
            assert_eq!(
                got,
                oracle_ge(codons, &g, wraps),
                "genotype {codons:?}, wraps {wraps}"
            );
        }
    }
}

#[test]
fn ge_matches_interpreter_with_forced_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for text in [EXAMPLE_GE, PAGIE_GRAMMAR] {
        let g = grammar(text);
        for _ in 0..2000 {
            let len = rng.gen_range(1..30);
            let codons: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let wraps = rng.gen_range(0..3);
            assert_eq!(
                as_derivation(&map_ge(&codons, &g, wraps)),
                oracle_ge(&codons, &g, wraps)
            );
        }
    }
}

#[test]
fn pge_matches_interval_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grammars = [
        grammar(EXAMPLE_PGE),
        grammar(PAGIE_GRAMMAR),
        grammar(TWO_RULE_GRAMMAR),
    ];
    for i in 0..1000 {
        let g = grammars[i % grammars.len()].clone();
        let pcfg = if i % 4 == 0 {
            Pcfg::uniform(g)
        } else {
            random_pcfg(g, &mut rng)
        };
        let len = rng.gen_range(1..40);
        let codons: Vec<f64> = (0..len).map(|_| rng.gen()).collect();
        let wraps = rng.gen_range(0..3);
        assert_eq!(
            as_derivation(&map_pge(&codons, &pcfg, wraps)),
            oracle_pge(&codons, &pcfg, wraps),
            "codons {codons:?}"
        );
    }
}

#[test]
fn all_high_codons_take_last_alternatives() {
    let pcfg = Pcfg::uniform(grammar(EXAMPLE_PGE));
    let codons = [0.999; 10];
    let reference = oracle_pge(&codons, &pcfg, 0);
    let got = map_pge(&codons, &pcfg, 0);
    assert_eq!(as_derivation(&got), reference);
    assert_eq!(got.phenotype.as_deref(), Some("1.0"));
    assert_eq!(got.codons_used, 3);
    for c in &got.choices {
        assert_eq!(
            c.production + 1,
            pcfg.grammar().productions(c.nonterminal).len()
        );
    }
}

#[test]
fn single_codon_cannot_finish_modulo_example() {
    let g = grammar(EXAMPLE_GE);
    let r = map_ge(&[1], &g, 0);
    assert_eq!(as_derivation(&r), oracle_ge(&[1], &g, 0));
    assert!(r.phenotype.is_none());
    assert_eq!(sentential_form(&g, &r.choices), "<var>");
}

#[test]
fn mapping_is_deterministic() {
    let pcfg = Pcfg::uniform(grammar(PAGIE_GRAMMAR));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let ints: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
        let floats: Vec<f64> = (0..64).map(|_| rng.gen()).collect();
        assert_eq!(
            map_ge(&ints, pcfg.grammar(), 1),
            map_ge(&ints, pcfg.grammar(), 1)
        );
        assert_eq!(map_pge(&floats, &pcfg, 1), map_pge(&floats, &pcfg, 1));
    }
}

fn pagie_pcfg(seed: u64) -> Pcfg {
    let g = grammar(PAGIE_GRAMMAR);
    random_pcfg(g, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #[test]
    fn counters_account_for_every_expansion(
        codons in prop::collection::vec(any::<u8>(), 1..80),
        wraps in 0usize..3,
    ) {
        let g = parse_bnf(PAGIE_GRAMMAR).unwrap();
        let r = map_ge(&codons, &g, wraps);
        for nt in 0..g.len() {
            let expanded = r.choices.iter().filter(|c| c.nonterminal == nt).count() as u32;
            prop_assert_eq!(r.counters.expansions(nt), expanded);
        }
        let choice_points = r
            .choices
            .iter()
            .filter(|c| g.productions(c.nonterminal).len() > 1)
            .count();
        prop_assert_eq!(choice_points, r.codons_used);
    }

    #[test]
    fn pge_reads_one_codon_per_expansion(
        codons in prop::collection::vec(0.0f64..1.0, 1..80),
        seed in any::<u64>(),
    ) {
        let pcfg = pagie_pcfg(seed);
        let r = map_pge(&codons, &pcfg, 0);
        prop_assert_eq!(r.choices.len(), r.codons_used);
        let total: u32 = (0..pcfg.grammar().len()).map(|nt| r.counters.expansions(nt)).sum();
        prop_assert_eq!(total as usize, r.choices.len());
    }

    #[test]
    fn moving_a_codon_inside_its_interval_changes_nothing(
        codons in prop::collection::vec(0.0f64..1.0, 1..60),
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
        t in 0.0f64..1.0,
    ) {
        let pcfg = pagie_pcfg(seed);
        let before = map_pge(&codons, &pcfg, 0);
        prop_assume!(before.codons_used > 0);
        let step = pick.index(before.codons_used);
        let choice = before.choices[step];
        let probs = pcfg.probs(choice.nonterminal);
        let lo: f64 = probs[..choice.production].iter().sum();
        let hi: f64 = probs[..=choice.production].iter().sum();
        prop_assume!(hi > lo && codons[step] < hi);
        let moved = (lo + t * (hi - lo)).min(f64::from_bits(hi.to_bits() - 1)).max(lo);
        let mut perturbed = codons.clone();
        perturbed[step] = moved;
        prop_assert_eq!(map_pge(&perturbed, &pcfg, 0), before);
    }
}
