mod common;

use std::collections::BTreeSet;

use common::*;
use kcdb::circuit::{classify, condition, read_nnf, smooth, write_nnf, PartialValuation, Valuation, Var, VarSet};
use kcdb::queries::{
    best_valuation, count_by_cardinality, enumerate, model_count, prepare_for_counting, satisfiable, witness, wmc,
    Counting, MaxTimes, Models, RationalSemiring, Sampler,
};
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn counting_matches_truth_table(seed in any::<u64>(), n in 1usize..=10) {
        let c = random_dnnf(&mut rng(seed), n, true);
        let ms = models(&c);
        let p = prepare_for_counting(&c).unwrap();
        prop_assert_eq!(model_count(&p).unwrap(), BigUint::from(ms.len()));
        let mut hist = vec![BigUint::from(0u32); n + 1];
        for nu in &ms {
            hist[nu.hamming_weight()] += 1u32;
        }
        prop_assert_eq!(count_by_cardinality(&p).unwrap(), hist);
        let ones = kcdb::queries::WeightMap::uniform(c.universe(), BigUint::from(1u32), BigUint::from(1u32));
        prop_assert_eq!(wmc(&p, &ones, &Counting).unwrap(), BigUint::from(ms.len()));
    }

    #[test]
    fn wmc_matches_truth_table(seed in any::<u64>(), n in 1usize..=10) {
        let mut g = rng(seed);
        let c = random_dnnf(&mut g, n, true);
        let w = random_weights(&mut g, c.universe());
        let p = prepare_for_counting(&c).unwrap();
        prop_assert_eq!(wmc(&p, &w, &RationalSemiring).unwrap(), wmc_oracle(&c, &w));
    }

    #[test]
    fn enumeration_is_exact_and_duplicate_free(seed in any::<u64>(), n in 1usize..=10, det in any::<bool>()) {
        let c = random_dnnf(&mut rng(seed), n, det);
        let mut seen = Vec::new();
        enumerate(&c, |nu| seen.push(nu.clone())).unwrap();
        let set: BTreeSet<Valuation> = seen.iter().cloned().collect();
        prop_assert_eq!(set.len(), seen.len());
        prop_assert_eq!(set, models(&c));
        prop_assert_eq!(Models::new(&c).unwrap().is_fast_path(), c.is_certified_deterministic());
    }

    #[test]
    fn best_valuation_is_a_maximum(seed in any::<u64>(), n in 1usize..=9, det in any::<bool>()) {
        let mut g = rng(seed);
        let c = smooth(&random_dnnf(&mut g, n, det)).unwrap();
        let w = random_weights(&mut g, c.universe());
        let ms = models(&c);
        match best_valuation(&c, &w) {
            Ok((nu, weight)) => {
                prop_assert!(c.eval(&nu));
                prop_assert_eq!(&weight_of(&nu, &w), &weight);
                prop_assert_eq!(Some(weight), ms.iter().map(|m| weight_of(m, &w)).max());
            }
            Err(_) => prop_assert!(ms.is_empty()),
        }
        if c.is_certified_deterministic() {
            let max = wmc(&prepare_for_counting(&c).unwrap(), &w, &MaxTimes).unwrap();
            prop_assert_eq!(max, ms.iter().map(|m| weight_of(m, &w)).max().unwrap_or_default());
        }
    }

    #[test]
    fn sat_and_witness(seed in any::<u64>(), n in 1usize..=10, det in any::<bool>()) {
        let c = random_dnnf(&mut rng(seed), n, det);
        let ms = models(&c);
        prop_assert_eq!(satisfiable(&c).unwrap(), !ms.is_empty());
        match witness(&c).unwrap() {
            Some(nu) => prop_assert!(ms.contains(&nu)),
            None => prop_assert!(ms.is_empty()),
        }
    }

    #[test]
    fn nnf_round_trip_is_byte_identical(seed in any::<u64>(), n in 1usize..=10, det in any::<bool>()) {
        let c = random_dnnf(&mut rng(seed), n, det);
        let text = write_nnf(&c).unwrap();
        let back = read_nnf(&text).unwrap();
        prop_assert_eq!(write_nnf(&back).unwrap(), text);
        prop_assert_eq!(models(&back), models(&c));
    }

    #[test]
    fn conditioning_fixes_variables(seed in any::<u64>(), n in 2usize..=10) {
        let mut g = rng(seed);
        let c = random_dnnf(&mut g, n, true);
        let mut pairs = Vec::new();
        for v in 0..n as u32 {
            if g.gen_bool(0.4) {
                pairs.push((Var(v), g.gen()));
            }
        }
        let fixed: PartialValuation = pairs.into_iter().collect();
        let cc = condition(&c, &fixed);
        for nu in all_valuations(c.universe()) {
            let agrees = nu.iter().all(|(v, b)| fixed.get(v).is_none_or(|f| f == b));
            if agrees {
                prop_assert_eq!(cc.eval(&nu), c.eval(&nu));
            }
        }
        prop_assert!(classify(&cc, None).is_dnnf());
    }

    #[test]
    fn smoothing_preserves_the_function(seed in any::<u64>(), n in 1usize..=10, det in any::<bool>()) {
        let c = random_dnnf(&mut rng(seed), n, det);
        let s = smooth(&c).unwrap();
        prop_assert!(s.properties().is_smooth);
        prop_assert_eq!(models(&s), models(&c));
        prop_assert!(classify(&s, None).is_dnnf());
    }

    #[test]
    fn samples_are_models(seed in any::<u64>(), n in 1usize..=10) {
        let mut g = rng(seed);
        let c = random_dnnf(&mut g, n, true);
        let p = prepare_for_counting(&c).unwrap();
        let ms = models(&c);
        match Sampler::new(&p) {
            Ok(s) if !ms.is_empty() => {
                prop_assert_eq!(s.total(), BigUint::from(ms.len()));
                for _ in 0..20 {
                    prop_assert!(ms.contains(&s.sample(&mut g).unwrap()));
                }
            }
            Ok(s) => prop_assert!(s.sample(&mut g).is_err()),
            Err(e) => prop_assert!(false, "sampler rejected a decision circuit: {e}"),
        }
    }

    #[test]
    fn decision_circuits_classify_as_deterministic(seed in any::<u64>(), n in 1usize..=10) {
        let c = random_dnnf(&mut rng(seed), n, true);
        let r = classify(&c, None);
        prop_assert!(r.is_d_dnnf());
        if let Some(order) = &r.obdd_order {
            prop_assert_eq!(order.iter().copied().collect::<VarSet>().len(), order.len());
        }
    }
}

#[test]
fn sampling_frequencies_are_uniform() {
    // x2 ∧ ¬(x1 ∧ x3) with a free x4: 6 models.
    let text = "nnf 7 6 4\nL -1\nL 1\nL -3\nA 2 1 2\nO 1 2 0 3\nL 2\nA 2 5 4\n";
    let c = read_nnf(text).unwrap();
    let p = prepare_for_counting(&c).unwrap();
    let s = Sampler::new(&p).unwrap();
    let ms: Vec<Valuation> = models(&c).into_iter().collect();
    assert_eq!(ms.len(), 6);
    let mut g = rng(11);
    let mut counts = vec![0u32; ms.len()];
    let draws = 12_000;
    for _ in 0..draws {
        let nu = s.sample(&mut g).unwrap();
        counts[ms.iter().position(|m| *m == nu).unwrap()] += 1;
    }
    let expected = draws as f64 / 6.0;
    let chi2: f64 = counts.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    // 5 degrees of freedom, α = 0.001.
    assert!(chi2 < 20.515, "χ² = {chi2}, counts {counts:?}");
}

#[test]
fn weights_must_cover_the_universe() {
    let c = random_dnnf(&mut rng(3), 4, true);
    let mut w = kcdb::queries::WeightMap::<BigRational>::new();
    w.set(Var(0), r(1, 2), r(1, 2));
    assert!(wmc(&prepare_for_counting(&c).unwrap(), &w, &RationalSemiring).is_err());
}
