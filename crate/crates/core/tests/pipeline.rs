use num_bigint::BigUint;
use proptest::prelude::*;

use corrseq::correlation::{corr_brute, corr_factorized, BruteOptions};
use corrseq::eta::sample_eta;
use corrseq::radix::sigma_enumerate;
use corrseq::rng::RngKind;
use corrseq::sparsity::enumerate_s;
use corrseq::{EtaAssignment, RadixBasis};

fn basis() -> RadixBasis {
    RadixBasis::default_shifted(20).unwrap()
}

#[test]
fn sampled_eta_survives_json() {
    let b = basis();
    let set = enumerate_s(&b, b.prefix(6)).unwrap();
    let eta = sample_eta(RngKind::ChaCha8, 42, &set);
    let back = EtaAssignment::from_json(&b, &eta.to_json(&b).unwrap()).unwrap();
    assert_eq!(eta, back);
    assert_eq!(back.len(), set.len());
}

#[test]
fn every_sumset_element_recovers_its_pair() {
    let b = basis();
    let set = enumerate_s(&b, b.prefix(10)).unwrap();
    for (s, pair) in set.iter() {
        assert_eq!(b.recover_pair(s), Some(pair));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brute_matches_factorized_on_sampled_eta(seed in any::<u64>(), idx in 0usize..3) {
        let b = basis();
        let set = enumerate_s(&b, b.prefix(3)).unwrap();
        let eta = sample_eta(RngKind::ChaCha8, seed, &set);
        let y = &sigma_enumerate(3)[idx];
        let d: BigUint = b.sigma_value(y).unwrap();
        let brute = corr_brute(&b, 3, &d, &eta, BruteOptions::default()).unwrap();
        let fact = corr_factorized(&b, 3, &d, &eta).unwrap();
        prop_assert_eq!(brute.value, fact.value);
    }
}
