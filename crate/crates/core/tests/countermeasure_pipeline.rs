use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zkfault_core::countermeasures::{
    cost_formula, cost_report, equivalent_on_mask, resistance_probe, sign_with_pipeline, Pipeline,
};
use zkfault_core::less::{keygen, sign, verify};
use zkfault_core::params::LessParams;
use zkfault_core::seedtree::{compute_seeds_to_publish, Digest};
use zkfault_core::xof::Seed;

#[test]
fn both_pipelines_sign_identically_and_verify() {
    for name in ["less-small", "less-small-s4"] {
        let p = LessParams::by_name(name).unwrap();
        let (sk, pk) = keygen(&p, &Seed::new(vec![4; 16]), &Seed::new(vec![5; 16])).unwrap();
        for i in 0..20u8 {
            let rng = Seed::new(vec![i; 32]);
            let a = sign_with_pipeline(&sk, b"cm", &rng, Pipeline::Original);
            let b = sign_with_pipeline(&sk, b"cm", &rng, Pipeline::Countermeasure);
            assert_eq!(a, b);
            assert_eq!(a, sign(&sk, b"cm", &rng));
            assert_eq!(verify(&pk, b"cm", &b), Ok(()));
        }
    }
}

#[test]
fn full_size_masks_are_equivalent_and_counted() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for p in LessParams::table() {
        let l2 = p.l2();
        for _ in 0..20 {
            let mut d = vec![0u8; p.t];
            let mut placed = 0;
            while placed < p.w {
                let i = rng.gen_range(0..p.t);
                if d[i] == 0 {
                    d[i] = rng.gen_range(1..p.s) as u8;
                    placed += 1;
                }
            }
            let d = Digest::new(d, p.s).unwrap();
            assert!(equivalent_on_mask(&d.mask(), l2), "{}", p.name);
            let r = compute_seeds_to_publish(&d.mask(), l2)
                .published_nodes()
                .len();
            for pipe in [Pipeline::Original, Pipeline::Countermeasure] {
                assert_eq!(
                    cost_report(pipe, &d, l2),
                    cost_formula(pipe, p.t, p.w, r, l2),
                    "{} {pipe}",
                    p.name
                );
            }
        }
    }
}

#[test]
fn probe_separates_the_pipelines() {
    assert_eq!(
        resistance_probe(Pipeline::Countermeasure, 4, 3, 3).violations,
        0
    );
    assert!(resistance_probe(Pipeline::Original, 4, 3, 3).violations > 0);
}
