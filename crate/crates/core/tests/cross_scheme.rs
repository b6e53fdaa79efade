mod common;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zkfault_core::cross::{
    cross_check_response, cross_keygen, cross_sign, CrossParams, CrossPublicKey, CrossSecretKey,
    CrossSignature,
};
use zkfault_core::xof::Seed;

fn seed(rng: &mut ChaCha8Rng, len: usize) -> Seed {
    let mut b = vec![0u8; len];
    rng.fill_bytes(&mut b);
    Seed::new(b)
}

#[test]
fn round_trips() {
    let p = CrossParams::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let (sk, pk) = cross_keygen(&p, &seed(&mut rng, 16)).unwrap();
        for _ in 0..10 {
            let msg = seed(&mut rng, 12);
            let sig = cross_sign(&sk, msg.as_bytes(), &seed(&mut rng, 32));
            assert_eq!(cross_check_response(&pk, msg.as_bytes(), &sig), Ok(()));
        }
    }
}

#[test]
fn json_forms() {
    let (sk, pk) = cross_keygen(&CrossParams::desk(), &Seed::new(vec![4; 16])).unwrap();
    let sk2: CrossSecretKey = serde_json::from_str(&serde_json::to_string(&sk).unwrap()).unwrap();
    let pk2: CrossPublicKey = serde_json::from_str(&serde_json::to_string(&pk).unwrap()).unwrap();
    let sig = cross_sign(&sk2, b"m", &Seed::new(vec![1; 32]));
    let sig2: CrossSignature = serde_json::from_str(&serde_json::to_string(&sig).unwrap()).unwrap();
    assert_eq!(cross_check_response(&pk2, b"m", &sig2), Ok(()));
    let mut bad = serde_json::to_value(&sk).unwrap();
    bad["e"]["exps"][0] = serde_json::Value::from(7);
    assert!(serde_json::from_value::<CrossSecretKey>(bad).is_err());
}

#[test]
fn every_single_position_tamper_rejects() {
    let (sk, pk) = cross_keygen(&CrossParams::desk(), &Seed::new(vec![8; 16])).unwrap();
    let sig = cross_sign(&sk, b"t", &Seed::new(vec![2; 32]));
    let doc = serde_json::to_value(&sig).unwrap();
    for site in &common::sites(&doc) {
        let accepted = serde_json::from_value::<CrossSignature>(common::tamper(&doc, site))
            .map(|s| cross_check_response(&pk, b"t", &s).is_ok())
            .unwrap_or(false);
        assert!(!accepted, "tamper at {} accepted", site.describe());
    }
}
