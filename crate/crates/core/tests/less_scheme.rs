mod common;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zkfault_core::less::{keygen, sign, verify, LessPublicKey, LessSecretKey, LessSignature};
use zkfault_core::params::LessParams;
use zkfault_core::xof::Seed;

fn seed(rng: &mut ChaCha8Rng, len: usize) -> Seed {
    let mut b = vec![0u8; len];
    rng.fill_bytes(&mut b);
    Seed::new(b)
}

#[test]
fn scaled_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for name in ["less-small", "less-small-s4"] {
        let p = LessParams::by_name(name).unwrap();
        for _ in 0..5 {
            let (sk, pk) = keygen(&p, &seed(&mut rng, 16), &seed(&mut rng, 16)).unwrap();
            for _ in 0..10 {
                let msg = seed(&mut rng, 20);
                let sig = sign(&sk, msg.as_bytes(), &seed(&mut rng, 32));
                assert_eq!(verify(&pk, msg.as_bytes(), &sig), Ok(()));
                assert!(verify(&pk, b"different", &sig).is_err());
            }
        }
    }
}

#[test]
fn keys_and_signatures_survive_json() {
    let p = LessParams::by_name("less-small-s4").unwrap();
    let (sk, pk) = keygen(&p, &Seed::new(vec![1; 16]), &Seed::new(vec![2; 16])).unwrap();
    let sk2: LessSecretKey = serde_json::from_str(&serde_json::to_string(&sk).unwrap()).unwrap();
    let pk2: LessPublicKey = serde_json::from_str(&serde_json::to_string(&pk).unwrap()).unwrap();
    assert_eq!(pk2, pk);
    let sig = sign(&sk2, b"m", &Seed::new(vec![3; 32]));
    assert_eq!(sig, sign(&sk, b"m", &Seed::new(vec![3; 32])));
    let sig2: LessSignature = serde_json::from_str(&serde_json::to_string(&sig).unwrap()).unwrap();
    assert_eq!(verify(&pk2, b"m", &sig2), Ok(()));
}

#[test]
fn every_single_position_tamper_rejects() {
    let p = LessParams::by_name("less-small-s4").unwrap();
    let (sk, pk) = keygen(&p, &Seed::new(vec![5; 16]), &Seed::new(vec![6; 16])).unwrap();
    for i in 0..3u8 {
        let sig = sign(&sk, b"tamper", &Seed::new(vec![i; 32]));
        let doc = serde_json::to_value(&sig).unwrap();
        let sites = common::sites(&doc);
        assert!(sites.len() > 50);
        for site in &sites {
            let bad = common::tamper(&doc, site);
            let accepted = serde_json::from_value::<LessSignature>(bad)
                .map(|s| verify(&pk, b"tamper", &s).is_ok())
                .unwrap_or(false);
            assert!(!accepted, "tamper at {} accepted", site.describe());
        }
    }
}

#[test]
fn foreign_key_rejects() {
    let p = LessParams::by_name("less-small").unwrap();
    let (sk, _) = keygen(&p, &Seed::new(vec![1; 16]), &Seed::new(vec![2; 16])).unwrap();
    let (_, other) = keygen(&p, &Seed::new(vec![3; 16]), &Seed::new(vec![2; 16])).unwrap();
    let sig = sign(&sk, b"m", &Seed::new(vec![0; 32]));
    assert!(verify(&other, b"m", &sig).is_err());
}
