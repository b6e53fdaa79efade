//! Fault detection and one-shot key recovery for CROSS.
//!
//! CROSS marks published subtrees with 1, so the reference tree is the
//! complement of the LESS one and a 0→1 flip on `y[node]` is the LESS
//! `x[node] := 0` fault. Layouts are computed on the LESS side with the
//! hidden-round mask.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::attack_less::{
    random_seed, summarize, trial_rng, validate_campaign, AttackError, CampaignConfig,
    CampaignMode, CampaignOutput, CampaignRow, Detection, TrialResult,
};
use crate::cross::{
    check_with_layout, cross_assemble, cross_challenges, cross_commit, cross_keygen, group_apply,
    hidden_mask, round_vectors, syndrome, CrossParams, CrossPublicKey, CrossSecretKey,
    CrossSignature, RestrictedVector,
};
use crate::fault::{
    classify_mask, faulted_disclosure, honest_disclosure, Disclosure, FaultClass, FaultError,
    FaultModel, FaultSpec,
};
use crate::seedtree::{compute_seeds_to_publish, leaf_span, node_count, regenerate_at, Digest};
use crate::xof::{sample_fixed_weight_digest, Seed};

/// A 0→1 flip of `y[node]`, landing with probability `p_success`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossFaultSpec {
    pub node: usize,
    pub p_success: f64,
}

impl CrossFaultSpec {
    pub fn validate(&self, l2: usize) -> Result<(), FaultError> {
        self.as_less().validate(l2)
    }

    fn as_less(&self) -> FaultSpec {
        FaultSpec {
            model: FaultModel::StuckAtZero,
            node: self.node,
            p_success: self.p_success,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrossFaultTruth {
    pub b: Digest,
    pub disclosure: Disclosure,
}

#[derive(Clone, Debug)]
pub struct CrossFaultOutcome {
    pub injected: bool,
    pub class: FaultClass,
    pub signature: CrossSignature,
    truth: CrossFaultTruth,
}

impl CrossFaultOutcome {
    pub fn truth(&self) -> &CrossFaultTruth {
        &self.truth
    }
}

pub fn faulted_cross_sign<R: Rng + ?Sized>(
    sk: &CrossSecretKey,
    msg: &[u8],
    spec: &CrossFaultSpec,
    rng: &Seed,
    injector: &mut R,
) -> Result<CrossFaultOutcome, FaultError> {
    let l2 = sk.params.l2();
    spec.validate(l2)?;
    let injected = injector.gen_bool(spec.p_success);
    let tr = cross_commit(sk, msg, rng);
    let f = tr.hidden_mask();
    let (disclosure, class) = if injected {
        (
            faulted_disclosure(&f, l2, FaultModel::StuckAtZero, spec.node),
            classify_mask(&f, l2, spec.node, FaultModel::StuckAtZero),
        )
    } else {
        (honest_disclosure(&f, l2), FaultClass::NotInjected)
    };
    let signature = cross_assemble(&tr, &disclosure.published);
    Ok(CrossFaultOutcome {
        injected,
        class,
        signature,
        truth: CrossFaultTruth {
            b: tr.b,
            disclosure,
        },
    })
}

fn faulted_layout(b: &Digest, l2: usize, node: usize) -> Option<Vec<usize>> {
    let x = compute_seeds_to_publish(&hidden_mask(b), l2);
    if !x.get(node) {
        return None;
    }
    let xf = x.with_forced(node, false);
    xf.get(0).then(|| xf.published_nodes())
}

/// Detector verdict; an accept carries a secret already checked against `s`.
pub fn detect_cross(
    sig: &CrossSignature,
    pk: &CrossPublicKey,
    msg: &[u8],
    node: usize,
) -> Detection {
    let p = &pk.params;
    let l2 = p.l2();
    if node >= node_count(l2) {
        return Detection::BadNode;
    }
    if sig.f_list.len() != p.t - p.w_reveal {
        return Detection::Inconsistent;
    }
    let (_, b) = cross_challenges(pk, msg, sig);
    let x = compute_seeds_to_publish(&hidden_mask(&b), l2);
    if !x.get(node) {
        return Detection::NodeClear;
    }
    let xf = x.with_forced(node, false);
    if !xf.get(0) {
        return Detection::RootCleared;
    }
    let layout = xf.published_nodes();
    if layout.len() != sig.seed_path.len() {
        return Detection::SizeMismatch {
            expected: layout.len(),
            received: sig.seed_path.len(),
        };
    }
    if check_with_layout(pk, msg, sig, &layout).is_err() {
        return Detection::Inconsistent;
    }
    match recover_secret_cross(sig, pk, msg, node) {
        Ok(_) => Detection::Accept,
        Err(_) => Detection::Inconsistent,
    }
}

pub fn detect_effective_cross(
    sig: &CrossSignature,
    pk: &CrossPublicKey,
    msg: &[u8],
    node: usize,
) -> bool {
    detect_cross(sig, pk, msg, node) == Detection::Accept
}

/// `e = σ(i)(e'(i))` for the first hidden round whose seed leaked under `node`.
pub fn recover_secret_cross(
    sig: &CrossSignature,
    pk: &CrossPublicKey,
    msg: &[u8],
    node: usize,
) -> Result<RestrictedVector, AttackError> {
    let p = &pk.params;
    let l2 = p.l2();
    if node >= node_count(l2) {
        return Err(AttackError::Malformed(format!("node {node}")));
    }
    let (_, b) = cross_challenges(pk, msg, sig);
    let layout = faulted_layout(&b, l2, node).ok_or(AttackError::NoLeakedRound)?;
    let leaves = regenerate_at(&sig.seed_path, &layout, &sig.salt, l2, p.t)
        .map_err(|e| AttackError::Malformed(e.to_string()))?;
    let hidden: Vec<usize> = (0..p.t).filter(|&i| b.entries()[i] == 0).collect();
    let (lo, hi) = leaf_span(node, l2);
    let (k, i) = hidden
        .iter()
        .enumerate()
        .find(|(_, &i)| i >= lo && i < hi && leaves.contains_key(&i))
        .ok_or(AttackError::NoLeakedRound)?;
    let sigma = &sig
        .f_list
        .get(k)
        .ok_or_else(|| AttackError::Malformed("response list".into()))?
        .sigma;
    let g = p.group();
    if sigma.n() != p.n || !sigma.is_valid(&g) {
        return Err(AttackError::Malformed(format!("sigma of round {i}")));
    }
    let (_, e_prime) = round_vectors(p, &leaves[i]);
    let e = group_apply(&g, sigma, &e_prime.values(&g))
        .map_err(|e| AttackError::Malformed(e.to_string()))?;
    let e = RestrictedVector::from_values(&g, &e).ok_or(AttackError::PublicKeyMismatch)?;
    if syndrome(&g, &pk.h, &e) != pk.s {
        return Err(AttackError::PublicKeyMismatch);
    }
    Ok(e)
}

/// CROSS campaign; the fault model is always the 0→1 flag flip.
pub fn run_cross_campaign(
    params: &CrossParams,
    cfg: &CampaignConfig,
) -> Result<CampaignOutput, AttackError> {
    params
        .validate()
        .map_err(|e| AttackError::Malformed(e.to_string()))?;
    let cfg = CampaignConfig {
        model: FaultModel::StuckAtZero,
        ..cfg.clone()
    };
    validate_campaign(&cfg, params.l2())?;
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| match cfg.mode {
            CampaignMode::DigestOnly => Ok(digest_only_trial(params, &cfg, trial)),
            CampaignMode::Full => full_trial(params, &cfg, trial),
        })
        .collect::<Result<Vec<_>, _>>()?;
    summarize("cross", &params.name, &cfg, results)
}

fn row(trial: usize, injected: bool, class: FaultClass, done: bool) -> CampaignRow {
    CampaignRow {
        trial,
        injected,
        class,
        n_recovered_this_trial: usize::from(done),
        cumulative_secrets: usize::from(done),
        done,
    }
}

fn digest_only_trial(params: &CrossParams, cfg: &CampaignConfig, trial: usize) -> TrialResult {
    let mut rng = trial_rng(&cfg.master_seed, trial, b"scheme");
    let mut inj = trial_rng(&cfg.master_seed, trial, b"inject");
    let mut out = TrialResult::default();
    while !out.complete && (out.attempts as usize) < cfg.max_attempts {
        out.attempts += 1;
        let mut input = vec![0u8; params.hash_bytes()];
        rng.fill_bytes(&mut input);
        let b = sample_fixed_weight_digest(&input, params.t, params.w_reveal, 2)
            .expect("validated parameters");
        let injected = inj.gen_bool(cfg.p_success);
        let class = if injected {
            out.injections += 1;
            classify_mask(
                &hidden_mask(&b),
                params.l2(),
                cfg.node,
                FaultModel::StuckAtZero,
            )
        } else {
            FaultClass::NotInjected
        };
        if class == FaultClass::Effective {
            out.effective += 1;
            out.x_sum += 1;
            out.x_sq_sum += 1;
            out.complete = true;
        }
        if cfg.record_rows {
            out.rows.push(row(trial, injected, class, out.complete));
        }
    }
    out
}

fn full_trial(
    params: &CrossParams,
    cfg: &CampaignConfig,
    trial: usize,
) -> Result<TrialResult, AttackError> {
    let mut rng = trial_rng(&cfg.master_seed, trial, b"scheme");
    let mut inj = trial_rng(&cfg.master_seed, trial, b"inject");
    let len = params.seed_bytes();
    let (sk, pk) = cross_keygen(params, &random_seed(&mut rng, len))
        .map_err(|e| AttackError::Malformed(e.to_string()))?;
    let spec = CrossFaultSpec {
        node: cfg.node,
        p_success: cfg.p_success,
    };
    let mut out = TrialResult::default();
    while !out.complete && (out.attempts as usize) < cfg.max_attempts {
        out.attempts += 1;
        let mut msg = vec![0u8; 32];
        rng.fill_bytes(&mut msg);
        let scheme_seed = random_seed(&mut rng, len);
        let o = faulted_cross_sign(&sk, &msg, &spec, &scheme_seed, &mut inj)?;
        if o.injected {
            out.injections += 1;
        }
        let accepted = detect_effective_cross(&o.signature, &pk, &msg, cfg.node);
        if accepted != (o.class == FaultClass::Effective) {
            out.disagreements += 1;
        }
        if accepted {
            out.effective += 1;
            out.x_sum += 1;
            out.x_sq_sum += 1;
            let e = recover_secret_cross(&o.signature, &pk, &msg, cfg.node)?;
            if e != sk.e {
                out.mismatches += 1;
            }
            out.complete = true;
        }
        if cfg.record_rows {
            out.rows.push(row(trial, o.injected, o.class, out.complete));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross::{cross_check_response, cross_sign, Group};
    use crate::seedtree::{is_ancestor_or_self, leaf_node};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn keys(i: u8) -> (CrossSecretKey, CrossPublicKey) {
        cross_keygen(&CrossParams::desk(), &Seed::new(vec![i; 16])).unwrap()
    }

    #[test]
    fn honest_signatures_reject_at_every_node() {
        let (sk, pk) = keys(1);
        for i in 0..5u8 {
            let sig = cross_sign(&sk, b"m", &Seed::new(vec![i; 16]));
            for node in 0..63 {
                assert_ne!(detect_cross(&sig, &pk, b"m", node), Detection::Accept);
            }
            assert_eq!(detect_cross(&sig, &pk, b"m", 63), Detection::BadNode);
        }
    }

    #[test]
    fn detector_matches_harness_and_recovers() {
        let (sk, pk) = keys(2);
        let mut inj = ChaCha8Rng::seed_from_u64(3);
        let mut accepts = 0;
        for i in 0..4u8 {
            let rng = Seed::new(vec![i; 16]);
            for node in 0..63 {
                let spec = CrossFaultSpec {
                    node,
                    p_success: 1.0,
                };
                let o = faulted_cross_sign(&sk, b"m", &spec, &rng, &mut inj).unwrap();
                let det = detect_cross(&o.signature, &pk, b"m", node);
                assert_eq!(
                    det == Detection::Accept,
                    o.class == FaultClass::Effective,
                    "node {node}"
                );
                if o.class == FaultClass::IneffectiveCase1 {
                    assert_eq!(det, Detection::NodeClear);
                }
                if det == Detection::Accept {
                    accepts += 1;
                    assert_eq!(
                        recover_secret_cross(&o.signature, &pk, b"m", node).unwrap(),
                        sk.e
                    );
                    assert!(cross_check_response(&pk, b"m", &o.signature).is_err());
                } else if o.class == FaultClass::IneffectiveCase1 {
                    assert_eq!(o.signature, cross_sign(&sk, b"m", &rng));
                }
            }
        }
        assert!(accepts > 0);
    }

    #[test]
    fn effectiveness_is_case_three_exhaustively() {
        for code in 1u32..255 {
            let b: Vec<u8> = (0..8).map(|i| ((code >> i) & 1) as u8).collect();
            let hidden: Vec<bool> = b.iter().map(|&v| v == 0).collect();
            for node in 0..15 {
                let inside =
                    (0..8).any(|i| hidden[i] && is_ancestor_or_self(node, leaf_node(i, 8)));
                let outside =
                    (0..8).any(|i| hidden[i] && !is_ancestor_or_self(node, leaf_node(i, 8)));
                let c = classify_mask(&hidden, 8, node, FaultModel::StuckAtZero);
                assert_eq!(c == FaultClass::Effective, inside && outside);
                let d = Digest::new(b.clone(), 2).unwrap();
                assert_eq!(
                    faulted_layout(&d, 8, node).is_some() && c == FaultClass::Effective,
                    c == FaultClass::Effective
                );
                if !inside {
                    assert_eq!(c, FaultClass::IneffectiveCase1);
                }
            }
        }
    }

    #[test]
    fn identity_sigma_gives_e_prime() {
        let p = CrossParams::desk();
        let g: Group = p.group();
        let e = RestrictedVector {
            exps: (0..30).map(|i| (i % 7) as u8).collect(),
        };
        let sigma = RestrictedVector::identity(30);
        let out = group_apply(&g, &sigma, &e.values(&g)).unwrap();
        assert_eq!(RestrictedVector::from_values(&g, &out).unwrap(), e);
    }

    #[test]
    fn no_leaked_round_when_node_covers_only_reveals() {
        let (sk, pk) = keys(4);
        for i in 0..40u8 {
            let sig = cross_sign(&sk, b"q", &Seed::new(vec![i; 16]));
            let (_, b) = cross_challenges(&pk, b"q", &sig);
            let leaf = (0..pk.params.t).find(|&r| b.entries()[r] == 1).unwrap();
            let node = leaf_node(leaf, pk.params.l2());
            assert_eq!(
                recover_secret_cross(&sig, &pk, b"q", node),
                Err(AttackError::NoLeakedRound)
            );
        }
    }

    #[test]
    fn campaigns_recover_in_one_fault() {
        let p = CrossParams::desk();
        let cfg = CampaignConfig::new(1, 0.5, CampaignMode::Full, 6, &[5]);
        let out = run_cross_campaign(&p, &cfg).unwrap();
        let r = &out.report;
        assert_eq!(r.scheme, "cross");
        assert_eq!(
            (
                r.incomplete_trials,
                r.secret_mismatches,
                r.detector_disagreements
            ),
            (0, 0, 0)
        );
        assert_eq!(r.n_avg, 1.0);
        assert_eq!(r.mean_x, 1.0);
        let mut cfg = CampaignConfig::new(2, 0.25, CampaignMode::DigestOnly, 500, &[6]);
        cfg.record_rows = true;
        let out = run_cross_campaign(&p, &cfg).unwrap();
        assert_eq!(out.report.n_avg, 1.0);
        assert_eq!(
            out.rows
                .iter()
                .filter(|r| r.done && r.class == FaultClass::Effective)
                .count(),
            500
        );
    }
}
