//! Software fault injection on the reference tree and outcome classification.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::less::{assemble, commit, honest_responses, LessSecretKey, LessSignature};
use crate::seedtree::{
    compute_seeds_to_publish, compute_with_skipped_store, leaf_count, node_count, Digest,
    ReferenceTree,
};
use crate::xof::Seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaultError {
    #[error("node {node} outside a tree of {nodes} nodes")]
    BadNode { node: usize, nodes: usize },
    #[error("success probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("unknown fault model {0:?}")]
    UnknownModel(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultModel {
    /// The store into `x[node]` is skipped; ancestors are computed from the stale 0.
    SkipStore,
    /// `x[node]` forced to 0 after propagation, ancestors recomputed.
    StuckAtZero,
    /// `x[node]` negated after propagation, ancestors recomputed.
    BitFlip,
    /// The disclosure check at `node` is skipped and `seed[node]` is published.
    SkipCheck,
}

impl FaultModel {
    pub const ALL: [FaultModel; 4] = [
        Self::SkipStore,
        Self::StuckAtZero,
        Self::BitFlip,
        Self::SkipCheck,
    ];
}

impl fmt::Display for FaultModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SkipStore => "skip_store",
            Self::StuckAtZero => "stuck_at_zero",
            Self::BitFlip => "bit_flip",
            Self::SkipCheck => "skip_check",
        })
    }
}

impl FromStr for FaultModel {
    type Err = FaultError;

    fn from_str(s: &str) -> Result<Self, FaultError> {
        match s.replace('-', "_").as_str() {
            "skip_store" => Ok(Self::SkipStore),
            "stuck_at_zero" => Ok(Self::StuckAtZero),
            "bit_flip" => Ok(Self::BitFlip),
            "skip_check" => Ok(Self::SkipCheck),
            _ => Err(FaultError::UnknownModel(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub model: FaultModel,
    pub node: usize,
    pub p_success: f64,
}

impl FaultSpec {
    pub fn validate(&self, l2: usize) -> Result<(), FaultError> {
        if self.node >= node_count(l2) {
            return Err(FaultError::BadNode {
                node: self.node,
                nodes: node_count(l2),
            });
        }
        if !(0.0..=1.0).contains(&self.p_success) {
            return Err(FaultError::BadProbability(self.p_success));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultClass {
    NotInjected,
    IneffectiveCase1,
    IneffectiveCase2,
    Effective,
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NotInjected => "not_injected",
            Self::IneffectiveCase1 => "ineffective_case1",
            Self::IneffectiveCase2 => "ineffective_case2",
            Self::Effective => "effective",
        })
    }
}

/// Honest tree, corrupted tree and the node indices the signer ends up publishing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disclosure {
    pub x: ReferenceTree,
    pub x_faulted: ReferenceTree,
    pub published: Vec<usize>,
}

pub fn honest_disclosure(f: &[bool], l2: usize) -> Disclosure {
    let x = compute_seeds_to_publish(f, l2);
    let published = x.published_nodes();
    Disclosure {
        x_faulted: x.clone(),
        x,
        published,
    }
}

pub fn faulted_disclosure(f: &[bool], l2: usize, model: FaultModel, node: usize) -> Disclosure {
    let x = compute_seeds_to_publish(f, l2);
    let x_faulted = match model {
        FaultModel::SkipStore => compute_with_skipped_store(f, l2, Some(node)),
        FaultModel::StuckAtZero => x.with_forced(node, false),
        FaultModel::BitFlip => x.with_forced(node, !x.get(node)),
        FaultModel::SkipCheck => x.clone(),
    };
    let mut published = x_faulted.published_nodes();
    if model == FaultModel::SkipCheck && !published.contains(&node) {
        published.push(node);
        published.sort_unstable();
    }
    Disclosure {
        x,
        x_faulted,
        published,
    }
}

/// Class of an injected fault, from the mask `f` alone.
pub fn classify_mask(f: &[bool], l2: usize, node: usize, model: FaultModel) -> FaultClass {
    let x = compute_seeds_to_publish(f, l2);
    if !x.get(node) {
        return FaultClass::IneffectiveCase1;
    }
    if model == FaultModel::SkipCheck {
        return FaultClass::Effective;
    }
    if !x.with_forced(node, false).get(0) {
        return FaultClass::IneffectiveCase2;
    }
    FaultClass::Effective
}

pub fn classify(d: &Digest, node: usize, model: FaultModel) -> FaultClass {
    classify_mask(&d.mask(), leaf_count(d.t()), node, model)
}

/// Ground truth retained for oracle tests; attacker code never receives it.
#[derive(Clone, Debug)]
pub struct FaultTruth {
    pub d: Digest,
    pub disclosure: Disclosure,
}

#[derive(Clone, Debug)]
pub struct FaultOutcome {
    pub injected: bool,
    pub class: FaultClass,
    pub signature: LessSignature,
    truth: FaultTruth,
}

impl FaultOutcome {
    pub fn truth(&self) -> &FaultTruth {
        &self.truth
    }
}

/// Signs `msg`, corrupting the reference tree with probability `p_success`.
///
/// `rng` drives the scheme exactly as in honest signing; `injector` only decides
/// whether the fault lands.
pub fn faulted_sign<R: Rng + ?Sized>(
    sk: &LessSecretKey,
    msg: &[u8],
    spec: &FaultSpec,
    rng: &Seed,
    injector: &mut R,
) -> Result<FaultOutcome, FaultError> {
    let l2 = sk.params.l2();
    spec.validate(l2)?;
    let injected = injector.gen_bool(spec.p_success);
    let tr = commit(sk, msg, rng);
    let f = tr.d.mask();
    let (disclosure, class) = if injected {
        (
            faulted_disclosure(&f, l2, spec.model, spec.node),
            classify_mask(&f, l2, spec.node, spec.model),
        )
    } else {
        (honest_disclosure(&f, l2), FaultClass::NotInjected)
    };
    let nodes = tr.tree.publish(&disclosure.published);
    let signature = assemble(&tr, &nodes, honest_responses(sk, &tr));
    Ok(FaultOutcome {
        injected,
        class,
        signature,
        truth: FaultTruth {
            d: tr.d,
            disclosure,
        },
    })
}
