//! Effective-fault detection, secret recovery from a leaked pair, and campaigns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fault::{classify, faulted_sign, FaultClass, FaultError, FaultModel, FaultSpec};
use crate::gf::{normalize_column, FqElem, FqMatrix, RrefMatrix};
use crate::less::{
    challenge, keygen, prepare_digest_input, public_matrix, recompute_commitment, LessPublicKey,
    LessSignature,
};
use crate::monomial::{mono_transpose, MonomialMatrix, PartialMonomialMatrix};
use crate::params::LessParams;
use crate::seedtree::{
    compute_seeds_to_publish, leaf_span, node_count, regenerate_at, Digest, LeafSeeds,
};
use crate::stats::trial_budget;
use crate::xof::{sample_monomial, Seed};

pub const REPORT_SCHEMA: &str = "zkfault/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("inconsistent pair: {0}")]
    InconsistentPair(String),
    #[error("no public column matches secret column {0}")]
    NoMatch(usize),
    #[error("secret column {0} matches several public columns")]
    AmbiguousMatch(usize),
    #[error("completed secret does not reproduce the public key")]
    PublicKeyMismatch,
    #[error("malformed signature: {0}")]
    Malformed(String),
    #[error("no hidden round under the faulted node")]
    NoLeakedRound,
    #[error("campaign needs at least one trial")]
    NoTrials,
    #[error(transparent)]
    Fault(#[from] FaultError),
}

/// Outcome of the three-step detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detection {
    Accept,
    BadNode,
    /// Step 1: the node was already 0.
    NodeClear,
    /// Step 2: clearing the node clears the root.
    RootCleared,
    /// Step 3: published node count differs from the faulted expectation.
    SizeMismatch {
        expected: usize,
        received: usize,
    },
    /// Step 3: sizes agree but the commitment does not recompute.
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredPair {
    pub round: usize,
    pub q_tilde: MonomialMatrix,
    pub response: PartialMonomialMatrix,
    pub d_value: usize,
}

/// Column `index` of `Q` has its nonzero entry `coeff` in row `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecoveredColumn {
    pub index: usize,
    pub target: usize,
    pub coeff: FqElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSecret {
    pub n: usize,
    pub columns: Vec<RecoveredColumn>,
}

#[derive(Clone, Debug)]
pub struct AttackState {
    pub params: LessParams,
    /// `j ↦ Q_j^T`.
    pub recovered: BTreeMap<usize, MonomialMatrix>,
    pub faults_used: usize,
}

impl AttackState {
    pub fn new(params: &LessParams) -> Self {
        Self {
            params: params.clone(),
            recovered: BTreeMap::new(),
            faults_used: 0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.recovered.len() == self.params.s - 1
    }

    pub fn merge(&mut self, other: &AttackState) {
        for (&j, m) in &other.recovered {
            self.recovered.entry(j).or_insert_with(|| m.clone());
        }
        self.faults_used += other.faults_used;
    }
}

fn signature_shape_ok(params: &LessParams, sig: &LessSignature) -> bool {
    sig.cmt.len() == params.digest_bytes()
        && sig.salt.len() == params.seed_bytes()
        && sig
            .tree_nodes
            .iter()
            .all(|s| s.len() == params.seed_bytes())
}

/// Node indices a signer publishes when `x[node]` is forced to 0.
fn faulted_published(d: &Digest, l2: usize, node: usize) -> Option<Vec<usize>> {
    let x = compute_seeds_to_publish(&d.mask(), l2);
    if !x.get(node) {
        return None;
    }
    let xf = x.with_forced(node, false);
    if !xf.get(0) {
        return None;
    }
    Some(xf.published_nodes())
}

pub fn detect(sig: &LessSignature, pk: &LessPublicKey, msg: &[u8], node: usize) -> Detection {
    let p = &pk.params;
    let l2 = p.l2();
    if node >= node_count(l2) {
        return Detection::BadNode;
    }
    if !signature_shape_ok(p, sig) {
        return Detection::Inconsistent;
    }
    let d = challenge(p, &sig.cmt);
    let x = compute_seeds_to_publish(&d.mask(), l2);
    if !x.get(node) {
        return Detection::NodeClear;
    }
    let xf = x.with_forced(node, false);
    if !xf.get(0) {
        return Detection::RootCleared;
    }
    detect_with_layout(sig, pk, msg, &d, &xf.published_nodes())
}

/// Step 3 against an arbitrary expected disclosure layout.
pub fn detect_with_layout(
    sig: &LessSignature,
    pk: &LessPublicKey,
    msg: &[u8],
    d: &Digest,
    published: &[usize],
) -> Detection {
    let p = &pk.params;
    if published.len() != sig.tree_nodes.len() {
        return Detection::SizeMismatch {
            expected: published.len(),
            received: sig.tree_nodes.len(),
        };
    }
    let leaves = match regenerate_at(&sig.tree_nodes, published, &sig.salt, p.l2(), p.t) {
        Ok(l) => l,
        Err(_) => return Detection::Inconsistent,
    };
    match recompute_commitment(pk, msg, &sig.salt, d, &leaves, &sig.rsp) {
        Ok(c) if c == sig.cmt => Detection::Accept,
        _ => Detection::Inconsistent,
    }
}

pub fn detect_effective(sig: &LessSignature, pk: &LessPublicKey, msg: &[u8], node: usize) -> bool {
    detect(sig, pk, msg, node) == Detection::Accept
}

/// The `k` columns of `Q` fixed by one leaked pair.
pub fn recover_columns_from_pair(
    pair: &RecoveredPair,
    g0: &RrefMatrix,
) -> Result<PartialSecret, AttackError> {
    let field = g0.matrix.field();
    let n = g0.matrix.cols();
    let k = g0.matrix.rows();
    let (q_bar, _) = prepare_digest_input(g0, &pair.q_tilde);
    let rsp = &pair.response;
    if rsp.n() != n || rsp.k() != k || q_bar.k() != k || rsp.field() != field {
        return Err(AttackError::InconsistentPair("response shape".into()));
    }
    let mut seen = vec![false; n];
    let mut columns = Vec::with_capacity(k);
    for r in 0..k {
        let index = rsp.perm_inj()[r] as usize;
        if std::mem::replace(&mut seen[index], true) {
            return Err(AttackError::InconsistentPair(format!(
                "row {index} hit twice"
            )));
        }
        let inv = field
            .inv(q_bar.coeffs()[r])
            .map_err(|_| AttackError::InconsistentPair("zero coefficient".into()))?;
        columns.push(RecoveredColumn {
            index,
            target: q_bar.perm_inj()[r] as usize,
            coeff: field.mul(rsp.coeffs()[r], inv),
        });
    }
    Ok(PartialSecret { n, columns })
}

/// Extends a partial secret to the full `Q^T` using the public matrix `g_hat`.
pub fn complete_secret(
    partial: &PartialSecret,
    g0: &RrefMatrix,
    g_hat: &RrefMatrix,
) -> Result<MonomialMatrix, AttackError> {
    let field = g0.matrix.field();
    let n = g0.matrix.cols();
    let k = g0.matrix.rows();
    if partial.n != n
        || partial.columns.len() != k
        || g_hat.matrix.cols() != n
        || g_hat.matrix.rows() != k
    {
        return Err(AttackError::InconsistentPair("partial secret shape".into()));
    }
    let mut perm = vec![u32::MAX; n];
    let mut coeffs: Vec<FqElem> = vec![0; n];
    let mut target_used = vec![false; n];
    let mut m_prime = Vec::with_capacity(k);
    let mut m_star = Vec::with_capacity(k);
    for c in &partial.columns {
        if c.index >= n
            || c.target >= n
            || perm[c.index] != u32::MAX
            || target_used[c.target]
            || c.coeff == 0
        {
            return Err(AttackError::InconsistentPair("columns overlap".into()));
        }
        perm[c.index] = c.target as u32;
        coeffs[c.index] = c.coeff;
        target_used[c.target] = true;
        let inv = field.inv(c.coeff).expect("nonzero");
        m_prime.push(
            g0.matrix
                .column(c.target)
                .iter()
                .map(|&v| field.mul(v, inv))
                .collect(),
        );
        m_star.push(g_hat.matrix.column(c.index));
    }
    let m_prime = FqMatrix::from_columns(field, k, &m_prime);
    let m_star = FqMatrix::from_columns(field, k, &m_star);
    let m_star_inv = m_star.inverse().map_err(|_| {
        AttackError::InconsistentPair("recovered columns are not an information set".into())
    })?;
    let s_inv = m_prime.mul(&m_star_inv).expect("square");

    let mut by_direction: HashMap<Vec<FqElem>, Vec<usize>> = HashMap::new();
    for j in (0..n).filter(|&j| !target_used[j]) {
        by_direction
            .entry(normalize_column(&field, &g0.matrix.column(j)))
            .or_default()
            .push(j);
    }
    let missing: Vec<usize> = (0..n).filter(|&b| perm[b] == u32::MAX).collect();
    for b in missing {
        let c = s_inv.mul_vec(&g_hat.matrix.column(b));
        let Some(pos) = c.iter().position(|&v| v != 0) else {
            return Err(AttackError::NoMatch(b));
        };
        let candidates: Vec<usize> = by_direction
            .get(&normalize_column(&field, &c))
            .map(|v| v.iter().copied().filter(|&j| !target_used[j]).collect())
            .unwrap_or_default();
        let j = match candidates.as_slice() {
            [] => return Err(AttackError::NoMatch(b)),
            [j] => *j,
            _ => return Err(AttackError::AmbiguousMatch(b)),
        };
        // c = u[b]^{-1} g0[:, j]
        let u_inv = field.mul(
            c[pos],
            field
                .inv(g0.matrix.get(pos, j))
                .map_err(|_| AttackError::NoMatch(b))?,
        );
        perm[b] = j as u32;
        coeffs[b] = field.inv(u_inv).map_err(|_| AttackError::NoMatch(b))?;
        target_used[j] = true;
    }
    let q = MonomialMatrix::new(field, perm, coeffs)
        .map_err(|e| AttackError::InconsistentPair(e.to_string()))?;
    if &public_matrix(g0, &q) != g_hat {
        return Err(AttackError::PublicKeyMismatch);
    }
    Ok(mono_transpose(&q))
}

/// Leaked pairs under `node` for secrets not yet recovered.
pub fn leaked_pairs(
    sig: &LessSignature,
    pk: &LessPublicKey,
    node: usize,
    skip: &BTreeSet<usize>,
) -> Result<Vec<RecoveredPair>, AttackError> {
    let p = &pk.params;
    let l2 = p.l2();
    if node >= node_count(l2) {
        return Err(AttackError::Malformed(format!("node {node} outside tree")));
    }
    if !signature_shape_ok(p, sig) {
        return Err(AttackError::Malformed("field lengths".into()));
    }
    let d = challenge(p, &sig.cmt);
    let published = faulted_published(&d, l2, node)
        .ok_or_else(|| AttackError::Malformed("fault not effective".into()))?;
    let leaves: LeafSeeds = regenerate_at(&sig.tree_nodes, &published, &sig.salt, l2, p.t)
        .map_err(|e| AttackError::Malformed(e.to_string()))?;
    if sig.rsp.len() != d.weight() {
        return Err(AttackError::Malformed("response count".into()));
    }
    let (lo, hi) = leaf_span(node, l2);
    let mut skip = skip.clone();
    let mut pairs = Vec::new();
    for i in lo..hi.min(p.t) {
        let j = d.entries()[i] as usize;
        if j == 0 || skip.contains(&j) {
            continue;
        }
        let seed = leaves
            .get(&i)
            .ok_or_else(|| AttackError::Malformed(format!("round {i} not disclosed")))?;
        let idx = d.entries()[..i].iter().filter(|&&e| e != 0).count();
        pairs.push(RecoveredPair {
            round: i,
            q_tilde: sample_monomial(seed, p.n, p.field()),
            response: sig.rsp[idx].clone(),
            d_value: j,
        });
        skip.insert(j);
    }
    Ok(pairs)
}

/// Recovers every secret exposed by an accepted signature; returns the new indices.
pub fn recover_secret_matrices(
    sig: &LessSignature,
    pk: &LessPublicKey,
    node: usize,
    state: &mut AttackState,
) -> Result<Vec<usize>, AttackError> {
    let known: BTreeSet<usize> = state.recovered.keys().copied().collect();
    let pairs = leaked_pairs(sig, pk, node, &known)?;
    let mut fresh = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let partial = recover_columns_from_pair(&pair, &pk.g0)?;
        let qt = complete_secret(&partial, &pk.g0, &pk.g[pair.d_value - 1])?;
        state.recovered.insert(pair.d_value, qt);
        fresh.push(pair.d_value);
    }
    state.faults_used += 1;
    Ok(fresh)
}

/// Distinct nonzero digest values on the rounds under `node`.
pub fn distinct_under(d: &Digest, node: usize, l2: usize) -> BTreeSet<usize> {
    let (lo, hi) = leaf_span(node, l2);
    d.entries()[lo.min(d.t())..hi.min(d.t())]
        .iter()
        .filter(|&&e| e != 0)
        .map(|&e| e as usize)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignMode {
    Full,
    DigestOnly,
}

impl fmt::Display for CampaignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::DigestOnly => "digest-only",
        })
    }
}

impl FromStr for CampaignMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "full" => Ok(Self::Full),
            "digest-only" => Ok(Self::DigestOnly),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub node: usize,
    pub p_success: f64,
    pub mode: CampaignMode,
    pub trials: usize,
    pub master_seed: Vec<u8>,
    pub model: FaultModel,
    /// Signing attempts allowed per trial before it is marked incomplete.
    pub max_attempts: usize,
    pub record_rows: bool,
}

impl CampaignConfig {
    pub fn new(
        node: usize,
        p_success: f64,
        mode: CampaignMode,
        trials: usize,
        master_seed: &[u8],
    ) -> Self {
        Self {
            node,
            p_success,
            mode,
            trials,
            master_seed: master_seed.to_vec(),
            model: FaultModel::SkipStore,
            max_attempts: 100_000,
            record_rows: false,
        }
    }
}

/// One signing attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub trial: usize,
    pub injected: bool,
    pub class: FaultClass,
    pub n_recovered_this_trial: usize,
    pub cumulative_secrets: usize,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema: String,
    pub scheme: String,
    pub params: String,
    pub node: usize,
    pub p_success: f64,
    pub fault_model: FaultModel,
    pub trials: usize,
    pub mode: CampaignMode,
    pub n_avg: f64,
    pub mean_x: f64,
    pub mean_x_stderr: f64,
    pub n_trial: f64,
    pub n_total: f64,
    pub attempts: u64,
    pub injections: u64,
    pub effective_faults: u64,
    pub incomplete_trials: usize,
    /// Detector verdicts that disagree with the harness class.
    pub detector_disagreements: u64,
    /// Recovered matrices that differ from the key generator's secret.
    pub secret_mismatches: u64,
    pub per_trial_csv_path: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct TrialResult {
    pub attempts: u64,
    pub injections: u64,
    pub effective: u64,
    pub x_sum: u64,
    pub x_sq_sum: u64,
    pub complete: bool,
    pub disagreements: u64,
    pub mismatches: u64,
    pub rows: Vec<CampaignRow>,
}

pub struct CampaignOutput {
    pub report: CampaignReport,
    pub rows: Vec<CampaignRow>,
}

/// Independent generator for trial `trial`, stream `label`.
pub fn trial_rng(master: &[u8], trial: usize, label: &[u8]) -> ChaCha8Rng {
    let seed = Seed::derive(
        b"trial",
        &[master, &(trial as u64).to_le_bytes(), label],
        32,
    );
    ChaCha8Rng::from_seed(seed.as_bytes().try_into().expect("32 bytes"))
}

pub fn random_seed<R: RngCore + ?Sized>(rng: &mut R, len: usize) -> Seed {
    let mut b = vec![0u8; len];
    rng.fill_bytes(&mut b);
    Seed::new(b)
}

/// Aggregates per-trial results into a report; shared by both schemes.
pub fn summarize(
    scheme: &str,
    params: &str,
    cfg: &CampaignConfig,
    results: Vec<TrialResult>,
) -> Result<CampaignOutput, AttackError> {
    let mut attempts = 0;
    let mut injections = 0;
    let mut effective = 0u64;
    let mut effective_complete = 0u64;
    let mut complete = 0usize;
    let mut x_sum = 0u64;
    let mut x_sq = 0u64;
    let mut disagreements = 0;
    let mut mismatches = 0;
    let mut rows = Vec::new();
    for r in results {
        attempts += r.attempts;
        injections += r.injections;
        effective += r.effective;
        x_sum += r.x_sum;
        x_sq += r.x_sq_sum;
        disagreements += r.disagreements;
        mismatches += r.mismatches;
        if r.complete {
            complete += 1;
            effective_complete += r.effective;
        }
        rows.extend(r.rows);
    }
    let n_avg = if complete > 0 {
        effective_complete as f64 / complete as f64
    } else {
        f64::NAN
    };
    let (mean_x, stderr) = if effective > 0 {
        let e = effective as f64;
        let mean = x_sum as f64 / e;
        let var = if effective > 1 {
            (x_sq as f64 - e * mean * mean) / (e - 1.0)
        } else {
            0.0
        };
        (mean, (var.max(0.0) / e).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    let (n_trial, n_total) = trial_budget(n_avg, cfg.p_success)
        .map_err(|_| FaultError::BadProbability(cfg.p_success))?;
    Ok(CampaignOutput {
        report: CampaignReport {
            schema: REPORT_SCHEMA.into(),
            scheme: scheme.into(),
            params: params.into(),
            node: cfg.node,
            p_success: cfg.p_success,
            fault_model: cfg.model,
            trials: cfg.trials,
            mode: cfg.mode,
            n_avg,
            mean_x,
            mean_x_stderr: stderr,
            n_trial,
            n_total,
            attempts,
            injections,
            effective_faults: effective,
            incomplete_trials: cfg.trials - complete,
            detector_disagreements: disagreements,
            secret_mismatches: mismatches,
            per_trial_csv_path: None,
        },
        rows,
    })
}

pub(crate) fn validate_campaign(cfg: &CampaignConfig, l2: usize) -> Result<(), AttackError> {
    if cfg.trials == 0 {
        return Err(AttackError::NoTrials);
    }
    FaultSpec {
        model: cfg.model,
        node: cfg.node,
        p_success: cfg.p_success,
    }
    .validate(l2)?;
    if cfg.p_success == 0.0 {
        return Err(FaultError::BadProbability(0.0).into());
    }
    Ok(())
}

pub fn run_campaign(
    params: &LessParams,
    cfg: &CampaignConfig,
) -> Result<CampaignOutput, AttackError> {
    params
        .validate()
        .map_err(|e| AttackError::Malformed(e.to_string()))?;
    validate_campaign(cfg, params.l2())?;
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| match cfg.mode {
            CampaignMode::DigestOnly => Ok(digest_only_trial(params, cfg, trial)),
            CampaignMode::Full => full_trial(params, cfg, trial),
        })
        .collect::<Result<Vec<_>, _>>()?;
    summarize("less", &params.name, cfg, results)
}

fn digest_only_trial(params: &LessParams, cfg: &CampaignConfig, trial: usize) -> TrialResult {
    let mut rng = trial_rng(&cfg.master_seed, trial, b"scheme");
    let mut inj = trial_rng(&cfg.master_seed, trial, b"inject");
    let l2 = params.l2();
    let mut out = TrialResult::default();
    let mut recovered = BTreeSet::new();
    while recovered.len() < params.s - 1 && (out.attempts as usize) < cfg.max_attempts {
        out.attempts += 1;
        let mut cmt = vec![0u8; params.digest_bytes()];
        rng.fill_bytes(&mut cmt);
        let d = challenge(params, &cmt);
        let injected = inj.gen_bool(cfg.p_success);
        let class = if injected {
            classify(&d, cfg.node, cfg.model)
        } else {
            FaultClass::NotInjected
        };
        let mut fresh = 0;
        if injected {
            out.injections += 1;
        }
        if class == FaultClass::Effective {
            let vals = distinct_under(&d, cfg.node, l2);
            out.effective += 1;
            out.x_sum += vals.len() as u64;
            out.x_sq_sum += (vals.len() * vals.len()) as u64;
            for v in vals {
                fresh += usize::from(recovered.insert(v));
            }
        }
        if cfg.record_rows {
            out.rows.push(CampaignRow {
                trial,
                injected,
                class,
                n_recovered_this_trial: fresh,
                cumulative_secrets: recovered.len(),
                done: recovered.len() == params.s - 1,
            });
        }
    }
    out.complete = recovered.len() == params.s - 1;
    out
}

fn full_trial(
    params: &LessParams,
    cfg: &CampaignConfig,
    trial: usize,
) -> Result<TrialResult, AttackError> {
    let mut rng = trial_rng(&cfg.master_seed, trial, b"scheme");
    let mut inj = trial_rng(&cfg.master_seed, trial, b"inject");
    let len = params.seed_bytes();
    let master = random_seed(&mut rng, len);
    let gseed = random_seed(&mut rng, len);
    let (sk, pk) =
        keygen(params, &master, &gseed).map_err(|e| AttackError::Malformed(e.to_string()))?;
    let spec = FaultSpec {
        model: cfg.model,
        node: cfg.node,
        p_success: cfg.p_success,
    };
    let mut state = AttackState::new(params);
    let mut out = TrialResult::default();
    while !state.is_complete() && (out.attempts as usize) < cfg.max_attempts {
        out.attempts += 1;
        let mut msg = vec![0u8; 32];
        rng.fill_bytes(&mut msg);
        let scheme_seed = random_seed(&mut rng, len);
        let outcome = faulted_sign(&sk, &msg, &spec, &scheme_seed, &mut inj)?;
        if outcome.injected {
            out.injections += 1;
        }
        let accepted = detect_effective(&outcome.signature, &pk, &msg, cfg.node);
        if accepted != (outcome.class == FaultClass::Effective) {
            out.disagreements += 1;
        }
        let mut fresh = Vec::new();
        if accepted {
            let d = challenge(params, &outcome.signature.cmt);
            let x = distinct_under(&d, cfg.node, params.l2()).len() as u64;
            out.effective += 1;
            out.x_sum += x;
            out.x_sq_sum += x * x;
            fresh = recover_secret_matrices(&outcome.signature, &pk, cfg.node, &mut state)?;
            for &j in &fresh {
                if &state.recovered[&j] != sk.secret_transpose(j) {
                    out.mismatches += 1;
                }
            }
        }
        if cfg.record_rows {
            out.rows.push(CampaignRow {
                trial,
                injected: outcome.injected,
                class: outcome.class,
                n_recovered_this_trial: fresh.len(),
                cumulative_secrets: state.recovered.len(),
                done: state.is_complete(),
            });
        }
    }
    out.complete = state.is_complete();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::FaultModel;
    use crate::gf::Field;
    use crate::less::{keygen, sign};
    use crate::monomial::mono_mul_partial;
    use crate::xof::sample_rref_generator;
    use rand::SeedableRng;

    fn small() -> LessParams {
        LessParams::by_name("less-small-s4").unwrap()
    }

    fn keys(i: u8) -> (crate::less::LessSecretKey, LessPublicKey) {
        keygen(
            &small(),
            &Seed::new(vec![i; 16]),
            &Seed::new(vec![i ^ 0x55; 16]),
        )
        .unwrap()
    }

    #[test]
    fn identity_secret_round_trip() {
        let f = Field::new(7).unwrap();
        let g0 = sample_rref_generator(&Seed::new(vec![3; 16]), 5, 10, f).unwrap();
        let q = MonomialMatrix::identity(f, 10);
        let q_tilde = sample_monomial(&Seed::new(vec![4; 16]), 10, f);
        let (q_bar, _) = prepare_digest_input(&g0, &q_tilde);
        let pair = RecoveredPair {
            round: 0,
            q_tilde,
            response: mono_mul_partial(&mono_transpose(&q), &q_bar).unwrap(),
            d_value: 1,
        };
        let part = recover_columns_from_pair(&pair, &g0).unwrap();
        for (r, c) in part.columns.iter().enumerate() {
            assert_eq!(c.index, q_bar.perm_inj()[r] as usize);
            assert_eq!(c.target, c.index);
            assert_eq!(c.coeff, 1);
        }
        let g_hat = public_matrix(&g0, &q);
        assert_eq!(complete_secret(&part, &g0, &g_hat).unwrap(), q);
    }

    #[test]
    fn pairs_recover_true_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (sk, pk) = keygen(
                &small(),
                &random_seed(&mut rng, 16),
                &random_seed(&mut rng, 16),
            )
            .unwrap();
            let q_tilde = sample_monomial(&random_seed(&mut rng, 16), 10, pk.params.field());
            let (q_bar, _) = prepare_digest_input(&pk.g0, &q_tilde);
            for j in 1..4 {
                let pair = RecoveredPair {
                    round: 0,
                    q_tilde: q_tilde.clone(),
                    response: mono_mul_partial(sk.secret_transpose(j), &q_bar).unwrap(),
                    d_value: j,
                };
                let part = recover_columns_from_pair(&pair, &pk.g0).unwrap();
                let q = sk.secret(j);
                for c in &part.columns {
                    assert_eq!(q.perm()[c.index] as usize, c.target);
                    assert_eq!(q.coeffs()[c.index], c.coeff);
                }
                assert_eq!(
                    &complete_secret(&part, &pk.g0, &pk.g[j - 1]).unwrap(),
                    sk.secret_transpose(j)
                );
            }
        }
    }

    #[test]
    fn wrong_public_matrix_is_rejected() {
        let (sk, pk) = keys(1);
        let q_tilde = sample_monomial(&Seed::new(vec![9; 16]), 10, pk.params.field());
        let (q_bar, _) = prepare_digest_input(&pk.g0, &q_tilde);
        let pair = RecoveredPair {
            round: 0,
            q_tilde,
            response: mono_mul_partial(sk.secret_transpose(1), &q_bar).unwrap(),
            d_value: 1,
        };
        let part = recover_columns_from_pair(&pair, &pk.g0).unwrap();
        assert!(complete_secret(&part, &pk.g0, &pk.g[1]).is_err());
    }

    #[test]
    fn detector_on_honest_and_faulted() {
        let (sk, pk) = keys(2);
        let mut inj = ChaCha8Rng::seed_from_u64(1);
        let mut seen_accept = false;
        for i in 0..30u8 {
            let rng = Seed::new(vec![i; 16]);
            let honest = sign(&sk, b"m", &rng);
            for node in 0..31 {
                let det = detect(&honest, &pk, b"m", node);
                assert_ne!(det, Detection::Accept);
                let spec = FaultSpec {
                    model: FaultModel::SkipStore,
                    node,
                    p_success: 1.0,
                };
                let o = faulted_sign(&sk, b"m", &spec, &rng, &mut inj).unwrap();
                let det = detect(&o.signature, &pk, b"m", node);
                assert_eq!(
                    det == Detection::Accept,
                    o.class == FaultClass::Effective,
                    "node {node}"
                );
                if det == Detection::Accept {
                    seen_accept = true;
                    let mut st = AttackState::new(&pk.params);
                    let fresh = recover_secret_matrices(&o.signature, &pk, node, &mut st).unwrap();
                    let want = distinct_under(&o.truth().d, node, pk.params.l2());
                    assert_eq!(fresh.iter().copied().collect::<BTreeSet<_>>(), want);
                    for j in fresh {
                        assert_eq!(&st.recovered[&j], sk.secret_transpose(j));
                    }
                }
            }
        }
        assert!(seen_accept);
    }

    #[test]
    fn already_recovered_is_skipped() {
        let (sk, pk) = keys(3);
        let mut inj = ChaCha8Rng::seed_from_u64(2);
        for i in 0..50u8 {
            let spec = FaultSpec {
                model: FaultModel::SkipStore,
                node: 1,
                p_success: 1.0,
            };
            let o = faulted_sign(&sk, b"x", &spec, &Seed::new(vec![i; 16]), &mut inj).unwrap();
            if o.class != FaultClass::Effective {
                continue;
            }
            let mut st = AttackState::new(&pk.params);
            let all = recover_secret_matrices(&o.signature, &pk, 1, &mut st).unwrap();
            let first = all[0];
            let mut st2 = AttackState::new(&pk.params);
            st2.recovered.insert(first, st.recovered[&first].clone());
            let rest = recover_secret_matrices(&o.signature, &pk, 1, &mut st2).unwrap();
            assert!(!rest.contains(&first));
            assert_eq!(rest.len() + 1, all.len());
            return;
        }
        panic!("no effective fault");
    }

    #[test]
    fn campaigns_are_deterministic() {
        let p = small();
        let mut cfg = CampaignConfig::new(1, 0.5, CampaignMode::DigestOnly, 200, &[7]);
        cfg.record_rows = true;
        let a = run_campaign(&p, &cfg).unwrap();
        let b = run_campaign(&p, &cfg).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.report.incomplete_trials, 0);
        assert!((a.report.n_trial - 2.0).abs() < 1e-12);
        assert!(a.rows.iter().filter(|r| r.done).count() == 200);
    }

    #[test]
    fn full_campaign_small() {
        let cfg = CampaignConfig::new(1, 1.0, CampaignMode::Full, 4, &[1, 2]);
        let out = run_campaign(&small(), &cfg).unwrap();
        assert_eq!(out.report.incomplete_trials, 0);
        assert_eq!(out.report.secret_mismatches, 0);
        assert_eq!(out.report.detector_disagreements, 0);
        assert!(out.report.n_avg >= 1.0);
    }

    #[test]
    fn bad_campaigns() {
        let p = small();
        assert!(
            run_campaign(&p, &CampaignConfig::new(1, 1.0, CampaignMode::Full, 0, &[])).is_err()
        );
        assert!(run_campaign(
            &p,
            &CampaignConfig::new(99, 1.0, CampaignMode::Full, 1, &[])
        )
        .is_err());
        assert!(
            run_campaign(&p, &CampaignConfig::new(1, 0.0, CampaignMode::Full, 1, &[])).is_err()
        );
    }
}
