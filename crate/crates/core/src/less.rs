//! The LESS signature scheme: key generation, signing and verification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{lex_min_col, lex_sort, rref_with_pivots, FqMatrix, RrefMatrix};
use crate::monomial::{
    apply_right, apply_right_partial, mono_inverse, mono_mul_partial, mono_transpose,
    select_columns, MonomialError, MonomialMatrix, PartialMonomialMatrix,
};
use crate::params::{LessParams, ParamError};
use crate::seedtree::{
    build_seed_tree, regenerate_leaves, seed_tree_paths, Digest, LeafSeeds, SeedTree,
    SeedTreeError, TreeNodeList,
};
use crate::xof::{
    expand_seeds, hash_commit, sample_fixed_weight_digest, sample_monomial, sample_rref_generator,
    Seed, XofError, TAG_MSEED, TAG_SIGN,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LessError {
    #[error("malformed signature: {0}")]
    MalformedSignature(String),
    #[error("commitment mismatch")]
    Rejected,
    #[error("malformed key: {0}")]
    MalformedKey(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Xof(#[from] XofError),
    #[error(transparent)]
    Monomial(#[from] MonomialError),
}

impl From<SeedTreeError> for LessError {
    fn from(e: SeedTreeError) -> Self {
        LessError::MalformedSignature(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SecretKeyFile", into = "SecretKeyFile")]
pub struct LessSecretKey {
    pub params: LessParams,
    pub mseed_master: Seed,
    pub gseed: Seed,
    /// `Q_1 .. Q_{s-1}`.
    pub expanded: Vec<MonomialMatrix>,
    transposed: Vec<MonomialMatrix>,
    g0: RrefMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PublicKeyFile", into = "PublicKeyFile")]
pub struct LessPublicKey {
    pub params: LessParams,
    pub gseed: Seed,
    pub g0: RrefMatrix,
    /// `G_1 .. G_{s-1}`.
    pub g: Vec<RrefMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LessSignature {
    pub salt: Seed,
    #[serde(with = "hex")]
    pub cmt: Vec<u8>,
    pub tree_nodes: Vec<Seed>,
    pub rsp: Vec<PartialMonomialMatrix>,
}

#[derive(Serialize, Deserialize)]
struct SecretKeyFile {
    params: LessParams,
    mseed: Seed,
    gseed: Seed,
}

#[derive(Serialize, Deserialize)]
struct PublicKeyFile {
    params: LessParams,
    gseed: Seed,
    g: Vec<RrefMatrix>,
}

impl TryFrom<SecretKeyFile> for LessSecretKey {
    type Error = LessError;

    fn try_from(f: SecretKeyFile) -> Result<Self, LessError> {
        expand_secret(&f.params, &f.mseed, &f.gseed)
    }
}

impl From<LessSecretKey> for SecretKeyFile {
    fn from(sk: LessSecretKey) -> Self {
        Self {
            params: sk.params,
            mseed: sk.mseed_master,
            gseed: sk.gseed,
        }
    }
}

impl TryFrom<PublicKeyFile> for LessPublicKey {
    type Error = LessError;

    fn try_from(f: PublicKeyFile) -> Result<Self, LessError> {
        let p = &f.params;
        p.validate()?;
        if f.gseed.len() != p.seed_bytes() {
            return Err(LessError::MalformedKey("gseed length".into()));
        }
        if f.g.len() != p.s - 1 {
            return Err(LessError::MalformedKey(format!(
                "expected {} matrices",
                p.s - 1
            )));
        }
        for g in &f.g {
            let ok = g.matrix.rows() == p.k
                && g.matrix.cols() == p.n
                && g.matrix.field() == p.field()
                && g.rank() == p.k
                && rref_with_pivots(&g.matrix) == *g;
            if !ok {
                return Err(LessError::MalformedKey(
                    "public matrix is not a k x n RREF".into(),
                ));
            }
        }
        let g0 = sample_rref_generator(&f.gseed, p.k, p.n, p.field())?;
        Ok(Self {
            params: f.params,
            gseed: f.gseed,
            g0,
            g: f.g,
        })
    }
}

impl From<LessPublicKey> for PublicKeyFile {
    fn from(pk: LessPublicKey) -> Self {
        Self {
            params: pk.params,
            gseed: pk.gseed,
            g: pk.g,
        }
    }
}

fn expand_secret(
    params: &LessParams,
    mseed_master: &Seed,
    gseed: &Seed,
) -> Result<LessSecretKey, LessError> {
    params.validate()?;
    let len = params.seed_bytes();
    if mseed_master.len() != len || gseed.len() != len {
        return Err(LessError::MalformedKey(format!(
            "seeds must be {len} bytes"
        )));
    }
    let field = params.field();
    let expanded: Vec<MonomialMatrix> = expand_seeds(mseed_master, TAG_MSEED, params.s - 1, len)
        .iter()
        .map(|m| sample_monomial(m, params.n, field))
        .collect();
    let transposed = expanded.iter().map(mono_transpose).collect();
    let g0 = sample_rref_generator(gseed, params.k, params.n, field)?;
    Ok(LessSecretKey {
        params: params.clone(),
        mseed_master: mseed_master.clone(),
        gseed: gseed.clone(),
        expanded,
        transposed,
        g0,
    })
}

/// `rref(G_0 (Q^{-1})^T)`.
pub fn public_matrix(g0: &RrefMatrix, q: &MonomialMatrix) -> RrefMatrix {
    let m = apply_right(&g0.matrix, &mono_transpose(&mono_inverse(q))).expect("dimensions match");
    rref_with_pivots(&m)
}

pub fn keygen(
    params: &LessParams,
    master_entropy: &Seed,
    gseed: &Seed,
) -> Result<(LessSecretKey, LessPublicKey), LessError> {
    let sk = expand_secret(params, master_entropy, gseed)?;
    let g = sk
        .expanded
        .par_iter()
        .map(|q| public_matrix(&sk.g0, q))
        .collect();
    let pk = LessPublicKey {
        params: params.clone(),
        gseed: gseed.clone(),
        g0: sk.g0.clone(),
        g,
    };
    Ok((sk, pk))
}

impl LessSecretKey {
    pub fn g0(&self) -> &RrefMatrix {
        &self.g0
    }

    /// `Q_j^T` for `j ∈ [1, s-1]`.
    pub fn secret_transpose(&self, j: usize) -> &MonomialMatrix {
        &self.transposed[j - 1]
    }

    pub fn secret(&self, j: usize) -> &MonomialMatrix {
        &self.expanded[j - 1]
    }
}

/// `(Q̄, V̄)` for one round: `J` = pivots of `rref(G Q̃^T)`, `Q̄ = Q̃^T[*, J]`,
/// `V̄ = lex_sort(lex_min_col(G'[*, J^c]))`.
pub fn prepare_digest_input(
    g0: &RrefMatrix,
    q_tilde: &MonomialMatrix,
) -> (PartialMonomialMatrix, FqMatrix) {
    let qt = mono_transpose(q_tilde);
    let red = rref_with_pivots(&apply_right(&g0.matrix, &qt).expect("dimensions match"));
    let q_bar = select_columns(&qt, &red.pivot_cols).expect("pivot set is a proper subset");
    let v_bar = lex_sort(&lex_min_col(
        &red.matrix.select_columns(&red.non_pivot_cols()),
    ));
    (q_bar, v_bar)
}

/// Canonical commitment over the per-round `V̄`, the message, its length and the salt.
pub fn commitment(v_bars: &[FqMatrix], msg: &[u8], salt: &Seed, out_len: usize) -> Vec<u8> {
    let encoded: Vec<Vec<u8>> = v_bars.iter().map(FqMatrix::to_bytes).collect();
    let len = (msg.len() as u64).to_le_bytes();
    let mut parts: Vec<&[u8]> = encoded.iter().map(Vec::as_slice).collect();
    parts.push(msg);
    parts.push(&len);
    parts.push(salt.as_bytes());
    hash_commit(&parts, out_len)
}

pub fn challenge(params: &LessParams, cmt: &[u8]) -> Digest {
    sample_fixed_weight_digest(cmt, params.t, params.w, params.s).expect("validated parameters")
}

/// Everything the signer holds after the commitment phase.
#[derive(Clone, Debug)]
pub struct SignTranscript {
    pub tree: SeedTree,
    pub salt: Seed,
    pub cmt: Vec<u8>,
    pub d: Digest,
    pub q_bars: Vec<PartialMonomialMatrix>,
}

pub fn commit(sk: &LessSecretKey, msg: &[u8], rng: &Seed) -> SignTranscript {
    let p = &sk.params;
    let len = p.seed_bytes();
    let eph = expand_seeds(rng, TAG_SIGN, 2, len);
    let (emseed, salt) = (&eph[0], &eph[1]);
    let tree = build_seed_tree(emseed, salt, p.t);
    let field = p.field();
    let rounds: Vec<(PartialMonomialMatrix, FqMatrix)> = (0..p.t)
        .into_par_iter()
        .map(|i| prepare_digest_input(&sk.g0, &sample_monomial(tree.leaf(i), p.n, field)))
        .collect();
    let (q_bars, v_bars): (Vec<_>, Vec<_>) = rounds.into_iter().unzip();
    let cmt = commitment(&v_bars, msg, salt, p.digest_bytes());
    let d = challenge(p, &cmt);
    SignTranscript {
        tree,
        salt: salt.clone(),
        cmt,
        d,
        q_bars,
    }
}

/// `Q_{d[i]}^T Q̄_i` for every round with `d[i] ≠ 0`, in round order.
pub fn honest_responses(sk: &LessSecretKey, tr: &SignTranscript) -> Vec<PartialMonomialMatrix> {
    tr.d.entries()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .map(|(i, &e)| response_for(sk, e as usize, &tr.q_bars[i]))
        .collect()
}

pub fn response_for(
    sk: &LessSecretKey,
    j: usize,
    q_bar: &PartialMonomialMatrix,
) -> PartialMonomialMatrix {
    mono_mul_partial(sk.secret_transpose(j), q_bar).expect("dimensions match")
}

pub fn assemble(
    tr: &SignTranscript,
    tree_nodes: &TreeNodeList,
    rsp: Vec<PartialMonomialMatrix>,
) -> LessSignature {
    LessSignature {
        salt: tr.salt.clone(),
        cmt: tr.cmt.clone(),
        tree_nodes: tree_nodes.seeds(),
        rsp,
    }
}

pub fn sign(sk: &LessSecretKey, msg: &[u8], rng: &Seed) -> LessSignature {
    let tr = commit(sk, msg, rng);
    let nodes = seed_tree_paths(&tr.tree, &tr.d.mask());
    let rsp = honest_responses(sk, &tr);
    assemble(&tr, &nodes, rsp)
}

/// `V̄` recomputed from a response: RREF of `(G_j Q* | G_j[*, J])` with `J` the zero rows of `Q*`.
pub fn v_bar_from_response(
    g_j: &RrefMatrix,
    q_star: &PartialMonomialMatrix,
) -> Result<FqMatrix, LessError> {
    let left = apply_right_partial(&g_j.matrix, q_star)?;
    let right = g_j.matrix.select_columns(&q_star.zero_rows());
    let g_hat = rref_with_pivots(&left.hcat(&right).expect("same row count"));
    Ok(lex_sort(&lex_min_col(
        &g_hat.matrix.select_columns(&g_hat.non_pivot_cols()),
    )))
}

/// Recomputes the commitment from available leaf seeds and responses.
///
/// A round uses its leaf seed when one is available and the next response otherwise.
pub fn recompute_commitment(
    pk: &LessPublicKey,
    msg: &[u8],
    salt: &Seed,
    d: &Digest,
    leaves: &LeafSeeds,
    rsp: &[PartialMonomialMatrix],
) -> Result<Vec<u8>, LessError> {
    let p = &pk.params;
    if rsp.len() != d.weight() {
        return Err(LessError::MalformedSignature(format!(
            "{} responses for weight {}",
            rsp.len(),
            d.weight()
        )));
    }
    for r in rsp {
        if r.n() != p.n || r.k() != p.k || r.field() != p.field() {
            return Err(LessError::MalformedSignature("response shape".into()));
        }
    }
    let mut rsp_index = Vec::with_capacity(p.t);
    let mut k = 0;
    for &e in d.entries() {
        rsp_index.push(k);
        if e != 0 {
            k += 1;
        }
    }
    let field = p.field();
    let v_bars: Vec<FqMatrix> = (0..p.t)
        .into_par_iter()
        .map(|i| {
            let e = d.entries()[i] as usize;
            if let Some(seed) = leaves.get(&i) {
                Ok(prepare_digest_input(&pk.g0, &sample_monomial(seed, p.n, field)).1)
            } else if e != 0 {
                v_bar_from_response(&pk.g[e - 1], &rsp[rsp_index[i]])
            } else {
                Err(LessError::MalformedSignature(format!(
                    "no seed for round {i}"
                )))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(commitment(&v_bars, msg, salt, p.digest_bytes()))
}

pub fn verify(pk: &LessPublicKey, msg: &[u8], sig: &LessSignature) -> Result<(), LessError> {
    let p = &pk.params;
    if sig.cmt.len() != p.digest_bytes() || sig.salt.len() != p.seed_bytes() {
        return Err(LessError::MalformedSignature(
            "salt or commitment length".into(),
        ));
    }
    if sig.tree_nodes.iter().any(|s| s.len() != p.seed_bytes()) {
        return Err(LessError::MalformedSignature("tree node length".into()));
    }
    let d = challenge(p, &sig.cmt);
    let leaves = regenerate_leaves(&sig.tree_nodes, &sig.salt, &d.mask())?;
    let cmt = recompute_commitment(pk, msg, &sig.salt, &d, &leaves, &sig.rsp)?;
    if cmt == sig.cmt {
        Ok(())
    } else {
        Err(LessError::Rejected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    fn small(name: &str) -> LessParams {
        LessParams::by_name(name).unwrap()
    }

    fn seed(tag: u8, i: u64, len: usize) -> Seed {
        Seed::derive(b"test", &[&[tag], &i.to_le_bytes()], len)
    }

    fn keys(p: &LessParams, i: u64) -> (LessSecretKey, LessPublicKey) {
        keygen(p, &seed(1, i, p.seed_bytes()), &seed(2, i, p.seed_bytes())).unwrap()
    }

    #[test]
    fn keygen_shapes_and_relation() {
        let p = small("less-small");
        for i in 0..10 {
            let (sk, pk) = keys(&p, i);
            assert_eq!(sk.expanded.len(), 1);
            assert_eq!(pk.g.len(), 1);
            for (j, q) in sk.expanded.iter().enumerate() {
                // Direct dense recomputation of G_0 (Q^{-1})^T.
                let dense = q.to_dense().inverse().unwrap().transpose();
                let direct = rref_with_pivots(&pk.g0.matrix.mul(&dense).unwrap());
                assert_eq!(direct, pk.g[j]);
            }
        }
        let (sk, _) = keys(&p, 0);
        let (sk2, _) = keys(&p, 0);
        assert_eq!(sk.expanded, sk2.expanded);
    }

    #[test]
    fn prepare_identity_uses_generator_pivots() {
        let p = small("less-small");
        let (sk, _) = keys(&p, 3);
        let id = MonomialMatrix::identity(p.field(), p.n);
        let (q_bar, v_bar) = prepare_digest_input(sk.g0(), &id);
        let piv: Vec<u32> = sk.g0().pivot_cols.iter().map(|&c| c as u32).collect();
        assert_eq!(q_bar.perm_inj(), &piv[..]);
        let np = sk.g0().matrix.select_columns(&sk.g0().non_pivot_cols());
        assert_eq!(v_bar, lex_sort(&lex_min_col(&np)));
    }

    #[test]
    fn prepared_columns_form_information_set() {
        let p = small("less-small");
        let (sk, _) = keys(&p, 4);
        for i in 0..100 {
            let qt = sample_monomial(&seed(3, i, 16), p.n, p.field());
            let (q_bar, _) = prepare_digest_input(sk.g0(), &qt);
            let sub = apply_right_partial(&sk.g0().matrix, &q_bar).unwrap();
            assert!(sub.inverse().is_ok());
        }
    }

    #[test]
    fn round_trip_and_rejections() {
        for name in ["less-small", "less-small-s4"] {
            let p = small(name);
            for i in 0..25 {
                let (sk, pk) = keys(&p, i);
                let msg = format!("message {i}").into_bytes();
                let sig = sign(&sk, &msg, &seed(5, i, 16));
                assert_eq!(sig.rsp.len(), p.w);
                let d = challenge(&p, &sig.cmt);
                let x = crate::seedtree::compute_seeds_to_publish(&d.mask(), p.l2());
                assert_eq!(sig.tree_nodes.len(), x.published_nodes().len());
                assert_eq!(verify(&pk, &msg, &sig), Ok(()));
                let mut bad = msg.clone();
                bad[0] ^= 1;
                assert_eq!(verify(&pk, &bad, &sig), Err(LessError::Rejected));
            }
        }
    }

    #[test]
    fn tampered_coefficient_rejected() {
        let p = small("less-small-s4");
        let (sk, pk) = keys(&p, 9);
        let sig = sign(&sk, b"m", &seed(6, 0, 16));
        let mut bad = sig.clone();
        let c = bad.rsp[0].coeffs()[0];
        bad.rsp[0].set_coeff(0, if c == 1 { 2 } else { 1 }).unwrap();
        assert!(verify(&pk, b"m", &bad).is_err());
        let mut short = sig.clone();
        short.rsp.pop();
        assert!(matches!(
            verify(&pk, b"m", &short),
            Err(LessError::MalformedSignature(_))
        ));
    }

    #[test]
    fn key_files_round_trip() {
        let p = small("less-small-s4");
        let (sk, pk) = keys(&p, 2);
        let sk2: LessSecretKey =
            serde_json::from_str(&serde_json::to_string(&sk).unwrap()).unwrap();
        assert_eq!(sk2.expanded, sk.expanded);
        let pk2: LessPublicKey =
            serde_json::from_str(&serde_json::to_string(&pk).unwrap()).unwrap();
        assert_eq!(pk2, pk);
        let sig = sign(&sk2, b"x", &seed(7, 0, 16));
        let sig2: LessSignature =
            serde_json::from_str(&serde_json::to_string(&sig).unwrap()).unwrap();
        assert_eq!(verify(&pk2, b"x", &sig2), Ok(()));
    }

    #[test]
    fn field_is_runtime() {
        let mut p = small("less-small");
        p.q = 5;
        p.name = "q5".into();
        let (sk, pk) = keys(&p, 1);
        assert_eq!(pk.g0.matrix.field(), Field::new(5).unwrap());
        let sig = sign(&sk, b"q5", &seed(8, 0, 16));
        assert_eq!(verify(&pk, b"q5", &sig), Ok(()));
    }
}
