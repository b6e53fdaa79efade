//! A functional CROSS signer over the restricted group `E^n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FqElem, FqMatrix, GfError};
use crate::seedtree::{
    build_seed_tree, compute_seeds_to_publish, leaf_count, regenerate_at, Digest, LeafSeeds,
    SeedTree,
};
use crate::xof::{
    sample_fixed_weight_digest, Seed, XofStream, TAG_C0, TAG_C1, TAG_C1_ALL, TAG_CH1, TAG_CH2,
    TAG_CROSS_ROUND, TAG_GSEED, TAG_H, TAG_H_ALL, TAG_MERKLE, TAG_RVEC, TAG_SIGN, TAG_VEC,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrossError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("unknown parameter set {0:?}")]
    Unknown(String),
    #[error("malformed signature: {0}")]
    MalformedSignature(String),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("malformed key: {0}")]
    MalformedKey(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossParams {
    pub name: String,
    pub p: u32,
    pub z: u32,
    pub g: u32,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub w_reveal: usize,
    pub lambda: usize,
}

impl CrossParams {
    /// Small desk parameters for fast exhaustive tests; not an official set.
    pub fn desk() -> Self {
        Self {
            name: "cross-desk".into(),
            p: 127,
            z: 7,
            g: 2,
            n: 30,
            k: 15,
            t: 32,
            w_reveal: 16,
            lambda: 128,
        }
    }

    pub fn by_name(name: &str) -> Result<Self, CrossError> {
        match name {
            "cross-desk" => Ok(Self::desk()),
            _ => Err(CrossError::Unknown(name.into())),
        }
    }

    pub fn names() -> Vec<&'static str> {
        vec!["cross-desk"]
    }

    pub fn validate(&self) -> Result<(), CrossError> {
        let f = Field::new(self.p)?;
        let bad = |m: &str| Err(CrossError::Params(format!("{}: {m}", self.name)));
        if self.z < 2 || self.z > 256 || !(self.p - 1).is_multiple_of(self.z) {
            return bad("z must divide p-1 and lie in [2, 256]");
        }
        let g = match f.check(self.g) {
            Ok(g) if g != 0 => g,
            _ => return bad("g must be a nonzero field element"),
        };
        if f.pow(g, self.z as u64) != 1 || (1..self.z).any(|j| f.pow(g, j as u64) == 1) {
            return bad("g must have multiplicative order z");
        }
        if self.k == 0 || self.k >= self.n {
            return bad("need 0 < k < n");
        }
        if self.w_reveal == 0 || self.w_reveal >= self.t {
            return bad("need 1 <= w_reveal < t");
        }
        if self.lambda == 0 || !self.lambda.is_multiple_of(8) {
            return bad("lambda must be a positive multiple of 8");
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        Field::new(self.p).expect("validated modulus")
    }

    pub fn l2(&self) -> usize {
        leaf_count(self.t)
    }

    pub fn seed_bytes(&self) -> usize {
        self.lambda / 8
    }

    pub fn salt_bytes(&self) -> usize {
        self.lambda / 4
    }

    pub fn hash_bytes(&self) -> usize {
        self.lambda / 4
    }

    pub fn group(&self) -> Group {
        let field = self.field();
        let g = field.check(self.g).expect("validated generator");
        let powers = (0..self.z as u64).map(|e| field.pow(g, e)).collect();
        Group {
            field,
            z: self.z,
            powers,
        }
    }
}

/// The order-`z` subgroup `E = <g>` of `F_p*`, with its power table.
#[derive(Clone, Debug)]
pub struct Group {
    field: Field,
    z: u32,
    powers: Vec<FqElem>,
}

impl Group {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn z(&self) -> u32 {
        self.z
    }

    pub fn pow(&self, e: u8) -> FqElem {
        self.powers[e as usize]
    }
}

/// An element of `E^n` in exponent form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RestrictedVector {
    pub exps: Vec<u8>,
}

impl RestrictedVector {
    pub fn identity(n: usize) -> Self {
        Self { exps: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn values(&self, g: &Group) -> Vec<FqElem> {
        self.exps.iter().map(|&e| g.pow(e)).collect()
    }

    /// Exponent form of a vector of group elements, if every entry lies in `E`.
    pub fn from_values(g: &Group, values: &[FqElem]) -> Option<Self> {
        values
            .iter()
            .map(|v| g.powers.iter().position(|p| p == v).map(|e| e as u8))
            .collect::<Option<Vec<u8>>>()
            .map(|exps| Self { exps })
    }

    pub fn is_valid(&self, g: &Group) -> bool {
        self.exps.iter().all(|&e| (e as u32) < g.z)
    }

    pub fn inverse(&self, g: &Group) -> Self {
        Self {
            exps: self
                .exps
                .iter()
                .map(|&e| ((g.z - e as u32) % g.z) as u8)
                .collect(),
        }
    }
}

/// Componentwise multiplication of `x` by `g^σ`.
pub fn group_apply(
    g: &Group,
    sigma: &RestrictedVector,
    x: &[FqElem],
) -> Result<Vec<FqElem>, CrossError> {
    if sigma.n() != x.len() {
        return Err(CrossError::Dimension {
            expected: sigma.n(),
            got: x.len(),
        });
    }
    Ok(sigma
        .exps
        .iter()
        .zip(x)
        .map(|(&e, &v)| g.field.mul(g.pow(e), v))
        .collect())
}

/// `σ` with `σ(e') = e`: exponents `e - e' mod z`.
pub fn group_quotient(
    g: &Group,
    e: &RestrictedVector,
    e_prime: &RestrictedVector,
) -> Result<RestrictedVector, CrossError> {
    if e.n() != e_prime.n() {
        return Err(CrossError::Dimension {
            expected: e.n(),
            got: e_prime.n(),
        });
    }
    let z = g.z;
    Ok(RestrictedVector {
        exps: e
            .exps
            .iter()
            .zip(&e_prime.exps)
            .map(|(&a, &b)| ((a as u32 + z - b as u32) % z) as u8)
            .collect(),
    })
}

pub fn encode_elems(v: &[FqElem]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn hash(p: &CrossParams, tag: &[u8], parts: &[&[u8]]) -> Vec<u8> {
    XofStream::new(tag, parts).bytes(p.hash_bytes())
}

/// Byte string hex-encoded in JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexBytes(#[serde(with = "hex")] pub Vec<u8>);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CrossSecretFile", into = "CrossSecretFile")]
pub struct CrossSecretKey {
    pub params: CrossParams,
    pub e: RestrictedVector,
    pub public: CrossPublicKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CrossPublicFile", into = "CrossPublicFile")]
pub struct CrossPublicKey {
    pub params: CrossParams,
    pub hseed: Seed,
    /// Parity-check matrix, `(n-k) × n`.
    pub h: FqMatrix,
    /// Syndrome `e·H^T`.
    pub s: Vec<FqElem>,
}

#[derive(Serialize, Deserialize)]
struct CrossSecretFile {
    params: CrossParams,
    hseed: Seed,
    e: RestrictedVector,
}

#[derive(Serialize, Deserialize)]
struct CrossPublicFile {
    params: CrossParams,
    hseed: Seed,
    s: Vec<FqElem>,
}

impl TryFrom<CrossSecretFile> for CrossSecretKey {
    type Error = CrossError;

    fn try_from(f: CrossSecretFile) -> Result<Self, CrossError> {
        f.params.validate()?;
        let g = f.params.group();
        if f.e.n() != f.params.n || !f.e.is_valid(&g) {
            return Err(CrossError::MalformedKey("secret vector".into()));
        }
        let h = parity_check(&f.params, &f.hseed);
        let s = syndrome(&g, &h, &f.e);
        let public = CrossPublicKey {
            params: f.params.clone(),
            hseed: f.hseed,
            h,
            s,
        };
        Ok(Self {
            params: f.params,
            e: f.e,
            public,
        })
    }
}

impl From<CrossSecretKey> for CrossSecretFile {
    fn from(k: CrossSecretKey) -> Self {
        Self {
            params: k.params,
            hseed: k.public.hseed,
            e: k.e,
        }
    }
}

impl TryFrom<CrossPublicFile> for CrossPublicKey {
    type Error = CrossError;

    fn try_from(f: CrossPublicFile) -> Result<Self, CrossError> {
        f.params.validate()?;
        let field = f.params.field();
        if f.s.len() != f.params.n - f.params.k
            || f.s.iter().any(|&v| field.check(v as u32).is_err())
        {
            return Err(CrossError::MalformedKey("syndrome".into()));
        }
        let h = parity_check(&f.params, &f.hseed);
        Ok(Self {
            params: f.params,
            hseed: f.hseed,
            h,
            s: f.s,
        })
    }
}

impl From<CrossPublicKey> for CrossPublicFile {
    fn from(k: CrossPublicKey) -> Self {
        Self {
            params: k.params,
            hseed: k.hseed,
            s: k.s,
        }
    }
}

pub fn parity_check(p: &CrossParams, hseed: &Seed) -> FqMatrix {
    let field = p.field();
    let mut xs = XofStream::new(TAG_VEC, &[hseed.as_bytes(), b"parity-check"]);
    let data = (0..(p.n - p.k) * p.n)
        .map(|_| xs.field_elem(&field))
        .collect();
    FqMatrix::from_vec(field, p.n - p.k, p.n, data).expect("shape")
}

/// `e·H^T`.
pub fn syndrome(g: &Group, h: &FqMatrix, e: &RestrictedVector) -> Vec<FqElem> {
    h.mul_vec(&e.values(g))
}

pub fn sample_restricted(p: &CrossParams, seed: &[u8], label: &[u8]) -> RestrictedVector {
    let mut xs = XofStream::new(TAG_RVEC, &[seed, label]);
    RestrictedVector {
        exps: (0..p.n).map(|_| xs.bounded(p.z as u64) as u8).collect(),
    }
}

pub fn cross_keygen(
    params: &CrossParams,
    entropy: &Seed,
) -> Result<(CrossSecretKey, CrossPublicKey), CrossError> {
    params.validate()?;
    let hseed = Seed::derive(
        TAG_GSEED,
        &[entropy.as_bytes(), b"cross"],
        params.seed_bytes(),
    );
    let e = sample_restricted(params, entropy.as_bytes(), b"secret");
    CrossSecretKey::try_from(CrossSecretFile {
        params: params.clone(),
        hseed,
        e,
    })
    .map(|sk| {
        let pk = sk.public.clone();
        (sk, pk)
    })
}

/// `(u', e')` for one round, from its leaf seed.
pub fn round_vectors(p: &CrossParams, eseed: &Seed) -> (Vec<FqElem>, RestrictedVector) {
    let both = Seed::derive(TAG_CROSS_ROUND, &[eseed.as_bytes()], 2 * p.seed_bytes());
    let (su, se) = both.as_bytes().split_at(p.seed_bytes());
    let field = p.field();
    let mut xs = XofStream::new(TAG_VEC, &[su]);
    let u = (0..p.n).map(|_| xs.field_elem(&field)).collect();
    (u, sample_restricted(p, se, b"round"))
}

/// Heap-ordered Merkle tree over a power-of-two padding of the leaves.
#[derive(Clone, Debug)]
pub struct MerkleTree {
    width: usize,
    nodes: Vec<Vec<u8>>,
}

fn merkle_parent(p: &CrossParams, l: &[u8], r: &[u8]) -> Vec<u8> {
    hash(p, TAG_MERKLE, &[l, r])
}

impl MerkleTree {
    pub fn build(p: &CrossParams, leaves: &[Vec<u8>]) -> Self {
        let width = leaves.len().next_power_of_two().max(2);
        let mut nodes = vec![vec![0u8; p.hash_bytes()]; 2 * width - 1];
        for (i, l) in leaves.iter().enumerate() {
            nodes[width - 1 + i] = l.clone();
        }
        for i in (0..width - 1).rev() {
            nodes[i] = merkle_parent(p, &nodes[2 * i + 1], &nodes[2 * i + 2]);
        }
        Self { width, nodes }
    }

    pub fn root(&self) -> &[u8] {
        &self.nodes[0]
    }

    /// Sibling hashes from leaf `i` up to the root's children.
    pub fn proof(&self, i: usize) -> Vec<HexBytes> {
        let mut node = self.width - 1 + i;
        let mut out = Vec::new();
        while node != 0 {
            let sib = if node % 2 == 1 { node + 1 } else { node - 1 };
            out.push(HexBytes(self.nodes[sib].clone()));
            node = (node - 1) / 2;
        }
        out
    }
}

pub fn merkle_verify(
    p: &CrossParams,
    root: &[u8],
    leaf: &[u8],
    i: usize,
    proof: &[HexBytes],
) -> bool {
    let width = p.t.next_power_of_two().max(2);
    if i >= p.t || proof.len() != width.trailing_zeros() as usize {
        return false;
    }
    let mut node = width - 1 + i;
    let mut acc = leaf.to_vec();
    for sib in proof {
        acc = if node % 2 == 1 {
            merkle_parent(p, &acc, &sib.0)
        } else {
            merkle_parent(p, &sib.0, &acc)
        };
        node = (node - 1) / 2;
    }
    acc == root
}

/// Published data of a round outside `J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossRoundResponse {
    pub y: Vec<FqElem>,
    pub sigma: RestrictedVector,
    pub c1: HexBytes,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSignature {
    pub salt: Seed,
    pub c0: HexBytes,
    pub c1: HexBytes,
    pub h: HexBytes,
    pub seed_path: Vec<Seed>,
    pub merkle_proofs: Vec<Vec<HexBytes>>,
    pub f_list: Vec<CrossRoundResponse>,
}

/// Per-round signer state.
#[derive(Clone, Debug)]
pub struct CrossRound {
    pub u_prime: Vec<FqElem>,
    pub e_prime: RestrictedVector,
    pub sigma: RestrictedVector,
    pub s_tilde: Vec<FqElem>,
    pub c0: Vec<u8>,
    pub c1: Vec<u8>,
    pub y: Vec<FqElem>,
}

#[derive(Clone, Debug)]
pub struct CrossTranscript {
    pub tree: SeedTree,
    pub salt: Seed,
    pub merkle: MerkleTree,
    pub c0: Vec<u8>,
    pub c1: Vec<u8>,
    pub h: Vec<u8>,
    pub betas: Vec<FqElem>,
    /// Second challenge; entries 1 mark rounds whose seeds are published.
    pub b: Digest,
    pub rounds: Vec<CrossRound>,
}

impl CrossTranscript {
    /// Hidden-round mask: set for rounds outside `J`.
    pub fn hidden_mask(&self) -> Vec<bool> {
        hidden_mask(&self.b)
    }
}

pub fn hidden_mask(b: &Digest) -> Vec<bool> {
    b.entries().iter().map(|&v| v == 0).collect()
}

pub fn gen_ch1(p: &CrossParams, c0: &[u8], c1: &[u8], msg: &[u8], salt: &Seed) -> Vec<FqElem> {
    let field = p.field();
    let mut xs = XofStream::new(TAG_CH1, &[c0, c1, msg, salt.as_bytes()]);
    (0..p.t).map(|_| xs.nonzero_elem(&field)).collect()
}

pub fn gen_ch2(
    p: &CrossParams,
    c0: &[u8],
    c1: &[u8],
    betas: &[FqElem],
    h: &[u8],
    msg: &[u8],
    salt: &Seed,
) -> Digest {
    let input = hash(
        p,
        TAG_CH2,
        &[c0, c1, &encode_elems(betas), h, msg, salt.as_bytes()],
    );
    sample_fixed_weight_digest(&input, p.t, p.w_reveal, 2).expect("validated parameters")
}

fn c0_round(
    p: &CrossParams,
    s_tilde: &[FqElem],
    sigma: &RestrictedVector,
    salt: &Seed,
    i: usize,
) -> Vec<u8> {
    hash(
        p,
        TAG_C0,
        &[
            &encode_elems(s_tilde),
            &sigma.exps,
            salt.as_bytes(),
            &(i as u32).to_le_bytes(),
        ],
    )
}

fn c1_round(p: &CrossParams, u: &[FqElem], e: &RestrictedVector, salt: &Seed, i: usize) -> Vec<u8> {
    hash(
        p,
        TAG_C1,
        &[
            &encode_elems(u),
            &e.exps,
            salt.as_bytes(),
            &(i as u32).to_le_bytes(),
        ],
    )
}

fn fold_hash(p: &CrossParams, tag: &[u8], items: &[Vec<u8>]) -> Vec<u8> {
    let parts: Vec<&[u8]> = items.iter().map(Vec::as_slice).collect();
    hash(p, tag, &parts)
}

fn affine(f: &Field, u: &[FqElem], beta: FqElem, e: &[FqElem]) -> Vec<FqElem> {
    u.iter()
        .zip(e)
        .map(|(&a, &b)| f.add(a, f.mul(beta, b)))
        .collect()
}

/// Everything up to the second challenge.
pub fn cross_commit(sk: &CrossSecretKey, msg: &[u8], rng: &Seed) -> CrossTranscript {
    let p = &sk.params;
    let g = p.group();
    let field = p.field();
    let mseed = Seed::derive(TAG_SIGN, &[rng.as_bytes(), b"mseed"], p.seed_bytes());
    let salt = Seed::derive(TAG_SIGN, &[rng.as_bytes(), b"salt"], p.salt_bytes());
    let tree = build_seed_tree(&mseed, &salt, p.t);
    let h_mat = &sk.public.h;
    let mut rounds: Vec<CrossRound> = (0..p.t)
        .into_par_iter()
        .map(|i| {
            let (u_prime, e_prime) = round_vectors(p, tree.leaf(i));
            let sigma = group_quotient(&g, &sk.e, &e_prime).expect("same length");
            let u = group_apply(&g, &sigma, &u_prime).expect("same length");
            let s_tilde = h_mat.mul_vec(&u);
            let c0 = c0_round(p, &s_tilde, &sigma, &salt, i);
            let c1 = c1_round(p, &u_prime, &e_prime, &salt, i);
            CrossRound {
                u_prime,
                e_prime,
                sigma,
                s_tilde,
                c0,
                c1,
                y: Vec::new(),
            }
        })
        .collect();
    let merkle = MerkleTree::build(p, &rounds.iter().map(|r| r.c0.clone()).collect::<Vec<_>>());
    let c0 = merkle.root().to_vec();
    let c1 = fold_hash(
        p,
        TAG_C1_ALL,
        &rounds.iter().map(|r| r.c1.clone()).collect::<Vec<_>>(),
    );
    let betas = gen_ch1(p, &c0, &c1, msg, &salt);
    let mut hs = Vec::with_capacity(p.t);
    for (r, &beta) in rounds.iter_mut().zip(&betas) {
        r.y = affine(&field, &r.u_prime, beta, &r.e_prime.values(&g));
        hs.push(hash(p, TAG_H, &[&encode_elems(&r.y)]));
    }
    let h = fold_hash(p, TAG_H_ALL, &hs);
    let b = gen_ch2(p, &c0, &c1, &betas, &h, msg, &salt);
    CrossTranscript {
        tree,
        salt,
        merkle,
        c0,
        c1,
        h,
        betas,
        b,
        rounds,
    }
}

/// Signature carrying the seeds at `published` node indices.
pub fn cross_assemble(tr: &CrossTranscript, published: &[usize]) -> CrossSignature {
    let hidden: Vec<usize> = (0..tr.b.t()).filter(|&i| tr.b.entries()[i] == 0).collect();
    CrossSignature {
        salt: tr.salt.clone(),
        c0: HexBytes(tr.c0.clone()),
        c1: HexBytes(tr.c1.clone()),
        h: HexBytes(tr.h.clone()),
        seed_path: tr.tree.publish(published).seeds(),
        merkle_proofs: hidden.iter().map(|&i| tr.merkle.proof(i)).collect(),
        f_list: hidden
            .iter()
            .map(|&i| CrossRoundResponse {
                y: tr.rounds[i].y.clone(),
                sigma: tr.rounds[i].sigma.clone(),
                c1: HexBytes(tr.rounds[i].c1.clone()),
            })
            .collect(),
    }
}

pub fn honest_published(tr: &CrossTranscript) -> Vec<usize> {
    compute_seeds_to_publish(&tr.hidden_mask(), tr.tree.l2()).published_nodes()
}

pub fn cross_sign(sk: &CrossSecretKey, msg: &[u8], rng: &Seed) -> CrossSignature {
    let tr = cross_commit(sk, msg, rng);
    cross_assemble(&tr, &honest_published(&tr))
}

/// Challenges recomputed from a signature.
pub fn cross_challenges(
    pk: &CrossPublicKey,
    msg: &[u8],
    sig: &CrossSignature,
) -> (Vec<FqElem>, Digest) {
    let p = &pk.params;
    let betas = gen_ch1(p, &sig.c0.0, &sig.c1.0, msg, &sig.salt);
    let b = gen_ch2(p, &sig.c0.0, &sig.c1.0, &betas, &sig.h.0, msg, &sig.salt);
    (betas, b)
}

fn check_shape(p: &CrossParams, sig: &CrossSignature) -> Result<(), CrossError> {
    let hb = p.hash_bytes();
    let bad = |m: &str| Err(CrossError::MalformedSignature(m.into()));
    if sig.salt.len() != p.salt_bytes()
        || sig.c0.0.len() != hb
        || sig.c1.0.len() != hb
        || sig.h.0.len() != hb
    {
        return bad("field lengths");
    }
    if sig.f_list.len() != p.t - p.w_reveal || sig.merkle_proofs.len() != p.t - p.w_reveal {
        return bad("response count");
    }
    if sig.seed_path.iter().any(|s| s.len() != p.seed_bytes()) {
        return bad("seed length");
    }
    Ok(())
}

/// Consistency check of a signature under the node layout `published`.
pub fn check_with_layout(
    pk: &CrossPublicKey,
    msg: &[u8],
    sig: &CrossSignature,
    published: &[usize],
) -> Result<LeafSeeds, CrossError> {
    let p = &pk.params;
    check_shape(p, sig)?;
    let g = p.group();
    let field = p.field();
    let (betas, b) = cross_challenges(pk, msg, sig);
    if published.len() != sig.seed_path.len() {
        return Err(CrossError::Rejected(format!(
            "{} seeds, expected {}",
            sig.seed_path.len(),
            published.len()
        )));
    }
    let leaves = regenerate_at(&sig.seed_path, published, &sig.salt, p.l2(), p.t)
        .map_err(|e| CrossError::MalformedSignature(e.to_string()))?;
    let mut c1s = Vec::with_capacity(p.t);
    let mut hs = Vec::with_capacity(p.t);
    let mut k = 0;
    let neg_s: Vec<FqElem> = pk.s.iter().map(|&v| field.neg(v)).collect();
    for (i, &beta) in betas.iter().enumerate().take(p.t) {
        if b.entries()[i] == 1 {
            let seed = leaves
                .get(&i)
                .ok_or_else(|| CrossError::Rejected(format!("no seed for round {i}")))?;
            let (u, e) = round_vectors(p, seed);
            c1s.push(c1_round(p, &u, &e, &sig.salt, i));
            hs.push(hash(
                p,
                TAG_H,
                &[&encode_elems(&affine(&field, &u, beta, &e.values(&g)))],
            ));
        } else {
            let f = &sig.f_list[k];
            if f.y.len() != p.n
                || f.y.iter().any(|&v| v as u32 >= p.p)
                || f.sigma.n() != p.n
                || !f.sigma.is_valid(&g)
            {
                return Err(CrossError::MalformedSignature(format!("response {k}")));
            }
            let sy = pk.h.mul_vec(&group_apply(&g, &f.sigma, &f.y)?);
            let s_tilde = affine(&field, &sy, beta, &neg_s);
            let c0 = c0_round(p, &s_tilde, &f.sigma, &sig.salt, i);
            if !merkle_verify(p, &sig.c0.0, &c0, i, &sig.merkle_proofs[k]) {
                return Err(CrossError::Rejected(format!("merkle proof for round {i}")));
            }
            c1s.push(f.c1.0.clone());
            hs.push(hash(p, TAG_H, &[&encode_elems(&f.y)]));
            k += 1;
        }
    }
    if fold_hash(p, TAG_C1_ALL, &c1s) != sig.c1.0 {
        return Err(CrossError::Rejected("c1".into()));
    }
    if fold_hash(p, TAG_H_ALL, &hs) != sig.h.0 {
        return Err(CrossError::Rejected("h".into()));
    }
    Ok(leaves)
}

/// Challenges, Merkle proofs, the `h` chain and the revealed rounds' `c1`.
pub fn cross_check_response(
    pk: &CrossPublicKey,
    msg: &[u8],
    sig: &CrossSignature,
) -> Result<(), CrossError> {
    let p = &pk.params;
    check_shape(p, sig)?;
    let (_, b) = cross_challenges(pk, msg, sig);
    let layout = compute_seeds_to_publish(&hidden_mask(&b), p.l2()).published_nodes();
    check_with_layout(pk, msg, sig, &layout).map(|_| ())
}
