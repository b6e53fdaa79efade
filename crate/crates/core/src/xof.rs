//! SHAKE-256 expansion and every sampler built on it.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;
use thiserror::Error;

use crate::gf::{normalize_column, rref_with_pivots, Field, FqElem, FqMatrix, RrefMatrix};
use crate::monomial::MonomialMatrix;
use crate::seedtree::Digest;

pub const TAG_GSEED: &[u8] = b"gseed";
pub const TAG_MONO: &[u8] = b"mono";
pub const TAG_DIGEST: &[u8] = b"digest";
pub const TAG_TREE: &[u8] = b"tree";
pub const TAG_CMT: &[u8] = b"cmt";
pub const TAG_MSEED: &[u8] = b"mseed";
pub const TAG_SIGN: &[u8] = b"sign";
pub const TAG_C0: &[u8] = b"c0";
pub const TAG_C1: &[u8] = b"c1";
pub const TAG_C1_ALL: &[u8] = b"c1-all";
pub const TAG_MERKLE: &[u8] = b"merkle";
pub const TAG_H: &[u8] = b"h";
pub const TAG_H_ALL: &[u8] = b"h-all";
pub const TAG_CH1: &[u8] = b"ch1";
pub const TAG_CH2: &[u8] = b"ch2";
pub const TAG_CROSS_ROUND: &[u8] = b"cross-round";
pub const TAG_VEC: &[u8] = b"vec";
pub const TAG_RVEC: &[u8] = b"rvec";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XofError {
    #[error("weight {w} invalid for length {t} over Z_{s}")]
    BadWeight { t: usize, w: usize, s: usize },
    #[error("generator parameters k = {k}, n = {n} invalid")]
    BadShape { k: usize, n: usize },
}

/// A byte string of `λ/8` bytes, hex-encoded in JSON.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seed(#[serde(with = "hex")] Vec<u8>);

impl Seed {
    pub fn new(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    /// Derives a seed of `len` bytes from arbitrary input under `tag`.
    pub fn derive(tag: &[u8], parts: &[&[u8]], len: usize) -> Self {
        Self(XofStream::new(tag, parts).bytes(len))
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        hex::decode(s).map(Self)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", hex::encode(&self.0))
    }
}

/// Domain-separated SHAKE-256 output stream.
///
/// Absorbs `len(tag) ‖ tag` then `len(part) ‖ part` for each part, lengths as u64 LE.
pub struct XofStream {
    reader: <Shake256 as ExtendableOutput>::Reader,
}

impl XofStream {
    pub fn new(tag: &[u8], parts: &[&[u8]]) -> Self {
        let mut h = Shake256::default();
        h.update(&(tag.len() as u64).to_le_bytes());
        h.update(tag);
        for p in parts {
            h.update(&(p.len() as u64).to_le_bytes());
            h.update(p);
        }
        Self {
            reader: h.finalize_xof(),
        }
    }

    pub fn fill(&mut self, buf: &mut [u8]) {
        self.reader.read(buf);
    }

    pub fn bytes(&mut self, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; n];
        self.fill(&mut v);
        v
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill(&mut b);
        u64::from_le_bytes(b)
    }

    /// Value in `[0, bound)` via the high half of a 64×64 product.
    pub fn bounded(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    pub fn field_elem(&mut self, f: &Field) -> FqElem {
        self.bounded(f.q() as u64) as FqElem
    }

    pub fn nonzero_elem(&mut self, f: &Field) -> FqElem {
        1 + self.bounded(f.q() as u64 - 1) as FqElem
    }

    /// Fisher–Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<u32> {
        let mut p: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = self.bounded(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        p
    }
}

/// First `n_bytes` of the stream for `(seed, tag)`.
pub fn xof_expand(seed: &[u8], domain_tag: &[u8], n_bytes: usize) -> Vec<u8> {
    XofStream::new(domain_tag, &[seed]).bytes(n_bytes)
}

/// Uniform full-rank `k × n` generator in RREF.
///
/// Candidates with a zero column or two proportional columns are also rejected
/// whenever `n` does not exceed the number of projective points, so that every
/// column of the code is identified by its normalized form.
pub fn sample_rref_generator(
    seed: &Seed,
    k: usize,
    n: usize,
    field: Field,
) -> Result<RrefMatrix, XofError> {
    if k == 0 || k >= n {
        return Err(XofError::BadShape { k, n });
    }
    let q = field.q() as u128;
    let projective = (q.checked_pow(k as u32).unwrap_or(u128::MAX) - 1) / (q - 1);
    let distinct = n as u128 <= projective;
    let mut xs = XofStream::new(TAG_GSEED, &[seed.as_bytes()]);
    loop {
        let data: Vec<FqElem> = (0..k * n).map(|_| xs.field_elem(&field)).collect();
        let m = FqMatrix::from_vec(field, k, n, data).expect("shape");
        let r = rref_with_pivots(&m);
        if r.rank() < k {
            continue;
        }
        if distinct && !columns_distinct(&r.matrix) {
            continue;
        }
        return Ok(r);
    }
}

fn columns_distinct(m: &FqMatrix) -> bool {
    let f = m.field();
    let mut seen = HashSet::with_capacity(m.cols());
    for c in 0..m.cols() {
        let col = m.column(c);
        if col.iter().all(|&v| v == 0) {
            return false;
        }
        if !seen.insert(normalize_column(&f, &col)) {
            return false;
        }
    }
    true
}

/// Uniform monomial: Fisher–Yates permutation, coefficients uniform in `F_q*`.
pub fn sample_monomial(seed: &Seed, n: usize, field: Field) -> MonomialMatrix {
    let mut xs = XofStream::new(TAG_MONO, &[seed.as_bytes()]);
    let perm = xs.permutation(n);
    let coeffs = (0..n).map(|_| xs.nonzero_elem(&field)).collect();
    MonomialMatrix::new(field, perm, coeffs).expect("sampler output is a monomial")
}

/// Fixed-weight challenge in `Z_s^t` with exactly `w` nonzero entries.
pub fn sample_fixed_weight_digest(
    input: &[u8],
    t: usize,
    w: usize,
    s: usize,
) -> Result<Digest, XofError> {
    if w == 0 || w > t || !(2..=256).contains(&s) {
        return Err(XofError::BadWeight { t, w, s });
    }
    let mut xs = XofStream::new(TAG_DIGEST, &[input]);
    let mut pos: Vec<usize> = (0..t).collect();
    for i in 0..w {
        let j = i + xs.bounded((t - i) as u64) as usize;
        pos.swap(i, j);
    }
    let mut entries = vec![0u8; t];
    for &p in &pos[..w] {
        entries[p] = 1 + xs.bounded(s as u64 - 1) as u8;
    }
    Ok(Digest::new(entries, s).expect("weight matches"))
}

/// Length-prefixed hash of the parts, `out_len` bytes long.
pub fn hash_commit(parts: &[&[u8]], out_len: usize) -> Vec<u8> {
    XofStream::new(TAG_CMT, parts).bytes(out_len)
}

/// Expands a master seed into `count` seeds of `len` bytes each.
pub fn expand_seeds(master: &Seed, tag: &[u8], count: usize, len: usize) -> Vec<Seed> {
    let raw = xof_expand(master.as_bytes(), tag, count * len);
    raw.chunks_exact(len.max(1))
        .take(count)
        .map(|c| Seed(c.to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn seed(i: u64) -> Seed {
        Seed::new(i.to_le_bytes().repeat(2))
    }

    #[test]
    fn expand_is_deterministic_and_prefix_consistent() {
        let a = xof_expand(b"abc", b"t", 64);
        assert_eq!(a, xof_expand(b"abc", b"t", 64));
        assert_eq!(&a[..10], &xof_expand(b"abc", b"t", 10)[..]);
        assert_ne!(a, xof_expand(b"abc", b"u", 64));
        assert!(xof_expand(b"abc", b"t", 0).is_empty());
    }

    #[test]
    fn domain_tags_separate_outputs() {
        let tags: [&[u8]; 7] = [
            TAG_GSEED, TAG_MONO, TAG_DIGEST, TAG_TREE, TAG_CMT, TAG_MSEED, TAG_SIGN,
        ];
        let outs: HashSet<Vec<u8>> = tags.iter().map(|t| xof_expand(b"same", t, 32)).collect();
        assert_eq!(outs.len(), tags.len());
    }

    #[test]
    fn framing_distinguishes_splits() {
        assert_ne!(
            hash_commit(&[b"a", b"bc"], 32),
            hash_commit(&[b"ab", b"c"], 32)
        );
        assert_ne!(
            hash_commit(&[b"a", b"b"], 32),
            hash_commit(&[b"b", b"a"], 32)
        );
        assert_eq!(
            hash_commit(&[b"a", b"b"], 32),
            hash_commit(&[b"a", b"b"], 32)
        );
        assert_eq!(hash_commit(&[b"x"], 48).len(), 48);
    }

    #[test]
    fn generator_is_full_rank_rref() {
        let f = Field::new(7).unwrap();
        for i in 0..20 {
            let g = sample_rref_generator(&seed(i), 5, 10, f).unwrap();
            assert_eq!(g.rank(), 5);
            assert_eq!(rref_with_pivots(&g.matrix), g);
            assert!(columns_distinct(&g.matrix));
        }
        assert!(sample_rref_generator(&seed(0), 5, 5, f).is_err());
    }

    #[test]
    fn generator_seeds_do_not_collide() {
        let f = Field::new(7).unwrap();
        let set: HashSet<Vec<u16>> = (0..100)
            .map(|i| {
                sample_rref_generator(&seed(i), 5, 10, f)
                    .unwrap()
                    .matrix
                    .data()
                    .to_vec()
            })
            .collect();
        assert_eq!(set.len(), 100);
    }

    #[test]
    fn monomial_is_valid_and_deterministic() {
        let f = Field::new(127).unwrap();
        let a = sample_monomial(&seed(3), 40, f);
        assert_eq!(a, sample_monomial(&seed(3), 40, f));
        assert_ne!(a, sample_monomial(&seed(4), 40, f));
        assert!(a.coeffs().iter().all(|&c| c != 0));
    }

    #[test]
    fn permutation_uniformity_n4() {
        let f = Field::new(7).unwrap();
        let draws = 120_000u64;
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        for i in 0..draws {
            *counts
                .entry(sample_monomial(&seed(i), 4, f).perm().to_vec())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (perm, &c) in &counts {
            assert!((c as f64 - mean).abs() < 5.0 * sd, "{perm:?}: {c}");
        }
    }

    #[test]
    fn digest_shapes() {
        let d = sample_fixed_weight_digest(b"x", 8, 8, 3).unwrap();
        assert!(d.entries().iter().all(|&e| e != 0));
        let d = sample_fixed_weight_digest(b"y", 50, 20, 2).unwrap();
        assert_eq!(d.weight(), 20);
        assert!(d.entries().iter().all(|&e| e <= 1));
        let d = sample_fixed_weight_digest(b"z", 50, 20, 8).unwrap();
        assert!(d.entries().iter().all(|&e| e < 8));
        assert!(sample_fixed_weight_digest(b"z", 5, 6, 2).is_err());
        assert!(sample_fixed_weight_digest(b"z", 5, 0, 2).is_err());
        assert!(sample_fixed_weight_digest(b"z", 5, 2, 1).is_err());
    }

    #[test]
    fn digest_support_uniformity() {
        let draws = 150_000u64;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for i in 0..draws {
            let d = sample_fixed_weight_digest(&i.to_le_bytes(), 6, 2, 2).unwrap();
            *counts.entry(d.support()).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        let p = 1.0 / 15.0;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (s, &c) in &counts {
            assert!((c as f64 - mean).abs() < 5.0 * sd, "{s:?}: {c}");
        }
    }

    #[test]
    fn seed_hex_round_trip() {
        let s = seed(9);
        assert_eq!(Seed::from_hex(&s.to_hex()).unwrap(), s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, format!("\"{}\"", s.to_hex()));
        assert_eq!(expand_seeds(&s, TAG_MSEED, 3, 16).len(), 3);
    }
}
