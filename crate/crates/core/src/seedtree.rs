//! Seed trees, reference trees and disclosure paths.
//!
//! Nodes are numbered heap-style: root 0, children `2i+1` and `2i+2`, and the
//! `2l` leaves sit at `[2l-1, 4l-2]`. Leaf `2l-1+i` belongs to round `i`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::xof::{Seed, XofStream, TAG_TREE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedTreeError {
    #[error("disclosure mismatch: expected {expected} tree nodes, got {got}")]
    PathMismatch { expected: usize, got: usize },
    #[error("digest entry {value} out of range for Z_{s}")]
    BadEntry { value: u8, s: usize },
    #[error("node {node} outside a tree of {nodes} nodes")]
    BadNode { node: usize, nodes: usize },
}

/// Leaf-level seeds indexed by round.
pub type LeafSeeds = BTreeMap<usize, Seed>;

pub fn parent(i: usize) -> usize {
    if i == 0 {
        0
    } else {
        (i - 1) / 2
    }
}

/// Number of leaves `2l = 2^⌈log t⌉`, at least 2.
pub fn leaf_count(t: usize) -> usize {
    t.next_power_of_two().max(2)
}

pub fn node_count(l2: usize) -> usize {
    2 * l2 - 1
}

#[inline]
pub fn leaf_node(round: usize, l2: usize) -> usize {
    l2 - 1 + round
}

/// Depth of node `i` (root 0).
pub fn depth(i: usize) -> usize {
    (usize::BITS - 1 - (i + 1).leading_zeros()) as usize
}

/// Rounds `[lo, hi)` covered by the subtree of `node`, before clipping to `t`.
pub fn leaf_span(node: usize, l2: usize) -> (usize, usize) {
    let levels = l2.trailing_zeros() as usize - depth(node);
    let mut lo = node;
    for _ in 0..levels {
        lo = 2 * lo + 1;
    }
    let lo = lo - (l2 - 1);
    (lo, lo + (1 << levels))
}

/// Whether `anc` is `node` or one of its ancestors.
pub fn is_ancestor_or_self(anc: usize, mut node: usize) -> bool {
    loop {
        if node == anc {
            return true;
        }
        if node == 0 {
            return false;
        }
        node = parent(node);
    }
}

/// Fixed-weight challenge vector `d ∈ Z_s^t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digest {
    entries: Vec<u8>,
    s: usize,
}

impl Digest {
    pub fn new(entries: Vec<u8>, s: usize) -> Result<Self, SeedTreeError> {
        if let Some(&value) = entries.iter().find(|&&e| e as usize >= s) {
            return Err(SeedTreeError::BadEntry { value, s });
        }
        Ok(Self { entries, s })
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn t(&self) -> usize {
        self.entries.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    /// Binary mask `f[i] = (d[i] ≠ 0)`.
    pub fn mask(&self) -> Vec<bool> {
        self.entries.iter().map(|&e| e != 0).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.t()).filter(|&i| self.entries[i] != 0).collect()
    }
}

/// Full tree of `4l-1` seeds.
#[derive(Clone, Debug)]
pub struct SeedTree {
    l2: usize,
    t: usize,
    nodes: Vec<Seed>,
}

/// Children of a node seed, bound to the salt and the node index.
pub fn child_seeds(node_seed: &Seed, salt: &Seed, node: usize) -> (Seed, Seed) {
    let len = node_seed.len();
    let out = XofStream::new(
        TAG_TREE,
        &[
            node_seed.as_bytes(),
            salt.as_bytes(),
            &(node as u32).to_le_bytes(),
        ],
    )
    .bytes(2 * len);
    (
        Seed::new(out[..len].to_vec()),
        Seed::new(out[len..].to_vec()),
    )
}

pub fn build_seed_tree(master: &Seed, salt: &Seed, t: usize) -> SeedTree {
    let l2 = leaf_count(t);
    let total = node_count(l2);
    let mut nodes = Vec::with_capacity(total);
    nodes.push(master.clone());
    for i in 0..l2 - 1 {
        let (l, r) = child_seeds(&nodes[i], salt, i);
        nodes.push(l);
        nodes.push(r);
    }
    SeedTree { l2, t, nodes }
}

impl SeedTree {
    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn nodes(&self) -> &[Seed] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Seed {
        &self.nodes[i]
    }

    /// Round seed `ESEED[i]`.
    pub fn leaf(&self, round: usize) -> &Seed {
        &self.nodes[leaf_node(round, self.l2)]
    }

    pub fn publish(&self, indices: &[usize]) -> TreeNodeList {
        TreeNodeList {
            nodes: indices
                .iter()
                .map(|&i| (i, self.nodes[i].clone()))
                .collect(),
        }
    }
}

/// Boolean shadow tree; a set bit marks a node that must stay hidden.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceTree {
    l2: usize,
    t: usize,
    bits: Vec<bool>,
}

/// Leaves `2l-1+i := f[i]`, then `x[i] = x[2i+1] ∨ x[2i+2]` bottom-up.
pub fn compute_seeds_to_publish(f: &[bool], l2: usize) -> ReferenceTree {
    compute_with_skipped_store(f, l2, None)
}

/// As [`compute_seeds_to_publish`], except that the store into `skip` never happens.
pub fn compute_with_skipped_store(f: &[bool], l2: usize, skip: Option<usize>) -> ReferenceTree {
    assert!(f.len() <= l2, "t exceeds leaf count");
    let mut bits = vec![false; node_count(l2)];
    for (i, &b) in f.iter().enumerate() {
        let node = leaf_node(i, l2);
        if Some(node) != skip {
            bits[node] = b;
        }
    }
    for i in (0..l2 - 1).rev() {
        if Some(i) != skip {
            bits[i] = bits[2 * i + 1] || bits[2 * i + 2];
        }
    }
    ReferenceTree {
        l2,
        t: f.len(),
        bits,
    }
}

impl ReferenceTree {
    pub fn from_bits(l2: usize, t: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), node_count(l2));
        assert!(t <= l2);
        Self { l2, t, bits }
    }

    /// Number of real rounds; leaves from `t` on are padding.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Whether the subtree of `node` holds at least one real round.
    pub fn has_rounds(&self, node: usize) -> bool {
        leaf_span(node, self.l2).0 < self.t
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Sets node `i` after propagation and recomputes its ancestors by OR.
    pub fn with_forced(&self, node: usize, value: bool) -> Self {
        let mut out = self.clone();
        out.bits[node] = value;
        let mut c = node;
        while c != 0 {
            c = parent(c);
            out.bits[c] = out.bits[2 * c + 1] || out.bits[2 * c + 2];
        }
        out
    }

    /// Nodes with `x[i] = 0` and `x[parent(i)] = 1`, ascending, skipping
    /// subtrees made only of padding leaves.
    pub fn published_nodes(&self) -> Vec<usize> {
        (0..self.bits.len())
            .filter(|&i| !self.bits[i] && self.bits[parent(i)] && self.has_rounds(i))
            .collect()
    }
}

/// Disclosed seed-tree nodes with their indices, ascending by index.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TreeNodeList {
    pub nodes: Vec<(usize, Seed)>,
}

impl TreeNodeList {
    pub fn indices(&self) -> Vec<usize> {
        self.nodes.iter().map(|(i, _)| *i).collect()
    }

    pub fn seeds(&self) -> Vec<Seed> {
        self.nodes.iter().map(|(_, s)| s.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sorts by node index and drops duplicates.
    pub fn canonicalize(&mut self) {
        self.nodes.sort_by_key(|(i, _)| *i);
        self.nodes.dedup_by_key(|(i, _)| *i);
    }
}

pub fn seed_tree_paths(tree: &SeedTree, f: &[bool]) -> TreeNodeList {
    let x = compute_seeds_to_publish(f, tree.l2);
    tree.publish(&x.published_nodes())
}

/// Leaf seeds below `node` whose round lies in `[0, t)`.
pub fn expand_node(
    seed: &Seed,
    node: usize,
    salt: &Seed,
    l2: usize,
    t: usize,
    out: &mut LeafSeeds,
) {
    let (lo, _) = leaf_span(node, l2);
    if lo >= t {
        return;
    }
    if node >= l2 - 1 {
        out.insert(node - (l2 - 1), seed.clone());
        return;
    }
    let (l, r) = child_seeds(seed, salt, node);
    expand_node(&l, 2 * node + 1, salt, l2, t, out);
    expand_node(&r, 2 * node + 2, salt, l2, t, out);
}

/// Expands wire seeds placed at `indices` into leaf seeds.
pub fn regenerate_at(
    seeds: &[Seed],
    indices: &[usize],
    salt: &Seed,
    l2: usize,
    t: usize,
) -> Result<LeafSeeds, SeedTreeError> {
    if seeds.len() != indices.len() {
        return Err(SeedTreeError::PathMismatch {
            expected: indices.len(),
            got: seeds.len(),
        });
    }
    let mut out = LeafSeeds::new();
    for (s, &i) in seeds.iter().zip(indices) {
        expand_node(s, i, salt, l2, t, &mut out);
    }
    Ok(out)
}

/// Verifier-side regeneration with node positions recomputed from `f`.
pub fn regenerate_leaves(
    tree_nodes: &[Seed],
    salt: &Seed,
    f: &[bool],
) -> Result<LeafSeeds, SeedTreeError> {
    let l2 = leaf_count(f.len());
    let x = compute_seeds_to_publish(f, l2);
    regenerate_at(tree_nodes, &x.published_nodes(), salt, l2, f.len())
}

/// Regeneration under a disclosure in which `x[faulted_node]` was forced to 0.
pub fn seed_tree_update(
    tree_nodes: &[Seed],
    salt: &Seed,
    d: &Digest,
    faulted_node: usize,
) -> Result<LeafSeeds, SeedTreeError> {
    let t = d.t();
    let l2 = leaf_count(t);
    if faulted_node >= node_count(l2) {
        return Err(SeedTreeError::BadNode {
            node: faulted_node,
            nodes: node_count(l2),
        });
    }
    let x = compute_seeds_to_publish(&d.mask(), l2).with_forced(faulted_node, false);
    regenerate_at(tree_nodes, &x.published_nodes(), salt, l2, t)
}
