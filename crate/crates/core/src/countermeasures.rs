//! Fault countermeasures for LESS response generation.
//!
//! The flat responder drops the seed tree; the single-pass responder walks each
//! leaf's root path once and decides seed or response from that walk alone.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::fault::FaultModel;
use crate::less::{assemble, commit, response_for, LessSecretKey, LessSignature};
use crate::monomial::PartialMonomialMatrix;
use crate::params::LessParams;
use crate::seedtree::{
    compute_seeds_to_publish, compute_with_skipped_store, depth, is_ancestor_or_self, leaf_node,
    leaf_span, node_count, parent, Digest, ReferenceTree, SeedTree, TreeNodeList,
};
use crate::xof::Seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCounters {
    pub n_check: u64,
    pub n_mono: u64,
    pub n_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Original,
    Countermeasure,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Original => "original",
            Self::Countermeasure => "countermeasure",
        })
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "original" => Ok(Self::Original),
            "countermeasure" | "cm" => Ok(Self::Countermeasure),
            _ => Err(format!("unknown pipeline {s:?}")),
        }
    }
}

/// Digest accessor that counts zero tests per round.
pub struct DigestView<'a> {
    entries: &'a [u8],
    zero_checks: Vec<Cell<u32>>,
}

impl<'a> DigestView<'a> {
    pub fn new(entries: &'a [u8]) -> Self {
        Self {
            entries,
            zero_checks: entries.iter().map(|_| Cell::new(0)).collect(),
        }
    }

    pub fn t(&self) -> usize {
        self.entries.len()
    }

    pub fn is_nonzero(&self, i: usize) -> bool {
        self.zero_checks[i].set(self.zero_checks[i].get() + 1);
        self.entries[i] != 0
    }

    pub fn value(&self, i: usize) -> usize {
        self.entries[i] as usize
    }

    pub fn zero_checks(&self) -> Vec<u32> {
        self.zero_checks.iter().map(Cell::get).collect()
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.t()).map(|i| self.is_nonzero(i)).collect()
    }
}

/// Node-disclosure loop of the original signer: two reads per node.
///
/// `forced` publishes that node whatever the check says.
pub fn seed_tree_paths_counted(
    x: &ReferenceTree,
    forced: Option<usize>,
    c: &mut CostCounters,
) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..x.len() {
        let here = x.get(i);
        let up = x.get(parent(i));
        c.n_check += 2;
        if (!here && up && x.has_rounds(i)) || forced == Some(i) {
            out.push(i);
            c.n_seed += 1;
        }
    }
    out
}

/// Response loop of the original signer: a second zero test per round.
pub fn original_response_rounds(d: &DigestView, c: &mut CostCounters) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..d.t() {
        c.n_check += 1;
        if d.is_nonzero(i) {
            out.push(i);
            c.n_mono += 1;
        }
    }
    out
}

/// One skipped zero test during the scan: iteration index and node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanSkip {
    pub iteration: usize,
    pub node: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scan {
    /// Disclosed nodes in leaf-scan order.
    pub nodes: Vec<usize>,
    /// Rounds answered with a monomial response, in order.
    pub rounds: Vec<usize>,
    /// Nodes tested in each iteration.
    pub paths: Vec<Vec<usize>>,
}

/// Single-pass leaf scan over the reference tree.
///
/// Each iteration tests the leaf's path up to, but not including, the root.
/// A fully set path yields a response; otherwise the highest cleared node is
/// disclosed and the cursor skips its `2^(h'-1)` leaves.
pub fn scan_tree(x: &ReferenceTree, skip: Option<ScanSkip>, c: &mut CostCounters) -> Scan {
    let l2 = x.l2();
    let mut out = Scan::default();
    let mut i = 0;
    while i < x.t() {
        let iteration = out.paths.len();
        let mut node = leaf_node(i, l2);
        let mut h = 0u32;
        let mut h_top = 0u32;
        let mut top = node;
        let mut path = Vec::new();
        while node != 0 {
            path.push(node);
            c.n_check += 1;
            let skipped = skip == Some(ScanSkip { iteration, node });
            if !x.get(node) && !skipped {
                top = node;
                h_top = h + 1;
            }
            node = parent(node);
            h += 1;
        }
        out.paths.push(path);
        if h_top == 0 {
            out.rounds.push(i);
            c.n_mono += 1;
            i += 1;
        } else {
            out.nodes.push(top);
            c.n_seed += 1;
            i += 1 << (h_top - 1);
        }
    }
    out
}

/// Responses and disclosed seeds from the single-pass scan.
///
/// A round reached with digest value 0 (possible only under a fault) answers
/// with `Q̄` itself, since `Q_0` is the identity.
pub fn gen_rsp_update(
    d: &Digest,
    sk: &LessSecretKey,
    q_bars: &[PartialMonomialMatrix],
    tree: &SeedTree,
    c: &mut CostCounters,
) -> (Vec<PartialMonomialMatrix>, TreeNodeList) {
    let view = DigestView::new(d.entries());
    let x = compute_seeds_to_publish(&view.mask(), tree.l2());
    respond_from_tree(&view, &x, sk, q_bars, tree, c)
}

fn respond_from_tree(
    view: &DigestView,
    x: &ReferenceTree,
    sk: &LessSecretKey,
    q_bars: &[PartialMonomialMatrix],
    tree: &SeedTree,
    c: &mut CostCounters,
) -> (Vec<PartialMonomialMatrix>, TreeNodeList) {
    let scan = scan_tree(x, None, c);
    let rsp = scan
        .rounds
        .iter()
        .map(|&i| match view.value(i) {
            0 => q_bars[i].clone(),
            j => response_for(sk, j, &q_bars[i]),
        })
        .collect();
    let mut nodes = tree.publish(&scan.nodes);
    nodes.canonicalize();
    (rsp, nodes)
}

/// The original two-pass responder, instrumented.
pub fn original_gen_rsp(
    d: &Digest,
    sk: &LessSecretKey,
    q_bars: &[PartialMonomialMatrix],
    tree: &SeedTree,
    c: &mut CostCounters,
) -> (Vec<PartialMonomialMatrix>, TreeNodeList) {
    let view = DigestView::new(d.entries());
    let x = compute_seeds_to_publish(&view.mask(), tree.l2());
    let nodes = seed_tree_paths_counted(&x, None, c);
    let rsp = original_response_rounds(&view, c)
        .into_iter()
        .map(|i| response_for(sk, view.value(i), &q_bars[i]))
        .collect();
    (rsp, tree.publish(&nodes))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatResponse {
    Seed(Seed),
    Mono(PartialMonomialMatrix),
}

/// Tree-less responder: one zero test per round, one item per round.
pub fn flat_gen_rsp(
    d: &Digest,
    sk: &LessSecretKey,
    q_bars: &[PartialMonomialMatrix],
    tree: &SeedTree,
) -> Vec<FlatResponse> {
    (0..d.t())
        .map(|i| match d.entries()[i] {
            0 => FlatResponse::Seed(tree.leaf(i).clone()),
            j => FlatResponse::Mono(response_for(sk, j as usize, &q_bars[i])),
        })
        .collect()
}

fn ceil_log2(v: usize) -> u64 {
    (usize::BITS - (v.max(1) - 1).leading_zeros()) as u64
}

fn mono_bits(p: &LessParams) -> u64 {
    p.k as u64 * (ceil_log2(p.n) + ceil_log2(p.q as usize - 1))
}

/// `|cmt| + w·k(⌈log n⌉ + ⌈log(q-1)⌉) + (t-w)·λ` bits.
pub fn flat_signature_bits(p: &LessParams) -> u64 {
    (8 * p.digest_bytes()) as u64 + p.w as u64 * mono_bits(p) + (p.t - p.w) as u64 * p.lambda as u64
}

/// Same accounting for a tree-based signature disclosing `r` nodes.
pub fn tree_signature_bits(p: &LessParams, r: usize) -> u64 {
    (8 * p.digest_bytes()) as u64 + p.w as u64 * mono_bits(p) + r as u64 * p.lambda as u64
}

pub fn sign_with_pipeline(
    sk: &LessSecretKey,
    msg: &[u8],
    rng: &Seed,
    pipeline: Pipeline,
) -> LessSignature {
    let tr = commit(sk, msg, rng);
    let mut c = CostCounters::default();
    let (rsp, nodes) = match pipeline {
        Pipeline::Original => original_gen_rsp(&tr.d, sk, &tr.q_bars, &tr.tree, &mut c),
        Pipeline::Countermeasure => gen_rsp_update(&tr.d, sk, &tr.q_bars, &tr.tree, &mut c),
    };
    assemble(&tr, &nodes, rsp)
}

/// Counters for one run of either responder on a digest.
pub fn cost_report(pipeline: Pipeline, d: &Digest, l2: usize) -> CostCounters {
    let mut c = CostCounters::default();
    let view = DigestView::new(d.entries());
    let x = compute_seeds_to_publish(&view.mask(), l2);
    match pipeline {
        Pipeline::Original => {
            seed_tree_paths_counted(&x, None, &mut c);
            original_response_rounds(&view, &mut c);
        }
        Pipeline::Countermeasure => {
            scan_tree(&x, None, &mut c);
        }
    }
    c
}

/// Closed-form counters: `2N + t` versus `(r + w)·log2(2l)` checks.
pub fn cost_formula(pipeline: Pipeline, t: usize, w: usize, r: usize, l2: usize) -> CostCounters {
    let n_check = match pipeline {
        Pipeline::Original => (2 * node_count(l2) + t) as u64,
        Pipeline::Countermeasure => ((r + w) * depth(leaf_node(0, l2))) as u64,
    };
    CostCounters {
        n_check,
        n_mono: w as u64,
        n_seed: r as u64,
    }
}

/// A single fault considered by the resistance probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeFault {
    /// Corruption of `x[node]` under one of the tree fault models.
    Tree { model: FaultModel, node: usize },
    /// A skipped disclosure check in the original node loop.
    Check { node: usize },
    /// A skipped zero test in the scan.
    ScanCheck { iteration: usize, node: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub digest: Vec<u8>,
    pub fault: ProbeFault,
    pub round: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub pipeline: Pipeline,
    pub l2: usize,
    pub t: usize,
    pub s: usize,
    pub digests: u64,
    pub faults: u64,
    pub violations: u64,
    /// First few violations, for inspection.
    pub examples: Vec<Violation>,
}

fn tree_fault(f: &[bool], l2: usize, model: FaultModel, node: usize) -> Option<ReferenceTree> {
    let x = compute_seeds_to_publish(f, l2);
    match model {
        FaultModel::SkipStore => Some(compute_with_skipped_store(f, l2, Some(node))),
        FaultModel::StuckAtZero => Some(x.with_forced(node, false)),
        FaultModel::BitFlip => Some(x.with_forced(node, !x.get(node))),
        FaultModel::SkipCheck => None,
    }
}

/// Rounds with a nonzero digest value both covered by a disclosed node and answered.
pub fn revealed_rounds(d: &[u8], l2: usize, nodes: &[usize], rounds: &[usize]) -> Vec<usize> {
    rounds
        .iter()
        .copied()
        .filter(|&i| {
            d[i] != 0
                && nodes
                    .iter()
                    .any(|&n| is_ancestor_or_self(n, leaf_node(i, l2)))
        })
        .collect()
}

fn disclose(
    pipeline: Pipeline,
    view: &DigestView,
    x: &ReferenceTree,
    fault: Option<ProbeFault>,
) -> (Vec<usize>, Vec<usize>) {
    let mut c = CostCounters::default();
    match pipeline {
        Pipeline::Original => {
            let forced = match fault {
                Some(ProbeFault::Check { node }) => Some(node),
                _ => None,
            };
            let nodes = seed_tree_paths_counted(x, forced, &mut c);
            (nodes, original_response_rounds(view, &mut c))
        }
        Pipeline::Countermeasure => {
            let skip = match fault {
                Some(ProbeFault::ScanCheck { iteration, node }) => {
                    Some(ScanSkip { iteration, node })
                }
                _ => None,
            };
            let s = scan_tree(x, skip, &mut c);
            (s.nodes, s.rounds)
        }
    }
}

/// Every digest in `Z_s^t` with at least one nonzero entry, every node and every single fault.
pub fn resistance_probe(pipeline: Pipeline, l2: usize, t: usize, s: usize) -> ProbeReport {
    let mut report = ProbeReport {
        pipeline,
        l2,
        t,
        s,
        digests: 0,
        faults: 0,
        violations: 0,
        examples: Vec::new(),
    };
    let total = (s as u64).pow(t as u32);
    let record = |report: &mut ProbeReport,
                  d: &[u8],
                  fault: ProbeFault,
                  nodes: &[usize],
                  rounds: &[usize]| {
        report.faults += 1;
        for round in revealed_rounds(d, l2, nodes, rounds) {
            report.violations += 1;
            if report.examples.len() < 8 {
                report.examples.push(Violation {
                    digest: d.to_vec(),
                    fault,
                    round,
                });
            }
        }
    };
    for code in 1..total {
        let mut d = vec![0u8; t];
        let mut rest = code;
        for e in d.iter_mut() {
            *e = (rest % s as u64) as u8;
            rest /= s as u64;
        }
        report.digests += 1;
        let f: Vec<bool> = d.iter().map(|&e| e != 0).collect();
        let view = DigestView::new(&d);
        for node in 0..node_count(l2) {
            for model in [
                FaultModel::SkipStore,
                FaultModel::StuckAtZero,
                FaultModel::BitFlip,
            ] {
                let x = tree_fault(&f, l2, model, node).expect("tree model");
                let (nodes, rounds) = disclose(pipeline, &view, &x, None);
                record(
                    &mut report,
                    &d,
                    ProbeFault::Tree { model, node },
                    &nodes,
                    &rounds,
                );
            }
        }
        let x = compute_seeds_to_publish(&f, l2);
        match pipeline {
            Pipeline::Original => {
                for node in 0..node_count(l2) {
                    let fault = ProbeFault::Check { node };
                    let (nodes, rounds) = disclose(pipeline, &view, &x, Some(fault));
                    record(&mut report, &d, fault, &nodes, &rounds);
                }
            }
            Pipeline::Countermeasure => {
                let honest = scan_tree(&x, None, &mut CostCounters::default());
                for (iteration, path) in honest.paths.iter().enumerate() {
                    for &node in path {
                        let fault = ProbeFault::ScanCheck { iteration, node };
                        let (nodes, rounds) = disclose(pipeline, &view, &x, Some(fault));
                        record(&mut report, &d, fault, &nodes, &rounds);
                    }
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub params: String,
    pub iters: usize,
    pub unit: String,
    pub mean_cycles_original: f64,
    pub mean_cycles_cm: f64,
    pub ratio: f64,
}

/// Wall-clock signing time of both pipelines, interleaved to cancel drift.
pub fn bench(sk: &LessSecretKey, iters: usize, seed: &Seed) -> BenchReport {
    let mut orig = 0f64;
    let mut cm = 0f64;
    std::hint::black_box(sign_with_pipeline(sk, b"warm-up", seed, Pipeline::Original));
    for it in 0..iters {
        let rng = Seed::derive(b"bench", &[seed.as_bytes(), &(it as u64).to_le_bytes()], 32);
        let order = if it % 2 == 0 {
            [Pipeline::Original, Pipeline::Countermeasure]
        } else {
            [Pipeline::Countermeasure, Pipeline::Original]
        };
        for p in order {
            let start = Instant::now();
            let sig = sign_with_pipeline(sk, b"benchmark", &rng, p);
            let ns = start.elapsed().as_nanos() as f64;
            std::hint::black_box(sig);
            match p {
                Pipeline::Original => orig += ns,
                Pipeline::Countermeasure => cm += ns,
            }
        }
    }
    let n = iters.max(1) as f64;
    BenchReport {
        params: sk.params.name.clone(),
        iters,
        unit: "ns".into(),
        mean_cycles_original: orig / n,
        mean_cycles_cm: cm / n,
        ratio: cm / orig,
    }
}

/// Index-level equivalence of both responders on one mask.
pub fn equivalent_on_mask(f: &[bool], l2: usize) -> bool {
    let x = compute_seeds_to_publish(f, l2);
    let mut c = CostCounters::default();
    let mut original = seed_tree_paths_counted(&x, None, &mut c);
    original.sort_unstable();
    let scan = scan_tree(&x, None, &mut c);
    let mut nodes = scan.nodes.clone();
    nodes.sort_unstable();
    let rounds: Vec<usize> = (0..f.len()).filter(|&i| f[i]).collect();
    original == nodes && rounds == scan.rounds
}

/// Leaves covered by a disclosed node set, within the first `t`.
pub fn covered_rounds(nodes: &[usize], l2: usize, t: usize) -> Vec<usize> {
    let mut out: Vec<usize> = nodes
        .iter()
        .flat_map(|&n| {
            let (lo, hi) = leaf_span(n, l2);
            lo.min(t)..hi.min(t)
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
