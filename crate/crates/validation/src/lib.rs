//! Acceptance checks, one function per criterion.
//!
//! Each check returns a [`Verdict`] with a pass flag and detail lines; the
//! `acceptance` test target runs them all and prints one PASS/FAIL line each.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zkfault_core::attack_cross::{
    detect_effective_cross, faulted_cross_sign, recover_secret_cross, CrossFaultSpec,
};
use zkfault_core::attack_less::{
    complete_secret, detect_effective, recover_columns_from_pair, recover_secret_matrices,
    run_campaign, trial_rng, AttackState, CampaignConfig, CampaignMode, RecoveredPair,
};
use zkfault_core::countermeasures::{
    bench, cost_formula, cost_report, equivalent_on_mask, resistance_probe, sign_with_pipeline,
    Pipeline,
};
use zkfault_core::cross::{
    cross_check_response, cross_keygen, cross_sign, syndrome, CrossParams, CrossSignature,
};
use zkfault_core::fault::{
    classify_mask, faulted_disclosure, faulted_sign, honest_disclosure, FaultClass, FaultModel,
    FaultSpec,
};
use zkfault_core::gf::Field;
use zkfault_core::less::{
    assemble, commit, honest_responses, keygen, prepare_digest_input, public_matrix, sign, verify,
    LessSignature,
};
use zkfault_core::monomial::{mono_mul_partial, mono_transpose};
use zkfault_core::params::LessParams;
use zkfault_core::seedtree::{compute_seeds_to_publish, node_count, Digest};
use zkfault_core::stats::{binomial, brute_force_expectation, expected_recovered, NodeContext};
use zkfault_core::xof::{sample_monomial, sample_rref_generator, Seed};

#[path = "../../core/tests/common/mod.rs"]
pub mod tamper;

#[derive(Debug, Default)]
pub struct Verdict {
    pub pass: bool,
    pub lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: impl Into<String>) {
        self.pass &= ok;
        self.lines.push(format!(
            "{} {}",
            if ok { "ok  " } else { "FAIL" },
            line.into()
        ));
    }

    fn within(&mut self, started: Instant, limit: Duration, what: &str) {
        let e = started.elapsed();
        self.check(
            e < limit,
            format!(
                "{what}: {:.1}s (limit {}s)",
                e.as_secs_f64(),
                limit.as_secs()
            ),
        );
    }
}

fn seed(rng: &mut impl RngCore, len: usize) -> Seed {
    let mut b = vec![0u8; len];
    rng.fill_bytes(&mut b);
    Seed::new(b)
}

enum Target {
    Exact(f64),
    Near(f64, f64),
}

impl Target {
    fn holds(&self, v: f64) -> bool {
        match *self {
            Target::Exact(x) => v == x,
            Target::Near(x, tol) => (v - x).abs() <= tol,
        }
    }

    fn show(&self) -> String {
        match *self {
            Target::Exact(x) => format!("= {x}"),
            Target::Near(x, tol) => format!("{x} ± {tol}"),
        }
    }
}

/// Digest-only campaigns at fault node 1 against the published recovery table.
pub fn table_statistics(trials: usize) -> Verdict {
    use Target::*;
    let rows = [
        ("less-1b", Exact(1.0), Exact(1.0)),
        ("less-1i", Near(2.91, 0.03), Near(1.05, 0.03)),
        ("less-1s", Near(5.55, 0.05), Near(2.09, 0.10)),
        ("less-3b", Exact(1.0), Exact(1.0)),
        ("less-3s", Near(2.0, 0.02), Near(1.0, 0.02)),
        ("less-5b", Exact(1.0), Exact(1.0)),
        ("less-5s", Near(2.0, 0.02), Near(1.0, 0.02)),
    ];
    let mut v = Verdict::new();
    for (name, mean_x, n_avg) in rows {
        let p = LessParams::by_name(name).expect("registered");
        let cfg = CampaignConfig::new(1, 1.0, CampaignMode::DigestOnly, trials, &[0x2a]);
        let started = Instant::now();
        let r = run_campaign(&p, &cfg).expect("campaign").report;
        v.check(
            r.effective_faults >= trials as u64 && r.incomplete_trials == 0,
            format!(
                "{name}: {} effective faults, {} incomplete trials",
                r.effective_faults, r.incomplete_trials
            ),
        );
        v.check(
            mean_x.holds(r.mean_x),
            format!(
                "{name}: mean X = {:.4} (target {})",
                r.mean_x,
                mean_x.show()
            ),
        );
        v.check(
            n_avg.holds(r.n_avg),
            format!("{name}: N_avg = {:.4} (target {})", r.n_avg, n_avg.show()),
        );
        v.within(started, Duration::from_secs(120), name);
    }
    v
}

/// Closed form against exhaustive enumeration on the whole small grid.
pub fn closed_form_grid() -> Verdict {
    let mut v = Verdict::new();
    let started = Instant::now();
    let mut cells = 0;
    let mut mismatches = Vec::new();
    for t in 1..=8 {
        for w in 1..=t.min(4) {
            for s in 2..=5 {
                for ell in 0..=t {
                    let ctx = NodeContext::new(t, w, s, ell).expect("grid context");
                    cells += 1;
                    if expected_recovered(&ctx)
                        != brute_force_expectation(&ctx).expect("within budget")
                    {
                        mismatches.push((t, w, s, ell));
                    }
                }
            }
        }
    }
    v.check(
        mismatches.is_empty(),
        format!("{cells} grid cells, exact mismatches: {mismatches:?}"),
    );
    v.within(started, Duration::from_secs(30), "grid");
    v
}

/// Faulted signing until every secret is recovered, checked against the key generator.
pub fn full_mode_recovery(trials: usize) -> Verdict {
    let mut v = Verdict::new();
    let started = Instant::now();
    for name in ["less-1b", "less-small-s4"] {
        let p = LessParams::by_name(name).expect("registered");
        let len = p.seed_bytes();
        let (mut wrong, mut pk_bad, mut incomplete, mut multi) = (0, 0, 0, 0);
        let mut faults = 0u64;
        for trial in 0..trials {
            let mut rng = trial_rng(b"acceptance-full", trial, b"scheme");
            let mut inj = trial_rng(b"acceptance-full", trial, b"inject");
            let (sk, pk) = keygen(&p, &seed(&mut rng, len), &seed(&mut rng, len)).expect("keygen");
            let spec = FaultSpec {
                model: FaultModel::SkipStore,
                node: 1,
                p_success: 1.0,
            };
            let mut state = AttackState::new(&p);
            let mut effective = 0;
            for _ in 0..1000 {
                if state.is_complete() {
                    break;
                }
                let msg = seed(&mut rng, 32);
                let o = faulted_sign(&sk, msg.as_bytes(), &spec, &seed(&mut rng, len), &mut inj)
                    .expect("spec");
                if !detect_effective(&o.signature, &pk, msg.as_bytes(), 1) {
                    continue;
                }
                effective += 1;
                for j in
                    recover_secret_matrices(&o.signature, &pk, 1, &mut state).expect("recovery")
                {
                    let qt = &state.recovered[&j];
                    wrong += usize::from(qt != sk.secret_transpose(j));
                    pk_bad +=
                        usize::from(public_matrix(&pk.g0, &mono_transpose(qt)) != pk.g[j - 1]);
                }
            }
            faults += effective;
            incomplete += usize::from(!state.is_complete());
            multi += usize::from(effective > 1);
        }
        v.check(
            wrong == 0 && pk_bad == 0 && incomplete == 0,
            format!("{name}: {trials} trials, {faults} effective faults, {wrong} wrong secrets, {pk_bad} public-key mismatches, {incomplete} incomplete"),
        );
        if p.s == 2 {
            v.check(
                multi == 0,
                format!("{name}: trials needing more than one effective fault: {multi}"),
            );
        }
    }
    v.within(started, Duration::from_secs(600), "full mode");
    v
}

/// CROSS: one effective fault yields the exact secret.
pub fn cross_recovery(trials: usize) -> Verdict {
    let mut v = Verdict::new();
    let started = Instant::now();
    let p = CrossParams::desk();
    let g = p.group();
    let (mut wrong, mut syn_bad, mut faults, mut incomplete) = (0, 0, 0u64, 0);
    for trial in 0..trials {
        let mut rng = trial_rng(b"acceptance-cross", trial, b"scheme");
        let mut inj = trial_rng(b"acceptance-cross", trial, b"inject");
        let (sk, pk) = cross_keygen(&p, &seed(&mut rng, p.seed_bytes())).expect("keygen");
        let spec = CrossFaultSpec {
            node: 1,
            p_success: 1.0,
        };
        let mut done = false;
        for _ in 0..1000 {
            let msg = seed(&mut rng, 32);
            let o = faulted_cross_sign(&sk, msg.as_bytes(), &spec, &seed(&mut rng, 32), &mut inj)
                .expect("spec");
            if !detect_effective_cross(&o.signature, &pk, msg.as_bytes(), 1) {
                continue;
            }
            faults += 1;
            let e = recover_secret_cross(&o.signature, &pk, msg.as_bytes(), 1).expect("recovery");
            syn_bad += usize::from(syndrome(&g, &pk.h, &e) != pk.s);
            wrong += usize::from(e != sk.e);
            done = true;
            break;
        }
        incomplete += usize::from(!done);
    }
    v.check(
        wrong == 0 && syn_bad == 0 && incomplete == 0 && faults == trials as u64,
        format!("{trials} trials, {faults} effective faults (N_avg {}), {wrong} wrong, {syn_bad} syndrome failures", faults as f64 / trials as f64),
    );
    v.within(started, Duration::from_secs(120), "cross");
    v
}

fn tiny(t: usize, w: usize, s: usize) -> LessParams {
    let l2 = t.next_power_of_two().max(2);
    LessParams {
        name: format!("tiny-t{t}-w{w}-s{s}"),
        n: 10,
        k: 5,
        q: 7,
        l: l2 / 2,
        t,
        w,
        s,
        lambda: 128,
    }
}

/// Every fixed-weight digest at `t = 8`, every node, honest and faulted.
pub fn detector_exactness() -> Verdict {
    let mut v = Verdict::new();
    let started = Instant::now();
    let models = [
        FaultModel::SkipStore,
        FaultModel::StuckAtZero,
        FaultModel::BitFlip,
    ];
    for s in [2usize, 3] {
        for w in 1..8 {
            let p = tiny(8, w, s);
            let l2 = p.l2();
            let (sk, pk) = keygen(
                &p,
                &Seed::new(vec![s as u8; 16]),
                &Seed::new(vec![w as u8; 16]),
            )
            .expect("keygen");
            let total = binomial(8, w) * (s as u64 - 1).pow(w as u32);
            let total: usize = total.to_string().parse().expect("small");
            let mut seen = HashSet::new();
            let (mut false_acc, mut false_rej, mut checks) = (0, 0, 0);
            let mut i = 0u64;
            while seen.len() < total && i < 2_000_000 {
                i += 1;
                let msg = i.to_le_bytes();
                let tr = commit(&sk, &msg, &Seed::new(msg.repeat(4)));
                if !seen.insert(tr.d.entries().to_vec()) {
                    continue;
                }
                let f = tr.d.mask();
                let rsp = honest_responses(&sk, &tr);
                let honest = assemble(
                    &tr,
                    &tr.tree.publish(&honest_disclosure(&f, l2).published),
                    rsp.clone(),
                );
                for node in 0..node_count(l2) {
                    checks += 1;
                    false_acc += usize::from(detect_effective(&honest, &pk, &msg, node));
                    for model in models {
                        let dis = faulted_disclosure(&f, l2, model, node);
                        let class = classify_mask(&f, l2, node, model);
                        let sig = assemble(&tr, &tr.tree.publish(&dis.published), rsp.clone());
                        let acc = detect_effective(&sig, &pk, &msg, node);
                        checks += 1;
                        false_acc += usize::from(acc && class != FaultClass::Effective);
                        false_rej += usize::from(!acc && class == FaultClass::Effective);
                    }
                }
            }
            v.check(
                seen.len() == total && false_acc == 0 && false_rej == 0,
                format!("s={s} w={w}: {}/{total} digests, {checks} verdicts, {false_acc} false accepts, {false_rej} false rejects", seen.len()),
            );
        }
    }
    v.within(started, Duration::from_secs(300), "detector sweep");
    v
}

/// Column recovery from one pair and completion, against a dense oracle.
pub fn pair_recovery(instances: usize) -> Verdict {
    let mut v = Verdict::new();
    let started = Instant::now();
    let f = Field::new(7).expect("prime");
    let (n, k) = (10, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c657373);
    let (mut col_bad, mut count_bad, mut full_bad) = (0, 0, 0);
    for _ in 0..instances {
        let g0 = sample_rref_generator(&seed(&mut rng, 16), k, n, f).expect("generator");
        let q = sample_monomial(&seed(&mut rng, 16), n, f);
        let q_tilde = sample_monomial(&seed(&mut rng, 16), n, f);
        let (q_bar, _) = prepare_digest_input(&g0, &q_tilde);
        let qt = mono_transpose(&q);
        let pair = RecoveredPair {
            round: 0,
            q_tilde,
            response: mono_mul_partial(&qt, &q_bar).expect("dims"),
            d_value: 1,
        };
        let dense_q = q.to_dense();
        let dense_qt = dense_q.transpose();
        let part = recover_columns_from_pair(&pair, &g0).expect("pair");
        count_bad += usize::from(part.columns.len() != k);
        for c in &part.columns {
            let ok = dense_q.get(c.target, c.index) == c.coeff
                && (0..n).filter(|&r| dense_q.get(r, c.index) != 0).count() == 1;
            col_bad += usize::from(!ok);
        }
        let full = complete_secret(&part, &g0, &public_matrix(&g0, &q)).expect("completion");
        full_bad += usize::from(full.to_dense() != dense_qt);
    }
    v.check(
        col_bad == 0 && count_bad == 0 && full_bad == 0,
        format!("{instances} instances: {count_bad} wrong column counts, {col_bad} wrong columns, {full_bad} wrong completions"),
    );
    v.within(started, Duration::from_secs(60), "pairs");
    v
}

fn random_digest(rng: &mut impl Rng, t: usize, w: usize, s: usize) -> Digest {
    let mut d = vec![0u8; t];
    let mut placed = 0;
    while placed < w {
        let i = rng.gen_range(0..t);
        if d[i] == 0 {
            d[i] = rng.gen_range(1..s) as u8;
            placed += 1;
        }
    }
    Digest::new(d, s).expect("in range")
}

/// Equivalence of the single-pass responder and single-fault resistance.
pub fn countermeasure_equivalence() -> Verdict {
    let mut v = Verdict::new();
    let started = Instant::now();
    for l2 in [4usize, 8, 16] {
        let mut masks = 0u64;
        let mut bad = 0;
        for t in l2 / 2 + 1..=l2 {
            for code in 1u32..(1 << t) {
                let f: Vec<bool> = (0..t).map(|i| (code >> i) & 1 == 1).collect();
                masks += 1;
                bad += usize::from(!equivalent_on_mask(&f, l2));
            }
        }
        v.check(
            bad == 0,
            format!(
                "l={}: {masks} masks, {bad} node-map or round-order differences",
                l2 / 2
            ),
        );
        let p = tiny(l2, l2 / 2, 3);
        let (sk, pk) =
            keygen(&p, &Seed::new(vec![7; 16]), &Seed::new(vec![8; 16])).expect("keygen");
        let mut diff = 0;
        for i in 0..100u8 {
            let rng = Seed::new(vec![i; 32]);
            let a = sign_with_pipeline(&sk, b"eq", &rng, Pipeline::Original);
            let b = sign_with_pipeline(&sk, b"eq", &rng, Pipeline::Countermeasure);
            diff += usize::from(a != b || verify(&pk, b"eq", &b).is_err());
        }
        v.check(
            diff == 0,
            format!(
                "l={}: 100 signatures, {diff} differ between pipelines",
                l2 / 2
            ),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x636d);
    let sets = LessParams::table();
    let mut bad = 0;
    for i in 0..1000 {
        let p = &sets[i % sets.len()];
        let d = random_digest(&mut rng, p.t, p.w, p.s);
        bad += usize::from(!equivalent_on_mask(&d.mask(), p.l2()));
    }
    v.check(
        bad == 0,
        format!("1000 full-size digests: {bad} differences"),
    );
    for s in [2, 3] {
        let cm = resistance_probe(Pipeline::Countermeasure, 8, 8, s);
        let orig = resistance_probe(Pipeline::Original, 8, 8, s);
        v.check(
            cm.violations == 0 && orig.violations > 0,
            format!(
                "l=4 t=8 s={s}: {} digests, countermeasure {} faults / {} revelations, original {} faults / {} revelations",
                cm.digests, cm.faults, cm.violations, orig.faults, orig.violations
            ),
        );
    }
    v.within(
        started,
        Duration::from_secs(300),
        "equivalence and resistance",
    );
    v
}

/// Relative signing time and instrumented counters against the closed forms.
pub fn countermeasure_performance(runs: usize) -> Verdict {
    let mut v = Verdict::new();
    let p = LessParams::by_name("less-1b").expect("registered");
    let (sk, _) = keygen(&p, &Seed::new(vec![1; 16]), &Seed::new(vec![2; 16])).expect("keygen");
    let b = bench(&sk, runs, &Seed::new(vec![3; 32]));
    v.check(
        (b.ratio - 1.0).abs() <= 0.02,
        format!(
            "less-1b over {runs} runs: original {:.2} ms, countermeasure {:.2} ms, ratio {:.4}",
            b.mean_cycles_original / 1e6,
            b.mean_cycles_cm / 1e6,
            b.ratio
        ),
    );
    let ex = Digest::new(vec![0, 3, 1, 1, 0, 0, 0, 0], 4).expect("digest");
    let o = cost_report(Pipeline::Original, &ex, 8);
    let c = cost_report(Pipeline::Countermeasure, &ex, 8);
    v.check(
        o.n_check == 38
            && c.n_check == 15
            && o.n_seed == 2
            && c.n_seed == 2
            && o.n_mono == 3
            && c.n_mono == 3,
        format!("worked digest: original {o:?}, countermeasure {c:?}"),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e63);
    let mut bad = 0;
    let mut runs_checked = 0;
    for p in LessParams::table() {
        for _ in 0..100 {
            let d = random_digest(&mut rng, p.t, p.w, p.s);
            let r = compute_seeds_to_publish(&d.mask(), p.l2())
                .published_nodes()
                .len();
            for pipe in [Pipeline::Original, Pipeline::Countermeasure] {
                runs_checked += 1;
                bad += usize::from(
                    cost_report(pipe, &d, p.l2()) != cost_formula(pipe, p.t, p.w, r, p.l2()),
                );
            }
        }
    }
    v.check(
        bad == 0,
        format!(
            "{runs_checked} instrumented runs over all sets, {bad} differ from the closed forms"
        ),
    );
    v
}

fn tamper_rejects<S: serde::Serialize + serde::de::DeserializeOwned>(
    sig: &S,
    sites: &[tamper::Site],
    ok: impl Fn(&S) -> bool,
) -> (usize, Vec<String>) {
    let doc = serde_json::to_value(sig).expect("serializable");
    let mut accepted = Vec::new();
    for site in sites {
        if serde_json::from_value::<S>(tamper::tamper(&doc, site))
            .map(|s| ok(&s))
            .unwrap_or(false)
        {
            accepted.push(site.describe());
        }
    }
    (sites.len(), accepted)
}

/// Sign/verify completeness and rejection of single-position corruption.
pub fn scheme_completeness(scaled: usize, full: usize) -> Verdict {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7369);
    for name in ["less-small", "less-small-s4"] {
        let p = LessParams::by_name(name).expect("registered");
        let mut rejected = 0;
        let mut keys = None;
        for i in 0..scaled / 2 {
            if i % 50 == 0 {
                keys = Some(keygen(&p, &seed(&mut rng, 16), &seed(&mut rng, 16)).expect("keygen"));
            }
            let (sk, pk) = keys.as_ref().expect("set");
            let msg = seed(&mut rng, 24);
            let sig = sign(sk, msg.as_bytes(), &seed(&mut rng, 32));
            rejected += usize::from(verify(pk, msg.as_bytes(), &sig).is_err());
        }
        v.check(
            rejected == 0,
            format!("{name}: {} round trips, {rejected} rejected", scaled / 2),
        );
        let (sk, pk) = keys.expect("set");
        let sig = sign(&sk, b"tamper", &seed(&mut rng, 32));
        let sites = tamper::sites(&serde_json::to_value(&sig).expect("json"));
        let (n, acc) = tamper_rejects(&sig, &sites, |s: &LessSignature| {
            verify(&pk, b"tamper", s).is_ok()
        });
        v.check(
            acc.is_empty(),
            format!("{name}: {n} single-position tampers, accepted: {acc:?}"),
        );
    }
    let p = LessParams::by_name("less-1b").expect("registered");
    let (sk, pk) = keygen(&p, &seed(&mut rng, 16), &seed(&mut rng, 16)).expect("keygen");
    let mut rejected = 0;
    let mut last = None;
    for _ in 0..full {
        let msg = seed(&mut rng, 24);
        let sig = sign(&sk, msg.as_bytes(), &seed(&mut rng, 32));
        rejected += usize::from(verify(&pk, msg.as_bytes(), &sig).is_err());
        last = Some((msg, sig));
    }
    v.check(
        rejected == 0,
        format!("less-1b: {full} round trips, {rejected} rejected"),
    );
    let (msg, sig) = last.expect("at least one");
    let all = tamper::sites(&serde_json::to_value(&sig).expect("json"));
    let mut sites = tamper::sample_per_field(&all, 3);
    sites.extend(
        all.iter()
            .filter(|s| s.field() == "tree_nodes" && s.byte() == Some(0))
            .cloned(),
    );
    let (n, acc) = tamper_rejects(&sig, &sites, |s: &LessSignature| {
        verify(&pk, msg.as_bytes(), s).is_ok()
    });
    v.check(acc.is_empty(), format!("less-1b: {n} tampers (every disclosed seed, 3 sites per other field), accepted: {acc:?}"));
    let cp = CrossParams::desk();
    let (csk, cpk) = cross_keygen(&cp, &seed(&mut rng, 16)).expect("keygen");
    let mut rejected = 0;
    for _ in 0..100 {
        let msg = seed(&mut rng, 24);
        rejected += usize::from(
            cross_check_response(
                &cpk,
                msg.as_bytes(),
                &cross_sign(&csk, msg.as_bytes(), &seed(&mut rng, 32)),
            )
            .is_err(),
        );
    }
    v.check(
        rejected == 0,
        format!("cross-desk: 100 round trips, {rejected} rejected"),
    );
    let sig = cross_sign(&csk, b"tamper", &seed(&mut rng, 32));
    let sites = tamper::sites(&serde_json::to_value(&sig).expect("json"));
    let (n, acc) = tamper_rejects(&sig, &sites, |s: &CrossSignature| {
        cross_check_response(&cpk, b"tamper", s).is_ok()
    });
    v.check(
        acc.is_empty(),
        format!("cross-desk: {n} single-position tampers, accepted: {acc:?}"),
    );
    v
}
