//! Recovery table: closed form, Monte Carlo and reference values side by side.

use serde::Serialize;

use zkfault_core::attack_cross::run_cross_campaign;
use zkfault_core::attack_less::{run_campaign, CampaignConfig, CampaignMode};
use zkfault_core::cross::CrossParams;
use zkfault_core::params::LessParams;
use zkfault_core::stats::{expected_recovered_effective, to_f64, NodeContext};

/// Published `(set, secrets, E[X], N_avg)` for fault node 1.
const REFERENCE: &[(&str, usize, f64, f64)] = &[
    ("less-1b", 1, 1.0, 1.0),
    ("less-1i", 3, 2.91, 1.05),
    ("less-1s", 7, 5.55, 2.09),
    ("less-3b", 1, 1.0, 1.0),
    ("less-3s", 2, 2.0, 1.0),
    ("less-5b", 1, 1.0, 1.0),
    ("less-5s", 2, 2.0, 1.0),
    ("cross-desk", 1, 1.0, 1.0),
];

#[derive(Debug, Serialize)]
pub struct Row {
    pub scheme: String,
    pub params: String,
    pub secrets: usize,
    pub closed_form_x: f64,
    pub mc_mean_x: f64,
    pub mc_mean_x_stderr: f64,
    pub mc_n_avg: f64,
    pub mc_effective_faults: u64,
    pub reference_x: Option<f64>,
    pub reference_n_avg: Option<f64>,
}

fn reference(name: &str) -> (Option<f64>, Option<f64>) {
    REFERENCE
        .iter()
        .find(|r| r.0 == name)
        .map(|r| (Some(r.2), Some(r.3)))
        .unwrap_or((None, None))
}

pub fn build(trials: usize, master: &[u8], node: usize) -> Result<Vec<Row>, String> {
    let cfg = CampaignConfig::new(node, 1.0, CampaignMode::DigestOnly, trials, master);
    let mut rows = Vec::new();
    for p in LessParams::table() {
        let ctx = NodeContext::for_node(p.t, p.w, p.s, node).map_err(|e| e.to_string())?;
        let closed = expected_recovered_effective(&ctx)
            .map(|r| to_f64(&r))
            .unwrap_or(f64::NAN);
        let out = run_campaign(&p, &cfg).map_err(|e| e.to_string())?;
        let (rx, rn) = reference(&p.name);
        rows.push(Row {
            scheme: "less".into(),
            params: p.name.clone(),
            secrets: p.s - 1,
            closed_form_x: closed,
            mc_mean_x: out.report.mean_x,
            mc_mean_x_stderr: out.report.mean_x_stderr,
            mc_n_avg: out.report.n_avg,
            mc_effective_faults: out.report.effective_faults,
            reference_x: rx,
            reference_n_avg: rn,
        });
    }
    let p = CrossParams::desk();
    let out = run_cross_campaign(&p, &cfg).map_err(|e| e.to_string())?;
    let (rx, rn) = reference(&p.name);
    rows.push(Row {
        scheme: "cross".into(),
        params: p.name,
        secrets: 1,
        closed_form_x: 1.0,
        mc_mean_x: out.report.mean_x,
        mc_mean_x_stderr: out.report.mean_x_stderr,
        mc_n_avg: out.report.n_avg,
        mc_effective_faults: out.report.effective_faults,
        reference_x: rx,
        reference_n_avg: rn,
    });
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

pub fn render(rows: &[Row]) -> String {
    let mut s = format!(
        "{:<7} {:<11} {:>7} {:>9} {:>9} {:>9} {:>7} {:>7}\n",
        "scheme", "params", "secrets", "E[X] cf", "E[X] mc", "N_avg mc", "E[X] r", "N_avg r"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<7} {:<11} {:>7} {:>9.4} {:>9.4} {:>9.4} {:>7} {:>7}\n",
            r.scheme,
            r.params,
            r.secrets,
            r.closed_form_x,
            r.mc_mean_x,
            r.mc_n_avg,
            opt(r.reference_x),
            opt(r.reference_n_avg)
        ));
    }
    s
}
