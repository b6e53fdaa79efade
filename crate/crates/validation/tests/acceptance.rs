use std::process::ExitCode;
use std::time::Instant;

use zkfault_validation::*;

type Criterion = (&'static str, Box<dyn Fn() -> Verdict>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "recovery table statistics (digest-only, 100000 trials per set)",
            Box::new(|| table_statistics(100_000)),
        ),
        (
            "closed form equals exhaustive enumeration on the grid",
            Box::new(closed_form_grid),
        ),
        (
            "end-to-end LESS key recovery (full mode, 20 trials per set)",
            Box::new(|| full_mode_recovery(20)),
        ),
        (
            "CROSS key recovery from one effective fault (50 trials)",
            Box::new(|| cross_recovery(50)),
        ),
        (
            "detector exactness over every digest and node",
            Box::new(detector_exactness),
        ),
        (
            "secret recovery from one leaked pair (1000 instances)",
            Box::new(|| pair_recovery(1000)),
        ),
        (
            "countermeasure equivalence and single-fault resistance",
            Box::new(countermeasure_equivalence),
        ),
        (
            "countermeasure performance and cost counters",
            Box::new(|| countermeasure_performance(20)),
        ),
        (
            "scheme completeness and tamper rejection",
            Box::new(|| scheme_completeness(1000, 10)),
        ),
    ];
    let mut failed = 0;
    let mut summary = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = run();
        for l in &v.lines {
            println!("    [{}] {l}", i + 1);
        }
        let line = format!(
            "{} [{}] {name} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            started.elapsed().as_secs_f64()
        );
        println!("{line}");
        summary.push(line);
        failed += usize::from(!v.pass);
    }
    println!();
    for l in &summary {
        println!("{l}");
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
