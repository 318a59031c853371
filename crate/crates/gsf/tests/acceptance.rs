//! Release gate: runs all seven criteria and prints one pass/fail line
//! each. Fails the test if any criterion fails.

use gsf::acceptance::{run_criterion, CRITERIA};
use gsf::gauge::Context;

#[test]
fn acceptance() {
    let ctx = Context::default_ctx();
    let mut all_pass = true;
    for (id, name) in CRITERIA {
        let start = std::time::Instant::now();
        let line = match run_criterion(id, &ctx) {
            Ok(report) => {
                let pass = report.pass();
                all_pass &= pass;
                if !pass {
                    for it in report.items.iter().filter(|it| !it.pass) {
                        eprintln!("  criterion {} failing item: {} {}", id, it.name, it.note);
                    }
                }
                format!(
                    "criterion {} ({}): {} [{:.1}s]",
                    id,
                    name,
                    if pass { "pass" } else { "FAIL" },
                    start.elapsed().as_secs_f64()
                )
            }
            Err(e) => {
                all_pass = false;
                format!("criterion {} ({}): FAIL [error: {}]", id, name, e)
            }
        };
        println!("{}", line);
    }
    assert!(all_pass, "at least one release criterion failed");
}
