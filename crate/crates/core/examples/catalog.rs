//! Runs every catalog experiment and prints its metrics.

use wml_core::expt::{catalog, run_experiment, Overrides};

fn main() {
    for entry in catalog() {
        let r = run_experiment(entry.name, &Overrides::default()).expect("catalog name");
        println!("{} pass={} ({:.2}s)", r.name, r.pass, r.runtime_seconds);
        for m in &r.metrics {
            println!("  {:<36} {:>24.16e} {} {}", m.name, m.value, m.check, if m.pass { "ok" } else { "FAIL" });
        }
        if let Some(t) = r.table.as_ref().filter(|_| std::env::args().any(|a| a == "--tables")) {
            println!("  {}", t.columns.join(" "));
            for row in &t.rows {
                println!("  {row:?}");
            }
        }
        if let Some(d) = &r.diagnostic {
            println!("  diagnostic: {d}");
        }
    }
}
