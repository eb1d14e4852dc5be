//! Builds the reference four-ELU machine, breaks it on purpose and prints the
//! validation report, then prints the valid spec as `ionfab-arch/1` JSON.
//!
//! ```text
//! cargo run --example architecture > examples/data/example.json
//! ```

use ionfab::arch::{to_json, validate_architecture, ArchitectureSpec};

fn main() {
    let spec = ArchitectureSpec::reference(4);

    let mut broken = spec.clone();
    broken.elus[1].comm_ion_indices.push(25);
    broken.link.detector_efficiency = 1.5;
    let report = validate_architecture(&broken);
    eprintln!("broken spec has {} violation(s):\n{report}", report.violations.len());

    assert!(validate_architecture(&spec).is_ok());
    eprintln!(
        "{} ELUs, {} ions, {} memory ions",
        spec.elus.len(),
        spec.total_ions(),
        spec.total_memory_ions()
    );
    println!("{}", to_json(&spec));
}
