//! Prints the derived rate table for every ELU of the example machine and
//! shows how the gate rate falls off as a chain grows.

use ionfab::arch::load_architecture;
use ionfab::rates::{gate_rate, rate_reports, recoil_frequency};

fn main() -> ionfab::Result<()> {
    let spec = load_architecture(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/example.json"))?;
    println!(
        "{:<4} {:>5} {:>14} {:>14} {:>12}",
        "ELU", "ions", "recoil rad/s", "R_gate/2π Hz", "link Hz"
    );
    for r in rate_reports(&spec)? {
        println!(
            "{:<4} {:>5} {:>14.3} {:>14.1} {:>12.3}",
            r.elu, r.n_ions, r.recoil_frequency, r.gate_rate, r.mean_connection_rate
        );
    }

    let k = spec.drive.effective_wavevector;
    let omega = spec.drive.rabi_frequency.rad_per_s();
    let trap = spec.elus[0].trap_frequency.rad_per_s();
    println!("\nchain length sweep");
    for n in [1, 2, 5, 10, 20, 50, 100] {
        let recoil = recoil_frequency(k, spec.species.mass, n)?;
        let hz = gate_rate(omega, recoil, trap)? / (2.0 * std::f64::consts::PI);
        println!("  N = {n:>3}: {:>9.1} Hz", hz);
    }
    Ok(())
}
