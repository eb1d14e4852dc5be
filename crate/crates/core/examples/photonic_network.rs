//! Runs the photonic network simulator on the bundled switch schedule and
//! demand trace, then reruns a few seeds to show the spread.

use ionfab::arch::load_architecture;
use ionfab::netsim::{load_demand, load_schedule, run_ensemble, run_sim, SimOptions};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> ionfab::Result<()> {
    let spec = load_architecture(format!("{DATA}/example.json"))?;
    let schedule = load_schedule(format!("{DATA}/schedule.json"))?;
    let demand = load_demand(format!("{DATA}/demand.json"))?;

    let r = run_sim(&spec, &schedule, &demand, 10.0, 7, SimOptions::default())?;
    for l in &r.links {
        println!(
            "{:<12} {:>6} successes, {:>7.2} Hz",
            l.link, l.successes, l.measured_rate
        );
    }
    println!("ledger: {:?} (balances: {})", r.ledger, r.ledger.balances());
    println!(
        "requests: {} served of {}, mean latency {:?} s",
        r.requests.served, r.requests.requested, r.requests.mean_latency
    );

    let summary = run_ensemble(&spec, &schedule, &demand, 10.0, 100, 32, &SimOptions::default())?;
    println!(
        "\n{} seeds: mean link rate {:.2} ± {:.2} Hz (min {:.2}, max {:.2}), {} pairs dropped at full buffers",
        summary.runs,
        summary.connection_rate.mean,
        summary.connection_rate.std_dev(),
        summary.connection_rate.min,
        summary.connection_rate.max,
        summary.ledger.dropped
    );
    Ok(())
}
