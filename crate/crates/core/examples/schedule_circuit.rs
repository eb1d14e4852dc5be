//! Maps the bundled GHZ-plus-teleport circuit onto the example machine and
//! schedules it with ideal and with simulated entanglement supply.

use ionfab::arch::load_architecture;
use ionfab::sched::{assign_qubits, load_circuit, schedule, MapStrategy, PairSupply, QubitMap, ScheduleOptions};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> ionfab::Result<()> {
    let spec = load_architecture(format!("{DATA}/example.json"))?;
    let circuit = load_circuit(format!("{DATA}/ghz_teleport.iqc"))?;

    let greedy = assign_qubits(&circuit, &spec, &MapStrategy::GreedyInteractionCut)?;
    let user = QubitMap::load(format!("{DATA}/map_ghz.json"))?;

    for (name, map) in [("greedy", &greedy), ("map_ghz.json", &user)] {
        let ideal = schedule(&circuit, map, &spec, &ScheduleOptions::default())?;
        let buffered = schedule(
            &circuit,
            map,
            &spec,
            &ScheduleOptions {
                pairs: PairSupply::Buffered { seed: 11 },
                ..ScheduleOptions::default()
            },
        )?;
        println!(
            "{name}: {} remote ops; makespan {:.3} ms ideal, {:.3} ms buffered; fidelity {:.4}",
            ideal.remote_ops,
            ideal.makespan * 1e3,
            buffered.makespan * 1e3,
            ideal.fidelity.total
        );
    }

    let ideal = schedule(&circuit, &greedy, &spec, &ScheduleOptions::default())?;
    print!("\n{}", ideal.timeline_csv());
    Ok(())
}
