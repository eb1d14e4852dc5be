//! Solves a small power-law Ising model three ways: exhaustive search,
//! simulated annealing and a simulated adiabatic sweep.

use ionfab::ising::power_law_couplings;
use ionfab::solver::{adiabatic_evolve, anneal_classical, brute_force_ground_state, AnnealSchedule};

fn main() -> ionfab::Result<()> {
    let inst = power_law_couplings(8, 1.0, -1.0)?;
    let ground = brute_force_ground_state(&inst)?;
    println!("ground energy {:.6}, degeneracy {}", ground.energy, ground.degeneracy);

    let anneal = anneal_classical(&inst, &AnnealSchedule::default(), 3)?;
    println!(
        "anneal energy {:.6} after {} accepted moves",
        anneal.energy, anneal.accepted
    );

    for t in [1.0, 4.0, 16.0, 64.0] {
        let run = adiabatic_evolve(&inst, t, (100.0 * t) as usize)?;
        println!("T = {t:>4}: ground-space overlap {:.6}", run.overlap);
    }
    Ok(())
}
