//! Circuit parsing, qubit mapping and gate scheduling.

mod circuit;
mod mapping;
mod schedule;

pub use circuit::{load_circuit, parse_circuit, Circuit, GateKind, GateOp};
pub use mapping::{
    assign_qubits, brute_force_best_map, crossing_count, sites_for, IonSite, MapStrategy, QubitMap,
    BRUTE_FORCE_MAX_ELUS, BRUTE_FORCE_MAX_QUBITS,
};
pub use schedule::{
    fidelity_estimate, schedule, FidelityBreakdown, PairSupply, ScheduleOptions, ScheduleResult, TimelineEntry,
    SCHEDULE_SCHEMA,
};
