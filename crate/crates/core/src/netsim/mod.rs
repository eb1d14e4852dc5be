//! Seeded discrete-event simulation of heralded entanglement distribution
//! through the optical crossconnect.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`. Link `i` (in order of first appearance in the switch
//! schedule) draws from stream `i`; ELU `j`'s collision clock draws from stream
//! `2^32 + j`. Streams are independent, so adding a link does not perturb the
//! draws of the others.

mod buffer;
mod engine;
mod io;
mod switch;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use buffer::{buffer_take, PairBuffer, PairRecord, Take};
pub use engine::{run_sim, Simulator};
pub use io::{events_csv, load_demand, load_schedule, parse_demand, parse_schedule, DEMAND_SCHEMA, SCHEDULE_SCHEMA};
pub use switch::{reconfigure, Link, Port, Reconfiguration, SwitchConfig};

use crate::arch::ArchitectureSpec;
use crate::error::{Error, Result};

pub const SIM_SCHEMA: &str = "ionfab-sim/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Attempt,
    Success,
    ReconfigDone,
    PairExpired,
    Collision,
    ReloadDone,
    PairRequest,
    PairDelivered,
}

impl EventKind {
    /// Tie-break rank among events at the same instant (lower runs first).
    /// `PairDelivered` is emitted while handling another event and never queued.
    pub fn priority(self) -> u8 {
        match self {
            EventKind::ReconfigDone => 0,
            EventKind::ReloadDone => 1,
            EventKind::Collision => 2,
            EventKind::PairExpired => 3,
            EventKind::Attempt => 4,
            EventKind::Success => 5,
            EventKind::PairRequest => 6,
            EventKind::PairDelivered => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Attempt => "ATTEMPT",
            EventKind::Success => "SUCCESS",
            EventKind::ReconfigDone => "RECONFIG_DONE",
            EventKind::PairExpired => "PAIR_EXPIRED",
            EventKind::Collision => "COLLISION",
            EventKind::ReloadDone => "RELOAD_DONE",
            EventKind::PairRequest => "PAIR_REQUEST",
            EventKind::PairDelivered => "PAIR_DELIVERED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    pub link: Option<String>,
    pub elu_a: Option<String>,
    pub elu_b: Option<String>,
    /// Queue sequence number of the event that produced this entry.
    pub seq: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Keep the full event log in the result.
    pub log_events: bool,
    /// Log every attempt, not only successes. Outcomes are unchanged.
    pub log_attempts: bool,
    /// Run the background-gas collision process for ELUs with a nonzero rate.
    pub collisions: bool,
    /// Overrides (Fη_D)²/2.
    pub success_probability: Option<f64>,
    /// Communication ions stop attempting while their ELU runs local gates.
    /// Only consulted by callers that report local activity via
    /// [`Simulator::hold_elu`].
    pub exclusive_comm: bool,
    /// Record buffer occupancy after every change.
    pub occupancy_series: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            log_events: false,
            log_attempts: false,
            collisions: true,
            success_probability: None,
            exclusive_comm: false,
            occupancy_series: true,
        }
    }
}

/// Switch state taking effect at `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    #[serde(rename = "time_s")]
    pub time: f64,
    pub links: SwitchConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRequest {
    #[serde(rename = "time_s")]
    pub time: f64,
    pub elus: (String, String),
}

/// A served pair request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub request: usize,
    pub requested: f64,
    pub delivered: f64,
    pub pair_created: f64,
    pub elu_a: String,
    pub elu_b: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub link: String,
    pub elu_a: String,
    pub elu_b: String,
    pub attempts: u64,
    pub successes: u64,
    pub measured_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancySample {
    pub time: f64,
    pub elu_a: String,
    pub elu_b: String,
    pub occupancy: usize,
}

/// Where every heralded pair went.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLedger {
    pub successes: u64,
    pub delivered: u64,
    pub expired: u64,
    pub invalidated: u64,
    /// Tail-dropped on arrival at a full buffer.
    pub dropped: u64,
    /// Still buffered at the horizon.
    pub residual: u64,
}

impl PairLedger {
    pub fn balances(&self) -> bool {
        self.delivered + self.expired + self.invalidated + self.residual + self.dropped == self.successes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestStats {
    pub requested: u64,
    pub served: u64,
    pub pending: u64,
    pub mean_latency: Option<f64>,
    pub max_latency: Option<f64>,
}

/// A window during which a link could not attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suspension {
    pub link: String,
    pub from: f64,
    pub until: f64,
    pub reason: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub schema: String,
    pub horizon: f64,
    pub seed: u64,
    pub attempt_rate: f64,
    pub success_probability: f64,
    pub links: Vec<LinkStats>,
    pub attempts: u64,
    pub successes: u64,
    /// Mean over links of successes / horizon.
    pub mean_connection_rate: f64,
    pub ledger: PairLedger,
    pub requests: RequestStats,
    pub collisions: u64,
    pub occupancy: Vec<OccupancySample>,
    pub suspensions: Vec<Suspension>,
    pub events: Option<Vec<SimEvent>>,
}

/// Streaming mean/variance (Chan et al. pairwise merge).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    pub min: f64,
    pub max: f64,
}

impl RunningStats {
    pub fn of(x: f64) -> Self {
        Self {
            count: 1,
            mean: x,
            m2: 0.0,
            min: x,
            max: x,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / n as f64;
        Self {
            count: n,
            mean,
            m2,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    /// Sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Aggregate over a seed ensemble.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: u64,
    pub seeds: Vec<u64>,
    pub connection_rate: RunningStats,
    pub ledger: PairLedger,
    pub collisions: u64,
}

impl EnsembleSummary {
    pub fn of(result: &SimResult) -> Self {
        Self {
            runs: 1,
            seeds: vec![result.seed],
            connection_rate: RunningStats::of(result.mean_connection_rate),
            ledger: result.ledger,
            collisions: result.collisions,
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.runs += other.runs;
        self.seeds.extend(other.seeds);
        self.connection_rate = self.connection_rate.merge(other.connection_rate);
        let (a, b) = (&mut self.ledger, other.ledger);
        a.successes += b.successes;
        a.delivered += b.delivered;
        a.expired += b.expired;
        a.invalidated += b.invalidated;
        a.dropped += b.dropped;
        a.residual += b.residual;
        self.collisions += other.collisions;
        self
    }
}

/// Runs seeds `base_seed .. base_seed + runs` in parallel and merges them in
/// seed order, so the summary does not depend on the thread count.
pub fn run_ensemble(
    spec: &ArchitectureSpec,
    schedule: &[ScheduleEntry],
    demand: &[PairRequest],
    horizon: f64,
    base_seed: u64,
    runs: u64,
    options: &SimOptions,
) -> Result<EnsembleSummary> {
    let mut options = options.clone();
    options.log_events = false;
    options.occupancy_series = false;
    let results: Vec<Result<SimResult>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            run_sim(
                spec,
                schedule,
                demand,
                horizon,
                base_seed.wrapping_add(i),
                options.clone(),
            )
        })
        .collect();
    let mut summary = EnsembleSummary::default();
    for r in results {
        summary = summary.merge(EnsembleSummary::of(&r?));
    }
    Ok(summary)
}

/// Measured versus analytic connection rate on one link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub attempts: u64,
    pub successes: u64,
    pub measured_rate: f64,
    pub analytic_rate: f64,
    pub z_score: f64,
}

pub const RATE_CHECK_ATTEMPTS: u64 = 1_000_000;

/// Runs exactly 10⁶ attempts on `link` alone and compares with R·p.
pub fn theoretical_rate_check(spec: &ArchitectureSpec, link: &Link, seed: u64) -> Result<RateCheck> {
    theoretical_rate_check_with(spec, link, seed, SimOptions::default())
}

pub fn theoretical_rate_check_with(
    spec: &ArchitectureSpec,
    link: &Link,
    seed: u64,
    mut options: SimOptions,
) -> Result<RateCheck> {
    options.collisions = false;
    options.log_events = false;
    options.occupancy_series = false;
    let rate = spec.link.attempt_rate;
    let horizon = RATE_CHECK_ATTEMPTS as f64 / rate;
    let schedule = [ScheduleEntry {
        time: 0.0,
        links: SwitchConfig::new([link.clone()])?,
    }];
    let result = run_sim(spec, &schedule, &[], horizon, seed, options)?;
    if result.attempts != RATE_CHECK_ATTEMPTS {
        return Err(Error::Simulation(format!(
            "rate check ran {} attempts instead of {RATE_CHECK_ATTEMPTS}",
            result.attempts
        )));
    }
    let p = result.success_probability;
    let n = result.attempts as f64;
    let expected = n * p;
    let sd = (n * p * (1.0 - p)).sqrt();
    let diff = result.successes as f64 - expected;
    let z_score = if sd > 0.0 {
        diff / sd
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(RateCheck {
        attempts: result.attempts,
        successes: result.successes,
        measured_rate: result.successes as f64 / horizon,
        analytic_rate: rate * p,
        z_score,
    })
}
