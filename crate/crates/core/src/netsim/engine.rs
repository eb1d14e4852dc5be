//! The discrete-event loop.
//!
//! Each active link attempts entanglement on a fixed clock: attempt `m`
//! (counting from 1) after the link (re)starts at `t0` happens at
//! `t0 + m / R`. Instead of drawing every attempt, the engine draws the number
//! of failures before the next success from a geometric distribution and jumps
//! straight to it; with attempt logging on, the same draws decide which logged
//! attempt succeeds, so outcomes do not depend on the logging mode.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};

use super::buffer::{buffer_take, PairBuffer, PairRecord};
use super::switch::{Link, SwitchConfig};
use super::{
    Delivery, EventKind, LinkStats, OccupancySample, PairLedger, PairRequest, RequestStats, ScheduleEntry, SimEvent,
    SimOptions, SimResult, Suspension, SIM_SCHEMA,
};
use crate::arch::{validate_architecture, ArchitectureSpec};
use crate::error::{Error, Result};
use crate::rates::link_success_probability;

/// RNG stream offset for per-ELU collision processes; link streams start at 0.
const ELU_STREAM_BASE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug)]
enum Action {
    Apply(usize),
    ReconfigDone(usize),
    ReloadDone(usize),
    HoldStart { elu: usize, until: f64 },
    HoldEnd(usize),
    Collision(usize),
    Expire { buffer: usize, pair: u64 },
    Attempt { link: usize, epoch: u64, m: u64 },
    Success { link: usize, epoch: u64 },
    Request(usize),
}

impl Action {
    fn priority(&self) -> u8 {
        match self {
            Action::Apply(_) | Action::ReconfigDone(_) => EventKind::ReconfigDone.priority(),
            Action::ReloadDone(_) | Action::HoldStart { .. } | Action::HoldEnd(_) => EventKind::ReloadDone.priority(),
            Action::Collision(_) => EventKind::Collision.priority(),
            Action::Expire { .. } => EventKind::PairExpired.priority(),
            Action::Attempt { .. } => EventKind::Attempt.priority(),
            Action::Success { .. } => EventKind::Success.priority(),
            Action::Request(_) => EventKind::PairRequest.priority(),
        }
    }
}

#[derive(Debug)]
struct Queued {
    time: f64,
    priority: u8,
    seq: u64,
    action: Action,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // reversed so BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.priority.cmp(&self.priority))
            .then(other.seq.cmp(&self.seq))
    }
}

struct LinkState {
    link: Link,
    elus: (usize, usize),
    buffer: usize,
    rng: ChaCha8Rng,
    active: bool,
    running: bool,
    suspended_until: f64,
    epoch: u64,
    t0: f64,
    next_success: Option<u64>,
    attempts: u64,
    successes: u64,
}

struct PendingRequest {
    id: usize,
    time: f64,
}

/// A stepping simulator. [`run_sim`] drives it to the horizon in one go; the
/// scheduler interleaves pair requests with its own timeline.
pub struct Simulator {
    spec: ArchitectureSpec,
    options: SimOptions,
    seed: u64,
    horizon: f64,
    p: f64,
    rate: f64,
    geometric: Option<Geometric>,
    schedule: Vec<ScheduleEntry>,
    config: SwitchConfig,
    links: Vec<LinkState>,
    link_index: BTreeMap<Link, usize>,
    buffers: Vec<PairBuffer>,
    buffer_index: BTreeMap<(usize, usize), usize>,
    waiting: Vec<VecDeque<PendingRequest>>,
    elu_rngs: Vec<ChaCha8Rng>,
    collision_clock: Vec<Option<Exp<f64>>>,
    queue: BinaryHeap<Queued>,
    seq: u64,
    now: f64,
    next_pair: u64,
    requests: Vec<(f64, Option<f64>)>,
    request_buffer: Vec<usize>,
    ledger: PairLedger,
    collisions: u64,
    occupancy: Vec<OccupancySample>,
    suspensions: Vec<Suspension>,
    events: Vec<SimEvent>,
    outbox: Vec<Delivery>,
}

impl Simulator {
    pub fn new(
        spec: &ArchitectureSpec,
        schedule: &[ScheduleEntry],
        horizon: f64,
        seed: u64,
        options: SimOptions,
    ) -> Result<Self> {
        let report = validate_architecture(spec);
        if !report.is_ok() {
            return Err(Error::Validation(report));
        }
        if horizon.is_nan() || horizon <= 0.0 {
            return Err(Error::Simulation(format!("horizon must be positive, got {horizon}")));
        }
        let mut last = 0.0;
        for (i, entry) in schedule.iter().enumerate() {
            if !entry.time.is_finite() || entry.time < last {
                return Err(Error::Switch(format!(
                    "schedule entry {i} at t={} is negative or out of order",
                    entry.time
                )));
            }
            last = entry.time;
            entry.links.validate(spec)?;
        }
        let p = match options.success_probability {
            Some(p) if (0.0..=1.0).contains(&p) => p,
            Some(p) => return Err(Error::Simulation(format!("success probability {p} outside [0, 1]"))),
            None => link_success_probability(spec.link.collection_fraction, spec.link.detector_efficiency)?,
        };
        let geometric = (p > 0.0).then(|| Geometric::new(p).expect("p in (0, 1]"));

        let mut link_index = BTreeMap::new();
        let mut buffer_index = BTreeMap::new();
        let mut links = Vec::new();
        let mut buffers = Vec::new();
        for entry in schedule {
            for link in entry.links.links() {
                if link_index.contains_key(link) {
                    continue;
                }
                let (a, b) = link.elus();
                let ea = spec.elu_index(a).expect("validated");
                let eb = spec.elu_index(b).expect("validated");
                let key = (ea.min(eb), ea.max(eb));
                let buffer = *buffer_index.entry(key).or_insert_with(|| {
                    buffers.push(PairBuffer::new(key, spec.link.buffer_capacity));
                    buffers.len() - 1
                });
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(links.len() as u64);
                link_index.insert(link.clone(), links.len());
                links.push(LinkState {
                    link: link.clone(),
                    elus: key,
                    buffer,
                    rng,
                    active: false,
                    running: false,
                    suspended_until: 0.0,
                    epoch: 0,
                    t0: 0.0,
                    next_success: None,
                    attempts: 0,
                    successes: 0,
                });
            }
        }

        let elu_rngs = (0..spec.elus.len())
            .map(|e| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(ELU_STREAM_BASE + e as u64);
                rng
            })
            .collect();
        let collision_clock = spec
            .elus
            .iter()
            .map(|e| {
                let rate = e.collision_rate_per_ion * e.n_ions as f64;
                (options.collisions && rate > 0.0).then(|| Exp::new(rate).expect("positive rate"))
            })
            .collect();

        let mut sim = Self {
            spec: spec.clone(),
            options,
            seed,
            horizon,
            p,
            rate: spec.link.attempt_rate,
            geometric,
            schedule: schedule.to_vec(),
            config: SwitchConfig::default(),
            links,
            link_index,
            waiting: (0..buffers.len()).map(|_| VecDeque::new()).collect(),
            buffers,
            buffer_index,
            elu_rngs,
            collision_clock,
            queue: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            next_pair: 0,
            requests: Vec::new(),
            request_buffer: Vec::new(),
            ledger: PairLedger::default(),
            collisions: 0,
            occupancy: Vec::new(),
            suspensions: Vec::new(),
            events: Vec::new(),
            outbox: Vec::new(),
        };
        for i in 0..sim.schedule.len() {
            let t = sim.schedule[i].time;
            sim.push(t, Action::Apply(i));
        }
        for e in 0..sim.spec.elus.len() {
            sim.schedule_collision(e, 0.0);
        }
        Ok(sim)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn success_probability(&self) -> f64 {
        self.p
    }

    /// Queues a pair request between two ELUs by id.
    pub fn request(&mut self, time: f64, a: &str, b: &str) -> Result<usize> {
        let ea = self.spec.elu_index(a).ok_or_else(|| Error::UnknownElu(a.to_string()))?;
        let eb = self.spec.elu_index(b).ok_or_else(|| Error::UnknownElu(b.to_string()))?;
        self.request_indices(time, ea, eb)
    }

    /// Queues a pair request between ELUs `a` and `b` (indices into the spec).
    pub fn request_indices(&mut self, time: f64, a: usize, b: usize) -> Result<usize> {
        if a >= self.spec.elus.len() || b >= self.spec.elus.len() {
            return Err(Error::Simulation(format!(
                "ELU index out of range in request ({a}, {b})"
            )));
        }
        if a == b {
            return Err(Error::Simulation(format!(
                "pair requested within a single ELU {}",
                self.spec.elus[a].id
            )));
        }
        for e in [a, b] {
            if self.spec.elus[e].comm_ion_indices.is_empty() {
                return Err(Error::Simulation(format!(
                    "ELU {} has no communication ions",
                    self.spec.elus[e].id
                )));
            }
        }
        if !self.buffer_index.contains_key(&(a.min(b), a.max(b))) {
            return Err(Error::Simulation(format!(
                "no scheduled link ever connects {} and {}",
                self.spec.elus[a].id, self.spec.elus[b].id
            )));
        }
        if !time.is_finite() || time < self.now {
            return Err(Error::Simulation(format!(
                "request at t={time} precedes simulation time {}",
                self.now
            )));
        }
        let id = self.requests.len();
        self.requests.push((time, None));
        let buffer = self.buffer_index[&(a.min(b), a.max(b))];
        self.push(time, Action::Request(id));
        self.request_buffer.push(buffer);
        Ok(id)
    }

    /// Suspends every link touching `elu` during `[from, until]`. Used when
    /// communication ions may not attempt while their ELU runs local gates.
    pub fn hold_elu(&mut self, elu: usize, from: f64, until: f64) -> Result<()> {
        if from < self.now || until < from {
            return Err(Error::Simulation(format!("invalid hold window [{from}, {until}]")));
        }
        self.push(from, Action::HoldStart { elu, until });
        self.push(until, Action::HoldEnd(elu));
        Ok(())
    }

    pub fn next_event_time(&self) -> Option<f64> {
        self.queue.peek().map(|q| q.time).filter(|t| *t <= self.horizon)
    }

    /// Processes one event; `None` when nothing remains before the horizon.
    pub fn step(&mut self) -> Option<Vec<Delivery>> {
        self.next_event_time()?;
        let q = self.queue.pop().expect("peeked");
        self.now = q.time;
        self.handle(q.seq, q.action);
        Some(std::mem::take(&mut self.outbox))
    }

    /// Processes every event with time ≤ `t`, then sets the clock to `t`.
    pub fn run_until(&mut self, t: f64) -> Vec<Delivery> {
        let t = t.min(self.horizon);
        let mut out = Vec::new();
        while self.next_event_time().is_some_and(|n| n <= t) {
            out.extend(self.step().expect("event available"));
        }
        if t > self.now {
            self.now = t;
        }
        out
    }

    /// Runs to the horizon and closes the books.
    pub fn finish(mut self) -> Result<SimResult> {
        if !self.horizon.is_finite() {
            return Err(Error::Simulation("cannot finish an unbounded simulation".into()));
        }
        self.run_until(self.horizon);
        let horizon = self.horizon;
        for i in 0..self.links.len() {
            if self.links[i].running {
                let n = attempts_through(self.links[i].t0, self.rate, horizon);
                self.links[i].attempts += n;
            }
        }
        self.ledger.residual = self.buffers.iter().map(|b| b.len() as u64).sum();
        let served: Vec<f64> = self.requests.iter().filter_map(|(t, d)| d.map(|d| d - t)).collect();
        let requests = RequestStats {
            requested: self.requests.len() as u64,
            served: served.len() as u64,
            pending: (self.requests.len() - served.len()) as u64,
            mean_latency: (!served.is_empty()).then(|| served.iter().sum::<f64>() / served.len() as f64),
            max_latency: served.iter().copied().reduce(f64::max),
        };
        let links: Vec<LinkStats> = self
            .links
            .iter()
            .map(|l| LinkStats {
                link: l.link.to_string(),
                elu_a: self.spec.elus[l.elus.0].id.clone(),
                elu_b: self.spec.elus[l.elus.1].id.clone(),
                attempts: l.attempts,
                successes: l.successes,
                measured_rate: l.successes as f64 / horizon,
            })
            .collect();
        let mean_connection_rate = if links.is_empty() {
            0.0
        } else {
            links.iter().map(|l| l.measured_rate).sum::<f64>() / links.len() as f64
        };
        Ok(SimResult {
            schema: SIM_SCHEMA.to_string(),
            horizon,
            seed: self.seed,
            attempt_rate: self.rate,
            success_probability: self.p,
            attempts: links.iter().map(|l| l.attempts).sum(),
            successes: links.iter().map(|l| l.successes).sum(),
            mean_connection_rate,
            links,
            ledger: self.ledger,
            requests,
            collisions: self.collisions,
            occupancy: self.occupancy,
            suspensions: self.suspensions,
            events: self.options.log_events.then_some(self.events),
        })
    }

    fn push(&mut self, time: f64, action: Action) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Queued {
            time,
            priority: action.priority(),
            seq,
            action,
        });
    }

    fn log(&mut self, seq: u64, kind: EventKind, link: Option<usize>, elus: Option<(usize, usize)>) {
        if !self.options.log_events {
            return;
        }
        let elus = elus.or_else(|| link.map(|l| self.links[l].elus));
        self.events.push(SimEvent {
            time: self.now,
            kind,
            link: link.map(|l| self.links[l].link.to_string()),
            elu_a: elus.map(|(a, _)| self.spec.elus[a].id.clone()),
            elu_b: elus.and_then(|(a, b)| (a != b).then(|| self.spec.elus[b].id.clone())),
            seq,
        });
    }

    fn sample_occupancy(&mut self, buffer: usize) {
        if !self.options.occupancy_series {
            return;
        }
        let (a, b) = self.buffers[buffer].owner;
        self.occupancy.push(OccupancySample {
            time: self.now,
            elu_a: self.spec.elus[a].id.clone(),
            elu_b: self.spec.elus[b].id.clone(),
            occupancy: self.buffers[buffer].len(),
        });
    }

    fn schedule_collision(&mut self, elu: usize, after: f64) {
        if let Some(exp) = self.collision_clock[elu] {
            let dt = exp.sample(&mut self.elu_rngs[elu]);
            self.push(after + dt, Action::Collision(elu));
        }
    }

    fn attempt_time(&self, link: usize, m: u64) -> f64 {
        self.links[link].t0 + m as f64 / self.rate
    }

    fn try_start(&mut self, link: usize) {
        let l = &self.links[link];
        if !l.active || l.running || self.now < l.suspended_until {
            return;
        }
        let l = &mut self.links[link];
        l.running = true;
        l.t0 = self.now;
        l.epoch += 1;
        l.next_success = None;
        self.draw_next(link, 0);
        if self.options.log_attempts {
            let epoch = self.links[link].epoch;
            let t = self.attempt_time(link, 1);
            self.push(t, Action::Attempt { link, epoch, m: 1 });
        }
    }

    /// Draws the index of the next successful attempt after attempt `last`.
    fn draw_next(&mut self, link: usize, last: u64) {
        let Some(geo) = self.geometric else {
            self.links[link].next_success = None;
            return;
        };
        let failures = geo.sample(&mut self.links[link].rng);
        let m = last.saturating_add(failures).saturating_add(1);
        self.links[link].next_success = Some(m);
        if !self.options.log_attempts {
            let t = self.attempt_time(link, m);
            let epoch = self.links[link].epoch;
            if t <= self.horizon {
                self.push(t, Action::Success { link, epoch });
            }
        }
    }

    fn stop(&mut self, link: usize) {
        let now = self.now;
        let l = &mut self.links[link];
        if l.running {
            l.attempts += attempts_before(l.t0, self.rate, now);
            l.running = false;
            l.epoch += 1;
        }
    }

    fn suspend(&mut self, link: usize, until: f64, reason: EventKind) {
        self.stop(link);
        let l = &mut self.links[link];
        l.suspended_until = l.suspended_until.max(until);
        self.suspensions.push(Suspension {
            link: l.link.to_string(),
            from: self.now,
            until,
            reason,
        });
    }

    fn links_touching(&self, elu: usize) -> Vec<usize> {
        (0..self.links.len())
            .filter(|&l| self.links[l].elus.0 == elu || self.links[l].elus.1 == elu)
            .collect()
    }

    fn handle(&mut self, seq: u64, action: Action) {
        match action {
            Action::Apply(i) => self.apply(i),
            Action::ReconfigDone(link) => {
                self.log(seq, EventKind::ReconfigDone, Some(link), None);
                self.try_start(link);
            }
            Action::ReloadDone(elu) => {
                self.log(seq, EventKind::ReloadDone, None, Some((elu, elu)));
                for l in self.links_touching(elu) {
                    self.try_start(l);
                }
            }
            Action::HoldStart { elu, until } => {
                for l in self.links_touching(elu) {
                    self.stop(l);
                    let s = &mut self.links[l];
                    s.suspended_until = s.suspended_until.max(until);
                }
            }
            Action::HoldEnd(elu) => {
                for l in self.links_touching(elu) {
                    self.try_start(l);
                }
            }
            Action::Collision(elu) => self.collide(seq, elu),
            Action::Expire { buffer, pair } => {
                if self.buffers[buffer].remove(pair).is_some() {
                    self.ledger.expired += 1;
                    let owner = self.buffers[buffer].owner;
                    self.log(seq, EventKind::PairExpired, None, Some(owner));
                    self.sample_occupancy(buffer);
                }
            }
            Action::Attempt { link, epoch, m } => {
                if self.links[link].epoch != epoch {
                    return;
                }
                self.log(seq, EventKind::Attempt, Some(link), None);
                if self.links[link].next_success == Some(m) {
                    let t = self.now;
                    self.push(t, Action::Success { link, epoch });
                }
                let t = self.attempt_time(link, m + 1);
                self.push(t, Action::Attempt { link, epoch, m: m + 1 });
            }
            Action::Success { link, epoch } => {
                if self.links[link].epoch != epoch {
                    return;
                }
                self.succeed(seq, link);
            }
            Action::Request(id) => {
                let buffer = self.request_buffer[id];
                let owner = self.buffers[buffer].owner;
                self.log(seq, EventKind::PairRequest, None, Some(owner));
                self.waiting[buffer].push_back(PendingRequest { id, time: self.now });
                self.serve(seq, buffer);
            }
        }
    }

    fn apply(&mut self, entry: usize) {
        let next = self.schedule[entry].links.clone();
        let initial = self.schedule[entry].time == 0.0;
        let removed: Vec<Link> = self.config.links().difference(next.links()).cloned().collect();
        let added: Vec<Link> = next.links().difference(self.config.links()).cloned().collect();
        for link in removed {
            let i = self.link_index[&link];
            self.stop(i);
            self.links[i].active = false;
        }
        let rt = self.spec.switch.reconfiguration_time;
        for link in added {
            let i = self.link_index[&link];
            self.links[i].active = true;
            if initial {
                self.try_start(i);
            } else {
                let until = self.now + rt;
                self.suspend(i, until, EventKind::ReconfigDone);
                self.push(until, Action::ReconfigDone(i));
            }
        }
        self.config = next;
    }

    fn collide(&mut self, seq: u64, elu: usize) {
        self.collisions += 1;
        self.log(seq, EventKind::Collision, None, Some((elu, elu)));
        for b in 0..self.buffers.len() {
            let (x, y) = self.buffers[b].owner;
            if x == elu || y == elu {
                let lost = self.buffers[b].clear().len() as u64;
                if lost > 0 {
                    self.ledger.invalidated += lost;
                    self.sample_occupancy(b);
                }
            }
        }
        let until = self.now + self.spec.elus[elu].reload_time;
        for l in self.links_touching(elu) {
            self.suspend(l, until, EventKind::Collision);
        }
        self.push(until, Action::ReloadDone(elu));
        let now = self.now;
        self.schedule_collision(elu, now);
    }

    fn succeed(&mut self, seq: u64, link: usize) {
        let m = self.links[link].next_success.expect("success scheduled");
        self.links[link].successes += 1;
        self.ledger.successes += 1;
        self.log(seq, EventKind::Success, Some(link), None);
        let pair = PairRecord {
            id: self.next_pair,
            link,
            created: self.now,
            expires: self.spec.link.pair_lifetime.map(|life| self.now + life),
        };
        self.next_pair += 1;
        let buffer = self.links[link].buffer;
        match self.buffers[buffer].push(pair) {
            Ok(()) => {
                let pair = self.buffers[buffer].iter().last().expect("just pushed").clone();
                if let Some(t) = pair.expires {
                    self.push(t, Action::Expire { buffer, pair: pair.id });
                }
                self.sample_occupancy(buffer);
                self.serve(seq, buffer);
            }
            Err(_) => self.ledger.dropped += 1,
        }
        self.draw_next(link, m);
    }

    fn serve(&mut self, seq: u64, buffer: usize) {
        while !self.waiting[buffer].is_empty() {
            let take = buffer_take(&mut self.buffers[buffer], self.now);
            let owner = self.buffers[buffer].owner;
            for _ in &take.expired {
                self.ledger.expired += 1;
                self.log(seq, EventKind::PairExpired, None, Some(owner));
            }
            let Some(pair) = take.pair else {
                if !take.expired.is_empty() {
                    self.sample_occupancy(buffer);
                }
                break;
            };
            let req = self.waiting[buffer].pop_front().expect("non-empty");
            self.ledger.delivered += 1;
            self.requests[req.id].1 = Some(self.now);
            self.log(seq, EventKind::PairDelivered, None, Some(owner));
            self.sample_occupancy(buffer);
            self.outbox.push(Delivery {
                request: req.id,
                requested: req.time,
                delivered: self.now,
                pair_created: pair.created,
                elu_a: self.spec.elus[owner.0].id.clone(),
                elu_b: self.spec.elus[owner.1].id.clone(),
            });
        }
    }
}

/// Number of clocked attempts strictly before `t` for a link started at `t0`.
fn attempts_before(t0: f64, rate: f64, t: f64) -> u64 {
    let at = |m: u64| t0 + m as f64 / rate;
    let mut m = ((t - t0) * rate).floor().max(0.0) as u64;
    while m > 0 && at(m) >= t {
        m -= 1;
    }
    while at(m + 1) < t {
        m += 1;
    }
    m
}

/// Number of clocked attempts at or before `t`.
fn attempts_through(t0: f64, rate: f64, t: f64) -> u64 {
    let at = |m: u64| t0 + m as f64 / rate;
    let mut m = ((t - t0) * rate).floor().max(0.0) as u64;
    while m > 0 && at(m) > t {
        m -= 1;
    }
    while at(m + 1) <= t {
        m += 1;
    }
    m
}

/// Runs the full simulation to `horizon`.
pub fn run_sim(
    spec: &ArchitectureSpec,
    schedule: &[ScheduleEntry],
    demand: &[PairRequest],
    horizon: f64,
    seed: u64,
    options: SimOptions,
) -> Result<SimResult> {
    let mut sim = Simulator::new(spec, schedule, horizon, seed, options)?;
    let mut demand: Vec<&PairRequest> = demand.iter().collect();
    demand.sort_by(|a, b| a.time.total_cmp(&b.time));
    for r in demand {
        if r.time > horizon {
            continue;
        }
        sim.request(r.time, &r.elus.0, &r.elus.1)?;
    }
    sim.finish()
}
