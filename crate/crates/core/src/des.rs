//! Discrete-event simulation of pooled and dedicated service systems with
//! customers who balk after observing the queue.
//!
//! Arrivals are Poisson with rate `rho * N * mu`. An arriving customer sees the
//! number of customers at the station it faces (the whole system when pooled,
//! one randomly chosen server's line when dedicated), builds the exact
//! sojourn-time law for that state, and joins iff the utility of that law is
//! strictly positive. Joiners are served FIFO with exponential service times.
//!
//! Metrics count arrivals after the warm-up instant. Welfare is the sum of the
//! utilities evaluated at joining; realized sojourn statistics use customers
//! who arrived after warm-up and finished before the horizon.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dist::empirical_tail;
use crate::phasetype::{PhaseType, PhaseTypeError, Topology};
use crate::streams::{stream, Purpose};
use crate::utility::{decide, ModelKind, UtilityModel};

/// Tail level of the realized sojourn diagnostics.
pub const REALIZED_TAIL_LEVEL: f64 = 0.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("wait law for an arrival observing {n_observed} customers: {source}")]
    WaitLaw {
        n_observed: usize,
        #[source]
        source: PhaseTypeError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub servers: usize,
    pub rho: f64,
    pub reward: f64,
    pub mu: f64,
    pub model: UtilityModel,
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Scenario {
    /// A scenario with unit service rate and the 20 x 5000 (1000 warm-up)
    /// replication protocol.
    pub fn new(
        topology: Topology,
        servers: usize,
        rho: f64,
        reward: f64,
        model: UtilityModel,
        seed: u64,
    ) -> Self {
        Self {
            topology,
            servers,
            rho,
            reward,
            mu: 1.0,
            model,
            horizon: 5000.0,
            warmup: 1000.0,
            replications: 20,
            seed,
        }
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn arrival_rate(&self) -> f64 {
        self.rho * self.servers as f64 * self.mu
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if self.servers == 0 {
            return bad("servers must be >= 1".into());
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !self.reward.is_finite() {
            return bad("reward must be finite".into());
        }
        if !(self.warmup.is_finite() && self.warmup >= 0.0) {
            return bad(format!("warmup must be >= 0, got {}", self.warmup));
        }
        if !(self.horizon.is_finite() && self.horizon > self.warmup) {
            return bad(format!(
                "horizon ({}) must exceed warmup ({})",
                self.horizon, self.warmup
            ));
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        self.model.validate().map_err(SimError::InvalidScenario)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    Departure,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::Departure => "departure",
        }
    }
}

/// One row of the optional event log. For arrivals `n_observed` is the count
/// seen on arrival; for departures it is the count left behind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub queue_id: usize,
    pub n_observed: usize,
    pub joined: Option<bool>,
    pub utility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationMetrics {
    pub arrivals: u64,
    pub joined: u64,
    pub throughput_pct: f64,
    pub balk_pct: f64,
    pub welfare: f64,
    pub mean_observed_queue: f64,
    pub completed: u64,
    pub mean_sojourn: Option<f64>,
    pub p80_sojourn: Option<f64>,
    pub cvar80_sojourn: Option<f64>,
}

/// Mean and standard error across replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self { mean, se: (var / n as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub scenario: Scenario,
    pub replications: Vec<ReplicationMetrics>,
    pub throughput_pct: Estimate,
    pub balk_pct: Estimate,
    pub welfare: Estimate,
    pub mean_observed_queue: Estimate,
    pub mean_sojourn: Estimate,
    pub p80_sojourn: Estimate,
    pub cvar80_sojourn: Estimate,
}

impl SimMetrics {
    fn aggregate(scenario: Scenario, replications: Vec<ReplicationMetrics>) -> Self {
        let pick = |f: &dyn Fn(&ReplicationMetrics) -> f64| {
            Estimate::from_values(&replications.iter().map(f).collect::<Vec<_>>())
        };
        let pick_opt = |f: &dyn Fn(&ReplicationMetrics) -> Option<f64>| {
            Estimate::from_values(&replications.iter().filter_map(f).collect::<Vec<_>>())
        };
        Self {
            throughput_pct: pick(&|r| r.throughput_pct),
            balk_pct: pick(&|r| r.balk_pct),
            welfare: pick(&|r| r.welfare),
            mean_observed_queue: pick(&|r| r.mean_observed_queue),
            mean_sojourn: pick_opt(&|r| r.mean_sojourn),
            p80_sojourn: pick_opt(&|r| r.p80_sojourn),
            cvar80_sojourn: pick_opt(&|r| r.cvar80_sojourn),
            scenario,
            replications,
        }
    }
}

/// Utilities of joining, indexed by the observed count, filled on demand.
struct UtilityTable {
    topology: Topology,
    servers: usize,
    mu: f64,
    reward: f64,
    model: UtilityModel,
    values: Vec<f64>,
}

impl UtilityTable {
    fn new(s: &Scenario) -> Self {
        Self {
            topology: s.topology,
            servers: s.servers,
            mu: s.mu,
            reward: s.reward,
            model: s.model,
            values: Vec::new(),
        }
    }

    fn get(&mut self, n: usize) -> Result<f64, SimError> {
        while self.values.len() <= n {
            let k = self.values.len();
            let law = PhaseType::from_queue_state(self.topology, k, self.servers, self.mu)
                .map_err(|source| SimError::WaitLaw { n_observed: k, source })?;
            self.values.push(self.model.utility(&law, self.reward));
        }
        Ok(self.values[n])
    }
}

#[derive(Debug, Clone, Copy)]
struct Customer {
    arrival: f64,
    service: f64,
    tracked: bool,
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Arrival,
    Departure { station: usize, customer: Customer },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    action: Action,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap pops the earliest time, then the lowest sequence
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Default)]
struct Station {
    servers: usize,
    busy: usize,
    waiting: VecDeque<Customer>,
}

impl Station {
    fn in_system(&self) -> usize {
        self.busy + self.waiting.len()
    }
}

struct Calendar {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl Calendar {
    fn schedule(&mut self, time: f64, action: Action) {
        self.heap.push(Event { time, seq: self.seq, action });
        self.seq += 1;
    }
}

fn exp_draw(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

pub fn run_replication(scenario: &Scenario, rep: usize) -> Result<ReplicationMetrics, SimError> {
    simulate(scenario, rep, None)
}

/// Like [`run_replication`], also returning every arrival and departure.
pub fn run_replication_logged(
    scenario: &Scenario,
    rep: usize,
) -> Result<(ReplicationMetrics, Vec<EventRecord>), SimError> {
    let mut log = Vec::new();
    let metrics = simulate(scenario, rep, Some(&mut log))?;
    Ok((metrics, log))
}

fn simulate(
    s: &Scenario,
    rep: usize,
    mut log: Option<&mut Vec<EventRecord>>,
) -> Result<ReplicationMetrics, SimError> {
    s.validate()?;
    let lambda = s.arrival_rate();
    let mut arrivals_rng = stream(s.seed, Purpose::Arrivals, rep as u64);
    let mut service_rng = stream(s.seed, Purpose::Service, rep as u64);
    let mut routing_rng = stream(s.seed, Purpose::Routing, rep as u64);
    let mut table = UtilityTable::new(s);

    let mut stations: Vec<Station> = match s.topology {
        Topology::Pooled => vec![Station { servers: s.servers, ..Default::default() }],
        Topology::Dedicated => (0..s.servers)
            .map(|_| Station { servers: 1, ..Default::default() })
            .collect(),
    };

    let mut calendar = Calendar { heap: BinaryHeap::new(), seq: 0 };
    calendar.schedule(exp_draw(&mut arrivals_rng, lambda), Action::Arrival);

    let mut arrivals = 0u64;
    let mut joined = 0u64;
    let mut welfare = 0.0;
    let mut observed_sum = 0u64;
    let mut sojourns = Vec::new();

    while let Some(event) = calendar.heap.pop() {
        let now = event.time;
        if now > s.horizon {
            break;
        }
        match event.action {
            Action::Arrival => {
                calendar.schedule(now + exp_draw(&mut arrivals_rng, lambda), Action::Arrival);
                // Both draws are taken for every arrival so that the streams
                // stay aligned across topologies.
                let service = exp_draw(&mut service_rng, s.mu);
                let route = routing_rng.random_range(0..s.servers);
                let station_id = match s.topology {
                    Topology::Pooled => 0,
                    Topology::Dedicated => route,
                };
                let station = &mut stations[station_id];
                let n_observed = station.in_system();
                let decision = decide(table.get(n_observed)?);
                let tracked = now > s.warmup;
                if tracked {
                    arrivals += 1;
                }
                if let Some(log) = log.as_deref_mut() {
                    log.push(EventRecord {
                        time: now,
                        kind: EventKind::Arrival,
                        queue_id: station_id,
                        n_observed,
                        joined: Some(decision.joins()),
                        utility: Some(decision.utility()),
                    });
                }
                if decision.joins() {
                    if tracked {
                        joined += 1;
                        welfare += decision.utility();
                        observed_sum += n_observed as u64;
                    }
                    let customer = Customer { arrival: now, service, tracked };
                    if station.busy < station.servers {
                        station.busy += 1;
                        calendar.schedule(
                            now + service,
                            Action::Departure { station: station_id, customer },
                        );
                    } else {
                        station.waiting.push_back(customer);
                    }
                }
            }
            Action::Departure { station: station_id, customer } => {
                if customer.tracked {
                    sojourns.push(now - customer.arrival);
                }
                let station = &mut stations[station_id];
                match station.waiting.pop_front() {
                    Some(next) => calendar.schedule(
                        now + next.service,
                        Action::Departure { station: station_id, customer: next },
                    ),
                    None => station.busy -= 1,
                }
                if let Some(log) = log.as_deref_mut() {
                    log.push(EventRecord {
                        time: now,
                        kind: EventKind::Departure,
                        queue_id: station_id,
                        n_observed: station.in_system(),
                        joined: None,
                        utility: None,
                    });
                }
            }
        }
    }

    let throughput_pct = if arrivals > 0 {
        100.0 * joined as f64 / arrivals as f64
    } else {
        0.0
    };
    let tail = empirical_tail(&sojourns, REALIZED_TAIL_LEVEL);
    Ok(ReplicationMetrics {
        arrivals,
        joined,
        throughput_pct,
        balk_pct: 100.0 - throughput_pct,
        welfare,
        mean_observed_queue: if joined > 0 {
            observed_sum as f64 / joined as f64
        } else {
            0.0
        },
        completed: sojourns.len() as u64,
        mean_sojourn: (!sojourns.is_empty())
            .then(|| sojourns.iter().sum::<f64>() / sojourns.len() as f64),
        p80_sojourn: tail.map(|t| t.0),
        cvar80_sojourn: tail.map(|t| t.1),
    })
}

/// Runs every replication (in parallel) and aggregates in replication order.
pub fn run_scenario(scenario: &Scenario) -> Result<SimMetrics, SimError> {
    scenario.validate()?;
    let reps = (0..scenario.replications)
        .into_par_iter()
        .map(|r| run_replication(scenario, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimMetrics::aggregate(*scenario, reps))
}

/// Traffic regime used by the pooled-versus-dedicated summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// `rho <= 1`
    Moderate,
    /// `rho > 1`
    Overcapacitated,
}

impl Regime {
    pub fn of(rho: f64) -> Self {
        if rho <= 1.0 {
            Regime::Moderate
        } else {
            Regime::Overcapacitated
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Moderate => "moderate",
            Regime::Overcapacitated => "overcapacitated",
        }
    }
}

/// Cartesian scenario grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rhos: Vec<f64>,
    pub servers: Vec<usize>,
    pub rewards: Vec<f64>,
    pub models: Vec<UtilityModel>,
    pub topologies: Vec<Topology>,
    pub mu: f64,
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Grid {
    /// The 5 x 3 x 3 grid of the pooled-versus-dedicated study, all three
    /// models, both topologies.
    pub fn study(seed: u64) -> Self {
        Self {
            rhos: vec![0.9, 0.95, 1.0, 1.05, 1.1],
            servers: vec![2, 3, 5],
            rewards: vec![1.0, 2.0, 3.0],
            models: ModelKind::ALL.iter().map(|&k| UtilityModel::new(k)).collect(),
            topologies: vec![Topology::Pooled, Topology::Dedicated],
            mu: 1.0,
            horizon: 5000.0,
            warmup: 1000.0,
            replications: 20,
            seed,
        }
    }

    /// Scenarios in row order: rho, servers, reward, model, topology.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &rho in &self.rhos {
            for &servers in &self.servers {
                for &reward in &self.rewards {
                    for &model in &self.models {
                        for &topology in &self.topologies {
                            out.push(Scenario {
                                topology,
                                servers,
                                rho,
                                reward,
                                mu: self.mu,
                                model,
                                horizon: self.horizon,
                                warmup: self.warmup,
                                replications: self.replications,
                                seed: self.seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub rho: f64,
    pub servers: usize,
    pub reward: f64,
    pub model: ModelKind,
    pub topology: Topology,
    pub throughput_pct: f64,
    pub throughput_se: f64,
    pub balk_pct: f64,
    pub welfare: f64,
    pub welfare_se: f64,
    pub mean_obs_queue: f64,
    pub p80_sojourn: f64,
    pub cvar80_sojourn: f64,
    pub replications: usize,
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
}

impl ResultRow {
    pub fn from_metrics(m: &SimMetrics) -> Self {
        let s = &m.scenario;
        Self {
            rho: s.rho,
            servers: s.servers,
            reward: s.reward,
            model: s.model.kind,
            topology: s.topology,
            throughput_pct: m.throughput_pct.mean,
            throughput_se: m.throughput_pct.se,
            balk_pct: m.balk_pct.mean,
            welfare: m.welfare.mean,
            welfare_se: m.welfare.se,
            mean_obs_queue: m.mean_observed_queue.mean,
            p80_sojourn: m.p80_sojourn.mean,
            cvar80_sojourn: m.cvar80_sojourn.mean,
            replications: s.replications,
            horizon: s.horizon,
            warmup: s.warmup,
            seed: s.seed,
        }
    }

    fn cell_key(&self) -> (u64, usize, u64, ModelKind) {
        (self.rho.to_bits(), self.servers, self.reward.to_bits(), self.model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub regime: Regime,
    /// Share of cells where pooled welfare beats dedicated welfare, in percent.
    pub pooled_win_pct: f64,
    pub cells: usize,
    pub pooled_wins: usize,
    pub balk_pooled: f64,
    pub balk_dedicated: f64,
}

/// Pooled-versus-dedicated summary per model and traffic regime. Only cells
/// where both topologies were run contribute.
pub fn summarize_rows(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut models: Vec<ModelKind> = rows.iter().map(|r| r.model).collect();
    models.sort();
    models.dedup();
    let mut out = Vec::new();
    for model in models {
        for regime in [Regime::Moderate, Regime::Overcapacitated] {
            let mut wins = 0;
            let mut balk_p = Vec::new();
            let mut balk_d = Vec::new();
            for pooled in rows.iter().filter(|r| {
                r.model == model && r.topology == Topology::Pooled && Regime::of(r.rho) == regime
            }) {
                let Some(dedicated) = rows.iter().find(|r| {
                    r.topology == Topology::Dedicated && r.cell_key() == pooled.cell_key()
                }) else {
                    continue;
                };
                if pooled.welfare > dedicated.welfare {
                    wins += 1;
                }
                balk_p.push(pooled.balk_pct);
                balk_d.push(dedicated.balk_pct);
            }
            if balk_p.is_empty() {
                continue;
            }
            let cells = balk_p.len();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            out.push(SummaryRow {
                model,
                regime,
                pooled_win_pct: 100.0 * wins as f64 / cells as f64,
                cells,
                pooled_wins: wins,
                balk_pooled: mean(&balk_p),
                balk_dedicated: mean(&balk_d),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

/// A failed sweep keeps the rows that completed before the first failure in
/// grid order.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("sweep aborted at scenario {index}: {source}")]
pub struct SweepError {
    pub index: usize,
    pub partial: Vec<ResultRow>,
    #[source]
    pub source: SimError,
}

/// Runs every grid scenario. `threads = 0` uses all available cores.
pub fn sweep(grid: &Grid, threads: usize) -> Result<SweepResult, SweepError> {
    let scenarios = grid.scenarios();
    if scenarios.is_empty() {
        return Err(SweepError {
            index: 0,
            partial: Vec::new(),
            source: SimError::InvalidScenario("empty grid".into()),
        });
    }
    let run = || -> Vec<Result<SimMetrics, SimError>> {
        scenarios.par_iter().map(run_scenario).collect()
    };
    let results = if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| run())
    };
    let mut rows = Vec::with_capacity(results.len());
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok(m) => rows.push(ResultRow::from_metrics(&m)),
            Err(source) => {
                return Err(SweepError { index, partial: rows, source });
            }
        }
    }
    let summary = summarize_rows(&rows);
    Ok(SweepResult { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(topology: Topology) -> Scenario {
        let mut s = Scenario::new(topology, 2, 0.9, 1.0, UtilityModel::mean_only(), 11);
        s.replications = 4;
        s.horizon = 1500.0;
        s.warmup = 300.0;
        s
    }

    #[test]
    fn validation() {
        let mut s = base(Topology::Pooled);
        s.rho = -1.0;
        assert!(s.validate().is_err());
        let mut s = base(Topology::Pooled);
        s.warmup = s.horizon;
        assert!(s.validate().is_err());
        let mut s = base(Topology::Pooled);
        s.replications = 0;
        assert!(s.validate().is_err());
        assert!(base(Topology::Dedicated).validate().is_ok());
    }

    #[test]
    fn zero_reward_everyone_balks() {
        let mut s = base(Topology::Pooled);
        s.reward = 0.0;
        let m = run_replication(&s, 0).unwrap();
        assert!(m.arrivals > 0);
        assert_eq!(m.joined, 0);
        assert_eq!(m.throughput_pct, 0.0);
        assert_eq!(m.welfare, 0.0);
        assert!(m.p80_sojourn.is_none());
    }

    #[test]
    fn uncongested_everyone_joins() {
        let mut s = base(Topology::Pooled);
        s.reward = 3.0;
        s.rho = 0.01;
        let m = run_scenario(&s).unwrap();
        assert!(m.throughput_pct.mean > 99.9, "{:?}", m.throughput_pct);
    }

    #[test]
    fn event_ordering_breaks_ties_by_sequence() {
        let mut heap = BinaryHeap::new();
        heap.push(Event { time: 1.0, seq: 2, action: Action::Arrival });
        heap.push(Event { time: 1.0, seq: 1, action: Action::Arrival });
        heap.push(Event { time: 0.5, seq: 3, action: Action::Arrival });
        let order: Vec<u64> = std::iter::from_fn(|| heap.pop().map(|e| e.seq)).collect();
        assert_eq!(order, vec![3, 1, 2]);
    }

    #[test]
    fn log_replays_welfare() {
        let s = base(Topology::Dedicated);
        let (m, log) = run_replication_logged(&s, 1).unwrap();
        let replay: f64 = log
            .iter()
            .filter(|e| e.kind == EventKind::Arrival && e.time > s.warmup && e.joined == Some(true))
            .map(|e| e.utility.unwrap())
            .sum();
        assert_eq!(replay, m.welfare);
        assert_eq!(run_replication(&s, 1).unwrap(), m);
    }

    #[test]
    fn estimate_standard_error() {
        let e = Estimate::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn summary_counts_wins() {
        let row = |rho, topology, welfare, balk| ResultRow {
            rho,
            servers: 2,
            reward: 1.0,
            model: ModelKind::MeanOnly,
            topology,
            throughput_pct: 100.0 - balk,
            throughput_se: 0.0,
            balk_pct: balk,
            welfare,
            welfare_se: 0.0,
            mean_obs_queue: 0.0,
            p80_sojourn: 0.0,
            cvar80_sojourn: 0.0,
            replications: 1,
            horizon: 10.0,
            warmup: 1.0,
            seed: 0,
        };
        let rows = vec![
            row(0.9, Topology::Pooled, 10.0, 5.0),
            row(0.9, Topology::Dedicated, 8.0, 15.0),
            row(1.1, Topology::Pooled, 7.0, 10.0),
            row(1.1, Topology::Dedicated, 9.0, 20.0),
        ];
        let s = summarize_rows(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].regime, s[0].pooled_win_pct), (Regime::Moderate, 100.0));
        assert_eq!((s[1].regime, s[1].pooled_win_pct), (Regime::Overcapacitated, 0.0));
        assert_eq!((s[0].balk_pooled, s[0].balk_dedicated), (5.0, 15.0));
    }
}
