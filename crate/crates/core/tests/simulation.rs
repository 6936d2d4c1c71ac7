use tailqueue::des::{run_replication_logged, summarize_rows, EventKind, ResultRow};
use tailqueue::{run_scenario, sweep, Grid, ModelKind, Scenario, Topology, UtilityModel};

const SEED: u64 = 77;

/// Analytic M/M/c mean sojourn time (Erlang C).
fn mmc_sojourn(c: usize, lambda: f64, mu: f64) -> f64 {
    let a = lambda / mu;
    let rho = a / c as f64;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..c {
        if k > 0 {
            term *= a / k as f64;
        }
        sum += term;
    }
    let last = term * a / c as f64 / (1.0 - rho);
    let wait_prob = last / (sum + last);
    wait_prob / (c as f64 * mu - lambda) + 1.0 / mu
}

#[test]
fn littles_law_without_balking() {
    let s = Scenario::new(Topology::Pooled, 2, 0.9, 1e6, UtilityModel::mean_only(), SEED);
    let m = run_scenario(&s).unwrap();
    assert_eq!(m.throughput_pct.mean, 100.0);
    let analytic = mmc_sojourn(2, s.arrival_rate(), s.mu);
    let diff = (m.mean_sojourn.mean - analytic).abs();
    assert!(
        diff <= 3.0 * m.mean_sojourn.se,
        "simulated {} +- {} vs analytic {analytic}",
        m.mean_sojourn.mean,
        m.mean_sojourn.se
    );
}

#[test]
fn pooling_raises_mean_only_throughput() {
    let grid = Grid {
        models: vec![UtilityModel::mean_only()],
        replications: 10,
        ..Grid::study(SEED)
    };
    let result = sweep(&grid, 0).unwrap();
    for pooled in result.rows.iter().filter(|r| r.topology == Topology::Pooled) {
        let dedicated = result
            .rows
            .iter()
            .find(|r| {
                r.topology == Topology::Dedicated
                    && r.rho == pooled.rho
                    && r.servers == pooled.servers
                    && r.reward == pooled.reward
            })
            .unwrap();
        assert!(
            pooled.throughput_pct >= dedicated.throughput_pct,
            "rho {} N {} R {}",
            pooled.rho,
            pooled.servers,
            pooled.reward
        );
    }
}

#[test]
fn throughput_weakly_increases_with_reward() {
    for kind in ModelKind::ALL {
        for topology in [Topology::Pooled, Topology::Dedicated] {
            let run = |r| {
                let s = Scenario::new(topology, 3, 1.05, r, UtilityModel::new(kind), SEED);
                run_scenario(&s).unwrap().throughput_pct
            };
            let (lo, mid, hi) = (run(1.0), run(2.0), run(3.0));
            assert!(mid.mean >= lo.mean - 3.0 * (lo.se + mid.se), "{kind} {topology}");
            assert!(hi.mean >= mid.mean - 3.0 * (mid.se + hi.se), "{kind} {topology}");
        }
    }
}

#[test]
fn single_server_topologies_coincide() {
    for kind in ModelKind::ALL {
        let pooled = Scenario::new(Topology::Pooled, 1, 0.95, 2.0, UtilityModel::new(kind), SEED);
        let a = run_scenario(&pooled).unwrap();
        let b = run_scenario(&pooled.with_topology(Topology::Dedicated)).unwrap();
        let tol = 3.0 * (a.welfare.se.powi(2) + b.welfare.se.powi(2)).sqrt();
        assert!((a.welfare.mean - b.welfare.mean).abs() <= tol);
    }
}

#[test]
fn event_log_is_consistent() {
    let s = Scenario::new(Topology::Pooled, 3, 1.0, 2.0, UtilityModel::tail_based(), SEED);
    let (m, log) = run_replication_logged(&s, 0).unwrap();
    assert!(log.windows(2).all(|w| w[0].time <= w[1].time));
    let tracked: Vec<_> = log
        .iter()
        .filter(|e| e.kind == EventKind::Arrival && e.time > s.warmup)
        .collect();
    assert_eq!(tracked.len() as u64, m.arrivals);
    let joined = tracked.iter().filter(|e| e.joined == Some(true)).count() as u64;
    assert_eq!(joined, m.joined);
    let welfare: f64 = tracked
        .iter()
        .filter(|e| e.joined == Some(true))
        .map(|e| e.utility.unwrap())
        .sum();
    assert_eq!(welfare, m.welfare);
    for e in &log {
        if let Some(joined) = e.joined {
            assert_eq!(joined, e.utility.unwrap() > 0.0);
        }
    }
    let p80 = m.p80_sojourn.unwrap();
    assert!(m.cvar80_sojourn.unwrap() >= p80);
}

#[test]
fn single_cell_sweep_matches_run_scenario() {
    let grid = Grid {
        rhos: vec![1.1],
        servers: vec![2],
        rewards: vec![3.0],
        models: vec![UtilityModel::mean_variance()],
        replications: 4,
        ..Grid::study(SEED)
    };
    let result = sweep(&grid, 2).unwrap();
    assert_eq!(result.rows.len(), 2);
    for row in &result.rows {
        let s = Scenario {
            replications: 4,
            ..Scenario::new(row.topology, 2, 1.1, 3.0, UtilityModel::mean_variance(), SEED)
        };
        assert_eq!(*row, ResultRow::from_metrics(&run_scenario(&s).unwrap()));
    }
    assert_eq!(result.summary, summarize_rows(&result.rows));
    assert_eq!(result.summary.len(), 1);
}

#[test]
fn invalid_cell_aborts_sweep_with_partial_rows() {
    let grid = Grid {
        rhos: vec![0.9, -1.0],
        servers: vec![2],
        rewards: vec![1.0],
        models: vec![UtilityModel::mean_only()],
        replications: 2,
        ..Grid::study(SEED)
    };
    let err = sweep(&grid, 0).unwrap_err();
    assert_eq!(err.index, 2);
    assert_eq!(err.partial.len(), 2);
}
