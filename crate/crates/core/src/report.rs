//! CSV rendering of simulation output. Missing values are written as `NA`.

use std::fmt::Write;

use crate::des::{EventRecord, ResultRow, SummaryRow};

pub const RESULTS_HEADER: &str = "rho,N,R,model,topology,throughput_pct,throughput_se,balk_pct,\
welfare,welfare_se,mean_obs_queue,p80_sojourn,cvar80_sojourn,replications,horizon,warmup,seed";

pub const SUMMARY_HEADER: &str = "model,regime,pooled_win_pct,balk_pooled,balk_dedicated";

pub const EVENT_LOG_HEADER: &str = "time,event,queue_id,n_observed,decision,utility";

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NA".to_string()
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.rho),
            r.servers,
            num(r.reward),
            r.model,
            r.topology,
            num(r.throughput_pct),
            num(r.throughput_se),
            num(r.balk_pct),
            num(r.welfare),
            num(r.welfare_se),
            num(r.mean_obs_queue),
            num(r.p80_sojourn),
            num(r.cvar80_sojourn),
            r.replications,
            num(r.horizon),
            num(r.warmup),
            r.seed
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.model,
            r.regime.name(),
            num(r.pooled_win_pct),
            num(r.balk_pooled),
            num(r.balk_dedicated)
        );
    }
    out
}

pub fn event_log_csv(records: &[EventRecord]) -> String {
    let mut out = String::from(EVENT_LOG_HEADER);
    out.push('\n');
    for e in records {
        let decision = match e.joined {
            Some(true) => "join",
            Some(false) => "balk",
            None => "",
        };
        let utility = e.utility.map(num).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(e.time),
            e.kind.name(),
            e.queue_id,
            e.n_observed,
            decision,
            utility
        );
    }
    out
}
