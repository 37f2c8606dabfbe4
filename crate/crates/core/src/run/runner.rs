//! Parallel execution of agents with deterministic, agent-ordered results.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::thread;

use crate::agents::{AgentState, Model, ModelParams};
use crate::error::Result;
use crate::graph::{NodeId, WebGraph};
use crate::ingest::LogRecord;
use crate::session::{SessionDescriptor, SessionRecorder, TrafficTally, UserId};

/// First timestamp of every exported user log.
pub const EXPORT_EPOCH: u64 = 1_200_000_000;

/// URL under which a node appears in exported logs.
pub fn node_url(g: &WebGraph, node: NodeId) -> String {
    format!("http://sim.invalid/{}", g.label(node))
}

/// Everything one agent produced.
#[derive(Clone, Debug)]
pub struct AgentRun {
    pub agent: u32,
    pub sessions: Vec<SessionDescriptor>,
    /// Aggregate counters; the per-user visit vector has been reduced to
    /// `entropy`.
    pub tally: TrafficTally,
    pub entropy: f64,
    /// Steps taken, including the jump that would have opened one session
    /// past the quota.
    pub steps: u64,
    /// Requests as a browser would log them, when export was requested.
    pub log: Vec<LogRecord>,
}

/// Runs one agent for `quota` sessions.
pub fn run_agent(
    agent: u32,
    quota: u64,
    model: Model,
    g: &WebGraph,
    params: &ModelParams,
    master_seed: u64,
    export: bool,
) -> Result<AgentRun> {
    let user = UserId(agent);
    let mut state = AgentState::new(agent, master_seed);
    let mut rec = SessionRecorder::new(user);
    let mut sessions = Vec::with_capacity(quota as usize);
    let mut log = Vec::new();
    let mut steps = 0u64;
    let user_name = agent.to_string();

    loop {
        let outcome = state.step(model, g, params);
        steps += 1;
        if matches!(outcome, crate::agents::StepOutcome::Teleport { .. })
            && state.sessions_started() > quota
        {
            break;
        }
        let r = rec.record(outcome)?;
        sessions.extend(r.closed);
        if export {
            if let Some((referrer, target)) = r.request {
                log.push(LogRecord {
                    timestamp: EXPORT_EPOCH + log.len() as u64,
                    user: user_name.clone(),
                    referrer: referrer.map(|r| node_url(g, r)),
                    target: node_url(g, target),
                });
            }
        }
    }
    sessions.extend(rec.close());

    let mut tally = rec.into_tally();
    let entropy = tally.user_entropy(user)?;
    tally.take_user_visits();
    Ok(AgentRun {
        agent,
        sessions,
        tally,
        entropy,
        steps,
        log,
    })
}

/// Splits agents into `workers` queues of roughly equal total session count:
/// agents in decreasing quota order each go to the currently lightest queue.
/// Each queue lists its agents in ascending id order.
pub fn partition_queues(quotas: &[u64], workers: usize) -> Vec<Vec<u32>> {
    let workers = workers.max(1).min(quotas.len().max(1));
    let mut order: Vec<u32> = (0..quotas.len() as u32).collect();
    order.sort_by(|&a, &b| quotas[b as usize].cmp(&quotas[a as usize]).then(a.cmp(&b)));
    let mut queues = vec![Vec::new(); workers];
    let mut load = vec![0u64; workers];
    for a in order {
        let (q, _) = load
            .iter()
            .enumerate()
            .min_by_key(|&(i, &l)| (l, i))
            .unwrap();
        queues[q].push(a);
        load[q] += quotas[a as usize];
    }
    for q in &mut queues {
        q.sort_unstable();
    }
    queues
}

/// Runs all agents on `workers` threads and hands each result to
/// `on_agent` in ascending agent order, independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn simulate<F>(
    model: Model,
    g: &WebGraph,
    params: &ModelParams,
    quotas: &[u64],
    master_seed: u64,
    workers: usize,
    export: bool,
    mut on_agent: F,
) -> Result<()>
where
    F: FnMut(AgentRun) -> Result<()>,
{
    let queues = partition_queues(quotas, workers);
    if queues.len() == 1 {
        for &a in &queues[0] {
            on_agent(run_agent(a, quotas[a as usize], model, g, params, master_seed, export)?)?;
        }
        return Ok(());
    }

    thread::scope(|scope| {
        let (tx, rx) = mpsc::sync_channel::<Result<AgentRun>>(4 * queues.len());
        for queue in &queues {
            let tx = tx.clone();
            scope.spawn(move || {
                for &a in queue {
                    let r = run_agent(a, quotas[a as usize], model, g, params, master_seed, export);
                    let failed = r.is_err();
                    if tx.send(r).is_err() || failed {
                        break;
                    }
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut next = 0u32;
        for r in rx {
            let run = r?;
            pending.insert(run.agent, run);
            while let Some(run) = pending.remove(&next) {
                on_agent(run)?;
                next += 1;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_scale_free;

    #[test]
    fn queues_balance_session_counts() {
        let quotas = [10, 1, 7, 3, 3, 9, 2, 2, 8, 5];
        let queues = partition_queues(&quotas, 3);
        let loads: Vec<u64> = queues
            .iter()
            .map(|q| q.iter().map(|&a| quotas[a as usize]).sum())
            .collect();
        let max = *loads.iter().max().unwrap();
        let min = *loads.iter().min().unwrap();
        assert!(max <= min + 10, "{loads:?}");
        let mut all: Vec<u32> = queues.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(queues.iter().all(|q| q.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn more_workers_than_agents() {
        let queues = partition_queues(&[1, 1], 8);
        assert_eq!(queues.len(), 2);
    }

    #[test]
    fn agent_meets_its_quota() {
        let g = generate_scale_free(2000, 3, 2.1, 1).unwrap();
        for model in Model::ALL {
            let run = run_agent(3, 25, model, &g, &ModelParams::default(), 5, true).unwrap();
            assert_eq!(run.sessions.len(), 25);
            assert_eq!(run.tally.total_sessions(), 25);
            let indices: Vec<u64> = run.sessions.iter().map(|d| d.index).collect();
            assert_eq!(indices, (0..25).collect::<Vec<_>>());
            let requests = run.log.len() as u64;
            let size_total: u64 = run.sessions.iter().map(|d| d.size).sum();
            assert_eq!(requests, size_total);
            assert_eq!(run.tally.total_page_visits(), size_total);
        }
    }

    #[test]
    fn results_arrive_in_agent_order_for_any_worker_count() {
        let g = generate_scale_free(3000, 3, 2.1, 2).unwrap();
        let quotas: Vec<u64> = (0..13).map(|i| 1 + (i * 7) % 11).collect();
        let collect = |workers| {
            let mut out = Vec::new();
            simulate(Model::Abc, &g, &ModelParams::default(), &quotas, 42, workers, false, |r| {
                out.push((r.agent, r.sessions, r.entropy));
                Ok(())
            })
            .unwrap();
            out
        };
        let one = collect(1);
        assert_eq!(one.iter().map(|r| r.0).collect::<Vec<_>>(), (0..13).collect::<Vec<_>>());
        assert_eq!(one, collect(4));
        assert_eq!(one, collect(16));
    }
}
