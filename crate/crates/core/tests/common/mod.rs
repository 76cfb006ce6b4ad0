//! Independent brute-force reference computations used by the integration
//! tests. Nothing here calls the library's own algorithms for the values it
//! checks.

#![allow(dead_code)]

use std::collections::BTreeSet;

use byzstab_core::metric::{MetricSpec, MetricValue};
use byzstab_core::protocol::Configuration;
use byzstab_core::system::{ProcessId, WeightedSystem};

/// Best metric over every simple path from `source`, by depth-first
/// enumeration over an adjacency list rebuilt from the edge list.
pub fn mu_oracle(sys: &WeightedSystem, source: ProcessId) -> Vec<MetricValue> {
    let n = sys.n();
    let m = sys.metric();
    let mut adj = vec![Vec::new(); n];
    for e in sys.edges() {
        adj[e.u.0].push((e.v.0, e.w));
        adj[e.v.0].push((e.u.0, e.w));
    }
    let mut best: Vec<Option<MetricValue>> = vec![None; n];
    let mut stack = vec![(source.0, m.mr(), 1u64 << source.0)];
    while let Some((u, label, visited)) = stack.pop() {
        if best[u].is_none_or(|b| m.rank(b) < m.rank(label)) {
            best[u] = Some(label);
        }
        for &(q, w) in &adj[u] {
            if visited & (1 << q) == 0 {
                stack.push((q, m.met(label, w), visited | 1 << q));
            }
        }
    }
    best.into_iter().map(|b| b.expect("connected system")).collect()
}

fn better(m: &MetricSpec, a: MetricValue, b: MetricValue) -> MetricValue {
    if m.rank(a) >= m.rank(b) {
        a
    } else {
        b
    }
}

/// Strict and non-strict Byzantine areas from the definitions.
pub fn areas_oracle(sys: &WeightedSystem) -> (BTreeSet<ProcessId>, BTreeSet<ProcessId>) {
    let m = sys.metric();
    if sys.byzantine().is_empty() {
        return (BTreeSet::new(), BTreeSet::new());
    }
    let root_mu = mu_oracle(sys, sys.root());
    let byz: Vec<Vec<MetricValue>> = sys.byzantine().iter().map(|&b| mu_oracle(sys, b)).collect();
    let mut s_b = BTreeSet::new();
    let mut strict = BTreeSet::new();
    for v in sys.correct().filter(|&v| v != sys.root()) {
        let best = byz.iter().map(|t| t[v.0]).reduce(|a, b| better(m, a, b)).unwrap();
        if m.rank(root_mu[v.0]) <= m.rank(best) {
            s_b.insert(v);
        }
        if m.rank(root_mu[v.0]) < m.rank(best) {
            strict.insert(v);
        }
    }
    // Correct processes with no path to the root avoiding the strict area.
    let mut reach = BTreeSet::from([sys.root()]);
    let mut frontier = vec![sys.root()];
    while let Some(u) = frontier.pop() {
        for e in sys.edges() {
            let other = if e.u == u { e.v } else if e.v == u { e.u } else { continue };
            if !strict.contains(&other) && reach.insert(other) {
                frontier.push(other);
            }
        }
    }
    let cut: Vec<ProcessId> = sys.correct().filter(|p| !strict.contains(p) && !reach.contains(p)).collect();
    strict.extend(cut);
    (s_b, strict)
}

/// Parent pointers form a tree towards the root with every level equal to
/// the oracle's maximum metric.
pub fn tree_oracle(sys: &WeightedSystem, cfg: &Configuration) -> bool {
    let m = sys.metric();
    let mu = mu_oracle(sys, sys.root());
    let r = sys.root();
    if cfg[r].prnt.is_some() || cfg[r].level != m.mr() {
        return false;
    }
    for v in sys.processes() {
        if cfg[v].level != mu[v.0] {
            return false;
        }
        let mut cur = v;
        let mut hops = 0;
        while cur != r {
            let Some(p) = cfg[cur].prnt else { return false };
            let Some(w) = sys.edges().iter().find(|e| (e.u == cur && e.v == p) || (e.v == cur && e.u == p)).map(|e| e.w) else {
                return false;
            };
            if cfg[cur].level != m.met(cfg[p].level, w) {
                return false;
            }
            cur = p;
            hops += 1;
            if hops > sys.n() {
                return false;
            }
        }
    }
    true
}

/// Closed form of the geometric sum `1 + a + ... + a^b`.
pub fn pi_closed(a: u64, b: u64) -> u64 {
    if a == 1 {
        b + 1
    } else {
        (a.pow(b as u32 + 1) - 1) / (a - 1)
    }
}

pub struct BruteClass {
    pub bounded: bool,
    pub monotonic: bool,
    pub strictly_decreasing: bool,
    pub fixed_points: Vec<MetricValue>,
}

/// Literal property checks over the finite domains.
pub fn classify_oracle(m: &MetricSpec) -> BruteClass {
    let vals = m.value_domain();
    let ws = m.weight_domain();
    let r = |x: MetricValue| m.rank(x);
    let bounded = vals.iter().all(|&a| ws.iter().all(|&w| r(m.met(a, w)) <= r(a)));
    let monotonic = vals.iter().all(|&a| {
        vals.iter().all(|&b| r(a) > r(b) || ws.iter().all(|&w| r(m.met(a, w)) <= r(m.met(b, w))))
    });
    let fixed_points: Vec<MetricValue> =
        vals.iter().copied().filter(|&a| ws.iter().all(|&w| m.met(a, w) == a)).collect();
    let strictly_decreasing = vals
        .iter()
        .all(|&a| fixed_points.contains(&a) || ws.iter().all(|&w| r(m.met(a, w)) < r(a)));
    BruteClass { bounded, monotonic, strictly_decreasing, fixed_points }
}

/// For every process and neighbor: composing the neighbor's best source
/// metric over the link never beats the process's own best source metric.
pub fn lemma_neighbor_inequality(sys: &WeightedSystem) -> bool {
    let m = sys.metric();
    let mut sources = vec![sys.root()];
    sources.extend(sys.byzantine().iter().copied());
    let tables: Vec<Vec<MetricValue>> = sources.iter().map(|&s| mu_oracle(sys, s)).collect();
    let best = |v: usize| tables.iter().map(|t| t[v]).reduce(|a, b| better(m, a, b)).unwrap();
    sys.edges().iter().all(|e| {
        m.rank(m.met(best(e.u.0), e.w)) <= m.rank(best(e.v.0))
            && m.rank(m.met(best(e.v.0), e.w)) <= m.rank(best(e.u.0))
    })
}
