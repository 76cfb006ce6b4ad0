//! Built-in scenarios: the impossibility gadgets, the counterexample system,
//! the six-node containment examples, small systems for exhaustive
//! checking, and a seeded random system generator.
//!
//! Entries are named `name` or `name(key=value, ...)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::{MetricKind, MetricSpec, MetricValue, Weight};
use crate::protocol::Variant;
use crate::scenario::{
    parse_variant, AnalysisSpec, AreaName, InitMode, InitSpec, Scenario, ScenarioError, StateSpec,
    StrategySpec,
};
use crate::scheduler::{DaemonConfig, DaemonMode};
use crate::system::{SystemDescription, WeightedSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LibraryError {
    #[error("unknown library entry `{name}`; available: {}", available.join(", "))]
    Unknown { name: String, available: Vec<String> },
    #[error("entry `{entry}`: {message}")]
    Param { entry: String, message: String },
}

/// Entry names, callable without parameters.
pub fn names() -> Vec<&'static str> {
    vec![
        "fig7",
        "theorem4-chain",
        "theorem5-gadget",
        "fig3-areas",
        "fig3-areas-zero",
        "fig4-areas",
        "fig4-areas-b",
        "fig5-areas",
        "fig5-areas-b",
        "explore-chain3",
        "explore-byz4",
        "random",
    ]
}

/// One-line description per entry.
pub fn describe(name: &str) -> &'static str {
    match name {
        "fig7" => "8-process SP system (D=10) where the earlier protocol is disrupted forever; params variant, cycles",
        "theorem4-chain" => "symmetric chain r..b of 2c+4 processes, Byzantine mimicking the root; params c, metric, w",
        "theorem5-gadget" => "six-process gadget {r,u,u',v,v',b} with S_B* = {v,v'}; param metric",
        "fig3-areas" => "six-node SP containment example",
        "fig3-areas-zero" => "six-node SP example with every weight 0",
        "fig4-areas" => "six-node flow containment example",
        "fig4-areas-b" => "second six-node flow containment example",
        "fig5-areas" => "six-node reliability containment example",
        "fig5-areas-b" => "second six-node reliability containment example",
        "explore-chain3" => "fault-free 3-process MET chain, D=3",
        "explore-byz4" => "4-process MET chain ending in a Byzantine process, D=4",
        "random" => "seeded random connected system; params n, f, metric, seed, extra (edge percent)",
        _ => "",
    }
}

struct Params {
    entry: String,
    pairs: Vec<(String, String)>,
}

impl Params {
    fn parse(spec: &str) -> Result<(String, Params), LibraryError> {
        let spec = spec.trim();
        let (name, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
            Some(_) => {
                return Err(LibraryError::Param { entry: spec.into(), message: "unbalanced parentheses".into() })
            }
            None => (spec, ""),
        };
        let mut pairs = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        let mut pieces = Vec::new();
        for (i, ch) in args.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    pieces.push(&args[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push(&args[start..]);
        for piece in pieces.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = piece.split_once('=').ok_or_else(|| LibraryError::Param {
                entry: name.into(),
                message: format!("expected key=value, got `{piece}`"),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok((name.to_string(), Params { entry: name.to_string(), pairs }))
    }

    fn err(&self, message: impl Into<String>) -> LibraryError {
        LibraryError::Param { entry: self.entry.clone(), message: message.into() }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let i = self.pairs.iter().position(|(k, _)| k == key)?;
        Some(self.pairs.remove(i).1)
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, LibraryError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.err(format!("`{key}` expects a number, got `{v}`"))),
        }
    }

    fn metric(&mut self, default: MetricSpec) -> Result<MetricSpec, LibraryError> {
        match self.take("metric") {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: crate::metric::MetricError| self.err(e.to_string())),
        }
    }

    fn finish(self) -> Result<(), LibraryError> {
        match self.pairs.first() {
            Some((k, _)) => Err(self.err(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Looks up an entry by `name` or `name(key=value, ...)`.
pub fn entry(spec: &str) -> Result<Scenario, LibraryError> {
    let (name, mut p) = Params::parse(spec)?;
    let sc = match name.as_str() {
        "fig7" => {
            let variant = match p.take("variant") {
                None => Variant::Ssmax,
                Some(v) => parse_variant(&v).map_err(|e| p.err(e))?,
            };
            let cycles = p.num("cycles", 25u64)?;
            fig7(variant, cycles)
        }
        "theorem4-chain" => {
            let c = p.num("c", 1usize)?;
            let metric = p.metric(MetricSpec::met_metric())?;
            let w = match p.take("w") {
                None => None,
                Some(v) => Some(metric.parse_weight(&v).map_err(|e| p.err(e.to_string()))?),
            };
            theorem4_chain(c, metric, w).map_err(|e| p.err(e))?
        }
        "theorem5-gadget" => {
            let metric = p.metric(MetricSpec::met_metric())?;
            theorem5_gadget(metric).map_err(|e| p.err(e))?
        }
        "fig3-areas" => six_node(MetricSpec::sp(63), [7, 6, 5, 4, 10, 8, 6, 32, 16]),
        "fig3-areas-zero" => six_node(MetricSpec::sp(63), [0; 9]),
        // The figure labels two Byzantine links 16 and 32, above mr = 10;
        // flow composes by minimum, so they are saturated at 10.
        "fig4-areas" => six_node(MetricSpec::flow(10), [7, 6, 5, 4, 10, 8, 6, 10, 10]),
        "fig4-areas-b" => six_node(MetricSpec::flow(10), [7, 10, 6, 13, 5, 1, 3, 12, 11].map(|w| w.min(10))),
        "fig5-areas" => six_node(MetricSpec::rel(20), [15, 15, 20, 6, 16, 20, 8, 15, 15]),
        "fig5-areas-b" => six_node(MetricSpec::rel(20), [5, 15, 5, 20, 10, 20, 5, 15, 10]),
        "explore-chain3" => explore_chain(&["r", "a", "c"], &[], 3),
        "explore-byz4" => explore_chain(&["r", "a", "c", "b"], &["b"], 4),
        "random" => {
            let n = p.num("n", 6usize)?;
            let f = p.num("f", 0usize)?;
            let seed = p.num("seed", 0u64)?;
            let extra = p.num("extra", 30u32)?;
            let metric = p.metric(MetricSpec::sp(32))?;
            if n == 0 || f >= n {
                return Err(p.err("need n >= 1 and f < n"));
            }
            random_system(n, f, metric, seed, extra)
        }
        _ => {
            return Err(LibraryError::Unknown {
                name: spec.into(),
                available: names().into_iter().map(String::from).collect(),
            })
        }
    };
    p.finish()?;
    Ok(sc)
}

fn desc(nodes: &[&str], edges: &[(&str, &str, u32)], byz: &[&str], metric: MetricSpec, d: Option<u32>) -> SystemDescription {
    SystemDescription {
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        edges: edges.iter().map(|(u, v, w)| (u.to_string(), v.to_string(), Weight(*w))).collect(),
        root: nodes[0].to_string(),
        byzantine: byz.iter().map(|s| s.to_string()).collect(),
        metric,
        d,
        neighbor_order: Vec::new(),
    }
}

/// The counterexample system with its initial configuration and the
/// looping adversary on `b2`; `b1` stays frozen.
pub fn fig7(variant: Variant, cycles: u64) -> Scenario {
    let system = desc(
        &["r", "p1", "p2", "p3", "p4", "p5", "b1", "b2"],
        &[
            ("r", "p1", 1),
            ("p1", "p2", 1),
            ("p2", "p3", 1),
            ("p2", "p4", 0),
            ("p3", "b1", 1),
            ("p4", "p5", 1),
            ("p5", "b2", 1),
        ],
        &["b1", "b2"],
        MetricSpec::sp(16),
        Some(10),
    );
    let v = MetricValue;
    let states = vec![
        ("r", StateSpec::orphan(v(0), 0)),
        ("p1", StateSpec::with_parent("r", v(1), 1)),
        ("p2", StateSpec::with_parent("p3", v(2), 9)),
        ("p3", StateSpec::with_parent("b1", v(1), 8)),
        ("p4", StateSpec::with_parent("p5", v(2), 2)),
        ("p5", StateSpec::with_parent("b2", v(1), 1)),
        ("b1", StateSpec::orphan(v(0), 7)),
        ("b2", StateSpec::orphan(v(0), 0)),
    ];
    Scenario {
        system,
        variant,
        daemon: DaemonConfig { mode: DaemonMode::Central, k: 3, seed: 0, max_steps: 20_000, quiescence_window: 16 },
        adversary: vec![
            ("b1".into(), StrategySpec::Scripted { script: Vec::new() }),
            (
                "b2".into(),
                StrategySpec::ReplayLoop {
                    states: vec![StateSpec::orphan(v(1), 0), StateSpec::orphan(v(0), 0)],
                    watch: Some(vec!["p4".into(), "p5".into()]),
                    cycles: Some(cycles),
                },
            ),
        ],
        init: InitSpec {
            mode: InitMode::Explicit,
            seed: 0,
            orphan_percent: 10,
            states: states.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
        },
        analysis: AnalysisSpec { areas: vec![AreaName::SBStar, AreaName::SB], bound_check: true },
    }
}

/// The counterexample system alone.
pub fn fig7_system(variant: Variant) -> Result<WeightedSystem, ScenarioError> {
    fig7(variant, 25).build_system()
}

fn default_weight(metric: &MetricSpec) -> Weight {
    let ws = metric.weight_domain();
    if ws.contains(&Weight(1)) && !matches!(metric.kind(), MetricKind::Reliability { .. }) {
        Weight(1)
    } else {
        // The weight that degrades mr least while still degrading it.
        let mr = metric.mr();
        ws.iter()
            .copied()
            .filter(|w| metric.lt(metric.met(mr, *w), mr))
            .max_by_key(|w| metric.rank(metric.met(mr, *w)))
            .unwrap_or(ws[0])
    }
}

/// Chain `r, p1, ..., p(2c+2), b` with a Byzantine end that copies the root.
pub fn theorem4_chain(c: usize, metric: MetricSpec, w: Option<Weight>) -> Result<Scenario, String> {
    let w = w.unwrap_or_else(|| default_weight(&metric));
    let mut nodes = vec!["r".to_string()];
    nodes.extend((1..=2 * c + 2).map(|i| format!("p{i}")));
    nodes.push("b".into());
    let edges = nodes.windows(2).map(|x| (x[0].clone(), x[1].clone(), w)).collect();
    let system = SystemDescription {
        nodes,
        edges,
        root: "r".into(),
        byzantine: vec!["b".into()],
        metric,
        d: None,
        neighbor_order: Vec::new(),
    };
    let mut sc = Scenario::new(system);
    sc.adversary = vec![("b".into(), StrategySpec::MimicRoot)];
    sc.init.mode = InitMode::Mimic;
    sc.analysis.areas = vec![AreaName::Radius(c), AreaName::SBStar];
    Ok(sc)
}

/// The six-process gadget: `w` degrades mr to a non-fixed value `m`, `w'`
/// degrades `m` further.
pub fn theorem5_gadget(metric: MetricSpec) -> Result<Scenario, String> {
    let mr = metric.mr();
    let ws = metric.weight_domain();
    let pick = ws.iter().find_map(|&w| {
        let m = metric.met(mr, w);
        if !metric.lt(m, mr) {
            return None;
        }
        ws.iter().find(|&&w2| metric.lt(metric.met(m, w2), m)).map(|&w2| (w, w2))
    });
    let (w, w2) = pick.ok_or_else(|| format!("metric {metric} admits no non-fixed degraded value"))?;
    let system = SystemDescription {
        nodes: ["r", "u", "u'", "v", "v'", "b"].map(String::from).to_vec(),
        edges: vec![
            ("r".into(), "u".into(), w),
            ("r".into(), "u'".into(), w),
            ("u".into(), "v".into(), w2),
            ("u'".into(), "v'".into(), w2),
            ("v".into(), "b".into(), w),
            ("v'".into(), "b".into(), w),
        ],
        root: "r".into(),
        byzantine: vec!["b".into()],
        metric,
        d: None,
        neighbor_order: Vec::new(),
    };
    let mut sc = Scenario::new(system);
    sc.adversary = vec![("b".into(), StrategySpec::MimicRoot)];
    sc.init.mode = InitMode::Mimic;
    sc.analysis.areas = vec![AreaName::SBStar, AreaName::SB];
    Ok(sc)
}

/// The six-node layout shared by the containment examples. Weights in
/// order: r-p1, r-p2, p1-p2, p2-p4, p1-p4, p3-p4, p1-p3, b-p4, b-p3.
fn six_node(metric: MetricSpec, w: [u32; 9]) -> Scenario {
    let system = desc(
        &["r", "p1", "p2", "p3", "p4", "b"],
        &[
            ("r", "p1", w[0]),
            ("r", "p2", w[1]),
            ("p1", "p2", w[2]),
            ("p2", "p4", w[3]),
            ("p1", "p4", w[4]),
            ("p3", "p4", w[5]),
            ("p1", "p3", w[6]),
            ("b", "p4", w[7]),
            ("b", "p3", w[8]),
        ],
        &["b"],
        metric,
        None,
    );
    let mut sc = Scenario::new(system);
    sc.adversary = vec![("b".into(), StrategySpec::MimicRoot)];
    sc.init.mode = InitMode::Mimic;
    sc.analysis.areas = vec![AreaName::SB, AreaName::SBStar];
    sc
}

fn explore_chain(nodes: &[&str], byz: &[&str], d: u32) -> Scenario {
    let edges: Vec<(&str, &str, u32)> = nodes.windows(2).map(|x| (x[0], x[1], 1)).collect();
    let mut sc = Scenario::new(desc(nodes, &edges, byz, MetricSpec::met_metric(), Some(d)));
    sc.analysis.areas = vec![AreaName::SBStar];
    sc
}

fn random_weight(metric: &MetricSpec, rng: &mut ChaCha8Rng) -> Weight {
    match metric.kind() {
        MetricKind::ShortestPath { bound } => Weight(rng.gen_range(1..=(*bound).clamp(1, 4))),
        MetricKind::Flow { mr } => Weight(rng.gen_range(1..=(*mr).max(1))),
        MetricKind::Reliability { den } => Weight(rng.gen_range((*den / 2).max(1)..=*den)),
        _ => *metric.weight_domain().choose(rng).expect("nonempty weight domain"),
    }
}

/// A connected system: a random spanning tree plus each other pair with
/// probability `extra`/100. `p0` is the root; `f` other processes are
/// Byzantine and write random states.
pub fn random_system(n: usize, f: usize, metric: MetricSpec, seed: u64, extra: u32) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut edges = Vec::new();
    let mut present = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        present.insert((j, i));
        edges.push((nodes[j].clone(), nodes[i].clone(), random_weight(&metric, &mut rng)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.gen_range(0..100) < extra {
                edges.push((nodes[i].clone(), nodes[j].clone(), random_weight(&metric, &mut rng)));
            }
        }
    }
    let mut candidates: Vec<usize> = (1..n).collect();
    candidates.shuffle(&mut rng);
    let mut byz: Vec<usize> = candidates.into_iter().take(f).collect();
    byz.sort();
    let byzantine: Vec<String> = byz.iter().map(|&i| nodes[i].clone()).collect();
    let system = SystemDescription {
        nodes,
        edges,
        root: "p0".into(),
        byzantine: byzantine.clone(),
        metric,
        d: None,
        neighbor_order: Vec::new(),
    };
    let mut sc = Scenario::new(system);
    sc.daemon.seed = seed;
    sc.init.seed = seed;
    sc.adversary = byzantine
        .into_iter()
        .enumerate()
        .map(|(i, b)| (b, StrategySpec::RandomState { seed: seed.wrapping_mul(31).wrapping_add(i as u64), percent: 30 }))
        .collect();
    sc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds() {
        for name in names() {
            let sc = entry(name).unwrap();
            let sys = sc.build_system().unwrap();
            sc.initial_configuration(&sys).unwrap();
            sc.strategies(&sys).unwrap();
        }
    }

    #[test]
    fn parameters() {
        let sc = entry("theorem4-chain(c=2, metric=bfs(bound=12))").unwrap();
        assert_eq!(sc.system.nodes.len(), 2 * 2 + 4);
        let sc = entry("random(n=9, f=2, seed=4, metric=rel(den=10))").unwrap();
        assert_eq!(sc.system.nodes.len(), 9);
        assert_eq!(sc.system.byzantine.len(), 2);
        assert!(entry("random(n=3, frob=1)").is_err());
        assert!(matches!(entry("nope"), Err(LibraryError::Unknown { .. })));
        let sc = entry("fig7(variant=legacy, cycles=3)").unwrap();
        assert_eq!(sc.variant, Variant::Legacy);
    }

    #[test]
    fn theorem4_chain_initial_state() {
        let sc = entry("theorem4-chain(c=1, metric=met)").unwrap();
        let sys = sc.build_system().unwrap();
        assert_eq!(sys.n(), 6);
        let cfg = sc.initial_configuration(&sys).unwrap();
        let b = sys.id("b").unwrap();
        assert_eq!(cfg[b].prnt, None);
        assert_eq!(cfg[b].level, sys.metric().mr());
        assert_eq!(cfg[sys.root()], cfg[b]);
    }

    #[test]
    fn random_systems_are_connected_and_deterministic() {
        for seed in 0..20 {
            let a = random_system(8, 2, MetricSpec::sp(20), seed, 20);
            assert_eq!(a, random_system(8, 2, MetricSpec::sp(20), seed, 20));
            a.build_system().unwrap();
        }
    }
}
