//! Weighted systems: topology, root, Byzantine set and the assigned metric,
//! with maximum-metric computation, containment areas and the per-process
//! legitimacy predicate.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use thiserror::Error;

use crate::metric::{classify, MetricSpec, MetricValue, Weight};
use crate::protocol::{Configuration, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcessId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: ProcessId,
    pub v: ProcessId,
    pub w: Weight,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("system has no processes")]
    Empty,
    #[error("process `{0}` is declared twice")]
    DuplicateProcess(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("parallel edge `{0}`-`{1}`")]
    ParallelEdge(String, String),
    #[error("weight {weight} of edge `{u}`-`{v}` is not in the weight domain of {metric}")]
    BadWeight { u: String, v: String, weight: String, metric: String },
    #[error("the root `{0}` cannot be Byzantine")]
    ByzantineRoot(String),
    #[error("graph is disconnected: `{0}` is unreachable from the root")]
    Disconnected(String),
    #[error("neighbor order of `{0}` is not a permutation of its neighbors")]
    BadNeighborOrder(String),
    #[error("D must be positive")]
    ZeroD,
}

/// Name-based input to [`WeightedSystem::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDescription {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, Weight)>,
    pub root: String,
    pub byzantine: Vec<String>,
    pub metric: MetricSpec,
    pub d: Option<u32>,
    /// Explicit neighbor orders; processes not listed use edge declaration
    /// order.
    pub neighbor_order: Vec<(String, Vec<String>)>,
}

/// An immutable system with precomputed maximum metrics towards the root and
/// every Byzantine process.
#[derive(Debug, Clone)]
pub struct WeightedSystem {
    names: Vec<String>,
    index: HashMap<String, ProcessId>,
    adj: Vec<Vec<(ProcessId, Weight)>>,
    edges: Vec<Edge>,
    root: ProcessId,
    byz: Vec<bool>,
    byz_list: Vec<ProcessId>,
    metric: MetricSpec,
    maximizable: bool,
    d: u32,
    mu_root: Vec<MetricValue>,
    mu_byz: Vec<Vec<MetricValue>>,
}

impl WeightedSystem {
    pub fn build(desc: &SystemDescription) -> Result<Self, SystemError> {
        if desc.nodes.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut index = HashMap::new();
        for (i, name) in desc.nodes.iter().enumerate() {
            if index.insert(name.clone(), ProcessId(i)).is_some() {
                return Err(SystemError::DuplicateProcess(name.clone()));
            }
        }
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| SystemError::UnknownProcess(name.into()))
        };
        let n = desc.nodes.len();
        let mut adj: Vec<Vec<(ProcessId, Weight)>> = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for (a, b, w) in &desc.edges {
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(SystemError::SelfLoop(a.clone()));
            }
            if adj[u.0].iter().any(|(x, _)| *x == v) {
                return Err(SystemError::ParallelEdge(a.clone(), b.clone()));
            }
            if !desc.metric.contains_weight(*w) {
                return Err(SystemError::BadWeight {
                    u: a.clone(),
                    v: b.clone(),
                    weight: desc.metric.format_weight(*w),
                    metric: desc.metric.to_string(),
                });
            }
            adj[u.0].push((v, *w));
            adj[v.0].push((u, *w));
            edges.push(Edge { u, v, w: *w });
        }
        for (name, order) in &desc.neighbor_order {
            let p = lookup(name)?;
            let ids = order.iter().map(|s| lookup(s)).collect::<Result<Vec<_>, _>>()?;
            let current: BTreeSet<_> = adj[p.0].iter().map(|(x, _)| *x).collect();
            let given: BTreeSet<_> = ids.iter().copied().collect();
            if given != current || ids.len() != current.len() {
                return Err(SystemError::BadNeighborOrder(name.clone()));
            }
            let weights: HashMap<_, _> = adj[p.0].iter().copied().collect();
            adj[p.0] = ids.into_iter().map(|x| (x, weights[&x])).collect();
        }
        let root = lookup(&desc.root)?;
        let mut byz = vec![false; n];
        for b in &desc.byzantine {
            let id = lookup(b)?;
            if id == root {
                return Err(SystemError::ByzantineRoot(b.clone()));
            }
            byz[id.0] = true;
        }
        let byz_list = (0..n).filter(|&i| byz[i]).map(ProcessId).collect();
        let d = match desc.d {
            Some(0) => return Err(SystemError::ZeroD),
            Some(d) => d,
            None => n as u32,
        };
        let maximizable = classify(&desc.metric).is_maximizable;
        let mut sys = WeightedSystem {
            names: desc.nodes.clone(),
            index,
            adj,
            edges,
            root,
            byz,
            byz_list,
            metric: desc.metric.clone(),
            maximizable,
            d,
            mu_root: Vec::new(),
            mu_byz: Vec::new(),
        };
        let hops = sys.hops_from(root);
        if let Some(i) = hops.iter().position(|h| h.is_none()) {
            return Err(SystemError::Disconnected(sys.names[i].clone()));
        }
        sys.mu_root = sys.mu_from(root);
        sys.mu_byz = sys.byz_list.iter().map(|&b| sys.mu_from(b)).collect();
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn processes(&self) -> impl Iterator<Item = ProcessId> {
        (0..self.n()).map(ProcessId)
    }

    pub fn correct(&self) -> impl Iterator<Item = ProcessId> + '_ {
        self.processes().filter(|p| !self.byz[p.0])
    }

    pub fn byzantine(&self) -> &[ProcessId] {
        &self.byz_list
    }

    pub fn is_byzantine(&self, p: ProcessId) -> bool {
        self.byz[p.0]
    }

    pub fn root(&self) -> ProcessId {
        self.root
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn name(&self, p: ProcessId) -> &str {
        &self.names[p.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<ProcessId> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors with edge weights, in the process's neighbor order.
    pub fn neighbors(&self, p: ProcessId) -> &[(ProcessId, Weight)] {
        &self.adj[p.0]
    }

    pub fn is_neighbor(&self, p: ProcessId, q: ProcessId) -> bool {
        self.adj[p.0].iter().any(|(x, _)| *x == q)
    }

    pub fn weight(&self, p: ProcessId, q: ProcessId) -> Option<Weight> {
        self.adj[p.0].iter().find(|(x, _)| *x == q).map(|(_, w)| *w)
    }

    pub fn degree(&self, p: ProcessId) -> usize {
        self.adj[p.0].len()
    }

    pub fn max_degree(&self) -> usize {
        self.processes().map(|p| self.degree(p)).max().unwrap_or(0)
    }

    /// Maximum metric of `v` when `source` plays the root.
    pub fn mu(&self, v: ProcessId, source: ProcessId) -> MetricValue {
        if source == self.root {
            return self.mu_root[v.0];
        }
        if let Some(i) = self.byz_list.iter().position(|&b| b == source) {
            return self.mu_byz[i][v.0];
        }
        self.mu_from(source)[v.0]
    }

    /// Maximum metrics of every process towards `source`.
    ///
    /// Uses a best-first label search, which is exact for bounded and
    /// monotonic metrics. Other metrics on small systems fall back to
    /// enumerating simple paths.
    pub fn mu_from(&self, source: ProcessId) -> Vec<MetricValue> {
        if !self.maximizable && self.n() <= oracle::EXHAUSTIVE_LIMIT {
            return oracle::mu_exhaustive(self, source);
        }
        let m = &self.metric;
        let mut best: Vec<Option<MetricValue>> = vec![None; self.n()];
        let mut done = vec![false; self.n()];
        let mut heap = BinaryHeap::new();
        best[source.0] = Some(m.mr());
        heap.push((m.rank(m.mr()), Reverse(source.0)));
        while let Some((_, Reverse(u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            let label = best[u].expect("queued labels are set");
            for &(q, w) in &self.adj[u] {
                if done[q.0] {
                    continue;
                }
                let cand = m.met(label, w);
                if best[q.0].is_none_or(|cur| m.lt(cur, cand)) {
                    best[q.0] = Some(cand);
                    heap.push((m.rank(cand), Reverse(q.0)));
                }
            }
        }
        best.into_iter().map(|b| b.expect("connected")).collect()
    }

    /// Best maximum metric of `v` over all Byzantine sources.
    pub fn best_byzantine_mu(&self, v: ProcessId) -> Option<MetricValue> {
        self.mu_byz.iter().map(|t| t[v.0]).reduce(|a, b| self.metric.max(a, b))
    }

    /// Best maximum metric of `v` over the root and all Byzantine sources.
    pub fn best_source_mu(&self, v: ProcessId) -> MetricValue {
        match self.best_byzantine_mu(v) {
            Some(b) => self.metric.max(self.mu_root[v.0], b),
            None => self.mu_root[v.0],
        }
    }

    /// The set of metric values used by the system.
    pub fn used_metric_values(&self) -> BTreeSet<MetricValue> {
        self.mu_root.iter().chain(self.mu_byz.iter().flatten()).copied().collect()
    }

    pub fn hops_from(&self, s: ProcessId) -> Vec<Option<usize>> {
        hops_within(self, s, |_| true)
    }

    pub fn hop_distance(&self, u: ProcessId, v: ProcessId) -> usize {
        self.hops_from(u)[v.0].expect("connected")
    }

    /// Correct processes within `c` hops of some Byzantine process.
    pub fn radius_area(&self, c: usize) -> BTreeSet<ProcessId> {
        if self.byz_list.is_empty() {
            return BTreeSet::new();
        }
        let tables: Vec<_> = self.byz_list.iter().map(|&b| self.hops_from(b)).collect();
        self.correct()
            .filter(|v| tables.iter().any(|t| t[v.0].is_some_and(|h| h <= c)))
            .collect()
    }

    pub fn containment_areas(&self) -> ContainmentAreas {
        let max_degree = self.max_degree();
        if self.byz_list.is_empty() {
            return ContainmentAreas { max_degree, ..ContainmentAreas::default() };
        }
        let m = &self.metric;
        let mut s_b = BTreeSet::new();
        let mut s_b_star = BTreeSet::new();
        for v in self.correct() {
            if v == self.root {
                continue;
            }
            let byz = self.best_byzantine_mu(v).expect("B nonempty");
            let own = self.mu_root[v.0];
            if m.le(own, byz) {
                s_b.insert(v);
            }
            if m.lt(own, byz) {
                s_b_star.insert(v);
            }
        }
        // Correct processes cut off from the root by the strict area join it.
        let outside = |p: ProcessId| !s_b_star.contains(&p);
        let reach = hops_within(self, self.root, outside);
        let cut: Vec<_> = self
            .correct()
            .filter(|&p| outside(p) && reach[p.0].is_none())
            .collect();
        s_b_star.extend(cut);

        let boundary: BTreeSet<_> = s_b.difference(&s_b_star).copied().collect();
        let mut e_b = Vec::new();
        let mut seen = BTreeSet::new();
        for &p in &boundary {
            if !seen.insert(p) {
                continue;
            }
            let d = hops_within(self, p, |q| boundary.contains(&q));
            let comp: BTreeSet<_> =
                self.processes().filter(|q| d[q.0].is_some()).collect();
            seen.extend(comp.iter().copied());
            e_b.push(comp);
        }
        let delta = e_b
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|&p| {
                        hops_within(self, p, |q| comp.contains(&q))
                            .into_iter()
                            .flatten()
                            .max()
                            .unwrap_or(0)
                    })
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        ContainmentAreas { s_b, s_b_star, e_b, delta, max_degree }
    }

    /// The legitimacy predicate for one process. The `variant` selects the
    /// protocol whose notion of a consistent distance is used.
    pub fn check_spec(&self, config: &Configuration, v: ProcessId, variant: Variant) -> bool {
        self.spec_failure(config, v, variant).is_none()
    }

    /// Why `v` is not legitimate, or `None` if it is.
    pub fn spec_failure(
        &self,
        config: &Configuration,
        v: ProcessId,
        variant: Variant,
    ) -> Option<SpecFailure> {
        let m = &self.metric;
        let legacy = variant.is_legacy();
        let s = config[v];
        if v == self.root {
            return if s.prnt.is_none() && s.level == m.mr() && s.dist == 0 {
                None
            } else {
                Some(SpecFailure::Root)
            };
        }
        // Walk parent pointers back to the path origin.
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = config[cur].prnt {
            if !self.is_neighbor(cur, p) {
                return Some(SpecFailure::Broken(cur));
            }
            if path.contains(&p) {
                return Some(SpecFailure::Cycle);
            }
            path.push(p);
            cur = p;
        }
        if path.len() < 2 {
            return Some(SpecFailure::NoParent);
        }
        path.reverse();
        let origin = path[0];
        let o = config[origin];
        let origin_dist_ok = o.dist == 0 || (legacy && self.is_byzantine(origin));
        if !(origin == self.root || self.is_byzantine(origin))
            || o.level != m.mr()
            || !origin_dist_ok
        {
            return Some(SpecFailure::Origin(origin));
        }
        for pair in path.windows(2) {
            let (u, x) = (pair[0], pair[1]);
            let (su, sx) = (config[u], config[x]);
            let w = self.weight(x, u).expect("parent is a neighbor");
            let offered = m.met(su.level, w);
            if sx.level != offered {
                return Some(SpecFailure::Level(x));
            }
            if self
                .neighbors(x)
                .iter()
                .any(|&(q, wq)| m.lt(offered, m.met(config[q].level, wq)))
            {
                return Some(SpecFailure::NotMaximal(x));
            }
            let legal = if legacy {
                (su.dist + 1).min(self.d)
            } else if sx.level == su.level {
                su.dist + 1
            } else {
                0
            };
            if sx.dist != legal {
                return Some(SpecFailure::Dist(x));
            }
        }
        if s.level != self.mu(v, origin) {
            return Some(SpecFailure::NotOptimal);
        }
        None
    }

    /// Whether parent pointers form a spanning tree rooted at the root in
    /// which every level is the maximum metric towards the root.
    pub fn is_max_metric_tree(&self, config: &Configuration) -> TreeVerdict {
        if config[self.root].prnt.is_some() {
            return TreeVerdict::RootHasParent;
        }
        for v in self.processes() {
            let mut trail = vec![v];
            let mut cur = v;
            while cur != self.root {
                let Some(p) = config[cur].prnt else {
                    return TreeVerdict::Detached(v);
                };
                if !self.is_neighbor(cur, p) {
                    return TreeVerdict::Detached(v);
                }
                if let Some(i) = trail.iter().position(|&x| x == p) {
                    return TreeVerdict::Cycle(trail[i..].to_vec());
                }
                trail.push(p);
                cur = p;
            }
            if config[v].level != self.mu_root[v.0] {
                return TreeVerdict::LevelMismatch(v);
            }
        }
        TreeVerdict::Valid
    }
}

/// Breadth-first hop counts from `s` through processes accepted by `keep`.
fn hops_within(
    sys: &WeightedSystem,
    s: ProcessId,
    keep: impl Fn(ProcessId) -> bool,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; sys.n()];
    if !keep(s) {
        return dist;
    }
    dist[s.0] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.0].expect("visited");
        for &(q, _) in sys.neighbors(u) {
            if dist[q.0].is_none() && keep(q) {
                dist[q.0] = Some(du + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFailure {
    Root,
    NoParent,
    Cycle,
    Broken(ProcessId),
    Origin(ProcessId),
    Level(ProcessId),
    NotMaximal(ProcessId),
    Dist(ProcessId),
    NotOptimal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeVerdict {
    Valid,
    RootHasParent,
    Detached(ProcessId),
    Cycle(Vec<ProcessId>),
    LevelMismatch(ProcessId),
}

impl TreeVerdict {
    pub fn is_valid(&self) -> bool {
        *self == TreeVerdict::Valid
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContainmentAreas {
    pub s_b: BTreeSet<ProcessId>,
    pub s_b_star: BTreeSet<ProcessId>,
    /// Connected components of the non-strict area minus the strict one.
    pub e_b: Vec<BTreeSet<ProcessId>>,
    /// Largest diameter among `e_b` components.
    pub delta: usize,
    pub max_degree: usize,
}

impl ContainmentAreas {
    pub fn e_b_processes(&self) -> BTreeSet<ProcessId> {
        self.e_b.iter().flatten().copied().collect()
    }
}

/// Ground-truth maximum metrics by enumeration of simple paths.
pub mod oracle {
    use super::*;

    /// Largest system on which the exhaustive enumeration is used at run
    /// time.
    pub const EXHAUSTIVE_LIMIT: usize = 12;

    /// For each process, the best metric over all simple paths to `source`.
    pub fn mu_exhaustive(sys: &WeightedSystem, source: ProcessId) -> Vec<MetricValue> {
        let m = sys.metric();
        let mut best: Vec<Option<MetricValue>> = vec![None; sys.n()];
        let mut on_path = vec![false; sys.n()];
        fn walk(
            sys: &WeightedSystem,
            u: ProcessId,
            label: MetricValue,
            on_path: &mut [bool],
            best: &mut [Option<MetricValue>],
        ) {
            let m = sys.metric();
            if best[u.0].is_none_or(|b| m.lt(b, label)) {
                best[u.0] = Some(label);
            }
            on_path[u.0] = true;
            for &(q, w) in sys.neighbors(u) {
                if !on_path[q.0] {
                    walk(sys, q, m.met(label, w), on_path, best);
                }
            }
            on_path[u.0] = false;
        }
        walk(sys, source, m.mr(), &mut on_path, &mut best);
        best.into_iter().map(|b| b.expect("connected")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::protocol::ProcessState;

    fn fig7() -> WeightedSystem {
        library::fig7_system(Variant::Ssmax).unwrap()
    }

    fn ids(sys: &WeightedSystem, names: &[&str]) -> BTreeSet<ProcessId> {
        names.iter().map(|n| sys.id(n).unwrap()).collect()
    }

    #[test]
    fn fig7_shape() {
        let sys = fig7();
        assert_eq!(sys.n(), 8);
        assert_eq!(sys.max_degree(), 3);
        assert_eq!(sys.d(), 10);
    }

    #[test]
    fn fig7_maximum_metrics() {
        let sys = fig7();
        let p = |n| sys.id(n).unwrap();
        assert_eq!(sys.mu(p("r"), p("r")), MetricValue(0));
        assert_eq!(sys.mu(p("p2"), p("r")), MetricValue(2));
        assert_eq!(sys.mu(p("p4"), p("b2")), MetricValue(2));
        for s in sys.processes() {
            assert_eq!(sys.mu_from(s), oracle::mu_exhaustive(&sys, s));
        }
    }

    #[test]
    fn fig7_used_values_by_definition() {
        let vals: Vec<u32> = fig7().used_metric_values().into_iter().map(|m| m.0).collect();
        assert_eq!(vals, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn fig7_areas() {
        let sys = fig7();
        let a = sys.containment_areas();
        assert_eq!(a.s_b, ids(&sys, &["p2", "p3", "p4", "p5"]));
        assert_eq!(a.s_b_star, ids(&sys, &["p3", "p5"]));
        assert_eq!(a.e_b, vec![ids(&sys, &["p2", "p4"])]);
        assert_eq!(a.delta, 1);
        assert_eq!(a.max_degree, 3);
    }

    #[test]
    fn fig7_hops_and_radius() {
        let sys = fig7();
        let p = |n| sys.id(n).unwrap();
        assert_eq!(sys.hop_distance(p("r"), p("b2")), 5);
        assert_eq!(sys.hop_distance(p("p2"), p("b1")), 2);
        assert_eq!(sys.hop_distance(p("p2"), p("p2")), 0);
        assert!(sys.radius_area(0).is_empty());
        assert_eq!(sys.radius_area(1), ids(&sys, &["p3", "p5"]));
        assert_eq!(sys.radius_area(100), sys.correct().collect());
    }

    fn chain(metric: MetricSpec, w: Weight) -> WeightedSystem {
        WeightedSystem::build(&SystemDescription {
            nodes: vec!["r".into(), "a".into(), "b".into()],
            edges: vec![("r".into(), "a".into(), w), ("a".into(), "b".into(), w)],
            root: "r".into(),
            byzantine: vec![],
            metric,
            d: None,
            neighbor_order: vec![],
        })
        .unwrap()
    }

    fn st(prnt: Option<usize>, level: u32, dist: u32) -> ProcessState {
        ProcessState { prnt: prnt.map(ProcessId), level: MetricValue(level), dist }
    }

    #[test]
    fn tree_check_on_chain() {
        let sys = chain(MetricSpec::sp(8), Weight(1));
        let good = Configuration::new(vec![st(None, 0, 0), st(Some(0), 1, 0), st(Some(1), 2, 0)]);
        assert!(sys.is_max_metric_tree(&good).is_valid());
        let mut bad = good.clone();
        bad[ProcessId(2)].level = MetricValue(3);
        assert_eq!(sys.is_max_metric_tree(&bad), TreeVerdict::LevelMismatch(ProcessId(2)));
        let cyc = Configuration::new(vec![st(None, 0, 0), st(Some(2), 1, 0), st(Some(1), 2, 0)]);
        assert!(matches!(sys.is_max_metric_tree(&cyc), TreeVerdict::Cycle(_)));
    }

    #[test]
    fn spec_on_chain() {
        let sys = chain(MetricSpec::sp(8), Weight(1));
        let good = Configuration::new(vec![st(None, 0, 0), st(Some(0), 1, 0), st(Some(1), 2, 0)]);
        for v in sys.processes() {
            assert!(sys.check_spec(&good, v, Variant::Ssmax));
        }
        let mut bad = good.clone();
        bad[ProcessId(0)].dist = 1;
        assert!(!sys.check_spec(&bad, ProcessId(0), Variant::Ssmax));
        assert!(!sys.check_spec(&bad, ProcessId(1), Variant::Ssmax));
        // Equal levels across a zero-weight edge chain the distances.
        let flat = chain(MetricSpec::sp(8), Weight(0));
        let cfg = Configuration::new(vec![st(None, 0, 0), st(Some(0), 0, 1), st(Some(1), 0, 2)]);
        assert!(flat.check_spec(&cfg, ProcessId(2), Variant::Ssmax));
    }

    #[test]
    fn validation_errors() {
        let base = SystemDescription {
            nodes: vec!["r".into(), "a".into()],
            edges: vec![("r".into(), "a".into(), Weight(2))],
            root: "r".into(),
            byzantine: vec![],
            metric: MetricSpec::bfs(16),
            d: None,
            neighbor_order: vec![],
        };
        assert!(matches!(WeightedSystem::build(&base), Err(SystemError::BadWeight { .. })));
        let mut d = base.clone();
        d.metric = MetricSpec::sp(4);
        d.byzantine = vec!["r".into()];
        assert!(matches!(WeightedSystem::build(&d), Err(SystemError::ByzantineRoot(_))));
        let mut d = base.clone();
        d.metric = MetricSpec::sp(4);
        d.nodes.push("z".into());
        assert!(matches!(WeightedSystem::build(&d), Err(SystemError::Disconnected(_))));
        let mut d = base;
        d.metric = MetricSpec::sp(4);
        d.edges.push(("a".into(), "r".into(), Weight(1)));
        assert!(matches!(WeightedSystem::build(&d), Err(SystemError::ParallelEdge(..))));
    }

    #[test]
    fn single_node_system() {
        let sys = WeightedSystem::build(&SystemDescription {
            nodes: vec!["r".into()],
            edges: vec![],
            root: "r".into(),
            byzantine: vec![],
            metric: MetricSpec::met_metric(),
            d: None,
            neighbor_order: vec![],
        })
        .unwrap();
        assert_eq!(sys.used_metric_values(), BTreeSet::from([MetricValue(3)]));
        assert_eq!(sys.containment_areas(), ContainmentAreas::default());
    }

    #[test]
    fn theorem5_gadget_strict_area() {
        let sc = library::entry("theorem5-gadget(metric=met)").unwrap();
        let sys = sc.build_system().unwrap();
        let a = sys.containment_areas();
        assert_eq!(a.s_b_star, ids(&sys, &["v", "v'"]));
    }
}
