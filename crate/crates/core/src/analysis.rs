//! Trace predicates: area legitimacy and stability, disruption counting,
//! containment verification and the disruption bounds.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::protocol::{enabled_as_correct, step, Action, Configuration, Rule, Variant};
use crate::scheduler::ExecutionTrace;
use crate::system::{ProcessId, WeightedSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AreaKind {
    Radius(usize),
    Explicit(BTreeSet<ProcessId>),
    SB,
    SBStar,
}

/// A set of processes allowed to be disturbed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaSpec {
    pub kind: AreaKind,
    pub resolved: BTreeSet<ProcessId>,
}

impl AreaSpec {
    pub fn resolve(sys: &WeightedSystem, kind: AreaKind) -> Self {
        let resolved = match &kind {
            AreaKind::Radius(c) => sys.radius_area(*c),
            AreaKind::Explicit(s) => s.clone(),
            AreaKind::SB => sys.containment_areas().s_b,
            AreaKind::SBStar => sys.containment_areas().s_b_star,
        };
        AreaSpec { kind, resolved }
    }

    /// Correct processes outside the area.
    pub fn protected(&self, sys: &WeightedSystem) -> Vec<ProcessId> {
        sys.correct().filter(|p| !self.resolved.contains(p)).collect()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            AreaKind::Radius(c) => format!("radius({c})"),
            AreaKind::Explicit(_) => "explicit".into(),
            AreaKind::SB => "s_b".into(),
            AreaKind::SBStar => "s_b_star".into(),
        }
    }
}

pub fn is_area_legitimate(
    sys: &WeightedSystem,
    config: &Configuration,
    area: &AreaSpec,
    variant: Variant,
) -> bool {
    area.protected(sys).into_iter().all(|v| sys.check_spec(config, v, variant))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode {
    /// Full reachability under the distributed daemon.
    Exact,
    /// Bounded exploration; a reported instability is always genuine.
    Approximate,
}

/// Limits of the stability search.
#[derive(Debug, Clone, Copy)]
pub struct StabilityLimits {
    /// Largest system explored exactly.
    pub exact_max_n: usize,
    pub max_states: usize,
    /// Largest number of simultaneous successors enumerated per state.
    pub max_branching: usize,
}

impl Default for StabilityLimits {
    fn default() -> Self {
        StabilityLimits { exact_max_n: 8, max_states: 20_000, max_branching: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stability {
    pub stable: bool,
    pub mode: StabilityMode,
}

/// Whether no execution without Byzantine actions can change an O-variable
/// of a protected process. Every enabled rule changes the executing
/// process's state, so this amounts to: no reachable configuration enables
/// a protected process.
pub fn is_area_stable(
    sys: &WeightedSystem,
    config: &Configuration,
    area: &AreaSpec,
    variant: Variant,
    limits: StabilityLimits,
) -> Stability {
    explore_stability(sys, config, area, variant, limits).0
}

/// The stability search, also returning every visited configuration when
/// the search was complete and found no enabled protected process. Each of
/// those is then stable too.
fn explore_stability(
    sys: &WeightedSystem,
    config: &Configuration,
    area: &AreaSpec,
    variant: Variant,
    limits: StabilityLimits,
) -> (Stability, Option<HashSet<Configuration>>) {
    let protected = area.protected(sys);
    let exact = sys.n() <= limits.exact_max_n;
    let mut mode = if exact { StabilityMode::Exact } else { StabilityMode::Approximate };
    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut queue: VecDeque<(Configuration, usize)> = VecDeque::new();
    seen.insert(config.clone());
    queue.push_back((config.clone(), 0));
    while let Some((cfg, depth)) = queue.pop_front() {
        let rules: Vec<(ProcessId, Vec<Rule>)> = sys
            .correct()
            .map(|p| (p, enabled_as_correct(sys, &cfg, p, variant)))
            .filter(|(_, r)| !r.is_empty())
            .collect();
        if rules.iter().any(|(p, _)| protected.contains(p)) {
            return (Stability { stable: false, mode }, None);
        }
        if !exact && depth >= sys.n() {
            continue;
        }
        let branching: usize =
            rules.iter().map(|(_, r)| r.len() + 1).try_fold(1usize, |a, b| a.checked_mul(b)).unwrap_or(usize::MAX);
        let successors: Vec<Vec<(ProcessId, Action)>> = if exact && branching <= limits.max_branching {
            joint_activations(&rules)
        } else {
            mode = StabilityMode::Approximate;
            rules
                .iter()
                .flat_map(|(p, rs)| rs.iter().map(move |r| vec![(*p, Action::Rule(*r))]))
                .collect()
        };
        for act in successors {
            let next = step(sys, &cfg, &act, variant).expect("enabled rules apply");
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= limits.max_states {
                mode = StabilityMode::Approximate;
                continue;
            }
            seen.insert(next.clone());
            queue.push_back((next, depth + 1));
        }
    }
    let complete = mode == StabilityMode::Exact;
    (Stability { stable: true, mode }, complete.then_some(seen))
}

/// Every nonempty choice of at most one rule per enabled process.
fn joint_activations(rules: &[(ProcessId, Vec<Rule>)]) -> Vec<Vec<(ProcessId, Action)>> {
    let mut out: Vec<Vec<(ProcessId, Action)>> = vec![Vec::new()];
    for (p, rs) in rules {
        let mut next = Vec::with_capacity(out.len() * (rs.len() + 1));
        for prefix in &out {
            next.push(prefix.clone());
            for r in rs {
                let mut a = prefix.clone();
                a.push((*p, Action::Rule(*r)));
                next.push(a);
            }
        }
        out = next;
    }
    out.retain(|a| !a.is_empty());
    out
}

/// `(a^(b+1) - 1) / (a - 1)`, with `b + 1` for `a = 1`; saturates.
pub fn pi(a: u64, b: u64) -> u64 {
    let mut sum = 0u64;
    let mut term = 1u64;
    for _ in 0..=b {
        sum = sum.saturating_add(term);
        term = term.saturating_mul(a);
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisruptionBound {
    pub per_process: u64,
    pub total: u64,
}

/// `Π(k, δ)·Δ·D` per process and `n` times that in total; zero without
/// Byzantine processes.
pub fn disruption_bound(sys: &WeightedSystem, k: u32) -> DisruptionBound {
    if sys.byzantine().is_empty() {
        return DisruptionBound { per_process: 0, total: 0 };
    }
    let areas = sys.containment_areas();
    let per_process = pi(k as u64, areas.delta as u64)
        .saturating_mul(areas.max_degree as u64)
        .saturating_mul(sys.d() as u64);
    DisruptionBound { per_process, total: per_process.saturating_mul(sys.n() as u64) }
}

/// E_B processes that cannot be anchored. A process is anchored when a
/// correct neighbor outside S_B, or an anchored E_B neighbor, yields its
/// root metric over their link. The per-process bound is only derived for
/// anchored processes; with a metric that is not strictly decreasing a best
/// root path can run through S_B* or a Byzantine process instead.
pub fn unanchored_processes(sys: &WeightedSystem) -> BTreeSet<ProcessId> {
    let areas = sys.containment_areas();
    let m = sys.metric();
    let root_mu = sys.mu_from(sys.root());
    let mut loose = areas.e_b_processes();
    let mut anchored: BTreeSet<ProcessId> =
        sys.correct().filter(|q| !areas.s_b.contains(q)).collect();
    loop {
        let next: Vec<ProcessId> = loose
            .iter()
            .copied()
            .filter(|&p| {
                sys.neighbors(p)
                    .iter()
                    .any(|&(q, w)| anchored.contains(&q) && root_mu[p.0] == m.met(root_mu[q.0], w))
            })
            .collect();
        if next.is_empty() {
            return loose;
        }
        for p in next {
            loose.remove(&p);
            anchored.insert(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundViolation {
    ProcessChanges { process: ProcessId, changes: u64 },
    TotalDisruptions { disruptions: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisruptionReport {
    pub area: String,
    pub disruptions: u64,
    /// A disruption opened but the trace ended before it closed.
    pub open_disruption: bool,
    /// O-variable changes per process, counted from the convergence index.
    pub changes: Vec<u64>,
    /// Largest entry of `changes` over protected processes.
    pub max_process_changes: u64,
    /// Index of the first legitimate and stable configuration.
    pub convergence_index: Option<usize>,
    pub bound: DisruptionBound,
    pub violations: Vec<BoundViolation>,
    pub stability_mode: StabilityMode,
}

impl DisruptionReport {
    pub fn render(&self, sys: &WeightedSystem) -> String {
        let violations = if self.violations.is_empty() {
            "none".to_string()
        } else {
            self.violations
                .iter()
                .map(|v| match v {
                    BoundViolation::ProcessChanges { process, changes } => {
                        format!("{}:{}", sys.name(*process), changes)
                    }
                    BoundViolation::TotalDisruptions { disruptions } => format!("total:{disruptions}"),
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "disruptions={} max_process_changes={} bound_per_process={} bound_total={} violations={}",
            self.disruptions, self.max_process_changes, self.bound.per_process, self.bound.total, violations
        )
    }
}

impl fmt::Display for StabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityMode::Exact => "exact",
            StabilityMode::Approximate => "approximate",
        })
    }
}

/// Memoized legitimacy-and-stability classification of configurations.
pub struct Classifier<'a> {
    sys: &'a WeightedSystem,
    area: &'a AreaSpec,
    variant: Variant,
    limits: StabilityLimits,
    memo: HashMap<Configuration, bool>,
    /// Configurations proven stable by a complete search.
    stable: HashSet<Configuration>,
    pub mode: StabilityMode,
}

impl<'a> Classifier<'a> {
    pub fn new(sys: &'a WeightedSystem, area: &'a AreaSpec, variant: Variant) -> Self {
        Classifier {
            sys,
            area,
            variant,
            limits: StabilityLimits::default(),
            memo: HashMap::new(),
            stable: HashSet::new(),
            mode: StabilityMode::Exact,
        }
    }

    pub fn with_limits(mut self, limits: StabilityLimits) -> Self {
        self.limits = limits;
        self
    }

    /// Legitimate and stable.
    pub fn is_settled(&mut self, cfg: &Configuration) -> bool {
        if let Some(&v) = self.memo.get(cfg) {
            return v;
        }
        let v = is_area_legitimate(self.sys, cfg, self.area, self.variant)
            && (self.stable.contains(cfg) || {
                let (s, visited) = explore_stability(self.sys, cfg, self.area, self.variant, self.limits);
                if s.mode == StabilityMode::Approximate {
                    self.mode = StabilityMode::Approximate;
                }
                if let Some(visited) = visited {
                    self.stable.extend(visited);
                }
                s.stable
            });
        self.memo.insert(cfg.clone(), v);
        v
    }
}

/// Counts disruptions of the protected processes and checks the bounds
/// for a daemon bound `k`.
pub fn count_disruptions(
    sys: &WeightedSystem,
    trace: &ExecutionTrace,
    area: &AreaSpec,
    variant: Variant,
    k: u32,
) -> DisruptionReport {
    let mut classifier = Classifier::new(sys, area, variant);
    let protected: BTreeSet<ProcessId> = area.protected(sys).into_iter().collect();
    let mut changes = vec![0u64; sys.n()];
    let mut disruptions = 0u64;
    let mut last_settled: Option<usize> = None;
    let mut convergence_index = None;
    let mut disturbed = false;
    for (i, cfg) in trace.configurations.iter().enumerate() {
        if last_settled.is_some() && i > 0 {
            for p in &trace.steps[i - 1].changed {
                changes[p.0] += 1;
                if protected.contains(p) {
                    disturbed = true;
                }
            }
        }
        if classifier.is_settled(cfg) {
            if let Some(j) = last_settled {
                if disturbed && i - j > 1 {
                    disruptions += 1;
                }
            } else {
                convergence_index = Some(i);
            }
            last_settled = Some(i);
            disturbed = false;
        }
    }
    let bound = disruption_bound(sys, k);
    let max_process_changes = protected.iter().map(|p| changes[p.0]).max().unwrap_or(0);
    let mut violations: Vec<BoundViolation> = protected
        .iter()
        .filter(|p| changes[p.0] > bound.per_process)
        .map(|&p| BoundViolation::ProcessChanges { process: p, changes: changes[p.0] })
        .collect();
    if disruptions > bound.total {
        violations.push(BoundViolation::TotalDisruptions { disruptions });
    }
    DisruptionReport {
        area: area.label(),
        disruptions,
        open_disruption: disturbed,
        changes,
        max_process_changes,
        convergence_index,
        bound,
        violations,
        stability_mode: classifier.mode,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentVerdict {
    /// Earliest configuration from which every protected process satisfies
    /// spec in every later configuration and never changes.
    pub point: Option<usize>,
    /// Steps after the point.
    pub suffix: usize,
    /// Last configuration breaking containment, if any.
    pub last_violation: Option<usize>,
    /// Stability of the configuration at the point.
    pub stable_at_point: Option<Stability>,
}

impl ContainmentVerdict {
    /// Containment held for at least `steps` steps at the end of the trace.
    pub fn holds_for(&self, steps: usize) -> bool {
        self.point.is_some() && self.suffix >= steps
    }
}

/// Finds the containment point of a finite trace by scanning backwards.
pub fn verify_containment(
    sys: &WeightedSystem,
    trace: &ExecutionTrace,
    area: &AreaSpec,
    variant: Variant,
) -> ContainmentVerdict {
    let protected: BTreeSet<ProcessId> = area.protected(sys).into_iter().collect();
    let configs = &trace.configurations;
    let breaks = |i: usize| {
        !is_area_legitimate(sys, &configs[i], area, variant)
            || (i > 0 && trace.steps[i - 1].changed.iter().any(|p| protected.contains(p)))
    };
    let last_violation = (0..configs.len()).rev().find(|&i| breaks(i));
    // A change into configuration i breaks containment from i - 1 on, but
    // legitimacy of i itself still allows i to start the suffix.
    let point = match last_violation {
        None => Some(0),
        Some(i) if is_area_legitimate(sys, &configs[i], area, variant) => Some(i),
        Some(i) if i + 1 < configs.len() => Some(i + 1),
        Some(_) => None,
    };
    let stable_at_point = point.map(|i| {
        is_area_stable(sys, &configs[i], area, variant, StabilityLimits::default())
    });
    ContainmentVerdict {
        point,
        suffix: point.map_or(0, |i| configs.len() - 1 - i),
        last_violation,
        stable_at_point,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::metric::MetricValue;
    use crate::protocol::ProcessState;

    #[test]
    fn pi_values() {
        assert_eq!(pi(2, 2), 7);
        assert_eq!(pi(3, 1), 4);
        assert_eq!(pi(5, 0), 1);
        assert_eq!(pi(1, 4), 5);
        assert_eq!(pi(u64::MAX, 3), u64::MAX);
    }

    #[test]
    fn fig7_bound() {
        let sys = library::fig7_system(Variant::Ssmax).unwrap();
        let b = disruption_bound(&sys, 3);
        assert_eq!(b, DisruptionBound { per_process: 120, total: 960 });
    }

    #[test]
    fn anchoring() {
        let sys = library::fig7_system(Variant::Ssmax).unwrap();
        assert!(unanchored_processes(&sys).is_empty());
        // Under a bottleneck metric a's best root path runs through b.
        let text = "[system]\nnodes = r a b\nroot = r\nbyzantine = b\n[metric]\nmetric = flow(mr=8)\n\
                    [edges]\nr b 8\nb a 5\nr a 3\n";
        let sys = crate::scenario::Scenario::parse(text).unwrap().build_system().unwrap();
        let a = sys.id("a").unwrap();
        assert!(sys.containment_areas().e_b_processes().contains(&a));
        assert_eq!(unanchored_processes(&sys), BTreeSet::from([a]));
        // A strictly decreasing metric makes a best root path through b
        // strictly worse than b's own offer.
        let sp = text.replace("flow(mr=8)", "sp(bound=40)").replace("r b 8\nb a 5\nr a 3", "r b 1\nb a 1\nr a 5");
        let sys = crate::scenario::Scenario::parse(&sp)
            .unwrap()
            .build_system()
            .unwrap();
        assert!(sys.containment_areas().s_b_star.contains(&a));
    }

    #[test]
    fn fig7_rho1_legitimate_and_stable_for_legacy() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let cfg = sc.initial_configuration(&sys).unwrap();
        let area = AreaSpec::resolve(&sys, AreaKind::SBStar);
        assert!(is_area_legitimate(&sys, &cfg, &area, Variant::Legacy));
        let s = is_area_stable(&sys, &cfg, &area, Variant::Legacy, StabilityLimits::default());
        assert_eq!(s, Stability { stable: true, mode: StabilityMode::Exact });
        // The distance-reset rule rejects the legacy distances of p2.
        assert!(!is_area_legitimate(&sys, &cfg, &area, Variant::Ssmax));
    }

    #[test]
    fn enabled_protected_process_is_unstable() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let mut cfg = sc.initial_configuration(&sys).unwrap();
        cfg[sys.id("p1").unwrap()].level = MetricValue(5);
        let area = AreaSpec::resolve(&sys, AreaKind::SBStar);
        assert!(!is_area_stable(&sys, &cfg, &area, Variant::Legacy, StabilityLimits::default()).stable);
    }

    #[test]
    fn root_corruption_is_never_legitimate() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let mut cfg = sc.initial_configuration(&sys).unwrap();
        cfg[sys.root()] = ProcessState { prnt: None, level: MetricValue(0), dist: 4 };
        for kind in [AreaKind::SB, AreaKind::SBStar, AreaKind::Radius(3)] {
            let area = AreaSpec::resolve(&sys, kind);
            assert!(!is_area_legitimate(&sys, &cfg, &area, Variant::Legacy));
        }
    }

    #[test]
    fn joint_activations_enumerate_subsets() {
        let rules = vec![(ProcessId(0), vec![Rule::R1]), (ProcessId(1), vec![Rule::R2, Rule::R3])];
        assert_eq!(joint_activations(&rules).len(), 2 * 3 - 1);
    }
}
