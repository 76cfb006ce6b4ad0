//! Daemons, Byzantine strategies and the run loop.
//!
//! The daemon keeps a quota ledger: `quota[p][q]` counts actions of `p`
//! taken while `q` was enabled and waiting. A process may act only while all
//! its quotas against waiting processes are below `k`, so no waiting process
//! is overtaken more than `k` times by anyone. The longest-waiting enabled
//! process is never blocked and is forced when nothing else is allowed,
//! which also bounds starvation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::MetricValue;
use crate::protocol::{
    apply_unchecked, enabled_as_correct, format_state, step, Action, Configuration, EngineError,
    ProcessState, Rule, Variant,
};
use crate::system::{ProcessId, WeightedSystem};

/// Identity of the pseudo-random generator, recorded in trace headers.
pub const RNG_NAME: &str = "ChaCha8Rng(seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaemonMode {
    Central,
    Distributed,
}

impl DaemonMode {
    pub fn label(self) -> &'static str {
        match self {
            DaemonMode::Central => "central",
            DaemonMode::Distributed => "distributed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaemonConfig {
    pub mode: DaemonMode,
    pub k: u32,
    pub seed: u64,
    pub max_steps: usize,
    /// Idle polls (nothing enabled, every strategy passing) before the run
    /// is declared quiescent.
    pub quiescence_window: usize,
}

impl DaemonConfig {
    /// Default starvation horizon of the fairness proxy.
    pub fn horizon(&self, n: usize) -> usize {
        10 * n.max(1) * self.k.max(1) as usize
    }
}

impl Default for DaemonConfig {
    fn default() -> Self {
        DaemonConfig {
            mode: DaemonMode::Distributed,
            k: 1,
            seed: 0,
            max_steps: 10_000,
            quiescence_window: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ByzantineStrategy {
    /// Writes each state once its trigger tick is reached, in order.
    Scripted { script: Vec<(u64, ProcessState)> },
    /// Copies the root's state as soon as they differ, with priority.
    MimicRoot,
    /// Writes `states` in a loop, each time waiting until no watched
    /// process is enabled. `watch = None` watches every correct process.
    ReplayLoop { states: Vec<ProcessState>, watch: Option<Vec<ProcessId>>, cycles: Option<u64> },
    /// Runs the protocol's own rules.
    BehaveCorrect,
    /// Writes a uniformly random well-typed state with probability
    /// `percent`/100 at each poll.
    RandomState { seed: u64, percent: u32 },
}

impl ByzantineStrategy {
    pub fn frozen() -> Self {
        ByzantineStrategy::Scripted { script: Vec::new() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ByzantineStrategy::Scripted { .. } => "scripted",
            ByzantineStrategy::MimicRoot => "mimic_root",
            ByzantineStrategy::ReplayLoop { .. } => "replay_loop",
            ByzantineStrategy::BehaveCorrect => "behave_correct",
            ByzantineStrategy::RandomState { .. } => "random_state",
        }
    }
}

/// What a strategy can see when deciding.
pub struct ByzContext<'a> {
    pub system: &'a WeightedSystem,
    pub config: &'a Configuration,
    pub variant: Variant,
    pub tick: u64,
    /// Enabled flags of correct processes in `config`.
    pub enabled: &'a [bool],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proposal {
    pub state: ProcessState,
    /// Ask the daemon to schedule this before anything else.
    pub urgent: bool,
}

/// A strategy plus its progress.
#[derive(Debug, Clone)]
pub struct StrategyRunner {
    pub process: ProcessId,
    pub strategy: ByzantineStrategy,
    cursor: usize,
    cycles_done: u64,
    rng: ChaCha8Rng,
}

impl StrategyRunner {
    pub fn new(process: ProcessId, strategy: ByzantineStrategy) -> Self {
        let seed = match &strategy {
            ByzantineStrategy::RandomState { seed, .. } => *seed,
            _ => 0,
        };
        StrategyRunner {
            process,
            strategy,
            cursor: 0,
            cycles_done: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn cycles_done(&self) -> u64 {
        self.cycles_done
    }

    /// The state this process would write now, or `None` to pass.
    pub fn propose(&mut self, ctx: &ByzContext<'_>) -> Option<Proposal> {
        let b = self.process;
        let sys = ctx.system;
        let plain = |state| Some(Proposal { state, urgent: false });
        match &self.strategy {
            ByzantineStrategy::Scripted { script } => match script.get(self.cursor) {
                Some(&(at, state)) if ctx.tick >= at => plain(state),
                _ => None,
            },
            ByzantineStrategy::MimicRoot => {
                let r = ctx.config[sys.root()];
                let target = ProcessState { prnt: None, level: r.level, dist: r.dist };
                (ctx.config[b] != target).then_some(Proposal { state: target, urgent: true })
            }
            ByzantineStrategy::ReplayLoop { states, watch, cycles } => {
                if states.is_empty() || cycles.is_some_and(|c| self.cycles_done >= c) {
                    return None;
                }
                let busy = match watch {
                    Some(w) => w.iter().any(|p| ctx.enabled[p.0]),
                    None => ctx.enabled.iter().any(|e| *e),
                };
                if busy {
                    None
                } else {
                    plain(states[self.cursor])
                }
            }
            ByzantineStrategy::BehaveCorrect => {
                let rules = enabled_as_correct(sys, ctx.config, b, ctx.variant);
                let rule = *rules.first()?;
                apply_unchecked(sys, ctx.config, b, rule, ctx.variant).ok().and_then(plain)
            }
            ByzantineStrategy::RandomState { percent, .. } => {
                if self.rng.gen_range(0..100) >= *percent {
                    return None;
                }
                let state = random_state(sys, b, &mut self.rng);
                plain(state)
            }
        }
    }

    /// Records that the last proposal was executed.
    pub fn commit(&mut self) {
        match &self.strategy {
            ByzantineStrategy::Scripted { .. } => self.cursor += 1,
            ByzantineStrategy::ReplayLoop { states, .. } => {
                self.cursor += 1;
                if self.cursor == states.len() {
                    self.cursor = 0;
                    self.cycles_done += 1;
                }
            }
            _ => {}
        }
    }
}

/// A uniformly random well-typed state for `p`.
pub fn random_state(sys: &WeightedSystem, p: ProcessId, rng: &mut impl Rng) -> ProcessState {
    let nbrs = sys.neighbors(p);
    let prnt = if p == sys.root() {
        None
    } else {
        let i = rng.gen_range(0..=nbrs.len());
        nbrs.get(i).map(|(q, _)| *q)
    };
    random_state_with_parent(sys, prnt, rng)
}

fn random_state_with_parent(
    sys: &WeightedSystem,
    prnt: Option<ProcessId>,
    rng: &mut impl Rng,
) -> ProcessState {
    let values = sys.metric().value_domain();
    let level = values[rng.gen_range(0..values.len())];
    ProcessState { prnt, level, dist: rng.gen_range(0..=sys.d()) }
}

/// A random configuration. Correct non-root processes get no parent with
/// probability `orphan_percent`/100, otherwise a uniform neighbor.
pub fn random_configuration(sys: &WeightedSystem, seed: u64, orphan_percent: u32) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = sys
        .processes()
        .map(|p| {
            if p == sys.root() {
                return random_state_with_parent(sys, None, &mut rng);
            }
            if sys.is_byzantine(p) {
                return random_state(sys, p, &mut rng);
            }
            let nbrs = sys.neighbors(p);
            let prnt = if nbrs.is_empty() || rng.gen_range(0..100) < orphan_percent {
                None
            } else {
                Some(nbrs[rng.gen_range(0..nbrs.len())].0)
            };
            random_state_with_parent(sys, prnt, &mut rng)
        })
        .collect();
    Configuration::new(states)
}

/// Quota ledger and waiting times.
#[derive(Debug, Clone)]
pub struct Scheduler {
    mode: DaemonMode,
    k: u32,
    quota: Vec<Vec<u32>>,
    wait: Vec<usize>,
}

impl Scheduler {
    pub fn new(n: usize, mode: DaemonMode, k: u32) -> Self {
        Scheduler { mode, k: k.max(1), quota: vec![vec![0; n]; n], wait: vec![0; n] }
    }

    pub fn wait(&self, p: ProcessId) -> usize {
        self.wait[p.0]
    }

    fn eligible(&self, p: ProcessId, enabled: &[bool]) -> bool {
        enabled
            .iter()
            .enumerate()
            .all(|(q, &e)| !e || q == p.0 || self.quota[p.0][q] < self.k)
    }

    /// Picks the processes to activate. `enabled` flags correct processes;
    /// `byz_ready` lists Byzantine processes with a proposal and whether it is
    /// urgent. Returns `None` when nobody can act.
    pub fn next_activation(
        &self,
        enabled: &[bool],
        byz_ready: &[(ProcessId, bool)],
        rng: &mut impl Rng,
    ) -> Option<Vec<ProcessId>> {
        let correct: Vec<ProcessId> =
            (0..enabled.len()).filter(|&i| enabled[i]).map(ProcessId).collect();
        if correct.is_empty() && byz_ready.is_empty() {
            return None;
        }
        let oldest = correct.iter().copied().max_by_key(|p| (self.wait[p.0], usize::MAX - p.0));
        let eligible: Vec<ProcessId> = correct
            .iter()
            .copied()
            .chain(byz_ready.iter().map(|(b, _)| *b))
            .filter(|&p| self.eligible(p, enabled))
            .collect();
        let urgent: Vec<ProcessId> = byz_ready
            .iter()
            .filter(|(b, u)| *u && eligible.contains(b))
            .map(|(b, _)| *b)
            .collect();
        if eligible.is_empty() {
            return Some(vec![oldest.expect("blocking implies a waiting process")]);
        }
        let aging_limit = enabled.len().max(1);
        match self.mode {
            DaemonMode::Central => {
                if let Some(&b) = urgent.first() {
                    return Some(vec![b]);
                }
                if let Some(o) = oldest.filter(|o| self.wait[o.0] >= aging_limit) {
                    return Some(vec![o]);
                }
                Some(vec![eligible[rng.gen_range(0..eligible.len())]])
            }
            DaemonMode::Distributed => {
                let mut picked = urgent;
                if let Some(o) = oldest {
                    if !picked.contains(&o) {
                        picked.push(o);
                    }
                }
                for &p in &eligible {
                    if !picked.contains(&p) && rng.gen_bool(0.5) {
                        picked.push(p);
                    }
                }
                if picked.is_empty() {
                    picked.push(eligible[rng.gen_range(0..eligible.len())]);
                }
                picked.sort();
                Some(picked)
            }
        }
    }

    /// Updates the ledger after `acted` executed from a configuration whose
    /// enabled correct processes are flagged in `enabled`.
    pub fn record(&mut self, acted: &[ProcessId], enabled: &[bool]) {
        ledger_update(&mut self.quota, &mut self.wait, acted, enabled);
    }
}

fn ledger_update(
    quota: &mut [Vec<u32>],
    wait: &mut [usize],
    acted: &[ProcessId],
    enabled: &[bool],
) {
    for q in 0..enabled.len() {
        let q_acted = acted.iter().any(|p| p.0 == q);
        if q_acted || !enabled[q] {
            for row in quota.iter_mut() {
                row[q] = 0;
            }
            wait[q] = 0;
        } else {
            for p in acted {
                quota[p.0][q] += 1;
            }
            wait[q] += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub activation: Vec<(ProcessId, Action)>,
    /// Correct processes enabled in the configuration before the step.
    pub enabled: Vec<ProcessId>,
    /// Processes whose state differs after the step.
    pub changed: Vec<ProcessId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxSteps,
    Quiescent,
    Predicate,
}

#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    pub variant: Variant,
    pub daemon: DaemonConfig,
    /// `configurations[i]` precedes `steps[i]`; one more configuration than
    /// steps.
    pub configurations: Vec<Configuration>,
    pub steps: Vec<TraceStep>,
    pub action_counts: Vec<u64>,
    pub stop: StopReason,
    pub ticks: u64,
}

impl ExecutionTrace {
    pub fn truncated(&self) -> bool {
        self.stop == StopReason::MaxSteps
    }

    pub fn last(&self) -> &Configuration {
        self.configurations.last().expect("at least the initial configuration")
    }

    /// Replays every step through the engine and checks the recorded
    /// successors.
    pub fn verify_replay(&self, sys: &WeightedSystem) -> Result<(), ReplayError> {
        for (i, st) in self.steps.iter().enumerate() {
            let next = step(sys, &self.configurations[i], &st.activation, self.variant)
                .map_err(|e| ReplayError::Engine(i, e))?;
            if next != self.configurations[i + 1] {
                return Err(ReplayError::Mismatch(i));
            }
        }
        Ok(())
    }

    /// Text form: a header, the initial configuration, one record per step.
    pub fn render(&self, sys: &WeightedSystem) -> String {
        let mut out = String::new();
        let d = &self.daemon;
        let _ = writeln!(
            out,
            "# rng={} seed={} variant={} mode={} k={} max_steps={} stop={:?}",
            RNG_NAME,
            d.seed,
            self.variant.label(),
            d.mode.label(),
            d.k,
            d.max_steps,
            self.stop
        );
        out.push_str("init");
        for p in sys.processes() {
            let _ = write!(out, " {}:{}", sys.name(p), format_state(sys, &self.configurations[0][p]));
        }
        out.push('\n');
        for (i, st) in self.steps.iter().enumerate() {
            let _ = write!(out, "step={i} activated=");
            let acts: Vec<String> = st
                .activation
                .iter()
                .map(|(p, a)| match a {
                    Action::Rule(r) => format!("{}:{}", sys.name(*p), r.label()),
                    Action::Byzantine(_) => format!("{}:BYZ", sys.name(*p)),
                })
                .collect();
            out.push_str(&acts.join(","));
            out.push_str(" changed=");
            let ch: Vec<String> = st
                .changed
                .iter()
                .map(|p| format!("{}:{}", sys.name(*p), format_state(sys, &self.configurations[i + 1][*p])))
                .collect();
            out.push_str(&ch.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {0}: {1}")]
    Engine(usize, EngineError),
    #[error("step {0}: recorded successor differs from the engine's")]
    Mismatch(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("initial configuration: {0}")]
    Initial(EngineError),
    #[error("strategy for {0:?}, which is not Byzantine")]
    StrategyForCorrect(ProcessId),
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
}

/// Executes the protocol from `initial` until a stop condition.
pub fn run(
    sys: &WeightedSystem,
    variant: Variant,
    daemon: &DaemonConfig,
    strategies: &[(ProcessId, ByzantineStrategy)],
    initial: Configuration,
    predicate: Option<&dyn Fn(&Configuration) -> bool>,
) -> Result<ExecutionTrace, RunError> {
    initial.validate(sys).map_err(RunError::Initial)?;
    let mut runners = Vec::new();
    for (p, s) in strategies {
        if !sys.is_byzantine(*p) {
            return Err(RunError::StrategyForCorrect(*p));
        }
        runners.push(StrategyRunner::new(*p, s.clone()));
    }
    // Byzantine processes without a strategy stay frozen.
    for &b in sys.byzantine() {
        if !runners.iter().any(|r| r.process == b) {
            runners.push(StrategyRunner::new(b, ByzantineStrategy::frozen()));
        }
    }
    let n = sys.n();
    let mut rng = ChaCha8Rng::seed_from_u64(daemon.seed);
    let mut sched = Scheduler::new(n, daemon.mode, daemon.k);
    let mut trace = ExecutionTrace {
        variant,
        daemon: daemon.clone(),
        configurations: vec![initial],
        steps: Vec::new(),
        action_counts: vec![0; n],
        stop: StopReason::MaxSteps,
        ticks: 0,
    };
    if predicate.is_some_and(|f| f(trace.last())) {
        trace.stop = StopReason::Predicate;
        return Ok(trace);
    }
    let mut idle = 0usize;
    let mut tick = 0u64;
    while trace.steps.len() < daemon.max_steps {
        let config = trace.last().clone();
        let rules: Vec<Vec<Rule>> = sys
            .processes()
            .map(|p| {
                if sys.is_byzantine(p) {
                    Vec::new()
                } else {
                    enabled_as_correct(sys, &config, p, variant)
                }
            })
            .collect();
        let enabled: Vec<bool> = rules.iter().map(|r| !r.is_empty()).collect();
        let ctx = ByzContext { system: sys, config: &config, variant, tick, enabled: &enabled };
        let proposals: Vec<(usize, Proposal)> = runners
            .iter_mut()
            .enumerate()
            .filter_map(|(i, r)| r.propose(&ctx).map(|p| (i, p)))
            .collect();
        tick += 1;
        let ready: Vec<(ProcessId, bool)> =
            proposals.iter().map(|(i, p)| (runners[*i].process, p.urgent)).collect();
        let Some(picked) = sched.next_activation(&enabled, &ready, &mut rng) else {
            idle += 1;
            if idle >= daemon.quiescence_window.max(1) {
                trace.stop = StopReason::Quiescent;
                break;
            }
            continue;
        };
        idle = 0;
        let mut activation = Vec::with_capacity(picked.len());
        for &p in &picked {
            if sys.is_byzantine(p) {
                let (i, prop) = proposals
                    .iter()
                    .find(|(i, _)| runners[*i].process == p)
                    .expect("picked Byzantine processes are ready");
                activation.push((p, Action::Byzantine(prop.state)));
                runners[*i].commit();
            } else {
                let options = &rules[p.0];
                let rule = options[rng.gen_range(0..options.len())];
                activation.push((p, Action::Rule(rule)));
            }
        }
        let next = step(sys, &config, &activation, variant)?;
        sched.record(&picked, &enabled);
        for &p in &picked {
            trace.action_counts[p.0] += 1;
        }
        let changed = sys.processes().filter(|&p| next[p] != config[p]).collect();
        trace.steps.push(TraceStep {
            activation,
            enabled: (0..n).filter(|&i| enabled[i]).map(ProcessId).collect(),
            changed,
        });
        trace.configurations.push(next);
        if predicate.is_some_and(|f| f(trace.last())) {
            trace.stop = StopReason::Predicate;
            break;
        }
    }
    trace.ticks = tick;
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleViolation {
    /// `process` acted more than `k` times while `waiting` was enabled.
    KBound { step: usize, process: ProcessId, waiting: ProcessId },
    /// `process` stayed enabled without acting for `horizon` steps.
    Starvation { step: usize, process: ProcessId },
    /// A central-daemon step activated several processes.
    NotCentral { step: usize },
}

/// Checks k-boundedness and the starvation proxy on a finite trace.
///
/// Actions of `p` are counted against `q` while `q` is enabled and does not
/// act; the count restarts whenever `q` acts or is disabled. Byzantine
/// processes count as actors but are never owed fairness.
pub fn validate_schedule(
    trace: &ExecutionTrace,
    n: usize,
    k: u32,
    horizon: usize,
) -> Result<(), ScheduleViolation> {
    let mut quota = vec![vec![0u32; n]; n];
    let mut wait = vec![0usize; n];
    for (i, st) in trace.steps.iter().enumerate() {
        if trace.daemon.mode == DaemonMode::Central && st.activation.len() != 1 {
            return Err(ScheduleViolation::NotCentral { step: i });
        }
        let mut enabled = vec![false; n];
        for p in &st.enabled {
            enabled[p.0] = true;
        }
        let acted: Vec<ProcessId> = st.activation.iter().map(|(p, _)| *p).collect();
        ledger_update(&mut quota, &mut wait, &acted, &enabled);
        for p in &acted {
            if let Some(q) = (0..n).find(|&q| quota[p.0][q] > k) {
                return Err(ScheduleViolation::KBound { step: i, process: *p, waiting: ProcessId(q) });
            }
        }
        if let Some(q) = (0..n).find(|&q| wait[q] >= horizon) {
            return Err(ScheduleViolation::Starvation { step: i, process: ProcessId(q) });
        }
    }
    Ok(())
}

/// Level of a process through a trace, one entry per configuration.
pub fn level_history(trace: &ExecutionTrace, p: ProcessId) -> Vec<MetricValue> {
    trace.configurations.iter().map(|c| c[p].level).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    fn synthetic(mode: DaemonMode, steps: &[(&[usize], &[usize])]) -> ExecutionTrace {
        let cfg = Configuration::new(Vec::new());
        ExecutionTrace {
            variant: Variant::Ssmax,
            daemon: DaemonConfig { mode, ..DaemonConfig::default() },
            configurations: vec![cfg; steps.len() + 1],
            steps: steps
                .iter()
                .map(|(acts, en)| TraceStep {
                    activation: acts.iter().map(|&p| (ProcessId(p), Action::Rule(Rule::R1))).collect(),
                    enabled: en.iter().map(|&p| ProcessId(p)).collect(),
                    changed: Vec::new(),
                })
                .collect(),
            action_counts: Vec::new(),
            stop: StopReason::MaxSteps,
            ticks: 0,
        }
    }

    #[test]
    fn alternation_is_one_bounded() {
        let ab: &[usize] = &[0, 1];
        let t = synthetic(DaemonMode::Central, &[(&[0], ab), (&[1], ab), (&[0], ab), (&[1], ab)]);
        assert_eq!(validate_schedule(&t, 2, 1, 100), Ok(()));
    }

    #[test]
    fn overtaking_is_caught() {
        let ab: &[usize] = &[0, 1];
        let t = synthetic(DaemonMode::Central, &[(&[0], ab), (&[0], ab), (&[0], ab), (&[1], ab)]);
        assert_eq!(
            validate_schedule(&t, 2, 2, 100),
            Err(ScheduleViolation::KBound { step: 2, process: ProcessId(0), waiting: ProcessId(1) })
        );
    }

    #[test]
    fn starvation_is_caught() {
        let n = 2;
        let horizon = 10 * n;
        let steps: Vec<(&[usize], &[usize])> = vec![(&[0], &[0, 1]); horizon];
        let t = synthetic(DaemonMode::Distributed, &steps);
        assert!(matches!(
            validate_schedule(&t, n, u32::MAX, horizon),
            Err(ScheduleViolation::Starvation { process: ProcessId(1), .. })
        ));
    }

    #[test]
    fn central_quota_forces_alternation() {
        let sched_rounds = |k| {
            let mut s = Scheduler::new(2, DaemonMode::Central, k);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let en = [true, true];
            let mut seq = Vec::new();
            for _ in 0..12 {
                let p = s.next_activation(&en, &[], &mut rng).unwrap();
                s.record(&p, &en);
                seq.push(p[0].0);
            }
            seq
        };
        let seq = sched_rounds(1);
        assert!(seq.windows(2).all(|w| w[0] != w[1]), "{seq:?}");
    }

    #[test]
    fn quiescent_when_nothing_can_act() {
        let s = Scheduler::new(3, DaemonMode::Distributed, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(s.next_activation(&[false; 3], &[], &mut rng), None);
    }

    #[test]
    fn zero_steps_gives_initial_only() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let init = sc.initial_configuration(&sys).unwrap();
        let daemon = DaemonConfig { max_steps: 0, ..sc.daemon.clone() };
        let t = run(&sys, Variant::Ssmax, &daemon, &[], init.clone(), None).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.configurations, vec![init]);
    }

    #[test]
    fn runs_are_deterministic() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let init = random_configuration(&sys, 9, 10);
        let daemon = DaemonConfig { mode: DaemonMode::Distributed, k: 2, seed: 5, max_steps: 500, quiescence_window: 4 };
        let strat = vec![
            (sys.id("b1").unwrap(), ByzantineStrategy::RandomState { seed: 1, percent: 30 }),
            (sys.id("b2").unwrap(), ByzantineStrategy::RandomState { seed: 2, percent: 30 }),
        ];
        let a = run(&sys, Variant::Ssmax, &daemon, &strat, init.clone(), None).unwrap();
        let b = run(&sys, Variant::Ssmax, &daemon, &strat, init, None).unwrap();
        assert_eq!(a.render(&sys), b.render(&sys));
        assert_eq!(a.steps, b.steps);
        a.verify_replay(&sys).unwrap();
        assert_eq!(validate_schedule(&a, sys.n(), 2, daemon.horizon(sys.n())), Ok(()));
    }

    #[test]
    fn scripted_empty_always_passes() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let cfg = sc.initial_configuration(&sys).unwrap();
        let en = vec![false; sys.n()];
        let ctx = ByzContext { system: &sys, config: &cfg, variant: Variant::Ssmax, tick: 1000, enabled: &en };
        let mut r = StrategyRunner::new(sys.id("b1").unwrap(), ByzantineStrategy::frozen());
        assert_eq!(r.propose(&ctx), None);
    }

    #[test]
    fn behave_correct_matches_engine() {
        let sc = library::entry("fig7").unwrap();
        let sys = sc.build_system().unwrap();
        let mut cfg = sc.initial_configuration(&sys).unwrap();
        let b1 = sys.id("b1").unwrap();
        cfg[b1] = ProcessState { prnt: Some(sys.id("p3").unwrap()), level: MetricValue(6), dist: 0 };
        let en = vec![false; sys.n()];
        let ctx = ByzContext { system: &sys, config: &cfg, variant: Variant::Ssmax, tick: 0, enabled: &en };
        let mut r = StrategyRunner::new(b1, ByzantineStrategy::BehaveCorrect);
        let prop = r.propose(&ctx).unwrap();
        let rule = enabled_as_correct(&sys, &cfg, b1, Variant::Ssmax)[0];
        assert_eq!(prop.state, apply_unchecked(&sys, &cfg, b1, rule, Variant::Ssmax).unwrap());
    }
}
