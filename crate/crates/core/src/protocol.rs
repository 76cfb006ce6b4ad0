//! Guarded rules of the maximum-metric tree protocol and the legacy variant
//! without distance resets, with simultaneous-step semantics.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::metric::MetricValue;
use crate::system::{ProcessId, WeightedSystem};

/// O-variables of one process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcessState {
    pub prnt: Option<ProcessId>,
    pub level: MetricValue,
    pub dist: u32,
}

/// One state per process, indexed by [`ProcessId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    states: Vec<ProcessState>,
}

impl Configuration {
    pub fn new(states: Vec<ProcessState>) -> Self {
        Configuration { states }
    }

    pub fn states(&self) -> &[ProcessState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Checks that every state is well typed for its process.
    pub fn validate(&self, sys: &WeightedSystem) -> Result<(), EngineError> {
        if self.states.len() != sys.n() {
            return Err(EngineError::WrongSize { expected: sys.n(), got: self.states.len() });
        }
        for p in sys.processes() {
            if !well_typed(sys, p, &self[p]) {
                return Err(EngineError::IllTyped(p));
            }
        }
        Ok(())
    }
}

impl Index<ProcessId> for Configuration {
    type Output = ProcessState;
    fn index(&self, p: ProcessId) -> &ProcessState {
        &self.states[p.0]
    }
}

impl IndexMut<ProcessId> for Configuration {
    fn index_mut(&mut self, p: ProcessId) -> &mut ProcessState {
        &mut self.states[p.0]
    }
}

/// Deliberate protocol defects used to check that verification catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// R1 fires only on distance inconsistency, never on a stale level.
    DropR1LevelClause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Ssmax,
    /// Reconstruction of the earlier protocol: the distance always follows
    /// the parent's plus one, and R1 repairs any distance mismatch.
    Legacy,
    Mutant(Mutation),
}

impl Variant {
    pub fn is_legacy(self) -> bool {
        self == Variant::Legacy
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Ssmax => "ssmax",
            Variant::Legacy => "legacy",
            Variant::Mutant(Mutation::DropR1LevelClause) => "mutant-r1-no-level",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Rr,
    R1,
    R2,
    R3,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Rr => "Rr",
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
        }
    }
}

/// What an activated process does in a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Rule(Rule),
    /// A Byzantine process writes an arbitrary well-typed state.
    Byzantine(ProcessState),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("rule {rule:?} is not enabled at process {process:?}")]
    NotEnabled { process: ProcessId, rule: Rule },
    #[error("process {0:?} is Byzantine and has no guards")]
    Byzantine(ProcessId),
    #[error("process {0:?} is correct and cannot take a Byzantine action")]
    NotByzantine(ProcessId),
    #[error("state of process {0:?} is not well typed")]
    IllTyped(ProcessId),
    #[error("process {0:?} is activated twice in one step")]
    DuplicateActivation(ProcessId),
    #[error("configuration has {got} states for {expected} processes")]
    WrongSize { expected: usize, got: usize },
    #[error("choose called with no candidate at process {0:?}")]
    NoCandidate(ProcessId),
}

/// Whether `state` is a legal value for `p`'s variables.
///
/// A correct non-root process may hold no parent only as a corrupted
/// initial value.
pub fn well_typed(sys: &WeightedSystem, p: ProcessId, state: &ProcessState) -> bool {
    let parent_ok = match state.prnt {
        None => true,
        Some(q) => p != sys.root() && sys.is_neighbor(p, q),
    };
    parent_ok && sys.metric().contains_value(state.level) && state.dist <= sys.d()
}

fn dist_following(
    sys: &WeightedSystem,
    parent: &ProcessState,
    own_level: MetricValue,
    variant: Variant,
) -> u32 {
    if !variant.is_legacy() && parent.level != own_level {
        0
    } else {
        (parent.dist + 1).min(sys.d())
    }
}

/// Distance `v` should hold given its parent, or `None` without a parent.
pub fn current_dist(
    sys: &WeightedSystem,
    config: &Configuration,
    v: ProcessId,
    variant: Variant,
) -> Option<u32> {
    let p = config[v].prnt?;
    Some(dist_following(sys, &config[p], config[v].level, variant))
}

/// Round-robin choice: the first candidate strictly after `current` in
/// `v`'s cyclic neighbor order.
pub fn choose(
    sys: &WeightedSystem,
    v: ProcessId,
    candidates: &[ProcessId],
    current: Option<ProcessId>,
) -> Result<ProcessId, EngineError> {
    let order = sys.neighbors(v);
    let start = current.and_then(|c| order.iter().position(|(q, _)| *q == c));
    let len = order.len();
    let first = start.map_or(0, |i| i + 1);
    (0..len)
        .map(|i| order[(first + i) % len].0)
        .find(|q| candidates.contains(q))
        .ok_or(EngineError::NoCandidate(v))
}

/// Neighbors of `v` that may be chosen as a parent.
fn eligible_parents(sys: &WeightedSystem, config: &Configuration, v: ProcessId) -> Vec<ProcessId> {
    let limit = sys.d().saturating_sub(1);
    sys.neighbors(v)
        .iter()
        .filter(|(q, _)| config[*q].dist < limit)
        .map(|(q, _)| *q)
        .collect()
}

/// Parent candidates for R2. A process without a parent falls back to any
/// neighbor, since its own distance never grows to free it otherwise.
fn reattach_candidates(sys: &WeightedSystem, config: &Configuration, v: ProcessId) -> Vec<ProcessId> {
    let open = eligible_parents(sys, config, v);
    if open.is_empty() && config[v].prnt.is_none() {
        sys.neighbors(v).iter().map(|(q, _)| *q).collect()
    } else {
        open
    }
}

/// Rules whose guards hold at correct process `v`.
pub fn enabled(
    sys: &WeightedSystem,
    config: &Configuration,
    v: ProcessId,
    variant: Variant,
) -> Result<Vec<Rule>, EngineError> {
    if sys.is_byzantine(v) {
        return Err(EngineError::Byzantine(v));
    }
    Ok(enabled_as_correct(sys, config, v, variant))
}

/// Guard evaluation without the Byzantine check, used to let a Byzantine
/// process imitate a correct one.
pub fn enabled_as_correct(
    sys: &WeightedSystem,
    config: &Configuration,
    v: ProcessId,
    variant: Variant,
) -> Vec<Rule> {
    let m = sys.metric();
    let s = config[v];
    let mut rules = Vec::new();
    if v == sys.root() {
        if s.level != m.mr() || s.dist != 0 {
            rules.push(Rule::Rr);
        }
        return rules;
    }
    let d = sys.d();
    let cd = current_dist(sys, config, v, variant);
    if let (Some(p), Some(cd)) = (s.prnt, cd) {
        let w = sys.weight(v, p).expect("typed parent");
        let stale_level = s.level != m.met(config[p].level, w);
        let bad_dist = if variant.is_legacy() { s.dist != cd } else { s.dist < cd };
        let r1 = match variant {
            Variant::Mutant(Mutation::DropR1LevelClause) => bad_dist,
            _ => bad_dist || stale_level,
        };
        if r1 {
            rules.push(Rule::R1);
        }
    }
    if cd.is_none() && !reattach_candidates(sys, config, v).is_empty() {
        rules.push(Rule::R2);
    }
    let open = eligible_parents(sys, config, v);
    if !open.is_empty() {
        let needs_new_parent = match (variant.is_legacy(), cd) {
            (_, None) => false,
            (true, Some(_)) => s.dist == d,
            (false, Some(cd)) => s.dist == d || s.dist > cd,
        };
        if needs_new_parent {
            rules.push(Rule::R2);
        }
        let better = open.iter().any(|&q| {
            let w = sys.weight(v, q).expect("neighbor");
            m.lt(s.level, m.met(config[q].level, w))
        });
        if better {
            rules.push(Rule::R3);
        }
    }
    rules
}

/// New state of `v` after executing `rule`, reading only `config`.
pub fn apply_rule(
    sys: &WeightedSystem,
    config: &Configuration,
    v: ProcessId,
    rule: Rule,
    variant: Variant,
) -> Result<ProcessState, EngineError> {
    if !enabled(sys, config, v, variant)?.contains(&rule) {
        return Err(EngineError::NotEnabled { process: v, rule });
    }
    apply_unchecked(sys, config, v, rule, variant)
}

/// Statement evaluation without guard checking.
pub fn apply_unchecked(
    sys: &WeightedSystem,
    config: &Configuration,
    v: ProcessId,
    rule: Rule,
    variant: Variant,
) -> Result<ProcessState, EngineError> {
    let m = sys.metric();
    let s = config[v];
    let attach = |p: ProcessId| {
        let w = sys.weight(v, p).expect("neighbor");
        let level = m.met(config[p].level, w);
        ProcessState { prnt: Some(p), level, dist: dist_following(sys, &config[p], level, variant) }
    };
    match rule {
        Rule::Rr => Ok(ProcessState { prnt: None, level: m.mr(), dist: 0 }),
        Rule::R1 => Ok(attach(s.prnt.ok_or(EngineError::NotEnabled { process: v, rule })?)),
        Rule::R2 => {
            let open = reattach_candidates(sys, config, v);
            Ok(attach(choose(sys, v, &open, s.prnt)?))
        }
        Rule::R3 => {
            let open = eligible_parents(sys, config, v);
            let offer = |q: ProcessId| m.met(config[q].level, sys.weight(v, q).expect("neighbor"));
            let best = open
                .iter()
                .map(|&q| offer(q))
                .reduce(|a, b| m.max(a, b))
                .ok_or(EngineError::NoCandidate(v))?;
            let top: Vec<_> = open.into_iter().filter(|&q| offer(q) == best).collect();
            Ok(attach(choose(sys, v, &top, s.prnt)?))
        }
    }
}

/// Executes all actions of `activation` simultaneously against `config`.
pub fn step(
    sys: &WeightedSystem,
    config: &Configuration,
    activation: &[(ProcessId, Action)],
    variant: Variant,
) -> Result<Configuration, EngineError> {
    let mut next = config.clone();
    let mut seen = vec![false; sys.n()];
    for &(p, action) in activation {
        if std::mem::replace(&mut seen[p.0], true) {
            return Err(EngineError::DuplicateActivation(p));
        }
        next[p] = match action {
            Action::Rule(rule) => apply_rule(sys, config, p, rule, variant)?,
            Action::Byzantine(state) => {
                if !sys.is_byzantine(p) {
                    return Err(EngineError::NotByzantine(p));
                }
                if !well_typed(sys, p, &state) {
                    return Err(EngineError::IllTyped(p));
                }
                state
            }
        };
    }
    Ok(next)
}

/// Renders a state as `(prnt,level,dist)` with `-` for no parent.
pub fn format_state(sys: &WeightedSystem, s: &ProcessState) -> String {
    let prnt = s.prnt.map_or("-", |p| sys.name(p));
    format!("({},{},{})", prnt, sys.metric().format_value(s.level), s.dist)
}

/// `name:(prnt,level,dist)` for every process, space separated.
pub fn format_configuration(sys: &WeightedSystem, cfg: &Configuration) -> String {
    sys.processes()
        .map(|p| format!("{}:{}", sys.name(p), format_state(sys, &cfg[p])))
        .collect::<Vec<_>>()
        .join(" ")
}
