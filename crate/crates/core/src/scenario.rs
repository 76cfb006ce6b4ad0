//! Scenario files: a line-oriented description of a system, a protocol
//! variant, a daemon, Byzantine strategies, an initial configuration and the
//! analyses to run.
//!
//! ```text
//! [system]
//! nodes = r a b
//! root = r
//! byzantine = b
//! D = 4
//! [metric]
//! metric = met
//! [edges]
//! r a 1
//! a b 1
//! [adversary]
//! b.kind = replay_loop
//! b.states = (-,3,0) (-,0,0)
//! [init]
//! mode = explicit
//! r = (-,3,0)
//! ```
//!
//! Unknown sections and keys are rejected; errors carry line numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::{AreaKind, AreaSpec};
use crate::metric::{MetricKind, MetricSpec, MetricValue, TableMetric, Weight};
use crate::protocol::{Configuration, Mutation, ProcessState, Variant};
use crate::scheduler::{random_configuration, ByzantineStrategy, DaemonConfig, DaemonMode};
use crate::system::{ProcessId, SystemDescription, SystemError, WeightedSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Missing(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("initial configuration: {0}")]
    Init(String),
    #[error("adversary: {0}")]
    Adversary(String),
}

fn perr(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, message: message.into() }
}

/// A process state written with process names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpec {
    pub prnt: Option<String>,
    pub level: MetricValue,
    pub dist: u32,
}

impl StateSpec {
    pub fn orphan(level: MetricValue, dist: u32) -> Self {
        StateSpec { prnt: None, level, dist }
    }

    pub fn with_parent(prnt: &str, level: MetricValue, dist: u32) -> Self {
        StateSpec { prnt: Some(prnt.into()), level, dist }
    }

    fn render(&self, metric: &MetricSpec) -> String {
        format!(
            "({},{},{})",
            self.prnt.as_deref().unwrap_or("-"),
            metric.format_value(self.level),
            self.dist
        )
    }

    fn parse(s: &str, metric: &MetricSpec) -> Result<Self, String> {
        let inner = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| format!("state `{s}` must look like (prnt,level,dist)"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("state `{s}` must have three fields"));
        }
        let prnt = match parts[0] {
            "-" | "_" => None,
            name => Some(name.to_string()),
        };
        let level = metric.parse_value(parts[1]).map_err(|e| e.to_string())?;
        let dist = parts[2].parse().map_err(|_| format!("bad dist `{}`", parts[2]))?;
        Ok(StateSpec { prnt, level, dist })
    }

    fn resolve(&self, sys: &WeightedSystem) -> Result<ProcessState, String> {
        let prnt = match &self.prnt {
            None => None,
            Some(n) => Some(sys.id(n).ok_or_else(|| format!("unknown process `{n}`"))?),
        };
        Ok(ProcessState { prnt, level: self.level, dist: self.dist })
    }
}

/// A Byzantine strategy written with process names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpec {
    Scripted { script: Vec<(u64, StateSpec)> },
    MimicRoot,
    ReplayLoop { states: Vec<StateSpec>, watch: Option<Vec<String>>, cycles: Option<u64> },
    BehaveCorrect,
    RandomState { seed: u64, percent: u32 },
}

impl StrategySpec {
    fn kind(&self) -> &'static str {
        match self {
            StrategySpec::Scripted { .. } => "scripted",
            StrategySpec::MimicRoot => "mimic_root",
            StrategySpec::ReplayLoop { .. } => "replay_loop",
            StrategySpec::BehaveCorrect => "behave_correct",
            StrategySpec::RandomState { .. } => "random_state",
        }
    }

    fn resolve(&self, sys: &WeightedSystem) -> Result<ByzantineStrategy, String> {
        Ok(match self {
            StrategySpec::Scripted { script } => ByzantineStrategy::Scripted {
                script: script
                    .iter()
                    .map(|(t, s)| Ok((*t, s.resolve(sys)?)))
                    .collect::<Result<_, String>>()?,
            },
            StrategySpec::MimicRoot => ByzantineStrategy::MimicRoot,
            StrategySpec::ReplayLoop { states, watch, cycles } => ByzantineStrategy::ReplayLoop {
                states: states.iter().map(|s| s.resolve(sys)).collect::<Result<_, _>>()?,
                watch: match watch {
                    None => None,
                    Some(w) => Some(
                        w.iter()
                            .map(|n| sys.id(n).ok_or_else(|| format!("unknown process `{n}`")))
                            .collect::<Result<_, _>>()?,
                    ),
                },
                cycles: *cycles,
            },
            StrategySpec::BehaveCorrect => ByzantineStrategy::BehaveCorrect,
            StrategySpec::RandomState { seed, percent } => {
                ByzantineStrategy::RandomState { seed: *seed, percent: *percent }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Every process is listed.
    Explicit,
    /// Seeded random configuration, then listed overrides.
    Random,
    /// Seeded random configuration where the root and every Byzantine
    /// process hold `(-, mr, 0)`, then listed overrides.
    Mimic,
}

impl InitMode {
    fn label(self) -> &'static str {
        match self {
            InitMode::Explicit => "explicit",
            InitMode::Random => "random",
            InitMode::Mimic => "mimic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitSpec {
    pub mode: InitMode,
    pub seed: u64,
    pub orphan_percent: u32,
    pub states: Vec<(String, StateSpec)>,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec { mode: InitMode::Random, seed: 0, orphan_percent: 10, states: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AreaName {
    SB,
    SBStar,
    Radius(usize),
    Explicit(Vec<String>),
}

impl fmt::Display for AreaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AreaName::SB => write!(f, "sb"),
            AreaName::SBStar => write!(f, "sb_star"),
            AreaName::Radius(c) => write!(f, "radius:{c}"),
            AreaName::Explicit(v) => write!(f, "set:{}", v.join(",")),
        }
    }
}

impl FromStr for AreaName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sb" => Ok(AreaName::SB),
            "sb_star" | "sb*" => Ok(AreaName::SBStar),
            _ => {
                if let Some(c) = s.strip_prefix("radius:") {
                    c.parse().map(AreaName::Radius).map_err(|_| format!("bad radius `{c}`"))
                } else if let Some(v) = s.strip_prefix("set:") {
                    Ok(AreaName::Explicit(
                        v.split(',').filter(|x| !x.is_empty()).map(String::from).collect(),
                    ))
                } else {
                    Err(format!("unknown area `{s}` (sb, sb_star, radius:N, set:a,b)"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisSpec {
    pub areas: Vec<AreaName>,
    pub bound_check: bool,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec { areas: vec![AreaName::SBStar], bound_check: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub system: SystemDescription,
    pub variant: Variant,
    pub daemon: DaemonConfig,
    pub adversary: Vec<(String, StrategySpec)>,
    pub init: InitSpec,
    pub analysis: AnalysisSpec,
}

pub fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "ssmax" => Ok(Variant::Ssmax),
        "legacy" => Ok(Variant::Legacy),
        "mutant-r1-no-level" => Ok(Variant::Mutant(Mutation::DropR1LevelClause)),
        _ => Err(format!("unknown variant `{s}` (ssmax, legacy, mutant-r1-no-level)")),
    }
}

pub fn parse_mode(s: &str) -> Result<DaemonMode, String> {
    match s {
        "central" => Ok(DaemonMode::Central),
        "distributed" => Ok(DaemonMode::Distributed),
        _ => Err(format!("unknown daemon mode `{s}` (central, distributed)")),
    }
}

impl Scenario {
    /// A scenario with default run settings around a system.
    pub fn new(system: SystemDescription) -> Self {
        Scenario {
            system,
            variant: Variant::Ssmax,
            daemon: DaemonConfig::default(),
            adversary: Vec::new(),
            init: InitSpec::default(),
            analysis: AnalysisSpec::default(),
        }
    }

    pub fn build_system(&self) -> Result<WeightedSystem, ScenarioError> {
        Ok(WeightedSystem::build(&self.system)?)
    }

    pub fn initial_configuration(&self, sys: &WeightedSystem) -> Result<Configuration, ScenarioError> {
        let init = &self.init;
        let mut cfg = match init.mode {
            InitMode::Explicit => {
                let given: BTreeSet<&str> = init.states.iter().map(|(n, _)| n.as_str()).collect();
                if let Some(missing) = sys.names().iter().find(|n| !given.contains(n.as_str())) {
                    return Err(ScenarioError::Init(format!("no state for `{missing}`")));
                }
                random_configuration(sys, 0, 0)
            }
            InitMode::Random => random_configuration(sys, init.seed, init.orphan_percent),
            InitMode::Mimic => {
                let mut c = random_configuration(sys, init.seed, init.orphan_percent);
                let top = ProcessState { prnt: None, level: sys.metric().mr(), dist: 0 };
                c[sys.root()] = top;
                for &b in sys.byzantine() {
                    c[b] = top;
                }
                c
            }
        };
        for (name, spec) in &init.states {
            let p = sys.id(name).ok_or_else(|| ScenarioError::Init(format!("unknown process `{name}`")))?;
            cfg[p] = spec.resolve(sys).map_err(ScenarioError::Init)?;
        }
        cfg.validate(sys).map_err(|e| ScenarioError::Init(e.to_string()))?;
        Ok(cfg)
    }

    pub fn strategies(&self, sys: &WeightedSystem) -> Result<Vec<(ProcessId, ByzantineStrategy)>, ScenarioError> {
        self.adversary
            .iter()
            .map(|(name, spec)| {
                let p = sys
                    .id(name)
                    .ok_or_else(|| ScenarioError::Adversary(format!("unknown process `{name}`")))?;
                if !sys.is_byzantine(p) {
                    return Err(ScenarioError::Adversary(format!("`{name}` is not Byzantine")));
                }
                Ok((p, spec.resolve(sys).map_err(ScenarioError::Adversary)?))
            })
            .collect()
    }

    pub fn areas(&self, sys: &WeightedSystem) -> Result<Vec<AreaSpec>, ScenarioError> {
        self.analysis
            .areas
            .iter()
            .map(|a| {
                let kind = match a {
                    AreaName::SB => AreaKind::SB,
                    AreaName::SBStar => AreaKind::SBStar,
                    AreaName::Radius(c) => AreaKind::Radius(*c),
                    AreaName::Explicit(names) => AreaKind::Explicit(
                        names
                            .iter()
                            .map(|n| sys.id(n).ok_or_else(|| ScenarioError::Missing(format!("unknown process `{n}` in areas"))))
                            .collect::<Result<_, _>>()?,
                    ),
                };
                Ok(AreaSpec::resolve(sys, kind))
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Parser::read(text)?.interpret()
    }

    pub fn to_text(&self) -> String {
        let m = &self.system.metric;
        let mut out = String::new();
        let sys = &self.system;
        let _ = writeln!(out, "[system]");
        let _ = writeln!(out, "nodes = {}", sys.nodes.join(" "));
        let _ = writeln!(out, "root = {}", sys.root);
        if !sys.byzantine.is_empty() {
            let _ = writeln!(out, "byzantine = {}", sys.byzantine.join(" "));
        }
        if let Some(d) = sys.d {
            let _ = writeln!(out, "D = {d}");
        }
        let _ = writeln!(out, "\n[metric]");
        if let MetricKind::Table(t) = m.kind() {
            let _ = writeln!(out, "metric = table");
            let join = |v: &[MetricValue]| v.iter().map(|x| x.0.to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "order = {}", join(&t.order()));
            let _ = writeln!(out, "values = {}", join(t.values()));
            let ws: Vec<String> = t.weights().iter().map(|w| w.0.to_string()).collect();
            let _ = writeln!(out, "weights = {}", ws.join(" "));
            for ((a, w), r) in t.table() {
                let _ = writeln!(out, "met.{}.{} = {}", a.0, w.0, r.0);
            }
        } else {
            let _ = writeln!(out, "metric = {m}");
        }
        let _ = writeln!(out, "\n[edges]");
        for (u, v, w) in &sys.edges {
            let _ = writeln!(out, "{u} {v} {}", m.format_weight(*w));
        }
        if !sys.neighbor_order.is_empty() {
            let _ = writeln!(out, "\n[order]");
            for (p, order) in &sys.neighbor_order {
                let _ = writeln!(out, "{p} = {}", order.join(" "));
            }
        }
        let _ = writeln!(out, "\n[protocol]\nvariant = {}", self.variant.label());
        let d = &self.daemon;
        let _ = writeln!(
            out,
            "\n[daemon]\nmode = {}\nk = {}\nseed = {}\nmax_steps = {}\nquiescence_window = {}",
            d.mode.label(),
            d.k,
            d.seed,
            d.max_steps,
            d.quiescence_window
        );
        if !self.adversary.is_empty() {
            let _ = writeln!(out, "\n[adversary]");
            for (b, s) in &self.adversary {
                let _ = writeln!(out, "{b}.kind = {}", s.kind());
                match s {
                    StrategySpec::Scripted { script } => {
                        if !script.is_empty() {
                            let items: Vec<String> =
                                script.iter().map(|(t, st)| format!("{t}:{}", st.render(m))).collect();
                            let _ = writeln!(out, "{b}.script = {}", items.join(" "));
                        }
                    }
                    StrategySpec::ReplayLoop { states, watch, cycles } => {
                        let items: Vec<String> = states.iter().map(|st| st.render(m)).collect();
                        let _ = writeln!(out, "{b}.states = {}", items.join(" "));
                        if let Some(w) = watch {
                            let _ = writeln!(out, "{b}.watch = {}", w.join(" "));
                        }
                        if let Some(c) = cycles {
                            let _ = writeln!(out, "{b}.cycles = {c}");
                        }
                    }
                    StrategySpec::RandomState { seed, percent } => {
                        let _ = writeln!(out, "{b}.seed = {seed}\n{b}.percent = {percent}");
                    }
                    StrategySpec::MimicRoot | StrategySpec::BehaveCorrect => {}
                }
            }
        }
        let i = &self.init;
        let _ = writeln!(
            out,
            "\n[init]\nmode = {}\nseed = {}\norphan_percent = {}",
            i.mode.label(),
            i.seed,
            i.orphan_percent
        );
        for (p, st) in &i.states {
            let _ = writeln!(out, "{p} = {}", st.render(m));
        }
        let areas: Vec<String> = self.analysis.areas.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(
            out,
            "\n[analysis]\nareas = {}\nbound_check = {}",
            areas.join(" "),
            if self.analysis.bound_check { "on" } else { "off" }
        );
        out
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Scenario {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        Scenario::parse(s)
    }
}

const SECTIONS: [&str; 9] =
    ["system", "metric", "edges", "order", "protocol", "daemon", "adversary", "init", "analysis"];

/// Raw `key = value` entries of one section, with line numbers.
#[derive(Default)]
struct Section {
    header_line: usize,
    entries: Vec<(usize, String, String)>,
    lines: Vec<(usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        let i = self.entries.iter().position(|(_, k, _)| k == key)?;
        let (l, _, v) = self.entries.remove(i);
        Some((l, v))
    }

    fn reject_rest(&self, name: &str) -> Result<(), ScenarioError> {
        match self.entries.first() {
            Some((l, k, _)) => Err(perr(*l, format!("unknown key `{k}` in [{name}]"))),
            None => Ok(()),
        }
    }
}

struct Parser {
    sections: BTreeMap<String, Section>,
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ScenarioError> {
    v.trim().parse().map_err(|_| perr(line, format!("`{key}` expects a number, got `{v}`")))
}

fn words(v: &str) -> Vec<String> {
    v.split_whitespace().map(String::from).collect()
}

/// One adversary's keys: process name, first line, `key -> (line, value)`.
type AdversaryGroup = (String, usize, BTreeMap<String, (usize, String)>);

impl Parser {
    fn read(text: &str) -> Result<Self, ScenarioError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(perr(line, format!("unknown section [{name}]")));
                }
                if sections.contains_key(&name) {
                    return Err(perr(line, format!("section [{name}] repeated")));
                }
                sections.insert(name.clone(), Section { header_line: line, ..Section::default() });
                current = Some(name);
                continue;
            }
            let name = current.as_ref().ok_or_else(|| perr(line, "content before any section"))?;
            let sec = sections.get_mut(name).expect("section exists");
            if name == "edges" {
                sec.lines.push((line, content.to_string()));
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| perr(line, format!("expected `key = value`, got `{content}`")))?;
            let k = k.trim().to_string();
            if sec.entries.iter().any(|(_, key, _)| *key == k) {
                return Err(perr(line, format!("key `{k}` repeated")));
            }
            sec.entries.push((line, k, v.trim().to_string()));
        }
        Ok(Parser { sections })
    }

    fn section(&mut self, name: &str) -> Section {
        self.sections.remove(name).unwrap_or_default()
    }

    fn interpret(mut self) -> Result<Scenario, ScenarioError> {
        let metric = self.metric()?;
        let system = self.system(metric)?;
        let m = &system.metric;
        let known: BTreeSet<&str> = system.nodes.iter().map(String::as_str).collect();
        let check_name = |line: usize, n: &str| {
            if known.contains(n) {
                Ok(())
            } else {
                Err(perr(line, format!("unknown process `{n}`")))
            }
        };

        let mut prot = self.section("protocol");
        let variant = match prot.take("variant") {
            Some((l, v)) => parse_variant(&v).map_err(|e| perr(l, e))?,
            None => Variant::Ssmax,
        };
        prot.reject_rest("protocol")?;

        let mut ds = self.section("daemon");
        let mut daemon = DaemonConfig::default();
        if let Some((l, v)) = ds.take("mode") {
            daemon.mode = parse_mode(&v).map_err(|e| perr(l, e))?;
        }
        if let Some((l, v)) = ds.take("k") {
            daemon.k = num(l, "k", &v)?;
            if daemon.k == 0 {
                return Err(perr(l, "k must be positive"));
            }
        }
        if let Some((l, v)) = ds.take("seed") {
            daemon.seed = num(l, "seed", &v)?;
        }
        if let Some((l, v)) = ds.take("max_steps") {
            daemon.max_steps = num(l, "max_steps", &v)?;
        }
        if let Some((l, v)) = ds.take("quiescence_window") {
            daemon.quiescence_window = num(l, "quiescence_window", &v)?;
        }
        ds.reject_rest("daemon")?;

        let adversary = self.adversary(m, &check_name, &system)?;

        let mut is = self.section("init");
        let mut init = InitSpec::default();
        if let Some((l, v)) = is.take("mode") {
            init.mode = match v.as_str() {
                "explicit" => InitMode::Explicit,
                "random" => InitMode::Random,
                "mimic" => InitMode::Mimic,
                _ => return Err(perr(l, format!("unknown init mode `{v}` (explicit, random, mimic)"))),
            };
        }
        if let Some((l, v)) = is.take("seed") {
            init.seed = num(l, "seed", &v)?;
        }
        if let Some((l, v)) = is.take("orphan_percent") {
            init.orphan_percent = num(l, "orphan_percent", &v)?;
        }
        for (l, k, v) in std::mem::take(&mut is.entries) {
            check_name(l, &k)?;
            let st = StateSpec::parse(&v, m).map_err(|e| perr(l, e))?;
            if let Some(p) = &st.prnt {
                check_name(l, p)?;
            }
            init.states.push((k, st));
        }

        let mut an = self.section("analysis");
        let mut analysis = AnalysisSpec::default();
        if let Some((l, v)) = an.take("areas") {
            analysis.areas = v
                .split_whitespace()
                .map(|a| a.parse::<AreaName>().map_err(|e| perr(l, e)))
                .collect::<Result<_, _>>()?;
        }
        if let Some((l, v)) = an.take("bound_check") {
            analysis.bound_check = match v.as_str() {
                "on" | "true" | "yes" => true,
                "off" | "false" | "no" => false,
                _ => return Err(perr(l, "bound_check expects on or off")),
            };
        }
        an.reject_rest("analysis")?;

        Ok(Scenario { system, variant, daemon, adversary, init, analysis })
    }

    fn metric(&mut self) -> Result<MetricSpec, ScenarioError> {
        let mut sec = self.section("metric");
        let (line, v) = sec
            .take("metric")
            .ok_or_else(|| ScenarioError::Missing("[metric] needs `metric = ...`".into()))?;
        if v != "table" {
            let spec = v.parse::<MetricSpec>().map_err(|e| perr(line, e.to_string()))?;
            sec.reject_rest("metric")?;
            return Ok(spec);
        }
        let ints = |l: usize, key: &str, v: &str| -> Result<Vec<u32>, ScenarioError> {
            v.split_whitespace().map(|x| num(l, key, x)).collect()
        };
        let (l, order) = sec.take("order").ok_or_else(|| perr(line, "table metric needs `order`"))?;
        let order: Vec<MetricValue> = ints(l, "order", &order)?.into_iter().map(MetricValue).collect();
        let values = match sec.take("values") {
            Some((l, v)) => Some(ints(l, "values", &v)?.into_iter().map(MetricValue).collect()),
            None => None,
        };
        let (l, ws) = sec.take("weights").ok_or_else(|| perr(line, "table metric needs `weights`"))?;
        let weights: Vec<Weight> = ints(l, "weights", &ws)?.into_iter().map(Weight).collect();
        let mut met = BTreeMap::new();
        for (l, k, v) in std::mem::take(&mut sec.entries) {
            let parts: Vec<&str> = k.split('.').collect();
            if parts.len() != 3 || parts[0] != "met" {
                return Err(perr(l, format!("unknown key `{k}` in [metric]")));
            }
            let a = MetricValue(num(l, "met", parts[1])?);
            let w = Weight(num(l, "met", parts[2])?);
            met.insert((a, w), MetricValue(num(l, "met", &v)?));
        }
        let table = TableMetric::new(order, values, weights, met).map_err(|e| perr(line, e.to_string()))?;
        Ok(MetricSpec::table(table))
    }

    fn system(&mut self, metric: MetricSpec) -> Result<SystemDescription, ScenarioError> {
        let mut sec = self.section("system");
        let missing = |k: &str| ScenarioError::Missing(format!("[system] needs `{k}`"));
        let (_, nodes) = sec.take("nodes").ok_or_else(|| missing("nodes"))?;
        let nodes = words(&nodes);
        let (rl, root) = sec.take("root").ok_or_else(|| missing("root"))?;
        let known: BTreeSet<&str> = nodes.iter().map(String::as_str).collect();
        if !known.contains(root.as_str()) {
            return Err(perr(rl, format!("unknown process `{root}`")));
        }
        let byzantine = match sec.take("byzantine") {
            Some((l, v)) => {
                let b = words(&v);
                if let Some(x) = b.iter().find(|x| !known.contains(x.as_str())) {
                    return Err(perr(l, format!("unknown process `{x}`")));
                }
                b
            }
            None => Vec::new(),
        };
        let d = match sec.take("D") {
            Some((l, v)) => Some(num(l, "D", &v)?),
            None => None,
        };
        sec.reject_rest("system")?;

        let es = self.section("edges");
        let mut edges = Vec::new();
        for (l, content) in &es.lines {
            let t: Vec<&str> = content.split_whitespace().collect();
            if t.len() != 3 {
                return Err(perr(*l, format!("edge lines are `u v w`, got `{content}`")));
            }
            for n in &t[..2] {
                if !known.contains(n) {
                    return Err(perr(*l, format!("unknown process `{n}`")));
                }
            }
            let w = metric.parse_weight(t[2]).map_err(|e| perr(*l, e.to_string()))?;
            edges.push((t[0].to_string(), t[1].to_string(), w));
        }
        let _ = es.header_line;

        let os = self.section("order");
        let mut neighbor_order = Vec::new();
        for (l, k, v) in &os.entries {
            if !known.contains(k.as_str()) {
                return Err(perr(*l, format!("unknown process `{k}`")));
            }
            neighbor_order.push((k.clone(), words(v)));
        }
        Ok(SystemDescription { nodes, edges, root, byzantine, metric, d, neighbor_order })
    }

    fn adversary(
        &mut self,
        m: &MetricSpec,
        check_name: &dyn Fn(usize, &str) -> Result<(), ScenarioError>,
        system: &SystemDescription,
    ) -> Result<Vec<(String, StrategySpec)>, ScenarioError> {
        let mut sec = self.section("adversary");
        let mut grouped: Vec<AdversaryGroup> = Vec::new();
        for (l, k, v) in std::mem::take(&mut sec.entries) {
            let (b, field) = k
                .split_once('.')
                .ok_or_else(|| perr(l, format!("adversary keys are `process.field`, got `{k}`")))?;
            check_name(l, b)?;
            if !system.byzantine.iter().any(|x| x == b) {
                return Err(perr(l, format!("`{b}` is not Byzantine")));
            }
            let idx = match grouped.iter().position(|(n, _, _)| n == b) {
                Some(i) => i,
                None => {
                    grouped.push((b.to_string(), l, BTreeMap::new()));
                    grouped.len() - 1
                }
            };
            grouped[idx].2.insert(field.to_string(), (l, v));
        }
        let states = |l: usize, v: &str| -> Result<Vec<StateSpec>, ScenarioError> {
            v.split_whitespace().map(|s| StateSpec::parse(s, m).map_err(|e| perr(l, e))).collect()
        };
        let mut out = Vec::new();
        for (b, first, mut fields) in grouped {
            let (kl, kind) = fields
                .remove("kind")
                .ok_or_else(|| perr(first, format!("`{b}.kind` is required")))?;
            let spec = match kind.as_str() {
                "scripted" | "frozen" => {
                    let mut script = Vec::new();
                    if let Some((l, v)) = fields.remove("script") {
                        for item in v.split_whitespace() {
                            let (t, s) = item
                                .split_once(':')
                                .ok_or_else(|| perr(l, format!("script entries are `tick:(state)`, got `{item}`")))?;
                            script.push((num(l, "script", t)?, StateSpec::parse(s, m).map_err(|e| perr(l, e))?));
                        }
                    }
                    StrategySpec::Scripted { script }
                }
                "mimic_root" => StrategySpec::MimicRoot,
                "behave_correct" => StrategySpec::BehaveCorrect,
                "replay_loop" => {
                    let (l, v) = fields
                        .remove("states")
                        .ok_or_else(|| perr(kl, format!("`{b}.states` is required")))?;
                    let watch = match fields.remove("watch") {
                        Some((l, v)) => {
                            let w = words(&v);
                            for n in &w {
                                check_name(l, n)?;
                            }
                            Some(w)
                        }
                        None => None,
                    };
                    let cycles = match fields.remove("cycles") {
                        Some((l, v)) => Some(num(l, "cycles", &v)?),
                        None => None,
                    };
                    StrategySpec::ReplayLoop { states: states(l, &v)?, watch, cycles }
                }
                "random_state" => {
                    let seed = match fields.remove("seed") {
                        Some((l, v)) => num(l, "seed", &v)?,
                        None => 0,
                    };
                    let percent = match fields.remove("percent") {
                        Some((l, v)) => num(l, "percent", &v)?,
                        None => 50,
                    };
                    StrategySpec::RandomState { seed, percent }
                }
                _ => return Err(perr(kl, format!("unknown strategy `{kind}`"))),
            };
            if let Some((f, (l, _))) = fields.into_iter().next() {
                return Err(perr(l, format!("unknown key `{b}.{f}` for {}", spec.kind())));
            }
            out.push((b, spec));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    const SAMPLE: &str = "\
# a three-process chain
[system]
nodes = r a b
root = r
byzantine = b
D = 4

[metric]
metric = met

[edges]
r a 1
a b 1

[adversary]
b.kind = replay_loop
b.states = (-,3,0) (a,0,2)
b.cycles = 3

[init]
mode = explicit
r = (-,3,0)
a = (r,2,0)
b = (-,3,0)
";

    #[test]
    fn parses_sample() {
        let sc = Scenario::parse(SAMPLE).unwrap();
        assert_eq!(sc.system.nodes, vec!["r", "a", "b"]);
        assert_eq!(sc.system.d, Some(4));
        assert_eq!(sc.adversary.len(), 1);
        let sys = sc.build_system().unwrap();
        let cfg = sc.initial_configuration(&sys).unwrap();
        assert_eq!(cfg[sys.id("a").unwrap()].level, MetricValue(2));
        assert_eq!(sc.strategies(&sys).unwrap().len(), 1);
    }

    #[test]
    fn round_trip() {
        let sc = Scenario::parse(SAMPLE).unwrap();
        let again = Scenario::parse(&sc.to_text()).unwrap();
        assert_eq!(sc, again);
        for name in library::names() {
            let sc = library::entry(name).unwrap();
            assert_eq!(Scenario::parse(&sc.to_text()).unwrap(), sc, "{name}");
        }
    }

    #[test]
    fn table_metric_round_trip() {
        let text = "[system]\nnodes = r a\nroot = r\n[metric]\nmetric = table\norder = 0 1\nweights = 5\nmet.0.5 = 0\nmet.1.5 = 0\n[edges]\nr a 5\n";
        let sc = Scenario::parse(text).unwrap();
        assert!(matches!(sc.system.metric.kind(), MetricKind::Table(_)));
        assert_eq!(Scenario::parse(&sc.to_text()).unwrap(), sc);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_key = SAMPLE.replace("D = 4", "diameter = 4");
        assert!(matches!(Scenario::parse(&bad_key), Err(ScenarioError::Parse { line: 6, .. })));
        let bad_edge = SAMPLE.replace("a b 1", "a b");
        assert!(matches!(Scenario::parse(&bad_edge), Err(ScenarioError::Parse { line: 13, .. })));
        let bad_state = SAMPLE.replace("a = (r,2,0)", "a = (r,9,0)");
        assert!(matches!(Scenario::parse(&bad_state), Err(ScenarioError::Parse { .. })));
        let bad_section = format!("{SAMPLE}[extras]\n");
        assert!(Scenario::parse(&bad_section).is_err());
        let unknown_field = SAMPLE.replace("b.cycles = 3", "b.loops = 3");
        assert!(Scenario::parse(&unknown_field).is_err());
    }

    #[test]
    fn explicit_init_requires_every_process() {
        let partial = SAMPLE.replace("a = (r,2,0)\n", "");
        let sc = Scenario::parse(&partial).unwrap();
        let sys = sc.build_system().unwrap();
        assert!(matches!(sc.initial_configuration(&sys), Err(ScenarioError::Init(_))));
    }

    #[test]
    fn mimic_init_matches_root_and_byzantine() {
        let sc = Scenario::parse(&SAMPLE.replace("mode = explicit", "mode = mimic").replace("b = (-,3,0)\n", "").replace("r = (-,3,0)\n", "")).unwrap();
        let sys = sc.build_system().unwrap();
        let cfg = sc.initial_configuration(&sys).unwrap();
        let b = sys.id("b").unwrap();
        assert_eq!(cfg[b], cfg[sys.root()]);
        assert_eq!(cfg[b].level, sys.metric().mr());
    }
}
