//! Routing metrics: value and weight domains, composition, order and the
//! exhaustive classifiers built on top of them.
//!
//! All values and weights are small unsigned integers. Their meaning depends
//! on the metric: a path cost for the shortest-path family, a capacity for
//! flow, and a numerator over a fixed denominator for reliability.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Element of a metric's value domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetricValue(pub u32);

/// Element of a metric's weight domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("value {value} is outside the value domain of {metric}")]
    ValueOutOfDomain { metric: String, value: String },
    #[error("weight {weight} is outside the weight domain of {metric}")]
    WeightOutOfDomain { metric: String, weight: String },
    #[error("metric `{metric}` requires parameter `{param}`")]
    MissingParameter { metric: String, param: String },
    #[error("invalid parameter for `{metric}`: {reason}")]
    InvalidParameter { metric: String, reason: String },
    #[error("unknown metric `{0}`")]
    Unknown(String),
    #[error("malformed metric table: {0}")]
    Table(String),
}

/// Names of the predefined metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    ShortestPath,
    Bfs,
    Flow,
    Reliability,
    NoConstraint,
    Met,
}

/// A metric given by explicit tables.
///
/// `order` lists the value domain from worst to best; the last entry is the
/// root value. `values` keeps the declaration order, which is the order the
/// classifiers enumerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMetric {
    values: Vec<MetricValue>,
    rank: BTreeMap<MetricValue, usize>,
    weights: Vec<Weight>,
    met: BTreeMap<(MetricValue, Weight), MetricValue>,
}

impl TableMetric {
    /// `order` is worst to best; `values` is any permutation of it used for
    /// enumeration (pass `None` to enumerate in `order`).
    pub fn new(
        order: Vec<MetricValue>,
        values: Option<Vec<MetricValue>>,
        weights: Vec<Weight>,
        met: BTreeMap<(MetricValue, Weight), MetricValue>,
    ) -> Result<Self, MetricError> {
        if order.is_empty() {
            return Err(MetricError::Table("empty value domain".into()));
        }
        if weights.is_empty() {
            return Err(MetricError::Table("empty weight domain".into()));
        }
        let mut rank = BTreeMap::new();
        for (i, v) in order.iter().enumerate() {
            if rank.insert(*v, i).is_some() {
                return Err(MetricError::Table(format!("value {} listed twice", v.0)));
            }
        }
        let weight_set: BTreeSet<_> = weights.iter().copied().collect();
        if weight_set.len() != weights.len() {
            return Err(MetricError::Table("weight listed twice".into()));
        }
        let values = values.unwrap_or_else(|| order.clone());
        let value_set: BTreeSet<_> = values.iter().copied().collect();
        if value_set.len() != values.len() || value_set != rank.keys().copied().collect() {
            return Err(MetricError::Table(
                "enumeration order is not a permutation of the domain".into(),
            ));
        }
        for m in &order {
            for w in &weights {
                match met.get(&(*m, *w)) {
                    None => {
                        return Err(MetricError::Table(format!(
                            "met({}, {}) is not defined",
                            m.0, w.0
                        )))
                    }
                    Some(r) if !rank.contains_key(r) => {
                        return Err(MetricError::Table(format!(
                            "met({}, {}) = {} leaves the domain",
                            m.0, w.0, r.0
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        if met.len() != order.len() * weights.len() {
            return Err(MetricError::Table("met has entries outside the domains".into()));
        }
        Ok(TableMetric { values, rank, weights, met })
    }

    /// Values from worst to best.
    pub fn order(&self) -> Vec<MetricValue> {
        let mut v: Vec<_> = self.rank.iter().map(|(m, r)| (*r, *m)).collect();
        v.sort();
        v.into_iter().map(|(_, m)| m).collect()
    }

    pub fn table(&self) -> &BTreeMap<(MetricValue, Weight), MetricValue> {
        &self.met
    }

    /// Values in enumeration order.
    pub fn values(&self) -> &[MetricValue] {
        &self.values
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricKind {
    /// Additive cost truncated at `bound`; smaller is better.
    ShortestPath { bound: u32 },
    /// Hop count truncated at `bound`.
    Bfs { bound: u32 },
    /// Bottleneck capacity on `0..=mr`.
    Flow { mr: u32 },
    /// Product of probabilities, stored as numerators over `den`.
    Reliability { den: u32 },
    NoConstraint,
    /// Values `0..=3`, single weight 1, composition `max(0, m - w)`.
    Met,
    Table(TableMetric),
}

/// A routing metric over finite domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpec {
    kind: MetricKind,
}

impl MetricSpec {
    pub fn builtin(which: Builtin, param: Option<u32>) -> Result<Self, MetricError> {
        let need = |metric: &str, name: &str| {
            param.ok_or_else(|| MetricError::MissingParameter {
                metric: metric.into(),
                param: name.into(),
            })
        };
        let kind = match which {
            Builtin::ShortestPath => {
                let bound = need("sp", "bound")?;
                if bound == 0 {
                    return Err(invalid("sp", "bound must be positive"));
                }
                MetricKind::ShortestPath { bound }
            }
            Builtin::Bfs => {
                let bound = need("bfs", "bound")?;
                if bound == 0 {
                    return Err(invalid("bfs", "bound must be positive"));
                }
                MetricKind::Bfs { bound }
            }
            Builtin::Flow => MetricKind::Flow { mr: need("flow", "mr")? },
            Builtin::Reliability => {
                let den = need("rel", "den")?;
                if den == 0 {
                    return Err(invalid("rel", "den must be positive"));
                }
                MetricKind::Reliability { den }
            }
            Builtin::NoConstraint => MetricKind::NoConstraint,
            Builtin::Met => MetricKind::Met,
        };
        Ok(MetricSpec { kind })
    }

    pub fn sp(bound: u32) -> Self {
        Self::builtin(Builtin::ShortestPath, Some(bound)).expect("positive bound")
    }
    pub fn bfs(bound: u32) -> Self {
        Self::builtin(Builtin::Bfs, Some(bound)).expect("positive bound")
    }
    pub fn flow(mr: u32) -> Self {
        MetricSpec { kind: MetricKind::Flow { mr } }
    }
    pub fn rel(den: u32) -> Self {
        Self::builtin(Builtin::Reliability, Some(den)).expect("positive denominator")
    }
    pub fn nc() -> Self {
        MetricSpec { kind: MetricKind::NoConstraint }
    }
    pub fn met_metric() -> Self {
        MetricSpec { kind: MetricKind::Met }
    }
    pub fn table(table: TableMetric) -> Self {
        MetricSpec { kind: MetricKind::Table(table) }
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Re-expresses the metric as an explicit table, enumerating values in
    /// the given order (worst-to-best order when `None`).
    pub fn to_table(&self, enumeration: Option<Vec<MetricValue>>) -> Result<Self, MetricError> {
        let order = self.values_by_rank();
        let weights = self.weight_domain();
        let mut met = BTreeMap::new();
        for m in &order {
            for w in &weights {
                met.insert((*m, *w), self.met(*m, *w));
            }
        }
        Ok(MetricSpec::table(TableMetric::new(order, enumeration, weights, met)?))
    }

    /// Value domain in enumeration order.
    pub fn value_domain(&self) -> Vec<MetricValue> {
        match &self.kind {
            MetricKind::ShortestPath { bound } | MetricKind::Bfs { bound } => {
                (0..=*bound).map(MetricValue).collect()
            }
            MetricKind::Flow { mr } => (0..=*mr).map(MetricValue).collect(),
            MetricKind::Reliability { den } => (0..=*den).map(MetricValue).collect(),
            MetricKind::NoConstraint => vec![MetricValue(0)],
            MetricKind::Met => (0..=3).map(MetricValue).collect(),
            MetricKind::Table(t) => t.values.clone(),
        }
    }

    /// Value domain sorted from worst to best; the last element is `mr`.
    pub fn values_by_rank(&self) -> Vec<MetricValue> {
        let mut v = self.value_domain();
        v.sort_by_key(|m| self.rank(*m));
        v
    }

    pub fn weight_domain(&self) -> Vec<Weight> {
        match &self.kind {
            MetricKind::ShortestPath { bound } => (0..=*bound).map(Weight).collect(),
            MetricKind::Bfs { .. } | MetricKind::Met => vec![Weight(1)],
            MetricKind::Flow { mr } => (0..=*mr).map(Weight).collect(),
            MetricKind::Reliability { den } => (0..=*den).map(Weight).collect(),
            MetricKind::NoConstraint => vec![Weight(0)],
            MetricKind::Table(t) => t.weights.clone(),
        }
    }

    pub fn domain_size(&self) -> usize {
        match &self.kind {
            MetricKind::ShortestPath { bound } | MetricKind::Bfs { bound } => *bound as usize + 1,
            MetricKind::Flow { mr } => *mr as usize + 1,
            MetricKind::Reliability { den } => *den as usize + 1,
            MetricKind::NoConstraint => 1,
            MetricKind::Met => 4,
            MetricKind::Table(t) => t.values.len(),
        }
    }

    pub fn contains_value(&self, m: MetricValue) -> bool {
        match &self.kind {
            MetricKind::ShortestPath { bound } | MetricKind::Bfs { bound } => m.0 <= *bound,
            MetricKind::Flow { mr } => m.0 <= *mr,
            MetricKind::Reliability { den } => m.0 <= *den,
            MetricKind::NoConstraint => m.0 == 0,
            MetricKind::Met => m.0 <= 3,
            MetricKind::Table(t) => t.rank.contains_key(&m),
        }
    }

    pub fn contains_weight(&self, w: Weight) -> bool {
        match &self.kind {
            MetricKind::ShortestPath { bound } => w.0 <= *bound,
            MetricKind::Bfs { .. } | MetricKind::Met => w.0 == 1,
            MetricKind::Flow { mr } => w.0 <= *mr,
            MetricKind::Reliability { den } => w.0 <= *den,
            MetricKind::NoConstraint => w.0 == 0,
            MetricKind::Table(t) => t.weights.contains(&w),
        }
    }

    /// The root value, maximum of the domain.
    pub fn mr(&self) -> MetricValue {
        match &self.kind {
            MetricKind::ShortestPath { .. } | MetricKind::Bfs { .. } | MetricKind::NoConstraint => {
                MetricValue(0)
            }
            MetricKind::Flow { mr } => MetricValue(*mr),
            MetricKind::Reliability { den } => MetricValue(*den),
            MetricKind::Met => MetricValue(3),
            MetricKind::Table(t) => *t.rank.iter().max_by_key(|(_, r)| **r).expect("nonempty").0,
        }
    }

    /// Position in the metric order, 0 being the worst value. Assumes `m` is
    /// in the domain.
    pub fn rank(&self, m: MetricValue) -> usize {
        match &self.kind {
            MetricKind::ShortestPath { bound } | MetricKind::Bfs { bound } => {
                (*bound - m.0.min(*bound)) as usize
            }
            MetricKind::Flow { .. } | MetricKind::Reliability { .. } | MetricKind::Met => {
                m.0 as usize
            }
            MetricKind::NoConstraint => 0,
            MetricKind::Table(t) => t.rank[&m],
        }
    }

    /// Metric order on in-domain values; `Greater` means closer to `mr`.
    pub fn cmp(&self, a: MetricValue, b: MetricValue) -> Ordering {
        self.rank(a).cmp(&self.rank(b))
    }

    /// `a ≺ b`.
    pub fn lt(&self, a: MetricValue, b: MetricValue) -> bool {
        self.cmp(a, b) == Ordering::Less
    }

    /// `a ⪯ b`.
    pub fn le(&self, a: MetricValue, b: MetricValue) -> bool {
        self.cmp(a, b) != Ordering::Greater
    }

    /// The better of two values.
    pub fn max(&self, a: MetricValue, b: MetricValue) -> MetricValue {
        if self.lt(a, b) {
            b
        } else {
            a
        }
    }

    /// Checked comparison.
    pub fn compare(&self, a: MetricValue, b: MetricValue) -> Result<Ordering, MetricError> {
        self.check_value(a)?;
        self.check_value(b)?;
        Ok(self.cmp(a, b))
    }

    /// Composition on in-domain arguments.
    pub fn met(&self, m: MetricValue, w: Weight) -> MetricValue {
        match &self.kind {
            MetricKind::ShortestPath { bound } | MetricKind::Bfs { bound } => {
                MetricValue(m.0.saturating_add(w.0).min(*bound))
            }
            MetricKind::Flow { .. } => MetricValue(m.0.min(w.0)),
            MetricKind::Reliability { den } => {
                MetricValue(((m.0 as u64 * w.0 as u64) / *den as u64) as u32)
            }
            MetricKind::NoConstraint => MetricValue(0),
            MetricKind::Met => MetricValue(m.0.saturating_sub(w.0)),
            MetricKind::Table(t) => t.met[&(m, w)],
        }
    }

    /// Checked composition.
    pub fn met_apply(&self, m: MetricValue, w: Weight) -> Result<MetricValue, MetricError> {
        self.check_value(m)?;
        self.check_weight(w)?;
        Ok(self.met(m, w))
    }

    pub fn check_value(&self, m: MetricValue) -> Result<(), MetricError> {
        if self.contains_value(m) {
            Ok(())
        } else {
            Err(MetricError::ValueOutOfDomain {
                metric: self.to_string(),
                value: m.0.to_string(),
            })
        }
    }

    pub fn check_weight(&self, w: Weight) -> Result<(), MetricError> {
        if self.contains_weight(w) {
            Ok(())
        } else {
            Err(MetricError::WeightOutOfDomain {
                metric: self.to_string(),
                weight: w.0.to_string(),
            })
        }
    }

    /// Values reachable from `mr` by repeated composition with weights drawn
    /// from `weights`. Any chain longer than the domain revisits a value, so
    /// breadth-first closure is exhaustive.
    pub fn reachable_from_root(&self, weights: &[Weight]) -> BTreeSet<MetricValue> {
        let mut seen = BTreeSet::from([self.mr()]);
        let mut queue = VecDeque::from([self.mr()]);
        while let Some(m) = queue.pop_front() {
            for w in weights {
                let next = self.met(m, *w);
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Values violating the utility condition over the full weight domain.
    pub fn unreachable_values(&self) -> Vec<MetricValue> {
        let reach = self.reachable_from_root(&self.weight_domain());
        self.value_domain().into_iter().filter(|m| !reach.contains(m)).collect()
    }

    /// Human-readable form of a value (reliability values as reduced
    /// fractions).
    pub fn format_value(&self, m: MetricValue) -> String {
        match &self.kind {
            MetricKind::Reliability { den } => format_fraction(m.0, *den),
            _ => m.0.to_string(),
        }
    }

    pub fn format_weight(&self, w: Weight) -> String {
        match &self.kind {
            MetricKind::Reliability { den } => format_fraction(w.0, *den),
            _ => w.0.to_string(),
        }
    }

    pub fn parse_value(&self, s: &str) -> Result<MetricValue, MetricError> {
        let raw = self.parse_scalar(s).ok_or_else(|| MetricError::ValueOutOfDomain {
            metric: self.to_string(),
            value: s.into(),
        })?;
        let m = MetricValue(raw);
        self.check_value(m)?;
        Ok(m)
    }

    pub fn parse_weight(&self, s: &str) -> Result<Weight, MetricError> {
        let raw = self.parse_scalar(s).ok_or_else(|| MetricError::WeightOutOfDomain {
            metric: self.to_string(),
            weight: s.into(),
        })?;
        let w = Weight(raw);
        self.check_weight(w)?;
        Ok(w)
    }

    fn parse_scalar(&self, s: &str) -> Option<u32> {
        match &self.kind {
            MetricKind::Reliability { den } => parse_fraction(s, *den),
            _ => s.parse().ok(),
        }
    }
}

fn invalid(metric: &str, reason: &str) -> MetricError {
    MetricError::InvalidParameter { metric: metric.into(), reason: reason.into() }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn format_fraction(num: u32, den: u32) -> String {
    if num == 0 {
        return "0".into();
    }
    if num == den {
        return "1".into();
    }
    let g = gcd(num, den);
    format!("{}/{}", num / g, den / g)
}

/// Parses `a/b`, a decimal such as `0.75`, or an integer `0`/`1`, as an exact
/// numerator over `den`.
fn parse_fraction(s: &str, den: u32) -> Option<u32> {
    let (num, d): (u64, u64) = if let Some((a, b)) = s.split_once('/') {
        (a.trim().parse().ok()?, b.trim().parse().ok()?)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) || frac.len() > 9 {
            return None;
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
        let scale = 10u64.pow(frac.len() as u32);
        (int * scale + frac.parse::<u64>().ok()?, scale)
    } else {
        (s.parse().ok()?, 1)
    };
    if d == 0 {
        return None;
    }
    let scaled = num * den as u64;
    if !scaled.is_multiple_of(d) {
        return None;
    }
    u32::try_from(scaled / d).ok()
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MetricKind::ShortestPath { bound } => write!(f, "sp(bound={bound})"),
            MetricKind::Bfs { bound } => write!(f, "bfs(bound={bound})"),
            MetricKind::Flow { mr } => write!(f, "flow(mr={mr})"),
            MetricKind::Reliability { den } => write!(f, "rel(den={den})"),
            MetricKind::NoConstraint => write!(f, "nc"),
            MetricKind::Met => write!(f, "met"),
            MetricKind::Table(_) => write!(f, "table"),
        }
    }
}

impl FromStr for MetricSpec {
    type Err = MetricError;

    /// Parses `sp(bound=N)`, `bfs(bound=N)`, `flow(mr=N)`, `rel(den=N)`, `nc`
    /// or `met`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| MetricError::Unknown(s.into()))?;
                (name.trim().to_ascii_lowercase(), Some(inner.trim()))
            }
            None => (s.to_ascii_lowercase(), None),
        };
        let (which, key) = match name.as_str() {
            "sp" => (Builtin::ShortestPath, Some("bound")),
            "bfs" => (Builtin::Bfs, Some("bound")),
            "flow" | "f" => (Builtin::Flow, Some("mr")),
            "rel" | "r" => (Builtin::Reliability, Some("den")),
            "nc" => (Builtin::NoConstraint, None),
            "met" => (Builtin::Met, None),
            _ => return Err(MetricError::Unknown(s.into())),
        };
        let param = match (key, args) {
            (_, None) | (_, Some("")) => None,
            (None, Some(_)) => {
                return Err(invalid(&name, "takes no parameters"));
            }
            (Some(key), Some(args)) => {
                let (k, v) = args
                    .split_once('=')
                    .ok_or_else(|| invalid(&name, "expected key=value"))?;
                if k.trim() != key {
                    return Err(invalid(&name, &format!("unknown parameter `{}`", k.trim())));
                }
                Some(
                    v.trim()
                        .parse::<u32>()
                        .map_err(|_| invalid(&name, &format!("`{}` is not an integer", v.trim())))?,
                )
            }
        };
        MetricSpec::builtin(which, param)
    }
}

/// A property checked by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Bounded,
    Monotonic,
    StrictlyDecreasing,
    /// Not a counterexample: a fixed point that exists only because the
    /// infinite domain was truncated.
    TruncationArtifact,
}

/// A counterexample `(m, m', w)` for a failed property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub property: Property,
    pub m: MetricValue,
    pub other: Option<MetricValue>,
    pub w: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricClassification {
    pub is_bounded: bool,
    pub is_monotonic: bool,
    pub is_maximizable: bool,
    pub is_strictly_decreasing: bool,
    pub fixed_points: BTreeSet<MetricValue>,
    pub is_strongly_maximizable: bool,
    pub domain_size: usize,
    pub witnesses: Vec<Witness>,
}

impl MetricClassification {
    pub fn witness(&self, property: Property) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.property == property)
    }
}

/// Exhaustive classification over the finite domains.
///
/// The truncated shortest-path family gets the classification of the
/// untruncated metric: saturation at the bound creates a fixed point that
/// the infinite metric does not have. The artifact is kept as a witness.
pub fn classify(spec: &MetricSpec) -> MetricClassification {
    let values = spec.value_domain();
    let weights = spec.weight_domain();
    let mut witnesses = Vec::new();

    let mut is_bounded = true;
    'bounded: for &m in &values {
        for &w in &weights {
            if spec.lt(m, spec.met(m, w)) {
                is_bounded = false;
                witnesses.push(Witness { property: Property::Bounded, m, other: None, w });
                break 'bounded;
            }
        }
    }

    let mut is_monotonic = true;
    'mono: for &m in &values {
        for &m2 in &values {
            if !spec.lt(m, m2) {
                continue;
            }
            for &w in &weights {
                if spec.lt(spec.met(m2, w), spec.met(m, w)) {
                    is_monotonic = false;
                    witnesses.push(Witness {
                        property: Property::Monotonic,
                        m,
                        other: Some(m2),
                        w,
                    });
                    break 'mono;
                }
            }
        }
    }

    let mut is_strictly_decreasing = true;
    let mut fixed_points = BTreeSet::new();
    for &m in &values {
        let all_below = weights.iter().all(|&w| spec.lt(spec.met(m, w), m));
        let all_equal = weights.iter().all(|&w| spec.met(m, w) == m);
        if all_equal {
            fixed_points.insert(m);
        }
        if is_strictly_decreasing && !all_below && !all_equal {
            is_strictly_decreasing = false;
            let w = *weights
                .iter()
                .find(|&&w| spec.met(m, w) == m)
                .or_else(|| weights.first())
                .expect("nonempty weight domain");
            witnesses.push(Witness {
                property: Property::StrictlyDecreasing,
                m,
                other: Some(spec.met(m, w)),
                w,
            });
        }
    }

    if let MetricKind::ShortestPath { bound } | MetricKind::Bfs { bound } = spec.kind() {
        let top = MetricValue(*bound);
        if fixed_points.remove(&top) {
            witnesses.push(Witness {
                property: Property::TruncationArtifact,
                m: top,
                other: Some(top),
                w: weights[0],
            });
        }
    }

    let n = values.len();
    MetricClassification {
        is_bounded,
        is_monotonic,
        is_maximizable: is_bounded && is_monotonic,
        is_strictly_decreasing,
        is_strongly_maximizable: n == 1
            || (n >= 2 && is_strictly_decreasing && fixed_points.len() == 1),
        fixed_points,
        domain_size: n,
        witnesses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    pub possible: bool,
    /// Smallest containment radius the used-value count allows.
    pub minimal_c: usize,
}

/// Whether a strongly stabilizing construction with containment radius `c`
/// can exist for a metric with this classification and `used_values`
/// distinct used metric values.
pub fn strong_feasibility(
    classification: &MetricClassification,
    used_values: usize,
    c: usize,
) -> Feasibility {
    let minimal_c = used_values.saturating_sub(2);
    Feasibility {
        possible: classification.is_strongly_maximizable && c >= minimal_c,
        minimal_c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: u32) -> MetricValue {
        MetricValue(x)
    }

    #[test]
    fn compare_follows_metric_direction() {
        let sp = MetricSpec::sp(16);
        assert_eq!(sp.compare(v(3), v(7)).unwrap(), Ordering::Greater);
        assert_eq!(sp.compare(v(5), v(5)).unwrap(), Ordering::Equal);
        let f = MetricSpec::flow(10);
        assert_eq!(f.compare(v(4), v(9)).unwrap(), Ordering::Less);
        assert!(f.compare(v(11), v(1)).is_err());
    }

    #[test]
    fn composition_examples() {
        assert_eq!(MetricSpec::sp(16).met_apply(v(3), Weight(4)).unwrap(), v(7));
        assert_eq!(MetricSpec::sp(8).met(v(6), Weight(5)), v(8));
        assert_eq!(MetricSpec::flow(10).met_apply(v(7), Weight(3)).unwrap(), v(3));
        let met = MetricSpec::met_metric();
        assert_eq!(met.met_apply(v(3), Weight(1)).unwrap(), v(2));
        assert_eq!(met.met_apply(v(0), Weight(1)).unwrap(), v(0));
        assert!(met.met_apply(v(2), Weight(2)).is_err());
        let rel = MetricSpec::rel(4);
        assert_eq!(rel.met(v(3), Weight(2)), v(1));
    }

    #[test]
    fn builtin_domains() {
        let nc = MetricSpec::nc();
        assert_eq!(nc.value_domain(), vec![v(0)]);
        assert_eq!(nc.met(v(0), Weight(0)), v(0));
        let met = MetricSpec::met_metric();
        assert_eq!(met.value_domain(), vec![v(0), v(1), v(2), v(3)]);
        assert_eq!(met.weight_domain(), vec![Weight(1)]);
        assert_eq!(met.mr(), v(3));
        let bfs = MetricSpec::bfs(16);
        assert_eq!(bfs.weight_domain(), vec![Weight(1)]);
        assert_eq!(bfs.mr(), v(0));
        assert!(matches!(
            MetricSpec::builtin(Builtin::Flow, None),
            Err(MetricError::MissingParameter { .. })
        ));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["sp(bound=16)", "bfs(bound=8)", "flow(mr=10)", "rel(den=20)", "nc", "met"] {
            let m: MetricSpec = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("sp".parse::<MetricSpec>().is_err());
        assert!("sp(mr=3)".parse::<MetricSpec>().is_err());
        assert!("nc(x=1)".parse::<MetricSpec>().is_err());
        assert!("foo".parse::<MetricSpec>().is_err());
    }

    #[test]
    fn reliability_values_are_exact() {
        let rel = MetricSpec::rel(20);
        assert_eq!(rel.parse_weight("0.75").unwrap(), Weight(15));
        assert_eq!(rel.parse_weight("3/4").unwrap(), Weight(15));
        assert_eq!(rel.parse_weight("1").unwrap(), Weight(20));
        assert!(rel.parse_weight("0.33").is_err());
        assert_eq!(rel.format_value(v(15)), "3/4");
        assert_eq!(rel.format_value(v(20)), "1");
        assert_eq!(rel.format_value(v(0)), "0");
    }

    #[test]
    fn classify_met() {
        let c = classify(&MetricSpec::met_metric());
        assert!(c.is_maximizable && c.is_strictly_decreasing && c.is_strongly_maximizable);
        assert_eq!(c.fixed_points, BTreeSet::from([v(0)]));
    }

    #[test]
    fn classify_nc() {
        let c = classify(&MetricSpec::nc());
        assert!(c.is_strongly_maximizable);
        assert_eq!(c.domain_size, 1);
    }

    #[test]
    fn classify_reliability_quarter_granularity() {
        let c = classify(&MetricSpec::rel(4));
        assert!(c.is_bounded && c.is_monotonic && c.is_maximizable);
        assert!(!c.is_strictly_decreasing);
        assert!(!c.is_strongly_maximizable);
        assert_eq!(c.witness(Property::StrictlyDecreasing).unwrap().w, Weight(4));
    }

    #[test]
    fn classify_truncated_shortest_path_family() {
        let sp = classify(&MetricSpec::sp(8));
        assert!(sp.is_maximizable && !sp.is_strictly_decreasing && !sp.is_strongly_maximizable);
        assert!(sp.fixed_points.is_empty());
        assert!(sp.witness(Property::TruncationArtifact).is_some());
        let bfs = classify(&MetricSpec::bfs(8));
        assert!(bfs.is_maximizable && bfs.is_strictly_decreasing);
        assert!(bfs.fixed_points.is_empty());
        assert!(!bfs.is_strongly_maximizable);
    }

    #[test]
    fn table_detects_non_monotone_metric() {
        let order = vec![v(0), v(1), v(2)];
        let mut met = BTreeMap::new();
        met.insert((v(0), Weight(0)), v(0));
        met.insert((v(1), Weight(0)), v(1));
        met.insert((v(2), Weight(0)), v(0));
        let spec = MetricSpec::table(TableMetric::new(order, None, vec![Weight(0)], met).unwrap());
        let c = classify(&spec);
        assert!(c.is_bounded);
        assert!(!c.is_monotonic && !c.is_maximizable);
        let w = c.witness(Property::Monotonic).unwrap();
        assert_eq!((w.m, w.other), (v(1), Some(v(2))));
    }

    #[test]
    fn table_rejects_open_composition() {
        let mut met = BTreeMap::new();
        met.insert((v(0), Weight(0)), v(5));
        assert!(TableMetric::new(vec![v(0)], None, vec![Weight(0)], met).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let nc = classify(&MetricSpec::nc());
        assert!(strong_feasibility(&nc, 1, 0).possible);
        let bfs = classify(&MetricSpec::bfs(16));
        assert!((0..10).all(|c| !strong_feasibility(&bfs, 3, c).possible));
        let met = classify(&MetricSpec::met_metric());
        assert_eq!(strong_feasibility(&met, 4, 1), Feasibility { possible: false, minimal_c: 2 });
        assert!(strong_feasibility(&met, 4, 2).possible);
    }

    #[test]
    fn utility_condition_on_builtins() {
        for spec in [
            MetricSpec::sp(10),
            MetricSpec::bfs(10),
            MetricSpec::flow(6),
            MetricSpec::rel(12),
            MetricSpec::nc(),
            MetricSpec::met_metric(),
        ] {
            assert!(spec.unreachable_values().is_empty(), "{spec}");
        }
    }
}
