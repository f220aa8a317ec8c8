//! Distributive and algebraic aggregates over integer attributes.
//!
//! Every function is expressed as a combinable partial state with an identity
//! element, so a window's aggregate can be assembled from the partials of any
//! disjoint cover of that window.

use std::borrow::Cow;
use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};

use crate::graph::{AttributeTable, Graph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateFunction {
    Sum,
    Count,
    Avg,
    /// Extension beyond sum/count/avg; distributive like the rest.
    Min,
    Max,
}

impl AggregateFunction {
    pub const ALL: [AggregateFunction; 5] = [
        AggregateFunction::Sum,
        AggregateFunction::Count,
        AggregateFunction::Avg,
        AggregateFunction::Min,
        AggregateFunction::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregateFunction::Sum => "sum",
            AggregateFunction::Count => "count",
            AggregateFunction::Avg => "avg",
            AggregateFunction::Min => "min",
            AggregateFunction::Max => "max",
        }
    }
}

impl std::str::FromStr for AggregateFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown aggregate function `{s}`")))
    }
}

/// Which function to apply and to which attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateSpec {
    pub function: AggregateFunction,
    /// Ignored for `count`.
    pub attribute: Option<String>,
}

impl AggregateSpec {
    pub fn new(function: AggregateFunction, attribute: impl Into<String>) -> Self {
        Self {
            function,
            attribute: Some(attribute.into()),
        }
    }

    pub fn count() -> Self {
        Self {
            function: AggregateFunction::Count,
            attribute: None,
        }
    }

    /// The value column the aggregate reads. `count` gets a zero column.
    pub(crate) fn values<'a>(&self, attrs: &'a AttributeTable) -> Result<Cow<'a, [i64]>> {
        if self.function == AggregateFunction::Count {
            return Ok(Cow::Owned(vec![0; attrs.vertex_count()]));
        }
        let name = self.attribute.as_deref().ok_or_else(|| {
            Error::InvalidParameter(format!("{} needs an attribute", self.function.name()))
        })?;
        attrs.column(name).map(Cow::Borrowed)
    }
}

/// Combinable intermediate state of an aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartialAggregate {
    Sum(i128),
    Count(u64),
    Avg { total: i128, count: u64 },
    /// `None` is the empty partial.
    Min(Option<i64>),
    Max(Option<i64>),
}

impl PartialAggregate {
    /// Identity element of `function`.
    pub fn init(function: AggregateFunction) -> Self {
        match function {
            AggregateFunction::Sum => PartialAggregate::Sum(0),
            AggregateFunction::Count => PartialAggregate::Count(0),
            AggregateFunction::Avg => PartialAggregate::Avg { total: 0, count: 0 },
            AggregateFunction::Min => PartialAggregate::Min(None),
            AggregateFunction::Max => PartialAggregate::Max(None),
        }
    }

    pub fn function(&self) -> AggregateFunction {
        match self {
            PartialAggregate::Sum(_) => AggregateFunction::Sum,
            PartialAggregate::Count(_) => AggregateFunction::Count,
            PartialAggregate::Avg { .. } => AggregateFunction::Avg,
            PartialAggregate::Min(_) => AggregateFunction::Min,
            PartialAggregate::Max(_) => AggregateFunction::Max,
        }
    }

    pub fn accumulate(self, value: i64) -> Self {
        match self {
            PartialAggregate::Sum(s) => PartialAggregate::Sum(s + i128::from(value)),
            PartialAggregate::Count(c) => PartialAggregate::Count(c + 1),
            PartialAggregate::Avg { total, count } => PartialAggregate::Avg {
                total: total + i128::from(value),
                count: count + 1,
            },
            PartialAggregate::Min(m) => PartialAggregate::Min(Some(m.map_or(value, |m| m.min(value)))),
            PartialAggregate::Max(m) => PartialAggregate::Max(Some(m.map_or(value, |m| m.max(value)))),
        }
    }

    pub fn combine(self, other: Self) -> Result<Self> {
        use PartialAggregate::*;
        Ok(match (self, other) {
            (Sum(a), Sum(b)) => Sum(a + b),
            (Count(a), Count(b)) => Count(a + b),
            (Avg { total: t1, count: c1 }, Avg { total: t2, count: c2 }) => Avg {
                total: t1 + t2,
                count: c1 + c2,
            },
            (Min(a), Min(b)) => Min(merge_opt(a, b, i64::min)),
            (Max(a), Max(b)) => Max(merge_opt(a, b, i64::max)),
            (a, b) => {
                return Err(Error::FunctionMismatch {
                    left: a.function().name(),
                    right: b.function().name(),
                })
            }
        })
    }

    pub fn finalize(self) -> AggregateValue {
        match self {
            PartialAggregate::Sum(s) => AggregateValue::Int(s),
            PartialAggregate::Count(c) => AggregateValue::Int(c.into()),
            PartialAggregate::Avg { count: 0, .. } => AggregateValue::Null,
            PartialAggregate::Avg { total, count } => AggregateValue::Float(total as f64 / count as f64),
            PartialAggregate::Min(m) | PartialAggregate::Max(m) => {
                m.map_or(AggregateValue::Null, |m| AggregateValue::Int(m.into()))
            }
        }
    }
}

fn merge_opt(a: Option<i64>, b: Option<i64>, f: fn(i64, i64) -> i64) -> Option<i64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(f(a, b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Final per-vertex value. `Null` marks an aggregate over an empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregateValue {
    Int(i128),
    Float(f64),
    Null,
}

impl AggregateValue {
    /// Exact equality for integers and nulls; relative tolerance for floats.
    pub fn matches(&self, other: &AggregateValue, rel_tol: f64) -> bool {
        match (self, other) {
            (AggregateValue::Float(a), AggregateValue::Float(b)) => {
                a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
            }
            (a, b) => a == b,
        }
    }
}

impl std::fmt::Display for AggregateValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AggregateValue::Int(v) => write!(f, "{v}"),
            AggregateValue::Float(v) => write!(f, "{v}"),
            AggregateValue::Null => Ok(()),
        }
    }
}

impl Serialize for AggregateValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            AggregateValue::Int(v) => match i64::try_from(v) {
                Ok(v) => s.serialize_i64(v),
                Err(_) => s.serialize_i128(v),
            },
            AggregateValue::Float(v) => s.serialize_f64(v),
            AggregateValue::Null => s.serialize_none(),
        }
    }
}

/// One aggregate value per vertex, indexed by dense vertex ID.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    values: Vec<AggregateValue>,
}

impl ResultTable {
    pub fn new(values: Vec<AggregateValue>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: u32) -> AggregateValue {
        self.values[v as usize]
    }

    pub fn values(&self) -> &[AggregateValue] {
        &self.values
    }

    /// Vertices whose values differ (floats compared at `rel_tol`).
    pub fn mismatches(&self, other: &ResultTable, rel_tol: f64) -> Vec<u32> {
        if self.len() != other.len() {
            return (0..self.len().max(other.len()) as u32).collect();
        }
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .filter(|(_, (a, b))| !a.matches(b, rel_tol))
            .map(|(i, _)| i as u32)
            .collect()
    }

    fn by_label<'a>(&'a self, g: &'a Graph) -> Vec<(u64, AggregateValue)> {
        let mut rows: Vec<_> = self
            .values
            .iter()
            .enumerate()
            .map(|(v, &val)| (g.label(v as u32), val))
            .collect();
        rows.sort_by_key(|&(label, _)| label);
        rows
    }

    /// `vertex,value` rows by original label, ascending; nulls are empty fields.
    pub fn write_csv<W: Write>(&self, g: &Graph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vertex", "value"])?;
        for (label, value) in self.by_label(g) {
            w.write_record([label.to_string(), value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON array of `{"vertex": label, "value": v}` sorted by label.
    pub fn write_json<W: Write>(&self, g: &Graph, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            vertex: u64,
            value: AggregateValue,
        }
        let rows: Vec<Row> = self
            .by_label(g)
            .into_iter()
            .map(|(vertex, value)| Row { vertex, value })
            .collect();
        serde_json::to_writer(out, &rows)?;
        Ok(())
    }
}

/// Count of binary aggregation steps performed by an evaluation.
///
/// Seeding an empty partial with its first input is free; every further
/// accumulate or combine counts as one step, so folding `s` values costs
/// `s - 1` steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalStats {
    pub merge_steps: u64,
}

/// Monomorphized form of a [`PartialAggregate`] used in evaluation loops.
pub(crate) trait Kernel: Copy + Send + Sync {
    type State: Copy + Send + Sync;
    fn identity(&self) -> Self::State;
    fn accumulate(&self, state: Self::State, value: i64) -> Self::State;
    fn combine(&self, a: Self::State, b: Self::State) -> Self::State;
    fn finalize(&self, state: Self::State) -> AggregateValue;
}

#[derive(Clone, Copy)]
pub(crate) struct SumKernel;
#[derive(Clone, Copy)]
pub(crate) struct CountKernel;
#[derive(Clone, Copy)]
pub(crate) struct AvgKernel;
#[derive(Clone, Copy)]
pub(crate) struct MinKernel;
#[derive(Clone, Copy)]
pub(crate) struct MaxKernel;

impl Kernel for SumKernel {
    type State = i128;
    fn identity(&self) -> i128 {
        0
    }
    #[inline]
    fn accumulate(&self, s: i128, v: i64) -> i128 {
        s + i128::from(v)
    }
    #[inline]
    fn combine(&self, a: i128, b: i128) -> i128 {
        a + b
    }
    fn finalize(&self, s: i128) -> AggregateValue {
        PartialAggregate::Sum(s).finalize()
    }
}

impl Kernel for CountKernel {
    type State = u64;
    fn identity(&self) -> u64 {
        0
    }
    #[inline]
    fn accumulate(&self, s: u64, _: i64) -> u64 {
        s + 1
    }
    #[inline]
    fn combine(&self, a: u64, b: u64) -> u64 {
        a + b
    }
    fn finalize(&self, s: u64) -> AggregateValue {
        PartialAggregate::Count(s).finalize()
    }
}

impl Kernel for AvgKernel {
    type State = (i128, u64);
    fn identity(&self) -> (i128, u64) {
        (0, 0)
    }
    #[inline]
    fn accumulate(&self, (t, c): (i128, u64), v: i64) -> (i128, u64) {
        (t + i128::from(v), c + 1)
    }
    #[inline]
    fn combine(&self, a: (i128, u64), b: (i128, u64)) -> (i128, u64) {
        (a.0 + b.0, a.1 + b.1)
    }
    fn finalize(&self, (total, count): (i128, u64)) -> AggregateValue {
        PartialAggregate::Avg { total, count }.finalize()
    }
}

impl Kernel for MinKernel {
    type State = Option<i64>;
    fn identity(&self) -> Option<i64> {
        None
    }
    #[inline]
    fn accumulate(&self, s: Option<i64>, v: i64) -> Option<i64> {
        Some(s.map_or(v, |s| s.min(v)))
    }
    #[inline]
    fn combine(&self, a: Option<i64>, b: Option<i64>) -> Option<i64> {
        merge_opt(a, b, i64::min)
    }
    fn finalize(&self, s: Option<i64>) -> AggregateValue {
        PartialAggregate::Min(s).finalize()
    }
}

impl Kernel for MaxKernel {
    type State = Option<i64>;
    fn identity(&self) -> Option<i64> {
        None
    }
    #[inline]
    fn accumulate(&self, s: Option<i64>, v: i64) -> Option<i64> {
        Some(s.map_or(v, |s| s.max(v)))
    }
    #[inline]
    fn combine(&self, a: Option<i64>, b: Option<i64>) -> Option<i64> {
        merge_opt(a, b, i64::max)
    }
    fn finalize(&self, s: Option<i64>) -> AggregateValue {
        PartialAggregate::Max(s).finalize()
    }
}

/// Runs `$body` with `$k` bound to the kernel for `$function`.
macro_rules! with_kernel {
    ($function:expr, $k:ident => $body:expr) => {
        match $function {
            $crate::aggregate::AggregateFunction::Sum => {
                let $k = $crate::aggregate::SumKernel;
                $body
            }
            $crate::aggregate::AggregateFunction::Count => {
                let $k = $crate::aggregate::CountKernel;
                $body
            }
            $crate::aggregate::AggregateFunction::Avg => {
                let $k = $crate::aggregate::AvgKernel;
                $body
            }
            $crate::aggregate::AggregateFunction::Min => {
                let $k = $crate::aggregate::MinKernel;
                $body
            }
            $crate::aggregate::AggregateFunction::Max => {
                let $k = $crate::aggregate::MaxKernel;
                $body
            }
        }
    };
}
pub(crate) use with_kernel;
