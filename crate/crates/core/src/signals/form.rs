//! Periodic form grammar: elementary waveforms, trends and their sum/product/
//! composition closure.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sexpr::{self, Sexp};
use crate::{Error, Result};

/// Poles of the tangent are reported when |cos| drops below this.
const POLE_TOLERANCE: f64 = 1e-12;

fn frac(t: f64) -> f64 {
    t - t.floor()
}

/// Unit square wave with 50% duty cycle and period 1.
pub fn square(t: f64) -> f64 {
    if frac(t) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// Unit positive sawtooth with period 1, ramping from 0 to 1.
pub fn saw(t: f64) -> f64 {
    frac(t)
}

/// Symmetric bilateral polynomial wave of order `n` with period π in `u`,
/// taking values in [-1, 1]: 1 at multiples of π and -1 half-way between.
pub fn poly(u: f64, n: u32) -> f64 {
    2.0 * (2.0 * frac(u / PI) - 1.0).abs().powi(n as i32) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementaryKind {
    Square,
    Sawtooth,
    Sinusoid,
    Tangent,
    PolyWave { order: u32 },
}

impl ElementaryKind {
    /// Kinds used by default benchmark suites: tangent is opt-in.
    pub fn benchmark_kinds(include_tangent: bool) -> Vec<ElementaryKind> {
        let mut kinds = vec![
            ElementaryKind::Square,
            ElementaryKind::Sawtooth,
            ElementaryKind::Sinusoid,
            ElementaryKind::PolyWave { order: 2 },
        ];
        if include_tangent {
            kinds.push(ElementaryKind::Tangent);
        }
        kinds
    }

    fn token(&self) -> String {
        match self {
            ElementaryKind::Square => "square".into(),
            ElementaryKind::Sawtooth => "saw".into(),
            ElementaryKind::Sinusoid => "sin".into(),
            ElementaryKind::Tangent => "tan".into(),
            ElementaryKind::PolyWave { order } => format!("poly{order}"),
        }
    }

    fn from_token(tok: &str) -> Result<Self> {
        Ok(match tok {
            "square" => ElementaryKind::Square,
            "saw" => ElementaryKind::Sawtooth,
            "sin" => ElementaryKind::Sinusoid,
            "tan" => ElementaryKind::Tangent,
            other => {
                let order = other
                    .strip_prefix("poly")
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| Error::parse(format!("unknown elementary form `{other}`")))?;
                if order == 0 {
                    return Err(Error::parse("polynomial wave order must be at least 1"));
                }
                ElementaryKind::PolyWave { order }
            }
        })
    }
}

impl fmt::Display for ElementaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// One elementary waveform `amplitude * shape(x / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryForm {
    pub kind: ElementaryKind,
    pub period: f64,
    pub phase: f64,
    pub amplitude: f64,
}

impl ElementaryForm {
    pub fn new(kind: ElementaryKind, period: f64, phase: f64) -> Result<Self> {
        Self::with_amplitude(kind, period, phase, 1.0)
    }

    pub fn with_amplitude(kind: ElementaryKind, period: f64, phase: f64, amplitude: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::config(format!("period must be positive, got {period}")));
        }
        if let ElementaryKind::PolyWave { order: 0 } = kind {
            return Err(Error::config("polynomial wave order must be at least 1"));
        }
        Ok(ElementaryForm { kind, period, phase, amplitude })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = x / self.period + self.phase;
        let shape = match self.kind {
            ElementaryKind::Square => square(t),
            ElementaryKind::Sawtooth => saw(t),
            ElementaryKind::Sinusoid => (2.0 * PI * t).sin(),
            ElementaryKind::Tangent => {
                let arg = PI * t;
                if arg.cos().abs() < POLE_TOLERANCE {
                    return Err(Error::TangentPole { x });
                }
                arg.tan()
            }
            ElementaryKind::PolyWave { order } => poly(PI * t, order),
        };
        Ok(self.amplitude * shape)
    }

    /// Like [`eval`](Self::eval) but with tangent values clamped to
    /// `[-limit, limit]`; poles map to the limit.
    pub fn eval_clamped(&self, x: f64, limit: f64) -> f64 {
        match self.eval(x) {
            Ok(v) if self.kind == ElementaryKind::Tangent => v.clamp(-limit * self.amplitude.abs(), limit * self.amplitude.abs()),
            Ok(v) => v,
            Err(_) => limit * self.amplitude,
        }
    }
}

/// Evaluates a single elementary form.
pub fn eval_elementary(f: &ElementaryForm, x: f64) -> Result<f64> {
    f.eval(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrendForm {
    /// `c[0] + c[1] x + ... + c[n] x^n`
    Polynomial { coefficients: Vec<f64> },
    /// `c0 * exp(c1 x)`
    Exponential { c0: f64, c1: f64 },
}

impl TrendForm {
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::config("polynomial trend needs at least one coefficient"));
        }
        Ok(TrendForm::Polynomial { coefficients })
    }

    pub fn order(&self) -> usize {
        match self {
            TrendForm::Polynomial { coefficients } => coefficients.len().saturating_sub(1),
            TrendForm::Exponential { .. } => 0,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match self {
            // Horner
            TrendForm::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
            TrendForm::Exponential { c0, c1 } => c0 * (c1 * x).exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { x })
        }
    }
}

pub fn eval_trend(t: &TrendForm, x: f64) -> Result<f64> {
    t.eval(x)
}

/// Binary combinators of the grammar. A node combines a lower-order form `g`
/// with an elementary form `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Combinator {
    Sum,
    Product,
    /// `f(g(x))`
    Compose,
}

impl Combinator {
    fn token(self) -> &'static str {
        match self {
            Combinator::Sum => "+",
            Combinator::Product => "*",
            Combinator::Compose => "o",
        }
    }

    fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "+" => Some(Combinator::Sum),
            "*" => Some(Combinator::Product),
            "o" => Some(Combinator::Compose),
            _ => None,
        }
    }
}

/// A periodic form: an elementary leaf or a combinator applied to a form and
/// an elementary form.
#[derive(Debug, Clone, PartialEq)]
pub enum FormExpr {
    Leaf(ElementaryForm),
    Node { op: Combinator, inner: Box<FormExpr>, outer: ElementaryForm },
}

impl FormExpr {
    pub fn leaf(f: ElementaryForm) -> Self {
        FormExpr::Leaf(f)
    }

    pub fn sum(g: FormExpr, f: ElementaryForm) -> Self {
        FormExpr::Node { op: Combinator::Sum, inner: Box::new(g), outer: f }
    }

    pub fn product(g: FormExpr, f: ElementaryForm) -> Self {
        FormExpr::Node { op: Combinator::Product, inner: Box::new(g), outer: f }
    }

    pub fn compose(g: FormExpr, f: ElementaryForm) -> Self {
        FormExpr::Node { op: Combinator::Compose, inner: Box::new(g), outer: f }
    }

    pub fn order(&self) -> usize {
        match self {
            FormExpr::Leaf(_) => 0,
            FormExpr::Node { inner, .. } => inner.order() + 1,
        }
    }

    /// True when the form only uses sums and products.
    pub fn is_sum_product(&self) -> bool {
        match self {
            FormExpr::Leaf(_) => true,
            FormExpr::Node { op, inner, .. } => *op != Combinator::Compose && inner.is_sum_product(),
        }
    }

    pub fn contains_tangent(&self) -> bool {
        self.elementaries().iter().any(|f| f.kind == ElementaryKind::Tangent)
    }

    /// Elementary forms in leaf-first order.
    pub fn elementaries(&self) -> Vec<&ElementaryForm> {
        match self {
            FormExpr::Leaf(f) => vec![f],
            FormExpr::Node { inner, outer, .. } => {
                let mut v = inner.elementaries();
                v.push(outer);
                v
            }
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            FormExpr::Leaf(f) => f.eval(x),
            FormExpr::Node { op, inner, outer } => {
                let g = inner.eval(x)?;
                match op {
                    Combinator::Sum => Ok(g + outer.eval(x)?),
                    Combinator::Product => Ok(g * outer.eval(x)?),
                    Combinator::Compose => outer.eval(g),
                }
            }
        }
    }

    /// Evaluation with every tangent clamped to `[-limit, limit]` (scaled by
    /// its amplitude) before combination. Never fails.
    pub fn eval_clamped(&self, x: f64, limit: f64) -> f64 {
        match self {
            FormExpr::Leaf(f) => f.eval_clamped(x, limit),
            FormExpr::Node { op, inner, outer } => {
                let g = inner.eval_clamped(x, limit);
                match op {
                    Combinator::Sum => g + outer.eval_clamped(x, limit),
                    Combinator::Product => g * outer.eval_clamped(x, limit),
                    Combinator::Compose => outer.eval_clamped(g, limit),
                }
            }
        }
    }

    pub fn skeleton(&self) -> FormSkeleton {
        match self {
            FormExpr::Leaf(f) => FormSkeleton::Leaf(f.kind),
            FormExpr::Node { op, inner, outer } => FormSkeleton::Node {
                op: *op,
                inner: Box::new(inner.skeleton()),
                outer: outer.kind,
            },
        }
    }

    fn to_sexp(&self) -> Sexp {
        fn leaf(f: &ElementaryForm) -> Sexp {
            Sexp::List(vec![
                Sexp::Atom(f.kind.token()),
                Sexp::number(f.period),
                Sexp::number(f.phase),
                Sexp::number(f.amplitude),
            ])
        }
        match self {
            FormExpr::Leaf(f) => leaf(f),
            FormExpr::Node { op, inner, outer } => {
                Sexp::List(vec![Sexp::Atom(op.token().into()), inner.to_sexp(), leaf(outer)])
            }
        }
    }

    fn from_sexp(s: &Sexp) -> Result<Self> {
        fn leaf(s: &Sexp) -> Result<ElementaryForm> {
            let items = s.as_list()?;
            match items {
                [Sexp::Atom(kind), period, phase, amplitude] => ElementaryForm::with_amplitude(
                    ElementaryKind::from_token(kind)?,
                    period.as_number()?,
                    phase.as_number()?,
                    amplitude.as_number()?,
                ),
                _ => Err(Error::parse(format!("malformed elementary form `{s}`"))),
            }
        }
        let items = s.as_list()?;
        if let [Sexp::Atom(head), inner, outer] = items {
            if let Some(op) = Combinator::from_token(head) {
                return Ok(FormExpr::Node { op, inner: Box::new(FormExpr::from_sexp(inner)?), outer: leaf(outer)? });
            }
        }
        leaf(s).map(FormExpr::Leaf)
    }
}

pub fn eval_form(e: &FormExpr, x: f64) -> Result<f64> {
    e.eval(x)
}

/// Writes `(op inner outer)` nodes and `(kind period phase amplitude)` leaves
/// with shortest round-trip float formatting.
impl fmt::Display for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

impl FromStr for FormExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FormExpr::from_sexp(&sexpr::parse(s)?)
    }
}

/// The shape of a form without coefficients, e.g. `(* sin square)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FormSkeleton {
    Leaf(ElementaryKind),
    Node { op: Combinator, inner: Box<FormSkeleton>, outer: ElementaryKind },
}

impl FormSkeleton {
    pub fn order(&self) -> usize {
        match self {
            FormSkeleton::Leaf(_) => 0,
            FormSkeleton::Node { inner, .. } => inner.order() + 1,
        }
    }

    pub fn kinds(&self) -> Vec<ElementaryKind> {
        match self {
            FormSkeleton::Leaf(k) => vec![*k],
            FormSkeleton::Node { inner, outer, .. } => {
                let mut v = inner.kinds();
                v.push(*outer);
                v
            }
        }
    }

    pub fn contains_compose(&self) -> bool {
        match self {
            FormSkeleton::Leaf(_) => false,
            FormSkeleton::Node { op, inner, .. } => *op == Combinator::Compose || inner.contains_compose(),
        }
    }

    /// Rebuilds a form from this skeleton, taking elementary forms in
    /// leaf-first order from `fill`.
    pub fn instantiate(&self, fill: &mut impl FnMut(ElementaryKind) -> ElementaryForm) -> FormExpr {
        match self {
            FormSkeleton::Leaf(k) => FormExpr::Leaf(fill(*k)),
            FormSkeleton::Node { op, inner, outer } => {
                let inner = inner.instantiate(fill);
                FormExpr::Node { op: *op, inner: Box::new(inner), outer: fill(*outer) }
            }
        }
    }

    fn to_sexp(&self) -> Sexp {
        match self {
            FormSkeleton::Leaf(k) => Sexp::Atom(k.token()),
            FormSkeleton::Node { op, inner, outer } => Sexp::List(vec![
                Sexp::Atom(op.token().into()),
                inner.to_sexp(),
                Sexp::Atom(outer.token()),
            ]),
        }
    }

    fn from_sexp(s: &Sexp) -> Result<Self> {
        match s {
            Sexp::Atom(tok) => Ok(FormSkeleton::Leaf(ElementaryKind::from_token(tok)?)),
            Sexp::List(items) => match items.as_slice() {
                [Sexp::Atom(head), inner, Sexp::Atom(outer)] => {
                    let op = Combinator::from_token(head)
                        .ok_or_else(|| Error::parse(format!("unknown combinator `{head}`")))?;
                    Ok(FormSkeleton::Node {
                        op,
                        inner: Box::new(FormSkeleton::from_sexp(inner)?),
                        outer: ElementaryKind::from_token(outer)?,
                    })
                }
                _ => Err(Error::parse(format!("malformed skeleton `{s}`"))),
            },
        }
    }
}

impl fmt::Display for FormSkeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

impl FromStr for FormSkeleton {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FormSkeleton::from_sexp(&sexpr::parse(s)?)
    }
}

/// All skeletons of order `0..=max_order` over `kinds` closed under `ops`.
///
/// Order `i` contributes `|kinds| * (|ops| * |kinds|)^i` skeletons.
pub fn enumerate_skeletons(kinds: &[ElementaryKind], ops: &[Combinator], max_order: usize) -> Vec<FormSkeleton> {
    let mut all: Vec<FormSkeleton> = kinds.iter().map(|&k| FormSkeleton::Leaf(k)).collect();
    let mut frontier = all.clone();
    for _ in 0..max_order {
        let mut next = Vec::with_capacity(frontier.len() * ops.len() * kinds.len());
        for g in &frontier {
            for &op in ops {
                for &k in kinds {
                    next.push(FormSkeleton::Node { op, inner: Box::new(g.clone()), outer: k });
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}
