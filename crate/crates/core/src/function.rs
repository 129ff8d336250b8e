//! Scalar functions applied entrywise, their domains, and the admissible
//! families attached to each regime.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::matrix::C64;
use crate::pattern::{BlockCount, Regime};

/// Absolute tolerance of the conjugate-equivariance check.
pub const EQUIVARIANCE_TOL: f64 = 1e-10;
/// Slack of the dominance check `g(x) - f(x) >= -DOMINANCE_TOL`.
pub const DOMINANCE_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_DEGREE: u32 = 8;

/// Relative width of the excluded rim of an open domain of finite radius.
const BOUNDARY_SLACK: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("{z} is outside the domain {domain}")]
    OutOfDomain { z: Complex64, domain: Domain },
    #[error("coefficient {value} of term z^{m} conj(z)^{k} is negative")]
    NegativeCoefficient { m: u32, k: u32, value: f64 },
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },
    #[error("{which}({x}) = {value} is not real")]
    NonRealValue { which: &'static str, x: f64, value: Complex64 },
    #[error("regime {0} has no scalar interval")]
    RegimeMismatch(String),
    #[error("g vanishes identically (alpha = 0)")]
    DegenerateG,
    #[error("g must be a Herz monomial")]
    NotHerzMonomial,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// Open disc `D(0, ρ)` in ℂ.
    Disc,
    /// `(-ρ, ρ)`.
    OpenSym,
    /// `[0, ρ)`.
    HalfOpenNonneg,
    /// `(0, ρ)`.
    OpenPos,
}

/// Entry domain `I`, with radius `ρ ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    rho: f64,
}

impl Domain {
    pub fn new(kind: DomainKind, rho: f64) -> Result<Self, FunctionError> {
        if rho.is_nan() || rho <= 0.0 {
            return Err(FunctionError::InvalidDomain(format!("radius must be positive, got {rho}")));
        }
        Ok(Self { kind, rho })
    }

    pub fn unit_disc() -> Self {
        Self { kind: DomainKind::Disc, rho: 1.0 }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_bounded(&self) -> bool {
        self.rho.is_finite()
    }

    pub fn is_real(&self) -> bool {
        self.kind != DomainKind::Disc
    }

    pub fn contains_zero(&self) -> bool {
        self.kind != DomainKind::OpenPos
    }

    /// True when `|x| < ρ`, with finite `ρ` shrunk by a relative `1e-15`.
    fn within_radius(&self, r: f64) -> bool {
        r.is_finite() && (!self.is_bounded() || r <= self.rho - BOUNDARY_SLACK * self.rho)
    }

    pub fn contains(&self, z: C64) -> bool {
        if !z.re.is_finite() || !z.im.is_finite() {
            return false;
        }
        match self.kind {
            DomainKind::Disc => self.within_radius(z.norm()),
            DomainKind::OpenSym => z.im == 0.0 && self.within_radius(z.re.abs()),
            DomainKind::HalfOpenNonneg => z.im == 0.0 && z.re >= 0.0 && self.within_radius(z.re),
            DomainKind::OpenPos => z.im == 0.0 && z.re > 0.0 && self.within_radius(z.re),
        }
    }

    pub fn check(&self, z: C64) -> Result<(), FunctionError> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(FunctionError::OutOfDomain { z, domain: *self })
        }
    }

    /// Conjugation-closed probe points inside the domain.
    pub fn probe_points(&self) -> Vec<C64> {
        let s = if self.is_bounded() { self.rho } else { 4.0 };
        let radii = [0.0, 0.1, 0.35, 0.6, 0.9];
        let mut pts = Vec::new();
        for &r in &radii {
            let x = r * s;
            match self.kind {
                DomainKind::Disc => {
                    for t in 0..8 {
                        let theta = std::f64::consts::PI * t as f64 / 4.0 + 0.3;
                        let z = C64::from_polar(x, theta);
                        pts.push(z);
                        pts.push(z.conj());
                    }
                    pts.push(C64::new(x, 0.0));
                    pts.push(C64::new(-x, 0.0));
                }
                DomainKind::OpenSym => {
                    pts.push(C64::new(x, 0.0));
                    pts.push(C64::new(-x, 0.0));
                }
                DomainKind::HalfOpenNonneg | DomainKind::OpenPos => pts.push(C64::new(x, 0.0)),
            }
        }
        pts.retain(|&z| self.contains(z));
        pts
    }

    /// Nonnegative real sample points in `I ∩ ℝ≥0`, in increasing order.
    pub fn nonneg_samples(&self, count: usize) -> Vec<f64> {
        let s = if self.is_bounded() { self.rho } else { 10.0 };
        (0..count)
            .map(|i| s * 0.99 * i as f64 / count.saturating_sub(1).max(1) as f64)
            .filter(|&x| self.contains(C64::new(x, 0.0)))
            .collect()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = if self.is_bounded() { self.rho.to_string() } else { "∞".to_string() };
        match self.kind {
            DomainKind::Disc => write!(f, "D(0,{r})"),
            DomainKind::OpenSym => write!(f, "(-{r},{r})"),
            DomainKind::HalfOpenNonneg => write!(f, "[0,{r})"),
            DomainKind::OpenPos => write!(f, "(0,{r})"),
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rho = if self.is_bounded() { json!(self.rho) } else { json!("inf") };
        json!({ "kind": self.kind, "rho": rho }).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            kind: DomainKind,
            #[serde(default)]
            rho: Value,
        }
        let r = Repr::deserialize(d)?;
        let rho = match r.rho {
            Value::Null => f64::INFINITY,
            Value::Number(n) => n.as_f64().unwrap_or(f64::NAN),
            Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => f64::INFINITY,
            other => return Err(serde::de::Error::custom(format!("invalid rho: {other}"))),
        };
        Domain::new(r.kind, rho).map_err(serde::de::Error::custom)
    }
}

/// One term `c · z^m · conj(z)^k` of a Herz series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerzTerm {
    pub m: u32,
    pub k: u32,
    pub c: f64,
}

pub type CustomFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

#[derive(Clone)]
pub enum PreserverFunction {
    /// `alpha · z^m · conj(z)^k`.
    HerzMonomial { alpha: f64, m: u32, k: u32 },
    /// `Σ c_{m,k} z^m conj(z)^k` over terms with `m + k <= max_degree`.
    HerzSeries { terms: Vec<HerzTerm>, max_degree: u32 },
    ScalarMultiple { c: f64, inner: Box<PreserverFunction> },
    Identity,
    Zero,
    /// Arbitrary pure evaluator. `declared_equivariant` records the caller's
    /// claim that `f(conj z) = conj f(z)`; it is checked before use.
    Custom { name: String, eval: CustomFn, declared_equivariant: bool },
}

impl fmt::Debug for PreserverFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PreserverFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreserverFunction::HerzMonomial { alpha, m, k } => write!(f, "{alpha}·z^{m}·z̄^{k}"),
            PreserverFunction::HerzSeries { terms, max_degree } => {
                let parts: Vec<String> = terms.iter().map(|t| format!("{}·z^{}·z̄^{}", t.c, t.m, t.k)).collect();
                write!(f, "[{}] (deg ≤ {max_degree})", parts.join(" + "))
            }
            PreserverFunction::ScalarMultiple { c, inner } => write!(f, "{c}·({inner})"),
            PreserverFunction::Identity => f.write_str("id"),
            PreserverFunction::Zero => f.write_str("0"),
            PreserverFunction::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

/// `z^m conj(z)^k`, computed as `|z|^{2 min(m,k)}` times the leftover power
/// so that equal exponents give an exactly real result.
fn herz_power(z: C64, m: u32, k: u32) -> C64 {
    let s = m.min(k);
    let base = z.norm_sqr().powi(s as i32);
    let rest = if m > s { z.powu(m - s) } else { z.conj().powu(k - s) };
    rest * base
}

impl PreserverFunction {
    pub fn herz_monomial(alpha: f64, m: u32, k: u32) -> Result<Self, FunctionError> {
        let f = PreserverFunction::HerzMonomial { alpha, m, k };
        f.validate()?;
        Ok(f)
    }

    pub fn herz_series(terms: Vec<HerzTerm>, max_degree: u32) -> Result<Self, FunctionError> {
        let f = PreserverFunction::HerzSeries { terms, max_degree };
        f.validate()?;
        Ok(f)
    }

    pub fn scalar(c: f64, inner: PreserverFunction) -> Result<Self, FunctionError> {
        let f = PreserverFunction::ScalarMultiple { c, inner: Box::new(inner) };
        f.validate()?;
        Ok(f)
    }

    /// `c · z`.
    pub fn linear(c: f64) -> Self {
        PreserverFunction::ScalarMultiple { c, inner: Box::new(PreserverFunction::Identity) }
    }

    pub fn custom(name: impl Into<String>, declared_equivariant: bool, eval: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        PreserverFunction::Custom { name: name.into(), eval: Arc::new(eval), declared_equivariant }
    }

    pub fn validate(&self) -> Result<(), FunctionError> {
        let finite = |name: &'static str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(FunctionError::NonFiniteParameter { name, value })
            }
        };
        match self {
            PreserverFunction::HerzMonomial { alpha, m, k } => {
                finite("alpha", *alpha)?;
                if *alpha < 0.0 {
                    return Err(FunctionError::NegativeCoefficient { m: *m, k: *k, value: *alpha });
                }
            }
            PreserverFunction::HerzSeries { terms, .. } => {
                for t in terms {
                    finite("c", t.c)?;
                    if t.c < 0.0 {
                        return Err(FunctionError::NegativeCoefficient { m: t.m, k: t.k, value: t.c });
                    }
                }
            }
            PreserverFunction::ScalarMultiple { c, inner } => {
                finite("c", *c)?;
                inner.validate()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Value at `z` without a domain check.
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            PreserverFunction::HerzMonomial { alpha, m, k } => herz_power(z, *m, *k) * *alpha,
            PreserverFunction::HerzSeries { terms, max_degree } => terms
                .iter()
                .filter(|t| t.m + t.k <= *max_degree)
                .fold(C64::new(0.0, 0.0), |acc, t| acc + herz_power(z, t.m, t.k) * t.c),
            PreserverFunction::ScalarMultiple { c, inner } => inner.eval(z) * *c,
            PreserverFunction::Identity => z,
            PreserverFunction::Zero => C64::new(0.0, 0.0),
            PreserverFunction::Custom { eval, .. } => eval(z),
        }
    }

    pub fn evaluate(&self, z: C64, domain: &Domain) -> Result<C64, FunctionError> {
        domain.check(z)?;
        Ok(self.eval(z))
    }

    /// True for every variant except `Custom`, whose equivariance has to be
    /// checked by sampling.
    pub fn is_builtin(&self) -> bool {
        match self {
            PreserverFunction::Custom { .. } => false,
            PreserverFunction::ScalarMultiple { inner, .. } => inner.is_builtin(),
            _ => true,
        }
    }

    /// `Some(c)` when the function is `z ↦ c z`.
    pub fn linear_coefficient(&self) -> Option<f64> {
        match self {
            PreserverFunction::Identity => Some(1.0),
            PreserverFunction::Zero => Some(0.0),
            PreserverFunction::HerzMonomial { alpha, m: 1, k: 0 } => Some(*alpha),
            PreserverFunction::HerzMonomial { alpha, .. } => (*alpha == 0.0).then_some(0.0),
            PreserverFunction::HerzSeries { terms, max_degree } => {
                let mut c = 0.0;
                for t in terms.iter().filter(|t| t.m + t.k <= *max_degree && t.c != 0.0) {
                    if (t.m, t.k) != (1, 0) {
                        return None;
                    }
                    c += t.c;
                }
                Some(c)
            }
            PreserverFunction::ScalarMultiple { c, inner } => inner.linear_coefficient().map(|a| a * c),
            PreserverFunction::Custom { .. } => None,
        }
    }

    /// `(alpha, m, k)` when the function is a single Herz monomial.
    pub fn as_herz_monomial(&self) -> Option<(f64, u32, u32)> {
        match self {
            PreserverFunction::HerzMonomial { alpha, m, k } => Some((*alpha, *m, *k)),
            PreserverFunction::Identity => Some((1.0, 1, 0)),
            PreserverFunction::ScalarMultiple { c, inner } if *c >= 0.0 => {
                inner.as_herz_monomial().map(|(a, m, k)| (a * c, m, k))
            }
            _ => None,
        }
    }

    /// JSON form; `None` for custom evaluators.
    pub fn to_json(&self) -> Option<Value> {
        let (variant, params) = match self {
            PreserverFunction::HerzMonomial { alpha, m, k } => ("herz_monomial", json!({"alpha": alpha, "m": m, "k": k})),
            PreserverFunction::HerzSeries { terms, max_degree } => {
                ("herz_series", json!({"terms": terms, "max_degree": max_degree}))
            }
            PreserverFunction::ScalarMultiple { c, inner } => ("scalar_multiple", json!({"c": c, "inner": inner.to_json()?})),
            PreserverFunction::Identity => ("identity", json!({})),
            PreserverFunction::Zero => ("zero", json!({})),
            PreserverFunction::Custom { .. } => return None,
        };
        Some(json!({"variant": variant, "params": params}))
    }

    pub fn from_json(value: &Value) -> Result<Self, FunctionError> {
        let bad = |m: String| FunctionError::InvalidFunction(m);
        let variant = value.get("variant").and_then(Value::as_str).ok_or_else(|| bad("missing \"variant\"".into()))?;
        let empty = Value::Object(Map::new());
        let params = value.get("params").unwrap_or(&empty);
        let int = |name: &str, default: Option<u32>| -> Result<u32, FunctionError> {
            match params.get(name) {
                None => default.ok_or_else(|| bad(format!("{variant} needs \"{name}\""))),
                Some(v) => v
                    .as_u64()
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| bad(format!("\"{name}\" must be a non-negative integer"))),
            }
        };
        let real = |name: &str| -> Result<f64, FunctionError> {
            params
                .get(name)
                .ok_or_else(|| bad(format!("{variant} needs \"{name}\"")))
                .and_then(|v| parse_real(v).ok_or_else(|| bad(format!("\"{name}\" must be a number or fraction"))))
        };
        match variant {
            "herz_monomial" => Self::herz_monomial(real("alpha")?, int("m", None)?, int("k", Some(0))?),
            "herz_series" => {
                let terms: Vec<HerzTerm> = serde_json::from_value(
                    params.get("terms").cloned().ok_or_else(|| bad("herz_series needs \"terms\"".into()))?,
                )
                .map_err(|e| bad(format!("terms: {e}")))?;
                Self::herz_series(terms, int("max_degree", Some(DEFAULT_MAX_DEGREE))?)
            }
            "scalar_multiple" => {
                let inner = match params.get("inner") {
                    Some(v) => Self::from_json(v)?,
                    None => PreserverFunction::Identity,
                };
                Self::scalar(real("c")?, inner)
            }
            "identity" => Ok(PreserverFunction::Identity),
            "zero" => Ok(PreserverFunction::Zero),
            other => Err(bad(format!("unknown variant \"{other}\""))),
        }
    }
}

/// Accepts a JSON number or a string holding a decimal or an exact fraction
/// such as `"-1/2"`.
pub fn parse_real(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_real_str(s),
        _ => None,
    }
}

pub fn parse_real_str(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().ok()?;
        let q: f64 = q.trim().parse().ok()?;
        (q != 0.0).then(|| p / q)
    } else {
        s.parse().ok()
    }
}

impl Serialize for PreserverFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.to_json() {
            Some(v) => v.serialize(s),
            None => json!({"variant": "custom", "params": {"name": self.to_string()}}).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PreserverFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        PreserverFunction::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// `true` iff `|f(conj z) - conj f(z)| <= 1e-10` on every sample.
pub fn conjugate_equivariance_check(f: &PreserverFunction, samples: &[C64]) -> bool {
    samples.iter().all(|&z| (f.eval(z.conj()) - f.eval(z).conj()).norm() <= EQUIVARIANCE_TOL)
}

/// Checks `g(x) >= f(x) - 1e-12` on nonnegative real samples.
pub fn dominance_check(g: &PreserverFunction, f: &PreserverFunction, samples: &[f64]) -> Result<bool, FunctionError> {
    let mut ok = true;
    for &x in samples {
        let z = C64::new(x, 0.0);
        let gx = real_value("g", x, g.eval(z))?;
        let fx = real_value("f", x, f.eval(z))?;
        ok &= gx - fx >= -DOMINANCE_TOL;
    }
    Ok(ok)
}

fn real_value(which: &'static str, x: f64, value: C64) -> Result<f64, FunctionError> {
    if value.im.abs() <= 1e-12 * value.norm().max(1.0) {
        Ok(value.re)
    } else {
        Err(FunctionError::NonRealValue { which, x, value })
    }
}

pub type Rational = Ratio<i64>;

/// Closed interval of admissible scalars `c`, with exact endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl ScalarInterval {
    /// `[-1/(k-1), 1]`. Requires `k >= 2`.
    pub fn partition(k: usize) -> Self {
        assert!(k >= 2, "partition interval needs k >= 2");
        Self { lo: Rational::new(-1, k as i64 - 1), hi: Rational::from_integer(1) }
    }

    pub fn unit() -> Self {
        Self { lo: Rational::from_integer(0), hi: Rational::from_integer(1) }
    }

    pub fn contains_exact(&self, c: Rational) -> bool {
        self.lo <= c && c <= self.hi
    }

    /// Membership of a float, where each endpoint is represented by its
    /// nearest double.
    pub fn contains(&self, c: f64) -> bool {
        c >= ratio_to_f64(self.lo) && c <= ratio_to_f64(self.hi)
    }

    pub fn to_strings(&self) -> [String; 2] {
        [self.lo.to_string(), self.hi.to_string()]
    }
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Admissible `f` for the `g = id` problem in a given regime.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDescriptor {
    pub regime: Regime,
    pub k: BlockCount,
    pub family: &'static str,
    pub c_interval: Option<ScalarInterval>,
    pub constraint: Option<&'static str>,
}

impl FamilyDescriptor {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("regime".into(), json!(self.regime.tag()));
        m.insert("table_row".into(), json!(self.regime.table_row()));
        m.insert("K".into(), serde_json::to_value(self.k).expect("serializable"));
        m.insert("family".into(), json!(self.family));
        m.insert("constraint".into(), self.constraint.map_or(Value::Null, |c| json!(c)));
        m.insert("c_interval".into(), self.c_interval.map_or(Value::Null, |i| json!(i.to_strings())));
        Value::Object(m)
    }
}

/// The family of `f` that preserves positivity together with `g = id`.
/// `k` is `max |T_n|`; for the partition regime it is taken from the regime.
pub fn admissible_family(regime: Regime, k: BlockCount) -> FamilyDescriptor {
    let (family, c_interval, constraint, k) = match regime {
        Regime::Empty => ("Herz series", None, None, k),
        Regime::Singletons => ("Herz series", None, Some("f(x) ≤ x on I∩ℝ≥0"), k),
        Regime::PartitionAll { k } => {
            ("scalar multiple c·z", Some(ScalarInterval::partition(k)), None, BlockCount::Finite(k))
        }
        Regime::SubpartitionOther => ("scalar multiple c·z", Some(ScalarInterval::unit()), None, k),
        Regime::Overlapping => ("identity only", None, Some("f = id"), k),
    };
    FamilyDescriptor { regime, k, family, c_interval, constraint }
}

/// Interval of `c` in `f = c·g` for a Herz monomial `g`.
pub fn admissible_c_interval_pair(regime: Regime, g: &PreserverFunction) -> Result<ScalarInterval, FunctionError> {
    let (alpha, _, _) = g.as_herz_monomial().ok_or(FunctionError::NotHerzMonomial)?;
    if alpha <= 0.0 {
        return Err(FunctionError::DegenerateG);
    }
    match regime {
        Regime::PartitionAll { k } => Ok(ScalarInterval::partition(k)),
        Regime::SubpartitionOther => Ok(ScalarInterval::unit()),
        other => Err(FunctionError::RegimeMismatch(other.tag().to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let d = Domain::unit_disc();
        let id = PreserverFunction::herz_monomial(1.0, 1, 0).unwrap();
        assert_eq!(id.evaluate(c(0.5, 0.2), &d).unwrap(), c(0.5, 0.2));

        let z = c(0.3, -0.4);
        let v = PreserverFunction::herz_monomial(2.0, 1, 1).unwrap().eval(z);
        assert_eq!(v.im, 0.0);
        assert!((v.re - 2.0 * 0.25).abs() < 1e-15);

        let s = PreserverFunction::herz_series(vec![HerzTerm { m: 0, k: 0, c: 1.0 }, HerzTerm { m: 1, k: 1, c: 1.0 }], 8)
            .unwrap();
        assert_eq!(s.eval(c(0.5, 0.0)), c(1.25, 0.0));

        assert!(matches!(id.evaluate(c(1.0, 0.0), &d), Err(FunctionError::OutOfDomain { .. })));
    }

    #[test]
    fn zero_power_is_one() {
        let f = PreserverFunction::herz_monomial(3.0, 0, 0).unwrap();
        assert_eq!(f.eval(c(0.0, 0.0)), c(3.0, 0.0));
    }

    #[test]
    fn series_truncates_by_degree() {
        let terms = vec![HerzTerm { m: 1, k: 0, c: 1.0 }, HerzTerm { m: 5, k: 0, c: 1.0 }];
        let low = PreserverFunction::herz_series(terms.clone(), 4).unwrap();
        let high = PreserverFunction::herz_series(terms, 5).unwrap();
        assert_eq!(low.eval(c(0.5, 0.0)).re, 0.5);
        assert_eq!(high.eval(c(0.5, 0.0)).re, 0.5 + 0.5f64.powi(5));
    }

    #[test]
    fn negative_coefficients_rejected() {
        assert!(matches!(
            PreserverFunction::herz_monomial(-1.0, 1, 0),
            Err(FunctionError::NegativeCoefficient { .. })
        ));
        assert!(PreserverFunction::herz_series(vec![HerzTerm { m: 2, k: 0, c: -0.1 }], 8).is_err());
        // scalar multiples may be negative
        assert!(PreserverFunction::scalar(-0.5, PreserverFunction::Identity).is_ok());
    }

    #[test]
    fn domain_membership() {
        let d = Domain::unit_disc();
        assert!(d.contains(c(0.6, 0.79)));
        assert!(!d.contains(c(1.0, 0.0)));
        let d = Domain::new(DomainKind::OpenPos, 1.0).unwrap();
        assert!(!d.contains(c(0.0, 0.0)));
        assert!(d.contains(c(0.5, 0.0)));
        assert!(!d.contains(c(0.5, 1e-300)));
        let d = Domain::new(DomainKind::HalfOpenNonneg, f64::INFINITY).unwrap();
        assert!(d.contains(c(1e300, 0.0)));
        assert!(!d.contains(c(-1e-300, 0.0)));
        let d = Domain::new(DomainKind::OpenSym, 2.0).unwrap();
        assert!(d.contains(c(-1.9, 0.0)));
        assert!(Domain::new(DomainKind::Disc, 0.0).is_err());
    }

    #[test]
    fn equivariance() {
        let pts = Domain::unit_disc().probe_points();
        assert!(conjugate_equivariance_check(&PreserverFunction::Identity, &pts));
        let s = PreserverFunction::herz_series(vec![HerzTerm { m: 2, k: 1, c: 0.3 }, HerzTerm { m: 0, k: 3, c: 1.0 }], 8)
            .unwrap();
        assert!(conjugate_equivariance_check(&s, &pts));
        let bad = PreserverFunction::custom("const_i", true, |_| c(0.0, 1.0));
        assert!(!conjugate_equivariance_check(&bad, &pts));
    }

    #[test]
    fn dominance_examples() {
        let d = Domain::new(DomainKind::HalfOpenNonneg, 1.0).unwrap();
        let xs = d.nonneg_samples(20);
        let id = PreserverFunction::Identity;
        assert!(dominance_check(&id, &PreserverFunction::linear(0.5), &xs).unwrap());
        assert!(!dominance_check(&id, &PreserverFunction::linear(2.0), &xs).unwrap());
        assert!(dominance_check(&id, &id, &xs).unwrap());
        let complex = PreserverFunction::custom("rot", false, |z| z * c(0.0, 1.0));
        assert!(matches!(dominance_check(&id, &complex, &xs), Err(FunctionError::NonRealValue { .. })));
    }

    #[test]
    fn families() {
        let d = admissible_family(Regime::PartitionAll { k: 3 }, BlockCount::Finite(3));
        assert_eq!(d.c_interval.unwrap().to_strings(), ["-1/2".to_string(), "1".to_string()]);
        let d = admissible_family(Regime::SubpartitionOther, BlockCount::Infinite);
        assert_eq!(d.c_interval.unwrap().to_strings(), ["0".to_string(), "1".to_string()]);
        let d = admissible_family(Regime::Overlapping, BlockCount::Finite(2));
        assert_eq!(d.constraint, Some("f = id"));
        assert_eq!(d.family, "identity only");
        assert!(admissible_family(Regime::Empty, BlockCount::Finite(0)).c_interval.is_none());
    }

    #[test]
    fn pair_intervals() {
        let g = PreserverFunction::herz_monomial(1.0, 2, 1).unwrap();
        assert_eq!(
            admissible_c_interval_pair(Regime::PartitionAll { k: 2 }, &g).unwrap().to_strings(),
            ["-1".to_string(), "1".to_string()]
        );
        assert_eq!(
            admissible_c_interval_pair(Regime::PartitionAll { k: 4 }, &g).unwrap().lo,
            Rational::new(-1, 3)
        );
        assert_eq!(admissible_c_interval_pair(Regime::SubpartitionOther, &g).unwrap(), ScalarInterval::unit());
        assert!(matches!(
            admissible_c_interval_pair(Regime::Overlapping, &g),
            Err(FunctionError::RegimeMismatch(_))
        ));
        let g0 = PreserverFunction::herz_monomial(0.0, 1, 0).unwrap();
        assert_eq!(admissible_c_interval_pair(Regime::SubpartitionOther, &g0), Err(FunctionError::DegenerateG));
    }

    #[test]
    fn float_interval_boundary() {
        let i = ScalarInterval::partition(4);
        assert!(i.contains(-1.0 / 3.0));
        assert!(!i.contains(-1.0 / 3.0 - 1e-15));
        assert!(i.contains(1.0));
        assert!(!i.contains(1.0 + f64::EPSILON));
    }

    #[test]
    fn function_json_roundtrip() {
        let fs = vec![
            PreserverFunction::herz_monomial(2.0, 1, 3).unwrap(),
            PreserverFunction::herz_series(vec![HerzTerm { m: 0, k: 0, c: 1.0 }], 6).unwrap(),
            PreserverFunction::linear(-0.5),
            PreserverFunction::Identity,
            PreserverFunction::Zero,
        ];
        for f in fs {
            let v = f.to_json().unwrap();
            let back = PreserverFunction::from_json(&v).unwrap();
            assert_eq!(back.to_json().unwrap(), v);
        }
        let v = json!({"variant": "scalar_multiple", "params": {"c": "-1/3"}});
        assert_eq!(PreserverFunction::from_json(&v).unwrap().linear_coefficient(), Some(-1.0 / 3.0));
        let v = json!({"variant": "herz_monomial", "params": {"alpha": -1, "m": 1}});
        assert!(PreserverFunction::from_json(&v).is_err());
    }

    #[test]
    fn domain_json() {
        let d: Domain = serde_json::from_value(json!({"kind": "open_pos", "rho": "inf"})).unwrap();
        assert_eq!(d.kind(), DomainKind::OpenPos);
        assert!(!d.is_bounded());
        let d: Domain = serde_json::from_value(json!({"kind": "disc", "rho": 2.5})).unwrap();
        assert_eq!(serde_json::to_value(d).unwrap(), json!({"kind": "disc", "rho": 2.5}));
        assert!(serde_json::from_value::<Domain>(json!({"kind": "disc", "rho": -1})).is_err());
    }
}
