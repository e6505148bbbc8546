//! Mixed continuous/integer/categorical design space with a continuous
//! unit-cube embedding.
//!
//! Scalars min-max scale to `[0,1]`; categoricals one-hot encode and decode
//! by argmax; integers round on decode. A conditional parameter that is
//! suppressed (its controlling value not matched) encodes as mid-range 0.5
//! so the embedded dimension count stays fixed across points. Parameters
//! named `count_*` are core counts and must not all be zero; decode repairs
//! an all-zero assignment by bumping the class with the largest encoded
//! coordinate to one.

pub mod sobol;

use rand::Rng;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use sobol::SobolSequence;

/// Prefix identifying core-count parameters, which carry the
/// at-least-one-core constraint.
pub const COUNT_PREFIX: &str = "count_";

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("invalid search space: {0}")]
    BadSpace(String),
    #[error("invalid design point: {}", .0.join("; "))]
    InvalidPoint(Vec<String>),
    #[error("encoded point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("space needs {needed} Sobol dimensions, only {supported} supported")]
    SobolDimension { needed: usize, supported: usize },
}

/// Domain of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum ParamKind {
    Continuous { lo: f64, hi: f64 },
    Integer { lo: i64, hi: i64 },
    Categorical { options: Vec<String> },
}

/// One tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
    /// `Some((param, values))` keeps this parameter active only while the
    /// named categorical parameter takes one of `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional_on: Option<(String, Vec<String>)>,
}

impl ParamDef {
    pub fn continuous(name: &str, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), kind: ParamKind::Continuous { lo, hi }, conditional_on: None }
    }

    pub fn integer(name: &str, lo: i64, hi: i64) -> Self {
        Self { name: name.into(), kind: ParamKind::Integer { lo, hi }, conditional_on: None }
    }

    pub fn categorical(name: &str, options: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Categorical { options: options.iter().map(|s| s.to_string()).collect() },
            conditional_on: None,
        }
    }

    pub fn conditional(mut self, on: &str, values: &[&str]) -> Self {
        self.conditional_on = Some((on.into(), values.iter().map(|s| s.to_string()).collect()));
        self
    }

    /// Width of this parameter in the encoded vector.
    fn encoded_width(&self) -> usize {
        match &self.kind {
            ParamKind::Categorical { options } => options.len(),
            _ => 1,
        }
    }
}

/// An ordered set of parameter definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamDef>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamDef>) -> Result<Self, SpaceError> {
        let space = Self { params };
        space.validate_definition()?;
        Ok(space)
    }

    fn validate_definition(&self) -> Result<(), SpaceError> {
        if self.params.is_empty() {
            return Err(SpaceError::BadSpace("space has no parameters".into()));
        }
        for (i, p) in self.params.iter().enumerate() {
            if p.name.is_empty() {
                return Err(SpaceError::BadSpace(format!("parameter {i} has an empty name")));
            }
            if self.params[..i].iter().any(|q| q.name == p.name) {
                return Err(SpaceError::BadSpace(format!("duplicate parameter name `{}`", p.name)));
            }
            match &p.kind {
                ParamKind::Continuous { lo, hi } => {
                    if !(lo < hi) {
                        return Err(SpaceError::BadSpace(format!(
                            "`{}`: continuous bounds [{lo}, {hi}] must satisfy lo < hi",
                            p.name
                        )));
                    }
                }
                ParamKind::Integer { lo, hi } => {
                    if lo > hi {
                        return Err(SpaceError::BadSpace(format!(
                            "`{}`: integer bounds {{{lo}..{hi}}} must satisfy lo <= hi",
                            p.name
                        )));
                    }
                }
                ParamKind::Categorical { options } => {
                    if options.len() < 2 {
                        return Err(SpaceError::BadSpace(format!(
                            "`{}`: categorical needs at least 2 options",
                            p.name
                        )));
                    }
                }
            }
            if let Some((on, values)) = &p.conditional_on {
                let controller = self.params[..i].iter().find(|q| &q.name == on).ok_or_else(|| {
                    SpaceError::BadSpace(format!(
                        "`{}`: conditional on `{on}`, which is not an earlier parameter",
                        p.name
                    ))
                })?;
                let ParamKind::Categorical { options } = &controller.kind else {
                    return Err(SpaceError::BadSpace(format!(
                        "`{}`: conditional controller `{on}` must be categorical",
                        p.name
                    )));
                };
                if values.iter().any(|v| !options.contains(v)) {
                    return Err(SpaceError::BadSpace(format!(
                        "`{}`: conditional values must be options of `{on}`",
                        p.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the encoded unit cube.
    pub fn dim(&self) -> usize {
        self.params.iter().map(ParamDef::encoded_width).sum()
    }

    /// One label per encoded dimension; one-hot dims are `name=option`.
    pub fn encoded_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.dim());
        for p in &self.params {
            match &p.kind {
                ParamKind::Categorical { options } => {
                    labels.extend(options.iter().map(|o| format!("{}={o}", p.name)));
                }
                _ => labels.push(p.name.clone()),
            }
        }
        labels
    }

    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Value taken by one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_float(&self) -> Option<f64> {
        match self {
            ParamValue::Float(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Cat(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(v) => Some(v),
            _ => None,
        }
    }
}

/// A full assignment of the space's non-suppressed parameters, in space
/// order. Suppressed conditionals are simply absent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignPoint {
    pub values: Vec<(String, ParamValue)>,
}

impl DesignPoint {
    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn float(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(ParamValue::as_float)
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        self.get(name).and_then(ParamValue::as_int)
    }

    pub fn cat(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(ParamValue::as_cat)
    }

    fn set(&mut self, name: &str, value: ParamValue) {
        self.values.push((name.to_string(), value));
    }
}

impl Serialize for DesignPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (name, value) in &self.values {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DesignPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PointVisitor;
        impl<'de> Visitor<'de> for PointVisitor {
            type Value = DesignPoint;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a map of parameter names to values")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut values = Vec::new();
                while let Some((name, value)) = access.next_entry::<String, ParamValue>()? {
                    values.push((name, value));
                }
                Ok(DesignPoint { values })
            }
        }
        deserializer.deserialize_map(PointVisitor)
    }
}

/// The hardware/scheduler space tuned by default: per-class frequency and
/// count for little/medium/big cores, the scheduling policy, and a time
/// quantum active only for Round-Robin and Priority.
pub fn default_space() -> SearchSpace {
    SearchSpace::new(vec![
        ParamDef::continuous("freq_little_ghz", 0.5, 1.5),
        ParamDef::integer("count_little", 0, 4),
        ParamDef::continuous("freq_medium_ghz", 1.0, 2.5),
        ParamDef::integer("count_medium", 0, 4),
        ParamDef::continuous("freq_big_ghz", 1.5, 3.5),
        ParamDef::integer("count_big", 0, 4),
        ParamDef::categorical("scheduler", &["FCFS", "RR", "Priority"]),
        ParamDef::continuous("quantum_ms", 0.5, 5.0).conditional("scheduler", &["RR", "Priority"]),
    ])
    .expect("default space is well-formed")
}

fn suppressed(p: &ParamDef, point: &DesignPoint) -> bool {
    match &p.conditional_on {
        Some((on, values)) => match point.cat(on) {
            Some(v) => !values.iter().any(|x| x == v),
            None => true,
        },
        None => false,
    }
}

/// Checks `point` against `space`; the returned list is empty iff valid.
pub fn validate(point: &DesignPoint, space: &SearchSpace) -> Vec<String> {
    let mut violations = Vec::new();
    for (name, _) in &point.values {
        if space.param(name).is_none() {
            violations.push(format!("`{name}` is not a parameter of the space"));
        }
    }
    let mut count_sum: Option<i64> = None;
    for p in &space.params {
        let value = point.get(&p.name);
        if suppressed(p, point) {
            if value.is_some() {
                violations.push(format!(
                    "`{}` must be absent unless {:?} holds",
                    p.name, p.conditional_on
                ));
            }
            continue;
        }
        let Some(value) = value else {
            violations.push(format!("`{}` is missing", p.name));
            continue;
        };
        match (&p.kind, value) {
            (ParamKind::Continuous { lo, hi }, v) => match v.as_float() {
                Some(x) if (*lo..=*hi).contains(&x) => {}
                Some(x) => violations.push(format!("`{}` = {x} outside [{lo}, {hi}]", p.name)),
                None => violations.push(format!("`{}` must be numeric", p.name)),
            },
            (ParamKind::Integer { lo, hi }, v) => match v.as_int() {
                Some(x) if (*lo..=*hi).contains(&x) => {
                    if p.name.starts_with(COUNT_PREFIX) {
                        count_sum = Some(count_sum.unwrap_or(0) + x);
                    }
                }
                Some(x) => violations.push(format!("`{}` = {x} outside {{{lo}..{hi}}}", p.name)),
                None => violations.push(format!("`{}` must be an integer", p.name)),
            },
            (ParamKind::Categorical { options }, v) => match v.as_cat() {
                Some(x) if options.iter().any(|o| o == x) => {}
                Some(x) => violations.push(format!("`{}` = `{x}` not in {options:?}", p.name)),
                None => violations.push(format!("`{}` must be one of {options:?}", p.name)),
            },
        }
    }
    if count_sum == Some(0) {
        violations.push("all core counts are zero; at least one core is required".into());
    }
    violations
}

/// Embeds a valid point into `[0,1]^D`.
pub fn encode(point: &DesignPoint, space: &SearchSpace) -> Result<Vec<f64>, SpaceError> {
    let violations = validate(point, space);
    if !violations.is_empty() {
        return Err(SpaceError::InvalidPoint(violations));
    }
    let mut coords = Vec::with_capacity(space.dim());
    for p in &space.params {
        if suppressed(p, point) {
            coords.extend(std::iter::repeat(0.5).take(p.encoded_width()));
            continue;
        }
        match &p.kind {
            ParamKind::Continuous { lo, hi } => {
                let v = point.float(&p.name).expect("validated");
                coords.push((v - lo) / (hi - lo));
            }
            ParamKind::Integer { lo, hi } => {
                let v = point.int(&p.name).expect("validated");
                let width = (hi - lo) as f64;
                coords.push(if width == 0.0 { 0.5 } else { (v - lo) as f64 / width });
            }
            ParamKind::Categorical { options } => {
                let v = point.cat(&p.name).expect("validated");
                for o in options {
                    coords.push(if o == v { 1.0 } else { 0.0 });
                }
            }
        }
    }
    Ok(coords)
}

/// Decodes a unit-cube vector into a valid design point.
///
/// Integers round half away from zero and clamp; categorical one-hot blocks
/// take the argmax with ties resolved to the lowest option index;
/// conditional parameters are suppressed according to the decoded
/// controller; an all-zero core-count assignment is repaired by setting the
/// count with the largest encoded coordinate to 1.
pub fn decode(vec: &[f64], space: &SearchSpace) -> Result<DesignPoint, SpaceError> {
    if vec.len() != space.dim() {
        return Err(SpaceError::DimensionMismatch { expected: space.dim(), got: vec.len() });
    }
    let mut point = DesignPoint::default();
    let mut offset = 0;
    let mut count_raw: Vec<(String, f64)> = Vec::new(); // count param -> encoded coord
    for p in &space.params {
        let width = p.encoded_width();
        let block = &vec[offset..offset + width];
        offset += width;
        match &p.kind {
            ParamKind::Continuous { lo, hi } => {
                point.set(&p.name, ParamValue::Float(lo + block[0] * (hi - lo)));
            }
            ParamKind::Integer { lo, hi } => {
                let raw = *lo as f64 + block[0] * (hi - lo) as f64;
                let v = (raw.round() as i64).clamp(*lo, *hi);
                if p.name.starts_with(COUNT_PREFIX) {
                    count_raw.push((p.name.clone(), block[0]));
                }
                point.set(&p.name, ParamValue::Int(v));
            }
            ParamKind::Categorical { options } => {
                let mut best = 0;
                for (i, &c) in block.iter().enumerate() {
                    if c > block[best] {
                        best = i;
                    }
                }
                point.set(&p.name, ParamValue::Cat(options[best].clone()));
            }
        }
    }
    // Drop conditionals whose controller did not select them.
    point.values = {
        let full = point.clone();
        point
            .values
            .into_iter()
            .filter(|(name, _)| !suppressed(space.param(name).expect("known"), &full))
            .collect()
    };
    // Repair an all-zero core-count assignment: bump the count with the
    // largest encoded coordinate (ties go to the earliest parameter).
    count_raw.retain(|(name, _)| point.get(name).is_some());
    if !count_raw.is_empty() {
        let sum: i64 = count_raw.iter().map(|(name, _)| point.int(name).expect("decoded")).sum();
        if sum == 0 {
            let mut best = 0;
            for (i, entry) in count_raw.iter().enumerate() {
                if entry.1 > count_raw[best].1 {
                    best = i;
                }
            }
            let target = count_raw[best].0.clone();
            for (n, v) in &mut point.values {
                if *n == target {
                    *v = ParamValue::Int(1);
                }
            }
        }
    }
    Ok(point)
}

/// Uniform sample over the space; conditionals are resolved after their
/// controller is drawn and an all-zero core-count draw is rejected and
/// redrawn.
pub fn random_sample(space: &SearchSpace, rng: &mut impl Rng) -> DesignPoint {
    loop {
        let mut point = DesignPoint::default();
        let mut count_sum: Option<i64> = None;
        for p in &space.params {
            if suppressed(p, &point) {
                continue;
            }
            match &p.kind {
                ParamKind::Continuous { lo, hi } => {
                    point.set(&p.name, ParamValue::Float(rng.random_range(*lo..*hi)));
                }
                ParamKind::Integer { lo, hi } => {
                    let v = rng.random_range(*lo..=*hi);
                    if p.name.starts_with(COUNT_PREFIX) {
                        count_sum = Some(count_sum.unwrap_or(0) + v);
                    }
                    point.set(&p.name, ParamValue::Int(v));
                }
                ParamKind::Categorical { options } => {
                    let i = rng.random_range(0..options.len());
                    point.set(&p.name, ParamValue::Cat(options[i].clone()));
                }
            }
        }
        if count_sum != Some(0) {
            return point;
        }
    }
}

/// First `n` Sobol points of the space, decoded.
pub fn sobol_sample(n: usize, space: &SearchSpace) -> Result<Vec<DesignPoint>, SpaceError> {
    let mut seq = SobolSequence::new(space.dim()).ok_or(SpaceError::SobolDimension {
        needed: space.dim(),
        supported: sobol::MAX_DIMENSION,
    })?;
    (0..n).map(|_| decode(&seq.next_point(), space)).collect()
}

#[cfg(test)]
mod tests;
