//! JSON problem files and deterministic reports.
//!
//! A problem file names a fan, a deformation of its Euler sequence, a list
//! of hypersurfaces and a list of queries. Polynomials are lists of
//! `[exponents, coefficient]` pairs; rationals are integers, `"p/q"`
//! strings or `[p, q]` pairs. Rays may be referred to by index or, when
//! `ray_labels` is given, by label.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::de::{DeserializeOwned, Deserializer, Error as _};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::exact::rational::{format_rational, serde_rational, serde_rational_vec};
use crate::exact::{Monomial, Polynomial, Rational};
use crate::polymology::{DeformedEuler, Polymology, SymElement, WVector};
use crate::score::{
    restriction_consistency_check, score_product, CompleteIntersection, HypersurfaceData,
    ScoreOptions,
};
use crate::toric::{validate_fan, Completeness, DivisorClass, Fan, ToricError, ToricVariety};

pub const ENGINE_NAME: &str = "toric-score";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RayRef {
    Index(usize),
    Label(String),
}

impl fmt::Display for RayRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RayRef::Index(i) => write!(f, "{i}"),
            RayRef::Label(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<RayRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray_labels: Option<Vec<String>>,
}

/// One term of a polynomial: exponent vector and coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term(pub Vec<u32>, #[serde(with = "serde_rational")] pub Rational);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub row_ray: RayRef,
    pub col_ray: RayRef,
    #[serde(with = "serde_rational_vec")]
    pub w: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientList {
    coefficients: Vec<CoefficientSpec>,
}

/// `"euler"` or `{"coefficients": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum DeformationSpec {
    #[default]
    Euler,
    Coefficients(Vec<CoefficientSpec>),
}

impl Serialize for DeformationSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DeformationSpec::Euler => s.serialize_str("euler"),
            DeformationSpec::Coefficients(c) => CoefficientList {
                coefficients: c.clone(),
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for DeformationSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "euler" => Ok(DeformationSpec::Euler),
            v @ Value::Object(_) => from_value::<CoefficientList, _>(v)
                .map(|c| DeformationSpec::Coefficients(c.coefficients)),
            _ => Err(D::Error::custom(
                "expected \"euler\" or an object with \"coefficients\"",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianEntry {
    pub ray: RayRef,
    pub poly: Vec<Term>,
}

/// `"jacobian"` (partial derivatives of `f`) or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum JacobianSpec {
    #[default]
    Jacobian,
    Entries(Vec<JacobianEntry>),
}

impl Serialize for JacobianSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            JacobianSpec::Jacobian => s.serialize_str("jacobian"),
            JacobianSpec::Entries(e) => e.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for JacobianSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "jacobian" => Ok(JacobianSpec::Jacobian),
            v @ Value::Array(_) => from_value(v).map(JacobianSpec::Entries),
            _ => Err(D::Error::custom(
                "expected \"jacobian\" or a list of {ray, poly} entries",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Vec<i64>>,
    pub f: Vec<Term>,
    #[serde(rename = "J", default)]
    pub j: JacobianSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorRef {
    divisor: RayRef,
}

/// An element of `W`: explicit coordinates, or `{"divisor": ray}` for the
/// class of a toric divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSpec {
    Vector(Vec<Rational>),
    Divisor(RayRef),
}

impl Serialize for ClassSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ClassSpec::Vector(v) => serde_rational_vec::serialize(v, s),
            ClassSpec::Divisor(r) => DivisorRef { divisor: r.clone() }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ClassSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Coords(#[serde(with = "serde_rational_vec")] Vec<Rational>);
        match Value::deserialize(d)? {
            v @ Value::Array(_) => from_value::<Coords, _>(v).map(|c| ClassSpec::Vector(c.0)),
            v @ Value::Object(_) => {
                from_value::<DivisorRef, _>(v).map(|r| ClassSpec::Divisor(r.divisor))
            }
            _ => Err(D::Error::custom(
                "expected a coordinate list or {\"divisor\": ray}",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum QuerySpec {
    Validate,
    Ring,
    Product {
        sigmas: Vec<ClassSpec>,
    },
    Score {
        sigmas: Vec<ClassSpec>,
        /// Labels of the hypersurfaces cut out, in insertion order; all of
        /// them when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hypersurfaces: Option<Vec<String>>,
    },
    Intersect {
        classes: Vec<ClassSpec>,
    },
}

impl QuerySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            QuerySpec::Validate => "validate",
            QuerySpec::Ring => "ring",
            QuerySpec::Product { .. } => "product",
            QuerySpec::Score { .. } => "score",
            QuerySpec::Intersect { .. } => "intersect",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub fan: FanSpec,
    #[serde(default)]
    pub deformation: DeformationSpec,
    #[serde(default)]
    pub hypersurfaces: Vec<HypersurfaceSpec>,
    #[serde(default)]
    pub queries: Vec<QuerySpec>,
}

fn from_value<T: DeserializeOwned, E: serde::de::Error>(v: Value) -> Result<T, E> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            E::custom(e.into_inner())
        } else {
            E::custom(format!("{path}: {}", e.into_inner()))
        }
    })
}

/// A parse or validation failure, located by field path and, for syntax
/// and type errors, by line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.path.is_empty() {
            write!(f, "{}: ", self.path)?;
        }
        f.write_str(&self.message)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        Ok(())
    }
}

fn field_error(path: impl Into<String>, message: impl fmt::Display) -> ParseError {
    ParseError {
        path: path.into(),
        line: None,
        column: None,
        message: message.to_string(),
    }
}

/// `W`-valued argument of a query, resolved against the ray list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassArg {
    Vector(WVector),
    Divisor(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Validate,
    Ring,
    Product {
        sigmas: Vec<ClassArg>,
    },
    Score {
        sigmas: Vec<ClassArg>,
        hypersurfaces: Vec<usize>,
    },
    Intersect {
        classes: Vec<ClassArg>,
    },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::Validate => "validate",
            Query::Ring => "ring",
            Query::Product { .. } => "product",
            Query::Score { .. } => "score",
            Query::Intersect { .. } => "intersect",
        }
    }
}

/// A hypersurface after structural checks; class checks that need the
/// grading are done only when the fan defines a variety.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedHypersurface {
    pub data: Option<HypersurfaceData>,
    pub label: String,
}

/// A parsed and checked problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub digest: String,
    pub fan: Fan,
    pub labels: Vec<String>,
    pub variety: Result<ToricVariety, ToricError>,
    pub deformation: Option<Vec<((usize, usize), WVector)>>,
    pub hypersurfaces: Vec<ResolvedHypersurface>,
    pub queries: Vec<Query>,
}

pub fn parse_problem_file(path: &Path) -> Result<Problem, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| field_error("", format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text)
}

/// Parses `text` and checks it against the fan it describes.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ParseError {
            path: if path == "." { String::new() } else { path },
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner
                .to_string()
                .split(" at line ")
                .next()
                .unwrap_or("")
                .to_string(),
        }
    })?;
    de.end().map_err(|e| ParseError {
        path: String::new(),
        line: Some(e.line()),
        column: Some(e.column()),
        message: "trailing characters".into(),
    })?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    resolve(file, digest)
}

/// Checks an already deserialized file.
pub fn resolve(file: ProblemFile, digest: String) -> Result<Problem, ParseError> {
    let nrays = file.fan.rays.len();
    let dim = file.fan.rays.first().map_or(0, Vec::len);
    let labels = match &file.fan.ray_labels {
        Some(l) => {
            if l.len() != nrays {
                return Err(field_error(
                    "fan.ray_labels",
                    format!("{} labels for {nrays} rays", l.len()),
                ));
            }
            let mut seen = BTreeSet::new();
            for (i, s) in l.iter().enumerate() {
                if !seen.insert(s) {
                    return Err(field_error(
                        format!("fan.ray_labels[{i}]"),
                        format!("duplicate label {s:?}"),
                    ));
                }
            }
            l.clone()
        }
        None => (0..nrays).map(|i| format!("x{i}")).collect(),
    };
    let lookup: HashMap<&str, usize> = file
        .fan
        .ray_labels
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let ray = |r: &RayRef, path: String| -> Result<usize, ParseError> {
        match r {
            RayRef::Index(i) if *i < nrays => Ok(*i),
            RayRef::Index(i) => Err(field_error(
                path,
                format!("ray index {i} out of range ({nrays} rays)"),
            )),
            RayRef::Label(s) => lookup
                .get(s.as_str())
                .copied()
                .ok_or_else(|| field_error(path, format!("unknown ray label {s:?}"))),
        }
    };

    let mut cones = Vec::new();
    for (i, cone) in file.fan.max_cones.iter().enumerate() {
        let mut c = Vec::new();
        for (j, r) in cone.iter().enumerate() {
            c.push(ray(r, format!("fan.max_cones[{i}][{j}]"))?);
        }
        cones.push(c);
    }
    let fan = Fan::new(dim, file.fan.rays.clone(), cones).map_err(|e| field_error("fan", e))?;
    let variety = ToricVariety::new(fan.clone());
    let rank = nrays.saturating_sub(dim);
    let v = variety.as_ref().ok();

    let deformation = match &file.deformation {
        DeformationSpec::Euler => None,
        DeformationSpec::Coefficients(entries) => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for (i, c) in entries.iter().enumerate() {
                let path = format!("deformation.coefficients[{i}]");
                let row = ray(&c.row_ray, format!("{path}.row_ray"))?;
                let col = ray(&c.col_ray, format!("{path}.col_ray"))?;
                if c.w.len() != rank {
                    return Err(field_error(
                        format!("{path}.w"),
                        format!("{} coordinates, expected r = {rank}", c.w.len()),
                    ));
                }
                if !seen.insert((row, col)) {
                    return Err(field_error(
                        path,
                        format!("entry ({row}, {col}) given twice"),
                    ));
                }
                let w = WVector(c.w.clone());
                if let Some(v) = v {
                    if !w.is_zero() && v.degree(row) != v.degree(col) {
                        return Err(field_error(
                            path,
                            format!(
                                "rays {row} and {col} have different classes {} and {}",
                                v.degree(row),
                                v.degree(col)
                            ),
                        ));
                    }
                }
                out.push(((row, col), w));
            }
            Some(out)
        }
    };

    let polynomial = |terms: &[Term], path: String| -> Result<Polynomial, ParseError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (k, Term(exps, c)) in terms.iter().enumerate() {
            if exps.len() != nrays {
                return Err(field_error(
                    format!("{path}[{k}]"),
                    format!(
                        "exponent vector has length {}, expected {nrays}",
                        exps.len()
                    ),
                ));
            }
            let m = Monomial::new(exps.clone());
            if !seen.insert(m.clone()) {
                return Err(field_error(format!("{path}[{k}]"), "monomial repeated"));
            }
            out.push((m, c.clone()));
        }
        Ok(Polynomial::from_terms(nrays, out))
    };

    let mut hypersurfaces = Vec::new();
    let mut by_label = HashMap::new();
    for (i, h) in file.hypersurfaces.iter().enumerate() {
        let path = format!("hypersurfaces[{i}]");
        if by_label.insert(h.label.clone(), i).is_some() {
            return Err(field_error(
                format!("{path}.label"),
                format!("duplicate label {:?}", h.label),
            ));
        }
        let f = polynomial(&h.f, format!("{path}.f"))?;
        if f.is_zero() {
            return Err(field_error(format!("{path}.f"), "f is zero"));
        }
        if let Some(c) = &h.class {
            if c.len() != rank {
                return Err(field_error(
                    format!("{path}.class"),
                    format!("{} coordinates, expected r = {rank}", c.len()),
                ));
            }
        }
        let jacobian = match &h.j {
            JacobianSpec::Jacobian => None,
            JacobianSpec::Entries(entries) => {
                let mut map = BTreeMap::new();
                for (k, e) in entries.iter().enumerate() {
                    let p = format!("{path}.J[{k}]");
                    let r = ray(&e.ray, format!("{p}.ray"))?;
                    if map
                        .insert(r, polynomial(&e.poly, format!("{p}.poly"))?)
                        .is_some()
                    {
                        return Err(field_error(p, format!("ray {r} given twice")));
                    }
                }
                Some(map)
            }
        };
        let data = match v {
            None => None,
            Some(v) => {
                let f_class = v.class_of(&f).ok_or_else(|| {
                    field_error(format!("{path}.f"), "f is not class-homogeneous")
                })?;
                let class = h.class.as_ref().map(|c| DivisorClass::from_ints(c));
                if let Some(c) = &class {
                    if *c != f_class {
                        return Err(field_error(
                            format!("{path}.class"),
                            format!("declared class {c} but f has class {f_class}"),
                        ));
                    }
                }
                let jacobian =
                    jacobian.unwrap_or_else(|| (0..nrays).map(|r| (r, f.derivative(r))).collect());
                for (k, (r, p)) in jacobian.iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    let expected = f_class.sub(&v.degree(*r));
                    if v.class_of(p).as_ref() != Some(&expected) {
                        let at = match &h.j {
                            JacobianSpec::Jacobian => format!("{path}.J"),
                            JacobianSpec::Entries(_) => format!("{path}.J[{k}]"),
                        };
                        return Err(field_error(
                            at,
                            format!("entry for ray {r} must have class {expected}"),
                        ));
                    }
                }
                Some(
                    HypersurfaceData::new(v, h.label.clone(), f, class, jacobian)
                        .map_err(|e| field_error(path.clone(), e))?,
                )
            }
        };
        hypersurfaces.push(ResolvedHypersurface {
            data,
            label: h.label.clone(),
        });
    }

    let class_args = |specs: &[ClassSpec], path: String| -> Result<Vec<ClassArg>, ParseError> {
        specs
            .iter()
            .enumerate()
            .map(|(k, s)| match s {
                ClassSpec::Vector(c) if c.len() == rank => Ok(ClassArg::Vector(WVector(c.clone()))),
                ClassSpec::Vector(c) => Err(field_error(
                    format!("{path}[{k}]"),
                    format!("{} coordinates, expected r = {rank}", c.len()),
                )),
                ClassSpec::Divisor(r) => {
                    Ok(ClassArg::Divisor(ray(r, format!("{path}[{k}].divisor"))?))
                }
            })
            .collect()
    };
    let mut queries = Vec::new();
    for (i, q) in file.queries.iter().enumerate() {
        let path = format!("queries[{i}]");
        queries.push(match q {
            QuerySpec::Validate => Query::Validate,
            QuerySpec::Ring => Query::Ring,
            QuerySpec::Product { sigmas } => Query::Product {
                sigmas: class_args(sigmas, format!("{path}.sigmas"))?,
            },
            QuerySpec::Intersect { classes } => Query::Intersect {
                classes: class_args(classes, format!("{path}.classes"))?,
            },
            QuerySpec::Score {
                sigmas,
                hypersurfaces: hs,
            } => {
                let hypersurfaces = match hs {
                    None => (0..file.hypersurfaces.len()).collect(),
                    Some(labels) => labels
                        .iter()
                        .enumerate()
                        .map(|(k, l)| {
                            by_label.get(l).copied().ok_or_else(|| {
                                field_error(
                                    format!("{path}.hypersurfaces[{k}]"),
                                    format!("unknown hypersurface {l:?}"),
                                )
                            })
                        })
                        .collect::<Result<_, _>>()?,
                };
                Query::Score {
                    sigmas: class_args(sigmas, format!("{path}.sigmas"))?,
                    hypersurfaces,
                }
            }
        });
    }

    Ok(Problem {
        file,
        digest,
        fan,
        labels,
        variety,
        deformation,
        hypersurfaces,
        queries,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub score: ScoreOptions,
}

/// Query results in input order with engine and input identification.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
}

impl Report {
    pub fn query_statuses(&self) -> Vec<String> {
        self.json["queries"]
            .as_array()
            .map(|qs| {
                qs.iter()
                    .map(|q| q["status"].as_str().unwrap_or("").to_string())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn all_ok(&self) -> bool {
        self.query_statuses().iter().all(|s| s == "ok")
    }

    /// True when some `validate` query reported a failed check.
    pub fn validation_failed(&self) -> bool {
        self.json["queries"].as_array().is_some_and(|qs| {
            qs.iter()
                .any(|q| q["kind"] == "validate" && q["status"].as_str().is_some_and(|s| s != "ok"))
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        render_text(&self.json)
    }
}

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn wvec(w: &WVector) -> Value {
    Value::Array(w.0.iter().map(q).collect())
}

fn sym(s: &SymElement) -> Value {
    Value::String(s.to_string())
}

/// Shared state for one problem: the variety, the polymology ring and the
/// extracted hypersurface classes, built once before queries run.
struct Context<'a> {
    problem: &'a Problem,
    polymology: Result<Polymology, String>,
    hypersurfaces: Vec<Result<HypersurfaceData, String>>,
}

impl<'a> Context<'a> {
    fn new(problem: &'a Problem) -> Self {
        let polymology = match &problem.variety {
            Err(e) => Err(e.to_string()),
            Ok(v) => {
                let e = match &problem.deformation {
                    None => Ok(DeformedEuler::undeformed(v)),
                    Some(entries) => DeformedEuler::from_coefficients(v, entries.iter().cloned()),
                };
                e.and_then(|e| Polymology::new(v.clone(), e))
                    .map_err(|e| e.to_string())
            }
        };
        let hypersurfaces = problem
            .hypersurfaces
            .iter()
            .map(|h| match &h.data {
                Some(d) => Ok(d.clone()),
                None => Err(format!("hypersurface {}: no variety", h.label)),
            })
            .collect();
        Context {
            problem,
            polymology,
            hypersurfaces,
        }
    }

    fn variety(&self) -> Result<&ToricVariety, String> {
        self.problem.variety.as_ref().map_err(ToString::to_string)
    }

    fn pm(&self) -> Result<&Polymology, String> {
        self.polymology.as_ref().map_err(Clone::clone)
    }

    fn class(&self, a: &ClassArg) -> Result<WVector, String> {
        match a {
            ClassArg::Vector(w) => Ok(w.clone()),
            ClassArg::Divisor(r) => Ok(WVector::from_class(&self.variety()?.degree(*r))),
        }
    }

    fn classes(&self, args: &[ClassArg]) -> Result<Vec<WVector>, String> {
        args.iter().map(|a| self.class(a)).collect()
    }

    fn collection(&self, k: &[usize]) -> Value {
        Value::Array(k.iter().map(|&r| json!(self.problem.labels[r])).collect())
    }

    fn run(&self, query: &Query, options: &RunOptions) -> Value {
        let mut out = match self.run_inner(query, options) {
            Ok(v) => v,
            Err(msg) => {
                let mut m = Map::new();
                m.insert("status".into(), json!(format!("error: {msg}")));
                m
            }
        };
        out.insert("kind".into(), json!(query.kind()));
        Value::Object(out)
    }

    fn run_inner(&self, query: &Query, options: &RunOptions) -> Result<Map<String, Value>, String> {
        let mut m = Map::new();
        match query {
            Query::Validate => return Ok(self.validate()),
            Query::Ring => {
                let pm = self.pm()?;
                let generators: Vec<Value> = pm
                    .ideal()
                    .generators
                    .iter()
                    .map(|g| json!({"collection": self.collection(&g.collection), "element": sym(&g.element)}))
                    .collect();
                m.insert("generators".into(), Value::Array(generators));
                m.insert("quotient_dims".into(), json!(pm.quotient_dims()));
                m.insert("betti_numbers".into(), json!(pm.variety().betti_numbers()));
                m.insert(
                    "reference_cone".into(),
                    self.collection(pm.variety().reference_cone()),
                );
                m.insert("reference_element".into(), sym(pm.reference_element()));
            }
            Query::Product { sigmas } => {
                let pm = self.pm()?;
                let sigmas = self.classes(sigmas)?;
                let value = pm.product_v(&sigmas).map_err(|e| e.to_string())?;
                let certificate = SymElement::product(pm.rank(), &sigmas);
                m.insert("value".into(), q(&value));
                m.insert(
                    "sigmas".into(),
                    Value::Array(sigmas.iter().map(wvec).collect()),
                );
                m.insert("normal_form".into(), sym(&pm.normal_form(&certificate)));
                m.insert("certificate".into(), sym(&certificate));
            }
            Query::Intersect { classes } => {
                let v = self.variety()?;
                let classes = self.classes(classes)?;
                let rational: Vec<Vec<Rational>> = classes.iter().map(|w| w.0.clone()).collect();
                let value = v
                    .rational_intersection_number(&rational)
                    .map_err(|e| e.to_string())?;
                m.insert("value".into(), q(&value));
                m.insert(
                    "classes".into(),
                    Value::Array(classes.iter().map(wvec).collect()),
                );
            }
            Query::Score {
                sigmas,
                hypersurfaces,
            } => {
                let pm = self.pm()?;
                let sigmas = self.classes(sigmas)?;
                let hyps = hypersurfaces
                    .iter()
                    .map(|&i| self.hypersurfaces[i].clone())
                    .collect::<Result<Vec<_>, _>>()?;
                let labels: Vec<Value> = hyps.iter().map(|h| json!(h.label)).collect();
                let ci = CompleteIntersection::extract(pm, hyps).map_err(|e| e.to_string())?;
                let report =
                    score_product(pm, &ci, &sigmas, options.score).map_err(|e| e.to_string())?;
                let check =
                    restriction_consistency_check(pm, &ci, &sigmas).map_err(|e| e.to_string())?;
                let orders: Vec<Value> = check
                    .orders
                    .iter()
                    .map(|o| {
                        json!({
                            "order": o.order.iter().map(|&k| labels[k].clone()).collect::<Vec<_>>(),
                            "partials": o.partials.iter().map(sym).collect::<Vec<_>>(),
                            "value": q(&o.value),
                        })
                    })
                    .collect();
                m.insert("value".into(), q(&report.value));
                m.insert("hypersurfaces".into(), Value::Array(labels));
                m.insert(
                    "sigmas".into(),
                    Value::Array(sigmas.iter().map(wvec).collect()),
                );
                m.insert(
                    "gammas".into(),
                    Value::Array(report.inserted_gammas.iter().map(wvec).collect()),
                );
                m.insert("certificate".into(), sym(&report.certificate));
                m.insert("normal_form".into(), sym(&report.normal_form));
                m.insert("warnings".into(), json!(report.warnings));
                m.insert(
                    "consistency".into(),
                    json!({
                        "one_shot": q(&check.one_shot),
                        "consistent": check.consistent,
                        "orders": orders,
                    }),
                );
                if !check.consistent {
                    return Err("stepwise insertion disagrees with one-shot insertion".into());
                }
            }
        }
        m.insert("status".into(), json!("ok"));
        Ok(m)
    }

    fn validate(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let fan_report = validate_fan(&self.problem.fan);
        let mut failures = fan_report.failures.clone();
        m.insert(
            "fan".into(),
            json!({
                "simplicial": fan_report.simplicial,
                "smooth": fan_report.smooth,
                "wall_condition": fan_report.wall_condition,
                "ray_coverage": fan_report.ray_coverage,
                "completeness": match fan_report.completeness {
                    Completeness::Verified => "verified",
                    Completeness::Unverified => "unverified",
                },
            }),
        );
        match &self.problem.variety {
            Err(e) => {
                if failures.is_empty() {
                    failures.push(e.to_string());
                }
            }
            Ok(v) => {
                m.insert(
                    "variety".into(),
                    json!({
                        "dim": v.dim(),
                        "rank": v.rank(),
                        "degrees": (0..v.nrays()).map(|r| v.degree(r).0.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "primitive_collections": v.primitive_collections().iter().map(|k| self.collection(k)).collect::<Vec<_>>(),
                        "betti_numbers": v.betti_numbers(),
                    }),
                );
                match &self.polymology {
                    Err(e) => {
                        failures.push(e.clone());
                        m.insert("deformation".into(), json!({"error": e}));
                    }
                    Ok(pm) => {
                        let r = pm.report();
                        m.insert(
                            "deformation".into(),
                            json!({
                                "undeformed": r.undeformed,
                                "block_complete": r.block_complete,
                                "nondegenerate": r.nondegenerate,
                                "dimension_valid": r.dimension_valid,
                                "quotient_dims": r.quotient_dims,
                            }),
                        );
                        failures.extend(r.failures.iter().cloned());
                    }
                }
                let hyps: Vec<Value> = self
                    .hypersurfaces
                    .iter()
                    .map(|h| match (h, self.pm()) {
                        (Ok(h), Ok(pm)) => match crate::score::extract_gamma(pm, h) {
                            Ok(g) => json!({"label": h.label, "class": h.class.to_string(), "gamma": wvec(&g)}),
                            Err(e) => {
                                failures.push(e.to_string());
                                json!({"label": h.label, "class": h.class.to_string(), "error": e.to_string()})
                            }
                        },
                        (Ok(h), Err(_)) => json!({"label": h.label, "class": h.class.to_string()}),
                        (Err(e), _) => json!({"error": e}),
                    })
                    .collect();
                m.insert("hypersurfaces".into(), Value::Array(hyps));
            }
        }
        let mut warnings = Vec::new();
        if fan_report.completeness == Completeness::Unverified {
            warnings.push(crate::score::WARN_COMPLETENESS.to_string());
        }
        m.insert("warnings".into(), json!(warnings));
        let status = if failures.is_empty() {
            "ok".to_string()
        } else {
            format!("failed: {}", failures.join(", "))
        };
        m.insert("status".into(), json!(status));
        m
    }
}

/// Runs every query in order. Failures are recorded per query.
pub fn run_queries(problem: &Problem, options: &RunOptions) -> Report {
    let ctx = Context::new(problem);
    let queries: Vec<Value> = problem
        .queries
        .iter()
        .enumerate()
        .map(|(i, query)| {
            let mut v = ctx.run(query, options);
            v["index"] = json!(i);
            v
        })
        .collect();
    let mut top = Map::new();
    top.insert(
        "engine".into(),
        json!({"name": ENGINE_NAME, "version": ENGINE_VERSION}),
    );
    top.insert("input_sha256".into(), json!(problem.digest));
    if let Some(name) = &problem.file.name {
        top.insert("problem".into(), json!(name));
    }
    top.insert("queries".into(), Value::Array(queries));
    Report {
        json: Value::Object(top),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_text(report: &Value) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} {}\n",
        scalar(&report["engine"]["name"]),
        scalar(&report["engine"]["version"])
    ));
    if let Some(name) = report.get("problem") {
        out.push_str(&format!("problem: {}\n", scalar(name)));
    }
    out.push_str(&format!(
        "input sha256: {}\n",
        scalar(&report["input_sha256"])
    ));
    for query in report["queries"].as_array().into_iter().flatten() {
        out.push_str(&format!(
            "\n[{}] {}: {}\n",
            scalar(&query["index"]),
            scalar(&query["kind"]),
            scalar(&query["status"])
        ));
        let Some(obj) = query.as_object() else {
            continue;
        };
        for (key, value) in obj {
            if matches!(key.as_str(), "index" | "kind" | "status") {
                continue;
            }
            match (key.as_str(), value) {
                ("warnings", Value::Array(ws)) => {
                    for w in ws {
                        out.push_str(&format!("  warning: {}\n", scalar(w)));
                    }
                }
                _ => out.push_str(&format!("  {key}: {}\n", scalar(value))),
            }
        }
    }
    out
}
