//! JSON schemas for complexes, types and problem payloads. Integers are
//! accepted as JSON numbers or decimal strings (for arbitrary precision);
//! rationals travel as "p/q" strings. Unknown fields are rejected.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::complex::{complex_from_fan, ConeComplex};
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::types::{CurveClass, DecoratedType, Edge, Leg, TropicalType, TypeGraph};

/// Arbitrary-precision integer that serializes as a number when it fits
/// in an `i64` and as a decimal string otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JInt(pub BigInt);

impl Serialize for JInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use num_traits::ToPrimitive;
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for JInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> de::Visitor<'de> for V {
            type Value = JInt;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "an integer or a decimal string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<JInt, E> {
                Ok(JInt(BigInt::from(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<JInt, E> {
                Ok(JInt(BigInt::from(v)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<JInt, E> {
                v.parse::<BigInt>().map(JInt).map_err(|_| E::custom("bad integer string"))
            }
        }
        d.deserialize_any(V)
    }
}

/// Rational number serialized as "p/q" (or "p" when integral).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JRat(pub BigRational);

impl Serialize for JRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.denom().is_one() {
            s.serialize_str(&self.0.numer().to_string())
        } else {
            s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }
}

impl<'de> Deserialize<'de> for JRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> de::Visitor<'de> for V {
            type Value = JRat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational \"p/q\" string or an integer")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<JRat, E> {
                Ok(JRat(BigRational::from(BigInt::from(v))))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<JRat, E> {
                Ok(JRat(BigRational::from(BigInt::from(v))))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<JRat, E> {
                parse_rational(v).map(JRat).map_err(|e| E::custom(e.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| Error::Schema(format!("bad rational `{s}`")))?;
        let den: BigInt = q.trim().parse().map_err(|_| Error::Schema(format!("bad rational `{s}`")))?;
        if den == BigInt::from(0) {
            return Err(Error::Schema(format!("zero denominator in `{s}`")));
        }
        Ok(BigRational::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|_| Error::Schema(format!("bad rational `{s}`")))?;
        Ok(BigRational::from(num))
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn to_vec(v: &[JInt]) -> Vec<BigInt> {
    v.iter().map(|x| x.0.clone()).collect()
}

fn to_matrix(rows: &[Vec<JInt>]) -> Result<IntMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    for row in rows {
        if row.len() != c {
            return Err(Error::Schema("ragged matrix".into()));
        }
    }
    let mut entries = Vec::with_capacity(r * c);
    for row in rows {
        entries.extend(row.iter().map(|x| x.0.clone()));
    }
    IntMatrix::from_entries(r, c, entries)
}

pub fn matrix_to_json(m: &IntMatrix) -> Vec<Vec<JInt>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| JInt(m.at(r, c).clone())).collect())
        .collect()
}

// ---------------------------------------------------------------- complex

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JCone {
    pub id: String,
    pub generators: Vec<Vec<JInt>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JFace {
    pub face: String,
    pub cone: String,
    pub map: Vec<Vec<JInt>>,
}

/// Either an explicit complex (intrinsic cones plus face maps) or a fan in
/// a common ambient from which faces are derived.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JComplex {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cones: Vec<JCone>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faces: Vec<JFace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<BTreeMap<String, Vec<JInt>>>,
    /// Fan shorthand: cones given by generators in a shared ambient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<JFan>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JFan {
    pub ambient: usize,
    pub cones: Vec<JCone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<JInt>>,
}

impl JComplex {
    pub fn build(&self) -> Result<ConeComplex> {
        if let Some(fan) = &self.fan {
            if !self.cones.is_empty() || !self.faces.is_empty() || self.delta.is_some() {
                return Err(Error::Schema(
                    "give either `fan` or explicit `cones`/`faces`/`delta`, not both".into(),
                ));
            }
            let named: Vec<(&str, Vec<Vec<BigInt>>)> = fan
                .cones
                .iter()
                .map(|c| (c.id.as_str(), c.generators.iter().map(|g| to_vec(g)).collect()))
                .collect();
            return complex_from_fan(
                fan.ambient,
                &named,
                fan.delta.as_ref().map(|d| to_vec(d)),
            );
        }
        let mut complex = ConeComplex::new();
        for c in &self.cones {
            let gens: Vec<Vec<BigInt>> = c.generators.iter().map(|g| to_vec(g)).collect();
            let rank = gens.first().map_or(0, |g| g.len());
            complex.add_cone(c.id.clone(), Cone::from_generators(rank, gens))?;
        }
        if let Some(delta) = &self.delta {
            for (id, row) in delta {
                complex.set_delta(id.clone(), to_vec(row))?;
            }
        }
        for f in &self.faces {
            complex.add_face_relation(f.face.clone(), f.cone.clone(), to_matrix(&f.map)?)?;
        }
        Ok(complex)
    }
}

// ------------------------------------------------------------------ types

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JVertex {
    pub id: String,
    #[serde(default)]
    pub genus: u32,
    pub sigma: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<BTreeMap<String, JInt>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JEdge {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub v1: String,
    pub v2: String,
    pub sigma: String,
    pub u: Vec<JInt>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JLeg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub v: String,
    pub sigma: String,
    pub u: Vec<JInt>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JType {
    pub vertices: Vec<JVertex>,
    #[serde(default)]
    pub edges: Vec<JEdge>,
    #[serde(default)]
    pub legs: Vec<JLeg>,
}

/// Name resolution produced while building a type.
pub struct TypeNames {
    pub vertex_ids: Vec<String>,
    pub edge_ids: Vec<String>,
    pub leg_ids: Vec<String>,
}

impl TypeNames {
    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edge_ids
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| Error::Schema(format!("unknown edge `{id}`")))
    }

    pub fn leg_index(&self, id: &str) -> Result<usize> {
        self.leg_ids
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| Error::Schema(format!("unknown leg `{id}`")))
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.vertex_ids
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| Error::Schema(format!("unknown vertex `{id}`")))
    }
}

impl JType {
    pub fn build(&self, complex: &ConeComplex) -> Result<(DecoratedType, TypeNames)> {
        let vertex_ids: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        {
            let mut sorted = vertex_ids.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != vertex_ids.len() {
                return Err(Error::Schema("duplicate vertex ids".into()));
            }
        }
        let vid = |id: &str| -> Result<usize> {
            vertex_ids
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| Error::Schema(format!("unknown vertex `{id}`")))
        };
        let genus = self.vertices.iter().map(|v| v.genus).collect();
        let mut edges = Vec::new();
        for e in &self.edges {
            edges.push(Edge { v1: vid(&e.v1)?, v2: vid(&e.v2)? });
        }
        let mut legs = Vec::new();
        for l in &self.legs {
            legs.push(Leg { vertex: vid(&l.v)? });
        }
        let graph = TypeGraph { genus, edges, legs };
        let base = TropicalType::new(
            graph,
            self.vertices.iter().map(|v| v.sigma.clone()).collect(),
            self.edges.iter().map(|e| e.sigma.clone()).collect(),
            self.legs.iter().map(|l| l.sigma.clone()).collect(),
            self.edges.iter().map(|e| to_vec(&e.u)).collect(),
            self.legs.iter().map(|l| to_vec(&l.u)).collect(),
            complex,
        )?;
        let classes = self
            .vertices
            .iter()
            .map(|v| {
                CurveClass(
                    v.class
                        .clone()
                        .unwrap_or_default()
                        .into_iter()
                        .map(|(k, x)| (k, x.0))
                        .collect(),
                )
            })
            .collect();
        let decorated = DecoratedType::new(base, classes)?;
        let names = TypeNames {
            vertex_ids,
            edge_ids: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| e.id.clone().unwrap_or_else(|| format!("e{i}")))
                .collect(),
            leg_ids: self
                .legs
                .iter()
                .enumerate()
                .map(|(i, l)| l.id.clone().unwrap_or_else(|| format!("l{i}")))
                .collect(),
        };
        Ok((decorated, names))
    }
}

// -------------------------------------------------------------- problems

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JMonoid {
    /// Generators of the dual cone.
    pub dual_cone: Vec<Vec<JInt>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JPrimed {
    pub p: JMonoid,
    pub q1: JMonoid,
    pub q2: JMonoid,
    pub theta1: Vec<Vec<JInt>>,
    pub theta2: Vec<Vec<JInt>>,
    pub g: Vec<Vec<JInt>>,
    pub g1: Vec<Vec<JInt>>,
    pub g2: Vec<Vec<JInt>>,
    /// "given" or "recurse"
    #[serde(default = "default_given")]
    pub nonempty: String,
}

fn default_given() -> String {
    "given".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JFibre {
    pub p: JMonoid,
    pub q1: JMonoid,
    pub q2: JMonoid,
    pub theta1: Vec<Vec<JInt>>,
    pub theta2: Vec<Vec<JInt>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primed: Option<JPrimed>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JGlue {
    pub complex: JComplex,
    #[serde(rename = "type")]
    pub typ: JType,
    pub split: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JRigid {
    pub complex: JComplex,
    #[serde(rename = "type")]
    pub typ: JType,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JWallRecurseChild {
    pub k: JInt,
    #[serde(rename = "W")]
    pub w: JRat,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub typ: Option<JType>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JWallRecurse {
    pub children: Vec<JWallRecurseChild>,
    #[serde(rename = "N_out")]
    pub n_out: JRat,
    pub w_out: JInt,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aut: Option<JInt>,
    /// Needed when child types are given, to compute automorphisms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<JComplex>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JToricEnd {
    pub dir: Vec<JInt>,
    pub weight: u64,
    /// Transverse coordinate of the constraint line; perturbed from the
    /// seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<JRat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JToricProblem {
    pub rays: Vec<Vec<JInt>>,
    pub constrained: Vec<JToricEnd>,
    pub out: JToricEnd,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JBlowup {
    /// weights keyed by "k,l"
    pub weights: BTreeMap<String, u64>,
    /// "table" or "tropical"
    pub oracle: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BTreeMap<String, JRat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tropical: Option<JBlowupTropical>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JBlowupTropical {
    pub base: JToricProblem,
    /// Primitive ray direction of each blown divisor, keyed by "k".
    pub blown_dirs: BTreeMap<String, Vec<JInt>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JFlatnessCandidate {
    #[serde(rename = "type")]
    pub typ: JType,
    /// vertex id of the candidate -> vertex id of the target
    pub vertex_map: BTreeMap<String, String>,
    /// edge id -> { "edge": id } or { "vertex": id }
    pub edge_map: BTreeMap<String, serde_json::Value>,
    /// leg id -> leg id
    pub leg_map: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JFlatness {
    pub complex: JComplex,
    #[serde(rename = "type")]
    pub typ: JType,
    pub legs: Vec<String>,
    pub candidates: Vec<JFlatnessCandidate>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JProjectRay {
    pub complex: JComplex,
    #[serde(rename = "type")]
    pub typ: JType,
    pub ray: String,
}

/// Top-level problem file: version, kind tag and the per-kind payload.
/// Unknown fields land in the payload and are rejected by the per-kind
/// schema, all of which deny unknown fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: String,
    pub kind: String,
    #[serde(flatten)]
    pub payload: serde_json::Value,
}

/// Weight keys are `k,l`, with or without surrounding parentheses.
pub fn parse_weights(weights: &BTreeMap<String, u64>) -> Result<BTreeMap<(u64, u64), u64>> {
    let mut out = BTreeMap::new();
    for (key, &w) in weights {
        let stripped = key.trim().trim_start_matches('(').trim_end_matches(')');
        let (k, l) = stripped
            .split_once(',')
            .ok_or_else(|| Error::Schema(format!("weight key `{key}` is not `k,l`")))?;
        let k: u64 = k.trim().parse().map_err(|_| Error::Schema(format!("bad key `{key}`")))?;
        let l: u64 = l.trim().parse().map_err(|_| Error::Schema(format!("bad key `{key}`")))?;
        out.insert((k, l), w);
    }
    Ok(out)
}
