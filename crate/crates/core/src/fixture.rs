//! The JSON fixture format: parsing with path-precise diagnostics,
//! cross-reference resolution, and emission.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::graph::{EnhancedLevelGraph, GraphError, Level};
use crate::homology::{AdaptedBasisModel, BasisCycle, CycleKind, LevelHomology, ModelError};
use crate::linalg::{zero_vector, Vector};
use crate::scalar::Scalar;

/// A parse or cross-reference failure at a document path such as
/// `graph.edges[0].kappa`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {reason}")]
pub struct ParseError {
    pub path: String,
    pub reason: String,
}

impl ParseError {
    fn at(path: impl Into<String>, reason: impl fmt::Display) -> Self {
        ParseError { path: path.into(), reason: reason.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexFile {
    pub id: String,
    pub genus: u32,
    pub level: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub id: String,
    pub plus: String,
    pub minus: String,
    pub kappa: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegFile {
    pub id: String,
    pub vertex: String,
    pub order: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexFile>,
    #[serde(default)]
    pub edges: Vec<EdgeFile>,
    #[serde(default)]
    pub legs: Vec<LegFile>,
}

pub type Coords<T> = BTreeMap<String, T>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleFile {
    pub id: String,
    pub level: i32,
    pub kind: CycleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    #[serde(default)]
    pub intersections: Coords<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<Coords<Scalar>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Coords<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<Coords<Scalar>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelFile {
    pub level: i32,
    pub basis: Vec<String>,
    #[serde(default)]
    pub boundary: BTreeMap<String, BoundaryFile>,
}

/// Arc weights: lower levels (keys like `"-1"`) and horizontal edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaFile {
    #[serde(default)]
    pub levels: BTreeMap<String, i64>,
    #[serde(default)]
    pub horizontal: BTreeMap<String, i64>,
}

impl SigmaFile {
    /// Accepts a JSON object or the inline form `-1=2,e1=3`, where integer
    /// keys are levels and anything else is an edge id.
    pub fn parse_inline(text: &str) -> Result<SigmaFile, ParseError> {
        let text = text.trim();
        if text.starts_with('{') {
            let de = &mut serde_json::Deserializer::from_str(text);
            return serde_path_to_error::deserialize(de)
                .map_err(|e| ParseError::at(format!("sigma.{}", e.path()), e.inner()));
        }
        let mut out = SigmaFile::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ParseError::at("sigma", format!("expected key=value, found '{item}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let w: i64 = value
                .parse()
                .map_err(|_| ParseError::at(format!("sigma.{key}"), format!("'{value}' is not an integer")))?;
            if key.parse::<i32>().is_ok() {
                out.levels.insert(key.to_string(), w);
            } else {
                out.horizontal.insert(key.to_string(), w);
            }
        }
        Ok(out)
    }
}

/// The on-disk document, field for field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mu: Vec<i64>,
    pub graph: GraphFile,
    pub basis: Vec<CycleFile>,
    pub vanishing_cycles: BTreeMap<String, Coords<i64>>,
    pub level_homology: Vec<LevelFile>,
    #[serde(default)]
    pub equations: Vec<Coords<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residues: Option<Coords<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaFile>,
}

/// Level weights and horizontal-edge weights keyed by index.
pub type ResolvedWeights = (BTreeMap<Level, i64>, BTreeMap<usize, i64>);

/// A fully resolved fixture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: Option<String>,
    pub mu: Vec<i64>,
    pub model: AdaptedBasisModel,
    /// Equation rows in ambient column order.
    pub equations: Vec<Vector>,
    pub residues: Option<BTreeMap<usize, Scalar>>,
    pub sigma: Option<SigmaFile>,
}

/// Parses and resolves a fixture document.
pub fn parse_fixture(bytes: &[u8]) -> Result<Fixture, ParseError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: FixtureFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ParseError::at(if path == "." { "document".into() } else { path }, e.inner())
    })?;
    Fixture::from_file(file)
}

fn lookup(names: &[String], key: &str, path: impl Into<String>, what: &str) -> Result<usize, ParseError> {
    names
        .iter()
        .position(|n| n == key)
        .ok_or_else(|| ParseError::at(path, format!("unknown {what} '{key}'")))
}

fn coords_to_vector(
    coords: &Coords<Scalar>,
    names: &[String],
    path: &str,
    what: &str,
) -> Result<Vector, ParseError> {
    let mut v = zero_vector(names.len());
    for (key, value) in coords {
        let k = lookup(names, key, format!("{path}.{key}"), what)?;
        v[k] = value.clone();
    }
    Ok(v)
}

fn vector_to_coords(v: &[Scalar], names: &[String]) -> Coords<Scalar> {
    v.iter().zip(names).filter(|(x, _)| !x.is_zero()).map(|(x, n)| (n.clone(), x.clone())).collect()
}

fn build_graph(g: &GraphFile) -> Result<EnhancedLevelGraph, ParseError> {
    let mut b = EnhancedLevelGraph::builder();
    for v in &g.vertices {
        b = b.vertex(&v.id, v.genus, v.level);
    }
    for e in &g.edges {
        b = b.edge(&e.id, &e.plus, &e.minus, e.kappa);
    }
    for l in &g.legs {
        b = b.leg(&l.id, &l.vertex, l.order);
    }
    b.build().map_err(|err| match &err {
        GraphError::UnknownVertex { owner, id, vertex } => {
            let (k, field) = if *owner == "edge" {
                let k = g.edges.iter().position(|e| &e.id == id).unwrap_or(0);
                (format!("edges[{k}]"), if g.edges[k].plus == *vertex { "plus" } else { "minus" })
            } else {
                (format!("legs[{}]", g.legs.iter().position(|l| &l.id == id).unwrap_or(0)), "vertex")
            };
            ParseError::at(format!("graph.{k}.{field}"), format!("unknown vertex '{vertex}'"))
        }
        other => ParseError::at("graph", other),
    })
}

impl Fixture {
    pub fn from_file(file: FixtureFile) -> Result<Fixture, ParseError> {
        let graph = build_graph(&file.graph)?;
        let edge_names: Vec<String> = graph.edges().iter().map(|e| e.id.clone()).collect();
        let m = edge_names.len();

        let mut levels = Vec::new();
        let mut level_names: BTreeMap<i32, &[String]> = BTreeMap::new();
        for (k, lf) in file.level_homology.iter().enumerate() {
            let path = format!("level_homology[{k}]");
            if level_names.insert(lf.level, &lf.basis).is_some() {
                return Err(ParseError::at(format!("{path}.level"), format!("level {} declared twice", lf.level)));
            }
            let mut plus = BTreeMap::new();
            let mut minus = BTreeMap::new();
            for (edge, bf) in &lf.boundary {
                let bpath = format!("{path}.boundary.{edge}");
                let e = lookup(&edge_names, edge, &bpath, "edge")?;
                if let Some(c) = &bf.plus {
                    plus.insert(e, coords_to_vector(c, &lf.basis, &format!("{bpath}.plus"), "basis element")?);
                }
                if let Some(c) = &bf.minus {
                    minus.insert(e, coords_to_vector(c, &lf.basis, &format!("{bpath}.minus"), "basis element")?);
                }
            }
            levels.push(LevelHomology { level: Level(lf.level), basis: lf.basis.clone(), plus, minus });
        }

        let cycle_names: Vec<String> = file.basis.iter().map(|c| c.id.clone()).collect();
        let mut cycles = Vec::with_capacity(file.basis.len());
        for (k, cf) in file.basis.iter().enumerate() {
            let path = format!("basis[{k}]");
            if cycle_names[..k].contains(&cf.id) {
                return Err(ParseError::at(format!("{path}.id"), format!("duplicate cycle id '{}'", cf.id)));
            }
            let names = level_names
                .get(&cf.level)
                .ok_or_else(|| ParseError::at(format!("{path}.level"), format!("no level_homology for level {}", cf.level)))?;
            let edge = cf
                .edge
                .as_ref()
                .map(|e| lookup(&edge_names, e, format!("{path}.edge"), "edge"))
                .transpose()?;
            let mut intersections = vec![0; m];
            for (e, &v) in &cf.intersections {
                intersections[lookup(&edge_names, e, format!("{path}.intersections.{e}"), "edge")?] = v;
            }
            let restriction = cf
                .restriction
                .as_ref()
                .map(|c| coords_to_vector(c, names, &format!("{path}.restriction"), "basis element"))
                .transpose()?;
            cycles.push(BasisCycle { id: cf.id.clone(), level: Level(cf.level), kind: cf.kind, edge, intersections, restriction });
        }

        let mut vanishing = vec![Vec::new(); m];
        for (edge, coords) in &file.vanishing_cycles {
            let e = lookup(&edge_names, edge, format!("vanishing_cycles.{edge}"), "edge")?;
            let mut v = vec![0; cycle_names.len()];
            for (c, &x) in coords {
                v[lookup(&cycle_names, c, format!("vanishing_cycles.{edge}.{c}"), "cycle id")?] = x;
            }
            vanishing[e] = v;
        }
        if let Some(e) = vanishing.iter().position(Vec::is_empty) {
            if cycle_names.is_empty() {
                vanishing[e] = Vec::new();
            } else {
                return Err(ParseError::at(format!("vanishing_cycles.{}", edge_names[e]), "missing vanishing cycle"));
            }
        }

        let model = AdaptedBasisModel::new(graph, cycles, vanishing, levels).map_err(|err| match err {
            ModelError::UnknownLevel(l) => ParseError::at("level_homology", format!("no entry for level {l}")),
            other => ParseError::at("basis", other),
        })?;

        let n = model.dim();
        let ambient_names: Vec<String> = model.cycles().iter().map(|c| c.id.clone()).collect();
        let equations = file
            .equations
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let mut v = zero_vector(n);
                for (id, value) in row {
                    let l = ambient_names
                        .iter()
                        .position(|x| x == id)
                        .ok_or_else(|| ParseError::at(format!("equations[{k}]"), format!("unknown cycle id '{id}'")))?;
                    v[l] = value.clone();
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>, ParseError>>()?;

        let residues = file
            .residues
            .as_ref()
            .map(|r| {
                r.iter()
                    .map(|(e, v)| Ok((lookup(&edge_names, e, format!("residues.{e}"), "edge")?, v.clone())))
                    .collect::<Result<BTreeMap<_, _>, ParseError>>()
            })
            .transpose()?;

        let fixture = Fixture { name: file.name, mu: file.mu, model, equations, residues, sigma: file.sigma };
        if let Some(s) = &fixture.sigma {
            fixture.resolve_sigma(s)?;
        }
        Ok(fixture)
    }

    /// Resolves the keys of a weight table; values are checked later.
    pub fn resolve_sigma(&self, s: &SigmaFile) -> Result<ResolvedWeights, ParseError> {
        let levels = s
            .levels
            .iter()
            .map(|(k, &w)| {
                let l: i32 = k.parse().map_err(|_| ParseError::at(format!("sigma.levels.{k}"), "level keys must be integers"))?;
                Ok((Level(l), w))
            })
            .collect::<Result<_, ParseError>>()?;
        let graph = self.model.graph();
        let horizontal = s
            .horizontal
            .iter()
            .map(|(k, &w)| {
                let e = graph
                    .edge_index(k)
                    .ok_or_else(|| ParseError::at(format!("sigma.horizontal.{k}"), format!("unknown edge '{k}'")))?;
                Ok((e, w))
            })
            .collect::<Result<_, ParseError>>()?;
        Ok((levels, horizontal))
    }

    /// Rebuilds a document from the resolved data.
    pub fn to_file(&self) -> FixtureFile {
        let model = &self.model;
        let g = model.graph();
        let edge_names: Vec<String> = g.edges().iter().map(|e| e.id.clone()).collect();
        let vid = |v: usize| g.vertices()[v].id.clone();
        let graph = GraphFile {
            vertices: g.vertices().iter().map(|v| VertexFile { id: v.id.clone(), genus: v.genus, level: v.level.0 }).collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeFile { id: e.id.clone(), plus: vid(e.plus), minus: vid(e.minus), kappa: e.prongs })
                .collect(),
            legs: g.legs().iter().map(|l| LegFile { id: l.id.clone(), vertex: vid(l.vertex), order: l.order }).collect(),
        };
        let level_homology: Vec<LevelFile> = model
            .level_homologies()
            .map(|h| {
                let mut boundary: BTreeMap<String, BoundaryFile> = BTreeMap::new();
                for (e, v) in &h.plus {
                    boundary.entry(edge_names[*e].clone()).or_default().plus = Some(vector_to_coords(v, &h.basis));
                }
                for (e, v) in &h.minus {
                    boundary.entry(edge_names[*e].clone()).or_default().minus = Some(vector_to_coords(v, &h.basis));
                }
                LevelFile { level: h.level.0, basis: h.basis.clone(), boundary }
            })
            .collect();
        let basis = model
            .cycles()
            .iter()
            .map(|c| {
                let names = &model.level_homology(c.level).expect("resolved level").basis;
                CycleFile {
                    id: c.id.clone(),
                    level: c.level.0,
                    kind: c.kind,
                    edge: c.edge.map(|e| edge_names[e].clone()),
                    intersections: c
                        .intersections
                        .iter()
                        .zip(&edge_names)
                        .filter(|(x, _)| **x != 0)
                        .map(|(x, n)| (n.clone(), *x))
                        .collect(),
                    restriction: c.restriction.as_ref().map(|r| vector_to_coords(r, names)),
                }
            })
            .collect();
        let cycle_names: Vec<String> = model.cycles().iter().map(|c| c.id.clone()).collect();
        let vanishing_cycles = (0..edge_names.len())
            .map(|e| {
                let coords = model
                    .vanishing_cycle(e)
                    .iter()
                    .zip(&cycle_names)
                    .filter(|(x, _)| **x != 0)
                    .map(|(x, n)| (n.clone(), *x))
                    .collect();
                (edge_names[e].clone(), coords)
            })
            .collect();
        FixtureFile {
            name: self.name.clone(),
            mu: self.mu.clone(),
            graph,
            basis,
            vanishing_cycles,
            level_homology,
            equations: self.equations.iter().map(|r| vector_to_coords(r, &cycle_names)).collect(),
            residues: self
                .residues
                .as_ref()
                .map(|r| r.iter().map(|(e, v)| (edge_names[*e].clone(), v.clone())).collect()),
            sigma: self.sigma.clone(),
        }
    }

    /// Pretty JSON of [`Self::to_file`].
    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("fixture serializes")
    }
}
