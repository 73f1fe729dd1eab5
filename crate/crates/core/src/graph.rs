//! Enhanced level graphs: structure, validation, level restrictions, prong
//! arithmetic and the scaling/plumbing monomials.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Mul;

use num_integer::Integer;
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::validation::{Rule, ValidationReport};

/// A level of the graph. Levels are `0, -1, ..., -L`; larger is higher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Level(pub i32);

impl Level {
    pub const TOP: Level = Level(0);

    pub fn below(self) -> Level {
        Level(self.0 - 1)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("{owner} '{id}' references unknown vertex '{vertex}'")]
    UnknownVertex { owner: &'static str, id: String, vertex: String },
    #[error("unknown edge '{0}'")]
    UnknownEdge(String),
    #[error("level {0} is out of range")]
    LevelOutOfRange(Level),
    #[error("no vertical edge crosses level {0}")]
    NoCrossingEdge(Level),
    #[error("degree mismatch at {subject}: expected {expected}, found {found}")]
    DegreeMismatch { subject: String, expected: i64, found: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
    pub level: Level,
}

/// An edge from its upper end `plus` to its lower end `minus` (vertex
/// indices). For horizontal edges the pair order is the declared one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub plus: usize,
    pub minus: usize,
    pub prongs: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leg {
    pub id: String,
    pub vertex: usize,
    pub order: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnhancedLevelGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    legs: Vec<Leg>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

/// Collects vertices, edges and legs by string id, then resolves them.
#[derive(Default, Debug, Clone)]
pub struct GraphBuilder {
    vertices: Vec<(String, u32, i32)>,
    edges: Vec<(String, String, String, u32)>,
    legs: Vec<(String, String, i64)>,
}

impl GraphBuilder {
    pub fn vertex(mut self, id: &str, genus: u32, level: i32) -> Self {
        self.vertices.push((id.into(), genus, level));
        self
    }

    pub fn edge(mut self, id: &str, plus: &str, minus: &str, prongs: u32) -> Self {
        self.edges.push((id.into(), plus.into(), minus.into(), prongs));
        self
    }

    pub fn leg(mut self, id: &str, vertex: &str, order: i64) -> Self {
        self.legs.push((id.into(), vertex.into(), order));
        self
    }

    pub fn build(self) -> Result<EnhancedLevelGraph, GraphError> {
        let mut seen = BTreeSet::new();
        let all_ids = self
            .vertices
            .iter()
            .map(|v| &v.0)
            .chain(self.edges.iter().map(|e| &e.0))
            .chain(self.legs.iter().map(|l| &l.0));
        for id in all_ids {
            if !seen.insert(id.clone()) {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }
        let vertices: Vec<Vertex> = self
            .vertices
            .into_iter()
            .map(|(id, genus, level)| Vertex { id, genus, level: Level(level) })
            .collect();
        let vertex_index: HashMap<String, usize> =
            vertices.iter().enumerate().map(|(k, v)| (v.id.clone(), k)).collect();
        let lookup = |owner: &'static str, id: &str, vertex: &str| {
            vertex_index.get(vertex).copied().ok_or_else(|| GraphError::UnknownVertex {
                owner,
                id: id.to_string(),
                vertex: vertex.to_string(),
            })
        };
        let edges = self
            .edges
            .iter()
            .map(|(id, plus, minus, prongs)| {
                Ok(Edge {
                    id: id.clone(),
                    plus: lookup("edge", id, plus)?,
                    minus: lookup("edge", id, minus)?,
                    prongs: *prongs,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        let legs = self
            .legs
            .iter()
            .map(|(id, vertex, order)| {
                Ok(Leg { id: id.clone(), vertex: lookup("leg", id, vertex)?, order: *order })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        Ok(EnhancedLevelGraph::from_parts(vertices, edges, legs))
    }
}

/// Which vertices survive [`EnhancedLevelGraph::restrict_levels`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelFilter {
    AtMost(Level),
    Equal(Level),
    Above(Level),
}

impl LevelFilter {
    pub fn level(self) -> Level {
        match self {
            LevelFilter::AtMost(l) | LevelFilter::Equal(l) | LevelFilter::Above(l) => l,
        }
    }

    pub fn accepts(self, level: Level) -> bool {
        match self {
            LevelFilter::AtMost(i) => level <= i,
            LevelFilter::Equal(i) => level == i,
            LevelFilter::Above(i) => level > i,
        }
    }
}

/// A half-edge or leg at a vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum HalfEdge {
    Leg(String),
    Plus(String),
    Minus(String),
}

impl fmt::Display for HalfEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfEdge::Leg(id) => write!(f, "{id}"),
            HalfEdge::Plus(id) => write!(f, "q+({id})"),
            HalfEdge::Minus(id) => write!(f, "q-({id})"),
        }
    }
}

/// Per vertex, the order of the differential at every incident half-edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalOrderTable {
    pub vertices: BTreeMap<String, Vec<(HalfEdge, i64)>>,
}

impl LocalOrderTable {
    pub fn order(&self, vertex: &str, half: &HalfEdge) -> Option<i64> {
        self.vertices.get(vertex)?.iter().find(|(h, _)| h == half).map(|(_, o)| *o)
    }

    pub fn vertex_sum(&self, vertex: &str) -> Option<i64> {
        Some(self.vertices.get(vertex)?.iter().map(|(_, o)| o).sum())
    }
}

/// `a_i` and the multiplicities `m_{e,i} = a_i / kappa_e` of the edges
/// crossing level `i`, keyed by edge index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProngData {
    pub level: Level,
    pub lcm: u64,
    pub multiplicities: BTreeMap<usize, u64>,
}

/// Formal variables of the scaling monomials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    T(Level),
    H(String),
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::T(l) => write!(f, "t[{l}]"),
            Variable::H(e) => write!(f, "h[{e}]"),
        }
    }
}

/// A monomial in the `t_i` and `h_e`, stored as an exponent table.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ScalingMonomial(BTreeMap<Variable, u64>);

impl ScalingMonomial {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn var(v: Variable, exp: u64) -> Self {
        let mut m = Self::default();
        if exp > 0 {
            m.0.insert(v, exp);
        }
        m
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: &Variable) -> u64 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn pow(&self, k: u64) -> Self {
        if k == 0 {
            return Self::unit();
        }
        ScalingMonomial(self.0.iter().map(|(v, e)| (v.clone(), e * k)).collect())
    }
}

impl Mul for &ScalingMonomial {
    type Output = ScalingMonomial;
    fn mul(self, rhs: &ScalingMonomial) -> ScalingMonomial {
        let mut out = self.0.clone();
        for (v, e) in &rhs.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        ScalingMonomial(out)
    }
}

impl fmt::Display for ScalingMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl EnhancedLevelGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    fn from_parts(vertices: Vec<Vertex>, edges: Vec<Edge>, legs: Vec<Leg>) -> Self {
        let vertex_index = vertices.iter().enumerate().map(|(k, v)| (v.id.clone(), k)).collect();
        let edge_index = edges.iter().enumerate().map(|(k, e)| (e.id.clone(), k)).collect();
        EnhancedLevelGraph { vertices, edges, legs, vertex_index, edge_index }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edge_by_id(&self, id: &str) -> Result<&Edge, GraphError> {
        self.edge_index(id).map(|k| &self.edges[k]).ok_or_else(|| GraphError::UnknownEdge(id.into()))
    }

    pub fn level_plus(&self, e: usize) -> Level {
        self.vertices[self.edges[e].plus].level
    }

    pub fn level_minus(&self, e: usize) -> Level {
        self.vertices[self.edges[e].minus].level
    }

    pub fn is_horizontal(&self, e: usize) -> bool {
        self.level_plus(e) == self.level_minus(e)
    }

    /// Horizontal edges whose endpoints lie at `level`.
    pub fn horizontal_at(&self, level: Level) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.is_horizontal(e) && self.level_plus(e) == level)
    }

    /// Vertical edges with `l(e+) > i >= l(e-)`.
    pub fn crossing_edges(&self, i: Level) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.level_plus(e) > i && i >= self.level_minus(e))
    }

    /// Distinct levels in descending order.
    pub fn levels(&self) -> Vec<Level> {
        let set: BTreeSet<Level> = self.vertices.iter().map(|v| v.level).collect();
        set.into_iter().rev().collect()
    }

    pub fn bottom_level(&self) -> Level {
        self.vertices.iter().map(|v| v.level).min().unwrap_or(Level::TOP)
    }

    /// The levels `-1, ..., -L`.
    pub fn lower_levels(&self) -> impl Iterator<Item = Level> {
        (self.bottom_level().0..0).rev().map(Level)
    }

    fn check_level(&self, i: Level) -> Result<(), GraphError> {
        if i > Level::TOP || i < self.bottom_level() {
            Err(GraphError::LevelOutOfRange(i))
        } else {
            Ok(())
        }
    }

    pub fn valence(&self, v: usize) -> usize {
        let legs = self.legs.iter().filter(|l| l.vertex == v).count();
        let halves = self.edges.iter().map(|e| usize::from(e.plus == v) + usize::from(e.minus == v)).sum::<usize>();
        legs + halves
    }

    /// Connected components as sorted lists of vertex indices, ordered by
    /// their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::<usize>::new(self.vertices.len());
        for e in &self.edges {
            uf.union(e.plus, e.minus);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// `sum g_v + b_1`, with `b_1 = |E| - |V| + #components`.
    pub fn genus(&self) -> i64 {
        let gv: i64 = self.vertices.iter().map(|v| i64::from(v.genus)).sum();
        let b1 = self.edges.len() as i64 - self.vertices.len() as i64 + self.components().len() as i64;
        gv + b1
    }

    /// The induced subgraph on vertices passing `filter`; levels are kept.
    pub fn restrict_levels(&self, filter: LevelFilter) -> Result<EnhancedLevelGraph, GraphError> {
        self.check_level(filter.level())?;
        let keep: Vec<Option<usize>> = {
            let mut next = 0;
            self.vertices
                .iter()
                .map(|v| {
                    filter.accepts(v.level).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let vertices = self
            .vertices
            .iter()
            .zip(&keep)
            .filter(|(_, k)| k.is_some())
            .map(|(v, _)| v.clone())
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge { plus: keep[e.plus]?, minus: keep[e.minus]?, ..e.clone() })
            })
            .collect();
        let legs = self
            .legs
            .iter()
            .filter_map(|l| Some(Leg { vertex: keep[l.vertex]?, ..l.clone() }))
            .collect();
        Ok(EnhancedLevelGraph::from_parts(vertices, edges, legs))
    }

    fn local_orders_unchecked(&self) -> Vec<Vec<(HalfEdge, i64)>> {
        let mut table: Vec<Vec<(HalfEdge, i64)>> = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            let k = i64::from(e.prongs);
            table[e.plus].push((HalfEdge::Plus(e.id.clone()), k - 1));
            table[e.minus].push((HalfEdge::Minus(e.id.clone()), -k - 1));
        }
        for l in &self.legs {
            table[l.vertex].push((HalfEdge::Leg(l.id.clone()), l.order));
        }
        table
    }

    /// Orders at every half-edge; fails on the first vertex whose orders do
    /// not sum to `2 g_v - 2`.
    pub fn local_orders(&self) -> Result<LocalOrderTable, GraphError> {
        let table = self.local_orders_unchecked();
        for (v, entries) in self.vertices.iter().zip(&table) {
            let found: i64 = entries.iter().map(|(_, o)| o).sum();
            let expected = 2 * i64::from(v.genus) - 2;
            if found != expected {
                return Err(GraphError::DegreeMismatch { subject: v.id.clone(), expected, found });
            }
        }
        Ok(LocalOrderTable {
            vertices: self.vertices.iter().map(|v| v.id.clone()).zip(table).collect(),
        })
    }

    /// Checks every enhanced-level-graph rule; `mu` lists the leg orders
    /// in leg order.
    pub fn validate(&self, mu: &[i64]) -> ValidationReport {
        let mut report = ValidationReport::new();
        let levels = self.levels();
        let expected: Vec<Level> = (0..levels.len() as i32).map(|k| Level(-k)).collect();
        if levels != expected {
            let shown: Vec<String> = levels.iter().map(ToString::to_string).collect();
            report.push(Rule::LevelGap, "graph", format!("levels [{}] are not 0, -1, ..., -L", shown.join(", ")));
        }
        for (k, e) in self.edges.iter().enumerate() {
            let (hi, lo) = (self.level_plus(k), self.level_minus(k));
            if hi < lo {
                report.push(Rule::EnhancementMismatch, &e.id, format!("upper end at level {hi} lies below lower end at {lo}"));
            }
            if (e.prongs == 0) != (hi == lo) {
                report.push(
                    Rule::EnhancementMismatch,
                    &e.id,
                    format!("kappa = {} but levels are {hi} and {lo}", e.prongs),
                );
            }
        }
        if self.vertices.is_empty() || self.components().len() > 1 {
            report.push(Rule::Disconnected, "graph", format!("{} connected components", self.components().len()));
        }
        if levels == expected {
            for i in self.lower_levels() {
                if self.crossing_edges(i).next().is_none() {
                    report.push(Rule::NoCrossingEdge, i.to_string(), "no vertical edge crosses this level");
                }
            }
        }
        for (k, v) in self.vertices.iter().enumerate() {
            let s = 2 * i64::from(v.genus) - 2 + self.valence(k) as i64;
            if s <= 0 {
                report.push(Rule::Unstable, &v.id, format!("2g - 2 + n = {s}"));
            }
        }
        for (v, entries) in self.vertices.iter().zip(self.local_orders_unchecked()) {
            let found: i64 = entries.iter().map(|(_, o)| o).sum();
            let expected = 2 * i64::from(v.genus) - 2;
            if found != expected {
                report.push(Rule::DegreeMismatch, &v.id, format!("orders sum to {found}, expected {expected}"));
            }
        }
        let leg_orders: Vec<i64> = self.legs.iter().map(|l| l.order).collect();
        if leg_orders != mu {
            report.push(
                Rule::LegOrderMismatch,
                "mu",
                format!("mu {mu:?} differs from leg orders {leg_orders:?}"),
            );
        }
        let total: i64 = mu.iter().sum();
        let g = self.genus();
        if total != 2 * g - 2 {
            report.push(Rule::DegreeMismatch, "global", format!("sum of mu is {total}, expected 2g - 2 = {}", 2 * g - 2));
        }
        report
    }

    /// `a_i = lcm kappa_e` over the edges crossing `i`, with multiplicities.
    pub fn prong_data(&self, i: Level) -> Result<ProngData, GraphError> {
        if i >= Level::TOP || i < self.bottom_level() {
            return Err(GraphError::LevelOutOfRange(i));
        }
        let crossing: Vec<usize> = self.crossing_edges(i).filter(|&e| self.edges[e].prongs > 0).collect();
        if crossing.is_empty() {
            return Err(GraphError::NoCrossingEdge(i));
        }
        let lcm = crossing.iter().fold(1u64, |acc, &e| acc.lcm(&u64::from(self.edges[e].prongs)));
        let multiplicities =
            crossing.iter().map(|&e| (e, lcm / u64::from(self.edges[e].prongs))).collect();
        Ok(ProngData { level: i, lcm, multiplicities })
    }

    /// `scl[i] = prod_{k=i}^{-1} t_k^{a_k}`.
    pub fn scaling_monomial(&self, i: Level) -> Result<ScalingMonomial, GraphError> {
        self.check_level(i)?;
        let mut m = ScalingMonomial::unit();
        for k in i.0..0 {
            let a = self.prong_data(Level(k))?.lcm;
            m = &m * &ScalingMonomial::var(Variable::T(Level(k)), a);
        }
        Ok(m)
    }

    /// `s_e = prod_{k=l(e-)}^{l(e+)-1} t_k^{m_{e,k}}`, or `h_e` if horizontal.
    pub fn plumbing_monomial(&self, edge: &str) -> Result<ScalingMonomial, GraphError> {
        let e = self.edge_index(edge).ok_or_else(|| GraphError::UnknownEdge(edge.into()))?;
        if self.is_horizontal(e) {
            return Ok(ScalingMonomial::var(Variable::H(edge.into()), 1));
        }
        let mut m = ScalingMonomial::unit();
        for k in self.level_minus(e).0..self.level_plus(e).0 {
            let data = self.prong_data(Level(k))?;
            let mult = data.multiplicities[&e];
            m = &m * &ScalingMonomial::var(Variable::T(Level(k)), mult);
        }
        Ok(m)
    }

    /// For each vertical edge, whether `scl[l(e-)] = s_e^kappa * scl[l(e+)]`.
    pub fn check_plumbing_relation(&self) -> Result<Vec<(String, bool)>, GraphError> {
        (0..self.edges.len())
            .filter(|&e| !self.is_horizontal(e))
            .map(|e| {
                let edge = &self.edges[e];
                let lhs = self.scaling_monomial(self.level_minus(e))?;
                let s = self.plumbing_monomial(&edge.id)?;
                let rhs = &s.pow(u64::from(edge.prongs)) * &self.scaling_monomial(self.level_plus(e))?;
                Ok((edge.id.clone(), lhs == rhs))
            })
            .collect()
    }
}
