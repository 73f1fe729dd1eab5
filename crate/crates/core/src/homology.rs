//! Adapted homology bases, the level and vertical filtrations, GRC spans,
//! and the specialization / restriction maps to a single level.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::graph::{EnhancedLevelGraph, GraphError, Level, LevelFilter};
use crate::linalg::{self, add_scaled, int_vector, is_zero_vector, zero_vector, Subspace, Vector};
use crate::scalar::Scalar;
use crate::validation::{Rule, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    Delta,
    Alpha,
    Other,
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleKind::Delta => "delta",
            CycleKind::Alpha => "alpha",
            CycleKind::Other => "other",
        })
    }
}

/// One ambient basis cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisCycle {
    pub id: String,
    pub level: Level,
    pub kind: CycleKind,
    /// The horizontal edge a delta cycle crosses.
    pub edge: Option<usize>,
    /// `<gamma, lambda_e>` for every edge, in edge order.
    pub intersections: Vec<i64>,
    /// Coordinates of the image at `level` in that level's boundary basis.
    pub restriction: Option<Vector>,
}

/// Named basis of one level's boundary homology together with the
/// coordinates of the boundary classes `lambda_e^+` and `lambda_e^-`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelHomology {
    pub level: Level,
    pub basis: Vec<String>,
    pub plus: BTreeMap<usize, Vector>,
    pub minus: BTreeMap<usize, Vector>,
}

impl LevelHomology {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no boundary homology declared for level {0}")]
    UnknownLevel(Level),
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch { what: String, expected: usize, found: usize },
    #[error("missing boundary coordinates of edge '{edge}' at level {level}")]
    MissingBoundaryCoordinates { edge: String, level: Level },
    #[error("vector is not in the level filtration at level {0}")]
    NotInLevelFiltration(Level),
    #[error("vector is not in the vertical filtration at level {0}")]
    NotInVerticalFiltration(Level),
    #[error("cycle '{0}' has no declared restriction")]
    MissingRestriction(String),
    #[error("duplicate cycle id '{0}'")]
    DuplicateCycle(String),
    #[error("edge '{0}' has no vanishing cycle")]
    MissingVanishingCycle(String),
}

/// Where a GRC generator comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GrcSource {
    /// A pole-free component of the graph above the level, with the edges
    /// joining it to the level.
    Component { vertices: Vec<String>, edges: Vec<String> },
    /// Matching residues at a horizontal edge: `lambda^+ - lambda^-`.
    Horizontal { edge: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrcGenerator {
    pub source: GrcSource,
    pub vector: Vector,
}

/// Vertex ids of a component and the edge indices joining it to a level.
pub type GrcComponent = (Vec<String>, Vec<usize>);

/// GRC generators at one level and their span.
#[derive(Clone, Debug)]
pub struct GrcSpan {
    pub level: Level,
    pub generators: Vec<GrcGenerator>,
    pub span: Subspace,
}

/// `L_i` and `W_i` for one level.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub level_part: Subspace,
    pub vertical_part: Subspace,
}

/// Level and vertical filtrations for every level, keyed by level.
#[derive(Clone, Debug)]
pub struct FiltrationPair {
    pub levels: BTreeMap<Level, Filtration>,
}

impl FiltrationPair {
    pub fn level(&self, i: Level) -> &Subspace {
        &self.levels[&i].level_part
    }

    pub fn vertical(&self, i: Level) -> &Subspace {
        &self.levels[&i].vertical_part
    }
}

/// An adapted basis together with the graph it lives on.
///
/// Cycles are stored in the fixed column order: level descending, then
/// delta before alpha before other, then declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptedBasisModel {
    graph: EnhancedLevelGraph,
    cycles: Vec<BasisCycle>,
    /// Ambient coordinates of `lambda_e`, in edge order.
    vanishing: Vec<Vec<i64>>,
    levels: BTreeMap<Level, LevelHomology>,
}

impl AdaptedBasisModel {
    pub fn new(
        graph: EnhancedLevelGraph,
        mut cycles: Vec<BasisCycle>,
        vanishing: Vec<Vec<i64>>,
        levels: Vec<LevelHomology>,
    ) -> Result<Self, ModelError> {
        let n = cycles.len();
        let m = graph.edges().len();
        let mut seen = std::collections::BTreeSet::new();
        for c in &cycles {
            if !seen.insert(c.id.clone()) {
                return Err(ModelError::DuplicateCycle(c.id.clone()));
            }
        }
        if vanishing.len() != m {
            let missing = graph.edges().get(vanishing.len()).map_or_else(String::new, |e| e.id.clone());
            return Err(ModelError::MissingVanishingCycle(missing));
        }
        for (e, v) in graph.edges().iter().zip(&vanishing) {
            if v.len() != n {
                return Err(ModelError::DimensionMismatch {
                    what: format!("vanishing cycle of '{}'", e.id),
                    expected: n,
                    found: v.len(),
                });
            }
        }
        let levels: BTreeMap<Level, LevelHomology> = levels.into_iter().map(|h| (h.level, h)).collect();
        for h in levels.values() {
            for (e, v) in h.plus.iter().chain(&h.minus) {
                if v.len() != h.dim() {
                    return Err(ModelError::DimensionMismatch {
                        what: format!("boundary class of '{}' at level {}", graph.edges()[*e].id, h.level),
                        expected: h.dim(),
                        found: v.len(),
                    });
                }
            }
        }
        for c in &cycles {
            if c.intersections.len() != m {
                return Err(ModelError::DimensionMismatch {
                    what: format!("intersections of '{}'", c.id),
                    expected: m,
                    found: c.intersections.len(),
                });
            }
            let h = levels.get(&c.level).ok_or(ModelError::UnknownLevel(c.level))?;
            if let Some(r) = &c.restriction {
                if r.len() != h.dim() {
                    return Err(ModelError::DimensionMismatch {
                        what: format!("restriction of '{}'", c.id),
                        expected: h.dim(),
                        found: r.len(),
                    });
                }
            }
        }
        // Stable sort keeps declaration order within (level, kind).
        let perm = column_order(&cycles);
        let vanishing = vanishing.iter().map(|v| perm.iter().map(|&k| v[k]).collect()).collect();
        let mut slots: Vec<Option<BasisCycle>> = cycles.drain(..).map(Some).collect();
        let cycles = perm.iter().map(|&k| slots[k].take().expect("permutation")).collect();
        Ok(AdaptedBasisModel { graph, cycles, vanishing, levels })
    }

    pub fn graph(&self) -> &EnhancedLevelGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.cycles.len()
    }

    pub fn cycles(&self) -> &[BasisCycle] {
        &self.cycles
    }

    pub fn cycle_index(&self, id: &str) -> Option<usize> {
        self.cycles.iter().position(|c| c.id == id)
    }

    pub fn level_homology(&self, i: Level) -> Result<&LevelHomology, ModelError> {
        self.levels.get(&i).ok_or(ModelError::UnknownLevel(i))
    }

    pub fn level_homologies(&self) -> impl Iterator<Item = &LevelHomology> {
        self.levels.values().rev()
    }

    /// Ambient integer coordinates of `lambda_e`.
    pub fn vanishing_cycle(&self, e: usize) -> &[i64] {
        &self.vanishing[e]
    }

    pub fn lambda(&self, e: usize) -> Vector {
        int_vector(&self.vanishing[e])
    }

    /// `<x, lambda_e> = sum_l x_l <gamma_l, lambda_e>`.
    pub fn pairing(&self, x: &[Scalar], e: usize) -> Scalar {
        x.iter()
            .zip(&self.cycles)
            .filter(|(v, c)| !v.is_zero() && c.intersections[e] != 0)
            .fold(Scalar::zero(), |acc, (v, c)| acc + v * &Scalar::from_int(c.intersections[e]))
    }

    pub fn int_pairing(&self, x: &[i64], e: usize) -> i64 {
        x.iter().zip(&self.cycles).map(|(v, c)| v * c.intersections[e]).sum()
    }

    /// The intersection column of edge `e` as an ambient vector.
    fn pairing_vector(&self, e: usize) -> Vector {
        self.cycles.iter().map(|c| Scalar::from_int(c.intersections[e])).collect()
    }

    /// `L_i`: span of the cycles of level at most `i`.
    pub fn level_filtration(&self, i: Level) -> Subspace {
        let n = self.dim();
        let vs: Vec<Vector> = (0..n).filter(|&l| self.cycles[l].level <= i).map(|l| linalg::unit_vector(n, l)).collect();
        Subspace::span(vs, n)
    }

    /// `W_i`: the part of `L_i` pairing to zero with every horizontal
    /// vanishing cycle at level `i`.
    pub fn vertical_filtration(&self, i: Level) -> Subspace {
        let n = self.dim();
        let l = self.level_filtration(i);
        let constraints: Vec<Vector> = self.graph.horizontal_at(i).map(|e| self.pairing_vector(e)).collect();
        if constraints.is_empty() {
            return l;
        }
        let solutions = Subspace::span(linalg::nullspace(&constraints, n), n);
        l.intersect(&solutions)
    }

    pub fn filtrations(&self) -> FiltrationPair {
        let levels = self
            .graph
            .levels()
            .into_iter()
            .map(|i| (i, Filtration { level_part: self.level_filtration(i), vertical_part: self.vertical_filtration(i) }))
            .collect();
        FiltrationPair { levels }
    }

    fn boundary_coords(&self, e: usize, i: Level, plus: bool) -> Result<&Vector, ModelError> {
        let h = self.level_homology(i)?;
        let table = if plus { &h.plus } else { &h.minus };
        table.get(&e).ok_or_else(|| ModelError::MissingBoundaryCoordinates {
            edge: self.graph.edges()[e].id.clone(),
            level: i,
        })
    }

    /// Declared coordinates of `lambda_e^-` at the lower end's level.
    pub fn lambda_minus(&self, e: usize) -> Result<&Vector, ModelError> {
        self.boundary_coords(e, self.graph.level_minus(e), false)
    }

    /// Declared coordinates of `lambda_e^+` for a horizontal edge.
    pub fn lambda_plus(&self, e: usize) -> Result<&Vector, ModelError> {
        self.boundary_coords(e, self.graph.level_plus(e), true)
    }

    /// Pole-free connected components of the graph strictly above `i`,
    /// each with the edges running from it down to level `i` (edge
    /// indices into the full graph). Components without such edges are
    /// omitted.
    pub fn grc_components(&self, i: Level) -> Result<Vec<GrcComponent>, ModelError> {
        if i >= Level::TOP {
            return Ok(Vec::new());
        }
        let above = self.graph.restrict_levels(LevelFilter::Above(i))?;
        let mut out = Vec::new();
        for comp in above.components() {
            let has_pole = above.legs().iter().any(|l| l.order < 0 && comp.contains(&l.vertex));
            if has_pole {
                continue;
            }
            let names: Vec<String> = comp.iter().map(|&v| above.vertices()[v].id.clone()).collect();
            let edges: Vec<usize> = (0..self.graph.edges().len())
                .filter(|&e| {
                    let edge = &self.graph.edges()[e];
                    self.graph.level_minus(e) == i && names.contains(&self.graph.vertices()[edge.plus].id)
                })
                .collect();
            if !edges.is_empty() {
                out.push((names, edges));
            }
        }
        Ok(out)
    }

    /// GRC and matching-residue generators at level `i`, in level-`i`
    /// boundary coordinates.
    pub fn grc_span(&self, i: Level) -> Result<GrcSpan, ModelError> {
        let h = self.level_homology(i)?;
        let d = h.dim();
        let mut generators = Vec::new();
        for (vertices, edges) in self.grc_components(i)? {
            let mut v = zero_vector(d);
            for &e in &edges {
                add_scaled(&mut v, self.lambda_minus(e)?, &Scalar::from_int(1));
            }
            let edges = edges.iter().map(|&e| self.graph.edges()[e].id.clone()).collect();
            generators.push(GrcGenerator { source: GrcSource::Component { vertices, edges }, vector: v });
        }
        for e in self.graph.horizontal_at(i) {
            let v = linalg::sub_vec(self.lambda_plus(e)?, self.lambda_minus(e)?);
            generators.push(GrcGenerator {
                source: GrcSource::Horizontal { edge: self.graph.edges()[e].id.clone() },
                vector: v,
            });
        }
        let span = Subspace::span(generators.iter().map(|g| g.vector.clone()).collect::<Vec<_>>(), d);
        Ok(GrcSpan { level: i, generators, span })
    }

    /// The map `g_i`: linear extension of the declared restrictions of the
    /// level-`i` cycles, cycles below `i` mapping to zero.
    pub fn restrict(&self, x: &[Scalar], i: Level) -> Result<Vector, ModelError> {
        self.check_len(x)?;
        let h = self.level_homology(i)?;
        let mut out = zero_vector(h.dim());
        for (v, c) in x.iter().zip(&self.cycles) {
            if v.is_zero() || c.level < i {
                continue;
            }
            if c.level > i {
                return Err(ModelError::NotInLevelFiltration(i));
            }
            let r = c.restriction.as_ref().ok_or_else(|| ModelError::MissingRestriction(c.id.clone()))?;
            add_scaled(&mut out, r, v);
        }
        Ok(out)
    }

    /// The map `f_i`: `g_i` followed by reduction modulo the GRC span.
    pub fn specialize(&self, x: &[Scalar], i: Level) -> Result<Vector, ModelError> {
        self.specialize_with(x, i, &self.grc_span(i)?.span)
    }

    /// [`Self::specialize`] with a precomputed GRC span.
    pub fn specialize_with(&self, x: &[Scalar], i: Level, grc: &Subspace) -> Result<Vector, ModelError> {
        self.check_len(x)?;
        if self.cycles.iter().zip(x).any(|(c, v)| c.level > i && !v.is_zero()) {
            return Err(ModelError::NotInVerticalFiltration(i));
        }
        if self.graph.horizontal_at(i).any(|e| !self.pairing(x, e).is_zero()) {
            return Err(ModelError::NotInVerticalFiltration(i));
        }
        Ok(grc.reduce(&self.restrict(x, i)?))
    }

    fn check_len(&self, x: &[Scalar]) -> Result<(), ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::DimensionMismatch { what: "ambient vector".into(), expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    /// Canonical basis of `{c : sum_e c_e lambda_e = 0}`, over edges.
    pub fn relation_kernel(&self) -> Subspace {
        let rows: Vec<Vector> = self.vanishing.iter().map(|v| int_vector(v)).collect();
        let m = rows.len();
        Subspace::span(linalg::left_kernel(&rows, self.dim()), m)
    }

    /// Checks the defining properties of an adapted basis.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let g = &self.graph;
        let edge_id = |e: usize| g.edges()[e].id.as_str();

        for c in &self.cycles {
            let horizontals: Vec<usize> = g.horizontal_at(c.level).collect();
            match c.kind {
                CycleKind::Delta => match c.edge {
                    Some(e) if horizontals.contains(&e) => {
                        for &h in &horizontals {
                            let want = i64::from(h == e);
                            if c.intersections[h] != want {
                                report.push(
                                    Rule::KroneckerRule,
                                    &c.id,
                                    format!("pairing with {} is {}, expected {want}", edge_id(h), c.intersections[h]),
                                );
                            }
                        }
                    }
                    Some(e) => report.push(
                        Rule::KroneckerRule,
                        &c.id,
                        format!("edge {} is not horizontal at level {}", edge_id(e), c.level),
                    ),
                    None => report.push(Rule::KroneckerRule, &c.id, "delta cycle without an edge"),
                },
                CycleKind::Alpha | CycleKind::Other => {
                    for &h in &horizontals {
                        if c.intersections[h] != 0 {
                            report.push(
                                Rule::AlphaOrthogonality,
                                &c.id,
                                format!("pairs to {} with horizontal {}", c.intersections[h], edge_id(h)),
                            );
                        }
                    }
                    if c.restriction.is_none() {
                        report.push(Rule::MissingRestriction, &c.id, "no restriction declared");
                    }
                }
            }
            for h in (0..g.edges().len()).filter(|&h| g.is_horizontal(h) && g.level_plus(h) > c.level) {
                if c.intersections[h] != 0 {
                    report.push(
                        Rule::LowerLevelOrthogonality,
                        &c.id,
                        format!("pairs to {} with higher horizontal {}", c.intersections[h], edge_id(h)),
                    );
                }
            }
        }
        for i in g.levels() {
            for h in g.horizontal_at(i) {
                let deltas = self.cycles.iter().filter(|c| c.kind == CycleKind::Delta && c.edge == Some(h)).count();
                if deltas != 1 {
                    report.push(Rule::KroneckerRule, edge_id(h), format!("{deltas} delta cycles, expected 1"));
                }
            }
        }

        for e in 0..g.edges().len() {
            for f in 0..g.edges().len() {
                let p = self.int_pairing(&self.vanishing[e], f);
                if p != 0 {
                    report.push(
                        Rule::VanishingCyclePairing,
                        format!("{}/{}", edge_id(e), edge_id(f)),
                        format!("pairing is {p}"),
                    );
                }
            }
            let lo = g.level_minus(e);
            if self.vanishing[e].iter().zip(&self.cycles).any(|(v, c)| *v != 0 && c.level > lo) {
                report.push(Rule::VanishingCycleLevel, edge_id(e), format!("not supported at levels <= {lo}"));
            }
            if self.lambda_minus(e).is_err() {
                report.push(Rule::MissingBoundaryCoordinates, edge_id(e), format!("lambda^- at level {lo}"));
            }
            if g.is_horizontal(e) && self.lambda_plus(e).is_err() {
                report.push(Rule::MissingBoundaryCoordinates, edge_id(e), format!("lambda^+ at level {lo}"));
            }
        }

        for i in g.levels() {
            let Ok(h) = self.level_homology(i) else {
                report.push(Rule::LevelSpanning, i.to_string(), "no boundary homology declared");
                continue;
            };
            let grc = match self.grc_span(i) {
                Ok(s) => s,
                Err(err) => {
                    report.push(Rule::MissingBoundaryCoordinates, i.to_string(), err.to_string());
                    continue;
                }
            };
            let images: Vec<Vector> = self
                .cycles
                .iter()
                .filter(|c| c.level == i && c.kind != CycleKind::Delta)
                .filter_map(|c| c.restriction.as_ref().map(|r| grc.span.reduce(r)))
                .collect();
            let quotient = h.dim() - grc.span.dim();
            let rank = linalg::rank(&images, h.dim());
            if rank != images.len() || rank != quotient {
                report.push(
                    Rule::LevelSpanning,
                    i.to_string(),
                    format!("{} restricted cycles of rank {rank}; quotient by GRC has dimension {quotient}", images.len()),
                );
            }

            for e in (0..g.edges().len()).filter(|&e| g.level_minus(e) == i) {
                let lam = self.lambda(e);
                // Placement of lambda_e is reported separately.
                let Ok(image) = self.specialize_with(&lam, i, &grc.span) else {
                    continue;
                };
                let mut declared: Vec<&Vector> = self.lambda_minus(e).into_iter().collect();
                if g.is_horizontal(e) {
                    declared.extend(self.lambda_plus(e));
                }
                for d in declared {
                    if image != grc.span.reduce(d) {
                        report.push(
                            Rule::SpecializationMismatch,
                            edge_id(e),
                            format!("vanishing cycle does not specialize to its boundary class at level {i}"),
                        );
                    }
                }
            }

            let below = self.level_filtration(i.below());
            for (vertices, edges) in self.grc_components(i).unwrap_or_default() {
                let mut lift = zero_vector(self.dim());
                for &e in &edges {
                    add_scaled(&mut lift, &self.lambda(e), &Scalar::from_int(1));
                }
                if !below.contains(&lift) {
                    report.push(
                        Rule::GrcLift,
                        vertices.join("+"),
                        format!("lifted GRC generator at level {i} is not supported below the level"),
                    );
                }
            }
        }
        report
    }

    /// Checks a residue assignment (missing edges read as zero) against the
    /// homological relations among vanishing cycles and the GRC.
    pub fn residue_consistency(&self, residues: &BTreeMap<usize, Scalar>) -> ValidationReport {
        let mut report = ValidationReport::new();
        let g = &self.graph;
        let r: Vector = (0..g.edges().len()).map(|e| residues.get(&e).cloned().unwrap_or_else(Scalar::zero)).collect();
        for c in self.relation_kernel().basis() {
            let s = linalg::dot(c, &r);
            if !s.is_zero() {
                let terms: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(e, v)| format!("{v}*r[{}]", g.edges()[e].id))
                    .collect();
                report.push(Rule::ResidueRelation, terms.join(" + "), format!("evaluates to {s}"));
            }
        }
        for i in g.lower_levels() {
            for (vertices, edges) in self.grc_components(i).unwrap_or_default() {
                let s = edges.iter().fold(Scalar::zero(), |acc, &e| acc + r[e].clone());
                if !s.is_zero() {
                    report.push(
                        Rule::GlobalResidueCondition,
                        vertices.join("+"),
                        format!("residues into level {i} sum to {s}"),
                    );
                }
            }
        }
        report
    }

    /// True when `x` is zero on every cycle above level `i`.
    pub fn in_level_filtration(&self, x: &[Scalar], i: Level) -> bool {
        self.cycles.iter().zip(x).all(|(c, v)| c.level <= i || v.is_zero())
    }

    /// Largest level carrying a nonzero coefficient of `x`.
    pub fn top_level(&self, x: &[Scalar]) -> Option<Level> {
        self.cycles.iter().zip(x).filter(|(_, v)| !v.is_zero()).map(|(c, _)| c.level).max()
    }

    /// Whether every coordinate of `x` vanishes.
    pub fn is_zero(x: &[Scalar]) -> bool {
        is_zero_vector(x)
    }
}

/// Permutation putting cycles into column order.
fn column_order(cycles: &[BasisCycle]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..cycles.len()).collect();
    perm.sort_by_key(|&k| (std::cmp::Reverse(cycles[k].level), cycles[k].kind));
    perm
}
