//! Twist operators around boundary divisors, their logarithms, arc
//! monodromy, the preservation test for an equation system, and the
//! residue relations it forces.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::graph::{GraphError, Level};
use crate::homology::AdaptedBasisModel;
use crate::linalg::{self, add_scaled, is_zero_vector, zero_vector, IntMatrix, Subspace, Vector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonodromyError {
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("logarithm of {0} does not square to zero")]
    NotSquareZero(String),
    #[error("invalid monodromy type: {0}")]
    InvalidType(String),
    #[error("expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A boundary divisor generator: a horizontal edge or a lower level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Horizontal(usize),
    Level(Level),
}

impl Generator {
    /// Every generator of the model: lower levels from the top down, then
    /// horizontal edges in edge order.
    pub fn all(model: &AdaptedBasisModel) -> Vec<Generator> {
        let g = model.graph();
        g.lower_levels()
            .map(Generator::Level)
            .chain((0..g.edges().len()).filter(|&e| g.is_horizontal(e)).map(Generator::Horizontal))
            .collect()
    }

    /// Parses a horizontal edge id or a lower level such as `-1`.
    pub fn parse(model: &AdaptedBasisModel, s: &str) -> Result<Generator, MonodromyError> {
        let g = model.graph();
        let unknown = || MonodromyError::UnknownGenerator(s.to_string());
        if let Some(e) = g.edge_index(s) {
            return if g.is_horizontal(e) { Ok(Generator::Horizontal(e)) } else { Err(unknown()) };
        }
        let level: i32 = s.parse().map_err(|_| unknown())?;
        let level = Level(level);
        if g.lower_levels().any(|l| l == level) {
            Ok(Generator::Level(level))
        } else {
            Err(unknown())
        }
    }

    pub fn label(&self, model: &AdaptedBasisModel) -> String {
        match self {
            Generator::Horizontal(e) => model.graph().edges()[*e].id.clone(),
            Generator::Level(l) => l.to_string(),
        }
    }
}

/// Which operator a matrix represents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "label", rename_all = "snake_case")]
pub enum OperatorTag {
    Horizontal(String),
    Level(Level),
    Arc,
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorTag::Horizontal(e) => write!(f, "edge {e}"),
            OperatorTag::Level(l) => write!(f, "level {l}"),
            OperatorTag::Arc => write!(f, "arc"),
        }
    }
}

/// An integer operator on ambient cycle coordinates; column `l` is the
/// image of the `l`-th basis cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyOperator {
    pub tag: OperatorTag,
    pub matrix: IntMatrix,
}

/// Vanishing orders of an arc: one positive weight per lower level and
/// per horizontal edge. Vertical edge weights are derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyType {
    levels: BTreeMap<Level, u64>,
    horizontal: BTreeMap<usize, u64>,
}

impl MonodromyType {
    /// Checks positivity and coverage of every lower level and
    /// horizontal edge.
    pub fn new(
        model: &AdaptedBasisModel,
        levels: BTreeMap<Level, i64>,
        horizontal: BTreeMap<usize, i64>,
    ) -> Result<Self, MonodromyError> {
        let g = model.graph();
        let invalid = |msg: String| Err(MonodromyError::InvalidType(msg));
        for (l, &w) in &levels {
            if !g.lower_levels().any(|k| k == *l) {
                return invalid(format!("level {l} is not a lower level"));
            }
            if w < 1 {
                return invalid(format!("weight {w} at level {l} is not positive"));
            }
        }
        for (&e, &w) in &horizontal {
            let id = g.edges().get(e).map_or("?", |x| x.id.as_str());
            if e >= g.edges().len() || !g.is_horizontal(e) {
                return invalid(format!("edge {id} is not horizontal"));
            }
            if w < 1 {
                return invalid(format!("weight {w} at edge {id} is not positive"));
            }
        }
        if let Some(l) = g.lower_levels().find(|l| !levels.contains_key(l)) {
            return invalid(format!("no weight for level {l}"));
        }
        if let Some(e) = (0..g.edges().len()).find(|&e| g.is_horizontal(e) && !horizontal.contains_key(&e)) {
            return invalid(format!("no weight for edge {}", g.edges()[e].id));
        }
        Ok(MonodromyType { levels: unsigned(levels), horizontal: unsigned(horizontal) })
    }

    /// Every weight equal to one.
    pub fn ones(model: &AdaptedBasisModel) -> Self {
        let g = model.graph();
        MonodromyType {
            levels: g.lower_levels().map(|l| (l, 1)).collect(),
            horizontal: (0..g.edges().len()).filter(|&e| g.is_horizontal(e)).map(|e| (e, 1)).collect(),
        }
    }

    pub fn level_weight(&self, l: Level) -> u64 {
        self.levels[&l]
    }

    pub fn levels(&self) -> &BTreeMap<Level, u64> {
        &self.levels
    }

    pub fn horizontal(&self) -> &BTreeMap<usize, u64> {
        &self.horizontal
    }

    /// `sigma_e`: declared for horizontal edges, and
    /// `sum_{k=l(e-)}^{l(e+)-1} m_{e,k} sigma_k` for vertical ones.
    pub fn edge_weight(&self, model: &AdaptedBasisModel, e: usize) -> Result<u64, MonodromyError> {
        let g = model.graph();
        if g.is_horizontal(e) {
            return Ok(self.horizontal[&e]);
        }
        let mut w = 0;
        for k in g.level_minus(e).0..g.level_plus(e).0 {
            let data = g.prong_data(Level(k))?;
            w += data.multiplicities[&e] * self.levels[&Level(k)];
        }
        Ok(w)
    }

    pub fn scaled(&self, c: u64) -> Self {
        MonodromyType {
            levels: self.levels.iter().map(|(k, w)| (*k, w * c)).collect(),
            horizontal: self.horizontal.iter().map(|(k, w)| (*k, w * c)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        MonodromyType {
            levels: self.levels.iter().map(|(k, w)| (*k, w + other.levels[k])).collect(),
            horizontal: self.horizontal.iter().map(|(k, w)| (*k, w + other.horizontal[k])).collect(),
        }
    }
}

fn unsigned<K: Ord>(m: BTreeMap<K, i64>) -> BTreeMap<K, u64> {
    m.into_iter().map(|(k, w)| (k, w as u64)).collect()
}

/// `sum_e w_e <gamma_l, lambda_e> lambda_e` as an integer matrix, with
/// `w_e` the weight of edge `e`.
fn weighted_twist_part(model: &AdaptedBasisModel, weights: &[(usize, i64)]) -> IntMatrix {
    let n = model.dim();
    let mut m = IntMatrix::zeros(n);
    for &(e, w) in weights {
        let lam = model.vanishing_cycle(e);
        for (l, c) in model.cycles().iter().enumerate() {
            let p = c.intersections[e] * w;
            if p == 0 {
                continue;
            }
            for (r, &v) in lam.iter().enumerate() {
                if v != 0 {
                    m.add_at(r, l, p * v);
                }
            }
        }
    }
    m
}

fn generator_weights(model: &AdaptedBasisModel, generator: &Generator) -> Result<Vec<(usize, i64)>, MonodromyError> {
    let g = model.graph();
    match generator {
        Generator::Horizontal(e) => {
            if *e >= g.edges().len() || !g.is_horizontal(*e) {
                return Err(MonodromyError::UnknownGenerator(format!("edge #{e}")));
            }
            Ok(vec![(*e, 1)])
        }
        Generator::Level(l) => {
            if !g.lower_levels().any(|k| k == *l) {
                return Err(MonodromyError::UnknownGenerator(format!("level {l}")));
            }
            let data = g.prong_data(*l)?;
            Ok(data.multiplicities.iter().map(|(&e, &m)| (e, m as i64)).collect())
        }
    }
}

fn tag_of(model: &AdaptedBasisModel, generator: &Generator) -> OperatorTag {
    match generator {
        Generator::Horizontal(e) => OperatorTag::Horizontal(model.graph().edges()[*e].id.clone()),
        Generator::Level(l) => OperatorTag::Level(*l),
    }
}

/// `T_e(gamma) = gamma + <gamma, lambda_e> lambda_e` for a horizontal edge,
/// `T_i(gamma) = gamma + sum m_{e,i} <gamma, lambda_e> lambda_e` over the
/// edges crossing level `i`.
pub fn twist_matrix(model: &AdaptedBasisModel, generator: &Generator) -> Result<MonodromyOperator, MonodromyError> {
    let weights = generator_weights(model, generator)?;
    let matrix = IntMatrix::identity(model.dim()).add(&weighted_twist_part(model, &weights));
    Ok(MonodromyOperator { tag: tag_of(model, generator), matrix })
}

/// `N = I - T`, rejected unless `N^2 = 0`.
pub fn monodromy_log(model: &AdaptedBasisModel, generator: &Generator) -> Result<MonodromyOperator, MonodromyError> {
    let t = twist_matrix(model, generator)?;
    let n = IntMatrix::identity(model.dim()).sub(&t.matrix);
    if !n.mul(&n).is_zero() {
        return Err(MonodromyError::NotSquareZero(t.tag.to_string()));
    }
    Ok(MonodromyOperator { tag: t.tag, matrix: n })
}

/// `N_sigma = sum_i sigma_i N_i + sum_e sigma_e N_e`.
pub fn arc_log(model: &AdaptedBasisModel, sigma: &MonodromyType) -> Result<MonodromyOperator, MonodromyError> {
    let mut total = IntMatrix::zeros(model.dim());
    for (&l, &w) in sigma.levels() {
        let n = monodromy_log(model, &Generator::Level(l))?;
        total = total.add(&n.matrix.scale(w as i64));
    }
    for (&e, &w) in sigma.horizontal() {
        let n = monodromy_log(model, &Generator::Horizontal(e))?;
        total = total.add(&n.matrix.scale(w as i64));
    }
    if !total.mul(&total).is_zero() {
        return Err(MonodromyError::NotSquareZero("arc".into()));
    }
    Ok(MonodromyOperator { tag: OperatorTag::Arc, matrix: total })
}

fn check_columns(rows: &[Vector], n: usize) -> Result<(), MonodromyError> {
    match rows.iter().find(|r| r.len() != n) {
        Some(r) => Err(MonodromyError::DimensionMismatch { expected: n, found: r.len() }),
        None => Ok(()),
    }
}

/// `A N^T`: row `k` is the image of the `k`-th equation class under `N`.
pub fn equations_times_transpose(a: &[Vector], n: &IntMatrix) -> Vec<Vector> {
    let nt = n.transpose().to_scalar_rows();
    a.iter()
        .map(|row| {
            let mut out = zero_vector(n.size());
            for (x, nrow) in row.iter().zip(&nt) {
                add_scaled(&mut out, nrow, x);
            }
            out
        })
        .collect()
}

/// Whether `N` maps `V = {x : A x = 0}` into itself, acting on solution
/// vectors by `N^T`: `rank [A; A N^T] = rank A`.
pub fn preserves(a: &[Vector], n: &IntMatrix) -> Result<bool, MonodromyError> {
    check_columns(a, n.size())?;
    let stacked: Vec<Vector> = a.iter().cloned().chain(equations_times_transpose(a, n)).collect();
    Ok(linalg::rank(&stacked, n.size()) == linalg::rank(a, n.size()))
}

/// A linear form in the residues `r_e`, as coefficients in edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueForm {
    /// Index of the equation row the form comes from.
    pub row: usize,
    pub raw: Vector,
    /// Canonical representative modulo the relations among the `lambda_e`.
    pub reduced: Vector,
    pub vacuous: bool,
}

impl ResidueForm {
    /// `sum_e f_e lambda_e` in ambient coordinates, for the reduced form.
    pub fn ambient_class(&self, model: &AdaptedBasisModel) -> Vector {
        let mut out = zero_vector(model.dim());
        for (e, f) in self.reduced.iter().enumerate() {
            add_scaled(&mut out, &model.lambda(e), f);
        }
        out
    }

    /// Whether the vanishing of this form follows from the equations,
    /// i.e. its ambient class lies in their row span.
    pub fn is_implied_by(&self, model: &AdaptedBasisModel, equations: &Subspace) -> bool {
        equations.contains(&self.ambient_class(model))
    }
}

/// Renders a residue form as `c*r[e] + ...`.
pub fn render_residues(model: &AdaptedBasisModel, coefficients: &[Scalar]) -> String {
    render_form(coefficients, |e| format!("r[{}]", model.graph().edges()[e].id))
}

/// Renders `sum c_k * name(k)`, skipping zero terms.
pub fn render_form(coefficients: &[Scalar], name: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    for (k, c) in coefficients.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        let text = c.to_string();
        let (sign, body) = match text.strip_prefix('-') {
            Some(rest) if c.is_rational() => ("-", rest.to_string()),
            _ => ("+", text.clone()),
        };
        let body = if !c.is_rational() {
            format!("({text})")
        } else if body == "1" {
            String::new()
        } else {
            format!("{body}*")
        };
        let sign = if !c.is_rational() { "+" } else { sign };
        if out.is_empty() {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        out.push_str(&format!("{body}{}", name(k)));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// For each row `F_k` of `A`: the form `sum_e sigma_e <F_k, lambda_e> r_e`,
/// reduced modulo the relations among vanishing cycles. Zero forms are
/// kept and flagged.
pub fn forced_residue_equations(
    model: &AdaptedBasisModel,
    a: &[Vector],
    sigma: &MonodromyType,
) -> Result<Vec<ResidueForm>, MonodromyError> {
    check_columns(a, model.dim())?;
    let m = model.graph().edges().len();
    let weights: Vec<Scalar> = (0..m)
        .map(|e| sigma.edge_weight(model, e).map(|w| Scalar::from_int(w as i64)))
        .collect::<Result<_, _>>()?;
    let relations = model.relation_kernel();
    Ok(a
        .iter()
        .enumerate()
        .map(|(row, f)| {
            let raw: Vector = (0..m).map(|e| &model.pairing(f, e) * &weights[e]).collect();
            let reduced = relations.reduce(&raw);
            let vacuous = is_zero_vector(&reduced);
            ResidueForm { row, raw, reduced, vacuous }
        })
        .collect())
}

/// Brute-force check of `N^T V ⊆ V`: apply `N^T` to a kernel basis of `A`
/// and test each image.
pub fn preserves_by_kernel(a: &[Vector], n: &IntMatrix) -> bool {
    let dim = n.size();
    let nt = n.transpose().to_scalar_rows();
    linalg::nullspace(a, dim).iter().all(|v| {
        let image = linalg::mat_vec(&nt, v);
        a.iter().all(|row| linalg::dot(row, &image).is_zero())
    })
}
