//! Levelwise boundary equations of a linear subvariety.
//!
//! The pipeline row-reduces the defining equations, deletes rows that cross
//! a horizontal node at their top level, and specializes each remaining row
//! to its top level modulo the GRC span. [`coordfree_boundary`] computes the
//! same spans from subspace intersections alone.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::graph::Level;
use crate::homology::{AdaptedBasisModel, ModelError};
use crate::linalg::{self, is_zero_vector, Rref, Subspace, Vector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("equation row {row} has {found} entries, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
}

/// Equation rows over the ambient basis, in column order.
pub type EquationMatrix = Rref;

/// Canonical reduced row echelon form of the equations.
pub fn rref(a: &[Vector], ncols: usize) -> EquationMatrix {
    linalg::rref(a, ncols)
}

fn check_rows(model: &AdaptedBasisModel, a: &[Vector]) -> Result<(), BoundaryError> {
    let n = model.dim();
    match a.iter().enumerate().find(|(_, r)| r.len() != n) {
        Some((row, r)) => Err(BoundaryError::DimensionMismatch { row, expected: n, found: r.len() }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowClassification {
    /// Largest level with a nonzero coefficient; `None` for the zero row.
    pub top_level: Option<Level>,
    /// Horizontal edges at the top level with nonzero pairing.
    pub crossed: Vec<usize>,
}

impl RowClassification {
    pub fn horizontal_crossing(&self) -> bool {
        !self.crossed.is_empty()
    }
}

pub fn classify_row(model: &AdaptedBasisModel, row: &[Scalar]) -> Result<RowClassification, BoundaryError> {
    check_rows(model, std::slice::from_ref(&row.to_vec()))?;
    let top_level = model.top_level(row);
    let crossed = match top_level {
        Some(i) => model.graph().horizontal_at(i).filter(|&e| !model.pairing(row, e).is_zero()).collect(),
        None => Vec::new(),
    };
    Ok(RowClassification { top_level, crossed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// The top level: ordinary linear equations.
    Linear,
    /// Lower levels: homogeneous equations, defined up to scale.
    Projective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelBlock {
    pub level: Level,
    pub kind: BlockKind,
    /// Canonical RREF basis of the equations, in level-basis coordinates.
    pub span: Subspace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogEntry {
    /// A row deleted because it crosses horizontal edges at its top level.
    HorizontalCrossing { row: Vector, level: Level, edges: Vec<usize> },
    /// A row whose restriction vanished modulo the GRC span.
    ReducedToZero { row: Vector, level: Level },
}

impl LogEntry {
    pub fn row(&self) -> &Vector {
        match self {
            LogEntry::HorizontalCrossing { row, .. } | LogEntry::ReducedToZero { row, .. } => row,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryEquationSet {
    /// One block per level, levels descending.
    pub blocks: Vec<LevelBlock>,
    pub log: Vec<LogEntry>,
}

impl BoundaryEquationSet {
    pub fn block(&self, level: Level) -> Option<&LevelBlock> {
        self.blocks.iter().find(|b| b.level == level)
    }

    pub fn spans(&self) -> Vec<(Level, Subspace)> {
        self.blocks.iter().map(|b| (b.level, b.span.clone())).collect()
    }
}

fn block_kind(level: Level) -> BlockKind {
    if level == Level::TOP {
        BlockKind::Linear
    } else {
        BlockKind::Projective
    }
}

/// Runs the boundary pipeline on the equation rows `a`.
pub fn boundary_equations(model: &AdaptedBasisModel, a: &[Vector]) -> Result<BoundaryEquationSet, BoundaryError> {
    check_rows(model, a)?;
    let reduced = rref(a, model.dim());
    let levels = model.graph().levels();
    let mut grc = Vec::with_capacity(levels.len());
    for &i in &levels {
        grc.push(model.grc_span(i)?.span);
    }
    let mut images: Vec<Vec<Vector>> = vec![Vec::new(); levels.len()];
    let mut log = Vec::new();
    for row in &reduced.rows {
        let class = classify_row(model, row)?;
        let Some(top) = class.top_level else { continue };
        if class.horizontal_crossing() {
            log.push(LogEntry::HorizontalCrossing { row: row.clone(), level: top, edges: class.crossed });
            continue;
        }
        let slot = levels.iter().position(|&l| l == top).expect("top level is a graph level");
        let image = model.specialize_with(row, top, &grc[slot])?;
        if is_zero_vector(&image) {
            log.push(LogEntry::ReducedToZero { row: row.clone(), level: top });
        } else {
            images[slot].push(image);
        }
    }
    let blocks = levels
        .iter()
        .zip(images)
        .map(|(&level, vs)| {
            let dim = model.level_homology(level).map(|h| h.dim())?;
            Ok(LevelBlock { level, kind: block_kind(level), span: Subspace::span(vs, dim) })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(BoundaryEquationSet { blocks, log })
}

/// Per level `i`, the span `f_i(rowspace(A) ∩ W_i)` in canonical form,
/// levels descending.
pub fn coordfree_boundary(model: &AdaptedBasisModel, a: &[Vector]) -> Result<Vec<(Level, Subspace)>, BoundaryError> {
    check_rows(model, a)?;
    let equations = Subspace::span(a, model.dim());
    model
        .graph()
        .levels()
        .into_iter()
        .map(|i| {
            let grc = model.grc_span(i)?.span;
            let part = equations.intersect(&model.vertical_filtration(i));
            let images = part
                .basis()
                .iter()
                .map(|v| model.specialize_with(v, i, &grc))
                .collect::<Result<Vec<_>, _>>()?;
            let dim = model.level_homology(i)?.dim();
            Ok((i, Subspace::span(images, dim)))
        })
        .collect()
}

/// Rescales a rational vector to coprime integers with a positive leading
/// entry. Vectors with non-real entries are returned unchanged.
pub fn primitive_integer_form(v: &[Scalar]) -> Vector {
    if v.iter().any(|x| !x.is_rational()) || is_zero_vector(v) {
        return v.to_vec();
    }
    let denom = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.re().denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x.re() * BigRational::from_integer(denom.clone())).to_integer()).collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let lead = ints.iter().find(|x| !x.is_zero()).expect("nonzero vector");
    if lead.is_negative() {
        g = -g;
    }
    ints.into_iter().map(|x| Scalar::from(BigRational::from_integer(x / &g))).collect()
}
