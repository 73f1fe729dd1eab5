//! Shared helpers for integration tests: corpus loading, a seeded random
//! generator of valid fixtures, and independent oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use levelwise::fixture::{parse_fixture, Fixture};
use levelwise::graph::{EnhancedLevelGraph, Level, LevelFilter};
use levelwise::homology::{AdaptedBasisModel, BasisCycle, CycleKind, LevelHomology};
use levelwise::linalg::{self, add_scaled, int_vector, zero_vector, Subspace, Vector};
use levelwise::scalar::Scalar;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

pub fn load(name: &str) -> Fixture {
    let bytes = std::fs::read(fixture_path(name)).expect("fixture file");
    parse_fixture(&bytes).expect("fixture parses")
}

pub fn s(text: &str) -> Scalar {
    text.parse().expect("scalar literal")
}

/// Ambient vector from `(cycle id, coefficient)` pairs.
pub fn ambient(model: &AdaptedBasisModel, terms: &[(&str, i64)]) -> Vector {
    let mut v = zero_vector(model.dim());
    for (id, c) in terms {
        v[model.cycle_index(id).unwrap_or_else(|| panic!("no cycle {id}"))] = Scalar::from_int(*c);
    }
    v
}

/// Level-basis vector from `(name, coefficient)` pairs.
pub fn level_vector(model: &AdaptedBasisModel, level: i32, terms: &[(&str, i64)]) -> Vector {
    let basis = &model.level_homology(Level(level)).unwrap().basis;
    let mut v = zero_vector(basis.len());
    for (id, c) in terms {
        v[basis.iter().position(|b| b == id).unwrap_or_else(|| panic!("no basis element {id}"))] = Scalar::from_int(*c);
    }
    v
}

pub fn edge(model: &AdaptedBasisModel, id: &str) -> usize {
    model.graph().edge_index(id).unwrap()
}

// ---------------------------------------------------------------------------
// Oracles

/// Rank by fraction-free (Bareiss) elimination over the integers, after
/// clearing denominators row by row. Rational entries only.
pub fn bareiss_rank(rows: &[Vector], ncols: usize) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let den = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.re().denom()));
            r.iter().map(|x| (x.re() * BigRational::from_integer(den.clone())).to_integer()).collect()
        })
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&k| !m[k][c].is_zero()) else { continue };
        m.swap(rank, p);
        for k in rank + 1..m.len() {
            for j in c + 1..ncols {
                let v = (&m[rank][c] * &m[k][j] - &m[k][c] * &m[rank][j]) / &prev;
                m[k][j] = v;
            }
            m[k][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Whether `v` lies in the row span of `rows`, by comparing ranks.
pub fn in_span_by_rank(rows: &[Vector], v: &[Scalar], ncols: usize) -> bool {
    let mut with = rows.to_vec();
    with.push(v.to_vec());
    linalg::rank(&with, ncols) == linalg::rank(rows, ncols)
}

// ---------------------------------------------------------------------------
// Random generator

fn small(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Scalar {
    Scalar::from_int(rng.gen_range(lo..=hi))
}

fn random_entry(rng: &mut ChaCha8Rng) -> Scalar {
    match rng.gen_range(0..10) {
        0 => Scalar::ratio(rng.gen_range(-3..=3), rng.gen_range(1..=4)),
        _ => small(rng, -3, 3),
    }
}

/// A random valid enhanced level graph with at most four levels, at most
/// two vertices per level and at most three horizontal edges.
pub fn random_graph(rng: &mut ChaCha8Rng) -> (EnhancedLevelGraph, Vec<i64>) {
    loop {
        let nlev = rng.gen_range(1..=4);
        let mut verts: Vec<(String, u32, i32)> = Vec::new();
        for l in 0..nlev {
            for k in 0..rng.gen_range(1..=2) {
                verts.push((format!("v{l}{}", ["a", "b"][k]), rng.gen_range(0..=1), -l));
            }
        }
        let mut edges: Vec<(String, usize, usize, u32)> = Vec::new();
        for (k, v) in verts.iter().enumerate() {
            if v.2 < 0 {
                let uppers: Vec<usize> = (0..verts.len()).filter(|&u| verts[u].2 > v.2).collect();
                let up = uppers[rng.gen_range(0..uppers.len())];
                edges.push((format!("e{}", edges.len()), up, k, rng.gen_range(1..=3)));
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            let a = rng.gen_range(0..verts.len());
            let b = rng.gen_range(0..verts.len());
            if verts[a].2 != verts[b].2 {
                let (hi, lo) = if verts[a].2 > verts[b].2 { (a, b) } else { (b, a) };
                edges.push((format!("e{}", edges.len()), hi, lo, rng.gen_range(1..=3)));
            }
        }
        for _ in 0..rng.gen_range(0..=3) {
            let a = rng.gen_range(0..verts.len());
            let same: Vec<usize> = (0..verts.len()).filter(|&b| verts[b].2 == verts[a].2).collect();
            let b = same[rng.gen_range(0..same.len())];
            edges.push((format!("e{}", edges.len()), a, b, 0));
        }
        let mut legs: Vec<(String, usize, i64)> = Vec::new();
        for (k, v) in verts.iter().enumerate() {
            let mut sum = 0i64;
            for e in &edges {
                if e.1 == k {
                    sum += i64::from(e.3) - 1;
                }
                if e.2 == k {
                    sum += -i64::from(e.3) - 1;
                }
            }
            let d = 2 * i64::from(v.1) - 2 - sum;
            if d != 0 {
                legs.push((format!("z{}", legs.len()), k, d));
            }
            if rng.gen_bool(0.3) {
                let a = rng.gen_range(1..=3);
                legs.push((format!("z{}", legs.len()), k, a));
                legs.push((format!("z{}", legs.len()), k, -a));
            }
        }
        let mut b = EnhancedLevelGraph::builder();
        for v in &verts {
            b = b.vertex(&v.0, v.1, v.2);
        }
        for e in &edges {
            b = b.edge(&e.0, &verts[e.1].0, &verts[e.2].0, e.3);
        }
        for l in &legs {
            b = b.leg(&l.0, &verts[l.1].0, l.2);
        }
        let g = b.build().expect("generated ids are unique");
        let mu: Vec<i64> = legs.iter().map(|l| l.2).collect();
        if g.validate(&mu).is_ok() {
            return (g, mu);
        }
    }
}

/// Pole-free components above `i` with their edges down to `i`, computed
/// directly from the graph.
fn qualifying_components(g: &EnhancedLevelGraph, i: Level) -> Vec<Vec<usize>> {
    if i >= Level::TOP {
        return Vec::new();
    }
    let above = g.restrict_levels(LevelFilter::Above(i)).unwrap();
    above
        .components()
        .into_iter()
        .filter(|comp| !above.legs().iter().any(|l| l.order < 0 && comp.contains(&l.vertex)))
        .map(|comp| {
            let ids: Vec<&str> = comp.iter().map(|&v| above.vertices()[v].id.as_str()).collect();
            (0..g.edges().len())
                .filter(|&e| g.level_minus(e) == i && ids.contains(&g.vertices()[g.edges()[e].plus].id.as_str()))
                .collect::<Vec<usize>>()
        })
        .filter(|edges| !edges.is_empty())
        .collect()
}

struct LevelPlan {
    level: Level,
    dim: usize,
    targets_y: Vec<(Vec<usize>, Vector)>,
    targets_h: Vec<(usize, Vector)>,
    grc: Subspace,
    restrictions: Vec<Vector>,
}

/// A random valid fixture: graph, adapted basis and equations, with
/// ambient dimension at most 12.
pub fn random_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(f) = try_random_fixture(&mut rng) {
            return f;
        }
    }
}

fn try_random_fixture(rng: &mut ChaCha8Rng) -> Option<Fixture> {
    let (g, mu) = random_graph(rng);
    let m = g.edges().len();

    let mut plans = Vec::new();
    for i in g.levels() {
        let ys = qualifying_components(&g, i);
        let hs: Vec<usize> = g.horizontal_at(i).collect();
        let dim = rng.gen_range(1..=3);
        let vec_rand = |rng: &mut ChaCha8Rng| (0..dim).map(|_| small(rng, -1, 1)).collect::<Vector>();
        let targets_y: Vec<(Vec<usize>, Vector)> = ys.into_iter().map(|y| (y, vec_rand(rng))).collect();
        let targets_h: Vec<(usize, Vector)> = hs.into_iter().map(|h| (h, vec_rand(rng))).collect();
        let all: Vec<Vector> = targets_y.iter().map(|t| t.1.clone()).chain(targets_h.iter().map(|t| t.1.clone())).collect();
        let grc = Subspace::span(all, dim);
        let free: Vec<usize> = (0..dim).filter(|c| !grc.pivots().contains(c)).collect();
        let restrictions = free
            .iter()
            .map(|&c| {
                let mut r = linalg::unit_vector(dim, c);
                for b in grc.basis() {
                    add_scaled(&mut r, b, &small(rng, -1, 1));
                }
                r
            })
            .collect();
        plans.push(LevelPlan { level: i, dim, targets_y, targets_h, grc, restrictions });
    }

    // Cycles in column order: per level, deltas then alphas.
    let mut cycles: Vec<BasisCycle> = Vec::new();
    let mut inert: Vec<bool> = Vec::new();
    for p in &plans {
        for (h, _) in &p.targets_h {
            cycles.push(BasisCycle {
                id: format!("d{}", g.edges()[*h].id),
                level: p.level,
                kind: CycleKind::Delta,
                edge: Some(*h),
                intersections: vec![0; m],
                restriction: None,
            });
            inert.push(false);
        }
        for (k, r) in p.restrictions.iter().enumerate() {
            let kind = if rng.gen_bool(0.2) { CycleKind::Other } else { CycleKind::Alpha };
            cycles.push(BasisCycle {
                id: format!("c{}_{k}", -p.level.0),
                level: p.level,
                kind,
                edge: None,
                intersections: vec![0; m],
                restriction: Some(r.clone()),
            });
            inert.push(rng.gen_bool(0.5));
        }
    }
    let n = cycles.len();
    if n == 0 || n > 12 {
        return None;
    }
    for (c, &is_inert) in cycles.iter_mut().zip(&inert) {
        if is_inert {
            continue;
        }
        for e in 0..m {
            let val = if g.is_horizontal(e) {
                let le = g.level_plus(e);
                if le > c.level {
                    0
                } else if le == c.level {
                    i64::from(c.edge == Some(e))
                } else {
                    rng.gen_range(-1..=1)
                }
            } else if rng.gen_bool(0.5) {
                rng.gen_range(-2..=2)
            } else {
                0
            };
            c.intersections[e] = val;
        }
    }

    let inert_at = |l: Level| -> Vec<usize> { (0..n).filter(|&k| inert[k] && cycles[k].level == l).collect() };
    let inert_below = |l: Level| -> Vec<usize> { (0..n).filter(|&k| inert[k] && cycles[k].level < l).collect() };
    let combo = |rng: &mut ChaCha8Rng, idx: &[usize]| -> Vec<i64> {
        let mut v = vec![0i64; n];
        for &k in idx {
            v[k] = rng.gen_range(-1..=1);
        }
        v
    };
    let restrict = |v: &[i64], l: Level, dim: usize| -> Vector {
        let mut out = zero_vector(dim);
        for (k, &x) in v.iter().enumerate() {
            if x != 0 && cycles[k].level == l {
                add_scaled(&mut out, cycles[k].restriction.as_ref().unwrap(), &Scalar::from_int(x));
            }
        }
        out
    };
    let grc_element = |rng: &mut ChaCha8Rng, p: &LevelPlan| -> Vector {
        let mut v = zero_vector(p.dim);
        for b in p.grc.basis() {
            add_scaled(&mut v, b, &small(rng, -1, 1));
        }
        v
    };
    let add = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };

    let mut vanishing: Vec<Vec<i64>> = vec![Vec::new(); m];
    let mut levels = Vec::new();
    for p in &plans {
        let i = p.level;
        let (here, below) = (inert_at(i), inert_below(i));
        let mut plus = BTreeMap::new();
        let mut minus = BTreeMap::new();
        let mut in_component = vec![false; m];
        for (edges, target) in &p.targets_y {
            let mut top_sum = vec![0i64; n];
            let mut minus_sum = zero_vector(p.dim);
            let (last, rest) = edges.split_last().unwrap();
            for &e in rest {
                let top = combo(rng, &here);
                let lam = add(&top, &combo(rng, &below));
                let mut lm = restrict(&lam, i, p.dim);
                add_scaled(&mut lm, &grc_element(rng, p), &Scalar::one());
                top_sum = add(&top_sum, &top);
                add_scaled(&mut minus_sum, &lm, &Scalar::one());
                vanishing[e] = lam;
                minus.insert(e, lm);
                in_component[e] = true;
            }
            let neg: Vec<i64> = top_sum.iter().map(|x| -x).collect();
            vanishing[*last] = add(&neg, &combo(rng, &below));
            minus.insert(*last, linalg::sub_vec(target, &minus_sum));
            in_component[*last] = true;
        }
        for e in (0..m).filter(|&e| g.level_minus(e) == i && !g.is_horizontal(e) && !in_component[e]) {
            let lam = add(&combo(rng, &here), &combo(rng, &below));
            let mut lm = restrict(&lam, i, p.dim);
            add_scaled(&mut lm, &grc_element(rng, p), &Scalar::one());
            vanishing[e] = lam;
            minus.insert(e, lm);
        }
        for (h, target) in &p.targets_h {
            let lam = add(&combo(rng, &here), &combo(rng, &below));
            let mut lp = restrict(&lam, i, p.dim);
            add_scaled(&mut lp, &grc_element(rng, p), &Scalar::one());
            minus.insert(*h, linalg::sub_vec(&lp, target));
            plus.insert(*h, lp);
            vanishing[*h] = lam;
        }
        let basis = (0..p.dim).map(|k| format!("b{}_{k}", -i.0)).collect();
        levels.push(LevelHomology { level: i, basis, plus, minus });
    }

    let model = AdaptedBasisModel::new(g, cycles, vanishing, levels).expect("generated model is well formed");
    let nrows = rng.gen_range(0..=n.min(6));
    let equations = (0..nrows)
        .map(|_| (0..n).map(|_| if rng.gen_bool(0.35) { random_entry(rng) } else { Scalar::zero() }).collect())
        .collect();
    Some(Fixture { name: None, mu, model, equations, residues: None, sigma: None })
}

/// Random positive weights for every lower level and horizontal edge.
pub fn random_sigma(rng: &mut ChaCha8Rng, model: &AdaptedBasisModel) -> levelwise::monodromy::MonodromyType {
    let g = model.graph();
    let levels = g.lower_levels().map(|l| (l, rng.gen_range(1..=3))).collect();
    let horizontal = (0..g.edges().len()).filter(|&e| g.is_horizontal(e)).map(|e| (e, rng.gen_range(1..=3))).collect();
    levelwise::monodromy::MonodromyType::new(model, levels, horizontal).expect("positive weights")
}

/// Constraint rows on residues: relations among vanishing cycles and the
/// GRC sums, over edges.
pub fn residue_constraints(model: &AdaptedBasisModel) -> Vec<Vector> {
    let g = model.graph();
    let m = g.edges().len();
    let mut rows: Vec<Vector> = model.relation_kernel().basis().to_vec();
    for i in g.lower_levels() {
        for edges in qualifying_components(g, i) {
            let mut v = zero_vector(m);
            for e in edges {
                v[e] = Scalar::one();
            }
            rows.push(v);
        }
    }
    rows
}

/// A random residue vector satisfying every constraint.
pub fn consistent_residues(rng: &mut ChaCha8Rng, model: &AdaptedBasisModel) -> Vector {
    let m = model.graph().edges().len();
    let mut r = zero_vector(m);
    for v in linalg::nullspace(&residue_constraints(model), m) {
        add_scaled(&mut r, &v, &random_entry(rng));
    }
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn residue_map(r: &[Scalar]) -> BTreeMap<usize, Scalar> {
    r.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(e, x)| (e, x.clone())).collect()
}

/// True when every entry is rational.
pub fn all_rational(v: &[Vector]) -> bool {
    v.iter().flatten().all(|x| x.is_rational())
}

/// Multiply a vector by a nonzero rational with a sign.
pub fn rescale(v: &[Scalar], num: i64, den: i64) -> Vector {
    linalg::scale(v, &Scalar::ratio(num, den))
}

pub fn ints(v: &[i64]) -> Vector {
    int_vector(v)
}

pub fn is_positive(x: &BigRational) -> bool {
    x.is_positive()
}
