mod common;

use levelwise::boundary::{boundary_equations, classify_row, coordfree_boundary, rref, BlockKind, BoundaryError, LogEntry};
use levelwise::fixture::parse_fixture;
use levelwise::graph::{EnhancedLevelGraph, Level};
use levelwise::homology::{AdaptedBasisModel, BasisCycle, CycleKind, LevelHomology};
use levelwise::linalg::{self, int_vector, unit_vector, zero_vector, Subspace, Vector};
use levelwise::scalar::Scalar;
use levelwise::validation::Rule;
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vector> {
    // A product of random factors, so rank deficiency is common.
    let inner = rng.gen_range(1..=rows);
    let left: Vec<Vector> = (0..rows).map(|_| (0..inner).map(|_| Scalar::from_int(rng.gen_range(-2..=2))).collect()).collect();
    let right: Vec<Vector> = (0..inner)
        .map(|_| (0..cols).map(|_| Scalar::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3))).collect())
        .collect();
    left.iter()
        .map(|l| {
            let mut row = zero_vector(cols);
            for (c, r) in l.iter().zip(&right) {
                linalg::add_scaled(&mut row, r, c);
            }
            row
        })
        .collect()
}

#[test]
fn rref_of_identity_is_identity() {
    let id: Vec<Vector> = (0..4).map(|k| unit_vector(4, k)).collect();
    assert_eq!(rref(&id, 4).rows, id);
}

#[test]
fn rref_rank_matches_fraction_free_elimination() {
    let mut rng = common::rng(7);
    for _ in 0..100 {
        let a = random_matrix(&mut rng, 6, 9);
        let r = rref(&a, 9);
        assert_eq!(r.rank(), common::bareiss_rank(&a, 9));
        assert_eq!(rref(&r.rows, 9), r);
        for (k, &p) in r.pivots.iter().enumerate() {
            assert_eq!(r.rows[k][p], Scalar::from_int(1));
            assert!(r.rows.iter().enumerate().all(|(j, row)| j == k || row[p] == Scalar::from_int(0)));
        }
        assert!(r.pivots.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn g7_row_classification() {
    let f = common::load("g7.json");
    let m = &f.model;
    let c = classify_row(m, &common::ambient(m, &[("delta1", 3), ("delta2", -5)])).unwrap();
    assert_eq!(c.top_level, Some(Level(0)));
    assert_eq!(c.crossed, vec![common::edge(m, "e1"), common::edge(m, "e2")]);
    let c = classify_row(m, &common::ambient(m, &[("lambda1", 3), ("lambda2", -10)])).unwrap();
    assert_eq!((c.top_level, c.horizontal_crossing()), (Some(Level(0)), false));
    let c = classify_row(m, &common::ambient(m, &[("gamma3", 1), ("gamma4", -1)])).unwrap();
    assert_eq!((c.top_level, c.horizontal_crossing()), (Some(Level(-1)), false));
    assert!(matches!(classify_row(m, &int_vector(&[1])), Err(BoundaryError::DimensionMismatch { .. })));
}

#[test]
fn g7_boundary_blocks() {
    let f = common::load("g7.json");
    let m = &f.model;
    let out = boundary_equations(m, &f.equations).unwrap();
    let top = out.block(Level(0)).unwrap();
    assert_eq!(top.kind, BlockKind::Linear);
    let expected_top = Subspace::span(
        vec![
            common::level_vector(m, 0, &[("alpha", 1), ("gamma2", 1)]),
            common::level_vector(m, 0, &[("gamma1_top", 1), ("gamma5_top", -1)]),
            common::level_vector(m, 0, &[("lambda1", 3), ("lambda2", -10)]),
        ],
        12,
    );
    assert_eq!(top.span, expected_top);
    let low = out.block(Level(-1)).unwrap();
    assert_eq!(low.kind, BlockKind::Projective);
    assert_eq!(low.span, Subspace::span(vec![common::level_vector(m, -1, &[("gamma3", 1), ("gamma4", -1)])], 8));
    assert_eq!(out.log.len(), 1);
    let LogEntry::HorizontalCrossing { row, level, edges } = &out.log[0] else { panic!("{:?}", out.log) };
    assert_eq!(*level, Level(0));
    assert_eq!(edges, &vec![common::edge(m, "e1"), common::edge(m, "e2")]);
    let delta_row = common::ambient(m, &[("delta1", 3), ("delta2", -5)]);
    assert_eq!(*row, linalg::scale(&delta_row, &Scalar::ratio(1, 3)));
    assert_eq!(coordfree_boundary(m, &f.equations).unwrap(), out.spans());
}

#[test]
fn empty_equations_give_empty_blocks() {
    let f = common::load("g7.json");
    for (_, span) in coordfree_boundary(&f.model, &[]).unwrap() {
        assert_eq!(span.dim(), 0);
    }
    let out = boundary_equations(&f.model, &[]).unwrap();
    assert_eq!(out.blocks.len(), 2);
    assert!(out.log.is_empty());
}

/// One vertex, no edges, restrictions equal to the identity.
fn single_level_model(n: usize) -> AdaptedBasisModel {
    let g = EnhancedLevelGraph::builder().vertex("v", 2, 0).leg("z", "v", 2).build().unwrap();
    let cycles = (0..n)
        .map(|k| BasisCycle {
            id: format!("c{k}"),
            level: Level(0),
            kind: CycleKind::Alpha,
            edge: None,
            intersections: Vec::new(),
            restriction: Some(unit_vector(n, k)),
        })
        .collect();
    let level = LevelHomology {
        level: Level(0),
        basis: (0..n).map(|k| format!("b{k}")).collect(),
        plus: Default::default(),
        minus: Default::default(),
    };
    AdaptedBasisModel::new(g, cycles, Vec::new(), vec![level]).unwrap()
}

#[test]
fn single_level_is_identity_up_to_rref() {
    let m = single_level_model(4);
    assert!(m.validate().is_ok());
    let mut rng = common::rng(3);
    for _ in 0..20 {
        let a = random_matrix(&mut rng, 3, 4);
        let out = boundary_equations(&m, &a).unwrap();
        assert_eq!(out.blocks.len(), 1);
        assert_eq!(out.blocks[0].span.basis(), rref(&a, 4).rows.as_slice());
        assert!(out.log.is_empty());
    }
}

#[test]
fn row_restricting_into_grc_is_logged() {
    // beta0 is made to restrict onto the matching-residue generator of e1,
    // which a valid adapted basis never does.
    let text = std::fs::read_to_string(common::fixture_path("g7.json")).unwrap();
    let broken = text.replacen(r#""restriction": {"beta0": 1}"#, r#""restriction": {"lambda1": 1, "lambda1_minus": 1}"#, 1);
    assert_ne!(text, broken);
    let f = parse_fixture(broken.as_bytes()).unwrap();
    let m = &f.model;
    assert!(m.validate().has(Rule::LevelSpanning));
    let row = common::ambient(m, &[("beta0", 2)]);
    let out = boundary_equations(m, std::slice::from_ref(&row)).unwrap();
    assert_eq!(out.log, vec![LogEntry::ReducedToZero { row: linalg::scale(&row, &Scalar::ratio(1, 2)), level: Level(0) }]);
    assert!(out.blocks.iter().all(|b| b.span.dim() == 0));
}

fn crossing_free(m: &AdaptedBasisModel, a: &[Vector]) -> Vec<Vector> {
    rref(a, m.dim())
        .rows
        .into_iter()
        .filter(|r| !classify_row(m, r).unwrap().horizontal_crossing())
        .collect()
}

#[test]
fn g7_deleting_crossing_rows_keeps_coordfree_output() {
    let f = common::load("g7.json");
    let kept = crossing_free(&f.model, &f.equations);
    assert_eq!(kept.len(), 4);
    assert_eq!(coordfree_boundary(&f.model, &kept).unwrap(), coordfree_boundary(&f.model, &f.equations).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pipeline_matches_coordinate_free_spans(seed in any::<u64>()) {
        let f = common::random_fixture(seed);
        let out = boundary_equations(&f.model, &f.equations).unwrap();
        prop_assert_eq!(out.spans(), coordfree_boundary(&f.model, &f.equations).unwrap());
        prop_assert!(out.blocks.iter().all(|b| b.span.basis().iter().all(|v| !linalg::is_zero_vector(v))));
    }

    #[test]
    fn crossing_rows_do_not_matter(seed in any::<u64>()) {
        let f = common::random_fixture(seed);
        let kept = crossing_free(&f.model, &f.equations);
        prop_assert_eq!(coordfree_boundary(&f.model, &kept).unwrap(), coordfree_boundary(&f.model, &f.equations).unwrap());
    }

    #[test]
    fn row_scaling_is_invisible(seed in any::<u64>()) {
        let f = common::random_fixture(seed);
        let mut rng = common::rng(seed);
        let scaled: Vec<Vector> = f
            .equations
            .iter()
            .map(|r| {
                let c = Scalar::new(
                    num_rational::BigRational::new(rng.gen_range(1..=5).into(), rng.gen_range(1..=4).into()),
                    num_rational::BigRational::from_integer(rng.gen_range(-2..=2).into()),
                );
                linalg::scale(r, &c)
            })
            .collect();
        prop_assert_eq!(boundary_equations(&f.model, &scaled).unwrap(), boundary_equations(&f.model, &f.equations).unwrap());
    }

    #[test]
    fn rational_inputs_stay_rational(seed in any::<u64>()) {
        let f = common::random_fixture(seed);
        prop_assume!(common::all_rational(&f.equations));
        let out = boundary_equations(&f.model, &f.equations).unwrap();
        for b in &out.blocks {
            prop_assert!(common::all_rational(b.span.basis()));
        }
    }

    #[test]
    fn component_lifts_leave_no_equation_at_their_level(seed in any::<u64>()) {
        let f = common::random_fixture(seed);
        let m = &f.model;
        for i in m.graph().lower_levels() {
            for (_, edges) in m.grc_components(i).unwrap() {
                let mut lift = zero_vector(m.dim());
                for e in edges {
                    linalg::add_scaled(&mut lift, &m.lambda(e), &Scalar::from_int(1));
                }
                prop_assert!(linalg::is_zero_vector(&m.specialize(&lift, i).unwrap()));
                let out = boundary_equations(m, &[lift]).unwrap();
                prop_assert_eq!(out.block(i).unwrap().span.dim(), 0);
            }
        }
    }
}
