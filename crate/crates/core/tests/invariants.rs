use proptest::prelude::*;

use oavi::evaluation::regularized_mse;
use oavi::harness::SerializedModel;
use oavi::pipeline::{train_classifier, ClassTransformer, ClassifierConfig, LabeledDataset, SparsityStats};
use oavi::solvers::{fw_solve, pfw_solve, PairwiseFrankWolfe};
use oavi::{fit, OaviConfig, OracleKind, OracleProblem, PointSet, Region};

fn matrix(max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| proptest::collection::vec(proptest::collection::vec(0.0..1.0, n), m))
}

fn problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, f64)> {
    (1usize..=30, 1usize..=8).prop_flat_map(|(m, k)| {
        (
            proptest::collection::vec(proptest::collection::vec(-1.0..1.0, m), k),
            proptest::collection::vec(-1.0..1.0, m),
            prop_oneof![Just(0.0), Just(0.5)],
        )
    })
}

fn oracle() -> impl Strategy<Value = OracleKind> {
    prop_oneof![Just(OracleKind::Pfw), Just(OracleKind::Cg), Just(OracleKind::Agd)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ball_solutions_stay_feasible((cols, b, lambda) in problem(), tau in 2.0f64..6.0) {
        let base = OracleProblem::new(cols, b).unwrap().lambda(lambda).epsilon(1e-6);
        let r = tau - 1.0;
        let l1 = pfw_solve(&base.clone().region(Region::l1_for_tau(tau).unwrap()), 0).unwrap();
        prop_assert!(l1.coefficients.iter().map(|c| c.abs()).sum::<f64>() <= r * (1.0 + 1e-12));
        let l2 = fw_solve(&base.region(Region::l2_for_tau(tau).unwrap())).unwrap();
        prop_assert!(l2.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt() <= r * (1.0 + 1e-12));
    }

    #[test]
    fn active_set_stays_consistent((cols, b, lambda) in problem(), start in 0usize..2) {
        let p = OracleProblem::new(cols, b)
            .unwrap()
            .lambda(lambda)
            .region(Region::L1Ball { radius: 3.0 })
            .epsilon(1e-9);
        let mut state = PairwiseFrankWolfe::new(&p, start).unwrap();
        for _ in 0..200 {
            let stop = state.step();
            let active = state.active_set();
            prop_assert!(active.entries().iter().all(|&(_, w)| w > 0.0));
            prop_assert!((active.weight_sum() - 1.0).abs() <= 1e-10);
            let rebuilt = active.reconstruct(p.dim(), 3.0);
            for (a, b) in rebuilt.iter().zip(state.iterate()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            if stop.is_some() {
                break;
            }
        }
    }

    #[test]
    fn generator_set_invariants(
        rows in matrix(25, 3),
        psi in prop_oneof![Just(0.05), Just(0.01), Just(0.005)],
        lambda in prop_oneof![Just(0.0), Just(0.1)],
        oracle in oracle(),
    ) {
        let points = PointSet::from_rows(&rows).unwrap();
        let cfg = OaviConfig::new(psi).lambda(lambda).oracle(oracle).max_degree(6);
        let result = fit(&points, &cfg).unwrap();
        let o = result.order_ideal();
        prop_assert!(o[0].is_one());
        prop_assert!(o.windows(2).all(|w| w[0] < w[1]));
        let mut leading: Vec<_> = result.leading_terms().cloned().collect();
        prop_assert!(leading.iter().all(|t| !o.contains(t)));
        leading.sort();
        leading.dedup();
        prop_assert_eq!(leading.len(), result.generators().len());
        for g in result.generators() {
            prop_assert_eq!(g.leading_coefficient(), 1.0);
            prop_assert!(g.terms().windows(2).all(|w| w[0] < w[1]));
            let value = regularized_mse(g, &points, lambda).unwrap();
            prop_assert!(value <= psi * (1.0 + 1e-9) + 1e-15, "regularized mse {} > psi {}", value, psi);
        }
        if lambda == 0.0 && !result.stats.degree_cap_hit {
            prop_assert!(o.len() <= points.len());
            prop_assert!(result.generators().len() <= o.len() * points.dim());
        }
    }

    #[test]
    fn pipeline_invariants(
        rows in matrix(30, 3),
        labels in proptest::collection::vec(0usize..3, 30),
        scale in 0.5f64..20.0,
    ) {
        let labels: Vec<usize> = labels[..rows.len()].to_vec();
        let mut classes: Vec<usize> = labels.clone();
        classes.sort();
        classes.dedup();
        prop_assume!(classes.len() >= 2);
        // relabel to contiguous classes
        let labels: Vec<usize> = labels.iter().map(|l| classes.iter().position(|c| c == l).unwrap()).collect();
        let names = (0..classes.len()).map(|c| format!("c{c}")).collect();
        let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * scale - 3.0).collect()).collect();
        let data = LabeledDataset::new(PointSet::from_rows(&raw).unwrap(), labels.clone(), names).unwrap();
        let cfg = OaviConfig::new(0.01).max_degree(4);
        let transformer = ClassTransformer::fit(&data, &cfg, true).unwrap();

        let scaled = transformer.scaler().transform(data.points()).unwrap();
        for j in 0..scaled.dim() {
            prop_assert!(scaled.column(j).iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let features = transformer.transform(data.points()).unwrap();
        let total: usize = transformer.blocks().iter().map(|b| b.generators().len()).sum();
        prop_assert_eq!(features.dim(), total);
        prop_assert!(features.columns().iter().flatten().all(|v| *v >= 0.0 && v.is_finite()));

        let stats = SparsityStats::over(transformer.generators());
        prop_assert_eq!(stats.nonzeros + stats.zeros, stats.entries);
        prop_assert!((0.0..=1.0).contains(&stats.sparsity));

        let classifier = train_classifier(&features, &labels, classes.len(), &ClassifierConfig::new(1.0)).unwrap();
        prop_assert!(classifier.models().iter().all(|m| m.bias.is_finite() && m.weights.iter().all(|w| w.is_finite())));
        let scores = classifier.decision_function(&features).unwrap();
        let predicted = classifier.predict(&features).unwrap();
        for (row, &p) in scores.iter().zip(&predicted) {
            let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(row.iter().position(|&s| s == best).unwrap(), p);
        }

        let model = SerializedModel::new(
            (0..data.dim()).map(|i| format!("x{i}")).collect(),
            data.class_names().to_vec(),
            cfg,
            &transformer,
            classifier,
        )
        .unwrap();
        let loaded = SerializedModel::from_json(&model.to_json().unwrap()).unwrap();
        let again = loaded.transform(data.points()).unwrap();
        for (a, b) in features.columns().iter().zip(again.columns()) {
            prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
