mod oracles;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toposz::field::{generate_gaussian_mixture, synthetic_field, Dims, GaussianComponent, ScalarField};
use toposz::topology::{build_contour_tree, NodeKind};
use toposz::validate::{detect_false_cases, FalseCaseKind};

use oracles::local_extrema;

fn bump(center: [f64; 2], amplitude: f64) -> GaussianComponent {
    GaussianComponent {
        center: center.to_vec(),
        amplitude,
        spread: 2.5,
    }
}

#[test]
fn flattened_peak_is_one_false_negative() {
    let d = Dims::new(&[16, 16]).unwrap();
    let f = generate_gaussian_mixture(d, &[bump([4.0, 4.0], 1.0), bump([11.0, 10.0], 0.7)]);
    let eps = 0.05;
    let t = build_contour_tree(&f).simplify(eps);
    let low_peak = t
        .branch_decomposition()
        .into_iter()
        .find(|b| !b.is_root && b.extremum_kind == NodeKind::Maximum)
        .unwrap();
    let saddle = f.value(low_peak.saddle);

    // everything connected to the peak above the saddle drops just below it
    let mut values = f.values().to_vec();
    let mut stack = vec![low_peak.extremum];
    let mut seen = vec![false; f.len()];
    seen[low_peak.extremum] = true;
    while let Some(v) = stack.pop() {
        values[v] = saddle - 1e-3;
        for u in d.simplicial_neighbors(v) {
            if !seen[u] && f.value(u) > saddle {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    let g = ScalarField::new(d, values).unwrap();
    let report = detect_false_cases(&t, &build_contour_tree(&g).simplify(eps)).unwrap();
    let missing: Vec<_> = report.cases.iter().filter(|c| c.kind == FalseCaseKind::FalseNegative).collect();
    assert_eq!(missing.len(), 1, "{}", report.to_text());
    assert_eq!(missing[0].extremum, low_peak.extremum);

    // the brute-force scan agrees: the peak is gone and no other maximum of
    // the simplified tree moved
    let before: BTreeSet<_> = local_extrema(&f).into_iter().collect();
    let after: BTreeSet<_> = local_extrema(&g).into_iter().collect();
    let tree_maxima: Vec<_> = t.nodes().iter().filter(|n| n.kind == NodeKind::Maximum).map(|n| n.vertex).collect();
    let lost: Vec<_> = tree_maxima
        .iter()
        .filter(|&&v| before.contains(&(v, NodeKind::Maximum)) && !after.contains(&(v, NodeKind::Maximum)))
        .collect();
    assert_eq!(lost, vec![&low_peak.extremum]);
}

fn perturbed(seed: u64, amount: f64) -> (ScalarField, ScalarField) {
    let d = Dims::new(&[12, 12]).unwrap();
    let f = synthetic_field(d, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 77);
    let g = ScalarField::new(d, f.values().iter().map(|x| x + rng.gen_range(-amount..amount)).collect()).unwrap();
    (f, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reports_are_mirror_images(seed in 0u64..1000, amount in 0.0f64..0.1, eps in 0.0f64..0.1) {
        let (f, g) = perturbed(seed, amount);
        let (a, b) = (build_contour_tree(&f).simplify(eps), build_contour_tree(&g).simplify(eps));
        let (fp, fn_, ft) = detect_false_cases(&a, &b).unwrap().counts();
        prop_assert_eq!(detect_false_cases(&b, &a).unwrap().counts(), (fn_, fp, ft));
    }

    #[test]
    fn empty_report_means_same_extrema(seed in 0u64..1000, amount in 0.0f64..0.05, eps in 0.0f64..0.1) {
        let (f, g) = perturbed(seed, amount);
        let (a, b) = (build_contour_tree(&f).simplify(eps), build_contour_tree(&g).simplify(eps));
        let extrema = |t: &toposz::ContourTree| -> BTreeSet<_> {
            t.nodes().iter().filter(|n| n.kind != NodeKind::Saddle).map(|n| (n.vertex, n.kind)).collect()
        };
        if detect_false_cases(&a, &b).unwrap().is_empty() {
            prop_assert_eq!(extrema(&a), extrema(&b));
        }
    }

    #[test]
    fn cases_point_into_their_trees(seed in 0u64..1000, amount in 0.0f64..0.1, eps in 0.0f64..0.1) {
        let (f, g) = perturbed(seed, amount);
        let (a, b) = (build_contour_tree(&f).simplify(eps), build_contour_tree(&g).simplify(eps));
        for c in detect_false_cases(&a, &b).unwrap().cases {
            let home = if c.kind == FalseCaseKind::FalsePositive { &b } else { &a };
            prop_assert!(home.is_critical(c.saddle));
            prop_assert!(home.is_critical(c.extremum));
            // the branch pre-image lies between its saddle and extremum values
            let values = home.values();
            let (lo, hi) = if values[c.saddle] < values[c.extremum] {
                (values[c.saddle], values[c.extremum])
            } else {
                (values[c.extremum], values[c.saddle])
            };
            prop_assert!(c.region.contains(&c.extremum));
            for &v in &c.region {
                prop_assert!(lo <= values[v] && values[v] <= hi);
            }
        }
    }
}
