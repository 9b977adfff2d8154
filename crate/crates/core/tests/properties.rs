//! Invariants over randomly generated diagonal weighted potentials
//! `Σ a_j |z_j|^{2 m_j}`, whose weights are `c_j = 1/m_j` and whose gradient is
//! `Z = (z_j / m_j)`.

use mafol_core::gradient::GradientField;
use mafol_core::homogeneity::{find_weights, linear_field_agreement, verify_weights, WeightOutcome};
use mafol_core::levi::LeviJet;
use mafol_core::sampling::default_lambdas;
use mafol_core::{CPoint, MultiExponent, PolyPotential, C64};
use proptest::prelude::*;

fn diagonal(coeffs: &[f64], powers: &[u32]) -> PolyPotential {
    let n = coeffs.len();
    PolyPotential::from_terms(
        n,
        coeffs.iter().zip(powers).enumerate().map(|(j, (&a, &m))| {
            let mut e = vec![0; n];
            e[j] = m;
            (MultiExponent::new(e.clone()), MultiExponent::new(e), C64::new(a, 0.0))
        }),
    )
    .unwrap()
}

fn point() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.2f64..1.0, -1.0f64..1.0), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_potentials_are_weighted_and_ma(
        spec in prop::collection::vec((0.5f64..2.0, 1u32..=3), 2..=3),
        parts in point(),
    ) {
        let coeffs: Vec<f64> = spec.iter().map(|s| s.0).collect();
        let powers: Vec<u32> = spec.iter().map(|s| s.1).collect();
        let p = diagonal(&coeffs, &powers);
        let mut parts = parts;
        parts.resize(p.dim(), (0.6, 0.3));
        let z = CPoint::from_parts(&parts);

        let WeightOutcome::Found { weights, unique, .. } = find_weights(&p) else {
            panic!("weights must exist");
        };
        prop_assert!(unique);
        for (c, m) in weights.entries().iter().zip(&powers) {
            prop_assert!((c - 1.0 / *m as f64).abs() < 1e-12);
        }
        let z_vec = [z.clone()];
        prop_assert!(verify_weights(&p, &weights, &z_vec, &default_lambdas()).unwrap() < 1e-9);
        let field = GradientField::extended(&p);
        prop_assert!(linear_field_agreement(&field, &weights, &z_vec).unwrap() < 1e-8);
        let ma = LeviJet::new(&p).ma(&z).unwrap();
        prop_assert!(ma.scaled < 1e-9, "scaled {}", ma.scaled);
        prop_assert!(field.sample(&z).unwrap().euler_residual < 1e-9 * p.evaluate(&z).unwrap().max(1.0));
    }

    #[test]
    fn hermitian_symmetry_is_preserved_by_parsing(
        c in (-2.0f64..2.0, -2.0f64..2.0),
        a in prop::collection::vec(0u32..3, 2),
        b in prop::collection::vec(0u32..3, 2),
    ) {
        let text = format!(
            "n = 2\na=[{},{}] b=[{},{}] c={}{:+}i\na=[{},{}] b=[{},{}] c={}{:+}i\n",
            a[0], a[1], b[0], b[1], c.0, c.1, b[0], b[1], a[0], a[1], c.0, -c.1
        );
        let p: PolyPotential = text.parse().unwrap();
        let (v, defect) = p.evaluate_with_defect(&CPoint::from_parts(&[(0.3, -0.7), (1.1, 0.4)])).unwrap();
        prop_assert!(v.is_finite());
        prop_assert!(defect < 1e-14);
        let round: PolyPotential = p.to_file_string().parse().unwrap();
        prop_assert_eq!(round, p);
    }
}
