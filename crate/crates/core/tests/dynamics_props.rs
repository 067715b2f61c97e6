mod common;

use common::positive_measure;
use gwass::dynamics::{
    continuous_dependence_check, reference_problem, sample_and_hold, Modulation, SchemeConfig, SourceModel,
};
use gwass::flows::{BaseField, Kernel, VectorFieldModel};
use gwass::gw::{gw_value, GwParams};
use gwass::measures::{approx_eq, DiscreteMeasure};
use proptest::prelude::*;

fn problem() -> impl Strategy<Value = (DiscreteMeasure, VectorFieldModel, SourceModel)> {
    let field = (-1.0..1.0f64, 0.2..1.0f64, -0.5..0.5f64).prop_map(|(c, radius, height)| {
        VectorFieldModel::new(
            1,
            BaseField::Constant { c: vec![c] },
            Kernel::Bump { radius, height, direction: None },
            1.0,
        )
        .unwrap()
    });
    let modulation =
        prop_oneof![Just(Modulation::Constant), (0.5..5.0f64).prop_map(|max_mass| Modulation::Saturating { max_mass })];
    let source = (positive_measure(1, 5), 0.0..0.5f64, modulation).prop_map(|(cloud, mass, modulation)| {
        let cloud = cloud.scale(mass / cloud.total_mass()).unwrap();
        SourceModel::new(cloud, modulation).unwrap()
    });
    (positive_measure(1, 10), field, source)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scheme_invariants((mu0, field, source) in problem(), k in 0u32..=5) {
        let params = GwParams::default();
        let traj = sample_and_hold(&mu0, &field, &source, 1.0, k, &params, &SchemeConfig::default()).unwrap();
        let c = traj.constants;
        prop_assert_eq!(traj.snapshots.len(), (1usize << k) + 1);
        prop_assert_eq!(&traj.snapshots[0].1, &mu0);
        for (t, m) in &traj.snapshots {
            prop_assert!(m.total_mass() <= mu0.total_mass() + t * c.p_mass + 1e-12);
            prop_assert!(m.total_mass() <= c.m + 1e-12);
            prop_assert!(source.evaluate(m).support_radius() <= c.r);
        }
        for i in 0..traj.snapshots.len() {
            for j in i + 1..traj.snapshots.len() {
                let ((t, a), (s, b)) = (&traj.snapshots[i], &traj.snapshots[j]);
                let g = gw_value(a, b, &params).unwrap();
                prop_assert!(g <= (s - t) * (c.m_sup * c.m + c.p_mass) + 1e-9);
            }
        }
    }

    #[test]
    fn identical_initial_data_stay_together((mu0, field, source) in problem()) {
        let t = continuous_dependence_check(&mu0, &mu0, &field, &source, 1.0, 3, &GwParams::default(), &SchemeConfig::default()).unwrap();
        let worst = t.rows.iter().map(|r| r.gw).fold(0.0, f64::max);
        prop_assert!(worst == 0.0, "{worst:e}");
    }

    #[test]
    fn rigid_translation_preserves_distance(mu0 in positive_measure(1, 8), c in -1.0..1.0f64, s in -0.5..0.5f64) {
        let field = VectorFieldModel::constant(vec![c]).unwrap();
        let nu0 = mu0.translate(&[s]).unwrap();
        let params = GwParams::default();
        let t = continuous_dependence_check(&mu0, &nu0, &field, &SourceModel::zero(1), 1.0, 3, &params, &SchemeConfig::default()).unwrap();
        let g0 = gw_value(&mu0, &nu0, &params).unwrap();
        for r in &t.rows {
            prop_assert!((r.gw - g0).abs() <= 1e-9);
            prop_assert!(r.gw <= r.bound + 1e-12);
        }
    }

    #[test]
    fn static_field_adds_the_source(mu0 in positive_measure(1, 6), cloud in positive_measure(1, 4), k in 0u32..=4) {
        let field = VectorFieldModel::constant(vec![0.0]).unwrap();
        let source = SourceModel::new(cloud.clone(), Modulation::Constant).unwrap();
        let traj = sample_and_hold(&mu0, &field, &source, 1.0, k, &GwParams::default(), &SchemeConfig::default()).unwrap();
        for (t, m) in &traj.snapshots {
            let expected = mu0.add(&cloud.scale(*t).unwrap()).unwrap();
            prop_assert!(approx_eq(m, &expected, 1e-9, 1e-12 * (1.0 + expected.total_mass())).unwrap());
        }
    }
}

#[test]
fn reference_levels_agree_at_time_zero() {
    let r = reference_problem();
    let cfg = SchemeConfig::default();
    let a = sample_and_hold(&r.initial, &r.field, &r.source, 1.0, 3, &r.params, &cfg).unwrap();
    let b = sample_and_hold(&r.initial, &r.field, &r.source, 1.0, 4, &r.params, &cfg).unwrap();
    assert_eq!(a.snapshots[0].1, b.snapshots[0].1);
    // the shared grid times stay close
    for n in 0..a.snapshots.len() {
        assert!(gw_value(&a.snapshots[n].1, &b.snapshots[2 * n].1, &r.params).unwrap() < 0.01);
    }
}
