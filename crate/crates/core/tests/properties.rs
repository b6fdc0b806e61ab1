//! Property tests over randomized states and elements: the modular group
//! law, cone-projection geometry and wire-format round trips.

use proptest::prelude::*;

use qmarkov::cone::{cone_project, positive_part, ConeProjectionConfig};
use qmarkov::matrix::{ComplexMatrix, C64};
use qmarkov::state::{QuantumState, StandardForm, StdVector};

fn state_strategy(dim: usize) -> impl Strategy<Value = QuantumState> {
    proptest::collection::vec(0.1f64..1.0, dim).prop_map(move |weights| {
        let total: f64 = weights.iter().sum();
        let normalized: Vec<f64> = weights.iter().map(|w| w / total).collect();
        QuantumState::diagonal(&normalized).expect("strictly positive weights")
    })
}

fn element_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |entries| {
        ComplexMatrix::new(
            dim,
            dim,
            entries.iter().map(|&(re, im)| C64::new(re, im)).collect(),
        )
        .expect("shape fixed")
    })
}

fn hermitian_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    element_strategy(dim).prop_map(|m| m.hermitian_part())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modular_group_law(
        state in state_strategy(3),
        x in element_strategy(3),
        t in -2.0f64..2.0,
        s in -2.0f64..2.0,
    ) {
        let sf = StandardForm::new(state);
        let step = sf.modular_flow(s, &sf.modular_flow(t, &x).unwrap()).unwrap();
        let direct = sf.modular_flow(s + t, &x).unwrap();
        prop_assert!((&step - &direct).fro_norm() <= 1e-10 * (1.0 + x.fro_norm()));
    }

    #[test]
    fn flow_preserves_the_state(
        state in state_strategy(3),
        x in element_strategy(3),
        t in -2.0f64..2.0,
    ) {
        let sf = StandardForm::new(state);
        let fx = sf.modular_flow(t, &x).unwrap();
        let drift = (sf.state().expect(&fx) - sf.state().expect(&x)).norm();
        prop_assert!(drift <= 1e-10 * (1.0 + x.fro_norm()));
    }

    #[test]
    fn cone_projection_is_nonexpansive(
        state in state_strategy(2),
        a in hermitian_strategy(2),
        b in hermitian_strategy(2),
    ) {
        let sf = StandardForm::new(state);
        let cfg = ConeProjectionConfig::default();
        let pa = cone_project(&sf, &StdVector::new(a.clone()), &cfg).unwrap();
        let pb = cone_project(&sf, &StdVector::new(b.clone()), &cfg).unwrap();
        prop_assert!(
            (&pa.mat - &pb.mat).fro_norm() <= (&a - &b).fro_norm() + 1e-8
        );
    }

    #[test]
    fn positive_parts_decompose_orthogonally(
        state in state_strategy(2),
        h in hermitian_strategy(2),
    ) {
        let sf = StandardForm::new(state);
        let cfg = ConeProjectionConfig::default();
        let xi = StdVector::new(h.clone());
        let plus = positive_part(&sf, &xi, &cfg).unwrap();
        let minus = positive_part(&sf, &StdVector::new(h.scale_re(-1.0)), &cfg).unwrap();
        prop_assert!((&(&plus.mat - &minus.mat) - &h).fro_norm() <= 1e-7 * (1.0 + h.fro_norm()));
        prop_assert!(plus.inner(&minus).norm() <= 1e-7 * (1.0 + h.fro_norm().powi(2)));
    }

    #[test]
    fn matrix_wire_round_trip(m in element_strategy(3)) {
        let json = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(m, back);
    }
}
