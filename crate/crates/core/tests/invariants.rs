//! Property tests over random states and parameters.

use proptest::prelude::*;

use cuspkit_core::linalg::{eigenvalues, multiset_distance, Complex};
use cuspkit_core::manifold::{critical_y, find_symmetric_fold};
use cuspkit_core::model::{
    dual_f_jet, dual_g_jet, eval_field, exchange, fd_f_jet, fd_g_jet, PairState, SlowFastModel,
};
use cuspkit_core::models::{Curtu, MorrisLecar};
use cuspkit_core::reduction::{q_surface, reduced_field, reduction_coefficients};
use cuspkit_core::spectra::{full_jacobian_fd, jacobian_blocks};
use cuspkit_core::Tolerances;

fn near_manifold<M: SlowFastModel>(m: &M, xi: f64, xj: f64, dy: f64) -> Option<f64> {
    let y = critical_y(m, xi, xj, &Tolerances::default()).ok()? + dy * m.fd_scale().1;
    let dom = m.domain();
    (dom.check(xi, y).is_ok() && dom.check(xj, y).is_ok()).then_some(y)
}

fn assert_equivariant<M: SlowFastModel>(m: &M, s: PairState) -> Result<(), TestCaseError> {
    let a = eval_field(m, &exchange(s)).unwrap();
    let b = exchange(PairState::from_array(eval_field(m, &s).unwrap())).to_array();
    for i in 0..4 {
        prop_assert!(
            (a[i] - b[i]).abs() <= 1e-12,
            "component {i}: {} vs {}",
            a[i],
            b[i]
        );
    }
    Ok(())
}

fn block_union_distance<M: SlowFastModel>(m: &M, x: f64, y: f64) -> f64 {
    let b = jacobian_blocks(m, x, y).unwrap();
    let mut union: Vec<Complex> = b.eig_s.to_vec();
    union.extend(b.eig_a);
    let full = eigenvalues(&full_jacobian_fd(m, &PairState::symmetric(x, y)).unwrap());
    let scale = union.iter().map(|e| e.abs()).fold(1.0, f64::max);
    multiset_distance(&union, &full) / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn curtu_field_is_exchange_equivariant(
        x1 in 0.01..0.99f64, x2 in 0.01..0.99f64, y1 in -2.0..2.0f64, y2 in -2.0..2.0f64
    ) {
        assert_equivariant(&Curtu::default(), PairState::new(x1, x2, y1, y2))?;
    }

    #[test]
    fn ml_field_is_exchange_equivariant(
        x1 in -84.0..120.0f64, x2 in -84.0..120.0f64, y1 in 0.0..1.0f64, y2 in 0.0..1.0f64
    ) {
        assert_equivariant(&MorrisLecar::default(), PairState::new(x1, x2, y1, y2))?;
    }

    #[test]
    fn curtu_jets_agree_across_methods(xi in 0.02..0.98f64, xj in 0.02..0.98f64, dy in -0.1..0.1f64) {
        let m = Curtu::default();
        let y = near_manifold(&m, xi, xj, dy).unwrap();
        let dual = dual_f_jet(&m, xi, xj, y);
        prop_assert!(dual.discrepancy(&m.analytic_f_jet(xi, xj, y).unwrap()).3 <= 1e-8);
        prop_assert!(dual.discrepancy(&fd_f_jet(&m, xi, xj, y)).3 <= 1e-5);
        let (g, _) = dual_g_jet(&m, xi, y);
        prop_assert!(g.discrepancy(&fd_g_jet(&m, xi, y)).3 <= 1e-5);
    }

    #[test]
    fn ml_jets_agree_across_methods(xi in -80.0..40.0f64, xj in -80.0..40.0f64, dy in -0.1..0.1f64) {
        let m = MorrisLecar::default();
        let y = near_manifold(&m, xi, xj, dy);
        prop_assume!(y.is_some());
        let y = y.unwrap();
        let dual = dual_f_jet(&m, xi, xj, y);
        prop_assert!(dual.discrepancy(&m.analytic_f_jet(xi, xj, y).unwrap()).3 <= 1e-8);
        prop_assert!(dual.discrepancy(&fd_f_jet(&m, xi, xj, y)).3 <= 1e-5);
        let (g, _) = dual_g_jet(&m, xi, y);
        prop_assert!(g.discrepancy(&m.analytic_g_jet(xi, y).unwrap()).3 <= 1e-8);
        prop_assert!(g.discrepancy(&fd_g_jet(&m, xi, y)).3 <= 1e-5);
    }

    #[test]
    fn curtu_block_union_matches_full_spectrum(x in 0.02..0.98f64, y in -1.0..1.0f64) {
        prop_assert!(block_union_distance(&Curtu::default(), x, y) <= 1e-6);
    }

    #[test]
    fn ml_block_union_matches_full_spectrum(x in -80.0..40.0f64, y in 0.0..1.0f64) {
        prop_assert!(block_union_distance(&MorrisLecar::default(), x, y) <= 1e-6);
    }

    #[test]
    fn reduced_fast_component_vanishes_on_q(u in -0.1..0.1f64, w in -0.1..0.1f64) {
        let t = Tolerances::default();
        for (rc, name) in [
            (reduction_coefficients(&Curtu::default(), 0.9332598617, &t).unwrap(), "curtu"),
            (reduction_coefficients(&MorrisLecar::default(), -30.36264, &t).unwrap(), "ml"),
        ] {
            let z = q_surface(&rc, u, w);
            let r = reduced_field(&rc, u, w, z, 0.01)[0];
            prop_assert!(r.abs() < 1e-14, "{name}: residual {r}");
        }
    }

    /// The relation between the fold coefficient and the cusp coefficient holds
    /// for perturbed parameters, not only at the defaults.
    #[test]
    fn omega_d_star_identity_under_perturbation(di in -0.01..0.01f64, db in -0.01..0.01f64) {
        let t = Tolerances::default();
        let c = Curtu::default();
        let c = c.with_param("I", c.p.i + di).unwrap().with_param("b", c.p.b + db).unwrap();
        let x = *find_symmetric_fold(&c, (0.5, 0.99), &t).unwrap().last().unwrap();
        let rc = reduction_coefficients(&c, x, &t).unwrap();
        let lhs = rc.omega + rc.fy / (2.0 * rc.f1) * rc.d_star;
        prop_assert!(lhs.abs() <= 1e-10 * rc.omega.abs());

        let ml = MorrisLecar::default();
        let ml = ml.with_param("g_s", ml.p.g_s * (1.0 + di)).unwrap().with_param("I_app", ml.p.i_app * (1.0 + db)).unwrap();
        let x = find_symmetric_fold(&ml, ml.default_fold_bracket(), &t).unwrap()[0];
        let rc = reduction_coefficients(&ml, x, &t).unwrap();
        let lhs = rc.omega + rc.fy / (2.0 * rc.f1) * rc.d_star;
        prop_assert!(lhs.abs() <= 1e-10 * rc.omega.abs());
    }
}
