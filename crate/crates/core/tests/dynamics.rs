//! Integration, reduced-system shadowing and signature properties.

use cuspkit_core::manifold::{critical_y, find_symmetric_fold, from_adapted, to_adapted};
use cuspkit_core::model::{exchange, PairState, SlowFastModel};
use cuspkit_core::models::{Curtu, MorrisLecar};
use cuspkit_core::ode::{
    default_initial_state, integrate, integrate_reduced, IntegratorOptions, Trajectory,
    TRANSIENT_FRACTION,
};
use cuspkit_core::reduction::{q_surface, reduction_coefficients};
use cuspkit_core::signature::{
    classify_mmo, signature, swings, EventKind, Observable, DEFAULT_SAO_THRESHOLD,
};
use cuspkit_core::spectra::locate_singular_hopf;
use cuspkit_core::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn curtu_run(t_end: f64) -> Trajectory {
    let m = Curtu::default();
    let s0 = default_initial_state(&m, &tol()).unwrap();
    integrate(&m, s0, (0.0, t_end), &IntegratorOptions::default()).unwrap()
}

#[test]
fn integration_is_bit_deterministic() {
    let a = curtu_run(200.0);
    let b = curtu_run(200.0);
    assert_eq!(a.t, b.t);
    assert_eq!(a.states, b.states);
}

#[test]
fn hopf_location_is_bit_deterministic() {
    let m = Curtu::default();
    let a = locate_singular_hopf(&m, "b", (0.55, 0.66), &tol()).unwrap();
    let b = locate_singular_hopf(&m, "b", (0.55, 0.66), &tol()).unwrap();
    assert_eq!(a.mu_h.to_bits(), b.mu_h.to_bits());
}

#[test]
fn hopf_frequency_and_empty_bracket() {
    let m = Curtu::default();
    let h = locate_singular_hopf(&m, "b", (0.55, 0.66), &tol()).unwrap();
    assert!(h.trace_a.abs() < 1e-10 && h.det_a > 0.0);
    assert!((h.omega_h / h.predicted_omega - 1.0).abs() < 0.15);
    assert!(matches!(
        locate_singular_hopf(&m, "b", (0.62, 0.66), &tol()),
        Err(cuspkit_core::Error::NotFound(_))
    ));
}

#[test]
fn symmetric_subspace_is_invariant() {
    for (m, s) in [
        (
            cuspkit_core::BuiltinModel::Curtu(Curtu::default()),
            PairState::symmetric(0.8, 0.5),
        ),
        (
            cuspkit_core::BuiltinModel::MorrisLecar(MorrisLecar::default()),
            PairState::symmetric(-40.0, 0.2),
        ),
    ] {
        let tr = integrate(&m, s, (0.0, 500.0), &IntegratorOptions::default()).unwrap();
        for k in 0..tr.len() {
            let p = tr.pair(k);
            assert!(
                (p.x1 - p.x2).abs() + (p.y1 - p.y2).abs() < 1e-8,
                "{}",
                m.name()
            );
        }
    }
}

#[test]
fn flow_commutes_with_exchange() {
    let m = Curtu::default();
    let opts = IntegratorOptions::default();
    let s0 = PairState::new(0.9, 0.3, 0.52, 0.47);
    let a = integrate(&m, s0, (0.0, 300.0), &opts).unwrap();
    let b = integrate(&m, exchange(s0), (0.0, 300.0), &opts).unwrap();
    for k in 0..a.len() {
        let sa = exchange(a.pair(k)).to_array();
        let sb = b.interpolate(a.t[k]);
        for i in 0..4 {
            assert!((sa[i] - sb[i]).abs() <= 10.0 * (opts.atol + opts.rtol * sa[i].abs()));
        }
    }
}

#[test]
fn global_error_scales_with_tolerance() {
    let m = Curtu::default();
    let s0 = PairState::new(0.9, 0.3, 0.52, 0.47);
    let span = (0.0, 50.0);
    let run = |rtol: f64| {
        let opts = IntegratorOptions {
            rtol,
            atol: rtol * 1e-2,
            ..Default::default()
        };
        integrate(&m, s0, span, &opts)
            .unwrap()
            .states
            .last()
            .copied()
            .unwrap()
    };
    let reference = run(1e-12);
    let err = |s: [f64; 4]| {
        (0..4)
            .map(|i| (s[i] - reference[i]).abs())
            .fold(0.0, f64::max)
    };
    let coarse = err(run(1e-6));
    let fine = err(run(1e-6 / 32.0));
    let ratio = coarse / fine;
    assert!(
        ratio > 16.0 && ratio < 64.0,
        "error ratio {ratio} ({coarse:.2e} / {fine:.2e})"
    );
}

#[test]
fn reduced_system_shadows_full_system_near_the_cusp() {
    let m = Curtu::default();
    let x_star = *find_symmetric_fold(&m, (0.5, 0.99), &tol())
        .unwrap()
        .last()
        .unwrap();
    let y_star = critical_y(&m, x_star, x_star, &tol()).unwrap();
    let rc = reduction_coefficients(&m, x_star, &tol()).unwrap();
    let eps = m.epsilon();
    let (u0, w0) = (2e-3, -1e-4);
    let z0 = q_surface(&rc, u0, w0);
    // Start the full system on the centre manifold v = h0w w + huu u^2.
    let v0 = rc.h0w * w0 + rc.huu * u0 * u0;
    let s0 = from_adapted([v0, u0, w0, z0], x_star, y_star);
    let t_end = 20.0;
    let opts = IntegratorOptions::default();
    let full = integrate(&m, s0, (0.0, t_end), &opts).unwrap();
    let red = integrate_reduced(&rc, eps, [u0, w0, z0], (0.0, t_end), &opts).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..red.len() {
        let c = to_adapted(
            &PairState::from_array(full.interpolate(red.t[k])),
            x_star,
            y_star,
        );
        worst = worst.max((c[1] - red.states[k][0]).abs());
    }
    // Truncation error is quadratic in the amplitude.
    assert!(worst < 0.1 * u0, "max |u_full - u_reduced| = {worst:e}");
}

#[test]
fn curtu_run_has_small_and_large_oscillations_in_u1() {
    let tr = curtu_run(3000.0);
    let tail = tr.after(TRANSIENT_FRACTION * 3000.0);
    let sw = swings(&tail, Observable::Channel(0)).unwrap();
    assert!(sw.iter().any(|s| s.amplitude <= 1e-2));
    assert!(sw.iter().any(|s| s.amplitude >= 0.5));
}

fn shifted_and_scaled(tr: &Trajectory, dt: f64, scale: f64) -> Trajectory {
    let mut out = tr.clone();
    for t in &mut out.t {
        *t += dt;
    }
    for s in out.states.iter_mut().chain(out.derivs.iter_mut()) {
        for v in s.iter_mut() {
            *v *= scale;
        }
    }
    out
}

#[test]
fn signature_invariances_on_curtu_run() {
    let tr = curtu_run(3000.0).after(600.0);
    let base = signature(&tr, Observable::Antisymmetric, DEFAULT_SAO_THRESHOLD).unwrap();
    assert!(base.has_both_kinds());

    let moved = signature(
        &shifted_and_scaled(&tr, 123.5, 3.0),
        Observable::Antisymmetric,
        DEFAULT_SAO_THRESHOLD,
    )
    .unwrap();
    assert_eq!(moved.signature_string, base.signature_string);
    assert_eq!(moved.alternating_cells, base.alternating_cells);
    assert_eq!(moved.events.len(), base.events.len());
    for (a, b) in base.events.iter().zip(&moved.events) {
        assert_eq!(a.kind, b.kind);
        assert!((b.t - a.t - 123.5).abs() < 1e-6);
    }

    let mut swapped = tr.clone();
    for s in swapped.states.iter_mut().chain(swapped.derivs.iter_mut()) {
        *s = exchange(PairState::from_array(*s)).to_array();
    }
    let ex = signature(&swapped, Observable::Antisymmetric, DEFAULT_SAO_THRESHOLD).unwrap();
    assert_eq!(ex.events.len(), base.events.len());
    for (a, b) in base.events.iter().zip(&ex.events) {
        assert_eq!(a.leading_cell, 3 - b.leading_cell);
        assert_eq!(a.kind, b.kind);
    }
    assert_eq!(ex.alternating_cells, base.alternating_cells);
}

#[test]
fn partition_is_stable_under_threshold_perturbation() {
    let runs = [curtu_run(3000.0).after(600.0), {
        let m = MorrisLecar::default();
        let s0 = default_initial_state(&m, &tol()).unwrap();
        integrate(&m, s0, (0.0, 20000.0), &IntegratorOptions::default())
            .unwrap()
            .after(4000.0)
    }];
    for tr in &runs {
        let sw = swings(tr, Observable::Antisymmetric).unwrap();
        let kinds = |th: f64| {
            classify_mmo(&sw, th)
                .events
                .iter()
                .map(|e| e.kind)
                .collect::<Vec<EventKind>>()
        };
        let k0 = kinds(DEFAULT_SAO_THRESHOLD);
        assert_eq!(kinds(0.9 * DEFAULT_SAO_THRESHOLD), k0);
        assert_eq!(kinds(1.1 * DEFAULT_SAO_THRESHOLD), k0);
    }
}
