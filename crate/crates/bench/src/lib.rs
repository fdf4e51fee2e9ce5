//! Shared fixtures for the pipeline benchmarks.

use cuspkit_core::ode::default_initial_state;
use cuspkit_core::{
    find_symmetric_fold, integrate, Curtu, IntegratorOptions, SlowFastModel, Tolerances, Trajectory,
};

/// Default Curtu model and its upper symmetric fold.
pub fn curtu_cusp() -> (Curtu, f64) {
    let m = Curtu::default();
    let x = *find_symmetric_fold(&m, m.default_fold_bracket(), &Tolerances::default())
        .expect("default Curtu model has a fold")
        .last()
        .expect("non-empty fold list");
    (m, x)
}

/// Default Curtu run from the kicked equilibrium.
pub fn curtu_run(t_end: f64) -> Trajectory {
    let m = Curtu::default();
    let s0 = default_initial_state(&m, &Tolerances::default()).expect("equilibrium");
    integrate(&m, s0, (0.0, t_end), &IntegratorOptions::default()).expect("integration")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let (_, x) = curtu_cusp();
        assert!(x > 0.5 && x < 0.99);
        assert!(curtu_run(10.0).len() > 2);
    }
}
