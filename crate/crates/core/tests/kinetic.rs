use std::f64::consts::PI;

use pme_lab::barenblatt::{barenblatt_params, barenblatt_sample};
use pme_lab::data::{oscillating_source, Bump};
use pme_lab::kinetic::{defect_measure, kinetic_function, KineticMeasure, VelocityGrid};
use pme_lab::solver::{solve, Run, SolverOptions};
use pme_lab::{Grid, SpaceTimeField, TimeSampling};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn marginal_recovers_the_field(
        values in prop::collection::vec(-2.0f64..2.0, 16),
        n_v in 64usize..300,
    ) {
        let g = Grid::line(1.0, 8).unwrap();
        let st = SpaceTimeField::new(g, 0.0, 0.1, TimeSampling::Nodal, values.clone()).unwrap();
        let vg = VelocityGrid::for_field(&st, n_v).unwrap();
        let kf = kinetic_function(&st, &vg).unwrap();
        for (j, u) in values.iter().enumerate() {
            prop_assert!((kf.marginal(j / 8, j % 8) - u).abs() <= vg.dv() + 1e-12);
        }
    }

    #[test]
    fn sign_structure(values in prop::collection::vec(-3.0f64..3.0, 16), n_v in 64usize..200) {
        let g = Grid::line(2.0, 8).unwrap();
        let st = SpaceTimeField::new(g, 0.0, 0.1, TimeSampling::Nodal, values).unwrap();
        let vg = VelocityGrid::for_field(&st, n_v).unwrap();
        let kf = kinetic_function(&st, &vg).unwrap();
        for n in 0..2 {
            for i in 0..8 {
                for k in 0..vg.n_v {
                    let f = kf.get(n, i, k);
                    prop_assert!((-1..=1).contains(&f));
                    prop_assert!(f as f64 * vg.center(k) >= 0.0);
                }
            }
        }
    }
}

const T0: f64 = 1.0;
const SPAN: f64 = 0.5;

fn source_terms() -> Vec<(Bump, f64)> {
    vec![(
        Bump {
            center: [0.8, 0.0],
            width: 0.6,
            amplitude: 0.2,
        },
        2.0 * PI,
    )]
}

/// Barenblatt data driven by a small oscillating source.
fn level(n: usize, dt: f64) -> Run {
    let pr = barenblatt_params(2.0, 1, 0.25).unwrap();
    let g = Grid::line(6.0, n).unwrap();
    let u0 = barenblatt_sample(&pr, &g, T0, 1.0).unwrap();
    let steps = (SPAN / dt).round() as usize;
    let s = oscillating_source(g, T0, dt, steps + 1, &source_terms()).unwrap();
    solve(&u0, T0, Some(&s), SPAN, 2.0, &SolverOptions::with_dt(dt)).unwrap()
}

fn test_fn(t: f64, x: f64, v: f64) -> (f64, f64, f64, f64) {
    // φ = a(t) b(x) c(v); returns φ, ∂tφ, Δφ, ∂vφ
    let a = (PI * (t - T0) / SPAN).sin().powi(2);
    let da = PI / SPAN * (2.0 * PI * (t - T0) / SPAN).sin();
    let b = (-x * x).exp();
    let db2 = (4.0 * x * x - 2.0) * b;
    let c = (-v).exp();
    (a * b * c, da * b * c, a * db2 * c, -a * b * c)
}

/// Weak form of the kinetic equation tested against a smooth φ, relative to the
/// size of its largest term.
fn weak_residual(run: &Run, qm: &KineticMeasure, vg: &VelocityGrid) -> f64 {
    let st = &run.u;
    let g = st.grid;
    let kf = kinetic_function(st, vg).unwrap();
    let (h, dt, dv) = (g.h(), st.dt, vg.dv());
    let cells = g.cells();
    let mut terms = [0.0f64; 4];
    for n in 0..st.n_t() - 1 {
        let t = st.time(n + 1);
        let s = run.source_slice(n).unwrap();
        let u_new = st.slice(n + 1);
        for i in 0..cells {
            let x = g.coord(i);
            for k in 0..vg.n_v {
                let v = vg.center(k);
                let (_, phi_t, phi_xx, phi_v) = test_fn(t, x, v);
                let (_, phi_t_old, _, _) = test_fn(st.time(n), x, v);
                let f_new = kf.get(n + 1, i, k) as f64;
                // −∫ f ∂tφ, trapezoidal in time over the interval
                terms[0] -= 0.5 * (f_new * phi_t + kf.get(n, i, k) as f64 * phi_t_old) * dt * h * dv;
                terms[1] -= 2.0 * v.abs() * f_new * phi_xx * dt * h * dv;
                terms[2] += qm.values[(n * vg.n_v + k) * cells + i] * phi_v * dt * h * dv;
            }
            terms[3] -= s[i] * test_fn(t, x, u_new[i]).0 * dt * h;
        }
    }
    let scale = terms.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    terms.iter().sum::<f64>().abs() / scale
}

#[test]
fn weak_kinetic_equation_converges() {
    let mut residuals = Vec::new();
    let mut clipped = Vec::new();
    for (n, dt, n_v) in [(64, 0.02, 128), (128, 0.01, 256), (256, 0.005, 512)] {
        let run = level(n, dt);
        let vg = VelocityGrid::for_field(&run.u, n_v).unwrap();
        let qm = defect_measure(&run.u, 2.0, run.source.as_ref(), &vg).unwrap();
        residuals.push(weak_residual(&run, &qm, &vg));
        clipped.push(qm.clipped_fraction());
    }
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    assert!(residuals[2] < 0.01, "{residuals:?}");
    // the negative part is Newton round-off at every level
    assert!(clipped.iter().all(|c| *c < 1e-8), "{clipped:?}");
}
