use pme_lab::barenblatt::{barenblatt_params, barenblatt_sample, barenblatt_trajectory};
use pme_lab::data::{oscillating_source, Bump};
use pme_lab::scaling::{verify_l1_scaling, ScalingKind, ScalingTransform};
use pme_lab::solver::{residual, solve, SolverOptions};
use pme_lab::{Grid, SpaceTimeField, TimeSampling};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = ScalingKind> {
    prop_oneof![Just(ScalingKind::Time), Just(ScalingKind::Space)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factors_compose(kind in kind_strategy(), m in 1.0f64..4.0, a in 0.2f64..5.0, b in 0.2f64..5.0) {
        let ta = ScalingTransform::new(kind, m, a).unwrap();
        let tb = ScalingTransform::new(kind, m, b).unwrap();
        let tab = ScalingTransform::new(kind, m, a * b).unwrap();
        prop_assert!((ta.gamma_scale * tb.gamma_scale / tab.gamma_scale - 1.0).abs() < 1e-12);
        prop_assert!((ta.source_amplitude() * tb.source_amplitude() / tab.source_amplitude() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_rescalings_compose_on_affine_trajectories(a in 0.5f64..2.0, b in 0.5f64..2.0, m in 1.0f64..3.0) {
        // linear interpolation in time is exact here, so composition holds to round-off
        let g = Grid::line(4.0, 32).unwrap();
        let st = SpaceTimeField::from_fn(g, 1.0, 0.01, 201, TimeSampling::Nodal, |t, x, _| {
            (2.0 - 0.4 * t) * (-(x * x)).exp()
        })
        .unwrap();
        let ta = ScalingTransform::new(ScalingKind::Time, m, a).unwrap();
        let tb = ScalingTransform::new(ScalingKind::Time, m, b).unwrap();
        let tab = ScalingTransform::new(ScalingKind::Time, m, a * b).unwrap();
        let twice = tb.apply(&ta.apply(&st).unwrap()).unwrap();
        let once = tab.apply(&st).unwrap();
        prop_assert!((twice.t_start - once.t_start).abs() < 1e-12);
        let n = twice.n_t().min(once.n_t());
        for k in 0..n {
            // the intermediate trajectory ends on a grid node, so the last shared sample may clamp
            if twice.time(k) * ta.gamma_scale * tb.gamma_scale > st.t_start + st.duration() - 1e-9 {
                break;
            }
            for (x, y) in twice.slice(k).iter().zip(once.slice(k)) {
                prop_assert!((x - y).abs() < 1e-10, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn l1_identities_hold(kind in kind_strategy(), eta in 0.6f64..1.6, c in 0.1f64..0.4) {
        let pr = barenblatt_params(2.0, 1, c).unwrap();
        let g = Grid::line(10.0, 320).unwrap();
        let st = barenblatt_trajectory(&pr, &g, 1.0, 0.02, 41, TimeSampling::Nodal, 1.0).unwrap();
        let tr = ScalingTransform::new(kind, 2.0, eta).unwrap();
        for amp in [eta, tr.source_amplitude()] {
            for id in verify_l1_scaling(&st, &tr, amp).unwrap() {
                prop_assert!(id.pass, "{:?}", id);
            }
        }
    }
}

#[test]
fn rescaled_barenblatt_solves_the_equation() {
    let pr = barenblatt_params(2.0, 1, 0.25).unwrap();
    for (kind, eta) in [(ScalingKind::Time, 2.0), (ScalingKind::Space, 1.5)] {
        let tr = ScalingTransform::new(kind, 2.0, eta).unwrap();
        let res: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let g = Grid::line(8.0, n).unwrap();
                let dt = 1.28 / n as f64;
                let steps = (1.0 / dt).round() as usize;
                let st = barenblatt_trajectory(&pr, &g, 1.0, dt, steps + 1, TimeSampling::Nodal, 1.0).unwrap();
                residual(&tr.apply(&st).unwrap(), 2.0, None).unwrap()
            })
            .collect();
        assert!(res.windows(2).all(|w| w[1] < w[0]), "{kind:?}: {res:?}");
        assert!(res[2] < 1e-3, "{kind:?}: {res:?}");
    }
}

/// Largest gap between the rescaled computed solution and the solution computed
/// from rescaled data and source, relative to its size.
fn commutation_gap(kind: ScalingKind, eta: f64, n: usize, dt: f64) -> f64 {
    let m = 2.0;
    let (t0, span) = (1.0, 0.5);
    let tr = ScalingTransform::new(kind, m, eta).unwrap();
    let pr = barenblatt_params(m, 1, 0.25).unwrap();
    let g = Grid::line(8.0, n).unwrap();
    let u0 = barenblatt_sample(&pr, &g, t0, 1.0).unwrap();
    let terms = [(
        Bump {
            center: [0.5, 0.0],
            width: 0.8,
            amplitude: 0.3,
        },
        3.0,
    )];
    // the source is sampled finely enough to be resampled onto either time grid
    let steps = (span / dt).round() as usize;
    let s = oscillating_source(g, t0, dt, steps + 1, &terms).unwrap();
    let run = solve(&u0, t0, Some(&s), span, m, &SolverOptions::with_dt(dt)).unwrap();
    let mapped = tr.apply(&run.u).unwrap();

    let u0_tilde = mapped.field(0);
    let s_tilde = tr.apply_to_source(&s).unwrap();
    let span_tilde = mapped.duration();
    let run_tilde = solve(
        &u0_tilde,
        mapped.t_start,
        Some(&s_tilde),
        span_tilde,
        m,
        &SolverOptions::with_dt(mapped.dt),
    )
    .unwrap();
    let last = mapped.n_t() - 1;
    let a = mapped.slice(last);
    let b = run_tilde.u.slice(run_tilde.u.n_t() - 1);
    let scale = a.iter().fold(0.0f64, |x, y| x.max(y.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn solving_commutes_with_rescaling() {
    for (kind, eta) in [(ScalingKind::Time, 2.0), (ScalingKind::Space, 1.5)] {
        let gaps: Vec<f64> = [(64usize, 0.02), (128, 0.01), (256, 0.005)]
            .iter()
            .map(|&(n, dt)| commutation_gap(kind, eta, n, dt))
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{kind:?}: {gaps:?}");
        assert!(gaps[2] < 0.02, "{kind:?}: {gaps:?}");
    }
}
