//! One pipeline per experiment kind. Each checks its keys, computes, and
//! writes its artifacts through [`Output`].

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use pme_lab::barenblatt::{
    barenblatt_order_limit, barenblatt_params, barenblatt_sample, barenblatt_support_radius,
    barenblatt_trajectory, support_fits, BarenblattParams,
};
use pme_lab::container::{read_trajectory, write_trajectory};
use pme_lab::data::{bumps_field, oscillating_source, Bump};
use pme_lab::exponents::{
    averaging_constants, cor_power_local, prescribed_p_exponents, prescribed_p_interval, scaling_admissible,
    thm1_exponents, thm1_local_exponents, thm2_exponents, Thm2Kind,
};
use pme_lab::fourier::multiplier::{verify_multiplier_bound, verify_uniform_multiplier, KernelGrid, MultiIndex, SampleSpec, Symbol};
use pme_lab::fourier::{build_partition, build_time_partition, PartitionMode};
use pme_lab::kinetic::{defect_measure, level_mass, singular_moment, VelocityGrid};
use pme_lab::norms::{
    barenblatt_family, besov_space_norm, homogeneous_seminorm, mixed_besov_norm, norm_sweep, sobolev_norm,
    spacetime_seminorm, spacetime_sobolev_norm, time_lp_sobolev_norm, Extension, SweepMode,
};
use pme_lab::scaling::{verify_l1_scaling, verify_norm_scaling, ScalingKind, ScalingTransform};
use pme_lab::solver::{check_contraction, solve, Run, SolverOptions};
use pme_lab::{signed_pow, Field, Grid, SpaceTimeField, TimeSampling};

use crate::config::{req, ExperimentConfig};
use crate::error::{CliError, InModule};
use crate::output::Output;

pub const KINDS: [&str; 8] = [
    "exponents",
    "barenblatt",
    "solve",
    "norms",
    "sweep",
    "kinetic",
    "scaling-check",
    "verify-appendix-b",
];

pub fn run(kind: &str, cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    match kind {
        "exponents" => exponents(cfg, out),
        "barenblatt" => barenblatt(cfg, out),
        "solve" => solve_pipeline(cfg, out),
        "norms" => norms(cfg, out),
        "sweep" => sweep(cfg, out),
        "kinetic" => kinetic(cfg, out),
        "scaling-check" => scaling_check(cfg, out),
        "verify-appendix-b" => appendix_b(cfg, out),
        other => Err(CliError::invalid(format!("unknown experiment kind {other:?}"))),
    }
}

fn extension(cfg: &ExperimentConfig) -> Result<Extension, CliError> {
    match cfg.extension.as_deref().unwrap_or("zero") {
        "zero" => Ok(Extension::Zero),
        "periodic" => Ok(Extension::Periodic),
        other => Err(CliError::invalid(format!("extension must be zero or periodic, got {other:?}"))),
    }
}

fn partition_mode(cfg: &ExperimentConfig) -> Result<PartitionMode, CliError> {
    match cfg.partition.as_deref().unwrap_or("inhomogeneous") {
        "inhomogeneous" => Ok(PartitionMode::Inhomogeneous),
        "homogeneous" => Ok(PartitionMode::Homogeneous),
        other => Err(CliError::invalid(format!(
            "partition must be homogeneous or inhomogeneous, got {other:?}"
        ))),
    }
}

fn grid(cfg: &ExperimentConfig) -> Result<Grid, CliError> {
    let d = cfg.d.unwrap_or(1);
    let length = req!(cfg.length);
    let n = req!(cfg.n);
    Grid::new(d, length, n).in_module("grid")
}

fn profile(cfg: &ExperimentConfig) -> Result<BarenblattParams, CliError> {
    let m = req!(cfg.m);
    let c = req!(cfg.c);
    barenblatt_params(m, cfg.d.unwrap_or(1), c).in_module("barenblatt")
}

fn steps(t_final: f64, dt: f64) -> Result<usize, CliError> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(CliError::invalid("t_final and dt must be positive"));
    }
    Ok(((t_final / dt).round() as usize).max(1))
}

fn random_bumps(rng: &mut ChaCha8Rng, grid: &Grid, count: usize, amplitude: f64) -> Vec<Bump> {
    let l = grid.length();
    (0..count)
        .map(|_| Bump {
            center: [rng.gen_range(-0.25 * l..0.25 * l), rng.gen_range(-0.25 * l..0.25 * l)],
            width: rng.gen_range(l / 16.0..l / 6.0),
            amplitude: rng.gen_range(-amplitude..amplitude),
        })
        .collect()
}

/// Initial data and source for a solver run, as named in the configuration.
fn problem(cfg: &ExperimentConfig) -> Result<(Field, f64, Option<SpaceTimeField>), CliError> {
    let g = grid(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let count = cfg.bumps.unwrap_or(3);
    let (u0, t0) = match cfg.initial.as_deref().unwrap_or("barenblatt") {
        "barenblatt" => {
            let t0 = req!(cfg.t0);
            let u0 = barenblatt_sample(&profile(cfg)?, &g, t0, 1.0).in_module("barenblatt")?;
            (u0, t0)
        }
        "bumps" => (bumps_field(g, &random_bumps(&mut rng, &g, count, 1.0)), cfg.t0.unwrap_or(0.0)),
        other => return Err(CliError::invalid(format!("initial must be barenblatt or bumps, got {other:?}"))),
    };
    let t_final = req!(cfg.t_final);
    let dt = req!(cfg.dt);
    let source = match cfg.source.as_deref().unwrap_or("none") {
        "none" => None,
        "bumps" => {
            let n = steps(t_final, dt)?;
            let terms: Vec<(Bump, f64)> = random_bumps(&mut rng, &g, count, 0.5)
                .into_iter()
                .map(|b| (b, rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            Some(oscillating_source(g, t0, t_final / n as f64, n + 1, &terms).in_module("data")?)
        }
        other => return Err(CliError::invalid(format!("source must be none or bumps, got {other:?}"))),
    };
    Ok((u0, t0, source))
}

fn simulate(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let m = req!(cfg.m);
    let (u0, t0, source) = problem(cfg)?;
    let mut opts = SolverOptions::with_dt(req!(cfg.dt));
    opts.newton_tol = cfg.newton_tol.unwrap_or(opts.newton_tol);
    opts.newton_max_iter = cfg.newton_max_iter.unwrap_or(opts.newton_max_iter);
    solve(&u0, t0, source.as_ref(), req!(cfg.t_final), m, &opts).in_module("solver")
}

/// The trajectory a norm, kinetic or scaling experiment works on: a stored
/// container, an exact Barenblatt sampling, or a fresh solver run.
fn trajectory(cfg: &ExperimentConfig, default_input: &str) -> Result<(SpaceTimeField, Option<SpaceTimeField>), CliError> {
    if let Some(path) = &cfg.trajectory {
        let path = Path::new(path);
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let st = read_trajectory(BufReader::new(file), cfg.t0.unwrap_or(0.0)).in_module("container")?;
        return Ok((st, None));
    }
    match cfg.input.as_deref().unwrap_or(default_input) {
        "barenblatt" => {
            let params = profile(cfg)?;
            let g = grid(cfg)?;
            let t0 = req!(cfg.t0);
            let t_final = req!(cfg.t_final);
            let n = steps(t_final, req!(cfg.dt))?;
            let st = barenblatt_trajectory(&params, &g, t0, t_final / n as f64, n + 1, TimeSampling::Nodal, 1.0)
                .in_module("barenblatt")?;
            Ok((st, None))
        }
        "solve" => {
            let run = simulate(cfg)?;
            Ok((run.u, run.source))
        }
        other => Err(CliError::invalid(format!("input must be barenblatt or solve, got {other:?}"))),
    }
}

#[derive(Serialize)]
struct Interval {
    lo: f64,
    hi: f64,
}

fn exponents(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let m = req!(cfg.m);
    let formula = cfg.formula.as_deref().unwrap_or("thm1");
    let body = match formula {
        "thm1" => json!(thm1_exponents(m, req!(cfg.p)).in_module("exponents")?),
        "thm1_local" => json!(thm1_local_exponents(m, req!(cfg.s)).in_module("exponents")?),
        "thm2_power" => {
            let kind = Thm2Kind::Power { mu: req!(cfg.mu) };
            json!(thm2_exponents(m, req!(cfg.rho), req!(cfg.p), kind).in_module("exponents")?)
        }
        "thm2_mixed" => json!(thm2_exponents(m, req!(cfg.rho), req!(cfg.p), Thm2Kind::Mixed).in_module("exponents")?),
        "cor_power_local" => {
            let (sigma_x, p) = cor_power_local(m, req!(cfg.mu)).in_module("exponents")?;
            json!({ "sigma_x_sup": sigma_x, "p": p })
        }
        "averaging" => {
            let time_only = cfg.time_only.unwrap_or(false);
            let s = if time_only { cfg.s.unwrap_or(0.0) } else { req!(cfg.s) };
            json!(averaging_constants(m, req!(cfg.gamma), req!(cfg.mu), req!(cfg.rho), s, time_only)
                .in_module("exponents")?)
        }
        "prescribed" => {
            let (gamma, mu, rho) = (req!(cfg.gamma), req!(cfg.mu), req!(cfg.rho));
            let e = prescribed_p_exponents(m, gamma, mu, rho, req!(cfg.p)).in_module("exponents")?;
            let (lo, hi) = prescribed_p_interval(m, gamma, mu, rho);
            json!({ "s": e.s, "kappa_t": e.kappa_t, "kappa_x": e.kappa_x, "p_interval": Interval { lo, hi } })
        }
        "scaling_admissible" => {
            let verdict = scaling_admissible(m, req!(cfg.mu), req!(cfg.p), req!(cfg.sigma_t), req!(cfg.sigma_x))
                .in_module("exponents")?;
            json!({ "verdict": verdict })
        }
        other => return Err(CliError::invalid(format!("unknown formula {other:?}"))),
    };
    let mut body = body;
    body["formula"] = formula.into();
    out.json("exponents.json", "exponents", &body)?;
    Ok(())
}

fn barenblatt(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let params = profile(cfg)?;
    let t = req!(cfg.t);
    let mu = cfg.mu.unwrap_or(1.0);
    let g = grid(cfg)?;
    let f = barenblatt_sample(&params, &g, t, mu).in_module("barenblatt")?;
    let rows = (0..g.cells()).map(|i| {
        let [x, y] = g.point(i);
        if g.dim() == 1 {
            vec![x, f.values[i]]
        } else {
            vec![x, y, f.values[i]]
        }
    });
    let headers: &[&str] = if g.dim() == 1 { &["x", "value"] } else { &["x", "y", "value"] };
    out.table("barenblatt.csv", headers, rows)?;
    out.json(
        "barenblatt.json",
        "barenblatt",
        &json!({
            "params": params,
            "t": t,
            "mu": mu,
            "support_radius": barenblatt_support_radius(&params, t).in_module("barenblatt")?,
            "support_fits": support_fits(&params, &g, t).in_module("barenblatt")?,
            "mass": params.mass(),
            "sampled_integral": f.integral(),
            "n": g.n(),
            "length": g.length(),
        }),
    )?;
    Ok(())
}

fn write_container(out: &Output, name: &str, st: &SpaceTimeField) -> Result<(), CliError> {
    let path = out.path(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_trajectory(BufWriter::new(file), st).in_module("container")
}

fn solve_pipeline(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let run = simulate(cfg)?;
    write_container(out, "trajectory.pmef", &run.u)?;
    if let Some(s) = &run.source {
        write_container(out, "source.pmef", s)?;
    }
    if cfg.csv.unwrap_or(false) {
        let g = run.u.grid;
        let rows = (0..run.u.n_t()).flat_map(|n| {
            let t = run.u.time(n);
            let slice = run.u.slice(n);
            (0..g.cells()).map(move |i| {
                let [x, y] = g.point(i);
                if g.dim() == 1 {
                    vec![t, x, slice[i]]
                } else {
                    vec![t, x, y, slice[i]]
                }
            })
        });
        let headers: &[&str] = if g.dim() == 1 { &["t", "x", "value"] } else { &["t", "x", "y", "value"] };
        out.table("trajectory.csv", headers, rows)?;
    }
    let last = run.u.n_t() - 1;
    out.json(
        "run.json",
        "solve",
        &json!({
            "m": run.m,
            "d": run.u.grid.dim(),
            "n": run.u.grid.n(),
            "length": run.u.grid.length(),
            "t0": run.u.t_start,
            "dt": run.u.dt,
            "n_t": run.u.n_t(),
            "has_source": run.source.is_some(),
            "newton_iterations_total": run.newton_iterations.iter().sum::<usize>(),
            "newton_iterations_max": run.newton_iterations.iter().copied().max().unwrap_or(0),
            "max_mass_defect": run.max_mass_defect,
            "min_value": run.min_value,
            "mass_initial": run.u.field(0).integral(),
            "mass_final": run.u.field(last).integral(),
            "warnings": run.warnings,
        }),
    )?;
    Ok(())
}

fn norms(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let norm = cfg.norm.clone().ok_or(CliError::MissingKey("norm"))?;
    let p = req!(cfg.p);
    let mu = cfg.mu.unwrap_or(1.0);
    let ext = extension(cfg)?;
    let (st, _) = trajectory(cfg, "barenblatt")?;
    let st = st.map(|v| signed_pow(v, mu));
    let slice = cfg.slice.unwrap_or(st.n_t() - 1);
    if slice >= st.n_t() {
        return Err(CliError::invalid(format!("slice {slice} beyond the {} stored", st.n_t())));
    }
    let report = match norm.as_str() {
        "sobolev" => sobolev_norm(&st.field(slice), req!(cfg.sigma_x), p, ext),
        "homogeneous" => homogeneous_seminorm(&st.field(slice), req!(cfg.sigma_x), p, ext),
        "besov" => {
            let part = build_partition(&st.grid, partition_mode(cfg)?).in_module("fourier")?;
            besov_space_norm(&st.field(slice), req!(cfg.sigma_x), p, &part)
        }
        "time_lp" => time_lp_sobolev_norm(&st, req!(cfg.sigma_x), p, ext),
        "spacetime" => spacetime_sobolev_norm(&st, req!(cfg.sigma_t), req!(cfg.sigma_x), p, ext),
        "spacetime_seminorm" => spacetime_seminorm(&st, req!(cfg.sigma_t), req!(cfg.sigma_x), p, ext),
        "mixed_besov" => {
            let mode = partition_mode(cfg)?;
            let ps = build_partition(&st.grid, mode).in_module("fourier")?;
            let pt = build_time_partition(st.n_t(), st.dt, mode).in_module("fourier")?;
            mixed_besov_norm(&st, req!(cfg.sigma_t), req!(cfg.sigma_x), p, &ps, &pt)
        }
        other => return Err(CliError::invalid(format!("unknown norm {other:?}"))),
    }
    .in_module("norms")?;
    out.json(
        "norms.json",
        "norms",
        &json!({ "norm": norm, "mu": mu, "slice": slice, "report": report }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SweepCsvRow {
    sigma: f64,
    h: f64,
    dt: f64,
    norm: f64,
    slope: f64,
    slope_err: f64,
}

fn sweep(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let params = profile(cfg)?;
    let mu = cfg.mu.unwrap_or(1.0);
    let p = req!(cfg.p);
    let sigmas = req!(cfg.sigmas);
    let resolutions = req!(cfg.resolutions);
    let length = req!(cfg.length);
    let t_final = req!(cfg.t_final);
    let ext = extension(cfg)?;
    let (mode, sigma_t) = match cfg.mode.as_deref().unwrap_or("time_lp") {
        "time_lp" => (SweepMode::TimeLp, 0.0),
        "spacetime" => {
            let sigma_t = req!(cfg.sigma_t);
            (SweepMode::SpaceTime { sigma_t }, sigma_t)
        }
        other => return Err(CliError::invalid(format!("mode must be time_lp or spacetime, got {other:?}"))),
    };
    let predicted = match cfg.predicted {
        Some(v) => v,
        None => barenblatt_order_limit(&params, mu, p, sigma_t).in_module("barenblatt")?,
    };
    let family = barenblatt_family(&params, mu, length, t_final, &resolutions, cfg.base_slices.unwrap_or(16))
        .in_module("norms")?;
    let result = norm_sweep(&family, &sigmas, p, mode, ext, Some(predicted)).in_module("norms")?;
    out.csv(
        "sweep.csv",
        result.rows.iter().map(|r| SweepCsvRow {
            sigma: r.sigma,
            h: r.h,
            dt: r.dt,
            norm: r.norm,
            slope: r.slope,
            slope_err: r.slope_err,
        }),
    )?;
    let th = &result.threshold;
    out.json(
        "sweep.json",
        "sweep",
        &json!({
            "threshold": th.estimate,
            "ci_lo": th.ci_lo,
            "ci_hi": th.ci_hi,
            "detected": th.detected,
            "note": th.note,
            "predicted": predicted,
            "mode": mode,
            "p": p,
            "mu": mu,
            "slopes": result.slopes(),
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct BinRow {
    v_center: f64,
    mass: f64,
}

fn kinetic(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let m = req!(cfg.m);
    let gamma = cfg.gamma.unwrap_or(0.5);
    let (st, source) = trajectory(cfg, "solve")?;
    let vg = VelocityGrid::for_field(&st, cfg.n_v.unwrap_or(128)).in_module("kinetic")?;
    let qm = defect_measure(&st, m, source.as_ref(), &vg).in_module("kinetic")?;
    out.csv(
        "kinetic.csv",
        vg.centers().into_iter().zip(&qm.bin_mass).map(|(v, &mass)| BinRow { v_center: v, mass }),
    )?;
    let top = st.max_abs();
    let levels = cfg
        .levels
        .clone()
        .unwrap_or_else(|| (1..=5).map(|k| 0.15 * k as f64 * top).collect());
    let level_masses = levels
        .iter()
        .map(|&v0| level_mass(&qm, v0))
        .collect::<pme_lab::Result<Vec<_>>>()
        .in_module("kinetic")?;
    out.json(
        "kinetic.json",
        "kinetic",
        &json!({
            "velocities": vg,
            "positive_mass": qm.positive_mass,
            "negative_mass": qm.negative_mass,
            "total_mass": qm.total_mass(),
            "clipped_fraction": qm.clipped_fraction(),
            "initial_l1": qm.initial_l1,
            "source_l1": qm.source_l1,
            "moment_gamma": gamma,
            "moment": singular_moment(&qm, gamma).in_module("kinetic")?,
            "level_masses": level_masses,
            "all_levels_hold": level_masses.iter().all(|l| l.holds),
        }),
    )?;
    Ok(())
}

fn scaling_check(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let m = req!(cfg.m);
    let eta = req!(cfg.eta);
    let p = req!(cfg.p);
    let sigma_x = req!(cfg.sigma_x);
    let kind = match cfg.scaling.clone().ok_or(CliError::MissingKey("scaling"))?.as_str() {
        "time" => ScalingKind::Time,
        "space" => ScalingKind::Space,
        other => return Err(CliError::invalid(format!("scaling must be time or space, got {other:?}"))),
    };
    let mu = cfg.mu.unwrap_or(1.0);
    let sigma_t = cfg.sigma_t.unwrap_or(0.0);
    let ext = extension(cfg)?;
    let (st, source) = trajectory(cfg, "barenblatt")?;
    let check = verify_norm_scaling(&st, m, mu, p, sigma_t, sigma_x, eta, kind, ext).in_module("scaling")?;
    let tr = ScalingTransform::new(kind, m, eta).in_module("scaling")?;
    let l1 = verify_l1_scaling(&st, &tr, eta).in_module("scaling")?;
    let l1_source = match &source {
        Some(s) if s.max_abs() > 0.0 => Some(verify_l1_scaling(s, &tr, tr.source_amplitude()).in_module("scaling")?),
        _ => None,
    };
    let pass = check.pass
        && l1.iter().all(|i| i.pass)
        && l1_source.as_ref().map_or(true, |v| v.iter().all(|i| i.pass));
    out.json(
        "scaling.json",
        "scaling-check",
        &json!({ "norm": check, "l1": l1, "l1_source": l1_source, "pass": pass }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    alpha: MultiIndex,
    max_constant: f64,
    argmax: (f64, Vec<f64>, f64),
    samples: usize,
}

fn appendix_b(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let m = req!(cfg.m);
    let v = cfg.v.unwrap_or(1.0);
    let d = cfg.d.unwrap_or(1);
    let samples = SampleSpec::log_grid(d, cfg.decades.unwrap_or(3.0), cfg.per_decade.unwrap_or(4), &[0.5 * v, v, 2.0 * v]);
    let mut alphas = vec![MultiIndex::new(0, &vec![0; d]), MultiIndex::new(1, &vec![0; d])];
    let mut unit = vec![0; d];
    unit[0] = 1;
    alphas.push(MultiIndex::new(0, &unit));
    alphas.push(MultiIndex::new(1, &unit));
    alphas.push(MultiIndex::new(2, &vec![0; d]));
    unit[0] = 2;
    alphas.push(MultiIndex::new(0, &unit));
    let bounds = alphas
        .into_iter()
        .map(|alpha| {
            let e = verify_multiplier_bound(m, &alpha, &samples)?;
            Ok(BoundRow {
                alpha,
                max_constant: e.max_constant,
                argmax: e.argmax,
                samples: e.samples,
            })
        })
        .collect::<pme_lab::Result<Vec<_>>>()
        .in_module("fourier")?;
    let r = cfg.block_range.unwrap_or(3);
    let kernel = KernelGrid {
        points: cfg.kernel_points.unwrap_or(KernelGrid::default().points),
        ..KernelGrid::default()
    };
    let symbol = Symbol::InvL { m, v, normalized: true };
    let uniform = verify_uniform_multiplier(symbol, -r..=r, -r..=r, kernel).in_module("fourier")?;
    out.json(
        "appendix_b.json",
        "verify-appendix-b",
        &json!({ "m": m, "v": v, "bounds": bounds, "uniform": uniform, "symbol": symbol }),
    )?;
    Ok(())
}

/// Metadata of a stored solver run needed to rebuild it.
fn load_run(dir: &Path) -> Result<(Run, String), CliError> {
    let meta_path = dir.join("run.json");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| CliError::io(&meta_path, e))?;
    let meta: serde_json::Value = serde_json::from_str(&text)?;
    let field = |k: &str| {
        meta.get(k)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| CliError::invalid(format!("{} lacks {k}", meta_path.display())))
    };
    let (m, t0) = (field("m")?, field("t0")?);
    let hash = meta.get("config_hash").and_then(|v| v.as_str()).unwrap_or_default().to_string();
    let read = |name: &str| -> Result<Option<SpaceTimeField>, CliError> {
        let path = dir.join(name);
        if !path.exists() {
            return Ok(None);
        }
        let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Some(read_trajectory(BufReader::new(file), t0).in_module("container")?))
    };
    let u = read("trajectory.pmef")?
        .ok_or_else(|| CliError::invalid(format!("{} holds no trajectory.pmef", dir.display())))?;
    let source = read("source.pmef")?;
    let min_value = u.values.iter().copied().fold(f64::INFINITY, f64::min);
    let run = Run {
        u,
        source,
        m,
        newton_iterations: Vec::new(),
        max_mass_defect: 0.0,
        min_value,
        warnings: Vec::new(),
    };
    Ok((run, hash))
}

/// Hash identifying a comparison: the two runs' configuration hashes, in order.
pub fn compare_hash(a: &Path, b: &Path) -> Result<String, CliError> {
    let (_, ha) = load_run(a)?;
    let (_, hb) = load_run(b)?;
    use sha2::{Digest, Sha256};
    Ok(format!("{:x}", Sha256::digest(format!("{ha}\n{hb}").as_bytes())))
}

pub fn compare(a: &Path, b: &Path, out: &Output) -> Result<(), CliError> {
    let (ra, _) = load_run(a)?;
    let (rb, _) = load_run(b)?;
    let report = check_contraction(&ra, &rb).in_module("solver")?;
    out.json("compare.json", "compare", &report)?;
    Ok(())
}
