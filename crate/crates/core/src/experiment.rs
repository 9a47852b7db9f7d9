//! Turns a [`RunConfig`] into discretized problems, runs them, and runs
//! grid-refinement studies.

use crate::config::{
    Device, DiffusionKind, DtModeKind, EquilibriumKind, ModelKind, Profile, RunConfig, SideKind,
};
use crate::diagnostics::{self, ConvergenceTable};
use crate::driftdiffusion::{self, DDRunOutput, DDState, DDSystem, ThermalEquilibrium};
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::flux::FluxScheme;
use crate::mesh::{Mesh1D, MeshND};
use crate::model::{Diffusion, ProblemModel};
use crate::solver::{self, BoundaryCondition, BoundarySide, Discretization, DtMode, RunOutput, SolverConfig, State};

/// A scalar problem ready to run.
#[derive(Debug, Clone)]
pub struct ScalarProblem {
    pub disc: Discretization<f64>,
    pub initial: State<f64>,
    pub equilibrium: Option<Vec<f64>>,
    pub solver: SolverConfig<f64>,
}

/// A drift-diffusion device ready to run.
#[derive(Debug, Clone)]
pub struct DeviceProblem {
    pub system: DDSystem<f64>,
    pub initial: DDState<f64>,
    pub equilibrium: Option<ThermalEquilibrium<f64>>,
    pub solver: SolverConfig<f64>,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Scalar(Box<ScalarProblem>),
    Device(Box<DeviceProblem>),
}

/// Problems built from one configuration, each with a file-name suffix
/// (empty unless the configuration sweeps a parameter).
pub fn build(cfg: &RunConfig) -> Result<Vec<(String, Problem)>> {
    cfg.validate()?;
    if cfg.model.kind == ModelKind::DriftDiffusion {
        return Ok(vec![(String::new(), Problem::Device(Box::new(build_device(cfg)?)))]);
    }
    let mesh = build_mesh(cfg)?;
    if cfg.model.kind == ModelKind::BuckleyLeverett {
        return cfg
            .model
            .epsilon
            .iter()
            .map(|&eps| {
                let p = build_scalar_on(cfg, mesh.clone(), Some(eps))?;
                Ok((format!("_eps{eps}"), Problem::Scalar(Box::new(p))))
            })
            .collect();
    }
    Ok(vec![(String::new(), Problem::Scalar(Box::new(build_scalar_on(cfg, mesh, None)?)))])
}

pub fn build_mesh(cfg: &RunConfig) -> Result<MeshND<f64>> {
    MeshND::uniform_box(&cfg.mesh.lower, &cfg.mesh.upper, &cfg.mesh.cells)
}

/// Model of a scalar configuration; `eps` picks the capillary scaling of a
/// Buckley-Leverett sweep (the first listed value when `None`).
pub fn build_model(cfg: &RunConfig, eps: Option<f64>) -> Result<ProblemModel<f64>> {
    let m = &cfg.model;
    let missing = |field: &str| Error::InvalidConfig(format!("model.{field}: missing"));
    match m.kind {
        ModelKind::LinearDrift => {
            let diffusion = match m.diffusion.ok_or_else(|| missing("diffusion"))? {
                DiffusionKind::None => Diffusion::None,
                DiffusionKind::Power => Diffusion::Power {
                    m: m.exponent.ok_or_else(|| missing("exponent"))?,
                },
                DiffusionKind::ShiftedCubic => Diffusion::ShiftedCubic,
            };
            ProblemModel::linear_drift(diffusion, m.drift.ok_or_else(|| missing("drift"))?)
        }
        ModelKind::PorousMedia => ProblemModel::porous_media(m.exponent.ok_or_else(|| missing("exponent"))?),
        ModelKind::FokkerPlanck => ProblemModel::fokker_planck(m.k.ok_or_else(|| missing("k"))?),
        ModelKind::BuckleyLeverett => {
            let eps = eps.or_else(|| m.epsilon.first().copied()).ok_or_else(|| missing("epsilon"))?;
            ProblemModel::buckley_leverett(eps)
        }
        ModelKind::DriftDiffusion => ProblemModel::dd_continuity(m.exponent.ok_or_else(|| missing("exponent"))?),
    }
}

pub fn build_boundary(cfg: &RunConfig) -> Result<BoundaryCondition<f64>> {
    let b = &cfg.boundary;
    let side = |kind: SideKind, value: Option<&f64>| -> Result<BoundarySide<f64>> {
        Ok(match kind {
            SideKind::Periodic => BoundarySide::Periodic,
            SideKind::ZeroFlux => BoundarySide::ZeroFlux,
            SideKind::Outflow => BoundarySide::Outflow,
            SideKind::Dirichlet => BoundarySide::Dirichlet(
                *value.ok_or_else(|| Error::InvalidConfig("boundary: dirichlet value missing".into()))?,
            ),
        })
    };
    let sides = (0..cfg.dim())
        .map(|axis| {
            Ok([
                side(b.lower[axis], b.lower_value.get(axis))?,
                side(b.upper[axis], b.upper_value.get(axis))?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    BoundaryCondition::new(sides)
}

/// Initial data as a function of position.
pub fn initial_function(cfg: &RunConfig) -> Result<Box<dyn Fn(&[f64]) -> f64>> {
    let init = cfg.initial.clone();
    let dim = cfg.dim();
    Ok(match init.profile {
        Profile::Sine => {
            let (a, b) = (init.offset.unwrap_or(0.0), init.amplitude.unwrap_or(0.0));
            Box::new(move |x| a + b * (std::f64::consts::PI * x[0]).sin())
        }
        Profile::Indicator => Box::new(move |x| {
            let inside = init.intervals.chunks(2).any(|p| x[0] > p[0] && x[0] < p[1]);
            if inside {
                1.0
            } else {
                0.0
            }
        }),
        Profile::Bumps => Box::new(move |x| {
            init.centers
                .chunks(dim)
                .map(|c| {
                    let r2: f64 = c.iter().zip(x).map(|(ci, xi)| (xi - ci).powi(2)).sum();
                    if r2 < 6.0 {
                        (-1.0 / (6.0 - r2)).exp()
                    } else {
                        0.0
                    }
                })
                .sum()
        }),
        Profile::Gaussians => {
            let scale = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
            Box::new(move |x| {
                init.centers
                    .chunks(dim)
                    .map(|c| {
                        let r2: f64 = c.iter().zip(x).map(|(ci, xi)| (xi - ci).powi(2)).sum();
                        scale * (-r2 / 2.0).exp()
                    })
                    .sum()
            })
        }
        Profile::Ramp => Box::new(|x| if x[0] <= 1.0 / 3.0 { 1.0 - 3.0 * x[0] } else { 0.0 }),
        Profile::Junction => {
            return Err(Error::InvalidConfig(
                "initial.profile: junction data belongs to the drift-diffusion devices".into(),
            ))
        }
    })
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig<f64> {
    let s = &cfg.solver;
    SolverConfig {
        flux: FluxScheme::for_kind(s.flux),
        dt: s.dt,
        t_final: s.t_final,
        cfl_safety: s.cfl_safety,
        dt_mode: match s.dt_mode {
            DtModeKind::Fixed => DtMode::Fixed,
            DtModeKind::Cfl => DtMode::CflAuto,
        },
        record_every: s.record_every,
        snapshot_times: s.snapshot_times.clone(),
    }
}

fn build_scalar_on(cfg: &RunConfig, mesh: MeshND<f64>, eps: Option<f64>) -> Result<ScalarProblem> {
    let model = build_model(cfg, eps)?;
    let bc = build_boundary(cfg)?;
    let solver = solver_config(cfg);
    let disc = Discretization::new(model, mesh.clone(), bc, solver.flux)?;
    let u0 = initial_function(cfg)?;
    let initial = solver::project_initial(|x: &[f64]| u0(x), &mesh);
    let mass = mesh.integrate(&initial.values);
    let equilibrium = match cfg.equilibrium.kind {
        EquilibriumKind::None => None,
        EquilibriumKind::Barenblatt => {
            let m = cfg.model.exponent.unwrap_or(2.0);
            Some(equilibrium::barenblatt(&mesh, m, mass)?.values)
        }
        EquilibriumKind::Quantum => {
            let k = cfg.model.k.unwrap_or(-1.0);
            Some(equilibrium::fermi_bose(&mesh, k, mass)?.values)
        }
        EquilibriumKind::Thermal => {
            return Err(Error::InvalidConfig("equilibrium.kind: thermal needs drift_diffusion".into()))
        }
    };
    Ok(ScalarProblem {
        disc,
        initial,
        equilibrium,
        solver,
    })
}

fn build_device(cfg: &RunConfig) -> Result<DeviceProblem> {
    let gamma = cfg.model.exponent.unwrap_or(2.0);
    let solver = solver_config(cfg);
    let device = match cfg.model.device {
        Some(Device::Diode) => driftdiffusion::diode_1d(cfg.mesh.cells[0], gamma, solver.flux)?,
        Some(Device::PnJunction) => {
            driftdiffusion::pn_junction_2d(cfg.mesh.cells[0], cfg.mesh.cells[1], gamma, solver.flux)?
        }
        None => return Err(Error::InvalidConfig("model.device: missing".into())),
    };
    let equilibrium = match cfg.equilibrium.kind {
        EquilibriumKind::Thermal => Some(device.system.thermal_equilibrium()?),
        _ => None,
    };
    Ok(DeviceProblem {
        system: device.system,
        initial: device.initial,
        equilibrium,
        solver,
    })
}

/// Output of one run.
#[derive(Debug, Clone)]
pub enum Outcome {
    Scalar {
        mesh: MeshND<f64>,
        output: RunOutput<f64>,
    },
    Device {
        mesh: MeshND<f64>,
        output: DDRunOutput<f64>,
    },
}

pub fn run_problem(problem: Problem) -> Result<Outcome> {
    match problem {
        Problem::Scalar(p) => {
            let output = p.disc.run(&p.solver, p.initial, p.equilibrium.as_deref())?;
            Ok(Outcome::Scalar {
                mesh: p.disc.mesh().clone(),
                output,
            })
        }
        Problem::Device(p) => {
            let mut p = *p;
            let output = p.system.run(&p.solver, p.initial, p.equilibrium.as_ref())?;
            Ok(Outcome::Device {
                mesh: p.system.mesh().clone(),
                output,
            })
        }
    }
}

/// One time step shared by every level of a refinement study:
/// `min(0.25 Δx² / max r', 0.5 · cfl_dt)` on the finest grid, with `max r'`
/// sampled over the range of the initial data.
pub fn common_dt(cfg: &RunConfig, finest: usize) -> Result<f64> {
    let mut fine = cfg.clone();
    fine.mesh.cells = vec![finest; cfg.dim()];
    let p = build_scalar_on(&fine, build_mesh(&fine)?, None)?;
    let values = &p.initial.values;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let model = p.disc.model();
    let r_max = (0..=64)
        .map(|k| model.r_prime(lo + (hi - lo) * k as f64 / 64.0))
        .fold(0.0, f64::max);
    let dx = p.disc.mesh().axes().iter().map(Mesh1D::min_width).fold(f64::INFINITY, f64::min);
    let parabolic = if r_max > 0.0 { 0.25 * dx * dx / r_max } else { f64::INFINITY };
    let dt = parabolic.min(p.disc.cfl_dt(values, 0.5));
    if dt.is_finite() && dt > 0.0 {
        Ok(dt)
    } else {
        Err(Error::InvalidConfig("no finite time step for the refinement study".into()))
    }
}

/// Runs `cfg` on every level of `levels` (cells per axis, successive
/// doublings) with the common step of [`common_dt`], or `dt` when given,
/// and tabulates the L¹ differences of consecutive levels.
pub fn convergence(cfg: &RunConfig, levels: &[usize], dt: Option<f64>) -> Result<ConvergenceTable<f64>> {
    let mut cfg = cfg.clone();
    cfg.solver.snapshot_times.clear();
    let cfg = &cfg;
    cfg.validate()?;
    if cfg.model.kind == ModelKind::DriftDiffusion {
        return Err(Error::InvalidConfig(
            "model.kind: refinement studies cover the scalar models".into(),
        ));
    }
    let finest = *levels.iter().max().ok_or_else(|| Error::InvalidConfig("levels: empty".into()))?;
    let dt = match dt {
        Some(dt) => dt,
        None => common_dt(cfg, finest)?,
    };
    diagnostics::convergence_study(levels, |n| {
        let mut level = cfg.clone();
        level.mesh.cells = vec![n; cfg.dim()];
        level.solver.dt = dt;
        level.solver.dt_mode = DtModeKind::Fixed;
        level.solver.record_every = usize::MAX;
        level.solver.snapshot_times.clear();
        let mesh = build_mesh(&level)?;
        let p = build_scalar_on(&level, mesh.clone(), None)?;
        let out = p.disc.run(&p.solver, p.initial, None)?;
        Ok((mesh, out.state.values))
    })
}
