//! Run configurations: a flat TOML file with one table per concern, and the
//! built-in presets for the eight numerical experiments.
//!
//! ```toml
//! name = "example1"
//!
//! [model]
//! kind = "linear_drift"
//! diffusion = "power"
//! exponent = 2.0
//! drift = 1.0
//!
//! [mesh]
//! lower = [-1.0]
//! upper = [1.0]
//! cells = [100]
//!
//! [boundary]
//! lower = ["periodic"]
//! upper = ["periodic"]
//!
//! [initial]
//! profile = "sine"
//! offset = 0.5
//! amplitude = 0.5
//!
//! [solver]
//! flux = "fu2"
//! dt = 1e-5
//! t_final = 0.1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearDrift,
    PorousMedia,
    FokkerPlanck,
    BuckleyLeverett,
    DriftDiffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionKind {
    None,
    Power,
    ShiftedCubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Device {
    /// Step junction on `(0, 1)` with contacts at both ends.
    Diode,
    /// Step junction on the unit square with two edge contacts.
    PnJunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<DiffusionKind>,
    /// `m` of `r(s) = s^m`, or `γ` for the drift-diffusion system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Constant `∂ₓV`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    /// `-1` fermions, `+1` bosons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Capillary scalings; one run per value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilon: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<Device>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideKind {
    Periodic,
    ZeroFlux,
    Dirichlet,
    Outflow,
}

/// One entry per axis. Dirichlet values are read from `lower_value` /
/// `upper_value` at the same position.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default)]
    pub lower: Vec<SideKind>,
    #[serde(default)]
    pub upper: Vec<SideKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lower_value: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub upper_value: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `offset + amplitude sin(π x)`
    Sine,
    /// Indicator of the union of `intervals` (flat list of endpoint pairs).
    Indicator,
    /// `exp(-1/(6 - |x - c|²))` bumps inside `|x - c|² < 6`, centers from `centers`.
    Bumps,
    /// `Σ exp(-|x - c|²/2) / (2√(2π))` over `centers`.
    Gaussians,
    /// `1 - 3x` on `[0, 1/3]`, zero beyond.
    Ramp,
    /// The junction data of the drift-diffusion devices.
    Junction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub profile: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<f64>,
    /// Flat list, `dim` coordinates per center.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtModeKind {
    Fixed,
    Cfl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub flux: FluxKind,
    pub dt: f64,
    #[serde(default = "default_dt_mode")]
    pub dt_mode: DtModeKind,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    pub t_final: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
}

fn default_dt_mode() -> DtModeKind {
    DtModeKind::Fixed
}

fn default_cfl_safety() -> f64 {
    0.5
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    None,
    /// Barenblatt profile with the initial mass.
    Barenblatt,
    /// Fermi-Dirac or Bose-Einstein profile with the initial mass.
    Quantum,
    /// Thermal equilibrium of the drift-diffusion system.
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSection {
    pub kind: EquilibriumKind,
}

impl Default for EquilibriumSection {
    fn default() -> Self {
        Self {
            kind: EquilibriumKind::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub model: ModelSection,
    pub mesh: MeshSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    pub initial: InitialSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub equilibrium: EquilibriumSection,
    #[serde(default)]
    pub output: OutputSection,
}

pub const PRESETS: [&str; 8] = [
    "example1", "example2", "example3", "example4", "example5", "example6", "example7", "example8",
];

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configurations serialize")
    }

    /// Replaces the final time, keeping the snapshot times that still fall
    /// inside the run and adding one at the new final time.
    pub fn set_t_final(&mut self, t_final: f64) {
        let s = &mut self.solver;
        s.t_final = t_final;
        s.snapshot_times.retain(|&t| t < t_final);
        s.snapshot_times.push(t_final);
    }

    pub fn dim(&self) -> usize {
        self.mesh.cells.len()
    }

    /// Checks every field and reports all problems at once, each prefixed
    /// with its path (`mesh.cells[0]: ...`).
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut bad = |path: &str, msg: String| problems.push(format!("{path}: {msg}"));
        let dim = self.mesh.cells.len();

        if self.name.trim().is_empty() {
            bad("name", "must not be empty".into());
        }
        if !(1..=3).contains(&dim) {
            bad("mesh.cells", format!("1 to 3 axes required, got {dim}"));
        }
        for (field, len) in [("mesh.lower", self.mesh.lower.len()), ("mesh.upper", self.mesh.upper.len())] {
            if len != dim {
                bad(field, format!("{len} entries for {dim} axes"));
            }
        }
        for (i, &c) in self.mesh.cells.iter().enumerate() {
            if c == 0 {
                bad(&format!("mesh.cells[{i}]"), "must be positive".into());
            }
        }
        for (i, (&lo, &hi)) in self.mesh.lower.iter().zip(&self.mesh.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                bad(&format!("mesh.upper[{i}]"), format!("need finite lower < upper, got ({lo}, {hi})"));
            }
        }

        let m = &self.model;
        match m.kind {
            ModelKind::LinearDrift => {
                if m.drift.is_none_or(|d| !d.is_finite()) {
                    bad("model.drift", "required finite value for linear_drift".into());
                }
                match m.diffusion {
                    None => bad("model.diffusion", "required for linear_drift".into()),
                    Some(DiffusionKind::Power) if !m.exponent.is_some_and(|e| e >= 1.0) => {
                        bad("model.exponent", "power diffusion needs exponent >= 1".into())
                    }
                    _ => {}
                }
                if dim != 1 {
                    bad("mesh.cells", "linear_drift is one-dimensional".into());
                }
            }
            ModelKind::PorousMedia => {
                if !m.exponent.is_some_and(|e| e > 1.0) {
                    bad("model.exponent", "porous media needs exponent > 1".into());
                }
            }
            ModelKind::FokkerPlanck => {
                if !matches!(m.k, Some(k) if k == 1.0 || k == -1.0) {
                    bad("model.k", "must be -1 or 1".into());
                }
            }
            ModelKind::BuckleyLeverett => {
                if m.epsilon.is_empty() {
                    bad("model.epsilon", "at least one value required".into());
                }
                for (i, &e) in m.epsilon.iter().enumerate() {
                    if !(e.is_finite() && e >= 0.0) {
                        bad(&format!("model.epsilon[{i}]"), format!("must be >= 0, got {e}"));
                    }
                }
                if dim != 1 {
                    bad("mesh.cells", "buckley_leverett is one-dimensional".into());
                }
            }
            ModelKind::DriftDiffusion => {
                if !m.exponent.is_some_and(|e| e >= 1.0) {
                    bad("model.exponent", "drift-diffusion needs gamma >= 1".into());
                }
                match m.device {
                    None => bad("model.device", "required for drift_diffusion".into()),
                    Some(Device::Diode) if dim != 1 => bad("mesh.cells", "the diode is one-dimensional".into()),
                    Some(Device::PnJunction) if dim != 2 => bad("mesh.cells", "the pn junction is two-dimensional".into()),
                    _ => {}
                }
                if self.mesh.lower.iter().any(|&x| x != 0.0) || self.mesh.upper.iter().any(|&x| x != 1.0) {
                    bad("mesh", "devices live on the unit interval or square".into());
                }
                if self.initial.profile != Profile::Junction {
                    bad("initial.profile", "drift_diffusion uses the junction profile".into());
                }
            }
        }
        if m.kind != ModelKind::DriftDiffusion && self.initial.profile == Profile::Junction {
            bad("initial.profile", "junction data is only defined for drift_diffusion".into());
        }
        if m.kind == ModelKind::BuckleyLeverett && self.solver.flux == FluxKind::Cu {
            bad("solver.flux", "cu needs linear convection".into());
        }
        if matches!(m.kind, ModelKind::BuckleyLeverett | ModelKind::FokkerPlanck)
            && self.solver.flux == FluxKind::Sgext
        {
            bad("solver.flux", "sgext needs linear convection".into());
        }

        if m.kind != ModelKind::DriftDiffusion {
            let b = &self.boundary;
            for (field, sides, values) in [("boundary.lower", &b.lower, &b.lower_value), ("boundary.upper", &b.upper, &b.upper_value)] {
                if sides.len() != dim {
                    bad(field, format!("{} entries for {dim} axes", sides.len()));
                }
                for (i, side) in sides.iter().enumerate() {
                    if *side == SideKind::Dirichlet && !values.get(i).is_some_and(|v| v.is_finite()) {
                        bad(&format!("{field}_value[{i}]"), "dirichlet side needs a finite value".into());
                    }
                }
            }
            for i in 0..dim.min(b.lower.len()).min(b.upper.len()) {
                if (b.lower[i] == SideKind::Periodic) != (b.upper[i] == SideKind::Periodic) {
                    bad(&format!("boundary.upper[{i}]"), "periodic must be set on both sides".into());
                }
            }
        }

        let init = &self.initial;
        match init.profile {
            Profile::Sine => {
                if init.offset.is_none() || init.amplitude.is_none() {
                    bad("initial", "sine needs offset and amplitude".into());
                }
            }
            Profile::Indicator => {
                if init.intervals.is_empty() || init.intervals.len() % 2 != 0 {
                    bad("initial.intervals", "nonempty list of endpoint pairs required".into());
                }
                if init.intervals.chunks(2).any(|p| p.len() == 2 && !(p[0] < p[1])) {
                    bad("initial.intervals", "each pair needs left < right".into());
                }
            }
            Profile::Bumps | Profile::Gaussians => {
                if init.centers.is_empty() || dim == 0 || init.centers.len() % dim != 0 {
                    bad("initial.centers", format!("nonempty list with {dim} coordinates per center required"));
                }
            }
            Profile::Ramp | Profile::Junction => {}
        }

        let s = &self.solver;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            bad("solver.dt", format!("must be positive, got {}", s.dt));
        }
        if !(s.t_final.is_finite() && s.t_final >= 0.0) {
            bad("solver.t_final", format!("must be >= 0, got {}", s.t_final));
        }
        if !(s.cfl_safety > 0.0 && s.cfl_safety <= 1.0) {
            bad("solver.cfl_safety", format!("must lie in (0, 1], got {}", s.cfl_safety));
        }
        if s.record_every == 0 {
            bad("solver.record_every", "must be positive".into());
        }
        for (i, &t) in s.snapshot_times.iter().enumerate() {
            if !(t.is_finite() && t >= 0.0 && t <= s.t_final) {
                bad(&format!("solver.snapshot_times[{i}]"), format!("must lie in [0, t_final], got {t}"));
            }
        }

        let eq = self.equilibrium.kind;
        let fits = match eq {
            EquilibriumKind::None => true,
            EquilibriumKind::Barenblatt => m.kind == ModelKind::PorousMedia,
            EquilibriumKind::Quantum => m.kind == ModelKind::FokkerPlanck,
            EquilibriumKind::Thermal => m.kind == ModelKind::DriftDiffusion,
        };
        if !fits {
            bad("equilibrium.kind", format!("{eq:?} does not apply to {:?}", m.kind));
        }
        if self.output.dir.is_empty() {
            bad("output.dir", "must not be empty".into());
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    /// Built-in experiment. `full` selects the full-size grid where a
    /// reduced default exists (example7).
    pub fn preset(name: &str, full: bool) -> Result<Self> {
        let periodic = BoundarySection {
            lower: vec![SideKind::Periodic],
            upper: vec![SideKind::Periodic],
            ..Default::default()
        };
        let closed = |dim: usize| BoundarySection {
            lower: vec![SideKind::ZeroFlux; dim],
            upper: vec![SideKind::ZeroFlux; dim],
            ..Default::default()
        };
        let solver = |flux: FluxKind, dt: f64, t_final: f64, record_every: usize| SolverSection {
            flux,
            dt,
            dt_mode: DtModeKind::Fixed,
            cfl_safety: default_cfl_safety(),
            t_final,
            record_every,
            snapshot_times: vec![t_final],
        };
        let model = |kind: ModelKind| ModelSection {
            kind,
            diffusion: None,
            exponent: None,
            drift: None,
            k: None,
            epsilon: Vec::new(),
            device: None,
        };
        let initial = |profile: Profile| InitialSection {
            profile,
            offset: None,
            amplitude: None,
            intervals: Vec::new(),
            centers: Vec::new(),
        };
        let eq = |kind: EquilibriumKind| EquilibriumSection { kind };
        let cfg = match name {
            "example1" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    diffusion: Some(DiffusionKind::Power),
                    exponent: Some(2.0),
                    drift: Some(1.0),
                    ..model(ModelKind::LinearDrift)
                },
                mesh: MeshSection {
                    lower: vec![-1.0],
                    upper: vec![1.0],
                    cells: vec![100],
                },
                boundary: periodic,
                initial: InitialSection {
                    offset: Some(0.5),
                    amplitude: Some(0.5),
                    ..initial(Profile::Sine)
                },
                solver: solver(FluxKind::Fu2, 1e-5, 0.1, 100),
                equilibrium: eq(EquilibriumKind::None),
                output: OutputSection::default(),
            },
            "example2" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    diffusion: Some(DiffusionKind::ShiftedCubic),
                    drift: Some(1.0),
                    ..model(ModelKind::LinearDrift)
                },
                mesh: MeshSection {
                    lower: vec![-1.0],
                    upper: vec![1.0],
                    cells: vec![100],
                },
                boundary: periodic,
                initial: InitialSection {
                    offset: Some(1.0),
                    amplitude: Some(0.5),
                    ..initial(Profile::Sine)
                },
                solver: solver(FluxKind::Fu2, 1e-5, 0.01, 10),
                equilibrium: eq(EquilibriumKind::None),
                output: OutputSection::default(),
            },
            "example3" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    exponent: Some(2.0),
                    device: Some(Device::Diode),
                    ..model(ModelKind::DriftDiffusion)
                },
                mesh: MeshSection {
                    lower: vec![0.0],
                    upper: vec![1.0],
                    cells: vec![64],
                },
                boundary: BoundarySection::default(),
                initial: initial(Profile::Junction),
                solver: solver(FluxKind::Fu2, 5e-5, 10.0, 200),
                equilibrium: eq(EquilibriumKind::Thermal),
                output: OutputSection::default(),
            },
            "example4" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    exponent: Some(2.0),
                    device: Some(Device::PnJunction),
                    ..model(ModelKind::DriftDiffusion)
                },
                mesh: MeshSection {
                    lower: vec![0.0, 0.0],
                    upper: vec![1.0, 1.0],
                    cells: vec![32, 32],
                },
                boundary: BoundarySection::default(),
                initial: initial(Profile::Junction),
                solver: solver(FluxKind::Fu2, 1e-4, 10.0, 100),
                equilibrium: eq(EquilibriumKind::Thermal),
                output: OutputSection::default(),
            },
            "example5" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    exponent: Some(5.0),
                    ..model(ModelKind::PorousMedia)
                },
                mesh: MeshSection {
                    lower: vec![-5.5],
                    upper: vec![5.5],
                    cells: vec![160],
                },
                boundary: closed(1),
                initial: InitialSection {
                    intervals: vec![-3.7, -0.7, 0.7, 3.7],
                    ..initial(Profile::Indicator)
                },
                solver: solver(FluxKind::Fu2, 1e-4, 10.0, 100),
                equilibrium: eq(EquilibriumKind::Barenblatt),
                output: OutputSection::default(),
            },
            "example6" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    exponent: Some(4.0),
                    ..model(ModelKind::PorousMedia)
                },
                mesh: MeshSection {
                    lower: vec![-10.0, -10.0],
                    upper: vec![10.0, 10.0],
                    cells: vec![200, 200],
                },
                boundary: closed(2),
                initial: InitialSection {
                    centers: vec![2.0, -2.0, -2.0, 2.0],
                    ..initial(Profile::Bumps)
                },
                solver: solver(FluxKind::Fu2, 1e-4, 10.0, 100),
                equilibrium: eq(EquilibriumKind::Barenblatt),
                output: OutputSection::default(),
            },
            "example7" => {
                let (cells, t_final) = if full { (40, 10.0) } else { (20, 2.0) };
                RunConfig {
                    name: name.into(),
                    model: ModelSection {
                        k: Some(-1.0),
                        ..model(ModelKind::FokkerPlanck)
                    },
                    mesh: MeshSection {
                        lower: vec![-8.0; 3],
                        upper: vec![8.0; 3],
                        cells: vec![cells; 3],
                    },
                    boundary: closed(3),
                    initial: InitialSection {
                        centers: vec![2.0, 2.0, 2.0, -2.0, -2.0, -2.0, 2.0, -2.0, 2.0, -2.0, 2.0, -2.0],
                        ..initial(Profile::Gaussians)
                    },
                    solver: solver(FluxKind::Fu2, 1e-4, t_final, 100),
                    equilibrium: eq(EquilibriumKind::Quantum),
                    output: OutputSection::default(),
                }
            }
            "example8" => RunConfig {
                name: name.into(),
                model: ModelSection {
                    epsilon: vec![0.1, 0.01, 0.001, 0.0],
                    ..model(ModelKind::BuckleyLeverett)
                },
                mesh: MeshSection {
                    lower: vec![0.0],
                    upper: vec![1.0],
                    cells: vec![100],
                },
                boundary: BoundarySection {
                    lower: vec![SideKind::Dirichlet],
                    upper: vec![SideKind::Outflow],
                    lower_value: vec![1.0],
                    upper_value: vec![0.0],
                },
                initial: initial(Profile::Ramp),
                solver: solver(FluxKind::Fu1, 1e-4, 0.2, 100),
                equilibrium: eq(EquilibriumKind::None),
                output: OutputSection::default(),
            },
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown preset `{other}`; expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_the_experiment_parameters() {
        let e1 = RunConfig::preset("example1", false).unwrap();
        assert_eq!(e1.solver.t_final, 0.1);
        let e5 = RunConfig::preset("example5", false).unwrap();
        assert_eq!((e5.mesh.lower[0], e5.mesh.upper[0], e5.mesh.cells[0]), (-5.5, 5.5, 160));
        assert_eq!(e5.model.exponent, Some(5.0));
        let e8 = RunConfig::preset("example8", false).unwrap();
        assert!(e8.model.epsilon.contains(&0.0));
        assert_eq!(e8.boundary.upper, vec![SideKind::Outflow]);
        let e3 = RunConfig::preset("example3", false).unwrap();
        assert_eq!((e3.solver.dt, e3.solver.t_final, e3.mesh.cells[0]), (5e-5, 10.0, 64));
        assert_eq!(RunConfig::preset("example7", false).unwrap().mesh.cells, vec![20; 3]);
        let full = RunConfig::preset("example7", true).unwrap();
        assert_eq!((full.mesh.cells[0], full.solver.t_final), (40, 10.0));
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(RunConfig::preset("example9", false), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn every_preset_round_trips_through_toml() {
        for name in PRESETS {
            for full in [false, true] {
                let cfg = RunConfig::preset(name, full).unwrap();
                let text = cfg.to_toml_string();
                assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg, "{name}\n{text}");
            }
        }
    }

    #[test]
    fn module_doc_example_parses() {
        let text = r#"
name = "example1"

[model]
kind = "linear_drift"
diffusion = "power"
exponent = 2.0
drift = 1.0

[mesh]
lower = [-1.0]
upper = [1.0]
cells = [100]

[boundary]
lower = ["periodic"]
upper = ["periodic"]

[initial]
profile = "sine"
offset = 0.5
amplitude = 0.5

[solver]
flux = "fu2"
dt = 1e-5
t_final = 0.1
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.solver.record_every, 1);
        assert_eq!(cfg.output.dir, "out");
    }

    #[test]
    fn all_problems_are_reported_with_paths() {
        let mut cfg = RunConfig::preset("example5", false).unwrap();
        cfg.solver.dt = -1.0;
        cfg.mesh.cells = vec![0];
        cfg.model.exponent = Some(0.5);
        cfg.solver.snapshot_times = vec![20.0];
        let Err(Error::InvalidConfig(msg)) = cfg.validate() else {
            panic!("expected a configuration error");
        };
        for path in ["solver.dt", "mesh.cells[0]", "model.exponent", "solver.snapshot_times[0]"] {
            assert!(msg.contains(path), "{path} missing from {msg}");
        }
    }

    #[test]
    fn unknown_keys_and_bad_enums_are_rejected() {
        let text = RunConfig::preset("example1", false).unwrap().to_toml_string();
        let typo = text.replace("t_final", "t_fnal");
        assert!(RunConfig::from_toml_str(&typo).is_err());
        let flux = text.replace("\"fu2\"", "\"fu3\"");
        assert!(RunConfig::from_toml_str(&flux).is_err());
    }

    #[test]
    fn scheme_and_model_mismatches() {
        let mut cfg = RunConfig::preset("example8", false).unwrap();
        cfg.solver.flux = FluxKind::Cu;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::preset("example7", false).unwrap();
        cfg.equilibrium.kind = EquilibriumKind::Barenblatt;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::preset("example1", false).unwrap();
        cfg.boundary.upper = vec![SideKind::ZeroFlux];
        assert!(cfg.validate().is_err());
    }
}
