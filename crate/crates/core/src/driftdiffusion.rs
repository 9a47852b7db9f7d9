//! Bipolar drift-diffusion system
//!
//! ```text
//! ∂ₜN - div(∇r(N) - N∇V) = 0
//! ∂ₜP - div(∇r(P) + P∇V) = 0
//! ΔV = N - P - C
//! ```
//!
//! with `r(s) = s^γ`. Each density is advanced by the generic finite volume
//! step with an effective potential (`-V` for electrons, `+V` for holes), the
//! potential from the previous step being used for both, and `V` is then
//! recomputed from the new densities.

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::flux::FluxScheme;
use crate::linalg::{self, CsrMatrix};
use crate::mesh::MeshND;
use crate::model::ProblemModel;
use crate::real::Real;
use crate::solver::{BoundaryCondition, BoundarySide, Discretization, DtMode, SolverConfig, State, Workspace};

/// Ohmic contact data `(N̄, P̄, V̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact<T> {
    pub n: T,
    pub p: T,
    pub v: T,
}

/// One side of the box.
#[derive(Debug, Clone, PartialEq)]
pub enum DDSide<T> {
    Insulating,
    Contact(Contact<T>),
    /// Face by face along the side, `None` being insulating.
    Segments(Vec<Option<Contact<T>>>),
}

impl<T: Real> DDSide<T> {
    pub fn contact(&self, line: usize) -> Option<Contact<T>> {
        match self {
            DDSide::Insulating => None,
            DDSide::Contact(c) => Some(*c),
            DDSide::Segments(faces) => faces.get(line).copied().flatten(),
        }
    }

    fn species_side(&self, pick: impl Fn(&Contact<T>) -> T) -> BoundarySide<T> {
        match self {
            DDSide::Insulating => BoundarySide::ZeroFlux,
            DDSide::Contact(c) => BoundarySide::Dirichlet(pick(c)),
            DDSide::Segments(faces) => BoundarySide::Faces(faces.iter().map(|f| f.as_ref().map(&pick)).collect()),
        }
    }

    fn contacts(&self) -> Vec<Contact<T>> {
        match self {
            DDSide::Insulating => Vec::new(),
            DDSide::Contact(c) => vec![*c],
            DDSide::Segments(faces) => faces.iter().flatten().copied().collect(),
        }
    }
}

/// `h⁻¹` extended by zero: `(1 + (γ-1)/γ s)^{1/(γ-1)}` for `s > h(0⁺)`,
/// `0` otherwise; `exp(s)` when `γ = 1`.
pub fn g_of<T: Real>(gamma: T, s: T) -> T {
    if gamma == T::one() {
        return s.exp();
    }
    let base = T::one() + (gamma - T::one()) / gamma * s;
    if base > T::zero() {
        base.powf(T::one() / (gamma - T::one()))
    } else {
        T::zero()
    }
}

/// Derivative of [`g_of`] in `s` (zero on the vacuum branch).
fn g_prime<T: Real>(gamma: T, s: T) -> T {
    if gamma == T::one() {
        return s.exp();
    }
    let base = T::one() + (gamma - T::one()) / gamma * s;
    if base > T::zero() {
        base.powf((T::lit(2.0) - gamma) / (gamma - T::one())) / gamma
    } else {
        T::zero()
    }
}

/// Boundary data of the system and the quasi-Fermi levels it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct DDBoundary<T> {
    sides: Vec<[DDSide<T>; 2]>,
    gamma: T,
    alpha_n: T,
    alpha_p: T,
}

impl<T: Real> DDBoundary<T> {
    /// Derives `α_N = h(N̄) - V̄` and `α_P = h(P̄) + V̄` from the first contact
    /// where the respective density is positive (the first contact when
    /// none is), and rejects contacts with `N̄ P̄ > 0` that violate
    /// `h(N̄) + h(P̄) = α_N + α_P`.
    pub fn new(sides: Vec<[DDSide<T>; 2]>, gamma: T) -> Result<Self> {
        if !(gamma >= T::one()) {
            return Err(Error::InvalidModel(format!("gamma must be >= 1, got {gamma}")));
        }
        let model = ProblemModel::dd_continuity(gamma)?;
        let contacts: Vec<Contact<T>> = sides.iter().flatten().flat_map(DDSide::contacts).collect();
        let Some(first) = contacts.first().copied() else {
            return Err(Error::InvalidBoundary("at least one contact is required".into()));
        };
        for c in &contacts {
            if !(c.n >= T::zero() && c.p >= T::zero() && c.v.is_finite()) {
                return Err(Error::InvalidBoundary(format!(
                    "contact densities must be nonnegative: N = {}, P = {}, V = {}",
                    c.n, c.p, c.v
                )));
            }
        }
        let h = |s: T| model.h(s);
        let pick = |positive: fn(&Contact<T>) -> bool| contacts.iter().copied().find(positive).unwrap_or(first);
        let cn = pick(|c| c.n > T::zero());
        let cp = pick(|c| c.p > T::zero());
        let alpha_n = h(cn.n) - cn.v;
        let alpha_p = h(cp.p) + cp.v;
        for c in &contacts {
            if c.n > T::zero() && c.p > T::zero() {
                let mismatch = (h(c.n) + h(c.p) - alpha_n - alpha_p).abs();
                if !(mismatch <= T::lit(1e-10)) {
                    return Err(Error::InvalidBoundary(format!(
                        "contact (N = {}, P = {}, V = {}) violates h(N) + h(P) = alpha_N + alpha_P by {mismatch:e}",
                        c.n, c.p, c.v
                    )));
                }
            }
        }
        Ok(Self {
            sides,
            gamma,
            alpha_n,
            alpha_p,
        })
    }

    /// Contacts on the two ends of an interval.
    pub fn interval(left: Contact<T>, right: Contact<T>, gamma: T) -> Result<Self> {
        Self::new(vec![[DDSide::Contact(left), DDSide::Contact(right)]], gamma)
    }

    pub fn alpha_n(&self) -> T {
        self.alpha_n
    }

    pub fn alpha_p(&self) -> T {
        self.alpha_p
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn side(&self, axis: usize, upper: bool) -> &DDSide<T> {
        &self.sides[axis][usize::from(upper)]
    }

    fn species_bc(&self, pick: impl Fn(&Contact<T>) -> T + Copy) -> Result<BoundaryCondition<T>> {
        BoundaryCondition::new(
            self.sides
                .iter()
                .map(|[lo, hi]| [lo.species_side(pick), hi.species_side(pick)])
                .collect(),
        )
    }

    /// Every contact satisfies `N̄ = g(α_N + V̄)` and `P̄ = g(α_P - V̄)`, the
    /// condition for a thermal equilibrium to exist.
    fn check_equilibrium_data(&self) -> Result<()> {
        let tol = T::lit(1e-10);
        for c in self.sides.iter().flatten().flat_map(DDSide::contacts) {
            let n_eq = g_of(self.gamma, self.alpha_n + c.v);
            let p_eq = g_of(self.gamma, self.alpha_p - c.v);
            if (n_eq - c.n).abs() > tol || (p_eq - c.p).abs() > tol {
                return Err(Error::NoEquilibrium(format!(
                    "contact (N = {}, P = {}, V = {}) is not at constant quasi-Fermi levels",
                    c.n, c.p, c.v
                )));
            }
        }
        Ok(())
    }
}

/// Densities, potential and time.
#[derive(Debug, Clone, PartialEq)]
pub struct DDState<T> {
    pub n: Vec<T>,
    pub p: Vec<T>,
    pub v: Vec<T>,
    pub time: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEquilibrium<T> {
    pub n: Vec<T>,
    pub p: Vec<T>,
    pub v: Vec<T>,
    /// Newton iterations used.
    pub iterations: usize,
}

/// Two-point finite volume Laplacian with the contact data folded in:
/// `(K V)_i = Σ_faces area/d (V_i - V_j)`, Dirichlet faces contributing
/// `area/d V̄` to `boundary_rhs`.
#[derive(Debug, Clone)]
struct Laplacian<T> {
    matrix: CsrMatrix<T>,
    boundary_rhs: Vec<T>,
    volumes: Vec<T>,
}

impl<T: Real> Laplacian<T> {
    fn new(mesh: &MeshND<T>, bc: &DDBoundary<T>) -> Result<Self> {
        let n_cells = mesh.n_cells();
        let mut triplets = Vec::with_capacity(5 * n_cells);
        let mut boundary_rhs = vec![T::zero(); n_cells];
        let mut has_dirichlet = false;
        for axis in 0..mesh.dim() {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            let d = mesh.axis(axis).interface_distances();
            for line in 0..mesh.n_lines(axis) {
                let start = mesh.line_start(axis, line);
                let area = mesh.face_area(axis, start);
                for k in 1..n {
                    let (a, b) = (start + (k - 1) * stride, start + k * stride);
                    let w = area / d[k];
                    triplets.extend([(a, a, w), (b, b, w), (a, b, -w), (b, a, -w)]);
                }
                for (upper, cell, dist) in [(false, start, d[0]), (true, start + (n - 1) * stride, d[n])] {
                    if let Some(c) = bc.side(axis, upper).contact(line) {
                        let w = area / dist;
                        triplets.push((cell, cell, w));
                        boundary_rhs[cell] = boundary_rhs[cell] + w * c.v;
                        has_dirichlet = true;
                    }
                }
            }
        }
        if !has_dirichlet {
            return Err(Error::Singular("the potential needs at least one contact".into()));
        }
        Ok(Self {
            matrix: CsrMatrix::from_triplets(n_cells, triplets),
            boundary_rhs,
            volumes: mesh.volumes(),
        })
    }

    /// `b_D - m(K)(N - P - C)`
    fn rhs(&self, n: &[T], p: &[T], doping: &[T]) -> Vec<T> {
        (0..self.volumes.len())
            .map(|i| self.boundary_rhs[i] - self.volumes[i] * (n[i] - p[i] - doping[i]))
            .collect()
    }
}

/// The assembled system: mesh, doping, contacts, one discretization per
/// carrier and the potential operator.
#[derive(Debug, Clone)]
pub struct DDSystem<T> {
    mesh: MeshND<T>,
    doping: Vec<T>,
    bc: DDBoundary<T>,
    laplacian: Laplacian<T>,
    electrons: Discretization<T>,
    holes: Discretization<T>,
    ws: Workspace<T>,
}

const LINEAR_TOL: f64 = 1e-12;

impl<T: Real> DDSystem<T> {
    pub fn new(mesh: MeshND<T>, doping: Vec<T>, bc: DDBoundary<T>, scheme: FluxScheme) -> Result<Self> {
        if doping.len() != mesh.n_cells() {
            return Err(Error::ShapeMismatch {
                expected: mesh.n_cells(),
                got: doping.len(),
            });
        }
        if bc.dim() != mesh.dim() {
            return Err(Error::InvalidBoundary(format!(
                "boundary data for {} axes on a {}-dimensional mesh",
                bc.dim(),
                mesh.dim()
            )));
        }
        for axis in 0..mesh.dim() {
            for upper in [false, true] {
                if let DDSide::Segments(faces) = bc.side(axis, upper) {
                    if faces.len() != mesh.n_lines(axis) {
                        return Err(Error::InvalidBoundary(format!(
                            "axis {axis}: {} face entries for {} boundary faces",
                            faces.len(),
                            mesh.n_lines(axis)
                        )));
                    }
                }
            }
        }
        let model = ProblemModel::dd_continuity(bc.gamma())?;
        let laplacian = Laplacian::new(&mesh, &bc)?;
        let electrons = Discretization::new(model.clone(), mesh.clone(), bc.species_bc(|c| c.n)?, scheme)?;
        let holes = Discretization::new(model, mesh.clone(), bc.species_bc(|c| c.p)?, scheme)?;
        Ok(Self {
            mesh,
            doping,
            bc,
            laplacian,
            electrons,
            holes,
            ws: Workspace::default(),
        })
    }

    pub fn mesh(&self) -> &MeshND<T> {
        &self.mesh
    }

    pub fn doping(&self) -> &[T] {
        &self.doping
    }

    pub fn boundary(&self) -> &DDBoundary<T> {
        &self.bc
    }

    pub fn scheme(&self) -> FluxScheme {
        self.electrons.scheme()
    }

    /// Solves `Σ_faces area (V_j - V_i)/d = m(K_i)(N_i - P_i - C_i)`.
    pub fn poisson_solve(&self, n: &[T], p: &[T]) -> Result<Vec<T>> {
        self.check_len(n)?;
        self.check_len(p)?;
        let rhs = self.laplacian.rhs(n, p, &self.doping);
        linalg::solve_spd(&self.laplacian.matrix, None, &rhs, None, T::lit(LINEAR_TOL))
    }

    /// State with the potential computed from the densities.
    pub fn state(&self, n: Vec<T>, p: Vec<T>, time: T) -> Result<DDState<T>> {
        let v = self.poisson_solve(&n, &p)?;
        Ok(DDState { n, p, v, time })
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() == self.mesh.n_cells() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.mesh.n_cells(),
                got: v.len(),
            })
        }
    }

    /// Loads `v` as the effective potential of both carriers.
    fn set_potential(&mut self, v: &[T]) {
        let bc = &self.bc;
        let closure = |axis: usize, upper: bool, line: usize| bc.side(axis, upper).contact(line).map(|c| c.v);
        self.electrons.set_cell_potential(v, -T::one(), closure);
        self.holes.set_cell_potential(v, T::one(), closure);
    }

    /// Largest stable step for both carriers in the potential of `state`.
    pub fn cfl_dt(&mut self, state: &DDState<T>, safety: T) -> T {
        self.set_potential(&state.v);
        self.electrons.cfl_dt(&state.n, safety).min(self.holes.cfl_dt(&state.p, safety))
    }

    /// One explicit step: both densities with the current potential, then a
    /// new potential from the updated densities. `step` labels failures.
    pub fn step(&mut self, state: &mut DDState<T>, dt: T, step: usize) -> Result<()> {
        self.set_potential(&state.v);
        let mut ws = std::mem::take(&mut self.ws);
        let mut n = State::new(std::mem::take(&mut state.n), state.time);
        let mut p = State::new(std::mem::take(&mut state.p), state.time);
        let outcome = self
            .electrons
            .euler_step_in_place(&mut n, dt, step, &mut ws)
            .and_then(|()| self.holes.euler_step_in_place(&mut p, dt, step, &mut ws));
        self.ws = ws;
        state.n = n.values;
        state.p = p.values;
        outcome?;
        state.v = self.poisson_solve(&state.n, &state.p)?;
        state.time = state.time + dt;
        Ok(())
    }

    /// Stationary state with constant quasi-Fermi levels: damped Newton on
    /// `K V - b_D + m(K)(g(α_N + V) - g(α_P - V) - C) = 0`.
    pub fn thermal_equilibrium(&self) -> Result<ThermalEquilibrium<T>> {
        self.bc.check_equilibrium_data()?;
        let gamma = self.bc.gamma();
        let (an, ap) = (self.bc.alpha_n(), self.bc.alpha_p());
        let lap = &self.laplacian;
        let n_cells = self.mesh.n_cells();
        let residual = |v: &[T], out: &mut Vec<T>| {
            out.resize(n_cells, T::zero());
            lap.matrix.mul_shifted(None, v, out);
            for i in 0..n_cells {
                let charge = g_of(gamma, an + v[i]) - g_of(gamma, ap - v[i]) - self.doping[i];
                out[i] = out[i] - lap.boundary_rhs[i] + lap.volumes[i] * charge;
            }
        };
        let norm = |r: &[T]| r.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let mut v = linalg::solve_spd(&lap.matrix, None, &lap.boundary_rhs, None, T::lit(LINEAR_TOL))?;
        let mut r = Vec::new();
        let mut trial_r = Vec::new();
        residual(&v, &mut r);
        let mut r_norm = norm(&r);
        let tol = T::lit(1e-10);
        const MAX_ITER: usize = 100;
        const MAX_HALVINGS: u32 = 30;
        for iteration in 1..=MAX_ITER {
            let shift: Vec<T> = (0..n_cells)
                .map(|i| lap.volumes[i] * (g_prime(gamma, an + v[i]) + g_prime(gamma, ap - v[i])))
                .collect();
            let neg_r: Vec<T> = r.iter().map(|&x| -x).collect();
            let delta = linalg::solve_spd(&lap.matrix, Some(&shift), &neg_r, None, T::lit(LINEAR_TOL))?;
            let mut lambda = T::one();
            let mut trial = v.clone();
            for halving in 0..=MAX_HALVINGS {
                for i in 0..n_cells {
                    trial[i] = v[i] + lambda * delta[i];
                }
                residual(&trial, &mut trial_r);
                let t_norm = norm(&trial_r);
                if t_norm <= r_norm || halving == MAX_HALVINGS {
                    break;
                }
                lambda = lambda / T::lit(2.0);
            }
            let update = norm(&delta) * lambda;
            std::mem::swap(&mut v, &mut trial);
            std::mem::swap(&mut r, &mut trial_r);
            r_norm = norm(&r);
            if update < tol {
                let n = v.iter().map(|&x| g_of(gamma, an + x)).collect();
                let p = v.iter().map(|&x| g_of(gamma, ap - x)).collect();
                return Ok(ThermalEquilibrium {
                    n,
                    p,
                    v,
                    iterations: iteration,
                });
            }
        }
        Err(Error::NotConverged {
            solver: "thermal equilibrium Newton",
            iterations: MAX_ITER,
            residual: r_norm.to_f64_lossy(),
        })
    }

    /// `Σ m(K)[H(N) - H(N_eq) - h(N_eq)(N - N_eq)] + (same for P)
    ///  + ½ Σ_faces area/d (δ_j - δ_i)²` with `δ = V - V_eq`, which vanishes
    /// on contacts; insulating faces carry no term.
    pub fn relative_energy(&self, state: &DDState<T>, eq: &ThermalEquilibrium<T>) -> Result<T> {
        let model = self.electrons.model();
        let species = diagnostics::discrete_entropy(&state.n, &eq.n, model, &self.mesh)?.value
            + diagnostics::discrete_entropy(&state.p, &eq.p, model, &self.mesh)?.value;
        self.check_len(&state.v)?;
        let delta: Vec<T> = state.v.iter().zip(&eq.v).map(|(&a, &b)| a - b).collect();
        let mut field = T::zero();
        let mesh = &self.mesh;
        for axis in 0..mesh.dim() {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            let d = mesh.axis(axis).interface_distances();
            for line in 0..mesh.n_lines(axis) {
                let start = mesh.line_start(axis, line);
                let area = mesh.face_area(axis, start);
                for k in 1..n {
                    let jump = delta[start + k * stride] - delta[start + (k - 1) * stride];
                    field = field + area / d[k] * jump * jump;
                }
                for (upper, cell, dist) in [(false, start, d[0]), (true, start + (n - 1) * stride, d[n])] {
                    if self.bc.side(axis, upper).contact(line).is_some() {
                        field = field + area / dist * delta[cell] * delta[cell];
                    }
                }
            }
        }
        Ok(species + field / T::lit(2.0))
    }

    /// Sum of the two carriers' dissipations in the potential of `state`.
    pub fn dissipation(&mut self, state: &DDState<T>) -> T {
        self.set_potential(&state.v);
        diagnostics::discrete_dissipation(&self.electrons, &state.n)
            + diagnostics::discrete_dissipation(&self.holes, &state.p)
    }

    /// Record with `mass = ∫(N - P)`, the relative energy as the entropy and
    /// `‖N - N_eq‖₁ + ‖P - P_eq‖₁`; NaN columns without an equilibrium.
    pub fn record(&mut self, state: &DDState<T>, eq: Option<&ThermalEquilibrium<T>>) -> DiagnosticsRecord<T> {
        let charge: Vec<T> = state.n.iter().zip(&state.p).map(|(&a, &b)| a - b).collect();
        let mass = self.mesh.integrate(&charge);
        let dissipation = self.dissipation(state);
        let (entropy, l1) = match eq {
            Some(eq) => (
                self.relative_energy(state, eq).unwrap_or(T::nan()),
                diagnostics::l1_distance(&state.n, &eq.n, &self.mesh)
                    .and_then(|a| diagnostics::l1_distance(&state.p, &eq.p, &self.mesh).map(|b| a + b))
                    .unwrap_or(T::nan()),
            ),
            None => (T::nan(), T::nan()),
        };
        DiagnosticsRecord {
            time: state.time,
            mass,
            entropy,
            dissipation,
            l1_to_equilibrium: l1,
        }
    }

    /// Integrates to `config.t_final`, with the same stepping, recording and
    /// snapshot rules as the scalar solver.
    pub fn run(
        &mut self,
        config: &SolverConfig<T>,
        initial: DDState<T>,
        eq: Option<&ThermalEquilibrium<T>>,
    ) -> Result<DDRunOutput<T>> {
        config.validate()?;
        if config.flux != self.scheme() {
            return Err(Error::InvalidConfig(format!(
                "configuration asks for {} but the system uses {}",
                config.flux.kind(),
                self.scheme().kind()
            )));
        }
        for v in [&initial.n, &initial.p, &initial.v] {
            self.check_len(v)?;
        }
        self.electrons.check_range(&initial.n, 0)?;
        self.holes.check_range(&initial.p, 0)?;
        let mut state = initial;
        let t0 = state.time;
        let mut records = vec![self.record(&state, eq)];
        let mut pending: Vec<T> = config.snapshot_times.clone();
        pending.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mut pending = pending.into_iter().peekable();
        let mut snapshots = Vec::new();
        let due = |t: T, s: T| s >= t - T::lit(1e-12) * t.abs().max(T::one());
        while pending.peek().is_some_and(|&t| due(t, state.time)) {
            snapshots.push(state.clone());
            pending.next();
        }
        let horizon = config.t_final;
        let mut step = 0usize;
        loop {
            let remaining = horizon - state.time;
            let dt = match config.dt_mode {
                DtMode::Fixed => config.dt,
                DtMode::CflAuto => {
                    let dt = self.cfl_dt(&state, config.cfl_safety);
                    if dt.is_finite() {
                        dt
                    } else {
                        remaining
                    }
                }
            };
            if remaining <= T::lit(1e-12) * dt.max(horizon.abs()).min(dt) {
                break;
            }
            let last = remaining <= dt * (T::one() + T::lit(1e-9));
            let dt_step = if last { remaining } else { dt };
            step += 1;
            self.step(&mut state, dt_step, step)?;
            if config.dt_mode == DtMode::Fixed {
                state.time = if last { horizon } else { t0 + T::from_usize_lossy(step) * config.dt };
            }
            if step % config.record_every == 0 || last {
                records.push(self.record(&state, eq));
            }
            while pending.peek().is_some_and(|&t| due(t, state.time)) {
                snapshots.push(state.clone());
                pending.next();
            }
            if last {
                break;
            }
        }
        if records.last().map(|r| r.time) != Some(state.time) {
            records.push(self.record(&state, eq));
        }
        Ok(DDRunOutput {
            state,
            records,
            snapshots,
            steps: step,
        })
    }
}

/// Result of [`DDSystem::run`].
#[derive(Debug, Clone)]
pub struct DDRunOutput<T> {
    pub state: DDState<T>,
    pub records: Vec<DiagnosticsRecord<T>>,
    pub snapshots: Vec<DDState<T>>,
    pub steps: usize,
}

/// Potential of the densities `n`, `p` with doping `doping`.
pub fn poisson_solve<T: Real>(n: &[T], p: &[T], doping: &[T], bc: &DDBoundary<T>, mesh: &MeshND<T>) -> Result<Vec<T>> {
    let system = DDSystem::new(mesh.clone(), doping.to_vec(), bc.clone(), FluxScheme::for_kind(crate::flux::FluxKind::Fu1))?;
    system.poisson_solve(n, p)
}

/// Thermal equilibrium for the given doping and contacts.
pub fn thermal_equilibrium<T: Real>(doping: &[T], bc: &DDBoundary<T>, mesh: &MeshND<T>) -> Result<ThermalEquilibrium<T>> {
    let system = DDSystem::new(mesh.clone(), doping.to_vec(), bc.clone(), FluxScheme::for_kind(crate::flux::FluxKind::Fu1))?;
    system.thermal_equilibrium()
}

/// Step-junction data of the one-dimensional diode on `(0, 1)`: acceptor
/// (`C = -1`) left of `x = 0.5`, donor (`C = +1`) right of it, contacts
/// `(N, P, V) = (0, 1, -1)` at `x = 0` and `(1, 0, 1)` at `x = 1`, and
/// initial densities that jump at the junction.
pub struct Diode1D<T> {
    pub system: DDSystem<T>,
    pub initial: DDState<T>,
}

/// Builds the one-dimensional diode with `cells` cells and exponent `gamma`.
pub fn diode_1d<T: Real>(cells: usize, gamma: T, scheme: FluxScheme) -> Result<Diode1D<T>> {
    let mesh = MeshND::uniform_box(&[T::zero()], &[T::one()], &[cells])?;
    let half = T::lit(0.5);
    let left = |cell: usize| mesh.center(cell)[0] <= half;
    let doping: Vec<T> = (0..cells).map(|c| if left(c) { -T::one() } else { T::one() }).collect();
    let n0: Vec<T> = (0..cells).map(|c| if left(c) { T::zero() } else { T::one() }).collect();
    let p0: Vec<T> = (0..cells).map(|c| if left(c) { T::one() } else { T::zero() }).collect();
    let bc = DDBoundary::interval(
        Contact {
            n: T::zero(),
            p: T::one(),
            v: -T::one(),
        },
        Contact {
            n: T::one(),
            p: T::zero(),
            v: T::one(),
        },
        gamma,
    )?;
    let system = DDSystem::new(mesh, doping, bc, scheme)?;
    let initial = system.state(n0, p0, T::zero())?;
    Ok(Diode1D { system, initial })
}

/// Two-dimensional PN junction on the unit square: the same doping split
/// along `x = 0.5`, a `p` contact on the upper half of the left edge, an `n`
/// contact on the lower half of the right edge, insulating elsewhere.
pub fn pn_junction_2d<T: Real>(nx: usize, ny: usize, gamma: T, scheme: FluxScheme) -> Result<Diode1D<T>> {
    let mesh = MeshND::uniform_box(&[T::zero(), T::zero()], &[T::one(), T::one()], &[nx, ny])?;
    let half = T::lit(0.5);
    let left = |cell: usize| mesh.center(cell)[0] <= half;
    let cells = mesh.n_cells();
    let doping: Vec<T> = (0..cells).map(|c| if left(c) { -T::one() } else { T::one() }).collect();
    let n0: Vec<T> = (0..cells).map(|c| if left(c) { T::zero() } else { T::one() }).collect();
    let p0: Vec<T> = (0..cells).map(|c| if left(c) { T::one() } else { T::zero() }).collect();
    let p_contact = Contact {
        n: T::zero(),
        p: T::one(),
        v: -T::one(),
    };
    let n_contact = Contact {
        n: T::one(),
        p: T::zero(),
        v: T::one(),
    };
    let y_of_line = |line: usize| mesh.center(mesh.line_start(0, line))[1];
    let lines = mesh.n_lines(0);
    let left_side = (0..lines).map(|l| (y_of_line(l) > half).then_some(p_contact)).collect();
    let right_side = (0..lines).map(|l| (y_of_line(l) <= half).then_some(n_contact)).collect();
    let bc = DDBoundary::new(
        vec![
            [DDSide::Segments(left_side), DDSide::Segments(right_side)],
            [DDSide::Insulating, DDSide::Insulating],
        ],
        gamma,
    )?;
    let system = DDSystem::new(mesh, doping, bc, scheme)?;
    let initial = system.state(n0, p0, T::zero())?;
    Ok(Diode1D { system, initial })
}
