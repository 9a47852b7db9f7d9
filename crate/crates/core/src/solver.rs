//! Semi-discrete assembly and explicit Euler time stepping.
//!
//! A [`Discretization`] bundles a model, a mesh, boundary conditions and a
//! flux scheme, and precomputes the potential difference quotients at every
//! interface. In several dimensions the right-hand side is the unsplit sum of
//! the one-dimensional flux differences along each axis.

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::flux::{self, FluxKind, FluxScheme, InterfaceStencil};
use crate::mesh::MeshND;
use crate::model::ProblemModel;
use crate::quadrature::gauss_legendre_3;
use crate::real::Real;

/// Boundary treatment of one side of one axis.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySide<T> {
    Periodic,
    /// No flux crosses the face; ghosts mirror the interior.
    ZeroFlux,
    /// Ghost cells carry the boundary value, placed on the face.
    Dirichlet(T),
    /// Mirrored ghosts, but the boundary flux is computed and mass may leave.
    Outflow,
    /// Per-face data along a side: `Some(v)` is a Dirichlet face, `None` an
    /// insulating one. Indexed by the line number along the axis.
    Faces(Vec<Option<T>>),
}

/// What a single face of a line sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceKind<T> {
    Periodic,
    ZeroFlux,
    Dirichlet(T),
    Outflow,
}

impl<T: Real> BoundarySide<T> {
    pub fn face(&self, line: usize) -> FaceKind<T> {
        match self {
            BoundarySide::Periodic => FaceKind::Periodic,
            BoundarySide::ZeroFlux => FaceKind::ZeroFlux,
            BoundarySide::Dirichlet(v) => FaceKind::Dirichlet(*v),
            BoundarySide::Outflow => FaceKind::Outflow,
            BoundarySide::Faces(faces) => match faces[line] {
                Some(v) => FaceKind::Dirichlet(v),
                None => FaceKind::ZeroFlux,
            },
        }
    }

    /// True when no mass can cross this side.
    pub fn is_closed(&self) -> bool {
        matches!(self, BoundarySide::Periodic | BoundarySide::ZeroFlux)
    }
}

/// Lower and upper side for every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition<T> {
    sides: Vec<[BoundarySide<T>; 2]>,
}

impl<T: Real> BoundaryCondition<T> {
    pub fn new(sides: Vec<[BoundarySide<T>; 2]>) -> Result<Self> {
        for (axis, [lo, hi]) in sides.iter().enumerate() {
            let lo_p = matches!(lo, BoundarySide::Periodic);
            let hi_p = matches!(hi, BoundarySide::Periodic);
            if lo_p != hi_p {
                return Err(Error::InvalidBoundary(format!(
                    "axis {axis}: periodic must be declared on both sides"
                )));
            }
        }
        Ok(Self { sides })
    }

    /// The same side on every boundary of a `dim`-dimensional box.
    pub fn uniform(dim: usize, side: BoundarySide<T>) -> Self {
        Self {
            sides: vec![[side.clone(), side]; dim],
        }
    }

    pub fn periodic(dim: usize) -> Self {
        Self::uniform(dim, BoundarySide::Periodic)
    }

    pub fn zero_flux(dim: usize) -> Self {
        Self::uniform(dim, BoundarySide::ZeroFlux)
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn side(&self, axis: usize, upper: bool) -> &BoundarySide<T> {
        &self.sides[axis][usize::from(upper)]
    }

    /// True when every side is periodic or zero-flux, so mass is conserved.
    pub fn is_closed(&self) -> bool {
        self.sides.iter().flatten().all(BoundarySide::is_closed)
    }

    fn check_mesh(&self, mesh: &MeshND<T>) -> Result<()> {
        if self.dim() != mesh.dim() {
            return Err(Error::InvalidBoundary(format!(
                "boundary conditions for {} axes on a {}-dimensional mesh",
                self.dim(),
                mesh.dim()
            )));
        }
        for (axis, pair) in self.sides.iter().enumerate() {
            for side in pair {
                if let BoundarySide::Faces(faces) = side {
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
        Ok(())
    }
}

/// Extends one line of cell values by two ghost cells per side.
///
/// Periodic sides wrap, zero-flux and outflow sides mirror (`ghost₁ = U₁`,
/// `ghost₂ = U₂` counted outward), Dirichlet sides repeat the boundary value.
pub fn ghost_fill<T: Real>(values: &[T], lower: FaceKind<T>, upper: FaceKind<T>) -> Vec<T> {
    let mut ext = vec![T::zero(); values.len() + 4];
    fill_line(values.iter().copied(), values.len(), lower, upper, &mut ext);
    ext
}

fn fill_line<T: Real, I: Iterator<Item = T>>(
    values: I,
    n: usize,
    lower: FaceKind<T>,
    upper: FaceKind<T>,
    ext: &mut [T],
) {
    for (k, v) in values.enumerate() {
        ext[k + 2] = v;
    }
    let second = if n > 1 { 1 } else { 0 };
    match lower {
        FaceKind::Periodic => {
            ext[1] = ext[n + 1];
            ext[0] = ext[n + 1 - second];
        }
        FaceKind::ZeroFlux | FaceKind::Outflow => {
            ext[1] = ext[2];
            ext[0] = ext[2 + second];
        }
        FaceKind::Dirichlet(v) => {
            ext[1] = v;
            ext[0] = v;
        }
    }
    match upper {
        FaceKind::Periodic => {
            ext[n + 2] = ext[2];
            ext[n + 3] = ext[2 + second];
        }
        FaceKind::ZeroFlux | FaceKind::Outflow => {
            ext[n + 2] = ext[n + 1];
            ext[n + 3] = ext[n + 1 - second];
        }
        FaceKind::Dirichlet(v) => {
            ext[n + 2] = v;
            ext[n + 3] = v;
        }
    }
}

/// Cell averages at a time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Real> State<T> {
    pub fn new(values: Vec<T>, time: T) -> Self {
        Self { values, time }
    }
}

/// Cell averages of `u0` by the tensorized three-point Gauss-Legendre rule.
pub fn project_initial<T: Real, F: Fn(&[T]) -> T>(u0: F, mesh: &MeshND<T>) -> State<T> {
    let (nodes, weights) = gauss_legendre_3::<T>();
    let d = mesh.dim();
    let n_points = 3usize.pow(d as u32);
    let mut values = Vec::with_capacity(mesh.n_cells());
    let mut x = [T::zero(); 3];
    for cell in 0..mesh.n_cells() {
        let multi = mesh.multi_index(cell);
        let mut acc = T::zero();
        for p in 0..n_points {
            let mut w = T::one();
            let mut rest = p;
            for j in 0..d {
                let q = rest % 3;
                rest /= 3;
                let axis = mesh.axis(j);
                let c = axis.centers()[multi[j]];
                let half = axis.widths()[multi[j]] / T::lit(2.0);
                x[j] = c + half * nodes[q];
                w = w * weights[q] / T::lit(2.0);
            }
            acc = acc + w * u0(&x[..d]);
        }
        values.push(acc);
    }
    State::new(values, T::zero())
}

/// Time step selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtMode {
    Fixed,
    CflAuto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub flux: FluxScheme,
    pub dt: T,
    pub t_final: T,
    pub cfl_safety: T,
    pub dt_mode: DtMode,
    pub record_every: usize,
    pub snapshot_times: Vec<T>,
}

impl<T: Real> SolverConfig<T> {
    pub fn fixed(flux: FluxScheme, dt: T, t_final: T) -> Self {
        Self {
            flux,
            dt,
            t_final,
            cfl_safety: T::one(),
            dt_mode: DtMode::Fixed,
            record_every: 1,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt_mode == DtMode::Fixed && !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.cfl_safety > T::zero() && self.cfl_safety <= T::one()) {
            return Err(Error::InvalidConfig(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.t_final >= T::zero() && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_final must be finite and >= 0, got {}",
                self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default, Clone)]
pub struct Workspace<T> {
    cell_h: Vec<T>,
    ext: Vec<T>,
    ext_h: Vec<T>,
    fluxes: Vec<T>,
    rhs: Vec<T>,
}

/// A model discretized on a mesh with boundary conditions and a flux scheme.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    model: ProblemModel<T>,
    mesh: MeshND<T>,
    bc: BoundaryCondition<T>,
    scheme: FluxScheme,
    /// Per axis: interface distances, `n + 1` entries.
    dist: Vec<Vec<T>>,
    /// Per axis: `n_lines × (n + 1)` potential difference quotients.
    dv: Vec<Vec<T>>,
}

impl<T: Real> Discretization<T> {
    /// Discretizes with the model's own potential.
    pub fn new(
        model: ProblemModel<T>,
        mesh: MeshND<T>,
        bc: BoundaryCondition<T>,
        scheme: FluxScheme,
    ) -> Result<Self> {
        bc.check_mesh(&mesh)?;
        scheme.check_model(&model)?;
        let dist = interface_distances(&mesh, &bc);
        let mut disc = Self {
            model,
            mesh,
            bc,
            scheme,
            dist,
            dv: Vec::new(),
        };
        disc.dv = disc.model_potential_quotients();
        Ok(disc)
    }

    fn model_potential_quotients(&self) -> Vec<Vec<T>> {
        let potential = *self.model.potential();
        (0..self.mesh.dim())
            .map(|axis| {
                let ax = self.mesh.axis(axis);
                let n = ax.n_cells();
                let x = ax.centers();
                let dist = &self.dist[axis];
                let mut per_axis = vec![T::zero(); n + 1];
                for k in 1..n {
                    per_axis[k] = potential.difference_quotient(axis, x[k - 1], x[k], dist[k]);
                }
                if matches!(self.bc.side(axis, false), BoundarySide::Periodic) {
                    let q = potential.difference_quotient(axis, x[n - 1], x[0] + ax.length(), dist[0]);
                    per_axis[0] = q;
                    per_axis[n] = q;
                } else {
                    per_axis[0] = potential.difference_quotient(axis, ax.lower(), x[0], dist[0]);
                    per_axis[n] = potential.difference_quotient(axis, x[n - 1], ax.upper(), dist[n]);
                }
                per_axis.repeat(self.mesh.n_lines(axis))
            })
            .collect()
    }

    /// Replaces the potential by cell values `v` (a potential defined per
    /// cell, as produced by a Poisson solve), scaled by `sign`. `boundary`
    /// gives the potential on Dirichlet faces; it is called with
    /// `(axis, upper, line)` and may return `None` for faces whose flux is
    /// not computed.
    pub fn set_cell_potential<B>(&mut self, v: &[T], sign: T, boundary: B)
    where
        B: Fn(usize, bool, usize) -> Option<T>,
    {
        let mesh = &self.mesh;
        for axis in 0..mesh.dim() {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            let dist = &self.dist[axis];
            let out = &mut self.dv[axis];
            for line in 0..mesh.n_lines(axis) {
                let start = mesh.line_start(axis, line);
                let row = &mut out[line * (n + 1)..(line + 1) * (n + 1)];
                for k in 1..n {
                    let a = v[start + (k - 1) * stride];
                    let b = v[start + k * stride];
                    row[k] = sign * (b - a) / dist[k];
                }
                let first = v[start];
                let last = v[start + (n - 1) * stride];
                if matches!(self.bc.side(axis, false), BoundarySide::Periodic) {
                    let q = sign * (first - last) / dist[0];
                    row[0] = q;
                    row[n] = q;
                } else {
                    row[0] = boundary(axis, false, line)
                        .map_or(T::zero(), |vb| sign * (first - vb) / dist[0]);
                    row[n] = boundary(axis, true, line)
                        .map_or(T::zero(), |vb| sign * (vb - last) / dist[n]);
                }
            }
        }
    }

    pub fn model(&self) -> &ProblemModel<T> {
        &self.model
    }

    pub fn mesh(&self) -> &MeshND<T> {
        &self.mesh
    }

    pub fn bc(&self) -> &BoundaryCondition<T> {
        &self.bc
    }

    pub fn scheme(&self) -> FluxScheme {
        self.scheme
    }

    pub fn interface_distances(&self, axis: usize) -> &[T] {
        &self.dist[axis]
    }

    /// Potential difference quotients along `axis`, line-major.
    pub fn potential_quotients(&self, axis: usize) -> &[T] {
        &self.dv[axis]
    }

    /// `h̃` on every cell, the input to the fully upwind velocities.
    fn fill_cell_h(&self, values: &[T], out: &mut Vec<T>) {
        out.clear();
        match self.scheme.kind() {
            FluxKind::Fu1 | FluxKind::Fu2 => out.extend(values.iter().map(|&u| self.model.htilde(u))),
            FluxKind::Cu => out.extend(values.iter().map(|&u| self.model.r(u))),
            FluxKind::Sgext => {}
        }
    }

    /// Calls `visit(axis, line, faces, fluxes)` with the interface fluxes of
    /// every grid line; `fluxes[k]` is the flux through face `k` of the line
    /// (`k = 0` and `k = n` are boundary faces).
    fn for_each_line_flux<F>(&self, values: &[T], ws: &mut Workspace<T>, mut visit: F)
    where
        F: FnMut(usize, usize, &[T], &[T], &[T]),
    {
        let mut cell_h = std::mem::take(&mut ws.cell_h);
        self.fill_cell_h(values, &mut cell_h);
        let mesh = &self.mesh;
        for axis in 0..mesh.dim() {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            ws.ext.resize(n + 4, T::zero());
            ws.ext_h.resize(n + 4, T::zero());
            ws.fluxes.resize(n + 1, T::zero());
            let lower_side = self.bc.side(axis, false);
            let upper_side = self.bc.side(axis, true);
            for line in 0..mesh.n_lines(axis) {
                let start = mesh.line_start(axis, line);
                let lower = lower_side.face(line);
                let upper = upper_side.face(line);
                let cells = (0..n).map(|k| values[start + k * stride]);
                fill_line(cells, n, lower, upper, &mut ws.ext);
                if !cell_h.is_empty() {
                    let hs = (0..n).map(|k| cell_h[start + k * stride]);
                    let ghost_h = |face: FaceKind<T>| match face {
                        FaceKind::Dirichlet(v) => FaceKind::Dirichlet(self.cell_function(v)),
                        other => other,
                    };
                    fill_line(hs, n, ghost_h(lower), ghost_h(upper), &mut ws.ext_h);
                }
                let dv = &self.dv[axis][line * (n + 1)..(line + 1) * (n + 1)];
                self.line_fluxes(&ws.ext, &ws.ext_h, dv, &self.dist[axis], lower, upper, &mut ws.fluxes);
                visit(axis, line, &ws.ext, dv, &ws.fluxes);
            }
        }
        ws.cell_h = cell_h;
    }

    fn cell_function(&self, u: T) -> T {
        match self.scheme.kind() {
            FluxKind::Cu => self.model.r(u),
            _ => self.model.htilde(u),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn line_fluxes(
        &self,
        ext: &[T],
        ext_h: &[T],
        dv: &[T],
        dist: &[T],
        lower: FaceKind<T>,
        upper: FaceKind<T>,
        out: &mut [T],
    ) {
        let n = ext.len() - 4;
        let model = &self.model;
        let periodic = matches!(lower, FaceKind::Periodic);
        let first = if periodic { 1 } else { 0 };
        for k in first..=n {
            let face = if k == 0 {
                Some(lower)
            } else if k == n {
                Some(upper)
            } else {
                None
            };
            if matches!(face, Some(FaceKind::ZeroFlux)) {
                out[k] = T::zero();
                continue;
            }
            let (a, b) = (ext[k + 1], ext[k + 2]);
            out[k] = match self.scheme.kind() {
                FluxKind::Fu1 => {
                    let vel = flux::velocity_from(model, dv[k], dist[k], a, b, ext_h[k + 1], ext_h[k + 2]);
                    flux::fully_upwind(model, vel, a, b, a, b)
                }
                FluxKind::Fu2 => {
                    let vel = flux::velocity_from(model, dv[k], dist[k], a, b, ext_h[k + 1], ext_h[k + 2]);
                    let st = InterfaceStencil::new([ext[k], a, b, ext[k + 3]], dv[k], dist[k]);
                    let (um, up) = flux::reconstruct(&st);
                    flux::fully_upwind(model, vel, a, b, um, up)
                }
                FluxKind::Cu => flux::cu_from(dv[k], dist[k], a, b, ext_h[k + 1], ext_h[k + 2]),
                FluxKind::Sgext => flux::sgext_from(dv[k], dist[k], a, b, flux::dr_mean(model, a, b)),
            };
        }
        if periodic {
            out[0] = out[n];
        }
    }

    /// Semi-discrete right-hand side `dU/dt` into `out`.
    pub fn rhs_into(&self, values: &[T], out: &mut [T], ws: &mut Workspace<T>) -> Result<()> {
        let mesh = &self.mesh;
        if values.len() != mesh.n_cells() || out.len() != mesh.n_cells() {
            return Err(Error::ShapeMismatch {
                expected: mesh.n_cells(),
                got: values.len().min(out.len()),
            });
        }
        out.iter_mut().for_each(|o| *o = T::zero());
        self.for_each_line_flux(values, ws, |axis, line, _, _, fluxes| {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            let start = mesh.line_start(axis, line);
            let widths = mesh.axis(axis).widths();
            for k in 0..n {
                let cell = start + k * stride;
                out[cell] = out[cell] - (fluxes[k + 1] - fluxes[k]) / widths[k];
            }
        });
        Ok(())
    }

    /// Semi-discrete right-hand side `dU/dt`.
    pub fn assemble_rhs(&self, state: &State<T>) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.mesh.n_cells()];
        let mut ws = Workspace::default();
        self.rhs_into(&state.values, &mut out, &mut ws)?;
        Ok(out)
    }

    /// Interface fluxes of every grid line, per axis in line-major order
    /// (`n_lines × (n + 1)` entries).
    pub fn interface_fluxes(&self, values: &[T]) -> Vec<Vec<T>> {
        let mut ws = Workspace::default();
        let mut out: Vec<Vec<T>> = (0..self.mesh.dim()).map(|_| Vec::new()).collect();
        self.for_each_line_flux(values, &mut ws, |axis, _, _, _, fluxes| {
            out[axis].extend_from_slice(fluxes);
        });
        out
    }

    /// Interface velocities `A = -dV - dh̃` of every face that carries a flux,
    /// together with the two traces used for the dissipation, the face area
    /// and the interface distance. Zero-flux faces are skipped.
    pub(crate) fn for_each_face<F>(&self, values: &[T], mut visit: F)
    where
        F: FnMut(T, T, T, T, T),
    {
        let mesh = &self.mesh;
        let model = &self.model;
        let mut ext = Vec::new();
        let mut ext_h = Vec::new();
        let cell_h: Vec<T> = values.iter().map(|&u| model.htilde(u)).collect();
        for axis in 0..mesh.dim() {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            ext.resize(n + 4, T::zero());
            ext_h.resize(n + 4, T::zero());
            let dist = &self.dist[axis];
            for line in 0..mesh.n_lines(axis) {
                let start = mesh.line_start(axis, line);
                let lower = self.bc.side(axis, false).face(line);
                let upper = self.bc.side(axis, true).face(line);
                fill_line((0..n).map(|k| values[start + k * stride]), n, lower, upper, &mut ext);
                let hface = |f: FaceKind<T>| match f {
                    FaceKind::Dirichlet(v) => FaceKind::Dirichlet(model.htilde(v)),
                    other => other,
                };
                fill_line((0..n).map(|k| cell_h[start + k * stride]), n, hface(lower), hface(upper), &mut ext_h);
                let dv = &self.dv[axis][line * (n + 1)..(line + 1) * (n + 1)];
                let area = mesh.face_area(axis, start);
                let periodic = matches!(lower, FaceKind::Periodic);
                for k in usize::from(periodic)..=n {
                    let face = if k == 0 {
                        Some(lower)
                    } else if k == n {
                        Some(upper)
                    } else {
                        None
                    };
                    if matches!(face, Some(FaceKind::ZeroFlux | FaceKind::Outflow)) {
                        continue;
                    }
                    let (a, b) = (ext[k + 1], ext[k + 2]);
                    let vel = flux::velocity_from(model, dv[k], dist[k], a, b, ext_h[k + 1], ext_h[k + 2]);
                    let (um, up) = if self.scheme.kind() == FluxKind::Fu2 {
                        flux::reconstruct(&InterfaceStencil::new([ext[k], a, b, ext[k + 3]], dv[k], dist[k]))
                    } else {
                        (a, b)
                    };
                    visit(vel, um, up, area, dist[k]);
                }
            }
        }
    }

    /// Largest stable step: `safety / (2 Σ_axes max |A| α / min width)`,
    /// which in one dimension on a uniform grid is
    /// `safety · Δx² / (2 max |V(x_{i+1}) - V(x_i) + h(U_{i+1}) - h(U_i)|)`.
    /// Returns `+∞` when every velocity vanishes.
    pub fn cfl_dt(&self, values: &[T], safety: T) -> T {
        let mesh = &self.mesh;
        let model = &self.model;
        let mut per_axis = vec![T::zero(); mesh.dim()];
        self.for_each_line_flux_velocities(values, |axis, vel, a, b| {
            let speed = vel.abs() * model.alpha_bound(a, b);
            if speed > per_axis[axis] {
                per_axis[axis] = speed;
            }
        });
        let rate = per_axis
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (axis, &s)| acc + s / mesh.axis(axis).min_width());
        if rate == T::zero() {
            T::infinity()
        } else {
            safety / (T::lit(2.0) * rate)
        }
    }

    fn for_each_line_flux_velocities<F: FnMut(usize, T, T, T)>(&self, values: &[T], mut visit: F) {
        let mesh = &self.mesh;
        let model = &self.model;
        let cell_h: Vec<T> = values.iter().map(|&u| model.htilde(u)).collect();
        let mut ext = Vec::new();
        let mut ext_h = Vec::new();
        for axis in 0..mesh.dim() {
            let n = mesh.counts()[axis];
            let stride = mesh.strides()[axis];
            ext.resize(n + 4, T::zero());
            ext_h.resize(n + 4, T::zero());
            for line in 0..mesh.n_lines(axis) {
                let start = mesh.line_start(axis, line);
                let lower = self.bc.side(axis, false).face(line);
                let upper = self.bc.side(axis, true).face(line);
                fill_line((0..n).map(|k| values[start + k * stride]), n, lower, upper, &mut ext);
                let hface = |f: FaceKind<T>| match f {
                    FaceKind::Dirichlet(v) => FaceKind::Dirichlet(model.htilde(v)),
                    other => other,
                };
                fill_line((0..n).map(|k| cell_h[start + k * stride]), n, hface(lower), hface(upper), &mut ext_h);
                let dv = &self.dv[axis][line * (n + 1)..(line + 1) * (n + 1)];
                for k in 0..=n {
                    let closed = (k == 0 && lower == FaceKind::ZeroFlux) || (k == n && upper == FaceKind::ZeroFlux);
                    if closed {
                        continue;
                    }
                    let (a, b) = (ext[k + 1], ext[k + 2]);
                    let vel = flux::velocity_from(model, dv[k], self.dist[axis][k], a, b, ext_h[k + 1], ext_h[k + 2]);
                    visit(axis, vel, a, b);
                }
            }
        }
    }

    /// Checks that every value is finite and inside the admissible range up
    /// to `1e-10`.
    pub fn check_range(&self, values: &[T], step: usize) -> Result<()> {
        let tol = T::lit(1e-10);
        let (lo, hi) = self.model.admissible_range();
        for (cell, &v) in values.iter().enumerate() {
            let reason = if !v.is_finite() {
                Some("non-finite value")
            } else if v < lo - tol {
                Some("below the admissible range")
            } else if hi.is_some_and(|h| v > h + tol) {
                Some("above the admissible range")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::StepFailure {
                    step,
                    cell,
                    value: v.to_f64_lossy(),
                    reason: reason.into(),
                });
            }
        }
        Ok(())
    }

    /// One forward Euler step of length `dt`.
    pub fn euler_step(&self, state: &State<T>, dt: T) -> Result<State<T>> {
        let mut ws = Workspace::default();
        let mut next = state.clone();
        self.euler_step_in_place(&mut next, dt, 0, &mut ws)?;
        Ok(next)
    }

    /// Advances `state` by `dt` in place; `step` labels failures.
    pub fn euler_step_in_place(&self, state: &mut State<T>, dt: T, step: usize, ws: &mut Workspace<T>) -> Result<()> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {dt}")));
        }
        let mut rhs = std::mem::take(&mut ws.rhs);
        rhs.resize(state.values.len(), T::zero());
        self.rhs_into(&state.values, &mut rhs, ws)?;
        for (u, r) in state.values.iter_mut().zip(&rhs) {
            *u = *u + dt * *r;
        }
        ws.rhs = rhs;
        state.time = state.time + dt;
        self.check_range(&state.values, step)
    }

    /// Integrates to `config.t_final`, recording diagnostics every
    /// `record_every` steps and at the end.
    pub fn run(&self, config: &SolverConfig<T>, initial: State<T>, equilibrium: Option<&[T]>) -> Result<RunOutput<T>> {
        config.validate()?;
        if config.flux != self.scheme {
            return Err(Error::InvalidConfig(format!(
                "configuration asks for {} but the discretization uses {}",
                config.flux.kind(),
                self.scheme.kind()
            )));
        }
        if initial.values.len() != self.mesh.n_cells() {
            return Err(Error::ShapeMismatch {
                expected: self.mesh.n_cells(),
                got: initial.values.len(),
            });
        }
        if let Some(eq) = equilibrium {
            if eq.len() != self.mesh.n_cells() {
                return Err(Error::ShapeMismatch {
                    expected: self.mesh.n_cells(),
                    got: eq.len(),
                });
            }
        }
        self.check_range(&initial.values, 0)?;
        let mut state = initial;
        let t0 = state.time;
        let mut records = vec![self.record(&state, equilibrium)];
        let mut snapshots = Vec::new();
        let mut pending: Vec<T> = config.snapshot_times.clone();
        pending.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mut pending = pending.into_iter().peekable();
        let take_snapshots = |state: &State<T>, pending: &mut std::iter::Peekable<std::vec::IntoIter<T>>, out: &mut Vec<State<T>>| {
            while let Some(&t) = pending.peek() {
                if state.time >= t - T::lit(1e-12) * t.abs().max(T::one()) {
                    out.push(state.clone());
                    pending.next();
                } else {
                    break;
                }
            }
        };
        take_snapshots(&state, &mut pending, &mut snapshots);

        let horizon = config.t_final;
        let mut ws = Workspace::default();
        let mut step = 0usize;
        let tiny = T::lit(1e-12);
        loop {
            let remaining = horizon - state.time;
            let dt = match config.dt_mode {
                DtMode::Fixed => config.dt,
                DtMode::CflAuto => {
                    let dt = self.cfl_dt(&state.values, config.cfl_safety);
                    if dt.is_finite() {
                        dt
                    } else {
                        remaining
                    }
                }
            };
            if remaining <= tiny * dt.max(horizon.abs()).min(dt) {
                break;
            }
            let (dt_step, last) = if remaining <= dt * (T::one() + T::lit(1e-9)) {
                (remaining, true)
            } else {
                (dt, false)
            };
            step += 1;
            self.euler_step_in_place(&mut state, dt_step, step, &mut ws)?;
            if config.dt_mode == DtMode::Fixed {
                // time from the step count
                state.time = if last {
                    horizon
                } else {
                    t0 + T::from_usize_lossy(step) * config.dt
                };
            }
            if step % config.record_every == 0 || last {
                records.push(self.record(&state, equilibrium));
            }
            take_snapshots(&state, &mut pending, &mut snapshots);
            if last {
                break;
            }
        }
        if records.last().map(|r| r.time) != Some(state.time) {
            records.push(self.record(&state, equilibrium));
        }
        Ok(RunOutput {
            state,
            records,
            snapshots,
            steps: step,
        })
    }

    /// Diagnostics of one state.
    pub fn record(&self, state: &State<T>, equilibrium: Option<&[T]>) -> DiagnosticsRecord<T> {
        let mesh = &self.mesh;
        let mass = mesh.integrate(&state.values);
        let dissipation = diagnostics::discrete_dissipation(self, &state.values);
        let (entropy, l1) = match equilibrium {
            Some(eq) => {
                let entropy = diagnostics::discrete_entropy(&state.values, eq, &self.model, mesh)
                    .map_or(T::nan(), |e| e.value);
                let l1 = diagnostics::l1_distance(&state.values, eq, mesh).unwrap_or(T::nan());
                (entropy, l1)
            }
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
}

fn interface_distances<T: Real>(mesh: &MeshND<T>, bc: &BoundaryCondition<T>) -> Vec<Vec<T>> {
    (0..mesh.dim())
        .map(|axis| {
            let ax = mesh.axis(axis);
            let mut d = ax.interface_distances().to_vec();
            if matches!(bc.side(axis, false), BoundarySide::Periodic) {
                let w = ax.widths();
                let wrap = (w[0] + w[w.len() - 1]) / T::lit(2.0);
                let n = d.len() - 1;
                d[0] = wrap;
                d[n] = wrap;
            }
            d
        })
        .collect()
}

/// Result of [`Discretization::run`].
#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub state: State<T>,
    pub records: Vec<DiagnosticsRecord<T>>,
    pub snapshots: Vec<State<T>>,
    pub steps: usize,
}
