//! Interface fluxes: first and second order fully upwind (FU1, FU2), the
//! classical upwind flux (CU) and the extended Scharfetter-Gummel flux (SGext).
//!
//! All fluxes approximate `-(f(u) ∂ₓV + ∂ₓr(u))` at the interface between
//! cells `i` and `i + 1`; a positive flux moves mass towards `i + 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemModel;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxKind {
    Fu1,
    Fu2,
    Cu,
    Sgext,
}

impl FluxKind {
    pub const ALL: [FluxKind; 4] = [FluxKind::Fu1, FluxKind::Fu2, FluxKind::Cu, FluxKind::Sgext];

    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Fu1 => "fu1",
            FluxKind::Fu2 => "fu2",
            FluxKind::Cu => "cu",
            FluxKind::Sgext => "sgext",
        }
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fu1" => Ok(FluxKind::Fu1),
            "fu2" => Ok(FluxKind::Fu2),
            "cu" => Ok(FluxKind::Cu),
            "sgext" | "sg" => Ok(FluxKind::Sgext),
            other => Err(Error::InvalidConfig(format!(
                "unknown flux scheme `{other}` (expected fu1, fu2, cu or sgext)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    None,
    VanLeer,
}

/// A validated flux selection: FU2 always carries the Van Leer limiter and
/// every other scheme carries none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FluxScheme {
    kind: FluxKind,
    limiter: Limiter,
}

impl FluxScheme {
    pub fn new(kind: FluxKind, limiter: Limiter) -> Result<Self> {
        let expected = Self::for_kind(kind).limiter;
        if limiter != expected {
            return Err(Error::InvalidConfig(format!(
                "flux {kind} requires limiter {expected:?}, got {limiter:?}"
            )));
        }
        Ok(Self { kind, limiter })
    }

    pub fn for_kind(kind: FluxKind) -> Self {
        let limiter = match kind {
            FluxKind::Fu2 => Limiter::VanLeer,
            _ => Limiter::None,
        };
        Self { kind, limiter }
    }

    pub fn kind(&self) -> FluxKind {
        self.kind
    }

    pub fn limiter(&self) -> Limiter {
        self.limiter
    }

    /// Whether the scheme needs the model to have linear convection.
    pub fn requires_linear_convection(&self) -> bool {
        matches!(self.kind, FluxKind::Cu | FluxKind::Sgext)
    }

    pub fn check_model<T: Real>(&self, model: &ProblemModel<T>) -> Result<()> {
        if self.requires_linear_convection() && !model.is_linear_convection() {
            return Err(Error::UnsupportedScheme {
                scheme: self.kind.name(),
                reason: format!("model `{}` has nonlinear convection", model.name()),
            });
        }
        Ok(())
    }
}

impl From<FluxKind> for FluxScheme {
    fn from(kind: FluxKind) -> Self {
        Self::for_kind(kind)
    }
}

/// The four cell averages around interface `i + 1/2`, the potential
/// difference quotient and the interface distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceStencil<T> {
    pub u_mm: T,
    pub u_m: T,
    pub u_p: T,
    pub u_pp: T,
    pub dv: T,
    pub dist: T,
}

impl<T: Real> InterfaceStencil<T> {
    pub fn new(values: [T; 4], dv: T, dist: T) -> Self {
        Self {
            u_mm: values[0],
            u_m: values[1],
            u_p: values[2],
            u_pp: values[3],
            dv,
            dist,
        }
    }

    fn sup_norm(&self) -> T {
        self.u_mm
            .abs()
            .max(self.u_m.abs())
            .max(self.u_p.abs())
            .max(self.u_pp.abs())
    }
}

/// Van Leer limiter `φ(θ) = (θ + |θ|) / (1 + |θ|)`.
#[inline]
pub fn van_leer<T: Real>(theta: T) -> T {
    (theta + theta.abs()) / (T::one() + theta.abs())
}

/// Half of the limited slope `½ φ(θ) (c - b)` with `θ = (b - a) / (c - b)`;
/// zero when `|c - b|` is below `floor`.
#[inline]
fn half_slope<T: Real>(a: T, b: T, c: T, floor: T) -> T {
    let den = c - b;
    if den.abs() < floor {
        return T::zero();
    }
    T::lit(0.5) * van_leer((b - a) / den) * den
}

/// MUSCL traces `(u₋, u₊)` on both sides of the interface.
pub fn reconstruct<T: Real>(stencil: &InterfaceStencil<T>) -> (T, T) {
    let floor = T::lit(1e-14) * stencil.sup_norm().max(T::one());
    let s = stencil;
    let u_minus = s.u_m + half_slope(s.u_mm, s.u_m, s.u_p, floor);
    let u_plus = s.u_p - half_slope(s.u_m, s.u_p, s.u_pp, floor);
    (u_minus, u_plus)
}

/// Discrete derivative of `h̃` across the interface from precomputed values
/// `ha = h̃(a)`, `hb = h̃(b)`.
///
/// When one side sits where `h̃` is infinite (vacuum for logarithmic
/// enthalpies, `u = 1` for fermions) the difference of `h̃` is replaced by the
/// chord `(r(b) - r(a)) / (dist · (f(a) + f(b))/2)`; `A · f` is then the
/// two-point diffusion flux. If the mean of `f` is zero or
/// subnormal the interface carries no diffusion velocity.
#[inline]
pub fn htilde_difference<T: Real>(model: &ProblemModel<T>, a: T, b: T, ha: T, hb: T, dist: T) -> T {
    if ha.is_finite() && hb.is_finite() {
        return (hb - ha) / dist;
    }
    let f_mean = T::lit(0.5) * (model.f(a) + model.f(b));
    if f_mean >= T::min_positive_value() {
        (model.r(b) - model.r(a)) / f_mean / dist
    } else {
        T::zero()
    }
}

/// Interface velocity `A = -dV - dh̃` from precomputed `h̃` values.
#[inline]
pub fn velocity_from<T: Real>(
    model: &ProblemModel<T>,
    dv: T,
    dist: T,
    a: T,
    b: T,
    ha: T,
    hb: T,
) -> T {
    -dv - htilde_difference(model, a, b, ha, hb, dist)
}

/// Interface velocity `A = -dV - (h̃(U_{i+1}) - h̃(U_i)) / dist`.
pub fn velocity<T: Real>(model: &ProblemModel<T>, stencil: &InterfaceStencil<T>) -> T {
    velocity_from(
        model,
        stencil.dv,
        stencil.dist,
        stencil.u_m,
        stencil.u_p,
        model.htilde(stencil.u_m),
        model.htilde(stencil.u_p),
    )
}

/// Fully upwind flux for velocity `A`, traces `(um, up)` and the cell
/// averages `(a, b)` that bound `α`.
#[inline]
pub fn fully_upwind<T: Real>(model: &ProblemModel<T>, velocity: T, a: T, b: T, um: T, up: T) -> T {
    let half = T::lit(0.5);
    if model.is_linear_convection() {
        return half * velocity * (um + up) - half * velocity.abs() * (up - um);
    }
    let alpha = model.alpha_bound(a, b);
    half * velocity * (model.f(um) + model.f(up)) - half * velocity.abs() * alpha * (up - um)
}

pub fn flux_fu1<T: Real>(model: &ProblemModel<T>, stencil: &InterfaceStencil<T>) -> T {
    let a = velocity(model, stencil);
    fully_upwind(model, a, stencil.u_m, stencil.u_p, stencil.u_m, stencil.u_p)
}

/// Second order fully upwind flux. `A` and `α` use the cell averages; only
/// the traces are reconstructed. With `Limiter::None` this is FU1.
pub fn flux_fu2<T: Real>(model: &ProblemModel<T>, stencil: &InterfaceStencil<T>, limiter: Limiter) -> T {
    let a = velocity(model, stencil);
    let (um, up) = match limiter {
        Limiter::VanLeer => reconstruct(stencil),
        Limiter::None => (stencil.u_m, stencil.u_p),
    };
    fully_upwind(model, a, stencil.u_m, stencil.u_p, um, up)
}

#[inline]
pub(crate) fn cu_from<T: Real>(dv: T, dist: T, a: T, b: T, ra: T, rb: T) -> T {
    let w = -dv;
    w.pos() * a - w.neg_part() * b - (rb - ra) / dist
}

/// Classical upwind flux; requires linear convection.
pub fn flux_cu<T: Real>(model: &ProblemModel<T>, stencil: &InterfaceStencil<T>) -> Result<T> {
    FluxScheme::for_kind(FluxKind::Cu).check_model(model)?;
    let s = stencil;
    Ok(cu_from(s.dv, s.dist, s.u_m, s.u_p, model.r(s.u_m), model.r(s.u_p)))
}

/// Bernoulli function `B(x) = x / (eˣ - 1)`, `B(0) = 1`.
#[inline]
pub fn bernoulli<T: Real>(x: T) -> T {
    if x.abs() <= T::lit(1e-8) {
        T::one() - x / T::lit(2.0) + x * x / T::lit(12.0)
    } else {
        x / x.exp_m1()
    }
}

/// Logarithmic mean of the diffusion, `(h(b) - h(a)) / (log b - log a)`,
/// falling back to `r'((a + b)/2)` when `ab = 0` or `a ≈ b`.
pub fn dr_mean<T: Real>(model: &ProblemModel<T>, a: T, b: T) -> T {
    if a * b > T::zero() && (a - b).abs() > T::lit(1e-14) * a.max(b) {
        (model.h(b) - model.h(a)) / ((b - a) / a).ln_1p()
    } else {
        model.r_prime(T::lit(0.5) * (a + b))
    }
}

#[inline]
pub(crate) fn sgext_from<T: Real>(dv: T, dist: T, a: T, b: T, dr: T) -> T {
    let x = dist * dv / dr;
    if dr == T::zero() || !x.is_finite() {
        let w = -dv;
        return w.pos() * a - w.neg_part() * b;
    }
    // B(-|x|) = B(|x|) + |x|
    let b_abs = bernoulli(x.abs());
    let (b_pos, b_neg) = if x >= T::zero() { (b_abs, b_abs + x) } else { (b_abs - x, b_abs) };
    dr / dist * (b_pos * a - b_neg * b)
}

/// Extended Scharfetter-Gummel flux; requires linear convection.
pub fn flux_sgext<T: Real>(model: &ProblemModel<T>, stencil: &InterfaceStencil<T>) -> Result<T> {
    FluxScheme::for_kind(FluxKind::Sgext).check_model(model)?;
    let s = stencil;
    let dr = dr_mean(model, s.u_m, s.u_p);
    Ok(sgext_from(s.dv, s.dist, s.u_m, s.u_p, dr))
}

/// Dispatches to the flux selected by `scheme`.
pub fn flux<T: Real>(scheme: FluxScheme, model: &ProblemModel<T>, stencil: &InterfaceStencil<T>) -> Result<T> {
    match scheme.kind() {
        FluxKind::Fu1 => Ok(flux_fu1(model, stencil)),
        FluxKind::Fu2 => Ok(flux_fu2(model, stencil, scheme.limiter())),
        FluxKind::Cu => flux_cu(model, stencil),
        FluxKind::Sgext => flux_sgext(model, stencil),
    }
}
