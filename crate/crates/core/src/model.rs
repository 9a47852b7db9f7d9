//! Problem instances of `∂ₜu = div(f(u)∇V + ∇r(u))`.
//!
//! A [`ProblemModel`] combines a convection nonlinearity `f`, a diffusion
//! nonlinearity `r` and a potential `V`. From `r` it derives the enthalpy
//! `h(s) = ∫₁ˢ r'(τ)/τ dτ` and, for nonlinear convection, the function `h̃`
//! with `h̃'(u) f(u) = r'(u)`. The fully upwind fluxes only ever need `f`,
//! `f'`, `r` and `h̃`; the entropy diagnostics need the pair `(H, h)`.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::real::Real;

/// Convection nonlinearity `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convection<T> {
    /// `f(u) = u`
    Linear,
    /// `f(u) = u (1 + k u)`: fermions for `k = -1`, bosons for `k = +1`.
    Quantum { k: T },
    /// `f(u) = u² / (u² + (1 - u)²)`
    BuckleyLeverett,
}

/// Diffusion nonlinearity `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diffusion<T> {
    /// `r ≡ 0`
    None,
    /// `r(s) = s^m`, `m ≥ 1`; `m = 1` is linear diffusion with `h = log`.
    Power { m: T },
    /// `r(s) = (s - 1)³` for `s ≥ 1` and `0` below: degenerate on `[0, 1]`.
    ShiftedCubic,
    /// Capillary diffusion `r' = ε ν(s)` with `ν(s) = 4 s (1 - s)`.
    Capillary { eps: T },
}

/// Potential `V`. Every variant is separable, `V(x) = Σ_j V_j(x_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential<T> {
    /// `V ≡ 0` (or supplied externally per cell, as in the drift-diffusion system).
    Zero,
    /// `V(x) = g · x`: constant gradient per axis.
    Gradient([T; 3]),
    /// `V(x) = |x|² / 2`
    HalfSquare,
}

impl<T: Real> Potential<T> {
    pub fn value(&self, x: &[T]) -> T {
        match *self {
            Potential::Zero => T::zero(),
            Potential::Gradient(g) => x.iter().zip(g).map(|(&xi, gi)| xi * gi).sum(),
            Potential::HalfSquare => x.iter().map(|&xi| xi * xi).sum::<T>() / T::lit(2.0),
        }
    }

    /// Difference quotient `(V(x_b) - V(x_a)) / dist` between two points that
    /// differ only along `axis`. `dist` is the distance the scheme uses, which
    /// for periodic wrap-around differs from `x_b - x_a`.
    pub fn difference_quotient(&self, axis: usize, xa: T, xb: T, dist: T) -> T {
        match *self {
            Potential::Zero => T::zero(),
            Potential::Gradient(g) => g[axis],
            Potential::HalfSquare => (xb - xa) * (xa + xb) / (T::lit(2.0) * dist),
        }
    }
}

/// `x log x`, continuously extended by `0` at `x = 0`.
fn xlogx<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// One instance of the equation: the functions `f`, `r`, `V` plus the
/// admissible range of the unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemModel<T> {
    name: &'static str,
    convection: Convection<T>,
    diffusion: Diffusion<T>,
    potential: Potential<T>,
    lower: T,
    upper: Option<T>,
}

impl<T: Real> ProblemModel<T> {
    /// Assembles a model, checking that `h̃` has a closed form for the
    /// requested convection/diffusion pair.
    pub fn new(
        name: &'static str,
        convection: Convection<T>,
        diffusion: Diffusion<T>,
        potential: Potential<T>,
    ) -> Result<Self> {
        if let Diffusion::Power { m } = diffusion {
            if !(m >= T::one()) {
                return Err(Error::InvalidModel(format!(
                    "power diffusion exponent must be >= 1, got {m}"
                )));
            }
        }
        if let Diffusion::Capillary { eps } = diffusion {
            if !(eps >= T::zero()) {
                return Err(Error::InvalidModel(format!(
                    "capillary scaling must be >= 0, got {eps}"
                )));
            }
        }
        let upper = match convection {
            Convection::Linear => None,
            Convection::Quantum { k } => {
                if k != T::one() && k != -T::one() {
                    return Err(Error::InvalidModel(format!("k must be -1 or +1, got {k}")));
                }
                if diffusion != (Diffusion::Power { m: T::one() }) {
                    return Err(Error::InvalidModel(
                        "quantum convection is paired with linear diffusion only".into(),
                    ));
                }
                (k < T::zero()).then(T::one)
            }
            Convection::BuckleyLeverett => {
                if !matches!(diffusion, Diffusion::Capillary { .. } | Diffusion::None) {
                    return Err(Error::InvalidModel(
                        "Buckley-Leverett convection is paired with capillary diffusion only"
                            .into(),
                    ));
                }
                Some(T::one())
            }
        };
        Ok(Self {
            name,
            convection,
            diffusion,
            potential,
            lower: T::zero(),
            upper,
        })
    }

    /// Porous media equation: `r(s) = s^m`, `V = |x|²/2`, `m > 1`.
    pub fn porous_media(m: T) -> Result<Self> {
        if !(m > T::one()) {
            return Err(Error::InvalidModel(format!(
                "porous media exponent must be > 1, got {m}"
            )));
        }
        Self::new(
            "porous_media",
            Convection::Linear,
            Diffusion::Power { m },
            Potential::HalfSquare,
        )
    }

    /// Nonlinear Fokker-Planck equation for fermions (`k = -1`) or bosons (`k = +1`).
    pub fn fokker_planck(k: T) -> Result<Self> {
        Self::new(
            "fokker_planck",
            Convection::Quantum { k },
            Diffusion::Power { m: T::one() },
            Potential::HalfSquare,
        )
    }

    /// Linear convection along a constant potential gradient `∂ₓV = gradient`
    /// with an arbitrary catalog diffusion.
    pub fn linear_drift(diffusion: Diffusion<T>, gradient: T) -> Result<Self> {
        Self::new(
            "linear_drift",
            Convection::Linear,
            diffusion,
            Potential::Gradient([gradient, T::zero(), T::zero()]),
        )
    }

    /// `r(s) = s^m` with a constant drift `∂ₓV = gradient`.
    pub fn linear_drift_power_diffusion(m: T, gradient: T) -> Result<Self> {
        Self::linear_drift(Diffusion::Power { m }, gradient)
    }

    /// Buckley-Leverett with capillary scaling `eps`. The potential is
    /// `V = -x`, so that at `eps = 0` the equation is `∂ₜu + ∂ₓf(u) = 0`.
    pub fn buckley_leverett(eps: T) -> Result<Self> {
        if !(eps >= T::zero()) {
            return Err(Error::InvalidModel(format!(
                "capillary scaling must be >= 0, got {eps}"
            )));
        }
        Self::new(
            "buckley_leverett",
            Convection::BuckleyLeverett,
            Diffusion::Capillary { eps },
            Potential::Gradient([-T::one(), T::zero(), T::zero()]),
        )
    }

    /// One continuity equation of the drift-diffusion system, `r(s) = s^γ`.
    /// The potential is supplied per cell by the Poisson solve, so the model
    /// itself carries `V ≡ 0`.
    pub fn dd_continuity(gamma: T) -> Result<Self> {
        if !(gamma >= T::one()) {
            return Err(Error::InvalidModel(format!("gamma must be >= 1, got {gamma}")));
        }
        Self::new(
            "dd_continuity",
            Convection::Linear,
            Diffusion::Power { m: gamma },
            Potential::Zero,
        )
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn convection(&self) -> Convection<T> {
        self.convection
    }

    pub fn diffusion(&self) -> Diffusion<T> {
        self.diffusion
    }

    pub fn potential(&self) -> &Potential<T> {
        &self.potential
    }

    pub fn with_potential(mut self, potential: Potential<T>) -> Self {
        self.potential = potential;
        self
    }

    pub fn is_linear_convection(&self) -> bool {
        matches!(self.convection, Convection::Linear)
    }

    /// Admissible range `[lower, upper]` of the unknown (`upper = None` is unbounded).
    pub fn admissible_range(&self) -> (T, Option<T>) {
        (self.lower, self.upper)
    }

    #[inline]
    pub fn f(&self, u: T) -> T {
        match self.convection {
            Convection::Linear => u,
            Convection::Quantum { k } => u * (T::one() + k * u),
            Convection::BuckleyLeverett => {
                let v = T::one() - u;
                u * u / (u * u + v * v)
            }
        }
    }

    #[inline]
    pub fn f_prime(&self, u: T) -> T {
        match self.convection {
            Convection::Linear => T::one(),
            Convection::Quantum { k } => T::one() + T::lit(2.0) * k * u,
            Convection::BuckleyLeverett => {
                let v = T::one() - u;
                let d = u * u + v * v;
                T::lit(2.0) * u * v / (d * d)
            }
        }
    }

    /// Interior critical points of `f'` (roots of `f''`), when known in closed
    /// form. `None` means unknown, in which case `alpha_bound` samples.
    pub fn f_prime_critical_points(&self) -> Option<&'static [f64]> {
        match self.convection {
            Convection::Linear | Convection::Quantum { .. } => Some(&[]),
            Convection::BuckleyLeverett => Some(&[0.5]),
        }
    }

    #[inline]
    pub fn r(&self, s: T) -> T {
        match self.diffusion {
            Diffusion::None => T::zero(),
            Diffusion::Power { m } => {
                if m == T::one() {
                    s
                } else {
                    s.powf(m)
                }
            }
            Diffusion::ShiftedCubic => {
                if s >= T::one() {
                    (s - T::one()).powi(3)
                } else {
                    T::zero()
                }
            }
            Diffusion::Capillary { eps } => {
                eps * (T::lit(2.0) * s * s - T::lit(4.0 / 3.0) * s * s * s)
            }
        }
    }

    #[inline]
    pub fn r_prime(&self, s: T) -> T {
        match self.diffusion {
            Diffusion::None => T::zero(),
            Diffusion::Power { m } => {
                if m == T::one() {
                    T::one()
                } else {
                    m * s.powf(m - T::one())
                }
            }
            Diffusion::ShiftedCubic => {
                if s >= T::one() {
                    T::lit(3.0) * (s - T::one()).powi(2)
                } else {
                    T::zero()
                }
            }
            Diffusion::Capillary { eps } => T::lit(4.0) * eps * s * (T::one() - s),
        }
    }

    /// Closed form of `h(s) = ∫₁ˢ r'(τ)/τ dτ`. Returns `-∞` at `s = 0` when
    /// `h` diverges there.
    #[inline]
    pub fn h(&self, s: T) -> T {
        match self.diffusion {
            Diffusion::None => T::zero(),
            Diffusion::Power { m } => {
                if m == T::one() {
                    s.ln()
                } else {
                    m / (m - T::one()) * (s.powf(m - T::one()) - T::one())
                }
            }
            Diffusion::ShiftedCubic => {
                if s >= T::one() {
                    T::lit(3.0) * log1p_cubic_remainder(s - T::one())
                } else {
                    T::zero()
                }
            }
            Diffusion::Capillary { eps } => -T::lit(2.0) * eps * (s - T::one()).powi(2),
        }
    }

    /// Generalized inverse of `h` for power diffusion: `h⁻¹(s)` for
    /// `s > h(0⁺)` and `0` below. `None` for other diffusion laws, where `h`
    /// is not invertible on the whole range.
    pub fn h_inverse(&self, s: T) -> Option<T> {
        match self.diffusion {
            Diffusion::Power { m } if m == T::one() => Some(s.exp()),
            Diffusion::Power { m } => {
                let base = T::one() + (m - T::one()) / m * s;
                Some(if base > T::zero() {
                    base.powf(T::one() / (m - T::one()))
                } else {
                    T::zero()
                })
            }
            _ => None,
        }
    }

    /// `h(0⁺)`, possibly `-∞`.
    pub fn h_at_zero(&self) -> T {
        match self.diffusion {
            Diffusion::Power { m } if m == T::one() => T::neg_infinity(),
            _ => self.h(T::zero()),
        }
    }

    /// `h(s)`, signalling divergence instead of returning an infinity.
    pub fn h_of(&self, s: T) -> Result<T> {
        if s < T::zero() {
            return Err(Error::InvalidModel(format!("h evaluated at negative s = {s}")));
        }
        let v = self.h(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Divergent {
                function: "h",
                at: s.to_f64_lossy(),
            })
        }
    }

    /// `h(s)` by adaptive quadrature of `r'(τ)/τ` from 1 to `s`, with the
    /// singular lower limit cut off at 1e-14.
    pub fn h_by_quadrature(&self, s: T) -> T {
        let cutoff = T::lit(1e-14);
        let lo = if s < cutoff { cutoff } else { s };
        let one = T::one();
        // split at 1 so kinks of r' at s = 1 fall on an interval end
        quadrature::integrate(|t: T| self.r_prime(t) / t, one, lo, T::lit(1e-10))
    }

    /// Closed form of `h̃` with `h̃'(u) f(u) = r'(u)`.
    #[inline]
    pub fn htilde(&self, u: T) -> T {
        match self.convection {
            Convection::Linear => self.h(u),
            Convection::Quantum { k } => (u / (T::one() + k * u)).ln(),
            Convection::BuckleyLeverett => match self.diffusion {
                Diffusion::Capillary { eps } if eps > T::zero() => {
                    T::lit(4.0)
                        * eps
                        * (u.ln() - T::lit(3.0) * u + T::lit(2.0) * u * u
                            - T::lit(2.0 / 3.0) * u * u * u)
                }
                _ => T::zero(),
            },
        }
    }

    /// `h̃(s)`, signalling points where `f` vanishes and `r'/f` is not integrable.
    pub fn htilde_of(&self, s: T) -> Result<T> {
        let v = self.htilde(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Divergent {
                function: "htilde",
                at: s.to_f64_lossy(),
            })
        }
    }

    /// True when `h̃` is unbounded on the admissible range (logarithmic
    /// singularities where `f` vanishes).
    pub fn htilde_singular(&self) -> bool {
        match self.convection {
            Convection::Linear => matches!(self.diffusion, Diffusion::Power { m } if m == T::one()),
            Convection::Quantum { .. } => true,
            Convection::BuckleyLeverett => {
                matches!(self.diffusion, Diffusion::Capillary { eps } if eps > T::zero())
            }
        }
    }

    /// `max |f'(u)|` for `u` between `a` and `b`.
    pub fn alpha_bound(&self, a: T, b: T) -> T {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match self.f_prime_critical_points() {
            Some(points) => {
                let mut alpha = self.f_prime(lo).abs().max(self.f_prime(hi).abs());
                for &c in points {
                    let c = T::lit(c);
                    if lo < c && c < hi {
                        alpha = alpha.max(self.f_prime(c).abs());
                    }
                }
                alpha
            }
            None => self.alpha_by_sampling(lo, hi),
        }
    }

    /// `max |f'|` over a 33-point uniform sampling of `[a, b]`.
    pub fn alpha_by_sampling(&self, a: T, b: T) -> T {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let step = (hi - lo) / T::lit(32.0);
        (0..=32).fold(T::zero(), |acc, k| {
            acc.max(self.f_prime(lo + step * T::from_usize_lossy(k)).abs())
        })
    }

    /// The entropy pair `(H, h)` used by the relative entropy, if the model
    /// has one.
    pub fn entropy_pair(&self) -> Option<EntropyPair<T>> {
        match self.convection {
            Convection::Linear => Some(EntropyPair {
                kind: EntropyKind::Enthalpy(self.diffusion),
            }),
            Convection::Quantum { k } => Some(EntropyPair {
                kind: EntropyKind::Quantum { k },
            }),
            Convection::BuckleyLeverett => None,
        }
    }
}

/// `ln(1 + t) - t + t²/2 = t³/3 - t⁴/4 + ...`, by its series near `t = 0`
/// where the closed form cancels.
fn log1p_cubic_remainder<T: Real>(t: T) -> T {
    if t.abs() < T::lit(0.05) {
        let mut term = t * t;
        let mut sum = T::zero();
        for k in 3..=18 {
            term = -term * t;
            sum = sum - term / T::from_usize_lossy(k);
        }
        sum
    } else {
        t.ln_1p() - t + t * t / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EntropyKind<T> {
    /// `H(s) = ∫₀ˢ h`, `h` from the diffusion law.
    Enthalpy(Diffusion<T>),
    /// `H(u) = u log u - k (1 + k u) log(1 + k u)`, `h = log(u / (1 + k u))`.
    Quantum { k: T },
}

/// Convex entropy density `H` and its derivative `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPair<T> {
    kind: EntropyKind<T>,
}

impl<T: Real> EntropyPair<T> {
    pub fn big_h(&self, s: T) -> T {
        match self.kind {
            EntropyKind::Enthalpy(d) => match d {
                Diffusion::None => T::zero(),
                Diffusion::Power { m } => {
                    if m == T::one() {
                        xlogx(s) - s
                    } else {
                        (s.powf(m) - m * s) / (m - T::one())
                    }
                }
                Diffusion::ShiftedCubic => {
                    if s >= T::one() {
                        let one = T::one();
                        T::lit(3.0)
                            * (s * s * s / T::lit(6.0) - s / T::lit(2.0) + one / T::lit(3.0)
                                - (s - one).powi(2)
                                + xlogx(s)
                                - s
                                + one)
                    } else {
                        T::zero()
                    }
                }
                Diffusion::Capillary { eps } => {
                    -T::lit(2.0) * eps / T::lit(3.0) * ((s - T::one()).powi(3) + T::one())
                }
            },
            EntropyKind::Quantum { k } => xlogx(s) - k * xlogx(T::one() + k * s),
        }
    }

    pub fn small_h(&self, s: T) -> T {
        match self.kind {
            EntropyKind::Enthalpy(d) => {
                // reuse the model's closed form of h
                ProblemModel {
                    name: "",
                    convection: Convection::Linear,
                    diffusion: d,
                    potential: Potential::Zero,
                    lower: T::zero(),
                    upper: None,
                }
                .h(s)
            }
            EntropyKind::Quantum { k } => (s / (T::one() + k * s)).ln(),
        }
    }
}
