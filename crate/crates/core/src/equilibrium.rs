//! Discrete steady states with a prescribed mass.
//!
//! Profiles are sampled at cell centers. Because every catalog potential is
//! separable and its difference quotients are exact, the sampled Barenblatt
//! and Fermi-Dirac profiles satisfy `dh̃(U) + dV = 0` at every interface
//! inside their support up to roundoff.

use crate::error::{Error, Result};
use crate::mesh::MeshND;
use crate::model::{Diffusion, Potential, ProblemModel};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile<T> {
    pub values: Vec<T>,
    /// The solved constant: `C̄` for Barenblatt, `β̄` for Fermi-Dirac/Bose-Einstein.
    pub parameter: T,
    pub mass: T,
}

const MAX_BISECTIONS: usize = 400;

/// Bisection for the root of a monotone function `residual` on `[lo, hi]`
/// (sign change assumed), stopping when `|residual| <= tol`.
fn bisect<T: Real, F: Fn(T) -> T>(residual: F, mut lo: T, mut hi: T, tol: T) -> T {
    let r_lo = residual(lo);
    let mut mid = (lo + hi) / T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        mid = (lo + hi) / T::lit(2.0);
        let r = residual(mid);
        if r.abs() <= tol || mid == lo || mid == hi {
            break;
        }
        if (r > T::zero()) == (r_lo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

fn squared_radius<T: Real>(mesh: &MeshND<T>, cell: usize) -> T {
    let x = mesh.center(cell);
    x[..mesh.dim()].iter().map(|&v| v * v).sum()
}

fn barenblatt_values<T: Real>(mesh: &MeshND<T>, m: T, c: T) -> Vec<T> {
    let k = (m - T::one()) / (T::lit(2.0) * m);
    let p = T::one() / (m - T::one());
    (0..mesh.n_cells())
        .map(|cell| (c - k * squared_radius(mesh, cell)).max(T::zero()).powf(p))
        .collect()
}

/// Barenblatt profile `U_i = (C̄ - (m-1)/(2m) |x_i|²)₊^{1/(m-1)}` with `C̄`
/// chosen so that the discrete mass equals `mass`.
///
/// `C̄` is bounded so that the support stays inside the mesh; a mass that
/// would need a larger support is reported as [`Error::NoEquilibrium`].
pub fn barenblatt<T: Real>(mesh: &MeshND<T>, m: T, mass: T) -> Result<EquilibriumProfile<T>> {
    if !(m > T::one()) {
        return Err(Error::InvalidModel(format!("Barenblatt exponent must be > 1, got {m}")));
    }
    if !(mass > T::zero()) {
        return Err(Error::NoEquilibrium(format!("mass must be positive, got {mass}")));
    }
    let radius = mesh
        .axes()
        .iter()
        .map(|a| a.lower().abs().min(a.upper().abs()))
        .fold(T::infinity(), T::min);
    let c_max = (m - T::one()) / (T::lit(2.0) * m) * radius * radius;
    let mass_of = |c: T| mesh.integrate(&barenblatt_values(mesh, m, c));
    let reachable = mass_of(c_max);
    if reachable < mass {
        return Err(Error::NoEquilibrium(format!(
            "mass {mass} exceeds {reachable}, the largest Barenblatt mass supported inside the mesh"
        )));
    }
    let tol = T::lit(1e-12) * mass;
    let c = bisect(|c| mass_of(c) - mass, T::zero(), c_max, tol);
    let values = barenblatt_values(mesh, m, c);
    let achieved = mesh.integrate(&values);
    Ok(EquilibriumProfile {
        values,
        parameter: c,
        mass: achieved,
    })
}

fn quantum_values<T: Real>(mesh: &MeshND<T>, k: T, beta: T) -> Vec<T> {
    (0..mesh.n_cells())
        .map(|cell| T::one() / (beta * (squared_radius(mesh, cell) / T::lit(2.0)).exp() - k))
        .collect()
}

/// Fermi-Dirac (`k = -1`) or Bose-Einstein (`k = +1`) profile
/// `U_i = 1 / (β̄ exp(|x_i|²/2) - k)` with the prescribed discrete mass.
///
/// Fermions: `β̄ > 0` and the mass must stay below the mesh volume. Bosons:
/// `β̄ ≥ 1`; masses above the `β̄ = 1` (critical) mass are reported.
pub fn fermi_bose<T: Real>(mesh: &MeshND<T>, k: T, mass: T) -> Result<EquilibriumProfile<T>> {
    if k != T::one() && k != -T::one() {
        return Err(Error::InvalidModel(format!("k must be -1 or +1, got {k}")));
    }
    if !(mass > T::zero()) {
        return Err(Error::NoEquilibrium(format!("mass must be positive, got {mass}")));
    }
    let fermion = k < T::zero();
    // β = floor + e^s, with floor = 0 for fermions and 1 for bosons
    let floor = if fermion { T::zero() } else { T::one() };
    let beta_of = |s: T| floor + s.exp();
    let mass_of = |s: T| mesh.integrate(&quantum_values(mesh, k, beta_of(s)));
    let limit = if fermion {
        mesh.integrate(&vec![T::one(); mesh.n_cells()])
    } else {
        mesh.integrate(&quantum_values(mesh, k, T::one()))
    };
    if mass >= limit {
        let what = if fermion { "the mesh volume" } else { "the critical mass" };
        return Err(Error::NoEquilibrium(format!(
            "mass {mass} is not below {what} {limit}"
        )));
    }
    let (mut lo, mut hi) = (T::lit(-2.0), T::lit(2.0));
    while mass_of(lo) < mass && lo > T::lit(-700.0) {
        lo = lo * T::lit(2.0);
    }
    while mass_of(hi) > mass && hi < T::lit(700.0) {
        hi = hi * T::lit(2.0);
    }
    let s = bisect(|s| mass_of(s) - mass, lo, hi, T::lit(1e-12) * mass);
    let beta = beta_of(s);
    let values = quantum_values(mesh, k, beta);
    let achieved = mesh.integrate(&values);
    Ok(EquilibriumProfile {
        values,
        parameter: beta,
        mass: achieved,
    })
}

/// Profile satisfying `h(U_{i+1}) = h(U_i) - dV_{i+1/2} d_{i+1/2}` exactly
/// in the recursion, built outward from `seed_cell` with `U = seed_value`.
/// The level `h(U) + V` is carried unsaturated, so cells past a vacuum
/// region continue the same profile. One dimension, power diffusion only.
pub fn recursive_equilibrium_1d<T: Real>(
    model: &ProblemModel<T>,
    mesh: &MeshND<T>,
    seed_cell: usize,
    seed_value: T,
) -> Result<Vec<T>> {
    if mesh.dim() != 1 {
        return Err(Error::InvalidMesh("recursive equilibrium is one-dimensional".into()));
    }
    if !matches!(model.diffusion(), Diffusion::Power { .. }) || !model.is_linear_convection() {
        return Err(Error::InvalidModel(
            "recursive equilibrium needs linear convection and power diffusion".into(),
        ));
    }
    let axis = mesh.axis(0);
    let n = axis.n_cells();
    if seed_cell >= n || !(seed_value > T::zero()) {
        return Err(Error::InvalidConfig("seed cell out of range or nonpositive seed".into()));
    }
    let x = axis.centers();
    let d = axis.interface_distances();
    let potential: Potential<T> = *model.potential();
    let inverse = |level: T| model.h_inverse(level).unwrap_or(T::zero());
    let mut level = vec![T::zero(); n];
    level[seed_cell] = model.h(seed_value);
    for i in seed_cell..n - 1 {
        let dv = potential.difference_quotient(0, x[i], x[i + 1], d[i + 1]);
        level[i + 1] = level[i] - dv * d[i + 1];
    }
    for i in (0..seed_cell).rev() {
        let dv = potential.difference_quotient(0, x[i], x[i + 1], d[i + 1]);
        level[i] = level[i + 1] + dv * d[i + 1];
    }
    Ok(level.into_iter().map(inverse).collect())
}

/// Largest `|dh̃(U) + dV|` over interior interfaces whose two neighbors are
/// positive, and the number of interfaces skipped because a neighbor is zero.
pub fn equilibrium_residual<T: Real>(
    values: &[T],
    model: &ProblemModel<T>,
    mesh: &MeshND<T>,
) -> Result<(T, usize)> {
    if values.len() != mesh.n_cells() {
        return Err(Error::ShapeMismatch {
            expected: mesh.n_cells(),
            got: values.len(),
        });
    }
    let potential = *model.potential();
    let mut worst = T::zero();
    let mut skipped = 0;
    for axis in 0..mesh.dim() {
        let ax = mesh.axis(axis);
        let (x, d) = (ax.centers(), ax.interface_distances());
        let stride = mesh.strides()[axis];
        let n = mesh.counts()[axis];
        for line in 0..mesh.n_lines(axis) {
            let start = mesh.line_start(axis, line);
            for k in 1..n {
                let (a, b) = (values[start + (k - 1) * stride], values[start + k * stride]);
                if !(a > T::zero() && b > T::zero()) {
                    skipped += 1;
                    continue;
                }
                let dv = potential.difference_quotient(axis, x[k - 1], x[k], d[k]);
                let r = ((model.htilde(b) - model.htilde(a)) / d[k] + dv).abs();
                worst = worst.max(r);
            }
        }
    }
    Ok((worst, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{FluxKind, FluxScheme};
    use crate::mesh::Mesh1D;
    use crate::quadrature;
    use crate::solver::{BoundaryCondition, Discretization, SolverConfig, State};

    fn line(a: f64, b: f64, n: usize) -> MeshND<f64> {
        MeshND::new(vec![Mesh1D::uniform(a, b, n).unwrap()]).unwrap()
    }

    #[test]
    fn barenblatt_constant_converges_under_refinement() {
        // continuous mass of (C - x²/4)₊ is (8/3) C^{3/2}: C = 1 for mass 8/3
        let mut errors = Vec::new();
        for n in [100, 200, 400, 800] {
            let p = barenblatt(&line(-3.0, 3.0, n), 2.0, 8.0 / 3.0).unwrap();
            assert!((p.mass - 8.0 / 3.0).abs() <= 1e-10 * 8.0 / 3.0);
            errors.push((p.parameter - 1.0).abs());
        }
        assert!(errors[3] < 1e-4, "{errors:?}");
        assert!(errors[3] < errors[0]);
    }

    #[test]
    fn barenblatt_small_mass_and_unreachable_mass() {
        let mesh = line(-2.0, 2.0, 64);
        let p = barenblatt(&mesh, 3.0, 1e-9).unwrap();
        assert!(p.parameter < 1e-3 && p.values.iter().all(|&v| v >= 0.0));
        assert!(matches!(barenblatt(&mesh, 2.0, 100.0), Err(Error::NoEquilibrium(_))));
    }

    #[test]
    fn example5_profile_fits_in_the_domain() {
        let mesh = line(-5.5, 5.5, 160);
        let init = crate::solver::project_initial(
            |x| if (x[0].abs() > 0.7) && (x[0].abs() < 3.7) { 1.0 } else { 0.0 },
            &mesh,
        );
        let mass = mesh.integrate(&init.values);
        assert!((mass - 6.0).abs() < 0.1);
        let p = barenblatt(&mesh, 5.0, mass).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.values[159], 0.0);
    }

    #[test]
    fn fermion_constant_is_recovered_from_the_continuous_mass() {
        let oracle = quadrature::integrate(|x: f64| 1.0 / ((x * x / 2.0).exp() + 1.0), -8.0, 8.0, 1e-13);
        let p = fermi_bose(&line(-8.0, 8.0, 4000), -1.0, oracle).unwrap();
        assert!((p.parameter - 1.0).abs() < 1e-6, "{}", p.parameter);
        assert!(p.values.iter().all(|&u| u > 0.0 && u <= 1.0 / (p.parameter + 1.0) + 1e-15));
    }

    #[test]
    fn fermion_mass_limits() {
        let mesh = line(-4.0, 4.0, 40);
        assert!(matches!(fermi_bose(&mesh, -1.0, 8.5), Err(Error::NoEquilibrium(_))));
        let tiny = fermi_bose(&mesh, -1.0, 1e-8).unwrap();
        assert!(tiny.parameter > 1e6);
    }

    #[test]
    fn boson_critical_mass_is_reported() {
        // even cell count: no center at the origin, so the critical mass is finite
        let mesh = line(-4.0, 4.0, 40);
        let critical = mesh.integrate(&quantum_values(&mesh, 1.0, 1.0));
        assert!(matches!(fermi_bose(&mesh, 1.0, 1.01 * critical), Err(Error::NoEquilibrium(_))));
        let p = fermi_bose(&mesh, 1.0, 0.5 * critical).unwrap();
        assert!(p.parameter > 1.0);
        assert!((p.mass - 0.5 * critical).abs() <= 1e-10 * critical);
    }

    #[test]
    fn parameter_maps_are_monotone() {
        let mesh = line(-3.0, 3.0, 30);
        let masses: Vec<f64> = (1..40).map(|k| mesh.integrate(&barenblatt_values(&mesh, 2.0, k as f64 * 0.05))).collect();
        assert!(masses.windows(2).all(|w| w[1] > w[0]));
        let masses: Vec<f64> = (1..40).map(|k| mesh.integrate(&quantum_values(&mesh, -1.0, k as f64 * 0.25))).collect();
        assert!(masses.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn residual_examples() {
        let pm = ProblemModel::<f64>::porous_media(2.0).unwrap();
        let mesh = line(-3.0, 3.0, 60);
        let p = barenblatt(&mesh, 2.0, 2.0).unwrap();
        let (res, skipped) = equilibrium_residual(&p.values, &pm, &mesh).unwrap();
        assert!(res < 1e-12, "{res}");
        assert!(skipped > 0);

        let flat = ProblemModel::<f64>::linear_drift_power_diffusion(2.0, 0.0).unwrap();
        assert_eq!(equilibrium_residual(&[0.4; 60], &flat, &mesh).unwrap(), (0.0, 0));

        let fermion = ProblemModel::<f64>::fokker_planck(-1.0).unwrap();
        let mesh = MeshND::uniform_box(&[-4.0, -4.0], &[4.0, 4.0], &[16, 16]).unwrap();
        let p = fermi_bose(&mesh, -1.0, 10.0).unwrap();
        let (res, _) = equilibrium_residual(&p.values, &fermion, &mesh).unwrap();
        assert!(res < 1e-12, "{res}");
    }

    #[test]
    fn recursive_profile_matches_sampled_barenblatt() {
        let pm = ProblemModel::<f64>::porous_media(2.0).unwrap();
        let mesh = line(-3.0, 3.0, 61);
        let rec = recursive_equilibrium_1d(&pm, &mesh, 30, 1.0).unwrap();
        let sampled = barenblatt_values(&mesh, 2.0, 1.0);
        for (a, b) in rec.iter().zip(&sampled) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn constructed_profiles_are_stationary_under_the_solver() {
        let pm = ProblemModel::<f64>::porous_media(3.0).unwrap();
        let mesh = line(-3.0, 3.0, 80);
        let p = barenblatt(&mesh, 3.0, 1.5).unwrap();
        for kind in [FluxKind::Fu1, FluxKind::Fu2] {
            let scheme = FluxScheme::for_kind(kind);
            let disc = Discretization::new(pm.clone(), mesh.clone(), BoundaryCondition::zero_flux(1), scheme).unwrap();
            let mut cfg = SolverConfig::fixed(scheme, 1e-4, 0.1);
            cfg.record_every = 100;
            let out = disc.run(&cfg, State::new(p.values.clone(), 0.0), Some(&p.values)).unwrap();
            let drift = out.state.values.iter().zip(&p.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(drift <= 1e-8, "{kind}: {drift}");
        }
    }
}
