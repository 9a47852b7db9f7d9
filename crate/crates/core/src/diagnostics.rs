//! Discrete relative entropy, entropy dissipation, L¹ distances, decay-rate
//! fits and the grid-refinement convergence harness.

use crate::error::{Error, Result};
use crate::mesh::{restrict_halving, MeshND};
use crate::model::ProblemModel;
use crate::real::Real;
use crate::solver::Discretization;

/// Per-record scalars of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord<T> {
    pub time: T,
    pub mass: T,
    /// Relative entropy `E_Δ`; NaN when no equilibrium was supplied or the
    /// model has no entropy pair.
    pub entropy: T,
    pub dissipation: T,
    /// `Σ m(K_i) |U_i - U_i^eq|`; NaN without an equilibrium.
    pub l1_to_equilibrium: T,
}

/// Value of the relative entropy and the number of cells where the
/// equilibrium sits at a point where `h` diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue<T> {
    pub value: T,
    pub degenerate_cells: usize,
}

/// `E_Δ = Σ m(K_i) [H(U_i) - H(U_i^eq) - h(U_i^eq)(U_i - U_i^eq)]`.
///
/// In vacuum cells of the equilibrium (`U_i^eq = 0`) of a drift model with
/// finite `h(0)`, `h(U_i^eq)` is replaced by the continued level
/// `min(C - V_i, h(0))`, where `C = max(h(U^eq) + V)` over the support. With
/// this level `E_Δ` is the free energy difference to the equilibrium.
///
/// Where `U_i^eq = 0` and `h(0⁺) = -∞`, `h` is evaluated at `1e-30`
/// instead and the cell is counted in `degenerate_cells`.
pub fn discrete_entropy<T: Real>(
    values: &[T],
    equilibrium: &[T],
    model: &ProblemModel<T>,
    mesh: &MeshND<T>,
) -> Result<EntropyValue<T>> {
    check_shapes(values, equilibrium, mesh)?;
    let pair = model.entropy_pair().ok_or_else(|| {
        Error::InvalidModel(format!("model `{}` has no entropy pair", model.name()))
    })?;
    let floor = T::lit(1e-30);
    let potential = |cell: usize| model.potential().value(&mesh.center(cell)[..mesh.dim()]);
    let h_zero = pair.small_h(T::zero());
    let level = if model.is_linear_convection() && h_zero.is_finite() {
        equilibrium
            .iter()
            .enumerate()
            .filter(|&(_, &ueq)| ueq > T::zero())
            .map(|(cell, &ueq)| pair.small_h(ueq) + potential(cell))
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
    } else {
        None
    };
    let mut degenerate_cells = 0;
    let mut value = T::zero();
    for (cell, (&u, &ueq)) in values.iter().zip(equilibrium).enumerate() {
        let mut h_eq = match level {
            Some(c) if ueq == T::zero() => (c - potential(cell)).min(h_zero),
            _ => pair.small_h(ueq),
        };
        if !h_eq.is_finite() {
            h_eq = pair.small_h(ueq.max(floor));
            degenerate_cells += 1;
        }
        let density = pair.big_h(u) - pair.big_h(ueq) - h_eq * (u - ueq);
        value = value + mesh.cell_volume(cell) * density;
    }
    Ok(EntropyValue {
        value,
        degenerate_cells,
    })
}

/// `I_Δ = Σ_faces area · d · |A|² · min(f(u₋), f(u₊))` over every face that
/// carries a flux. Traces are the MUSCL reconstructions for FU2 and the cell
/// averages otherwise.
pub fn discrete_dissipation<T: Real>(disc: &Discretization<T>, values: &[T]) -> T {
    let model = disc.model();
    let mut total = T::zero();
    disc.for_each_face(values, |vel, um, up, area, dist| {
        let weight = model.f(um).min(model.f(up));
        total = total + area * dist * vel * vel * weight;
    });
    total
}

/// `Σ m(K_i) |a_i - b_i|`.
pub fn l1_distance<T: Real>(a: &[T], b: &[T], mesh: &MeshND<T>) -> Result<T> {
    check_shapes(a, b, mesh)?;
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .map(|(cell, (&x, &y))| mesh.cell_volume(cell) * (x - y).abs())
        .sum())
}

fn check_shapes<T: Real>(a: &[T], b: &[T], mesh: &MeshND<T>) -> Result<()> {
    for v in [a, b] {
        if v.len() != mesh.n_cells() {
            return Err(Error::ShapeMismatch {
                expected: mesh.n_cells(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// Least-squares fit of `log v = c - λ t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    /// Decay rate `λ` (positive for decaying series).
    pub rate: T,
    /// RMS residual of the linear fit in `log v`.
    pub residual: T,
    pub intercept: T,
    pub points: usize,
}

/// Default fit window: the middle half of the series' time span, ending
/// before the first value that drops below `100 · ulp(v₀)`.
pub fn default_window<T: Real>(series: &[(T, T)]) -> Option<(T, T)> {
    let (&(t0, v0), &(t1, _)) = (series.first()?, series.last()?);
    let span = t1 - t0;
    let lo = t0 + span / T::lit(4.0);
    let mut hi = t0 + T::lit(0.75) * span;
    let floor = T::lit(100.0) * v0.abs() * T::epsilon();
    if let Some(&(t, _)) = series.iter().find(|&&(_, v)| v < floor) {
        if t < hi {
            hi = t;
        }
    }
    Some((lo, hi))
}

/// Fits an exponential decay rate to `(time, value)` pairs within `window`
/// (the default window when `None`).
pub fn fit_decay_rate<T: Real>(series: &[(T, T)], window: Option<(T, T)>) -> Result<DecayFit<T>> {
    let (lo, hi) = match window.or_else(|| default_window(series)) {
        Some(w) => w,
        None => return Err(Error::InvalidSeries("empty series".into())),
    };
    let pts: Vec<(T, T)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo && t <= hi)
        .collect();
    if pts.len() < 5 {
        return Err(Error::InvalidSeries(format!(
            "{} points in the window [{lo}, {hi}], need at least 5",
            pts.len()
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|&&(_, v)| !(v > T::zero())) {
        return Err(Error::InvalidSeries(format!("nonpositive value {v} at t = {t}")));
    }
    let n = T::from_usize_lossy(pts.len());
    let mean_t = pts.iter().map(|p| p.0).sum::<T>() / n;
    let mean_y = pts.iter().map(|p| p.1.ln()).sum::<T>() / n;
    let (mut stt, mut sty) = (T::zero(), T::zero());
    for &(t, v) in &pts {
        let dt = t - mean_t;
        stt = stt + dt * dt;
        sty = sty + dt * (v.ln() - mean_y);
    }
    if stt == T::zero() {
        return Err(Error::InvalidSeries("window contains a single time".into()));
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let ss = pts
        .iter()
        .map(|&(t, v)| {
            let r = v.ln() - (intercept + slope * t);
            r * r
        })
        .sum::<T>();
    Ok(DecayFit {
        rate: -slope,
        residual: (ss / n).sqrt(),
        intercept,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    /// Cell count of the finer mesh of the pair.
    pub n_cells: usize,
    /// `‖R(u_fine) - u_coarse‖_{L¹}` on the coarse mesh.
    pub l1_error: T,
    /// `log₂` of the previous error over this one; `None` on the first row.
    pub order: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub rows: Vec<ConvergenceRow<T>>,
}

impl<T: Real> ConvergenceTable<T> {
    /// Builds the table from per-level solutions (coarsest first).
    pub fn from_solutions(levels: &[(MeshND<T>, Vec<T>)]) -> Result<Self> {
        let mut rows: Vec<ConvergenceRow<T>> = Vec::new();
        for pair in levels.windows(2) {
            let (coarse_mesh, coarse) = &pair[0];
            let (fine_mesh, fine) = &pair[1];
            let (restricted_mesh, restricted) = restrict_halving(fine_mesh, fine)?;
            if restricted_mesh.counts() != coarse_mesh.counts() {
                return Err(Error::InvalidMesh(format!(
                    "levels must double: {:?} then {:?}",
                    coarse_mesh.counts(),
                    fine_mesh.counts()
                )));
            }
            let err = l1_distance(&restricted, coarse, coarse_mesh)?;
            let order = rows.last().map(|prev| (prev.l1_error / err).log2());
            rows.push(ConvergenceRow {
                n_cells: fine_mesh.n_cells(),
                l1_error: err,
                order,
            });
        }
        Ok(Self { rows })
    }

    /// Observed order at the finest pair.
    pub fn finest_order(&self) -> Option<T> {
        self.rows.last().and_then(|r| r.order)
    }
}

/// Runs `solve` on every level (successive doublings of the cell count) and
/// tabulates the errors between consecutive levels.
pub fn convergence_study<T, F>(levels: &[usize], mut solve: F) -> Result<ConvergenceTable<T>>
where
    T: Real,
    F: FnMut(usize) -> Result<(MeshND<T>, Vec<T>)>,
{
    if levels.len() < 2 {
        return Err(Error::InvalidConfig("a convergence study needs at least two levels".into()));
    }
    if let Some(w) = levels.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidConfig(format!(
            "levels must be successive doublings, got {} then {}",
            w[0], w[1]
        )));
    }
    let solutions = levels.iter().map(|&n| solve(n)).collect::<Result<Vec<_>>>()?;
    ConvergenceTable::from_solutions(&solutions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{FluxKind, FluxScheme};
    use crate::mesh::Mesh1D;
    use crate::solver::{BoundaryCondition, State};
    use proptest::prelude::*;

    fn unit_cells(n: usize) -> MeshND<f64> {
        MeshND::new(vec![Mesh1D::uniform(0.0, n as f64, n).unwrap()]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let pm = ProblemModel::<f64>::porous_media(2.0).unwrap();
        let mesh = unit_cells(2);
        let e = discrete_entropy(&[2.0, 0.0], &[1.0, 1.0], &pm, &mesh).unwrap();
        assert!((e.value - 2.0).abs() < 1e-15);
        assert_eq!(e.degenerate_cells, 0);
        let e = discrete_entropy(&[0.3, 1.7], &[0.3, 1.7], &pm, &mesh).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn entropy_degenerate_equilibrium_cells_are_counted() {
        let lin = ProblemModel::<f64>::linear_drift_power_diffusion(1.0, 0.0).unwrap();
        let mesh = unit_cells(3);
        let e = discrete_entropy(&[0.5, 1.0, 0.0], &[0.0, 1.0, 0.0], &lin, &mesh).unwrap();
        assert_eq!(e.degenerate_cells, 2);
        assert!(e.value.is_finite() && e.value > 0.0);
    }

    #[test]
    fn vacuum_cells_use_the_continued_level() {
        // V = x²/2 at centers 0.5, 1.5, 2.5; h(s) = 2(s - 1), H(s) = s² - 2s
        let pm = ProblemModel::<f64>::porous_media(2.0).unwrap();
        let mesh = unit_cells(3);
        let e = discrete_entropy(&[1.0, 0.5, 0.5], &[1.0, 0.0, 0.0], &pm, &mesh).unwrap();
        let big_h = |s: f64| s * s - 2.0 * s;
        let c = 0.0 + 0.125;
        let level = |x: f64| (c - x * x / 2.0).min(-2.0);
        let expected = (big_h(0.5) - level(1.5) * 0.5) + (big_h(0.5) - level(2.5) * 0.5);
        assert!((e.value - expected).abs() < 1e-14, "{} vs {expected}", e.value);
        assert!((expected - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dissipation_two_cell_example() {
        let model = ProblemModel::<f64>::linear_drift_power_diffusion(2.0, 0.0).unwrap();
        let disc = crate::solver::Discretization::new(
            model,
            unit_cells(2),
            BoundaryCondition::zero_flux(1),
            FluxScheme::for_kind(FluxKind::Fu1),
        )
        .unwrap();
        assert_eq!(discrete_dissipation(&disc, &[1.0, 2.0]), 4.0);
        assert_eq!(discrete_dissipation(&disc, &[1.5, 1.5]), 0.0);
        let _ = State::new(vec![0.0], 0.0);
    }

    #[test]
    fn l1_examples() {
        let mesh = MeshND::new(vec![Mesh1D::from_interfaces(vec![0.0, 0.5, 2.0]).unwrap()]).unwrap();
        assert_eq!(l1_distance(&[1.0, 2.0], &[1.0, 2.0], &mesh).unwrap(), 0.0);
        assert_eq!(l1_distance(&[1.0, 2.0], &[1.5, 2.5], &mesh).unwrap(), 1.0);
        assert!(matches!(l1_distance(&[1.0], &[1.0, 2.0], &mesh), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn decay_fit_examples() {
        let exact: Vec<(f64, f64)> = (0..=100).map(|k| {
            let t = k as f64 / 100.0;
            (t, (-3.0 * t).exp())
        }).collect();
        let fit = fit_decay_rate(&exact, Some((0.0, 1.0))).unwrap();
        assert!((fit.rate - 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);

        let flat: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 2.5)).collect();
        assert_eq!(fit_decay_rate(&flat, Some((0.0, 9.0))).unwrap().rate, 0.0);

        let floored: Vec<(f64, f64)> = (0..=1000).map(|k| {
            let t = k as f64 / 1000.0;
            (t, 5.0 * (-6.0 * t).exp() + 1e-14)
        }).collect();
        let fit = fit_decay_rate(&floored, None).unwrap();
        assert!((5.9..=6.0).contains(&fit.rate), "{}", fit.rate);
    }

    #[test]
    fn decay_fit_rejects_bad_windows() {
        let short: Vec<(f64, f64)> = (0..4).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_decay_rate(&short, Some((0.0, 3.0))).is_err());
        let neg: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 1.0 - k as f64 / 5.0)).collect();
        assert!(matches!(fit_decay_rate(&neg, Some((0.0, 9.0))), Err(Error::InvalidSeries(_))));
    }

    #[test]
    fn default_window_stops_at_the_floor() {
        let series: Vec<(f64, f64)> = (0..=100).map(|k| {
            let t = k as f64;
            (t, if t < 40.0 { (-t).exp() } else { 0.0 })
        }).collect();
        let (lo, hi) = default_window(&series).unwrap();
        assert_eq!(lo, 25.0);
        assert!(hi <= 40.0);
    }

    #[test]
    fn convergence_table_orders() {
        // synthetic solutions u_n = exact + c/n² per cell: second order
        let solve = |n: usize| -> Result<(MeshND<f64>, Vec<f64>)> {
            let mesh = MeshND::new(vec![Mesh1D::uniform(0.0, 1.0, n)?])?;
            let vals = mesh.axis(0).centers().iter().map(|_| 1.0 + 1.0 / (n * n) as f64).collect();
            Ok((mesh, vals))
        };
        let table = convergence_study(&[10, 20, 40, 80], solve).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.rows[0].order, None);
        assert!((table.finest_order().unwrap() - 2.0).abs() < 1e-10);
        assert!(convergence_study(&[10, 30], solve).is_err());
        assert!(convergence_study(&[10], solve).is_err());
    }

    proptest! {
        #[test]
        fn l1_triangle_inequality(
            a in prop::collection::vec(-5.0f64..5.0, 6),
            b in prop::collection::vec(-5.0f64..5.0, 6),
            c in prop::collection::vec(-5.0f64..5.0, 6),
        ) {
            let mesh = unit_cells(6);
            let ab = l1_distance(&a, &b, &mesh).unwrap();
            let bc = l1_distance(&b, &c, &mesh).unwrap();
            let ac = l1_distance(&a, &c, &mesh).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn entropy_is_nonnegative_and_permutation_invariant(
            u in prop::collection::vec(0.0f64..3.0, 5), eq in prop::collection::vec(0.05f64..3.0, 5), m in 1.0f64..5.0,
        ) {
            let model = ProblemModel::<f64>::linear_drift_power_diffusion(m, 0.0).unwrap();
            let mesh = unit_cells(5);
            let e = discrete_entropy(&u, &eq, &model, &mesh).unwrap().value;
            prop_assert!(e >= -1e-12);
            let mut ur = u.clone();
            let mut er = eq.clone();
            ur.reverse();
            er.reverse();
            let e2 = discrete_entropy(&ur, &er, &model, &mesh).unwrap().value;
            prop_assert!((e - e2).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }
}
