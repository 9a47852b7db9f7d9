//! One-dimensional meshes and their Cartesian products.
//!
//! A [`Mesh1D`] stores the interfaces `a = x_{1/2} < ... < x_{N+1/2} = b`
//! together with the derived cell centers, widths and center-to-center
//! distances. The distance array has `N + 1` entries: entry `k` belongs to
//! interface `x_{k+1/2}`, and the two boundary entries measure the distance
//! from the first/last center to the domain boundary.
//!
//! [`MeshND`] is the tensor product of one to three axes. Cells are
//! flattened row-major in axis order, so the last axis varies fastest.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D<T> {
    interfaces: Vec<T>,
    centers: Vec<T>,
    widths: Vec<T>,
    distances: Vec<T>,
    uniform: bool,
}

impl<T: Real> Mesh1D<T> {
    /// `n_cells` cells of width `(b - a) / n_cells`.
    pub fn uniform(a: T, b: T, n_cells: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "bounds must satisfy a < b, got a = {a}, b = {b}"
            )));
        }
        if n_cells == 0 {
            return Err(Error::InvalidMesh("n_cells must be at least 1".into()));
        }
        let n = T::from_usize_lossy(n_cells);
        let width = (b - a) / n;
        let half = width / T::lit(2.0);
        let mut interfaces: Vec<T> = (0..=n_cells)
            .map(|i| a + (b - a) * T::from_usize_lossy(i) / n)
            .collect();
        interfaces[n_cells] = b;
        let centers = (0..n_cells)
            .map(|i| a + (b - a) * (T::from_usize_lossy(i) + T::lit(0.5)) / n)
            .collect();
        let widths = vec![width; n_cells];
        let mut distances = vec![width; n_cells + 1];
        distances[0] = half;
        distances[n_cells] = half;
        Ok(Self {
            interfaces,
            centers,
            widths,
            distances,
            uniform: true,
        })
    }

    /// Mesh with the given interface coordinates.
    pub fn from_interfaces(interfaces: Vec<T>) -> Result<Self> {
        if interfaces.len() < 2 {
            return Err(Error::InvalidMesh(
                "at least two interface coordinates are required".into(),
            ));
        }
        if interfaces.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("interfaces must be finite".into()));
        }
        if let Some(k) = interfaces.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMesh(format!(
                "interfaces must be strictly increasing (violated at index {})",
                k + 1
            )));
        }
        let n = interfaces.len() - 1;
        let two = T::lit(2.0);
        let centers: Vec<T> = interfaces.windows(2).map(|w| (w[0] + w[1]) / two).collect();
        let widths: Vec<T> = interfaces.windows(2).map(|w| w[1] - w[0]).collect();
        let mut distances = Vec::with_capacity(n + 1);
        distances.push(centers[0] - interfaces[0]);
        distances.extend(centers.windows(2).map(|w| w[1] - w[0]));
        distances.push(interfaces[n] - centers[n - 1]);
        Ok(Self {
            interfaces,
            centers,
            widths,
            distances,
            uniform: false,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    pub fn lower(&self) -> T {
        self.interfaces[0]
    }

    pub fn upper(&self) -> T {
        self.interfaces[self.n_cells()]
    }

    pub fn length(&self) -> T {
        self.upper() - self.lower()
    }

    pub fn interfaces(&self) -> &[T] {
        &self.interfaces
    }

    pub fn centers(&self) -> &[T] {
        &self.centers
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    /// Center-to-center distances, boundary entries measured to the boundary.
    pub fn interface_distances(&self) -> &[T] {
        &self.distances
    }

    pub fn min_width(&self) -> T {
        self.widths.iter().copied().fold(T::infinity(), T::min)
    }

    /// True when every cell has the same width (to 1e-12 relative).
    pub fn is_uniform(&self) -> bool {
        if self.uniform {
            return true;
        }
        let w0 = self.widths[0];
        let tol = T::lit(1e-12) * w0;
        self.widths.iter().all(|&w| (w - w0).abs() <= tol)
    }

    /// The mesh with every pair of neighbouring cells merged.
    pub fn coarsened(&self) -> Result<Self> {
        let n = self.n_cells();
        if n % 2 != 0 {
            return Err(Error::InvalidMesh(format!(
                "cannot halve an axis with an odd cell count ({n})"
            )));
        }
        if self.uniform {
            Self::uniform(self.lower(), self.upper(), n / 2)
        } else {
            Self::from_interfaces(self.interfaces.iter().copied().step_by(2).collect())
        }
    }
}

/// Cartesian product of one to three [`Mesh1D`] axes.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshND<T> {
    axes: Vec<Mesh1D<T>>,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

impl<T: Real> MeshND<T> {
    pub fn new(axes: Vec<Mesh1D<T>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidMesh(format!(
                "a Cartesian mesh needs 1 to 3 axes, got {}",
                axes.len()
            )));
        }
        let counts: Vec<usize> = axes.iter().map(Mesh1D::n_cells).collect();
        let mut strides = vec![1; counts.len()];
        for j in (0..counts.len() - 1).rev() {
            strides[j] = strides[j + 1] * counts[j + 1];
        }
        Ok(Self {
            axes,
            counts,
            strides,
        })
    }

    /// Uniform mesh on the box `lower[j] .. upper[j]` with `cells[j]` cells per axis.
    pub fn uniform_box(lower: &[T], upper: &[T], cells: &[usize]) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != cells.len() {
            return Err(Error::InvalidMesh(
                "box bounds and cell counts must have the same length".into(),
            ));
        }
        let axes = lower
            .iter()
            .zip(upper)
            .zip(cells)
            .map(|((&a, &b), &n)| Mesh1D::uniform(a, b, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Mesh1D<T>] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &Mesh1D<T> {
        &self.axes[j]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn n_cells(&self) -> usize {
        self.counts.iter().product()
    }

    /// Flat index of a multi-index.
    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Multi-index of a flat index.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (j, &s) in self.strides.iter().enumerate() {
            out[j] = flat / s;
            flat %= s;
        }
        out
    }

    /// Coordinates of a cell center (unused trailing entries are zero).
    pub fn center(&self, flat: usize) -> [T; 3] {
        let multi = self.multi_index(flat);
        let mut x = [T::zero(); 3];
        for (j, axis) in self.axes.iter().enumerate() {
            x[j] = axis.centers()[multi[j]];
        }
        x
    }

    pub fn cell_volume(&self, flat: usize) -> T {
        let multi = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .fold(T::one(), |v, (j, axis)| v * axis.widths()[multi[j]])
    }

    pub fn volumes(&self) -> Vec<T> {
        (0..self.n_cells()).map(|k| self.cell_volume(k)).collect()
    }

    /// Number of grid lines running along `axis`.
    pub fn n_lines(&self, axis: usize) -> usize {
        self.n_cells() / self.counts[axis]
    }

    /// Flat index of the first cell of line `line` along `axis`; consecutive
    /// cells of the line are `strides()[axis]` apart.
    pub fn line_start(&self, axis: usize, line: usize) -> usize {
        let stride = self.strides[axis];
        let outer = line / stride;
        let inner = line % stride;
        outer * stride * self.counts[axis] + inner
    }

    /// Product of the widths of the axes other than `axis` for the line
    /// containing `flat`; this is the area of the faces normal to `axis`.
    pub fn face_area(&self, axis: usize, flat: usize) -> T {
        let multi = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != axis)
            .fold(T::one(), |v, (j, ax)| v * ax.widths()[multi[j]])
    }

    pub fn is_uniform(&self) -> bool {
        self.axes.iter().all(Mesh1D::is_uniform)
    }

    pub fn coarsened(&self) -> Result<Self> {
        Self::new(
            self.axes
                .iter()
                .map(Mesh1D::coarsened)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Total mass `sum_i m(K_i) U_i`.
    pub fn integrate(&self, values: &[T]) -> T {
        (0..self.n_cells())
            .map(|k| self.cell_volume(k) * values[k])
            .sum()
    }
}

/// Restricts cell averages from a uniform mesh to the mesh with every axis
/// halved. Each coarse value is the average of its `2^d` children, so the
/// discrete mass is preserved.
pub fn restrict_halving<T: Real>(mesh: &MeshND<T>, fine: &[T]) -> Result<(MeshND<T>, Vec<T>)> {
    if fine.len() != mesh.n_cells() {
        return Err(Error::ShapeMismatch {
            expected: mesh.n_cells(),
            got: fine.len(),
        });
    }
    if !mesh.is_uniform() {
        return Err(Error::InvalidMesh(
            "restriction requires a uniform fine mesh".into(),
        ));
    }
    let coarse = mesh.coarsened()?;
    let d = mesh.dim();
    let children = 1usize << d;
    let weight = T::one() / T::from_usize_lossy(children);
    let mut out = vec![T::zero(); coarse.n_cells()];
    for (k, slot) in out.iter_mut().enumerate() {
        let cm = coarse.multi_index(k);
        let mut acc = T::zero();
        for c in 0..children {
            let mut fm = [0usize; 3];
            for j in 0..d {
                fm[j] = 2 * cm[j] + ((c >> j) & 1);
            }
            acc = acc + fine[mesh.index(&fm[..d])];
        }
        *slot = acc * weight;
    }
    Ok((coarse, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_four_cells() {
        let m = Mesh1D::uniform(-1.0, 1.0, 4).unwrap();
        assert_eq!(m.widths(), &[0.5; 4]);
        assert_eq!(m.centers(), &[-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(m.interface_distances(), &[0.25, 0.5, 0.5, 0.5, 0.25]);
    }

    #[test]
    fn single_cell() {
        let m = Mesh1D::uniform(0.0, 1.0, 1).unwrap();
        assert_eq!(m.centers(), &[0.5]);
        assert_eq!(m.widths(), &[1.0]);
    }

    #[test]
    fn example5_grid() {
        let m = Mesh1D::uniform(-5.5, 5.5, 160).unwrap();
        assert!(m.widths().iter().all(|&w| (w - 0.06875f64).abs() < 1e-15));
        let total: f64 = m.widths().iter().sum();
        assert!((total - 11.0).abs() <= 1e-14 * 11.0);
    }

    #[test]
    fn rejects_bad_uniform_input() {
        assert!(Mesh1D::uniform(1.0, 1.0, 3).is_err());
        assert!(Mesh1D::uniform(2.0, 1.0, 3).is_err());
        assert!(Mesh1D::uniform(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn nonuniform_meshes() {
        let m = Mesh1D::from_interfaces(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(m.centers(), &[0.25, 0.75]);

        let m = Mesh1D::from_interfaces(vec![0.0, 0.25, 1.0]).unwrap();
        assert_eq!(m.widths(), &[0.25, 0.75]);
        assert_eq!(m.interface_distances()[1], 0.5);
        assert_eq!(m.interface_distances()[0], 0.125);
        assert_eq!(m.interface_distances()[2], 0.375);

        let m = Mesh1D::from_interfaces(vec![0.0, 0.1, 0.2, 0.4, 0.8]).unwrap();
        assert_eq!(m.n_cells(), 4);
        let w = m.widths();
        assert!((w[0] - 0.1f64).abs() < 1e-15 && (w[3] - 0.4f64).abs() < 1e-15);
        assert!(!m.is_uniform());
    }

    #[test]
    fn rejects_non_monotone_interfaces() {
        assert!(Mesh1D::from_interfaces(vec![0.0, 0.5, 0.5]).is_err());
        assert!(Mesh1D::from_interfaces(vec![1.0, 0.0]).is_err());
        assert!(Mesh1D::from_interfaces(vec![1.0]).is_err());
    }

    #[test]
    fn cartesian_counts() {
        let ax = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let m = MeshND::new(vec![ax]).unwrap();
        assert_eq!((m.dim(), m.n_cells()), (1, 4));

        let ax = Mesh1D::uniform(0.0, 1.0, 32).unwrap();
        let m = MeshND::new(vec![ax.clone(), ax]).unwrap();
        assert_eq!(m.n_cells(), 1024);

        let m = MeshND::uniform_box(&[-8.0; 3], &[8.0; 3], &[40; 3]).unwrap();
        assert_eq!(m.n_cells(), 64000);
        assert!((m.cell_volume(17) - 0.4f64.powi(3)).abs() < 1e-15);

        assert!(MeshND::<f64>::new(vec![]).is_err());
        let ax = Mesh1D::uniform(0.0, 1.0, 2).unwrap();
        assert!(MeshND::new(vec![ax.clone(), ax.clone(), ax.clone(), ax]).is_err());
    }

    #[test]
    fn row_major_indexing_and_lines() {
        let m = MeshND::uniform_box(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[2, 3, 4]).unwrap();
        assert_eq!(m.strides(), &[12, 4, 1]);
        assert_eq!(m.index(&[1, 2, 3]), 23);
        assert_eq!(m.multi_index(23), [1, 2, 3]);
        // lines along the middle axis start at (i, 0, k)
        let starts: Vec<usize> = (0..m.n_lines(1)).map(|l| m.line_start(1, l)).collect();
        assert_eq!(starts, vec![0, 1, 2, 3, 12, 13, 14, 15]);
        let starts: Vec<usize> = (0..m.n_lines(2)).map(|l| m.line_start(2, l)).collect();
        assert_eq!(starts, vec![0, 4, 8, 12, 16, 20]);
    }

    #[test]
    fn restriction_examples() {
        let mesh = MeshND::uniform_box(&[0.0], &[1.0], &[2]).unwrap();
        let (coarse, v) = restrict_halving(&mesh, &[1.0, 3.0]).unwrap();
        assert_eq!(v, vec![2.0]);
        assert_eq!(coarse.n_cells(), 1);

        let mesh = MeshND::uniform_box(&[0.0], &[1.0], &[4]).unwrap();
        let (_, v) = restrict_halving(&mesh, &[0.3, 0.3, -7.0, -7.0]).unwrap();
        assert_eq!(v, vec![0.3, -7.0]);

        let mesh = MeshND::uniform_box(&[0.0, 0.0], &[1.0, 2.0], &[4, 4]).unwrap();
        let (_, v) = restrict_halving(&mesh, &[1.25; 16]).unwrap();
        assert_eq!(v, vec![1.25; 4]);
    }

    #[test]
    fn restriction_rejects_odd_and_nonuniform() {
        let mesh = MeshND::uniform_box(&[0.0], &[1.0], &[3]).unwrap();
        assert!(restrict_halving(&mesh, &[1.0, 2.0, 3.0]).is_err());
        let ax = Mesh1D::from_interfaces(vec![0.0, 0.1, 0.5, 1.0, 2.0]).unwrap();
        let mesh = MeshND::new(vec![ax]).unwrap();
        assert!(restrict_halving(&mesh, &[1.0; 4]).is_err());
    }
}
