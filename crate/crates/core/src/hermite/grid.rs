use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;

/// How the 1-D axis of a tensor grid was built.
#[derive(Debug, Clone, PartialEq)]
pub enum GridKind<T> {
    /// Gauss–Hermite nodes; integration uses the `e^{x²}`-scaled weights.
    GaussHermite(QuadratureRule<T>),
    /// Uniform nodes on `[-half_width, half_width]`; integration is composite Simpson.
    Uniform { half_width: T },
}

/// Tensor grid `axis^d` with per-axis integration weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    axis: Vec<T>,
    axis_weights: Vec<T>,
    kind: GridKind<T>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

impl<T: Real> Grid<T> {
    pub fn gauss_hermite(dim: usize, order: usize) -> Result<Self> {
        check_dim(dim)?;
        let rule = QuadratureRule::gauss_hermite(order)?;
        Ok(Self { dim, axis: rule.nodes().to_vec(), axis_weights: rule.scaled_weights().to_vec(), kind: GridKind::GaussHermite(rule) })
    }

    /// Uniform grid with `points` (odd, ≥ 3) nodes per axis.
    pub fn uniform(dim: usize, half_width: T, points: usize) -> Result<Self> {
        check_dim(dim)?;
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::UniformGridPoints(points));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("grid half-width must be positive, got {half_width}")));
        }
        let h = T::lit(2.0) * half_width / T::from_count(points - 1);
        let axis = (0..points).map(|i| -half_width + h * T::from_count(i)).collect();
        let third = h / T::lit(3.0);
        let axis_weights = (0..points)
            .map(|i| {
                if i == 0 || i == points - 1 {
                    third
                } else if i % 2 == 1 {
                    T::lit(4.0) * third
                } else {
                    T::lit(2.0) * third
                }
            })
            .collect();
        Ok(Self { dim, axis, axis_weights, kind: GridKind::Uniform { half_width } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axis(&self) -> &[T] {
        &self.axis
    }

    pub fn axis_weights(&self) -> &[T] {
        &self.axis_weights
    }

    pub fn kind(&self) -> &GridKind<T> {
        &self.kind
    }

    /// Nodes per axis.
    pub fn order(&self) -> usize {
        self.axis.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.axis.len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Coordinates of node `i` (row-major, last axis fastest).
    pub fn point(&self, i: usize) -> [T; 2] {
        let n = self.axis.len();
        match self.dim {
            1 => [self.axis[i], T::zero()],
            _ => [self.axis[i / n], self.axis[i % n]],
        }
    }

    pub fn weight(&self, i: usize) -> T {
        let n = self.axis.len();
        match self.dim {
            1 => self.axis_weights[i],
            _ => self.axis_weights[i / n] * self.axis_weights[i % n],
        }
    }

    /// `∫ g(v(x)) dx` by the grid's rule, `values` in node order.
    pub fn integrate_map<F: Fn(T) -> T>(&self, values: &[T], g: F) -> T {
        let n = self.axis.len();
        match self.dim {
            1 => values.iter().zip(&self.axis_weights).map(|(&v, &w)| w * g(v)).sum(),
            _ => self
                .axis_weights
                .iter()
                .enumerate()
                .map(|(i, &wi)| {
                    let row = &values[i * n..(i + 1) * n];
                    wi * row.iter().zip(&self.axis_weights).map(|(&v, &w)| w * g(v)).sum::<T>()
                })
                .sum(),
        }
    }

    pub fn integrate(&self, values: &[T]) -> T {
        self.integrate_map(values, |v| v)
    }

    /// Measure of the integration box (uniform grids) or `None` for Gauss–Hermite grids.
    pub fn box_volume(&self) -> Option<T> {
        match self.kind {
            GridKind::Uniform { half_width } => Some((T::lit(2.0) * half_width).powi(self.dim as i32)),
            GridKind::GaussHermite(_) => None,
        }
    }
}

/// What is known about a field's Orlicz-space membership.
///
/// Whether a sampled function lies in the "every α" subspace exp L^p_0 cannot
/// be decided from samples, so it is carried as metadata from construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FieldClass {
    /// Smooth and rapidly decaying (basis synthesis, compactly supported bumps).
    ExpLp0,
    /// Singular datum known to lie in exp L^p only.
    ExpLp,
    Unclassified,
}

/// Function values on a tensor grid. Non-finite values are rejected.
#[derive(Debug, Clone)]
pub struct PhysicalField<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
    class: FieldClass,
    sampled_sup: Option<T>,
}

impl<T: Real> PhysicalField<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values, class: FieldClass::Unclassified, sampled_sup: None })
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(&[T]) -> T>(grid: Arc<Grid<T>>, f: F) -> Result<Self> {
        let d = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![T::zero(); n], class: FieldClass::ExpLp0, sampled_sup: None }
    }

    pub fn with_class(mut self, class: FieldClass) -> Self {
        self.class = class;
        self
    }

    /// Records the supremum of the datum before any truncation (singular data).
    pub fn with_sampled_sup(mut self, sup: T) -> Self {
        self.sampled_sup = Some(sup);
        self
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn class(&self) -> FieldClass {
        self.class
    }

    pub fn sampled_sup(&self) -> Option<T> {
        self.sampled_sup
    }

    /// Grid maximum of `|f|`.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        let mut out = Self::new(self.grid.clone(), self.values.iter().map(|&v| c * v).collect())?;
        out.class = self.class;
        Ok(out)
    }

    /// Pointwise difference; both fields must live on the same grid.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch);
        }
        Self::new(self.grid.clone(), self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect())
    }

    /// Applies `g` pointwise.
    pub fn map<F: Fn(T) -> T>(&self, g: F) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| g(v)).collect())
    }
}

/// A function that can be evaluated at arbitrary points (needed by kernel quadrature).
pub trait PointFn<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[T]) -> T;

    /// Points along `axis` (other coordinates fixed to `fixed`) where the
    /// function is singular or non-smooth; used as quadrature breakpoints.
    fn kinks(&self, _axis: usize, _fixed: &[T]) -> Vec<T> {
        Vec::new()
    }
}

/// Wraps a closure as a [`PointFn`].
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
}

impl<T: Real, F: Fn(&[T]) -> T + Sync> PointFn<T> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }
}
