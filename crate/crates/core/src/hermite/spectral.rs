use std::sync::Arc;

use super::grid::{FieldClass, Grid, GridKind, PhysicalField, PointFn};
use super::hermite_functions;
use super::multi_index::{basis_size, level_offset, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients `c_α = ⟨g, Φ_α⟩` over the total-degree basis `|α|₁ ≤ N`,
/// stored in the order of [`MultiIndex::position`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    dim: usize,
    max_degree: usize,
    coeffs: Vec<T>,
}

/// Level `|α|₁` of the basis function at `pos`.
pub(crate) fn level_of(pos: usize, dim: usize) -> usize {
    if dim == 1 {
        return pos;
    }
    let mut k = ((((8 * pos + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while level_offset(k + 1, 2) <= pos {
        k += 1;
    }
    while level_offset(k, 2) > pos {
        k -= 1;
    }
    k
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(dim: usize, max_degree: usize) -> Result<Self> {
        let n = basis_size(dim, max_degree)?;
        Ok(Self { dim, max_degree, coeffs: vec![T::zero(); n] })
    }

    pub fn from_coeffs(dim: usize, max_degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let n = basis_size(dim, max_degree)?;
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: coeffs.len() });
        }
        if let Some(i) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dim, max_degree, coeffs })
    }

    /// The single basis function `Φ_α`.
    pub fn basis_function(alpha: &MultiIndex, max_degree: usize) -> Result<Self> {
        let mut f = Self::zeros(alpha.dim(), max_degree)?;
        f.set(alpha, T::one())?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    /// Coefficient of `Φ_α`; zero beyond the truncation degree.
    pub fn get(&self, alpha: &MultiIndex) -> T {
        if alpha.dim() != self.dim || alpha.degree() > self.max_degree {
            T::zero()
        } else {
            self.coeffs[alpha.position()]
        }
    }

    pub fn set(&mut self, alpha: &MultiIndex, value: T) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: alpha.dim() });
        }
        if alpha.degree() > self.max_degree {
            return Err(Error::InvalidParameter(format!("index of degree {} exceeds truncation {}", alpha.degree(), self.max_degree)));
        }
        self.coeffs[alpha.position()] = value;
        Ok(())
    }

    /// `(α, c_α)` pairs in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, T)> + '_ {
        self.coeffs.iter().enumerate().map(move |(p, &c)| (MultiIndex::from_position(p, self.dim).expect("valid dimension"), c))
    }

    /// Level `|α|₁` of each stored coefficient.
    pub fn levels(&self) -> Vec<usize> {
        (0..self.coeffs.len()).map(|p| level_of(p, self.dim)).collect()
    }

    /// ℓ² norm of the coefficients (the L² norm of the synthesized function).
    pub fn l2_norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.max_degree != other.max_degree {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: T, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self { dim: self.dim, max_degree: self.max_degree, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&x, &y)| x + a * y).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-T::one(), other)
    }

    pub fn scaled(&self, a: T) -> Self {
        Self { dim: self.dim, max_degree: self.max_degree, coeffs: self.coeffs.iter().map(|&c| a * c).collect() }
    }

    /// ℓ² distance to `other`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt())
    }

    /// Fraction of `Σ c²` carried by levels strictly above `level`.
    pub fn tail_fraction(&self, level: usize) -> T {
        let total: T = self.coeffs.iter().map(|&c| c * c).sum();
        if total == T::zero() {
            return T::zero();
        }
        let start = level_offset(level + 1, self.dim).min(self.coeffs.len());
        let tail: T = self.coeffs[start..].iter().map(|&c| c * c).sum();
        tail / total
    }

    /// Re-truncates (or zero-pads) to a new maximal degree.
    pub fn with_max_degree(&self, max_degree: usize) -> Result<Self> {
        let mut out = Self::zeros(self.dim, max_degree)?;
        let keep = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

impl<T: Real> PointFn<T> for SpectralField<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[T]) -> T {
        let n = self.max_degree + 1;
        match self.dim {
            1 => {
                let mut h = vec![T::zero(); n];
                hermite_functions(x[0], &mut h);
                h.iter().zip(&self.coeffs).map(|(&a, &b)| a * b).sum()
            }
            _ => {
                let mut h0 = vec![T::zero(); n];
                let mut h1 = vec![T::zero(); n];
                hermite_functions(x[0], &mut h0);
                hermite_functions(x[1], &mut h1);
                let mut acc = T::zero();
                for k in 0..n {
                    let off = level_offset(k, 2);
                    for b in 0..=k {
                        acc += self.coeffs[off + b] * h0[k - b] * h1[b];
                    }
                }
                acc
            }
        }
    }
}

/// Precomputed Hermite table `h_k(x_i)` for one grid axis and `k ≤ N`.
#[derive(Debug, Clone)]
pub struct SpectralPlan<T> {
    grid: Arc<Grid<T>>,
    max_degree: usize,
    table: Vec<T>,
}

impl<T: Real> SpectralPlan<T> {
    pub fn new(grid: Arc<Grid<T>>, max_degree: usize) -> Self {
        let n = grid.order();
        let mut table = vec![T::zero(); (max_degree + 1) * n];
        let mut buf = vec![T::zero(); max_degree + 1];
        for (i, &x) in grid.axis().iter().enumerate() {
            hermite_functions(x, &mut buf);
            for (k, &v) in buf.iter().enumerate() {
                table[k * n + i] = v;
            }
        }
        Self { grid, max_degree, table }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    #[inline]
    fn row(&self, k: usize) -> &[T] {
        let n = self.grid.order();
        &self.table[k * n..(k + 1) * n]
    }

    /// Quadrature coefficients from node values (no finiteness check).
    ///
    /// Requires a Gauss–Hermite grid with at least `2N+1` nodes per axis.
    pub fn forward_values(&self, values: &[T], max_degree: usize) -> Result<SpectralField<T>> {
        let order = self.grid.order();
        if !matches!(self.grid.kind(), GridKind::GaussHermite(_)) {
            return Err(Error::NotGaussHermiteGrid);
        }
        if order < 2 * max_degree + 1 || max_degree > self.max_degree {
            return Err(Error::UnderResolvedGrid { order, degree: max_degree, required: 2 * max_degree + 1 });
        }
        if values.len() != self.grid.len() {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), got: values.len() });
        }
        let w = self.grid.axis_weights();
        let dim = self.grid.dim();
        let mut out = SpectralField::zeros(dim, max_degree)?;
        match dim {
            1 => {
                for k in 0..=max_degree {
                    out.coeffs[k] = self.row(k).iter().zip(w).zip(values).map(|((&h, &wi), &v)| h * wi * v).sum();
                }
            }
            _ => {
                // g[a][j] = Σ_i w_i h_a(x_i) f(x_i, y_j)
                let mut g = vec![T::zero(); (max_degree + 1) * order];
                for a in 0..=max_degree {
                    let ha = self.row(a);
                    let ga = &mut g[a * order..(a + 1) * order];
                    for i in 0..order {
                        let s = w[i] * ha[i];
                        let row = &values[i * order..(i + 1) * order];
                        for (gj, &v) in ga.iter_mut().zip(row) {
                            *gj += s * v;
                        }
                    }
                }
                for k in 0..=max_degree {
                    let off = level_offset(k, 2);
                    for b in 0..=k {
                        let a = k - b;
                        let ga = &g[a * order..(a + 1) * order];
                        out.coeffs[off + b] = self.row(b).iter().zip(w).zip(ga).map(|((&h, &wj), &v)| h * wj * v).sum();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn forward(&self, f: &PhysicalField<T>, max_degree: usize) -> Result<SpectralField<T>> {
        if f.grid().as_ref() != self.grid.as_ref() {
            return Err(Error::ShapeMismatch);
        }
        self.forward_values(f.values(), max_degree)
    }

    /// Node values `Σ_α c_α Φ_α(x)` (no finiteness check).
    pub fn inverse_values(&self, c: &SpectralField<T>) -> Result<Vec<T>> {
        if c.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch { expected: self.grid.dim(), got: c.dim() });
        }
        if c.max_degree() > self.max_degree {
            return Err(Error::InvalidParameter(format!("plan built for degree {} cannot synthesize degree {}", self.max_degree, c.max_degree())));
        }
        let order = self.grid.order();
        let nd = c.max_degree();
        let mut out = vec![T::zero(); self.grid.len()];
        match c.dim() {
            1 => {
                for k in 0..=nd {
                    let ck = c.coeffs[k];
                    if ck == T::zero() {
                        continue;
                    }
                    for (o, &h) in out.iter_mut().zip(self.row(k)) {
                        *o += ck * h;
                    }
                }
            }
            _ => {
                // b_mat[a][j] = Σ_b c_(a,b) h_b(y_j)
                let mut bm = vec![T::zero(); (nd + 1) * order];
                for a in 0..=nd {
                    let ba = &mut bm[a * order..(a + 1) * order];
                    for b in 0..=(nd - a) {
                        let cab = c.coeffs[level_offset(a + b, 2) + b];
                        if cab == T::zero() {
                            continue;
                        }
                        for (o, &h) in ba.iter_mut().zip(&self.table[b * order..(b + 1) * order]) {
                            *o += cab * h;
                        }
                    }
                }
                for i in 0..order {
                    let row = &mut out[i * order..(i + 1) * order];
                    for a in 0..=nd {
                        let ha = self.table[a * order + i];
                        for (o, &v) in row.iter_mut().zip(&bm[a * order..(a + 1) * order]) {
                            *o += ha * v;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, c: &SpectralField<T>) -> Result<PhysicalField<T>> {
        Ok(PhysicalField::new(self.grid.clone(), self.inverse_values(c)?)?.with_class(FieldClass::ExpLp0))
    }
}

/// `c_α ≈ ⟨f, Φ_α⟩` by Gauss–Hermite quadrature on the field's own grid.
pub fn forward_transform<T: Real>(f: &PhysicalField<T>, max_degree: usize) -> Result<SpectralField<T>> {
    SpectralPlan::new(f.grid().clone(), max_degree).forward(f, max_degree)
}

/// `Σ_{|α|₁≤N} c_α Φ_α` sampled on `grid`.
pub fn inverse_transform<T: Real>(c: &SpectralField<T>, grid: Arc<Grid<T>>) -> Result<PhysicalField<T>> {
    SpectralPlan::new(grid, c.max_degree()).inverse(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gh(dim: usize, n: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::gauss_hermite(dim, 2 * n + 4).unwrap())
    }

    #[test]
    fn level_lookup_matches_enumeration() {
        for p in 0..500 {
            assert_eq!(level_of(p, 2), MultiIndex::from_position(p, 2).unwrap().degree());
        }
    }

    #[test]
    fn basis_function_transforms_to_unit_vector() {
        let n = 12;
        let alpha = MultiIndex::new(vec![2]).unwrap();
        let c = SpectralField::<f64>::basis_function(&alpha, n).unwrap();
        let f = inverse_transform(&c, gh(1, n)).unwrap();
        let back = forward_transform(&f, n).unwrap();
        for (k, v) in back.coeffs().iter().enumerate() {
            assert_abs_diff_eq!(*v, if k == 2 { 1.0 } else { 0.0 }, epsilon = 1e-10);
        }
    }

    #[test]
    fn linear_combination_coefficients() {
        let grid = gh(1, 8);
        let f = PhysicalField::sample(grid, |x| super::super::hermite_function(0, x[0]) + 0.5 * super::super::hermite_function(3, x[0])).unwrap();
        let c = forward_transform(&f, 8).unwrap();
        assert_abs_diff_eq!(c.coeffs()[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.coeffs()[3], 0.5, epsilon = 1e-10);
        assert!(c.coeffs().iter().enumerate().filter(|(k, _)| *k != 0 && *k != 3).all(|(_, v)| v.abs() < 1e-10));
    }

    #[test]
    fn zero_field_round_trip() {
        let grid = gh(2, 6);
        let z = PhysicalField::zeros(grid);
        let c = forward_transform(&z, 6).unwrap();
        assert!(c.coeffs().iter().all(|&v| v == 0.0));
        let back = inverse_transform(&SpectralField::<f64>::zeros(2, 6).unwrap(), Arc::new(Grid::uniform(2, 3.0, 7).unwrap())).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn odd_mode_vanishes_at_origin() {
        let mut c = SpectralField::<f64>::zeros(2, 4).unwrap();
        c.set(&MultiIndex::new(vec![1, 1]).unwrap(), 1.0).unwrap();
        assert_eq!(c.eval(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let grid = Arc::new(Grid::<f64>::gauss_hermite(1, 10).unwrap());
        let f = PhysicalField::zeros(grid);
        assert!(matches!(forward_transform(&f, 5), Err(Error::UnderResolvedGrid { required: 11, .. })));
        let uni = PhysicalField::zeros(Arc::new(Grid::<f64>::uniform(1, 3.0, 11).unwrap()));
        assert!(matches!(forward_transform(&uni, 2), Err(Error::NotGaussHermiteGrid)));
    }

    #[test]
    fn two_dimensional_round_trip_and_point_eval() {
        let n = 10;
        let coeffs: Vec<f64> = (0..basis_size(2, n).unwrap()).map(|p| ((p * 37 % 11) as f64 - 5.0) / (1.0 + p as f64)).collect();
        let c = SpectralField::from_coeffs(2, n, coeffs).unwrap();
        let grid = gh(2, n);
        let f = inverse_transform(&c, grid.clone()).unwrap();
        let back = forward_transform(&f, n).unwrap();
        assert!(back.distance(&c).unwrap() < 1e-12);
        for i in [0, 17, 300] {
            let p = grid.point(i);
            assert_abs_diff_eq!(f.values()[i], c.eval(&p), epsilon = 1e-13);
        }
    }

    #[test]
    fn tail_fraction_counts_upper_levels() {
        let mut c = SpectralField::<f64>::zeros(1, 5).unwrap();
        c.coeffs_mut()[0] = 1.0;
        c.coeffs_mut()[5] = 1.0;
        assert_abs_diff_eq!(c.tail_fraction(3), 0.5, epsilon = 1e-15);
        assert_eq!(SpectralField::<f64>::zeros(1, 5).unwrap().tail_fraction(2), 0.0);
    }
}
