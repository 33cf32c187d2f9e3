//! Gauss–Hermite and Gauss–Legendre rules and an adaptive panel integrator.

use crate::error::{Error, Result};
use crate::hermite::hermite_pair;
use crate::scalar::Real;

const MAX_NEWTON: usize = 100;

/// An `M`-point Gauss–Hermite rule for the weight `e^{-x²}`.
///
/// `scaled_weights[i] = weights[i]·e^{x_i²}` is what the transforms use; the
/// plain weights of the outermost nodes underflow to zero for large `M` while
/// the scaled ones stay well conditioned.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    scaled_weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Builds the rule by Newton iteration on `h_M`, with asymptotic initial guesses.
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if !(1..=512).contains(&order) {
            return Err(Error::QuadratureOrder(order));
        }
        let m = order;
        let mf = T::from_count(m);
        let two = T::lit(2.0);
        let tol = T::epsilon() * T::lit(16.0);
        let half = m.div_ceil(2);
        let mut pos = vec![T::zero(); half];
        let mut sw = vec![T::zero(); half];
        let mut z = T::zero();
        for i in 0..half {
            z = match i {
                0 => (two * mf + T::one()).sqrt() - T::lit(1.85575) * (two * mf + T::one()).powf(T::lit(-0.16667)),
                1 => z - T::lit(1.14) * mf.powf(T::lit(0.426)) / z,
                2 => T::lit(1.86) * z - T::lit(0.86) * pos[0],
                3 => T::lit(1.91) * z - T::lit(0.91) * pos[1],
                _ => two * z - pos[i - 2],
            };
            let mut prev = T::zero();
            for _ in 0..MAX_NEWTON {
                let (hm, hm1) = hermite_pair(m, z);
                let dh = (two * mf).sqrt() * hm1 - z * hm;
                let dz = hm / dh;
                z -= dz;
                prev = hm1;
                if dz.abs() <= tol * z.abs().max(T::one()) {
                    break;
                }
            }
            let (_, hm1) = hermite_pair(m, z);
            let hm1 = if hm1.is_finite() { hm1 } else { prev };
            pos[i] = z;
            sw[i] = T::one() / (mf * hm1 * hm1);
        }
        // Assemble in increasing order with exact symmetry.
        let mut nodes = vec![T::zero(); m];
        let mut scaled = vec![T::zero(); m];
        for i in 0..half {
            nodes[m - 1 - i] = pos[i].abs();
            nodes[i] = -pos[i].abs();
            scaled[m - 1 - i] = sw[i];
            scaled[i] = sw[i];
        }
        if m % 2 == 1 {
            nodes[m / 2] = T::zero();
        }
        let weights = nodes.iter().zip(&scaled).map(|(&x, &w)| w * (-x * x).exp()).collect();
        Ok(Self { nodes, weights, scaled_weights: scaled })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn scaled_weights(&self) -> &[T] {
        &self.scaled_weights
    }

    /// `Σ w_i g(x_i)`, i.e. `∫ g(x) e^{-x²} dx`.
    pub fn integrate<F: Fn(T) -> T>(&self, g: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// An `n`-point Gauss–Legendre rule on `[-1, 1]` as `(nodes, weights)`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::from_count(n);
    let tol = T::epsilon() * T::lit(8.0);
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut pp = T::one();
        for _ in 0..MAX_NEWTON {
            let mut p1 = T::one();
            let mut p2 = T::zero();
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = T::from_count(j);
                p1 = ((T::lit(2.0) * jf + T::one()) * z * p2 - jf * p3) / (jf + T::one());
            }
            pp = nf * (z * p1 - p2) / (z * z - T::one());
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= tol {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = T::lit(2.0) / ((T::one() - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed Gauss–Legendre panel rule with globally adaptive bisection.
#[derive(Debug, Clone)]
pub struct PanelIntegrator<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    max_subdivisions: usize,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    /// Summed `|halves − whole|` estimate over the final panels.
    pub error: T,
    /// Number of integrand evaluations.
    pub evaluations: usize,
    /// False if the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
}

struct Panel<T> {
    lo: T,
    hi: T,
    left: T,
    right: T,
    err: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl<T: Real> PanelIntegrator<T> {
    pub fn new(points: usize) -> Self {
        let (nodes, weights) = gauss_legendre(points);
        Self { nodes, weights, max_subdivisions: 20_000 }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    /// Single-panel rule on `[a, b]`.
    pub fn panel<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<T>() * half
    }

    fn make_panel<F: FnMut(T) -> T>(&self, f: &mut F, lo: T, hi: T, whole: T, evals: &mut usize) -> Panel<T> {
        let mid = (lo + hi) / T::lit(2.0);
        let left = self.panel(f, lo, mid);
        let right = self.panel(f, mid, hi);
        *evals += 2 * self.nodes.len();
        let mut err = (left + right - whole).abs();
        if !err.is_finite() {
            err = T::infinity();
        }
        Panel { lo, hi, left, right, err }
    }

    /// Integrates over `[a, b]` split at `breaks` (points outside are ignored)
    /// into `initial_panels` equal pieces per segment, then bisects the panel
    /// with the largest error estimate until the summed estimate is at most
    /// `max(abs_tol, rel_tol·|value|)`.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T, breaks: &[T], initial_panels: usize, abs_tol: T, rel_tol: T) -> Integral<T> {
        let mut cuts = vec![a];
        let mut inner: Vec<T> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
        inner.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        cuts.extend(inner);
        cuts.push(b);
        let per = initial_panels.max(1);
        let mut evaluations = 0;
        let mut heap = std::collections::BinaryHeap::new();
        for w in cuts.windows(2) {
            let width = (w[1] - w[0]) / T::from_count(per);
            for j in 0..per {
                let lo = w[0] + width * T::from_count(j);
                let hi = if j + 1 == per { w[1] } else { lo + width };
                let whole = self.panel(&mut f, lo, hi);
                evaluations += self.nodes.len();
                heap.push(self.make_panel(&mut f, lo, hi, whole, &mut evaluations));
            }
        }
        let eps = T::epsilon();
        let mut frozen_value = T::zero();
        let mut frozen_err = T::zero();
        let mut splits = 0;
        let mut converged = false;
        loop {
            let value: T = frozen_value + heap.iter().map(|p: &Panel<T>| p.left + p.right).sum::<T>();
            let err: T = frozen_err + heap.iter().map(|p: &Panel<T>| p.err).sum::<T>();
            if err <= abs_tol.max(rel_tol * value.abs()) {
                converged = true;
            }
            if converged || splits >= self.max_subdivisions || heap.is_empty() {
                return Integral { value, error: err, evaluations, converged };
            }
            // Re-summing each pass is quadratic; only do it every so often.
            for _ in 0..heap.len().clamp(1, 64) {
                let Some(p) = heap.pop() else { break };
                let mid = (p.lo + p.hi) / T::lit(2.0);
                if p.err == T::zero() || (p.hi - p.lo) <= T::lit(64.0) * eps * (p.lo.abs() + p.hi.abs()) {
                    frozen_value += p.left + p.right;
                    frozen_err += p.err;
                    continue;
                }
                heap.push(self.make_panel(&mut f, p.lo, mid, p.left, &mut evaluations));
                heap.push(self.make_panel(&mut f, mid, p.hi, p.right, &mut evaluations));
                splits += 1;
            }
        }
    }
}
