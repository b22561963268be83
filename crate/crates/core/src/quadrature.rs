//! One- and two-dimensional quadrature rules.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Composite Simpson rule with `n` (odd, ≥ 3) equispaced nodes on `[a, b]`.
pub fn simpson(a: f64, b: f64, n: usize) -> Result<Rule1d> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput("Simpson rule needs an odd node count of at least 3"));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        nodes.push(if i == n - 1 { b } else { a + h * i as f64 });
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weights.push(w * h / 3.0);
    }
    Ok(Rule1d { nodes, weights })
}

/// Composite midpoint rule with `n` cells on `[a, b]`.
///
/// On a full period this is the trapezoidal rule for periodic integrands,
/// exact for trigonometric polynomials of degree below `n`.
pub fn midpoint(a: f64, b: f64, n: usize) -> Result<Rule1d> {
    if n == 0 {
        return Err(Error::InvalidInput("midpoint rule needs at least one cell"));
    }
    let h = (b - a) / n as f64;
    let nodes = (0..n).map(|i| a + h * (i as f64 + 0.5)).collect();
    Ok(Rule1d { nodes, weights: alloc::vec![h; n] })
}

/// Tensor-product resolution: Simpson nodes in non-periodic directions,
/// midpoint cells in periodic ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub n: [usize; 2],
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { n: [257, 64] }
    }
}

impl QuadSpec {
    /// Doubles the number of cells in both directions.
    pub fn refined(&self, periodic: [bool; 2]) -> QuadSpec {
        let step = |k: usize| if periodic[k] { 2 * self.n[k] } else { 2 * self.n[k] - 1 };
        QuadSpec { n: [step(0), step(1)] }
    }
}

/// Tensor rule over a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule2d {
    pub axes: [Rule1d; 2],
}

impl Rule2d {
    pub fn new(domain: &Domain, spec: &QuadSpec) -> Result<Self> {
        let axis = |k: usize| {
            if domain.periodic[k] {
                midpoint(domain.lo[k], domain.hi[k], spec.n[k])
            } else {
                let n = if spec.n[k] % 2 == 0 { spec.n[k] + 1 } else { spec.n[k] };
                simpson(domain.lo[k], domain.hi[k], n)
            }
        };
        Ok(Rule2d { axes: [axis(0)?, axis(1)?] })
    }

    pub fn len(&self) -> usize {
        self.axes[0].nodes.len() * self.axes[1].nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(point, weight)` pairs in a fixed row-major order.
    pub fn points(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let [ax, ay] = &self.axes;
        ax.nodes.iter().zip(&ax.weights).flat_map(move |(&x, &wx)| {
            ay.nodes.iter().zip(&ay.weights).map(move |(&y, &wy)| ([x, y], wx * wy))
        })
    }

    /// `Σ w f(p)` in fixed order with compensated summation; stops at the
    /// first error.
    pub fn integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut([f64; 2]) -> Result<f64>,
    {
        let mut acc = CompensatedSum::default();
        for (p, w) in self.points() {
            acc.add(w * f(p)?);
        }
        Ok(acc.value())
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol` (Richardson-corrected, depth-limited).
pub fn adaptive_simpson<F>(f: &mut F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(f: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}
