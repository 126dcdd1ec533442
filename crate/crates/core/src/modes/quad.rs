//! Tensor-product Gauss-Legendre quadrature with order escalation and
//! rectangle subdivision. The integrands here are smooth (Gaussians times
//! polynomials) within each mask region, so convergence is fast.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes via Newton iteration on the Legendre polynomial, seeded with the
    /// Chebyshev-like estimate; accurate to machine precision for n <= ~200.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn tensor_integrate(rule: &GaussLegendre, rect: &[f64; 4], f: &impl Fn(f64, f64) -> f64) -> f64 {
    let [x0, x1, y0, y1] = *rect;
    rule.integrate(x0, x1, |x| rule.integrate(y0, y1, |y| f(x, y)))
}

/// Integrate `f` over the rectangle `[x0, x1] x [y0, y1]` to the requested
/// absolute tolerance, escalating the rule order and finally subdividing.
pub fn integrate_rect(rect: [f64; 4], tol: f64, f: &impl Fn(f64, f64) -> f64) -> Result<f64> {
    integrate_rect_depth(rect, tol, f, 0)
}

fn integrate_rect_depth(
    rect: [f64; 4],
    tol: f64,
    f: &impl Fn(f64, f64) -> f64,
    depth: usize,
) -> Result<f64> {
    let [x0, x1, y0, y1] = rect;
    if x1 <= x0 || y1 <= y0 {
        return Ok(0.0);
    }
    let orders = [16usize, 24, 32, 48, 64, 96];
    let mut prev = f64::NAN;
    for &n in &orders {
        let val = tensor_integrate(&GaussLegendre::new(n), &rect, f);
        if prev.is_finite() && (val - prev).abs() < tol {
            return Ok(val);
        }
        prev = val;
    }
    if depth >= 6 {
        return Err(Error::InvalidParameter(format!(
            "quadrature failed to converge to {tol} on [{x0}, {x1}] x [{y0}, {y1}]"
        )));
    }
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let quarters = [
        [x0, xm, y0, ym],
        [xm, x1, y0, ym],
        [x0, xm, ym, y1],
        [xm, x1, ym, y1],
    ];
    let mut total = 0.0;
    for q in quarters {
        total += integrate_rect_depth(q, tol / 4.0, f, depth + 1)?;
    }
    Ok(total)
}
