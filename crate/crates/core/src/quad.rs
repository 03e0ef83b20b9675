//! Gauss–Legendre rules and a few integration helpers.

use std::sync::OnceLock;

pub(crate) struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule {
    /// Nodes and weights on [-1, 1], by Newton iteration on P_n.
    pub fn legendre(n: usize) -> Rule {
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        Rule { x, w }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut s = 0.0;
        for (xi, wi) in self.x.iter().zip(&self.w) {
            s += wi * f(c + r * xi);
        }
        s * r
    }

    pub fn integrate_rect(&self, x0: f64, x1: f64, y0: f64, y1: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let (cx, rx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let (cy, ry) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
        let mut s = 0.0;
        for (xi, wi) in self.x.iter().zip(&self.w) {
            let x = cx + rx * xi;
            let mut row = 0.0;
            for (yj, wj) in self.x.iter().zip(&self.w) {
                row += wj * f(x, cy + ry * yj);
            }
            s += wi * row;
        }
        s * rx * ry
    }
}

pub(crate) fn gl20() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::legendre(20))
}

pub(crate) fn gl16() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::legendre(16))
}

/// Integral over `[a, b]` of a function behaving like `|x - a|^beta` near `a`
/// (and smooth elsewhere): geometric panels shrinking toward `a`, with the
/// last sliver integrated as a pure power.
pub(crate) fn graded_left(a: f64, b: f64, beta: f64, f: &impl Fn(f64) -> f64) -> f64 {
    if beta <= -1.0 {
        return f64::INFINITY;
    }
    let rule = gl20();
    let mut s = 0.0;
    let mut hi = b;
    for _ in 0..60 {
        let lo = a + 0.5 * (hi - a);
        s += rule.integrate(lo, hi, f);
        hi = lo;
        if hi - a <= 1e-14 * (b - a).abs() {
            break;
        }
    }
    s + f(hi) * (hi - a) / (beta + 1.0)
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let r = Rule::legendre(7);
        let s: f64 = r.w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 13 is integrated exactly
        let v = r.integrate(0.0, 2.0, |x| x.powi(13));
        assert!((v - 2f64.powi(14) / 14.0).abs() < 1e-10);
        let odd = Rule::legendre(5);
        assert!(odd.x[2].abs() < 1e-15);
    }

    #[test]
    fn graded_handles_endpoint_singularity() {
        let v = graded_left(0.0, 1.0, -0.5, &|x: f64| x.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-12);
        let w = graded_left(0.0, 1.0, -0.5, &|x: f64| x.powf(-0.5) * x.cos());
        let series: f64 = (0..12).map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s / ((1..=2 * k).map(|j| j as f64).product::<f64>() * (2 * k) as f64 + 0.5 * (1..=2 * k).map(|j| j as f64).product::<f64>())
        }).sum();
        assert!((w - series).abs() < 1e-11, "{w} vs {series}");
    }

    #[test]
    fn slope_of_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-14);
    }
}
