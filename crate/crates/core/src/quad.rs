//! Quadrature building blocks: Gauss–Legendre rules, logarithmic panels and
//! node sets for the scale-invariant increment measure `d eta(h) = dh/|h|^d`.

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre recurrence and memoized;
/// accurate to machine precision for the sizes used here (n <= 128).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let rule = gauss_legendre_uncached(n);
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn gauss_legendre_uncached(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
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
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A reusable 1-d quadrature rule on an arbitrary interval.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// Gauss–Legendre rule mapped to `[a, b]`.
    pub fn gauss(a: f64, b: f64, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        Rule1d {
            nodes: x.iter().map(|&xi| mid + half * xi).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
        }
    }

    /// Composite Gauss rule: `panels` equal subintervals of `[a, b]`,
    /// `per_panel` nodes each.
    pub fn composite_gauss(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        let step = (b - a) / panels as f64;
        for p in 0..panels {
            let pa = a + p as f64 * step;
            let r = Rule1d::gauss(pa, pa + step, per_panel);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Rule1d { nodes, weights }
    }

    /// Composite Gauss rule on `[a, b]` with panels equispaced in `log`.
    /// Requires `0 < a < b`.
    pub fn log_gauss(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        assert!(a > 0.0 && b > a);
        let (la, lb) = (a.ln(), b.ln());
        let step = (lb - la) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let ua = la + p as f64 * step;
            let r = Rule1d::gauss(ua, ua + step, per_panel);
            for (u, wu) in r.nodes.iter().zip(&r.weights) {
                let x = u.exp();
                nodes.push(x);
                weights.push(wu * x); // dx = e^u du
            }
        }
        Rule1d { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Signed node set for integrals against `d eta(h) = dh/|h|` in dimension one:
/// `int g d eta = sum_i w_i g(h_i)` with symmetric log-spaced nodes
/// `|h| in [hmin, hmax]`.
#[derive(Debug, Clone)]
pub struct EtaNodes {
    pub h: Vec<f64>,
    pub w: Vec<f64>,
    pub hmin: f64,
    pub hmax: f64,
}

impl EtaNodes {
    /// Build symmetric nodes with `per_octave * log2(hmax/hmin)` Gauss points
    /// per sign, placed in the variable `u = ln|h|` where `d eta = du`.
    pub fn log(hmin: f64, hmax: f64, per_octave: usize) -> Self {
        assert!(hmin > 0.0 && hmax > hmin);
        let octaves = (hmax / hmin).log2().ceil().max(1.0) as usize;
        let rule = Rule1d::composite_gauss(hmin.ln(), hmax.ln(), octaves, per_octave);
        let mut h = Vec::with_capacity(2 * rule.nodes.len());
        let mut w = Vec::with_capacity(2 * rule.nodes.len());
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            let a = u.exp();
            h.push(a);
            w.push(wu);
            h.push(-a);
            w.push(wu);
        }
        EtaNodes { h, w, hmin, hmax }
    }

    /// Integrate `g` against `d eta` over the node range.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.h.iter().zip(&self.w).map(|(&h, &w)| w * g(h)).sum()
    }
}

/// Dyadic grid `base * 2^k` for `k in [k_lo, k_hi]`.
pub fn dyadic_grid(base: f64, k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| base * (k as f64).exp2()).collect()
}

/// `n` log-uniform points spanning `[a, b]`, inclusive.
pub fn log_uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        let r = Rule1d::gauss(0.0, 1.0, 8);
        // degree 15 is exact for an 8-point rule
        let val = r.integrate(|x| x.powi(15));
        assert!((val - 1.0 / 16.0).abs() < 1e-14, "got {val}");
    }

    #[test]
    fn gauss_high_order_nodes_are_finite() {
        let (x, w) = gauss_legendre(96);
        assert!(x.iter().all(|v| v.is_finite()));
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_gauss_handles_power_integrands() {
        // int_{1e-6}^{1} x^{-1/2} dx = 2(1 - 1e-3)
        let r = Rule1d::log_gauss(1e-6, 1.0, 40, 6);
        let val = r.integrate(|x| x.powf(-0.5));
        assert!((val - 2.0 * (1.0 - 1e-3)).abs() < 1e-10, "got {val}");
    }

    #[test]
    fn eta_nodes_reproduce_measure_of_annulus() {
        // int_{1<=|h|<=e^2} d eta = 2 * 2 (both signs, du over two octaves of e)
        let nodes = EtaNodes::log(1.0, (2.0f64).exp(), 8);
        let val = nodes.integrate(|_| 1.0);
        assert!((val - 4.0).abs() < 1e-12, "got {val}");
    }

    #[test]
    fn eta_nodes_integrate_envelope() {
        // int |h|^{-1/2} d eta over |h| in [1, inf) truncated at large hmax:
        // exact 2 * 2 = 4 as hmax -> inf.
        let nodes = EtaNodes::log(1.0, 1e12, 8);
        let val = nodes.integrate(|h| h.abs().powf(-0.5));
        assert!((val - 4.0).abs() < 1e-5, "got {val}");
    }
}
