//! One-dimensional fractional calculus on smooth profiles: principal-value
//! fractional derivatives, Riesz potentials, Fourier-multiplier quadrature
//! and periodic FFT multiplier operators.
//!
//! These are the scalar building blocks behind the grid-level operators in
//! [`crate::fracops`] and the kernel evaluators in [`crate::kernels`].

use crate::quad::Rule1d;
use crate::special::{frac_laplacian_constant, riesz_constant};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Fractional derivative `D^s g (eta)` of order `s in (0, 2)` through the
/// symmetric principal-value integral
/// `C(1,s) int_0^infty (2 g(eta) - g(eta+z) - g(eta-z)) / z^{1+s} dz`,
/// for `g` supported in `[support.0, support.1]`.
///
/// The symmetric pairing cancels the odd singular part exactly, and the tail
/// beyond the support is closed analytically by `2 g(eta) Z^{-s}/s`.
pub fn pv_frac_derivative(
    g: &dyn Fn(f64) -> f64,
    support: (f64, f64),
    s: f64,
    eta: f64,
) -> f64 {
    assert!(s > 0.0 && s < 2.0);
    let reach = (eta - support.0).abs().max((eta - support.1).abs()) + 1.0;
    let zmin = 1e-7;
    let rule = Rule1d::log_gauss(zmin, reach, 56, 6);
    let ge = g(eta);
    let mut acc = 0.0;
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * (2.0 * ge - g(eta + z) - g(eta - z)) / z.powf(1.0 + s);
    }
    // analytic tail: g vanishes beyond the reach
    acc += 2.0 * ge * reach.powf(-s) / s;
    frac_laplacian_constant(1, s) * acc
}

/// Riesz potential `I^sigma g (eta) = c int |eta - z|^{sigma - 1} g(z) dz`
/// for `g` supported in `[support.0, support.1]`, `sigma in (0, 1)`.
pub fn riesz_potential_profile(
    g: &dyn Fn(f64) -> f64,
    support: (f64, f64),
    sigma: f64,
    eta: f64,
) -> f64 {
    assert!(sigma > 0.0 && sigma < 1.0);
    let c = riesz_constant(1, sigma);
    let (a, b) = support;
    let umin = 1e-9;
    let mut acc = 0.0;
    // integrate in u = z - eta on each side of the singularity
    for (lo, hi) in [(a - eta, 0.0f64.min(b - eta)), (0.0f64.max(a - eta), b - eta)] {
        if hi <= lo {
            continue;
        }
        // side intervals in |u|
        let (mag_lo, mag_hi) = if hi <= 0.0 {
            (hi.abs().max(umin), lo.abs())
        } else {
            (lo.abs().max(umin), hi.abs())
        };
        if mag_hi <= mag_lo {
            continue;
        }
        let sign = if hi <= 0.0 { -1.0 } else { 1.0 };
        let rule = Rule1d::log_gauss(mag_lo, mag_hi, 48, 6);
        for (&m, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * m.powf(sigma - 1.0) * g(eta + sign * m);
        }
    }
    // singular core |u| < umin, relevant only when eta is inside the support
    if eta > a - umin && eta < b + umin {
        acc += g(eta) * 2.0 * umin.powf(sigma) / sigma;
    }
    c * acc
}

/// Cosine/sine transform pair of a compactly supported profile:
/// `ghat_c(xi) = int g cos(xi v) dv`, `ghat_s(xi) = int g sin(xi v) dv`.
pub struct ProfileTransform {
    rule: Rule1d,
    samples: Vec<f64>,
}

impl ProfileTransform {
    pub fn new(g: &dyn Fn(f64) -> f64, support: (f64, f64), nodes_per_unit: usize) -> Self {
        let len = (support.1 - support.0).max(1e-3);
        let panels = ((len * nodes_per_unit as f64 / 8.0).ceil() as usize).max(8);
        let rule = Rule1d::composite_gauss(support.0, support.1, panels, 8);
        let samples = rule.nodes.iter().map(|&v| g(v)).collect();
        ProfileTransform { rule, samples }
    }

    pub fn hat(&self, xi: f64) -> (f64, f64) {
        let mut c = 0.0;
        let mut s = 0.0;
        for ((&v, &w), &gv) in self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.samples)
        {
            let (sv, cv) = (xi * v).sin_cos();
            c += w * gv * cv;
            s += w * gv * sv;
        }
        (c, s)
    }

    /// Evaluate the multiplier operator `m(|xi|)` applied to the profile:
    /// `(1/pi) int_0^infty m(xi) [ghat_c cos(xi v) + ghat_s sin(xi v)] dxi`.
    ///
    /// The panel width tracks the oscillation `xi v`, and the quadrature
    /// starts at a small positive `xi`, which requires the integrand to be
    /// integrable there (true for the multipliers used in this crate when
    /// fed admissible data).
    pub fn apply_multiplier(&self, mult: &dyn Fn(f64) -> f64, xi_max: f64, v: f64) -> f64 {
        let xi_min = 1e-9;
        // low-frequency block on a log scale to resolve |xi|^{-2 sigma} kinks
        let low = Rule1d::log_gauss(xi_min, 1.0, 36, 6);
        let mut acc = 0.0;
        for (&xi, &w) in low.nodes.iter().zip(&low.weights) {
            let (c, s) = self.hat(xi);
            acc += w * mult(xi) * (c * (xi * v).cos() + s * (xi * v).sin());
        }
        // oscillation-resolved block
        let width = (std::f64::consts::PI / (4.0 * (v.abs() + 1.0))).min(0.25);
        let panels = ((xi_max - 1.0) / width).ceil() as usize;
        let high = Rule1d::composite_gauss(1.0, xi_max, panels.max(8), 4);
        for (&xi, &w) in high.nodes.iter().zip(&high.weights) {
            let (c, s) = self.hat(xi);
            acc += w * mult(xi) * (c * (xi * v).cos() + s * (xi * v).sin());
        }
        acc / std::f64::consts::PI
    }
}

/// Inverse transform with analytically known `ghat`: evaluates
/// `(1/pi) int_0^infty m(xi)[ghat_c(xi) cos(xi v) + ghat_s(xi) sin(xi v)] dxi`.
pub fn inverse_transform_analytic(
    ghat_c: &dyn Fn(f64) -> f64,
    ghat_s: &dyn Fn(f64) -> f64,
    mult: &dyn Fn(f64) -> f64,
    xi_max: f64,
    v: f64,
) -> f64 {
    let low = Rule1d::log_gauss(1e-10, 1.0, 40, 6);
    let mut acc = 0.0;
    for (&xi, &w) in low.nodes.iter().zip(&low.weights) {
        acc += w * mult(xi) * (ghat_c(xi) * (xi * v).cos() + ghat_s(xi) * (xi * v).sin());
    }
    let width = (std::f64::consts::PI / (6.0 * (v.abs() + 1.0))).min(0.25);
    let panels = (((xi_max - 1.0) / width).ceil() as usize).max(8);
    let high = Rule1d::composite_gauss(1.0, xi_max, panels, 4);
    for (&xi, &w) in high.nodes.iter().zip(&high.weights) {
        acc += w * mult(xi) * (ghat_c(xi) * (xi * v).cos() + ghat_s(xi) * (xi * v).sin());
    }
    acc / std::f64::consts::PI
}

/// Policy for the zero Fourier mode in periodic multiplier operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroMode {
    /// Keep the mean unchanged (multiplier value 1 at 0).
    Keep,
    /// Annihilate the mean (inverse operators on mean-zero data).
    Zero,
    /// Reject input whose relative mean exceeds the tolerance.
    Reject(f64),
}

/// Apply the even multiplier `m(|xi|)` on a uniformly sampled periodic line
/// of physical period `period`. Real input, real output (the multiplier is
/// real and even, so conjugate symmetry is preserved exactly).
pub fn fft_multiplier_line(
    values: &mut [f64],
    period: f64,
    mult: &dyn Fn(f64) -> f64,
    zero_mode: ZeroMode,
) -> Result<()> {
    let n = values.len();
    assert!(n >= 4 && period > 0.0);
    if let ZeroMode::Reject(tol) = zero_mode {
        let mean = values.iter().sum::<f64>() / n as f64;
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if mean.abs() > tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::MeanNotZero {
                measured: mean,
                tolerance: tol * scale,
            });
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let dxi = 2.0 * std::f64::consts::PI / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let xi = (freq * dxi).abs();
        let factor = if k == 0 {
            match zero_mode {
                ZeroMode::Keep => mult(0.0),
                _ => 0.0,
            }
        } else {
            mult(xi)
        };
        *c *= factor;
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    for (v, c) in values.iter_mut().zip(&buf) {
        *v = c.re * scale;
    }
    Ok(())
}

/// Apply the odd imaginary multiplier `i sign(xi) m(|xi|)` on a periodic
/// line (the derivative-like branch: `m(|xi|) = |xi|` gives `d/dv`). Real
/// input yields real output. The zero mode is annihilated.
pub fn fft_odd_multiplier_line(
    values: &mut [f64],
    period: f64,
    mult_abs: &dyn Fn(f64) -> f64,
) -> Result<()> {
    let n = values.len();
    assert!(n >= 4 && period > 0.0);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let dxi = 2.0 * std::f64::consts::PI / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            // the Nyquist mode has no signed partner; drop it with the mean
            *c = Complex64::new(0.0, 0.0);
        } else {
            let xi = freq * dxi;
            *c *= Complex64::new(0.0, xi.signum() * mult_abs(xi.abs()));
        }
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    for (v, c) in values.iter_mut().zip(&buf) {
        *v = c.re * scale;
    }
    Ok(())
}

/// The Gagliardo normalization `c^Gag_{d,sigma} = 2 int (1 - cos h_1)/|h|^{d+2 sigma} dh`
/// in dimension one, by quadrature with analytic tail closure.
pub fn gagliardo_constant(sigma: f64) -> f64 {
    assert!(sigma > 0.0 && sigma < 1.0);
    let s2 = 2.0 * sigma;
    // c = 4 int_0^infty (1 - cos h)/h^{1+2 sigma} dh
    let cut = 2000.0f64;
    let inner = Rule1d::log_gauss(1e-9, 1.0, 40, 6);
    let mut acc = inner.integrate(|h| (1.0 - h.cos()) / h.powf(1.0 + s2));
    let panels = (cut / 0.7).ceil() as usize;
    let outer = Rule1d::composite_gauss(1.0, cut, panels, 4);
    acc += outer.integrate(|h| (1.0 - h.cos()) / h.powf(1.0 + s2));
    // tail: int_R (1 - cos h) h^{-1-2s} dh
    //     = R^{-2s}/(2s) + sin(R) R^{-1-2s} - (1+2s) cos(R) R^{-2-2s} + O(R^{-3-2s})
    acc += cut.powf(-s2) / s2 + cut.sin() * cut.powf(-1.0 - s2)
        - (1.0 + s2) * cut.cos() * cut.powf(-2.0 - s2);
    4.0 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gagliardo_constant_reference_value() {
        // int (1 - cos h)/h^2 dh = pi over R, so c = 2 pi at sigma = 1/2
        let c = gagliardo_constant(0.5);
        assert!(
            (c - 2.0 * std::f64::consts::PI).abs() < 1e-6,
            "c = {c}, expected 2 pi"
        );
    }

    #[test]
    fn pv_derivative_of_gaussian_matches_multiplier_route() {
        // exp(-v^2) has ghat_c = sqrt(pi) exp(-xi^2/4), ghat_s = 0
        let g = |v: f64| (-v * v).exp();
        let sigma = 0.5;
        let pi = std::f64::consts::PI;
        for &v in &[0.0, 0.7, 1.4] {
            let pv = pv_frac_derivative(&g, (-9.0, 9.0), sigma, v);
            let spectral = inverse_transform_analytic(
                &|xi: f64| pi.sqrt() * (-xi * xi / 4.0).exp(),
                &|_| 0.0,
                &|xi: f64| xi.powf(sigma),
                40.0,
                v,
            );
            assert!(
                (pv - spectral).abs() < 2e-4 * (1.0 + spectral.abs()),
                "v={v}: pv={pv} spectral={spectral}"
            );
        }
    }

    #[test]
    fn riesz_inverts_fractional_derivative_on_gaussian() {
        // I^sigma (D^sigma g) = g for Schwartz g (checked pointwise)
        let sigma = 0.5;
        let pi = std::f64::consts::PI;
        let dsg = |v: f64| {
            inverse_transform_analytic(
                &|xi: f64| pi.sqrt() * (-xi * xi / 4.0).exp(),
                &|_| 0.0,
                &|xi: f64| xi.powf(sigma),
                40.0,
                v,
            )
        };
        // D^sigma g decays like |v|^{-1-sigma}; truncate its support widely
        for &v in &[0.0, 1.0] {
            let val = riesz_potential_profile(&dsg, (-60.0, 60.0), sigma, v);
            let expect = (-v * v).exp();
            assert!(
                (val - expect).abs() < 2e-2 * (1.0 + expect),
                "v={v}: {val} vs {expect}"
            );
        }
    }

    #[test]
    fn fft_multiplier_diagonalizes_cosines() {
        let n = 256;
        let period = 2.0 * std::f64::consts::PI;
        let k = 5.0;
        let mut vals: Vec<f64> = (0..n)
            .map(|i| (k * (period * i as f64 / n as f64)).cos())
            .collect();
        fft_multiplier_line(&mut vals, period, &|xi| xi.powf(0.5), ZeroMode::Zero).unwrap();
        let expect = k.powf(0.5);
        for (i, &v) in vals.iter().enumerate() {
            let x = period * i as f64 / n as f64;
            assert!(
                (v - expect * (k * x).cos()).abs() < 1e-10,
                "i={i}: {v} vs {}",
                expect * (k * x).cos()
            );
        }
    }

    #[test]
    fn fft_zero_mode_rejection() {
        let mut vals = vec![1.0; 64];
        let res = fft_multiplier_line(
            &mut vals,
            1.0,
            &|xi| xi.powf(-0.5),
            ZeroMode::Reject(1e-10),
        );
        assert!(matches!(res, Err(Error::MeanNotZero { .. })));
    }

    #[test]
    fn odd_multiplier_is_spectral_derivative() {
        let n = 256;
        let period = 2.0 * std::f64::consts::PI;
        let mut vals: Vec<f64> = (0..n)
            .map(|i| (3.0 * (period * i as f64 / n as f64)).sin())
            .collect();
        fft_odd_multiplier_line(&mut vals, period, &|xi| xi).unwrap();
        for (i, &v) in vals.iter().enumerate() {
            let x = period * i as f64 / n as f64;
            assert!((v - 3.0 * (3.0 * x).cos()).abs() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn profile_transform_matches_analytic_gaussian_hat() {
        let t = ProfileTransform::new(&|v: f64| (-v * v).exp(), (-9.0, 9.0), 24);
        for &xi in &[0.0, 0.5, 2.0, 6.0] {
            let (c, s) = t.hat(xi);
            let expect = std::f64::consts::PI.sqrt() * (-xi * xi / 4.0).exp();
            assert!((c - expect).abs() < 1e-10, "xi={xi}: {c} vs {expect}");
            assert!(s.abs() < 1e-10);
        }
    }
}
