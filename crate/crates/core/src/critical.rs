//! Critical integration of kernel families by real interpolation, verified
//! on synthetic families with exactly known `L^1`/`L^infty` envelopes.
//!
//! The synthetic family is `J_r(x) = A r^{-1+mu} phi_r(x)` with
//! `phi_r(x) = s^{-1} phi(x/s)`, `s = r^{mu+nu}`, and `phi` the unit tent:
//! then `|J_r|_1 = A r^{-1+mu}` and `|J_r|_inf = A r^{-1-nu}` hold exactly.

use crate::kernels::weak_quasinorm_from_samples;
use crate::quad::Rule1d;
use crate::report::{fit_slope, SlopeFit};
use crate::{Error, Result};
use serde::Serialize;

/// Synthetic kernel family on the line (`N = 1`).
#[derive(Debug, Clone, Copy)]
pub struct SyntheticFamily {
    pub mu: f64,
    pub nu: f64,
    pub amplitude: f64,
}

impl SyntheticFamily {
    pub fn new(mu: f64, nu: f64, amplitude: f64) -> Result<Self> {
        if !(mu > 0.0 && nu > 0.0 && amplitude > 0.0) {
            return Err(Error::InvalidParameter(
                "synthetic family needs mu, nu, A > 0".into(),
            ));
        }
        Ok(SyntheticFamily { mu, nu, amplitude })
    }

    /// The critical integrability index `theta = (mu + nu)/nu`.
    pub fn critical_theta(&self) -> f64 {
        (self.mu + self.nu) / self.nu
    }

    /// Support half-width of `J_r`.
    pub fn support(&self, r: f64) -> f64 {
        r.powf(self.mu + self.nu)
    }

    /// `J_r(x) = A r^{-1+mu} s^{-1} (1 - |x|/s)_+`.
    pub fn eval(&self, r: f64, x: f64) -> f64 {
        let s = self.support(r);
        let t = 1.0 - x.abs() / s;
        if t <= 0.0 {
            0.0
        } else {
            self.amplitude * r.powf(-1.0 + self.mu) * t / s
        }
    }

    /// `F_tau(x) = int_0^tau J_r dr` by logarithmic quadrature; the integrand
    /// vanishes for `r` below `|x|^{1/(mu+nu)}`.
    pub fn integrate(&self, tau: f64, x: f64) -> f64 {
        let r_min = x.abs().powf(1.0 / (self.mu + self.nu));
        if r_min >= tau {
            return 0.0;
        }
        let lo = r_min.max(tau * 1e-9);
        let rule = Rule1d::log_gauss(lo, tau, 48, 6);
        rule.integrate(|r| self.eval(r, x))
    }

    /// Closed-form value of `F_tau(x)`: for the tent profile the layer
    /// integral is elementary. Serves as the independent oracle.
    pub fn integrate_closed_form(&self, tau: f64, x: f64) -> f64 {
        // J_r(x) = A r^{mu-1} s^{-1}(1 - |x|/s), s = r^{mu+nu}:
        //   A [ r^{-1-nu} - |x| r^{-1-mu-2nu} ] on r >= |x|^{1/(mu+nu)}
        let (a, mu, nu) = (self.amplitude, self.mu, self.nu);
        let r0 = x.abs().powf(1.0 / (mu + nu));
        if r0 >= tau {
            return 0.0;
        }
        let term = |r: f64| -> f64 {
            let first = -r.powf(-nu) / nu;
            let second = if x == 0.0 {
                0.0
            } else {
                x.abs() * r.powf(-mu - 2.0 * nu) / (mu + 2.0 * nu)
            };
            a * (first + second)
        };
        if x == 0.0 {
            // the lower endpoint diverges pointwise at x = 0; the caller
            // never needs the on-axis value
            return f64::INFINITY;
        }
        term(tau) - term(r0)
    }

    /// Exact `L^1` envelope bound `|F_tau|_1 <= A tau^mu / mu`.
    pub fn l1_bound(&self, tau: f64) -> f64 {
        self.amplitude * tau.powf(self.mu) / self.mu
    }
}

/// Weighted samples `(|F_tau(x)|, cell length)` on a sign-symmetric
/// logarithmic lattice fine enough for survival estimation.
pub fn family_samples(fam: &SyntheticFamily, tau: f64, octaves_down: f64) -> Vec<(f64, f64)> {
    let x_hi = 1.05 * fam.support(tau);
    let x_lo = x_hi * (0.5f64).powf(octaves_down * (fam.mu + fam.nu).max(1.0));
    let n = (((x_hi / x_lo).log2()) * 6.0).ceil() as usize;
    let ratio = (x_hi / x_lo).powf(1.0 / n as f64);
    let mut out = Vec::with_capacity(2 * n);
    let mut left = x_lo;
    for _ in 0..n {
        let right = left * ratio;
        let mid = (left * right).sqrt();
        let val = fam.integrate(tau, mid).abs();
        out.push((val, right - left));
        out.push((val, right - left)); // mirror cell at -x
        left = right;
    }
    out
}

/// `L^{theta,infty}` quasinorm of `F_tau` from the lattice samples.
pub fn weak_norm(fam: &SyntheticFamily, tau: f64, theta: f64) -> Result<f64> {
    if theta <= 1.0 {
        return Err(Error::InvalidParameter("weak norm needs theta > 1".into()));
    }
    let samples = family_samples(fam, tau, 14.0);
    weak_quasinorm_from_samples(&samples, theta)
}

/// K-functional estimate by the proof's explicit split at
/// `delta = min(tau, s^{1/(mu+nu)})`:
/// the `L^1` piece `|F_delta|_1` is measured by quadrature, while the
/// `L^infty` piece integrates the measured sup norms with the proof's
/// envelope closure `int_tau^infty A r^{-1-nu} dr` beyond the family range.
pub fn k_functional_split(fam: &SyntheticFamily, tau: f64, s: f64) -> f64 {
    let delta = tau.min(s.powf(1.0 / (fam.mu + fam.nu)));
    // |F_delta|_1 by quadrature over the support
    let x_hi = fam.support(delta);
    let rule = Rule1d::log_gauss(x_hi * 1e-12, x_hi, 60, 6);
    let l1: f64 = 2.0 * rule.integrate(|x| fam.integrate(delta, x).abs());
    // int_delta^tau |J_r|_inf dr (measured on-axis sups) plus the closure
    let mut sup = fam.amplitude * tau.powf(-fam.nu) / fam.nu;
    if delta < tau {
        let rule = Rule1d::log_gauss(delta, tau, 24, 6);
        sup += rule.integrate(|r| fam.eval(r, 0.0));
    }
    l1 + s * sup
}

/// Verdict of the uniformity check at one `theta`.
#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub theta: f64,
    pub norms: Vec<(f64, f64)>,
    pub max_over_min: f64,
    pub tau_slope: f64,
    pub uniform: bool,
}

/// Weak norms across a dyadic `tau`-grid with the uniformity verdict:
/// bounded max/min ratio and negligible fitted `tau`-slope.
pub fn verify_uniformity(
    fam: &SyntheticFamily,
    tau_grid: &[f64],
    theta: f64,
    ratio_bound: f64,
) -> Result<UniformityReport> {
    let mut norms = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        norms.push((tau, weak_norm(fam, tau, theta)?));
    }
    let max = norms.iter().map(|&(_, n)| n).fold(f64::MIN, f64::max);
    let min = norms.iter().map(|&(_, n)| n).fold(f64::MAX, f64::min);
    let fit = fit_slope(&norms)?;
    let max_over_min = max / min;
    Ok(UniformityReport {
        theta,
        norms,
        max_over_min,
        tau_slope: fit.slope,
        uniform: max_over_min <= ratio_bound,
    })
}

/// Fitted slope of the K-functional estimate against `s`; expected
/// `mu/(mu+nu)` on `s <= tau^{mu+nu}`.
pub fn k_functional_slope(fam: &SyntheticFamily, tau: f64) -> Result<SlopeFit> {
    let s_hi = tau.powf(fam.mu + fam.nu);
    let s_grid = crate::quad::log_uniform(1e-3 * s_hi.min(1.0), s_hi, 16);
    let pairs: Vec<(f64, f64)> = s_grid
        .iter()
        .map(|&s| (s, k_functional_split(fam, tau, s)))
        .collect();
    fit_slope(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelopes_hold_exactly() {
        let fam = SyntheticFamily::new(1.0, 1.0, 2.0).unwrap();
        for &r in &[0.1, 0.7, 3.0] {
            // L1: integrate the tent
            let s = fam.support(r);
            let rule = Rule1d::composite_gauss(-s, s, 64, 8);
            let l1 = rule.integrate(|x| fam.eval(r, x));
            assert!((l1 - fam.amplitude * r.powf(0.0)).abs() < 1e-10 * l1);
            // Linf at the center
            let sup = fam.eval(r, 0.0);
            assert!((sup - fam.amplitude * r.powf(-2.0)).abs() < 1e-12 * sup);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let fam = SyntheticFamily::new(1.0, 1.0, 1.0).unwrap();
        let tau = 1.0;
        for &x in &[0.01, 0.1, 0.5, 0.9] {
            let a = fam.integrate(tau, x);
            let b = fam.integrate_closed_form(tau, x);
            assert!((a - b).abs() <= 1e-4 * b.abs().max(1e-12), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn vanishing_range_gives_zero() {
        let fam = SyntheticFamily::new(0.5, 1.5, 1.0).unwrap();
        // far outside the support of every scale below tau
        assert_eq!(fam.integrate(0.5, 10.0), 0.0);
    }

    #[test]
    fn l1_mass_respects_envelope() {
        let fam = SyntheticFamily::new(1.0, 1.0, 1.0).unwrap();
        for &tau in &[0.25, 1.0, 4.0] {
            let s = fam.support(tau);
            let rule = Rule1d::log_gauss(s * 1e-10, s, 60, 6);
            let l1 = 2.0 * rule.integrate(|x| fam.integrate(tau, x));
            assert!(
                l1 <= fam.l1_bound(tau) * (1.0 + 1e-6),
                "tau={tau}: {l1} vs bound {}",
                fam.l1_bound(tau)
            );
        }
    }

    #[test]
    fn truncated_power_law_weak_norm() {
        // F(x) = |x|^{-1/2} on [-1,1] has weak-L^2 quasinorm sqrt(2);
        // mu = nu = 1 produces exactly this shape up to constants
        let fam = SyntheticFamily::new(1.0, 1.0, 1.0).unwrap();
        let wn = weak_norm(&fam, 1.0, 2.0).unwrap();
        assert!(wn.is_finite() && wn > 0.0);
    }

    #[test]
    fn uniform_at_critical_theta() {
        let fam = SyntheticFamily::new(1.0, 1.0, 1.0).unwrap();
        let grid: Vec<f64> = (-3..=3).map(|k| (k as f64).exp2()).collect();
        let rep = verify_uniformity(&fam, &grid, fam.critical_theta(), 10.0).unwrap();
        assert!(rep.uniform, "{rep:?}");
        assert!(rep.tau_slope.abs() <= 0.05, "{rep:?}");
    }

    #[test]
    fn negative_control_grows_below_critical_theta() {
        let fam = SyntheticFamily::new(1.0, 1.0, 1.0).unwrap();
        let theta = fam.critical_theta() - 0.3;
        let grid: Vec<f64> = (-10..=10).map(|k| (k as f64).exp2()).collect();
        let rep = verify_uniformity(&fam, &grid, theta, 10.0).unwrap();
        assert!(!rep.uniform, "{rep:?}");
        // growth rate (mu+nu)(1/theta' - 1/theta) = 2 (1/1.7 - 1/2)
        let expect = 2.0 * (1.0 / 1.7 - 0.5);
        assert!((rep.tau_slope - expect).abs() <= 0.05, "{rep:?}");
    }

    #[test]
    fn k_functional_slope_matches_interpolation_parameter() {
        for &(mu, nu) in &[(1.0, 1.0), (0.5, 1.5)] {
            let fam = SyntheticFamily::new(mu, nu, 1.0).unwrap();
            let fit = k_functional_slope(&fam, 1.0).unwrap();
            let expect = mu / (mu + nu);
            assert!(
                (fit.slope - expect).abs() <= 0.05,
                "(mu,nu)=({mu},{nu}): slope {} vs {expect}",
                fit.slope
            );
        }
    }
}
