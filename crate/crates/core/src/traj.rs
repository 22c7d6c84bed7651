//! Critical kinetic trajectories built from the forcing pair
//! `g_1(r) = r^beta sin(log r)`, `g_2(r) = r^beta cos(log r)`, together with
//! their matrix factors and checkers for the structural properties (M1)-(M4).
//!
//! All 2x2 matrices act on `R^{2d}` through their tensor product with the
//! identity, so every block computation below is scalar and applied
//! componentwise.

use crate::geometry::PhasePoint;
use crate::report::fit_slope;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Trajectory parameters `(alpha, beta, m_0, m_1, m_2)`.
#[derive(Debug, Clone)]
pub struct TrajectoryParams {
    pub alpha: f64,
    pub beta: f64,
    pub m0: f64,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
}

impl TrajectoryParams {
    pub fn new(alpha: f64, beta: f64, m0: f64, m1: Vec<f64>, m2: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && beta > alpha) {
            return Err(Error::InvalidParameter("need 0 < alpha < beta".into()));
        }
        if m0 == 0.0 {
            return Err(Error::InvalidParameter("m0 must be nonzero".into()));
        }
        if m1.len() != m2.len() {
            return Err(Error::DimensionMismatch {
                expected: m1.len(),
                got: m2.len(),
            });
        }
        Ok(TrajectoryParams {
            alpha,
            beta,
            m0,
            m1,
            m2,
        })
    }

    pub fn dim(&self) -> usize {
        self.m1.len()
    }
}

/// Forcing functions `(g_1, g_2)(r) = r^beta (sin, cos)(log r)`.
pub fn forcing(beta: f64, r: f64) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::InvalidParameter("forcing needs r > 0".into()));
    }
    let theta = r.ln();
    let scale = r.powf(beta);
    Ok((scale * theta.sin(), scale * theta.cos()))
}

/// `a_1(theta) = (beta sin theta + cos theta)/alpha`,
/// `a_2(theta) = (beta cos theta - sin theta)/alpha`: the second-row profiles
/// of the trajectory matrix in logarithmic time.
pub fn second_row_profiles(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    ((beta * s + c) / alpha, (beta * c - s) / alpha)
}

/// One 2x2 block of a matrix acting on `(y, w)` pairs.
#[derive(Debug, Clone, Copy)]
pub struct Block2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Block2 {
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn inverse(&self) -> Block2 {
        let d = self.det();
        Block2 {
            a11: self.a22 / d,
            a12: -self.a12 / d,
            a21: -self.a21 / d,
            a22: self.a11 / d,
        }
    }

    pub fn apply(&self, y: f64, w: f64) -> (f64, f64) {
        (self.a11 * y + self.a12 * w, self.a21 * y + self.a22 * w)
    }
}

/// The block `A_{m0}(r) = D_{m0} W(r) D_{m0}^{-1}` of the trajectory map.
pub fn a_matrix(alpha: f64, beta: f64, m0: f64, r: f64) -> Block2 {
    let theta = r.ln();
    let (a1, a2) = second_row_profiles(alpha, beta, theta);
    let rb = r.powf(beta);
    let rba = r.powf(beta - alpha);
    Block2 {
        a11: rb * theta.sin(),
        a12: m0 * rb * theta.cos(),
        a21: rba * a1 / m0,
        a22: rba * a2,
    }
}

/// The factorized profile `Ascript_lambda(theta)` with
/// `A_lambda(r) = diag(r^beta, r^{beta-alpha}) Ascript_lambda(log r)`;
/// its per-block determinant is `-1/alpha` for every argument.
pub fn a_script(alpha: f64, beta: f64, lambda: f64, theta: f64) -> Block2 {
    let (a1, a2) = second_row_profiles(alpha, beta, theta);
    Block2 {
        a11: theta.sin(),
        a12: lambda * theta.cos(),
        a21: a1 / lambda,
        a22: a2,
    }
}

/// The forcing row `F_{m0}(r) = r^{beta-alpha-1} (c_1/m0, c_2)` with
/// `c_1 = (beta-alpha) a_1 + a_2` and `c_2 = (beta-alpha) a_2 - a_1`.
pub fn forcing_row(alpha: f64, beta: f64, m0: f64, r: f64) -> (f64, f64) {
    let theta = r.ln();
    let (a1, a2) = second_row_profiles(alpha, beta, theta);
    let scale = r.powf(beta - alpha - 1.0);
    let c1 = (beta - alpha) * a1 + a2;
    let c2 = (beta - alpha) * a2 - a1;
    (scale * c1 / m0, scale * c2)
}

/// The constant `frak c = (-1/alpha)^d` with
/// `det A_{m0}(r) = frak c r^{(2 beta - alpha) d}` over `R^{2d}`.
pub fn det_prefactor(alpha: f64, d: u32) -> f64 {
    (-1.0 / alpha).powi(d as i32)
}

/// Evaluate the critical trajectory `gamma^m(r; base)`; at `r = 0` the limit
/// branch returns the base point (valid because `beta > alpha`).
pub fn trajectory_eval(params: &TrajectoryParams, r: f64, base: &PhasePoint) -> Result<PhasePoint> {
    if r < 0.0 {
        return Err(Error::InvalidParameter("trajectory needs r >= 0".into()));
    }
    if base.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: base.dim(),
        });
    }
    if r == 0.0 {
        return Ok(base.clone());
    }
    let shear = params.m0 * r.powf(params.alpha);
    let a = a_matrix(params.alpha, params.beta, params.m0, r);
    let mut x = Vec::with_capacity(base.dim());
    let mut v = Vec::with_capacity(base.dim());
    for i in 0..base.dim() {
        let (dy, dw) = a.apply(params.m1[i], params.m2[i]);
        x.push(base.x[i] + shear * base.v[i] + dy);
        v.push(base.v[i] + dw);
    }
    Ok(PhasePoint {
        t: base.t + shear,
        x,
        v,
    })
}

/// The analytic velocity rate `d/dr gamma_v = F_{m0}(r) (m_1, m_2)^T`.
pub fn trajectory_velocity_rate(params: &TrajectoryParams, r: f64) -> Result<Vec<f64>> {
    if r <= 0.0 {
        return Err(Error::InvalidParameter("velocity rate needs r > 0".into()));
    }
    let (f1, f2) = forcing_row(params.alpha, params.beta, params.m0, r);
    Ok(params
        .m1
        .iter()
        .zip(&params.m2)
        .map(|(&u, &w)| f1 * u + f2 * w)
        .collect())
}

/// Measured residuals and fitted slopes for the properties (M1)-(M4).
#[derive(Debug, Clone, Serialize)]
pub struct MPropertyReport {
    /// Max relative residual of `d/dr gamma_t = alpha m0 r^{alpha-1}`.
    pub m1_time_residual: f64,
    /// Max relative residual of `d/dr gamma_x = (d/dr gamma_t) gamma_v`.
    pub m1_transport_residual: f64,
    /// Max relative deviation of `det A` from `frak c r^{(2beta-alpha)d}`.
    pub m2_det_residual: f64,
    /// Max relative spread of `det A` across values of `m0`.
    pub m2_m0_invariance: f64,
    /// Fitted slope of the first inverse-matrix column envelope (`-beta`).
    pub m3_col1_slope: f64,
    /// Fitted slope of the second inverse-matrix column envelope (`alpha-beta`).
    pub m3_col2_slope: f64,
    /// Fitted slope of the velocity-rate envelope (`beta-alpha-1`).
    pub m4_rate_slope: f64,
    /// Fitted slope of the velocity-deviation envelope (`beta-alpha`).
    pub m4_vdev_slope: f64,
    /// Fitted slope of the position-deviation envelope (`beta`).
    pub m4_xdev_slope: f64,
    /// Max relative residual of the analytic rate versus finite differences.
    pub m4_fd_residual: f64,
}

/// Verify (M1)-(M4) on a dyadic `r`-grid with random parameter draws.
pub fn check_m_properties(
    alpha: f64,
    beta: f64,
    d: u32,
    r_grid: &[f64],
    rng: &mut ChaCha8Rng,
    draws: usize,
) -> Result<MPropertyReport> {
    if r_grid.iter().any(|&r| r <= 0.0) {
        return Err(Error::InvalidParameter("r grid must be positive".into()));
    }
    let dim = d as usize;
    let mut params = Vec::with_capacity(draws);
    for _ in 0..draws {
        let m0 = random_m0(rng);
        let m1: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m2: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        params.push(TrajectoryParams::new(alpha, beta, m0, m1, m2)?);
    }

    let mut m1_time = 0.0f64;
    let mut m1_transport = 0.0f64;
    let mut m2_det = 0.0f64;
    let mut m4_fd = 0.0f64;

    let mut col1_env = Vec::new();
    let mut col2_env = Vec::new();
    let mut rate_env = Vec::new();
    let mut vdev_env = Vec::new();
    let mut xdev_env = Vec::new();

    let base = PhasePoint::new(0.3, vec![0.1; dim], vec![-0.4; dim])?;
    let frak_c = det_prefactor(alpha, d);

    for &r in r_grid {
        let h = 1e-4 * r.max(1.0);
        let mut e_col1 = 0.0f64;
        let mut e_col2 = 0.0f64;
        let mut e_rate = 0.0f64;
        let mut e_vdev = 0.0f64;
        let mut e_xdev = 0.0f64;

        for p in &params {
            let gp = trajectory_eval(p, r + h, &base)?;
            let gm = trajectory_eval(p, r - h, &base)?;
            let g0 = trajectory_eval(p, r, &base)?;

            // (M1): gamma is a kinetic trajectory.
            let dt_fd = (gp.t - gm.t) / (2.0 * h);
            let dt_exact = alpha * p.m0 * r.powf(alpha - 1.0);
            m1_time = m1_time.max((dt_fd - dt_exact).abs() / (1.0 + dt_exact.abs()));
            for i in 0..dim {
                let dx_fd = (gp.x[i] - gm.x[i]) / (2.0 * h);
                let rhs = dt_fd * g0.v[i];
                m1_transport = m1_transport.max((dx_fd - rhs).abs() / (1.0 + rhs.abs()));
            }

            // (M2): determinant identity, per block raised to the d-th power.
            let block = a_matrix(alpha, beta, p.m0, r);
            let det_full = block.det().powi(d as i32);
            let expect = frak_c * r.powf((2.0 * beta - alpha) * d as f64);
            m2_det = m2_det.max((det_full - expect).abs() / expect.abs());

            // (M3): inverse-matrix column envelopes.
            let inv = block.inverse();
            let col1 = (inv.a11 * inv.a11 + inv.a21 * inv.a21).sqrt();
            let col2 = (inv.a12 * inv.a12 + inv.a22 * inv.a22).sqrt();
            e_col1 = e_col1.max(col1 / (1.0 + 1.0 / p.m0.abs()));
            e_col2 = e_col2.max(col2 / (1.0 + p.m0.abs()));

            // (M4): trajectory bounds and the finite-difference oracle.
            // The rate has curvature of order r^{beta-alpha-3}, so the step
            // must shrink with r below scale one to keep truncation uniform.
            let h_rate = 1e-4 * r.min(1.0);
            let gp_rate = trajectory_eval(p, r + h_rate, &base)?;
            let gm_rate = trajectory_eval(p, r - h_rate, &base)?;
            let rate = trajectory_velocity_rate(p, r)?;
            let m1n = norm(&p.m1);
            let m2n = norm(&p.m2);
            let weight_v = m1n / p.m0.abs() + m2n;
            let weight_x = m1n + p.m0.abs() * m2n;
            let rate_n = norm(&rate);
            let mut fd_n = 0.0f64;
            let mut vdev = 0.0f64;
            let mut xdev = 0.0f64;
            for i in 0..dim {
                let fd = (gp_rate.v[i] - gm_rate.v[i]) / (2.0 * h_rate);
                fd_n = fd_n.max((rate[i] - fd).abs() / (1.0 + rate[i].abs()));
                vdev += (g0.v[i] - base.v[i]).powi(2);
                let free = base.x[i] + p.m0 * r.powf(alpha) * base.v[i];
                xdev += (g0.x[i] - free).powi(2);
            }
            m4_fd = m4_fd.max(fd_n);
            if weight_v > 0.0 {
                e_rate = e_rate.max(rate_n / weight_v);
                e_vdev = e_vdev.max(vdev.sqrt() / weight_v);
            }
            if weight_x > 0.0 {
                e_xdev = e_xdev.max(xdev.sqrt() / weight_x);
            }
        }

        col1_env.push((r, e_col1));
        col2_env.push((r, e_col2));
        rate_env.push((r, e_rate));
        vdev_env.push((r, e_vdev));
        xdev_env.push((r, e_xdev));
    }

    // m0-invariance of the determinant at a handful of scales.
    let mut m0_inv = 0.0f64;
    for &r in r_grid.iter().step_by((r_grid.len() / 5).max(1)) {
        let dets: Vec<f64> = [-1.8, -1.2, 0.7, 1.3, 1.9]
            .iter()
            .map(|&m0| a_matrix(alpha, beta, m0, r).det())
            .collect();
        let dmin = dets.iter().cloned().fold(f64::INFINITY, f64::min);
        let dmax = dets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m0_inv = m0_inv.max((dmax - dmin).abs() / dmax.abs().max(dmin.abs()));
    }

    Ok(MPropertyReport {
        m1_time_residual: m1_time,
        m1_transport_residual: m1_transport,
        m2_det_residual: m2_det,
        m2_m0_invariance: m0_inv,
        m3_col1_slope: fit_slope(&col1_env)?.slope,
        m3_col2_slope: fit_slope(&col2_env)?.slope,
        m4_rate_slope: fit_slope(&rate_env)?.slope,
        m4_vdev_slope: fit_slope(&vdev_env)?.slope,
        m4_xdev_slope: fit_slope(&xdev_env)?.slope,
        m4_fd_residual: m4_fd,
    })
}

fn random_m0(rng: &mut ChaCha8Rng) -> f64 {
    // |m0| in [1/2, 2], sign random
    let mag = rng.random_range(0.5..2.0);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|&a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn forcing_reference_values() {
        // r = 1: log r = 0
        let (g1, g2) = forcing(2.0, 1.0).unwrap();
        assert_eq!((g1, g2), (0.0, 1.0));
        // beta = 2, r = e^{pi/2}
        let r = (std::f64::consts::FRAC_PI_2).exp();
        let (g1, g2) = forcing(2.0, r).unwrap();
        assert!((g1 - std::f64::consts::PI.exp()).abs() < 1e-9 * std::f64::consts::PI.exp());
        assert!(g2.abs() < 1e-9 * g1.abs());
        assert!(forcing(2.0, 0.0).is_err());
    }

    #[test]
    fn forcing_pythagorean_identity() {
        for &r in &[0.03, 0.7, 1.0, 5.5, 80.0] {
            let (g1, g2) = forcing(1.7, r).unwrap();
            let expect = r.powf(2.0 * 1.7);
            assert!((g1 * g1 + g2 * g2 - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn trajectory_limit_and_shear() {
        let p = TrajectoryParams::new(1.0, 2.0, -1.5, vec![0.0], vec![0.0]).unwrap();
        let base = PhasePoint::d1(0.2, 0.4, -0.8);
        // r = 0 returns the base point
        assert_eq!(trajectory_eval(&p, 0.0, &base).unwrap(), base);
        // m1 = m2 = 0: pure shear (t + m0 r^alpha, x + m0 r^alpha v, v)
        let g = trajectory_eval(&p, 2.0, &base).unwrap();
        let shear = -1.5 * 2.0;
        assert!((g.t - (0.2 + shear)).abs() < 1e-14);
        assert!((g.x[0] - (0.4 + shear * -0.8)).abs() < 1e-14);
        assert!((g.v[0] - -0.8).abs() < 1e-14);
    }

    #[test]
    fn zero_m0_rejected() {
        assert!(TrajectoryParams::new(1.0, 2.0, 0.0, vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn determinant_reference_value() {
        // alpha=1, beta=2, d=1, m0=-1.5, r=2: det = (-1/1) * 2^3 = -8
        let det = a_matrix(1.0, 2.0, -1.5, 2.0).det();
        assert!((det - -8.0).abs() < 1e-12, "got {det}");
    }

    #[test]
    fn a_script_block_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let lambda = rng.random_range(-2.0..-1.0);
            let theta = rng.random_range(-10.0..10.0);
            let det = a_script(1.0, 2.0, lambda, theta).det();
            assert!((det - -1.0).abs() < 1e-12, "det = {det}");
        }
    }

    #[test]
    fn velocity_rate_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = TrajectoryParams::new(
            1.0,
            2.0,
            1.3,
            vec![rng.random_range(-1.0..1.0)],
            vec![rng.random_range(-1.0..1.0)],
        )
        .unwrap();
        let base = PhasePoint::d1(0.0, 0.0, 0.0);
        let r = 1.0;
        let h = 1e-4;
        let gp = trajectory_eval(&p, r + h, &base).unwrap();
        let gm = trajectory_eval(&p, r - h, &base).unwrap();
        let fd = (gp.v[0] - gm.v[0]) / (2.0 * h);
        let exact = trajectory_velocity_rate(&p, r).unwrap()[0];
        assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
    }

    #[test]
    fn zero_forcing_parameters_give_zero_rate() {
        let p = TrajectoryParams::new(0.5, 1.2, 2.0, vec![0.0], vec![0.0]).unwrap();
        assert_eq!(trajectory_velocity_rate(&p, 3.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn m_property_suite_on_reference_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let r_grid = crate::quad::log_uniform(2f64.powi(-6), 2f64.powi(6), 97);
        let rep = check_m_properties(1.0, 2.0, 1, &r_grid, &mut rng, 20).unwrap();
        assert!(rep.m1_time_residual <= 1e-6, "{rep:?}");
        assert!(rep.m1_transport_residual <= 1e-6, "{rep:?}");
        assert!(rep.m2_det_residual <= 1e-10, "{rep:?}");
        assert!(rep.m2_m0_invariance <= 1e-12, "{rep:?}");
        assert!((rep.m3_col1_slope - -2.0).abs() <= 0.05, "{rep:?}");
        assert!((rep.m3_col2_slope - -1.0).abs() <= 0.05, "{rep:?}");
        assert!((rep.m4_rate_slope - 0.0).abs() <= 0.05, "{rep:?}");
        assert!((rep.m4_vdev_slope - 1.0).abs() <= 0.05, "{rep:?}");
        assert!((rep.m4_xdev_slope - 2.0).abs() <= 0.05, "{rep:?}");
        assert!(rep.m4_fd_residual <= 1e-6, "{rep:?}");
    }
}
