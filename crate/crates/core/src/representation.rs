//! Kinetic convolutions, manufactured structural pairs, representation
//! residuals, and Gagliardo–Nirenberg ratio evaluation.
//!
//! Manufactured pairs are built the Duhamel way: a separable compactly
//! supported source is integrated along free-transport characteristics, so
//! the structural equation holds by construction and every field has a fast
//! analytic evaluator.

use crate::fourier1d;
use crate::geometry::PhasePoint;
use crate::grid::{Axis, GridFunction};
use crate::kernels::{KernelMachine, TailedLine};
use crate::quad::{EtaNodes, Rule1d};
use crate::special::bump;
use crate::traj::{trajectory_eval, TrajectoryParams};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Which structural formulation a pair realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `(d_t + v d_x) f = D^{sigma,*} S` with increment-valued `S`.
    Gagliardo,
    /// `(d_t + v d_x) f = D^sigma S_0` with scalar `S_0`.
    Bessel,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gagliardo" => Ok(Model::Gagliardo),
            "bessel" => Ok(Model::Bessel),
            other => Err(Error::InvalidParameter(format!("unknown model {other:?}"))),
        }
    }
}

/// Uniform sampled line with linear interpolation and algebraic tails, the
/// carrier of the fractional velocity profiles of manufactured pairs.
#[derive(Debug, Clone)]
pub struct Line1d {
    pub min: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub decay: f64,
    tail_plus: f64,
    tail_minus: f64,
}

impl Line1d {
    /// Sample `g` on `[-len, len]` with `n + 1` nodes and fit signed
    /// `|v|^{-decay}` tails at `0.9 len`.
    pub fn build(g: &dyn Fn(f64) -> f64, len: f64, n: usize, decay: f64) -> Self {
        let step = 2.0 * len / n as f64;
        let values: Vec<f64> = (0..=n).map(|i| g(-len + step * i as f64)).collect();
        let probe = 0.9 * len;
        let ip = ((probe + len) / step).round() as usize;
        let im = ((-probe + len) / step).round() as usize;
        Line1d {
            min: -len,
            step,
            tail_plus: values[ip] * probe.powf(decay),
            tail_minus: values[im] * probe.powf(decay),
            values,
            decay,
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        let len = self.step * (self.values.len() - 1) as f64 / 2.0;
        if v.abs() >= 0.9 * len {
            let coeff = if v > 0.0 { self.tail_plus } else { self.tail_minus };
            return coeff * v.abs().powf(-self.decay);
        }
        let s = (v - self.min) / self.step;
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let f = s - i as f64;
        (1.0 - f) * self.values[i] + f * self.values[i + 1]
    }
}

/// A manufactured structural pair with analytic evaluators for `f`, the
/// sources, and the transport factor.
pub struct StructuralPair {
    pub model: Model,
    pub sigma: f64,
    /// Time-bump center/radius of the source generator.
    pub t_center: f64,
    pub t_radius: f64,
    /// Space-bump radius.
    pub x_radius: f64,
    /// Velocity-bump radius of `chi`.
    pub v_radius: f64,
    /// Lower Duhamel limit (below the source's time support).
    pub t_lower: f64,
    /// The fractional profile `W`: `D^sigma chi` for Bessel, or
    /// `-c_gag (-Delta)^sigma chi` for Gagliardo.
    pub w_profile: Line1d,
    /// Recorded structural residual from the manufacturing run.
    pub structural_residual: f64,
    /// `c_gag` at this `sigma`, recorded for bookkeeping.
    pub c_gag: f64,
}

impl StructuralPair {
    fn t_bump(&self, s: f64) -> f64 {
        bump((s - self.t_center) / self.t_radius)
    }

    fn x_bump(&self, x: f64) -> f64 {
        bump(x / self.x_radius)
    }

    fn chi(&self, v: f64) -> f64 {
        bump(v / self.v_radius)
    }

    /// Duhamel transport factor
    /// `A(t,x,v) = int_{-T}^{min(t, t1)} T_b(s) X_b(x - (t-s) v) ds`.
    /// The space bump sweeps through the `s`-interval at speed `|v|`, so the
    /// panel count grows with `|v|` to keep the feature resolved.
    pub fn transport_factor(&self, t: f64, x: f64, v: f64) -> f64 {
        let lo = (self.t_center - self.t_radius).max(self.t_lower);
        let hi = (self.t_center + self.t_radius).min(t);
        if hi <= lo {
            return 0.0;
        }
        let panels = 1 + (v.abs() * (hi - lo) / self.x_radius).ceil() as usize;
        let rule = Rule1d::composite_gauss(lo, hi, panels.min(24), 16);
        rule.integrate(|s| self.t_bump(s) * self.x_bump(x - (t - s) * v))
    }

    /// The manufactured solution `f(t,x,v) = W(v) A(t,x,v)`.
    pub fn f(&self, t: f64, x: f64, v: f64) -> f64 {
        let w = self.w_profile.eval(v);
        if w == 0.0 {
            return 0.0;
        }
        w * self.transport_factor(t, x, v)
    }

    /// Bessel source `S_0 = T_b(t) X_b(x) chi(v)`.
    pub fn bessel_source(&self, t: f64, x: f64, v: f64) -> f64 {
        self.t_bump(t) * self.x_bump(x) * self.chi(v)
    }

    /// Gagliardo source `S(z, h) = D^sigma_v g (z, h)` for the generator
    /// `g = T_b X_b chi`.
    pub fn gagliardo_source(&self, t: f64, x: f64, v: f64, h: f64) -> f64 {
        let tb = self.t_bump(t) * self.x_bump(x);
        if tb == 0.0 {
            return 0.0;
        }
        tb * (self.chi(v + h) - self.chi(v)) / h.abs().powf(self.sigma)
    }

    /// The transport right side `(d_t + v d_x) f` through the manufacturing
    /// recipe: `W(v) T_b(t) X_b(x)`.
    pub fn transport_rhs(&self, t: f64, x: f64, v: f64) -> f64 {
        self.w_profile.eval(v) * self.t_bump(t) * self.x_bump(x)
    }
}

/// Build the Bessel pair: source `S_0` a separable bump, solution
/// `f(t,x,v) = int_{-T}^t [D^sigma S_0](s, x-(t-s)v, v) ds`, which equals
/// `(D^sigma chi)(v) A(t,x,v)` by separability.
pub fn manufacture_bessel(sigma: f64) -> Result<StructuralPair> {
    manufacture(Model::Bessel, sigma)
}

/// Build the Gagliardo pair: `S := D^sigma_v g` for a separable bump `g`,
/// so `D^{sigma,*} S = -c_gag (-Delta)^sigma g` and the solution is
/// `-c_gag ((-Delta)^sigma chi)(v) A(t,x,v)`.
pub fn manufacture_gagliardo(sigma: f64) -> Result<StructuralPair> {
    manufacture(Model::Gagliardo, sigma)
}

fn manufacture(model: Model, sigma: f64) -> Result<StructuralPair> {
    manufacture_with(model, sigma, 0.75, 0.75, 1.0)
}

/// Manufacture a pair with custom bump radii (used by family sweeps).
pub fn manufacture_with(
    model: Model,
    sigma: f64,
    t_radius: f64,
    x_radius: f64,
    v_radius: f64,
) -> Result<StructuralPair> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidParameter("sigma must lie in (0,1)".into()));
    }
    if !(t_radius > 0.0 && x_radius > 0.0 && v_radius > 0.0) {
        return Err(Error::InvalidParameter("bump radii must be positive".into()));
    }
    let chi = move |v: f64| bump(v / v_radius);
    let c_gag = fourier1d::gagliardo_constant(sigma);
    let (order, scale) = match model {
        Model::Bessel => (sigma, 1.0),
        Model::Gagliardo => (2.0 * sigma, -c_gag),
    };
    let w_profile = Line1d::build(
        &|v| scale * fourier1d::pv_frac_derivative(&chi, (-v_radius, v_radius), order, v),
        96.0,
        8192,
        1.0 + order,
    );
    let mut pair = StructuralPair {
        model,
        sigma,
        t_center: 0.0,
        t_radius,
        x_radius,
        v_radius,
        t_lower: -2.0,
        w_profile,
        structural_residual: 0.0,
        c_gag,
    };
    pair.structural_residual = structural_residual(&pair);
    Ok(pair)
}

/// Finite-difference transport oracle: max relative residual of
/// `(d_t + v d_x) f = W T_b X_b` at interior probe points.
fn structural_residual(pair: &StructuralPair) -> f64 {
    let mut worst = 0.0f64;
    let h = 1e-5;
    let probes = [
        (0.1, 0.2, 0.4),
        (-0.2, -0.3, 0.8),
        (0.4, 0.1, -0.6),
        (0.0, 0.5, 1.3),
        (0.6, -0.4, -1.1),
        (0.25, 0.0, 0.05),
        (-0.5, 0.6, 2.2),
        (0.33, -0.62, -1.7),
        (0.72, 0.41, 0.9),
        (0.05, -0.15, -0.35),
        (0.5, 0.33, 1.9),
        (-0.1, 0.22, -2.4),
        (0.2, -0.5, 3.1),
        (0.15, 0.05, -0.9),
        (0.66, 0.6, 0.66),
        (-0.33, -0.2, 1.5),
        (0.4, 0.44, -1.25),
        (0.1, -0.7, 0.72),
        (0.55, 0.12, -3.0),
        (0.0, 0.0, 0.5),
    ];
    let scale = pair
        .w_profile
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for &(t, x, v) in &probes {
        let dt = (pair.f(t + h, x, v) - pair.f(t - h, x, v)) / (2.0 * h);
        let dx = (pair.f(t, x + h, v) - pair.f(t, x - h, v)) / (2.0 * h);
        let lhs = dt + v * dx;
        let rhs = pair.transport_rhs(t, x, v);
        worst = worst.max((lhs - rhs).abs() / (scale + rhs.abs()));
    }
    worst
}

/// Kinetic mollification through the trajectory route:
/// `T_{K_tau} f (z) = int f(gamma^m(tau; z)) psi(m) dm`.
pub fn mollify_trajectory_route(
    machine: &KernelMachine,
    tau: f64,
    f: &dyn Fn(f64, f64, f64) -> f64,
    z: &PhasePoint,
    nodes: usize,
) -> Result<f64> {
    let (t_lo, t_hi) = machine.psi.time_window();
    let rm0 = Rule1d::gauss(t_lo, t_hi, nodes);
    let rball = Rule1d::gauss(-1.0, 1.0, nodes);
    let mut acc = 0.0;
    for (&m0, &w0) in rm0.nodes.iter().zip(&rm0.weights) {
        let psi_t = machine.psi.eval_t(m0);
        if psi_t == 0.0 {
            continue;
        }
        for (&m1, &w1) in rball.nodes.iter().zip(&rball.weights) {
            let psi_1 = machine.psi.eval_ball(m1);
            if psi_1 == 0.0 {
                continue;
            }
            for (&m2, &w2) in rball.nodes.iter().zip(&rball.weights) {
                let psi_v = psi_t * psi_1 * machine.psi.eval_ball(m2);
                if psi_v == 0.0 {
                    continue;
                }
                let p = TrajectoryParams::new(
                    machine.params.alpha,
                    machine.params.beta,
                    m0,
                    vec![m1],
                    vec![m2],
                )?;
                let g = trajectory_eval(&p, tau, z)?;
                acc += w0 * w1 * w2 * psi_v * f(g.t, g.x[0], g.v[0]);
            }
        }
    }
    Ok(acc)
}

/// Kinetic mollification through the kernel route:
/// `T_{K_tau} f (z) = int f(z o (s,y,w)) K_tau(s,y,w) d(s,y,w)`.
pub fn mollify_kernel_route(
    machine: &KernelMachine,
    tau: f64,
    f: &dyn Fn(f64, f64, f64) -> f64,
    z: &PhasePoint,
    nodes: usize,
) -> f64 {
    let ((s_lo, s_hi), y_rad, _) = machine.support_box(tau);
    let rs = Rule1d::gauss(s_lo, s_hi, nodes);
    let ry = Rule1d::gauss(-y_rad, y_rad, nodes);
    let rba = tau.powf(machine.params.beta - machine.params.alpha);
    let mut acc = 0.0;
    for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
        for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
            let (lambda, ybar, _) = machine.rescaled(tau, s, y, 0.0);
            let Some((lo, hi)) = machine.eta_support(tau, lambda, ybar) else {
                continue;
            };
            let rw = Rule1d::gauss(lo * rba, hi * rba, nodes);
            for (&w, &ww) in rw.nodes.iter().zip(&rw.weights) {
                let k = machine.eval_k(tau, s, y, w);
                if k != 0.0 {
                    acc += ws * wy * ww * k * f(z.t + s, z.x[0] + y + s * z.v[0], z.v[0] + w);
                }
            }
        }
    }
    acc
}

/// Generic kinetic convolution of a kernel given as a closure over
/// `(s, y, w)`, with caller-provided integration box.
pub fn kinetic_convolve_box(
    kernel: &dyn Fn(f64, f64, f64) -> f64,
    support: ((f64, f64), (f64, f64), (f64, f64)),
    f: &dyn Fn(f64, f64, f64) -> f64,
    z: &PhasePoint,
    nodes: usize,
) -> f64 {
    let ((s0, s1), (y0, y1), (w0, w1)) = support;
    let rs = Rule1d::gauss(s0, s1, nodes);
    let ry = Rule1d::gauss(y0, y1, nodes);
    let rw = Rule1d::gauss(w0, w1, nodes);
    let mut acc = 0.0;
    for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
        for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
            for (&w, &ww) in rw.nodes.iter().zip(&rw.weights) {
                let k = kernel(s, y, w);
                if k != 0.0 {
                    acc += ws * wy * ww * k * f(z.t + s, z.x[0] + y + s * z.v[0], z.v[0] + w);
                }
            }
        }
    }
    acc
}

/// Extended kinetic convolution `T^eta_J F(z)` for an `h`-dependent kernel
/// closure, with the increment measure carried by the `eta` nodes.
pub fn kinetic_convolve_eta_box(
    kernel: &dyn Fn(f64, f64, f64, f64) -> f64,
    support: ((f64, f64), (f64, f64), (f64, f64)),
    eta: &EtaNodes,
    f: &dyn Fn(f64, f64, f64, f64) -> f64,
    z: &PhasePoint,
    nodes: usize,
) -> f64 {
    let ((s0, s1), (y0, y1), (w0, w1)) = support;
    let rs = Rule1d::gauss(s0, s1, nodes);
    let ry = Rule1d::gauss(y0, y1, nodes);
    let rw = Rule1d::gauss(w0, w1, nodes);
    let mut acc = 0.0;
    for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
        for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
            for (&w, &ww) in rw.nodes.iter().zip(&rw.weights) {
                for (&h, &wh) in eta.h.iter().zip(&eta.w) {
                    let k = kernel(s, y, w, h);
                    if k != 0.0 {
                        acc += ws
                            * wy
                            * ww
                            * wh
                            * k
                            * f(z.t + s, z.x[0] + y + s * z.v[0], z.v[0] + w, h);
                    }
                }
            }
        }
    }
    acc
}

/// Precomputed per-scale kernel tables for the right side of the Bessel
/// representation formula. The profile lines are independent of the
/// evaluation point, so one table serves every residual point at fixed tau.
pub struct BesselRhsTable {
    pub tau: f64,
    slices: Vec<BesselSlice>,
    eta_rule: Rule1d,
}

struct BesselSlice {
    r: f64,
    weight: f64,
    lambda: f64,
    ybar: f64,
    wl_wy: f64,
    g_line: TailedLine,
    gv_line: TailedLine,
}

/// Build the Bessel kernel table on an adaptive log `r`-rule over `(0, tau]`.
pub fn build_bessel_table(
    machine: &KernelMachine,
    tau: f64,
    octaves: usize,
    lambda_nodes: usize,
    ybar_nodes: usize,
) -> BesselRhsTable {
    let r_rule = Rule1d::log_gauss(tau * (0.5f64).powf(octaves as f64), tau, 2 * octaves, 3);
    build_bessel_table_with_rule(machine, tau, &r_rule, lambda_nodes, ybar_nodes)
}

/// Table construction on an explicit `r`-rule (single-scale rules allow
/// per-scale diagnostics).
pub fn build_bessel_table_with_rule(
    machine: &KernelMachine,
    tau: f64,
    r_rule: &Rule1d,
    lambda_nodes: usize,
    ybar_nodes: usize,
) -> BesselRhsTable {
    let (t_lo, t_hi) = machine.psi.time_window();
    let rl = Rule1d::gauss(t_lo, t_hi, lambda_nodes);
    let eta_rule = field_eta_rule(machine);
    let mut slices = Vec::new();
    for (&r, &wr) in r_rule.nodes.iter().zip(&r_rule.weights) {
        for (&lambda, &wl) in rl.nodes.iter().zip(&rl.weights) {
            let ry = machine.ybar_rule(r, lambda, ybar_nodes);
            for (&ybar, &wy) in ry.nodes.iter().zip(&ry.weights) {
                slices.push(BesselSlice {
                    r,
                    weight: wr,
                    lambda,
                    ybar,
                    wl_wy: wl * wy,
                    g_line: machine.d_phi_line(r, lambda, ybar, 256.0, 4096),
                    gv_line: machine.i_psi_line(r, lambda, ybar, 256.0, 4096),
                });
            }
        }
    }
    BesselRhsTable {
        tau,
        slices,
        eta_rule,
    }
}

/// The `eta`-quadrature of the extended convolutions: the kernel core, a
/// resolved mid-range where the field's velocity support edge can fall for
/// intermediate scales, and logarithmic far tails.
fn field_eta_rule(machine: &KernelMachine) -> Rule1d {
    let core = machine.eta_radius + 2.0;
    let mut rule = Rule1d::gauss(-core, core, 48);
    let mid = Rule1d::composite_gauss(core, 64.0, 10, 4);
    let far = Rule1d::log_gauss(64.0, 4096.0, 12, 4);
    for side in [&mid, &far] {
        for (&e, &we) in side.nodes.iter().zip(&side.weights) {
            rule.nodes.push(e);
            rule.weights.push(we);
            rule.nodes.push(-e);
            rule.weights.push(we);
        }
    }
    rule
}

/// Evaluate both right-side integrals of the Bessel representation formula:
/// `(int_0^tau T_{G_r} S_0 dr, int_0^tau T_{G_r^v} D^sigma f dr)` at `z`.
pub fn bessel_rhs(
    machine: &KernelMachine,
    table: &BesselRhsTable,
    s0: &dyn Fn(f64, f64, f64) -> f64,
    dsf: &dyn Fn(f64, f64, f64) -> f64,
    z: &PhasePoint,
) -> (f64, f64) {
    let p = &machine.params;
    let q = machine.capital_q();
    let mut source = 0.0;
    let mut velocity = 0.0;
    for slice in &table.slices {
        let r = slice.r;
        let ra = r.powf(p.alpha);
        let rb = r.powf(p.beta);
        let rba = r.powf(p.beta - p.alpha);
        let s = slice.lambda * ra;
        let y = slice.ybar * rb;
        let t_point = z.t + s;
        let x_base = z.x[0] + y + s * z.v[0];
        let pref_g = -p.alpha
            * p.alpha
            * r.powf(p.alpha - 1.0 - q - p.sigma * (p.beta - p.alpha))
            * slice.lambda;
        let pref_gv = r.powf(-1.0 - q + p.sigma * (p.beta - p.alpha));
        // the measure d(s,y,w) = r^Q d(lambda,ybar,eta) in rescaled variables
        let jac = slice.weight * slice.wl_wy * r.powf(q);
        let mut acc_g = 0.0;
        let mut acc_gv = 0.0;
        for (&eta, &we) in table.eta_rule.nodes.iter().zip(&table.eta_rule.weights) {
            let w = eta * rba;
            let v_point = z.v[0] + w;
            acc_g += we * slice.g_line.eval(eta) * s0(t_point, x_base, v_point);
            acc_gv += we * slice.gv_line.eval(eta) * dsf(t_point, x_base, v_point);
        }
        source += jac * pref_g * acc_g;
        velocity += jac * pref_gv * acc_gv;
    }
    (source, velocity)
}

/// Precomputed table for the Gagliardo right side: potential lines for the
/// velocity kernel; the source kernel uses direct `H_r` increments.
pub struct GagliardoRhsTable {
    pub tau: f64,
    slices: Vec<GagliardoSlice>,
    eta_core: Rule1d,
    eta_ext: Rule1d,
    h_nodes: EtaNodes,
}

struct GagliardoSlice {
    r: f64,
    weight: f64,
    lambda: f64,
    ybar: f64,
    wl_wy: f64,
    u_line: TailedLine,
}

pub fn build_gagliardo_table(
    machine: &KernelMachine,
    tau: f64,
    octaves: usize,
    lambda_nodes: usize,
    ybar_nodes: usize,
) -> GagliardoRhsTable {
    let (t_lo, t_hi) = machine.psi.time_window();
    let r_rule = Rule1d::log_gauss(tau * (0.5f64).powf(octaves as f64), tau, 2 * octaves, 3);
    let rl = Rule1d::gauss(t_lo, t_hi, lambda_nodes);
    let core = machine.eta_radius + 2.0;
    let eta_core = Rule1d::gauss(-core, core, 48);
    let mut eta_ext = Rule1d {
        nodes: vec![],
        weights: vec![],
    };
    let mid = Rule1d::composite_gauss(core, 64.0, 10, 4);
    let far = Rule1d::log_gauss(64.0, 2048.0, 10, 4);
    for side in [&mid, &far] {
        for (&e, &we) in side.nodes.iter().zip(&side.weights) {
            eta_ext.nodes.push(e);
            eta_ext.weights.push(we);
            eta_ext.nodes.push(-e);
            eta_ext.weights.push(we);
        }
    }
    let mut slices = Vec::new();
    for (&r, &wr) in r_rule.nodes.iter().zip(&r_rule.weights) {
        for (&lambda, &wl) in rl.nodes.iter().zip(&rl.weights) {
            let ry = machine.ybar_rule(r, lambda, ybar_nodes);
            for (&ybar, &wy) in ry.nodes.iter().zip(&ry.weights) {
                slices.push(GagliardoSlice {
                    r,
                    weight: wr,
                    lambda,
                    ybar,
                    wl_wy: wl * wy,
                    u_line: machine.u_tilde_line(r, lambda, ybar, 256.0, 4096),
                });
            }
        }
    }
    GagliardoRhsTable {
        tau,
        slices,
        eta_core,
        eta_ext,
        h_nodes: EtaNodes::log(2e-4, 2e3, 5),
    }
}

/// Evaluate both right-side integrals of the Gagliardo representation
/// formula at `z`: the `frak G` term against `S(., h)` and the `frak G^v`
/// term against `D^sigma f (., h)`.
pub fn gagliardo_rhs(
    machine: &KernelMachine,
    table: &GagliardoRhsTable,
    source: &dyn Fn(f64, f64, f64, f64) -> f64,
    increments_f: &dyn Fn(f64, f64, f64, f64) -> f64,
    z: &PhasePoint,
) -> (f64, f64) {
    let p = &machine.params;
    let q = machine.capital_q();
    let sigma = p.sigma;
    let mut source_acc = 0.0;
    let mut velocity_acc = 0.0;
    for slice in &table.slices {
        let r = slice.r;
        let ra = r.powf(p.alpha);
        let rb = r.powf(p.beta);
        let rba = r.powf(p.beta - p.alpha);
        let s = slice.lambda * ra;
        let y = slice.ybar * rb;
        let t_point = z.t + s;
        let x_base = z.x[0] + y + s * z.v[0];
        let jac = slice.weight * slice.wl_wy * r.powf(q);
        // H profile along the slice for the direct increment kernel
        let h_pref = p.alpha * slice.lambda * r.powf(p.alpha - 1.0 - q);
        let h_line =
            |eta: f64| -> f64 { h_pref * machine.profile_phi(r, slice.lambda, slice.ybar, eta) };
        let pref_gv = r.powf(-1.0 - q + sigma * (p.beta - p.alpha));
        let mut acc_s = 0.0;
        let mut acc_v = 0.0;
        for (&h, &wh) in table.h_nodes.h.iter().zip(&table.h_nodes.w) {
            let cap_h = h / rba;
            let habs_sig = h.abs().powf(sigma);
            for (&eta, &we) in table.eta_core.nodes.iter().zip(&table.eta_core.weights) {
                let h_here = h_line(eta);
                // branch supported where H_r(w) != 0
                let g_kernel = (h_line(eta + cap_h) - h_here) / habs_sig;
                if g_kernel != 0.0 {
                    acc_s +=
                        wh * we * g_kernel * source(t_point, x_base, z.v[0] + eta * rba, h);
                }
                // branch supported where H_r(w + h) != 0: w = (eta - H) R
                let eta_shifted = eta - cap_h;
                if eta_shifted.abs() > machine.eta_radius {
                    let g_shift = (h_here - h_line(eta_shifted)) / habs_sig;
                    if g_shift != 0.0 {
                        acc_s += wh
                            * we
                            * g_shift
                            * source(t_point, x_base, z.v[0] + eta_shifted * rba, h);
                    }
                }
                // velocity term on the core
                let gv = pref_gv
                    * (slice.u_line.eval(eta + cap_h) - slice.u_line.eval(eta))
                    / cap_h.abs().powf(sigma);
                acc_v += wh * we * gv * increments_f(t_point, x_base, z.v[0] + eta * rba, h);
            }
            // velocity term on the algebraic tails
            for (&eta, &we) in table.eta_ext.nodes.iter().zip(&table.eta_ext.weights) {
                let gv = pref_gv
                    * (slice.u_line.eval(eta + cap_h) - slice.u_line.eval(eta))
                    / cap_h.abs().powf(sigma);
                acc_v += wh * we * gv * increments_f(t_point, x_base, z.v[0] + eta * rba, h);
            }
        }
        source_acc += jac * acc_s;
        velocity_acc += jac * acc_v;
    }
    (source_acc, velocity_acc)
}

/// One representation-formula check at a point.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualPoint {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub left: f64,
    pub right_source: f64,
    pub right_velocity: f64,
    pub relative_residual: f64,
}

/// Full residual report over the sampled points.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub model: String,
    pub tau: f64,
    pub points: Vec<ResidualPoint>,
    pub max_relative_residual: f64,
    pub structural_residual: f64,
}

/// Draw interior sample points from the middle third of the box where the
/// solution has appreciable size.
pub fn sample_points(
    pair: &StructuralPair,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Vec<PhasePoint> {
    let mut pts = Vec::new();
    let f_scale = {
        let mut m = 0.0f64;
        for i in 0..200 {
            let t = -0.4 + 1.2 * (i as f64 / 199.0);
            m = m.max(pair.f(t, 0.1, 0.3).abs());
        }
        m
    };
    let mut guard = 0;
    while pts.len() < count && guard < 10_000 {
        guard += 1;
        let t = rng.random_range(-0.3..1.1);
        let x = rng.random_range(-0.8..0.8);
        let v = rng.random_range(-0.8..0.8);
        if pair.f(t, x, v).abs() >= 0.2 * f_scale {
            pts.push(PhasePoint::d1(t, x, v));
        }
    }
    pts
}

/// Evaluate the representation identity `f - T_{K_tau} f = RHS` at the
/// sample points and report relative residuals.
pub fn representation_residual(
    machine: &KernelMachine,
    pair: &StructuralPair,
    dsf_grid: Option<&GridFunction>,
    tau: f64,
    points: &[PhasePoint],
) -> Result<ResidualReport> {
    let f_fn = |t: f64, x: f64, v: f64| pair.f(t, x, v);
    let f_scale = points
        .iter()
        .map(|p| pair.f(p.t, p.x[0], p.v[0]).abs())
        .fold(1e-12f64, f64::max);
    let floor = 1e-3 * f_scale;
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    match pair.model {
        Model::Bessel => {
            let grid = dsf_grid.ok_or_else(|| {
                Error::InvalidParameter("Bessel residual needs a D^sigma f grid".into())
            })?;
            let table = build_bessel_table(machine, tau, 14, 8, 12);
            for z in points {
                let left = pair.f(z.t, z.x[0], z.v[0])
                    - mollify_trajectory_route(machine, tau, &f_fn, z, 20)?;
                let (src, vel) = bessel_rhs(
                    machine,
                    &table,
                    &|t, x, v| pair.bessel_source(t, x, v),
                    &|t, x, v| grid.eval(t, x, v).unwrap_or(0.0),
                    z,
                );
                let right = src + vel;
                let rel = (left - right).abs() / left.abs().max(floor);
                worst = worst.max(rel);
                out.push(ResidualPoint {
                    t: z.t,
                    x: z.x[0],
                    v: z.v[0],
                    left,
                    right_source: src,
                    right_velocity: vel,
                    relative_residual: rel,
                });
            }
        }
        Model::Gagliardo => {
            let table = build_gagliardo_table(machine, tau, 14, 8, 12);
            let sigma = pair.sigma;
            for z in points {
                let left = pair.f(z.t, z.x[0], z.v[0])
                    - mollify_trajectory_route(machine, tau, &f_fn, z, 20)?;
                let (src, vel) = gagliardo_rhs(
                    machine,
                    &table,
                    &|t, x, v, h| pair.gagliardo_source(t, x, v, h),
                    &|t, x, v, h| (pair.f(t, x, v + h) - pair.f(t, x, v)) / h.abs().powf(sigma),
                    z,
                );
                let right = src + vel;
                let rel = (left - right).abs() / left.abs().max(floor);
                worst = worst.max(rel);
                out.push(ResidualPoint {
                    t: z.t,
                    x: z.x[0],
                    v: z.v[0],
                    left,
                    right_source: src,
                    right_velocity: vel,
                    relative_residual: rel,
                });
            }
        }
    }
    Ok(ResidualReport {
        model: format!("{:?}", pair.model).to_lowercase(),
        tau,
        points: out,
        max_relative_residual: worst,
        structural_residual: pair.structural_residual,
    })
}

/// Sample `D^sigma_v f` of a pair on a grid by spectral differentiation of
/// analytically extended velocity lines.
pub fn dsf_grid_for_pair(
    pair: &StructuralPair,
    t_axis: Axis,
    x_axis: Axis,
    v_axis: Axis,
) -> Result<GridFunction> {
    let v_ext = 96.0;
    let n_ext = 2048usize;
    let step = 2.0 * v_ext / n_ext as f64;
    let mut out = GridFunction::sample(t_axis, x_axis, v_axis, |_, _, _| 0.0);
    let mut line = vec![0.0; n_ext];
    for it in 0..out.t.n {
        for ix in 0..out.x.n {
            let (t, x) = (out.t.node(it), out.x.node(ix));
            for (i, li) in line.iter_mut().enumerate() {
                *li = pair.f(t, x, -v_ext + step * i as f64);
            }
            fourier1d::fft_multiplier_line(
                &mut line,
                2.0 * v_ext,
                &|xi| xi.powf(pair.sigma),
                fourier1d::ZeroMode::Zero,
            )?;
            for iv in 0..out.v.n {
                let v = out.v.node(iv);
                let s = (v + v_ext) / step;
                let i = (s.floor() as usize).min(n_ext - 2);
                let fr = s - i as f64;
                let idx = out.index(it, ix, iv);
                out.values[idx] = (1.0 - fr) * line[i] + fr * line[i + 1];
            }
        }
    }
    Ok(out)
}

/// Norms and ratio of the Gagliardo–Nirenberg estimate for a sampled triple.
#[derive(Debug, Clone, Serialize)]
pub struct GnRatio {
    pub lhs: f64,
    pub rhs_velocity: f64,
    pub rhs_source: f64,
    pub ratio: f64,
}

/// `|f|_q / (|Df|_p^a |S|_{p'}^b)` from grid norms; `a`, `b` are the two
/// multiplicative exponents.
pub fn gn_ratio(
    f: &GridFunction,
    df: &GridFunction,
    source: &GridFunction,
    q: f64,
    p: f64,
    a_exp: f64,
    b_exp: f64,
) -> Result<GnRatio> {
    let p_conj = p / (p - 1.0);
    let lhs = f.norm_lq(q);
    let nv = df.norm_lq(p);
    let ns = source.norm_lq(p_conj);
    if nv == 0.0 || ns == 0.0 {
        if lhs == 0.0 {
            return Ok(GnRatio {
                lhs,
                rhs_velocity: 0.0,
                rhs_source: 0.0,
                ratio: 0.0,
            });
        }
        return Err(Error::InsufficientData(
            "vanishing right side with nonzero left side".into(),
        ));
    }
    let rhs_velocity = nv.powf(a_exp);
    let rhs_source = ns.powf(b_exp);
    let ratio = lhs / (rhs_velocity * rhs_source);
    if !ratio.is_finite() {
        return Err(Error::InsufficientData(
            "norm divergence in GN ratio".into(),
        ));
    }
    Ok(GnRatio {
        lhs,
        rhs_velocity,
        rhs_source,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelParams;

    fn machine() -> KernelMachine {
        KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn manufactured_bessel_pair_residual() {
        let pair = manufacture_bessel(0.5).unwrap();
        assert!(
            pair.structural_residual <= 1e-4,
            "residual {}",
            pair.structural_residual
        );
    }

    #[test]
    fn manufactured_gagliardo_pair_residual() {
        let pair = manufacture_gagliardo(0.5).unwrap();
        assert!(
            pair.structural_residual <= 1e-3,
            "residual {}",
            pair.structural_residual
        );
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let pair = manufacture_bessel(0.5).unwrap();
        // below the time support nothing has happened yet
        assert_eq!(pair.f(-1.5, 0.0, 0.0), 0.0);
        assert_eq!(pair.bessel_source(5.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn mollifier_routes_agree_on_gaussian() {
        let m = machine();
        let f = |t: f64, x: f64, v: f64| (-(t * t + x * x + v * v)).exp();
        let z = PhasePoint::d1(0.2, -0.1, 0.3);
        let a = mollify_trajectory_route(&m, 1.0, &f, &z, 24).unwrap();
        let b = mollify_kernel_route(&m, 1.0, &f, &z, 28);
        assert!(
            (a - b).abs() <= 1e-3 * a.abs().max(b.abs()),
            "trajectory {a} vs kernel {b}"
        );
    }

    #[test]
    fn mollifier_normalization_against_unit_function() {
        let m = machine();
        let one = |_: f64, _: f64, _: f64| 1.0;
        let z = PhasePoint::d1(0.0, 0.0, 0.0);
        let val = mollify_trajectory_route(&m, 0.7, &one, &z, 20).unwrap();
        assert!((val - 1.0).abs() <= 1e-4, "got {val}");
        let val = mollify_kernel_route(&m, 0.7, &one, &z, 28);
        assert!((val - 1.0).abs() <= 1e-3, "got {val}");
    }

    #[test]
    fn mollified_field_converges_to_field() {
        let m = machine();
        let f = |t: f64, x: f64, v: f64| (-(t * t + x * x + v * v)).exp();
        let z = PhasePoint::d1(0.1, 0.2, -0.1);
        let f_z = f(z.t, z.x[0], z.v[0]);
        let mut errs = Vec::new();
        for k in 1..=5 {
            let tau = (0.5f64).powi(k);
            let val = mollify_trajectory_route(&m, tau, &f, &z, 20).unwrap();
            errs.push((val - f_z).abs());
        }
        // decay with at most small wiggles from sign cancellations between
        // the first-order drift terms
        for w in errs.windows(2) {
            assert!(w[1] < w[0] * 1.3, "residuals not decaying: {errs:?}");
        }
        assert!(errs[4] <= 2e-2 * f_z.abs(), "{errs:?}");
        assert!(errs[4] < errs[0] / 5.0, "{errs:?}");
    }

    #[test]
    fn gn_ratio_guards_zero_pair() {
        let z = GridFunction::sample_v_line(Axis::new(-1.0, 1.0, 9), |_| 0.0);
        let r = gn_ratio(&z, &z, &z, 8.0 / 3.0, 2.0, 0.75, 0.25).unwrap();
        assert_eq!(r.ratio, 0.0);
    }
}
