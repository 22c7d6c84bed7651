//! The kinetic mollifier and its derived kernel families.
//!
//! Everything is expressed through the rescaled variables
//! `lambda = s/r^alpha`, `ybar = y/r^beta`, `eta = w/r^{beta-alpha}`, in
//! which the trajectory matrix factorizes as
//! `A_lambda(r) = diag(r^beta, r^{beta-alpha}) Ascript_lambda(log r)` and all
//! profiles become bounded bump compositions. Velocity dimension is one.

use crate::fourier1d;
use crate::fracops::{FracConstants, PeriodicLine};
use crate::quad::Rule1d;
use crate::report::{fit_slope, SlopeFit};
use crate::special::{bump, bump_d1, bump_mass};
use crate::traj::{a_script, forcing_row, Block2};
use crate::{Error, Result};

/// Time-support variant of the mollifier profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSupport {
    /// Support `(-2, -1)`: the subsolution-adapted choice used throughout.
    Sub,
    /// Support `(1, 2)`: mirror configuration for supersolutions.
    Super,
}

/// The profile `psi(m) = psi_t(m_0) psi_y(m_1) psi_w(m_2)`: a product of a
/// time bump supported in `(-2,-1)` (or `(1,2)`) and unit-ball bumps in the
/// `y` and `w` slots, normalized to unit integral.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    pub time_support: TimeSupport,
    inv_mass_t: f64,
    inv_mass_ball: f64,
}

impl Mollifier {
    pub fn standard() -> Self {
        Mollifier::with_support(TimeSupport::Sub)
    }

    pub fn with_support(time_support: TimeSupport) -> Self {
        let m = bump_mass();
        Mollifier {
            time_support,
            inv_mass_t: 2.0 / m, // time bump has radius 1/2
            inv_mass_ball: 1.0 / m,
        }
    }

    fn time_center(&self) -> f64 {
        match self.time_support {
            TimeSupport::Sub => -1.5,
            TimeSupport::Super => 1.5,
        }
    }

    /// The open time window carrying the support of `psi_t`.
    pub fn time_window(&self) -> (f64, f64) {
        let c = self.time_center();
        (c - 0.5, c + 0.5)
    }

    pub fn eval_t(&self, lambda: f64) -> f64 {
        bump(2.0 * (lambda - self.time_center())) * self.inv_mass_t
    }

    pub fn eval_ball(&self, u: f64) -> f64 {
        bump(u) * self.inv_mass_ball
    }

    pub fn eval_ball_d1(&self, u: f64) -> f64 {
        bump_d1(u) * self.inv_mass_ball
    }

    pub fn eval(&self, lambda: f64, u1: f64, u2: f64) -> f64 {
        self.eval_t(lambda) * self.eval_ball(u1) * self.eval_ball(u2)
    }
}

/// Scale family parameters: exponents `0 < alpha < beta < alpha(1+1/sigma)`.
#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > alpha) {
            return Err(Error::InvalidParameter("need 0 < alpha < beta".into()));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter("sigma must lie in (0,1)".into()));
        }
        if beta >= alpha * (1.0 + 1.0 / sigma) {
            return Err(Error::InvalidParameter(format!(
                "beta = {beta} outside admissible window ({alpha}, {})",
                alpha * (1.0 + 1.0 / sigma)
            )));
        }
        Ok(KernelParams { alpha, beta, sigma })
    }

    /// Homogeneous dimension `Q = (2 beta - alpha) d + alpha`, `d = 1`.
    pub fn capital_q(&self) -> f64 {
        2.0 * self.beta
    }
}

/// The kernel kinds exposed by the norm and weak-norm sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    KTau,
    H,
    Theta,
    VecK,
    L,
    BesselG,
    BesselGv,
    P,
    Q,
}

impl KernelKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "k" | "K" | "k-tau" => KernelKind::KTau,
            "h" | "H" => KernelKind::H,
            "theta" => KernelKind::Theta,
            "veck" => KernelKind::VecK,
            "l" | "L" => KernelKind::L,
            "g" | "G" => KernelKind::BesselG,
            "gv" | "Gv" => KernelKind::BesselGv,
            "p" | "P" => KernelKind::P,
            "q" | "Q" => KernelKind::Q,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown kernel kind {other:?}"
                )))
            }
        })
    }
}

/// Evaluator for the whole kernel family at fixed `(alpha, beta, sigma)`.
pub struct KernelMachine {
    pub params: KernelParams,
    pub psi: Mollifier,
    pub constants: FracConstants,
    /// Measured support radius of `ybar = y/r^beta`.
    pub ybar_radius: f64,
    /// Measured support radius of `eta = w/r^{beta-alpha}`.
    pub eta_radius: f64,
}

impl KernelMachine {
    pub fn new(params: KernelParams) -> Result<Self> {
        Self::with_mollifier(params, Mollifier::standard())
    }

    pub fn with_mollifier(params: KernelParams, psi: Mollifier) -> Result<Self> {
        let constants = FracConstants::compute(params.sigma)?;
        // |row1 . u| <= |sin| + |lambda||cos| <= 1 + 2 over the unit ball;
        // |row2 . u| <= (1/|lambda| + 1) max(|a1|, |a2|), |lambda| >= 1
        let amp = (params.beta * params.beta + 1.0).sqrt() / params.alpha;
        Ok(KernelMachine {
            params,
            psi,
            constants,
            ybar_radius: 3.0,
            eta_radius: 2.0 * amp,
        })
    }

    pub fn capital_q(&self) -> f64 {
        self.params.capital_q()
    }

    /// `|frak c|^{-1} = alpha^d` in `d = 1`.
    fn inv_abs_frak_c(&self) -> f64 {
        self.params.alpha
    }

    /// Rescaled coordinates `(lambda, ybar, eta)` of a physical point.
    pub fn rescaled(&self, r: f64, s: f64, y: f64, w: f64) -> (f64, f64, f64) {
        let p = &self.params;
        (
            s / r.powf(p.alpha),
            y / r.powf(p.beta),
            w / r.powf(p.beta - p.alpha),
        )
    }

    fn in_time_window(&self, lambda: f64) -> bool {
        let (lo, hi) = self.psi.time_window();
        lambda > lo && lambda < hi
    }

    /// The inverse script matrix at `(lambda, theta = log r)`.
    fn script_inverse(&self, lambda: f64, r: f64) -> Block2 {
        a_script(self.params.alpha, self.params.beta, lambda, r.ln()).inverse()
    }

    /// The `eta`-interval on which the compact kernels can be nonzero for a
    /// fixed `(r, lambda, ybar)` slice: the preimage of the unit ball pair
    /// under the affine map `u = Ascript^{-1} (ybar, eta)`.
    pub fn eta_support(&self, r: f64, lambda: f64, ybar: f64) -> Option<(f64, f64)> {
        if !self.in_time_window(lambda) {
            return None;
        }
        let m = self.script_inverse(lambda, r);
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (c0, c1) in [(m.a11 * ybar, m.a12), (m.a21 * ybar, m.a22)] {
            if c1.abs() < 1e-13 {
                if c0.abs() >= 1.0 {
                    return None;
                }
            } else {
                let a = (-1.0 - c0) / c1;
                let b = (1.0 - c0) / c1;
                lo = lo.max(a.min(b));
                hi = hi.min(a.max(b));
            }
        }
        (hi > lo).then_some((lo, hi))
    }

    /// Kinetic mollifier `K_r(s,y,w)`.
    pub fn eval_k(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        if !self.in_time_window(lambda) {
            return 0.0;
        }
        let m = self.script_inverse(lambda, r);
        let (u1, u2) = m.apply(ybar, eta);
        self.inv_abs_frak_c() * r.powf(-self.capital_q()) * self.psi.eval(lambda, u1, u2)
    }

    /// `H_r = (alpha s / r) K_r`.
    pub fn eval_h(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        self.params.alpha * s / r * self.eval_k(r, s, y, w)
    }

    /// Forcing factor `B_r = F_{lambda}(r) A_{lambda}(r)^{-1} (y, w)^T`.
    pub fn eval_b(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        let m = self.script_inverse(lambda, r);
        let (u1, u2) = m.apply(ybar, eta);
        let (f1, f2) = forcing_row(self.params.alpha, self.params.beta, lambda, r);
        f1 * u1 + f2 * u2
    }

    /// `Theta_r = B_r K_r`; the trajectory forcing kernel is `vec K_r = -Theta_r`.
    pub fn eval_theta(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let k = self.eval_k(r, s, y, w);
        if k == 0.0 {
            return 0.0;
        }
        self.eval_b(r, s, y, w) * k
    }

    /// `L_r = -div_w vec K_r = d/dw Theta_r`, evaluated analytically.
    pub fn eval_l(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let p = &self.params;
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        if !self.in_time_window(lambda) {
            return 0.0;
        }
        let m = self.script_inverse(lambda, r);
        let (u1, u2) = m.apply(ybar, eta);
        let (f1, f2) = forcing_row(p.alpha, p.beta, lambda, r);
        let b = f1 * u1 + f2 * u2;

        let rba = r.powf(p.beta - p.alpha);
        // d/dw of the rescaled arguments: u = Minv (ybar, w r^{alpha-beta})
        let du1 = m.a12 / rba;
        let du2 = m.a22 / rba;
        let db = f1 * du1 + f2 * du2;

        let pref = self.inv_abs_frak_c() * r.powf(-self.capital_q()) * self.psi.eval_t(lambda);
        let k_val = pref * self.psi.eval_ball(u1) * self.psi.eval_ball(u2);
        let dk = pref
            * (self.psi.eval_ball_d1(u1) * du1 * self.psi.eval_ball(u2)
                + self.psi.eval_ball(u1) * self.psi.eval_ball_d1(u2) * du2);
        db * k_val + b * dk
    }

    /// Rescaled profile `Phi_{r,lambda,ybar}(eta)`; compactly supported in
    /// `|eta| <= eta_radius`, uniformly bounded over `r`.
    pub fn profile_phi(&self, r: f64, lambda: f64, ybar: f64, eta: f64) -> f64 {
        if !self.in_time_window(lambda) {
            return 0.0;
        }
        let m = self.script_inverse(lambda, r);
        let (u1, u2) = m.apply(ybar, eta);
        self.psi.eval(lambda, u1, u2)
    }

    /// Rescaled profile `Psi_{r,lambda,ybar}(eta) = r^{1+Q} L_r(...)`:
    /// compactly supported, zero average in `eta`.
    pub fn profile_psi(&self, r: f64, lambda: f64, ybar: f64, eta: f64) -> f64 {
        let p = &self.params;
        let q = self.capital_q();
        r.powf(1.0 + q)
            * self.eval_l(
                r,
                lambda * r.powf(p.alpha),
                ybar * r.powf(p.beta),
                eta * r.powf(p.beta - p.alpha),
            )
    }

    /// Center and half-width of the slice support, the stretching frame in
    /// which every profile has unit-scale features.
    pub fn slice_frame(&self, r: f64, lambda: f64, ybar: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.eta_support(r, lambda, ybar)?;
        Some((0.5 * (lo + hi), 0.5 * (hi - lo)))
    }

    /// Breakpoints of the slice geometry in `ybar`: between consecutive
    /// breakpoints the support endpoints are affine, so the kernels are
    /// smooth there and composite Gauss panels converge fast. The kinks are
    /// the crossings of the two constraint strips' endpoint lines.
    pub fn ybar_breakpoints(&self, r: f64, lambda: f64) -> Vec<f64> {
        let m = self.script_inverse(lambda, r);
        let rad = self.ybar_radius;
        let mut pts = vec![-rad, rad];
        let rows = [(m.a11, m.a12), (m.a21, m.a22)];
        // endpoint lines eta = (pm 1 - Mi1 ybar)/Mi2 as (intercept, slope)
        let mut lines = Vec::new();
        for &(c0, c1) in &rows {
            if c1.abs() < 1e-13 {
                // constraint binds in ybar alone: |c0 ybar| = 1
                if c0.abs() > 1e-13 {
                    pts.push(1.0 / c0);
                    pts.push(-1.0 / c0);
                }
            } else {
                lines.push(((-1.0) / c1, -c0 / c1));
                lines.push((1.0 / c1, -c0 / c1));
            }
        }
        if lines.len() == 4 {
            for i in 0..2 {
                for j in 2..4 {
                    let (ai, bi) = lines[i];
                    let (aj, bj) = lines[j];
                    if (bi - bj).abs() > 1e-12 {
                        pts.push((aj - ai) / (bi - bj));
                    }
                }
            }
        }
        pts.retain(|&y| y.is_finite() && y.abs() <= rad + 1e-12);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
        pts
    }

    /// Composite Gauss rule over `ybar` respecting the slice-geometry kinks.
    pub fn ybar_rule(&self, r: f64, lambda: f64, per_panel: usize) -> Rule1d {
        let pts = self.ybar_breakpoints(r, lambda);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in pts.windows(2) {
            if pair[1] - pair[0] < 1e-12 {
                continue;
            }
            let rule = Rule1d::gauss(pair[0], pair[1], per_panel);
            nodes.extend(rule.nodes);
            weights.extend(rule.weights);
        }
        Rule1d { nodes, weights }
    }

    /// `D^sigma` of the `Phi` profile at a single `eta`: principal-value
    /// quadrature in the support-stretched frame, where
    /// `D^sigma [g(./a)](eta) = a^{-sigma} (D^sigma g)(eta/a)`. Far from the
    /// support the singular integral collapses to a plain kernel integral
    /// over the support, which the quadrature switches to.
    pub fn d_sigma_phi(&self, r: f64, lambda: f64, ybar: f64, eta: f64) -> f64 {
        let Some((center, a)) = self.slice_frame(r, lambda, ybar) else {
            return 0.0;
        };
        let sigma = self.params.sigma;
        let g = |m: f64| self.profile_phi(r, lambda, ybar, center + a * m);
        let m = (eta - center) / a;
        let inner = if m.abs() <= 3.0 {
            fourier1d::pv_frac_derivative(&g, (-1.0, 1.0), sigma, m)
        } else {
            let rule = Rule1d::gauss(-1.0, 1.0, 32);
            -crate::special::frac_laplacian_constant(1, sigma)
                * rule.integrate(|z| g(z) * (m - z).abs().powf(-1.0 - sigma))
        };
        a.powf(-sigma) * inner
    }

    /// `I^sigma` of the `Psi` profile at a single `eta`: Riesz-kernel
    /// quadrature in the support-stretched frame, where
    /// `I^sigma [g(./a)](eta) = a^{sigma} (I^sigma g)(eta/a)`.
    pub fn i_sigma_psi(&self, r: f64, lambda: f64, ybar: f64, eta: f64) -> f64 {
        let Some((center, a)) = self.slice_frame(r, lambda, ybar) else {
            return 0.0;
        };
        let sigma = self.params.sigma;
        let g = |m: f64| self.profile_psi(r, lambda, ybar, center + a * m);
        let m = (eta - center) / a;
        let inner = if m.abs() <= 3.0 {
            fourier1d::riesz_potential_profile(&g, (-1.0, 1.0), sigma, m)
        } else {
            let rule = Rule1d::gauss(-1.0, 1.0, 32);
            crate::special::riesz_constant(1, sigma)
                * rule.integrate(|z| g(z) * (m - z).abs().powf(sigma - 1.0))
        };
        a.powf(sigma) * inner
    }

    /// Bessel source kernel `G_{r,sigma}(s,y,w)`.
    pub fn eval_bessel_g(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let p = &self.params;
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        if !self.in_time_window(lambda) || ybar.abs() > self.ybar_radius {
            return 0.0;
        }
        let q = self.capital_q();
        let pref = -p.alpha
            * self.inv_abs_frak_c()
            * r.powf(p.alpha - 1.0 - q - p.sigma * (p.beta - p.alpha))
            * lambda;
        pref * self.d_sigma_phi(r, lambda, ybar, eta)
    }

    /// Bessel velocity kernel `G^v_{r,sigma}(s,y,w) = I^sigma_w L_r`.
    pub fn eval_bessel_gv(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let p = &self.params;
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        if !self.in_time_window(lambda) || ybar.abs() > self.ybar_radius {
            return 0.0;
        }
        let q = self.capital_q();
        r.powf(-1.0 - q + p.sigma * (p.beta - p.alpha)) * self.i_sigma_psi(r, lambda, ybar, eta)
    }

    /// Gagliardo source kernel `frak G_{r,sigma}(s,y,w,h) = D^sigma_w H_r`.
    pub fn eval_gagliardo_g(&self, r: f64, s: f64, y: f64, w: f64, h: f64) -> f64 {
        (self.eval_h(r, s, y, w + h) - self.eval_h(r, s, y, w)) / h.abs().powf(self.params.sigma)
    }

    /// Spectral line transform of a rescaled profile in the slice-stretched
    /// frame `eta = center + a m`: sample on a uniform `m`-period, apply the
    /// even multiplier, and attach the analytic moment asymptote beyond the
    /// seam. The stretching power `a^{hom}` of the operator folds into the
    /// output scale.
    fn profile_multiplier_line(
        &self,
        r: f64,
        lambda: f64,
        ybar: f64,
        profile: &dyn Fn(f64) -> f64,
        mult: &dyn Fn(f64) -> f64,
        hom_power: f64,
        tail: TailAsymptote,
        len: f64,
        n: usize,
    ) -> TailedLine {
        let Some((center, a)) = self.slice_frame(r, lambda, ybar) else {
            return TailedLine::zero();
        };
        let step = 2.0 * len / n as f64;
        let mut values: Vec<f64> = (0..n)
            .map(|i| profile(center + a * (-len + step * i as f64)))
            .collect();
        // moments of the stretched profile drive the far field
        let moment_rule = Rule1d::gauss(-1.0, 1.0, 32);
        let g = |m: f64| profile(center + a * m);
        let (coeff, decay, odd) = match tail {
            TailAsymptote::MassKernel { constant, decay } => {
                (constant * moment_rule.integrate(g), decay, false)
            }
            TailAsymptote::MomentKernel { constant, decay } => (
                constant * moment_rule.integrate(|m| m * g(m)),
                decay,
                true,
            ),
        };
        fourier1d::fft_multiplier_line(&mut values, 2.0 * len, mult, fourier1d::ZeroMode::Zero)
            .expect("line transform");
        let line = PeriodicLine {
            min: -len,
            period: 2.0 * len,
            values,
        };
        TailedLine {
            line,
            seam: 12.0_f64.min(0.45 * len),
            decay,
            tail_coeff: coeff,
            tail_odd: odd,
            center,
            stretch: a,
            out_scale: a.powf(hom_power),
        }
    }

    /// Potential profile for the Gagliardo velocity kernel:
    /// `(-Delta)^{-sigma} Psi_{r,lambda,ybar} / c_gag` as a tailed line with
    /// the first-moment far field `-K'(m) M_1`.
    pub fn u_tilde_line(&self, r: f64, lambda: f64, ybar: f64, len: f64, n: usize) -> TailedLine {
        let sigma = self.params.sigma;
        // d/dm of the (-Delta)^{-sigma} kernel: the pole of the kernel
        // constant at 2 sigma = 1 cancels against the derivative factor,
        // leaving -2 Gamma((3-2s)/2) / (4^s sqrt(pi) Gamma(s)) |m|^{2s-2} sign(m)
        let pi = std::f64::consts::PI;
        let kprime = 2.0 * crate::special::gamma((3.0 - 2.0 * sigma) / 2.0)
            / ((4.0f64).powf(sigma) * pi.sqrt() * crate::special::gamma(sigma));
        let mut out = self.profile_multiplier_line(
            r,
            lambda,
            ybar,
            &|eta| self.profile_psi(r, lambda, ybar, eta),
            &|xi| xi.powf(-2.0 * sigma),
            2.0 * sigma,
            TailAsymptote::MomentKernel {
                constant: kprime,
                decay: 2.0 - 2.0 * sigma,
            },
            len,
            n,
        );
        out.out_scale /= self.constants.c_gag;
        out
    }

    /// `D^sigma Phi_{r,lambda,ybar}` as a tailed line; far field
    /// `-c_bes mass(Phi) |m|^{-1-sigma}`.
    pub fn d_phi_line(&self, r: f64, lambda: f64, ybar: f64, len: f64, n: usize) -> TailedLine {
        let sigma = self.params.sigma;
        self.profile_multiplier_line(
            r,
            lambda,
            ybar,
            &|eta| self.profile_phi(r, lambda, ybar, eta),
            &|xi| xi.powf(sigma),
            -sigma,
            TailAsymptote::MassKernel {
                constant: -crate::special::frac_laplacian_constant(1, sigma),
                decay: 1.0 + sigma,
            },
            len,
            n,
        )
    }

    /// `I^sigma Psi_{r,lambda,ybar}` as a tailed line; far field
    /// `c_rie (1 - sigma) M_1 sign(m) |m|^{-(2-sigma)}`.
    pub fn i_psi_line(&self, r: f64, lambda: f64, ybar: f64, len: f64, n: usize) -> TailedLine {
        let sigma = self.params.sigma;
        self.profile_multiplier_line(
            r,
            lambda,
            ybar,
            &|eta| self.profile_psi(r, lambda, ybar, eta),
            &|xi| xi.powf(-sigma),
            sigma,
            TailAsymptote::MomentKernel {
                constant: crate::special::riesz_constant(1, sigma) * (1.0 - sigma),
                decay: 2.0 - sigma,
            },
            len,
            n,
        )
    }

    /// Gagliardo velocity kernel
    /// `frak G^v_{r,sigma}(s,y,w,h) = [R_{sigma,w} Theta_r]((s,y,w),h)`
    /// evaluated from a precomputed potential line for its `(r, s, y)` slice.
    pub fn eval_gagliardo_gv(&self, r: f64, s: f64, u_line: &TailedLine, w: f64, h: f64) -> f64 {
        let p = &self.params;
        let lambda = s / r.powf(p.alpha);
        if !self.in_time_window(lambda) {
            return 0.0;
        }
        let rba = r.powf(p.beta - p.alpha);
        let eta = w / rba;
        let cap_h = h / rba;
        let q = self.capital_q();
        let pref = r.powf(-1.0 - q + p.sigma * (p.beta - p.alpha));
        pref * (u_line.eval(eta + cap_h) - u_line.eval(eta)) / cap_h.abs().powf(p.sigma)
    }

    /// The explicit domination kernels of the single-scale bounds:
    /// `P_r = r^{-Q} 1_E(s/r^alpha, y/r^beta) 1_{|w| <= C0 r^{beta-alpha}}`,
    /// `Q_r = r^{-Q} 1_E (1 + |w|/r^{beta-alpha})^{-d-1+sigma}`.
    pub fn eval_p(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        if !self.in_time_window(lambda) || ybar.abs() > self.ybar_radius {
            return 0.0;
        }
        if eta.abs() > self.eta_radius {
            return 0.0;
        }
        r.powf(-self.capital_q())
    }

    pub fn eval_q(&self, r: f64, s: f64, y: f64, w: f64) -> f64 {
        let (lambda, ybar, eta) = self.rescaled(r, s, y, w);
        if !self.in_time_window(lambda) || ybar.abs() > self.ybar_radius {
            return 0.0;
        }
        r.powf(-self.capital_q()) * (1.0 + eta.abs()).powf(-(2.0 - self.params.sigma))
    }

    /// Physical support box `(s window, |y| radius, |w| radius)` at scale `r`.
    pub fn support_box(&self, r: f64) -> ((f64, f64), f64, f64) {
        let p = &self.params;
        let (lo, hi) = self.psi.time_window();
        let ra = r.powf(p.alpha);
        (
            (lo * ra, hi * ra),
            self.ybar_radius * r.powf(p.beta),
            self.eta_radius * r.powf(p.beta - p.alpha),
        )
    }
}

/// The analytic far-field model of a transformed profile: either the mass
/// asymptote `C mass |m|^{-decay}` or the first-moment asymptote
/// `C M_1 sign(m) |m|^{-decay}`.
enum TailAsymptote {
    MassKernel { constant: f64, decay: f64 },
    MomentKernel { constant: f64, decay: f64 },
}

/// Periodic profile line in slice-stretched coordinates
/// `m = (eta - center)/stretch`, carrying the analytic moment asymptote
/// beyond the seam and the operator's stretching power in `out_scale`.
pub struct TailedLine {
    line: PeriodicLine,
    seam: f64,
    decay: f64,
    tail_coeff: f64,
    tail_odd: bool,
    center: f64,
    stretch: f64,
    out_scale: f64,
}

impl TailedLine {
    fn zero() -> Self {
        TailedLine {
            line: PeriodicLine {
                min: -1.0,
                period: 2.0,
                values: vec![0.0; 4],
            },
            seam: 1.0,
            decay: 1.0,
            tail_coeff: 0.0,
            tail_odd: false,
            center: 0.0,
            stretch: 1.0,
            out_scale: 0.0,
        }
    }

    pub fn eval(&self, eta: f64) -> f64 {
        if self.out_scale == 0.0 {
            return 0.0;
        }
        let m = (eta - self.center) / self.stretch;
        let inner = if m.abs() < self.seam {
            self.line.eval(m)
        } else {
            let sign = if self.tail_odd { m.signum() } else { 1.0 };
            sign * self.tail_coeff * m.abs().powf(-self.decay)
        };
        self.out_scale * inner
    }
}

/// Expected `L^theta`-norm scaling exponents (slopes in `r`).
pub fn expected_norm_slope(kind: KernelKind, params: &KernelParams, theta: f64) -> f64 {
    let q = params.capital_q();
    let gap = params.sigma * (params.beta - params.alpha);
    let vol = if theta.is_infinite() { -q } else { q * (1.0 / theta - 1.0) };
    match kind {
        KernelKind::KTau | KernelKind::P | KernelKind::Q => vol,
        KernelKind::H => vol + params.alpha - 1.0,
        KernelKind::Theta | KernelKind::VecK => vol + (params.beta - params.alpha) - 1.0,
        KernelKind::L => vol - 1.0,
        KernelKind::BesselG => params.alpha - gap - 1.0 + vol,
        KernelKind::BesselGv => gap - 1.0 + vol,
    }
}

/// Compute `||kernel_r||_{L^theta}` by quadrature. `theta = f64::INFINITY`
/// yields the sup norm over the sampling lattice.
pub fn kernel_norm(machine: &KernelMachine, kind: KernelKind, r: f64, theta: f64) -> f64 {
    match kind {
        KernelKind::BesselG | KernelKind::BesselGv => tailed_norms(machine, kind, r, &[theta])[0],
        _ => compact_norm(machine, kind, r, theta),
    }
}

/// Norms for several `theta` at once, sharing the profile table per `r`.
pub fn kernel_norms_multi(
    machine: &KernelMachine,
    kind: KernelKind,
    r: f64,
    thetas: &[f64],
) -> Vec<f64> {
    match kind {
        KernelKind::BesselG | KernelKind::BesselGv => tailed_norms(machine, kind, r, thetas),
        _ => thetas
            .iter()
            .map(|&t| compact_norm(machine, kind, r, t))
            .collect(),
    }
}

fn compact_eval(machine: &KernelMachine, kind: KernelKind, r: f64, s: f64, y: f64, w: f64) -> f64 {
    match kind {
        KernelKind::KTau => machine.eval_k(r, s, y, w),
        KernelKind::H => machine.eval_h(r, s, y, w),
        KernelKind::Theta => machine.eval_theta(r, s, y, w),
        KernelKind::VecK => -machine.eval_theta(r, s, y, w),
        KernelKind::L => machine.eval_l(r, s, y, w),
        KernelKind::P => machine.eval_p(r, s, y, w),
        KernelKind::Q => machine.eval_q(r, s, y, w),
        _ => unreachable!(),
    }
}

fn compact_norm(machine: &KernelMachine, kind: KernelKind, r: f64, theta: f64) -> f64 {
    let p = &machine.params;
    let ((s_lo, s_hi), y_rad, w_rad) = machine.support_box(r);
    // P and Q live on explicit (lambda, ybar) boxes rather than the
    // parallelogram; Q additionally carries an algebraic w-tail.
    let box_kind = matches!(kind, KernelKind::P | KernelKind::Q);
    let w_rad = if kind == KernelKind::Q { w_rad * 512.0 } else { w_rad };
    let rs = Rule1d::gauss(s_lo, s_hi, 24);
    let ry = Rule1d::gauss(-y_rad, y_rad, 32);
    let rba = r.powf(p.beta - p.alpha);
    let w_rule = |s: f64, y: f64| -> Option<Rule1d> {
        if box_kind {
            Some(Rule1d::gauss(-w_rad, w_rad, 96))
        } else {
            // adapt to the parallelogram slice
            let (lambda, ybar, _) = machine.rescaled(r, s, y, 0.0);
            machine
                .eta_support(r, lambda, ybar)
                .map(|(lo, hi)| Rule1d::gauss(lo * rba, hi * rba, 48))
        }
    };
    if theta.is_infinite() {
        let mut sup = 0.0f64;
        for &s in &rs.nodes {
            for &y in &ry.nodes {
                if let Some(rw) = w_rule(s, y) {
                    for &w in &rw.nodes {
                        sup = sup.max(compact_eval(machine, kind, r, s, y, w).abs());
                    }
                }
            }
        }
        return sup;
    }
    let mut acc = 0.0;
    for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
        for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
            if let Some(rw) = w_rule(s, y) {
                for (&w, &ww) in rw.nodes.iter().zip(&rw.weights) {
                    acc +=
                        ws * wy * ww * compact_eval(machine, kind, r, s, y, w).abs().powf(theta);
                }
            }
        }
    }
    acc.powf(1.0 / theta)
}

/// Norms of the tailed Bessel kernels, computed in rescaled coordinates
/// where `d(s,y,w) = r^Q d(lambda, ybar, eta)`. The profile table is built
/// once per `r` and reused for every requested `theta`.
fn tailed_norms(machine: &KernelMachine, kind: KernelKind, r: f64, thetas: &[f64]) -> Vec<f64> {
    let p = &machine.params;
    let q = machine.capital_q();
    let (t_lo, t_hi) = machine.psi.time_window();
    let rl = Rule1d::gauss(t_lo, t_hi, 10);
    // eta: compact core plus symmetric log tails; truncation at eta_far is an
    // r-independent fraction in rescaled coordinates, so slopes are unbiased
    let core = machine.eta_radius + 2.0;
    let eta_far = 512.0;
    let mut eta_rule = Rule1d::gauss(-core, core, 40);
    let tail = Rule1d::log_gauss(core, eta_far, 12, 4);
    for (&e, &we) in tail.nodes.iter().zip(&tail.weights) {
        eta_rule.nodes.push(e);
        eta_rule.weights.push(we);
        eta_rule.nodes.push(-e);
        eta_rule.weights.push(we);
    }

    let pref = match kind {
        KernelKind::BesselG => {
            -p.alpha
                * machine.inv_abs_frak_c()
                * r.powf(p.alpha - 1.0 - q - p.sigma * (p.beta - p.alpha))
        }
        KernelKind::BesselGv => r.powf(-1.0 - q + p.sigma * (p.beta - p.alpha)),
        _ => unreachable!(),
    };

    // per-slice profile lines over the kink-aware ybar rule
    let mut table = Vec::new();
    let mut weights_yl = Vec::new();
    for (&lambda, &wl) in rl.nodes.iter().zip(&rl.weights) {
        let ry = machine.ybar_rule(r, lambda, 8);
        for (&ybar, &wy) in ry.nodes.iter().zip(&ry.weights) {
            let line = match kind {
                KernelKind::BesselG => machine.d_phi_line(r, lambda, ybar, 256.0, 4096),
                KernelKind::BesselGv => machine.i_psi_line(r, lambda, ybar, 256.0, 4096),
                _ => unreachable!(),
            };
            let row: Vec<f64> = eta_rule
                .nodes
                .iter()
                .map(|&eta| {
                    let v = match kind {
                        KernelKind::BesselG => lambda * line.eval(eta),
                        KernelKind::BesselGv => line.eval(eta),
                        _ => unreachable!(),
                    };
                    (pref * v).abs()
                })
                .collect();
            table.push(row);
            weights_yl.push(wl * wy);
        }
    }

    thetas
        .iter()
        .map(|&theta| {
            if theta.is_infinite() {
                return table
                    .iter()
                    .flatten()
                    .cloned()
                    .fold(0.0f64, f64::max);
            }
            let mut acc = 0.0;
            for (row, &wyl) in table.iter().zip(&weights_yl) {
                for (&v, &we) in row.iter().zip(&eta_rule.weights) {
                    acc += wyl * we * v.powf(theta);
                }
            }
            (r.powf(q) * acc).powf(1.0 / theta)
        })
        .collect()
}

/// Norm sweep over an `r`-grid with the fitted log-log slope.
pub struct NormSweep {
    pub pairs: Vec<(f64, f64)>,
    pub fit: SlopeFit,
    pub expected_slope: f64,
}

pub fn kernel_norm_scaling(
    machine: &KernelMachine,
    kind: KernelKind,
    theta: f64,
    r_grid: &[f64],
) -> Result<NormSweep> {
    Ok(kernel_norm_scaling_multi(machine, kind, &[theta], r_grid)?.remove(0))
}

/// Norm sweeps for several `theta` values, sharing kernel evaluations per `r`.
pub fn kernel_norm_scaling_multi(
    machine: &KernelMachine,
    kind: KernelKind,
    thetas: &[f64],
    r_grid: &[f64],
) -> Result<Vec<NormSweep>> {
    let per_r: Vec<Vec<f64>> = r_grid
        .iter()
        .map(|&r| kernel_norms_multi(machine, kind, r, thetas))
        .collect();
    thetas
        .iter()
        .enumerate()
        .map(|(j, &theta)| {
            let pairs: Vec<(f64, f64)> = r_grid
                .iter()
                .zip(&per_r)
                .map(|(&r, norms)| (r, norms[j]))
                .collect();
            let fit = fit_slope(&pairs)?;
            Ok(NormSweep {
                fit,
                expected_slope: expected_norm_slope(kind, &machine.params, theta),
                pairs,
            })
        })
        .collect()
}

/// Pointwise value of the r-integrated kernel `int_0^tau kernel_r dr`; the
/// integrand is supported on the octave
/// `r in ((|s|/hi)^{1/alpha}, (|s|/lo)^{1/alpha})` cut by the time window.
pub fn integrated_kernel_value(
    machine: &KernelMachine,
    kind: KernelKind,
    tau: f64,
    s: f64,
    y: f64,
    w: f64,
) -> f64 {
    let p = &machine.params;
    let (t_lo, t_hi) = machine.psi.time_window();
    if s.signum() != t_lo.signum() || s == 0.0 {
        return 0.0;
    }
    let (a_lo, a_hi) = (t_lo.abs().min(t_hi.abs()), t_lo.abs().max(t_hi.abs()));
    let r_lo = (s.abs() / a_hi).powf(1.0 / p.alpha);
    let r_hi = (s.abs() / a_lo).powf(1.0 / p.alpha).min(tau);
    if r_hi <= r_lo {
        return 0.0;
    }
    let rule = Rule1d::log_gauss(r_lo, r_hi, 6, 5);
    let mut acc = 0.0;
    for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
        let val = match kind {
            KernelKind::BesselG => machine.eval_bessel_g(r, s, y, w),
            KernelKind::BesselGv => machine.eval_bessel_gv(r, s, y, w),
            _ => compact_eval(machine, kind, r, s, y, w),
        };
        acc += wr * val;
    }
    acc
}

/// Weighted samples `(|value|, cell volume)` of the integrated kernel
/// `int_0^tau kernel_r dr` over a sign-symmetric logarithmic lattice
/// resolving `octaves_down` dyadic scales below `tau`.
///
/// The `r`-integral runs over a global logarithmic lattice; for each
/// `r`-node and each active `(s, y)` cell, the kernel's velocity profile is
/// transformed once (spectral line with algebraic tail) and shared by every
/// `w` cell of that slice.
pub fn integrated_kernel_samples(
    machine: &KernelMachine,
    kind: KernelKind,
    tau: f64,
    octaves_down: usize,
    per_octave: usize,
) -> Vec<(f64, f64)> {
    let p = &machine.params;
    let tailed = matches!(kind, KernelKind::BesselG | KernelKind::BesselGv);
    let s_hi = 2.05 * tau.powf(p.alpha);
    let s_lo = s_hi * (0.5f64).powf(octaves_down as f64 * p.alpha);
    let y_hi = 1.05 * machine.ybar_radius * tau.powf(p.beta);
    let y_lo = y_hi * (0.5f64).powf(octaves_down as f64 * p.beta);
    let w_scale = tau.powf(p.beta - p.alpha);
    let w_hi = if tailed || kind == KernelKind::Q {
        256.0 * machine.eta_radius * w_scale
    } else {
        1.05 * machine.eta_radius * w_scale
    };
    let w_lo = w_hi * (0.5f64).powf(octaves_down as f64 * (p.beta - p.alpha) + 8.0);

    let time_sign = machine.psi.time_window().0.signum();
    let s_cells = log_cells(s_lo, s_hi, per_octave);
    let y_cells = signed_cells(&log_cells(y_lo, y_hi, per_octave));
    let w_cells = signed_cells(&log_cells(w_lo, w_hi, per_octave));

    let mut field = vec![0.0f64; s_cells.len() * y_cells.len() * w_cells.len()];

    let (t_lo, t_hi) = machine.psi.time_window();
    let (a_lo, a_hi) = (t_lo.abs().min(t_hi.abs()), t_lo.abs().max(t_hi.abs()));
    let octs = octaves_down as f64 + 2.0;
    let r_rule = Rule1d::log_gauss(
        tau * (0.5f64).powf(octs),
        tau,
        (2.0 * octs).ceil() as usize,
        4,
    );
    let q = machine.capital_q();

    for (&r, &wr) in r_rule.nodes.iter().zip(&r_rule.weights) {
        let ra = r.powf(p.alpha);
        let rb = r.powf(p.beta);
        let rba = r.powf(p.beta - p.alpha);
        let (s_win_lo, s_win_hi) = (a_lo * ra, a_hi * ra);
        for (is, &(s_mag, _)) in s_cells.iter().enumerate() {
            if s_mag < s_win_lo || s_mag > s_win_hi {
                continue;
            }
            let s = time_sign * s_mag;
            let lambda = s / ra;
            for (iy, &(y, _)) in y_cells.iter().enumerate() {
                let ybar = y / rb;
                if ybar.abs() > machine.ybar_radius {
                    continue;
                }
                if tailed {
                    let (value_line, pref): (TailedLine, f64) = match kind {
                        KernelKind::BesselG => (
                            machine.d_phi_line(r, lambda, ybar, 256.0, 4096),
                            -p.alpha
                                * machine.inv_abs_frak_c()
                                * r.powf(p.alpha - 1.0 - q - p.sigma * (p.beta - p.alpha))
                                * lambda,
                        ),
                        KernelKind::BesselGv => (
                            machine.i_psi_line(r, lambda, ybar, 256.0, 4096),
                            r.powf(-1.0 - q + p.sigma * (p.beta - p.alpha)),
                        ),
                        _ => unreachable!(),
                    };
                    for (iw, &(w, _)) in w_cells.iter().enumerate() {
                        let eta = w / rba;
                        if eta.abs() > 4096.0 {
                            continue;
                        }
                        field[(is * y_cells.len() + iy) * w_cells.len() + iw] +=
                            wr * pref * value_line.eval(eta);
                    }
                } else {
                    for (iw, &(w, _)) in w_cells.iter().enumerate() {
                        if (w / rba).abs() > machine.eta_radius * 512.0 {
                            continue;
                        }
                        field[(is * y_cells.len() + iy) * w_cells.len() + iw] +=
                            wr * compact_eval(machine, kind, r, s, y, w);
                    }
                }
            }
        }
    }

    let mut out = Vec::with_capacity(field.len());
    for (is, &(_, ds)) in s_cells.iter().enumerate() {
        for (iy, &(_, dy)) in y_cells.iter().enumerate() {
            for (iw, &(_, dw)) in w_cells.iter().enumerate() {
                let v = field[(is * y_cells.len() + iy) * w_cells.len() + iw];
                out.push((v.abs(), ds * dy * dw));
            }
        }
    }
    out
}

fn signed_cells(cells: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * cells.len());
    for &(c, d) in cells {
        out.push((c, d));
        out.push((-c, d));
    }
    out
}

fn log_cells(lo: f64, hi: f64, per_octave: usize) -> Vec<(f64, f64)> {
    let octaves = (hi / lo).log2();
    let n = (octaves * per_octave as f64).ceil() as usize;
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut cells = Vec::with_capacity(n);
    let mut left = lo;
    for _ in 0..n {
        let right = left * ratio;
        cells.push(((left * right).sqrt(), right - left));
        left = right;
    }
    cells
}

/// Weak `L^theta` quasinorm `sup_t t |{|F| > t}|^{1/theta}` from weighted
/// samples `(|value|, volume)`.
pub fn weak_quasinorm_from_samples(samples: &[(f64, f64)], theta: f64) -> Result<f64> {
    let mut vals: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(v, _)| v > 0.0)
        .cloned()
        .collect();
    if vals.len() < 10 {
        return Err(Error::InsufficientData(
            "weak norm needs at least 10 positive samples".into(),
        ));
    }
    vals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut volume = 0.0;
    let mut best = 0.0f64;
    for &(v, cell) in &vals {
        volume += cell;
        best = best.max(v * volume.powf(1.0 / theta));
    }
    Ok(best)
}

/// Uniformity report for the C^0/C^1 norms of the rescaled profiles and the
/// zero average of `Psi`.
#[derive(Debug, Clone)]
pub struct ProfileReport {
    pub phi_c1_max: f64,
    pub phi_c1_min: f64,
    pub psi_c1_max: f64,
    pub psi_c1_min: f64,
    pub psi_mean_residual: f64,
    pub script_det_residual: f64,
}

/// Check profile uniformity over a dyadic `r`-grid at fixed `(lambda, ybar)`.
pub fn rescaled_profile_report(
    machine: &KernelMachine,
    lambda: f64,
    ybar: f64,
    r_grid: &[f64],
) -> Result<ProfileReport> {
    let (lo, hi) = machine.psi.time_window();
    if lambda <= lo || lambda >= hi {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} outside the time window ({lo}, {hi})"
        )));
    }
    let rad = machine.eta_radius + 0.5;
    let n = 400;
    let step = 2.0 * rad / n as f64;
    let (mut phi_max, mut phi_min) = (0.0f64, f64::INFINITY);
    let (mut psi_max, mut psi_min) = (0.0f64, f64::INFINITY);
    let mut mean_resid = 0.0f64;
    let mean_rule = Rule1d::composite_gauss(-rad, rad, 150, 16);
    for &r in r_grid {
        let mut phi_c1 = 0.0f64;
        let mut psi_c1 = 0.0f64;
        let mut psi_sup = 0.0f64;
        for i in 0..=n {
            let eta = -rad + step * i as f64;
            let phi = machine.profile_phi(r, lambda, ybar, eta);
            let psi = machine.profile_psi(r, lambda, ybar, eta);
            let dphi = (machine.profile_phi(r, lambda, ybar, eta + 1e-5) - phi) / 1e-5;
            let dpsi = (machine.profile_psi(r, lambda, ybar, eta + 1e-5) - psi) / 1e-5;
            phi_c1 = phi_c1.max(phi.abs() + dphi.abs());
            psi_c1 = psi_c1.max(psi.abs() + dpsi.abs());
            psi_sup = psi_sup.max(psi.abs());
        }
        let psi_mean: f64 = mean_rule
            .nodes
            .iter()
            .zip(&mean_rule.weights)
            .map(|(&eta, &w)| w * machine.profile_psi(r, lambda, ybar, eta))
            .sum();
        phi_max = phi_max.max(phi_c1);
        phi_min = phi_min.min(phi_c1);
        psi_max = psi_max.max(psi_c1);
        psi_min = psi_min.min(psi_c1);
        if psi_sup > 0.0 {
            mean_resid = mean_resid.max(psi_mean.abs() / (psi_sup * 2.0 * rad));
        }
    }
    // per-block determinant of the script factor across angles
    let mut det_resid = 0.0f64;
    for k in 0..20 {
        let theta = -9.0 + k as f64;
        let det = a_script(machine.params.alpha, machine.params.beta, lambda, theta).det();
        det_resid = det_resid.max((det + 1.0 / machine.params.alpha).abs() * machine.params.alpha);
    }
    Ok(ProfileReport {
        phi_c1_max: phi_max,
        phi_c1_min: phi_min,
        psi_c1_max: psi_max,
        psi_c1_min: psi_min,
        psi_mean_residual: mean_resid,
        script_det_residual: det_resid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::dyadic_grid;

    fn machine() -> KernelMachine {
        KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn window_rejects_bad_beta() {
        assert!(KernelParams::new(1.0, 3.0, 0.5).is_err());
        assert!(KernelParams::new(1.0, 2.9, 0.5).is_ok());
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let psi = Mollifier::standard();
        let rl = Rule1d::composite_gauss(-2.0, -1.0, 32, 12);
        let ru = Rule1d::composite_gauss(-1.0, 1.0, 32, 12);
        let mut acc = 0.0;
        for (&l, &wl) in rl.nodes.iter().zip(&rl.weights) {
            for (&u1, &w1) in ru.nodes.iter().zip(&ru.weights) {
                for (&u2, &w2) in ru.nodes.iter().zip(&ru.weights) {
                    acc += wl * w1 * w2 * psi.eval(l, u1, u2);
                }
            }
        }
        assert!((acc - 1.0).abs() < 1e-8, "mass = {acc}");
    }

    #[test]
    fn kernel_vanishes_outside_support() {
        let m = machine();
        assert_eq!(m.eval_k(1.0, 0.5, 0.0, 0.0), 0.0);
        assert_eq!(m.eval_k(1.0, -3.5, 0.0, 0.0), 0.0);
        assert_eq!(m.eval_k(1.0, -1.5, 0.0, 50.0), 0.0);
        assert_eq!(m.eval_l(1.0, -1.5, 0.0, 50.0), 0.0);
    }

    #[test]
    fn mollifier_k_integrates_to_one() {
        let m = machine();
        for &tau in &[0.5, 1.0, 2.0] {
            let val = integral_k(&m, tau);
            assert!((val - 1.0).abs() < 1e-3, "tau={tau}: mass {val}");
        }
    }

    fn integral_k(m: &KernelMachine, tau: f64) -> f64 {
        let ((s_lo, s_hi), y_rad, _) = m.support_box(tau);
        let rs = Rule1d::gauss(s_lo, s_hi, 32);
        let ry = Rule1d::gauss(-y_rad, y_rad, 48);
        let rba = tau.powf(m.params.beta - m.params.alpha);
        let mut acc = 0.0;
        for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
            for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
                let (lambda, ybar, _) = m.rescaled(tau, s, y, 0.0);
                let Some((lo, hi)) = m.eta_support(tau, lambda, ybar) else {
                    continue;
                };
                let rw = Rule1d::gauss(lo * rba, hi * rba, 48);
                for (&w, &ww) in rw.nodes.iter().zip(&rw.weights) {
                    acc += ws * wy * ww * m.eval_k(tau, s, y, w);
                }
            }
        }
        acc
    }

    #[test]
    fn l_kernel_has_zero_velocity_average() {
        let m = machine();
        let r = 1.3;
        let ((s_lo, s_hi), y_rad, _) = m.support_box(r);
        let rba = r.powf(m.params.beta - m.params.alpha);
        for &(sf, yf) in &[(0.3, 0.2), (0.6, -0.5), (0.85, 0.7)] {
            let s = s_lo + sf * (s_hi - s_lo);
            let y = yf * y_rad;
            let (lambda, ybar, _) = m.rescaled(r, s, y, 0.0);
            let Some((lo, hi)) = m.eta_support(r, lambda, ybar) else {
                continue;
            };
            let rw = Rule1d::gauss(lo * rba, hi * rba, 96);
            let total: f64 = rw
                .nodes
                .iter()
                .zip(&rw.weights)
                .map(|(&w, &ww)| ww * m.eval_l(r, s, y, w))
                .sum();
            let sup = rw
                .nodes
                .iter()
                .map(|&w| m.eval_l(r, s, y, w).abs())
                .fold(0.0f64, f64::max);
            let width = (hi - lo) * rba;
            assert!(
                total.abs() <= 1e-8 * sup.max(1e-300) * width,
                "s={s} y={y}: integral {total}, sup {sup}"
            );
        }
    }

    #[test]
    fn l_matches_finite_difference_of_theta() {
        let m = machine();
        let (r, s, y) = (0.8, -1.1, 0.3);
        for &w in &[-0.4, 0.0, 0.55] {
            let h = 1e-6;
            let fd = (m.eval_theta(r, s, y, w + h) - m.eval_theta(r, s, y, w - h)) / (2.0 * h);
            let an = m.eval_l(r, s, y, w);
            assert!(
                (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                "w={w}: {fd} vs {an}"
            );
        }
    }

    #[test]
    fn psi_profile_stays_bounded_across_scales() {
        let m = machine();
        for &r in &[0.25, 1.0, 4.0] {
            let v = m.profile_psi(r, -1.5, 0.2, 0.4);
            assert!(v.is_finite());
            assert!(v.abs() < 50.0, "r={r}: profile {v}");
        }
    }

    #[test]
    fn k_norm_slopes_match_lemma() {
        let m = machine();
        let grid = dyadic_grid(1.0, -3, 3);
        for &(theta, expect) in &[(1.0, 0.0), (2.0, -2.0), (f64::INFINITY, -4.0)] {
            let sweep = kernel_norm_scaling(&m, KernelKind::KTau, theta, &grid).unwrap();
            assert!(
                (sweep.fit.slope - expect).abs() <= 0.05,
                "theta={theta}: slope {} vs {expect}",
                sweep.fit.slope
            );
            assert!((sweep.expected_slope - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn l_sup_norm_slope() {
        let m = machine();
        let grid = dyadic_grid(1.0, -3, 3);
        let sweep = kernel_norm_scaling(&m, KernelKind::L, f64::INFINITY, &grid).unwrap();
        // -1 - Q = -5 at (alpha, beta) = (1, 2)
        assert!(
            (sweep.fit.slope - -5.0).abs() <= 0.05,
            "slope {}",
            sweep.fit.slope
        );
    }

    #[test]
    fn weak_quasinorm_of_power_law() {
        // F(x) = |x|^{-1/2} on [-1, 1]: |{F > t}| = 2 t^{-2} for t >= 1, so
        // the weak-L^2 quasinorm is sqrt(2).
        let cells = log_cells(1e-9, 1.0, 64);
        let samples: Vec<(f64, f64)> = cells
            .iter()
            .flat_map(|&(x, dx)| {
                let v = x.powf(-0.5);
                [(v, dx), (v, dx)]
            })
            .collect();
        let wn = weak_quasinorm_from_samples(&samples, 2.0).unwrap();
        assert!(
            (wn - (2.0f64).sqrt()).abs() < 0.02 * (2.0f64).sqrt(),
            "wn={wn}"
        );
    }

    #[test]
    fn weak_quasinorm_of_indicator() {
        let samples = vec![(1.0, 0.5); 4];
        assert!(weak_quasinorm_from_samples(&samples[..], 2.0).is_err());
        let samples = vec![(1.0, 0.2); 10];
        let wn = weak_quasinorm_from_samples(&samples, 2.0).unwrap();
        assert!((wn - (2.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rescaled_profiles_uniform_over_dyadic_r() {
        let m = machine();
        let grid = dyadic_grid(1.0, -6, 6);
        let rep = rescaled_profile_report(&m, -1.5, 0.25, &grid).unwrap();
        assert!(rep.phi_c1_max / rep.phi_c1_min <= 10.0, "{rep:?}");
        assert!(rep.psi_c1_max / rep.psi_c1_min <= 10.0, "{rep:?}");
        assert!(rep.psi_mean_residual <= 1e-8, "{rep:?}");
        assert!(rep.script_det_residual <= 1e-12, "{rep:?}");
    }
}
