//! Suite orchestration: configuration parsing, dispatch to the owning
//! modules, and report/CSV assembly for the CLI.

use crate::critical::{self, SyntheticFamily};
use crate::exponents::{self, rat, to_f64, ExponentContext};
use crate::fourier1d;
use crate::fracops::{self, DecayFamily};
use crate::geometry::{self, PhasePoint};
use crate::grid::{Axis, GridFunction};
use crate::kernels::{
    self, integrated_kernel_samples, kernel_norm, kernel_norm_scaling_multi, KernelKind,
    KernelMachine, KernelParams,
};
use crate::oracle::{oracle_lq_norm, KolmogorovOracle};
use crate::quad::{dyadic_grid, log_uniform, EtaNodes, Rule1d};
use crate::report::{fit_slope, CheckRecord, Report};
use crate::representation::{
    self, dsf_grid_for_pair, gn_ratio, manufacture_with, representation_residual, Model,
};
use crate::{Error, Result};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// A suite run configuration: the suite name plus string-typed parameters
/// ("num/den" rationals or decimals), merged from a JSON config file and CLI
/// flag overrides.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: String,
    pub params: BTreeMap<String, String>,
}

impl SuiteConfig {
    pub fn new(suite: &str) -> Self {
        SuiteConfig {
            suite: suite.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn from_json(suite: &str, json: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        let map = value
            .as_object()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let mut params = BTreeMap::new();
        for (k, v) in map {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            params.insert(k.clone(), s);
        }
        Ok(SuiteConfig {
            suite: suite.to_string(),
            params,
        })
    }

    pub fn rational(&self, key: &str, default: (i64, i64)) -> Result<BigRational> {
        match self.params.get(key) {
            None => Ok(rat(default.0, default.1)),
            Some(s) => exponents::parse_rational(s),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => {
                if s.contains('/') {
                    Ok(to_f64(&exponents::parse_rational(s)?))
                } else {
                    s.parse()
                        .map_err(|_| Error::Config(format!("bad float for {key}: {s:?}")))
                }
            }
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("bad integer for {key}: {s:?}"))),
        }
    }

    pub fn str(&self, key: &str, default: &str) -> String {
        self.params
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }

    fn stamp(&self) -> BTreeMap<String, String> {
        self.params.clone()
    }
}

/// A named CSV table emitted next to the JSON report.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Everything a suite run produces.
pub struct SuiteOutput {
    pub report: Report,
    pub tables: Vec<CsvTable>,
    /// Extra JSON payload (e.g. the exact exponent table).
    pub extra: Option<serde_json::Value>,
}

/// Dispatch a configured suite.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    match config.suite.as_str() {
        "exponents" => exponents_suite(config),
        "trajectory" | "trajectory-check" => trajectory_suite(config),
        "fracops" => fracops_suite(config),
        "decay" | "decay-check" => decay_suite(config),
        "kernels" | "kernel-bounds" => kernels_suite(config),
        "representation" => representation_suite(config),
        "gn" | "gn-check" => gn_suite(config),
        "oracle" | "oracle-kolmogorov" => oracle_suite(config),
        "critical" | "critical-integration" => critical_suite(config),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

fn bool_check(name: &str, ok: bool) -> CheckRecord {
    CheckRecord::abs(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
}

// ---------------------------------------------------------------- exponents

fn exponents_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let d = config.u64("d", 1)? as u32;
    let sigma = config.rational("sigma", (1, 2))?;
    let p = config.rational("p", (2, 1))?;
    let sweep = config.u64("sweep", 50)?;
    let ctx = ExponentContext::new(d, sigma.clone(), p.clone())?;
    let der = exponents::balance_exponents(&ctx)?;
    let mut checks = Vec::new();

    checks.push(bool_check(
        "a_exp + b_exp = 1 (exact)",
        &der.a_exp + &der.b_exp == rat(1, 1),
    ));
    checks.push(bool_check(
        "gamma = a_exp + (p-1) b_exp (exact)",
        der.gamma == &der.a_exp + (&p - rat(1, 1)) * &der.b_exp,
    ));
    checks.push(bool_check(
        "exponent relations at rho (exact)",
        exponents::exponent_relations_hold(&ctx)?,
    ));
    checks.push(bool_check(
        "theta Young relations (exact)",
        exponents::theta_relations_hold(&ctx, &rat(1, 1))?,
    ));

    // rational sweep across the open admissible range
    let (lo, hi) = exponents::admissible_p_range(d, &sigma)?;
    let mut violations = 0u64;
    for k in 1..=sweep as i64 {
        let pk = &lo + (&hi - &lo) * rat(k, sweep as i64 + 1);
        let c = ExponentContext::new(d, sigma.clone(), pk.clone())?;
        let dk = exponents::balance_exponents(&c)?;
        let ok = exponents::exponent_relations_hold(&c)?
            && exponents::theta_relations_hold(&c, &rat(1, 1))?
            && &dk.a_exp + &dk.b_exp == rat(1, 1)
            && dk.gamma == &dk.a_exp + (&pk - rat(1, 1)) * &dk.b_exp
            && exponents::gain_exponent_q(&c)? > pk.clone()
            && exponents::gain_exponent_q(&c)? > c.p_conj.clone();
        if !ok {
            violations += 1;
        }
    }
    checks.push(CheckRecord::bound(
        &format!("sweep violations over {sweep} rational points"),
        violations as f64,
        0.0,
    ));

    // reference values at (1, 1/2, 2)
    if d == 1 && sigma == rat(1, 2) && p == rat(2, 1) {
        checks.push(bool_check("q = 8/3 (exact)", der.q == rat(8, 3)));
        checks.push(bool_check("rho = 2 (exact)", der.rho == rat(2, 1)));
        checks.push(bool_check("a_exp = 3/4 (exact)", der.a_exp == rat(3, 4)));
        checks.push(bool_check("b_exp = 1/4 (exact)", der.b_exp == rat(1, 4)));
        checks.push(bool_check("gamma = 1 (exact)", der.gamma == rat(1, 1)));
        checks.push(bool_check(
            "p range = (12/7, 4) (exact)",
            der.p_lo == rat(12, 7) && der.p_hi == rat(4, 1),
        ));
    }

    let alpha = config.params.get("alpha").cloned();
    let beta = config.params.get("beta").cloned();
    let dilation = match (&alpha, &beta) {
        (Some(a), Some(b)) => Some((
            exponents::parse_rational(a)?,
            exponents::parse_rational(b)?,
        )),
        _ => None,
    };
    let table = exponents::exponent_table(
        &ctx,
        dilation.as_ref().map(|(a, b)| (a, b)),
    )?;
    let extra = serde_json::to_value(&table).ok();

    let rows: Vec<Vec<f64>> = vec![vec![
        to_f64(&der.q),
        to_f64(&der.rho),
        to_f64(&der.a_exp),
        to_f64(&der.b_exp),
        to_f64(&der.gamma),
    ]];
    Ok(SuiteOutput {
        report: Report::new("exponents", config.stamp(), checks),
        tables: vec![CsvTable {
            name: "exponents".into(),
            header: vec![
                "q".into(),
                "rho".into(),
                "a_exp".into(),
                "b_exp".into(),
                "gamma".into(),
            ],
            rows,
        }],
        extra,
    })
}

// --------------------------------------------------------------- trajectory

fn trajectory_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let alpha = config.f64("alpha", 1.0)?;
    let beta = config.f64("beta", 2.0)?;
    let d = config.u64("d", 1)? as u32;
    let seed = config.u64("seed", 7)?;
    let draws = config.u64("draws", 20)? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_grid = log_uniform(2f64.powi(-6), 2f64.powi(6), 97);
    let rep = crate::traj::check_m_properties(alpha, beta, d, &r_grid, &mut rng, draws)?;

    let mut checks = vec![
        CheckRecord::bound("(M1) time-rate residual", rep.m1_time_residual, 1e-6),
        CheckRecord::bound("(M1) transport residual", rep.m1_transport_residual, 1e-6),
        CheckRecord::bound("(M2) determinant residual", rep.m2_det_residual, 1e-10),
        CheckRecord::bound("(M2) m0-invariance of det", rep.m2_m0_invariance, 1e-12),
        CheckRecord::abs("(M3) column-1 slope", rep.m3_col1_slope, -beta, 0.05),
        CheckRecord::abs("(M3) column-2 slope", rep.m3_col2_slope, alpha - beta, 0.05),
        CheckRecord::abs("(M4) rate slope", rep.m4_rate_slope, beta - alpha - 1.0, 0.05),
        CheckRecord::abs(
            "(M4) velocity-deviation slope",
            rep.m4_vdev_slope,
            beta - alpha,
            0.05,
        ),
        CheckRecord::abs("(M4) position-deviation slope", rep.m4_xdev_slope, beta, 0.05),
        CheckRecord::bound("(M4) finite-difference residual", rep.m4_fd_residual, 1e-6),
    ];

    // rescaled-profile uniformity at a fixed slice
    let machine = KernelMachine::new(KernelParams::new(alpha, beta, 0.5)?)?;
    let grid = dyadic_grid(1.0, -6, 6);
    let prof = kernels::rescaled_profile_report(&machine, -1.5, 0.25, &grid)?;
    checks.push(CheckRecord::bound(
        "profile Phi C1 max/min over dyadic r",
        prof.phi_c1_max / prof.phi_c1_min,
        10.0,
    ));
    checks.push(CheckRecord::bound(
        "profile Psi C1 max/min over dyadic r",
        prof.psi_c1_max / prof.psi_c1_min,
        10.0,
    ));
    checks.push(CheckRecord::bound(
        "profile Psi zero-average residual",
        prof.psi_mean_residual,
        1e-8,
    ));
    checks.push(CheckRecord::bound(
        "script-matrix block determinant residual",
        prof.script_det_residual,
        1e-12,
    ));

    Ok(SuiteOutput {
        report: Report::new("trajectory", config.stamp(), checks),
        tables: vec![],
        extra: None,
    })
}

// ------------------------------------------------------------------ fracops

fn fracops_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let sigma = config.f64("sigma", 0.5)?;
    let p = config.f64("p", 3.0)?;
    let seed = config.u64("seed", 11)?;
    let n_grid = config.u64("vgrid", 256)? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // c_gag by quadrature; 2 pi reference at sigma = 1/2
    let constants = fracops::FracConstants::compute(sigma)?;
    if (sigma - 0.5).abs() < 1e-12 {
        checks.push(CheckRecord::rel(
            "c_gag(1, 1/2) = 2 pi",
            constants.c_gag,
            2.0 * std::f64::consts::PI,
            0.01,
        ));
    }

    // adjoint duality on random smooth pairs
    let eta = EtaNodes::log(1e-6, 1e3, 6);
    let mut worst_duality = 0.0f64;
    for _ in 0..3 {
        let a0 = rng.random_range(0.8..1.6);
        let b0 = rng.random_range(0.4..1.1);
        let c0 = rng.random_range(0.5..1.5);
        let phi = move |v: f64| (-v * v / (a0 * a0)).exp();
        let field = move |v: f64, h: f64| {
            (b0 * v).sin() * (-v * v / 2.0).exp() * (-h * h / (9.0 * c0 * c0)).exp()
        };
        let vq = Rule1d::composite_gauss(-10.0, 10.0, 40, 6);
        // <phi, D* F>
        let lhs = vq.integrate(|v| phi(v) * fracops::adjoint_div_fn(&field, sigma, &eta, v));
        // -<D phi, F>_{d eta}
        let mut rhs = 0.0;
        for (&h, &wh) in eta.h.iter().zip(&eta.w) {
            rhs -= wh
                * vq.integrate(|v| {
                    (phi(v + h) - phi(v)) / h.abs().powf(sigma) * field(v, h)
                });
        }
        let scale = lhs.abs().max(rhs.abs()).max(1e-12);
        worst_duality = worst_duality.max((lhs - rhs).abs() / scale);
    }
    checks.push(CheckRecord::bound(
        "adjoint duality residual",
        worst_duality,
        1e-3,
    ));

    // Plancherel at p = 2 on a Gaussian: |D^s f|^2_{eta} = c_gag |D^s f|^2_{L2}
    let gauss = |v: f64| (-v * v).exp();
    let vq = Rule1d::composite_gauss(-9.0, 9.0, 48, 6);
    let eta_wide = EtaNodes::log(1e-7, 1e7, 6);
    let mut left = 0.0;
    for (&h, &wh) in eta_wide.h.iter().zip(&eta_wide.w) {
        left += wh
            * vq.integrate(|v| {
                let d = (gauss(v + h) - gauss(v)) / h.abs().powf(sigma);
                d * d
            });
    }
    let axis = Axis::new(-16.0, 16.0, n_grid.max(64));
    let gauss_grid = GridFunction::sample_v_line(axis.clone(), gauss);
    let dsg = fracops::bessel_derivative(&gauss_grid, sigma)?;
    let right = constants.c_gag * dsg.norm_lq(2.0).powi(2);
    checks.push(CheckRecord::rel(
        "Plancherel increment vs multiplier energy",
        left,
        right,
        0.01,
    ));

    // weak form vs principal value for the fractional p-Laplacian
    let pv_axis = Axis::new(-3.0, 3.0, 61);
    let pv = fracops::pv_fractional_p_laplacian(&gauss, &pv_axis, sigma, p, 0.0)?;
    let test_bump = |v: f64| crate::special::bump(v / 2.5);
    let weak_lhs: f64 = {
        // <Lf, phi> = 1/2 int int |Df|^{p-2} Df Dphi d eta dv
        let mut acc = 0.0;
        for (&h, &wh) in eta_wide.h.iter().zip(&eta_wide.w) {
            acc += wh
                * vq.integrate(|v| {
                    let df = (gauss(v + h) - gauss(v)) / h.abs().powf(sigma);
                    let dphi = (test_bump(v + h) - test_bump(v)) / h.abs().powf(sigma);
                    df.abs().powf(p - 2.0) * df * dphi
                });
        }
        0.5 * acc
    };
    let pv_pairing: f64 = (0..pv_axis.n)
        .map(|i| pv_axis.weight(i) * pv.at(0, 0, i) * test_bump(pv_axis.node(i)))
        .sum();
    checks.push(CheckRecord::rel(
        "weak vs principal-value p-Laplacian",
        pv_pairing,
        weak_lhs,
        0.01,
    ));

    // p = 2 cross-check: PV p-Laplacian equals (c_gag/2)(-Delta)^sigma
    let pv2 = fracops::pv_fractional_p_laplacian(&gauss, &pv_axis, sigma, 2.0, 0.0)?;
    let spectral = {
        let wide = GridFunction::sample_v_line(Axis::new(-24.0, 24.0, 1024), gauss);
        let mut s = wide.clone();
        s = fracops::bessel_derivative(&s, sigma)?;
        fracops::bessel_derivative(&s, sigma)?
    };
    let mut worst_p2 = 0.0f64;
    let scale = pv2.norm_sup();
    for i in 0..pv_axis.n {
        let v = pv_axis.node(i);
        let expect = 0.5 * constants.c_gag * spectral.eval(0.0, 0.0, v)?;
        worst_p2 = worst_p2.max((pv2.at(0, 0, i) - expect).abs() / scale);
    }
    checks.push(CheckRecord::bound(
        "p=2 PV form vs (c_gag/2)(-Delta)^sigma",
        worst_p2,
        0.01,
    ));

    // multiplier inverse identities
    let odd = GridFunction::sample_v_line(Axis::new(-16.0, 16.0, 512), |v| v * (-v * v).exp());
    let dsf = fracops::bessel_derivative(&odd, sigma)?;
    let back = fracops::riesz_potential(&dsf, sigma)?;
    let mut worst_inv = 0.0f64;
    for i in 0..odd.v.n {
        worst_inv = worst_inv.max((back.at(0, 0, i) - odd.at(0, 0, i)).abs());
    }
    checks.push(CheckRecord::bound(
        "I^sigma D^sigma = identity (mean-zero data)",
        worst_inv / odd.norm_sup(),
        1e-8,
    ));

    // antidivergence identity: -D^{sigma,*} R V = div V
    let v_axis = Axis::new(-40.0, 40.0, 2048);
    let vfield = GridFunction::sample_v_line(v_axis.clone(), |v| (-v * v).exp());
    let eta_anti = EtaNodes::log(1e-5, 1e4, 6);
    let rv = fracops::frac_antidivergence(&vfield, sigma, &eta_anti, &constants)?;
    let div = {
        let mut d = vfield.clone();
        let period = v_axis.step() * v_axis.n as f64;
        let mut line: Vec<f64> = d.values.clone();
        fourier1d::fft_odd_multiplier_line(&mut line, period, &|xi| xi)?;
        d.values = line;
        d
    };
    let adj = fracops::gagliardo_adjoint_div(&rv, sigma);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..v_axis.n {
        let v = v_axis.node(i);
        if v.abs() > 5.0 {
            continue;
        }
        let lhs = -adj.at(0, 0, i);
        let rhs = div.at(0, 0, i);
        num += (lhs - rhs) * (lhs - rhs);
        den += rhs * rhs;
    }
    checks.push(CheckRecord::bound(
        "-D^{sigma,*} R V = div V (relative L2)",
        (num / den).sqrt(),
        0.01,
    ));

    // two-regime pointwise increment bound on a smooth sample
    let sup_grad = 2.0f64 * (0.5f64).sqrt() * (-0.5f64).exp();
    let mut regime_violations = 0u32;
    for _ in 0..200 {
        let v = rng.random_range(-3.0..3.0);
        let h = (10.0f64).powf(rng.random_range(-4.0..3.0))
            * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let inc = (gauss(v + h) - gauss(v)).abs() / h.abs().powf(sigma);
        let bound = if h.abs() <= 1.0 {
            sup_grad * h.abs().powf(1.0 - sigma)
        } else {
            2.0 * h.abs().powf(-sigma)
        };
        if inc > bound * (1.0 + 1e-10) {
            regime_violations += 1;
        }
    }
    checks.push(CheckRecord::bound(
        "two-regime increment bound violations",
        regime_violations as f64,
        0.0,
    ));

    // Appendix decay slopes
    let radii = log_uniform(8.0, 128.0, 17);
    for family in [DecayFamily::Bessel, DecayFamily::Riesz, DecayFamily::PotentialDiv] {
        let sample_sets = fracops::decay_family_samples(family, sigma, &radii)?;
        let expected = family.expected_slopes(sigma);
        for (series, (samples, expect)) in sample_sets.iter().zip(expected.iter()).enumerate() {
            let fit = fracops::decay_slope(samples, (radii[0], radii[radii.len() - 1]))?;
            checks.push(CheckRecord::abs(
                &format!("{family:?} decay slope #{series}"),
                fit.slope,
                *expect,
                0.1,
            ));
        }
    }

    Ok(SuiteOutput {
        report: Report::new("fracops", config.stamp(), checks),
        tables: vec![],
        extra: None,
    })
}

// -------------------------------------------------------------------- decay

fn decay_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let sigma = config.f64("sigma", 0.5)?;
    let family = DecayFamily::parse(&config.str("family", "bessel"))?;
    let radii = log_uniform(8.0, 128.0, 17);
    let sample_sets = fracops::decay_family_samples(family, sigma, &radii)?;
    let expected = family.expected_slopes(sigma);
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    for (idx, (samples, expect)) in sample_sets.iter().zip(expected.iter()).enumerate() {
        let fit = fracops::decay_slope(samples, (radii[0], radii[radii.len() - 1]))?;
        checks.push(CheckRecord::abs(
            &format!("far-field slope #{idx}"),
            fit.slope,
            *expect,
            0.1,
        ));
        tables.push(CsvTable {
            name: format!("decay_{idx}"),
            header: vec!["radius".into(), "value".into(), "fitted_slope".into()],
            rows: samples
                .iter()
                .map(|&(r, v)| vec![r, v, fit.slope])
                .collect(),
        });
    }
    Ok(SuiteOutput {
        report: Report::new("decay", config.stamp(), checks),
        tables,
        extra: None,
    })
}

// ------------------------------------------------------------------ kernels

fn kernels_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let sigma = config.f64("sigma", 0.5)?;
    let alpha = config.f64("alpha", 1.0)?;
    let beta = config.f64("beta", 2.0)?;
    let machine = KernelMachine::new(KernelParams::new(alpha, beta, sigma)?)?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();

    // mollifier normalization across scales
    for &tau in &[0.5, 1.0, 2.0] {
        let mass = representation::mollify_kernel_route(
            &machine,
            tau,
            &|_, _, _| 1.0,
            &PhasePoint::d1(0.0, 0.0, 0.0),
            32,
        );
        checks.push(CheckRecord::abs(
            &format!("int K_tau = 1 at tau = {tau}"),
            mass,
            1.0,
            1e-3,
        ));
    }

    // L_r zero velocity average at probe slices
    let r = 1.3;
    let ((s_lo, s_hi), y_rad, _) = machine.support_box(r);
    let rba = r.powf(beta - alpha);
    let mut worst_l = 0.0f64;
    for &(sf, yf) in &[(0.25, 0.1), (0.5, -0.4), (0.75, 0.6)] {
        let s = s_lo + sf * (s_hi - s_lo);
        let y = yf * y_rad;
        let (lambda, ybar, _) = machine.rescaled(r, s, y, 0.0);
        if let Some((lo, hi)) = machine.eta_support(r, lambda, ybar) {
            let rule = Rule1d::gauss(lo * rba, hi * rba, 96);
            let total: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&w, &ww)| ww * machine.eval_l(r, s, y, w))
                .sum();
            let sup = rule
                .nodes
                .iter()
                .map(|&w| machine.eval_l(r, s, y, w).abs())
                .fold(1e-300f64, f64::max);
            worst_l = worst_l.max(total.abs() / (sup * (hi - lo) * rba));
        }
    }
    checks.push(CheckRecord::bound(
        "int_w L_r = 0 (relative)",
        worst_l,
        1e-8,
    ));

    // norm slopes for K, L, G, Gv
    let grid = dyadic_grid(1.0, -6, 6);
    let thetas = [1.0, 2.0, f64::INFINITY];
    for kind in [KernelKind::KTau, KernelKind::BesselG, KernelKind::BesselGv] {
        let sweeps = kernel_norm_scaling_multi(&machine, kind, &thetas, &grid)?;
        for (sweep, &theta) in sweeps.iter().zip(&thetas) {
            let label = if theta.is_infinite() {
                "inf".to_string()
            } else {
                format!("{theta}")
            };
            checks.push(CheckRecord::abs(
                &format!("{kind:?} L^{label} slope"),
                sweep.fit.slope,
                sweep.expected_slope,
                0.05,
            ));
            tables.push(CsvTable {
                name: format!("{kind:?}_L{label}").to_lowercase(),
                header: vec!["r".into(), "norm".into()],
                rows: sweep.pairs.iter().map(|&(r, n)| vec![r, n]).collect(),
            });
        }
    }
    let l_sweep = kernel_norm_scaling_multi(&machine, KernelKind::L, &[f64::INFINITY], &grid)?;
    checks.push(CheckRecord::abs(
        "L sup-norm slope (-1 - Q)",
        l_sweep[0].fit.slope,
        -1.0 - machine.capital_q(),
        0.05,
    ));

    // P/Q domination-kernel envelopes
    for kind in [KernelKind::P, KernelKind::Q] {
        let l1: Vec<f64> = grid
            .iter()
            .map(|&r| kernel_norm(&machine, kind, r, 1.0))
            .collect();
        let max = l1.iter().cloned().fold(f64::MIN, f64::max);
        let min = l1.iter().cloned().fold(f64::MAX, f64::min);
        checks.push(CheckRecord::bound(
            &format!("{kind:?} L1 uniformity (max/min)"),
            max / min,
            10.0,
        ));
        let sup_pairs: Vec<(f64, f64)> = grid
            .iter()
            .map(|&r| (r, kernel_norm(&machine, kind, r, f64::INFINITY)))
            .collect();
        let fit = fit_slope(&sup_pairs)?;
        checks.push(CheckRecord::abs(
            &format!("{kind:?} sup-norm slope (-Q)"),
            fit.slope,
            -machine.capital_q(),
            0.05,
        ));
    }

    // integrated kernels: weak-norm tau-uniformity at theta_1, theta_2
    let q_dim = machine.capital_q();
    let gap = sigma * (beta - alpha);
    let theta1 = q_dim / (q_dim - gap);
    let theta2 = q_dim / (q_dim - alpha + gap);
    for (kind, theta, label) in [
        (KernelKind::BesselGv, theta1, "theta1"),
        (KernelKind::BesselG, theta2, "theta2"),
    ] {
        let mut norms = Vec::new();
        for k in -3..=3 {
            let tau = (k as f64).exp2();
            let samples = integrated_kernel_samples(&machine, kind, tau, 11, 3);
            norms.push((tau, kernels::weak_quasinorm_from_samples(&samples, theta)?));
        }
        let max = norms.iter().map(|&(_, n)| n).fold(f64::MIN, f64::max);
        let min = norms.iter().map(|&(_, n)| n).fold(f64::MAX, f64::min);
        checks.push(CheckRecord::bound(
            &format!("integrated {kind:?} weak-L^{label} uniformity"),
            max / min,
            10.0,
        ));
        tables.push(CsvTable {
            name: format!("weak_{label}"),
            header: vec!["tau".into(), "weak_norm".into()],
            rows: norms.iter().map(|&(t, n)| vec![t, n]).collect(),
        });
    }

    Ok(SuiteOutput {
        report: Report::new("kernels", config.stamp(), checks),
        tables,
        extra: None,
    })
}

// ----------------------------------------------------------- representation

fn representation_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let sigma = config.f64("sigma", 0.5)?;
    let alpha = config.f64("alpha", 1.0)?;
    let beta = config.f64("beta", 2.0)?;
    let seed = config.u64("seed", 5)?;
    let n_points = config.u64("points", 10)? as usize;
    let model = Model::parse(&config.str("model", "bessel"))?;
    let taus: Vec<f64> = config
        .str("tau", "0.5,1")
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config("bad tau list".into()))?;

    let machine = KernelMachine::new(KernelParams::new(alpha, beta, sigma)?)?;
    let pair = match model {
        Model::Bessel => representation::manufacture_bessel(sigma)?,
        Model::Gagliardo => representation::manufacture_gagliardo(sigma)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = representation::sample_points(&pair, &mut rng, n_points);

    let dsf = match model {
        Model::Bessel => Some(dsf_grid_for_pair(
            &pair,
            Axis::new(-2.5, 1.5, 56),
            Axis::new(-4.0, 4.0, 72),
            Axis::new(-24.0, 24.0, 256),
        )?),
        Model::Gagliardo => None,
    };

    let tol = match model {
        Model::Bessel => 1e-2,
        Model::Gagliardo => 2e-2,
    };
    let mut checks = vec![CheckRecord::bound(
        "structural residual of the manufactured pair",
        pair.structural_residual,
        match model {
            Model::Bessel => 1e-4,
            Model::Gagliardo => 1e-3,
        },
    )];
    let mut tables = Vec::new();
    let mut reports = Vec::new();
    for &tau in &taus {
        let rep = representation_residual(&machine, &pair, dsf.as_ref(), tau, &points)?;
        checks.push(CheckRecord::bound(
            &format!("max relative residual at tau = {tau}"),
            rep.max_relative_residual,
            tol + 10.0 * rep.structural_residual,
        ));
        tables.push(CsvTable {
            name: format!("residuals_tau_{tau}"),
            header: vec![
                "t".into(),
                "x".into(),
                "v".into(),
                "left".into(),
                "right_source".into(),
                "right_velocity".into(),
                "relative_residual".into(),
            ],
            rows: rep
                .points
                .iter()
                .map(|p| {
                    vec![
                        p.t,
                        p.x,
                        p.v,
                        p.left,
                        p.right_source,
                        p.right_velocity,
                        p.relative_residual,
                    ]
                })
                .collect(),
        });
        reports.push(rep);
    }
    let extra = serde_json::to_value(&reports).ok();
    Ok(SuiteOutput {
        report: Report::new("representation", config.stamp(), checks),
        tables,
        extra,
    })
}

// ----------------------------------------------------------------------- gn

fn gn_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let sigma = config.f64("sigma", 0.5)?;
    let p = config.f64("p", 2.0)?;
    let family_size = config.u64("family-size", 5)? as usize;
    let seed = config.u64("seed", 17)?;
    let model = Model::parse(&config.str("model", "bessel"))?;
    if model != Model::Bessel {
        return Err(Error::InvalidParameter(
            "gn-check currently runs on the Bessel model".into(),
        ));
    }
    let d = 1u32;
    let ctx = ExponentContext::new(
        d,
        exponents::parse_rational(&format!("{}/{}", (sigma * 512.0) as i64, 512))?,
        exponents::parse_rational(&format!("{}/{}", (p * 512.0) as i64, 512))?,
    )?;
    let der = exponents::balance_exponents(&ctx)?;
    let (q, a_exp, b_exp) = (to_f64(&der.q), to_f64(&der.a_exp), to_f64(&der.b_exp));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut rows = Vec::new();

    let t_axis = Axis::new(-1.2, 2.8, 44);
    let x_axis = Axis::new(-12.0, 12.0, 72);
    let v_axis = Axis::new(-12.0, 12.0, 144);

    let mut base_ratio = None;
    let mut base_grids = None;
    for i in 0..family_size {
        let (tr, xr, vr) = if i == 0 {
            (0.75, 0.75, 1.0)
        } else {
            (
                rng.random_range(0.5..0.9),
                rng.random_range(0.5..0.9),
                rng.random_range(0.7..1.3),
            )
        };
        let pair = manufacture_with(Model::Bessel, sigma, tr, xr, vr)?;
        let f = GridFunction::sample(t_axis.clone(), x_axis.clone(), v_axis.clone(), |t, x, v| {
            pair.f(t, x, v)
        });
        let dsf = dsf_grid_for_pair(&pair, t_axis.clone(), x_axis.clone(), v_axis.clone())?;
        let source = GridFunction::sample(
            t_axis.clone(),
            x_axis.clone(),
            v_axis.clone(),
            |t, x, v| pair.bessel_source(t, x, v),
        );
        let ratio = gn_ratio(&f, &dsf, &source, q, p, a_exp, b_exp)?;
        checks.push(CheckRecord::bound(
            &format!("family member {i}: finite ratio"),
            if ratio.ratio.is_finite() && ratio.ratio > 0.0 {
                0.0
            } else {
                1.0
            },
            0.0,
        ));
        rows.push(vec![i as f64, ratio.lhs, ratio.rhs_velocity, ratio.rhs_source, ratio.ratio]);
        if i == 0 {
            base_ratio = Some(ratio.ratio);
            base_grids = Some((f, dsf, source));
        }
    }
    let base_ratio = base_ratio.expect("family is nonempty");
    let (f0, dsf0, s0) = base_grids.expect("family is nonempty");

    // nu-rescaling invariance
    for &nu in &[0.5, 2.0] {
        let (f_nu, s_nu) = geometry::nu_rescale_pair(&f0, &s0, nu)?;
        let (dsf_nu, _) = geometry::nu_rescale_pair(&dsf0, &s0, nu)?;
        let ratio = gn_ratio(&f_nu, &dsf_nu, &s_nu, q, p, a_exp, b_exp)?;
        checks.push(CheckRecord::rel(
            &format!("GN ratio invariance under nu = {nu}"),
            ratio.ratio,
            base_ratio,
            0.02,
        ));
    }

    // full anisotropic scaling f_lambda
    for &lambda in &[0.5, 2.0] {
        let f_l = geometry::scale_function(&f0, lambda, sigma, p)?;
        let mut dsf_l = geometry::scale_function(&dsf0, lambda, sigma, p)?;
        dsf_l.map_in_place(|u| lambda.powf(sigma) * u);
        let mut s_l = geometry::scale_function(&s0, lambda, sigma, p)?;
        s_l.map_in_place(|u| lambda.powf(sigma * p - sigma) * u);
        let ratio = gn_ratio(&f_l, &dsf_l, &s_l, q, p, a_exp, b_exp)?;
        checks.push(CheckRecord::rel(
            &format!("GN ratio invariance under lambda = {lambda}"),
            ratio.ratio,
            base_ratio,
            0.02,
        ));
    }

    // mollified-term suppression: |K_tau|_theta slope = Q(1/q - 1/p)
    let machine = KernelMachine::new(KernelParams::new(1.0, to_f64(&der.rho), sigma)?)?;
    let theta = 1.0 / (1.0 / q + 1.0 - 1.0 / p);
    let taus = dyadic_grid(1.0, -3, 3);
    let pairs: Vec<(f64, f64)> = taus
        .iter()
        .map(|&tau| (tau, kernel_norm(&machine, KernelKind::KTau, tau, theta)))
        .collect();
    let fit = fit_slope(&pairs)?;
    let expect = machine.capital_q() * (1.0 / q - 1.0 / p);
    checks.push(CheckRecord::abs(
        "T_{K_tau} suppression slope Q(1/q - 1/p)",
        fit.slope,
        expect,
        0.1,
    ));

    // Young inequality for the mollified term on a Gaussian
    let gauss = |t: f64, x: f64, v: f64| (-(t * t + x * x + v * v)).exp();
    let gauss_grid = GridFunction::sample(
        Axis::new(-4.0, 4.0, 24),
        Axis::new(-4.0, 4.0, 24),
        Axis::new(-4.0, 4.0, 24),
        gauss,
    );
    let norm_p = gauss_grid.norm_lq(p);
    let mut young_ok = true;
    for &tau in &[0.5, 1.0, 2.0] {
        let mut mollified = gauss_grid.clone();
        for it in 0..mollified.t.n {
            for ix in 0..mollified.x.n {
                for iv in 0..mollified.v.n {
                    let z = PhasePoint::d1(
                        mollified.t.node(it),
                        mollified.x.node(ix),
                        mollified.v.node(iv),
                    );
                    let idx = mollified.index(it, ix, iv);
                    mollified.values[idx] =
                        representation::mollify_trajectory_route(&machine, tau, &gauss, &z, 10)?;
                }
            }
        }
        let lhs = mollified.norm_lq(q);
        let bound = kernel_norm(&machine, KernelKind::KTau, tau, theta) * norm_p;
        if lhs > bound * 1.02 {
            young_ok = false;
        }
    }
    checks.push(bool_check("Young bound |T_K f|_q <= |K|_theta |f|_p", young_ok));

    Ok(SuiteOutput {
        report: Report::new("gn", config.stamp(), checks),
        tables: vec![CsvTable {
            name: "gn_family".into(),
            header: vec![
                "member".into(),
                "lhs".into(),
                "rhs_velocity".into(),
                "rhs_source".into(),
                "ratio".into(),
            ],
            rows,
        }],
        extra: None,
    })
}

// ------------------------------------------------------------------- oracle

fn oracle_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let sigma = config.f64("sigma", 0.5)?;
    let t_max = config.f64("tmax", 1.0)?;
    let damping = config.f64("damping", 1.0)?;
    let oracle = KolmogorovOracle::new(sigma, damping)?;
    let mut checks = Vec::new();

    checks.push(bool_check("bandwidth guard", oracle.bandwidth_ok(t_max)));

    let t_grid: Vec<f64> = (0..=8).map(|i| t_max * i as f64 / 8.0).collect();
    let resid = oracle.pde_residual(&t_grid[1..]);
    checks.push(CheckRecord::bound(
        "Fourier-space PDE residual",
        resid,
        1e-8,
    ));

    let energies: Vec<f64> = t_grid.iter().map(|&t| oracle.energy(t)).collect();
    let monotone = energies.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let strict = energies.windows(2).all(|w| w[1] < w[0]);
    checks.push(bool_check("L2 energy nonincreasing", monotone));
    checks.push(bool_check("L2 energy strictly decreasing", strict));

    // p = 2 GN ratio and nu-invariance: q = 8/3 at sigma = 1/2 in d = 1;
    // general sigma uses the closed form
    let q = 2.0 * 2.0 * (sigma + 1.0 + sigma) / (2.0 * sigma + 2.0);
    let a_exp = (sigma + 2.0 + sigma) / (2.0 * (sigma + 1.0 + sigma));
    let b_exp = sigma * 2.0 / (2.0 * (sigma + 1.0 + sigma));
    let (nx, nv) = (48, 48);
    let ratio_of = |o: &KolmogorovOracle, tmax: f64| -> f64 {
        let t_grid: Vec<f64> = (0..=8).map(|i| tmax * i as f64 / 8.0).collect();
        let lhs = oracle_lq_norm(o, &t_grid, nx, nv, q, None);
        let nv_norm = oracle_lq_norm(o, &t_grid, nx, nv, 2.0, Some(sigma));
        // S = -c D^sigma f: |S|_2 = c |D^sigma f|_2
        let ns = o.damping * nv_norm;
        lhs / (nv_norm.powf(a_exp) * ns.powf(b_exp))
    };
    let base = ratio_of(&oracle, t_max);
    checks.push(bool_check("GN ratio finite", base.is_finite() && base > 0.0));
    for &nu in &[0.5, 2.0] {
        let scaled = oracle.rescaled(nu)?;
        let r = ratio_of(&scaled, t_max / nu);
        checks.push(CheckRecord::rel(
            &format!("oracle GN ratio invariance under nu = {nu}"),
            r,
            base,
            0.02,
        ));
    }

    let rows: Vec<Vec<f64>> = t_grid
        .iter()
        .zip(&energies)
        .map(|(&t, &e)| vec![t, e])
        .collect();
    Ok(SuiteOutput {
        report: Report::new("oracle", config.stamp(), checks),
        tables: vec![CsvTable {
            name: "oracle_energy".into(),
            header: vec!["t".into(), "l2_energy".into()],
            rows,
        }],
        extra: None,
    })
}

// ----------------------------------------------------------------- critical

fn critical_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let mu = config.f64("mu", 1.0)?;
    let nu = config.f64("nu", 1.0)?;
    let negative_control = config.str("negative-control", "false") == "true";
    let fam = SyntheticFamily::new(mu, nu, 1.0)?;
    let theta = fam.critical_theta();
    let mut checks = Vec::new();
    let mut tables = Vec::new();

    // closed-form oracle for the integrated family
    let mut worst_cf = 0.0f64;
    for &x in &[0.01, 0.1, 0.4, 0.8] {
        let a = fam.integrate(1.0, x);
        let b = fam.integrate_closed_form(1.0, x);
        worst_cf = worst_cf.max((a - b).abs() / b.abs().max(1e-12));
    }
    checks.push(CheckRecord::bound(
        "quadrature vs closed-form layer integration",
        worst_cf,
        1e-4,
    ));

    let grid: Vec<f64> = (-3..=3).map(|k| (k as f64).exp2()).collect();
    let rep = critical::verify_uniformity(&fam, &grid, theta, 10.0)?;
    checks.push(CheckRecord::bound(
        "weak norm tau-uniformity at critical theta (max/min)",
        rep.max_over_min,
        10.0,
    ));
    checks.push(CheckRecord::abs(
        "weak norm tau-slope at critical theta",
        rep.tau_slope,
        0.0,
        0.05,
    ));
    tables.push(CsvTable {
        name: "weak_norms".into(),
        header: vec!["tau".into(), "weak_norm".into()],
        rows: rep.norms.iter().map(|&(t, n)| vec![t, n]).collect(),
    });

    if negative_control {
        // the forced growth rate (mu+nu)(1/theta' - 1/theta) needs a wide
        // dyadic range to push the ratio beyond the uniformity bound
        let theta_neg = theta - 0.3;
        let wide: Vec<f64> = (-10..=10).map(|k| (k as f64).exp2()).collect();
        let neg = critical::verify_uniformity(&fam, &wide, theta_neg, 10.0)?;
        checks.push(bool_check(
            "negative control fails uniformity at theta - 0.3",
            !neg.uniform,
        ));
        let growth = (mu + nu) * (1.0 / theta_neg - 1.0 / theta);
        checks.push(CheckRecord::abs(
            "negative-control growth slope",
            neg.tau_slope,
            growth,
            0.05,
        ));
        tables.push(CsvTable {
            name: "weak_norms_negative_control".into(),
            header: vec!["tau".into(), "weak_norm".into()],
            rows: neg.norms.iter().map(|&(t, n)| vec![t, n]).collect(),
        });
    }

    let kfit = critical::k_functional_slope(&fam, 1.0)?;
    checks.push(CheckRecord::abs(
        "K-functional slope mu/(mu+nu)",
        kfit.slope,
        mu / (mu + nu),
        0.05,
    ));

    Ok(SuiteOutput {
        report: Report::new("critical", config.stamp(), checks),
        tables,
        extra: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        let cfg = SuiteConfig::new("bogus");
        assert!(matches!(run_suite(&cfg), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = SuiteConfig::from_json("exponents", r#"{"sigma": "1/2", "d": 1}"#).unwrap();
        assert_eq!(cfg.rational("sigma", (1, 3)).unwrap(), rat(1, 2));
        assert_eq!(cfg.u64("d", 2).unwrap(), 1);
        assert_eq!(cfg.f64("missing", 0.25).unwrap(), 0.25);
    }

    #[test]
    fn malformed_sigma_is_rejected_with_constraint() {
        let mut cfg = SuiteConfig::new("exponents");
        cfg.set("sigma", "3/2");
        let msg = match run_suite(&cfg) {
            Err(e) => format!("{e}"),
            Ok(_) => panic!("sigma = 3/2 must be rejected"),
        };
        assert!(msg.contains("(0, 1)"), "message was {msg}");
    }

    #[test]
    fn exponents_suite_reference_run() {
        let cfg = SuiteConfig::new("exponents");
        let out = run_suite(&cfg).unwrap();
        assert!(out.report.pass(), "{}", out.report.to_json());
    }

    #[test]
    fn determinism_of_report_body() {
        let mut cfg = SuiteConfig::new("exponents");
        cfg.set("seed", 3u64);
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.report.body_json(), b.report.body_json());
    }
}
