//! Smooth bump profiles and the special-function constants used by the
//! fractional kernel representations.

/// The standard `C^infty` bump `exp(-1/(1-s^2))` on `(-1, 1)`, zero outside.
pub fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// First derivative of [`bump`].
pub fn bump_d1(s: f64) -> f64 {
    if s.abs() < 1.0 {
        let q = 1.0 - s * s;
        bump(s) * (-2.0 * s / (q * q))
    } else {
        0.0
    }
}

/// Second derivative of [`bump`].
pub fn bump_d2(s: f64) -> f64 {
    if s.abs() < 1.0 {
        let q = 1.0 - s * s;
        // d/ds [ b(s) * (-2s/q^2) ]
        let g = -2.0 * s / (q * q);
        bump(s) * (g * g + (-2.0 / (q * q)) + (-2.0 * s) * (-2.0) * (-2.0 * s) / (q * q * q))
    } else {
        0.0
    }
}

/// `int_{-1}^{1} bump = 0.443994...`, evaluated once by quadrature.
pub fn bump_mass() -> f64 {
    use crate::quad::Rule1d;
    static CACHE: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *CACHE.get_or_init(|| Rule1d::composite_gauss(-1.0, 1.0, 64, 16).integrate(bump))
}

/// Lanczos approximation of the Gamma function for real positive arguments,
/// extended to negative non-integer arguments by reflection.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection formula
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + G + 0.5;
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Normalization of the pointwise (principal-value) representation of the
/// fractional Laplacian of order `s in (0, 2)` in dimension `d`:
/// `(-Delta)^{s/2} f = C * PV int (f(v) - f(v+z)) / |z|^{d+s} dz`.
pub fn frac_laplacian_constant(d: u32, s: f64) -> f64 {
    assert!(s > 0.0 && s < 2.0);
    let d = d as f64;
    let pi = std::f64::consts::PI;
    // 2^s Gamma((d+s)/2) / (pi^{d/2} |Gamma(-s/2)|)
    let num = (2.0f64).powf(s) * gamma((d + s) / 2.0);
    let den = pi.powf(d / 2.0) * gamma(-s / 2.0).abs();
    num / den
}

/// Normalization of the Riesz-potential kernel of order `s in (0, d)`:
/// `I^s f = c int |v-z|^{s-d} f(z) dz` realizes the multiplier `|xi|^{-s}`.
pub fn riesz_constant(d: u32, s: f64) -> f64 {
    let d = d as f64;
    assert!(s > 0.0 && s < d + 1e-12);
    let pi = std::f64::consts::PI;
    gamma((d - s) / 2.0) / ((2.0f64).powf(s) * pi.powf(d / 2.0) * gamma(s / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_known_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-12);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        // Gamma(-1/4) = -4 Gamma(3/4)
        assert!((gamma(-0.25) + 4.0 * gamma(0.75)).abs() < 1e-9);
    }

    #[test]
    fn bump_derivative_matches_finite_differences() {
        let h = 1e-6;
        for &s in &[-0.7, -0.2, 0.0, 0.3, 0.9] {
            let fd = (bump(s + h) - bump(s - h)) / (2.0 * h);
            assert!(
                (bump_d1(s) - fd).abs() < 1e-7 * (1.0 + fd.abs()),
                "s={s}: {} vs {}",
                bump_d1(s),
                fd
            );
            let fd2 = (bump(s + h) - 2.0 * bump(s) + bump(s - h)) / (h * h);
            assert!(
                (bump_d2(s) - fd2).abs() < 1e-3 * (1.0 + fd2.abs()),
                "s={s}: {} vs {}",
                bump_d2(s),
                fd2
            );
        }
    }

    #[test]
    fn pv_constant_in_d1_at_sigma_one() {
        // (-Delta)^{1/2} in d=1 has PV constant 1/pi.
        let c = frac_laplacian_constant(1, 1.0);
        assert!((c - 1.0 / std::f64::consts::PI).abs() < 1e-12, "got {c}");
    }

    #[test]
    fn riesz_constant_in_d1_at_sigma_half() {
        // I^{1/2} in d=1: 1/sqrt(2 pi).
        let c = riesz_constant(1, 0.5);
        let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((c - expect).abs() < 1e-12, "got {c}");
    }

    #[test]
    fn bump_mass_is_stable() {
        let m = bump_mass();
        assert!((m - 0.443994).abs() < 1e-5, "got {m}");
    }
}
