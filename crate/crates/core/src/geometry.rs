//! The kinetic translation group on `R^{1+2d}`, its anisotropic dilations,
//! and the scaling actions on sampled fields.

use crate::grid::{Axis, GridFunction};
use crate::{Error, Result};

/// A point `(t, x, v)` of the kinetic group.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhasePoint {
    pub fn new(t: f64, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: v.len(),
            });
        }
        Ok(PhasePoint { t, x, v })
    }

    /// Convenience constructor for `d = 1`.
    pub fn d1(t: f64, x: f64, v: f64) -> Self {
        PhasePoint {
            t,
            x: vec![x],
            v: vec![v],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn identity(d: usize) -> Self {
        PhasePoint {
            t: 0.0,
            x: vec![0.0; d],
            v: vec![0.0; d],
        }
    }
}

/// Group law `(t,x,v) o (s,y,w) = (t+s, x+y+sv, v+w)`.
pub fn compose(a: &PhasePoint, b: &PhasePoint) -> Result<PhasePoint> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let x = a
        .x
        .iter()
        .zip(&b.x)
        .zip(&a.v)
        .map(|((&ax, &bx), &av)| ax + bx + b.t * av)
        .collect();
    let v = a.v.iter().zip(&b.v).map(|(&av, &bv)| av + bv).collect();
    Ok(PhasePoint { t: a.t + b.t, x, v })
}

/// Group inverse `(t,x,v)^{-1} = (-t, -x + t v, -v)`.
pub fn inverse(a: &PhasePoint) -> PhasePoint {
    let x = a
        .x
        .iter()
        .zip(&a.v)
        .map(|(&ax, &av)| -ax + a.t * av)
        .collect();
    let v = a.v.iter().map(|&av| -av).collect();
    PhasePoint { t: -a.t, x, v }
}

/// Relative coordinates `a^{-1} o b = (s-t, y-x-(s-t)v, w-v)`.
pub fn relative(a: &PhasePoint, b: &PhasePoint) -> Result<PhasePoint> {
    compose(&inverse(a), b)
}

/// The anisotropic dilation `delta_r(t,x,v) = (r^alpha t, r^beta x, r^{beta-alpha} v)`.
#[derive(Debug, Clone, Copy)]
pub struct DilationParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
}

impl DilationParams {
    pub fn new(alpha: f64, beta: f64, r: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > alpha && r > 0.0) {
            return Err(Error::InvalidParameter(
                "dilation needs 0 < alpha < beta and r > 0".into(),
            ));
        }
        Ok(DilationParams { alpha, beta, r })
    }

    pub fn apply(&self, z: &PhasePoint) -> PhasePoint {
        let (ra, rb, rba) = (
            self.r.powf(self.alpha),
            self.r.powf(self.beta),
            self.r.powf(self.beta - self.alpha),
        );
        PhasePoint {
            t: ra * z.t,
            x: z.x.iter().map(|&x| rb * x).collect(),
            v: z.v.iter().map(|&v| rba * v).collect(),
        }
    }

    /// Composition in the scale parameter: `delta_r o delta_s = delta_{rs}`.
    pub fn compose_scale(&self, other: &DilationParams) -> DilationParams {
        DilationParams {
            alpha: self.alpha,
            beta: self.beta,
            r: self.r * other.r,
        }
    }
}

/// Resample `f_lambda(t,x,v) = f(lambda^{sigma p} t, lambda^{sigma p + 1} x, lambda v)`
/// on the same box by multilinear interpolation.
///
/// The source grid must contain the pulled-back box; with `extend_zero` set,
/// exits are treated as zero (compactly supported data).
pub fn scale_function(
    f: &GridFunction,
    lambda: f64,
    sigma: f64,
    p: f64,
) -> Result<GridFunction> {
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter("lambda must be positive".into()));
    }
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    let (ct, cx, cv) = (
        lambda.powf(sigma * p),
        lambda.powf(sigma * p + 1.0),
        lambda,
    );
    resample(f, |t, x, v| (ct * t, cx * x, cv * v))
}

/// The `nu`-rescaling of a structural pair:
/// `f_nu(t,x,v) = f(nu t, nu x, v)` and `S_nu = nu S(nu t, nu x, v)`.
pub fn nu_rescale_pair(
    f: &GridFunction,
    source: &GridFunction,
    nu: f64,
) -> Result<(GridFunction, GridFunction)> {
    if nu <= 0.0 {
        return Err(Error::InvalidParameter("nu must be positive".into()));
    }
    if nu == 1.0 {
        return Ok((f.clone(), source.clone()));
    }
    let f_nu = resample(f, |t, x, v| (nu * t, nu * x, v))?;
    let mut s_nu = resample(source, |t, x, v| (nu * t, nu * x, v))?;
    s_nu.map_in_place(|s| nu * s);
    Ok((f_nu, s_nu))
}

fn resample(
    f: &GridFunction,
    pullback: impl Fn(f64, f64, f64) -> (f64, f64, f64),
) -> Result<GridFunction> {
    // The output box is the exact preimage of the source box, so norms over
    // the output box correspond to source-box norms under substitution.
    let shrink = |a: &Axis, c: f64| -> Axis {
        if a.n == 1 {
            a.clone()
        } else {
            Axis::new(a.min / c, a.max / c, a.n)
        }
    };
    let (ct, cx, cv) = {
        let probe = pullback(1.0, 1.0, 1.0);
        (probe.0, probe.1, probe.2)
    };
    let t_axis = shrink(&f.t, ct);
    let x_axis = shrink(&f.x, cx);
    let v_axis = shrink(&f.v, cv);
    let mut out = GridFunction::sample(t_axis, x_axis, v_axis, |_, _, _| 0.0);
    for it in 0..out.t.n {
        for ix in 0..out.x.n {
            for iv in 0..out.v.n {
                let (t, x, v) = (out.t.node(it), out.x.node(ix), out.v.node(iv));
                let (pt, px, pv) = pullback(t, x, v);
                let idx = out.index(it, ix, iv);
                out.values[idx] = f.eval(pt, px, pv)?;
            }
        }
    }
    out.extend_zero = f.extend_zero;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_neutral() {
        let e = PhasePoint::identity(1);
        let z = PhasePoint::d1(0.3, -1.2, 2.0);
        assert_eq!(compose(&e, &z).unwrap(), z);
        assert_eq!(compose(&z, &e).unwrap(), z);
    }

    #[test]
    fn composition_reference_value() {
        // (1,0,1) o (1,0,0) = (2, 0+0+1*1, 1+0) = (2,1,1)
        let a = PhasePoint::d1(1.0, 0.0, 1.0);
        let b = PhasePoint::d1(1.0, 0.0, 0.0);
        assert_eq!(compose(&a, &b).unwrap(), PhasePoint::d1(2.0, 1.0, 1.0));
    }

    #[test]
    fn inverse_reference_value() {
        // (1,2,3)^{-1} = (-1, -2+1*3, -3) = (-1, 1, -3)
        let a = PhasePoint::d1(1.0, 2.0, 3.0);
        assert_eq!(inverse(&a), PhasePoint::d1(-1.0, 1.0, -3.0));
        assert_eq!(inverse(&PhasePoint::identity(1)), PhasePoint::identity(1));
    }

    #[test]
    fn inverse_composes_to_identity() {
        let a = PhasePoint::d1(0.7, -0.4, 1.3);
        let prod = compose(&a, &inverse(&a)).unwrap();
        assert!(prod.t.abs() < 1e-15);
        assert!(prod.x[0].abs() < 1e-15);
        assert!(prod.v[0].abs() < 1e-15);
    }

    #[test]
    fn relative_coordinates_formula() {
        // a^{-1} o b = (s-t, y-x-(s-t)v, w-v)
        let a = PhasePoint::d1(0.5, 1.0, -2.0);
        let b = PhasePoint::d1(1.5, 0.25, 0.75);
        let rel = relative(&a, &b).unwrap();
        let s_t = 1.5 - 0.5;
        assert!((rel.t - s_t).abs() < 1e-15);
        assert!((rel.x[0] - (0.25 - 1.0 - s_t * (-2.0))).abs() < 1e-15);
        assert!((rel.v[0] - (0.75 - (-2.0))).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = PhasePoint::d1(0.0, 0.0, 0.0);
        let b = PhasePoint::new(0.0, vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(compose(&a, &b).is_err());
    }

    #[test]
    fn dilation_group_law_on_dyadic_scales() {
        let d1 = DilationParams::new(1.0, 2.0, 2.0).unwrap();
        let d2 = DilationParams::new(1.0, 2.0, 0.25).unwrap();
        let z = PhasePoint::d1(1.0, -1.0, 0.5);
        let lhs = d1.apply(&d2.apply(&z));
        let rhs = d1.compose_scale(&d2).apply(&z);
        assert!((lhs.t - rhs.t).abs() < 1e-15);
        assert!((lhs.x[0] - rhs.x[0]).abs() < 1e-15);
        assert!((lhs.v[0] - rhs.v[0]).abs() < 1e-15);
    }

    #[test]
    fn scale_function_identity_at_lambda_one() {
        let g = GridFunction::sample(
            Axis::new(-1.0, 1.0, 9),
            Axis::new(-1.0, 1.0, 9),
            Axis::new(-1.0, 1.0, 9),
            |t, x, v| (-(t * t + x * x + v * v)).exp(),
        );
        let h = scale_function(&g, 1.0, 0.5, 2.0).unwrap();
        assert_eq!(g.values, h.values);
    }
}
