//! Sampled scalar fields on rectangular `(t, x, v)` lattices.
//!
//! Grid numerics are restricted to velocity dimension one, so a field lives
//! on a three-dimensional box. An axis with a single point acts as a
//! spectator: it carries unit quadrature weight and drops out of norms.

use crate::{Error, Result};

/// A uniformly spaced closed axis `[min, max]` with `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        assert!(n >= 1 && (n == 1 || max > min));
        Axis { min, max, n }
    }

    /// Collapsed axis carrying a single spectator point.
    pub fn point(value: f64) -> Self {
        Axis {
            min: value,
            max: value,
            n: 1,
        }
    }

    pub fn step(&self) -> f64 {
        if self.n > 1 {
            (self.max - self.min) / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Trapezoid quadrature weight of node `i`; 1 for a spectator axis.
    pub fn weight(&self, i: usize) -> f64 {
        if self.n == 1 {
            1.0
        } else if i == 0 || i == self.n - 1 {
            0.5 * self.step()
        } else {
            self.step()
        }
    }

    /// Fractional index of `x`, or `None` outside `[min, max]`.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if self.n == 1 {
            return Some((0, 0.0));
        }
        let s = (x - self.min) / self.step();
        if !(-(1e-9)..=(self.n - 1) as f64 + 1e-9).contains(&s) {
            return None;
        }
        let i = (s.floor().max(0.0) as usize).min(self.n - 2);
        Some((i, (s - i as f64).clamp(0.0, 1.0)))
    }
}

/// A sampled scalar field over a `(t, x, v)` box. Values are stored t-major
/// with the velocity index fastest.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub t: Axis,
    pub x: Axis,
    pub v: Axis,
    pub values: Vec<f64>,
    /// Treat the field as compactly supported: evaluation outside the box
    /// returns zero instead of failing.
    pub extend_zero: bool,
}

impl GridFunction {
    pub fn sample(t: Axis, x: Axis, v: Axis, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(t.n * x.n * v.n);
        for ti in t.nodes() {
            for xi in x.nodes() {
                for vi in v.nodes() {
                    values.push(f(ti, xi, vi));
                }
            }
        }
        GridFunction {
            t,
            x,
            v,
            values,
            extend_zero: true,
        }
    }

    /// Pure velocity profile on a spectator `(t, x)` point.
    pub fn sample_v_line(v: Axis, f: impl Fn(f64) -> f64) -> Self {
        GridFunction::sample(Axis::point(0.0), Axis::point(0.0), v, |_, _, vv| f(vv))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, it: usize, ix: usize, iv: usize) -> usize {
        (it * self.x.n + ix) * self.v.n + iv
    }

    pub fn at(&self, it: usize, ix: usize, iv: usize) -> f64 {
        self.values[self.index(it, ix, iv)]
    }

    /// Trilinear interpolation; zero outside the box when `extend_zero`.
    pub fn eval(&self, t: f64, x: f64, v: f64) -> Result<f64> {
        let loc = (
            self.t.locate(t),
            self.x.locate(x),
            self.v.locate(v),
        );
        let ((it, ft), (ix, fx), (iv, fv)) = match loc {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ if self.extend_zero => return Ok(0.0),
            _ => {
                return Err(Error::DomainExit(format!(
                    "point ({t}, {x}, {v}) outside sampled box"
                )))
            }
        };
        let mut acc = 0.0;
        for (dt, wt) in corner_weights(self.t.n, it, ft) {
            for (dx, wx) in corner_weights(self.x.n, ix, fx) {
                for (dv, wv) in corner_weights(self.v.n, iv, fv) {
                    acc += wt * wx * wv * self.at(it + dt, ix + dx, iv + dv);
                }
            }
        }
        Ok(acc)
    }

    /// Quadrature weight of grid node `(it, ix, iv)`.
    pub fn node_weight(&self, it: usize, ix: usize, iv: usize) -> f64 {
        self.t.weight(it) * self.x.weight(ix) * self.v.weight(iv)
    }

    /// `L^q` norm over the sampled box by trapezoid quadrature.
    pub fn norm_lq(&self, q: f64) -> f64 {
        assert!(q >= 1.0);
        let mut acc = 0.0;
        for it in 0..self.t.n {
            for ix in 0..self.x.n {
                for iv in 0..self.v.n {
                    acc += self.node_weight(it, ix, iv) * self.at(it, ix, iv).abs().powf(q);
                }
            }
        }
        acc.powf(1.0 / q)
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Mean value over the box (Lebesgue average against trapezoid weights).
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        let mut vol = 0.0;
        for it in 0..self.t.n {
            for ix in 0..self.x.n {
                for iv in 0..self.v.n {
                    let w = self.node_weight(it, ix, iv);
                    acc += w * self.at(it, ix, iv);
                    vol += w;
                }
            }
        }
        acc / vol
    }

    /// Largest absolute value on the boundary collar of the velocity axis,
    /// used to monitor padding adequacy before spectral transforms.
    pub fn v_boundary_magnitude(&self, collar: usize) -> f64 {
        let mut m = 0.0f64;
        for it in 0..self.t.n {
            for ix in 0..self.x.n {
                for iv in 0..self.v.n {
                    if iv < collar || iv + collar >= self.v.n {
                        m = m.max(self.at(it, ix, iv).abs());
                    }
                }
            }
        }
        m
    }

    /// Apply `op` to every value, in place.
    pub fn map_in_place(&mut self, mut op: impl FnMut(f64) -> f64) {
        for v in &mut self.values {
            *v = op(*v);
        }
    }
}

fn corner_weights(n: usize, _i: usize, f: f64) -> impl Iterator<Item = (usize, f64)> {
    let pairs = if n == 1 {
        [(0usize, 1.0), (0, 0.0)]
    } else {
        [(0usize, 1.0 - f), (1, f)]
    };
    pairs.into_iter().filter(|&(_, w)| w != 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let g = GridFunction::sample(
            Axis::new(0.0, 1.0, 5),
            Axis::new(-1.0, 1.0, 7),
            Axis::new(-2.0, 2.0, 9),
            |t, x, v| 1.0 + 2.0 * t - 3.0 * x + 0.5 * v,
        );
        let val = g.eval(0.37, 0.21, -1.13).unwrap();
        let expect = 1.0 + 2.0 * 0.37 - 3.0 * 0.21 + 0.5 * (-1.13);
        assert!((val - expect).abs() < 1e-12);
    }

    #[test]
    fn out_of_box_is_zero_or_error() {
        let mut g = GridFunction::sample_v_line(Axis::new(-1.0, 1.0, 11), |v| v);
        assert_eq!(g.eval(0.0, 0.0, 5.0).unwrap(), 0.0);
        g.extend_zero = false;
        assert!(g.eval(0.0, 0.0, 5.0).is_err());
    }

    #[test]
    fn norms_on_singleton_axes_reduce_dimension() {
        // f(v) = 1 on [0, 1]: L^2 norm is 1 regardless of spectator axes
        let g = GridFunction::sample_v_line(Axis::new(0.0, 1.0, 101), |_| 1.0);
        assert!((g.norm_lq(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_l2_norm_matches_analytic() {
        // int exp(-2 v^2) dv = sqrt(pi/2)
        let g = GridFunction::sample_v_line(Axis::new(-8.0, 8.0, 801), |v| (-v * v).exp());
        let expect = (std::f64::consts::PI / 2.0).sqrt().sqrt();
        assert!((g.norm_lq(2.0) - expect).abs() < 1e-8);
    }
}
