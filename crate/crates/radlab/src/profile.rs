//! 1-D radial profiles: uniform samples of a radial function of `n`
//! variables over a radius grid, with cubic interpolation.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    /// Dimension tag of the ambient space.
    pub n: usize,
    /// Radius of the first sample (usually 0).
    pub r0: f64,
    /// Uniform sample spacing in radius.
    pub dr: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(n: usize, r0: f64, dr: f64, values: Vec<f64>) -> Result<RadialProfile> {
        if dr <= 0.0 || values.len() < 2 {
            return Err(Error::OutOfRange("profile needs dr > 0 and >= 2 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("profile values must be finite".into()));
        }
        Ok(RadialProfile { n, r0, dr, values })
    }

    /// Tabulate `f` on `[0, r_max]` with `m` samples.
    pub fn tabulate(n: usize, r_max: f64, m: usize, mut f: impl FnMut(f64) -> f64) -> RadialProfile {
        let dr = r_max / (m - 1) as f64;
        let values = (0..m).map(|i| f(i as f64 * dr)).collect();
        RadialProfile {
            n,
            r0: 0.0,
            dr,
            values,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r0 + self.dr * (self.values.len() - 1) as f64
    }

    /// Catmull-Rom interpolation; clamped to the end values outside range.
    pub fn eval(&self, r: f64) -> f64 {
        let t = (r - self.r0) / self.dr;
        if t <= 0.0 {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if t >= last as f64 {
            return self.values[last];
        }
        let i = t.floor() as usize;
        let u = t - i as f64;
        let at = |j: isize| -> f64 {
            let j = j.clamp(0, last as isize) as usize;
            self.values[j]
        };
        let (p0, p1, p2, p3) = (
            at(i as isize - 1),
            at(i as isize),
            at(i as isize + 1),
            at(i as isize + 2),
        );
        let u2 = u * u;
        let u3 = u2 * u;
        0.5 * ((2.0 * p1)
            + (-p0 + p2) * u
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2
            + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3)
    }

    /// Pointwise linear combination `a*self + b*other` (requires identical
    /// radius grids).
    pub fn axpy(&self, a: f64, other: &RadialProfile, b: f64) -> Result<RadialProfile> {
        if self.r0 != other.r0 || self.dr != other.dr || self.values.len() != other.values.len() {
            return Err(Error::IndexMismatch("profile grids differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        RadialProfile::new(self.n, self.r0, self.dr, values)
    }

    pub fn scale(&self, a: f64) -> RadialProfile {
        RadialProfile {
            n: self.n,
            r0: self.r0,
            dr: self.dr,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// Sup of |f| over the multiplicative window
    /// `[rho * 2^{-1/4}, rho * 2^{1/4}]`, evaluated on the sample grid
    /// restricted to the window (plus the window endpoints).
    pub fn window_sup(&self, rho: f64) -> Result<f64> {
        let lo = rho * (2.0f64).powf(-0.25);
        let hi = rho * (2.0f64).powf(0.25);
        self.interval_sup(lo, hi)
    }

    /// Sup of |f| over `[lo, hi]` intersected with the profile range.
    pub fn interval_sup(&self, lo: f64, hi: f64) -> Result<f64> {
        let lo = lo.max(self.r0);
        let hi = hi.min(self.r_max());
        if hi < lo {
            return Err(Error::OutOfRange(format!(
                "window [{lo}, {hi}] outside profile range"
            )));
        }
        let i0 = ((lo - self.r0) / self.dr).ceil() as usize;
        let i1 = ((hi - self.r0) / self.dr).floor() as usize;
        let mut best = self.eval(lo).abs().max(self.eval(hi).abs());
        for i in i0..=i1.min(self.values.len() - 1) {
            best = best.max(self.values[i].abs());
        }
        Ok(best)
    }

    /// Radial quadrature of `|f|^p r^{n-1} dr` times the unit-sphere area:
    /// the n-dimensional L^p norm.  Composite Simpson, trapezoid fallback
    /// on a trailing odd interval.
    pub fn lp_norm_nd(&self, p: f64) -> f64 {
        let g = |i: usize| -> f64 {
            let r = self.r0 + i as f64 * self.dr;
            self.values[i].abs().powf(p) * r.powi(self.n as i32 - 1)
        };
        let m = self.values.len() - 1; // interval count
        let pairs = m / 2;
        let mut acc = 0.0;
        for k in 0..pairs {
            acc += (self.dr / 3.0) * (g(2 * k) + 4.0 * g(2 * k + 1) + g(2 * k + 2));
        }
        if m % 2 == 1 {
            acc += 0.5 * self.dr * (g(m - 1) + g(m));
        }
        (acc * sphere_area(self.n)).powf(1.0 / p)
    }
}

/// Surface area of the unit sphere in R^n: `n * omega_n`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * crate::unit_ball_volume(n)
}
