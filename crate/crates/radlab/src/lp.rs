//! Admissible Littlewood-Paley pairs, Calderón duals, and frequency-block
//! convolutions on grid functions.
//!
//! The band-pass profile `phi_hat` is a smooth bump supported in
//! `1/2 <= |xi| <= 2` with plateau value 1 on `3/5 <= |xi| <= 5/3`; the
//! low-pass `Phi_hat` is 1 on `|xi| <= 5/3` and vanishes for `|xi| >= 2`.
//! Duals divide by `G(xi) = |Phi_hat(xi)|^2 + sum_{j>=1} |phi_hat(2^-j xi)|^2`,
//! which is >= 1 everywhere because consecutive dilated plateaus overlap;
//! the Calderón sum is then identically 1 by construction.

use crate::grid::GridFunction;
use crate::profile::RadialProfile;
use crate::{Error, Result};
use num_complex::Complex64;

/// Smooth transition: 0 for `t <= 0`, 1 for `t >= 1`, C^infinity.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Littlewood-Paley pair: radial frequency profiles and their Calderón
/// normalization.
#[derive(Debug, Clone, Copy)]
pub struct LPPair {
    /// Lower support radius of `phi_hat`.
    pub lo: f64,
    /// Upper support radius of both profiles.
    pub hi: f64,
    /// Plateau of `phi_hat`: `[plateau_lo, plateau_hi]`.
    pub plateau_lo: f64,
    pub plateau_hi: f64,
}

/// Build the standard admissible pair (exponential-transition bumps,
/// low-pass positive through `|xi| = 1.9`).
pub fn make_lp_pair() -> LPPair {
    LPPair {
        lo: 0.5,
        hi: 2.0,
        plateau_lo: 0.6,
        plateau_hi: 5.0 / 3.0,
    }
}

impl LPPair {
    /// Band-pass profile `phi_hat(|xi|)`.
    pub fn phi_hat(&self, r: f64) -> f64 {
        let up = smooth_step((r - self.lo) / (self.plateau_lo - self.lo));
        let down = smooth_step((self.hi - r) / (self.hi - self.plateau_hi));
        up * down
    }

    /// Low-pass profile `Phi_hat(|xi|)`.
    pub fn big_phi_hat(&self, r: f64) -> f64 {
        smooth_step((self.hi - r) / (self.hi - self.plateau_hi))
    }

    /// Calderón normalizer `G(r) >= 1`.
    pub fn g(&self, r: f64) -> f64 {
        let mut g = self.big_phi_hat(r).powi(2);
        if r > self.lo {
            // Terms vanish once 2^-j r < lo.
            let j_hi = (r / self.lo).log2().ceil() as i32 + 1;
            for j in 1..=j_hi.max(1) {
                let v = self.phi_hat(r * (2.0f64).powi(-j));
                g += v * v;
            }
        }
        g
    }

    /// Analysis multiplier of block `j` at radius `r`.
    pub fn block_mult(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            self.big_phi_hat(r)
        } else {
            self.phi_hat(r * (2.0f64).powi(-(j as i32)))
        }
    }

    /// Dual (synthesis) multiplier of block `j` at radius `r`:
    /// `psi_hat_j = phi_hat_j / G`, `Psi_hat = Phi_hat / G`.
    pub fn dual_mult(&self, j: u32, r: f64) -> f64 {
        self.block_mult(j, r) / self.g(r)
    }

    /// Calderón sum `Psi Phi + sum_{j>=1} psi_j phi_j` at radius `r`,
    /// truncated when the dilated supports leave the range.
    pub fn calderon_sum_at(&self, r: f64) -> f64 {
        let mut s = self.dual_mult(0, r) * self.block_mult(0, r);
        if r > self.lo {
            let j_hi = ((r / self.lo).log2().ceil() as u32).saturating_add(1);
            for j in 1..=j_hi {
                s += self.dual_mult(j, r) * self.block_mult(j, r);
            }
        }
        s
    }

    /// Largest admissible block level on a grid with spacing `h`:
    /// `2^{j+1} < pi/h`.
    pub fn max_level(&self, h: f64) -> i64 {
        // largest j with 2^j * hi < pi/h
        let nyq = std::f64::consts::PI / h;
        let mut j = (nyq / self.hi).log2().ceil() as i64;
        while (2.0f64).powi(j as i32) * self.hi >= nyq {
            j -= 1;
        }
        j
    }
}

/// Relative tolerance for the padded-support precondition.
pub const SUPPORT_RTOL: f64 = 1e-10;

/// Check that `f` is supported in `[-R/2, R/2]^n` up to `SUPPORT_RTOL`
/// relative to its sup.
pub fn check_padded_support(f: &GridFunction) -> Result<()> {
    let sup = f.sup_norm();
    if sup == 0.0 {
        return Ok(());
    }
    // Points outside the box have some coordinate with |x_d| > R/2.
    let half = f.r / 2.0;
    let npts = f.npts;
    let mut worst = 0.0f64;
    for (flat, v) in f.data.iter().enumerate() {
        let mut rem = flat;
        let mut outside = false;
        for _ in 0..f.n {
            let i = rem % npts;
            rem /= npts;
            if f.coord(i).abs() > half {
                outside = true;
                break;
            }
        }
        if outside {
            worst = worst.max(v.norm());
        }
    }
    if worst > SUPPORT_RTOL * sup {
        return Err(Error::SupportCheck(format!(
            "mass outside [-R/2, R/2]^n: {:.3e} relative",
            worst / sup
        )));
    }
    Ok(())
}

/// Frequency-block convolution `phi_j * f` (`Phi * f` at `j = 0`),
/// guarded by the Nyquist limit and the padded-support check.
pub fn lp_block(f: &GridFunction, j: u32, pair: &LPPair) -> Result<GridFunction> {
    let max = pair.max_level(f.h());
    if (j as i64) > max {
        return Err(Error::LevelTooFine {
            requested: j,
            max,
        });
    }
    check_padded_support(f)?;
    Ok(lp_block_unguarded(f, j, pair))
}

/// Same convolution without the guards (used internally where the band may
/// intentionally clip at Nyquist, e.g. exact resynthesis).
pub fn lp_block_unguarded(f: &GridFunction, j: u32, pair: &LPPair) -> GridFunction {
    apply_radial_multiplier(f, |r| pair.block_mult(j, r))
}

fn apply_radial_multiplier(f: &GridFunction, mult: impl Fn(f64) -> f64) -> GridFunction {
    let mut out = f.clone();
    out.fft_forward();
    scale_spectrum(&mut out, mult);
    out.fft_inverse();
    out
}

fn scale_spectrum(fhat: &mut GridFunction, mult: impl Fn(f64) -> f64) {
    let npts = fhat.npts;
    let n = fhat.n;
    // Per-axis frequency table.
    let freqs: Vec<f64> = (0..npts).map(|i| fhat.freq(i)).collect();
    for (flat, v) in fhat.data.iter_mut().enumerate() {
        let mut rem = flat;
        let mut r2 = 0.0;
        for _ in 0..n {
            let i = rem % npts;
            rem /= npts;
            r2 += freqs[i] * freqs[i];
        }
        *v *= mult(r2.sqrt());
    }
}

/// Calderón resynthesis `Psi * Phi * f + sum_j psi_j * phi_j * f` over all
/// levels contributing below the grid's spectral range.  Because the dual
/// multipliers sum the analysis ones to exactly 1, this recovers `f` to
/// roundoff.
pub fn resynthesize(f: &GridFunction, pair: &LPPair) -> GridFunction {
    let xi_max = f.nyquist() * (f.n as f64).sqrt();
    let j_hi = ((xi_max / pair.lo).log2().ceil() as u32).saturating_add(1);
    let mut fhat = f.clone();
    fhat.fft_forward();
    let mut acc = GridFunction::zeros(f.n, f.npts, f.r).unwrap();
    for j in 0..=j_hi {
        let mut block = fhat.clone();
        scale_spectrum(&mut block, |r| pair.block_mult(j, r) * pair.dual_mult(j, r));
        for (a, b) in acc.data.iter_mut().zip(&block.data) {
            *a += b;
        }
    }
    acc.fft_inverse();
    acc
}

/// Sample a radial profile onto an `n`-dimensional grid.
pub fn sample_radial(profile: &RadialProfile, r: f64, npts: usize) -> Result<GridFunction> {
    let needed = r * (profile.n as f64).sqrt();
    if profile.r_max() < needed - 1e-12 {
        return Err(Error::InsufficientRange(format!(
            "profile covers [0, {:.4}], grid needs [0, {:.4}]",
            profile.r_max(),
            needed
        )));
    }
    GridFunction::from_fn(profile.n, npts, r, |x| {
        let rad = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new(profile.eval(rad), 0.0)
    })
}

/// Smooth window = 1 for `|t| <= 0.4 R`, 0 for `|t| >= 0.45 R`.
fn axis_window(t: f64, r: f64) -> f64 {
    smooth_step((0.45 * r - t.abs()) / (0.05 * r))
}

/// Random smooth real test function: a few random plane waves with
/// `|k| <= xi_cap`, cut off by a C^infinity window that vanishes
/// identically outside `[-0.45 R, 0.45 R]^n`.  Spectrally concentrated in
/// `|xi| <= xi_cap` (the smooth window leaks only rapidly decaying tails)
/// and exactly inside the padded-support box.
pub fn random_band_limited(
    n: usize,
    npts: usize,
    r: f64,
    xi_cap: f64,
    rng: &mut impl rand::Rng,
) -> GridFunction {
    let mut waves = Vec::new();
    for _ in 0..6 {
        let k: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-xi_cap / 2.0..xi_cap / 2.0))
            .collect();
        let a: f64 = rng.gen_range(-1.0..1.0);
        let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        waves.push((k, a, ph));
    }
    GridFunction::from_fn(n, npts, r, |x| {
        let mut w = 1.0;
        for &xd in x {
            w *= axis_window(xd, r);
        }
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut m = 1.0;
        for (k, a, ph) in &waves {
            let dot: f64 = k.iter().zip(x).map(|(ki, xi)| ki * xi).sum();
            m += 0.5 * a * (dot + ph).cos();
        }
        Complex64::new(w * m, 0.0)
    })
    .unwrap()
}

/// Random smooth *radial* test function: random radial Gaussian bumps,
/// windowed radially so the support stays inside `|x| <= 0.45 R`.
pub fn random_band_limited_radial(
    n: usize,
    npts: usize,
    r: f64,
    xi_cap: f64,
    rng: &mut impl rand::Rng,
) -> GridFunction {
    let mut bumps = Vec::new();
    let w_min = (2.0 / xi_cap).max(r / 64.0);
    for _ in 0..5 {
        let c: f64 = rng.gen_range(0.0..r / 5.0);
        let w: f64 = rng.gen_range(w_min..(2.5 * w_min));
        let a: f64 = rng.gen_range(0.2..1.0);
        bumps.push((c, w, a));
    }
    GridFunction::from_radial_fn(n, npts, r, |rad| {
        let w = axis_window(rad, r);
        if w == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for (c, wd, a) in &bumps {
            s += a * (-(rad - c) * (rad - c) / (2.0 * wd * wd)).exp();
        }
        w * s
    })
    .unwrap()
}
