//! Sampled functions on uniform periodic grids over `[-R, R]^n`.
//!
//! A `GridFunction` stores complex samples at the cell midpoints
//! `x_i = -R + (i + 1/2) h`, `h = 2R / N`, row-major.  Fourier transforms
//! are taken axis by axis; the frequency of signed index `m` along an axis
//! is `xi = pi m / R`.

use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::{Read, Write};
use std::path::Path;

pub const GFN1_MAGIC: &[u8; 4] = b"GFN1";

#[derive(Debug, Clone)]
pub struct GridFunction {
    pub n: usize,
    pub npts: usize,
    pub r: f64,
    pub data: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(n: usize, npts: usize, r: f64) -> Result<GridFunction> {
        if n == 0 || n > 3 {
            return Err(Error::InvalidDimension(n));
        }
        if npts < 8 || !npts.is_power_of_two() {
            return Err(Error::OutOfRange(format!(
                "grid size must be a power of two >= 8, got {npts}"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::OutOfRange(format!("domain half-width {r} <= 0")));
        }
        let len = npts.pow(n as u32);
        Ok(GridFunction {
            n,
            npts,
            r,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// Grid spacing `h = 2R / N`.
    pub fn h(&self) -> f64 {
        2.0 * self.r / self.npts as f64
    }

    /// Coordinate of index `i` along an axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.r + (i as f64 + 0.5) * self.h()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Fill from a pointwise function of the coordinates.
    pub fn from_fn(
        n: usize,
        npts: usize,
        r: f64,
        mut f: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<GridFunction> {
        let mut g = GridFunction::zeros(n, npts, r)?;
        let mut x = vec![0.0; n];
        for (flat, v) in g.data.iter_mut().enumerate() {
            let mut rem = flat;
            for d in (0..n).rev() {
                let i = rem % npts;
                rem /= npts;
                x[d] = -r + (i as f64 + 0.5) * (2.0 * r / npts as f64);
            }
            *v = f(&x);
        }
        Ok(g)
    }

    /// Real-valued radial function of `|x|`.
    pub fn from_radial_fn(
        n: usize,
        npts: usize,
        r: f64,
        mut f: impl FnMut(f64) -> f64,
    ) -> Result<GridFunction> {
        Self::from_fn(n, npts, r, |x| {
            Complex64::new(f(x.iter().map(|v| v * v).sum::<f64>().sqrt()), 0.0)
        })
    }

    /// Flat index of the multi-index `idx`.
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.npts + i)
    }

    /// Value at coordinates (nearest grid point).
    pub fn value_near(&self, x: &[f64]) -> Complex64 {
        let h = self.h();
        let idx: Vec<usize> = x
            .iter()
            .map(|&xi| {
                let i = ((xi + self.r) / h - 0.5).round();
                (i.max(0.0) as usize).min(self.npts - 1)
            })
            .collect();
        self.data[self.flat(&idx)]
    }

    /// Separable Catmull-Rom interpolation at arbitrary coordinates
    /// (indices clamped at the domain edge).
    pub fn interp(&self, x: &[f64]) -> Complex64 {
        let h = self.h();
        let last = self.npts as isize - 1;
        // Per-axis base index and weights.
        let mut bases = [0isize; 3];
        let mut wts = [[0.0f64; 4]; 3];
        for d in 0..self.n {
            let t = (x[d] + self.r) / h - 0.5;
            let i = t.floor();
            let u = t - i;
            bases[d] = i as isize;
            let u2 = u * u;
            let u3 = u2 * u;
            wts[d] = [
                0.5 * (-u3 + 2.0 * u2 - u),
                0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
                0.5 * (-3.0 * u3 + 4.0 * u2 + u),
                0.5 * (u3 - u2),
            ];
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sel = [0usize; 3];
        let count = 4usize.pow(self.n as u32);
        for c in 0..count {
            let mut rem = c;
            let mut w = 1.0;
            for d in 0..self.n {
                sel[d] = rem % 4;
                rem /= 4;
                w *= wts[d][sel[d]];
            }
            if w == 0.0 {
                continue;
            }
            let mut flat = 0usize;
            for d in 0..self.n {
                let i = (bases[d] + sel[d] as isize - 1).clamp(0, last) as usize;
                flat = flat * self.npts + i;
            }
            acc += w * self.data[flat];
        }
        acc
    }

    /// Frequency (signed index) of FFT bin `i` along an axis.
    pub fn freq_index(&self, i: usize) -> i64 {
        if i < self.npts / 2 {
            i as i64
        } else {
            i as i64 - self.npts as i64
        }
    }

    /// Physical frequency `xi = pi m / R` of bin `i`.
    pub fn freq(&self, i: usize) -> f64 {
        std::f64::consts::PI * self.freq_index(i) as f64 / self.r
    }

    /// Largest representable frequency magnitude (Nyquist), `pi / h`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.h()
    }

    /// In-place forward FFT (unnormalized), axis by axis.
    pub fn fft_forward(&mut self) {
        self.fft_axes(rustfft::FftDirection::Forward);
    }

    /// In-place inverse FFT, normalized by `N^n`.
    pub fn fft_inverse(&mut self) {
        self.fft_axes(rustfft::FftDirection::Inverse);
        let scale = 1.0 / (self.npts as f64).powi(self.n as i32);
        for v in &mut self.data {
            *v *= scale;
        }
    }

    fn fft_axes(&mut self, dir: rustfft::FftDirection) {
        let n = self.n;
        let npts = self.npts;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft(npts, dir);
        let mut buf = vec![Complex64::new(0.0, 0.0); npts];
        for axis in 0..n {
            // stride of the axis in the row-major layout
            let stride = npts.pow((n - 1 - axis) as u32);
            let block = stride * npts;
            let nblocks = self.data.len() / block;
            for b in 0..nblocks {
                for off in 0..stride {
                    let base = b * block + off;
                    for i in 0..npts {
                        buf[i] = self.data[base + i * stride];
                    }
                    fft.process(&mut buf);
                    for i in 0..npts {
                        self.data[base + i * stride] = buf[i];
                    }
                }
            }
        }
    }

    /// L^2 norm on the grid: `(h^n sum |f|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let hn = self.h().powi(self.n as i32);
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * hn).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max |f| over grid points with `|x| > rho` (support-decay check).
    pub fn sup_outside(&self, rho: f64) -> f64 {
        let mut best = 0.0f64;
        let mut x = vec![0.0; self.n];
        for (flat, v) in self.data.iter().enumerate() {
            let mut rem = flat;
            let mut r2 = 0.0;
            for d in (0..self.n).rev() {
                let i = rem % self.npts;
                rem /= self.npts;
                let c = self.coord(i);
                x[d] = c;
                r2 += c * c;
            }
            if r2.sqrt() > rho {
                best = best.max(v.norm());
            }
        }
        best
    }

    /// Max deviation of |f| over sign-flip / axis-permutation orbits
    /// (a cheap radial-symmetry diagnostic on the grid).
    pub fn symmetry_deviation(&self) -> f64 {
        let npts = self.npts;
        let mut worst = 0.0f64;
        match self.n {
            1 => {
                for i in 0..npts {
                    let j = npts - 1 - i;
                    let d = (self.data[i].norm() - self.data[j].norm()).abs();
                    worst = worst.max(d);
                }
            }
            2 => {
                for ix in 0..npts {
                    for iy in 0..npts {
                        let v = self.data[ix * npts + iy].norm();
                        let orbit = [
                            (npts - 1 - ix, iy),
                            (ix, npts - 1 - iy),
                            (iy, ix),
                        ];
                        for (a, b) in orbit {
                            let d = (v - self.data[a * npts + b].norm()).abs();
                            worst = worst.max(d);
                        }
                    }
                }
            }
            3 => {
                for ix in 0..npts {
                    for iy in 0..npts {
                        for iz in 0..npts {
                            let v = self.data[(ix * npts + iy) * npts + iz].norm();
                            let orbit = [
                                (npts - 1 - ix, iy, iz),
                                (ix, npts - 1 - iy, iz),
                                (ix, iy, npts - 1 - iz),
                                (iy, ix, iz),
                                (ix, iz, iy),
                            ];
                            for (a, b, c) in orbit {
                                let d = (v - self.data[(a * npts + b) * npts + c].norm()).abs();
                                worst = worst.max(d);
                            }
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        worst
    }

    // -- GFN1 binary format --------------------------------------------

    /// Write the GFN1 binary format: 32-byte header (magic, n, N, R,
    /// complex flag) followed by little-endian f64 samples, row-major,
    /// re/im interleaved when complex.
    pub fn write_gfn1(&self, w: &mut impl Write) -> Result<()> {
        let complex = self.data.iter().any(|v| v.im != 0.0);
        let mut header = [0u8; 32];
        header[0..4].copy_from_slice(GFN1_MAGIC);
        header[4..8].copy_from_slice(&(self.n as u32).to_le_bytes());
        header[8..12].copy_from_slice(&(self.npts as u32).to_le_bytes());
        header[12..20].copy_from_slice(&self.r.to_le_bytes());
        header[20] = complex as u8;
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.data.len() * if complex { 16 } else { 8 });
        for v in &self.data {
            buf.extend_from_slice(&v.re.to_le_bytes());
            if complex {
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_gfn1(rdr: &mut impl Read) -> Result<GridFunction> {
        let mut header = [0u8; 32];
        rdr.read_exact(&mut header)?;
        if &header[0..4] != GFN1_MAGIC {
            return Err(Error::Format("bad GFN1 magic".into()));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let npts = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let r = f64::from_le_bytes(header[12..20].try_into().unwrap());
        let complex = header[20] != 0;
        let mut g = GridFunction::zeros(n, npts, r)?;
        let width = if complex { 16 } else { 8 };
        let mut buf = vec![0u8; g.len() * width];
        rdr.read_exact(&mut buf)?;
        for (i, v) in g.data.iter_mut().enumerate() {
            let re = f64::from_le_bytes(buf[i * width..i * width + 8].try_into().unwrap());
            let im = if complex {
                f64::from_le_bytes(buf[i * width + 8..i * width + 16].try_into().unwrap())
            } else {
                0.0
            };
            *v = Complex64::new(re, im);
        }
        Ok(g)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_gfn1(&mut f)
    }

    pub fn load(path: &Path) -> Result<GridFunction> {
        let mut f = std::fs::File::open(path)?;
        Self::read_gfn1(&mut f)
    }
}

/// Pointwise product in frequency space: `self_hat * other_hat` where the
/// multiplier is given as a function of the physical frequency vector.
pub fn apply_fourier_multiplier(g: &GridFunction, mut m: impl FnMut(&[f64]) -> f64) -> GridFunction {
    let mut out = g.clone();
    out.fft_forward();
    let npts = g.npts;
    let mut xi = vec![0.0; g.n];
    for (flat, v) in out.data.iter_mut().enumerate() {
        let mut rem = flat;
        for d in (0..g.n).rev() {
            let i = rem % npts;
            rem /= npts;
            xi[d] = g.freq(i);
        }
        *v *= m(&xi);
    }
    out.fft_inverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_coords_and_h() {
        let g = GridFunction::zeros(2, 16, 4.0).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.coord(0), -3.75);
        assert_eq!(g.coord(15), 3.75);
        assert_eq!(g.nyquist(), std::f64::consts::PI / 0.5);
    }

    #[test]
    fn bad_params_rejected() {
        assert!(GridFunction::zeros(0, 16, 1.0).is_err());
        assert!(GridFunction::zeros(2, 12, 1.0).is_err());
        assert!(GridFunction::zeros(2, 4, 1.0).is_err());
        assert!(GridFunction::zeros(2, 16, 0.0).is_err());
    }

    #[test]
    fn fft_roundtrip() {
        let g = GridFunction::from_fn(2, 32, 2.0, |x| {
            Complex64::new((x[0] * 1.3).sin() + x[1], (x[0] * x[1]).cos())
        })
        .unwrap();
        let mut h = g.clone();
        h.fft_forward();
        h.fft_inverse();
        for (a, b) in g.data.iter().zip(&h.data) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn fft_of_plane_wave_is_a_spike() {
        // f(x) = exp(i xi . x) with xi on the grid lattice transforms to a
        // single bin.
        let npts = 32;
        let r = 4.0;
        let m = 3i64;
        let xi0 = std::f64::consts::PI * m as f64 / r;
        let mut g = GridFunction::from_fn(1, npts, r, |x| {
            Complex64::new(0.0, xi0 * x[0]).exp()
        })
        .unwrap();
        g.fft_forward();
        let mut spikes = 0;
        for i in 0..npts {
            let mag = g.data[i].norm();
            if mag > 1e-9 {
                spikes += 1;
                assert_eq!(g.freq_index(i), m);
                assert_abs_diff_eq!(mag, npts as f64, epsilon = 1e-9);
            }
        }
        assert_eq!(spikes, 1);
    }

    #[test]
    fn gfn1_roundtrip() {
        let g = GridFunction::from_fn(2, 8, 1.0, |x| Complex64::new(x[0], x[1] * 2.0)).unwrap();
        let mut buf = Vec::new();
        g.write_gfn1(&mut buf).unwrap();
        assert_eq!(&buf[0..4], GFN1_MAGIC);
        assert_eq!(buf.len(), 32 + 64 * 16);
        let h = GridFunction::read_gfn1(&mut buf.as_slice()).unwrap();
        assert_eq!(h.n, 2);
        assert_eq!(h.npts, 8);
        assert_eq!(h.r, 1.0);
        assert_eq!(g.data, h.data);

        // Real-only payload is half the size.
        let g = GridFunction::from_radial_fn(2, 8, 1.0, |r| (-r).exp()).unwrap();
        let mut buf = Vec::new();
        g.write_gfn1(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 64 * 8);
        let h = GridFunction::read_gfn1(&mut buf.as_slice()).unwrap();
        assert_eq!(g.data, h.data);
    }

    #[test]
    fn symmetry_deviation_zero_for_radial() {
        let g = GridFunction::from_radial_fn(2, 16, 2.0, |r| (-r * r).exp()).unwrap();
        assert_eq!(g.symmetry_deviation(), 0.0);
        let mut g2 = g.clone();
        g2.data[3] += Complex64::new(0.5, 0.0);
        assert!(g2.symmetry_deviation() > 0.1);
    }

    #[test]
    fn sup_outside_support() {
        let g = GridFunction::from_radial_fn(2, 32, 4.0, |r| if r < 1.0 { 1.0 } else { 0.0 })
            .unwrap();
        assert_eq!(g.sup_outside(1.0), 0.0);
        assert!(g.sup_outside(0.5) > 0.0);
    }
}
