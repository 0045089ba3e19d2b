//! Morrey, Sobolev-Morrey, Besov-type, Besov-Morrey, and classical Besov
//! norms of grid functions.
//!
//! Suprema over balls/cubes are truncated to finite families: dyadic-radius
//! balls centered at grid points, and corner-anchored dyadic subdivisions
//! of the domain cube.  The attaining ball/cube is reported as a witness so
//! truncation stays auditable.

use crate::grid::GridFunction;
use crate::lp::{lp_block, LPPair};
use crate::{Error, Result};
use serde::Serialize;

// ---------------------------------------------------------------------------
// Families and results
// ---------------------------------------------------------------------------

/// Finite family of balls: all grid points as centers (strided for the
/// `p = infinity` path), dyadic radii `2^m h`.
#[derive(Debug, Clone)]
pub struct BallFamily {
    /// Center stride in grid points (only the sup-norm path uses it).
    pub stride: usize,
    /// Radii, positive, largest should reach the domain diameter.
    pub radii: Vec<f64>,
}

impl BallFamily {
    /// Dyadic radii `2^m h` up to (at least) `2R sqrt(n)`, so the largest
    /// ball always contains the whole grid.
    pub fn default_for(f: &GridFunction) -> BallFamily {
        let h = f.h();
        let target = 2.0 * f.r * (f.n as f64).sqrt();
        let mut radii = Vec::new();
        let mut r = h;
        while r < target {
            radii.push(r);
            r *= 2.0;
        }
        radii.push(r);
        BallFamily {
            stride: (f.npts / 32).max(1),
            radii,
        }
    }

    /// Truncated family (drops the largest radii) for monotonicity tests.
    pub fn truncated(&self, keep: usize) -> BallFamily {
        BallFamily {
            stride: self.stride,
            radii: self.radii.iter().copied().take(keep.max(1)).collect(),
        }
    }
}

/// Corner-anchored dyadic subdivisions of the domain cube `[-R, R)^n`:
/// depth `d` cubes have side `2R / 2^d`.  Depth 0 is the whole domain.
#[derive(Debug, Clone)]
pub struct CubeFamily {
    pub n: usize,
    pub r: f64,
    pub depth: u32,
}

impl CubeFamily {
    pub fn default_for(f: &GridFunction) -> CubeFamily {
        // Finest cubes hold at least 4 grid points per axis.
        let depth = (f.npts.trailing_zeros()).saturating_sub(2);
        CubeFamily {
            n: f.n,
            r: f.r,
            depth,
        }
    }

    /// Side length at depth `d`.
    pub fn side(&self, d: u32) -> f64 {
        2.0 * self.r / (1u64 << d) as f64
    }

    /// `j_P = -log2(side)` of depth-`d` cubes (rounded to integer).
    pub fn j_p(&self, d: u32) -> i32 {
        -(self.side(d).log2().round() as i32)
    }

    /// Lower corner of cube `idx` at depth `d`.
    pub fn corner(&self, d: u32, idx: &[usize]) -> Vec<f64> {
        let s = self.side(d);
        idx.iter().map(|&i| -self.r + s * i as f64).collect()
    }

    /// Visit every cube as `(depth, flat_index)`; `cubes_at(d)` per-axis
    /// count is `2^d`.
    pub fn cubes_per_axis(&self, d: u32) -> usize {
        1usize << d
    }
}

/// Witness of the sup attaining member.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum Witness {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { corner: Vec<f64>, side: f64 },
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct Truncation {
    pub j_max: u32,
    /// Fraction of the attained value contributed by the `j = j_max` term.
    pub tail_fraction: f64,
    pub warn: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub witness: Witness,
    pub truncation: Option<Truncation>,
}

impl NormResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

fn check_p_le_u(p: f64, u: f64) -> Result<()> {
    if !(p > 0.0) || p > u {
        return Err(Error::ParameterOrder(format!(
            "need 0 < p <= u, got p = {p}, u = {u}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ball integrals via exact zero-padded convolution
// ---------------------------------------------------------------------------

/// For each grid point c, the sum of `w` over grid points within distance
/// `radius` of c (exact linear convolution with a clipped ball kernel).
fn ball_sums(w: &[f64], n: usize, npts: usize, h: f64, radius: f64) -> Vec<f64> {
    use num_complex::Complex64;
    use rustfft::FftPlanner;
    let m = 2 * npts; // zero padding: linear convolution, no wrap
    let len = m.pow(n as u32);
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    let mut k = vec![Complex64::new(0.0, 0.0); len];
    // Embed w.
    let mut idx = vec![0usize; n];
    for (flat, &v) in w.iter().enumerate() {
        let mut rem = flat;
        for d in (0..n).rev() {
            idx[d] = rem % npts;
            rem /= npts;
        }
        let mut pflat = 0usize;
        for d in 0..n {
            pflat = pflat * m + idx[d];
        }
        a[pflat].re = v;
    }
    // Kernel: indicator of |offset| <= radius, offsets clipped to
    // [-(npts-1), npts-1] (larger offsets never connect two grid points).
    let cap = ((radius / h).floor() as i64).min(npts as i64 - 1);
    let mut off = vec![-cap; n];
    loop {
        let d2: f64 = off.iter().map(|&o| (o as f64 * h).powi(2)).sum();
        if d2.sqrt() <= radius {
            let mut pflat = 0usize;
            for d in 0..n {
                pflat = pflat * m + off[d].rem_euclid(m as i64) as usize;
            }
            k[pflat].re = 1.0;
        }
        // odometer
        let mut d = n;
        loop {
            if d == 0 {
                break;
            }
            d -= 1;
            off[d] += 1;
            if off[d] <= cap {
                break;
            }
            off[d] = -cap;
            if d == 0 {
                // done
                d = usize::MAX;
                break;
            }
        }
        if d == usize::MAX {
            break;
        }
    }
    // FFT both, multiply, invert.
    let mut planner = FftPlanner::<f64>::new();
    fft_nd(&mut a, n, m, &mut planner, rustfft::FftDirection::Forward);
    fft_nd(&mut k, n, m, &mut planner, rustfft::FftDirection::Forward);
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= y;
    }
    fft_nd(&mut a, n, m, &mut planner, rustfft::FftDirection::Inverse);
    let scale = 1.0 / (m as f64).powi(n as i32);
    // Read out at original grid positions.
    let mut out = vec![0.0; w.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for d in (0..n).rev() {
            idx[d] = rem % npts;
            rem /= npts;
        }
        let mut pflat = 0usize;
        for d in 0..n {
            pflat = pflat * m + idx[d];
        }
        *o = (a[pflat].re * scale).max(0.0);
    }
    out
}

fn fft_nd(
    data: &mut [num_complex::Complex64],
    n: usize,
    m: usize,
    planner: &mut rustfft::FftPlanner<f64>,
    dir: rustfft::FftDirection,
) {
    let fft = planner.plan_fft(m, dir);
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); m];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let block = stride * m;
        let nblocks = data.len() / block;
        for b in 0..nblocks {
            for off in 0..stride {
                let base = b * block + off;
                for i in 0..m {
                    buf[i] = data[base + i * stride];
                }
                fft.process(&mut buf);
                for i in 0..m {
                    data[base + i * stride] = buf[i];
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Morrey
// ---------------------------------------------------------------------------

/// `sup_B |B|^{1/u - 1/p} (int_B |f|^p)^{1/p}` over the ball family.
pub fn morrey_norm(f: &GridFunction, p: f64, u: f64, fam: &BallFamily) -> Result<NormResult> {
    check_p_le_u(p, u)?;
    let hn = f.h().powi(f.n as i32);
    let omega_n = crate::unit_ball_volume(f.n);
    let mut best = 0.0f64;
    let mut witness = Witness::None;
    if p.is_infinite() {
        // Essential sup over the ball, strided centers.
        for &radius in &fam.radii {
            let vol = omega_n * radius.powi(f.n as i32);
            let wgt = if u.is_infinite() {
                1.0
            } else {
                vol.powf(1.0 / u)
            };
            for center_flat in strided_centers(f, fam.stride) {
                let s = ball_sup(f, center_flat, radius);
                let v = wgt * s;
                if v > best {
                    best = v;
                    witness = Witness::Ball {
                        center: flat_coords(f, center_flat),
                        radius,
                    };
                }
            }
        }
    } else {
        let w: Vec<f64> = f.data.iter().map(|v| v.norm().powf(p)).collect();
        for &radius in &fam.radii {
            let sums = ball_sums(&w, f.n, f.npts, f.h(), radius);
            let vol = omega_n * radius.powi(f.n as i32);
            let wgt = if u.is_infinite() {
                vol.powf(-1.0 / p)
            } else {
                vol.powf(1.0 / u - 1.0 / p)
            };
            let (i, &m) = sums
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            let v = wgt * (m * hn).powf(1.0 / p);
            if v > best {
                best = v;
                witness = Witness::Ball {
                    center: flat_coords(f, i),
                    radius,
                };
            }
        }
    }
    Ok(NormResult {
        value: best,
        witness,
        truncation: None,
    })
}

fn strided_centers(f: &GridFunction, stride: usize) -> Vec<usize> {
    let npts = f.npts;
    let mut centers = Vec::new();
    let mut idx = vec![0usize; f.n];
    loop {
        centers.push(f.flat(&idx));
        let mut d = f.n;
        loop {
            if d == 0 {
                return centers;
            }
            d -= 1;
            idx[d] += stride;
            if idx[d] < npts {
                break;
            }
            idx[d] = 0;
            if d == 0 {
                return centers;
            }
        }
    }
}

fn flat_coords(f: &GridFunction, flat: usize) -> Vec<f64> {
    let mut rem = flat;
    let mut x = vec![0.0; f.n];
    for d in (0..f.n).rev() {
        x[d] = f.coord(rem % f.npts);
        rem /= f.npts;
    }
    x
}

fn ball_sup(f: &GridFunction, center_flat: usize, radius: f64) -> f64 {
    let c = flat_coords(f, center_flat);
    let h = f.h();
    let cap = (radius / h).ceil() as i64;
    let npts = f.npts as i64;
    let mut rem = center_flat;
    let mut ci = vec![0i64; f.n];
    for d in (0..f.n).rev() {
        ci[d] = (rem % f.npts) as i64;
        rem /= f.npts;
    }
    let mut best = 0.0f64;
    let mut off = vec![-cap; f.n];
    loop {
        let mut ok = true;
        let mut d2 = 0.0;
        let mut pflat = 0usize;
        for d in 0..f.n {
            let i = ci[d] + off[d];
            if i < 0 || i >= npts {
                ok = false;
                break;
            }
            let x = f.coord(i as usize);
            d2 += (x - c[d]) * (x - c[d]);
            pflat = pflat * f.npts + i as usize;
        }
        if ok && d2.sqrt() <= radius {
            best = best.max(f.data[pflat].norm());
        }
        let mut d = f.n;
        loop {
            if d == 0 {
                return best;
            }
            d -= 1;
            off[d] += 1;
            if off[d] <= cap {
                break;
            }
            off[d] = -cap;
            if d == 0 {
                return best;
            }
        }
    }
}

/// Plain grid L^p norm (midpoint quadrature); `p = infinity` is the sup.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    if p.is_infinite() {
        return f.sup_norm();
    }
    let hn = f.h().powi(f.n as i32);
    (f.data.iter().map(|v| v.norm().powf(p)).sum::<f64>() * hn).powf(1.0 / p)
}

// ---------------------------------------------------------------------------
// Sobolev-Morrey
// ---------------------------------------------------------------------------

/// Central difference along `axis` (periodic indexing; inputs are assumed
/// to vanish near the boundary).
pub fn central_diff(f: &GridFunction, axis: usize) -> GridFunction {
    let mut out = f.clone();
    let npts = f.npts;
    let h = f.h();
    let stride = npts.pow((f.n - 1 - axis) as u32);
    let block = stride * npts;
    for b in 0..(f.data.len() / block) {
        for off in 0..stride {
            let base = b * block + off;
            for i in 0..npts {
                let ip = (i + 1) % npts;
                let im = (i + npts - 1) % npts;
                out.data[base + i * stride] =
                    (f.data[base + ip * stride] - f.data[base + im * stride]) / (2.0 * h);
            }
        }
    }
    out
}

/// All multi-indices `alpha` with `|alpha| <= max_order`, sorted.
pub fn all_multi_indices(n: usize, max_order: usize) -> Vec<Vec<usize>> {
    multi_indices(n, max_order)
}

fn multi_indices(n: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n]];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for a in &out {
            for d in 0..n {
                let mut b = a.clone();
                b[d] += 1;
                if !next.contains(&b) {
                    next.push(b);
                }
            }
        }
        out.extend(next);
    }
    out.sort();
    out.dedup();
    out.retain(|a| a.iter().sum::<usize>() <= max_order);
    out
}

pub fn derivative(f: &GridFunction, alpha: &[usize]) -> GridFunction {
    let mut g = f.clone();
    for (axis, &ord) in alpha.iter().enumerate() {
        for _ in 0..ord {
            g = central_diff(&g, axis);
        }
    }
    g
}

/// `sum_{|alpha| <= m} || D^alpha f ||_{M^u_p}`.
pub fn sobolev_morrey_norm(
    f: &GridFunction,
    m: usize,
    p: f64,
    u: f64,
    fam: &BallFamily,
) -> Result<NormResult> {
    check_p_le_u(p, u)?;
    let mut total = 0.0;
    let mut witness = Witness::None;
    let mut best_term = -1.0;
    for alpha in multi_indices(f.n, m) {
        let g = derivative(f, &alpha);
        let r = morrey_norm(&g, p, u, fam)?;
        if r.value > best_term {
            best_term = r.value;
            witness = r.witness;
        }
        total += r.value;
    }
    Ok(NormResult {
        value: total,
        witness,
        truncation: None,
    })
}

// ---------------------------------------------------------------------------
// Besov-type
// ---------------------------------------------------------------------------

/// n-dimensional inclusive prefix sums (in place).
fn prefix_sums(w: &mut [f64], n: usize, npts: usize) {
    for axis in 0..n {
        let stride = npts.pow((n - 1 - axis) as u32);
        let block = stride * npts;
        for b in 0..(w.len() / block) {
            for off in 0..stride {
                let base = b * block + off;
                for i in 1..npts {
                    w[base + i * stride] += w[base + (i - 1) * stride];
                }
            }
        }
    }
}

/// Sum of `w` over the index box `[a, b)` per axis, from prefix sums.
fn box_sum(ps: &[f64], n: usize, npts: usize, a: &[usize], b: &[usize]) -> f64 {
    // Inclusion-exclusion over corners; index -1 contributes 0.
    let mut total = 0.0;
    for mask in 0..(1u32 << n) {
        let mut sign = 1.0;
        let mut flat = 0usize;
        let mut skip = false;
        for d in 0..n {
            let hi = if mask & (1 << d) == 0 {
                b[d] as i64 - 1
            } else {
                sign = -sign;
                a[d] as i64 - 1
            };
            if hi < 0 {
                skip = true;
                break;
            }
            flat = flat * npts + hi as usize;
        }
        if !skip {
            total += sign * ps[flat];
        }
    }
    total
}

/// Per-level data reused across cubes: either prefix sums of `|g_j|^p`
/// (finite p) or a max-pooling pyramid (p = infinity).
enum BlockField {
    Prefix(Vec<f64>),
    MaxPyramid(Vec<Vec<f64>>), // [depth] -> per-cube max, depth 0 = whole domain
}

fn block_field(g: &GridFunction, p: f64, depth: u32) -> BlockField {
    if p.is_infinite() {
        // Finest level: max per finest cube, then pool up.
        let fine = 1usize << depth;
        let cell = g.npts / fine;
        let mut levels: Vec<Vec<f64>> = Vec::with_capacity(depth as usize + 1);
        let mut finest = vec![0.0f64; fine.pow(g.n as u32)];
        let npts = g.npts;
        let mut idx = vec![0usize; g.n];
        for (flat, v) in g.data.iter().enumerate() {
            let mut rem = flat;
            for d in (0..g.n).rev() {
                idx[d] = rem % npts;
                rem /= npts;
            }
            let mut cflat = 0usize;
            for d in 0..g.n {
                cflat = cflat * fine + idx[d] / cell;
            }
            let m = v.norm();
            if m > finest[cflat] {
                finest[cflat] = m;
            }
        }
        levels.push(finest);
        // Pool upward: level d has 2^d cubes per axis.
        for d in (0..depth).rev() {
            let coarse = 1usize << d;
            let finer = coarse * 2;
            let prev = levels.last().unwrap();
            let mut cur = vec![0.0f64; coarse.pow(g.n as u32)];
            let mut idx = vec![0usize; g.n];
            for (flat, v) in prev.iter().enumerate() {
                let mut rem = flat;
                for dd in (0..g.n).rev() {
                    idx[dd] = rem % finer;
                    rem /= finer;
                }
                let mut cflat = 0usize;
                for dd in 0..g.n {
                    cflat = cflat * coarse + idx[dd] / 2;
                }
                if *v > cur[cflat] {
                    cur[cflat] = *v;
                }
            }
            levels.push(cur);
        }
        levels.reverse(); // now levels[d] matches depth d
        BlockField::MaxPyramid(levels)
    } else {
        let mut w: Vec<f64> = g.data.iter().map(|v| v.norm().powf(p)).collect();
        prefix_sums(&mut w, g.n, g.npts);
        BlockField::Prefix(w)
    }
}

impl BlockField {
    /// `(int_P |g|^p)^{1/p}` (or `sup_P |g|` for infinite p) for the cube
    /// at `depth, idx` on a grid with `npts` points and spacing `h`.
    fn cube_lp(&self, n: usize, npts: usize, h: f64, depth: u32, idx: &[usize], p: f64) -> f64 {
        match self {
            BlockField::MaxPyramid(levels) => {
                let per = 1usize << depth;
                let mut flat = 0usize;
                for d in 0..n {
                    flat = flat * per + idx[d];
                }
                levels[depth as usize][flat]
            }
            BlockField::Prefix(ps) => {
                let cell = npts / (1usize << depth);
                let a: Vec<usize> = idx.iter().map(|&i| i * cell).collect();
                let b: Vec<usize> = idx.iter().map(|&i| (i + 1) * cell).collect();
                let s = box_sum(ps, n, npts, &a, &b).max(0.0);
                (s * h.powi(n as i32)).powf(1.0 / p)
            }
        }
    }
}

/// Besov-type norm
/// `sup_P |P|^{-tau} ( sum_{j >= max(j_P, 0)}^{j_max} 2^{jsq} (int_P |phi_j * f|^p)^{q/p} )^{1/q}`.
pub fn besov_type_norm(
    f: &GridFunction,
    s: f64,
    tau: f64,
    p: f64,
    q: f64,
    pair: &LPPair,
    cubes: &CubeFamily,
    j_max: u32,
) -> Result<NormResult> {
    let blocks: Vec<BlockField> = (0..=j_max)
        .map(|j| lp_block(f, j, pair).map(|g| block_field(&g, p, cubes.depth)))
        .collect::<Result<_>>()?;
    let n = f.n;
    let npts = f.npts;
    let h = f.h();

    let mut best = 0.0f64;
    let mut best_cube: Option<(u32, Vec<usize>)> = None;
    let mut best_tail = 0.0f64;

    for d in 0..=cubes.depth {
        let per = cubes.cubes_per_axis(d);
        let j_lo = cubes.j_p(d).max(0) as u32;
        if j_lo > j_max {
            continue;
        }
        let vol = cubes.side(d).powi(n as i32);
        let wgt = vol.powf(-tau);
        let mut idx = vec![0usize; n];
        'cube: loop {
            // aggregate over j
            let mut val;
            let tail;
            if q.is_infinite() {
                let mut m = 0.0f64;
                let mut last = 0.0f64;
                for j in j_lo..=j_max {
                    let lp = blocks[j as usize].cube_lp(n, npts, h, d, &idx, p);
                    let term = (2.0f64).powf(j as f64 * s) * lp;
                    if term > m {
                        m = term;
                    }
                    if j == j_max {
                        last = term;
                    }
                }
                val = m;
                tail = if m > 0.0 { last / m } else { 0.0 };
            } else {
                let mut acc = 0.0f64;
                let mut last = 0.0f64;
                for j in j_lo..=j_max {
                    let lp = blocks[j as usize].cube_lp(n, npts, h, d, &idx, p);
                    let term = ((2.0f64).powf(j as f64 * s) * lp).powf(q);
                    acc += term;
                    if j == j_max {
                        last = term;
                    }
                }
                val = acc.powf(1.0 / q);
                tail = if acc > 0.0 { last / acc } else { 0.0 };
            }
            val *= wgt;
            if val > best {
                best = val;
                best_cube = Some((d, idx.clone()));
                best_tail = tail;
            }
            // odometer over cube indices
            let mut dd = n;
            loop {
                if dd == 0 {
                    break 'cube;
                }
                dd -= 1;
                idx[dd] += 1;
                if idx[dd] < per {
                    break;
                }
                idx[dd] = 0;
                if dd == 0 {
                    break 'cube;
                }
            }
        }
    }

    let witness = match &best_cube {
        Some((d, idx)) => Witness::Cube {
            corner: cubes.corner(*d, idx),
            side: cubes.side(*d),
        },
        None => Witness::None,
    };
    Ok(NormResult {
        value: best,
        witness,
        truncation: Some(Truncation {
            j_max,
            tail_fraction: best_tail,
            warn: best_tail > 0.01,
        }),
    })
}

/// Independent classical Besov norm oracle: plain sum over `j >= 0` of
/// global block L^p norms (direct quadrature, no cube machinery).
pub fn classical_besov_norm(
    f: &GridFunction,
    s: f64,
    p: f64,
    q: f64,
    pair: &LPPair,
    j_max: u32,
) -> Result<f64> {
    let mut terms = Vec::new();
    for j in 0..=j_max {
        let g = lp_block(f, j, pair)?;
        terms.push((2.0f64).powf(j as f64 * s) * lp_norm(&g, p));
    }
    Ok(if q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

// ---------------------------------------------------------------------------
// Besov-Morrey
// ---------------------------------------------------------------------------

/// `( sum_j 2^{jsq} || phi_j * f ||_{M^u_p}^q )^{1/q}`.
pub fn besov_morrey_norm(
    f: &GridFunction,
    s: f64,
    u: f64,
    p: f64,
    q: f64,
    pair: &LPPair,
    fam: &BallFamily,
    j_max: u32,
) -> Result<NormResult> {
    check_p_le_u(p, u)?;
    let mut terms = Vec::new();
    let mut witness = Witness::None;
    let mut best_term = -1.0;
    for j in 0..=j_max {
        let g = lp_block(f, j, pair)?;
        let r = morrey_norm(&g, p, u, fam)?;
        let t = (2.0f64).powf(j as f64 * s) * r.value;
        if t > best_term {
            best_term = t;
            witness = r.witness;
        }
        terms.push(t);
    }
    let value = if q.is_infinite() {
        terms.iter().copied().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    };
    let last = *terms.last().unwrap();
    let tail = if q.is_infinite() {
        if value > 0.0 {
            last / value
        } else {
            0.0
        }
    } else if value > 0.0 {
        (last / value).powf(q)
    } else {
        0.0
    };
    Ok(NormResult {
        value,
        witness,
        truncation: Some(Truncation {
            j_max,
            tail_fraction: tail,
            warn: tail > 0.01,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{make_lp_pair, random_band_limited, random_band_limited_radial};
    use rand::SeedableRng;

    fn test_fn(seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        random_band_limited(2, 64, 8.0, 3.0, &mut rng)
    }

    #[test]
    fn morrey_equals_lp_when_u_is_p() {
        let f = test_fn(1);
        let fam = BallFamily::default_for(&f);
        for p in [1.0, 2.0, 4.0] {
            let m = morrey_norm(&f, p, p, &fam).unwrap().value;
            let l = lp_norm(&f, p);
            assert!((m - l).abs() / l <= 1e-12, "p={p}: {m} vs {l}");
        }
    }

    #[test]
    fn morrey_zero_homogeneity_and_order() {
        let f = test_fn(2);
        let fam = BallFamily::default_for(&f);
        let zero = GridFunction::zeros(2, 64, 8.0).unwrap();
        assert_eq!(morrey_norm(&zero, 2.0, 4.0, &fam).unwrap().value, 0.0);
        let m1 = morrey_norm(&f, 2.0, 4.0, &fam).unwrap().value;
        let mut f2 = f.clone();
        for v in &mut f2.data {
            *v *= 2.0;
        }
        let m2 = morrey_norm(&f2, 2.0, 4.0, &fam).unwrap().value;
        assert!((m2 - 2.0 * m1).abs() <= 1e-12 * m1);
        // p > u rejected.
        assert!(morrey_norm(&f, 4.0, 2.0, &fam).is_err());
        // Enlarging the family can only grow the sup.
        let small = fam.truncated(3);
        let ms = morrey_norm(&f, 2.0, 4.0, &small).unwrap().value;
        assert!(ms <= m1 + 1e-15);
    }

    #[test]
    fn morrey_holder_monotonicity_in_p() {
        // Per-ball Hölder: |B|^{1/u-1/p}(int_B |f|^p)^{1/p} <=
        // |B|^{1/u-1/w}(int_B |f|^w)^{1/w} for p <= w (as computed).
        let f = test_fn(3);
        let fam = BallFamily::default_for(&f);
        let (p, w, u) = (1.5, 3.0, 4.0);
        let mp = morrey_norm(&f, p, u, &fam).unwrap().value;
        let mw = morrey_norm(&f, w, u, &fam).unwrap().value;
        // kappa = 1 on the grid: quadrature satisfies Hölder exactly.
        assert!(mp <= mw * 1.000001, "{mp} vs {mw}");
    }

    #[test]
    fn morrey_sup_path() {
        let f = test_fn(4);
        let fam = BallFamily {
            stride: 8,
            radii: BallFamily::default_for(&f).radii,
        };
        let m = morrey_norm(&f, f64::INFINITY, f64::INFINITY, &fam).unwrap();
        assert!((m.value - f.sup_norm()).abs() <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn sobolev_morrey_m0_and_w12() {
        let f = test_fn(5);
        let fam = BallFamily::default_for(&f);
        let a = sobolev_morrey_norm(&f, 0, 2.0, 4.0, &fam).unwrap().value;
        let b = morrey_norm(&f, 2.0, 4.0, &fam).unwrap().value;
        assert_eq!(a, b);

        // m=1, p=u=2 equals L2 of f plus the two gradient components.
        let w12 = sobolev_morrey_norm(&f, 1, 2.0, 2.0, &fam).unwrap().value;
        let direct = lp_norm(&f, 2.0)
            + lp_norm(&central_diff(&f, 0), 2.0)
            + lp_norm(&central_diff(&f, 1), 2.0);
        assert!((w12 - direct).abs() / direct <= 2e-2, "{w12} vs {direct}");
    }

    #[test]
    fn besov_type_tau0_matches_classical() {
        let pair = make_lp_pair();
        let f = test_fn(6);
        let cubes = CubeFamily::default_for(&f);
        let j_max = pair.max_level(f.h()) as u32;
        for (s, p, q) in [(1.0, 2.0, 2.0), (0.5, 2.0, 1.0), (1.5, 3.0, f64::INFINITY)] {
            let bt = besov_type_norm(&f, s, 0.0, p, q, &pair, &cubes, j_max)
                .unwrap()
                .value;
            let cb = classical_besov_norm(&f, s, p, q, &pair, j_max).unwrap();
            assert!(
                (bt - cb).abs() / cb <= 1e-10,
                "(s,p,q)=({s},{p},{q}): {bt} vs {cb}"
            );
        }
    }

    #[test]
    fn besov_type_zero_and_homogeneity() {
        let pair = make_lp_pair();
        let zero = GridFunction::zeros(2, 32, 4.0).unwrap();
        let cubes = CubeFamily::default_for(&zero);
        let r = besov_type_norm(&zero, 1.0, 0.25, 2.0, 2.0, &pair, &cubes, 2).unwrap();
        assert_eq!(r.value, 0.0);

        let f = test_fn(7);
        let cubes = CubeFamily::default_for(&f);
        let jm = pair.max_level(f.h()) as u32;
        let v1 = besov_type_norm(&f, 1.0, 0.25, 2.0, 2.0, &pair, &cubes, jm)
            .unwrap()
            .value;
        let mut f3 = f.clone();
        for v in &mut f3.data {
            *v *= -3.0;
        }
        let v3 = besov_type_norm(&f3, 1.0, 0.25, 2.0, 2.0, &pair, &cubes, jm)
            .unwrap()
            .value;
        assert!((v3 - 3.0 * v1).abs() <= 1e-9 * v1);
    }

    #[test]
    fn besov_type_monotone_in_s_and_q() {
        let pair = make_lp_pair();
        let f = test_fn(8);
        let cubes = CubeFamily::default_for(&f);
        let jm = pair.max_level(f.h()) as u32;
        let hi_s = besov_type_norm(&f, 1.2, 0.1, 2.0, 2.0, &pair, &cubes, jm)
            .unwrap()
            .value;
        let lo_s = besov_type_norm(&f, 0.8, 0.1, 2.0, 2.0, &pair, &cubes, jm)
            .unwrap()
            .value;
        assert!(lo_s <= hi_s * 1.0000001);
        // Nonincreasing in q.
        let q1 = besov_type_norm(&f, 1.0, 0.1, 2.0, 1.0, &pair, &cubes, jm)
            .unwrap()
            .value;
        let q2 = besov_type_norm(&f, 1.0, 0.1, 2.0, 2.0, &pair, &cubes, jm)
            .unwrap()
            .value;
        let qi = besov_type_norm(&f, 1.0, 0.1, 2.0, f64::INFINITY, &pair, &cubes, jm)
            .unwrap()
            .value;
        assert!(q2 <= q1 * 1.0000001 && qi <= q2 * 1.0000001);
    }

    #[test]
    fn besov_morrey_u_equals_p_matches_classical() {
        let pair = make_lp_pair();
        let f = test_fn(9);
        let fam = BallFamily::default_for(&f);
        let jm = pair.max_level(f.h()) as u32;
        let bm = besov_morrey_norm(&f, 1.0, 2.0, 2.0, 2.0, &pair, &fam, jm)
            .unwrap()
            .value;
        let cb = classical_besov_norm(&f, 1.0, 2.0, 2.0, &pair, jm).unwrap();
        assert!((bm - cb).abs() / cb <= 1e-10, "{bm} vs {cb}");
    }

    #[test]
    fn besov_morrey_qinf_vs_besov_type() {
        // Lemma-level equality N^s_{u,p,inf} = B^{s,1/p-1/u}_{p,inf}: the
        // computed ratio stays in a modest interval.
        let pair = make_lp_pair();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let (p, u) = (2.0, 4.0);
        for _ in 0..3 {
            let f = random_band_limited_radial(2, 64, 8.0, 3.0, &mut rng);
            let jm = pair.max_level(f.h()) as u32;
            let fam = BallFamily::default_for(&f);
            let cubes = CubeFamily::default_for(&f);
            let bm = besov_morrey_norm(&f, 0.7, u, p, f64::INFINITY, &pair, &fam, jm)
                .unwrap()
                .value;
            let bt = besov_type_norm(&f, 0.7, 1.0 / p - 1.0 / u, p, f64::INFINITY, &pair, &cubes, jm)
                .unwrap()
                .value;
            let ratio = bm / bt;
            assert!(ratio > 0.1 && ratio < 10.0, "ratio {ratio}");
        }
    }

    #[test]
    fn lemma26i_lower_bound() {
        // besov_morrey >= c * besov_type at tau = 1/p - 1/u, q < inf.
        let pair = make_lp_pair();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let (p, u, q, s) = (2.0, 4.0, 2.0, 0.5);
        let mut min_ratio = f64::INFINITY;
        for _ in 0..5 {
            let f = random_band_limited(2, 64, 8.0, 3.0, &mut rng);
            let jm = pair.max_level(f.h()) as u32;
            let fam = BallFamily::default_for(&f);
            let cubes = CubeFamily::default_for(&f);
            let bm = besov_morrey_norm(&f, s, u, p, q, &pair, &fam, jm).unwrap().value;
            let bt = besov_type_norm(&f, s, 1.0 / p - 1.0 / u, p, q, &pair, &cubes, jm)
                .unwrap()
                .value;
            min_ratio = min_ratio.min(bm / bt);
        }
        assert!(min_ratio > 0.01, "module constant c collapsed: {min_ratio}");
    }
}
