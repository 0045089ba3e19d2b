//! Dyadic cubes, shells, and the radial regular covering.
//!
//! The covering tiles each dyadic shell `P_{j,k} = {k 2^-j <= |x| < (k+1) 2^-j}`
//! with congruent closed balls of radius `6 * 2^-j` whose centers sit on the
//! mid-sphere of the shell.  In the plane a ring carries `2k+1` equally
//! spaced centers; in higher dimensions centers are placed on latitude
//! bands.  Level `j` is the exact `2^-j`-dilate of level `0`.

use crate::{unit_ball_volume, Error, Result};
use serde::{Deserialize, Serialize};

/// Ball radius of a level-0 covering cell, in units of the shell width.
pub const CELL_RADIUS_UNITS: f64 = 6.0;

/// Default cap on the total number of covering cells.
pub const DEFAULT_CELL_BUDGET: u64 = 20_000_000;

/// Arc spacing (in units of `2^-j`) of the latitude-band placement, n >= 3.
const BAND_SPACING: f64 = 2.0;

// ---------------------------------------------------------------------------
// Basic shapes
// ---------------------------------------------------------------------------

/// Dyadic cube `2^{-level}([0,1)^n + index)`, side length `2^{-level}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub index: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: i32, index: Vec<i64>) -> Self {
        DyadicCube { level, index }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Side length `l(Q) = 2^{-level}`.
    pub fn side(&self) -> f64 {
        (2.0f64).powi(-self.level)
    }

    /// `j_Q = -log2 l(Q)`, exact.
    pub fn j_q(&self) -> i32 {
        self.level
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim() as i32)
    }

    /// Lower corner coordinates.
    pub fn corner(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&k| s * k as f64).collect()
    }

    /// Half-open membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.index
            .iter()
            .zip(x)
            .all(|(&k, &xi)| xi >= s * k as f64 && xi < s * (k as f64 + 1.0))
    }

    /// Is `self` contained in `other` (as closed sets of the lattice)?
    pub fn subset_of(&self, other: &DyadicCube) -> bool {
        if self.level < other.level {
            return false;
        }
        let shift = self.level - other.level;
        self.index
            .iter()
            .zip(&other.index)
            .all(|(&k, &m)| (k >> shift) == m)
    }

    /// Euclidean distance from a point to the closed cube.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let s = self.side();
        let mut d2 = 0.0;
        for (&k, &xi) in self.index.iter().zip(x) {
            let lo = s * k as f64;
            let hi = s * (k as f64 + 1.0);
            let c = xi.clamp(lo, hi);
            d2 += (xi - c) * (xi - c);
        }
        d2.sqrt()
    }

    /// Range of distances from the origin to the closed cube: `(min, max)`.
    pub fn origin_distance_range(&self) -> (f64, f64) {
        let s = self.side();
        let mut dmin2 = 0.0;
        let mut dmax2 = 0.0;
        for &k in &self.index {
            let lo = s * k as f64;
            let hi = s * (k as f64 + 1.0);
            let c = (0.0f64).clamp(lo, hi);
            dmin2 += c * c;
            dmax2 += lo.abs().max(hi.abs()).powi(2);
        }
        (dmin2.sqrt(), dmax2.sqrt())
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Ball { center, radius }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(&self.center, x) <= self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Dyadic shell `{x : k 2^-j <= |x| < (k+1) 2^-j}` (a ball when `k = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shell {
    pub j: u32,
    pub k: u32,
}

impl Shell {
    pub fn inner_radius(&self) -> f64 {
        self.k as f64 * (2.0f64).powi(-(self.j as i32))
    }

    pub fn outer_radius(&self) -> f64 {
        (self.k as f64 + 1.0) * (2.0f64).powi(-(self.j as i32))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        r >= self.inner_radius() && r < self.outer_radius()
    }
}

/// Euclidean distance from a point to a closed axis-aligned box.
pub fn box_distance(corner: &[f64], side: f64, x: &[f64]) -> f64 {
    let mut d2 = 0.0;
    for (&lo, &xi) in corner.iter().zip(x) {
        let c = xi.clamp(lo, lo + side);
        d2 += (xi - c) * (xi - c);
    }
    d2.sqrt()
}

/// Range of distances from the origin to a closed box: `(min, max)`.
pub fn box_origin_distance_range(corner: &[f64], side: f64) -> (f64, f64) {
    let mut dmin2 = 0.0;
    let mut dmax2 = 0.0;
    for &lo in corner {
        let hi = lo + side;
        let c = (0.0f64).clamp(lo, hi);
        dmin2 += c * c;
        dmax2 += lo.abs().max(hi.abs()).powi(2);
    }
    (dmin2.sqrt(), dmax2.sqrt())
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Rings and the radial covering
// ---------------------------------------------------------------------------

/// One ring of the covering: the balls tiling shell `(j, k)`.
///
/// Centers are stored flat with stride `n`; all have norm `(k + 1/2) 2^-j`
/// (for `k >= 1`; the `k = 0` ring is the single ball centered at the
/// origin).  The common ball radius is `6 * 2^-j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ring {
    pub n: usize,
    pub j: u32,
    pub k: u32,
    pub radius: f64,
    centers: Vec<f64>,
}

impl Ring {
    /// Build ring `(j, k)` of the standard covering in dimension `n`.
    pub fn build(n: usize, j: u32, k: u32) -> Result<Ring> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let scale = (2.0f64).powi(-(j as i32));
        let unit = unit_ring_centers(n, k);
        let centers = unit.iter().map(|c| c * scale).collect();
        Ok(Ring {
            n,
            j,
            k,
            radius: CELL_RADIUS_UNITS * scale,
            centers,
        })
    }

    pub fn count(&self) -> usize {
        self.centers.len() / self.n
    }

    /// Center of cell `l` (1-based, matching the enumeration of the rings).
    pub fn center(&self, l: usize) -> &[f64] {
        let i = l - 1;
        &self.centers[i * self.n..(i + 1) * self.n]
    }

    pub fn ball(&self, l: usize) -> Ball {
        Ball::new(self.center(l).to_vec(), self.radius)
    }

    /// Norm of the ring's center sphere: `(k + 1/2) 2^-j`, or 0 for k = 0.
    pub fn center_norm(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            (self.k as f64 + 0.5) * (2.0f64).powi(-(self.j as i32))
        }
    }

    /// Indices `l` whose ball contains `x` (with angular pruning for n = 2).
    pub fn cells_containing(&self, x: &[f64]) -> Vec<usize> {
        self.cells_containing_inflated(x, 0.0)
    }

    /// Cells whose ball, inflated by `extra`, contains `x`.
    pub fn cells_containing_inflated(&self, x: &[f64], extra: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_candidates_within(x, extra, |l, c| {
            if dist(c, x) <= self.radius + extra {
                out.push(l);
            }
        });
        out
    }

    pub fn covers(&self, x: &[f64]) -> bool {
        let mut hit = false;
        self.for_candidates(x, |_, c| {
            if !hit && dist(c, x) <= self.radius {
                hit = true;
            }
        });
        hit
    }

    /// Count of cells whose closed ball meets the closed cube `p`.
    pub fn cells_meeting_cube(&self, p: &DyadicCube) -> usize {
        self.cells_meeting_box(&p.corner(), p.side()).len()
    }

    /// Indices of cells whose closed ball meets the closed axis-aligned
    /// box with the given lower corner and side length.
    pub fn cells_meeting_box(&self, corner: &[f64], side: f64) -> Vec<usize> {
        // Quick reject on the radial interval reachable by this ring.
        let (dmin, dmax) = box_origin_distance_range(corner, side);
        let rho = self.center_norm();
        if rho - self.radius > dmax || rho + self.radius < dmin {
            return Vec::new();
        }
        (1..=self.count())
            .filter(|&l| box_distance(corner, side, self.center(l)) <= self.radius)
            .collect()
    }

    /// Visit candidate cells near point `x`; visits all cells except when
    /// the planar angular window applies.
    fn for_candidates(&self, x: &[f64], visit: impl FnMut(usize, &[f64])) {
        self.for_candidates_within(x, 0.0, visit);
    }

    /// Candidate visitor for balls inflated by `extra`.
    fn for_candidates_within(&self, x: &[f64], extra: f64, mut visit: impl FnMut(usize, &[f64])) {
        let count = self.count();
        let rho = self.center_norm();
        let r = norm(x);
        let reach = self.radius + extra;
        // Radial reject: the ring's balls live in |y| within reach of rho.
        if (r - rho).abs() > reach {
            return;
        }
        if self.n == 2 && self.k >= 1 && count > 32 && rho > 2.0 * reach {
            // Angular window: |angle(x) - angle(center)| small when the
            // chord |x - c| <= reach and both points are far from origin.
            let half = 2.0 * (reach / (2.0 * (rho - reach))).min(1.0).asin() + 1e-9;
            let alpha = x[1].atan2(x[0]);
            let step = 2.0 * std::f64::consts::PI / count as f64;
            let center_idx = alpha / step; // center l-1 sits at angle (l-1)*step
            let w = (half / step).ceil() as i64 + 1;
            let c0 = center_idx.round() as i64;
            for d in -w..=w {
                let i = (c0 + d).rem_euclid(count as i64) as usize;
                visit(i + 1, self.center(i + 1));
            }
        } else {
            for l in 1..=count {
                visit(l, self.center(l));
            }
        }
    }
}

/// Number of balls in ring `(n, k)`: 1 if `k = 0`, `2k+1` in the plane,
/// and the latitude-band count otherwise.  `C(n,k) ~ k^{n-1}`.
pub fn ring_count(n: usize, k: u32) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if k == 0 {
        return Ok(1);
    }
    if n == 2 {
        return Ok(2 * k as usize + 1);
    }
    Ok(latitude_band_counts(n, k).iter().sum::<usize>() + 2)
}

/// Empirically frozen bounds `[c1, c2]` for `ring_count(n, k) / k^{n-1}`,
/// valid for `1 <= k <= 1000`.
pub fn ring_count_bounds(n: usize) -> (f64, f64) {
    match n {
        2 => (2.0, 3.0),
        3 => (1.9, 15.0),
        _ => (0.5, 64.0),
    }
}

fn latitude_band_counts(n: usize, k: u32) -> Vec<usize> {
    assert!(n == 3, "latitude-band placement implemented for n = 3");
    let rho = k as f64 + 0.5;
    let m_theta = ((std::f64::consts::PI * rho) / BAND_SPACING).ceil().max(1.0) as usize;
    (0..m_theta)
        .map(|i| {
            let theta = (i as f64 + 0.5) * std::f64::consts::PI / m_theta as f64;
            let circ = 2.0 * std::f64::consts::PI * rho * theta.sin();
            (circ / BAND_SPACING).ceil().max(1.0) as usize
        })
        .collect()
}

/// Level-0 centers of ring `k`, flat with stride `n`.  Cell `l = 1` is
/// always the axis cell centered at `((k + 1/2), 0, ..., 0)`.
fn unit_ring_centers(n: usize, k: u32) -> Vec<f64> {
    if k == 0 {
        return vec![0.0; n];
    }
    let rho = k as f64 + 0.5;
    match n {
        2 => {
            let count = 2 * k as usize + 1;
            let mut out = Vec::with_capacity(2 * count);
            for l in 0..count {
                let a = 2.0 * std::f64::consts::PI * l as f64 / count as f64;
                out.push(rho * a.cos());
                out.push(rho * a.sin());
            }
            out
        }
        3 => {
            // Axis cells first so that l = 1 covers the positive x1-axis.
            let mut out = vec![rho, 0.0, 0.0, -rho, 0.0, 0.0];
            let counts = latitude_band_counts(n, k);
            let m_theta = counts.len();
            for (i, &m_phi) in counts.iter().enumerate() {
                let theta = (i as f64 + 0.5) * std::f64::consts::PI / m_theta as f64;
                for t in 0..m_phi {
                    let phi = 2.0 * std::f64::consts::PI * t as f64 / m_phi as f64;
                    out.push(rho * theta.cos());
                    out.push(rho * theta.sin() * phi.cos());
                    out.push(rho * theta.sin() * phi.sin());
                }
            }
            out
        }
        _ => panic!("covering placement implemented for n in {{2, 3}}"),
    }
}

/// The radial regular covering: rings `(j, k)` for `j <= j_max`,
/// `k <= k_max`, each the exact `2^-j`-dilate of its level-0 ring.
#[derive(Debug, Clone)]
pub struct RadialCovering {
    pub n: usize,
    pub j_max: u32,
    pub k_max: u32,
    rings: Vec<Vec<Ring>>, // [j][k]
}

impl RadialCovering {
    pub fn build(n: usize, j_max: u32, k_max: u32) -> Result<RadialCovering> {
        Self::build_with_budget(n, j_max, k_max, DEFAULT_CELL_BUDGET)
    }

    pub fn build_with_budget(
        n: usize,
        j_max: u32,
        k_max: u32,
        budget: u64,
    ) -> Result<RadialCovering> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        assert!(k_max >= 1, "need k_max >= 1");
        let per_level: u64 = (0..=k_max).map(|k| ring_count(n, k).unwrap() as u64).sum();
        let needed = per_level * (j_max as u64 + 1);
        if needed > budget {
            return Err(Error::ResourceLimit { needed, budget });
        }
        // Level 0 once, then exact dyadic scaling.
        let level0: Vec<Ring> = (0..=k_max).map(|k| Ring::build(n, 0, k).unwrap()).collect();
        let mut rings = Vec::with_capacity(j_max as usize + 1);
        rings.push(level0);
        for j in 1..=j_max {
            let scale = (2.0f64).powi(-(j as i32));
            let level: Vec<Ring> = rings[0]
                .iter()
                .map(|r0| Ring {
                    n,
                    j,
                    k: r0.k,
                    radius: r0.radius * scale,
                    centers: r0.centers.iter().map(|c| c * scale).collect(),
                })
                .collect();
            rings.push(level);
        }
        Ok(RadialCovering {
            n,
            j_max,
            k_max,
            rings,
        })
    }

    pub fn ring(&self, j: u32, k: u32) -> Option<&Ring> {
        self.rings
            .get(j as usize)
            .and_then(|lvl| lvl.get(k as usize))
    }

    pub fn level(&self, j: u32) -> &[Ring] {
        &self.rings[j as usize]
    }

    pub fn total_cells(&self) -> usize {
        self.rings
            .iter()
            .map(|lvl| lvl.iter().map(Ring::count).sum::<usize>())
            .sum()
    }

    /// Copy with one ring removed (for regularity failure experiments).
    pub fn without_ring(&self, j: u32, k: u32) -> RadialCovering {
        let mut c = self.clone();
        c.rings[j as usize].retain(|r| r.k != k);
        c
    }

    /// Number of level-`j` covering balls containing `x`.
    pub fn coverage_count(&self, j: u32, x: &[f64]) -> usize {
        self.coverage_count_inflated(j, x, 0.0)
    }

    /// Same, with every ball radius inflated by `extra`.
    pub fn coverage_count_inflated(&self, j: u32, x: &[f64], extra: f64) -> usize {
        let r = norm(x);
        let scale = (2.0f64).powi(-(j as i32));
        let reach = CELL_RADIUS_UNITS * scale + extra;
        let mut count = 0usize;
        // Only rings whose center sphere is within reach of |x|.
        let k_lo = (((r - reach) / scale - 0.5).floor().max(0.0)) as u32;
        let k_hi = (((r + reach) / scale + 0.5).ceil() as u32).min(self.k_max_at(j));
        for k in k_lo..=k_hi {
            if let Some(ring) = self.ring_at(j, k) {
                count += ring.cells_containing_inflated(x, extra).len();
            }
        }
        count
    }

    fn k_max_at(&self, j: u32) -> u32 {
        self.rings[j as usize].last().map(|r| r.k).unwrap_or(0)
    }

    fn ring_at(&self, j: u32, k: u32) -> Option<&Ring> {
        // rings may be non-contiguous after without_ring; search near index k.
        let lvl = &self.rings[j as usize];
        if let Some(r) = lvl.get(k as usize) {
            if r.k == k {
                return Some(r);
            }
        }
        lvl.iter().find(|r| r.k == k)
    }

    /// Serialize to the versioned JSON document.
    pub fn to_json(&self) -> serde_json::Value {
        let rings: Vec<serde_json::Value> = self
            .rings
            .iter()
            .flatten()
            .map(|r| {
                serde_json::json!({
                    "j": r.j,
                    "k": r.k,
                    "radius": exact_dyadic_string(r.radius),
                    "center_norm": exact_dyadic_string(r.center_norm()),
                    "count": r.count(),
                    "centers": r.centers,
                })
            })
            .collect();
        serde_json::json!({
            "format": "radial-covering",
            "version": 1,
            "n": self.n,
            "j_max": self.j_max,
            "k_max": self.k_max,
            "rings": rings,
        })
    }
}

/// Exact decimal rendering of a dyadic rational (any finite f64).
pub fn exact_dyadic_string(x: f64) -> String {
    use num_bigint::BigUint;
    use num_traits::{One, Zero};
    assert!(x.is_finite());
    if x == 0.0 {
        return "0".to_string();
    }
    let neg = x < 0.0;
    let bits = x.abs().to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if exp_bits == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    while mant % 2 == 0 && exp < 0 {
        mant /= 2;
        exp += 1;
    }
    let s = if exp >= 0 {
        let v = BigUint::from(mant) << (exp as usize);
        v.to_string()
    } else {
        let shift = (-exp) as usize;
        let mut five = BigUint::one();
        for _ in 0..shift {
            five *= 5u32;
        }
        let digits = (BigUint::from(mant) * five).to_string();
        if digits.len() > shift {
            let (int, fr) = digits.split_at(digits.len() - shift);
            format!("{int}.{fr}")
        } else {
            let mut fr = String::from("0.");
            for _ in 0..(shift - digits.len()) {
                fr.push('0');
            }
            fr.push_str(&digits);
            fr
        }
    };
    let s = if s.contains('.') {
        let t = s.trim_end_matches('0');
        t.trim_end_matches('.').to_string()
    } else {
        s
    };
    let _ = BigUint::zero();
    if neg {
        format!("-{s}")
    } else {
        s
    }
}

// ---------------------------------------------------------------------------
// omega, multiplicity, regularity report
// ---------------------------------------------------------------------------

/// Count of cells of ring `(j, k)` whose closed ball meets the closed
/// dyadic cube `p`.
pub fn omega(p: &DyadicCube, j: u32, k: u32, cov: &RadialCovering) -> Result<usize> {
    let ring = cov
        .ring_at(j, k)
        .ok_or_else(|| Error::OutOfRange(format!("ring (j={j}, k={k}) not in covering")))?;
    Ok(ring.cells_meeting_cube(p))
}

/// Probe configuration for multiplicity and coverage scans.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Grid probe density: points per `2^-j` per axis.
    pub points_per_cell: u32,
    /// Half-width of the probe window, in units of `2^-j`.
    pub window_cells: u32,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            points_per_cell: 8,
            window_cells: 24,
        }
    }
}

/// Maximum number of level-`j` covering balls containing any probe point.
///
/// Probes are all ball centers of the level plus a dense grid near the
/// origin; the window and density are configurable.  This is an empirical
/// estimate, not a proof.
pub fn multiplicity(cov: &RadialCovering, j: u32, cfg: &ProbeConfig) -> usize {
    multiplicity_inflated(cov, j, cfg, 0.0)
}

/// Multiplicity of the covering with every ball inflated by
/// `eps * 2^-j` (the `rQ`-neighborhood convention).
pub fn multiplicity_inflated(cov: &RadialCovering, j: u32, cfg: &ProbeConfig, eps: f64) -> usize {
    let scale = (2.0f64).powi(-(j as i32));
    let extra = eps * scale;
    let mut best = 0usize;
    // Center probes.
    for ring in cov.level(j) {
        for l in 1..=ring.count() {
            let c = ring.center(l).to_vec();
            best = best.max(cov.coverage_count_inflated(j, &c, extra));
        }
    }
    // Dense grid probes in a window around the origin, in exact units of
    // 2^-j so that levels are geometrically identical.
    let steps = (cfg.window_cells * cfg.points_per_cell) as i64;
    let du = 1.0 / cfg.points_per_cell as f64;
    if cov.n == 2 {
        for ix in -steps..=steps {
            for iy in -steps..=steps {
                let x = [
                    (ix as f64 + 0.37) * du * scale,
                    (iy as f64 + 0.29) * du * scale,
                ];
                best = best.max(cov.coverage_count_inflated(j, &x, extra));
            }
        }
    } else {
        let steps = steps.min(64);
        for ix in -steps..=steps {
            for iy in -steps..=steps {
                for iz in -steps..=steps {
                    let x = [
                        (ix as f64 + 0.37) * du * scale,
                        (iy as f64 + 0.29) * du * scale,
                        (iz as f64 + 0.41) * du * scale,
                    ];
                    best = best.max(cov.coverage_count_inflated(j, &x, extra));
                }
            }
        }
    }
    best
}

/// Per-clause regularity report for a covering.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// Clause (i): every sampled shell point is covered by its own ring.
    pub coverage_pass: bool,
    pub coverage_failures: usize,
    /// Clause (ii): multiplicity of the inflated coverings, per epsilon.
    pub inflated_multiplicity: Vec<(f64, usize)>,
    pub inflated_pass: bool,
    /// Clause (iii): measured diameter bound and volume lower bound.
    pub diam_per_level: Vec<f64>,
    pub diam_bound_b_n: f64,
    pub volume_lower_c_n: f64,
    pub a_n: f64,
    pub diam_pass: bool,
    /// Plain multiplicity per level.
    pub multiplicity_per_level: Vec<usize>,
    pub axis_pass: bool,
    pub pass: bool,
}

/// Check Definition-style regularity clauses on the covering.
///
/// Shell coverage is sampled at three radii per shell and a dense set of
/// angles; the inflated-multiplicity clause is evaluated for
/// `eps in {1/2, 1/4, 1/8}`.
pub fn verify_regular(cov: &RadialCovering, cfg: &ProbeConfig) -> RegularityReport {
    let mut failures = 0usize;
    // Clause (i): shell coverage, ring by ring, at level 0 (levels are
    // exact dilates, so level 0 decides) plus a spot check at j_max.
    for &j in &[0u32, cov.j_max] {
        let scale = (2.0f64).powi(-(j as i32));
        for k in 0..=cov.k_max {
            match cov.ring_at(j, k) {
                Some(ring) => {
                    for &fr in &[0.05, 0.5, 0.95] {
                        let r = (k as f64 + fr) * scale;
                        failures += sample_sphere_uncovered(ring, r, cov.n);
                    }
                }
                // A missing ring leaves its whole shell uncovered.
                None => failures += 1,
            }
        }
        if cov.j_max == 0 {
            break;
        }
    }
    let coverage_pass = failures == 0;

    // Clause (ii).
    let eps_set = [0.5, 0.25, 0.125];
    let inflated: Vec<(f64, usize)> = eps_set
        .iter()
        .map(|&e| (e, multiplicity_inflated(cov, 0, cfg, e)))
        .collect();
    let base_mult = multiplicity(cov, 0, cfg);
    let inflated_pass = inflated.iter().all(|&(_, m)| m < 16 * base_mult.max(1));

    // Clause (iii): diameters are 12 * 2^-j exactly by construction;
    // report the measured values.
    let diam_per_level: Vec<f64> = (0..=cov.j_max)
        .map(|j| {
            cov.level(j)
                .iter()
                .map(|r| r.radius * 2.0)
                .fold(0.0f64, f64::max)
        })
        .collect();
    let diam_pass = diam_per_level
        .iter()
        .enumerate()
        .all(|(j, &d)| (d - 12.0 * (2.0f64).powi(-(j as i32))).abs() == 0.0);
    let c_n = unit_ball_volume(cov.n) * CELL_RADIUS_UNITS.powi(cov.n as i32);
    let a_n = (c_n / unit_ball_volume(cov.n)).powf(1.0 / cov.n as f64);

    let multiplicity_per_level: Vec<usize> = (0..=cov.j_max)
        .map(|j| multiplicity(cov, j, cfg))
        .collect();

    // Axis property: points (t, 0, ..., 0) up to (k_max - 1) 2^-j lie in
    // some l = 1 ball.
    let mut axis_pass = true;
    let scale = (2.0f64).powi(-(cov.j_max as i32));
    let t_max = (cov.k_max as f64 - 1.0) * scale;
    let mut t = 0.0;
    while t <= t_max {
        let mut x = vec![0.0; cov.n];
        x[0] = t;
        let hit = cov.level(cov.j_max).iter().any(|ring| {
            ring.count() >= 1 && dist(ring.center(1), &x) <= ring.radius
        });
        if !hit {
            axis_pass = false;
            break;
        }
        t += 0.1 * scale;
    }

    let pass = coverage_pass && inflated_pass && diam_pass && axis_pass;
    RegularityReport {
        coverage_pass,
        coverage_failures: failures,
        inflated_multiplicity: inflated,
        inflated_pass,
        diam_per_level,
        diam_bound_b_n: 12.0,
        volume_lower_c_n: c_n,
        a_n,
        diam_pass,
        multiplicity_per_level,
        axis_pass,
        pass,
    }
}

/// Count sample points on the sphere of radius `r` not covered by `ring`.
fn sample_sphere_uncovered(ring: &Ring, r: f64, n: usize) -> usize {
    if r == 0.0 {
        return if ring.covers(&vec![0.0; n]) { 0 } else { 1 };
    }
    let mut misses = 0usize;
    if n == 2 {
        let m = (4 * ring.count()).max(16);
        for t in 0..m {
            let a = 2.0 * std::f64::consts::PI * (t as f64 + 0.5) / m as f64;
            let x = [r * a.cos(), r * a.sin()];
            if !ring.covers(&x) {
                misses += 1;
            }
        }
    } else {
        let m_theta = (2 * ring.count()).clamp(8, 256);
        for i in 0..m_theta {
            let theta = (i as f64 + 0.5) * std::f64::consts::PI / m_theta as f64;
            let m_phi = ((m_theta as f64 * theta.sin()).ceil() as usize).max(4);
            for t in 0..m_phi {
                let phi = 2.0 * std::f64::consts::PI * (t as f64 + 0.5) / m_phi as f64;
                let x = [
                    r * theta.cos(),
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                ];
                if !ring.covers(&x) {
                    misses += 1;
                }
            }
        }
    }
    misses
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_count_plane() {
        assert_eq!(ring_count(2, 0).unwrap(), 1);
        assert_eq!(ring_count(2, 3).unwrap(), 7);
        for k in 1..=1000u32 {
            let c = ring_count(2, k).unwrap();
            assert_eq!(c, 2 * k as usize + 1);
            let ratio = c as f64 / k as f64;
            assert!(ratio >= 2.0 && ratio <= 3.0);
        }
        assert!(ring_count(1, 3).is_err());
    }

    #[test]
    fn ring_count_space_bounds() {
        // Latitude-band counts stay within the frozen empirical bounds.
        let (c1, c2) = ring_count_bounds(3);
        for k in 1..=1000u32 {
            let c = ring_count(3, k).unwrap() as f64;
            let ratio = c / (k as f64 * k as f64);
            assert!(
                ratio >= c1 && ratio <= c2,
                "k={k}: ratio {ratio} outside [{c1}, {c2}]"
            );
        }
        // Spot value: C(3,100) within the placement-oracle window.
        let c = ring_count(3, 100).unwrap() as f64;
        assert!(c >= c1 * 100.0 * 100.0 && c <= c2 * 100.0 * 100.0);
    }

    #[test]
    fn ring_basic_invariants() {
        // (n=2, j=0, k=5): 11 centers at radius 5.5, ball radius 6.
        let ring = Ring::build(2, 0, 5).unwrap();
        assert_eq!(ring.count(), 11);
        for l in 1..=ring.count() {
            assert!((norm(ring.center(l)) - 5.5).abs() < 1e-12);
        }
        assert_eq!(ring.radius, 6.0);
        assert_eq!(ring.ball(1).diameter(), 12.0);
        // l = 1 is the axis cell.
        assert_eq!(ring.center(1)[1], 0.0);
        assert!((ring.center(1)[0] - 5.5).abs() < 1e-12);
    }

    #[test]
    fn level_scaling_is_exact() {
        let cov = RadialCovering::build(2, 3, 8).unwrap();
        let r0 = cov.ring(0, 4).unwrap();
        let r3 = cov.ring(3, 4).unwrap();
        let s = 0.125;
        assert_eq!(r3.radius, r0.radius * s);
        for l in 1..=r0.count() {
            for d in 0..2 {
                assert_eq!(r3.center(l)[d], r0.center(l)[d] * s);
            }
        }
        // Diameter 12 * 2^-j exactly.
        assert_eq!(r3.radius * 2.0, 12.0 * s);
    }

    #[test]
    fn axis_point_membership() {
        // Point (7.25, 0) at level 0 is inside >= 1 ball of ring k = 7
        // (brute-force membership over the level-0 balls).
        let cov = RadialCovering::build(2, 0, 10).unwrap();
        let x = [7.25, 0.0];
        let brute: usize = cov
            .level(0)
            .iter()
            .map(|ring| {
                (1..=ring.count())
                    .filter(|&l| dist(ring.center(l), &x) <= ring.radius)
                    .count()
            })
            .sum();
        assert!(brute >= 1);
        let ring7 = cov.ring(0, 7).unwrap();
        assert!(!ring7.cells_containing(&x).is_empty());
        // Pruned counting agrees with brute force.
        assert_eq!(cov.coverage_count(0, &x), brute);
    }

    #[test]
    fn omega_basic() {
        let cov = RadialCovering::build(2, 1, 8).unwrap();
        // The lattice has no cube centered at the origin, so a single cube
        // can catch at most one quadrant of the ring-5 annulus:
        let all = DyadicCube::new(-7, vec![0, 0]); // [0,128)^2
        let w = omega(&all, 0, 5, &cov).unwrap();
        // Quadrant cube: between a quarter and all cells meet it.
        assert!(w >= 2 && w <= 11);
        // A cube far away from the annulus.
        let far = DyadicCube::new(0, vec![100, 100]);
        assert_eq!(omega(&far, 0, 5, &cov).unwrap(), 0);
        // k = 0: omega in {0, 1}.
        for cube in [
            DyadicCube::new(0, vec![0, 0]),
            DyadicCube::new(0, vec![50, 0]),
            DyadicCube::new(3, vec![1, 2]),
        ] {
            let w = omega(&cube, 0, 0, &cov).unwrap();
            assert!(w <= 1);
        }
        // Missing ring.
        assert!(omega(&all, 0, 99, &cov).is_err());
    }

    #[test]
    fn omega_monotone_under_inclusion() {
        let cov = RadialCovering::build(2, 0, 12).unwrap();
        // P subset P' implies omega(P) <= omega(P').
        for level in 0..3i32 {
            for ix in -3..3i64 {
                for iy in -3..3i64 {
                    let p = DyadicCube::new(level + 1, vec![ix * 2, iy * 2]);
                    let p_big = DyadicCube::new(level, vec![ix, iy]);
                    assert!(p.subset_of(&p_big));
                    for k in [0u32, 3, 7] {
                        assert!(
                            omega(&p, 0, k, &cov).unwrap() <= omega(&p_big, 0, k, &cov).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn multiplicity_single_ball() {
        let cov = RadialCovering::build(2, 0, 1).unwrap();
        // Only k=0 and k=1 rings exist; the center of the k=0 ball is
        // covered by several balls, but a single-ring covering of one ball
        // has multiplicity 1 at distance.
        let single = cov.without_ring(0, 1);
        let m = multiplicity(&single, 0, &ProbeConfig::default());
        assert_eq!(m, 1);
    }

    #[test]
    fn multiplicity_stable_across_levels() {
        let cov = RadialCovering::build(2, 4, 24).unwrap();
        let cfg = ProbeConfig {
            points_per_cell: 4,
            window_cells: 12,
        };
        let m0 = multiplicity(&cov, 0, &cfg);
        let m4 = multiplicity(&cov, 4, &cfg);
        assert_eq!(m0, m4);
        assert!(m0 >= 1);
    }

    #[test]
    fn verify_regular_passes_and_detects_holes() {
        let cov = RadialCovering::build(2, 1, 16).unwrap();
        let cfg = ProbeConfig {
            points_per_cell: 4,
            window_cells: 8,
        };
        let report = verify_regular(&cov, &cfg);
        assert!(report.pass, "{report:?}");
        assert_eq!(report.diam_per_level[0], 12.0);
        assert_eq!(report.diam_per_level[1], 6.0);

        let holed = cov.without_ring(0, 8);
        let report = verify_regular(&holed, &cfg);
        assert!(!report.coverage_pass);
    }

    #[test]
    fn covering_budget() {
        let err = RadialCovering::build_with_budget(2, 6, 512, 1000).unwrap_err();
        matches!(err, Error::ResourceLimit { .. });
    }

    #[test]
    fn dyadic_strings() {
        assert_eq!(exact_dyadic_string(6.0), "6");
        assert_eq!(exact_dyadic_string(0.375), "0.375");
        assert_eq!(exact_dyadic_string(-1.5), "-1.5");
        assert_eq!(exact_dyadic_string(6.0 * (2.0f64).powi(-5)), "0.1875");
        assert_eq!(exact_dyadic_string(0.0), "0");
    }

    #[test]
    fn covering_json_roundtrip_fields() {
        let cov = RadialCovering::build(2, 1, 3).unwrap();
        let v = cov.to_json();
        assert_eq!(v["version"], 1);
        assert_eq!(v["n"], 2);
        let rings = v["rings"].as_array().unwrap();
        assert_eq!(rings.len(), 8);
        assert_eq!(rings[1]["radius"], "6");
    }

    #[test]
    fn shell_and_cube_geometry() {
        let sh = Shell { j: 2, k: 3 };
        assert!(sh.contains(&[0.8, 0.0]));
        assert!(!sh.contains(&[1.01, 0.0]));
        let q = DyadicCube::new(1, vec![1, 1]); // [0.5,1)^2
        assert_eq!(q.side(), 0.5);
        assert_eq!(q.j_q(), 1);
        assert!(q.contains(&[0.75, 0.9]));
        assert!(!q.contains(&[1.0, 0.75]));
        assert!((q.distance_to(&[0.0, 0.0]) - (0.5f64 * 0.5 * 2.0).sqrt()).abs() < 1e-15);
        let (dmin, dmax) = q.origin_distance_range();
        assert!((dmin - (2.0f64).sqrt() * 0.5).abs() < 1e-15);
        assert!((dmax - (2.0f64).sqrt()).abs() < 1e-15);
    }
}
