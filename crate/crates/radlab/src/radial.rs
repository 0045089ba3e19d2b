//! The radial decay laboratory: dyadic radial partitions of unity,
//! predicted pointwise envelopes, sharpness witnesses, and empirical decay
//! measurement.

use crate::lp::smooth_step;
use crate::profile::RadialProfile;
use crate::regions::{
    classify, classify_sobolev_morrey, FarBehavior, NearBehavior, ParameterPoint,
    SharpnessStatus,
};
use crate::{Error, Result};
use num_rational::Rational64;
use serde::Serialize;

// ---------------------------------------------------------------------------
// Dyadic radial partition of unity
// ---------------------------------------------------------------------------

/// Radial cutoff family: `rho(2^-j x)` sums to 1 over `j` for `x != 0`.
#[derive(Debug, Clone, Copy)]
pub struct DyadicPartition;

/// Smooth monotone cutoff: 1 on `r <= 1`, 0 on `r >= 2`.
fn theta(r: f64) -> f64 {
    smooth_step(2.0 - r)
}

impl DyadicPartition {
    /// `rho(r) = theta(r) - theta(2r)`: supported in `{1/2 < r < 2}`,
    /// values in `[0, 1]`, and `sum_j rho(2^-j r) = theta(2^-J r) -> 1`
    /// telescopically for every `r > 0`.
    pub fn rho(&self, r: f64) -> f64 {
        theta(r) - theta(2.0 * r)
    }

    /// Partition sum truncated to levels `|j| <= j_span`.
    pub fn partition_sum(&self, r: f64, j_span: i32) -> f64 {
        (-j_span..=j_span)
            .map(|j| self.rho((2.0f64).powi(-j) * r))
            .sum()
    }
}

pub fn make_dyadic_partition() -> DyadicPartition {
    DyadicPartition
}

/// Multiply `f` by the three-term partition sum around level `k`:
/// equals `f` on the shell `2^k <= |x| < 2^{k+1}`, supported in
/// `{2^{k-2} < |x| < 2^{k+2}}`.
pub fn localize(f: &RadialProfile, k: i32) -> RadialProfile {
    let part = make_dyadic_partition();
    let mut out = f.clone();
    for (i, v) in out.values.iter_mut().enumerate() {
        let r = out.r0 + i as f64 * out.dr;
        let w: f64 = (k - 1..=k + 1)
            .map(|j| part.rho((2.0f64).powi(-j) * r))
            .sum();
        *v *= w;
    }
    out
}

// ---------------------------------------------------------------------------
// Predicted envelopes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EnvelopeRegime {
    Bounded,
    /// `|x|^e` with rational exponent (string form for exactness).
    PowerDecay(String),
    /// `1 - log2 |x|` near the origin.
    LogOrigin,
    NoBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub regime: EnvelopeRegime,
    /// Validity region: `|x| >= 1` (far) or `0 < |x| < 1` (near).
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Far,
    Near,
}

impl Envelope {
    /// Evaluate the envelope at radius `r` (1 for `Bounded`).
    pub fn eval(&self, r: f64) -> f64 {
        match &self.regime {
            EnvelopeRegime::Bounded => 1.0,
            EnvelopeRegime::PowerDecay(e) => r.powf(parse_rat(e)),
            EnvelopeRegime::LogOrigin => 1.0 - r.log2(),
            EnvelopeRegime::NoBound => f64::INFINITY,
        }
    }

    /// The rational exponent as f64, if the regime is a power law.
    pub fn exponent(&self) -> Option<f64> {
        match &self.regime {
            EnvelopeRegime::PowerDecay(e) => Some(parse_rat(e)),
            _ => None,
        }
    }
}

fn parse_rat(s: &str) -> f64 {
    let r: Rational64 = s.parse().expect("rational string");
    *r.numer() as f64 / *r.denom() as f64
}

/// Predicted pointwise envelope for the given parameter point.  Points
/// with `u` and `m` set use the Sobolev-Morrey results; otherwise the
/// Besov-type results apply.  Inadmissible parameters are rejected with
/// the violated hypothesis.
pub fn predicted_envelope(pp: &ParameterPoint, region: Region) -> Result<Envelope> {
    let report = if pp.u.is_some() && pp.m.is_some() {
        classify_sobolev_morrey(pp)?
    } else {
        classify(pp)?
    };
    match region {
        Region::Far => match report.far.value {
            FarBehavior::Bounded => Ok(Envelope {
                regime: EnvelopeRegime::Bounded,
                region,
            }),
            FarBehavior::Decay(e) => Ok(Envelope {
                regime: EnvelopeRegime::PowerDecay(e),
                region,
            }),
            FarBehavior::Unknown => {
                if report.sharpness.value == SharpnessStatus::Witnessed {
                    Ok(Envelope {
                        regime: EnvelopeRegime::NoBound,
                        region,
                    })
                } else {
                    Err(Error::Regime(
                        "far-field hypothesis violated: need tau <= (n-1)/(np) and \
                         s > 1/p (or s = 1/p with q <= 1)"
                            .into(),
                    ))
                }
            }
        },
        Region::Near => match report.near.value {
            NearBehavior::Bounded => Ok(Envelope {
                regime: EnvelopeRegime::Bounded,
                region,
            }),
            NearBehavior::Power(e) => Ok(Envelope {
                regime: EnvelopeRegime::PowerDecay(e),
                region,
            }),
            NearBehavior::Log => Ok(Envelope {
                regime: EnvelopeRegime::LogOrigin,
                region,
            }),
            NearBehavior::Unknown => Err(Error::Regime(
                "near-origin hypothesis violated: need s <= n(1/p - tau) and the \
                 continuity hypothesis"
                    .into(),
            )),
        },
    }
}

// ---------------------------------------------------------------------------
// Sharpness witnesses
// ---------------------------------------------------------------------------

/// `psi0`: smooth, 1 on `[0, 1]`, 0 on `[2, inf)`, monotone between.
pub fn psi0(t: f64) -> f64 {
    smooth_step(2.0 - t)
}

fn check_psi0(psi: &impl Fn(f64) -> f64) -> Result<()> {
    for t in [0.0, 0.3, 0.7, 1.0] {
        if (psi(t) - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("psi0({t}) != 1")));
        }
    }
    for t in [2.0, 2.5, 10.0] {
        if psi(t).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("psi0({t}) != 0")));
        }
    }
    let mut t = 0.0;
    while t < 3.0 {
        let v = psi(t);
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::OutOfRange(format!("psi0({t}) = {v} outside [0,1]")));
        }
        t += 0.01;
    }
    Ok(())
}

/// Witness `phi_{j,r}(x) = psi0(|2^j |x| - 2^r|)`: radial, equal to 1 at
/// `|x| = 2^{r-j}`, supported in `max(0, 2^-j (2^r - 2)) <= |x| <=
/// 2^-j (2^r + 2)`.
pub fn witness_phi_jr(
    j: i32,
    r: i32,
    psi: impl Fn(f64) -> f64,
    n: usize,
    r_max: f64,
    npts: usize,
) -> Result<RadialProfile> {
    check_psi0(&psi)?;
    let dr = r_max / (npts - 1) as f64;
    let sj = (2.0f64).powi(j);
    let sr = (2.0f64).powi(r);
    let values = (0..npts)
        .map(|i| {
            let rad = i as f64 * dr;
            psi((sj * rad - sr).abs())
        })
        .collect();
    RadialProfile::new(n, 0.0, dr, values)
}

/// Witness sum `sum_{j=1}^N alpha_j phi_{j, j+4+r}`.  Each term equals
/// `alpha_j` at `|x| = 2^{r+4}`, so the sum there is `sum alpha_j`.
pub fn witness_phi_nr(
    n_terms: usize,
    r: i32,
    alpha: &[f64],
    n: usize,
    r_max: f64,
    npts: usize,
) -> Result<RadialProfile> {
    if alpha.len() < n_terms {
        return Err(Error::OutOfRange(format!(
            "need {n_terms} weights, got {}",
            alpha.len()
        )));
    }
    let mut acc = RadialProfile::new(n, 0.0, r_max / (npts - 1) as f64, vec![0.0; npts])?;
    for j in 1..=n_terms as i32 {
        let term = witness_phi_jr(j, j + 4 + r, psi0, n, r_max, npts)?;
        acc = acc.axpy(1.0, &term, alpha[(j - 1) as usize])?;
    }
    Ok(acc)
}

/// Small-`x` witness `2^{-j n tau} 2^{-j(s - n/p)} phi_{j,0}`; at
/// `|x| = 2^-j` its value is `2^{-j(s - n/p + n tau)} = |x|^{s - n/p + n tau}`.
pub fn witness_small_x(
    j: i32,
    s: f64,
    p: f64,
    tau: f64,
    n: usize,
    r_max: f64,
    npts: usize,
) -> Result<RadialProfile> {
    if s >= 1.0 / p {
        return Err(Error::Regime(format!(
            "small-x witness needs s < 1/p (s = {s}, 1/p = {})",
            1.0 / p
        )));
    }
    let prof = witness_phi_jr(j, 0, psi0, n, r_max, npts)?;
    let scale = (2.0f64).powf(-(j as f64) * (n as f64 * tau + s - n as f64 / p));
    Ok(prof.scale(scale))
}

// ---------------------------------------------------------------------------
// Decay measurement
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// `(radius, window sup)` samples.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `log2(value)` against `log2(radius)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log2 units.
    pub residual: f64,
}

/// Measure the sup of `|f|` in multiplicative windows around each probe
/// radius and fit a log-log slope.
pub fn measure_decay(f: &RadialProfile, radii: &[f64]) -> Result<DecayFit> {
    if radii.len() < 4 {
        return Err(Error::OutOfRange(format!(
            "need at least 4 probe radii, got {}",
            radii.len()
        )));
    }
    let mut samples = Vec::with_capacity(radii.len());
    for &rho in radii {
        let v = f.window_sup(rho)?;
        samples.push((rho, v));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .map(|&(r, v)| (r.log2(), v.log2()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::OutOfRange(
            "fewer than 4 nonzero window sups; cannot fit".into(),
        ));
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::OutOfRange("degenerate probe radii".into()));
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = (pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        samples,
        slope,
        intercept,
        residual,
    })
}

/// Global (whole-space) radial sequence norm of the witness family: the
/// `tau = 0` value `( sum_j ( sum_k C(n,k) |t_{j,k}|^p )^{q/p} )^{1/q}`,
/// computed from ring counts alone.
pub fn global_radial_sequence_norm(
    t: &std::collections::BTreeMap<(u32, u32), f64>,
    n: usize,
    p: f64,
    q: f64,
) -> f64 {
    use std::collections::BTreeMap;
    let mut by_level: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(j, k), &v) in t {
        let c = crate::geometry::ring_count(n, k).unwrap() as f64;
        *by_level.entry(j).or_insert(0.0) += c * v.abs().powf(p);
    }
    let terms: Vec<f64> = by_level.values().map(|a| a.powf(1.0 / p)).collect();
    if q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms
            .into_iter()
            .map(|t| t.powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// Sequence-norm of the single witness `phi_{j, j+4+r}` at `tau = 0`:
/// its atomic coefficients sit on rings `k` near `2^{j+4+r}` at level `j`
/// with value `2^{j(s - n/p)}` (constant per ring), so the norm is
/// `2^{j(s - n/p)} ( sum_{k near 2^{j+4+r}} C(n,k) )^{1/p}`.
pub fn witness_sequence_norm(j: u32, r: i32, n: usize, s: f64, p: f64) -> f64 {
    let rr = j as i32 + 4 + r;
    let k_center = (2.0f64).powi(rr);
    // Support of phi_{j, rr} in ring indices: |k - 2^rr| <= 2 (plus the
    // ball reach; use the fixed half-width r0 = 8).
    let k_lo = ((k_center - 8.0).max(0.0)) as u32;
    let k_hi = (k_center + 8.0) as u32;
    let count: f64 = (k_lo..=k_hi)
        .map(|k| crate::geometry::ring_count(n, k).unwrap() as f64)
        .sum();
    (2.0f64).powf(j as f64 * (s - n as f64 / p)) * count.powf(1.0 / p)
}
