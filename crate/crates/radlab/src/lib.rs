//! Numerical laboratory for radial functions in Morrey-scale smoothness
//! spaces.
//!
//! The crate builds the radial regular covering of the plane (and of
//! low-dimensional space) by congruent balls organized in dyadic rings,
//! computes Morrey, Sobolev-Morrey, Besov-type and Besov-Morrey norms of
//! sampled functions, extracts atomic decompositions of radial functions
//! together with their sequence-space norms, and measures the pointwise
//! decay and controlled unboundedness of radial elements against the
//! predicted envelopes.
//!
//! Modules:
//! - [`geometry`]: dyadic cubes, shells, the radial covering, the
//!   intersection count `omega`, and regularity verification.
//! - [`grid`]: uniform grid functions over a centered cube, FFT machinery,
//!   and the `GFN1` binary format.
//! - [`profile`]: 1-D radial profiles of functions of `n` variables.
//! - [`lp`]: Littlewood-Paley frequency pairs, their Calderon duals, and
//!   frequency-block convolutions.
//! - [`norms`]: Morrey / Sobolev-Morrey / Besov-type / Besov-Morrey norm
//!   evaluation over finite ball and cube families.
//! - [`atoms`]: atom validity checks, coefficient extraction, atom
//!   synthesis, sequence-space norms, and reconstruction.
//! - [`radial`]: dyadic radial partitions of unity, predicted decay
//!   envelopes, sharpness witnesses, and empirical slope measurement.
//! - [`regions`]: exact-rational classifier mapping parameter points to
//!   boundedness / decay / sharpness conclusions.
//! - [`cli`]: configuration and experiment drivers used by the `radlab`
//!   binary.

pub mod atoms;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod lp;
pub mod norms;
pub mod profile;
pub mod radial;
pub mod regions;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    // omega_n = pi^{n/2} / Gamma(n/2 + 1)
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            let half = n as f64 / 2.0;
            std::f64::consts::PI.powf(half) / gamma(half + 1.0)
        }
    }
}

fn gamma(x: f64) -> f64 {
    // Lanczos approximation, good to ~1e-13 for the small arguments used here.
    const G: f64 = 7.0;
    const C: [f64; 9] = [
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
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + G + 0.5;
        for (i, &c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.18879020478639).abs() < 1e-12);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-10);
    }
}
