//! Published example masks, transcribed entry by entry from their radical
//! forms. Kept independent of the library's constants and formulas.

#![allow(dead_code)]

use bidaub::{FreeParameters, SolutionFamily};

pub type Grid = [[f64; 4]; 4];

fn r2() -> f64 {
    2f64.sqrt()
}
fn r3() -> f64 {
    3f64.sqrt()
}

fn a1(sign: f64) -> Grid {
    let (r3, s) = (r3(), sign * (-46.0 + 28.0 * r3()).sqrt());
    [
        [-0.25 - s / 8.0, s / 8.0, 0.5 - r3 / 4.0 + s / 8.0, 0.25 - r3 / 4.0 - s / 8.0],
        // The displayed c13 reads "-1/4 + 1/4 √3(3)"; the A-type identity c13 = c31 fixes it.
        [1.0 - r3 / 2.0, 1.0 - r3 / 2.0, -0.25 + r3 / 4.0, -0.25 + r3 / 4.0],
        [0.5 - r3 / 4.0 + s / 8.0, 0.75 - r3 / 4.0 - s / 8.0, 0.25 + r3 / 2.0 - s / 8.0, r3 / 2.0 + s / 8.0],
        [-0.75 + r3 / 4.0, -0.25 + r3 / 4.0, 1.0, 0.5],
    ]
}

fn a2(sign: f64) -> Grid {
    let (r3, t) = (r3(), sign * (-34.0 + 20.0 * r3()).sqrt());
    [
        [0.5 - t / 8.0, 0.75 + t / 8.0, -0.25 + r3 / 4.0 + t / 8.0, -0.5 + r3 / 4.0 - t / 8.0],
        [r3 / 2.0, 0.5 + r3 / 2.0, 0.75 - r3 / 4.0, 0.25 - r3 / 4.0],
        [-0.25 + r3 / 4.0 + t / 8.0, r3 / 4.0 - t / 8.0, 1.0 - r3 / 2.0 - t / 8.0, 0.75 - r3 / 2.0 + t / 8.0],
        [0.25 - r3 / 4.0, 0.25 - r3 / 4.0, 0.0, 0.0],
    ]
}

fn b1(sign: f64) -> Grid {
    let (r3, q) = (r3(), sign * r2() / 8.0);
    [
        [-0.25 - q, q, 0.5 - r3 / 4.0 + q, 0.25 - q - r3 / 4.0],
        [0.0, 0.5, 0.75 - r3 / 4.0, 0.25 - r3 / 4.0],
        [0.5 + r3 / 4.0 + q, 0.75 + r3 / 4.0 - q, 0.25 - q, q],
        [0.25 + r3 / 4.0, 0.25 + r3 / 4.0, 0.0, 0.0],
    ]
}

fn b2(sign: f64) -> Grid {
    let (r3, q) = (r3(), sign * r2() / 8.0);
    [
        [-0.25 - q, q, 0.5 + r3 / 4.0 + q, 0.25 - q + r3 / 4.0],
        [0.0, 0.5, 0.75 + r3 / 4.0, 0.25 + r3 / 4.0],
        [0.5 - r3 / 4.0 + q, 0.75 - r3 / 4.0 - q, 0.25 - q, q],
        [0.25 - r3 / 4.0, 0.25 - r3 / 4.0, 0.0, 0.0],
    ]
}

/// `(family, parameters, published mask)` for all eight example masks.
pub fn published_masks() -> Vec<(SolutionFamily, FreeParameters, Grid)> {
    use SolutionFamily::*;
    let a1p = FreeParameters::new(1.0, 0.5);
    let origin = FreeParameters::new(0.0, 0.0);
    vec![
        (A1a, a1p, a1(1.0)),
        (A1b, a1p, a1(-1.0)),
        (A2a, origin, a2(1.0)),
        (A2b, origin, a2(-1.0)),
        (B1a, origin, b1(1.0)),
        (B1b, origin, b1(-1.0)),
        (B2a, origin, b2(1.0)),
        (B2b, origin, b2(-1.0)),
    ]
}

/// The matrix displayed alongside the worked reproduction of x + 6y − 10.
pub fn reproduction_example_mask() -> Grid {
    let (r2, r3) = (r2(), r3());
    [
        [-0.25 - r2 / 8.0, r2 / 8.0, 0.5 + r3 / 4.0 + r2 / 8.0, 0.25 - r2 / 8.0 + r3 / 4.0],
        [0.0, 0.5, 0.75 + r3 / 4.0, 0.25 + r3 / 4.0],
        [0.5 - r3 / 4.0 + r2 / 8.0, 0.75 - r3 / 4.0 - r2 / 8.0, 0.25 - r2 / 8.0, r2 / 8.0],
        [0.25 - r3 / 4.0, 0.25 - r3 / 4.0, 0.0, 0.0],
    ]
}

pub fn max_abs_diff(a: &Grid, b: &Grid) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Draws `(family, params)` with params uniform in `[-bound, bound]²`,
/// rejecting draws where `family` has no real mask.
pub fn random_feasible<R: rand::Rng>(rng: &mut R, bound: f64) -> (SolutionFamily, FreeParameters) {
    loop {
        let family = SolutionFamily::ALL[rng.gen_range(0..8)];
        let params = FreeParameters::new(rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound));
        if bidaub::mask::is_feasible(family, params) {
            return (family, params);
        }
    }
}
