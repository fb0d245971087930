//! Reproducing planes `k·x + l·y + m` from integer translates of φ.
//!
//! With γx = 2φ(2,2) + φ(1,1) + 2φ(2,1) + φ(1,2) and
//! γy = 2φ(2,2) + φ(1,1) + φ(2,1) + 2φ(1,2), the plane equals
//! `Σ_{u,v} (k·u + l·v + m + k·γx + l·γy) φ(x − u, y − v)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cascade::{format_dyadic, format_sci, DyadicSurface, KeyPointVector};
use crate::error::{Error, Result};

/// Tolerance on `Σ key − 1` accepted by [`plan`].
pub const KEY_SUM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub k: f64,
    pub l: f64,
    pub m: f64,
}

impl LinearFunctional {
    pub fn new(k: f64, l: f64, m: f64) -> Self {
        LinearFunctional { k, l, m }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.k * x + self.l * y + self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproductionPlan {
    pub functional: LinearFunctional,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub key: KeyPointVector,
}

impl ReproductionPlan {
    /// The part of the translate coefficient independent of `(i, j)`.
    pub fn constant_term(&self) -> f64 {
        let LinearFunctional { k, l, m } = self.functional;
        k * self.gamma_x + l * self.gamma_y + m
    }

    /// Coefficient `a(i, j)` of `φ(x − i, y − j)`.
    pub fn coefficient(&self, i: i64, j: i64) -> f64 {
        let LinearFunctional { k, l, .. } = self.functional;
        k * i as f64 + l * j as f64 + self.constant_term()
    }
}

pub fn plan(functional: LinearFunctional, key: KeyPointVector) -> Result<ReproductionPlan> {
    let sum = key.sum();
    if !((sum - 1.0).abs() <= KEY_SUM_TOLERANCE) {
        return Err(Error::InvalidKeyVector { sum });
    }
    let (p11, p21, p12, p22) = (key.phi11(), key.phi21(), key.phi12(), key.phi22());
    Ok(ReproductionPlan {
        functional,
        gamma_x: 2.0 * p22 + p11 + 2.0 * p21 + p12,
        gamma_y: 2.0 * p22 + p11 + p21 + 2.0 * p12,
        key,
    })
}

/// Integer-cornered evaluation window `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl Window {
    pub fn square(lo: i64, hi: i64) -> Self {
        Window {
            x0: lo,
            x1: hi,
            y0: lo,
            y1: hi,
        }
    }
}

impl Default for Window {
    fn default() -> Self {
        Window::square(3, 6)
    }
}

/// Inclusive translate ranges for `u` (x) and `v` (y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateRange {
    pub u: (i64, i64),
    pub v: (i64, i64),
}

impl TranslateRange {
    /// The narrowest range covering every translate that touches `window`.
    pub fn covering(window: &Window) -> Self {
        TranslateRange {
            u: (window.x0 - 3, window.x1),
            v: (window.y0 - 3, window.y1),
        }
    }
}

impl Default for TranslateRange {
    fn default() -> Self {
        TranslateRange { u: (0, 6), v: (0, 6) }
    }
}

/// Reconstructed values on the dyadic lattice of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub level: u32,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    /// Row-major over (x, y).
    pub values: Vec<f64>,
}

impl Reconstruction {
    fn scale(&self) -> i64 {
        1i64 << self.level
    }

    /// Lattice indices (in units of 2⁻ᵏ) of the point at `(p, q)`.
    fn lattice_index(&self, p: usize, q: usize) -> (i64, i64) {
        let s = self.scale();
        (self.window.x0 * s + p as i64, self.window.y0 * s + q as i64)
    }

    pub fn point(&self, p: usize, q: usize) -> (f64, f64) {
        let s = self.scale() as f64;
        let (gx, gy) = self.lattice_index(p, q);
        (gx as f64 / s, gy as f64 / s)
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.ny + q]
    }

    pub fn write_csv<W: Write>(&self, mut w: W, functional: &LinearFunctional) -> std::io::Result<()> {
        writeln!(w, "x,y,reconstructed,exact,error")?;
        for p in 0..self.nx {
            for q in 0..self.ny {
                let (gx, gy) = self.lattice_index(p, q);
                let (x, y) = self.point(p, q);
                let got = self.get(p, q);
                let exact = functional.eval(x, y);
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    format_dyadic(gx, self.level),
                    format_dyadic(gy, self.level),
                    format_sci(got),
                    format_sci(exact),
                    format_sci(got - exact)
                )?;
            }
        }
        Ok(())
    }
}

/// Evaluates `Σ a(u, v) φ(x − u, y − v)` over `range` at every lattice point of `window`.
pub fn evaluate(
    plan: &ReproductionPlan,
    surface: &DyadicSurface,
    range: TranslateRange,
    window: Window,
) -> Result<Reconstruction> {
    if window.x1 < window.x0 || window.y1 < window.y0 {
        return Err(Error::InvalidArgument(format!("empty window {window:?}")));
    }
    if range.u.1 < range.u.0 || range.v.1 < range.v.0 {
        return Err(Error::InvalidArgument(format!("empty translate range {range:?}")));
    }
    let need = TranslateRange::covering(&window);
    if range.u.0 > need.u.0 || range.u.1 < need.u.1 || range.v.0 > need.v.0 || range.v.1 < need.v.1 {
        return Err(Error::InsufficientRange {
            detail: format!(
                "window {window:?} needs u in [{}, {}] and v in [{}, {}], got {range:?}",
                need.u.0, need.u.1, need.v.0, need.v.1
            ),
        });
    }

    let s = surface.scale();
    let nx = ((window.x1 - window.x0) * s + 1) as usize;
    let ny = ((window.y1 - window.y0) * s + 1) as usize;
    let mut values = vec![0.0; nx * ny];
    for p in 0..nx {
        let gx = window.x0 * s + p as i64;
        for q in 0..ny {
            let gy = window.y0 * s + q as i64;
            let mut acc = 0.0;
            for u in range.u.0..=range.u.1 {
                let mx = gx - u * s;
                for v in range.v.0..=range.v.1 {
                    let phi = surface.at(mx, gy - v * s);
                    if phi != 0.0 {
                        acc += plan.coefficient(u, v) * phi;
                    }
                }
            }
            values[p * ny + q] = acc;
        }
    }
    Ok(Reconstruction {
        level: surface.level,
        window,
        nx,
        ny,
        values,
    })
}

/// Sup-norm of reconstruction minus the plane over the reconstruction window.
pub fn max_error(reconstruction: &Reconstruction, functional: &LinearFunctional) -> f64 {
    let mut worst = 0.0f64;
    for p in 0..reconstruction.nx {
        for q in 0..reconstruction.ny {
            let (x, y) = reconstruction.point(p, q);
            worst = worst.max((reconstruction.get(p, q) - functional.eval(x, y)).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproductionSummary {
    pub max_error: f64,
    pub window: Window,
    pub level: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::cascade;
    use crate::mask::{build_mask, FreeParameters, Mask, SolutionFamily};

    fn key() -> KeyPointVector {
        KeyPointVector::new([0.4, 0.1, 0.3, 0.2])
    }

    #[test]
    fn worked_example_constant() {
        let p = plan(LinearFunctional::new(1.0, 6.0, -10.0), key()).unwrap();
        let (p11, p21, p12, p22) = (0.4, 0.1, 0.3, 0.2);
        let want = 14.0 * p22 + 7.0 * p11 + 8.0 * p21 + 13.0 * p12 - 10.0;
        assert!((p.constant_term() - want).abs() < 1e-14);
        assert!((p.coefficient(2, 3) - (want + 2.0 + 18.0)).abs() < 1e-13);
    }

    #[test]
    fn constant_and_pure_x_plans() {
        let p = plan(LinearFunctional::new(0.0, 0.0, 1.0), key()).unwrap();
        for (i, j) in [(0, 0), (3, -2), (7, 7)] {
            assert_eq!(p.coefficient(i, j), 1.0);
        }
        let p = plan(LinearFunctional::new(1.0, 0.0, 0.0), key()).unwrap();
        let gx = 2.0 * 0.2 + 0.4 + 2.0 * 0.1 + 0.3;
        assert!((p.coefficient(5, 9) - (5.0 + gx)).abs() < 1e-14);
    }

    #[test]
    fn rejects_unnormalised_key() {
        let bad = KeyPointVector::new([0.5, 0.5, 0.5, 0.5]);
        assert!(matches!(
            plan(LinearFunctional::new(1.0, 0.0, 0.0), bad),
            Err(Error::InvalidKeyVector { .. })
        ));
    }

    #[test]
    fn range_must_cover_window() {
        let m = build_mask(SolutionFamily::B2b, FreeParameters::new(0.0, 0.0)).unwrap();
        let s = cascade(&m, 2).unwrap();
        let p = plan(LinearFunctional::new(0.0, 0.0, 1.0), s.key_points()).unwrap();
        let narrow = TranslateRange { u: (1, 6), v: (0, 6) };
        assert!(matches!(
            evaluate(&p, &s, narrow, Window::default()),
            Err(Error::InsufficientRange { .. })
        ));
    }

    #[test]
    fn constant_reproduced() {
        let m = build_mask(SolutionFamily::B2b, FreeParameters::new(0.0, 0.0)).unwrap();
        let s = cascade(&m, 3).unwrap();
        let f = LinearFunctional::new(0.0, 0.0, 1.0);
        let p = plan(f, s.key_points()).unwrap();
        let r = evaluate(&p, &s, TranslateRange::default(), Window::default()).unwrap();
        assert_eq!((r.nx, r.ny), (25, 25));
        assert!(max_error(&r, &f) < 1e-8);
    }

    #[test]
    fn zero_surface_error_is_one() {
        let s = DyadicSurface::zeros(Mask::zeros(), 3);
        let f = LinearFunctional::new(0.0, 0.0, 1.0);
        let p = plan(f, key()).unwrap();
        let r = evaluate(&p, &s, TranslateRange::default(), Window::default()).unwrap();
        assert_eq!(max_error(&r, &f), 1.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let m = build_mask(SolutionFamily::B2b, FreeParameters::new(0.0, 0.0)).unwrap();
        let s = cascade(&m, 1).unwrap();
        let f = LinearFunctional::new(1.0, 6.0, -10.0);
        let p = plan(f, s.key_points()).unwrap();
        let r = evaluate(&p, &s, TranslateRange::default(), Window::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,reconstructed,exact,error"));
        assert_eq!(lines.count(), 49);
        assert!(text.contains("\n3.5,3,"));
    }
}
