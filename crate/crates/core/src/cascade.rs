//! Bi-cascade evaluation of φ on dyadic grids.
//!
//! φ vanishes at every integer point except (1,1), (2,1), (1,2) and (2,2).
//! Those four values are the eigenvector of the transition matrix for
//! eigenvalue 1, found by fixed-point iteration from `[1, 0, 0, 0]`. Each
//! refinement then applies the dilation equation once to halve the spacing.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::verify::{verify, DEFAULT_TOLERANCE};

pub const DEFAULT_MAX_ITERS: usize = 200;
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-13;
pub const MAX_LEVELS: u32 = 10;

/// The 4×4 matrix `L` with `b = L b` at the key points.
///
/// Rows and columns are ordered (1,1), (2,1), (1,2), (2,2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub entries: [[f64; 4]; 4],
}

impl TransitionMatrix {
    pub fn from_mask(mask: &Mask) -> Self {
        let c = &mask.c;
        TransitionMatrix {
            entries: [
                [c[1][1], c[0][1], c[1][0], c[0][0]],
                [c[3][1], c[2][1], c[3][0], c[2][0]],
                [c[1][3], c[0][3], c[1][2], c[0][2]],
                [c[3][3], c[2][3], c[3][2], c[2][2]],
            ],
        }
    }

    pub fn apply(&self, b: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(b).map(|(l, v)| l * v).sum();
        }
        out
    }

    pub fn column_sums(&self) -> [f64; 4] {
        let mut sums = [0.0; 4];
        for row in &self.entries {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// The eigenvalue besides 1, ½, ½ for masks satisfying the linear equations.
    pub fn fourth_eigenvalue(&self) -> f64 {
        // c22 + c33 − c32 − c23
        let e = &self.entries;
        e[3][3] + e[3][0] - e[3][2] - e[3][1]
    }

    /// `det(L − λI)` by Gaussian elimination with partial pivoting.
    pub fn characteristic(&self, lambda: f64) -> f64 {
        let mut a = self.entries;
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        det4(a)
    }
}

fn det4(mut a: [[f64; 4]; 4]) -> f64 {
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                a[r][k] -= f * a[col][k];
            }
        }
    }
    det
}

/// φ at the four interior integer points, ordered `[φ(1,1), φ(2,1), φ(1,2), φ(2,2)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyPointVector {
    pub values: [f64; 4],
}

impl KeyPointVector {
    pub fn new(values: [f64; 4]) -> Self {
        KeyPointVector { values }
    }

    pub fn phi11(&self) -> f64 {
        self.values[0]
    }
    pub fn phi21(&self) -> f64 {
        self.values[1]
    }
    pub fn phi12(&self) -> f64 {
        self.values[2]
    }
    pub fn phi22(&self) -> f64 {
        self.values[3]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub key: KeyPointVector,
    pub iterations: usize,
}

/// Iterates `b ← L b` from `[1, 0, 0, 0]` until successive iterates differ by
/// less than `tol` in the sup norm.
pub fn key_point_fixed_point(mask: &Mask, max_iters: usize, tol: f64) -> Result<FixedPoint> {
    if max_iters == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fixed point needs max_iters >= 1 and tol > 0 (got {max_iters}, {tol})"
        )));
    }
    let report = verify(mask, DEFAULT_TOLERANCE);
    if !report.passes {
        log::warn!(
            "mask fails the defining equations (max residual {:e}); fixed point may be meaningless",
            report.max_abs_residual
        );
    }
    let l = TransitionMatrix::from_mask(mask);
    // A second unit eigenvalue leaves the fixed point non-unique.
    if (l.fourth_eigenvalue() - 1.0).abs() < 1e-12 {
        return Err(Error::NoConvergence {
            iterations: 0,
            last_step: f64::NAN,
        });
    }

    let mut b = [1.0, 0.0, 0.0, 0.0];
    let mut step = f64::INFINITY;
    for it in 1..=max_iters {
        let next = l.apply(&b);
        step = next
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        b = next;
        if !step.is_finite() {
            break;
        }
        if step < tol {
            return Ok(FixedPoint {
                key: KeyPointVector::new(b),
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        last_step: step,
    })
}

/// Samples of φ on `{m/2ᵏ} × {n/2ᵏ}` over `[0, 3]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSurface {
    pub level: u32,
    /// Row-major, `values[m * side + n] = φ(m/2ᵏ, n/2ᵏ)`.
    pub values: Vec<f64>,
    pub mask: Mask,
}

impl DyadicSurface {
    pub fn side_for_level(level: u32) -> usize {
        3 * (1usize << level) + 1
    }

    /// Level-0 surface: key values on the 4×4 integer grid, zero elsewhere.
    pub fn from_key_points(mask: Mask, key: &KeyPointVector) -> Self {
        let mut values = vec![0.0; 16];
        values[4 + 1] = key.phi11();
        values[2 * 4 + 1] = key.phi21();
        values[4 + 2] = key.phi12();
        values[2 * 4 + 2] = key.phi22();
        DyadicSurface {
            level: 0,
            values,
            mask,
        }
    }

    pub fn zeros(mask: Mask, level: u32) -> Self {
        let side = Self::side_for_level(level);
        DyadicSurface {
            level,
            values: vec![0.0; side * side],
            mask,
        }
    }

    pub fn side(&self) -> usize {
        Self::side_for_level(self.level)
    }

    /// Points per unit length, `2ᵏ`.
    pub fn scale(&self) -> i64 {
        1i64 << self.level
    }

    /// φ at grid index `(m, n)`, zero outside the sampled square.
    #[inline]
    pub fn at(&self, m: i64, n: i64) -> f64 {
        let side = self.side() as i64;
        if m < 0 || n < 0 || m >= side || n >= side {
            0.0
        } else {
            self.values[(m * side + n) as usize]
        }
    }

    pub fn key_points(&self) -> KeyPointVector {
        let s = self.scale();
        KeyPointVector::new([self.at(s, s), self.at(2 * s, s), self.at(s, 2 * s), self.at(2 * s, 2 * s)])
    }

    /// One dilation step, returning the finer surface and the largest gap
    /// between recomputed even-index values and the values they refine.
    pub fn refine_with_discrepancy(&self) -> (DyadicSurface, f64) {
        let level = self.level + 1;
        let side = Self::side_for_level(level);
        let scale = self.scale();
        let c = &self.mask.c;
        let mut values = vec![0.0; side * side];
        values.par_chunks_mut(side).enumerate().for_each(|(m, row)| {
            let m = m as i64;
            for (n, out) in row.iter_mut().enumerate() {
                let n = n as i64;
                let mut acc = 0.0;
                for (i, ci) in c.iter().enumerate() {
                    let pm = m - i as i64 * scale;
                    for (j, cij) in ci.iter().enumerate() {
                        acc += cij * self.at(pm, n - j as i64 * scale);
                    }
                }
                *out = acc;
            }
        });
        let parent_side = self.side();
        let discrepancy = (0..parent_side)
            .flat_map(|m| (0..parent_side).map(move |n| (m, n)))
            .map(|(m, n)| (values[2 * m * side + 2 * n] - self.values[m * parent_side + n]).abs())
            .fold(0.0, f64::max);
        let surface = DyadicSurface {
            level,
            values,
            mask: self.mask.clone(),
        };
        (surface, discrepancy)
    }

    pub fn refine(&self) -> DyadicSurface {
        self.refine_with_discrepancy().0
    }

    /// Largest absolute value on the four boundary edges.
    pub fn max_boundary_abs(&self) -> f64 {
        let side = self.side() as i64;
        let last = side - 1;
        (0..side)
            .flat_map(|t| [self.at(0, t), self.at(last, t), self.at(t, 0), self.at(t, last)])
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    /// Largest `|Σ φ(x+a, y+b) − 1|` over `a, b ∈ {−1, 0, 1}` and samples in `[1, 2]²`.
    pub fn partition_of_unity_deviation(&self) -> f64 {
        let s = self.scale();
        let mut worst = 0.0f64;
        for m in s..=2 * s {
            for n in s..=2 * s {
                let mut sum = 0.0;
                for a in -1..=1 {
                    for b in -1..=1 {
                        sum += self.at(m + a * s, n + b * s);
                    }
                }
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    /// Riemann sum of φ² with cell area `4⁻ᵏ`.
    pub fn norm_squared(&self) -> f64 {
        let h = 1.0 / self.scale() as f64;
        self.values.iter().map(|v| v * v).sum::<f64>() * h * h
    }

    /// Writes `x,y,phi` rows with exact dyadic coordinates.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,phi")?;
        let side = self.side();
        for m in 0..side {
            let x = format_dyadic(m as i64, self.level);
            for n in 0..side {
                writeln!(
                    w,
                    "{},{},{}",
                    x,
                    format_dyadic(n as i64, self.level),
                    format_sci(self.values[m * side + n])
                )?;
            }
        }
        Ok(())
    }
}

/// Runs the fixed point and `levels` refinements.
pub fn cascade(mask: &Mask, levels: u32) -> Result<DyadicSurface> {
    if levels > MAX_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "levels must be at most {MAX_LEVELS}, got {levels}"
        )));
    }
    let fp = key_point_fixed_point(mask, DEFAULT_MAX_ITERS, DEFAULT_FIXED_POINT_TOL)?;
    let mut surface = DyadicSurface::from_key_points(mask.clone(), &fp.key);
    for _ in 0..levels {
        surface = surface.refine();
    }
    Ok(surface)
}

/// Exact decimal expansion of `m / 2^level`.
pub fn format_dyadic(m: i64, level: u32) -> String {
    let denom = 1i64 << level;
    let sign = if m < 0 { "-" } else { "" };
    let a = m.unsigned_abs();
    let whole = a / denom as u64;
    let rem = a % denom as u64;
    if rem == 0 {
        return format!("{sign}{whole}");
    }
    // rem / 2^k = rem * 5^k / 10^k
    let digits = rem as u128 * 5u128.pow(level);
    let frac = format!("{:0width$}", digits, width = level as usize);
    format!("{sign}{whole}.{}", frac.trim_end_matches('0'))
}

/// Scientific notation with 17 significant digits.
pub fn format_sci(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{build_mask, FreeParameters, SolutionFamily, SQRT_2};

    fn b1a() -> Mask {
        build_mask(SolutionFamily::B1a, FreeParameters::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn transition_matrix_layout() {
        let l = TransitionMatrix::from_mask(&b1a());
        let row = l.entries[0];
        let want = [0.5, SQRT_2 / 8.0, 0.0, -0.25 - SQRT_2 / 8.0];
        for (a, b) in row.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        for s in l.column_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!((l.fourth_eigenvalue() - (0.25 - SQRT_2 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn characteristic_vanishes_at_spectrum() {
        let l = TransitionMatrix::from_mask(&b1a());
        for lambda in [1.0, 0.5, l.fourth_eigenvalue()] {
            assert!(l.characteristic(lambda).abs() < 1e-12);
        }
        assert!(l.characteristic(0.0).abs() > 1e-3);
    }

    #[test]
    fn fixed_point_sums_to_one() {
        let fp = key_point_fixed_point(&b1a(), 200, 1e-13).unwrap();
        assert!((fp.key.sum() - 1.0).abs() < 1e-12);
        assert!(fp.iterations < 100);
        let l = TransitionMatrix::from_mask(&b1a());
        let lb = l.apply(&fp.key.values);
        for (x, y) in lb.iter().zip(&fp.key.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_errors() {
        let id = Mask::new([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        // L has two unit eigenvalues here.
        assert!(matches!(
            key_point_fixed_point(&id, 200, 1e-13),
            Err(Error::NoConvergence { .. })
        ));
        assert!(key_point_fixed_point(&b1a(), 0, 1e-13).is_err());
        assert!(matches!(
            key_point_fixed_point(&b1a(), 3, 1e-13),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn first_refinement_values() {
        let m = b1a();
        let s0 = cascade(&m, 0).unwrap();
        assert_eq!(s0.side(), 4);
        assert_eq!(s0.max_boundary_abs(), 0.0);
        let key = s0.key_points();
        let s1 = s0.refine();
        assert_eq!(s1.side(), 7);
        // φ(½,½) = c00 φ(1,1)
        assert!((s1.at(1, 1) - m.c[0][0] * key.phi11()).abs() < 1e-15);
        // φ(½,3/2) = Σ c[i][j] φ(1−i, 3−j)
        let mut want = 0.0;
        for i in 0..4i64 {
            for j in 0..4i64 {
                want += m.at(i, j) * s0.at(1 - i, 3 - j);
            }
        }
        assert!((s1.at(1, 3) - want).abs() < 1e-15);
        assert_eq!(s1.max_boundary_abs(), 0.0);
    }

    #[test]
    fn level_bound() {
        assert!(cascade(&b1a(), MAX_LEVELS + 1).is_err());
    }

    #[test]
    fn refinement_is_consistent() {
        let mut s = cascade(&b1a(), 0).unwrap();
        for _ in 0..4 {
            let (next, gap) = s.refine_with_discrepancy();
            assert!(gap < 1e-10, "gap {gap}");
            s = next;
        }
        assert!(s.partition_of_unity_deviation() < 1e-8);
    }

    #[test]
    fn dyadic_formatting() {
        assert_eq!(format_dyadic(65, 6), "1.015625");
        assert_eq!(format_dyadic(192, 6), "3");
        assert_eq!(format_dyadic(0, 3), "0");
        assert_eq!(format_dyadic(1, 10), "0.0009765625");
        assert_eq!(format_dyadic(-3, 1), "-1.5");
        assert_eq!(format_dyadic(5, 0), "5");
        let v: f64 = format_dyadic(3071, 10).parse().unwrap();
        assert_eq!(v, 3071.0 / 1024.0);
        assert_eq!(format_sci(0.0), "0.0000000000000000e0");
        let x = 0.1f64 + 0.2;
        assert_eq!(format_sci(x).parse::<f64>().unwrap(), x);
    }
}
