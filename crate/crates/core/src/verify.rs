//! Residuals of the fourteen defining equations for an arbitrary 4×4 mask.
//!
//! The canonical set is: averaging, sum of squares, orthogonality at shifts
//! (1,1), (1,0) and (0,1), and the nine order-2 sum rules. Orthogonality at
//! other shifts and the four parity sums are reported as diagnostics only.

use serde::{Deserialize, Serialize};

use crate::cascade::TransitionMatrix;
use crate::error::{Error, Result};
use crate::mask::Mask;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Integer translate `(b, d)` of φ in x and y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShiftPair {
    pub b: i64,
    pub d: i64,
}

impl ShiftPair {
    pub const fn new(b: i64, d: i64) -> Self {
        ShiftPair { b, d }
    }
}

/// Shifts whose orthogonality residuals are among the fourteen equations.
pub const CANONICAL_SHIFTS: [ShiftPair; 3] =
    [ShiftPair::new(1, 1), ShiftPair::new(1, 0), ShiftPair::new(0, 1)];

pub fn averaging_residual(mask: &Mask) -> f64 {
    mask.c.iter().flatten().sum::<f64>() - 4.0
}

pub fn sum_of_squares_residual(mask: &Mask) -> f64 {
    mask.c.iter().flatten().map(|v| v * v).sum::<f64>() - 4.0
}

/// `Σ c[i][j]·c[i−2b][j−2d]`, zero-extended outside the support.
pub fn orthogonality_residual(mask: &Mask, shift: ShiftPair) -> Result<f64> {
    if shift.b == 0 && shift.d == 0 {
        return Err(Error::ZeroShift);
    }
    let mut acc = 0.0;
    for i in 0..4i64 {
        for j in 0..4i64 {
            acc += mask.at(i, j) * mask.at(i - 2 * shift.b, j - 2 * shift.d);
        }
    }
    Ok(acc)
}

/// The nine sum-rule residuals (LHS − RHS), in the order of the displayed equations.
pub fn regularity_residuals(mask: &Mask) -> [f64; 9] {
    let c = &mask.c;
    let even_even = c[0][0] + c[0][2] + c[2][0] + c[2][2];
    [
        (c[0][1] + c[0][3] + c[2][1] + c[2][3]) - even_even,
        (c[1][1] + c[1][3] + c[3][1] + c[3][3]) - even_even,
        (c[1][0] + c[1][2] + c[3][0] + c[3][2]) - even_even,
        (2.0 * c[2][0] + 2.0 * c[2][2]) - (2.0 * c[2][1] + 2.0 * c[2][3]),
        (c[1][1] + c[1][3] + 3.0 * c[3][1] + 3.0 * c[3][3]) - (2.0 * c[2][1] + 2.0 * c[2][3]),
        (c[1][0] + c[1][2] + 3.0 * c[3][0] + 3.0 * c[3][2]) - (2.0 * c[2][1] + 2.0 * c[2][3]),
        (c[0][1] + c[2][1] + 3.0 * c[0][3] + 3.0 * c[2][3]) - (2.0 * c[0][2] + 2.0 * c[2][2]),
        (c[1][1] + c[3][1] + 3.0 * c[1][3] + 3.0 * c[3][3]) - (2.0 * c[0][2] + 2.0 * c[2][2]),
        (2.0 * c[1][2] + 2.0 * c[3][2]) - (2.0 * c[0][2] + 2.0 * c[2][2]),
    ]
}

/// Sums over the four index-parity classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParitySums {
    /// (even, even)
    pub w1: f64,
    /// (odd, even)
    pub w2: f64,
    /// (odd, odd)
    pub w3: f64,
    /// (even, odd)
    pub w4: f64,
}

pub fn parity_sums(mask: &Mask) -> ParitySums {
    let mut w = [0.0; 4];
    for (i, row) in mask.c.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let class = match (i % 2, j % 2) {
                (0, 0) => 0,
                (1, 0) => 1,
                (1, 1) => 2,
                _ => 3,
            };
            w[class] += v;
        }
    }
    ParitySums {
        w1: w[0],
        w2: w[1],
        w3: w[2],
        w4: w[3],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftResidual {
    pub b: i64,
    pub d: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub tolerance: f64,
    pub passes: bool,
    pub averaging_residual: f64,
    pub sum_of_squares_residual: f64,
    pub orthogonality_residuals: Vec<ShiftResidual>,
    pub regularity_residuals: [f64; 9],
    pub parity_sums: ParitySums,
    pub extra_shift_residuals: Vec<ShiftResidual>,
    /// The eigenvalue `c22 + c33 − c32 − c23` of the transition matrix.
    pub fourth_eigenvalue: f64,
    pub max_abs_residual: f64,
}

impl ConstraintReport {
    /// Magnitudes of the fourteen gating residuals.
    pub fn canonical_residuals(&self) -> impl Iterator<Item = f64> + '_ {
        [self.averaging_residual, self.sum_of_squares_residual]
            .into_iter()
            .chain(self.orthogonality_residuals.iter().map(|s| s.residual))
            .chain(self.regularity_residuals.iter().copied())
            .map(f64::abs)
    }

    pub fn max_canonical_residual(&self) -> f64 {
        self.canonical_residuals().fold(0.0, f64::max)
    }

    pub fn max_extra_shift_residual(&self) -> f64 {
        self.extra_shift_residuals
            .iter()
            .map(|s| s.residual.abs())
            .fold(0.0, f64::max)
    }

    /// Drops the diagnostic shifts and recomputes the maximum accordingly.
    pub fn without_extra_shifts(mut self) -> Self {
        self.extra_shift_residuals.clear();
        self.max_abs_residual = self.max_canonical_residual();
        self
    }
}

/// Full report for `mask`. Extra shifts cover `[-2, 2]²` minus the origin and
/// the canonical three; they never affect `passes`.
pub fn verify(mask: &Mask, tol: f64) -> ConstraintReport {
    let residual = |s: ShiftPair| ShiftResidual {
        b: s.b,
        d: s.d,
        residual: orthogonality_residual(mask, s).expect("nonzero shift"),
    };
    let orthogonality_residuals: Vec<_> = CANONICAL_SHIFTS.iter().copied().map(residual).collect();
    let extra_shift_residuals: Vec<_> = (-2..=2)
        .flat_map(|b| (-2..=2).map(move |d| ShiftPair::new(b, d)))
        .filter(|s| (s.b, s.d) != (0, 0) && !CANONICAL_SHIFTS.contains(s))
        .map(residual)
        .collect();

    let mut report = ConstraintReport {
        tolerance: tol,
        passes: false,
        averaging_residual: averaging_residual(mask),
        sum_of_squares_residual: sum_of_squares_residual(mask),
        orthogonality_residuals,
        regularity_residuals: regularity_residuals(mask),
        parity_sums: parity_sums(mask),
        extra_shift_residuals,
        fourth_eigenvalue: TransitionMatrix::from_mask(mask).fourth_eigenvalue(),
        max_abs_residual: 0.0,
    };
    let canonical = report.max_canonical_residual();
    report.passes = canonical < tol;
    report.max_abs_residual = canonical.max(report.max_extra_shift_residual());
    report
}
