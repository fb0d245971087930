//! Closed-form construction of 4×4 refinement masks.
//!
//! The fourteen defining equations leave two coefficients free; here those
//! are `c32` and `c33`. Four more (`c23`, `c22`, `c31`, `c13`) follow from one
//! of eight solution families, and the remaining ten are linear in those six.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_3: f64 = 1.732_050_807_568_877_2_f64;

/// (1 + √3) / 4
pub const MU1: f64 = (1.0 + SQRT_3) / 4.0;
/// (1 − √3) / 4
pub const MU2: f64 = (1.0 - SQRT_3) / 4.0;

/// Discriminants in `[-DISCRIMINANT_SLACK, 0)` are clamped to zero.
pub const DISCRIMINANT_SLACK: f64 = 1e-14;

/// One of the eight real solution families of the quadratic subsystem.
///
/// The letter picks how `c13` relates to `c31` (A: equal, B: `c13 + c31 = ½ − 2c33`),
/// the digit picks `MU1` or `MU2`, and the trailing letter picks the sign of
/// the discriminant square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolutionFamily {
    A1a,
    A1b,
    A2a,
    A2b,
    B1a,
    B1b,
    B2a,
    B2b,
}

impl SolutionFamily {
    pub const ALL: [SolutionFamily; 8] = [
        SolutionFamily::A1a,
        SolutionFamily::A1b,
        SolutionFamily::A2a,
        SolutionFamily::A2b,
        SolutionFamily::B1a,
        SolutionFamily::B1b,
        SolutionFamily::B2a,
        SolutionFamily::B2b,
    ];

    pub fn is_a_type(self) -> bool {
        matches!(
            self,
            SolutionFamily::A1a | SolutionFamily::A1b | SolutionFamily::A2a | SolutionFamily::A2b
        )
    }

    pub fn mu(self) -> f64 {
        match self {
            SolutionFamily::A1a | SolutionFamily::A1b | SolutionFamily::B1a | SolutionFamily::B1b => MU1,
            _ => MU2,
        }
    }

    /// +1 for the "a" branch, −1 for "b".
    pub fn branch_sign(self) -> f64 {
        match self {
            SolutionFamily::A1a | SolutionFamily::A2a | SolutionFamily::B1a | SolutionFamily::B2a => 1.0,
            _ => -1.0,
        }
    }

    /// The family sharing everything but the square-root branch.
    pub fn partner(self) -> SolutionFamily {
        use SolutionFamily::*;
        match self {
            A1a => A1b,
            A1b => A1a,
            A2a => A2b,
            A2b => A2a,
            B1a => B1b,
            B1b => B1a,
            B2a => B2b,
            B2b => B2a,
        }
    }

    pub fn as_str(self) -> &'static str {
        use SolutionFamily::*;
        match self {
            A1a => "A1a",
            A1b => "A1b",
            A2a => "A2a",
            A2b => "A2b",
            B1a => "B1a",
            B1b => "B1b",
            B2a => "B2a",
            B2b => "B2b",
        }
    }
}

impl fmt::Display for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolutionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolutionFamily::ALL
            .iter()
            .copied()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown solution family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParameters {
    pub c32: f64,
    pub c33: f64,
}

impl FreeParameters {
    pub fn new(c32: f64, c33: f64) -> Self {
        FreeParameters { c32, c33 }
    }

    fn check_finite(&self) -> Result<()> {
        if self.c32.is_finite() && self.c33.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite {
                what: format!("free parameters c32={} c33={}", self.c32, self.c33),
            })
        }
    }
}

/// The six coefficients every other entry is a linear function of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreCoefficients {
    pub c13: f64,
    pub c22: f64,
    pub c23: f64,
    pub c31: f64,
    pub c32: f64,
    pub c33: f64,
}

/// The ten coefficients fixed by the averaging and regularity equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependentCoefficients {
    pub c00: f64,
    pub c01: f64,
    pub c02: f64,
    pub c03: f64,
    pub c10: f64,
    pub c11: f64,
    pub c12: f64,
    pub c20: f64,
    pub c21: f64,
    pub c30: f64,
}

/// A 4×4 refinement mask, `c[i][j]` with `i` the x-shift and `j` the y-shift.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub c: [[f64; 4]; 4],
    pub family: Option<SolutionFamily>,
    pub params: Option<FreeParameters>,
}

impl Mask {
    pub fn new(c: [[f64; 4]; 4]) -> Result<Self> {
        if let Some((i, j)) = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .find(|&(i, j)| !c[i][j].is_finite())
        {
            return Err(Error::NonFinite {
                what: format!("mask coefficient c{i}{j} = {}", c[i][j]),
            });
        }
        Ok(Mask {
            c,
            family: None,
            params: None,
        })
    }

    pub fn zeros() -> Self {
        Mask {
            c: [[0.0; 4]; 4],
            family: None,
            params: None,
        }
    }

    /// Coefficient at integer indices; zero outside the 4×4 support.
    #[inline]
    pub fn at(&self, i: i64, j: i64) -> f64 {
        if (0..4).contains(&i) && (0..4).contains(&j) {
            self.c[i as usize][j as usize]
        } else {
            0.0
        }
    }

    /// Mask with x and y swapped: `c[i][j] -> c[j][i]`.
    pub fn transposed(&self) -> Mask {
        let mut c = [[0.0; 4]; 4];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.c[j][i];
            }
        }
        Mask {
            c,
            family: None,
            params: None,
        }
    }

    /// Point reflection of the support: `c[i][j] -> c[3-i][3-j]`.
    pub fn reflected(&self) -> Mask {
        let mut c = [[0.0; 4]; 4];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.c[3 - i][3 - j];
            }
        }
        Mask {
            c,
            family: None,
            params: None,
        }
    }

    pub fn core(&self) -> CoreCoefficients {
        let c = &self.c;
        CoreCoefficients {
            c13: c[1][3],
            c22: c[2][2],
            c23: c[2][3],
            c31: c[3][1],
            c32: c[3][2],
            c33: c[3][3],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MaskFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: MaskFile = serde_json::from_str(s)?;
        Mask::try_from(file)
    }
}

/// On-disk layout of a mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<SolutionFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c32: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c33: Option<f64>,
    pub coefficients: [[f64; 4]; 4],
}

impl From<&Mask> for MaskFile {
    fn from(m: &Mask) -> Self {
        MaskFile {
            family: m.family,
            c32: m.params.map(|p| p.c32),
            c33: m.params.map(|p| p.c33),
            coefficients: m.c,
        }
    }
}

impl TryFrom<MaskFile> for Mask {
    type Error = Error;

    fn try_from(f: MaskFile) -> Result<Mask> {
        let mut mask = Mask::new(f.coefficients)?;
        mask.family = f.family;
        mask.params = match (f.c32, f.c33) {
            (Some(c32), Some(c33)) => Some(FreeParameters { c32, c33 }),
            _ => None,
        };
        Ok(mask)
    }
}

/// Δ₁ (A1 families), Δ₂ (A2) or Δ₃ (all B families) at the given parameters.
pub fn discriminant(family: SolutionFamily, params: FreeParameters) -> f64 {
    let FreeParameters { c32, c33 } = params;
    let quad = -48.0 * c32 * c32 - 32.0 * c33 * c32 - 48.0 * c33 * c33;
    match family {
        SolutionFamily::A1a | SolutionFamily::A1b => {
            -34.0 + 32.0 * c33 * SQRT_3 - 20.0 * SQRT_3 + 32.0 * c32 * SQRT_3 + 32.0 * c33 + 48.0 * c32
                + quad
        }
        SolutionFamily::A2a | SolutionFamily::A2b => {
            -34.0 - 32.0 * c32 * SQRT_3 - 32.0 * c33 * SQRT_3 + 20.0 * SQRT_3 + 32.0 * c33 + 48.0 * c32
                + quad
        }
        _ => 2.0 - 16.0 * c33 + quad,
    }
}

/// Whether `family` yields a real mask at `params`.
pub fn is_feasible(family: SolutionFamily, params: FreeParameters) -> bool {
    discriminant(family, params) >= -DISCRIMINANT_SLACK
}

/// Solves for `c23`, `c22`, `c31` and `c13`, in that order.
pub fn solve_core_six(family: SolutionFamily, params: FreeParameters) -> Result<CoreCoefficients> {
    params.check_finite()?;
    let delta = discriminant(family, params);
    if delta < -DISCRIMINANT_SLACK {
        return Err(Error::InfeasibleParameters {
            family,
            c32: params.c32,
            c33: params.c33,
            discriminant: delta,
        });
    }
    let root = delta.max(0.0).sqrt() / 8.0;
    let FreeParameters { c32, c33 } = params;
    let mu = family.mu();
    let sign = family.branch_sign();

    let (c23, c22, c31, c13);
    if family.is_a_type() {
        c23 = 0.25 + 2.0 * mu - 0.5 * (c32 + c33) + sign * root;
        c22 = 0.75 + 4.0 * mu - c32 - c33 - c23;
        c31 = mu - c33;
        c13 = c31;
    } else {
        c23 = -0.5 * (c32 + c33) + sign * root;
        c22 = 0.25 - c32 - c33 - c23;
        c31 = mu - c33;
        c13 = 0.5 - 2.0 * c33 - c31;
    }
    Ok(CoreCoefficients {
        c13,
        c22,
        c23,
        c31,
        c32,
        c33,
    })
}

/// Solution of the averaging and regularity equations for the other ten entries.
pub fn back_substitute(core: &CoreCoefficients) -> DependentCoefficients {
    let CoreCoefficients {
        c13,
        c22,
        c23,
        c31,
        c32,
        c33,
    } = *core;
    DependentCoefficients {
        c00: -c31 - 2.0 * c33 - c13 + c22,
        c01: -c31 - 2.0 * c33 + 0.5 + c23 - c13,
        c02: c13 + c33 + 0.5 - c22,
        c03: c33 - c23 + c13,
        c10: -c31 - 2.0 * c33 + c32 - c13 + 0.5,
        c11: -c13 - c31 - c33 + 1.0,
        c12: -c32 + c13 + c33 + 0.5,
        c20: c31 + c33 - c22 + 0.5,
        c21: c31 + c33 + 0.5 - c23,
        c30: c31 + c33 - c32,
    }
}

/// Assembles the full 4×4 array from the six core and ten dependent entries.
pub fn assemble(core: &CoreCoefficients, dep: &DependentCoefficients) -> [[f64; 4]; 4] {
    [
        [dep.c00, dep.c01, dep.c02, dep.c03],
        [dep.c10, dep.c11, dep.c12, core.c13],
        [dep.c20, dep.c21, core.c22, core.c23],
        [dep.c30, core.c31, core.c32, core.c33],
    ]
}

/// Builds the mask of `family` at `params`.
pub fn build_mask(family: SolutionFamily, params: FreeParameters) -> Result<Mask> {
    let core = solve_core_six(family, params)?;
    let dep = back_substitute(&core);
    let mut mask = Mask::new(assemble(&core, &dep))?;
    mask.family = Some(family);
    mask.params = Some(params);
    Ok(mask)
}
