//! Numeric cross-check of the closed-form families.
//!
//! With `c32` and `c33` fixed, the four orthogonality equations reduce (after
//! eliminating the ten linearly determined coefficients) to four quadratics in
//! `c23`, `c22`, `c31`, `c13`. Damped Newton from many random starts collects
//! their real roots, which are then matched against the eight families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mask::{solve_core_six, FreeParameters, SolutionFamily};

/// Residual sup-norm that counts as a root.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Distance under which two roots, or a root and a family solution, are identified.
pub const MATCH_TOLERANCE: f64 = 1e-7;
pub const MAX_NEWTON_ITERS: usize = 100;
pub const START_BOX: f64 = 2.0;

// Variable slots: unknowns first, in solve order, then the two parameters.
const C23: usize = 0;
const C22: usize = 1;
const C31: usize = 2;
const C13: usize = 3;
const C32: usize = 4;
const C33: usize = 5;
const ONE: usize = 6;

/// `coef · x[a] · x[b]`; `ONE` stands for the constant 1.
type Term = (f64, usize, usize);

const EQ1: &[Term] = &[
    (20.0, C33, C13),
    (20.0, C33, C31),
    (-4.0, C22, C13),
    (-8.0, C33, C22),
    (8.0, C31, C13),
    (-4.0, C31, C22),
    (-8.0, C33, C23),
    (-4.0, C31, C23),
    (-4.0, C13, C32),
    (-8.0, C33, C32),
    (-4.0, C31, C32),
    (-2.0, C13, ONE),
    (-2.0, C22, ONE),
    (-2.0, C31, ONE),
    (-2.0, C33, ONE),
    (4.0, C32, C32),
    (20.0, C33, C33),
    (8.0, C13, C13),
    (4.0, C22, C22),
    (4.0, C23, C23),
    (8.0, C31, C31),
    (2.5, ONE, ONE),
    (-4.0, C23, C13),
    // right-hand side
    (-4.0, ONE, ONE),
];

const EQ2: &[Term] = &[
    (-1.0, C33, C31),
    (-1.0, C33, C33),
    (1.0, C33, ONE),
    (-1.0, C33, C13),
    (-1.0, C31, C32),
    (-2.0, C33, C32),
    (0.5, C32, ONE),
    (-1.0, C13, C32),
    (1.0, C32, C32),
    (-1.0, C31, C23),
    (-2.0, C33, C23),
    (1.0, C23, C23),
    (0.5, C23, ONE),
    (-1.0, C23, C13),
    (-1.0, C31, C22),
    (-2.0, C33, C22),
    (1.0, C22, C22),
    (-1.0, C22, C13),
];

const EQ3: &[Term] = &[
    (-2.0, C33, C13),
    (-10.0, C33, C31),
    (2.0, C22, C13),
    (4.0, C33, C22),
    (-4.0, C31, C13),
    (2.0, C31, C22),
    (4.0, C33, C23),
    (2.0, C31, C23),
    (2.0, C13, C32),
    (4.0, C33, C32),
    (2.0, C31, C32),
    (-1.0, C13, ONE),
    (1.0, C22, ONE),
    (1.0, C31, ONE),
    (-1.0, C33, ONE),
    (-2.0, C32, C32),
    (-6.0, C33, C33),
    (-2.0, C22, C22),
    (-2.0, C23, C23),
    (-4.0, C31, C31),
    (2.0, C23, C13),
    (0.25, ONE, ONE),
];

const EQ4: &[Term] = &[
    (-10.0, C33, C13),
    (-2.0, C33, C31),
    (2.0, C22, C13),
    (4.0, C33, C22),
    (-4.0, C31, C13),
    (2.0, C31, C22),
    (4.0, C33, C23),
    (2.0, C31, C23),
    (2.0, C13, C32),
    (4.0, C33, C32),
    (2.0, C31, C32),
    (1.0, C13, ONE),
    (1.0, C22, ONE),
    (-1.0, C31, ONE),
    (-1.0, C33, ONE),
    (-2.0, C32, C32),
    (-6.0, C33, C33),
    (-4.0, C13, C13),
    (-2.0, C22, C22),
    (-2.0, C23, C23),
    (2.0, C23, C13),
    (0.25, ONE, ONE),
];

const EQUATIONS: [&[Term]; 4] = [EQ1, EQ2, EQ3, EQ4];

/// The four quadratics at fixed `(c32, c33)`; points are `[c23, c22, c31, c13]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSystem {
    pub c32: f64,
    pub c33: f64,
}

impl QuadraticSystem {
    pub fn new(c32: f64, c33: f64) -> Self {
        QuadraticSystem { c32, c33 }
    }

    fn slots(&self, point: &[f64; 4]) -> [f64; 7] {
        [point[0], point[1], point[2], point[3], self.c32, self.c33, 1.0]
    }

    pub fn residuals(&self, point: &[f64; 4]) -> [f64; 4] {
        let x = self.slots(point);
        let mut out = [0.0; 4];
        for (o, eq) in out.iter_mut().zip(EQUATIONS) {
            *o = eq.iter().map(|&(c, a, b)| c * x[a] * x[b]).sum();
        }
        out
    }

    /// Row `r` holds the gradient of equation `r` with respect to the four unknowns.
    pub fn jacobian(&self, point: &[f64; 4]) -> [[f64; 4]; 4] {
        let x = self.slots(point);
        let mut jac = [[0.0; 4]; 4];
        for (row, eq) in jac.iter_mut().zip(EQUATIONS) {
            for &(c, a, b) in eq.iter() {
                if a < 4 {
                    row[a] += c * x[b];
                }
                if b < 4 {
                    row[b] += c * x[a];
                }
            }
        }
        jac
    }

    /// Closed-form solutions of every feasible family, as `[c23, c22, c31, c13]`.
    pub fn family_solutions(&self) -> Vec<(SolutionFamily, [f64; 4])> {
        let params = FreeParameters::new(self.c32, self.c33);
        SolutionFamily::ALL
            .iter()
            .filter_map(|&f| {
                solve_core_six(f, params)
                    .ok()
                    .map(|c| (f, [c.c23, c.c22, c.c31, c.c13]))
            })
            .collect()
    }
}

fn sup_norm(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Solves `a x = rhs` with partial pivoting; `None` if singular.
fn solve4(mut a: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(pivot, col);
        rhs.swap(pivot, col);
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                a[r][k] -= f * a[col][k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let tail: f64 = (r + 1..4).map(|k| a[r][k] * x[k]).sum();
        x[r] = (rhs[r] - tail) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Damped Newton from `start`; returns the root if the residual drops below
/// [`ROOT_TOLERANCE`] within [`MAX_NEWTON_ITERS`] steps.
pub fn newton(system: &QuadraticSystem, start: [f64; 4]) -> Option<[f64; 4]> {
    let mut x = start;
    let mut f = system.residuals(&x);
    let mut norm = sup_norm(&f);
    for _ in 0..MAX_NEWTON_ITERS {
        if norm < ROOT_TOLERANCE {
            return Some(polish(system, x));
        }
        let dx = solve4(system.jacobian(&x), f.map(|v| -v))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: [f64; 4] = std::array::from_fn(|i| x[i] + t * dx[i]);
            let cf = system.residuals(&cand);
            let cn = sup_norm(&cf);
            if cn.is_finite() && cn < norm {
                x = cand;
                f = cf;
                norm = cn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (norm < ROOT_TOLERANCE).then(|| polish(system, x))
}

/// Keeps stepping past the acceptance tolerance while the residual falls.
///
/// Both the Newton step and its double are tried: at a double root (the two
/// branches of a family meeting at zero discriminant) plain Newton only
/// halves the error per step, while the doubled step converges quickly.
fn polish(system: &QuadraticSystem, mut x: [f64; 4]) -> [f64; 4] {
    let mut norm = sup_norm(&system.residuals(&x));
    for _ in 0..MAX_NEWTON_ITERS {
        let f = system.residuals(&x);
        let Some(dx) = solve4(system.jacobian(&x), f.map(|v| -v)) else { break };
        let best = [1.0, 2.0]
            .into_iter()
            .map(|t| {
                let cand: [f64; 4] = std::array::from_fn(|i| x[i] + t * dx[i]);
                (sup_norm(&system.residuals(&cand)), cand)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        if !(best.0 < norm) {
            break;
        }
        norm = best.0;
        x = best.1;
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundRoot {
    pub values: [f64; 4],
    pub family: Option<SolutionFamily>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub c32: f64,
    pub c33: f64,
    pub starts: usize,
    /// Starts that converged to some root (before deduplication).
    pub converged: usize,
    pub roots: Vec<FoundRoot>,
    pub unmatched: Vec<[f64; 4]>,
}

impl SolutionSet {
    /// Feasible families whose closed-form solution no found root matches.
    pub fn missed_families(&self) -> Vec<SolutionFamily> {
        QuadraticSystem::new(self.c32, self.c33)
            .family_solutions()
            .into_iter()
            .filter(|(_, sol)| !self.roots.iter().any(|r| distance(&r.values, sol) < MATCH_TOLERANCE))
            .map(|(f, _)| f)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            c32: f64,
            c33: f64,
            roots: &'a [FoundRoot],
            unmatched_count: usize,
        }
        serde_json::to_string_pretty(&Out {
            c32: self.c32,
            c33: self.c33,
            roots: &self.roots,
            unmatched_count: self.unmatched.len(),
        })
    }
}

/// Multistart Newton over `[-2, 2]⁴` with `starts` seeded random points.
pub fn solve_all(c32: f64, c33: f64, starts: usize, seed: u64) -> SolutionSet {
    let system = QuadraticSystem::new(c32, c33);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 4]> = (0..starts)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-START_BOX..=START_BOX)))
        .collect();

    let mut found: Vec<[f64; 4]> = points
        .par_iter()
        .filter_map(|&p| newton(&system, p))
        .collect();
    let converged = found.len();
    found.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut distinct: Vec<[f64; 4]> = Vec::new();
    for r in found {
        if !distinct.iter().any(|d| distance(d, &r) < MATCH_TOLERANCE) {
            distinct.push(r);
        }
    }

    let families = system.family_solutions();
    let mut roots = Vec::with_capacity(distinct.len());
    let mut unmatched = Vec::new();
    for values in distinct {
        let family = families
            .iter()
            .find(|(_, sol)| distance(sol, &values) < MATCH_TOLERANCE)
            .map(|(f, _)| *f);
        if family.is_none() {
            unmatched.push(values);
        }
        roots.push(FoundRoot { values, family });
    }
    SolutionSet {
        c32,
        c33,
        starts,
        converged,
        roots,
        unmatched,
    }
}
