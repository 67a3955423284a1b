//! Dense bounded-variable primal simplex for box-constrained programs.
//!
//! Every query here has the shape `G u = x0`, `lower ≤ u ≤ upper`: membership
//! of a state in a zonotope, minimum-time steering, and the per-coordinate
//! extremes used by the strategy-space dimension. Problems are tiny (a few
//! rows, tens of columns), so the solver keeps an explicit dense tableau,
//! uses Bland's rule for both entering and leaving choices, and starts from
//! an all-artificial basis (phase 1 minimises `‖G u − x0‖₁`).
//!
//! Set `CTRLGAUGE_LOG=ctrlgauge::lp=trace` to dump every tableau iteration.

use log::{log_enabled, trace, Level};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

/// Smallest tableau entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-10;
/// Pivots smaller than this fraction of their column's largest entry are skipped.
pub const PIVOT_REL: f64 = 1e-9;
/// Phase-1 objective and bound-violation tolerance (scaled by problem size).
pub const FEAS_TOL: f64 = 1e-9;
/// Residual `‖G u − x0‖∞` accepted for a returned witness (scaled).
pub const RESIDUAL_TOL: f64 = 1e-7;
/// Coordinates this close to a bound (relative to the interval width) are
/// snapped onto it when cleaning up a witness.
pub const SNAP_TOL: f64 = 1e-6;
/// Reduced-cost tolerance of the optimality test.
pub const COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
}

/// `G u = x0` with componentwise bounds on `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxLp {
    pub g: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Option<Objective>,
}

impl BoxLp {
    /// Unit box `[-1, 1]^m`, no objective.
    pub fn new(g: DMatrix<f64>, x0: DVector<f64>) -> Self {
        let m = g.ncols();
        Self {
            g,
            x0,
            lower: vec![-1.0; m],
            upper: vec![1.0; m],
            objective: None,
        }
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn with_objective(mut self, coeffs: Vec<f64>, sense: Sense) -> Self {
        self.objective = Some(Objective { coeffs, sense });
        self
    }

    fn check(&self) -> Result<()> {
        let (n, m) = self.g.shape();
        if self.x0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "x0 has {} entries, G has {n} rows",
                self.x0.len()
            )));
        }
        if self.lower.len() != m || self.upper.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "bounds must have {m} entries"
            )));
        }
        if let Some(obj) = &self.objective {
            if obj.coeffs.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "objective must have {m} entries"
                )));
            }
            if obj.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("objective"));
            }
        }
        if self.g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("G"));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("x0"));
        }
        for (j, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(l.is_finite() && u.is_finite()) || l > u {
                return Err(Error::DimensionMismatch(format!(
                    "bound {j}: [{l}, {u}] is not a finite interval"
                )));
            }
        }
        Ok(())
    }

    /// Magnitude used to scale the absolute tolerances.
    fn scale(&self) -> f64 {
        let g = self.g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let x = self.x0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let b = self
            .lower
            .iter()
            .chain(&self.upper)
            .fold(0.0f64, |a, v| a.max(v.abs()));
        1.0f64.max(g * b.max(1.0)).max(x)
    }

    /// `max_{u in box} dᵀ G u`, the support of the image zonotope.
    pub fn support(&self, d: &DVector<f64>) -> f64 {
        let c = self.g.tr_mul(d);
        c.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&cj, (&l, &u))| (cj * l).max(cj * u))
            .sum()
    }

    fn residual(&self, u: &DVector<f64>) -> f64 {
        (&self.g * u - &self.x0).amax()
    }

    /// Replaces `u` by a cleaner point when one is found. The tableau solves
    /// through an explicit basis inverse, so with nearly dependent columns the
    /// basic values carry errors of order cond·eps; at a degenerate vertex
    /// they straddle their bounds and the residual grows with |G|. Snapping
    /// coordinates within [`SNAP_TOL`] of a bound and re-solving the others
    /// in least squares usually recovers the exact vertex.
    fn purify(&self, u: &mut DVector<f64>) {
        let mut trial = u.clone();
        let mut loose = Vec::new();
        for j in 0..trial.len() {
            let (l, h) = (self.lower[j], self.upper[j]);
            let snap = SNAP_TOL * (h - l).max(1.0);
            trial[j] = trial[j].clamp(l, h);
            if trial[j] - l <= snap {
                trial[j] = l;
            } else if h - trial[j] <= snap {
                trial[j] = h;
            } else {
                loose.push(j);
            }
        }
        if !loose.is_empty() {
            let r = &self.x0 - &self.g * &trial;
            let Ok(step) = self.g.select_columns(loose.iter()).svd(true, true).solve(&r, 1e-14) else {
                return;
            };
            for (t, &j) in loose.iter().enumerate() {
                trial[j] = (trial[j] + step[t]).clamp(self.lower[j], self.upper[j]);
            }
        }
        let mut clamped = u.clone();
        for j in 0..clamped.len() {
            clamped[j] = clamped[j].clamp(self.lower[j], self.upper[j]);
        }
        if self.residual(&trial) < self.residual(&clamped) {
            *u = trial;
        }
    }

    fn verify_witness(&self, u: &mut DVector<f64>) -> Result<()> {
        let scale = self.scale();
        for j in 0..u.len() {
            let (l, h) = (self.lower[j], self.upper[j]);
            // clamped below, after which the residual check has the final say
            let slack = RESIDUAL_TOL * scale;
            if u[j] < l - slack || u[j] > h + slack {
                return Err(Error::Verification(format!(
                    "u[{j}] = {} outside [{l}, {h}]",
                    u[j]
                )));
            }
            u[j] = u[j].clamp(l, h);
        }
        let resid = self.residual(u);
        if resid > RESIDUAL_TOL * scale {
            return Err(Error::Verification(format!("residual {resid:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<DVector<f64>>,
    /// Direction `d` with `dᵀx0` above the support of `G·box`, when one was
    /// recovered from the phase-1 duals.
    pub certificate: Option<DVector<f64>>,
}

impl Feasibility {
    /// `dᵀx0 − h(d)` for the stored certificate, normalised to `‖d‖ = 1`.
    pub fn certificate_gap(&self, lp: &BoxLp) -> Option<f64> {
        self.certificate
            .as_ref()
            .map(|d| (d.dot(&lp.x0) - lp.support(d)) / d.norm())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    /// Largest uniform shrink `s` of the box that still contains a solution.
    pub margin: f64,
    pub witness: DVector<f64>,
    /// Supporting normal `d` with `dᵀx0 = h(d)` when the margin is zero.
    pub normal: Option<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub argument: DVector<f64>,
}

/// Decides `∃u ∈ box: G u = x0`.
pub fn feasible(lp: &BoxLp) -> Result<Feasibility> {
    lp.check()?;
    let mut std = StandardLp::from_box(lp);
    let rows = std.equilibrate();
    let mut tab = Tableau::new(&std)?;
    let phase1 = tab.phase1()?;
    if phase1 > FEAS_TOL * std.scale() {
        let pi = DVector::from_iterator(
            rows.len(),
            tab.duals(&tab.phase1_cost()).iter().zip(&rows).map(|(p, f)| p / f),
        );
        let certificate = [pi.clone(), -pi]
            .into_iter()
            .find(|d| d.norm() > 0.0 && d.dot(&lp.x0) > lp.support(d) + FEAS_TOL * d.norm());
        return Ok(Feasibility {
            feasible: false,
            witness: None,
            certificate,
        });
    }
    tab.polish(&std);
    let mut u = DVector::from_column_slice(&tab.x[..std.cols]);
    lp.purify(&mut u);
    lp.verify_witness(&mut u)?;
    Ok(Feasibility {
        feasible: true,
        witness: Some(u),
        certificate: None,
    })
}

/// Solves `max s` subject to `G u = x0`, `lower + s·w ≤ u ≤ upper − s·w`,
/// `0 ≤ s ≤ 1`, where `w` is the half-width of each bound.
pub fn max_margin(lp: &BoxLp) -> Result<Margin> {
    lp.check()?;
    let (n, m) = lp.g.shape();
    let rows = n + 2 * m;
    // columns: u (m), s (1), p (m), q (m)
    let cols = 3 * m + 1;
    let s_col = m;
    let mut a = vec![0.0; rows * cols];
    let mut b = vec![0.0; rows];
    for i in 0..n {
        for j in 0..m {
            a[i * cols + j] = lp.g[(i, j)];
        }
        b[i] = lp.x0[i];
    }
    let mut lower = vec![0.0; cols];
    let mut upper = vec![f64::INFINITY; cols];
    for j in 0..m {
        let w = 0.5 * (lp.upper[j] - lp.lower[j]);
        let ru = n + 2 * j;
        let rl = ru + 1;
        a[ru * cols + j] = 1.0;
        a[ru * cols + s_col] = w;
        a[ru * cols + m + 1 + j] = 1.0;
        b[ru] = lp.upper[j];
        a[rl * cols + j] = -1.0;
        a[rl * cols + s_col] = w;
        a[rl * cols + 2 * m + 1 + j] = 1.0;
        b[rl] = -lp.lower[j];
        lower[j] = lp.lower[j];
        upper[j] = lp.upper[j];
    }
    upper[s_col] = 1.0;
    let mut cost = vec![0.0; cols];
    cost[s_col] = -1.0;
    let mut std = StandardLp {
        rows,
        cols,
        a,
        b,
        lower,
        upper,
    };
    let factors = std.equilibrate();
    let mut tab = Tableau::new(&std)?;
    let scale = lp.scale();
    if tab.phase1()? > FEAS_TOL * std.scale() {
        return Err(Error::Infeasible);
    }
    tab.phase2(&cost)?;
    tab.polish(&std);
    let margin = tab.x[s_col].clamp(0.0, 1.0);
    let mut witness = DVector::from_column_slice(&tab.x[..m]);
    lp.purify(&mut witness);
    lp.verify_witness(&mut witness)?;
    let normal = if margin <= FEAS_TOL {
        let pi = tab.duals(&tab.full_cost(&cost));
        let d = DVector::from_iterator(n, pi[..n].iter().zip(&factors).map(|(p, f)| p / f));
        [d.clone(), -d].into_iter().find(|d| {
            let norm = d.norm();
            norm > 0.0 && (d.dot(&lp.x0) - lp.support(d)).abs() <= RESIDUAL_TOL * scale * norm
        })
    } else {
        None
    };
    Ok(Margin {
        margin,
        witness,
        normal,
    })
}

/// Optimises the attached objective over the feasible set.
pub fn optimize(lp: &BoxLp) -> Result<Optimum> {
    lp.check()?;
    let obj = lp
        .objective
        .as_ref()
        .ok_or_else(|| Error::Internal("optimize called without an objective".into()))?;
    let mut std = StandardLp::from_box(lp);
    std.equilibrate();
    let mut tab = Tableau::new(&std)?;
    if tab.phase1()? > FEAS_TOL * std.scale() {
        return Err(Error::Infeasible);
    }
    let cost: Vec<f64> = match obj.sense {
        Sense::Minimize => obj.coeffs.clone(),
        Sense::Maximize => obj.coeffs.iter().map(|c| -c).collect(),
    };
    tab.phase2(&cost)?;
    tab.polish(&std);
    let mut argument = DVector::from_column_slice(&tab.x[..std.cols]);
    lp.purify(&mut argument);
    lp.verify_witness(&mut argument)?;
    let value = obj.coeffs.iter().zip(argument.iter()).map(|(c, u)| c * u).sum();
    Ok(Optimum { value, argument })
}

/// `min cᵀx` s.t. `A x = b`, `lower ≤ x ≤ upper`; lower bounds finite.
struct StandardLp {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl StandardLp {
    fn from_box(lp: &BoxLp) -> Self {
        let (rows, cols) = lp.g.shape();
        let mut a = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                a[i * cols + j] = lp.g[(i, j)];
            }
        }
        Self {
            rows,
            cols,
            a,
            b: lp.x0.iter().cloned().collect(),
            lower: lp.lower.clone(),
            upper: lp.upper.clone(),
        }
    }

    /// Divides every row by its largest entry, right-hand side included, and
    /// returns the factors. Badly scaled rows otherwise let round-off in the
    /// large ones swamp the small ones.
    fn equilibrate(&mut self) -> Vec<f64> {
        let cols = self.cols;
        (0..self.rows)
            .map(|i| {
                let row = &mut self.a[i * cols..(i + 1) * cols];
                let big = row.iter().fold(self.b[i].abs(), |m, v| m.max(v.abs()));
                let f = if big > 0.0 { big } else { 1.0 };
                row.iter_mut().for_each(|v| *v /= f);
                self.b[i] /= f;
                f
            })
            .collect()
    }

    fn scale(&self) -> f64 {
        let amax = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bmax = self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bound = self
            .lower
            .iter()
            .chain(&self.upper)
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        1.0f64.max(amax * bound).max(bmax)
    }
}

enum Step {
    Optimal,
    Continue,
}

/// Dense tableau `T = B⁻¹ [A | diag(σ)]` with one artificial per row.
struct Tableau {
    rows: usize,
    structural: usize,
    width: usize,
    t: Vec<f64>,
    sigma: Vec<f64>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
    /// `[A | diag(σ)]` as first built, for refactoring.
    original: DMatrix<f64>,
}

impl Tableau {
    fn new(lp: &StandardLp) -> Result<Self> {
        let rows = lp.rows;
        let structural = lp.cols;
        let width = structural + rows;
        let mut x = vec![0.0; width];
        let mut at_upper = vec![false; width];
        for j in 0..structural {
            if lp.lower[j].is_finite() {
                x[j] = lp.lower[j];
            } else if lp.upper[j].is_finite() {
                x[j] = lp.upper[j];
                at_upper[j] = true;
            } else {
                return Err(Error::Internal("free variables are not supported".into()));
            }
        }
        let mut t = vec![0.0; rows * width];
        let mut sigma = vec![1.0; rows];
        for i in 0..rows {
            let row = &lp.a[i * structural..(i + 1) * structural];
            let resid = lp.b[i] - row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>();
            sigma[i] = if resid < 0.0 { -1.0 } else { 1.0 };
            for j in 0..structural {
                t[i * width + j] = sigma[i] * row[j];
            }
            t[i * width + structural + i] = 1.0;
            x[structural + i] = resid.abs();
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, rows));
        upper.extend(std::iter::repeat_n(f64::INFINITY, rows));
        let mut is_basic = vec![false; width];
        let basis: Vec<usize> = (structural..width).collect();
        for &j in &basis {
            is_basic[j] = true;
        }
        let original = DMatrix::from_row_slice(rows, width, &t);
        Ok(Self {
            rows,
            structural,
            width,
            t,
            sigma,
            b: lp.b.clone(),
            lower,
            upper,
            x,
            at_upper,
            basis,
            is_basic,
            iterations: 0,
            original,
            max_iterations: 50 * (rows + width) + 500,
        })
    }

    fn phase1_cost(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.width];
        for v in &mut c[self.structural..] {
            *v = 1.0;
        }
        c
    }

    fn full_cost(&self, structural_cost: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.width];
        c[..self.structural].copy_from_slice(structural_cost);
        c
    }

    /// Minimises the total artificial mass; returns the optimum.
    fn phase1(&mut self) -> Result<f64> {
        let cost = self.phase1_cost();
        self.run(&cost)?;
        Ok(self.x[self.structural..].iter().sum())
    }

    /// Caps the artificials at their phase-1 values and minimises the
    /// structural cost. A residual phase 1 accepted as within tolerance is
    /// kept rather than forced to zero: with nearly dependent columns,
    /// removing it can push the basic variables well outside their bounds.
    fn phase2(&mut self, structural_cost: &[f64]) -> Result<()> {
        for j in self.structural..self.width {
            if self.is_basic[j] {
                self.upper[j] = self.x[j].max(0.0);
            } else {
                self.upper[j] = 0.0;
                self.x[j] = 0.0;
                self.at_upper[j] = false;
            }
        }
        let cost = self.full_cost(structural_cost);
        self.run(&cost)
    }

    fn run(&mut self, cost: &[f64]) -> Result<()> {
        loop {
            self.refactor();
            self.refresh_basic();
            if log_enabled!(Level::Trace) {
                self.dump();
            }
            match self.step(cost)? {
                Step::Optimal => return Ok(()),
                Step::Continue => {}
            }
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::IterationLimit(self.max_iterations));
            }
        }
    }

    /// Simplex multipliers `π = c_Bᵀ B⁻¹`, one per row.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let col = self.structural + i;
                let s: f64 = (0..self.rows)
                    .map(|r| cost[self.basis[r]] * self.t[r * self.width + col])
                    .sum();
                s * self.sigma[i]
            })
            .collect()
    }

    /// Rebuilds `T = B⁻¹ [A | diag(σ)]` from scratch. Updating `T` pivot by
    /// pivot lets errors from nearly dependent columns pile up until the
    /// basic values leave their bounds; these programs are small enough to
    /// refactor on every iteration.
    fn refactor(&mut self) {
        if self.rows == 0 {
            return;
        }
        let basis = self.original.select_columns(self.basis.iter());
        let Some(inv) = basis.lu().try_inverse() else {
            return;
        };
        let fresh = inv * &self.original;
        for r in 0..self.rows {
            for k in 0..self.width {
                self.t[r * self.width + k] = fresh[(r, k)];
            }
        }
    }

    /// Re-solves the basic values against the original matrix, discarding
    /// whatever drift the tableau has picked up over many pivots.
    fn polish(&mut self, lp: &StandardLp) {
        let (m, w) = (self.rows, self.structural);
        if m == 0 {
            return;
        }
        let column = |j: usize, i: usize| {
            if j < w {
                self.sigma[i] * lp.a[i * w + j]
            } else if j - w == i {
                1.0
            } else {
                0.0
            }
        };
        let basis = DMatrix::from_fn(m, m, |i, r| column(self.basis[r], i));
        let rhs = DVector::from_fn(m, |i, _| {
            let mut v = self.sigma[i] * lp.b[i];
            for j in 0..self.width {
                if !self.is_basic[j] && self.x[j] != 0.0 {
                    v -= column(j, i) * self.x[j];
                }
            }
            v
        });
        let Some(xb) = basis.lu().solve(&rhs) else {
            return;
        };
        let in_bounds = (0..m).all(|r| {
            let j = self.basis[r];
            xb[r].is_finite() && xb[r] >= self.lower[j] - FEAS_TOL && xb[r] <= self.upper[j] + FEAS_TOL
        });
        if !in_bounds {
            return;
        }
        let residual = |x: &[f64]| {
            (0..m)
                .map(|i| (lp.a[i * w..(i + 1) * w].iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - lp.b[i]).abs())
                .fold(0.0, f64::max)
        };
        let mut trial = self.x.clone();
        for r in 0..m {
            trial[self.basis[r]] = xb[r];
        }
        if residual(&trial[..w]) < residual(&self.x[..w]) {
            self.x = trial;
        }
    }

    /// Recomputes basic values from `B⁻¹ b − Σ_N T_j x_j`.
    fn refresh_basic(&mut self) {
        for r in 0..self.rows {
            let row = &self.t[r * self.width..(r + 1) * self.width];
            let mut v: f64 = (0..self.rows)
                .map(|i| row[self.structural + i] * self.sigma[i] * self.b[i])
                .sum();
            for j in 0..self.width {
                if !self.is_basic[j] && self.x[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.basis[r]] = v;
        }
    }

    fn step(&mut self, cost: &[f64]) -> Result<Step> {
        let w = self.width;
        // Bland: lowest-index improving nonbasic variable enters.
        let mut entering = None;
        for j in 0..w {
            if self.is_basic[j] || self.upper[j] <= self.lower[j] {
                continue;
            }
            let mut d = cost[j];
            for r in 0..self.rows {
                d -= cost[self.basis[r]] * self.t[r * w + j];
            }
            if !self.at_upper[j] && d < -COST_TOL {
                entering = Some((j, 1.0));
                break;
            }
            if self.at_upper[j] && d > COST_TOL {
                entering = Some((j, -1.0));
                break;
            }
        }
        let Some((j, dir)) = entering else {
            return Ok(Step::Optimal);
        };

        let mut theta = self.upper[j] - self.lower[j];
        let mut leave: Option<(usize, bool)> = None;
        // relative to the column, so a nearly dependent column cannot bring
        // in a pivot that leaves the basis numerically singular
        let tiny = (0..self.rows).fold(PIVOT_TOL, |m, r| m.max(PIVOT_REL * self.t[r * w + j].abs()));
        for r in 0..self.rows {
            let alpha = dir * self.t[r * w + j];
            let bv = self.basis[r];
            let (room, hits_upper) = if alpha > tiny {
                ((self.x[bv] - self.lower[bv]) / alpha, false)
            } else if alpha < -tiny {
                if self.upper[bv].is_infinite() {
                    continue;
                }
                ((self.upper[bv] - self.x[bv]) / -alpha, true)
            } else {
                continue;
            };
            let room = room.max(0.0);
            let better = match leave {
                _ if room < theta - 1e-12 => true,
                Some((r0, _)) if room <= theta + 1e-12 => bv < self.basis[r0],
                _ => false,
            };
            if better {
                theta = room;
                leave = Some((r, hits_upper));
            }
        }
        if theta.is_infinite() {
            return Err(Error::Internal("unbounded direction in a bounded program".into()));
        }

        match leave {
            None => {
                self.at_upper[j] = dir > 0.0;
                self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
            }
            Some((r, hits_upper)) => {
                self.x[j] += dir * theta;
                let out = self.basis[r];
                self.pivot(r, j);
                self.is_basic[out] = false;
                self.is_basic[j] = true;
                self.basis[r] = j;
                self.at_upper[out] = hits_upper;
                self.x[out] = if hits_upper {
                    self.upper[out]
                } else {
                    self.lower[out]
                };
                self.at_upper[j] = false;
            }
        }
        Ok(Step::Continue)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.t[r * w + j];
        for k in 0..w {
            self.t[r * w + k] /= p;
        }
        self.t[r * w + j] = 1.0;
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + j];
            if f == 0.0 {
                continue;
            }
            for k in 0..w {
                self.t[i * w + k] -= f * self.t[r * w + k];
            }
            self.t[i * w + j] = 0.0;
        }
    }

    fn dump(&self) {
        trace!(
            "iteration {} basis {:?} x {:?}",
            self.iterations,
            self.basis,
            self.x
        );
        for r in 0..self.rows {
            trace!("  {:?}", &self.t[r * self.width..(r + 1) * self.width]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn sum_of_generators_is_feasible() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]);
        let x0 = col(&[1.5, 1.7]);
        let res = feasible(&BoxLp::new(g, x0)).unwrap();
        assert!(res.feasible);
        let u = res.witness.unwrap();
        assert!((u[0] - 1.0).abs() < 1e-9 && (u[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scalar_outside_is_infeasible_with_certificate() {
        let lp = BoxLp::new(DMatrix::from_element(1, 1, 1.0), col(&[2.0]));
        let res = feasible(&lp).unwrap();
        assert!(!res.feasible);
        assert!(res.certificate_gap(&lp).unwrap() > 0.0);
    }

    #[test]
    fn margins() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]);
        let m0 = max_margin(&BoxLp::new(g.clone(), col(&[0.0, 0.0]))).unwrap();
        assert!((m0.margin - 1.0).abs() < 1e-12);
        assert!(m0.normal.is_none());
        let lp = BoxLp::new(g, col(&[1.5, 1.7]));
        let mv = max_margin(&lp).unwrap();
        assert!(mv.margin.abs() < 1e-12);
        let d = mv.normal.expect("vertex has a supporting normal");
        assert!((d.dot(&lp.x0) - lp.support(&d)).abs() < 1e-9 * d.norm());
        // R(4) = [-4, 4] for the scalar chain; x0 = 2 leaves slack 1/2 per input.
        let chain = BoxLp::new(DMatrix::from_element(1, 4, 1.0), col(&[2.0]));
        assert!((max_margin(&chain).unwrap().margin - 0.5).abs() < 1e-12);
        let out = BoxLp::new(DMatrix::from_element(1, 1, 1.0), col(&[2.0]));
        assert_eq!(max_margin(&out), Err(Error::Infeasible));
    }

    #[test]
    fn optimize_unit_box() {
        let lp = BoxLp::new(DMatrix::zeros(0, 2), DVector::zeros(0))
            .with_objective(vec![1.0, 0.0], Sense::Maximize);
        let opt = optimize(&lp).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-12);
        assert!((opt.argument[0] - 1.0).abs() < 1e-12);

        let lp = BoxLp::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), col(&[0.0]))
            .with_objective(vec![1.0, 0.0], Sense::Maximize);
        let opt = optimize(&lp).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-12);
        assert!((opt.argument[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let lp = BoxLp::new(DMatrix::zeros(2, 2), col(&[0.0]));
        assert!(matches!(feasible(&lp), Err(Error::DimensionMismatch(_))));
        let lp = BoxLp::new(DMatrix::zeros(1, 2), col(&[0.0])).with_objective(vec![1.0], Sense::Minimize);
        assert!(matches!(optimize(&lp), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn symmetric_verdicts() {
        let g = DMatrix::from_row_slice(2, 3, &[1.0, 0.2, -0.7, 0.1, 1.0, 0.4]);
        for x in [[0.5, 0.2], [1.9, 1.4], [2.5, 0.0], [-1.0, 1.6]] {
            let a = feasible(&BoxLp::new(g.clone(), col(&x))).unwrap().feasible;
            let b = feasible(&BoxLp::new(g.clone(), -col(&x))).unwrap().feasible;
            assert_eq!(a, b);
        }
    }
}
