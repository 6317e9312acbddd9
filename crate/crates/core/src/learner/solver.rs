//! Optimizers for regularized linear classification.
//!
//! All problems carry a constant bias column (value 1) as their last feature,
//! regularized like every other weight. Objectives:
//!
//! - L2: `0.5 * |w|^2 + C * sum_i loss(y_i * w.x_i)`
//! - L1: `|w|_1 + C * sum_i loss(y_i * w.x_i)`
//!
//! with logistic `ln(1 + e^-m)`, hinge `max(0, 1 - m)` or squared hinge
//! `max(0, 1 - m)^2` losses.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Relative objective change that counts as converged.
pub const TOLERANCE: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    Logistic,
    Hinge,
    SquaredHinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regularization {
    L2,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Primal,
    Dual,
}

/// One of the eight solver configurations, addressed by id 0..=7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SolverConfig {
    pub id: u8,
    pub loss: Loss,
    pub regularization: Regularization,
    pub formulation: Formulation,
}

impl SolverConfig {
    pub const ALL: [SolverConfig; 8] = [
        SolverConfig::new(0, Loss::Logistic, Regularization::L2, Formulation::Primal),
        SolverConfig::new(1, Loss::Hinge, Regularization::L2, Formulation::Dual),
        SolverConfig::new(2, Loss::Hinge, Regularization::L2, Formulation::Primal),
        SolverConfig::new(3, Loss::SquaredHinge, Regularization::L2, Formulation::Dual),
        SolverConfig::new(4, Loss::SquaredHinge, Regularization::L2, Formulation::Primal),
        SolverConfig::new(5, Loss::Logistic, Regularization::L1, Formulation::Primal),
        SolverConfig::new(6, Loss::SquaredHinge, Regularization::L1, Formulation::Primal),
        SolverConfig::new(7, Loss::Logistic, Regularization::L2, Formulation::Dual),
    ];

    const fn new(id: u8, loss: Loss, regularization: Regularization, formulation: Formulation) -> Self {
        SolverConfig { id, loss, regularization, formulation }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Self::ALL
            .get(id as usize)
            .copied()
            .ok_or_else(|| Error::Config(format!("solver id must be in 0..=7, got {id}")))
    }

    pub fn describe(&self) -> String {
        let loss = match self.loss {
            Loss::Logistic => "logistic regression",
            Loss::Hinge => "hinge-loss SVC",
            Loss::SquaredHinge => "squared-hinge-loss SVC",
        };
        let reg = match self.regularization {
            Regularization::L2 => "L2",
            Regularization::L1 => "L1",
        };
        let form = match self.formulation {
            Formulation::Primal => "primal",
            Formulation::Dual => "dual",
        };
        format!("{reg}-regularized {loss} ({form})")
    }
}

impl fmt::Display for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.describe())
    }
}

/// Sparse training rows; column `n_columns - 1` is the bias.
#[derive(Debug, Clone)]
pub struct Problem {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub n_columns: usize,
}

impl Problem {
    /// Appends the bias column to `rows` whose indices are below `n_features`.
    pub fn new(mut rows: Vec<Vec<(usize, f64)>>, n_features: usize) -> Self {
        for r in &mut rows {
            r.push((n_features, 1.0));
        }
        Problem { rows, n_columns: n_features + 1 }
    }

    pub fn subset(&self, idx: &[usize]) -> Problem {
        Problem { rows: idx.iter().map(|&i| self.rows[i].clone()).collect(), n_columns: self.n_columns }
    }
}

fn dot(row: &[(usize, f64)], w: &[f64]) -> f64 {
    row.iter().map(|&(j, x)| w[j] * x).sum()
}

fn axpy(a: f64, row: &[(usize, f64)], w: &mut [f64]) {
    for &(j, x) in row {
        w[j] += a * x;
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn loss_value(loss: Loss, margin: f64) -> f64 {
    match loss {
        Loss::Logistic => {
            if margin > 0.0 {
                (-margin).exp().ln_1p()
            } else {
                -margin + margin.exp().ln_1p()
            }
        }
        Loss::Hinge => (1.0 - margin).max(0.0),
        Loss::SquaredHinge => (1.0 - margin).max(0.0).powi(2),
    }
}

/// d loss / d margin; a subgradient for the hinge loss.
fn loss_derivative(loss: Loss, margin: f64) -> f64 {
    match loss {
        Loss::Logistic => {
            if margin > 0.0 {
                let e = (-margin).exp();
                -e / (1.0 + e)
            } else {
                -1.0 / (1.0 + margin.exp())
            }
        }
        Loss::Hinge => {
            if margin < 1.0 {
                -1.0
            } else {
                0.0
            }
        }
        Loss::SquaredHinge => -2.0 * (1.0 - margin).max(0.0),
    }
}

/// `C * sum_i loss(y_i w.x_i)`.
fn data_term(p: &Problem, y: &[f64], loss: Loss, cost: f64, w: &[f64]) -> f64 {
    cost * p.rows.iter().zip(y).map(|(r, &yi)| loss_value(loss, yi * dot(r, w))).sum::<f64>()
}

fn data_gradient(p: &Problem, y: &[f64], loss: Loss, cost: f64, w: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; p.n_columns];
    for (r, &yi) in p.rows.iter().zip(y) {
        let d = loss_derivative(loss, yi * dot(r, w));
        if d != 0.0 {
            axpy(cost * d * yi, r, &mut g);
        }
    }
    g
}

/// Primal objective value.
pub fn objective(p: &Problem, y: &[f64], loss: Loss, reg: Regularization, cost: f64, w: &[f64]) -> f64 {
    let penalty = match reg {
        Regularization::L2 => 0.5 * norm_sq(w),
        Regularization::L1 => w.iter().map(|x| x.abs()).sum(),
    };
    penalty + data_term(p, y, loss, cost, w)
}

/// Gradient of the L2-regularized primal objective (a subgradient for hinge).
pub fn l2_gradient(p: &Problem, y: &[f64], loss: Loss, cost: f64, w: &[f64]) -> Vec<f64> {
    let mut g = data_gradient(p, y, loss, cost, w);
    for (gj, wj) in g.iter_mut().zip(w) {
        *gj += wj;
    }
    g
}

fn relative_change(prev: f64, cur: f64) -> f64 {
    (prev - cur).abs() / cur.abs().max(prev.abs()).max(f64::MIN_POSITIVE)
}

/// Solves for the weight vector (bias last). `y` holds +1 / -1 labels.
pub fn solve(p: &Problem, y: &[f64], solver: SolverConfig, cost: f64, seed: u64) -> Result<Vec<f64>> {
    assert_eq!(p.rows.len(), y.len());
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::Config(format!("cost must be positive, got {cost}")));
    }
    match (solver.loss, solver.regularization, solver.formulation) {
        (Loss::Logistic | Loss::SquaredHinge, Regularization::L2, Formulation::Primal) => {
            lbfgs(p, y, solver.loss, cost)
        }
        (Loss::Hinge, Regularization::L2, _) => dual_cd(p, y, Loss::Hinge, cost, seed),
        (Loss::SquaredHinge, Regularization::L2, Formulation::Dual) => dual_cd(p, y, Loss::SquaredHinge, cost, seed),
        (Loss::Logistic, Regularization::L2, Formulation::Dual) => dual_logistic(p, y, cost, seed),
        (loss, Regularization::L1, _) => proximal_gradient(p, y, loss, cost),
    }
}

/// Limited-memory BFGS with Armijo backtracking for the smooth L2 problems.
fn lbfgs(p: &Problem, y: &[f64], loss: Loss, cost: f64) -> Result<Vec<f64>> {
    const MEMORY: usize = 10;
    let n = p.n_columns;
    let mut w = vec![0.0; n];
    let mut f = objective(p, y, loss, Regularization::L2, cost, &w);
    let mut g = l2_gradient(p, y, loss, cost, &w);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();

    for iter in 0..MAX_ITERATIONS {
        if norm_sq(&g).sqrt() <= 1e-10 {
            return Ok(w);
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * s.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
            q.iter_mut().zip(yv).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = match history.last() {
            Some((s, yv, _)) => s.iter().zip(yv).map(|(a, b)| a * b).sum::<f64>() / norm_sq(yv),
            None => 1.0 / norm_sq(&g).sqrt().max(1.0),
        };
        q.iter_mut().for_each(|x| *x *= gamma);
        for ((s, yv, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * yv.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut direction: Vec<f64> = q.iter().map(|x| -x).collect();
        let mut slope: f64 = direction.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            history.clear();
            direction = g.iter().map(|x| -x).collect();
            slope = -norm_sq(&g);
        }

        let mut step = 1.0;
        let (w_new, f_new) = loop {
            let candidate: Vec<f64> = w.iter().zip(&direction).map(|(wi, di)| wi + step * di).collect();
            let fc = objective(p, y, loss, Regularization::L2, cost, &candidate);
            if fc <= f + 1e-4 * step * slope {
                break (candidate, fc);
            }
            step *= 0.5;
            if step < 1e-20 {
                // no further decrease representable
                return Ok(w);
            }
        };
        let g_new = l2_gradient(p, y, loss, cost, &w_new);
        let s: Vec<f64> = w_new.iter().zip(&w).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            if history.len() == MEMORY {
                history.remove(0);
            }
            history.push((s, yv, 1.0 / sy));
        }
        let converged = relative_change(f, f_new) < TOLERANCE && iter > 0;
        w = w_new;
        g = g_new;
        f = f_new;
        if converged {
            return Ok(w);
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, objective: f })
}

/// Dual coordinate descent for L2-regularized hinge and squared hinge.
fn dual_cd(p: &Problem, y: &[f64], loss: Loss, cost: f64, seed: u64) -> Result<Vec<f64>> {
    let l = p.rows.len();
    let (upper, diag) = match loss {
        Loss::Hinge => (cost, 0.0),
        _ => (f64::INFINITY, 0.5 / cost),
    };
    let qd: Vec<f64> = p.rows.iter().map(|r| r.iter().map(|(_, x)| x * x).sum::<f64>() + diag).collect();
    let mut alpha = vec![0.0; l];
    let mut w = vec![0.0; p.n_columns];
    let mut order: Vec<usize> = (0..l).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dual = |w: &[f64], alpha: &[f64]| 0.5 * norm_sq(w) + alpha.iter().map(|a| 0.5 * diag * a * a - a).sum::<f64>();
    let mut prev = dual(&w, &alpha);

    for _ in 0..MAX_ITERATIONS {
        order.shuffle(&mut rng);
        let mut max_violation: f64 = 0.0;
        for &i in &order {
            let r = &p.rows[i];
            let g = y[i] * dot(r, &w) - 1.0 + diag * alpha[i];
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == upper {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, upper);
                axpy((alpha[i] - old) * y[i], r, &mut w);
            }
        }
        let cur = dual(&w, &alpha);
        if max_violation == 0.0 || relative_change(prev, cur) < TOLERANCE {
            return Ok(w);
        }
        prev = cur;
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, objective: prev })
}

/// Minimizer over (0, c) of `a/2 (z - z0)^2 + b (z - z0) + z ln z + (c - z) ln(c - z)`.
fn logistic_dual_step(a: f64, b: f64, z0: f64, c: f64) -> f64 {
    let deriv = |z: f64| a * (z - z0) + b + (z / (c - z)).ln();
    let (mut lo, mut hi) = (0.0, c);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if deriv(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    let eps = c * 1e-12;
    z.clamp(eps, c - eps)
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Dual coordinate descent for L2-regularized logistic regression.
fn dual_logistic(p: &Problem, y: &[f64], cost: f64, seed: u64) -> Result<Vec<f64>> {
    let l = p.rows.len();
    let qd: Vec<f64> = p.rows.iter().map(|r| r.iter().map(|(_, x)| x * x).sum()).collect();
    let init = (1e-3 * cost).min(1e-8);
    let mut alpha = vec![init; l];
    let mut w = vec![0.0; p.n_columns];
    for (r, (&a, &yi)) in p.rows.iter().zip(alpha.iter().zip(y)) {
        axpy(a * yi, r, &mut w);
    }
    let mut order: Vec<usize> = (0..l).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entropy_const = xlogx(cost);
    let dual = |w: &[f64], alpha: &[f64]| {
        0.5 * norm_sq(w) + alpha.iter().map(|&a| xlogx(a) + xlogx(cost - a) - entropy_const).sum::<f64>()
    };
    let mut prev = dual(&w, &alpha);

    for _ in 0..MAX_ITERATIONS {
        order.shuffle(&mut rng);
        for &i in &order {
            let r = &p.rows[i];
            let b = y[i] * dot(r, &w);
            let z = logistic_dual_step(qd[i], b, alpha[i], cost);
            axpy((z - alpha[i]) * y[i], r, &mut w);
            alpha[i] = z;
        }
        let cur = dual(&w, &alpha);
        if relative_change(prev, cur) < TOLERANCE {
            return Ok(w);
        }
        prev = cur;
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, objective: prev })
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Proximal gradient with backtracking for the L1-regularized problems.
fn proximal_gradient(p: &Problem, y: &[f64], loss: Loss, cost: f64) -> Result<Vec<f64>> {
    let n = p.n_columns;
    let mut w = vec![0.0; n];
    let mut smooth = data_term(p, y, loss, cost, &w);
    let l1 = |w: &[f64]| w.iter().map(|x| x.abs()).sum::<f64>();
    let mut f = smooth;
    let mut step = 1.0;

    for iter in 0..MAX_ITERATIONS {
        let g = data_gradient(p, y, loss, cost, &w);
        step *= 2.0;
        let (w_new, smooth_new) = loop {
            let candidate: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| soft_threshold(wi - step * gi, step)).collect();
            let sc = data_term(p, y, loss, cost, &candidate);
            let diff: Vec<f64> = candidate.iter().zip(&w).map(|(a, b)| a - b).collect();
            let bound = smooth + g.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>() + norm_sq(&diff) / (2.0 * step);
            if sc <= bound + 1e-12 * bound.abs() {
                break (candidate, sc);
            }
            step *= 0.5;
            if step < 1e-30 {
                return Ok(w);
            }
        };
        let f_new = smooth_new + l1(&w_new);
        let converged = relative_change(f, f_new) < TOLERANCE && iter > 0;
        if w_new == w {
            return Ok(w);
        }
        w = w_new;
        smooth = smooth_new;
        f = f_new;
        if converged {
            return Ok(w);
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, objective: f })
}
