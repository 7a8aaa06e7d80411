//! Levenberg-Marquardt on residual maps with infeasible regions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Why an iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    /// Iteration cap reached.
    Diverged,
    /// Damping grew without bound: no feasible descent step exists.
    Trapped,
    /// Cost stopped decreasing at a non-zero level.
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative cost decrease over `stall_window` iterations below which
    /// the run is declared stalled.
    pub stall_ratio: f64,
    pub stall_window: usize,
}

impl Options {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            stall_ratio: 1e-6,
            stall_window: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iterations: usize,
    pub status: Status,
}

impl Outcome {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn step_size(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Central-difference Jacobian (rows = residuals, columns = variables).
/// Falls back to a one-sided difference when one side is infeasible and to
/// a zero column when both are.
pub fn jacobian<F>(f: &F, x: &[f64], r0: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let m = r0.len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = step_size(x[k]);
        xp[k] = x[k] + h;
        let plus = f(&xp);
        xp[k] = x[k] - h;
        let minus = f(&xp);
        xp[k] = x[k];
        match (plus, minus) {
            (Some(p), Some(q)) => {
                for i in 0..m {
                    jac[(i, k)] = (p[i] - q[i]) / (2.0 * h);
                }
            }
            (Some(p), None) => {
                for i in 0..m {
                    jac[(i, k)] = (p[i] - r0[i]) / h;
                }
            }
            (None, Some(q)) => {
                for i in 0..m {
                    jac[(i, k)] = (r0[i] - q[i]) / h;
                }
            }
            (None, None) => {}
        }
    }
    jac
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>()
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `|f(x)|^2`, stopping once `|f(x)|_inf <= tol`. `f` returns
/// `None` outside the feasible set; such trial points are rejected and the
/// step shrinks, so iterates never leave the feasible set.
///
/// Returns `None` when `x0` itself is infeasible.
pub fn minimize<F>(f: F, x0: &[f64], opts: &Options) -> Option<Outcome>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut history: Vec<f64> = vec![c];
    let n = x.len();
    let done = |x: Vec<f64>, r: Vec<f64>, it: usize, s: Status| Outcome {
        x,
        residual: r,
        iterations: it,
        status: s,
    };
    if inf_norm(&r) <= opts.tol {
        return Some(done(x, r, 0, Status::Converged));
    }
    if n == 0 {
        return Some(done(x, r, 0, Status::Trapped));
    }
    for it in 1..=opts.max_iter {
        let jac = jacobian(&f, &x, &r);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12);
            }
            let Some(delta) = a.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            if trial.iter().all(|t| t.is_finite()) {
                if let Some(rt) = f(&trial) {
                    let ct = cost(&rt);
                    if ct.is_finite() && ct < c {
                        x = trial;
                        r = rt;
                        c = ct;
                        lambda = (lambda / 3.0).max(1e-15);
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            return Some(done(x, r, it, Status::Trapped));
        }
        if inf_norm(&r) <= opts.tol {
            return Some(done(x, r, it, Status::Converged));
        }
        history.push(c);
        if history.len() > opts.stall_window {
            let old = history[history.len() - 1 - opts.stall_window];
            if c > old * (1.0 - opts.stall_ratio) {
                return Some(done(x, r, it, Status::Stalled));
            }
        }
    }
    let it = opts.max_iter;
    Some(done(x, r, it, Status::Diverged))
}
