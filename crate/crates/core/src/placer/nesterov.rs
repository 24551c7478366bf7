//! Nesterov's accelerated gradient method with a step length predicted from a
//! local Lipschitz estimate and backtracking when the prediction shrinks.

use crate::error::{Error, Result};

/// A differentiable objective over a flat coordinate vector.
pub trait Objective {
    /// Objective value at `x`; writes the search gradient into `grad`.
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64>;

    /// Maps `x` back into the feasible set.
    fn project(&self, _x: &mut [f64]) {}
}

const MAX_BACKTRACKS: usize = 10;
/// A new step is accepted when its predicted length is at least this fraction
/// of the one used.
const ACCEPT_RATIO: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct NesterovState {
    /// Main sequence; the current solution.
    pub u: Vec<f64>,
    /// Reference point where the gradient is taken.
    pub v: Vec<f64>,
    /// Search gradient at `v`.
    pub grad: Vec<f64>,
    /// Objective value at `v`.
    pub value: f64,
    /// Momentum parameter.
    pub a: f64,
    /// Step length for the next update.
    pub alpha: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub alpha: f64,
    pub backtracks: usize,
}

fn checked<O: Objective + ?Sized>(obj: &mut O, x: &[f64], grad: &mut [f64], iteration: usize) -> Result<f64> {
    let f = obj.evaluate(x, grad)?;
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { iteration, detail: format!("component {i} is {}", grad[i]) });
    }
    if !f.is_finite() {
        return Err(Error::NonFiniteGradient { iteration, detail: format!("objective is {f}") });
    }
    Ok(f)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl NesterovState {
    /// Starts at `x0` with a fixed initial step length.
    pub fn with_step<O: Objective + ?Sized>(x0: Vec<f64>, obj: &mut O, alpha: f64) -> Result<Self> {
        let mut v = x0;
        obj.project(&mut v);
        let mut grad = vec![0.0; v.len()];
        let value = checked(obj, &v, &mut grad, 0)?;
        Ok(NesterovState { u: v.clone(), v, grad, value, a: 1.0, alpha, iteration: 0 })
    }

    /// Starts at `x0`, estimating the first step length from the gradient
    /// change over a probe move of length `probe` along the gradient.
    pub fn new<O: Objective + ?Sized>(x0: Vec<f64>, obj: &mut O, probe: f64) -> Result<Self> {
        let mut s = Self::with_step(x0, obj, probe)?;
        let gmax = s.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax > 0.0 {
            let mut w: Vec<f64> = s.v.iter().zip(&s.grad).map(|(x, g)| x - probe * g / gmax).collect();
            obj.project(&mut w);
            let mut gw = vec![0.0; w.len()];
            checked(obj, &w, &mut gw, 0)?;
            let dg = distance(&gw, &s.grad);
            if dg > 0.0 {
                s.alpha = distance(&w, &s.v) / dg;
            }
        }
        Ok(s)
    }

    /// Re-evaluates the gradient at `v`, e.g. after the objective changed.
    pub fn refresh<O: Objective + ?Sized>(&mut self, obj: &mut O) -> Result<()> {
        self.value = checked(obj, &self.v, &mut self.grad, self.iteration)?;
        Ok(())
    }

    /// One accelerated update.
    pub fn step<O: Objective + ?Sized>(&mut self, obj: &mut O) -> Result<StepInfo> {
        let n = self.v.len();
        let a_next = 0.5 * (1.0 + (4.0 * self.a * self.a + 1.0).sqrt());
        let momentum = (self.a - 1.0) / a_next;
        let mut u_next = vec![0.0; n];
        let mut v_next = vec![0.0; n];
        let mut g_next = vec![0.0; n];
        let mut backtracks = 0;
        let mut value;
        loop {
            for i in 0..n {
                u_next[i] = self.v[i] - self.alpha * self.grad[i];
            }
            obj.project(&mut u_next);
            for i in 0..n {
                v_next[i] = u_next[i] + momentum * (u_next[i] - self.u[i]);
            }
            obj.project(&mut v_next);
            value = checked(obj, &v_next, &mut g_next, self.iteration + 1)?;
            let dg = distance(&g_next, &self.grad);
            let predicted = if dg > 0.0 { distance(&v_next, &self.v) / dg } else { self.alpha };
            if predicted >= ACCEPT_RATIO * self.alpha || backtracks >= MAX_BACKTRACKS || predicted <= 0.0 {
                let used = self.alpha;
                if predicted > 0.0 {
                    self.alpha = predicted;
                }
                self.u = u_next;
                self.v = v_next;
                self.grad = g_next;
                self.value = value;
                self.a = a_next;
                self.iteration += 1;
                return Ok(StepInfo { alpha: used, backtracks });
            }
            self.alpha = predicted;
            backtracks += 1;
        }
    }
}
