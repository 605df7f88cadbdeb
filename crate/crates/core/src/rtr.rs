//! Riemannian trust-region minimization on the complex-circle manifold.
//!
//! Each outer step builds the quadratic model
//! `m(ξ) = h(s) + <grad h(s), ξ> + ½ <hess h(s)[ξ], ξ>` on the tangent space,
//! approximately minimizes it inside the ball `<ξ, ξ> <= Δ²` with a
//! truncated conjugate-gradient (Lanczos) solver, and accepts or rejects the
//! retracted candidate from the ratio of actual to predicted decrease.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::manifold::{project_raw, real_inner, retract_raw, rhess_raw, TangentVector};
use crate::model::{Code, C64};
use crate::quartic::{cost, egrad, ehess_vec, PenaltyAnchor, QuarticObjective};
use crate::trs;

/// Predicted decreases at or below this are treated as numerically zero.
pub const MIN_MODEL_DECREASE: f64 = 1e-16;

/// Fraction of the radius at which a step counts as a boundary step.
pub const BOUNDARY_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtrConfig {
    /// Maximum trust radius.
    pub delta_bar: f64,
    /// Initial trust radius.
    pub delta0: f64,
    /// Acceptance threshold on the decrease ratio, in `[0, 1/4)`.
    pub chi_accept: f64,
    pub grad_tol: f64,
    /// `None` runs until the gradient tolerance is met.
    pub max_iters: Option<usize>,
    pub tcg_kappa: f64,
    pub tcg_theta: f64,
    /// `None` means the manifold dimension `K`.
    pub tcg_max_iters: Option<usize>,
}

impl RtrConfig {
    /// Standalone defaults for codes of length `k`.
    pub fn for_length(k: usize) -> Self {
        let delta_bar = (k as f64).sqrt();
        Self {
            delta_bar,
            delta0: delta_bar / 8.0,
            chi_accept: 0.1,
            grad_tol: 1e-6,
            max_iters: Some(10_000),
            tcg_kappa: 0.1,
            tcg_theta: 1.0,
            tcg_max_iters: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.delta_bar > 0.0 && self.delta_bar.is_finite()) {
            return bad("delta_bar must be positive");
        }
        if !(self.delta0 > 0.0 && self.delta0 <= self.delta_bar) {
            return bad("delta0 must lie in (0, delta_bar]");
        }
        if !(0.0..0.25).contains(&self.chi_accept) {
            return bad("chi_accept must lie in [0, 1/4)");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be nonnegative");
        }
        if !(self.tcg_kappa > 0.0 && self.tcg_kappa < 1.0) {
            return bad("tcg_kappa must lie in (0, 1)");
        }
        if !(self.tcg_theta > 0.0) {
            return bad("tcg_theta must be positive");
        }
        if self.tcg_max_iters == Some(0) {
            return bad("tcg_max_iters must be positive");
        }
        Ok(())
    }

    pub fn tcg_options(&self, k: usize) -> TcgOptions {
        TcgOptions {
            kappa: self.tcg_kappa,
            theta: self.tcg_theta,
            max_iters: self.tcg_max_iters.unwrap_or(k).max(1),
        }
    }
}

/// Stopping parameters of the truncated CG solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcgOptions {
    pub kappa: f64,
    pub theta: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcgResult {
    pub step: TangentVector,
    pub hit_boundary: bool,
    /// `m(0) - m(step)`.
    pub model_decrease: f64,
    pub iterations: usize,
}

struct RawTcg {
    step: Vec<C64>,
    hit_boundary: bool,
    model_decrease: f64,
    iterations: usize,
}

/// Truncated conjugate gradients for the tangent-space trust-region model.
///
/// While iterates stay inside the region with positive curvature this is the
/// Steihaug–Toint recursion, written in its Lanczos form. Once the boundary
/// or negative curvature is met the model is minimized exactly over the
/// current Krylov subspace intersected with the ball, and the Krylov space
/// keeps growing until the same residual test is met. The first Krylov
/// subspace is spanned by the gradient, so every returned step achieves at
/// least the Cauchy decrease.
pub fn tcg<H>(s: &Code, g: &TangentVector, mut hess: H, delta: f64, opts: &TcgOptions) -> Result<TcgResult>
where
    H: FnMut(&TangentVector) -> Result<TangentVector>,
{
    if g.base() != s {
        return Err(Error::BaseMismatch);
    }
    // re-validate: g may have been built unchecked
    TangentVector::new(s.clone(), g.dir().to_vec())?;
    let raw = tcg_raw(
        g.dir(),
        |d: &[C64]| {
            let t = TangentVector::from_parts_unchecked(s.clone(), d.to_vec());
            Ok(hess(&t)?.into_dir())
        },
        delta,
        opts,
    )?;
    Ok(TcgResult {
        step: TangentVector::from_parts_unchecked(s.clone(), raw.step),
        hit_boundary: raw.hit_boundary,
        model_decrease: raw.model_decrease,
        iterations: raw.iterations,
    })
}

fn tcg_raw<H>(g: &[C64], mut hess: H, delta: f64, opts: &TcgOptions) -> Result<RawTcg>
where
    H: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidRadius(delta));
    }
    let k = g.len();
    let g_norm = real_inner(g, g).sqrt();
    if g_norm == 0.0 {
        return Ok(RawTcg {
            step: vec![C64::new(0.0, 0.0); k],
            hit_boundary: false,
            model_decrease: 0.0,
            iterations: 0,
        });
    }
    let tol = g_norm * opts.kappa.min(g_norm.powf(opts.theta));

    let mut basis: Vec<Vec<C64>> = vec![g.iter().map(|x| x / g_norm).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut op_scale = 0.0f64;
    let mut iterations = 0;

    let solution = loop {
        let j = basis.len() - 1;
        let mut w = hess(&basis[j])?;
        check_len(k, w.len())?;
        iterations += 1;
        let alpha = real_inner(&basis[j], &w);
        axpy(&mut w, -alpha, &basis[j]);
        if j > 0 {
            axpy(&mut w, -betas[j - 1], &basis[j - 1]);
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for q in &basis {
                let c = real_inner(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        let beta = real_inner(&w, &w).sqrt();
        alphas.push(alpha);
        op_scale = op_scale.max(alpha.abs()).max(beta);

        let n = alphas.len();
        let mut t = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = alphas[i];
            if i + 1 < n {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let mut c = DVector::<f64>::zeros(n);
        c[0] = g_norm;
        let sol = trs::solve(&t, &c, delta);
        let residual = beta * sol.h[n - 1].abs();
        let breakdown = beta <= 1e-13 * op_scale.max(f64::MIN_POSITIVE) || n >= k;
        if residual <= tol || breakdown || iterations >= opts.max_iters {
            let value = trs::model_value(&t, &c, &sol.h);
            break (sol, value);
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    };

    let (sol, value) = solution;
    let mut step = vec![C64::new(0.0, 0.0); k];
    for (coef, q) in sol.h.iter().zip(&basis) {
        axpy(&mut step, *coef, q);
    }
    Ok(RawTcg {
        step,
        hit_boundary: sol.on_boundary,
        model_decrease: -value,
        iterations,
    })
}

fn axpy(y: &mut [C64], a: f64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * a;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RtrStop {
    GradientTolerance,
    MaxIterations,
}

/// One trust-region step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtrIteration {
    /// Cost at the iterate the step was computed from.
    pub cost: f64,
    pub grad_norm: f64,
    /// Radius used for this step.
    pub radius: f64,
    pub step_norm: f64,
    pub chi: f64,
    pub accepted: bool,
    pub tcg_iters: usize,
    pub hit_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtrTrace {
    pub initial_cost: f64,
    pub final_cost: f64,
    pub final_grad_norm: f64,
    pub iterations: Vec<RtrIteration>,
    pub stop: RtrStop,
}

impl RtrTrace {
    pub fn accepted_steps(&self) -> usize {
        self.iterations.iter().filter(|it| it.accepted).count()
    }

    pub fn total_tcg_iters(&self) -> usize {
        self.iterations.iter().map(|it| it.tcg_iters).sum()
    }
}

/// Minimizes `f` (or the anchored `h`) over unimodular codes from `s0`.
pub fn rtr_minimize(
    obj: &QuarticObjective,
    anchor: Option<&PenaltyAnchor>,
    s0: &Code,
    cfg: &RtrConfig,
) -> Result<(Code, RtrTrace)> {
    cfg.validate()?;
    check_len(obj.k(), s0.len())?;
    let opts = cfg.tcg_options(s0.len());

    let mut s = s0.clone();
    let mut value = cost(s.as_slice(), obj, anchor)?;
    let mut eg = egrad(s.as_slice(), obj, anchor)?;
    let mut grad = project_raw(s.as_slice(), &eg);
    let mut grad_norm = real_inner(&grad, &grad).sqrt();
    let mut radius = cfg.delta0;
    let initial_cost = value;
    let mut iterations = Vec::new();

    let stop = loop {
        if grad_norm <= cfg.grad_tol {
            break RtrStop::GradientTolerance;
        }
        if cfg.max_iters.is_some_and(|m| iterations.len() >= m) {
            break RtrStop::MaxIterations;
        }

        let sv = s.as_slice();
        let eg_ref = &eg;
        let inner = tcg_raw(
            &grad,
            |d: &[C64]| {
                let hd = ehess_vec(sv, d, obj, anchor)?;
                Ok(rhess_raw(sv, eg_ref, &hd, d))
            },
            radius,
            &opts,
        )?;
        let step_norm = real_inner(&inner.step, &inner.step).sqrt();
        let candidate = retract_raw(sv, &inner.step)?;
        let candidate_value = cost(candidate.as_slice(), obj, anchor)?;
        let actual = value - candidate_value;
        let chi = if inner.model_decrease <= MIN_MODEL_DECREASE {
            if actual >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            actual / inner.model_decrease
        };

        let used_radius = radius;
        if chi < 0.25 {
            radius *= 0.25;
        } else if chi > 0.75 && step_norm >= BOUNDARY_FRACTION * radius {
            radius = (2.0 * radius).min(cfg.delta_bar);
        }

        let accepted = chi > cfg.chi_accept;
        iterations.push(RtrIteration {
            cost: value,
            grad_norm,
            radius: used_radius,
            step_norm,
            chi,
            accepted,
            tcg_iters: inner.iterations,
            hit_boundary: inner.hit_boundary,
        });

        if accepted {
            s = candidate;
            value = candidate_value;
            eg = egrad(s.as_slice(), obj, anchor)?;
            grad = project_raw(s.as_slice(), &eg);
            grad_norm = real_inner(&grad, &grad).sqrt();
        }
    };

    let trace = RtrTrace {
        initial_cost,
        final_cost: value,
        final_grad_norm: grad_norm,
        iterations,
        stop,
    };
    Ok((s, trace))
}
