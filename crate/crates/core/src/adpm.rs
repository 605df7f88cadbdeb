//! Alternating-direction penalty method around the trust-region solver.
//!
//! The constant-modulus problem is split with an auxiliary copy `s0` of the
//! code and the augmented Lagrangian
//! `f(s) + Re{u^H (s0 - s)} + (ρ/2) ||s - s0||^2`. Each outer iteration
//! updates `s0` in closed form (entrywise phase alignment), minimizes the
//! anchored quartic `h(s) = f(s) + (ρ/2)||s - v||^2` with `v = s0 + u/ρ` on the
//! manifold, then adapts the penalty and the multiplier.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{Code, C64};
use crate::quartic::{cost, gram_matrix, PenaltyAnchor, QuarticObjective};
use crate::rtr::{rtr_minimize, RtrConfig, RtrStop, RtrTrace};

/// Gram eigenvalues at or below this are ignored when picking `λ_min`.
pub const PENALTY_EIGEN_FLOOR: f64 = 1e-3;

/// Below this modulus the phase of `ρ s - u` is undefined.
pub const S0_MIN_MODULUS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdpmConfig {
    /// Residual-decrease factor below which the penalty is kept.
    pub delta1: f64,
    /// Penalty growth factor.
    pub delta2: f64,
    /// Multiplier cap.
    pub w_max: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub inner: RtrConfig,
    pub outer_max_iters: usize,
    pub rho0_override: Option<f64>,
}

impl AdpmConfig {
    pub fn for_length(k: usize) -> Self {
        let mut inner = RtrConfig::for_length(k);
        inner.max_iters = Some(30);
        Self {
            delta1: 0.97,
            delta2: 1.03,
            w_max: 1e4,
            eps_abs: 1e-6,
            eps_rel: 1e-4,
            inner,
            outer_max_iters: 300,
            rho0_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.delta1 > 0.0 && self.delta1 < 1.0) {
            return bad("delta1 must lie in (0, 1)");
        }
        if !(self.delta2 > 1.0 && self.delta2.is_finite()) {
            return bad("delta2 must exceed 1");
        }
        if !(self.w_max > 0.0) {
            return bad("w_max must be positive");
        }
        if !(self.eps_abs > 0.0 && self.eps_rel >= 0.0) {
            return bad("tolerances must be positive");
        }
        if self.outer_max_iters == 0 {
            return bad("outer_max_iters must be positive");
        }
        if let Some(rho) = self.rho0_override {
            if !(rho > 0.0 && rho.is_finite()) {
                return bad("rho0_override must be positive");
            }
        }
        self.inner.validate()
    }
}

/// Iterate of the penalty loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AdpmState {
    pub s: Code,
    pub s0: Code,
    pub u: Vec<C64>,
    pub rho: f64,
    pub iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdpmStop {
    Converged,
    MaxIterations,
}

/// Per-outer-iteration record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdpmIteration {
    /// Unpenalized cost `f(s)` after the inner solve.
    pub cost: f64,
    pub penalized_cost: f64,
    pub rho: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
    pub inner_iters: usize,
    pub inner_stop: RtrStop,
    pub rho_halved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdpmReport {
    pub rho0: f64,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub initial_sir: f64,
    pub final_sir: f64,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub iterations: Vec<AdpmIteration>,
    pub stop: AdpmStop,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

/// `ρ0 = sqrt(λ_max λ_min)` of the Gram matrix `Σ Φ_i^H Φ_i`, where `λ_min`
/// is the smallest eigenvalue above [`PENALTY_EIGEN_FLOOR`].
pub fn init_penalty(obj: &QuarticObjective) -> Result<f64> {
    if obj.is_empty() {
        return Err(Error::EmptyObjective);
    }
    let k = obj.k();
    let gram = gram_matrix(obj);
    let m = DMatrix::from_fn(k, k, |i, j| gram[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut lmax = f64::NEG_INFINITY;
    let mut lmin = f64::INFINITY;
    for &l in eig.eigenvalues.iter() {
        lmax = lmax.max(l);
        if l > PENALTY_EIGEN_FLOOR {
            lmin = lmin.min(l);
        }
    }
    if !lmin.is_finite() {
        return Err(Error::DegenerateObjective {
            threshold: PENALTY_EIGEN_FLOOR,
        });
    }
    Ok((lmax * lmin).sqrt())
}

/// Closed-form minimizer over unimodular `s0`: the phase of `c = ρ s - u`,
/// entry by entry. Entries where `c` vanishes keep their previous value.
pub fn update_s0(s: &Code, u: &[C64], rho: f64, s0_prev: &Code) -> Result<Code> {
    check_len(s.len(), u.len())?;
    check_len(s.len(), s0_prev.len())?;
    let entries = s
        .as_slice()
        .iter()
        .zip(u)
        .zip(s0_prev.as_slice())
        .map(|((sk, uk), prev)| {
            let c = sk * rho - uk;
            let modulus = c.norm();
            if modulus < S0_MIN_MODULUS {
                *prev
            } else {
                c / modulus
            }
        })
        .collect();
    Ok(Code::from_normalized(entries))
}

/// Keeps `ρ` when the primal residual shrank by `delta1`, else grows it by
/// `delta2`.
pub fn update_penalty(rho: f64, dr: f64, dr_prev: f64, cfg: &AdpmConfig) -> f64 {
    if dr <= cfg.delta1 * dr_prev {
        rho
    } else {
        rho * cfg.delta2
    }
}

/// `ū = u + ρ (s0 - s)`, rescaled by its largest modulus when that exceeds
/// `w_max`.
pub fn update_multiplier(u: &[C64], rho: f64, s0: &Code, s: &Code, w_max: f64) -> Result<Vec<C64>> {
    check_len(u.len(), s0.len())?;
    check_len(u.len(), s.len())?;
    let bar: Vec<C64> = u
        .iter()
        .zip(s0.as_slice().iter().zip(s.as_slice()))
        .map(|(uk, (a, b))| uk + (a - b) * rho)
        .collect();
    let u_max = bar.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if u_max <= w_max {
        Ok(bar)
    } else {
        Ok(bar.into_iter().map(|z| z / u_max).collect())
    }
}

/// Primal and dual feasibility tolerances, with `N = K`.
pub fn tolerances(state: &AdpmState, cfg: &AdpmConfig) -> (f64, f64) {
    let abs = (2.0 * state.s.len() as f64).sqrt() * cfg.eps_abs;
    let s_norm = state.s.norm_sqr().sqrt();
    let s0_norm = state.s0.norm_sqr().sqrt();
    let eps_pri = abs + cfg.eps_rel * s_norm.max(s0_norm);
    let eps_dual = abs + cfg.eps_rel * s0_norm;
    (eps_pri, eps_dual)
}

fn distance(a: &Code, b: &Code) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn sir_from_cost(k: usize, f: f64) -> f64 {
    let k = k as f64;
    k * k / f
}

/// Runs the penalty loop from `s_init` and returns the final code with its
/// report and last state.
pub fn adpm_solve_with_state(
    obj: &QuarticObjective,
    s_init: &Code,
    cfg: &AdpmConfig,
) -> Result<(Code, AdpmReport, AdpmState)> {
    adpm_solve_observed(obj, s_init, cfg, |_, _| {})
}

/// Like [`adpm_solve_with_state`], calling `observe` with the state and the
/// inner trust-region trace after every outer iteration.
pub fn adpm_solve_observed<F>(
    obj: &QuarticObjective,
    s_init: &Code,
    cfg: &AdpmConfig,
    mut observe: F,
) -> Result<(Code, AdpmReport, AdpmState)>
where
    F: FnMut(&AdpmState, &RtrTrace),
{
    let start = Instant::now();
    cfg.validate()?;
    check_len(obj.k(), s_init.len())?;
    // re-check the invariant in case the code was assembled from raw parts
    let s_init = Code::new(s_init.as_slice().to_vec())?;
    let rho0 = match cfg.rho0_override {
        Some(rho) => rho,
        None => init_penalty(obj)?,
    };
    let k = s_init.len();
    let initial_cost = cost(s_init.as_slice(), obj, None)?;

    let mut state = AdpmState {
        s: s_init.clone(),
        s0: s_init.clone(),
        u: vec![C64::new(0.0, 0.0); k],
        rho: rho0,
        iter: 0,
        primal_residual: 0.0,
        dual_residual: 0.0,
    };
    let mut dr_prev = f64::INFINITY;
    let mut iterations = Vec::new();
    let mut total_inner_iters = 0;
    let mut stop = AdpmStop::MaxIterations;

    while state.iter < cfg.outer_max_iters {
        state.iter += 1;
        let s0 = update_s0(&state.s, &state.u, state.rho, &state.s0)?;
        let v_anchor: Vec<C64> = s0
            .as_slice()
            .iter()
            .zip(&state.u)
            .map(|(a, u)| a + u / state.rho)
            .collect();
        let anchor = PenaltyAnchor::new(state.rho, v_anchor)?;
        let (s, trace) = rtr_minimize(obj, Some(&anchor), &state.s, &cfg.inner)?;
        total_inner_iters += trace.iterations.len();

        let dr = distance(&s0, &s);
        let dual = rho0 * distance(&state.s0, &s0);
        let rho_halved = trace.final_cost <= 0.0;
        let rho = if rho_halved {
            0.5 * state.rho
        } else {
            update_penalty(state.rho, dr, dr_prev, cfg)
        };
        let u = update_multiplier(&state.u, rho, &s0, &s, cfg.w_max)?;

        state = AdpmState {
            s,
            s0,
            u,
            rho,
            iter: state.iter,
            primal_residual: dr,
            dual_residual: dual,
        };
        dr_prev = dr;
        observe(&state, &trace);
        let (eps_pri, eps_dual) = tolerances(&state, cfg);
        iterations.push(AdpmIteration {
            cost: cost(state.s.as_slice(), obj, None)?,
            penalized_cost: trace.final_cost,
            rho,
            primal_residual: dr,
            dual_residual: dual,
            eps_pri,
            eps_dual,
            inner_iters: trace.iterations.len(),
            inner_stop: trace.stop,
            rho_halved,
        });
        if dr <= eps_pri && dual <= eps_dual {
            stop = AdpmStop::Converged;
            break;
        }
    }

    let final_cost = cost(state.s.as_slice(), obj, None)?;
    let report = AdpmReport {
        rho0,
        initial_cost,
        final_cost,
        initial_sir: sir_from_cost(k, initial_cost),
        final_sir: sir_from_cost(k, final_cost),
        outer_iters: state.iter,
        total_inner_iters,
        iterations,
        stop,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((state.s.clone(), report, state))
}

/// Runs the penalty loop from `s_init`.
pub fn adpm_solve(obj: &QuarticObjective, s_init: &Code, cfg: &AdpmConfig) -> Result<(Code, AdpmReport)> {
    let (s, report, _) = adpm_solve_with_state(obj, s_init, cfg)?;
    Ok((s, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quartic::PhiBin;
    use crate::scenarios::p4_code;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cfg() -> AdpmConfig {
        AdpmConfig::for_length(4)
    }

    #[test]
    fn init_penalty_examples() {
        let one = QuarticObjective::new(4, vec![PhiBin::new(0, 0.0, 1.0, 4).unwrap()]).unwrap();
        assert!((init_penalty(&one).unwrap() - 1.0).abs() < 1e-12);
        let shift = QuarticObjective::new(3, vec![PhiBin::new(1, 0.0, 1.0, 3).unwrap()]).unwrap();
        assert!((init_penalty(&shift).unwrap() - 1.0).abs() < 1e-12);
        let empty = QuarticObjective::new(3, vec![]).unwrap();
        assert!(matches!(init_penalty(&empty), Err(Error::EmptyObjective)));
        let tiny = QuarticObjective::new(3, vec![PhiBin::new(0, 0.0, 1e-4, 3).unwrap()]).unwrap();
        assert!(matches!(init_penalty(&tiny), Err(Error::DegenerateObjective { .. })));
    }

    #[test]
    fn update_s0_examples() {
        let s = Code::new(vec![c(0.0, 1.0)]).unwrap();
        let out = update_s0(&s, &[c(0.0, 0.0)], 2.0, &s).unwrap();
        assert!((out.as_slice()[0] - c(0.0, 1.0)).norm() < 1e-15);

        let s = Code::new(vec![c(1.0, 0.0)]).unwrap();
        let out = update_s0(&s, &[c(1.0, -1.0)], 1.0, &s).unwrap();
        assert!((out.as_slice()[0] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn update_s0_keeps_previous_phase_when_c_vanishes() {
        let s = Code::new(vec![c(1.0, 0.0)]).unwrap();
        let prev = Code::new(vec![c(0.0, -1.0)]).unwrap();
        let out = update_s0(&s, &[c(2.0, 0.0)], 2.0, &prev).unwrap();
        assert_eq!(out, prev);
    }

    #[test]
    fn update_penalty_examples() {
        let cfg = cfg();
        assert_eq!(update_penalty(1.0, 0.5, 0.6, &cfg), 1.0);
        assert!((update_penalty(1.0, 0.6, 0.6, &cfg) - 1.03).abs() < 1e-15);
        assert_eq!(update_penalty(2.0, 0.0, 0.0, &cfg), 2.0);
    }

    #[test]
    fn update_multiplier_examples() {
        let y = (15.0f64 / 16.0).sqrt();
        let s0 = Code::new(vec![c(0.25, y)]).unwrap();
        let s = Code::new(vec![c(-0.25, y)]).unwrap();
        let u = update_multiplier(&[c(0.0, 0.0)], 1.0, &s0, &s, 1e4).unwrap();
        assert!((u[0] - c(0.5, 0.0)).norm() < 1e-15);

        let s2 = Code::new(vec![c(1.0, 0.0); 2]).unwrap();
        let u = update_multiplier(&[c(3.0, 0.0), c(0.0, 4.0)], 1.0, &s2, &s2, 2.0).unwrap();
        assert!((u[0] - c(0.75, 0.0)).norm() < 1e-15 && (u[1] - c(0.0, 1.0)).norm() < 1e-15);

        let u = update_multiplier(&[c(1.0, 0.0)], 0.5, &s, &s, 1e4).unwrap();
        assert_eq!(u, vec![c(1.0, 0.0)]);
    }

    #[test]
    fn tolerance_examples() {
        let mut cfg = AdpmConfig::for_length(50);
        let s = p4_code(50).unwrap();
        let state = AdpmState {
            s: s.clone(),
            s0: s,
            u: vec![c(0.0, 0.0); 50],
            rho: 1.0,
            iter: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
        };
        let (pri, dual) = tolerances(&state, &cfg);
        assert!((pri - (10.0 * 1e-6 + 1e-4 * 50f64.sqrt())).abs() < 1e-15);
        assert!((pri - 7.1711e-4).abs() < 1e-8);
        assert!(pri >= dual);
        cfg.eps_rel = 0.0;
        let (pri, _) = tolerances(&state, &cfg);
        assert_eq!(pri, 100f64.sqrt() * 1e-6);
    }

    #[test]
    fn mainlobe_objective_converges_at_once() {
        let k = 6;
        let obj = QuarticObjective::new(k, vec![PhiBin::new(0, 0.0, 1.0, k).unwrap()]).unwrap();
        let s_init = p4_code(k).unwrap();
        let (s, report) = adpm_solve(&obj, &s_init, &AdpmConfig::for_length(k)).unwrap();
        assert!(report.outer_iters <= 2);
        assert_eq!(report.stop, AdpmStop::Converged);
        for (a, b) in s.as_slice().iter().zip(s_init.as_slice()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        assert!(c.validate().is_ok());
        c.delta1 = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.delta2 = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.rho0_override = Some(-1.0);
        assert!(c.validate().is_err());
    }
}
