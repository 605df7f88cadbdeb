//! Quartic interference cost and its matrix-free Euclidean derivatives.
//!
//! Each positive-weight bin contributes an operator
//! `Φ = sqrt(p(r,h)) · J_r · diag(p(v_h))` and the cost is
//! `f(s) = Σ |s^H Φ s|^2`. During the penalty loop the cost is augmented with
//! `(ρ/2) ||s - v||^2` for an anchor `v`.
//!
//! Gradients use the real inner product `Re{a^H b}` on `C^K`, so that
//! `Df(s)[d] = Re{egrad(s)^H d}`. Every evaluation touches each bin once and
//! costs `O(|support| · K)`.

use crate::error::{check_len, Error, Result};
use crate::model::{norm_sqr, steering_vector, InterferenceMap, C64};

/// Conjugate-linear inner product `Σ conj(a_k) b_k`.
pub(crate) fn dot_c(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// One interference operator `Φ = sqrt(weight) · J_r · diag(p(v))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiBin {
    r: usize,
    v: f64,
    weight: f64,
    sqrt_weight: f64,
    steer: Vec<C64>,
}

impl PhiBin {
    pub fn new(r: usize, v: f64, weight: f64, k: usize) -> Result<Self> {
        if r >= k {
            return Err(Error::OutOfRange {
                what: "range bin",
                index: r,
                limit: k,
            });
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight { r, h: 0, weight });
        }
        Ok(Self {
            r,
            v,
            weight,
            sqrt_weight: weight.sqrt(),
            steer: steering_vector(v, k),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn k(&self) -> usize {
        self.steer.len()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let k = self.steer.len();
        let r = self.r;
        out[..r].fill(C64::new(0.0, 0.0));
        for n in 0..k - r {
            out[n + r] = self.steer[n] * x[n] * self.sqrt_weight;
        }
    }

    fn adjoint_into(&self, x: &[C64], out: &mut [C64]) {
        let k = self.steer.len();
        let r = self.r;
        for n in 0..k - r {
            out[n] = self.steer[n].conj() * x[n + r] * self.sqrt_weight;
        }
        out[k - r..].fill(C64::new(0.0, 0.0));
    }
}

/// `Φ x` without forming the matrix.
pub fn phi_apply(bin: &PhiBin, x: &[C64]) -> Result<Vec<C64>> {
    check_len(bin.k(), x.len())?;
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    bin.apply_into(x, &mut out);
    Ok(out)
}

/// `Φ^H x = sqrt(weight) · conj(p(v)) ⊙ (J_r^H x)`.
pub fn phi_adjoint_apply(bin: &PhiBin, x: &[C64]) -> Result<Vec<C64>> {
    check_len(bin.k(), x.len())?;
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    bin.adjoint_into(x, &mut out);
    Ok(out)
}

/// Ordered collection of interference operators defining `f(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticObjective {
    k: usize,
    bins: Vec<PhiBin>,
}

impl QuarticObjective {
    /// Builds the objective from the positive-weight bins of `map`.
    pub fn from_map(map: &InterferenceMap) -> Result<Self> {
        let grid = map.doppler_grid();
        let bins = map
            .active_bins()
            .map(|b| PhiBin::new(b.r, grid.value(b.h), b.weight, map.k()))
            .collect::<Result<Vec<_>>>()?;
        if bins.is_empty() {
            return Err(Error::EmptyObjective);
        }
        Ok(Self { k: map.k(), bins })
    }

    /// Builds an objective from explicit operators. An empty list gives
    /// `f ≡ 0`, which is only useful together with a penalty anchor.
    pub fn new(k: usize, bins: Vec<PhiBin>) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyCode);
        }
        for b in &bins {
            check_len(k, b.k())?;
        }
        Ok(Self { k, bins })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bins(&self) -> &[PhiBin] {
        &self.bins
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Quadratic pull `(ρ/2) ||s - v||^2` toward `v = s0 + u/ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyAnchor {
    rho: f64,
    v_anchor: Vec<C64>,
}

impl PenaltyAnchor {
    pub fn new(rho: f64, v_anchor: Vec<C64>) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidConfig(format!("penalty must be positive, got {rho}")));
        }
        Ok(Self { rho, v_anchor })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn v_anchor(&self) -> &[C64] {
        &self.v_anchor
    }
}

fn check_inputs(s: &[C64], obj: &QuarticObjective, anchor: Option<&PenaltyAnchor>) -> Result<()> {
    check_len(obj.k, s.len())?;
    if let Some(a) = anchor {
        check_len(obj.k, a.v_anchor.len())?;
    }
    Ok(())
}

/// `f(s) = Σ |s^H Φ_i s|^2`, plus `(ρ/2)||s - v||^2` when anchored.
pub fn cost(s: &[C64], obj: &QuarticObjective, anchor: Option<&PenaltyAnchor>) -> Result<f64> {
    check_inputs(s, obj, anchor)?;
    let mut phi_s = vec![C64::new(0.0, 0.0); obj.k];
    let mut total = 0.0;
    for bin in &obj.bins {
        bin.apply_into(s, &mut phi_s);
        total += dot_c(s, &phi_s).norm_sqr();
    }
    if let Some(a) = anchor {
        let dist: f64 = s
            .iter()
            .zip(&a.v_anchor)
            .map(|(x, v)| (x - v).norm_sqr())
            .sum();
        total += 0.5 * a.rho * dist;
    }
    Ok(total)
}

/// Euclidean gradient
/// `2 Σ [(s^H Φ s) Φ^H s + (s^H Φ^H s) Φ s] + ρ (s - v)`.
pub fn egrad(s: &[C64], obj: &QuarticObjective, anchor: Option<&PenaltyAnchor>) -> Result<Vec<C64>> {
    check_inputs(s, obj, anchor)?;
    let k = obj.k;
    let mut grad = vec![C64::new(0.0, 0.0); k];
    let mut phi_s = vec![C64::new(0.0, 0.0); k];
    let mut phi_h_s = vec![C64::new(0.0, 0.0); k];
    for bin in &obj.bins {
        bin.apply_into(s, &mut phi_s);
        bin.adjoint_into(s, &mut phi_h_s);
        let q = dot_c(s, &phi_s);
        for i in 0..k {
            grad[i] += (q * phi_h_s[i] + q.conj() * phi_s[i]) * 2.0;
        }
    }
    if let Some(a) = anchor {
        for i in 0..k {
            grad[i] += (s[i] - a.v_anchor[i]) * a.rho;
        }
    }
    Ok(grad)
}

/// Directional derivative of [`egrad`] at `s` along `dir`.
///
/// The map `dir -> ehess_vec(s, dir)` is real-linear (it contains `dir^H`
/// terms) and self-adjoint in `Re{a^H b}`.
pub fn ehess_vec(
    s: &[C64],
    dir: &[C64],
    obj: &QuarticObjective,
    anchor: Option<&PenaltyAnchor>,
) -> Result<Vec<C64>> {
    check_inputs(s, obj, anchor)?;
    check_len(obj.k, dir.len())?;
    let k = obj.k;
    let mut out = vec![C64::new(0.0, 0.0); k];
    let mut phi_s = vec![C64::new(0.0, 0.0); k];
    let mut phi_h_s = vec![C64::new(0.0, 0.0); k];
    let mut phi_d = vec![C64::new(0.0, 0.0); k];
    let mut phi_h_d = vec![C64::new(0.0, 0.0); k];
    for bin in &obj.bins {
        bin.apply_into(s, &mut phi_s);
        bin.adjoint_into(s, &mut phi_h_s);
        bin.apply_into(dir, &mut phi_d);
        bin.adjoint_into(dir, &mut phi_h_d);
        let q = dot_c(s, &phi_s);
        // d q = d^H Φ s + s^H Φ d
        let dq = dot_c(dir, &phi_s) + dot_c(s, &phi_d);
        // d conj(q) = d^H Φ^H s + s^H Φ^H d
        let dq_conj = dot_c(dir, &phi_h_s) + dot_c(s, &phi_h_d);
        for i in 0..k {
            out[i] += (dq * phi_h_s[i] + q * phi_h_d[i] + q.conj() * phi_d[i] + dq_conj * phi_s[i]) * 2.0;
        }
    }
    if let Some(a) = anchor {
        for i in 0..k {
            out[i] += dir[i] * a.rho;
        }
    }
    Ok(out)
}

/// `Σ_i Φ_i^H Φ_i` as a dense row-major `K x K` matrix, built column by
/// column from the matrix-free operators.
pub fn gram_matrix(obj: &QuarticObjective) -> Vec<Vec<C64>> {
    let k = obj.k;
    let mut gram = vec![vec![C64::new(0.0, 0.0); k]; k];
    let mut e = vec![C64::new(0.0, 0.0); k];
    let mut phi_e = vec![C64::new(0.0, 0.0); k];
    let mut col = vec![C64::new(0.0, 0.0); k];
    for j in 0..k {
        e.fill(C64::new(0.0, 0.0));
        e[j] = C64::new(1.0, 0.0);
        for bin in &obj.bins {
            bin.apply_into(&e, &mut phi_e);
            bin.adjoint_into(&phi_e, &mut col);
            for i in 0..k {
                gram[i][j] += col[i];
            }
        }
    }
    gram
}

/// `||x||^2` for free vectors.
pub fn norm_sq(x: &[C64]) -> f64 {
    norm_sqr(x)
}
