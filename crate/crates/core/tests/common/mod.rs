//! Independent reference implementations used by the integration tests.
//!
//! Everything here is built from the definitions with dense matrices, finite
//! differences or plain enumeration, and shares no code path with the
//! library's matrix-free operators.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use stafshape::manifold::TangentVector;
use stafshape::model::{Code, InterferenceMap, MapBin, C64};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn unif(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn below(rng: &mut ChaCha20Rng, n: usize) -> usize {
    ((unif(rng) * n as f64) as usize).min(n - 1)
}

pub fn cvec(rng: &mut ChaCha20Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0))
        .collect()
}

pub fn unimodular(rng: &mut ChaCha20Rng, n: usize) -> Code {
    Code::new((0..n).map(|_| C64::from_polar(1.0, 2.0 * PI * unif(rng))).collect()).unwrap()
}

/// Map with `nbins` distinct bins of unit weight, or weights in `[0.25, 2)`.
pub fn random_map(rng: &mut ChaCha20Rng, k: usize, nv: usize, nbins: usize, weighted: bool) -> InterferenceMap {
    let mut bins: Vec<MapBin> = Vec::new();
    while bins.len() < nbins {
        let r = below(rng, k);
        let h = below(rng, nv);
        if bins.iter().any(|b| b.r == r && b.h == h) {
            continue;
        }
        let weight = if weighted { 0.25 + 1.75 * unif(rng) } else { 1.0 };
        bins.push(MapBin { r, h, weight });
    }
    InterferenceMap::new(k, nv, bins).unwrap()
}

pub fn doppler(h: usize, nv: usize) -> f64 {
    -0.5 + h as f64 / nv as f64
}

/// Dense `sqrt(w) · J_r · diag(p(v))` with `(J_r)[m][n] = [m - n = r]`.
pub fn dense_phi(k: usize, r: usize, v: f64, w: f64) -> DMatrix<C64> {
    let mut j = DMatrix::<C64>::zeros(k, k);
    for n in 0..k - r {
        j[(n + r, n)] = C64::new(1.0, 0.0);
    }
    let p = DMatrix::<C64>::from_diagonal(&DVector::from_fn(k, |m, _| C64::from_polar(1.0, 2.0 * PI * m as f64 * v)));
    j * p * C64::new(w.sqrt(), 0.0)
}

pub fn dvec(x: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(x)
}

pub fn quad(s: &[C64], a: &DMatrix<C64>) -> C64 {
    let sv = dvec(s);
    (sv.adjoint() * a * &sv)[(0, 0)]
}

pub fn dense_phis(map: &InterferenceMap) -> Vec<DMatrix<C64>> {
    map.active_bins()
        .map(|b| dense_phi(map.k(), b.r, doppler(b.h, map.nv()), b.weight))
        .collect()
}

/// `Σ |s^H Φ s|^2` (plus `ρ/2 ||s - v||^2`).
pub fn dense_cost(s: &[C64], phis: &[DMatrix<C64>], penalty: Option<(f64, &[C64])>) -> f64 {
    let mut f: f64 = phis.iter().map(|p| quad(s, p).norm_sqr()).sum();
    if let Some((rho, v)) = penalty {
        f += 0.5 * rho * s.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    }
    f
}

/// Dense STAF from the definition.
pub fn dense_staf(s: &[C64], r: usize, v: f64) -> f64 {
    let n2: f64 = s.iter().map(|z| z.norm_sqr()).sum();
    quad(s, &dense_phi(s.len(), r, v, 1.0)).norm_sqr() / n2
}

/// Central-difference gradient with the convention `Df[d] = Re{g^H d}`.
pub fn fd_gradient(f: impl Fn(&[C64]) -> f64, x: &[C64], eps: f64) -> Vec<C64> {
    let mut g = vec![C64::new(0.0, 0.0); x.len()];
    for k in 0..x.len() {
        for (unit, imag) in [(C64::new(1.0, 0.0), false), (C64::new(0.0, 1.0), true)] {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += unit * eps;
            xm[k] -= unit * eps;
            let d = (f(&xp) - f(&xm)) / (2.0 * eps);
            if imag {
                g[k].im = d;
            } else {
                g[k].re = d;
            }
        }
    }
    g
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(x: &[C64], alpha: f64, d: &[C64]) -> Vec<C64> {
    x.iter().zip(d).map(|(a, b)| a + b * alpha).collect()
}

pub fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Orthonormal tangent basis `{ j s_k e_k }` at `s`.
pub fn tangent_basis(s: &Code) -> Vec<Vec<C64>> {
    let k = s.len();
    (0..k)
        .map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); k];
            e[i] = C64::new(0.0, 1.0) * s.as_slice()[i];
            e
        })
        .collect()
}

pub fn to_coords(basis: &[Vec<C64>], t: &[C64]) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| real_dot(b, t)))
}

pub fn from_coords(s: &Code, basis: &[Vec<C64>], x: &DVector<f64>) -> TangentVector {
    let mut dir = vec![C64::new(0.0, 0.0); s.len()];
    for (b, &c) in basis.iter().zip(x.iter()) {
        for (d, bk) in dir.iter_mut().zip(b) {
            *d += bk * c;
        }
    }
    TangentVector::new(s.clone(), dir).unwrap()
}

/// Symmetric matrix of a linear tangent operator in the basis.
pub fn operator_matrix(basis: &[Vec<C64>], mut apply: impl FnMut(&[C64]) -> Vec<C64>) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = apply(&basis[j]);
        for i in 0..n {
            m[(i, j)] = real_dot(&basis[i], &col);
        }
    }
    (&m + m.transpose()) * 0.5
}

pub fn model_value(h: &DMatrix<f64>, g: &DVector<f64>, x: &DVector<f64>) -> f64 {
    g.dot(x) + 0.5 * x.dot(&(h * x))
}

/// Moré–Sorensen: `min g^T x + ½ x^T H x`, `||x|| <= Δ`. Newton on the
/// secular equation `1/Δ - 1/||x(λ)|| = 0` with Cholesky solves, safeguarded
/// by bisection; the hard case adds a lowest-eigenvector component.
pub fn more_sorensen(h: &DMatrix<f64>, g: &DVector<f64>, delta: f64) -> DVector<f64> {
    let n = g.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let eig = SymmetricEigen::new(h.clone());
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, l)| if l < acc.1 { (i, l) } else { acc });

    if lmin > 0.0 {
        if let Some(chol) = Cholesky::new(h.clone()) {
            let x = chol.solve(&(-g));
            if x.norm() <= delta {
                return x;
            }
        }
    }

    let solve = |lam: f64| -> Option<(DVector<f64>, Cholesky<f64, nalgebra::Dyn>)> {
        let chol = Cholesky::new(h + &eye * lam)?;
        Some((chol.solve(&(-g)), chol))
    };

    let floor = (-lmin).max(0.0);
    let scale = h.norm().max(1.0);
    // hard case: ||x(λ)|| stays below Δ as λ approaches -λ_min
    let probe = floor + 1e-13 * scale;
    if lmin <= 0.0 {
        if let Some((x, _)) = solve(probe) {
            if x.norm() < delta {
                let z = eig.eigenvectors.column(imin).into_owned();
                let xz = x.dot(&z);
                let tau = -xz + (xz * xz + delta * delta - x.norm_squared()).sqrt();
                return x + z * tau;
            }
        }
    }

    let mut lo = floor;
    let mut hi = floor + g.norm() / delta + scale;
    let mut lam = 0.5 * (lo + hi).max(probe);
    for _ in 0..500 {
        let Some((x, chol)) = solve(lam) else {
            lo = lam;
            lam = 0.5 * (lo + hi);
            continue;
        };
        let xn = x.norm();
        if (xn - delta).abs() <= 1e-14 * delta {
            return x;
        }
        if xn > delta {
            lo = lam;
        } else {
            hi = lam;
        }
        let w = chol.l().solve_lower_triangular(&x).unwrap();
        let newton = lam + (xn / w.norm()).powi(2) * (xn - delta) / delta;
        lam = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let (x, _) = solve(lam).unwrap();
    let xn = x.norm();
    x * (delta / xn)
}
