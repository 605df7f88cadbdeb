//! Exact solution of small dense trust-region subproblems
//! `min c^T h + ½ h^T T h` subject to `||h|| <= Δ`.
//!
//! Used on the Lanczos tridiagonal built by the truncated CG solver, whose
//! dimension never exceeds the manifold dimension.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone)]
pub(crate) struct TrsSolution {
    pub h: DVector<f64>,
    pub on_boundary: bool,
}

pub(crate) fn model_value(t: &DMatrix<f64>, c: &DVector<f64>, h: &DVector<f64>) -> f64 {
    c.dot(h) + 0.5 * h.dot(&(t * h))
}

pub(crate) fn solve(t: &DMatrix<f64>, c: &DVector<f64>, delta: f64) -> TrsSolution {
    let n = c.len();
    let eig = SymmetricEigen::new(t.clone());
    let lam = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let ct = v.transpose() * c;
    let lmin = lam.min();
    let scale = lam.amax().max(1.0);
    let c_norm = c.norm();

    let from_shift = |shift: f64, skip_min: bool| -> DVector<f64> {
        let mut coef = DVector::zeros(n);
        for i in 0..n {
            if skip_min && lam[i] - lmin <= 1e-12 * scale {
                continue;
            }
            coef[i] = -ct[i] / (lam[i] + shift);
        }
        v * coef
    };

    if lmin > 0.0 {
        let h = from_shift(0.0, false);
        if h.norm() <= delta {
            return TrsSolution { h, on_boundary: false };
        }
    }

    let lo = (-lmin).max(0.0);
    let min_space_weight: f64 = (0..n)
        .filter(|&i| lam[i] - lmin <= 1e-12 * scale)
        .map(|i| ct[i] * ct[i])
        .sum::<f64>()
        .sqrt();

    // hard case: the gradient has no weight on the lowest eigenspace and the
    // shifted solution stays inside the ball
    if lmin <= 0.0 && min_space_weight <= 1e-13 * c_norm.max(f64::MIN_POSITIVE) {
        let h_rest = from_shift(lo, true);
        let rest = h_rest.norm();
        if rest <= delta {
            let imin = lam.imin();
            let tau = (delta * delta - rest * rest).max(0.0).sqrt();
            let h = h_rest + v.column(imin) * tau;
            return TrsSolution { h, on_boundary: true };
        }
    }

    let norm_at = |shift: f64| -> f64 {
        (0..n)
            .map(|i| {
                let d = lam[i] + shift;
                ct[i] * ct[i] / (d * d)
            })
            .sum::<f64>()
            .sqrt()
    };

    // ||h(λ)|| decreases on (lo, ∞); hi is chosen so that ||h(hi)|| <= Δ
    let mut low = lo;
    let mut high = lo + c_norm / delta + 1e-12 * scale;
    while norm_at(high) > delta {
        high = lo + 2.0 * (high - lo);
    }
    for _ in 0..300 {
        let mid = 0.5 * (low + high);
        if mid <= low || mid >= high {
            break;
        }
        if norm_at(mid) > delta {
            low = mid;
        } else {
            high = mid;
        }
    }
    let mut h = from_shift(high, false);
    let hn = h.norm();
    if hn > delta {
        h *= delta / hn;
    }
    TrsSolution { h, on_boundary: true }
}
