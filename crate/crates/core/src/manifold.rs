//! Geometry of the complex-circle product manifold `M^K`.
//!
//! Points are unimodular codes; the tangent space at `s` is
//! `{ξ : Re{conj(s_k) ξ_k} = 0 for every k}` and the metric is the real
//! inner product `Re{ξ^H η}`. All operators act entry by entry because the
//! manifold is a product of `K` unit circles.

use crate::error::{check_len, Error, Result};
use crate::model::{Code, C64};

/// Tangency tolerance, scaled by `max(1, |ξ_k|)` per entry.
pub const TANGENT_TOL: f64 = 1e-10;

/// Modulus below which `s_k + ξ_k` is treated as the origin.
pub const RETRACTION_MIN_MODULUS: f64 = 1e-14;

/// A tangent direction attached to its base code.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Code,
    dir: Vec<C64>,
}

impl TangentVector {
    /// Checks elementwise tangency of `dir` at `base`.
    pub fn new(base: Code, dir: Vec<C64>) -> Result<Self> {
        check_len(base.len(), dir.len())?;
        for (index, (s, d)) in base.as_slice().iter().zip(&dir).enumerate() {
            let residual = (s.conj() * d).re;
            if residual.abs() > TANGENT_TOL * d.norm().max(1.0) {
                return Err(Error::NotTangent { index, residual });
            }
        }
        Ok(Self { base, dir })
    }

    pub fn zero(base: Code) -> Self {
        let dir = vec![C64::new(0.0, 0.0); base.len()];
        Self { base, dir }
    }

    pub(crate) fn from_parts_unchecked(base: Code, dir: Vec<C64>) -> Self {
        Self { base, dir }
    }

    pub fn base(&self) -> &Code {
        &self.base
    }

    pub fn dir(&self) -> &[C64] {
        &self.dir
    }

    pub fn into_dir(self) -> Vec<C64> {
        self.dir
    }

    pub fn norm(&self) -> f64 {
        real_inner(&self.dir, &self.dir).sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            base: self.base.clone(),
            dir: self.dir.iter().map(|d| d * alpha).collect(),
        }
    }
}

pub(crate) fn real_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// `xi - Re{conj(s) ⊙ xi} ⊙ s` on raw slices.
pub(crate) fn project_raw(s: &[C64], xi: &[C64]) -> Vec<C64> {
    s.iter()
        .zip(xi)
        .map(|(sk, xk)| xk - sk * (sk.conj() * xk).re)
        .collect()
}

/// Orthogonal projection onto the tangent space at `s`.
pub fn project(s: &Code, xi: &[C64]) -> Result<TangentVector> {
    check_len(s.len(), xi.len())?;
    Ok(TangentVector {
        dir: project_raw(s.as_slice(), xi),
        base: s.clone(),
    })
}

/// Entrywise normalization `(s_k + ξ_k) / |s_k + ξ_k|`.
pub fn retract(s: &Code, t: &TangentVector) -> Result<Code> {
    if t.base != *s {
        return Err(Error::BaseMismatch);
    }
    retract_raw(s.as_slice(), &t.dir)
}

pub(crate) fn retract_raw(s: &[C64], dir: &[C64]) -> Result<Code> {
    let mut out = Vec::with_capacity(s.len());
    for (index, (sk, dk)) in s.iter().zip(dir).enumerate() {
        let z = sk + dk;
        let modulus = z.norm();
        if !(modulus >= RETRACTION_MIN_MODULUS) {
            return Err(Error::DegenerateRetraction { index, modulus });
        }
        out.push(z / modulus);
    }
    Ok(Code::from_normalized(out))
}

/// Riemannian metric `Re{t1^H t2}`.
pub fn inner(t1: &TangentVector, t2: &TangentVector) -> Result<f64> {
    if t1.base != t2.base {
        return Err(Error::BaseMismatch);
    }
    Ok(real_inner(&t1.dir, &t2.dir))
}

/// Riemannian gradient from the Euclidean gradient `eg`.
pub fn rgrad(s: &Code, eg: &[C64]) -> Result<TangentVector> {
    project(s, eg)
}

/// Riemannian Hessian-vector product
/// `Proj_s(ehess_dir - Re{eg ⊙ conj(s)} ⊙ ξ)`.
pub fn rhess_vec(s: &Code, eg: &[C64], ehess_dir: &[C64], t: &TangentVector) -> Result<TangentVector> {
    if t.base != *s {
        return Err(Error::BaseMismatch);
    }
    check_len(s.len(), eg.len())?;
    check_len(s.len(), ehess_dir.len())?;
    Ok(TangentVector {
        dir: rhess_raw(s.as_slice(), eg, ehess_dir, &t.dir),
        base: s.clone(),
    })
}

pub(crate) fn rhess_raw(s: &[C64], eg: &[C64], ehess_dir: &[C64], dir: &[C64]) -> Vec<C64> {
    let corrected: Vec<C64> = (0..s.len())
        .map(|k| ehess_dir[k] - dir[k] * (eg[k] * s[k].conj()).re)
        .collect();
    project_raw(s, &corrected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn one() -> Code {
        Code::new(vec![c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn project_examples() {
        let s = Code::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let p = project(&s, &[c(2.0, 3.0), c(1.0, 0.0)]).unwrap();
        assert!((p.dir()[0] - c(0.0, 3.0)).norm() < 1e-15);
        assert!((p.dir()[1] - c(1.0, 0.0)).norm() < 1e-15);
        let again = project(&s, p.dir()).unwrap();
        assert_eq!(again.dir(), p.dir());
        let radial = project(&one(), &[c(5.0, 0.0)]).unwrap();
        assert!(radial.dir()[0].norm() < 1e-15);
    }

    #[test]
    fn tangent_vector_validation() {
        assert!(matches!(
            TangentVector::new(one(), vec![c(0.5, 1.0)]),
            Err(Error::NotTangent { index: 0, .. })
        ));
        assert!(TangentVector::new(one(), vec![c(0.0, 1.0)]).is_ok());
    }

    #[test]
    fn retract_examples() {
        let t = TangentVector::new(one(), vec![c(0.0, 1.0)]).unwrap();
        let r = retract(&one(), &t).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.as_slice()[0] - c(h, h)).norm() < 1e-15);
        assert_eq!(retract(&one(), &TangentVector::zero(one())).unwrap(), one());
    }

    #[test]
    fn retract_reports_degenerate_step() {
        // only reachable through unchecked construction: the radial antipode
        let t = TangentVector::from_parts_unchecked(one(), vec![c(-1.0, 0.0)]);
        assert!(matches!(retract(&one(), &t), Err(Error::DegenerateRetraction { index: 0, .. })));
    }

    #[test]
    fn inner_examples() {
        let t = TangentVector::new(one(), vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(inner(&t, &t).unwrap(), 1.0);
        let a = TangentVector::from_parts_unchecked(one(), vec![c(1.0, 1.0)]);
        let b = TangentVector::from_parts_unchecked(one(), vec![c(1.0, -1.0)]);
        assert_eq!(inner(&a, &b).unwrap(), 0.0);
        let other = TangentVector::zero(Code::new(vec![c(0.0, 1.0)]).unwrap());
        assert!(matches!(inner(&t, &other), Err(Error::BaseMismatch)));
    }

    #[test]
    fn rgrad_examples() {
        let s = Code::new(vec![c(1.0, 0.0); 2]).unwrap();
        let g = rgrad(&s, &[c(8.0, 0.0); 2]).unwrap();
        assert!(g.norm() < 1e-15);
        let g = rgrad(&one(), &[c(2.0, 3.0)]).unwrap();
        assert!((g.dir()[0] - c(0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn rhess_examples() {
        let s = Code::new(vec![c(1.0, 0.0); 2]).unwrap();
        let t = TangentVector::new(s.clone(), vec![c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        let eg = [c(8.0, 0.0); 2];
        let hd = [c(0.0, 8.0), c(0.0, -8.0)];
        let h = rhess_vec(&s, &eg, &hd, &t).unwrap();
        assert!(h.norm() < 1e-14);

        let t = TangentVector::new(one(), vec![c(0.0, 1.0)]).unwrap();
        let h = rhess_vec(&one(), &[c(2.0, 0.0)], &[c(0.0, 5.0)], &t).unwrap();
        assert!((h.dir()[0] - c(0.0, 3.0)).norm() < 1e-15);
    }
}
