//! Built-in numerical self-check on a small fixed problem (`K = 8`).
//!
//! Every derivative is compared against central finite differences of the
//! quantity it differentiates, and the manifold operators against their
//! defining identities.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::Result;
use crate::manifold::{inner, project, retract, rgrad, rhess_vec, TangentVector};
use crate::model::{disturbance_power, Code, InterferenceMap, MapBin, NoiseLevel, C64};
use crate::quartic::{cost, egrad, ehess_vec, phi_adjoint_apply, phi_apply, PenaltyAnchor, QuarticObjective};
use crate::scenarios::random_unimodular;

const K: usize = 8;
const NV: usize = 8;
const POINTS: u64 = 5;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelfCheckOptions {
    /// Perturb the analytic Euclidean gradient by a relative `1e-3` so the
    /// gradient check is seen to fail.
    pub corrupt_gradient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error.
    pub error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckResult>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The fixed five-bin map used by the self-check.
pub fn check_map() -> InterferenceMap {
    let bins = [(1, 2, 1.0), (2, 5, 0.5), (3, 0, 2.0), (5, 6, 1.0), (7, 3, 0.25)]
        .into_iter()
        .map(|(r, h, weight)| MapBin { r, h, weight });
    InterferenceMap::new(K, NV, bins).expect("fixed check map is valid")
}

struct Sampler(ChaCha20Rng);

impl Sampler {
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn complex_vec(&mut self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(2.0 * self.uniform() - 1.0, 2.0 * self.uniform() - 1.0))
            .collect()
    }
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(x: &[C64], alpha: f64, d: &[C64]) -> Vec<C64> {
    x.iter().zip(d).map(|(a, b)| a + b * alpha).collect()
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: 0.0,
        }
    }

    fn record(&mut self, err: f64) {
        if err.is_nan() || err > self.worst {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: self.worst <= self.tolerance,
            error: self.worst,
            tolerance: self.tolerance,
        }
    }
}

/// Runs all checks. Errors are returned only for internal failures, never for
/// a failed comparison.
pub fn self_check(opts: SelfCheckOptions) -> Result<SelfCheckReport> {
    let map = check_map();
    let obj = QuarticObjective::from_map(&map)?;
    let mut rng = Sampler(ChaCha20Rng::seed_from_u64(0x5e1f));
    let anchor = PenaltyAnchor::new(2.5, rng.complex_vec(K))?;
    let analytic_egrad = |s: &[C64], a: Option<&PenaltyAnchor>| -> Result<Vec<C64>> {
        let g = egrad(s, &obj, a)?;
        Ok(if opts.corrupt_gradient {
            g.into_iter().map(|z| z * (1.0 + 1e-3)).collect()
        } else {
            g
        })
    };

    let mut eg = Tracker::new("egrad finite-difference", 1e-6);
    let mut eh = Tracker::new("ehess finite-difference", 1e-5);
    let mut rg = Tracker::new("rgrad finite-difference", 1e-5);
    let mut rh = Tracker::new("rhess finite-difference", 1e-4);
    let mut proj = Tracker::new("projector identities", 1e-12);
    let mut retr = Tracker::new("retraction identities", 1e-12);
    let mut equiv = Tracker::new("cost equivalence", 1e-12);
    let mut adj = Tracker::new("phi adjoint consistency", 1e-12);

    for point in 0..POINTS {
        // Euclidean derivatives at a generic (not unimodular) point
        let x = rng.complex_vec(K);
        for a in [None, Some(&anchor)] {
            let g = analytic_egrad(&x, a)?;
            let mut fd = vec![C64::new(0.0, 0.0); K];
            for k in 0..K {
                for (unit, part) in [(C64::new(1.0, 0.0), 0), (C64::new(0.0, 1.0), 1)] {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += unit * FD_STEP;
                    xm[k] -= unit * FD_STEP;
                    let d = (cost(&xp, &obj, a)? - cost(&xm, &obj, a)?) / (2.0 * FD_STEP);
                    if part == 0 {
                        fd[k].re = d;
                    } else {
                        fd[k].im = d;
                    }
                }
            }
            eg.record(rel(diff_norm(&g, &fd), norm(&g)));

            let d = rng.complex_vec(K);
            let hd = ehess_vec(&x, &d, &obj, a)?;
            let gp = egrad(&axpy(&x, FD_STEP, &d), &obj, a)?;
            let gm = egrad(&axpy(&x, -FD_STEP, &d), &obj, a)?;
            let fd: Vec<C64> = gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * FD_STEP)).collect();
            eh.record(rel(diff_norm(&hd, &fd), norm(&hd)));
        }

        // Riemannian derivatives along retraction curves
        let s = random_unimodular(K, 100 + point)?;
        let t = project(&s, &rng.complex_vec(K))?;
        for a in [None, Some(&anchor)] {
            let g_e = analytic_egrad(s.as_slice(), a)?;
            let g_r = rgrad(&s, &g_e)?;
            let plus = retract(&s, &t.scaled(FD_STEP))?;
            let minus = retract(&s, &t.scaled(-FD_STEP))?;
            let fd = (cost(plus.as_slice(), &obj, a)? - cost(minus.as_slice(), &obj, a)?) / (2.0 * FD_STEP);
            let analytic = inner(&g_r, &t)?;
            rg.record(rel((fd - analytic).abs(), g_r.norm() * t.norm()));

            let g_e = egrad(s.as_slice(), &obj, a)?;
            let hess = rhess_vec(&s, &g_e, &ehess_vec(s.as_slice(), t.dir(), &obj, a)?, &t)?;
            let grad_at = |c: &Code| -> Result<Vec<C64>> { Ok(rgrad(c, &egrad(c.as_slice(), &obj, a)?)?.into_dir()) };
            let gp = grad_at(&plus)?;
            let gm = grad_at(&minus)?;
            let raw: Vec<C64> = gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * FD_STEP)).collect();
            let fd = project(&s, &raw)?;
            rh.record(rel(diff_norm(hess.dir(), fd.dir()), hess.norm().max(t.norm())));
        }

        // projector: tangency, idempotence, self-adjointness
        let xi = rng.complex_vec(K);
        let zeta = rng.complex_vec(K);
        let p_xi = project(&s, &xi)?;
        let p_zeta = project(&s, &zeta)?;
        let tangency = s
            .as_slice()
            .iter()
            .zip(p_xi.dir())
            .map(|(sk, tk)| (sk.conj() * tk).re.abs())
            .fold(0.0, f64::max);
        proj.record(tangency);
        proj.record(diff_norm(project(&s, p_xi.dir())?.dir(), p_xi.dir()));
        let lhs: f64 = p_xi.dir().iter().zip(&zeta).map(|(a, b)| (a.conj() * b).re).sum();
        let rhs: f64 = xi.iter().zip(p_zeta.dir()).map(|(a, b)| (a.conj() * b).re).sum();
        proj.record((lhs - rhs).abs() / (norm(&xi) * norm(&zeta)));

        // retraction: unimodular, centered
        let r = retract(&s, &p_xi)?;
        retr.record(r.as_slice().iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max));
        retr.record(diff_norm(retract(&s, &TangentVector::zero(s.clone()))?.as_slice(), s.as_slice()));

        // quartic cost equals the weighted STAF energy
        let f = cost(s.as_slice(), &obj, None)?;
        let disturbance = disturbance_power(&s, &map, NoiseLevel::new(0.0)?)?;
        equiv.record((f - disturbance).abs() / disturbance);

        // Re{(Φx)^H y} = Re{x^H Φ^H y}
        for bin in obj.bins() {
            let x = rng.complex_vec(K);
            let y = rng.complex_vec(K);
            let lhs: C64 = phi_apply(bin, &x)?.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
            let rhs: C64 = x.iter().zip(phi_adjoint_apply(bin, &y)?.iter()).map(|(a, b)| a.conj() * b).sum();
            adj.record((lhs - rhs).norm() / (norm(&x) * norm(&y)));
        }
    }

    Ok(SelfCheckReport {
        checks: [eg, eh, rg, rh, proj, retr, equiv, adj].into_iter().map(Tracker::finish).collect(),
    })
}
