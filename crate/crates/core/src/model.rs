//! Domain types and closed-form radar quantities.
//!
//! A slow-time code `s` of length `K` is observed on a range–Doppler grid of
//! `K` range shifts and `Nv` normalized Doppler bins `v_h = -1/2 + h/Nv`. The
//! slow-time ambiguity function (STAF) of `s` at bin `(r, v)` is
//!
//! ```text
//! d_s(r, v) = |s^H J_r (s ⊙ p(v))|^2 / ||s||^2
//! ```
//!
//! where `p(v)` is the temporal steering vector and `J_r` the down-shift by
//! `r` samples. Interference maps weight the bins whose STAF must be pushed
//! down; the weighted STAF energy is the quantity every solver minimizes.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

pub type C64 = Complex<f64>;

/// Allowed deviation of `|s[k]|` from 1 for a [`Code`].
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Floor applied to peak-normalized STAF values before taking logarithms.
pub const DB_FLOOR_LINEAR: f64 = 1e-30;

/// A constant-modulus slow-time code.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    entries: Vec<C64>,
}

impl Code {
    /// Wraps `entries`, checking that every entry has unit modulus.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCode);
        }
        for (index, z) in entries.iter().enumerate() {
            let modulus = z.norm();
            if !modulus.is_finite() || (modulus - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::NotUnimodular { index, modulus });
            }
        }
        Ok(Self { entries })
    }

    /// Builds `e^{j phase_k}` for each phase.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::EmptyCode);
        }
        Ok(Self {
            entries: phases.iter().map(|&p| C64::from_polar(1.0, p)).collect(),
        })
    }

    /// Callers guarantee every entry was just divided by its own modulus.
    pub(crate) fn from_normalized(entries: Vec<C64>) -> Self {
        debug_assert!(entries
            .iter()
            .all(|z| (z.norm() - 1.0).abs() <= UNIMODULAR_TOL));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.entries
    }

    pub fn phases(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.arg()).collect()
    }

    /// `||s||^2`, which equals `K` up to rounding.
    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.entries)
    }
}

impl AsRef<[C64]> for Code {
    fn as_ref(&self) -> &[C64] {
        &self.entries
    }
}

/// Uniform normalized Doppler grid `v_h = -1/2 + h/Nv`, `h = 0..Nv-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DopplerGrid {
    nv: usize,
}

impl DopplerGrid {
    pub fn new(nv: usize) -> Result<Self> {
        if nv == 0 {
            return Err(Error::InvalidConfig("Doppler bin count must be positive".into()));
        }
        Ok(Self { nv })
    }

    pub fn len(&self) -> usize {
        self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.nv == 0
    }

    pub fn value(&self, h: usize) -> f64 {
        doppler_value(h, self.nv)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.nv).map(|h| self.value(h)).collect()
    }
}

pub(crate) fn doppler_value(h: usize, nv: usize) -> f64 {
    -0.5 + h as f64 / nv as f64
}

/// One weighted range–Doppler bin of an interference map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapBin {
    pub r: usize,
    pub h: usize,
    pub weight: f64,
}

/// Sparse nonnegative weights `p(r, h)` over a `K x Nv` grid, kept in
/// canonical order of the linear index `l = r * Nv + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMap {
    k: usize,
    nv: usize,
    support: Vec<MapBin>,
}

impl InterferenceMap {
    pub fn new(k: usize, nv: usize, bins: impl IntoIterator<Item = MapBin>) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyCode);
        }
        if nv == 0 {
            return Err(Error::InvalidConfig("Doppler bin count must be positive".into()));
        }
        let mut support: Vec<MapBin> = bins.into_iter().collect();
        for b in &support {
            if b.r >= k {
                return Err(Error::OutOfRange {
                    what: "range bin",
                    index: b.r,
                    limit: k,
                });
            }
            if b.h >= nv {
                return Err(Error::OutOfRange {
                    what: "Doppler bin",
                    index: b.h,
                    limit: nv,
                });
            }
            if !b.weight.is_finite() || b.weight < 0.0 {
                return Err(Error::InvalidWeight {
                    r: b.r,
                    h: b.h,
                    weight: b.weight,
                });
            }
        }
        support.sort_by_key(|b| b.r * nv + b.h);
        if let Some(w) = support.windows(2).find(|w| w[0].r == w[1].r && w[0].h == w[1].h) {
            return Err(Error::DuplicateBin { r: w[0].r, h: w[0].h });
        }
        Ok(Self { k, nv, support })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn doppler_grid(&self) -> DopplerGrid {
        DopplerGrid { nv: self.nv }
    }

    /// All stored bins in canonical order, including zero weights.
    pub fn support(&self) -> &[MapBin] {
        &self.support
    }

    /// Bins with strictly positive weight, in canonical order.
    pub fn active_bins(&self) -> impl Iterator<Item = &MapBin> {
        self.support.iter().filter(|b| b.weight > 0.0)
    }

    pub fn has_positive_weight(&self) -> bool {
        self.active_bins().next().is_some()
    }

    pub fn linear_index(&self, r: usize, h: usize) -> usize {
        r * self.nv + h
    }

    /// Sorted distinct range indices carrying positive weight.
    pub fn active_ranges(&self) -> Vec<usize> {
        let mut rs: Vec<usize> = self.active_bins().map(|b| b.r).collect();
        rs.dedup();
        rs
    }
}

/// Noise power `sigma_n^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise power must be nonnegative, got {sigma2}"
            )));
        }
        Ok(Self(sigma2))
    }

    pub fn sigma2(&self) -> f64 {
        self.0
    }
}

pub(crate) fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `[e^{j2π·0·v}, e^{j2π·1·v}, ..., e^{j2π(K-1)v}]`.
pub fn steering_vector(v: f64, k: usize) -> Vec<C64> {
    (0..k)
        .map(|m| C64::from_polar(1.0, 2.0 * PI * m as f64 * v))
        .collect()
}

/// `J_r x`: `out[m] = x[m - r]` for `m >= r`, zero above.
pub fn shift_apply(r: usize, x: &[C64]) -> Result<Vec<C64>> {
    let k = x.len();
    if r >= k {
        return Err(Error::OutOfRange {
            what: "shift",
            index: r,
            limit: k,
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); k];
    out[r..].copy_from_slice(&x[..k - r]);
    Ok(out)
}

/// `J_r^H x = J_{-r} x`: `out[m] = x[m + r]` for `m <= K-1-r`, zero below.
pub fn shift_adjoint_apply(r: usize, x: &[C64]) -> Result<Vec<C64>> {
    let k = x.len();
    if r >= k {
        return Err(Error::OutOfRange {
            what: "shift",
            index: r,
            limit: k,
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); k];
    out[..k - r].copy_from_slice(&x[r..]);
    Ok(out)
}

/// `s^H J_r (s ⊙ p(v)) = Σ_{m>=r} conj(s[m]) s[m-r] e^{j2π(m-r)v}`.
pub(crate) fn shifted_correlation(s: &[C64], r: usize, v: f64) -> C64 {
    let k = s.len();
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..k - r {
        let phase = C64::from_polar(1.0, 2.0 * PI * n as f64 * v);
        acc += s[n + r].conj() * s[n] * phase;
    }
    acc
}

fn check_shift(r: usize, k: usize) -> Result<()> {
    if r >= k {
        Err(Error::OutOfRange {
            what: "shift",
            index: r,
            limit: k,
        })
    } else {
        Ok(())
    }
}

/// STAF `|s^H J_r (s ⊙ p(v))|^2 / ||s||^2`.
pub fn staf(s: &Code, r: usize, v: f64) -> Result<f64> {
    check_shift(r, s.len())?;
    Ok(shifted_correlation(s.as_slice(), r, v).norm_sqr() / s.norm_sqr())
}

/// STAF over the full grid; `grid[r][h]` is the value at `(r, v_h)`.
pub fn staf_grid(s: &Code, doppler: DopplerGrid) -> Vec<Vec<f64>> {
    let n2 = s.norm_sqr();
    (0..s.len())
        .map(|r| {
            (0..doppler.len())
                .map(|h| shifted_correlation(s.as_slice(), r, doppler.value(h)).norm_sqr() / n2)
                .collect()
        })
        .collect()
}

/// Peak-normalized decibel value `10 log10(staf / K)`, floored at -300 dB.
pub fn staf_db(value: f64, k: usize) -> f64 {
    10.0 * (value / k as f64).max(DB_FLOOR_LINEAR).log10()
}

fn weighted_staf_energy(s: &Code, map: &InterferenceMap) -> Result<f64> {
    check_len(map.k(), s.len())?;
    let n2 = s.norm_sqr();
    let grid = map.doppler_grid();
    // canonical l-order reduction
    let mut total = 0.0;
    for b in map.active_bins() {
        total += b.weight * n2 * staf(s, b.r, grid.value(b.h))?;
    }
    Ok(total)
}

/// Disturbance power `Σ p(r,h) ||s||^2 d_s(r, v_h) + sigma_n^2 ||s||^2`.
pub fn disturbance_power(s: &Code, map: &InterferenceMap, noise: NoiseLevel) -> Result<f64> {
    Ok(weighted_staf_energy(s, map)? + noise.sigma2() * s.norm_sqr())
}

/// Signal-to-interference ratio `K^2 / Σ p(r,h) ||s||^2 d_s(r, v_h)`.
pub fn sir(s: &Code, map: &InterferenceMap) -> Result<f64> {
    let denom = weighted_staf_energy(s, map)?;
    if denom <= 0.0 {
        return Err(Error::InfiniteSir);
    }
    let k = s.len() as f64;
    Ok(k * k / denom)
}
