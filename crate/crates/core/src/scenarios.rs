//! Canonical inputs: the P4 seed code, the two reference interference
//! scenes, and seeded random unimodular codes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Code, InterferenceMap, MapBin, C64};

/// Identifier of the random-code generator, part of the reproducibility
/// contract: ChaCha20 seeded through `SeedableRng::seed_from_u64`
/// (rand_core 0.6), one `next_u64` per entry, phase
/// `θ = 2π · (x >> 11) · 2^-53`.
pub const RANDOM_CODE_GENERATOR: &str = "chacha20-seed_from_u64-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SceneId {
    #[serde(rename = "scene1", alias = "1")]
    Scene1,
    #[serde(rename = "scene2", alias = "2")]
    Scene2,
}

/// Inclusive `(r range, h range)` rectangle.
type Rectangle = ((usize, usize), (usize, usize));

impl SceneId {
    /// Unit-weight rectangles making up the scene.
    fn rectangles(self) -> &'static [Rectangle] {
        match self {
            SceneId::Scene1 => &[((18, 20), (35, 47))],
            SceneId::Scene2 => &[((20, 30), (14, 15)), ((23, 25), (38, 42))],
        }
    }
}

impl fmt::Display for SceneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneId::Scene1 => write!(f, "scene1"),
            SceneId::Scene2 => write!(f, "scene2"),
        }
    }
}

impl FromStr for SceneId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "scene1" => Ok(SceneId::Scene1),
            "2" | "scene2" => Ok(SceneId::Scene2),
            other => Err(Error::InvalidConfig(format!("unknown scene '{other}'"))),
        }
    }
}

/// P4 polyphase code `s[m] = exp{jπ(m²/K − m)}`, `m = 0..K-1`.
pub fn p4_code(k: usize) -> Result<Code> {
    if k == 0 {
        return Err(Error::EmptyCode);
    }
    let kf = k as f64;
    let phases: Vec<f64> = (0..k)
        .map(|m| {
            let m = m as f64;
            PI * (m * m / kf - m)
        })
        .collect();
    Code::from_phases(&phases)
}

/// Unit-weight interference map of a reference scene on a `K x Nv` grid.
pub fn scene_map(id: SceneId, k: usize, nv: usize) -> Result<InterferenceMap> {
    let mut bins = Vec::new();
    for &((r0, r1), (h0, h1)) in id.rectangles() {
        if r1 >= k {
            return Err(Error::OutOfRange {
                what: "range bin",
                index: r1,
                limit: k,
            });
        }
        if h1 >= nv {
            return Err(Error::OutOfRange {
                what: "Doppler bin",
                index: h1,
                limit: nv,
            });
        }
        for r in r0..=r1 {
            for h in h0..=h1 {
                bins.push(MapBin { r, h, weight: 1.0 });
            }
        }
    }
    InterferenceMap::new(k, nv, bins)
}

/// Code with i.i.d. uniform phases on `[0, 2π)` from [`RANDOM_CODE_GENERATOR`].
pub fn random_unimodular(k: usize, seed: u64) -> Result<Code> {
    if k == 0 {
        return Err(Error::EmptyCode);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let entries: Vec<C64> = (0..k)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            C64::from_polar(1.0, 2.0 * PI * u)
        })
        .collect();
    Code::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p4_examples() {
        assert_eq!(p4_code(1).unwrap().as_slice(), &[C64::new(1.0, 0.0)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            C64::new(1.0, 0.0),
            C64::new(-h, -h),
            C64::new(-1.0, 0.0),
            C64::new(-h, -h),
        ];
        for (a, b) in p4_code(4).unwrap().as_slice().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-15);
        }
        for k in [2, 13, 50, 128] {
            assert!(p4_code(k).unwrap().as_slice().iter().all(|z| (z.norm() - 1.0).abs() <= 1e-15));
        }
    }

    #[test]
    fn scene_support_counts() {
        let m1 = scene_map(SceneId::Scene1, 50, 50).unwrap();
        assert_eq!(m1.active_bins().count(), 39);
        assert_eq!(m1.active_ranges(), vec![18, 19, 20]);
        let m2 = scene_map(SceneId::Scene2, 50, 50).unwrap();
        assert_eq!(m2.active_bins().count(), 37);
        assert!(m1.support().iter().chain(m2.support()).all(|b| b.weight == 1.0));
    }

    #[test]
    fn scene_bounds_are_checked() {
        let err = scene_map(SceneId::Scene1, 50, 40).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { what: "Doppler bin", index: 47, limit: 40 }));
        assert!(scene_map(SceneId::Scene2, 25, 50).is_err());
    }

    #[test]
    fn random_codes_are_deterministic_and_distinct() {
        let a = random_unimodular(50, 1).unwrap();
        assert_eq!(a, random_unimodular(50, 1).unwrap());
        assert_ne!(a, random_unimodular(50, 2).unwrap());
        assert!(a.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn scene_id_parsing() {
        assert_eq!("1".parse::<SceneId>().unwrap(), SceneId::Scene1);
        assert_eq!("scene2".parse::<SceneId>().unwrap(), SceneId::Scene2);
        assert!("3".parse::<SceneId>().is_err());
    }
}
