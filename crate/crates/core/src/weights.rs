//! Exact working distances.
//!
//! Every comparison in frequency scoring is a comparison of sums of three
//! distances, so working distances are kept as `u64` fixed-point values with
//! [`TICKS_PER_UNIT`] ticks per TSPLIB distance unit. Perturbation adds a
//! random offset in `(0, 1]` units, still as an exact integer number of ticks.

use crate::error::{Error, Result};
use crate::tsplib::Instance;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Fixed-point scale of working distances.
pub const TICKS_PER_UNIT: u64 = 1 << 32;

/// Largest working distance accepted; three of them must sum without overflow.
pub const MAX_TICKS: u64 = 1 << 61;

/// Random distance overlay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Perturb {
    Off,
    On { seed: u64, amplitude: f64 },
}

impl Perturb {
    pub fn on(seed: u64) -> Self {
        Perturb::On {
            seed,
            amplitude: 1.0,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Perturb::Off => None,
            Perturb::On { seed, .. } => Some(*seed),
        }
    }
}

/// Original integer distances plus the exact working overlay used for scoring.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    n: usize,
    original: Vec<i64>,
    working: Vec<u64>,
}

impl Weights {
    /// Unperturbed working distances (`original * TICKS_PER_UNIT`).
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let original = inst.distance_matrix();
        let mut working = vec![0u64; original.len()];
        for (w, &d) in working.iter_mut().zip(&original) {
            *w = to_ticks(d)?;
        }
        Ok(Weights {
            n: inst.n,
            original,
            working,
        })
    }

    /// Applies `perturb` to the instance distances.
    ///
    /// Offsets are drawn once per vertex pair in lexicographic `(u, v)` order
    /// from a ChaCha8 stream seeded with `seed`, so the overlay depends only
    /// on the seed and `n`.
    pub fn with_perturbation(inst: &Instance, perturb: Perturb) -> Result<Self> {
        let mut w = Self::from_instance(inst)?;
        if let Perturb::On { seed, amplitude } = perturb {
            if !(amplitude.is_finite() && amplitude > 0.0) {
                return Err(Error::contract(format!("perturbation amplitude {amplitude} must be positive")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = w.n;
            for u in 0..n {
                for v in u + 1..n {
                    // 1 + r with r uniform on 0..2^32 gives an offset in (0, 1].
                    let unit = 1 + rng.next_u32() as u64;
                    let rd = ((unit as f64) * amplitude).round().max(1.0) as u64;
                    let t = w.working[u * n + v]
                        .checked_add(rd)
                        .filter(|&t| t < MAX_TICKS)
                        .ok_or_else(|| Error::contract("perturbed distance overflows"))?;
                    w.working[u * n + v] = t;
                    w.working[v * n + u] = t;
                }
            }
        }
        Ok(w)
    }

    /// Builds weights directly from a symmetric tick matrix (row-major).
    /// The original distances are the tick values truncated to whole units.
    pub fn from_ticks(n: usize, ticks: Vec<u64>) -> Result<Self> {
        if ticks.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: ticks.len(),
            });
        }
        for u in 0..n {
            for v in 0..n {
                let t = ticks[u * n + v];
                if t >= MAX_TICKS {
                    return Err(Error::contract(format!("distance ({}, {}) too large", u + 1, v + 1)));
                }
                if t != ticks[v * n + u] {
                    return Err(Error::contract(format!("asymmetric distance at ({}, {})", u + 1, v + 1)));
                }
            }
        }
        let original = ticks.iter().map(|&t| (t / TICKS_PER_UNIT) as i64).collect();
        Ok(Weights {
            n,
            original,
            working: ticks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn working(&self, u: usize, v: usize) -> u64 {
        self.working[u * self.n + v]
    }

    #[inline]
    pub fn original(&self, u: usize, v: usize) -> i64 {
        self.original[u * self.n + v]
    }

    /// The working matrix, row-major.
    pub fn working_matrix(&self) -> &[u64] {
        &self.working
    }
}

fn to_ticks(d: i64) -> Result<u64> {
    if d < 0 {
        return Err(Error::contract(format!("negative distance {d}")));
    }
    (d as u64)
        .checked_mul(TICKS_PER_UNIT)
        .filter(|&t| t < MAX_TICKS)
        .ok_or_else(|| Error::contract(format!("distance {d} too large for exact arithmetic")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Instance {
        Instance::euclidean("sq", vec![(0.0, 0.0), (3.0, 0.0), (3.0, 4.0), (0.0, 4.0)]).unwrap()
    }

    #[test]
    fn unperturbed_is_scaled_original() {
        let w = Weights::from_instance(&square()).unwrap();
        assert_eq!(w.original(0, 2), 5);
        assert_eq!(w.working(0, 2), 5 * TICKS_PER_UNIT);
    }

    #[test]
    fn perturbation_stays_in_half_open_unit() {
        let inst = square();
        let w = Weights::with_perturbation(&inst, Perturb::on(9)).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                if u == v {
                    continue;
                }
                let base = w.original(u, v) as u64 * TICKS_PER_UNIT;
                let t = w.working(u, v);
                assert!(t > base && t <= base + TICKS_PER_UNIT);
                assert_eq!(t, w.working(v, u));
            }
        }
    }

    #[test]
    fn same_seed_same_overlay() {
        let inst = square();
        let a = Weights::with_perturbation(&inst, Perturb::on(3)).unwrap();
        let b = Weights::with_perturbation(&inst, Perturb::on(3)).unwrap();
        let c = Weights::with_perturbation(&inst, Perturb::on(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn nonpositive_amplitude_is_rejected() {
        let p = Perturb::On { seed: 1, amplitude: 0.0 };
        assert!(Weights::with_perturbation(&square(), p).unwrap_err().is_contract_violation());
    }

    #[test]
    fn asymmetric_ticks_are_rejected() {
        let mut t = vec![1u64; 16];
        t[1] = 2;
        assert!(Weights::from_ticks(4, t).is_err());
    }
}
