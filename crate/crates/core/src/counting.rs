//! Brute-force lattice counts for the resonance sets.
//!
//! Frequencies `k_j` range over the sharp shells `P_{N_j}` (or, with
//! [`Region::Ball`], over the closed balls `|k| ≤ N_j`).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{Dyadic, LatticeIndex};

/// Largest shell accepted by [`enumerate_s`].
pub const MAX_SHELL: u32 = 64;

/// Largest search space accepted by [`enumerate_e`].
pub const E_GUARD: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    #[default]
    Shell,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjacency {
    /// Exclude `k_j ± k_{j+1} = 0` for `j = 1, 2, 3` with `k_4 = k_1`.
    #[default]
    Cyclic,
    /// Exclude only `j = 1, 2`.
    Linear,
}

/// `±k₁ ± k₂ ± k₃ = m`, `±|k₁|² ± |k₂|² ± |k₃|² = κ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingQuery {
    pub m: LatticeIndex,
    pub kappa: i64,
    pub shells: Vec<Dyadic>,
    pub signs: Vec<i8>,
    #[serde(default)]
    pub region: Region,
    #[serde(default)]
    pub adjacency: Adjacency,
}

impl CountingQuery {
    pub fn new(m: LatticeIndex, kappa: i64, shells: [Dyadic; 3], signs: [i8; 3]) -> Self {
        Self {
            m,
            kappa,
            shells: shells.to_vec(),
            signs: signs.to_vec(),
            region: Region::Shell,
            adjacency: Adjacency::Cyclic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shells.len() != 3 {
            return Err(invalid("shells", format!("expected 3 shells, got {}", self.shells.len())));
        }
        if self.signs.len() != self.shells.len() {
            return Err(invalid("signs", "need exactly one sign per shell"));
        }
        if self.signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("signs", "each sign must be +1 or -1"));
        }
        if let Some(big) = self.shells.iter().find(|n| n.get() > MAX_SHELL) {
            return Err(Error::ResourceGuard {
                points: region_size(big.get()),
                limit: region_size(MAX_SHELL),
            });
        }
        Ok(())
    }
}

fn region_size(n: u32) -> f64 {
    std::f64::consts::PI * (n as f64 + 1.0).powi(2)
}

fn region_points(n: Dyadic, region: Region) -> Vec<LatticeIndex> {
    match region {
        Region::Ball => LatticeIndex::ball(n.get()),
        Region::Shell => n.shell_points(),
    }
}

fn region_contains(n: Dyadic, region: Region, k: LatticeIndex) -> bool {
    match region {
        Region::Ball => k.norm_sq() <= n.get() as i64 * n.get() as i64,
        Region::Shell => n.shell_contains(k),
    }
}

fn pairs_off(a: LatticeIndex, b: LatticeIndex) -> bool {
    a == b || a == -b
}

/// Counts of all `(k₁, k₂, k₃)` meeting the linear constraint, split by
/// the value of the quadratic form and by the pairing exclusion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub by_kappa: BTreeMap<i64, u64>,
    pub excluded: u64,
    pub total: u64,
}

impl Census {
    pub fn sup(&self) -> u64 {
        self.by_kappa.values().copied().max().unwrap_or(0)
    }

    fn merge(mut self, other: Census) -> Census {
        for (k, v) in other.by_kappa {
            *self.by_kappa.entry(k).or_default() += v;
        }
        self.excluded += other.excluded;
        self.total += other.total;
        self
    }
}

/// Every solution of the linear constraint of `q`, with its quadratic value.
/// `q.kappa` is ignored.
pub fn census_s(q: &CountingQuery) -> Result<Census> {
    q.validate()?;
    let s: Vec<i32> = q.signs.iter().map(|&x| x as i32).collect();
    let first = region_points(q.shells[0], q.region);
    let second = region_points(q.shells[1], q.region);
    let census = first
        .par_iter()
        .map(|&k1| {
            let mut local = Census::default();
            for &k2 in &second {
                // σ₃k₃ = m - σ₁k₁ - σ₂k₂ and σ₃ = ±1
                let k3 = s[2] * (q.m - s[0] * k1 - s[1] * k2);
                if !region_contains(q.shells[2], q.region, k3) {
                    continue;
                }
                local.total += 1;
                let excluded = pairs_off(k1, k2)
                    || pairs_off(k2, k3)
                    || (q.adjacency == Adjacency::Cyclic && pairs_off(k3, k1));
                if excluded {
                    local.excluded += 1;
                    continue;
                }
                let kappa = s[0] as i64 * k1.norm_sq() + s[1] as i64 * k2.norm_sq() + s[2] as i64 * k3.norm_sq();
                *local.by_kappa.entry(kappa).or_default() += 1;
            }
            local
        })
        .reduce(Census::default, Census::merge);
    Ok(census)
}

/// `|S_{m,κ}(N₁, N₂, N₃)|`.
pub fn enumerate_s(q: &CountingQuery) -> Result<u64> {
    q.validate()?;
    let s: Vec<i32> = q.signs.iter().map(|&x| x as i32).collect();
    let first = region_points(q.shells[0], q.region);
    let second = region_points(q.shells[1], q.region);
    let count = first
        .par_iter()
        .map(|&k1| {
            let mut local = 0u64;
            for &k2 in &second {
                let k3 = s[2] * (q.m - s[0] * k1 - s[1] * k2);
                if !region_contains(q.shells[2], q.region, k3) {
                    continue;
                }
                let kappa = s[0] as i64 * k1.norm_sq() + s[1] as i64 * k2.norm_sq() + s[2] as i64 * k3.norm_sq();
                if kappa != q.kappa {
                    continue;
                }
                if pairs_off(k1, k2)
                    || pairs_off(k2, k3)
                    || (q.adjacency == Adjacency::Cyclic && pairs_off(k3, k1))
                {
                    continue;
                }
                local += 1;
            }
            local
        })
        .sum();
    Ok(count)
}

/// `sup_κ |S_{m,κ}|` for the shells and signs of `q`.
pub fn sup_over_kappa(q: &CountingQuery) -> Result<u64> {
    Ok(census_s(q)?.sup())
}

/// Indices of the two largest shells (ties broken by position).
fn top_two(shells: &[Dyadic]) -> (usize, usize) {
    let mut order: Vec<usize> = (0..shells.len()).collect();
    order.sort_by(|&a, &b| shells[b].cmp(&shells[a]));
    (order[0], order[1])
}

fn validate_e(shells: &[Dyadic]) -> Result<()> {
    if shells.len() < 2 || shells.len() % 2 != 0 {
        return Err(invalid("shells", format!("expected 2k+2 shells, got {}", shells.len())));
    }
    let (big, _) = top_two(shells);
    let pts: f64 = shells
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != big)
        .map(|(_, n)| n.shell_points().len() as f64)
        .product();
    if pts > E_GUARD {
        return Err(Error::ResourceGuard {
            points: pts,
            limit: E_GUARD,
        });
    }
    Ok(())
}

/// `|E_κ|`: tuples `(n₁, …, n_{k+1}, m₁, …, m_{k+1})` with `n_j`, `m_j` in
/// the given shells (first `k+1` entries are the `n` shells), `Σn + Σm = 0`,
/// `Σ|n|² - Σ|m|² = κ` and `n_(1) ± n_(2) ≠ 0` for the frequencies in the
/// two largest shells.
pub fn enumerate_e(kappa: i64, shells: &[Dyadic]) -> Result<u64> {
    Ok(census_e(shells)?.get(&kappa).copied().unwrap_or(0))
}

/// `|E_κ|` for every `κ` with a nonempty set.
///
/// The frequency in the largest shell is solved for from the linear
/// constraint; all others are enumerated.
pub fn census_e(shells: &[Dyadic]) -> Result<BTreeMap<i64, u64>> {
    validate_e(shells)?;
    let half = shells.len() / 2;
    let (top, second) = top_two(shells);
    let weight = |j: usize| if j < half { 1i64 } else { -1 };
    let free: Vec<usize> = (0..shells.len()).filter(|&j| j != top).collect();
    let points: Vec<Vec<LatticeIndex>> = free.iter().map(|&j| shells[j].shell_points()).collect();
    let pos = free.iter().position(|&j| j == second).expect("second shell is free");

    let count_from = |start: LatticeIndex| -> BTreeMap<i64, u64> {
        let mut ks = vec![LatticeIndex::ZERO; free.len()];
        ks[0] = start;
        let mut counts = BTreeMap::new();
        odometer(&points[1..], |rest| {
            ks[1..].copy_from_slice(rest);
            let mut sum = LatticeIndex::ZERO;
            let mut quad = 0i64;
            for (i, &j) in free.iter().enumerate() {
                sum = sum + ks[i];
                quad += weight(j) * ks[i].norm_sq();
            }
            let k_top = -sum;
            if !shells[top].shell_contains(k_top) || pairs_off(k_top, ks[pos]) {
                return;
            }
            *counts.entry(quad + weight(top) * k_top.norm_sq()).or_default() += 1;
        });
        counts
    };
    Ok(points[0]
        .par_iter()
        .map(|&p| count_from(p))
        .reduce(BTreeMap::new, |mut acc, other| {
            for (k, v) in other {
                *acc.entry(k).or_default() += v;
            }
            acc
        }))
}

/// `sup_κ |E_κ|`.
pub fn sup_e(shells: &[Dyadic]) -> Result<u64> {
    Ok(census_e(shells)?.values().copied().max().unwrap_or(0))
}

/// Calls `f` on every tuple of the Cartesian product of `lists`.
fn odometer(lists: &[Vec<LatticeIndex>], mut f: impl FnMut(&[LatticeIndex])) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut cur: Vec<LatticeIndex> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&cur);
        let mut d = lists.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < lists[d].len() {
                cur[d] = lists[d][idx[d]];
                break;
            }
            idx[d] = 0;
            cur[d] = lists[d][0];
        }
    }
}
