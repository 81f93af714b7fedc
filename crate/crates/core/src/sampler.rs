//! The Gaussian measure `μ_s` and the statistics of its samples.
//!
//! A sample is `û(n) = g_n / ⟨n⟩^s` for `|n| ≤ cutoff`, with `g_n`
//! independent complex normals, `Re g_n, Im g_n ~ N(0, 1/2)`.
//!
//! Randomness comes from ChaCha20 seeded by `seed` and positioned on the
//! word stream `stream`, so each sample is a pure function of
//! `(seed, stream)`. Normals are drawn mode by mode in order of increasing
//! `|n|²` (ties by `(n1, n2)`), so a sample at cutoff `N` is exactly the
//! projection `P_{≤N}` of the sample at any larger cutoff with the same
//! `(seed, stream)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{Axis, SpectralField};
use crate::lattice::{Dyadic, LatticeIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub s: f64,
    pub cutoff: u32,
    pub seed: u64,
}

impl GaussianSpec {
    pub fn new(s: f64, cutoff: u32, seed: u64) -> Result<Self> {
        let spec = Self { s, cutoff, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 2.0) || !self.s.is_finite() {
            return Err(invalid("s", format!("must be a finite number > 2, got {}", self.s)));
        }
        if self.cutoff < 1 {
            return Err(invalid("cutoff", "must be at least 1"));
        }
        Ok(())
    }
}

/// Standard complex normal with `E|g|² = 1`, `E g² = 0`.
pub fn complex_normal<R: rand::Rng>(rng: &mut R) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample(spec: &GaussianSpec, stream: u64) -> SpectralField {
    let mut rng = rng_for(spec.seed, stream);
    let modes = LatticeIndex::ball(spec.cutoff);
    let mut u = SpectralField::zero(spec.cutoff);
    for n in modes {
        let g = complex_normal(&mut rng);
        u.insert_unchecked(n, g * n.bracket().powf(-spec.s));
    }
    u
}

/// Samples for streams `first..first + count`, in stream order.
pub fn sample_range(spec: &GaussianSpec, first: u64, count: usize) -> Vec<SpectralField> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample(spec, first + i))
        .collect()
}

/// `∫ P_N(∂_j u) · P_N(D^s ū) = Σ_{n ∈ shell N} i n_j |n|^s |û(n)|²`.
pub fn pairing_statistic(u: &SpectralField, s: f64, n: Dyadic, axis: Axis) -> Complex64 {
    let total: f64 = u
        .iter()
        .filter(|(m, _)| n.shell_contains(*m))
        .map(|(m, c)| m.component(axis.index()) as f64 * m.norm().powf(s) * c.norm_sqr())
        .sum();
    Complex64::new(0.0, total)
}

/// Fourier coefficient at `n` of `D^s P_N ū · D^{s-2} P_M ū`.
pub fn conj_product_coefficient(
    u: &SpectralField,
    s: f64,
    big_n: Dyadic,
    big_m: Dyadic,
    n: LatticeIndex,
) -> Complex64 {
    // ū has coefficient conj(û(-l)) at l.
    let mut acc = Complex64::new(0.0, 0.0);
    for (neg_l, a) in u.iter() {
        let l = -neg_l;
        if !big_n.shell_contains(l) {
            continue;
        }
        let k = n - l;
        if !big_m.shell_contains(k) {
            continue;
        }
        let b = u.get(-k);
        acc += l.norm().powf(s) * k.norm().powf(s - 2.0) * a.conj() * b.conj();
    }
    acc
}

/// Comparison scale `min(M^{-2}, 1_{|n|∼N} + ⟨n⟩^{-2} 1_{N≪|n|} + N^{-2} 1_{N≫|n|})`
/// for the variance of [`conj_product_coefficient`]. `|n| ∼ N` is read as
/// `N/4 < |n| ≤ 4N`.
pub fn conj_variance_scale(big_n: Dyadic, big_m: Dyadic, n: LatticeIndex) -> f64 {
    let nn = big_n.get() as f64;
    let mm = big_m.get() as f64;
    let r = n.norm();
    let second = if r > 4.0 * nn {
        1.0 / (1.0 + r * r)
    } else if r * 4.0 <= nn {
        1.0 / (nn * nn)
    } else {
        1.0
    };
    (1.0 / (mm * mm)).min(second)
}
