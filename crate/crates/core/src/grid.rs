//! Uniform collocation grids on `T²` and the FFTs that connect them to
//! Fourier coefficients.
//!
//! A [`SpectralGrid`] of size `G` evaluates trigonometric polynomials at the
//! points `x_j = 2π j / G`. Pointwise products of grid values are exact
//! values of the product polynomial; coefficients read back with
//! [`SpectralGrid::to_spectral`] are exact as long as the product's box
//! half-width `B` satisfies `2B + 1 ≤ G`. A grid mean `⟨f⟩` equals `∫f` as
//! long as the total bandwidth of `f` is below `G`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::{Multiplier, SpectralField};
use crate::lattice::LatticeIndex;

/// Smallest integer `≥ n` whose prime factors are 2, 3 or 5.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Grid size that evaluates any pairing of total polynomial degree `degree`
/// in fields of box half-width `bandwidth` without aliasing.
pub fn size_for_degree(degree: usize, bandwidth: u32) -> usize {
    fft_friendly(degree * bandwidth as usize + 1)
}

/// Values of a complex function on a `G × G` grid, row-major in `(x1, x2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    size: usize,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            values: vec![Complex64::new(0.0, 0.0); size * size],
        }
    }

    pub fn constant(size: usize, c: Complex64) -> Self {
        Self {
            size,
            values: vec![c; size * size],
        }
    }

    pub fn from_values(size: usize, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), size * size, "grid value count must be G²");
        Self { size, values }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn conj(&self) -> GridField {
        self.map(|z| z.conj())
    }

    pub fn abs_sq(&self) -> GridField {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    /// Pointwise nonnegative integer power.
    pub fn powi(&self, p: u32) -> GridField {
        self.map(|z| z.powu(p))
    }

    pub fn scale(&self, c: f64) -> GridField {
        self.map(|z| z * c)
    }

    pub fn scale_c(&self, c: Complex64) -> GridField {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridField {
        GridField {
            size: self.size,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip(&self, other: &GridField, f: impl Fn(Complex64, Complex64) -> Complex64) -> GridField {
        assert_eq!(self.size, other.size, "grid sizes differ");
        GridField {
            size: self.size,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Grid mean, i.e. `∫ f` under the normalized measure.
    pub fn mean(&self) -> Complex64 {
        let n = self.values.len() as f64;
        self.values.iter().sum::<Complex64>() / n
    }

    /// `(f, g) = ∫ f ḡ`.
    pub fn inner(&self, other: &GridField) -> Complex64 {
        assert_eq!(self.size, other.size, "grid sizes differ");
        let n = self.values.len() as f64;
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            / n
    }

    /// `∫ f g` without conjugation.
    pub fn integral_product(&self, other: &GridField) -> Complex64 {
        assert_eq!(self.size, other.size, "grid sizes differ");
        let n = self.values.len() as f64;
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            / n
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Mul for &GridField {
    type Output = GridField;
    fn mul(self, o: &GridField) -> GridField {
        self.zip(o, |a, b| a * b)
    }
}

impl Add for &GridField {
    type Output = GridField;
    fn add(self, o: &GridField) -> GridField {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for &GridField {
    type Output = GridField;
    fn sub(self, o: &GridField) -> GridField {
        self.zip(o, |a, b| a - b)
    }
}

impl Neg for &GridField {
    type Output = GridField;
    fn neg(self) -> GridField {
        self.map(|z| -z)
    }
}

/// Pair of grid fields representing a gradient `(∂₁f, ∂₂f)`.
pub type GridVector = [GridField; 2];

/// Dot product of two gradients, pointwise and without conjugation.
pub fn dot(a: &GridVector, b: &GridVector) -> GridField {
    &(&a[0] * &b[0]) + &(&a[1] * &b[1])
}

/// Scalar times each component.
pub fn scale_vector(f: &GridField, v: &GridVector) -> GridVector {
    [f * &v[0], f * &v[1]]
}

/// `Σ_j (a_j, b_j)`.
pub fn inner_vector(a: &GridVector, b: &GridVector) -> Complex64 {
    a[0].inner(&b[0]) + a[1].inner(&b[1])
}

/// FFT workspace for one grid size. Cheap to clone and safe to share
/// between threads.
#[derive(Clone)]
pub struct SpectralGrid {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    freqs: Vec<i32>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid").field("size", &self.size).finish()
    }
}

impl SpectralGrid {
    pub fn new(size: usize) -> Self {
        assert!(size >= 1, "grid size must be positive");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let freqs = (0..size).map(|j| signed_frequency(j, size)).collect();
        Self {
            size,
            forward,
            inverse,
            freqs,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn slot(&self, k: i32) -> usize {
        k.rem_euclid(self.size as i32) as usize
    }

    /// Position of frequency `n` (folded) in the row-major coefficient array.
    pub fn index_of(&self, n: LatticeIndex) -> usize {
        self.slot(n.n1) * self.size + self.slot(n.n2)
    }

    /// Evaluate a dense list of coefficients, given their array positions.
    pub fn to_grid_indexed(&self, slots: &[usize], values: &[Complex64]) -> GridField {
        let mut data = vec![Complex64::new(0.0, 0.0); self.size * self.size];
        for (&i, &c) in slots.iter().zip(values) {
            data[i] += c;
        }
        self.from_coefficients(data)
    }

    /// Evaluate a field on the grid. Coefficients whose index exceeds the
    /// grid's Nyquist range fold onto their aliases.
    pub fn to_grid(&self, u: &SpectralField) -> GridField {
        let mut data = vec![Complex64::new(0.0, 0.0); self.size * self.size];
        for (n, c) in u.iter() {
            data[self.slot(n.n1) * self.size + self.slot(n.n2)] += c;
        }
        self.transform(&mut data, &self.inverse);
        GridField {
            size: self.size,
            values: data,
        }
    }

    /// Fourier coefficients of grid values, restricted to the box of
    /// half-width `cutoff` (which must satisfy `2·cutoff + 1 ≤ G`).
    pub fn to_spectral(&self, f: &GridField, cutoff: u32) -> SpectralField {
        assert!(
            2 * cutoff as usize + 1 <= self.size,
            "cutoff {cutoff} does not fit on a grid of size {}",
            self.size
        );
        let coeffs = self.coefficients(f);
        let c = cutoff as i32;
        let mut out = SpectralField::zero(cutoff);
        for a in -c..=c {
            for b in -c..=c {
                let z = coeffs[self.slot(a) * self.size + self.slot(b)];
                out.insert_unchecked(LatticeIndex::new(a, b), z);
            }
        }
        out
    }

    /// Raw normalized DFT coefficients `f̂(k) = G^{-2} Σ_j f(x_j) e^{-ik·x_j}`.
    pub fn coefficients(&self, f: &GridField) -> Vec<Complex64> {
        assert_eq!(f.size, self.size, "grid sizes differ");
        let mut data = f.values.clone();
        self.transform(&mut data, &self.forward);
        let norm = 1.0 / (self.size * self.size) as f64;
        for z in &mut data {
            *z *= norm;
        }
        data
    }

    /// Inverse of [`Self::coefficients`].
    pub fn from_coefficients(&self, mut data: Vec<Complex64>) -> GridField {
        self.transform(&mut data, &self.inverse);
        GridField {
            size: self.size,
            values: data,
        }
    }

    /// Apply an arbitrary Fourier symbol `m(k)` to grid values.
    pub fn apply_symbol(&self, f: &GridField, symbol: impl Fn(LatticeIndex) -> Complex64) -> GridField {
        let mut data = self.coefficients(f);
        for i in 0..self.size {
            for j in 0..self.size {
                let k = LatticeIndex::new(self.freqs[i], self.freqs[j]);
                data[i * self.size + j] *= symbol(k);
            }
        }
        self.from_coefficients(data)
    }

    pub fn apply(&self, f: &GridField, m: Multiplier) -> GridField {
        self.apply_symbol(f, |k| m.symbol(k))
    }

    /// `P_{≤N}` on grid values: keep `|k| ≤ radius`.
    pub fn project_leq(&self, f: &GridField, radius: u32) -> GridField {
        let r2 = radius as i64 * radius as i64;
        self.apply_symbol(f, |k| {
            if k.norm_sq() <= r2 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn gradient(&self, f: &GridField) -> GridVector {
        let coeffs = self.coefficients(f);
        let mut d1 = coeffs.clone();
        let mut d2 = coeffs;
        for i in 0..self.size {
            for j in 0..self.size {
                let idx = i * self.size + j;
                d1[idx] *= Complex64::new(0.0, self.freqs[i] as f64);
                d2[idx] *= Complex64::new(0.0, self.freqs[j] as f64);
            }
        }
        [self.from_coefficients(d1), self.from_coefficients(d2)]
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let g = self.size;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows
        plan.process_with_scratch(data, &mut scratch);
        // columns
        let mut col = vec![Complex64::new(0.0, 0.0); g];
        for j in 0..g {
            for i in 0..g {
                col[i] = data[i * g + j];
            }
            plan.process_with_scratch(&mut col, &mut scratch);
            for i in 0..g {
                data[i * g + j] = col[i];
            }
        }
    }
}

fn signed_frequency(j: usize, size: usize) -> i32 {
    if j <= (size - 1) / 2 {
        j as i32
    } else {
        j as i32 - size as i32
    }
}
