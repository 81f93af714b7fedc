//! Finitely supported Fourier coefficient tables on `Z²`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fft_friendly, SpectralGrid};
use crate::lattice::{Dyadic, LatticeIndex};

/// Coordinate axis of `T²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
        }
    }
}

/// Fourier multipliers used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Multiplier {
    /// `D^σ`, symbol `|n|^σ`, with `|0|^σ := 0` for every `σ`.
    Fractional { sigma: f64 },
    /// `∂_j`, symbol `i n_j`.
    Partial { axis: Axis },
    /// `Δ`, symbol `-|n|²`.
    Laplacian,
    /// `⟨∇⟩^σ`, symbol `⟨n⟩^σ`.
    Bessel { sigma: f64 },
}

impl Multiplier {
    pub fn symbol(self, n: LatticeIndex) -> Complex64 {
        match self {
            Multiplier::Fractional { sigma } => {
                if n == LatticeIndex::ZERO {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(n.norm().powf(sigma), 0.0)
                }
            }
            Multiplier::Partial { axis } => Complex64::new(0.0, n.component(axis.index()) as f64),
            Multiplier::Laplacian => Complex64::new(-(n.norm_sq() as f64), 0.0),
            Multiplier::Bessel { sigma } => Complex64::new(n.bracket().powf(sigma), 0.0),
        }
    }
}

/// A trigonometric polynomial `u(x) = Σ û(n) e^{in·x}` with coefficients
/// supported in the box `|n1|, |n2| ≤ cutoff`. Absent indices are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    cutoff: u32,
    coeffs: BTreeMap<LatticeIndex, Complex64>,
}

impl SpectralField {
    pub fn zero(cutoff: u32) -> Self {
        Self {
            cutoff,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_coeffs(
        cutoff: u32,
        coeffs: impl IntoIterator<Item = (LatticeIndex, Complex64)>,
    ) -> Result<Self> {
        let mut u = Self::zero(cutoff);
        for (n, c) in coeffs {
            u.set(n, c)?;
        }
        Ok(u)
    }

    /// The character `c·e^{in·x}` with the smallest box containing `n`
    /// enlarged to `cutoff`.
    pub fn single_mode(cutoff: u32, n: LatticeIndex, c: Complex64) -> Result<Self> {
        Self::from_coeffs(cutoff, [(n, c)])
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Half-width of the smallest box containing the support.
    pub fn bandwidth(&self) -> u32 {
        self.coeffs.keys().map(|n| n.box_radius()).max().unwrap_or(0)
    }

    /// Largest `|n|` over the support, rounded up.
    pub fn radius(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|n| n.norm_sq())
            .max()
            .map(|r2| (r2 as f64).sqrt().ceil() as u32)
            .unwrap_or(0)
    }

    pub fn get(&self, n: LatticeIndex) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn set(&mut self, n: LatticeIndex, c: Complex64) -> Result<()> {
        if n.box_radius() > self.cutoff {
            return Err(Error::OutsideCutoff {
                n1: n.n1,
                n2: n.n2,
                cutoff: self.cutoff,
            });
        }
        self.coeffs.insert(n, c);
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, n: LatticeIndex, c: Complex64) {
        debug_assert!(n.box_radius() <= self.cutoff);
        self.coeffs.insert(n, c);
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticeIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Drop entries that are exactly zero.
    pub fn pruned(mut self) -> Self {
        self.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self
    }

    /// Same coefficients in a box of a different half-width.
    pub fn with_cutoff(&self, cutoff: u32) -> Result<Self> {
        Self::from_coeffs(cutoff, self.iter())
    }

    pub fn map_coeffs(&self, f: impl Fn(LatticeIndex, Complex64) -> Complex64) -> Self {
        Self {
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|(&n, &c)| (n, f(n, c))).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coeffs(|_, z| z * c)
    }

    /// Coefficient-wise sum; the cutoff is the larger of the two.
    pub fn add(&self, other: &SpectralField) -> Self {
        let mut out = Self {
            cutoff: self.cutoff.max(other.cutoff),
            coeffs: self.coeffs.clone(),
        };
        for (n, c) in other.iter() {
            *out.coeffs.entry(n).or_default() += c;
        }
        out
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// The complex conjugate field `ū`, with `\hat{ū}(n) = conj(û(-n))`.
    pub fn conj(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|(&n, &c)| (-n, c.conj())).collect(),
        }
    }

    /// Translation `u(· + a)`: coefficient at `n` picks up `e^{in·a}`.
    pub fn translate(&self, a: [f64; 2]) -> Self {
        self.map_coeffs(|n, c| c * Complex64::from_polar(1.0, n.n1 as f64 * a[0] + n.n2 as f64 * a[1]))
    }

    pub fn apply_multiplier(&self, m: Multiplier) -> Self {
        self.map_coeffs(|n, c| c * m.symbol(n))
    }

    /// Sharp Littlewood–Paley piece `P_N u`.
    pub fn project(&self, n: Dyadic) -> Self {
        self.filter(|k| n.shell_contains(k))
    }

    /// `P_{≤N} u`, keeping `|n| ≤ N`.
    pub fn project_leq(&self, n: Dyadic) -> Self {
        self.project_ball(n.get())
    }

    /// Keep `|n| ≤ radius` for an arbitrary integer radius.
    pub fn project_ball(&self, radius: u32) -> Self {
        let r2 = radius as i64 * radius as i64;
        self.filter(|k| k.norm_sq() <= r2)
    }

    fn filter(&self, keep: impl Fn(LatticeIndex) -> bool) -> Self {
        Self {
            cutoff: self.cutoff,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&n, _)| keep(n))
                .map(|(&n, &c)| (n, c))
                .collect(),
        }
    }

    /// `‖u‖_{H^σ} = (Σ ⟨n⟩^{2σ} |û(n)|²)^{1/2}`.
    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        self.iter()
            .map(|(n, c)| n.bracket().powf(2.0 * sigma) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖u‖_{FL^{σ,∞}} = sup ⟨n⟩^σ |û(n)|`.
    pub fn fourier_lebesgue_norm(&self, sigma: f64) -> f64 {
        self.iter()
            .map(|(n, c)| n.bracket().powf(sigma) * c.norm())
            .fold(0.0, f64::max)
    }

    /// Wiener algebra norm `Σ |û(n)|`.
    pub fn wiener_norm(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm()).sum()
    }

    /// `‖D^σ u‖²_{L²} = Σ |n|^{2σ} |û(n)|²`.
    pub fn homogeneous_norm_sq(&self, sigma: f64) -> f64 {
        self.iter()
            .filter(|(n, _)| *n != LatticeIndex::ZERO)
            .map(|(n, c)| n.norm().powf(2.0 * sigma) * c.norm_sqr())
            .sum()
    }

    /// Alias-free product, computed on a zero-padded grid. The result lives
    /// in the box of half-width `cutoff(u) + cutoff(v)`.
    pub fn multiply(&self, other: &SpectralField) -> SpectralField {
        let band = self.bandwidth() + other.bandwidth();
        let grid = SpectralGrid::new(fft_friendly(2 * band as usize + 1));
        let prod = &grid.to_grid(self) * &grid.to_grid(other);
        let mut out = grid.to_spectral(&prod, band);
        out.cutoff = self.cutoff + other.cutoff;
        out
    }

    /// Reference product by direct `O(B⁴)` convolution of coefficients.
    pub fn convolve_direct(&self, other: &SpectralField) -> SpectralField {
        let mut out = SpectralField::zero(self.cutoff + other.cutoff);
        for (n, a) in self.iter() {
            for (m, b) in other.iter() {
                *out.coeffs.entry(n + m).or_default() += a * b;
            }
        }
        out
    }

    /// `(f, g) = ∫ f ḡ = Σ f̂(n) conj(ĝ(n))`.
    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        self.iter().map(|(n, a)| a * other.get(n).conj()).sum()
    }

    /// Maximum coefficient-wise distance to another field.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        let mut worst: f64 = 0.0;
        for (n, a) in self.iter() {
            worst = worst.max((a - other.get(n)).norm());
        }
        for (n, b) in other.iter() {
            if !self.coeffs.contains_key(&n) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }

    /// Dense coefficient vector over `modes`, in order.
    pub fn to_dense(&self, modes: &[LatticeIndex]) -> Vec<Complex64> {
        modes.iter().map(|&n| self.get(n)).collect()
    }

    pub fn from_dense(cutoff: u32, modes: &[LatticeIndex], values: &[Complex64]) -> Self {
        let mut out = Self::zero(cutoff);
        for (&n, &c) in modes.iter().zip(values) {
            out.insert_unchecked(n, c);
        }
        out
    }

    pub fn write_snapshot<W: Write>(&self, w: W) -> Result<()> {
        let snap = Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            cutoff: self.cutoff,
            records: self
                .iter()
                .map(|(n, c)| Record {
                    n1: n.n1,
                    n2: n.n2,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_writer_pretty(w, &snap)?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(r: R) -> Result<Self> {
        let snap: Snapshot = serde_json::from_reader(r)?;
        if snap.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!("unexpected format tag `{}`", snap.format)));
        }
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {}", snap.version)));
        }
        let mut u = Self::zero(snap.cutoff);
        for r in snap.records {
            let n = LatticeIndex::new(r.n1, r.n2);
            if u.coeffs.contains_key(&n) {
                return Err(Error::Snapshot(format!("duplicate record for {n}")));
            }
            u.set(n, Complex64::new(r.re, r.im))?;
        }
        Ok(u)
    }

    pub fn to_snapshot_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }
}

pub const SNAPSHOT_FORMAT: &str = "nls-qi/spectral-field";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Snapshot {
    format: String,
    version: u32,
    cutoff: u32,
    records: Vec<Record>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    n1: i32,
    n2: i32,
    re: f64,
    im: f64,
}
