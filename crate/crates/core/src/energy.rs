//! The modified energy and the exact decomposition of its time derivative
//! along the truncated flow.
//!
//! Notation: `R(u) = Re(D^{s-2}ū · u^{k+1}ū^{k-1}, D^s u)`. The modified
//! energy is `ME(u) = ‖D^s u‖² + k·R(u)` and the correction is
//! `S(u) = (k/2)·R(u)`, so `ME = ‖D^s u‖² + 2S`. With this sign the
//! top-order part of `d/dt ‖D^s u‖²` cancels.
//!
//! Along `Φ_N`, `d/dt ME = I + II + … + VII + truncation`, where
//! `truncation = k·dR[i(1 - P_{≤N})(|u|^{2k}u)]` accounts for the part of
//! the nonlinearity the Galerkin system discards. Every pairing is
//! evaluated on a grid of size `> (total degree)·bandwidth`, which makes it
//! exact up to rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{Multiplier, SpectralField};
use crate::flow::{FlowConfig, GalerkinFlow};
use crate::grid::{dot, scale_vector, size_for_degree, GridField, GridVector, SpectralGrid};
use crate::lattice::Dyadic;

fn frac(sigma: f64) -> Multiplier {
    Multiplier::Fractional { sigma }
}

/// Pointwise `a^p b^q` for nonnegative exponents.
fn monomial(a: &GridField, b: &GridField, p: u32, q: u32) -> GridField {
    &a.powi(p) * &b.powi(q)
}

fn im_inner(f: &GridField, g: &GridField) -> f64 {
    f.inner(g).im
}

fn im_inner_v(f: &GridVector, g: &GridVector) -> f64 {
    (f[0].inner(&g[0]) + f[1].inner(&g[1])).im
}

/// `𝒞^σ(a) = D^σ(a^{k+1}b^k) - (k+1) D^σa · a^k b^k - k a^{k+1}b^{k-1} D^σb`
/// with `b` playing the role of `ā`.
fn commutator_grid(grid: &SpectralGrid, a: &GridField, b: &GridField, sigma: f64, k: u32) -> GridField {
    let d = frac(sigma);
    let full = grid.apply(&monomial(a, b, k + 1, k), d);
    let lead = &grid.apply(a, d) * &monomial(a, b, k, k);
    let side = &monomial(a, b, k + 1, k - 1) * &grid.apply(b, d);
    &(&full - &lead.scale((k + 1) as f64)) - &side.scale(k as f64)
}

/// `𝒞^σ(u)` as a field of box half-width `(2k+1)·bandwidth(u)`.
pub fn commutator(u: &SpectralField, sigma: f64, k: u32) -> SpectralField {
    let band = u.bandwidth();
    let out_band = (2 * k + 1) * band;
    let grid = SpectralGrid::new(crate::grid::fft_friendly(2 * out_band as usize + 1));
    let a = grid.to_grid(u);
    let b = a.conj();
    grid.to_spectral(&commutator_grid(&grid, &a, &b, sigma, k), out_band)
}

/// Grid for a pairing of total degree `degree` in fields of bandwidth `band`.
fn grid_for(degree: u32, band: u32) -> SpectralGrid {
    SpectralGrid::new(size_for_degree(degree as usize, band.max(1)))
}

/// `R(u) = Re(D^{s-2}ū u^{k+1}ū^{k-1}, D^s u)` for `u` as given.
fn r_pairing(u: &SpectralField, s: f64, k: u32) -> f64 {
    let grid = grid_for(2 * k + 2, u.bandwidth());
    let a = grid.to_grid(u);
    let b = a.conj();
    let dm = grid.apply(&b, frac(s - 2.0));
    let ds = grid.apply(&a, frac(s));
    (&dm * &monomial(&a, &b, k + 1, k - 1)).inner(&ds).re
}

/// `S(u) = (k/2) Re(D^{s-2}P_{≤N}ū · (P_{≤N}u)^{k+1}(P_{≤N}ū)^{k-1}, D^s P_{≤N}u)`.
pub fn correction_s(u: &SpectralField, s: f64, k: u32, n: Dyadic) -> f64 {
    0.5 * k as f64 * r_pairing(&u.project_leq(n), s, k)
}

/// `ME(u) = ‖D^s u‖² + k·R(u)`.
pub fn modified_energy(u: &SpectralField, s: f64, k: u32) -> f64 {
    u.homogeneous_norm_sq(s) + k as f64 * r_pairing(u, s, k)
}

/// Directional derivative `dME_u[v]`. Both fields must lie in the same
/// truncated space for the pairing grid to be exact.
pub fn modified_energy_derivative(u: &SpectralField, v: &SpectralField, s: f64, k: u32) -> f64 {
    let grid = grid_for(2 * k + 2, u.bandwidth().max(v.bandwidth()));
    let a = grid.to_grid(u);
    let b = a.conj();
    let va = grid.to_grid(v);
    let vb = va.conj();
    let dm = grid.apply(&b, frac(s - 2.0));
    let ds = grid.apply(&a, frac(s));
    let mono = monomial(&a, &b, k + 1, k - 1);

    let mut dmono = &monomial(&a, &b, k, k - 1) * &va.scale((k + 1) as f64);
    if k >= 2 {
        dmono = &dmono + &(&monomial(&a, &b, k + 1, k - 2) * &vb.scale((k - 1) as f64));
    }
    let dr = (&grid.apply(&vb, frac(s - 2.0)) * &mono).inner(&ds).re
        + (&dm * &dmono).inner(&ds).re
        + (&dm * &mono).inner(&grid.apply(&va, frac(s))).re;
    2.0 * v.inner(&u.apply_multiplier(frac(2.0 * s))).re + k as f64 * dr
}

/// `d/dt ME` along `Φ_N` at `u ∈ E_N`, without the term-by-term split.
/// Equals [`EnergyBreakdown::term_sum`] up to rounding.
pub fn modified_energy_rate(flow: &GalerkinFlow, u: &[Complex64], s: f64) -> f64 {
    let field = flow.from_dense(u);
    let velocity = flow.from_dense(&flow.vector_field_dense(u, true));
    modified_energy_derivative(&field, &velocity, s, flow.config().k)
}

/// Values entering the derivative of the modified energy at one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub s: f64,
    pub k: u32,
    pub cutoff: u32,
    /// `‖D^s u‖²`.
    pub l2s: f64,
    /// `k·R(u) = 2S(u)`.
    pub correction: f64,
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
    pub term_iv: f64,
    pub term_v: f64,
    pub term_vi: f64,
    pub term_vii: f64,
    /// Contribution of the nonlinearity discarded by `P_{≤N}`.
    pub truncation: f64,
    pub q1: f64,
    pub q2: f64,
}

impl EnergyBreakdown {
    /// `I + … + VII + truncation`, the time derivative of `ME` along `Φ_N`.
    pub fn term_sum(&self) -> f64 {
        self.term_i
            + self.term_ii
            + self.term_iii
            + self.term_iv
            + self.term_v
            + self.term_vi
            + self.term_vii
            + self.truncation
    }

    pub fn modified_energy(&self) -> f64 {
        self.l2s + self.correction
    }

    pub fn terms(&self) -> [(&'static str, f64); 8] {
        [
            ("I", self.term_i),
            ("II", self.term_ii),
            ("III", self.term_iii),
            ("IV", self.term_iv),
            ("V", self.term_v),
            ("VI", self.term_vi),
            ("VII", self.term_vii),
            ("truncation", self.truncation),
        ]
    }
}

/// Grid evaluations shared by every term.
struct Fields<'g> {
    grid: &'g SpectralGrid,
    s: f64,
    k: u32,
    a: GridField,
    b: GridField,
    ds: GridField,
    dm: GridField,
    dmu: GridField,
    grad_a: GridVector,
    grad_b: GridVector,
    grad_dm: GridVector,
    grad_dmu: GridVector,
}

impl<'g> Fields<'g> {
    fn new(grid: &'g SpectralGrid, u: &SpectralField, s: f64, k: u32) -> Self {
        let a = grid.to_grid(u);
        let b = a.conj();
        let ds = grid.apply(&a, frac(s));
        let dm = grid.apply(&b, frac(s - 2.0));
        let dmu = grid.apply(&a, frac(s - 2.0));
        let grad_a = grid.gradient(&a);
        let grad_b = grid.gradient(&b);
        let grad_dm = grid.gradient(&dm);
        let grad_dmu = grid.gradient(&dmu);
        Self {
            grid,
            s,
            k,
            a,
            b,
            ds,
            dm,
            dmu,
            grad_a,
            grad_b,
            grad_dm,
            grad_dmu,
        }
    }

    fn mono(&self, p: u32, q: u32) -> GridField {
        monomial(&self.a, &self.b, p, q)
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    fn term_i(&self) -> f64 {
        let c = commutator_grid(self.grid, &self.a, &self.b, self.s, self.k);
        2.0 * im_inner(&c, &self.ds)
    }

    fn term_ii(&self) -> f64 {
        let k = self.k;
        if k < 2 {
            return 0.0;
        }
        let lap_b = self.grid.apply(&self.b, Multiplier::Laplacian);
        let f = &(&self.dm * &self.mono(k + 1, k - 2)) * &lap_b;
        let kf = self.kf();
        2.0 * kf * (kf - 1.0) * im_inner(&f, &self.ds)
    }

    fn term_iii(&self) -> f64 {
        let k = self.k;
        let f = &dot(&self.grad_dm, &self.grad_a) * &self.mono(k, k - 1);
        let kf = self.kf();
        2.0 * kf * (kf + 1.0) * im_inner(&f, &self.ds)
    }

    fn term_iv(&self) -> f64 {
        let k = self.k;
        if k < 2 {
            return 0.0;
        }
        let f = &dot(&self.grad_dm, &self.grad_b) * &self.mono(k + 1, k - 2);
        let kf = self.kf();
        2.0 * kf * (kf - 1.0) * im_inner(&f, &self.ds)
    }

    fn term_v(&self) -> f64 {
        let k = self.k;
        let kf = self.kf();
        let mut total = 0.0;
        if k >= 2 {
            let f = &(&self.dm * &dot(&self.grad_a, &self.grad_b)) * &self.mono(k, k - 2);
            total += 2.0 * kf * (kf + 1.0) * (kf - 1.0) * im_inner(&f, &self.ds);
        }
        let f = &(&self.dm * &dot(&self.grad_a, &self.grad_a)) * &self.mono(k - 1, k - 1);
        total += kf * kf * (kf + 1.0) * im_inner(&f, &self.ds);
        if k >= 3 {
            let f = &(&self.dm * &dot(&self.grad_b, &self.grad_b)) * &self.mono(k + 1, k - 3);
            total += kf * (kf - 1.0) * (kf - 2.0) * im_inner(&f, &self.ds);
        }
        total
    }

    fn term_vi(&self) -> f64 {
        let k = self.k;
        let kf = self.kf();
        let g = self.grid;
        let dsm2 = frac(self.s - 2.0);
        let q = self.mono(k + 1, k - 1);
        let abs2k = self.mono(k, k);
        let cbar = commutator_grid(g, &self.b, &self.a, self.s - 2.0, k);

        let mut bracket = 0.0;
        bracket += 2.0 * im_inner_v(&scale_vector(&q, &g.gradient(&cbar)), &self.grad_dmu);
        bracket += (2.0 * kf + 2.0)
            * im_inner_v(&scale_vector(&(&self.dm * &q), &g.gradient(&abs2k)), &self.grad_dmu);
        bracket += kf
            * im_inner_v(
                &scale_vector(&(&self.dmu * &q), &g.gradient(&self.mono(k - 1, k + 1))),
                &self.grad_dmu,
            );
        let d_bar_f = g.apply(&self.mono(k, k + 1), dsm2);
        bracket += im_inner_v(&scale_vector(&d_bar_f, &g.gradient(&q)), &self.grad_dmu);
        bracket -= 2.0
            * im_inner_v(
                &scale_vector(&self.dm, &g.gradient(&self.mono(2 * k + 1, 2 * k - 1))),
                &self.grad_dmu,
            );
        let grad_d_f = g.gradient(&g.apply(&self.mono(k + 1, k), dsm2));
        bracket += im_inner_v(&scale_vector(&self.dm, &g.gradient(&q)), &grad_d_f);
        bracket += kf
            * im_inner_v(
                &scale_vector(&q, &self.grad_dm),
                &scale_vector(&self.dm, &g.gradient(&self.mono(k + 1, k - 1))),
            );
        -kf * bracket
    }

    fn term_vii(&self) -> f64 {
        let k = self.k;
        let kf = self.kf();
        let w = self.mono(2 * k + 1, 2 * k - 1);
        -kf * 2.0 * kf * im_inner_v(&scale_vector(&w, &self.grad_dm), &self.grad_dmu)
    }

    /// `k·dR[w]` with `w = i(F - P_{≤N}F)`, `F = |u|^{2k}u`.
    fn truncation(&self, n: Dyadic) -> f64 {
        let k = self.k;
        let kf = self.kf();
        let g = self.grid;
        let f = self.mono(k + 1, k);
        let w = (&f - &g.project_leq(&f, n.get())).scale_c(Complex64::i());
        let wb = w.conj();
        let big_b = self.mono(k + 1, k - 1);
        let mut dr = (&g.apply(&wb, frac(self.s - 2.0)) * &big_b).inner(&self.ds).re;
        dr += (kf + 1.0) * (&(&self.dm * &w) * &self.mono(k, k - 1)).inner(&self.ds).re;
        if k >= 2 {
            dr += (kf - 1.0) * (&(&self.dm * &wb) * &self.mono(k + 1, k - 2)).inner(&self.ds).re;
        }
        dr += (&self.dm * &big_b).inner(&g.apply(&w, frac(self.s))).re;
        kf * dr
    }

    /// `Re[-2k(k-1)(k+1) Σ_j (∫D^s ū ∂_j u)(∫ q D^{s-2}ū ∂_j ū)]`.
    fn q1(&self) -> f64 {
        let k = self.k;
        if k < 2 {
            return 0.0;
        }
        let kf = self.kf();
        let dsb = self.ds.conj();
        let q = self.mono(k + 1, k - 1);
        let qdm = &q * &self.dm;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..2 {
            let left = dsb.integral_product(&self.grad_a[j]);
            let right = qdm.integral_product(&self.grad_b[j]);
            acc += left * right;
        }
        (-2.0 * kf * (kf - 1.0) * (kf + 1.0) * acc).re
    }
}

/// Every term of the derivative decomposition at `P_{≤N}u`.
pub fn energy_terms(u: &SpectralField, s: f64, k: u32, n: Dyadic) -> EnergyBreakdown {
    let u = u.project_leq(n);
    let grid = grid_for(4 * k + 2, u.bandwidth());
    let f = Fields::new(&grid, &u, s, k);
    let l2s = u.homogeneous_norm_sq(s);
    let correction = k as f64 * (&(&f.dm * &f.mono(k + 1, k - 1))).inner(&f.ds).re;
    let mut out = EnergyBreakdown {
        s,
        k,
        cutoff: n.get(),
        l2s,
        correction,
        term_i: f.term_i(),
        term_ii: f.term_ii(),
        term_iii: f.term_iii(),
        term_iv: f.term_iv(),
        term_v: f.term_v(),
        term_vi: f.term_vi(),
        term_vii: f.term_vii(),
        truncation: f.truncation(n),
        q1: f.q1(),
        q2: 0.0,
    };
    out.q2 = 0.5 * out.term_sum() - out.q1;
    out
}

pub fn q1(u: &SpectralField, s: f64, k: u32, n: Dyadic) -> f64 {
    let u = u.project_leq(n);
    let grid = grid_for(2 * k + 2, u.bandwidth());
    Fields::new(&grid, &u, s, k).q1()
}

pub fn q2(u: &SpectralField, s: f64, k: u32, n: Dyadic) -> f64 {
    energy_terms(u, s, k, n).q2
}

/// Central finite difference of `ME` along the flow next to the analytic
/// derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub dt_fd: f64,
    pub finite_difference: f64,
    pub analytic: f64,
    pub residual: f64,
}

pub fn identity_check(u0: &SpectralField, s: f64, cfg: &FlowConfig, dt_fd: f64) -> Result<IdentityCheck> {
    let flow = GalerkinFlow::new(*cfg)?;
    identity_check_with(&flow, u0, s, dt_fd)
}

pub fn identity_check_with(
    flow: &GalerkinFlow,
    u0: &SpectralField,
    s: f64,
    dt_fd: f64,
) -> Result<IdentityCheck> {
    let cfg = flow.config();
    let k = cfg.k;
    let analytic = energy_terms(u0, s, k, cfg.cutoff).term_sum();
    let v = flow.to_dense(u0)?;
    let plus = flow.from_dense(&flow.flow_dense(&v, dt_fd));
    let minus = flow.from_dense(&flow.flow_dense(&v, -dt_fd));
    let fd = (modified_energy(&plus, s, k) - modified_energy(&minus, s, k)) / (2.0 * dt_fd);
    Ok(IdentityCheck {
        dt_fd,
        finite_difference: fd,
        analytic,
        residual: (fd - analytic).abs(),
    })
}

/// `|FD - AN|` for the derivative of `ME` along `Φ_N` at `u0`.
pub fn identity_residual(u0: &SpectralField, s: f64, cfg: &FlowConfig, dt_fd: f64) -> Result<f64> {
    Ok(identity_check(u0, s, cfg, dt_fd)?.residual)
}
