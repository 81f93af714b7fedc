//! The truncated flow `Φ_N` on `E_N = span{e^{in·x} : |n| ≤ N}`.
//!
//! The ODE is `i∂ₜu + Δu = P_{≤N}(|u|^{2k}u)` for `u ∈ E_N`. It is stepped
//! with classical RK4 on the interaction variable `v = e^{-itΔ}u`, so the
//! linear phase is exact and only the nonlinear part is approximated.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::{size_for_degree, SpectralGrid};
use crate::lattice::{Dyadic, LatticeIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Rk4Interaction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub k: u32,
    pub cutoff: Dyadic,
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub direction: Direction,
}

impl FlowConfig {
    pub fn new(k: u32, cutoff: Dyadic, dt: f64) -> Result<Self> {
        let cfg = Self {
            k,
            cutoff,
            dt,
            integrator: Integrator::Rk4Interaction,
            direction: Direction::Forward,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(invalid("k", "nonlinearity power must be at least 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("step must be finite and positive, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    fn sign(&self) -> f64 {
        match self.direction {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub config: FlowConfig,
}

/// Precomputed workspace for one `(k, N)`: the mode list of `E_N`, their
/// grid slots and a grid large enough for the degree-`2k+2` pairing that
/// projects the nonlinearity back onto `E_N`.
#[derive(Clone, Debug)]
pub struct GalerkinFlow {
    cfg: FlowConfig,
    modes: Vec<LatticeIndex>,
    slots: Vec<usize>,
    freq_sq: Vec<f64>,
    grid: SpectralGrid,
}

impl GalerkinFlow {
    pub fn new(cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.cutoff.get();
        let modes = LatticeIndex::ball(n);
        let grid = SpectralGrid::new(size_for_degree(2 * cfg.k as usize + 2, n));
        let slots = modes.iter().map(|&m| grid.index_of(m)).collect();
        let freq_sq = modes.iter().map(|m| m.norm_sq() as f64).collect();
        Ok(Self {
            cfg,
            modes,
            slots,
            freq_sq,
            grid,
        })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    /// Modes of `E_N` in the order used by dense state vectors.
    pub fn modes(&self) -> &[LatticeIndex] {
        &self.modes
    }

    /// Dense coefficients of `u`; fails if `u` has support outside `E_N`.
    pub fn to_dense(&self, u: &SpectralField) -> Result<Vec<Complex64>> {
        let r2 = self.cfg.cutoff.get() as i64 * self.cfg.cutoff.get() as i64;
        if let Some((n, _)) = u.iter().find(|(n, c)| n.norm_sq() > r2 && c.norm() > 0.0) {
            return Err(invalid(
                "u",
                format!("mode {n} lies outside E_N with N = {}", self.cfg.cutoff),
            ));
        }
        Ok(u.to_dense(&self.modes))
    }

    pub fn from_dense(&self, v: &[Complex64]) -> SpectralField {
        SpectralField::from_dense(self.cfg.cutoff.get(), &self.modes, v)
    }

    /// `P_{≤N}(|u|^{2k}u)` on dense coefficients.
    pub fn nonlinearity_dense(&self, u: &[Complex64]) -> Vec<Complex64> {
        let k = self.cfg.k;
        let f = self.grid.to_grid_indexed(&self.slots, u);
        let g = f.map(|z| z * z.norm_sqr().powi(k as i32));
        let coeffs = self.grid.coefficients(&g);
        self.slots.iter().map(|&i| coeffs[i]).collect()
    }

    /// The vector field `b(u) = iΔu - i P_{≤N}(|u|^{2k}u)`, optionally
    /// without the nonlinear part.
    pub fn vector_field_dense(&self, u: &[Complex64], nonlinear: bool) -> Vec<Complex64> {
        let i = Complex64::i();
        let mut out: Vec<Complex64> = u
            .iter()
            .zip(&self.freq_sq)
            .map(|(&c, &q)| -i * q * c)
            .collect();
        if nonlinear {
            for (o, f) in out.iter_mut().zip(self.nonlinearity_dense(u)) {
                *o -= i * f;
            }
        }
        out
    }

    /// `e^{iτΔ}` on dense coefficients.
    fn propagate(&self, v: &[Complex64], tau: f64) -> Vec<Complex64> {
        v.iter()
            .zip(&self.freq_sq)
            .map(|(&c, &q)| c * Complex64::from_polar(1.0, -tau * q))
            .collect()
    }

    /// Interaction-picture right-hand side `-i e^{-iτΔ} P(|e^{iτΔ}v|^{2k} e^{iτΔ}v)`.
    fn interaction_rhs(&self, tau: f64, v: &[Complex64]) -> Vec<Complex64> {
        let u = self.propagate(v, tau);
        let f = self.nonlinearity_dense(&u);
        let back = self.propagate(&f, -tau);
        back.into_iter().map(|z| -Complex64::i() * z).collect()
    }

    /// One RK4 step of signed size `h`.
    pub fn step_dense(&self, u: &[Complex64], h: f64) -> Vec<Complex64> {
        let axpy = |x: &[Complex64], a: f64, y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(&p, &q)| p + a * q).collect()
        };
        let k1 = self.interaction_rhs(0.0, u);
        let k2 = self.interaction_rhs(0.5 * h, &axpy(u, 0.5 * h, &k1));
        let k3 = self.interaction_rhs(0.5 * h, &axpy(u, 0.5 * h, &k2));
        let k4 = self.interaction_rhs(h, &axpy(u, h, &k3));
        let v: Vec<Complex64> = (0..u.len())
            .map(|j| u[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        self.propagate(&v, h)
    }

    /// Step sizes covering `[0, |t|]`: full steps of `dt` and one final
    /// partial step, each carrying the sign of `t`.
    pub fn schedule(&self, t: f64) -> Vec<f64> {
        let dt = self.cfg.dt;
        let total = t.abs();
        let full = (total / dt).floor() as usize;
        let mut steps = vec![dt; full];
        let rest = total - full as f64 * dt;
        if rest > 1e-12 * dt.max(total) {
            steps.push(rest);
        }
        steps.into_iter().map(|h| h.copysign(t)).collect()
    }

    /// `Φ(t)` on dense coefficients; `t < 0` integrates backward.
    pub fn flow_dense(&self, u: &[Complex64], t: f64) -> Vec<Complex64> {
        let t = t * self.cfg.sign();
        let mut state = u.to_vec();
        for h in self.schedule(t) {
            state = self.step_dense(&state, h);
        }
        state
    }

    pub fn flow(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        Ok(self.from_dense(&self.flow_dense(&self.to_dense(u)?, t)))
    }

    /// States at every step of the schedule, starting with `u0`.
    pub fn evolve(&self, u0: &SpectralField, t: f64) -> Result<Trajectory> {
        let t = t * self.cfg.sign();
        let mut state = self.to_dense(u0)?;
        let mut times = vec![0.0];
        let mut states = vec![self.from_dense(&state)];
        let mut now = 0.0;
        for h in self.schedule(t) {
            state = self.step_dense(&state, h);
            now += h;
            times.push(now);
            states.push(self.from_dense(&state));
        }
        Ok(Trajectory {
            times,
            states,
            config: self.cfg,
        })
    }

    /// Central-difference divergence of `b` over all `2·dim E_N` real
    /// coordinates.
    pub fn divergence_probe_dense(&self, u: &[Complex64], h: f64, nonlinear: bool) -> f64 {
        let mut total = 0.0;
        let mut work = u.to_vec();
        for j in 0..u.len() {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                work[j] = u[j] + h * dir;
                let plus = self.vector_field_dense(&work, nonlinear)[j];
                work[j] = u[j] - h * dir;
                let minus = self.vector_field_dense(&work, nonlinear)[j];
                work[j] = u[j];
                let d = (plus - minus) / (2.0 * h);
                // component of the derivative along the perturbed coordinate
                total += (d * dir.conj()).re;
            }
        }
        total
    }
}

/// `P_{≤N}(|P_{≤N}u|^{2k} P_{≤N}u)`.
pub fn nonlinearity(u: &SpectralField, k: u32, n: Dyadic) -> Result<SpectralField> {
    let flow = GalerkinFlow::new(FlowConfig::new(k, n, 1.0)?)?;
    let v = u.project_leq(n).to_dense(flow.modes());
    Ok(flow.from_dense(&flow.nonlinearity_dense(&v)))
}

/// `e^{itΔ}u`: coefficient at `n` times `e^{-it|n|²}`.
pub fn linear_propagate(u: &SpectralField, t: f64) -> SpectralField {
    u.map_coeffs(|n, c| c * Complex64::from_polar(1.0, -t * n.norm_sq() as f64))
}

/// One step of size `cfg.dt` in the configured direction.
pub fn step(u: &SpectralField, cfg: &FlowConfig) -> Result<SpectralField> {
    let flow = GalerkinFlow::new(*cfg)?;
    let v = flow.to_dense(u)?;
    Ok(flow.from_dense(&flow.step_dense(&v, cfg.dt * cfg.sign())))
}

pub fn evolve(u0: &SpectralField, t: f64, cfg: &FlowConfig) -> Result<Trajectory> {
    GalerkinFlow::new(*cfg)?.evolve(u0, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub mass: f64,
    pub hamiltonian: f64,
}

/// Mass `∫|u|²` and Hamiltonian `∫|∇u|² + (k+1)^{-1}∫|u|^{2k+2}`.
pub fn conserved(u: &SpectralField, k: u32) -> Conserved {
    let mass = u.iter().map(|(_, c)| c.norm_sqr()).sum();
    let kinetic: f64 = u.iter().map(|(n, c)| n.norm_sq() as f64 * c.norm_sqr()).sum();
    let band = u.bandwidth();
    let grid = SpectralGrid::new(size_for_degree(2 * k as usize + 2, band));
    let f = grid.to_grid(u);
    let potential = f.map(|z| Complex64::new(z.norm_sqr().powi(k as i32 + 1), 0.0)).mean().re;
    Conserved {
        mass,
        hamiltonian: kinetic + potential / (k + 1) as f64,
    }
}

/// Divergence of the truncated vector field at `u`, estimated by central
/// differences of step `h`.
pub fn divergence_probe(u: &SpectralField, cfg: &FlowConfig, h: f64, nonlinear: bool) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid("h", "difference step must be positive"));
    }
    let flow = GalerkinFlow::new(*cfg)?;
    let v = flow.to_dense(u)?;
    Ok(flow.divergence_probe_dense(&v, h, nonlinear))
}

/// `max(1, sup_n |b_n(u)|)`, the scale against which divergence estimates
/// are compared.
pub fn field_scale(u: &SpectralField, cfg: &FlowConfig) -> Result<f64> {
    let flow = GalerkinFlow::new(*cfg)?;
    let v = flow.to_dense(u)?;
    Ok(flow
        .vector_field_dense(&v, true)
        .iter()
        .map(|z| z.norm())
        .fold(1.0, f64::max))
}
