//! Transported densities on `E_N` and Monte-Carlo change-of-variables tests.
//!
//! On `E_N`, `μ_s` has Lebesgue density proportional to `exp(-‖u‖²_{H^s})`
//! and `ρ = e^{-S} μ_s`. The flow preserves Lebesgue measure, so
//! `d(Φ_t#ρ)/dρ (x) = exp(G(x) - G(Φ_{-t}x))` with
//! `G = ‖u‖²_{H^s} + S = (‖u‖²_{H^s} - ½‖D^s u‖²) + ½·ME`. The exponent is
//! `∫₀ᵗ (q1 + q2 + q_gauss)(Φ_{-t'}x) dt'`, where `q_gauss` is the
//! derivative of the bracketed quadratic part along the flow.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{correction_s, modified_energy_rate, q1};
use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::flow::{FlowConfig, GalerkinFlow};
use crate::lattice::LatticeIndex;
use crate::report::{McReport, Verdict, MIN_EFFECTIVE_SAMPLES, SIGMA_LEVEL};
use crate::sampler::{sample, GaussianSpec};
use crate::stats::{effective_sample_size, MeanEstimate};

/// `exp(-S(u))`.
pub fn weight_rho(u: &SpectralField, s: f64, cfg: &FlowConfig) -> f64 {
    (-correction_s(u, s, cfg.k, cfg.cutoff)).exp()
}

/// `d/dt (‖u‖²_{H^s} - ½‖D^s u‖²)` along the truncated flow:
/// `2 Im(⟨∇⟩^s F, ⟨∇⟩^s u) - Im(D^s F, D^s u)` with `F = P_{≤N}(|u|^{2k}u)`.
pub fn gaussian_rate(flow: &GalerkinFlow, u: &[Complex64], s: f64) -> f64 {
    let f = flow.nonlinearity_dense(u);
    let mut total = 0.0;
    for ((n, fz), uz) in flow.modes().iter().zip(&f).zip(u) {
        let bessel = n.bracket().powf(2.0 * s);
        let frac = if *n == LatticeIndex::ZERO { 0.0 } else { n.norm().powf(2.0 * s) };
        total += (2.0 * bessel - frac) * (fz * uz.conj()).im;
    }
    total
}

/// `q1 + q2 + q_gauss` at a dense state, using `q1 + q2 = ½ d/dt ME`.
fn density_rate(flow: &GalerkinFlow, u: &[Complex64], s: f64) -> f64 {
    0.5 * modified_energy_rate(flow, u, s) + gaussian_rate(flow, u, s)
}

/// Default Simpson panel count for horizon `t`: one panel per two
/// integrator steps.
pub fn default_quad_steps(t: f64, dt: f64) -> usize {
    let steps = (t.abs() / dt).ceil() as usize;
    (steps / 2).max(1)
}

/// `∫₀ᵗ (q1 + q2 + q_gauss)(Φ(-t', u0)) dt'` by composite Simpson with
/// `quad_steps` panels.
///
/// The backward orbit is integrated with steps of `t / (2·quad_steps)` that
/// are no longer than the configured `dt`, so every node is a step boundary.
pub fn density_exponent(u0: &SpectralField, t: f64, s: f64, cfg: &FlowConfig, quad_steps: usize) -> Result<f64> {
    let flow = GalerkinFlow::new(*cfg)?;
    density_exponent_with(&flow, &flow.to_dense(u0)?, t, s, quad_steps)
}

pub fn density_exponent_with(flow: &GalerkinFlow, u0: &[Complex64], t: f64, s: f64, quad_steps: usize) -> Result<f64> {
    if quad_steps == 0 {
        return Err(invalid("quad_steps", "need at least one Simpson panel"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let nodes = 2 * quad_steps;
    let h = t / nodes as f64;
    let sub = (h.abs() / flow.config().dt).ceil().max(1.0) as usize;
    let hs = h / sub as f64;
    let mut state = u0.to_vec();
    let mut values = Vec::with_capacity(nodes + 1);
    values.push(density_rate(flow, &state, s));
    for _ in 0..nodes {
        for _ in 0..sub {
            state = flow.step_dense(&state, -hs);
        }
        values.push(density_rate(flow, &state, s));
    }
    let mut acc = values[0] + values[nodes];
    for (i, v) in values.iter().enumerate().take(nodes).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}

/// Smooth bounded maps for cylinder observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CylinderMap {
    /// `exp(-Σ|û(n_j)|² / scale²)`.
    GaussianBump,
    /// `cos(Σ(Re û(n_j) + Im û(n_j)) / scale)`.
    Cosine,
    /// `tanh(Σ Re û(n_j) / scale)`.
    Tanh,
}

impl CylinderMap {
    fn label(self) -> &'static str {
        match self {
            CylinderMap::GaussianBump => "gaussian-bump",
            CylinderMap::Cosine => "cosine",
            CylinderMap::Tanh => "tanh",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    Cylinder {
        modes: Vec<LatticeIndex>,
        map: CylinderMap,
        scale: f64,
    },
    /// `1{‖u‖_{FL^{σ,∞}} ≤ radius}`.
    NormIndicator { sigma: f64, radius: f64 },
    /// `(Re û(n))^power`; unbounded.
    Moment { mode: LatticeIndex, power: u32 },
}

impl ObservableSpec {
    pub fn name(&self) -> String {
        match self {
            ObservableSpec::Cylinder { modes, map, scale } => {
                let ms: Vec<String> = modes.iter().map(|n| format!("{}:{}", n.n1, n.n2)).collect();
                format!("{}[{}]/{scale}", map.label(), ms.join(","))
            }
            ObservableSpec::NormIndicator { sigma, radius } => format!("fl-ball[{sigma},{radius}]"),
            ObservableSpec::Moment { mode, power } => format!("moment[{}:{}]^{power}", mode.n1, mode.n2),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, ObservableSpec::Moment { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObservableSpec::Cylinder { modes, scale, .. } => {
                if modes.is_empty() {
                    return Err(invalid("modes", "cylinder observable needs at least one mode"));
                }
                if !(*scale > 0.0) {
                    return Err(invalid("scale", "must be positive"));
                }
            }
            ObservableSpec::NormIndicator { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(invalid("radius", "must be positive"));
                }
            }
            ObservableSpec::Moment { .. } => {}
        }
        Ok(())
    }

    pub fn eval(&self, u: &SpectralField) -> f64 {
        match self {
            ObservableSpec::Cylinder { modes, map, scale } => {
                let zs = modes.iter().map(|&n| u.get(n));
                match map {
                    CylinderMap::GaussianBump => (-zs.map(|z| z.norm_sqr()).sum::<f64>() / (scale * scale)).exp(),
                    CylinderMap::Cosine => (zs.map(|z| z.re + z.im).sum::<f64>() / scale).cos(),
                    CylinderMap::Tanh => (zs.map(|z| z.re).sum::<f64>() / scale).tanh(),
                }
            }
            ObservableSpec::NormIndicator { sigma, radius } => {
                if u.fourier_lebesgue_norm(*sigma) <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            ObservableSpec::Moment { mode, power } => u.get(*mode).re.powi(*power as i32),
        }
    }
}

fn check_consistent(spec: &GaussianSpec, cfg: &FlowConfig) -> Result<()> {
    spec.validate()?;
    cfg.validate()?;
    if spec.cutoff != cfg.cutoff.get() {
        return Err(invalid(
            "cutoff",
            format!("sampler cutoff {} differs from flow cutoff {}", spec.cutoff, cfg.cutoff),
        ));
    }
    Ok(())
}

/// `A = E_μ[w·F∘Φ_t]` against `B = E_μ[w·F·f_t]`, `w = e^{-S}`,
/// `f_t = exp(density_exponent)`. The verdict uses the paired difference.
pub fn qi_test(
    obs: &ObservableSpec,
    t: f64,
    spec: &GaussianSpec,
    cfg: &FlowConfig,
    n_samples: usize,
    quad_steps: usize,
) -> Result<McReport> {
    Ok(qi_test_batch(std::slice::from_ref(obs), t, spec, cfg, n_samples, quad_steps)?.remove(0))
}

/// [`qi_test`] for several observables sharing the same samples and orbits.
pub fn qi_test_batch(
    observables: &[ObservableSpec],
    t: f64,
    spec: &GaussianSpec,
    cfg: &FlowConfig,
    n_samples: usize,
    quad_steps: usize,
) -> Result<Vec<McReport>> {
    check_consistent(spec, cfg)?;
    if observables.is_empty() {
        return Err(invalid("observables", "at least one observable is required"));
    }
    for obs in observables {
        obs.validate()?;
        if !obs.is_bounded() {
            return Err(Error::UnboundedObservable(obs.name()));
        }
    }
    if n_samples < 2 {
        return Err(invalid("n_samples", "need at least two samples"));
    }
    let flow = GalerkinFlow::new(*cfg)?;
    let per_sample: Vec<(f64, f64, SpectralField, SpectralField)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let u = sample(spec, i);
            let v = flow.to_dense(&u)?;
            let w = weight_rho(&u, spec.s, cfg);
            let exponent = density_exponent_with(&flow, &v, t, spec.s, quad_steps)?;
            let pushed = flow.from_dense(&flow.flow_dense(&v, t));
            Ok((w, exponent, u, pushed))
        })
        .collect::<Result<_>>()?;

    let weights: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
    let reweights: Vec<f64> = per_sample.iter().map(|p| p.0 * p.1.exp()).collect();
    let ess = effective_sample_size(&weights).min(effective_sample_size(&reweights));

    let reports = observables
        .iter()
        .map(|obs| {
            let mut a = Vec::with_capacity(n_samples);
            let mut b = Vec::with_capacity(n_samples);
            for ((w, _, u, pushed), wf) in per_sample.iter().zip(&reweights) {
                a.push(w * obs.eval(pushed));
                b.push(wf * obs.eval(u));
            }
            summarize_qi(&obs.name(), &a, &b, ess)
        })
        .collect();
    Ok(reports)
}

fn summarize_qi(name: &str, a: &[f64], b: &[f64], ess: f64) -> McReport {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let ea = MeanEstimate::of(a);
    let eb = MeanEstimate::of(b);
    let ed = MeanEstimate::of(&diff);
    let verdict = if ess < MIN_EFFECTIVE_SAMPLES {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(ed.mean.abs() <= SIGMA_LEVEL * ed.stderr)
    };
    McReport {
        name: format!("qi-test/{name}"),
        estimate: ed.mean.abs(),
        stderr: ed.stderr,
        n_samples: diff.len(),
        bound: Some(SIGMA_LEVEL * ed.stderr),
        verdict,
        details: Default::default(),
    }
    .detail("pushforward_mean", ea.mean)
    .detail("pushforward_stderr", ea.stderr)
    .detail("reweighted_mean", eb.mean)
    .detail("reweighted_stderr", eb.stderr)
    .detail("effective_samples", ess)
    .detail("sigma_level", SIGMA_LEVEL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    S,
    Q1,
}

/// Ball `{‖u‖_{FL^{σ,∞}} ≤ R}` used to localize moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub sigma: f64,
    pub radius: f64,
}

impl Ball {
    /// `σ = s - 1.1`.
    pub fn default_for(s: f64, radius: f64) -> Self {
        Self { sigma: s - 1.1, radius }
    }

    pub fn contains(&self, u: &SpectralField) -> bool {
        u.fourier_lebesgue_norm(self.sigma) <= self.radius
    }
}

/// Localized exponential moment.
///
/// Kind `S`: `E_μ[1_B e^{p|S|}]`. Kind `Q1`: `E_ρ[1_B e^{p|q1|}]` with `ρ`
/// normalized, estimated as `E_μ[e^{-S} 1_B e^{p|q1|}] / E_μ[e^{-S}]`.
/// Stability compares the estimate from the first `n_samples` draws with
/// the one from `2·n_samples` draws.
pub fn exp_moment(
    kind: MomentKind,
    p: f64,
    ball: Ball,
    spec: &GaussianSpec,
    cfg: &FlowConfig,
    n_samples: usize,
) -> Result<McReport> {
    check_consistent(spec, cfg)?;
    if !(p > 0.0) {
        return Err(invalid("p", "must be positive"));
    }
    if !(ball.radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    if n_samples < 2 {
        return Err(invalid("n_samples", "need at least two samples"));
    }
    let total = 2 * n_samples;
    let vals: Vec<(f64, f64)> = (0..total as u64)
        .into_par_iter()
        .map(|i| {
            let u = sample(spec, i);
            let inside = ball.contains(&u);
            let sv = correction_s(&u, spec.s, cfg.k, cfg.cutoff);
            match kind {
                MomentKind::S => (if inside { (p * sv.abs()).exp() } else { 0.0 }, 1.0),
                MomentKind::Q1 => {
                    let w = (-sv).exp();
                    let num = if inside {
                        w * (p * q1(&u, spec.s, cfg.k, cfg.cutoff).abs()).exp()
                    } else {
                        0.0
                    };
                    (num, w)
                }
            }
        })
        .collect();

    let ratio = |xs: &[(f64, f64)]| -> (f64, f64) {
        let num: Vec<f64> = xs.iter().map(|v| v.0).collect();
        let den: Vec<f64> = xs.iter().map(|v| v.1).collect();
        let en = MeanEstimate::of(&num);
        let ed = MeanEstimate::of(&den);
        let r = en.mean / ed.mean;
        // delta method for the ratio of means
        let resid: Vec<f64> = xs.iter().map(|v| (v.0 - r * v.1) / ed.mean).collect();
        (r, MeanEstimate::of(&resid).stderr)
    };
    let (half, half_se) = ratio(&vals[..n_samples]);
    let (full, full_se) = ratio(&vals);
    let change = (full - half).abs() / full.abs();
    let inside_count = vals.iter().filter(|v| v.0 > 0.0).count();
    let inside = inside_count as f64 / total as f64;
    // E[e^{p|·|} | B], under μ for S and under ρ for Q1
    let conditional = {
        let num: f64 = vals.iter().map(|v| v.0).sum();
        let den: f64 = vals.iter().filter(|v| v.0 > 0.0).map(|v| v.1).sum();
        if inside_count > 0 {
            num / den
        } else {
            f64::NAN
        }
    };
    let name = match kind {
        MomentKind::S => "exp-moment/S",
        MomentKind::Q1 => "exp-moment/Q1",
    };
    let verdict = if !full.is_finite() {
        Verdict::Fail
    } else {
        Verdict::from_bool(change <= 0.05)
    };
    Ok(McReport {
        name: name.to_string(),
        estimate: full,
        stderr: full_se,
        n_samples: total,
        bound: None,
        verdict,
        details: Default::default(),
    }
    .detail("p", p)
    .detail("radius", ball.radius)
    .detail("sigma", ball.sigma)
    .detail("half_estimate", half)
    .detail("half_stderr", half_se)
    .detail("relative_change", change)
    .detail("change_tolerance", 0.05)
    .detail("ball_fraction", inside)
    .detail("conditional_mean", conditional))
}

/// `d(Φ_t#μ)/dμ (u) = exp(exponent) · exp(S(Φ_{-t}u)) · exp(-S(u))`.
pub fn mu_density(u: &SpectralField, t: f64, spec: &GaussianSpec, cfg: &FlowConfig, quad_steps: usize) -> Result<f64> {
    check_consistent(spec, cfg)?;
    let flow = GalerkinFlow::new(*cfg)?;
    let v = flow.to_dense(u)?;
    let e = density_exponent_with(&flow, &v, t, spec.s, quad_steps)?;
    let back = flow.from_dense(&flow.flow_dense(&v, -t));
    let s_back = correction_s(&back, spec.s, cfg.k, cfg.cutoff);
    let s_here = correction_s(u, spec.s, cfg.k, cfg.cutoff);
    Ok((e + s_back - s_here).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: u32,
    pub mean: f64,
    pub stderr: f64,
    pub n_inside: usize,
}

/// `|S(P_{≤2N}φ) - S(P_{≤N}φ)|` for each `N` in `scales`, averaged over
/// samples inside `ball`. `spec.cutoff` must be at least `2·max(scales)`.
pub fn s_tail(spec: &GaussianSpec, k: u32, scales: &[crate::Dyadic], ball: Ball, n_samples: usize) -> Result<Vec<TailRow>> {
    spec.validate()?;
    let top = scales.iter().map(|n| n.get()).max().unwrap_or(0);
    if spec.cutoff < 2 * top {
        return Err(invalid("cutoff", format!("need at least {} for the requested scales", 2 * top)));
    }
    let rows: Vec<Option<Vec<f64>>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let phi = sample(spec, i);
            if !ball.contains(&phi) {
                return None;
            }
            Some(
                scales
                    .iter()
                    .map(|&n| {
                        let n2 = crate::Dyadic::new(2 * n.get()).expect("double of a dyadic");
                        (correction_s(&phi, spec.s, k, n2) - correction_s(&phi, spec.s, k, n)).abs()
                    })
                    .collect(),
            )
        })
        .collect();
    let inside: Vec<&Vec<f64>> = rows.iter().flatten().collect();
    Ok(scales
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let xs: Vec<f64> = inside.iter().map(|r| r[j]).collect();
            let e = MeanEstimate::of(&xs);
            TailRow {
                n: n.get(),
                mean: e.mean,
                stderr: e.stderr,
                n_inside: xs.len(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dyadic;

    fn d(n: u32) -> Dyadic {
        Dyadic::new(n).unwrap()
    }

    #[test]
    fn weight_examples() {
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        assert_eq!(weight_rho(&SpectralField::zero(4), 2.5, &cfg), 1.0);
        let n = LatticeIndex::new(1, 1);
        let c = Complex64::new(0.5, 0.5);
        let u = SpectralField::single_mode(4, n, c).unwrap();
        let want = (-0.5 * n.norm().powf(3.0) * c.norm().powi(4)).exp();
        assert!((weight_rho(&u, 2.5, &cfg) - want).abs() < 1e-15);
    }

    #[test]
    fn zero_horizon_exponent() {
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        let u = sample(&GaussianSpec::new(2.5, 4, 0).unwrap(), 0);
        assert_eq!(density_exponent(&u, 0.0, 2.5, &cfg, 4).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_exponent_vanishes() {
        let u = SpectralField::single_mode(4, LatticeIndex::new(2, 1), Complex64::new(0.7, 0.2)).unwrap();
        for k in 1..=2 {
            let cfg = FlowConfig::new(k, d(4), 1e-2).unwrap();
            assert!(density_exponent(&u, 0.3, 2.5, &cfg, 8).unwrap().abs() < 1e-10);
            let spec = GaussianSpec::new(2.5, 4, 0).unwrap();
            assert!((mu_density(&u, 0.3, &spec, &cfg, 8).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_rate_vanishes_on_single_modes() {
        let cfg = FlowConfig::new(2, d(4), 1e-2).unwrap();
        let flow = GalerkinFlow::new(cfg).unwrap();
        let u = SpectralField::single_mode(4, LatticeIndex::new(0, 3), Complex64::new(0.2, 0.9)).unwrap();
        assert!(gaussian_rate(&flow, &flow.to_dense(&u).unwrap(), 2.5).abs() < 1e-12);
    }

    #[test]
    fn observables_are_bounded_by_construction() {
        let u = sample(&GaussianSpec::new(2.5, 4, 0).unwrap(), 3).scale(Complex64::new(50.0, 0.0));
        let obs = [
            ObservableSpec::Cylinder {
                modes: vec![LatticeIndex::new(1, 0)],
                map: CylinderMap::GaussianBump,
                scale: 0.3,
            },
            ObservableSpec::Cylinder {
                modes: vec![LatticeIndex::new(1, 0), LatticeIndex::new(0, 1)],
                map: CylinderMap::Cosine,
                scale: 0.3,
            },
            ObservableSpec::Cylinder {
                modes: vec![LatticeIndex::new(1, 1)],
                map: CylinderMap::Tanh,
                scale: 0.3,
            },
            ObservableSpec::NormIndicator { sigma: 1.4, radius: 1.0 },
        ];
        for o in &obs {
            assert!(o.is_bounded());
            assert!(o.eval(&u).abs() <= 1.0);
        }
    }

    #[test]
    fn moments_are_rejected_in_equality_mode() {
        let spec = GaussianSpec::new(2.5, 4, 0).unwrap();
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        let obs = ObservableSpec::Moment {
            mode: LatticeIndex::new(1, 0),
            power: 2,
        };
        assert!(matches!(
            qi_test(&obs, 0.1, &spec, &cfg, 10, 2),
            Err(Error::UnboundedObservable(_))
        ));
    }

    #[test]
    fn zero_horizon_qi_test_is_exact() {
        let spec = GaussianSpec::new(2.5, 4, 1).unwrap();
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        let obs = ObservableSpec::Cylinder {
            modes: vec![LatticeIndex::new(1, 0)],
            map: CylinderMap::Tanh,
            scale: 0.3,
        };
        let r = qi_test(&obs, 0.0, &spec, &cfg, 50, 2).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.details["pushforward_mean"], r.details["reweighted_mean"]);
    }

    #[test]
    fn mismatched_cutoffs_are_rejected() {
        let spec = GaussianSpec::new(2.5, 8, 1).unwrap();
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        let obs = ObservableSpec::NormIndicator { sigma: 1.4, radius: 1.0 };
        assert!(qi_test(&obs, 0.1, &spec, &cfg, 10, 2).is_err());
    }

    #[test]
    fn small_balls_concentrate_at_zero() {
        let spec = GaussianSpec::new(2.5, 4, 1).unwrap();
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        let r = exp_moment(MomentKind::S, 2.0, Ball::default_for(2.5, 1e-9), &spec, &cfg, 100).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.details["ball_fraction"], 0.0);
        // the integrand at the only point of the degenerate ball
        let zero = SpectralField::zero(4);
        assert!(Ball::default_for(2.5, 1e-9).contains(&zero));
        assert_eq!((2.0 * correction_s(&zero, 2.5, 1, d(4)).abs()).exp(), 1.0);
    }

    #[test]
    fn cubic_q1_moment_is_the_ball_mass() {
        let spec = GaussianSpec::new(2.5, 4, 1).unwrap();
        let cfg = FlowConfig::new(1, d(4), 1e-2).unwrap();
        let r = exp_moment(MomentKind::Q1, 1.0, Ball::default_for(2.5, 1.0), &spec, &cfg, 200).unwrap();
        assert!(r.estimate <= 1.0 && r.estimate > 0.0);
    }
}
