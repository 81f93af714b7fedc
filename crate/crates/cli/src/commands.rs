//! The experiments behind each subcommand.

use nls_qi::counting::{census_s, CountingQuery};
use nls_qi::energy::{energy_terms, identity_check_with};
use nls_qi::flow::{conserved, GalerkinFlow};
use nls_qi::report::{McReport, Verdict, SIGMA_LEVEL};
use nls_qi::sampler::{sample, sample_range};
use nls_qi::stats::{log_log_slope, MeanEstimate};
use nls_qi::transport::{default_quad_steps, exp_moment, qi_test_batch, s_tail, Ball};
use nls_qi::{Dyadic, LatticeIndex, Result};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{fmt_f64, Table};

/// A named output file.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub reports: Vec<McReport>,
    pub artifacts: Vec<Artifact>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.verdict == Verdict::Pass)
    }
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<RunOutput> {
    match experiment {
        Experiment::Sample => run_sample(cfg),
        Experiment::Evolve => run_evolve(cfg),
        Experiment::EnergyAudit => run_energy_audit(cfg),
        Experiment::Counting => run_counting(cfg),
        Experiment::QiTest => run_qi_test(cfg),
        Experiment::Moments => run_moments(cfg),
    }
}

fn run_sample(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.gaussian();
    let sigma = cfg.fl_sigma(cfg.sample.fl_sigma);
    let n = Dyadic::new(cfg.cutoff)?;
    let draws = sample_range(&spec, 0, cfg.n_samples);

    let mut table = Table::new(&["index", "mass", "hs_norm", "fl_norm", "wiener_norm", "correction_s"]);
    let rows: Vec<[f64; 5]> = draws
        .par_iter()
        .map(|u| {
            [
                u.sobolev_norm(0.0).powi(2),
                u.sobolev_norm(cfg.s),
                u.fourier_lebesgue_norm(sigma),
                u.wiener_norm(),
                nls_qi::energy::correction_s(u, cfg.s, cfg.k, n),
            ]
        })
        .collect();
    for (i, r) in rows.iter().enumerate() {
        let mut cells = vec![i.to_string()];
        cells.extend(r.iter().map(|&x| fmt_f64(x)));
        table.push(cells);
    }

    // worst mode of the second-moment check and of E g² = 0
    let mut worst = (0.0f64, LatticeIndex::ZERO, MeanEstimate::of(&[]), 0.0);
    let mut worst_pseudo = (0.0f64, LatticeIndex::ZERO, 0.0, 0.0);
    for m in LatticeIndex::ball(cfg.cutoff) {
        let target = m.bracket().powf(-2.0 * cfg.s);
        let abs2: Vec<f64> = draws.iter().map(|u| u.get(m).norm_sqr()).collect();
        let e = MeanEstimate::of(&abs2);
        let z = e.z_score(target);
        if z >= worst.0 {
            worst = (z, m, e, target);
        }
        let w = m.bracket().powf(cfg.s);
        for part in [0, 1] {
            let xs: Vec<f64> = draws
                .iter()
                .map(|u| {
                    let g2 = (u.get(m) * w).powi(2);
                    if part == 0 {
                        g2.re
                    } else {
                        g2.im
                    }
                })
                .collect();
            let e = MeanEstimate::of(&xs);
            let z = e.z_score(0.0);
            if z >= worst_pseudo.0 {
                worst_pseudo = (z, m, e.mean, e.stderr);
            }
        }
    }
    let (z, m, e, target) = worst;
    let covariance = McReport {
        name: "sample/covariance".into(),
        estimate: e.mean,
        stderr: e.stderr,
        n_samples: draws.len(),
        bound: Some(target),
        verdict: Verdict::from_bool(z <= SIGMA_LEVEL),
        details: Default::default(),
    }
    .detail("worst_n1", m.n1 as f64)
    .detail("worst_n2", m.n2 as f64)
    .detail("max_z", z)
    .detail("sigma_level", SIGMA_LEVEL);
    let (z, m, mean, se) = worst_pseudo;
    let pseudo = McReport {
        name: "sample/pseudo-covariance".into(),
        estimate: mean,
        stderr: se,
        n_samples: draws.len(),
        bound: Some(0.0),
        verdict: Verdict::from_bool(z <= SIGMA_LEVEL),
        details: Default::default(),
    }
    .detail("worst_n1", m.n1 as f64)
    .detail("worst_n2", m.n2 as f64)
    .detail("max_z", z)
    .detail("sigma_level", SIGMA_LEVEL);

    let mut artifacts = vec![table.into_artifact("samples.csv")?];
    for (i, u) in draws.iter().take(cfg.sample.snapshots).enumerate() {
        artifacts.push(Artifact {
            name: format!("snapshot-{i:04}.json"),
            bytes: u.to_snapshot_string()?.into_bytes(),
        });
    }
    Ok(RunOutput {
        reports: vec![covariance, pseudo],
        artifacts,
    })
}

fn run_evolve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let flow = GalerkinFlow::new(cfg.flow())?;
    let sigma = cfg.fl_sigma(cfg.evolve.fl_sigma);
    let u0 = sample(&cfg.gaussian(), 0);
    let traj = flow.evolve(&u0, cfg.t)?;
    let c0 = conserved(&u0, cfg.k);

    let mut table = Table::new(&["t", "mass", "hamiltonian", "hs_norm", "fl_norm"]);
    let mut mass_drift: f64 = 0.0;
    let mut ham_drift: f64 = 0.0;
    let last = traj.states.len() - 1;
    for (i, (t, u)) in traj.times.iter().zip(&traj.states).enumerate() {
        let c = conserved(u, cfg.k);
        mass_drift = mass_drift.max((c.mass - c0.mass).abs() / c0.mass);
        ham_drift = ham_drift.max((c.hamiltonian - c0.hamiltonian).abs() / c0.hamiltonian);
        if i % cfg.evolve.record_every == 0 || i == last {
            table.push(vec![
                fmt_f64(*t),
                fmt_f64(c.mass),
                fmt_f64(c.hamiltonian),
                fmt_f64(u.sobolev_norm(cfg.s)),
                fmt_f64(u.fourier_lebesgue_norm(sigma)),
            ]);
        }
    }
    let drift = mass_drift.max(ham_drift);
    let report = McReport {
        name: "evolve/drift".into(),
        estimate: drift,
        stderr: 0.0,
        n_samples: 1,
        bound: Some(cfg.evolve.drift_tolerance),
        verdict: Verdict::from_bool(drift <= cfg.evolve.drift_tolerance),
        details: Default::default(),
    }
    .detail("mass_drift", mass_drift)
    .detail("hamiltonian_drift", ham_drift)
    .detail("steps", last as f64);
    Ok(RunOutput {
        reports: vec![report],
        artifacts: vec![
            table.into_artifact("evolve.csv")?,
            Artifact {
                name: "final.json".into(),
                bytes: traj.states[last].to_snapshot_string()?.into_bytes(),
            },
        ],
    })
}

fn run_energy_audit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let flow = GalerkinFlow::new(cfg.flow())?;
    let n = Dyadic::new(cfg.cutoff)?;
    let ladder = &cfg.energy_audit.dt_fd;
    let draws = sample_range(&cfg.gaussian(), 0, cfg.energy_audit.n_fields);

    struct FieldAudit {
        terms: nls_qi::energy::EnergyBreakdown,
        checks: Vec<nls_qi::energy::IdentityCheck>,
    }
    let audits: Vec<FieldAudit> = draws
        .par_iter()
        .map(|u| -> Result<FieldAudit> {
            Ok(FieldAudit {
                terms: energy_terms(u, cfg.s, cfg.k, n),
                checks: ladder
                    .iter()
                    .map(|&h| identity_check_with(&flow, u, cfg.s, h))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;

    let mut terms = Table::new(&[
        "field", "l2s", "correction", "I", "II", "III", "IV", "V", "VI", "VII", "truncation", "q1", "q2", "term_sum",
    ]);
    let mut residuals = Table::new(&["field", "dt_fd", "finite_difference", "analytic", "residual"]);
    let mut min_order = f64::INFINITY;
    let mut worst_relative: f64 = 0.0;
    for (i, a) in audits.iter().enumerate() {
        let b = &a.terms;
        let mut cells = vec![i.to_string(), fmt_f64(b.l2s), fmt_f64(b.correction)];
        cells.extend(b.terms().iter().map(|(_, v)| fmt_f64(*v)));
        cells.extend([fmt_f64(b.q1), fmt_f64(b.q2), fmt_f64(b.term_sum())]);
        terms.push(cells);
        for c in &a.checks {
            residuals.push(vec![
                i.to_string(),
                fmt_f64(c.dt_fd),
                fmt_f64(c.finite_difference),
                fmt_f64(c.analytic),
                fmt_f64(c.residual),
            ]);
        }
        let res: Vec<f64> = a.checks.iter().map(|c| c.residual).collect();
        min_order = min_order.min(log_log_slope(ladder, &res));
        let finest = a.checks.last().expect("ladder has at least two steps");
        worst_relative = worst_relative.max(finest.residual / (finest.analytic.abs() + 1.0));
    }
    let report = McReport {
        name: "energy-audit/order".into(),
        estimate: min_order,
        stderr: 0.0,
        n_samples: audits.len(),
        bound: Some(cfg.energy_audit.min_order),
        verdict: Verdict::from_bool(min_order >= cfg.energy_audit.min_order),
        details: Default::default(),
    }
    .detail("max_relative_residual_finest", worst_relative)
    .detail("finest_dt_fd", *ladder.last().expect("validated ladder"));
    Ok(RunOutput {
        reports: vec![report],
        artifacts: vec![terms.into_artifact("terms.csv")?, residuals.into_artifact("residuals.csv")?],
    })
}

fn run_counting(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let queries = cfg.counting_queries();
    let mut counts = Table::new(&["n1", "n2", "n3", "m1", "m2", "sign1", "sign2", "sign3", "kappa", "count"]);
    let mut sup = 0u64;
    let mut excluded = 0u64;
    for q in &queries {
        let census = census_s(q)?;
        excluded += census.excluded;
        sup = sup.max(census.sup());
        for (kappa, count) in &census.by_kappa {
            let mut cells: Vec<String> = q.shells.iter().map(|n| n.get().to_string()).collect();
            cells.extend([q.m.n1.to_string(), q.m.n2.to_string()]);
            cells.extend(q.signs.iter().map(|s| s.to_string()));
            cells.extend([kappa.to_string(), count.to_string()]);
            counts.push(cells);
        }
    }
    let mut reports = vec![McReport {
        name: "counting/sup".into(),
        estimate: sup as f64,
        stderr: 0.0,
        n_samples: queries.len(),
        bound: None,
        verdict: Verdict::Pass,
        details: Default::default(),
    }
    .detail("excluded", excluded as f64)];
    let mut artifacts = vec![counts.into_artifact("counts.csv")?];

    let scales = &cfg.counting.scales;
    if !scales.is_empty() {
        let mut table = Table::new(&["N", "sup_count"]);
        let mut sups = Vec::new();
        for &n in scales {
            let shell = Dyadic::new(n)?;
            let mut best = 0u64;
            for q in &queries {
                let query = CountingQuery {
                    shells: vec![shell; 3],
                    ..q.clone()
                };
                best = best.max(census_s(&query)?.sup());
            }
            table.push(vec![n.to_string(), best.to_string()]);
            sups.push(best as f64);
        }
        let xs: Vec<f64> = scales.iter().map(|&n| n as f64).collect();
        let slope = if xs.len() >= 2 { log_log_slope(&xs, &sups) } else { f64::NAN };
        reports.push(McReport {
            name: "counting/exponent".into(),
            estimate: slope,
            stderr: 0.0,
            n_samples: xs.len(),
            bound: Some(cfg.counting.max_exponent),
            verdict: Verdict::from_bool(slope <= cfg.counting.max_exponent),
            details: Default::default(),
        });
        artifacts.push(table.into_artifact("exponent.csv")?);
    }
    Ok(RunOutput { reports, artifacts })
}

fn run_qi_test(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let flow_cfg = cfg.flow();
    let quad = cfg.qi_test.quad_steps.unwrap_or_else(|| default_quad_steps(cfg.t, cfg.dt));
    let reports = qi_test_batch(&cfg.qi_test.observables, cfg.t, &cfg.gaussian(), &flow_cfg, cfg.n_samples, quad)?;
    let mut table = Table::new(&[
        "name",
        "estimate",
        "stderr",
        "pushforward_mean",
        "reweighted_mean",
        "effective_samples",
        "verdict",
    ]);
    for r in &reports {
        table.push(vec![
            r.name.clone(),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            fmt_f64(r.details["pushforward_mean"]),
            fmt_f64(r.details["reweighted_mean"]),
            fmt_f64(r.details["effective_samples"]),
            r.verdict.to_string(),
        ]);
    }
    Ok(RunOutput {
        reports,
        artifacts: vec![table.into_artifact("qi.csv")?],
    })
}

fn run_moments(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let m = &cfg.moments;
    let ball = Ball {
        sigma: cfg.fl_sigma(m.sigma),
        radius: m.radius,
    };
    let mut reports = vec![exp_moment(m.kind, m.p, ball, &cfg.gaussian(), &cfg.flow(), cfg.n_samples)?];
    let mut artifacts = Vec::new();
    if !m.tail_scales.is_empty() {
        let scales: Vec<Dyadic> = m.tail_scales.iter().map(|&n| Dyadic::new(n)).collect::<Result<_>>()?;
        let top = m.tail_scales.iter().max().copied().unwrap_or(1);
        let spec = nls_qi::sampler::GaussianSpec::new(cfg.s, 2 * top, cfg.seed)?;
        let rows = s_tail(&spec, cfg.k, &scales, ball, cfg.n_samples)?;
        let mut table = Table::new(&["N", "mean", "stderr", "n_inside"]);
        for r in &rows {
            table.push(vec![r.n.to_string(), fmt_f64(r.mean), fmt_f64(r.stderr), r.n_inside.to_string()]);
        }
        let decreasing = rows.windows(2).all(|w| w[1].mean < w[0].mean);
        let last = rows.last().expect("nonempty scales");
        reports.push(
            McReport {
                name: "moments/s-tail".into(),
                estimate: last.mean,
                stderr: last.stderr,
                n_samples: cfg.n_samples,
                bound: None,
                verdict: Verdict::from_bool(decreasing),
                details: Default::default(),
            }
            .detail("first_mean", rows[0].mean)
            .detail("inside", last.n_inside as f64),
        );
        artifacts.push(table.into_artifact("tail.csv")?);
    }
    Ok(RunOutput { reports, artifacts })
}
