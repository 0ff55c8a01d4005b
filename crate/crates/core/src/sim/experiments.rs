//! The six experiment families.
//!
//! Trials draw from streams keyed by experiment, trial index and, where it
//! matters, the power point, so a trial's randomness never depends on the
//! worker that ran it. Parallel results are collected in trial order.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentId};
use super::table::{num, opt, ResultTable};
use crate::channel::{deploy, gen_iid_set, paper_channels, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::{brute_force_pairing, build_instance, greedy_pairing, random_pairing, relay_ratio_approx, solve_pairing_dual};
use crate::rng::SeedPath;
use crate::transceiver::ser::LinkModel;
use crate::transceiver::{db_to_linear, generalized_zf, joint_design, ser_simulate, DesignProblem, ThpConfig};

fn problem(cfg: &ExperimentConfig, ch: ChannelSet, p_p_db: f64, p_t_db: f64) -> Result<DesignProblem> {
    Ok(DesignProblem::new(ch, db_to_linear(p_p_db), db_to_linear(p_t_db))?.with_config(cfg.design.clone()))
}

fn grid(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    cfg.p_p_db.iter().flat_map(|&pp| cfg.p_t_db.iter().map(move |&pt| (pp, pt))).collect()
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultTable> {
    match cfg.experiment {
        ExperimentId::PairingCompare => pairing_compare(cfg),
        ExperimentId::SmseVsPt => smse_vs_pt(cfg),
        ExperimentId::ConvergenceTrace => convergence_trace(cfg),
        ExperimentId::SmseCdf => smse_cdf(cfg),
        ExperimentId::SerCurve => ser_curve(cfg),
        ExperimentId::RelayRatioCurve => relay_ratio_curve(cfg),
    }
}

fn table(cfg: &ExperimentConfig, extra: &[&str]) -> ResultTable {
    ResultTable::new(cfg.experiment.as_str(), extra, cfg.seed, cfg.content_hash())
}

struct PairingRow {
    proposed: f64,
    greedy: f64,
    random: f64,
    brute: Option<f64>,
    iterations: usize,
    converged: bool,
}

/// Sum rates of the dual, greedy, random and (small `M`) exhaustive
/// pairings on random drops. Drops depend on `(M, trial)` only, so every
/// power point sees the same geometry.
pub fn pairing_compare(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = table(cfg, &["m", "proposed", "greedy", "random", "brute", "dual_iterations", "dual_converged"]);
    let root = SeedPath::new(cfg.seed).child("pairing_compare");
    let setup = &cfg.pairing;
    for (pp, pt) in grid(cfg) {
        for &m in &setup.m_values {
            let rows: Vec<Result<PairingRow>> = (0..cfg.n_trials)
                .into_par_iter()
                .map(|trial| {
                    let s = root.child(format!("m{m}")).child(format!("trial{trial}"));
                    let dep = deploy(m, setup.region_side, &mut s.child("deploy").rng())?;
                    let inst = build_instance(&dep, setup.n_t, db_to_linear(pt), db_to_linear(pp), &s.child("channels"))?;
                    let dual = solve_pairing_dual(&inst, &setup.dual, &mut s.child("dual").rng())?;
                    let brute = if m <= setup.brute_max_m { Some(brute_force_pairing(&inst)?.sum_rate) } else { None };
                    Ok(PairingRow {
                        proposed: dual.sum_rate,
                        greedy: greedy_pairing(&inst, &mut s.child("greedy").rng()).sum_rate,
                        random: random_pairing(&inst, &mut s.child("random").rng()).sum_rate,
                        brute,
                        iterations: dual.iterations,
                        converged: dual.converged,
                    })
                })
                .collect();
            let rows: Vec<PairingRow> = rows.into_iter().collect::<Result<_>>()?;
            for (trial, r) in rows.iter().enumerate() {
                t.push(pt, pp, trial, vec![
                    m.to_string(),
                    num(r.proposed),
                    num(r.greedy),
                    num(r.random),
                    opt(r.brute),
                    r.iterations.to_string(),
                    r.converged.to_string(),
                ]);
            }
            let n = rows.len() as f64;
            let mean = |f: &dyn Fn(&PairingRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
            let brute = if rows.iter().all(|r| r.brute.is_some()) { Some(mean(&|r| r.brute.unwrap())) } else { None };
            t.push(pt, pp, "mean", vec![
                m.to_string(),
                num(mean(&|r| r.proposed)),
                num(mean(&|r| r.greedy)),
                num(mean(&|r| r.random)),
                opt(brute),
                num(mean(&|r| r.iterations as f64)),
                num(rows.iter().filter(|r| r.converged).count() as f64 / n),
            ]);
        }
    }
    Ok(t)
}

/// Joint design against the generalized-ZF baseline on the fixed channels.
pub fn smse_vs_pt(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = table(cfg, &["smse_joint", "smse_gzf", "gap_joint", "gap_gzf", "iterations", "converged"]);
    for (pp, pt) in grid(cfg) {
        let p = problem(cfg, paper_channels(), pp, pt)?;
        let joint = joint_design(&p)?;
        let gzf = generalized_zf(&p, &cfg.gzf)?;
        t.push(pt, pp, 0, vec![
            num(joint.smse),
            num(gzf.smse),
            num(joint.gap),
            num(gzf.gap),
            joint.trace.len().to_string(),
            joint.converged.to_string(),
        ]);
    }
    Ok(t)
}

/// Per-iteration SMSE and coexistence gap of the joint design.
pub fn convergence_trace(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = table(cfg, &["iter", "smse", "gap", "relay_power", "su_power"]);
    for (pp, pt) in grid(cfg) {
        let p = problem(cfg, paper_channels(), pp, pt)?;
        let out = joint_design(&p)?;
        for r in &out.trace {
            t.push(pt, pp, 0, vec![r.iter.to_string(), num(r.smse), num(r.gap), num(r.relay_power), num(r.su_power)]);
        }
    }
    Ok(t)
}

/// Joint-design SMSE over i.i.d. Rayleigh channel draws. Draws depend on
/// the trial index only. Draws where the coexistence constraint cannot be
/// met are kept as rows with status `infeasible`.
pub fn smse_cdf(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = table(cfg, &["smse", "gap", "iterations", "status"]);
    let root = SeedPath::new(cfg.seed).child("smse_cdf");
    for (pp, pt) in grid(cfg) {
        let rows: Vec<Result<Vec<String>>> = (0..cfg.n_trials)
            .into_par_iter()
            .map(|trial| {
                let ch = gen_iid_set(cfg.n_t, &mut root.child(format!("trial{trial}")).rng());
                let p = problem(cfg, ch, pp, pt)?;
                match joint_design(&p) {
                    Ok(o) => Ok(vec![
                        num(o.smse),
                        num(o.gap),
                        o.trace.len().to_string(),
                        if o.converged { "converged" } else { "max_iter" }.to_string(),
                    ]),
                    Err(Error::Infeasible { .. }) => Ok(vec![String::new(), String::new(), "0".into(), "infeasible".into()]),
                    Err(e) => Err(e),
                }
            })
            .collect();
        for (trial, r) in rows.into_iter().enumerate() {
            t.push(pt, pp, trial, r?);
        }
    }
    Ok(t)
}

/// SER of the joint and baseline designs with common random numbers: both
/// designs see the same symbols, dither, PU signal and noise.
pub fn ser_curve(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = table(cfg, &[
        "ser_joint",
        "ci_low_joint",
        "ci_high_joint",
        "ser_gzf",
        "ci_low_gzf",
        "ci_high_gzf",
        "symbols",
    ]);
    let thp = ThpConfig::new(cfg.qam_order)?;
    let root = SeedPath::new(cfg.seed).child("ser_curve");
    for (pp, pt) in grid(cfg) {
        let p = problem(cfg, paper_channels(), pp, pt)?;
        let joint = joint_design(&p)?;
        let gzf = generalized_zf(&p, &cfg.gzf)?;
        let streams = root.child(format!("pp{pp}/pt{pt}"));
        let a = ser_simulate(&joint.design, &thp, &p, cfg.n_frames, &streams, LinkModel::default())?;
        let b = ser_simulate(&gzf.design, &thp, &p, cfg.n_frames, &streams, LinkModel::default())?;
        t.push(pt, pp, 0, vec![
            num(a.ser),
            num(a.ci_low),
            num(a.ci_high),
            num(b.ser),
            num(b.ci_low),
            num(b.ci_high),
            a.symbols.to_string(),
        ]);
    }
    Ok(t)
}

/// Fraction of `P_T` spent relaying and power left for SU data, for both
/// designs, next to the closed-form relay-ratio approximation.
pub fn relay_ratio_curve(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut t = table(cfg, &[
        "relay_ratio_joint",
        "su_power_joint",
        "relay_ratio_gzf",
        "su_power_gzf",
        "alpha_approx",
    ]);
    for (pp, pt) in grid(cfg) {
        let p = problem(cfg, paper_channels(), pp, pt)?;
        let joint = joint_design(&p)?;
        let gzf = generalized_zf(&p, &cfg.gzf)?;
        let s = &p.sigma.sigma;
        let approx = relay_ratio_approx(&p.channels.h14, &p.channels.h24, &p.sigma, p.p_t, None)?;
        t.push(pt, pp, 0, vec![
            num(joint.design.relay_power(s) / p.p_t),
            num(linalg::fro2(&joint.design.f)),
            num(gzf.design.relay_power(s) / p.p_t),
            num(linalg::fro2(&gzf.design.f)),
            num(approx),
        ]);
    }
    Ok(t)
}
