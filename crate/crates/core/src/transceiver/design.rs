//! The convex subproblem for `(A, F)` and the alternating joint design.
//!
//! The coexistence constraint is handled by successive convex
//! approximation. `ln det(I + X + GΣG^H)` is bounded below by replacing the
//! matrix-convex argument with its first-order expansion, and
//! `ln det(I + X)` is bounded above by its tangent plane. Both bounds are
//! tight at the expansion point, so every accepted iterate keeps the true
//! PU rate at or above its stand-alone value.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::coexist::{coexistence_gap, RelaxedConstraintSet};
use super::mmse::{mmse_receiver, smse, solve_feedback};
use super::{DesignProblem, TransceiverDesign};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::solver::{self, Constraint, ConvexProgram, LogDetAffine, Quadratic, RVec, SolveReport, SolverTolerances, Status};

/// How the coexistence constraint is convexified around the expansion point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    /// `ln det` of the linearized interference-plus-signal matrix.
    #[default]
    LogDet,
    /// `ln(1 + t1 + t2)` with the trace quadratics linearized, a looser
    /// bound through `det(I + M) ≥ 1 + tr M`.
    TraceBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConfig {
    pub surrogate: SurrogateKind,
    /// Band on the coexistence gap, in bits.
    pub tol_gap: f64,
    /// Relative SMSE decrease below which the iteration has stalled.
    pub tol_smse: f64,
    pub max_iter: usize,
    pub solver: SolverTolerances,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self { surrogate: SurrogateKind::LogDet, tol_gap: 1e-2, tol_smse: 1e-4, max_iter: 500, solver: SolverTolerances::default() }
    }
}

/// `(Ã, F̃)` around which the constraint is expanded; `F̃2 = F̃ F̃^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionPoint {
    pub a: CMat,
    pub f: CMat,
}

impl ExpansionPoint {
    pub fn zero(n: usize) -> Self {
        Self { a: linalg::zeros(n, n), f: linalg::zeros(n, n) }
    }

    pub fn f2(&self) -> CMat {
        &self.f * self.f.adjoint()
    }
}

/// Real decision vector `[Re z; Im z]` with `z = [vec A; vec F]`.
pub fn pack(a: &CMat, f: &CMat) -> RVec {
    let z = CVec::from_iterator(a.len() + f.len(), a.iter().chain(f.iter()).copied());
    solver::stack_re_im(&z)
}

pub fn unpack(x: &RVec, n: usize) -> (CMat, CMat) {
    let z = solver::unstack_re_im(x);
    let nn = n * n;
    (linalg::unvec(&z.as_slice()[..nn], n, n), linalg::unvec(&z.as_slice()[nn..], n, n))
}

fn hstack(l: &CMat, r: &CMat) -> CMat {
    let mut m = linalg::zeros(l.nrows(), l.ncols() + r.ncols());
    m.view_mut((0, 0), l.shape()).copy_from(l);
    m.view_mut((0, l.ncols()), r.shape()).copy_from(r);
    m
}

fn blockdiag(l: &CMat, r: &CMat) -> CMat {
    let mut m = linalg::zeros(l.nrows() + r.nrows(), l.ncols() + r.ncols());
    m.view_mut((0, 0), l.shape()).copy_from(l);
    m.view_mut(l.shape(), r.shape()).copy_from(r);
    m
}

/// `‖W H23 F − C‖² + ‖W‖²` as a quadratic in the decision vector.
fn objective(problem: &DesignProblem, w: &CMat, cm: &CMat) -> Quadratic {
    let n = problem.n_t();
    let map = hstack(&linalg::zeros(n * n, n * n), &linalg::kron(&linalg::eye(n), &(w * &problem.channels.h23)));
    Quadratic::complex_least_squares(&map, &linalg::vec_mat(cm)).shift(linalg::fro2(w))
}

fn relay_power(problem: &DesignProblem, sigma_half: &CMat) -> Quadratic {
    let n = problem.n_t();
    let map = blockdiag(&linalg::kron(&sigma_half.transpose(), &linalg::eye(n)), &linalg::zeros(n * n, n * n));
    Quadratic::complex_least_squares(&map, &CVec::zeros(2 * n * n))
}

/// `tr(F F^H) + tr(A Σ A^H) − P_T`.
fn power(problem: &DesignProblem, sigma_half: &CMat) -> Quadratic {
    let n = problem.n_t();
    let map = blockdiag(&linalg::kron(&sigma_half.transpose(), &linalg::eye(n)), &linalg::eye(n * n));
    Quadratic::complex_least_squares(&map, &CVec::zeros(2 * n * n)).shift(-problem.p_t)
}

/// The convex surrogate of the coexistence constraint at `point`,
/// as `g(x) ≥ c0` in nats.
pub fn coexistence_surrogate(problem: &DesignProblem, point: &ExpansionPoint, kind: SurrogateKind) -> Result<(LogDetAffine, f64)> {
    let ch = &problem.channels;
    let n = problem.n_t();
    let sigma = &problem.sigma.sigma;
    let set = RelaxedConstraintSet::new(&point.f2(), ch, &problem.sigma)?;
    let k_half = linalg::sqrtm_psd(&set.k)?;
    let pen_map = hstack(&linalg::zeros(n * n, n * n), &linalg::kron(&linalg::eye(n), &(&k_half * &ch.h24)));
    let penalty = Quadratic::complex_least_squares(&pen_map, &CVec::zeros(n * n));
    let dim = 4 * n * n;
    let g = match kind {
        SurrogateKind::LogDet => {
            let (at, ft) = (&point.a, &point.f);
            let gt = &ch.h14 + &ch.h24 * at;
            let xt = &ch.h24 * ft * ft.adjoint() * ch.h24.adjoint();
            let gsg = &gt * sigma * gt.adjoint();
            let cross = &gt * sigma * ch.h14.adjoint();
            let base = linalg::hermitian_part(&(linalg::eye(n) - &xt + &cross + cross.adjoint() - gsg));
            let linear = |a: &CMat, f: &CMat| -> CMat {
                let ff = ft * f.adjoint();
                let ag = &ch.h24 * a * sigma * gt.adjoint();
                &ch.h24 * (&ff + ff.adjoint()) * ch.h24.adjoint() + &ag + ag.adjoint()
            };
            let coeffs = (0..dim)
                .map(|i| {
                    let mut e = RVec::zeros(dim);
                    e[i] = 1.0;
                    let (a, f) = unpack(&e, n);
                    linalg::hermitian_part(&linear(&a, &f))
                })
                .collect();
            LogDetAffine { base, coeffs, penalty }
        }
        SurrogateKind::TraceBound => {
            let sigma_half = linalg::sqrtm_psd(sigma)?;
            let top = hstack(&linalg::zeros(n * n, n * n), &linalg::kron(&linalg::eye(n), &ch.h24));
            let bottom = hstack(&linalg::kron(&sigma_half.transpose(), &ch.h24), &linalg::zeros(n * n, n * n));
            let mut map = linalg::zeros(2 * n * n, 2 * n * n);
            map.view_mut((0, 0), top.shape()).copy_from(&top);
            map.view_mut((n * n, 0), bottom.shape()).copy_from(&bottom);
            let mut target = CVec::zeros(2 * n * n);
            let off = -linalg::vec_mat(&(&ch.h14 * &sigma_half));
            target.rows_mut(n * n, n * n).copy_from(&off);
            let q = Quadratic::complex_least_squares(&map, &target);
            let xt = pack(&point.a, &point.f);
            let grad = q.gradient(&xt);
            let base = CMat::from_element(1, 1, c(1.0 + q.value(&xt) - grad.dot(&xt), 0.0));
            let coeffs = grad.iter().map(|&gi| CMat::from_element(1, 1, c(gi, 0.0))).collect();
            LogDetAffine { base, coeffs, penalty }
        }
    };
    Ok((g, set.c0))
}

#[derive(Clone, Debug)]
pub struct SubproblemResult {
    pub a: CMat,
    pub f: CMat,
    /// `F F^H`.
    pub f2: CMat,
    /// Objective at the returned point.
    pub t0: f64,
    /// `‖H24 F‖²`.
    pub t1: f64,
    /// `tr(G Σ G^H)`.
    pub t2: f64,
    /// Power and coexistence constraint values in `≤ 0` form.
    pub residuals: Vec<f64>,
    pub status: Status,
    /// The expansion point was kept because the solve did not improve on it.
    pub fell_back: bool,
    pub report: SolveReport,
}

/// Minimizes the SMSE over `(A, F)` for fixed `W` and `C` under the power
/// budget and the convexified coexistence constraint, then picks the
/// least relay power among the minimizers.
pub fn solve_subproblem(problem: &DesignProblem, w: &CMat, cm: &CMat, point: &ExpansionPoint) -> Result<SubproblemResult> {
    let n = problem.n_t();
    let ch = &problem.channels;
    let sigma_half = linalg::sqrtm_psd(&problem.sigma.sigma)?;
    let obj = objective(problem, w, cm);
    let mut cons = vec![Constraint::Quadratic(power(problem, &sigma_half))];
    let coupled = linalg::fro2(&ch.h24) > 0.0;
    if coupled {
        let (g, c0) = coexistence_surrogate(problem, point, problem.config.surrogate)?;
        cons.push(Constraint::Concave { g: Arc::new(g), bound: c0 });
    }
    let tol = problem.config.solver;
    let x_tilde = pack(&point.a, &point.f);
    let mut prog = ConvexProgram::new(obj.clone());
    prog.constraints = cons.clone();
    let stage1 = solver::solve(&prog, &x_tilde, &tol)?;
    if stage1.status == Status::Infeasible {
        let certificate = stage1.phase1_violation.unwrap_or(f64::INFINITY);
        return Err(Error::Infeasible {
            reason: "coexistence constraint unattainable within the power budget".into(),
            certificate,
        });
    }
    let feasible = |x: &RVec| cons.iter().all(|c| c.value(x).is_some_and(|v| v <= 1e-9));
    let mut x = stage1.x_vec();
    let mut fell_back = false;
    let tilde_ok = feasible(&x_tilde);
    if !feasible(&x) || (tilde_ok && obj.value(&x) > obj.value(&x_tilde)) {
        if !tilde_ok {
            return Err(Error::Infeasible {
                reason: "subproblem returned an infeasible point".into(),
                certificate: stage1.residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
        x = x_tilde.clone();
        fell_back = true;
    }

    let t0 = obj.value(&x);
    let slack = 1e-7 * t0.abs().max(1.0);
    let mut prog2 = ConvexProgram::new(relay_power(problem, &sigma_half));
    prog2.constraints = cons.clone();
    prog2.constraints.push(Constraint::Quadratic(obj.shift(-(t0 + slack))));
    let tol2 = SolverTolerances { phase1_margin: 0.1 * slack, ..tol };
    if let Ok(stage2) = solver::solve(&prog2, &x, &tol2) {
        let x2 = stage2.x_vec();
        if stage2.status != Status::Infeasible && feasible(&x2) && obj.value(&x2) <= t0 + slack {
            x = x2;
        }
    }

    let (a, f) = unpack(&x, n);
    let set_g = &ch.h14 + &ch.h24 * &a;
    let residuals = cons.iter().map(|c| c.value(&x).unwrap_or(f64::INFINITY)).collect();
    Ok(SubproblemResult {
        t0: obj.value(&x),
        t1: linalg::fro2(&(&ch.h24 * &f)),
        t2: linalg::fro2(&(&set_g * &sigma_half)),
        f2: &f * f.adjoint(),
        a,
        f,
        residuals,
        status: stage1.status,
        fell_back,
        report: stage1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub smse: f64,
    /// Coexistence gap in bits.
    pub gap: f64,
    /// `tr(A Σ A^H)`.
    pub relay_power: f64,
    /// `tr(F F^H)`.
    pub su_power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Gap inside the band and SMSE stalled.
    Converged,
    /// The gap fell below the band; the previous iterate is returned.
    Crossover,
    MaxIter,
    /// A later subproblem failed; the best earlier iterate is returned.
    SubproblemFailed,
}

#[derive(Clone, Debug)]
pub struct JointOutcome {
    pub design: TransceiverDesign,
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
    /// False when the returned design is a fallback iterate.
    pub converged: bool,
    pub smse: f64,
    pub gap: f64,
}

/// Alternates the `(A, F)` subproblem with the closed-form `B` and `W`
/// updates until the coexistence gap settles in its band.
pub fn joint_design(problem: &DesignProblem) -> Result<JointOutcome> {
    let n = problem.n_t();
    let ch = &problem.channels;
    let cfg = &problem.config;
    if cfg.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    // With F = 0 the MMSE receiver vanishes and the first subproblem would
    // be flat in F, so W starts from equal power on the H23 eigenmodes.
    let v23 = linalg::svd(&ch.h23)?.v;
    let f_ref = &v23 * c((problem.p_t / n as f64).sqrt(), 0.0);
    let mut w = mmse_receiver(&f_ref, &ch.h23, &linalg::zeros(n, n))?;
    let mut cm = linalg::eye(n);
    let mut point = ExpansionPoint::zero(n);
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut iterates: Vec<TransceiverDesign> = Vec::new();

    let best_feasible = |trace: &[TraceRow], iterates: &[TransceiverDesign]| {
        trace
            .iter()
            .zip(iterates)
            .filter(|(r, _)| r.gap >= -cfg.tol_gap)
            .min_by(|(a, _), (b, _)| a.smse.total_cmp(&b.smse))
            .map(|(r, d)| (*r, d.clone()))
    };
    let finish = |design: TransceiverDesign, row: TraceRow, trace: Vec<TraceRow>, termination: Termination| JointOutcome {
        design,
        trace,
        converged: matches!(termination, Termination::Converged | Termination::Crossover),
        termination,
        smse: row.smse,
        gap: row.gap,
    };

    for iter in 1..=cfg.max_iter {
        let sub = match solve_subproblem(problem, &w, &cm, &point) {
            Ok(s) => s,
            Err(e) if iter == 1 => return Err(e),
            Err(_) => {
                let (row, d) = best_feasible(&trace, &iterates).expect("iteration 1 succeeded");
                return Ok(finish(d, row, trace, Termination::SubproblemFailed));
            }
        };
        let fb = solve_feedback(&sub.f, &ch.h23)?;
        w = mmse_receiver(&sub.f, &ch.h23, &fb.b)?;
        let design = TransceiverDesign { a: sub.a.clone(), b: fb.b, f: sub.f.clone(), w: w.clone() };
        cm = design.c();
        let row = TraceRow {
            iter,
            smse: smse(&design, &ch.h23),
            gap: coexistence_gap(&design.a, &design.f, ch, &problem.sigma)?,
            relay_power: design.relay_power(&problem.sigma.sigma),
            su_power: linalg::fro2(&design.f),
        };
        point = ExpansionPoint { a: sub.a, f: sub.f };
        if row.gap < -cfg.tol_gap {
            if let (Some(prev_row), Some(prev)) = (trace.last().copied(), iterates.last().cloned()) {
                trace.push(row);
                return Ok(finish(prev, prev_row, trace, Termination::Crossover));
            }
        }
        let stalled = trace.last().is_some_and(|p| p.smse - row.smse <= cfg.tol_smse * row.smse);
        trace.push(row);
        iterates.push(design);
        if row.gap.abs() <= cfg.tol_gap && stalled {
            let d = iterates.pop().unwrap();
            return Ok(finish(d, row, trace, Termination::Converged));
        }
    }
    match best_feasible(&trace, &iterates) {
        Some((row, d)) => Ok(finish(d, row, trace, Termination::MaxIter)),
        None => Err(Error::Infeasible {
            reason: "no iterate satisfied the coexistence band".into(),
            certificate: trace.iter().map(|r| -r.gap).fold(f64::INFINITY, f64::min),
        }),
    }
}
