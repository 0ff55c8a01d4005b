//! Log-barrier interior-point solver for small smooth convex programs.
//!
//! Programs have a convex quadratic objective, convex quadratic `≤ 0`
//! constraints, smooth concave `g(x) ≥ c` constraints and optional linear
//! equalities. Feasibility comes from a phase-I problem on the maximum
//! violation; phase II runs damped Newton centering on `t·f0 − Σ ln(−f_i)`
//! with a geometric schedule on `t`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// `½ xᵀPx + qᵀx + r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    pub p: RMat,
    pub q: RVec,
    pub r: f64,
}

impl Quadratic {
    pub fn new(p: RMat, q: RVec, r: f64) -> Self {
        let p = (&p + p.transpose()) * 0.5;
        Self { p, q, r }
    }

    pub fn zero(n: usize) -> Self {
        Self { p: RMat::zeros(n, n), q: RVec::zeros(n), r: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn value(&self, x: &RVec) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x) + self.r
    }

    pub fn gradient(&self, x: &RVec) -> RVec {
        &self.p * x + &self.q
    }

    pub fn add(&self, other: &Quadratic) -> Quadratic {
        Quadratic { p: &self.p + &other.p, q: &self.q + &other.q, r: self.r + other.r }
    }

    pub fn scale(&self, s: f64) -> Quadratic {
        Quadratic { p: &self.p * s, q: &self.q * s, r: self.r * s }
    }

    pub fn shift(&self, dr: f64) -> Quadratic {
        Quadratic { r: self.r + dr, ..self.clone() }
    }

    /// `‖M z − c‖²` for `x = [Re z; Im z]`.
    pub fn complex_least_squares(m: &CMat, c: &CVec) -> Quadratic {
        let mr = realify(m);
        let cr = stack_re_im(c);
        let p = mr.transpose() * &mr * 2.0;
        let q = -(mr.transpose() * &cr) * 2.0;
        Quadratic { p, q, r: cr.norm_squared() }
    }
}

/// Real form `[Re M, −Im M; Im M, Re M]` of a complex linear map.
pub fn realify(m: &CMat) -> RMat {
    let (r, c) = m.shape();
    let mut out = RMat::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, c + j)] = -z.im;
            out[(r + i, j)] = z.im;
            out[(r + i, c + j)] = z.re;
        }
    }
    out
}

/// `[Re z; Im z]`.
pub fn stack_re_im(z: &CVec) -> RVec {
    let n = z.len();
    RVec::from_fn(2 * n, |i, _| if i < n { z[i].re } else { z[i - n].im })
}

/// Inverse of [`stack_re_im`].
pub fn unstack_re_im(x: &RVec) -> CVec {
    let n = x.len() / 2;
    CVec::from_fn(n, |i, _| C64::new(x[i], x[n + i]))
}

/// A smooth concave function with value, gradient and Hessian.
pub trait ConcaveFn: Send + Sync {
    fn dim(&self) -> usize;
    /// `None` outside the function's domain.
    fn value(&self, x: &RVec) -> Option<f64>;
    fn gradient(&self, x: &RVec) -> RVec;
    /// Defaults to central differences of the gradient.
    fn hessian(&self, x: &RVec) -> RMat {
        let n = self.dim();
        let mut h = RMat::zeros(n, n);
        for j in 0..n {
            let step = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let col = (self.gradient(&xp) - self.gradient(&xm)) / (2.0 * step);
            h.set_column(j, &col);
        }
        (&h + h.transpose()) * 0.5
    }
}

/// `ln det(N0 + Σ x_i E_i) − penalty(x)` with Hermitian `N0`, `E_i` and a
/// convex quadratic penalty. Concave on the set where the matrix is
/// positive definite.
#[derive(Clone, Debug)]
pub struct LogDetAffine {
    pub base: CMat,
    pub coeffs: Vec<CMat>,
    pub penalty: Quadratic,
}

impl LogDetAffine {
    pub fn matrix(&self, x: &RVec) -> CMat {
        let mut n = self.base.clone();
        for (xi, e) in x.iter().zip(&self.coeffs) {
            if *xi != 0.0 {
                n += e * C64::new(*xi, 0.0);
            }
        }
        crate::linalg::hermitian_part(&n)
    }

    fn inverse_at(&self, x: &RVec) -> Option<CMat> {
        crate::linalg::inv_hpd(&self.matrix(x)).ok()
    }
}

impl ConcaveFn for LogDetAffine {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn value(&self, x: &RVec) -> Option<f64> {
        crate::linalg::ln_det_hpd(&self.matrix(x)).map(|v| v - self.penalty.value(x))
    }

    fn gradient(&self, x: &RVec) -> RVec {
        let ninv = self.inverse_at(x).expect("gradient evaluated inside the domain");
        let mut g = -self.penalty.gradient(x);
        for (i, e) in self.coeffs.iter().enumerate() {
            g[i] += (&ninv * e).trace().re;
        }
        g
    }

    fn hessian(&self, x: &RVec) -> RMat {
        let ninv = self.inverse_at(x).expect("hessian evaluated inside the domain");
        let k: Vec<CMat> = self.coeffs.iter().map(|e| &ninv * e).collect();
        let n = k.len();
        let mut h = -self.penalty.p.clone();
        for i in 0..n {
            for j in i..n {
                let v = -(&k[i] * &k[j]).trace().re;
                h[(i, j)] += v;
                if i != j {
                    h[(j, i)] += v;
                }
            }
        }
        h
    }
}

#[derive(Clone)]
pub enum Constraint {
    /// `q(x) ≤ 0`.
    Quadratic(Quadratic),
    /// `g(x) ≥ bound`.
    Concave { g: Arc<dyn ConcaveFn>, bound: f64 },
}

impl std::fmt::Debug for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Constraint::Quadratic(q) => f.debug_tuple("Quadratic").field(&q.dim()).finish(),
            Constraint::Concave { bound, .. } => f.debug_struct("Concave").field("bound", bound).finish(),
        }
    }
}

impl Constraint {
    /// Value in `≤ 0` form; `None` outside the domain.
    pub fn value(&self, x: &RVec) -> Option<f64> {
        match self {
            Constraint::Quadratic(q) => Some(q.value(x)),
            Constraint::Concave { g, bound } => g.value(x).map(|v| bound - v),
        }
    }

    pub fn gradient(&self, x: &RVec) -> RVec {
        match self {
            Constraint::Quadratic(q) => q.gradient(x),
            Constraint::Concave { g, .. } => -g.gradient(x),
        }
    }

    pub fn hessian(&self, x: &RVec) -> RMat {
        match self {
            Constraint::Quadratic(q) => q.p.clone(),
            Constraint::Concave { g, .. } => -g.hessian(x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexProgram {
    pub n: usize,
    pub objective: Quadratic,
    pub constraints: Vec<Constraint>,
    /// `A x = b`.
    pub equalities: Option<(RMat, RVec)>,
}

impl ConvexProgram {
    pub fn new(objective: Quadratic) -> Self {
        Self { n: objective.dim(), objective, constraints: Vec::new(), equalities: None }
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    fn validate(&self) -> Result<()> {
        let psd = |p: &RMat| {
            let lo = p.clone().symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let scale = p.amax().max(1.0);
            lo >= -1e-9 * scale
        };
        if self.objective.dim() != self.n {
            return Err(Error::Dimension("objective dimension".into()));
        }
        if !psd(&self.objective.p) {
            return Err(Error::InvalidArgument("objective Hessian is not PSD".into()));
        }
        for c in &self.constraints {
            match c {
                Constraint::Quadratic(q) => {
                    if q.dim() != self.n || !psd(&q.p) {
                        return Err(Error::InvalidArgument("quadratic constraint is not convex".into()));
                    }
                }
                Constraint::Concave { g, .. } => {
                    if g.dim() != self.n {
                        return Err(Error::Dimension("concave constraint dimension".into()));
                    }
                }
            }
        }
        if let Some((a, b)) = &self.equalities {
            if a.ncols() != self.n || a.nrows() != b.len() {
                return Err(Error::Dimension("equality constraint shape".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverTolerances {
    /// Stop when the barrier duality gap `m/t` falls below this.
    pub gap: f64,
    /// Newton decrement threshold `λ²/2` for centering.
    pub newton: f64,
    /// Primal feasibility, stationarity and complementarity required for
    /// an `Optimal` status.
    pub kkt: f64,
    /// Phase I stops once every constraint holds with this much slack.
    pub phase1_margin: f64,
    pub t0: f64,
    pub mu: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            gap: 1e-10,
            newton: 1e-12,
            kkt: 1e-6,
            phase1_margin: 1e-6,
            t0: 1.0,
            mu: 20.0,
            max_newton: 100,
            max_outer: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `‖∇f0 + Σ λ_i ∇f_i + Aᵀν‖`.
    pub stationarity: f64,
    /// Largest constraint violation (inequalities and equalities).
    pub primal: f64,
    /// `max |λ_i f_i|`.
    pub complementarity: f64,
    pub multipliers: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Constraint values in `≤ 0` form.
    pub residuals: Vec<f64>,
    pub kkt: KktReport,
    /// Total Newton steps over both phases.
    pub iterations: usize,
    pub status: Status,
    /// Phase-I optimum of the maximum violation when it was needed.
    pub phase1_violation: Option<f64>,
    /// Objective after each outer barrier iteration.
    pub outer_objectives: Vec<f64>,
}

impl SolveReport {
    pub fn x_vec(&self) -> RVec {
        RVec::from_vec(self.x.clone())
    }
}

/// Solves `L x = b` for symmetric positive definite `L`, regularizing when
/// the factorization fails.
fn spd_solve(h: &RMat, g: &RVec) -> RVec {
    let scale = h.diagonal().amax().max(1.0);
    let mut reg = 0.0;
    loop {
        let mut hh = h.clone();
        for i in 0..hh.nrows() {
            hh[(i, i)] += reg;
        }
        if let Some(ch) = hh.cholesky() {
            return ch.solve(g);
        }
        reg = if reg == 0.0 { 1e-12 * scale } else { reg * 10.0 };
        if reg > 1e6 * scale {
            return RVec::zeros(g.len());
        }
    }
}

/// One smooth function the Newton loop minimizes.
trait Smooth {
    fn value(&self, x: &RVec) -> Option<f64>;
    fn grad_hess(&self, x: &RVec) -> (RVec, RMat);
}

struct Barrier<'a> {
    t: f64,
    obj: &'a Quadratic,
    cons: &'a [Constraint],
}

impl Smooth for Barrier<'_> {
    fn value(&self, x: &RVec) -> Option<f64> {
        let mut v = self.t * self.obj.value(x);
        for c in self.cons {
            let f = c.value(x)?;
            if !(f < 0.0) {
                return None;
            }
            v -= (-f).ln();
        }
        v.is_finite().then_some(v)
    }

    fn grad_hess(&self, x: &RVec) -> (RVec, RMat) {
        let mut g = self.obj.gradient(x) * self.t;
        let mut h = &self.obj.p * self.t;
        for c in self.cons {
            let f = c.value(x).expect("inside domain");
            let gf = c.gradient(x);
            g += &gf / (-f);
            h += &gf * gf.transpose() / (f * f) + c.hessian(x) / (-f);
        }
        (g, h)
    }
}

/// Phase-I barrier over `(x, s)`: `t·s − Σ ln(s − f_i(x))`.
struct PhaseOne<'a> {
    t: f64,
    cons: &'a [Constraint],
}

impl PhaseOne<'_> {
    fn split(y: &RVec) -> (RVec, f64) {
        let n = y.len() - 1;
        (y.rows(0, n).into_owned(), y[n])
    }
}

impl Smooth for PhaseOne<'_> {
    fn value(&self, y: &RVec) -> Option<f64> {
        let (x, s) = Self::split(y);
        let mut v = self.t * s;
        for c in self.cons {
            let f = c.value(&x)?;
            if !(f < s) {
                return None;
            }
            v -= (s - f).ln();
        }
        v.is_finite().then_some(v)
    }

    fn grad_hess(&self, y: &RVec) -> (RVec, RMat) {
        let (x, s) = Self::split(y);
        let n = x.len();
        let mut g = RVec::zeros(n + 1);
        let mut h = RMat::zeros(n + 1, n + 1);
        g[n] = self.t;
        for c in self.cons {
            let d = s - c.value(&x).expect("inside domain");
            // Gradient of (f_i(x) − s) in (x, s).
            let mut gf = RVec::zeros(n + 1);
            gf.rows_mut(0, n).copy_from(&c.gradient(&x));
            gf[n] = -1.0;
            g += &gf / d;
            h += &gf * gf.transpose() / (d * d);
            let hx = c.hessian(&x) / d;
            h.view_mut((0, 0), (n, n)).add_assign(&hx);
        }
        (g, h)
    }
}

trait AddAssignView {
    fn add_assign(&mut self, other: &RMat);
}

impl AddAssignView for nalgebra::DMatrixViewMut<'_, f64> {
    fn add_assign(&mut self, other: &RMat) {
        for j in 0..other.ncols() {
            for i in 0..other.nrows() {
                self[(i, j)] += other[(i, j)];
            }
        }
    }
}

/// Newton step restricted to the null space of `a` (when present).
fn newton_direction(g: &RVec, h: &RMat, a: Option<&RMat>) -> RVec {
    match a {
        None => -spd_solve(h, g),
        Some(a) => {
            let (n, p) = (g.len(), a.nrows());
            let mut kkt = RMat::zeros(n + p, n + p);
            kkt.view_mut((0, 0), (n, n)).copy_from(h);
            kkt.view_mut((n, 0), (p, n)).copy_from(a);
            kkt.view_mut((0, n), (n, p)).copy_from(&a.transpose());
            let mut rhs = RVec::zeros(n + p);
            rhs.rows_mut(0, n).copy_from(&(-g));
            match kkt.lu().solve(&rhs) {
                Some(sol) => sol.rows(0, n).into_owned(),
                None => RVec::zeros(n),
            }
        }
    }
}

/// Damped Newton minimization from a point inside the domain. Returns the
/// final point and the number of steps; `stop` is checked after each step.
fn center<F: Smooth>(f: &F, mut x: RVec, a: Option<&RMat>, tol: &SolverTolerances, stop: impl Fn(&RVec) -> bool) -> (RVec, usize) {
    const ALPHA: f64 = 0.01;
    const BETA: f64 = 0.5;
    let mut steps = 0;
    let mut fx = match f.value(&x) {
        Some(v) => v,
        None => return (x, 0),
    };
    while steps < tol.max_newton {
        let (g, h) = f.grad_hess(&x);
        let dx = newton_direction(&g, &h, a);
        let slope = g.dot(&dx);
        if !(slope < 0.0) || -slope / 2.0 <= tol.newton {
            break;
        }
        let mut s = 1.0;
        let accepted = loop {
            let cand = &x + &dx * s;
            if let Some(v) = f.value(&cand) {
                if v <= fx + ALPHA * s * slope {
                    break Some((cand, v));
                }
            }
            s *= BETA;
            if s < 1e-20 {
                break None;
            }
        };
        steps += 1;
        match accepted {
            Some((cand, v)) => {
                let progress = fx - v;
                x = cand;
                fx = v;
                if stop(&x) {
                    break;
                }
                if progress <= 1e-15 * fx.abs().max(1.0) {
                    break;
                }
            }
            None => break,
        }
    }
    (x, steps)
}

fn max_violation(cons: &[Constraint], x: &RVec) -> Option<f64> {
    cons.iter().try_fold(f64::NEG_INFINITY, |m, c| c.value(x).map(|v| m.max(v)))
}

/// Least-squares multipliers and KKT residuals at `x`.
///
/// Minimizes `‖∇f0 + Σ λ_i ∇f_i + Aᵀν‖² + Σ (λ_i f_i)²` over `λ ≥ 0`, so
/// inactive constraints are driven to zero multipliers without a threshold.
pub fn check_kkt(program: &ConvexProgram, x: &RVec) -> KktReport {
    let m = program.constraints.len();
    let n = program.n;
    let g0 = program.objective.gradient(x);
    let fvals: Vec<f64> = program.constraints.iter().map(|c| c.value(x).unwrap_or(f64::INFINITY)).collect();
    let grads: Vec<RVec> = program
        .constraints
        .iter()
        .zip(&fvals)
        .map(|(c, f)| if f.is_finite() { c.gradient(x) } else { RVec::zeros(n) })
        .collect();
    let (eq_a, eq_res) = match &program.equalities {
        Some((a, b)) => (Some(a.clone()), (a * x - b).amax()),
        None => (None, 0.0),
    };
    let p = eq_a.as_ref().map_or(0, |a| a.nrows());
    let primal = fvals.iter().fold(eq_res, |acc, &f| acc.max(f.max(0.0)));

    // Enumerate supports of λ; each subproblem is an unconstrained least
    // squares in (λ_S, ν).
    let cap = m.min(16);
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for mask in 0u32..(1u32 << cap) {
        let support: Vec<usize> = (0..cap).filter(|i| mask & (1 << i) != 0).collect();
        let k = support.len() + p;
        let (lambda, resid) = if k == 0 {
            (vec![0.0; m], g0.norm())
        } else {
            let rows = n + support.len();
            let mut mat = RMat::zeros(rows, k);
            let mut rhs = RVec::zeros(rows);
            rhs.rows_mut(0, n).copy_from(&(-&g0));
            for (col, &i) in support.iter().enumerate() {
                mat.view_mut((0, col), (n, 1)).copy_from(&grads[i]);
                mat[(n + col, col)] = fvals[i];
            }
            if let Some(a) = &eq_a {
                mat.view_mut((0, support.len()), (n, p)).copy_from(&a.transpose());
            }
            let Ok(sol) = mat.clone().svd(true, true).solve(&rhs, 1e-14) else { continue };
            if support.iter().enumerate().any(|(col, _)| sol[col] < 0.0) {
                continue;
            }
            let mut lambda = vec![0.0; m];
            for (col, &i) in support.iter().enumerate() {
                lambda[i] = sol[col];
            }
            let mut r = g0.clone();
            for i in 0..m {
                r += &grads[i] * lambda[i];
            }
            if let Some(a) = &eq_a {
                r += a.transpose() * sol.rows(support.len(), p);
            }
            (lambda, r.norm())
        };
        let comp = lambda.iter().zip(&fvals).fold(0.0_f64, |a, (l, f)| if *l > 0.0 { a.max((l * f).abs()) } else { a });
        let score = resid * resid + comp * comp;
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, lambda, resid));
        }
    }
    let (_, multipliers, stationarity) = best.expect("empty support is always admissible");
    let complementarity =
        multipliers.iter().zip(&fvals).fold(0.0_f64, |a, (l, f)| if *l > 0.0 { a.max((l * f).abs()) } else { a });
    KktReport { stationarity, primal, complementarity, multipliers }
}

/// Projects `x` onto `{A x = b}` along the least-norm correction.
fn project_affine(x: &RVec, a: &RMat, b: &RVec) -> Result<RVec> {
    let r = b - a * x;
    let aat = a * a.transpose();
    let y = aat.lu().solve(&r).ok_or_else(|| Error::Singular("equality constraints are rank deficient".into()))?;
    Ok(x + a.transpose() * y)
}

pub fn solve(program: &ConvexProgram, x0: &RVec, tol: &SolverTolerances) -> Result<SolveReport> {
    program.validate()?;
    if x0.len() != program.n || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("x0 must be finite with the program's dimension".into()));
    }
    let eq_a = program.equalities.as_ref().map(|(a, _)| a.clone());
    let mut x = match &program.equalities {
        Some((a, b)) => project_affine(x0, a, b)?,
        None => x0.clone(),
    };
    let cons = &program.constraints;
    let mut iterations = 0;
    let mut phase1_violation = None;

    let start = max_violation(cons, &x)
        .ok_or_else(|| Error::InvalidArgument("x0 lies outside a constraint's domain".into()))?;
    if !cons.is_empty() && start >= -tol.phase1_margin {
        let (xs, s_best, steps) = phase_one(cons, &x, start, eq_a.as_ref(), tol);
        iterations += steps;
        phase1_violation = Some(s_best);
        x = xs;
        if !(s_best < 0.0) {
            let objective = program.objective.value(&x);
            let residuals = cons.iter().map(|c| c.value(&x).unwrap_or(f64::INFINITY)).collect();
            return Ok(SolveReport {
                x: x.iter().copied().collect(),
                objective,
                residuals,
                kkt: check_kkt(program, &x),
                iterations,
                status: Status::Infeasible,
                phase1_violation,
                outer_objectives: Vec::new(),
            });
        }
    }

    let m = cons.len();
    let mut t = tol.t0;
    let mut outer_objectives = Vec::new();
    let mut finished = false;
    for _ in 0..tol.max_outer {
        let barrier = Barrier { t, obj: &program.objective, cons };
        let (xn, steps) = center(&barrier, x, eq_a.as_ref(), tol, |_| false);
        x = xn;
        iterations += steps;
        outer_objectives.push(program.objective.value(&x));
        if m == 0 || (m as f64) / t < tol.gap {
            finished = true;
            break;
        }
        t *= tol.mu;
    }
    let kkt = check_kkt(program, &x);
    let certified = kkt.primal <= tol.kkt && kkt.stationarity <= tol.kkt && kkt.complementarity <= tol.kkt;
    let status = if finished && certified { Status::Optimal } else { Status::MaxIter };
    Ok(SolveReport {
        objective: program.objective.value(&x),
        residuals: cons.iter().map(|c| c.value(&x).unwrap_or(f64::INFINITY)).collect(),
        x: x.iter().copied().collect(),
        kkt,
        iterations,
        status,
        phase1_violation,
        outer_objectives,
    })
}

/// Minimizes the maximum constraint value. Returns the last point, the
/// smallest maximum violation reached, and the Newton steps used.
fn phase_one(cons: &[Constraint], x: &RVec, start: f64, a: Option<&RMat>, tol: &SolverTolerances) -> (RVec, f64, usize) {
    let n = x.len();
    let mut y = RVec::zeros(n + 1);
    y.rows_mut(0, n).copy_from(x);
    y[n] = start.max(0.0) + 1.0;
    let a_ext = a.map(|a| {
        let mut e = RMat::zeros(a.nrows(), n + 1);
        e.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        e
    });
    let feasible = |y: &RVec| {
        let xs = y.rows(0, n).into_owned();
        max_violation(cons, &xs).is_some_and(|v| v < -tol.phase1_margin)
    };
    let mut t = tol.t0;
    let mut steps = 0;
    let m = cons.len() as f64;
    for _ in 0..tol.max_outer {
        let f = PhaseOne { t, cons };
        let (yn, k) = center(&f, y, a_ext.as_ref(), tol, feasible);
        y = yn;
        steps += k;
        if feasible(&y) || m / t < tol.gap {
            break;
        }
        t *= tol.mu;
    }
    let xs = y.rows(0, n).into_owned();
    let v = max_violation(cons, &xs).unwrap_or(f64::INFINITY);
    (xs, v, steps)
}
