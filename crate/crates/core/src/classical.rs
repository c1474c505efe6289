//! Classical side of the reparametrization story: integrate the ordinary
//! Hamilton equations and their multiplier form
//! `dq/dtau = lambda dH/dp, dp/dtau = -lambda dH/dq, dt/dtau = lambda,
//! ds/dtau = 0`, then verify the two dynamics coincide once the reparametrized
//! trajectory is mapped back to physical time.

use crate::error::{Error, Result};

/// Point of phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

/// Sample of either trajectory, in the common export layout.
/// For plain Hamiltonian runs `tau = t` and `s = -H(p0, q0)`.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint {
    pub tau: f64,
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub s: f64,
}

/// Hamiltonian with partial derivatives.
pub trait Hamiltonian {
    fn value(&self, p: f64, q: f64) -> f64;
    fn d_dp(&self, p: f64, q: f64) -> f64;
    fn d_dq(&self, p: f64, q: f64) -> f64;
}

/// `H = (p^2 + w^2 q^2) / 2`.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicH {
    pub omega: f64,
}

impl Hamiltonian for HarmonicH {
    fn value(&self, p: f64, q: f64) -> f64 {
        0.5 * (p * p + self.omega * self.omega * q * q)
    }
    fn d_dp(&self, p: f64, _q: f64) -> f64 {
        p
    }
    fn d_dq(&self, _p: f64, q: f64) -> f64 {
        self.omega * self.omega * q
    }
}

/// `H = p^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct FreeH;

impl Hamiltonian for FreeH {
    fn value(&self, p: f64, _q: f64) -> f64 {
        0.5 * p * p
    }
    fn d_dp(&self, p: f64, _q: f64) -> f64 {
        p
    }
    fn d_dq(&self, _p: f64, _q: f64) -> f64 {
        0.0
    }
}

/// Constant Hamiltonian (zero vector field).
#[derive(Debug, Clone, Copy)]
pub struct ConstantH {
    pub value: f64,
}

impl Hamiltonian for ConstantH {
    fn value(&self, _p: f64, _q: f64) -> f64 {
        self.value
    }
    fn d_dp(&self, _p: f64, _q: f64) -> f64 {
        0.0
    }
    fn d_dq(&self, _p: f64, _q: f64) -> f64 {
        0.0
    }
}

fn rk4_step(f: impl Fn(f64, &[f64; 2]) -> [f64; 2], x: f64, y: &[f64; 2], h: f64) -> [f64; 2] {
    let k1 = f(x, y);
    let k2 = f(
        x + 0.5 * h,
        &[y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
    );
    let k3 = f(
        x + 0.5 * h,
        &[y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
    );
    let k4 = f(x + h, &[y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn step_count(span: f64, dt: f64) -> usize {
    ((span / dt).round() as usize).max(1)
}

/// Integrate the Hamilton equations with classic fixed-step RK4.
pub fn integrate_hamilton(
    h: &impl Hamiltonian,
    y0: PhasePoint,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if dt <= 0.0 {
        return Err(Error::invalid("integrate_hamilton requires dt > 0"));
    }
    if t_span.1 <= t_span.0 {
        return Err(Error::invalid("integrate_hamilton requires t1 > t0"));
    }
    let n = step_count(t_span.1 - t_span.0, dt);
    let step = (t_span.1 - t_span.0) / n as f64;
    let s0 = -h.value(y0.p, y0.q);
    let mut y = [y0.q, y0.p];
    let mut out = Vec::with_capacity(n + 1);
    out.push(TrajectoryPoint {
        tau: t_span.0,
        t: t_span.0,
        q: y[0],
        p: y[1],
        s: s0,
    });
    for k in 0..n {
        let t = t_span.0 + step * k as f64;
        y = rk4_step(
            |_t, y| [h.d_dp(y[1], y[0]), -h.d_dq(y[1], y[0])],
            t,
            &y,
            step,
        );
        if !y[0].is_finite() || !y[1].is_finite() {
            return Err(Error::Diverged { t: t + step });
        }
        out.push(TrajectoryPoint {
            tau: t + step,
            t: t + step,
            q: y[0],
            p: y[1],
            s: s0,
        });
    }
    Ok(out)
}

const CONSTRAINT_INIT_TOL: f64 = 1e-9;

fn check_reparam_inputs(h: &impl Hamiltonian, y0: &TrajectoryPoint, dtau: f64) -> Result<()> {
    if dtau <= 0.0 {
        return Err(Error::invalid("integrate_reparam requires dtau > 0"));
    }
    let scale = h.value(y0.p, y0.q).abs().max(1.0);
    if (y0.s + h.value(y0.p, y0.q)).abs() > CONSTRAINT_INIT_TOL * scale {
        return Err(Error::invalid(
            "reparametrized initial data must satisfy s0 = -H(p0, q0)",
        ));
    }
    Ok(())
}

fn reparam_rhs(
    h: &impl Hamiltonian,
    lambda: &impl Fn(f64) -> f64,
    tau: f64,
    y: &[f64; 4],
) -> Result<[f64; 4]> {
    let lam = lambda(tau);
    if lam <= 0.0 || !lam.is_finite() {
        return Err(Error::invalid(format!(
            "multiplier must stay positive: lambda({tau}) = {lam}"
        )));
    }
    // y = [q, p, t, s]
    Ok([
        lam * h.d_dp(y[1], y[0]),
        -lam * h.d_dq(y[1], y[0]),
        lam,
        0.0,
    ])
}

fn rk4_step4(
    h: &impl Hamiltonian,
    lambda: &impl Fn(f64) -> f64,
    tau: f64,
    y: &[f64; 4],
    step: f64,
) -> Result<[f64; 4]> {
    let add = |y: &[f64; 4], k: &[f64; 4], c: f64| {
        [
            y[0] + c * k[0],
            y[1] + c * k[1],
            y[2] + c * k[2],
            y[3] + c * k[3],
        ]
    };
    let k1 = reparam_rhs(h, lambda, tau, y)?;
    let k2 = reparam_rhs(h, lambda, tau + 0.5 * step, &add(y, &k1, 0.5 * step))?;
    let k3 = reparam_rhs(h, lambda, tau + 0.5 * step, &add(y, &k2, 0.5 * step))?;
    let k4 = reparam_rhs(h, lambda, tau + step, &add(y, &k3, step))?;
    Ok([
        y[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + step / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        y[3] + step / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ])
}

/// Integrate the four reparametrized equations over a fixed `tau` span.
///
/// `y0` supplies `(q, p, t, s)` at `tau_span.0`; `s` must equal `-H(p, q)`
/// and the multiplier must be positive wherever it is sampled.
pub fn integrate_reparam(
    h: &impl Hamiltonian,
    lambda: impl Fn(f64) -> f64,
    y0: TrajectoryPoint,
    tau_span: (f64, f64),
    dtau: f64,
) -> Result<Vec<TrajectoryPoint>> {
    check_reparam_inputs(h, &y0, dtau)?;
    if tau_span.1 <= tau_span.0 {
        return Err(Error::invalid("integrate_reparam requires tau1 > tau0"));
    }
    let n = step_count(tau_span.1 - tau_span.0, dtau);
    let step = (tau_span.1 - tau_span.0) / n as f64;
    let mut y = [y0.q, y0.p, y0.t, y0.s];
    let mut out = Vec::with_capacity(n + 1);
    out.push(TrajectoryPoint {
        tau: tau_span.0,
        t: y[2],
        q: y[0],
        p: y[1],
        s: y[3],
    });
    for k in 0..n {
        let tau = tau_span.0 + step * k as f64;
        y = rk4_step4(h, &lambda, tau, &y, step)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { t: y[2] });
        }
        out.push(TrajectoryPoint {
            tau: tau + step,
            t: y[2],
            q: y[0],
            p: y[1],
            s: y[3],
        });
    }
    Ok(out)
}

/// Integrate the reparametrized equations until dynamical time reaches
/// `t_target` (the time map is monotone since `lambda > 0`).
pub fn integrate_reparam_until_time(
    h: &impl Hamiltonian,
    lambda: impl Fn(f64) -> f64,
    y0: TrajectoryPoint,
    t_target: f64,
    dtau: f64,
) -> Result<Vec<TrajectoryPoint>> {
    check_reparam_inputs(h, &y0, dtau)?;
    let lam0 = lambda(y0.tau);
    if lam0 <= 0.0 {
        return Err(Error::invalid("multiplier must be positive at tau0"));
    }
    let max_steps = (100.0 * (t_target - y0.t).abs() / (lam0 * dtau)).ceil() as usize + 16;
    let mut y = [y0.q, y0.p, y0.t, y0.s];
    let mut tau = y0.tau;
    let mut out = vec![y0];
    for _ in 0..max_steps {
        if y[2] >= t_target {
            return Ok(out);
        }
        y = rk4_step4(h, &lambda, tau, &y, dtau)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { t: y[2] });
        }
        tau += dtau;
        out.push(TrajectoryPoint {
            tau,
            t: y[2],
            q: y[0],
            p: y[1],
            s: y[3],
        });
    }
    Err(Error::Numerical(format!(
        "time map did not reach t = {t_target} within {max_steps} steps"
    )))
}

/// Deviation between the plain and reparametrized dynamics.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceReport {
    /// `max over samples of |dq| + |dp|` after remapping to physical time.
    pub max_dev: f64,
    /// `max |s + H(p, q)|` along the reparametrized trajectory.
    pub constraint_drift: f64,
}

/// Four-point Lagrange interpolation on a strictly increasing grid.
fn cubic_interpolate(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = ts.len();
    // index of the first grid point > t
    let hi = ts.partition_point(|&x| x <= t);
    let mut start = hi.saturating_sub(2);
    start = start.min(n - 4);
    let (ts, ys) = (&ts[start..start + 4], &ys[start..start + 4]);
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = ys[j];
        for k in 0..4 {
            if k != j {
                w *= (t - ts[k]) / (ts[j] - ts[k]);
            }
        }
        acc += w;
    }
    acc
}

/// Interpolate the reparametrized run onto the plain run's time grid and
/// report the worst phase-space deviation plus the constraint drift.
pub fn equivalence_report(
    traj_i: &[TrajectoryPoint],
    traj_r: &[TrajectoryPoint],
    h: &impl Hamiltonian,
) -> Result<EquivalenceReport> {
    if traj_i.len() < 2 || traj_r.len() < 4 {
        return Err(Error::invalid("equivalence_report needs both trajectories"));
    }
    let ts: Vec<f64> = traj_r.iter().map(|pt| pt.t).collect();
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "reparametrized trajectory must have strictly increasing time samples",
        ));
    }
    let (t_lo, t_hi) = (ts[0], ts[ts.len() - 1]);
    if traj_i.iter().all(|pt| pt.t < t_lo || pt.t > t_hi) {
        return Err(Error::invalid("time ranges do not overlap"));
    }
    let qs: Vec<f64> = traj_r.iter().map(|pt| pt.q).collect();
    let ps: Vec<f64> = traj_r.iter().map(|pt| pt.p).collect();
    let mut max_dev = 0.0_f64;
    for pt in traj_i {
        if pt.t < t_lo || pt.t > t_hi {
            continue;
        }
        let q = cubic_interpolate(&ts, &qs, pt.t);
        let p = cubic_interpolate(&ts, &ps, pt.t);
        max_dev = max_dev.max((q - pt.q).abs() + (p - pt.p).abs());
    }
    let constraint_drift = traj_r
        .iter()
        .map(|pt| (pt.s + h.value(pt.p, pt.q)).abs())
        .fold(0.0, f64::max);
    Ok(EquivalenceReport {
        max_dev,
        constraint_drift,
    })
}

/// Start point for a reparametrized run with the constraint imposed.
pub fn reparam_initial(h: &impl Hamiltonian, y0: PhasePoint) -> TrajectoryPoint {
    TrajectoryPoint {
        tau: 0.0,
        t: 0.0,
        q: y0.q,
        p: y0.p,
        s: -h.value(y0.p, y0.q),
    }
}
