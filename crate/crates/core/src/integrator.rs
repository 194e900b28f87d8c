//! Shared ODE integration kernel.
//!
//! Two steppers behind one entry point: an adaptive embedded Runge–Kutta 4(5)
//! pair (Dormand–Prince) with free 4th-order dense output, and a fixed-step
//! classical RK4. States are anything exposing a flat list of complex
//! components through [`OdeState`]; the master equation, the stochastic
//! trajectories, the pseudomode density matrix and the two-time oracle all
//! ride on the same driver.

use crate::{Scalar, C};

/// Flat complex-vector view of an integration state.
pub trait OdeState<T: Scalar>: Clone {
    fn dim(&self) -> usize;
    fn component(&self, i: usize) -> C<T>;
    fn set_component(&mut self, i: usize, v: C<T>);

    fn is_finite(&self) -> bool {
        (0..self.dim()).all(|i| {
            let c = self.component(i);
            c.re.is_finite() && c.im.is_finite()
        })
    }
}

/// Plain vector state for callers without a richer structure.
impl<T: Scalar> OdeState<T> for Vec<C<T>> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn component(&self, i: usize) -> C<T> {
        self[i]
    }

    fn set_component(&mut self, i: usize, v: C<T>) {
        self[i] = v;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMethod {
    /// Classical 4th-order Runge–Kutta with step `max_step`.
    FixedRk4,
    /// Embedded Dormand–Prince 4(5) with PI-free step control.
    AdaptiveRk45,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig<T = f64> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Upper bound on the step size; also the fixed step for [`StepMethod::FixedRk4`].
    pub max_step: T,
    pub method: StepMethod,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            abs_tol: T::of(1e-9),
            rel_tol: T::of(1e-7),
            max_step: T::infinity(),
            method: StepMethod::AdaptiveRk45,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("non-finite state or derivative at t = {t}")]
    NanDetected { t: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug)]
pub struct IntegrationOutput<S> {
    /// State at every requested output time, in order.
    pub states: Vec<S>,
    pub stats: IntegrationStats,
}

fn axpy<T: Scalar, S: OdeState<T>>(y: &mut S, a: T, k: &S) {
    for i in 0..y.dim() {
        let v = y.component(i) + k.component(i) * a;
        y.set_component(i, v);
    }
}

fn stage_state<T: Scalar, S: OdeState<T>>(y0: &S, h: T, coeffs: &[(T, &S)]) -> S {
    let mut y = y0.clone();
    for (a, k) in coeffs {
        axpy(&mut y, h * *a, *k);
    }
    y
}

/// Weighted RMS error norm used by the step controller: 1.0 marks the
/// acceptance boundary.
fn error_norm<T: Scalar, S: OdeState<T>>(err: &S, y0: &S, y1: &S, atol: T, rtol: T) -> T {
    let n = err.dim();
    let mut acc = T::zero();
    for i in 0..n {
        let scale = atol + rtol * y0.component(i).norm().max(y1.component(i).norm());
        let e = err.component(i).norm() / scale;
        acc = acc + e * e;
    }
    (acc / T::of(n as f64)).sqrt()
}

/// Integrate `rhs` from `t0`, emitting the state at every point of
/// `out_grid` (non-decreasing, all ≥ `t0`).
///
/// `post_step` runs on the marching state after every accepted step; output
/// samples are interpolated from the raw step polynomial before the hook
/// fires, so the hook is for drift cleanup (e.g. re-Hermitization), not for
/// state changes of leading order.
pub fn integrate_dense<T, S, F, P>(
    rhs: &mut F,
    y0: S,
    t0: T,
    out_grid: &[T],
    cfg: &IntegratorConfig<T>,
    post_step: &mut P,
) -> Result<IntegrationOutput<S>, OdeError>
where
    T: Scalar,
    S: OdeState<T>,
    F: FnMut(T, &S) -> S,
    P: FnMut(&mut S, T),
{
    if out_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::InvalidConfig("output grid must be non-decreasing"));
    }
    if out_grid.iter().any(|&t| t < t0) {
        return Err(OdeError::InvalidConfig("output grid starts before t0"));
    }
    match cfg.method {
        StepMethod::AdaptiveRk45 => rk45_dense(rhs, y0, t0, out_grid, cfg, post_step),
        StepMethod::FixedRk4 => rk4_dense(rhs, y0, t0, out_grid, cfg, post_step),
    }
}

fn rk45_dense<T, S, F, P>(
    rhs: &mut F,
    y0: S,
    t0: T,
    out_grid: &[T],
    cfg: &IntegratorConfig<T>,
    post_step: &mut P,
) -> Result<IntegrationOutput<S>, OdeError>
where
    T: Scalar,
    S: OdeState<T>,
    F: FnMut(T, &S) -> S,
    P: FnMut(&mut S, T),
{
    let mut stats = IntegrationStats::default();
    let mut states = Vec::with_capacity(out_grid.len());
    let mut next_out = 0;

    // leading output points at exactly t0
    while next_out < out_grid.len() && out_grid[next_out] == t0 {
        states.push(y0.clone());
        next_out += 1;
    }
    if next_out == out_grid.len() {
        return Ok(IntegrationOutput { states, stats });
    }
    let t_final = *out_grid.last().unwrap();

    // Dormand–Prince tableau
    let a21 = T::of(1.0 / 5.0);
    let (a31, a32) = (T::of(3.0 / 40.0), T::of(9.0 / 40.0));
    let (a41, a42, a43) = (T::of(44.0 / 45.0), T::of(-56.0 / 15.0), T::of(32.0 / 9.0));
    let (a51, a52, a53, a54) = (
        T::of(19372.0 / 6561.0),
        T::of(-25360.0 / 2187.0),
        T::of(64448.0 / 6561.0),
        T::of(-212.0 / 729.0),
    );
    let (a61, a62, a63, a64, a65) = (
        T::of(9017.0 / 3168.0),
        T::of(-355.0 / 33.0),
        T::of(46732.0 / 5247.0),
        T::of(49.0 / 176.0),
        T::of(-5103.0 / 18656.0),
    );
    let (b1, b3, b4, b5, b6) = (
        T::of(35.0 / 384.0),
        T::of(500.0 / 1113.0),
        T::of(125.0 / 192.0),
        T::of(-2187.0 / 6784.0),
        T::of(11.0 / 84.0),
    );
    let (e1, e3, e4, e5, e6, e7) = (
        T::of(71.0 / 57600.0),
        T::of(-71.0 / 16695.0),
        T::of(71.0 / 1920.0),
        T::of(-17253.0 / 339200.0),
        T::of(22.0 / 525.0),
        T::of(-1.0 / 40.0),
    );
    let (c2, c3, c4, c5) = (
        T::of(1.0 / 5.0),
        T::of(3.0 / 10.0),
        T::of(4.0 / 5.0),
        T::of(8.0 / 9.0),
    );
    // dense-output weights (4th-order continuous extension)
    let (d1, d3, d4, d5, d6, d7) = (
        T::of(-12715105075.0 / 11282082432.0),
        T::of(87487479700.0 / 32700410799.0),
        T::of(-10690763975.0 / 1880347072.0),
        T::of(701980252875.0 / 199316789632.0),
        T::of(-1453857185.0 / 822651844.0),
        T::of(69997945.0 / 29380423.0),
    );

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.rhs_evals += 1;
    if !k1.is_finite() {
        return Err(OdeError::NanDetected {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }

    let span = t_final - t0;
    let mut h = (span * T::of(1e-3)).min(cfg.max_step).max(T::of(1e-10) * span.max(T::one()));
    let safety = T::of(0.9);
    let fac_min = T::of(0.2);
    let fac_max_normal = T::of(5.0);
    let mut fac_max = fac_max_normal;
    let order_scale = T::of(-0.2); // err^(−1/5)

    while t < t_final {
        h = h.min(cfg.max_step).min(t_final - t);
        let h_floor = T::of(16.0) * T::epsilon() * t.abs().max(T::one());
        if h < h_floor {
            return Err(OdeError::StepFailure {
                t: t.to_f64().unwrap_or(f64::NAN),
                h: h.to_f64().unwrap_or(f64::NAN),
            });
        }

        let y2 = stage_state(&y, h, &[(a21, &k1)]);
        let k2 = rhs(t + c2 * h, &y2);
        let y3 = stage_state(&y, h, &[(a31, &k1), (a32, &k2)]);
        let k3 = rhs(t + c3 * h, &y3);
        let y4 = stage_state(&y, h, &[(a41, &k1), (a42, &k2), (a43, &k3)]);
        let k4 = rhs(t + c4 * h, &y4);
        let y5 = stage_state(&y, h, &[(a51, &k1), (a52, &k2), (a53, &k3), (a54, &k4)]);
        let k5 = rhs(t + c5 * h, &y5);
        let y6 = stage_state(
            &y,
            h,
            &[(a61, &k1), (a62, &k2), (a63, &k3), (a64, &k4), (a65, &k5)],
        );
        let k6 = rhs(t + h, &y6);
        // FSAL: the 5th-order solution is also stage 7
        let y_new = stage_state(&y, h, &[(b1, &k1), (b3, &k3), (b4, &k4), (b5, &k5), (b6, &k6)]);
        let k7 = rhs(t + h, &y_new);
        stats.rhs_evals += 6;

        if !y_new.is_finite() || !k7.is_finite() {
            return Err(OdeError::NanDetected {
                t: (t + h).to_f64().unwrap_or(f64::NAN),
            });
        }

        let mut err = y.clone();
        for i in 0..err.dim() {
            err.set_component(i, C::new(T::zero(), T::zero()));
        }
        for (w, k) in [
            (e1, &k1),
            (e3, &k3),
            (e4, &k4),
            (e5, &k5),
            (e6, &k6),
            (e7, &k7),
        ] {
            axpy(&mut err, h * w, k);
        }
        let err_norm = error_norm(&err, &y, &y_new, cfg.abs_tol, cfg.rel_tol);

        if err_norm <= T::one() {
            // emit every output point inside (t, t+h]
            while next_out < out_grid.len() && out_grid[next_out] <= t + h {
                let theta = (out_grid[next_out] - t) / h;
                let mut ydiff = y_new.clone();
                for i in 0..ydiff.dim() {
                    ydiff.set_component(i, y_new.component(i) - y.component(i));
                }
                let mut cont3 = k1.clone();
                for i in 0..cont3.dim() {
                    cont3.set_component(i, k1.component(i) * h - ydiff.component(i));
                }
                let mut cont4 = ydiff.clone();
                for i in 0..cont4.dim() {
                    cont4.set_component(
                        i,
                        ydiff.component(i) - k7.component(i) * h - cont3.component(i),
                    );
                }
                let mut cont5 = y.clone();
                for i in 0..cont5.dim() {
                    cont5.set_component(i, C::new(T::zero(), T::zero()));
                }
                for (w, k) in [
                    (d1, &k1),
                    (d3, &k3),
                    (d4, &k4),
                    (d5, &k5),
                    (d6, &k6),
                    (d7, &k7),
                ] {
                    axpy(&mut cont5, h * w, k);
                }
                let one_m = T::one() - theta;
                let mut out = y.clone();
                for i in 0..out.dim() {
                    let v = y.component(i)
                        + (ydiff.component(i)
                            + (cont3.component(i)
                                + (cont4.component(i) + cont5.component(i) * one_m) * theta)
                                * one_m)
                            * theta;
                    out.set_component(i, v);
                }
                states.push(out);
                next_out += 1;
            }

            t = t + h;
            y = y_new;
            post_step(&mut y, t);
            k1 = k7;
            stats.steps_accepted += 1;

            let fac = if err_norm == T::zero() {
                fac_max
            } else {
                (safety * err_norm.powf(order_scale)).min(fac_max).max(fac_min)
            };
            h = h * fac;
            fac_max = fac_max_normal;
        } else {
            stats.steps_rejected += 1;
            let fac = (safety * err_norm.powf(order_scale)).min(T::one()).max(fac_min);
            h = h * fac;
            fac_max = T::one(); // stay cautious right after a rejection
        }
    }

    debug_assert_eq!(next_out, out_grid.len());
    Ok(IntegrationOutput { states, stats })
}

fn rk4_dense<T, S, F, P>(
    rhs: &mut F,
    y0: S,
    t0: T,
    out_grid: &[T],
    cfg: &IntegratorConfig<T>,
    post_step: &mut P,
) -> Result<IntegrationOutput<S>, OdeError>
where
    T: Scalar,
    S: OdeState<T>,
    F: FnMut(T, &S) -> S,
    P: FnMut(&mut S, T),
{
    if !cfg.max_step.is_finite() || cfg.max_step <= T::zero() {
        return Err(OdeError::InvalidConfig(
            "fixed-step integration needs a finite positive max_step",
        ));
    }
    let mut stats = IntegrationStats::default();
    let mut states = Vec::with_capacity(out_grid.len());
    let mut t = t0;
    let mut y = y0;
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    let third = T::of(1.0 / 3.0);

    for &t_out in out_grid {
        if t_out > t {
            let span = t_out - t;
            let n_sub = (span / cfg.max_step).ceil().to_f64().unwrap_or(1.0).max(1.0) as usize;
            let h = span / T::of(n_sub as f64);
            for _ in 0..n_sub {
                let k1 = rhs(t, &y);
                let y2 = stage_state(&y, h, &[(half, &k1)]);
                let k2 = rhs(t + half * h, &y2);
                let y3 = stage_state(&y, h, &[(half, &k2)]);
                let k3 = rhs(t + half * h, &y3);
                let y4 = stage_state(&y, h, &[(T::one(), &k3)]);
                let k4 = rhs(t + h, &y4);
                stats.rhs_evals += 4;
                let mut y_new = y.clone();
                axpy(&mut y_new, h * sixth, &k1);
                axpy(&mut y_new, h * third, &k2);
                axpy(&mut y_new, h * third, &k3);
                axpy(&mut y_new, h * sixth, &k4);
                if !y_new.is_finite() {
                    return Err(OdeError::NanDetected {
                        t: (t + h).to_f64().unwrap_or(f64::NAN),
                    });
                }
                t = t + h;
                y = y_new;
                post_step(&mut y, t);
                stats.steps_accepted += 1;
            }
            t = t_out; // kill accumulated roundoff in t
        }
        states.push(y.clone());
    }
    Ok(IntegrationOutput { states, stats })
}
