//! Dormand–Prince 5(4) integrator for two-component first-order systems,
//! with cubic Hermite dense output over accepted steps.

use crate::error::{Error, Result};

pub type State = [f64; 2];

/// One accepted node of a trajectory. `ln_scale` is the accumulated log of
/// the renormalisation factors: the true state is `y * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: State,
    pub dy: State,
    pub ln_scale: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
    /// For linear homogeneous systems only: rescale the state once its
    /// magnitude exceeds this threshold, to keep growing solutions finite.
    pub rescale_above: Option<f64>,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            h_init: 0.0,
            max_steps: 5_000_000,
            rescale_above: None,
        }
    }

    pub fn linear(tol: f64) -> Self {
        Dopri5 {
            rescale_above: Some(1e100),
            ..Dopri5::new(tol)
        }
    }

    /// Integrate `y' = f(x, y)` from `x0` to `x_end` (> x0), returning every accepted node.
    pub fn integrate<F>(&self, f: F, x0: f64, y0: State, x_end: f64) -> Result<Vec<Node>>
    where
        F: Fn(f64, &State) -> State,
    {
        if !(x_end > x0) {
            return Err(Error::Precondition(format!(
                "integration interval [{x0}, {x_end}] is empty"
            )));
        }
        let span = x_end - x0;
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut ln_scale = 0.0;
        let mut nodes = vec![Node { x, y, dy: k1, ln_scale }];
        let mut h = if self.h_init > 0.0 {
            self.h_init
        } else {
            initial_step(&f, x, &y, &k1, self.rtol, self.atol).min(span)
        };
        let h_min = 1e-14 * x0.abs().max(x_end.abs()).max(1.0);

        for _ in 0..self.max_steps {
            if x >= x_end {
                return Ok(nodes);
            }
            if x + h > x_end || x_end - (x + h) < 1e-12 * span {
                h = x_end - x;
            }
            let (y_new, k7, err) = step(&f, x, &y, &k1, h);
            let err_norm = error_norm(&y, &y_new, &err, self.rtol, self.atol);
            if !err_norm.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                h *= 0.25;
                if h < h_min {
                    return Err(Error::Integration {
                        last_r: x,
                        reason: "non-finite state".into(),
                    });
                }
                continue;
            }
            if err_norm <= 1.0 {
                x = if h == x_end - x { x_end } else { x + h };
                y = y_new;
                k1 = k7;
                nodes.push(Node { x, y, dy: k1, ln_scale });
                if let Some(limit) = self.rescale_above {
                    let mag = y[0].abs().max(y[1].abs());
                    if mag > limit {
                        y = [y[0] / mag, y[1] / mag];
                        k1 = [k1[0] / mag, k1[1] / mag];
                        ln_scale += mag.ln();
                    }
                }
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
                if h < h_min {
                    return Err(Error::Integration {
                        last_r: x,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        Err(Error::Integration {
            last_r: x,
            reason: format!("exceeded {} steps", self.max_steps),
        })
    }
}

fn error_norm(y: &State, y_new: &State, err: &State, rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

fn initial_step<F: Fn(f64, &State) -> State>(f: &F, x: f64, y: &State, f0: &State, rtol: f64, atol: f64) -> f64 {
    let sc = |i: usize| atol + rtol * y[i].abs();
    let d0 = ((y[0] / sc(0)).powi(2) + (y[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let d1 = ((f0[0] / sc(0)).powi(2) + (f0[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = [y[0] + h0 * f0[0], y[1] + h0 * f0[1]];
    let f1 = f(x + h0, &y1);
    let d2 = (((f1[0] - f0[0]) / sc(0)).powi(2) + ((f1[1] - f0[1]) / sc(1)).powi(2)).sqrt()
        / 2f64.sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64, &State) -> State>(f: &F, x: f64, y: &State, k1: &State, h: f64) -> (State, State, State) {
    let comb = |coef: &[(f64, &State)]| -> State {
        let mut out = *y;
        for (c, k) in coef {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
        out
    };
    let k2 = f(x + h / 5.0, &comb(&[(1.0 / 5.0, k1)]));
    let k3 = f(x + 3.0 * h / 10.0, &comb(&[(3.0 / 40.0, k1), (9.0 / 40.0, &k2)]));
    let k4 = f(
        x + 4.0 * h / 5.0,
        &comb(&[(44.0 / 45.0, k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
    );
    let k5 = f(
        x + 8.0 * h / 9.0,
        &comb(&[
            (19372.0 / 6561.0, k1),
            (-25360.0 / 2187.0, &k2),
            (64448.0 / 6561.0, &k3),
            (-212.0 / 729.0, &k4),
        ]),
    );
    let k6 = f(
        x + h,
        &comb(&[
            (9017.0 / 3168.0, k1),
            (-355.0 / 33.0, &k2),
            (46732.0 / 5247.0, &k3),
            (49.0 / 176.0, &k4),
            (-5103.0 / 18656.0, &k5),
        ]),
    );
    let y_new = comb(&[
        (35.0 / 384.0, k1),
        (500.0 / 1113.0, &k3),
        (125.0 / 192.0, &k4),
        (-2187.0 / 6784.0, &k5),
        (11.0 / 84.0, &k6),
    ]);
    let k7 = f(x + h, &y_new);
    let e = [
        71.0 / 57600.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [k1, &k3, &k4, &k5, &k6, &k7];
    let mut err = [0.0; 2];
    for (c, k) in e.iter().zip(ks) {
        err[0] += h * c * k[0];
        err[1] += h * c * k[1];
    }
    (y_new, k7, err)
}

/// Cubic Hermite interpolation of component `i` between two nodes, evaluated at `x`.
/// Both nodes are brought to the scale of `a` first. Returns value and derivative.
pub fn hermite(a: &Node, b: &Node, i: usize, x: f64) -> (f64, f64) {
    let rel = (b.ln_scale - a.ln_scale).exp();
    let h = b.x - a.x;
    let t = (x - a.x) / h;
    let (y0, y1) = (a.y[i], b.y[i] * rel);
    let (d0, d1) = (a.dy[i] * h, b.dy[i] * rel * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let deriv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
    (value, deriv)
}
