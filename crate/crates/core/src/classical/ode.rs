//! Adaptive Dormand-Prince 5(4) integrator for the classical flow.
//!
//! The state is reduced to seven dynamical reals; the trace and the
//! magnetization `G11 - G33` are exact first integrals of the equations
//! of motion and are carried as constants, so their monitors measure only
//! reconstruction roundoff. State updates use compensated summation to
//! keep the conservation monitors inside the 100x-tolerance margin over
//! long runs.

use num_complex::Complex64;

use crate::hamiltonian::HamiltonianParams;
use crate::{Error, Result};

use super::ClassicalState;

type C64 = Complex64;

/// Dynamical coordinates: `[u, Re G12, Im G12, Re G13, Im G13, Re G23,
/// Im G23]` with `u = G11 + G33 - 2 G22`.
type Y = [f64; 7];

#[derive(Clone, Copy)]
struct Frozen {
    params: HamiltonianParams,
    n: f64,
    /// trace G, exactly conserved.
    trace: f64,
    /// G11 - G33, exactly conserved.
    mag: f64,
}

fn pack(state: &ClassicalState) -> (Y, Frozen) {
    let d1 = state.g[0][0].re;
    let d2 = state.g[1][1].re;
    let d3 = state.g[2][2].re;
    let y = [
        d1 + d3 - 2.0 * d2,
        state.g[0][1].re,
        state.g[0][1].im,
        state.g[0][2].re,
        state.g[0][2].im,
        state.g[1][2].re,
        state.g[1][2].im,
    ];
    let frozen = Frozen {
        params: state.params,
        n: state.n,
        trace: d1 + d2 + d3,
        mag: d1 - d3,
    };
    (y, frozen)
}

fn unpack(y: &Y, frozen: &Frozen) -> ClassicalState {
    let d2 = (frozen.trace - y[0]) / 3.0;
    let d13 = (2.0 * frozen.trace + y[0]) / 3.0;
    let d1 = (d13 + frozen.mag) / 2.0;
    let d3 = (d13 - frozen.mag) / 2.0;
    let g12 = C64::new(y[1], y[2]);
    let g13 = C64::new(y[3], y[4]);
    let g23 = C64::new(y[5], y[6]);
    ClassicalState {
        g: [
            [C64::new(d1, 0.0), g12, g13],
            [g12.conj(), C64::new(d2, 0.0), g23],
            [g13.conj(), g23.conj(), C64::new(d3, 0.0)],
        ],
        params: frozen.params,
        n: frozen.n,
    }
}

fn rhs(y: &Y, frozen: &Frozen) -> Y {
    let p = &frozen.params;
    let d2 = (frozen.trace - y[0]) / 3.0;
    let d13 = (2.0 * frozen.trace + y[0]) / 3.0;
    let d1 = (d13 + frozen.mag) / 2.0;
    let d3 = (d13 - frozen.mag) / 2.0;
    let g12 = C64::new(y[1], y[2]);
    let g13 = C64::new(y[3], y[4]);
    let g23 = C64::new(y[5], y[6]);
    let chi_plus = p.g1 * g12 + p.g2 * g23;
    let chi_minus = chi_plus.conj();
    let i = C64::new(0.0, 1.0);

    let w = 2.0 * p.g1 * p.g2 * (g23 * g12.conj()).im;
    let dg12 = i * (p.h * g12 + p.g1 * chi_plus * (d1 - d2) + p.g2 * chi_minus * g13);
    let dg23 = i * (p.h * g23 + p.g2 * chi_plus * (d2 - d3) - p.g1 * chi_minus * g13);
    let dg13 = i * (2.0 * p.h * g13 - chi_plus * (p.g1 * g23 - p.g2 * g12));

    [
        6.0 * w,
        dg12.re,
        dg12.im,
        dg13.re,
        dg13.im,
        dg23.re,
        dg23.im,
    ]
}

// The flow is autonomous, so the stage times (the usual c-coefficients)
// never enter.
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// 5th-minus-4th-order weights for the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(super) struct Dopri5 {
    y: Y,
    comp: Y,
    frozen: Frozen,
    t: f64,
    h: f64,
    tol: f64,
    k1: Option<Y>,
}

impl Dopri5 {
    pub(super) fn new(state: ClassicalState, tol: f64) -> Self {
        let (y, frozen) = pack(&state);
        Self {
            y,
            comp: [0.0; 7],
            frozen,
            t: 0.0,
            h: 1e-6,
            tol,
            k1: None,
        }
    }

    /// Integrates forward to `target` (monotone increasing across calls)
    /// and returns the state there.
    pub(super) fn advance_to(&mut self, target: f64) -> Result<ClassicalState> {
        while self.t < target {
            let h_cap = (target - self.t).max(0.0);
            let clamped = self.h > h_cap;
            let h_try = if clamped { h_cap } else { self.h };
            let (accepted, err) = self.try_step(h_try)?;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if accepted {
                // Do not let one clamped output step shrink the controller.
                if !clamped {
                    self.h = h_try * factor;
                } else {
                    self.h = self.h.max(h_try * factor.min(1.0));
                }
            } else {
                self.h = h_try * factor.min(1.0);
                self.k1 = None;
                if self.h < 1e-14 * self.t.abs().max(1.0) {
                    return Err(Error::Numerical(format!(
                        "step size underflow at t = {:.6e}",
                        self.t
                    )));
                }
            }
        }
        Ok(unpack(&self.y, &self.frozen))
    }

    /// One trial step of size `h`; returns `(accepted, error norm)`.
    fn try_step(&mut self, h: f64) -> Result<(bool, f64)> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::Numerical(format!(
                "step size underflow at t = {:.6e}",
                self.t
            )));
        }
        let y = self.y;
        let f = |y: &Y| rhs(y, &self.frozen);
        let k1 = self.k1.unwrap_or_else(|| f(&y));
        let stage = |coefs: &[f64], ks: &[&Y]| -> Y {
            let mut out = y;
            for (c, k) in coefs.iter().zip(ks) {
                for i in 0..7 {
                    out[i] += h * c * k[i];
                }
            }
            out
        };
        let k2 = f(&stage(&A2, &[&k1]));
        let k3 = f(&stage(&A3, &[&k1, &k2]));
        let k4 = f(&stage(&A4, &[&k1, &k2, &k3]));
        let k5 = f(&stage(&A5, &[&k1, &k2, &k3, &k4]));
        let k6 = f(&stage(&A6, &[&k1, &k2, &k3, &k4, &k5]));
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6];

        let mut increment = [0.0f64; 7];
        for i in 0..7 {
            for (b, k) in B.iter().zip(&ks) {
                increment[i] += b * k[i];
            }
            increment[i] *= h;
        }
        let mut y_new = y;
        for i in 0..7 {
            y_new[i] += increment[i];
        }
        let k7 = f(&y_new);

        // Embedded error with a purely absolute scale: integrate()
        // promises an absolute conservation-drift bound, so the local
        // error must not be allowed to grow with the state magnitude.
        let all_k = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let mut err_acc = 0.0f64;
        for i in 0..7 {
            let mut e = 0.0;
            for (w, k) in E.iter().zip(&all_k) {
                e += w * k[i];
            }
            e *= h;
            err_acc += (e / self.tol) * (e / self.tol);
        }
        let err = (err_acc / 7.0).sqrt();

        if err <= 1.0 {
            // Compensated update keeps long-run conservation drift at the
            // roundoff floor instead of a random walk.
            for i in 0..7 {
                let v = increment[i] - self.comp[i];
                let t = self.y[i] + v;
                self.comp[i] = (t - self.y[i]) - v;
                self.y[i] = t;
            }
            self.t += h;
            self.k1 = Some(k7);
            Ok((true, err))
        } else {
            Ok((false, err))
        }
    }
}
