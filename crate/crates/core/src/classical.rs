//! SU(3) coherent-state classical limit.
//!
//! The classical phase space is spanned by the averaged one-body matrix
//! `G_ab = <T_ab>/L`, a 3x3 Hermitian matrix evolving under
//!
//! ```text
//! i dG11/dt = i dG33/dt = -(i/2) dG22/dt = g1 g2 (G23 G21 - G32 G12)
//! i dG12/dt = -h G12 + g1 chi+ (G22 - G11) - g2 chi- G13
//! i dG23/dt = -h G23 + g2 chi+ (G33 - G22) + g1 chi- G13
//! i dG13/dt = -2h G13 + chi+ (g1 G23 - g2 G12)
//! ```
//!
//! with `chi+ = g1 G12 + g2 G23`, `chi- = conj(chi+)`, and classical
//! energy `H = h (G11 - G33) - chi- chi+`. The flow conserves `H`, the
//! Casimir functions `C2 = tr G^2`, `C3 = tr G^3`, the trace, and the
//! magnetization density `G11 - G33`; all five are monitored along every
//! accepted trajectory.
//!
//! Initial states are SU(3) coherent states of a representation
//! `D(p, q) = D(alpha L, beta L)`; only the intensive ratios
//! `alpha = p/L`, `beta = q/L` enter the classical formulas.

mod ode;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::hamiltonian::HamiltonianParams;
use crate::{Error, Result};

use ode::Dopri5;

type C64 = Complex64;

/// Coherent-state parameters for the classical manifold of
/// `D(alpha L, beta L)` with `n` particles per site.
///
/// The parametrization is degenerate for planar representations; the
/// redundant parameter is gauged away on construction: `beta = 0` fixes
/// `gamma2 = 0` (leaving `gamma1` free), `alpha = 0` fixes `gamma1 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentParams {
    pub gamma1: C64,
    pub gamma2: C64,
    pub gamma3: C64,
    pub alpha: f64,
    pub beta: f64,
    pub n: f64,
}

impl CoherentParams {
    pub fn new(gamma1: C64, gamma2: C64, gamma3: C64, alpha: f64, beta: f64, n: f64) -> Result<Self> {
        if alpha.is_nan() || beta.is_nan() || alpha < 0.0 || beta < 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidInput(
                "alpha and beta must be finite and non-negative".into(),
            ));
        }
        if n.is_nan() || n <= 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let mut cp = Self {
            gamma1,
            gamma2,
            gamma3,
            alpha,
            beta,
            n,
        };
        if beta == 0.0 {
            cp.gamma2 = C64::new(0.0, 0.0);
        }
        if alpha == 0.0 {
            cp.gamma1 = C64::new(0.0, 0.0);
        }
        Ok(cp)
    }

    /// Normalization constants `A1 = 1 + |g1|^2 + |g3|^2` and
    /// `A2 = 1 + |g2|^2 + |g3 - g1 g2|^2`.
    pub fn normalizations(&self) -> (f64, f64) {
        let a1 = 1.0 + self.gamma1.norm_sqr() + self.gamma3.norm_sqr();
        let a2 = 1.0 + self.gamma2.norm_sqr() + (self.gamma3 - self.gamma1 * self.gamma2).norm_sqr();
        (a1, a2)
    }
}

/// Classical state: Hermitian one-body matrix plus model parameters.
#[derive(Clone, Copy, Debug)]
pub struct ClassicalState {
    /// `g[a][b] = G_{a+1, b+1}`; Hermitian.
    pub g: [[C64; 3]; 3],
    pub params: HamiltonianParams,
    /// Particles per site (`trace G = n`, conserved).
    pub n: f64,
}

impl ClassicalState {
    pub fn g(&self, a: usize, b: usize) -> C64 {
        self.g[a - 1][b - 1]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut dev = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                dev = dev.max((self.g[a][b] - self.g[b][a].conj()).norm());
            }
        }
        dev
    }

    pub fn trace(&self) -> f64 {
        (self.g[0][0] + self.g[1][1] + self.g[2][2]).re
    }

    /// Magnetization density `G11 - G33`.
    pub fn magnetization(&self) -> f64 {
        (self.g[0][0] - self.g[2][2]).re
    }

    /// Classical energy `H = h (G11 - G33) - chi- chi+`.
    pub fn energy(&self) -> f64 {
        let p = &self.params;
        let chi_plus = p.g1 * self.g[0][1] + p.g2 * self.g[1][2];
        let chi_minus = p.g1 * self.g[1][0] + p.g2 * self.g[2][1];
        p.h * self.magnetization() - (chi_minus * chi_plus).re
    }

    /// Frobenius distance to another state's one-body matrix.
    pub fn distance(&self, other: &ClassicalState) -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                acc += (self.g[a][b] - other.g[a][b]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Time-reversed partner: complex conjugate of the one-body matrix.
    /// If `G(t)` solves the flow then `conj G` evolves backwards.
    pub fn conjugated(&self) -> ClassicalState {
        let mut g = self.g;
        for row in g.iter_mut() {
            for x in row.iter_mut() {
                *x = x.conj();
            }
        }
        ClassicalState { g, ..*self }
    }
}

/// Fills the one-body matrix from the closed-form coherent-state
/// expectation values; the lower triangle follows by conjugation.
pub fn init_from_coherent(cp: &CoherentParams, params: HamiltonianParams) -> ClassicalState {
    let (a1, a2) = cp.normalizations();
    let (g1, g2, g3) = (cp.gamma1, cp.gamma2, cp.gamma3);
    let z = g3 - g1 * g2;
    let n3 = cp.n / 3.0;
    let pa = cp.alpha / (3.0 * a1);
    let qb = cp.beta / (3.0 * a2);

    let g11 = n3 + pa * (2.0 - g1.norm_sqr() - g3.norm_sqr())
        + qb * (1.0 + g2.norm_sqr() - 2.0 * z.norm_sqr());
    let g22 = n3 + pa * (-1.0 + 2.0 * g1.norm_sqr() - g3.norm_sqr())
        + qb * (1.0 - 2.0 * g2.norm_sqr() + z.norm_sqr());
    let g33 = n3 + pa * (-1.0 - g1.norm_sqr() + 2.0 * g3.norm_sqr())
        + qb * (-2.0 + g2.norm_sqr() + z.norm_sqr());
    let g12 = g1 * (3.0 * pa) - g2.conj() * z * (3.0 * qb);
    let g13 = g3 * (3.0 * pa) + z * (3.0 * qb);
    let g23 = g1.conj() * g3 * (3.0 * pa) + g2 * (3.0 * qb);

    let g = [
        [C64::new(g11, 0.0), g12, g13],
        [g12.conj(), C64::new(g22, 0.0), g23],
        [g13.conj(), g23.conj(), C64::new(g33, 0.0)],
    ];
    ClassicalState {
        g,
        params,
        n: cp.n,
    }
}

/// Right-hand side `dG/dt` of the classical equations of motion, returned
/// as a full (Hermitian-derivative) matrix. Every diagonal entry follows
/// `dG11 = dG33 = -dG22/2` exactly.
pub fn eom_rhs(state: &ClassicalState) -> [[C64; 3]; 3] {
    let p = &state.params;
    let g12 = state.g[0][1];
    let g13 = state.g[0][2];
    let g23 = state.g[1][2];
    let d1 = state.g[0][0].re;
    let d2 = state.g[1][1].re;
    let d3 = state.g[2][2].re;
    let chi_plus = p.g1 * g12 + p.g2 * g23;
    let chi_minus = chi_plus.conj();
    let i = C64::new(0.0, 1.0);

    let w = 2.0 * p.g1 * p.g2 * (g23 * g12.conj()).im;
    let dg12 = i * (p.h * g12 + p.g1 * chi_plus * (d1 - d2) + p.g2 * chi_minus * g13);
    let dg23 = i * (p.h * g23 + p.g2 * chi_plus * (d2 - d3) - p.g1 * chi_minus * g13);
    let dg13 = i * (2.0 * p.h * g13 - chi_plus * (p.g1 * g23 - p.g2 * g12));

    [
        [C64::new(w, 0.0), dg12, dg13],
        [dg12.conj(), C64::new(-2.0 * w, 0.0), dg23],
        [dg13.conj(), dg23.conj(), C64::new(w, 0.0)],
    ]
}

/// Classical Casimir functions `C2 = tr G^2`, `C3 = tr G^3`. Both are real
/// for Hermitian `G`; a residual imaginary part above 1e-12 (relative) is
/// a hard error.
pub fn casimir_functions(state: &ClassicalState) -> Result<(f64, f64)> {
    let g = &state.g;
    let mut c2 = C64::new(0.0, 0.0);
    let mut c3 = C64::new(0.0, 0.0);
    for a in 0..3 {
        for b in 0..3 {
            c2 += g[a][b] * g[b][a];
            for c in 0..3 {
                c3 += g[a][b] * g[b][c] * g[c][a];
            }
        }
    }
    for (name, v) in [("C2", c2), ("C3", c3)] {
        if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "{name} has imaginary part {:.3e}; G is not Hermitian",
                v.im
            )));
        }
    }
    Ok((c2.re, c3.re))
}

/// Reduced coordinates `(q1, q2) = (<Y'>, <V^2>)` used by the
/// degree-of-freedom counting argument: `q1 = (2 G22 - G11 - G33)/3` and
/// `q2 = v3^2 + v3 + G13 G31` with `v3 = (G11 - G33)/2`.
///
/// The `+v3` term is the symmetric transcription of the quantum ordering
/// `V3(V3+1) + V- V+`; the classical manifold does not fix this ordering
/// and no acceptance value depends on it.
pub fn reduced_coordinates(state: &ClassicalState) -> (f64, f64) {
    let d1 = state.g[0][0].re;
    let d2 = state.g[1][1].re;
    let d3 = state.g[2][2].re;
    let q1 = (2.0 * d2 - d1 - d3) / 3.0;
    let v3 = (d1 - d3) / 2.0;
    let q2 = v3 * v3 + v3 + state.g[0][2].norm_sqr();
    (q1, q2)
}

/// The five conservation monitors of a state.
#[derive(Clone, Copy, Debug)]
pub struct Monitors {
    pub energy: f64,
    pub c2: f64,
    pub c3: f64,
    pub trace: f64,
    pub magnetization: f64,
}

impl Monitors {
    pub fn of(state: &ClassicalState) -> Result<Self> {
        let (c2, c3) = casimir_functions(state)?;
        Ok(Self {
            energy: state.energy(),
            c2,
            c3,
            trace: state.trace(),
            magnetization: state.magnetization(),
        })
    }

    pub fn max_drift(&self, other: &Monitors) -> f64 {
        (self.energy - other.energy)
            .abs()
            .max((self.c2 - other.c2).abs())
            .max((self.c3 - other.c3).abs())
            .max((self.trace - other.trace).abs())
            .max((self.magnetization - other.magnetization).abs())
    }
}

/// Integrated trajectory sampled on a uniform time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    pub monitors: Vec<Monitors>,
}

impl Trajectory {
    pub fn final_state(&self) -> &ClassicalState {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Adaptive 5th-order (Dormand-Prince) integration of the classical flow
/// to `t_end`, sampled at `samples + 1` uniform output times.
///
/// `tol` is the monitor tolerance: the five conservation monitors must
/// stay within `100 * tol` of their initial values at every output time,
/// otherwise integration fails. Internally the step controller runs at
/// `tol * 1e-4` so the accumulated drift stays inside that margin even for
/// extensive (large-`n`) initializations integrated over their natural
/// horizon.
pub fn integrate(
    state0: &ClassicalState,
    t_end: f64,
    tol: f64,
    samples: usize,
) -> Result<Trajectory> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    if samples == 0 || t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::InvalidInput(
            "need t_end > 0 and at least one sample".into(),
        ));
    }
    let reference = Monitors::of(state0)?;
    let mut integrator = Dopri5::new(*state0, tol * 1e-4);
    let mut times = Vec::with_capacity(samples + 1);
    let mut states = Vec::with_capacity(samples + 1);
    let mut monitors = Vec::with_capacity(samples + 1);
    times.push(0.0);
    states.push(*state0);
    monitors.push(reference);
    for k in 1..=samples {
        let t = t_end * k as f64 / samples as f64;
        let state = integrator.advance_to(t)?;
        let m = Monitors::of(&state)?;
        let drift = m.max_drift(&reference);
        if drift > 100.0 * tol {
            return Err(Error::Numerical(format!(
                "conservation monitor breach at t = {t:.6}: drift {drift:.3e} > {:.3e}",
                100.0 * tol
            )));
        }
        times.push(t);
        states.push(state);
        monitors.push(m);
    }
    Ok(Trajectory {
        times,
        states,
        monitors,
    })
}

/// Ensemble divergence series `Delta r-bar(t)` with the trajectory-pair
/// normalization `sum_{u>v} Delta r_uv / (R (R-1))`.
#[derive(Clone, Debug)]
pub struct DivergenceSeries {
    pub times: Vec<f64>,
    pub delta_r: Vec<f64>,
    pub ensemble: usize,
    pub eps: f64,
    /// Conservation monitors of the first ensemble member.
    pub rep_monitors: Vec<Monitors>,
}

/// Integrates `ensemble` trajectories whose coherent-state parameters are
/// perturbed by independent random offsets of magnitude at most `eps`
/// (uniform in the complex disk, seeded), and returns the mean pairwise
/// Frobenius distance at each output time.
///
/// Any member failure aborts with that member's index in the message.
pub fn ensemble_divergence(
    cp: &CoherentParams,
    params: HamiltonianParams,
    ensemble: usize,
    eps: f64,
    t_end: f64,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<DivergenceSeries> {
    if ensemble < 2 {
        return Err(Error::InvalidInput("need at least 2 ensemble members".into()));
    }
    if eps < 0.0 {
        return Err(Error::InvalidInput("eps must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(ensemble);
    for _ in 0..ensemble {
        let mut offset = || {
            // Uniform in the complex disk of radius eps.
            loop {
                let re = rng.gen_range(-1.0..=1.0);
                let im = rng.gen_range(-1.0..=1.0);
                if re * re + im * im <= 1.0 {
                    return C64::new(re * eps, im * eps);
                }
            }
        };
        let (o1, o2, o3) = (offset(), offset(), offset());
        members.push(CoherentParams::new(
            cp.gamma1 + o1,
            cp.gamma2 + o2,
            cp.gamma3 + o3,
            cp.alpha,
            cp.beta,
            cp.n,
        )?);
    }

    let trajectories: Vec<Trajectory> = members
        .par_iter()
        .enumerate()
        .map(|(u, m)| {
            let state = init_from_coherent(m, params);
            integrate(&state, t_end, tol, samples)
                .map_err(|e| Error::Numerical(format!("ensemble member {u}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let times = trajectories[0].times.clone();
    let mut delta_r = vec![0.0f64; times.len()];
    // Fixed pair order keeps the reduction deterministic.
    for u in 0..ensemble {
        for v in 0..u {
            for (k, d) in delta_r.iter_mut().enumerate() {
                *d += trajectories[u].states[k].distance(&trajectories[v].states[k]);
            }
        }
    }
    let norm = (ensemble * (ensemble - 1)) as f64;
    for d in delta_r.iter_mut() {
        *d /= norm;
    }
    Ok(DivergenceSeries {
        times,
        delta_r,
        ensemble,
        eps,
        rep_monitors: trajectories[0].monitors.clone(),
    })
}

/// Result of a log-linear Lyapunov fit.
#[derive(Clone, Copy, Debug)]
pub struct LyapunovFit {
    pub lambda: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Automatic fit window: from the time `Delta r-bar` first reaches ten
/// times its initial value to the time it first reaches a tenth of its
/// saturation value. A series that is still growing at the end of the run
/// has not saturated (the first crossing of `0.9 max` happens in the last
/// fifth of the run); its pre-saturation regime extends to the final
/// time. Falls back to the full positive range when the window is
/// degenerate.
pub fn automatic_window(series: &DivergenceSeries) -> Result<(f64, f64)> {
    let d0 = series.delta_r[0];
    if d0 <= 0.0 {
        return Err(Error::InvalidInput(
            "initial separation is zero; no window exists".into(),
        ));
    }
    let t_end = *series.times.last().expect("non-empty series");
    let sat = series.delta_r.iter().cloned().fold(0.0f64, f64::max);
    let first_crossing = |level: f64| {
        series
            .times
            .iter()
            .zip(&series.delta_r)
            .find(|&(_, &d)| d >= level)
            .map(|(&t, _)| t)
    };
    let t1 = first_crossing(10.0 * d0);
    let saturated = first_crossing(0.9 * sat).is_some_and(|t| t <= 0.8 * t_end);
    let t2 = if saturated {
        first_crossing(0.1 * sat)
    } else {
        Some(t_end)
    };
    let full = (series.times[1], t_end);
    Ok(match (t1, t2) {
        (Some(a), Some(b)) if b > a => {
            let count = series
                .times
                .iter()
                .filter(|&&t| t >= a && t <= b)
                .count();
            if count >= 8 {
                (a, b)
            } else {
                full
            }
        }
        _ => full,
    })
}

/// Least-squares slope of `log Delta r-bar` versus `t` on the window.
///
/// The standard error is a batch-means estimate: the window is split into
/// eight time blocks, a slope is fitted per block, and the dispersion of
/// the block slopes around the global slope gives the error. For a clean
/// exponential all blocks agree and the error is tiny; for a curving
/// (sub-exponential) series the block slopes disagree and the error
/// honestly reflects that no single rate describes the data. A plain OLS
/// error would be meaninglessly small in the latter case.
pub fn lyapunov_fit(series: &DivergenceSeries, window: (f64, f64)) -> Result<LyapunovFit> {
    let (t1, t2) = window;
    let pairs: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.delta_r)
        .filter(|&(&t, _)| t >= t1 && t <= t2)
        .map(|(&t, &d)| (t, d))
        .collect();
    if pairs.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "window [{t1}, {t2}] contains only {} points",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(_, d)| d <= 0.0) {
        return Err(Error::InvalidInput(
            "non-positive divergence values in fit window".into(),
        ));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|&(t, _)| t).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, d)| d.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::Numerical("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let sst: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };

    // Batch-means error: dispersion of per-block slopes around the global
    // slope. Falls back to the plain OLS error when the window is too
    // short to split.
    let blocks = 8usize.min(pairs.len() / 4).max(1);
    let stderr = if blocks >= 4 {
        let block_slope = |chunk: &[(f64, f64)]| -> Option<f64> {
            let nb = chunk.len() as f64;
            if chunk.len() < 3 {
                return None;
            }
            let bxm = chunk.iter().map(|&(t, _)| t).sum::<f64>() / nb;
            let bym = chunk.iter().map(|&(_, d)| d.ln()).sum::<f64>() / nb;
            let bxx: f64 = chunk.iter().map(|&(t, _)| (t - bxm) * (t - bxm)).sum();
            let bxy: f64 = chunk
                .iter()
                .map(|&(t, d)| (t - bxm) * (d.ln() - bym))
                .sum();
            (bxx > 0.0).then(|| bxy / bxx)
        };
        let chunk_len = pairs.len().div_ceil(blocks);
        let slopes: Vec<f64> = pairs
            .chunks(chunk_len)
            .filter_map(block_slope)
            .collect();
        let k = slopes.len() as f64;
        let var: f64 = slopes.iter().map(|s| (s - slope) * (s - slope)).sum::<f64>()
            / (k * (k - 1.0));
        var.max(0.0).sqrt()
    } else {
        (ssr / (n - 2.0) / sxx).max(0.0).sqrt()
    };

    Ok(LyapunovFit {
        lambda: slope,
        stderr,
        r_squared,
        window,
        points: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params_fig6() -> HamiltonianParams {
        HamiltonianParams::new(1.0, 2.0, 0.4)
    }

    /// gamma = (4, 2, i)/sqrt(21).
    fn gamma_fig6() -> (C64, C64, C64) {
        let s = 21.0f64.sqrt();
        (c(4.0 / s, 0.0), c(2.0 / s, 0.0), c(0.0, 1.0 / s))
    }

    fn fig6_state(alpha: f64, beta: f64, n: f64) -> ClassicalState {
        let (g1, g2, g3) = gamma_fig6();
        let cp = CoherentParams::new(g1, g2, g3, alpha, beta, n).unwrap();
        init_from_coherent(&cp, params_fig6())
    }

    #[test]
    fn highest_weight_init_is_diagonal() {
        let cp = CoherentParams::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 1.0, 0.0, 1.0).unwrap();
        let state = init_from_coherent(&cp, params_fig6());
        assert_abs_diff_eq!(state.g(1, 1).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(2, 2).re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(3, 3).re, 0.0, epsilon = 1e-14);
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            assert_abs_diff_eq!(state.g(a, b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gamma3_only_init_matches_hand_values() {
        // gamma = (0, 0, 1), alpha = 1, beta = 0, n = 1: A1 = 2 and
        // G11 = G33 = 1/2, G22 = 0, G13 = 1/2, all else 0.
        let cp = CoherentParams::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), 1.0, 0.0, 1.0).unwrap();
        assert_eq!(cp.normalizations().0, 2.0);
        let state = init_from_coherent(&cp, params_fig6());
        assert_abs_diff_eq!(state.g(1, 1).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(2, 2).re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(3, 3).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(1, 3).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(1, 2).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(state.g(2, 3).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn fig6_init_is_hermitian_with_unit_trace() {
        let state = fig6_state(0.4, 0.3, 1.0);
        assert!(state.hermiticity_defect() < 1e-12);
        assert_abs_diff_eq!(state.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn planar_gauge_is_canonicalized() {
        let (g1, g2, g3) = gamma_fig6();
        let cp = CoherentParams::new(g1, g2, g3, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(cp.gamma2, c(0.0, 0.0));
        let cp = CoherentParams::new(g1, g2, g3, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(cp.gamma1, c(0.0, 0.0));
    }

    #[test]
    fn diagonal_states_are_fixed_points() {
        for diag in [[1.0, 0.0, 0.0], [0.3, 0.5, 0.2], [2.0, 2.0, 2.0]] {
            let state = ClassicalState {
                g: [
                    [c(diag[0], 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                    [c(0.0, 0.0), c(diag[1], 0.0), c(0.0, 0.0)],
                    [c(0.0, 0.0), c(0.0, 0.0), c(diag[2], 0.0)],
                ],
                params: params_fig6(),
                n: diag.iter().sum(),
            };
            let rhs = eom_rhs(&state);
            for row in &rhs {
                for x in row {
                    assert_eq!(*x, c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn flow_conserves_trace_and_magnetization_exactly() {
        let state = fig6_state(0.4, 0.3, 1.0);
        let rhs = eom_rhs(&state);
        let trace_dot = rhs[0][0] + rhs[1][1] + rhs[2][2];
        let mag_dot = rhs[0][0] - rhs[2][2];
        assert_eq!(trace_dot, c(0.0, 0.0));
        assert_eq!(mag_dot, c(0.0, 0.0));
        // Diagonal identities: dG11 = dG33 = -dG22/2.
        assert_eq!(rhs[0][0], rhs[2][2]);
        assert_eq!(rhs[1][1], -2.0 * rhs[0][0]);
    }

    /// Poisson-bracket oracle: i dG_ab/dt = sum_cd (d_bc G_ad - d_ad G_cb)
    /// dH/dG_cd with the gradient taken by central finite differences,
    /// treating the nine complex entries as independent variables.
    fn bracket_rhs_finite_difference(state: &ClassicalState) -> [[C64; 3]; 3] {
        let p = state.params;
        let energy = |g: &[[C64; 3]; 3]| -> C64 {
            let chi_minus = p.g1 * g[1][0] + p.g2 * g[2][1];
            let chi_plus = p.g1 * g[0][1] + p.g2 * g[1][2];
            p.h * (g[0][0] - g[2][2]) - chi_minus * chi_plus
        };
        let step = 1e-6;
        // dH/dG_cd as a complex Wirtinger-style derivative: H is a
        // polynomial in the entries, so dH/dG = (dH/dRe - i dH/dIm)/2 ...
        // but for a polynomial treated holomorphically in each entry the
        // real-step derivative alone is the full derivative.
        let mut grad = [[C64::new(0.0, 0.0); 3]; 3];
        for cc in 0..3 {
            for dd in 0..3 {
                let mut plus = state.g;
                let mut minus = state.g;
                plus[cc][dd] += c(step, 0.0);
                minus[cc][dd] -= c(step, 0.0);
                let dre = (energy(&plus) - energy(&minus)) / (2.0 * step);
                let mut plus = state.g;
                let mut minus = state.g;
                plus[cc][dd] += c(0.0, step);
                minus[cc][dd] -= c(0.0, step);
                let dim = (energy(&plus) - energy(&minus)) / (2.0 * step);
                // For a holomorphic polynomial, d/dRe = f' and d/dIm = i f'.
                grad[cc][dd] = (dre + dim * C64::new(0.0, -1.0)) * 0.5;
            }
        }
        let mut rhs = [[C64::new(0.0, 0.0); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = C64::new(0.0, 0.0);
                for cc in 0..3 {
                    for dd in 0..3 {
                        let mut bracket = C64::new(0.0, 0.0);
                        if b == cc {
                            bracket += state.g[a][dd];
                        }
                        if a == dd {
                            bracket -= state.g[cc][b];
                        }
                        acc += bracket * grad[cc][dd];
                    }
                }
                rhs[a][b] = acc * C64::new(0.0, -1.0); // divide by i
            }
        }
        rhs
    }

    #[test]
    fn eom_matches_poisson_bracket_oracle() {
        for (alpha, beta, n) in [(0.4, 0.3, 1.0), (1.0, 0.0, 1.0), (0.2, 0.6, 2.0)] {
            let state = fig6_state(alpha, beta, n);
            let direct = eom_rhs(&state);
            let oracle = bracket_rhs_finite_difference(&state);
            let scale = direct
                .iter()
                .flatten()
                .map(|x| x.norm())
                .fold(1e-9f64, f64::max);
            for a in 0..3 {
                for b in 0..3 {
                    let dev = (direct[a][b] - oracle[a][b]).norm();
                    assert!(
                        dev / scale < 1e-5,
                        "component ({a},{b}): {:?} vs {:?}",
                        direct[a][b],
                        oracle[a][b]
                    );
                }
            }
        }
    }

    #[test]
    fn casimir_examples() {
        let mut state = fig6_state(1.0, 0.0, 1.0);
        state.g = [
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ];
        let (c2, c3) = casimir_functions(&state).unwrap();
        assert_abs_diff_eq!(c2, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c3, 1.0, epsilon = 1e-14);

        let n = 2.0;
        for a in 0..3 {
            for b in 0..3 {
                state.g[a][b] = if a == b { c(n / 3.0, 0.0) } else { c(0.0, 0.0) };
            }
        }
        let (c2, c3) = casimir_functions(&state).unwrap();
        assert_abs_diff_eq!(c2, n * n / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c3, n * n * n / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn classical_energy_of_highest_weight() {
        // H = h on G = diag(1,0,0).
        let cp = CoherentParams::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 1.0, 0.0, 1.0).unwrap();
        let state = init_from_coherent(&cp, params_fig6());
        assert_abs_diff_eq!(state.energy(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn diagonal_initial_state_stays_constant() {
        let cp = CoherentParams::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 0.5, 0.0, 1.0).unwrap();
        let state = init_from_coherent(&cp, params_fig6());
        let traj = integrate(&state, 100.0, 1e-10, 50).unwrap();
        let end = traj.final_state();
        assert!(state.distance(end) < 1e-9);
    }

    #[test]
    fn fig6_trajectory_keeps_monitors_tight() {
        let state = fig6_state(0.4, 0.3, 1.0);
        let traj = integrate(&state, 50.0, 1e-10, 200).unwrap();
        let first = &traj.monitors[0];
        for m in &traj.monitors {
            assert!(m.max_drift(first) < 1e-8);
        }
        for s in &traj.states {
            assert!(s.hermiticity_defect() < 1e-10);
        }
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let state = fig6_state(0.4, 0.3, 1.0);
        let forward = integrate(&state, 20.0, 1e-10, 10).unwrap();
        // conj(G) evolves backwards: run it forward and conjugate again.
        let back = integrate(&forward.final_state().conjugated(), 20.0, 1e-10, 10).unwrap();
        let recovered = back.final_state().conjugated();
        assert!(
            state.distance(&recovered) < 1e-6,
            "reversal defect {}",
            state.distance(&recovered)
        );
    }

    #[test]
    fn zero_eps_gives_identically_zero_divergence() {
        let (g1, g2, g3) = gamma_fig6();
        let cp = CoherentParams::new(g1, g2, g3, 0.4, 0.3, 1.0).unwrap();
        let series =
            ensemble_divergence(&cp, params_fig6(), 4, 0.0, 5.0, 1e-10, 50, 7).unwrap();
        assert!(series.delta_r.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn divergence_starts_at_perturbation_scale() {
        let (g1, g2, g3) = gamma_fig6();
        let cp = CoherentParams::new(g1, g2, g3, 0.4, 0.3, 1.0).unwrap();
        let eps = 1e-7;
        let series =
            ensemble_divergence(&cp, params_fig6(), 6, eps, 1.0, 1e-10, 10, 11).unwrap();
        assert!(series.delta_r[0] > 0.0);
        // The chart map gamma -> G has O(1) Jacobian here, so the initial
        // distance is of the order of eps.
        assert!(series.delta_r[0] < 100.0 * eps);
        assert!(series.delta_r.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn synthetic_exponential_fit_recovers_rate() {
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.1).collect();
        let delta_r: Vec<f64> = times.iter().map(|&t| 1e-7 * (0.7 * t).exp()).collect();
        let series = DivergenceSeries {
            times,
            delta_r,
            ensemble: 2,
            eps: 1e-7,
            rep_monitors: Vec::new(),
        };
        let fit = lyapunov_fit(&series, (0.0, 19.9)).unwrap();
        assert_abs_diff_eq!(fit.lambda, 0.7, epsilon = 1e-6);
        assert!(fit.stderr < 1e-6);
        assert!(fit.r_squared > 0.999999);
    }

    fn synthetic_series(times: Vec<f64>, delta_r: Vec<f64>) -> DivergenceSeries {
        DivergenceSeries {
            times,
            delta_r,
            ensemble: 2,
            eps: 1e-7,
            rep_monitors: Vec::new(),
        }
    }

    #[test]
    fn saturated_series_window_clips_the_plateau() {
        // Exponential rise to a plateau: the window must end at a tenth of
        // the saturation value, well before the plateau.
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.1).collect();
        let delta_r: Vec<f64> = times
            .iter()
            .map(|&t| 1e-8 * (0.5 * t).exp() / (1.0 + 1e-8 * (0.5 * t).exp()))
            .collect();
        let series = synthetic_series(times, delta_r);
        let (t1, t2) = automatic_window(&series).unwrap();
        assert!(t1 > 0.0);
        assert!(t2 < 50.0, "window end {t2} reaches into the plateau");
        let fit = lyapunov_fit(&series, (t1, t2)).unwrap();
        assert!((fit.lambda - 0.5).abs() < 0.05);
        assert!(fit.lambda > 5.0 * fit.stderr);
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn unsaturated_series_window_extends_to_the_end() {
        // Linear growth never saturates; the pre-saturation regime is the
        // whole run and the fitted rate must be statistically consistent
        // with zero under the batch-means error.
        let times: Vec<f64> = (0..=1000).map(|k| k as f64).collect();
        let delta_r: Vec<f64> = times.iter().map(|&t| 1e-8 * (1.0 + t)).collect();
        let series = synthetic_series(times.clone(), delta_r);
        let (_, t2) = automatic_window(&series).unwrap();
        assert_eq!(t2, 1000.0);
        let fit = lyapunov_fit(&series, automatic_window(&series).unwrap()).unwrap();
        assert!(
            fit.lambda.abs() < 3.0 * fit.stderr,
            "linear growth misread as exponential: lambda {} vs 3 sigma {}",
            fit.lambda,
            3.0 * fit.stderr
        );
    }

    #[test]
    fn fit_rejects_nonpositive_values() {
        let series = DivergenceSeries {
            times: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            delta_r: vec![1.0, 0.5, 0.0, 0.5, 1.0],
            ensemble: 2,
            eps: 1e-7,
            rep_monitors: Vec::new(),
        };
        assert!(lyapunov_fit(&series, (0.0, 4.0)).is_err());
    }

    #[test]
    fn reduced_coordinate_examples() {
        let mut state = fig6_state(1.0, 0.0, 1.0);
        state.g = [
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ];
        let (q1, q2) = reduced_coordinates(&state);
        assert_abs_diff_eq!(q1, -1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q2, 0.75, epsilon = 1e-14);

        state.g[0][0] = c(0.0, 0.0);
        state.g[1][1] = c(1.0, 0.0);
        let (q1, q2) = reduced_coordinates(&state);
        assert_abs_diff_eq!(q1, 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q2, 0.0, epsilon = 1e-14);

        // Scalar G: q1 = 0.
        for a in 0..3 {
            state.g[a][a] = c(2.0 / 3.0, 0.0);
        }
        let (q1, _) = reduced_coordinates(&state);
        assert_abs_diff_eq!(q1, 0.0, epsilon = 1e-14);
    }
}
