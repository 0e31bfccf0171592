//! One-step transfer-matrix discretizations of the Zakharov-Shabat scattering
//! recursion, producing `(a, b, a', b')` by left-to-right propagation.
//!
//! All kernels act on the phase-stripped vector `psi = (phi1 e^{j lambda t},
//! phi2 e^{-j lambda t})`, so the step matrices carry the oscillating factors
//! `e^{+-(j theta_n + 2j lambda t_n)}` on the off-diagonal.

use crate::error::{Error, Result};
use crate::spectra::{SampledPulse, ScatteringData, TransferMatrix};
use crate::C64;

/// Discretization kernel taxonomy.
///
/// Only `Trapezoid` carries the half-step boundary corrections
/// `G_0^{+1/2}`, `G_N^{-1/2}`; the others are pure products of N step
/// matrices. `AblowitzLadik` is reproduction-grade: it reproduces the known
/// blow-up of discrete amplitudes and is excluded from tight tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Trapezoid,
    Euler,
    CrankNicolson,
    AblowitzLadik,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Trapezoid,
        KernelKind::Euler,
        KernelKind::CrankNicolson,
        KernelKind::AblowitzLadik,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Trapezoid => "trapezoid",
            KernelKind::Euler => "euler",
            KernelKind::CrankNicolson => "cn",
            KernelKind::AblowitzLadik => "al",
        }
    }
}

/// Diagonal and off-diagonal magnitudes of one step matrix
/// `[[diag, off*e], [-off/e, diag]]` for step size `h` (sign of `h` selects
/// the step or its inverse-by-adjugate form).
fn step_coeffs(kind: KernelKind, q_abs: f64, h: f64) -> (f64, f64) {
    match kind {
        KernelKind::Trapezoid => {
            let arg = q_abs * h;
            (arg.cos(), arg.sin())
        }
        KernelKind::Euler => (1.0, h * q_abs),
        KernelKind::CrankNicolson => {
            let x = 0.25 * h * h * q_abs * q_abs;
            ((1.0 - x) / (1.0 + x), h * q_abs / (1.0 + x))
        }
        KernelKind::AblowitzLadik => {
            let norm = (1.0 + h * h * q_abs * q_abs).sqrt();
            (1.0 / norm, h * q_abs / norm)
        }
    }
}

/// Off-diagonal phase factors: `ep = e^{j theta + 2j lambda t}` and
/// `em = e^{-j theta - 2j lambda t}` with `theta = arg(q)` (zero for `q = 0`,
/// where the sin factor kills the entry anyway).
fn phase_factors(q: C64, t: f64, lambda: C64) -> (C64, C64) {
    let q_abs = q.norm();
    let unit = if q_abs == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        q / q_abs
    };
    let arg = C64::i() * 2.0 * lambda * t;
    (unit * arg.exp(), unit.conj() * (-arg).exp())
}

fn assemble(diag: f64, off: f64, ep: C64, em: C64) -> TransferMatrix {
    TransferMatrix {
        m11: C64::new(diag, 0.0),
        m12: off * ep,
        m21: -off * em,
        m22: C64::new(diag, 0.0),
    }
}

/// One discretization step `G_n` for the chosen kernel.
pub fn step_matrix(kind: KernelKind, q_n: C64, t_n: f64, lambda: C64, h: f64) -> TransferMatrix {
    let (diag, off) = step_coeffs(kind, q_n.norm(), h);
    let (ep, em) = phase_factors(q_n, t_n, lambda);
    assemble(diag, off, ep, em)
}

/// Exact `dG_n/dlambda`: `2j t_n * off * [[0, ep], [em, 0]]`.
pub fn step_matrix_dlambda(
    kind: KernelKind,
    q_n: C64,
    t_n: f64,
    lambda: C64,
    h: f64,
) -> TransferMatrix {
    let (_, off) = step_coeffs(kind, q_n.norm(), h);
    let (ep, em) = phase_factors(q_n, t_n, lambda);
    let scale = C64::i() * 2.0 * t_n * off;
    TransferMatrix {
        m11: C64::new(0.0, 0.0),
        m12: scale * ep,
        m21: scale * em,
        m22: C64::new(0.0, 0.0),
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct State {
    v: [C64; 2],
    dv: [C64; 2],
}

impl State {
    /// Step with entries diag, off*ep, -off*em and derivative
    /// dcoef*[[0, ep], [em, 0]]; the derivative update consumes the pre-step
    /// vector.
    #[inline]
    fn advance_assembled(&mut self, diag: f64, off: f64, ep: C64, em: C64, dcoef: C64) {
        let [v1, v2] = self.v;
        let [dv1, dv2] = self.dv;
        let ep_off = off * ep;
        let em_off = off * em;
        self.dv = [
            diag * dv1 + ep_off * dv2 + dcoef * ep * v2,
            -em_off * dv1 + diag * dv2 + dcoef * em * v1,
        ];
        self.v = [diag * v1 + ep_off * v2, -em_off * v1 + diag * v2];
    }

    fn is_finite(&self) -> bool {
        self.v
            .iter()
            .chain(self.dv.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

pub(crate) use internals::Propagator;

pub(crate) mod internals {
    //! Propagation machinery shared by the plain pass, the forward-backward
    //! module and the eigensolver. Lambda-independent step data is computed
    //! once per pulse; the oscillating phases are tabulated per lambda with
    //! a block-anchored recurrence so that every pass sees bit-identical
    //! step matrices.
    use super::*;

    const ANCHOR_BLOCK: usize = 64;

    /// Forward and backward states joined at a split index.
    pub struct SplitStates {
        pub w: [C64; 2],
        pub w_prime: [C64; 2],
        pub v: [C64; 2],
        pub v_prime: [C64; 2],
    }

    pub struct Propagator<'a> {
        pulse: &'a SampledPulse,
        kind: KernelKind,
        /// q_n/|q_n| (1 where q_n = 0)
        unit: Vec<C64>,
        /// (diag, off) of the full step at each sample
        coeffs: Vec<(f64, f64)>,
        /// (diag, off) of the boundary half-steps (trapezoid only)
        half_first: (f64, f64),
        half_last: (f64, f64),
    }

    /// Phase tables `e^{+j 2 lambda t_n}` and `e^{-j 2 lambda t_n}`,
    /// anchored on exact exponentials every [`ANCHOR_BLOCK`] samples.
    pub struct PhaseTable {
        plus: Vec<C64>,
        minus: Vec<C64>,
    }

    impl<'a> Propagator<'a> {
        pub fn new(pulse: &'a SampledPulse, kind: KernelKind) -> Self {
            let h = pulse.step();
            let unit: Vec<C64> = pulse
                .samples()
                .iter()
                .map(|q| {
                    let qa = q.norm();
                    if qa == 0.0 {
                        C64::new(1.0, 0.0)
                    } else {
                        q / qa
                    }
                })
                .collect();
            let coeffs: Vec<(f64, f64)> = pulse
                .samples()
                .iter()
                .map(|q| step_coeffs(kind, q.norm(), h))
                .collect();
            let n_last = pulse.n_intervals();
            let half_first = step_coeffs(kind, pulse.samples()[0].norm(), 0.5 * h);
            let half_last = step_coeffs(kind, pulse.samples()[n_last].norm(), 0.5 * h);
            Self {
                pulse,
                kind,
                unit,
                coeffs,
                half_first,
                half_last,
            }
        }

        pub fn pulse(&self) -> &SampledPulse {
            self.pulse
        }

        pub fn phases(&self, lambda: C64) -> PhaseTable {
            let n = self.pulse.n_samples();
            let h = self.pulse.step();
            let step_p = (C64::i() * 2.0 * lambda * h).exp();
            let step_m = (-C64::i() * 2.0 * lambda * h).exp();
            let mut plus = Vec::with_capacity(n);
            let mut minus = Vec::with_capacity(n);
            for block in (0..n).step_by(ANCHOR_BLOCK) {
                let t = self.pulse.time(block);
                let arg = C64::i() * 2.0 * lambda * t;
                plus.push(arg.exp());
                minus.push((-arg).exp());
                let end = (block + ANCHOR_BLOCK).min(n);
                for k in block + 1..end {
                    let prev_p = plus[k - 1];
                    let prev_m = minus[k - 1];
                    plus.push(prev_p * step_p);
                    minus.push(prev_m * step_m);
                }
            }
            PhaseTable { plus, minus }
        }

        /// One full or half step at sample `n`. `scale` selects full (1.0),
        /// boundary half (0.5) or their adjugates (negative).
        #[inline]
        fn apply(&self, state: &mut State, n: usize, phases: &PhaseTable, dir: StepForm) {
            let (diag, off) = match dir {
                StepForm::Full => self.coeffs[n],
                StepForm::Adjugate => {
                    let (d, o) = self.coeffs[n];
                    (d, -o)
                }
                StepForm::HalfFirst => self.half_first,
                StepForm::HalfLastForward => {
                    let (d, o) = self.half_last;
                    (d, -o) // G_N^{-1/2} closes the plain pass
                }
                StepForm::HalfLastBackward => self.half_last,
            };
            let ep = self.unit[n] * phases.plus[n];
            let em = self.unit[n].conj() * phases.minus[n];
            // off carries the form's sign, and the derivative of
            // [[diag, off*ep], [-off*em, diag]] is 2j t off [[0, ep], [em, 0]]
            // for every form
            let dcoef = C64::i() * 2.0 * self.pulse.time(n) * off;
            state.advance_assembled(diag, off, ep, em, dcoef);
        }

        /// Forward recursion from `-T0` through sample `m` inclusive,
        /// starting from `(1, 0)`; trapezoid seeds with `G_0^{+1/2}`.
        pub fn forward_state(&self, phases: &PhaseTable, m: usize) -> State {
            let mut state = State {
                v: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                dv: [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            };
            if self.kind == KernelKind::Trapezoid {
                self.apply(&mut state, 0, phases, StepForm::HalfFirst);
            }
            for n in 1..=m {
                self.apply(&mut state, n, phases, StepForm::Full);
            }
            state
        }

        /// Backward recursion from `+T0` down to sample `m`, starting from
        /// the given column; trapezoid seeds with `G_N^{+1/2}`, then inverse
        /// steps via the closed form `h -> -h`.
        pub fn backward_state(&self, phases: &PhaseTable, m: usize, column: [C64; 2]) -> State {
            let n_last = self.pulse.n_intervals();
            let mut state = State {
                v: column,
                dv: [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            };
            if self.kind == KernelKind::Trapezoid {
                self.apply(&mut state, n_last, phases, StepForm::HalfLastBackward);
            }
            for n in (m + 1..=n_last).rev() {
                self.apply(&mut state, n, phases, StepForm::Adjugate);
            }
            state
        }

        pub fn split_states(&self, lambda: C64, m: usize) -> SplitStates {
            let phases = self.phases(lambda);
            let fwd = self.forward_state(&phases, m);
            let bwd = self.backward_state(&phases, m, [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
            SplitStates {
                w: fwd.v,
                w_prime: fwd.dv,
                v: bwd.v,
                v_prime: bwd.dv,
            }
        }

        /// Second backward column `(R22, -R21)`.
        pub fn backward_second_column(&self, lambda: C64, m: usize) -> [C64; 2] {
            let phases = self.phases(lambda);
            self.backward_state(&phases, m, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
                .v
        }

        /// Whole-window pass producing `(a, b, a', b')`.
        pub fn scatter_full(&self, lambda: C64) -> Result<ScatteringData> {
            let phases = self.phases(lambda);
            let n_last = self.pulse.n_intervals();
            let mut state = self.forward_state(&phases, n_last);
            if self.kind == KernelKind::Trapezoid {
                // close with G_N^{-1/2}; its derivative contributes the
                // -2j t_N sin(|q_N| h/2) correction
                self.apply(&mut state, n_last, &phases, StepForm::HalfLastForward);
            }
            if !state.is_finite() {
                return Err(Error::Overflow);
            }
            Ok(ScatteringData {
                a: state.v[0],
                b: state.v[1],
                a_prime: state.dv[0],
                b_prime: Some(state.dv[1]),
            })
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum StepForm {
        Full,
        Adjugate,
        HalfFirst,
        HalfLastForward,
        HalfLastBackward,
    }
}

/// Single-pass scattering over the whole window: `a_N, b_N` with the
/// boundary half-steps (trapezoid) and `a'_N, b'_N` from the coupled
/// derivative recursion.
pub fn forward_scatter(
    pulse: &SampledPulse,
    lambda: C64,
    kind: KernelKind,
) -> Result<ScatteringData> {
    Propagator::new(pulse, kind).scatter_full(lambda)
}

/// Per-scheme absolute errors `|x_N - exp(integral)|` for the scalar test
/// problem `x' = f(t) x`, `x(0) = 1` on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDemoErrors {
    pub trapezoid: f64,
    pub euler: f64,
    pub crank_nicolson: f64,
}

/// Endpoint values `x_N` of the scalar test problem under the three schemes,
/// ordered (trapezoid, euler, crank-nicolson). The trapezoid scheme is
/// `x_{n+1} = e^{(h/2) f(t_{n+1})} e^{(h/2) f(t_n)} x_n`.
pub fn scalar_scheme_values<F: Fn(f64) -> f64>(f: F, t_end: f64, n: usize) -> [f64; 3] {
    assert!(n > 0, "need at least one step");
    let h = t_end / n as f64;
    let mut x_trap = 1.0_f64;
    let mut x_euler = 1.0_f64;
    let mut x_cn = 1.0_f64;
    for i in 0..n {
        let t0 = i as f64 * h;
        let t1 = (i + 1) as f64 * h;
        x_trap *= (0.5 * h * f(t1)).exp() * (0.5 * h * f(t0)).exp();
        x_euler *= 1.0 + h * f(t0);
        x_cn *= (1.0 + 0.5 * h * f(t0)) / (1.0 - 0.5 * h * f(t1));
    }
    [x_trap, x_euler, x_cn]
}

/// Convergence-study harness: absolute endpoint errors of the three schemes
/// against `exp(exact_integral)`, the caller's closed-form (or
/// high-precision) value of the integral of `f` over the window.
pub fn scalar_scheme_errors<F: Fn(f64) -> f64>(
    f: F,
    exact_integral: f64,
    t_end: f64,
    n: usize,
) -> ScalarDemoErrors {
    let exact = exact_integral.exp();
    let [x_trap, x_euler, x_cn] = scalar_scheme_values(f, t_end, n);
    ScalarDemoErrors {
        trapezoid: (x_trap - exact).abs(),
        euler: (x_euler - exact).abs(),
        crank_nicolson: (x_cn - exact).abs(),
    }
}
