//! Forward-backward scattering: factor the step-matrix product into a
//! forward pass `L` (from `-T0` to a split point) and a backward pass
//! `R^{-1}` (from `+T0` to the split), then combine.
//!
//! The combination removes the `a_N * R21/R11` term from `b` at eigenvalues,
//! which is what makes discrete amplitudes usable at small `N`: that term
//! amplifies the `a`-residual by `e^{2 eta T0}`.

use crate::error::{Error, Result};
use crate::kernels::{KernelKind, Propagator};
use crate::spectra::{ContinuousSpectrum, SampledPulse, ScatteringData};
use crate::C64;
use rayon::prelude::*;

/// Where to join the forward and backward recursions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPolicy {
    /// `m = round(c*N)`, clamped to the interior. `c = 1/2` is the default.
    Fixed { c: f64 },
    /// Minimize `|q(t)| e^{2 eta |t|}` over interior grid points; ties break
    /// toward the grid center.
    ArgMin,
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy::Fixed { c: 0.5 }
    }
}

/// Forward and backward passes joined at split index `m`: `w = (L11, L21)`
/// from the left, `v = (-R12, R11)` from the right, with their
/// lambda-derivatives. For real `lambda` the reconstructed `R` obeys
/// `R22 = R11*` and `R21 = -R12*`.
#[derive(Debug, Clone, Copy)]
pub struct SplitScatter {
    pub m: usize,
    pub w: [C64; 2],
    pub w_prime: [C64; 2],
    pub v: [C64; 2],
    pub v_prime: [C64; 2],
}

/// Raw split states at the policy's split point; `fb_scatter` combines them
/// into scattering data.
pub fn split_scatter(
    pulse: &SampledPulse,
    lambda: C64,
    kind: KernelKind,
    policy: SplitPolicy,
) -> SplitScatter {
    let prop = Propagator::new(pulse, kind);
    let m = split_index(pulse, lambda.im.max(0.0), policy);
    let s = prop.split_states(lambda, m);
    SplitScatter {
        m,
        w: s.w,
        w_prime: s.w_prime,
        v: s.v,
        v_prime: s.v_prime,
    }
}

/// Split index for the given pulse and growth rate `eta >= 0`.
pub fn split_index(pulse: &SampledPulse, eta: f64, policy: SplitPolicy) -> usize {
    let n = pulse.n_intervals();
    let clamp = |m: usize| m.clamp(1, n - 1);
    match policy {
        SplitPolicy::Fixed { c } => clamp((c * n as f64).round() as usize),
        SplitPolicy::ArgMin => {
            let mut best = n / 2;
            let mut best_val = f64::INFINITY;
            for m in 1..n {
                let t = pulse.time(m);
                let val = pulse.samples()[m].norm() * (2.0 * eta * t.abs()).exp();
                // ties break toward the grid center, then toward smaller m
                let better = val < best_val
                    || (val == best_val && (2 * m).abs_diff(n) < (2 * best).abs_diff(n));
                if better {
                    best = m;
                    best_val = val;
                }
            }
            clamp(best)
        }
    }
}

fn vector_is_finite(v: &[C64; 2]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Stabilized scattering pass. `at_eigenvalue` selects the eigenvalue form of
/// the `b` extraction (`b = L21/R11`), which the caller asserts by passing a
/// `lambda` that is a (numerical) zero of `a`.
///
/// ```
/// use nft_core::{fb_scatter, C64, KernelKind, SampledPulse, SplitPolicy};
///
/// let quiet = SampledPulse::zeros(5.0, 65)?;
/// let s = fb_scatter(
///     &quiet,
///     C64::new(0.3, 0.4),
///     KernelKind::Trapezoid,
///     SplitPolicy::default(),
///     false,
/// )?;
/// assert_eq!(s.a, C64::new(1.0, 0.0));
/// assert_eq!(s.b, C64::new(0.0, 0.0));
/// # Ok::<(), nft_core::Error>(())
/// ```
pub fn fb_scatter(
    pulse: &SampledPulse,
    lambda: C64,
    kind: KernelKind,
    policy: SplitPolicy,
    at_eigenvalue: bool,
) -> Result<ScatteringData> {
    fb_scatter_prepared(&Propagator::new(pulse, kind), lambda, policy, at_eigenvalue)
}

/// [`fb_scatter`] against a reusable per-pulse propagator; the eigensolver
/// calls this in its Newton loops.
pub(crate) fn fb_scatter_prepared(
    prop: &Propagator,
    lambda: C64,
    policy: SplitPolicy,
    at_eigenvalue: bool,
) -> Result<ScatteringData> {
    let m = split_index(prop.pulse(), lambda.im.max(0.0), policy);
    let s = prop.split_states(lambda, m);
    if !(vector_is_finite(&s.w)
        && vector_is_finite(&s.w_prime)
        && vector_is_finite(&s.v)
        && vector_is_finite(&s.v_prime))
    {
        return Err(Error::Overflow);
    }

    // w_m = (L11, L21), v_m = (-R12, R11)
    let a = s.w[0] * s.v[1] - s.v[0] * s.w[1];
    let a_prime =
        s.w_prime[0] * s.v[1] + s.w[0] * s.v_prime[1] - s.v_prime[0] * s.w[1] - s.v[0] * s.w_prime[1];

    let v2 = s.v[1];
    let singular = {
        let scale = s.v[0].norm().max(s.v[1].norm());
        v2.norm() <= 1e-12 * scale || v2.norm() == 0.0
    };
    let ratio_prime = |num: C64, num_prime: C64| (num_prime * v2 - num * s.v_prime[1]) / (v2 * v2);

    let (b, b_prime) = if at_eigenvalue || (lambda.im != 0.0 && a.norm() < 1e-3) {
        // b = L21 / R11
        if singular {
            return Err(Error::SplitSingularity);
        }
        let b = s.w[1] / v2;
        (b, Some(ratio_prime(s.w[1], s.w_prime[1])))
    } else if lambda.im == 0.0 {
        // b = R21 L11 + R22 L21 with the real-axis conjugation symmetry
        // R21 = -R12*, R22 = R11* reads b = v1* w1 + v2* w2 directly off the
        // split states: division-free, stable even where R11 vanishes
        let b = s.v[0].conj() * s.w[0] + s.v[1].conj() * s.w[1];
        let bp = s.v_prime[0].conj() * s.w[0]
            + s.v[0].conj() * s.w_prime[0]
            + s.v_prime[1].conj() * s.w[1]
            + s.v[1].conj() * s.w_prime[1];
        (b, Some(bp))
    } else {
        // general combination off the real axis, away from zeros of a:
        // R21 comes from the second backward column (R22, -R21)
        if singular {
            return Err(Error::SplitSingularity);
        }
        let u = prop.backward_second_column(lambda, m);
        if !vector_is_finite(&u) {
            return Err(Error::Overflow);
        }
        let r21 = -u[1];
        let b = a * r21 / v2 + s.w[1] / v2;
        (b, None)
    };

    Ok(ScatteringData {
        a,
        b,
        a_prime,
        b_prime,
    })
}

/// Continuous spectrum `Q_c(lambda) = b/a` on a real grid; one `fb_scatter`
/// per point, evaluated as a parallel map. Points where `a` vanishes (or the
/// pass fails) are marked NaN and reported by index.
pub fn fb_continuous_spectrum(
    pulse: &SampledPulse,
    lambda_grid: &[f64],
    kind: KernelKind,
    policy: SplitPolicy,
) -> Result<(ContinuousSpectrum, Vec<usize>)> {
    let prop = Propagator::new(pulse, kind);
    let qc: Vec<C64> = lambda_grid
        .par_iter()
        .map(|&lam| {
            match fb_scatter_prepared(&prop, C64::new(lam, 0.0), policy, false) {
                Ok(s) if s.a.norm() > 1e-14 => {
                    let qc = s.continuous_amplitude();
                    if qc.re.is_finite() && qc.im.is_finite() {
                        qc
                    } else {
                        C64::new(f64::NAN, f64::NAN)
                    }
                }
                _ => C64::new(f64::NAN, f64::NAN),
            }
        })
        .collect();
    let singular: Vec<usize> = qc
        .iter()
        .enumerate()
        .filter(|(_, q)| !(q.re.is_finite() && q.im.is_finite()))
        .map(|(i, _)| i)
        .collect();
    let spectrum = ContinuousSpectrum::new(lambda_grid.to_vec(), qc)?;
    Ok((spectrum, singular))
}
