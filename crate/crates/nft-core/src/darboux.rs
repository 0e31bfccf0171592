//! N-soliton synthesis from a prescribed discrete spectrum via the Darboux
//! recursion, and the spectral bookkeeping for adding one eigenvalue to an
//! existing spectrum.
//!
//! The default synthesis path tracks only the ratios
//! `rho_k = -v_{k,2}/v_{k,1}` (half the state of the vector recursion). The
//! vector recursion is kept behind [`DarbouxAlgorithm::VectorRecursion`] as
//! an equivalence reference.

use crate::error::{Error, Result};
use crate::spectra::{ContinuousSpectrum, DiscretePoint, DiscreteSpectrum, SampledPulse};
use crate::C64;

/// Relative tail magnitude above which a synthesis grid is considered too
/// narrow for the prescribed spectrum.
pub const TAIL_WARN_RATIO: f64 = 1e-6;

/// Norming factor `B_i` (with `A_i = 1`) that makes the recursion land on
/// the prescribed amplitude `Q_d(lambda_i)`:
///
/// `B_i = -Q_d(lambda_i)/(lambda_i - lambda_i*)
///        * prod_{k != i} (lambda_i - lambda_k)/(lambda_i - lambda_k*)`
pub fn norming_factor(i: usize, spectrum: &DiscreteSpectrum) -> Result<C64> {
    let points = spectrum.points();
    assert!(i < points.len(), "eigenvalue index out of range");
    let qd = points[i].qd;
    if qd.norm() == 0.0 {
        return Err(Error::ZeroAmplitude { index: i });
    }
    let lambda_i = points[i].lambda;
    let mut b = -qd / (lambda_i - lambda_i.conj());
    for (k, p) in points.iter().enumerate() {
        if k != i {
            b *= (lambda_i - p.lambda) / (lambda_i - p.lambda.conj());
        }
    }
    Ok(b)
}

/// `rho*/(1 + |rho|^2)` and `1/(1 + |rho|^2)`, valid for `|rho|` up to and
/// beyond the overflow threshold of `|rho|^2`. For `|rho| > 1` both are
/// evaluated through the reciprocal `u = 1/rho`, which maps the pair to
/// `u/(1 + |u|^2)` and `|u|^2/(1 + |u|^2)`.
fn mobius_terms(rho: C64) -> (C64, f64) {
    if !(rho.re.is_finite() && rho.im.is_finite()) {
        return (C64::new(0.0, 0.0), 0.0);
    }
    if rho.re.abs().max(rho.im.abs()) <= 1.0 {
        let g = 1.0 / (1.0 + rho.norm_sqr());
        (rho.conj() * g, g)
    } else {
        let u = stable_recip(rho);
        let gu = 1.0 / (1.0 + u.norm_sqr());
        (u * gu, u.norm_sqr() * gu)
    }
}

/// Overflow-free complex reciprocal (Smith's algorithm); only called with
/// `max(|re|, |im|) > 1`.
fn stable_recip(z: C64) -> C64 {
    if z.re.abs() >= z.im.abs() {
        let r = z.im / z.re;
        let d = z.re + z.im * r;
        C64::new(1.0 / d, -r / d)
    } else {
        let r = z.re / z.im;
        let d = z.re * r + z.im;
        C64::new(r / d, -1.0 / d)
    }
}

/// Intermediate synthesis state: `stage` eigenvalues absorbed into `pulse`,
/// one ratio array per eigenvalue still to absorb.
#[derive(Debug, Clone)]
pub struct DarbouxState {
    stage: usize,
    lambdas: Vec<C64>,
    pulse: SampledPulse,
    ratios: Vec<Vec<C64>>,
}

impl DarbouxState {
    /// Stage-0 state on the given grid: zero pulse and
    /// `rho_i(t) = (Q_d(lambda_i)/(lambda_i - lambda_i*))
    ///             prod_{k != i} ((lambda_i - lambda_k)/(lambda_i - lambda_k*))
    ///             e^{2j lambda_i t}`
    /// (equivalently `-B_i e^{2j lambda_i t}`), in the order the spectrum
    /// lists its points.
    pub fn initial(
        spectrum: &DiscreteSpectrum,
        t0_half_width: f64,
        n_samples: usize,
    ) -> Result<Self> {
        let pulse = SampledPulse::zeros(t0_half_width, n_samples)?;
        let lambdas: Vec<C64> = spectrum.points().iter().map(|p| p.lambda).collect();
        let mut ratios = Vec::with_capacity(lambdas.len());
        for (i, &lambda_i) in lambdas.iter().enumerate() {
            let coeff = -norming_factor(i, spectrum)?;
            let rho: Vec<C64> = (0..n_samples)
                .map(|n| coeff * (C64::i() * 2.0 * lambda_i * pulse.time(n)).exp())
                .collect();
            ratios.push(rho);
        }
        Ok(Self {
            stage: 0,
            lambdas,
            pulse,
            ratios,
        })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn pulse(&self) -> &SampledPulse {
        &self.pulse
    }

    pub fn ratios(&self) -> &[Vec<C64>] {
        &self.ratios
    }

    pub fn is_complete(&self) -> bool {
        self.stage == self.lambdas.len()
    }

    /// Absorb the next eigenvalue: update the pulse pointwise by
    /// `q += 2j (lambda_i - lambda_i*) rho*/(1 + |rho|^2)` and every
    /// remaining ratio by the fraction of the ratio recursion.
    pub fn step(self) -> Result<Self> {
        assert!(!self.is_complete(), "all eigenvalues already absorbed");
        let Self {
            stage,
            lambdas,
            pulse,
            mut ratios,
        } = self;
        let lambda_i = lambdas[stage];
        let xi = lambda_i - lambda_i.conj();
        let rho = ratios.remove(0);

        let mut samples = pulse.samples().to_vec();
        let two_j_xi = C64::i() * 2.0 * xi;
        let mut mobius = Vec::with_capacity(rho.len());
        for (&r, q) in rho.iter().zip(samples.iter_mut()) {
            let (mk, g) = mobius_terms(r);
            *q += two_j_xi * mk;
            mobius.push((mk, g));
        }

        for (k_rel, rho_k) in ratios.iter_mut().enumerate() {
            let lambda_k = lambdas[stage + 1 + k_rel];
            let num_base = lambda_k - lambda_i;
            let den_base = lambda_k - lambda_i.conj();
            for (t_index, rk) in rho_k.iter_mut().enumerate() {
                let (mk, g) = mobius[t_index];
                // g*rho = conj(mk) since g is real
                let num = num_base * *rk + xi * (g * *rk - mk.conj());
                let den = den_base - xi * (C64::new(g, 0.0) + mk * *rk);
                if den.norm() == 0.0 {
                    return Err(Error::DegenerateUpdate { stage, t_index });
                }
                *rk = num / den;
            }
        }

        Ok(Self {
            stage: stage + 1,
            lambdas,
            pulse: SampledPulse::new(pulse.t0_half_width(), samples)?,
            ratios,
        })
    }
}

/// Which recursion carries the synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DarbouxAlgorithm {
    /// Ratio recursion over `rho_k = -v_{k,2}/v_{k,1}` (default; half the
    /// state, overflow-guarded).
    RatioRecursion,
    /// Explicit two-component recursion; reference implementation for the
    /// equivalence check.
    VectorRecursion,
}

/// A synthesized pulse plus the post-hoc window diagnostic
/// `tail_ratio = max(|q(-T0)|, |q(T0)|) / max|q|`.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub pulse: SampledPulse,
    pub tail_ratio: f64,
}

impl Synthesis {
    /// True when the window is too narrow for the prescribed spectrum.
    pub fn tail_warning(&self) -> bool {
        self.tail_ratio > TAIL_WARN_RATIO
    }
}

/// Default synthesis grid for a spectrum: window wide enough for the slowest
/// eigenvalue decay rate, `T0 = max(5, 10/min_i 2 Im(lambda_i))`, with 2048
/// grid intervals (2049 samples).
pub fn default_grid(spectrum: &DiscreteSpectrum) -> (f64, usize) {
    let min_im = spectrum
        .points()
        .iter()
        .map(|p| p.lambda.im)
        .fold(f64::INFINITY, f64::min);
    let t0 = if min_im.is_finite() {
        (10.0 / (2.0 * min_im)).max(5.0)
    } else {
        5.0
    };
    (t0, 2049)
}

/// Construct the N-solitary waveform for the given discrete spectrum on a
/// symmetric grid, absorbing eigenvalues in ascending `Im(lambda)` order.
///
/// ```
/// use nft_core::{synthesize, C64, DiscretePoint, DiscreteSpectrum};
///
/// // the one-soliton (0.5j, -j) is exactly q(t) = sech(t)
/// let spec = DiscreteSpectrum::new(vec![DiscretePoint {
///     lambda: C64::new(0.0, 0.5),
///     qd: C64::new(0.0, -1.0),
///     b: None,
/// }])?;
/// let syn = synthesize(&spec, 10.0, 257)?;
/// let q0 = syn.pulse.samples()[128];
/// assert!((q0 - C64::new(1.0, 0.0)).norm() < 1e-12);
/// # Ok::<(), nft_core::Error>(())
/// ```
pub fn synthesize(
    spectrum: &DiscreteSpectrum,
    t0_half_width: f64,
    n_samples: usize,
) -> Result<Synthesis> {
    synthesize_with(
        spectrum,
        t0_half_width,
        n_samples,
        DarbouxAlgorithm::RatioRecursion,
    )
}

pub fn synthesize_with(
    spectrum: &DiscreteSpectrum,
    t0_half_width: f64,
    n_samples: usize,
    algorithm: DarbouxAlgorithm,
) -> Result<Synthesis> {
    let ordered = spectrum.sorted_by_im();
    let pulse = match algorithm {
        DarbouxAlgorithm::RatioRecursion => {
            let mut state = DarbouxState::initial(&ordered, t0_half_width, n_samples)?;
            while !state.is_complete() {
                state = state.step()?;
            }
            state.pulse
        }
        DarbouxAlgorithm::VectorRecursion => {
            synthesize_vector_recursion(&ordered, t0_half_width, n_samples)?
        }
    };
    let peak = pulse.peak();
    let tail = pulse.samples()[0]
        .norm()
        .max(pulse.samples()[n_samples - 1].norm());
    let tail_ratio = if peak > 0.0 { tail / peak } else { 0.0 };
    Ok(Synthesis { pulse, tail_ratio })
}

fn synthesize_vector_recursion(
    spectrum: &DiscreteSpectrum,
    t0_half_width: f64,
    n_samples: usize,
) -> Result<SampledPulse> {
    let grid = SampledPulse::zeros(t0_half_width, n_samples)?;
    let lambdas: Vec<C64> = spectrum.points().iter().map(|p| p.lambda).collect();
    let n_eigen = lambdas.len();

    // v_i(t) = (e^{-j lambda_i t}, B_i e^{+j lambda_i t})
    let mut vectors: Vec<(Vec<C64>, Vec<C64>)> = Vec::with_capacity(n_eigen);
    for (i, &lambda_i) in lambdas.iter().enumerate() {
        let b_i = norming_factor(i, spectrum)?;
        let mut v1 = Vec::with_capacity(n_samples);
        let mut v2 = Vec::with_capacity(n_samples);
        for n in 0..n_samples {
            let t = grid.time(n);
            v1.push((-C64::i() * lambda_i * t).exp());
            v2.push(b_i * (C64::i() * lambda_i * t).exp());
        }
        vectors.push((v1, v2));
    }

    let mut samples = vec![C64::new(0.0, 0.0); n_samples];
    for i in 0..n_eigen {
        let lambda_i = lambdas[i];
        let xi = lambda_i - lambda_i.conj();
        let (psi1, psi2) = vectors[i].clone();
        for n in 0..n_samples {
            let s = psi1[n].norm_sqr() + psi2[n].norm_sqr();
            samples[n] -= C64::i() * 2.0 * xi * psi2[n].conj() * psi1[n] / s;
        }
        for (k, (v1, v2)) in vectors.iter_mut().enumerate().skip(i + 1) {
            let lambda_k = lambdas[k];
            for n in 0..n_samples {
                let s = psi1[n].norm_sqr() + psi2[n].norm_sqr();
                let proj = xi * psi1[n].norm_sqr() / s;
                let cross = xi * psi2[n].conj() * psi1[n] / s;
                // the v2 coefficient is -xi psi2 psi1*/s = conj(cross), since
                // conjugation flips the purely imaginary xi
                let new_v1 = (lambda_k - lambda_i.conj() - proj) * v1[n] - cross * v2[n];
                let new_v2 = cross.conj() * v1[n] + (lambda_k - lambda_i + proj) * v2[n];
                v1[n] = new_v1;
                v2[n] = new_v2;
            }
        }
    }
    SampledPulse::new(t0_half_width, samples)
}

/// Spectrum of the Darboux-augmented signal: existing amplitudes pick up the
/// factor `(lambda_i - lambda_0*)/(lambda_i - lambda_0)` and the continuous
/// spectrum the same factor pointwise.
///
/// `qd0` is the new point's intrinsic (bare one-soliton) amplitude, i.e. the
/// `(A, B)`-seed parametrization `-(lambda_0 - lambda_0*) B/A`; against the
/// existing eigenvalues it picks up the mirror factors
/// `(lambda_0 - lambda_k*)/(lambda_0 - lambda_k)`, which is what makes
/// repeated insertions commute. On an empty spectrum the point lands as
/// `(lambda_0, qd0)` unchanged.
pub fn add_eigenvalue(
    discrete: &DiscreteSpectrum,
    continuous: Option<&ContinuousSpectrum>,
    lambda0: C64,
    qd0: C64,
) -> Result<(DiscreteSpectrum, Option<ContinuousSpectrum>)> {
    if lambda0.im <= 0.0 {
        return Err(Error::InvalidSpectrum(format!(
            "new eigenvalue must lie in the open upper half-plane, got {lambda0}"
        )));
    }
    let radius = discrete.min_separation();
    if discrete
        .points()
        .iter()
        .any(|p| (p.lambda - lambda0).norm() < radius)
    {
        return Err(Error::EigenvalueCollision {
            re: lambda0.re,
            im: lambda0.im,
        });
    }

    let mut points: Vec<DiscretePoint> = discrete
        .points()
        .iter()
        .map(|p| DiscretePoint {
            lambda: p.lambda,
            qd: p.qd * (p.lambda - lambda0.conj()) / (p.lambda - lambda0),
            // b at existing eigenvalues is invariant under the transform
            b: p.b,
        })
        .collect();

    let mut qd_new = qd0;
    for p in discrete.points() {
        qd_new *= (lambda0 - p.lambda.conj()) / (lambda0 - p.lambda);
    }
    points.push(DiscretePoint {
        lambda: lambda0,
        // the closed form collapses: b = Q_d(lambda_0) a'(lambda_0)
        //                              = qd0/(lambda_0 - lambda_0*)
        b: Some(qd0 / (lambda0 - lambda0.conj())),
        qd: qd_new,
    });

    let updated_continuous = continuous.map(|qc| {
        let updated: Vec<C64> = qc
            .lambda_grid()
            .iter()
            .zip(qc.qc())
            .map(|(&lam, &q)| {
                let lam = C64::new(lam, 0.0);
                q * (lam - lambda0.conj()) / (lam - lambda0)
            })
            .collect();
        ContinuousSpectrum::new(qc.lambda_grid().to_vec(), updated)
            .expect("grid unchanged, still valid")
    });

    Ok((
        DiscreteSpectrum::with_min_separation(points, radius)?,
        updated_continuous,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn point(lambda: C64, qd: C64) -> DiscretePoint {
        DiscretePoint {
            lambda,
            qd,
            b: None,
        }
    }

    fn spectrum(points: Vec<DiscretePoint>) -> DiscreteSpectrum {
        DiscreteSpectrum::new(points).unwrap()
    }

    #[test]
    fn norming_factor_single_soliton() {
        // lambda = 0.5j, Q_d = -j: B = -(-j)/j * (empty product) = 1
        let spec = spectrum(vec![point(c(0.0, 0.5), c(0.0, -1.0))]);
        let b = norming_factor(0, &spec).unwrap();
        assert_abs_diff_eq!((b - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn norming_factor_is_linear_in_qd() {
        let spec1 = spectrum(vec![point(c(0.2, 0.8), c(1.0, -0.5))]);
        let spec2 = spectrum(vec![point(c(0.2, 0.8), c(1.0, -0.5) * c(2.5, 1.0))]);
        let b1 = norming_factor(0, &spec1).unwrap();
        let b2 = norming_factor(0, &spec2).unwrap();
        assert_abs_diff_eq!((b2 - b1 * c(2.5, 1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn norming_factor_two_soliton() {
        // lambda = {0.5j, 1j}, Q_d = {3, -6}:
        // B_1 = -(3/j) * ((0.5j - 1j)/(0.5j + 1j)) = -j
        let spec = spectrum(vec![
            point(c(0.0, 0.5), c(3.0, 0.0)),
            point(c(0.0, 1.0), c(-6.0, 0.0)),
        ]);
        let b1 = norming_factor(0, &spec).unwrap();
        assert_abs_diff_eq!((b1 - c(0.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_amplitude_rejected() {
        let spec = spectrum(vec![point(c(0.0, 0.5), c(0.0, 0.0))]);
        assert!(matches!(
            norming_factor(0, &spec),
            Err(Error::ZeroAmplitude { index: 0 })
        ));
    }

    #[test]
    fn empty_spectrum_synthesizes_zero_pulse() {
        let syn = synthesize(&DiscreteSpectrum::empty(), 5.0, 257).unwrap();
        assert!(syn.pulse.samples().iter().all(|q| q.norm() == 0.0));
        assert_eq!(syn.tail_ratio, 0.0);
        assert!(!syn.tail_warning());
    }

    #[test]
    fn single_soliton_is_sech() {
        // spectrum {(0.5j, -j)} has the closed form q(t) = sech(t)
        let spec = spectrum(vec![point(c(0.0, 0.5), c(0.0, -1.0))]);
        let syn = synthesize(&spec, 20.0, 2001).unwrap();
        for (n, q) in syn.pulse.samples().iter().enumerate() {
            let t = syn.pulse.time(n);
            let expected = 1.0 / t.cosh();
            assert!(
                (q - c(expected, 0.0)).norm() < 1e-9,
                "t={t}: q={q} expected {expected}"
            );
        }
        assert!(!syn.tail_warning());
    }

    #[test]
    fn state_machine_counts_and_peak() {
        let spec = spectrum(vec![point(c(0.0, 0.5), c(0.0, -1.0))]);
        let state = DarbouxState::initial(&spec, 10.0, 101).unwrap();
        assert_eq!(state.stage(), 0);
        assert_eq!(state.ratios().len(), 1);
        assert!(state.pulse().samples().iter().all(|q| q.norm() == 0.0));
        // rho^{(0)}(0) = Q_d/(lambda - lambda*) = -j/j = -1 at t = 0
        assert_abs_diff_eq!(
            (state.ratios()[0][50] - c(-1.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-14
        );

        let done = state.step().unwrap();
        assert_eq!(done.stage(), 1);
        assert!(done.is_complete());
        assert_eq!(done.ratios().len(), 0);
        // peak amplitude of a single soliton is 2 Im(lambda) = 1 at t = 0
        assert_abs_diff_eq!(done.pulse().samples()[50].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ratio_and_vector_recursions_agree() {
        let spec = spectrum(vec![
            point(c(0.0, 0.5), c(3.0, 0.0)),
            point(c(0.0, 1.0), c(-6.0, 0.0)),
        ]);
        let a2 = synthesize(&spec, 5.0, 257).unwrap().pulse;
        let a1 = synthesize_with(&spec, 5.0, 257, DarbouxAlgorithm::VectorRecursion)
            .unwrap()
            .pulse;
        let peak = a2.peak();
        for (x, y) in a1.samples().iter().zip(a2.samples()) {
            assert!(
                (x - y).norm() <= 10.0 * f64::EPSILON * peak,
                "|diff| = {}",
                (x - y).norm()
            );
        }
    }

    #[test]
    fn conjugated_amplitudes_negate_conjugate_the_pulse() {
        // imaginary-axis eigenvalues: Q_d -> Q_d* maps q -> -q*
        let spec = spectrum(vec![
            point(c(0.0, 0.5), c(0.0, 3.0)),
            point(c(0.0, 1.0), c(-6.0, 2.0)),
        ]);
        let conj_spec = spectrum(vec![
            point(c(0.0, 0.5), c(0.0, -3.0)),
            point(c(0.0, 1.0), c(-6.0, -2.0)),
        ]);
        let q = synthesize(&spec, 6.0, 301).unwrap().pulse;
        let q_conj = synthesize(&conj_spec, 6.0, 301).unwrap().pulse;
        let peak = q.peak();
        for (x, y) in q.samples().iter().zip(q_conj.samples()) {
            assert!(
                (y + x.conj()).norm() <= 1e-12 * peak,
                "expected -conj: {x} vs {y}"
            );
        }
    }

    #[test]
    fn adversarial_amplitudes_hit_the_degenerate_update() {
        // at t = 0: rho = -j, rho_2 = -3j, so g + mk rho_2 = 1/2 + 3/2 = 2
        // and the update denominator 2j - j*2 vanishes exactly
        let spec = spectrum(vec![
            point(c(0.0, 0.5), c(-2.0, 0.0)),
            point(c(0.0, 1.5), c(18.0, 0.0)),
        ]);
        let res = synthesize(&spec, 4.0, 129); // odd sample count puts t = 0 on the grid
        match res {
            Err(Error::DegenerateUpdate { stage: 0, t_index }) => assert_eq!(t_index, 64),
            other => panic!("expected degenerate-update report, got {other:?}"),
        }
    }

    #[test]
    fn huge_eta_window_products_stay_finite() {
        // 2 eta T0 = 2 * 3.5 * 60 = 420: |rho| ~ e^{420} overflows |rho|^2;
        // the guarded update must still produce finite samples.
        let spec = spectrum(vec![
            point(c(0.0, 3.5), c(1.0, 0.0)),
            point(c(0.3, 0.4), c(0.0, 2e-3)),
        ]);
        let syn = synthesize(&spec, 60.0, 8193).unwrap();
        assert!(syn
            .pulse
            .samples()
            .iter()
            .all(|q| q.re.is_finite() && q.im.is_finite()));
        // the tall soliton still peaks at 2 Im(lambda) = 7 (up to the
        // half-step sampling offset of the peak location)
        assert!((syn.pulse.peak() - 7.0).abs() < 0.05, "{}", syn.pulse.peak());
    }

    #[test]
    fn default_grid_scales_with_slowest_eigenvalue() {
        let spec = spectrum(vec![point(c(0.0, 0.1), c(1.0, 0.0))]);
        let (t0, n) = default_grid(&spec);
        assert_abs_diff_eq!(t0, 50.0);
        assert_eq!(n, 2049);
        let (t0, _) = default_grid(&DiscreteSpectrum::empty());
        assert_abs_diff_eq!(t0, 5.0);
    }

    #[test]
    fn add_eigenvalue_to_empty_spectrum() {
        let (spec, qc) = add_eigenvalue(
            &DiscreteSpectrum::empty(),
            None,
            c(0.3, 0.8),
            c(2.0, -1.0),
        )
        .unwrap();
        assert!(qc.is_none());
        assert_eq!(spec.len(), 1);
        assert_eq!(spec.points()[0].lambda, c(0.3, 0.8));
        assert_eq!(spec.points()[0].qd, c(2.0, -1.0));
        // b = qd/(lambda - lambda*)
        let b = spec.points()[0].b.unwrap();
        assert_abs_diff_eq!(
            (b - c(2.0, -1.0) / c(0.0, 1.6)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn add_eigenvalue_triples_amplitude_at_1j() {
        // spec {(1j, q)}, add 0.5j: factor (1j + 0.5j)/(1j - 0.5j) = 3
        let qd = c(0.4, -1.1);
        let spec = spectrum(vec![point(c(0.0, 1.0), qd)]);
        let (updated, _) = add_eigenvalue(&spec, None, c(0.0, 0.5), c(1.0, 0.0)).unwrap();
        let updated_qd = updated.points()[0].qd;
        assert_abs_diff_eq!((updated_qd - qd * 3.0).norm(), 0.0, epsilon = 1e-14);
        // the inserted point picks up the mirror factor
        // (0.5j - (1j)*)/(0.5j - 1j) = -3
        let inserted = updated.points()[1].qd;
        assert_abs_diff_eq!((inserted - c(-3.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn add_eigenvalue_insertions_commute() {
        let spec = spectrum(vec![point(c(0.3, 0.8), c(2.0, -1.0))]);
        let first = (c(0.1, 0.5), c(1.0, 1.0));
        let second = (c(-0.2, 1.1), c(0.0, -3.0));
        let (ab, _) = {
            let (s, _) = add_eigenvalue(&spec, None, first.0, first.1).unwrap();
            add_eigenvalue(&s, None, second.0, second.1).unwrap()
        };
        let (ba, _) = {
            let (s, _) = add_eigenvalue(&spec, None, second.0, second.1).unwrap();
            add_eigenvalue(&s, None, first.0, first.1).unwrap()
        };
        for (p, q) in ab.sorted_by_im().points().iter().zip(ba.sorted_by_im().points()) {
            assert_abs_diff_eq!((p.qd - q.qd).norm(), 0.0, epsilon = 1e-14);
            assert_eq!(p.b.is_some(), q.b.is_some());
            if let (Some(pb), Some(qb)) = (p.b, q.b) {
                assert_abs_diff_eq!((pb - qb).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn add_eigenvalue_factor_is_unimodular_on_real_grid() {
        let grid: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let qc_vals: Vec<C64> = grid.iter().map(|&l| c(0.3 * l, 1.0 - l * l * 0.1)).collect();
        let qc = ContinuousSpectrum::new(grid, qc_vals).unwrap();
        let (_, updated) =
            add_eigenvalue(&DiscreteSpectrum::empty(), Some(&qc), c(0.2, 0.9), c(1.0, 0.0))
                .unwrap();
        let updated = updated.unwrap();
        for (before, after) in qc.qc().iter().zip(updated.qc()) {
            assert_abs_diff_eq!(before.norm(), after.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn add_eigenvalue_collision_rejected() {
        let spec = spectrum(vec![point(c(0.0, 1.0), c(1.0, 0.0))]);
        let res = add_eigenvalue(&spec, None, c(0.0, 1.0), c(1.0, 0.0));
        assert!(matches!(res, Err(Error::EigenvalueCollision { .. })));
        let res = add_eigenvalue(&spec, None, c(0.4, -0.2), c(1.0, 0.0));
        assert!(res.is_err());
    }
}
