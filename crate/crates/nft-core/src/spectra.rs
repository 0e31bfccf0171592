//! Domain types and elementary spectral arithmetic.
//!
//! Everything here is an immutable value object: construct, validate once,
//! share freely across threads.

use crate::error::{Error, Result};
use crate::C64;

/// Uniformly sampled complex envelope `q(t_n)` on a symmetric window
/// `[-T0, T0]` with `t_n = -T0 + n*h`, `n = 0..N`, `h = 2*T0/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    t0_half_width: f64,
    samples: Vec<C64>,
}

impl SampledPulse {
    pub fn new(t0_half_width: f64, samples: Vec<C64>) -> Result<Self> {
        if !t0_half_width.is_finite() || t0_half_width <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "half-width T0 must be positive and finite, got {t0_half_width}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples for a positive step, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            t0_half_width,
            samples,
        })
    }

    /// All-zero pulse on the given grid.
    pub fn zeros(t0_half_width: f64, n_samples: usize) -> Result<Self> {
        Self::new(t0_half_width, vec![C64::new(0.0, 0.0); n_samples])
    }

    pub fn t0_half_width(&self) -> f64 {
        self.t0_half_width
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Number of grid intervals (the `N` in `h = 2*T0/N`).
    pub fn n_intervals(&self) -> usize {
        self.samples.len() - 1
    }

    /// Grid step `h = 2*T0/(n_samples - 1)`.
    pub fn step(&self) -> f64 {
        2.0 * self.t0_half_width / self.n_intervals() as f64
    }

    /// Grid point `t_n = -T0 + n*h`, evaluated in the exactly mirror-
    /// symmetric form `T0 (2n/N - 1)`: the endpoints land on `+-T0` and
    /// `time(N - n) = -time(n)` holds bit-for-bit.
    pub fn time(&self, n: usize) -> f64 {
        self.t0_half_width * (2.0 * n as f64 / self.n_intervals() as f64 - 1.0)
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Peak magnitude over the grid.
    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Discrete energy `h * sum |q_n|^2`.
    pub fn energy(&self) -> f64 {
        self.step() * self.samples.iter().map(|q| q.norm_sqr()).sum::<f64>()
    }
}

/// A point of the spectral plane; `eta` is the growth rate `Im(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub lambda: C64,
}

impl SpectralPoint {
    pub fn new(lambda: C64) -> Self {
        Self { lambda }
    }

    /// Point admissible as a discrete eigenvalue (strictly upper half-plane).
    pub fn discrete(lambda: C64) -> Result<Self> {
        if lambda.im <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "discrete eigenvalue must satisfy Im(lambda) > 0, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    /// `eta = (lambda - lambda*)/2j = Im(lambda)`.
    pub fn eta(&self) -> f64 {
        self.lambda.im
    }
}

/// Raw output of one scattering pass at a single `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringData {
    pub a: C64,
    pub b: C64,
    /// `da/dlambda`.
    pub a_prime: C64,
    /// `db/dlambda`, when the pass propagates it.
    pub b_prime: Option<C64>,
}

impl ScatteringData {
    /// Continuous spectral amplitude `Q_c = b/a`.
    pub fn continuous_amplitude(&self) -> C64 {
        self.b / self.a
    }

    /// Discrete spectral amplitude `Q_d = b/a'`.
    pub fn discrete_amplitude(&self) -> C64 {
        self.b / self.a_prime
    }

    /// Deviation from `|a|^2 + |b|^2 = 1`; meaningful for real `lambda` and a
    /// unit-determinant kernel.
    pub fn unimodularity_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }

    /// Dual estimate `1/conj(b)` of the eigenvalue coefficient, valid for
    /// spectra designed with `|b(lambda_i)| = 1` (phase-modulated solitons).
    /// Its leading discretization error enters with the opposite sign to the
    /// direct component ratio, so the pair brackets the converged value.
    pub fn unimodular_dual_b(&self) -> C64 {
        C64::new(1.0, 0.0) / self.b.conj()
    }

    /// `Q_d` computed from [`Self::unimodular_dual_b`].
    pub fn discrete_amplitude_unimodular_dual(&self) -> C64 {
        self.unimodular_dual_b() / self.a_prime
    }
}

/// One entry of a discrete spectrum: eigenvalue, amplitude `Q_d`, and the
/// raw `b` when a scattering pass produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePoint {
    pub lambda: C64,
    pub qd: C64,
    pub b: Option<C64>,
}

/// Discrete spectrum: pairwise-distinct eigenvalues in the open upper
/// half-plane with their amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    points: Vec<DiscretePoint>,
    min_separation: f64,
}

/// Default minimum pairwise eigenvalue separation.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-6;

impl DiscreteSpectrum {
    pub fn new(points: Vec<DiscretePoint>) -> Result<Self> {
        Self::with_min_separation(points, DEFAULT_MIN_SEPARATION)
    }

    pub fn with_min_separation(points: Vec<DiscretePoint>, min_separation: f64) -> Result<Self> {
        for (idx, p) in points.iter().enumerate() {
            let finite = p.lambda.re.is_finite()
                && p.lambda.im.is_finite()
                && p.qd.re.is_finite()
                && p.qd.im.is_finite();
            if !finite {
                return Err(Error::InvalidSpectrum(format!(
                    "entry {idx} has non-finite components"
                )));
            }
            if p.lambda.im <= 0.0 {
                return Err(Error::InvalidSpectrum(format!(
                    "eigenvalue {} must satisfy Im(lambda) > 0, got {}",
                    idx, p.lambda
                )));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let sep = (points[i].lambda - points[j].lambda).norm();
                if sep < min_separation {
                    return Err(Error::DuplicateEigenvalues {
                        i,
                        j,
                        sep,
                        min_sep: min_separation,
                    });
                }
            }
        }
        Ok(Self {
            points,
            min_separation,
        })
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            min_separation: DEFAULT_MIN_SEPARATION,
        }
    }

    pub fn points(&self) -> &[DiscretePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Copy with points ordered by ascending `Im(lambda)`, then `Re(lambda)`.
    pub fn sorted_by_im(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|p, q| {
            (p.lambda.im, p.lambda.re)
                .partial_cmp(&(q.lambda.im, q.lambda.re))
                .expect("finite eigenvalues")
        });
        Self {
            points,
            min_separation: self.min_separation,
        }
    }

    /// Propagate by distance `z`: `b` and `Q_d` pick up `exp(-4j lambda^2 z)`,
    /// while `a` and `a'` are invariants of the flow.
    pub fn evolved(&self, z: f64) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| {
                let factor = evolution_factor(p.lambda, z);
                DiscretePoint {
                    lambda: p.lambda,
                    qd: p.qd * factor,
                    b: p.b.map(|b| b * factor),
                }
            })
            .collect();
        Self {
            points,
            min_separation: self.min_separation,
        }
    }
}

/// Continuous spectrum `Q_c(lambda)` sampled on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSpectrum {
    lambda_grid: Vec<f64>,
    qc: Vec<C64>,
}

impl ContinuousSpectrum {
    pub fn new(lambda_grid: Vec<f64>, qc: Vec<C64>) -> Result<Self> {
        if lambda_grid.len() != qc.len() {
            return Err(Error::InvalidSpectrum(format!(
                "lambda grid has {} points but qc has {}",
                lambda_grid.len(),
                qc.len()
            )));
        }
        if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpectrum(
                "lambda grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { lambda_grid, qc })
    }

    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda_grid
    }

    pub fn qc(&self) -> &[C64] {
        &self.qc
    }

    pub fn len(&self) -> usize {
        self.lambda_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_grid.is_empty()
    }

    /// Propagate by distance `z`; the factor is unimodular on the real axis.
    pub fn evolved(&self, z: f64) -> Self {
        let qc = self
            .lambda_grid
            .iter()
            .zip(&self.qc)
            .map(|(&lam, &qc)| qc * evolution_factor(C64::new(lam, 0.0), z))
            .collect();
        Self {
            lambda_grid: self.lambda_grid.clone(),
            qc,
        }
    }
}

/// `exp(-4j lambda^2 z)`, the z-evolution of `b` (and hence of `Q_c`, `Q_d`).
pub fn evolution_factor(lambda: C64, z: f64) -> C64 {
    (-C64::i() * 4.0 * lambda * lambda * z).exp()
}

/// 2x2 complex one-step propagator of the discretized scattering recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        m11: C64::new(1.0, 0.0),
        m12: C64::new(0.0, 0.0),
        m21: C64::new(0.0, 0.0),
        m22: C64::new(1.0, 0.0),
    };

    pub const ZERO: Self = Self {
        m11: C64::new(0.0, 0.0),
        m12: C64::new(0.0, 0.0),
        m21: C64::new(0.0, 0.0),
        m22: C64::new(0.0, 0.0),
    };

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

/// Re-express scattering data of `q(t)` as that of the translate
/// `q(t - t_shift)`: `a` and `a'` are unchanged, `b` picks up
/// `exp(-2j lambda t_shift)`.
pub fn time_shift_correction(data: &ScatteringData, lambda: C64, t_shift: f64) -> ScatteringData {
    let factor = (-C64::i() * 2.0 * lambda * t_shift).exp();
    ScatteringData {
        a: data.a,
        b: data.b * factor,
        a_prime: data.a_prime,
        // d/dlambda of b*exp(-2j lambda t0)
        b_prime: data
            .b_prime
            .map(|bp| (bp - C64::i() * 2.0 * t_shift * data.b) * factor),
    }
}
