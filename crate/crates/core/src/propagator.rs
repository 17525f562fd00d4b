//! Exact time evolution under piecewise-constant Hamiltonians.
//!
//! Each pulse holds the tilt fixed, so the propagator is a single matrix
//! exponential `exp(-i H t)`, computed from the eigendecomposition of the
//! real-symmetric Hamiltonian. A truncated-series scaling-and-squaring
//! exponential is provided as an independent cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ManyBodyState};
use crate::hamiltonian::{self, ModelParams};

/// One control pulse: a tilt held for a duration (units of `1/J`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    /// Scalar relative tilt (length 1) for two wells, or per-well site tilts.
    pub tilt: Vec<f64>,
    pub duration: f64,
}

/// How a sequence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Optimized,
    BangBang,
}

/// An ordered list of pulses with the model metadata they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub wells: usize,
    pub particles: usize,
    pub u: f64,
    pub pulses: Vec<Pulse>,
    pub provenance: Provenance,
}

impl PulseSequence {
    pub fn new(
        wells: usize,
        particles: usize,
        u: f64,
        pulses: Vec<Pulse>,
        provenance: Provenance,
    ) -> Result<Self> {
        let seq = PulseSequence { wells, particles, u, pulses, provenance };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulses.is_empty() {
            return Err(Error::invalid("sequence must contain at least one pulse"));
        }
        for (k, p) in self.pulses.iter().enumerate() {
            if !(p.duration >= 0.0 && p.duration.is_finite()) {
                return Err(Error::invalid(format!(
                    "pulse {k} has invalid duration {}",
                    p.duration
                )));
            }
            let ok = p.tilt.len() == self.wells || (self.wells == 2 && p.tilt.len() == 1);
            if !ok || p.tilt.iter().any(|e| !e.is_finite()) {
                return Err(Error::invalid(format!("pulse {k} has invalid tilt {:?}", p.tilt)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    /// Model parameters for pulse `k`, using this sequence's metadata.
    pub fn params_for_pulse(&self, k: usize) -> ModelParams {
        ModelParams {
            wells: self.wells,
            particles: self.particles,
            u: self.u,
            tilt: self.pulses[k].tilt.clone(),
        }
    }
}

/// Eigendecomposition of one pulse Hamiltonian, reusable across durations and
/// initial states.
pub(crate) struct PulsePropagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl PulsePropagator {
    pub(crate) fn new(h: &DMatrix<f64>) -> Self {
        let eig = h.clone().symmetric_eigen();
        PulsePropagator { eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors }
    }

    /// Apply `exp(-i H t)` in place.
    pub(crate) fn apply(&self, t: f64, psi: &mut DVector<Complex64>) {
        let d = psi.len();
        let v = &self.eigenvectors;
        let mut coeffs = DVector::<Complex64>::zeros(d);
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                acc += v[(i, j)] * psi[i];
            }
            let ph = -self.eigenvalues[j] * t;
            coeffs[j] = acc * Complex64::new(ph.cos(), ph.sin());
        }
        for i in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                acc += v[(i, j)] * coeffs[j];
            }
            psi[i] = acc;
        }
    }

    /// Dense `exp(-i H t)`.
    pub(crate) fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        let d = self.eigenvalues.len();
        let v = &self.eigenvectors;
        // U = V diag(exp(-i lambda t)) V^T
        let mut scaled = DMatrix::<Complex64>::zeros(d, d);
        for j in 0..d {
            let ph = -self.eigenvalues[j] * t;
            let w = Complex64::new(ph.cos(), ph.sin());
            for i in 0..d {
                scaled[(i, j)] = w * v[(i, j)];
            }
        }
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for i in 0..d {
            for k in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    acc += scaled[(i, j)] * v[(k, j)];
                }
                out[(i, k)] = acc;
            }
        }
        out
    }
}

/// Propagator `exp(-i H(tilt) t)` of a single pulse.
pub fn pulse_propagator(params: &ModelParams, pulse: &Pulse) -> Result<DMatrix<Complex64>> {
    let params = params.with_tilt(pulse.tilt.clone());
    let basis = FockBasis::new(params.wells, params.particles)?;
    let h = hamiltonian::build(&params, &basis)?;
    Ok(PulsePropagator::new(&h).matrix(pulse.duration))
}

fn check_metadata(params: &ModelParams, seq: &PulseSequence) -> Result<()> {
    seq.validate()?;
    if params.wells != seq.wells || params.u != seq.u {
        return Err(Error::invalid(format!(
            "sequence metadata (W={}, u={}) does not match params (W={}, u={})",
            seq.wells, seq.u, params.wells, params.u
        )));
    }
    Ok(())
}

/// Time-ordered product of the pulse propagators; the first pulse is the
/// rightmost factor.
///
/// The particle number is taken from `params`, which may differ from the
/// sequence's design particle number (conditional dynamics apply one sequence
/// to branches with different atom numbers).
pub fn sequence_unitary(params: &ModelParams, seq: &PulseSequence) -> Result<DMatrix<Complex64>> {
    check_metadata(params, seq)?;
    let basis = FockBasis::new(params.wells, params.particles)?;
    let d = basis.dimension();
    let mut u = DMatrix::<Complex64>::identity(d, d);
    for pulse in &seq.pulses {
        let p = params.with_tilt(pulse.tilt.clone());
        let h = hamiltonian::build(&p, &basis)?;
        u = PulsePropagator::new(&h).matrix(pulse.duration) * u;
    }
    Ok(u)
}

/// Evolve state vectors through the sequence in place. All states share the
/// basis implied by `params`.
pub(crate) fn evolve_states(
    params: &ModelParams,
    seq: &PulseSequence,
    states: &mut [DVector<Complex64>],
) -> Result<()> {
    let basis = FockBasis::new(params.wells, params.particles)?;
    for pulse in &seq.pulses {
        let p = params.with_tilt(pulse.tilt.clone());
        let h = hamiltonian::build(&p, &basis)?;
        let prop = PulsePropagator::new(&h);
        for psi in states.iter_mut() {
            prop.apply(pulse.duration, psi);
        }
    }
    Ok(())
}

/// State fidelity `|<target|prepared>|^2`.
pub fn fidelity(prepared: &ManyBodyState, target: &ManyBodyState) -> Result<f64> {
    Ok(target.inner(prepared)?.norm_sqr())
}

/// Populations of every basis state sampled along a sequence.
#[derive(Debug, Clone)]
pub struct PopulationTrace {
    pub basis: FockBasis,
    pub times: Vec<f64>,
    /// One row per time, `dimension` populations each.
    pub populations: Vec<Vec<f64>>,
}

/// Sample `|amplitude|^2` per basis state every `dt` within each pulse,
/// including every pulse boundary.
pub fn population_trace(
    params: &ModelParams,
    seq: &PulseSequence,
    initial: &ManyBodyState,
    dt: f64,
) -> Result<PopulationTrace> {
    check_metadata(params, seq)?;
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let basis = FockBasis::new(params.wells, params.particles)?;
    if initial.basis() != &basis {
        return Err(Error::invalid("initial state basis does not match params"));
    }
    let mut psi = initial.amplitudes().clone();
    let mut times = vec![0.0];
    let mut populations = vec![psi.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()];
    let mut t0 = 0.0;
    for pulse in &seq.pulses {
        let p = params.with_tilt(pulse.tilt.clone());
        let h = hamiltonian::build(&p, &basis)?;
        let prop = PulsePropagator::new(&h);
        let mut k = 1usize;
        loop {
            let tau = k as f64 * dt;
            if tau >= pulse.duration {
                break;
            }
            let mut sample = psi.clone();
            prop.apply(tau, &mut sample);
            times.push(t0 + tau);
            populations.push(sample.iter().map(|a| a.norm_sqr()).collect());
            k += 1;
        }
        prop.apply(pulse.duration, &mut psi);
        t0 += pulse.duration;
        times.push(t0);
        populations.push(psi.iter().map(|a| a.norm_sqr()).collect());
    }
    Ok(PopulationTrace { basis, times, populations })
}

/// Matrix exponential `exp(-i H t)` by scaling and squaring of the truncated
/// Taylor series. Independent cross-check for the eigendecomposition path.
pub fn series_propagator(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let d = h.nrows();
    let a = h.map(|x| Complex64::new(0.0, -x * t));
    // 1-norm based scaling so the series converges quickly
    let norm1 = (0..d)
        .map(|j| (0..d).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let b = a / Complex64::from(2f64.powi(s as i32));
    let mut result = DMatrix::<Complex64>::identity(d, d);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    for k in 1..200 {
        term = (&term * &b) / Complex64::from(k as f64);
        result += &term;
        let tn = term.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
        if tn < 1e-20 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}
