//! Analytic strong-interaction control sequences built from couplings at
//! avoided level crossings: full transfer, N00N creation, phase pulses, and
//! Givens-ladder synthesis of arbitrary two-well target states.
//!
//! In the limit `u >> 1` a pulse at the resonant tilt `eta_{n,1}` acts on the
//! degenerate pair `(|n,N-n>, |n+1,N-n-1>)` as a beam-splitter rotation at the
//! bosonically enhanced frequency `omega_n`, while every other Fock state only
//! accumulates its diagonal phase. Holding an off-resonant "parking" tilt
//! advances relative phases without moving population. The constructions here
//! track those diagonal phases exactly, so they are exact in the ideal model;
//! finite-`u` corrections are left to the optimizer.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::ManyBodyState;
use crate::hamiltonian::{rabi_frequency, resonance_tilt, two_well_level};
use crate::propagator::{Provenance, Pulse, PulseSequence};

/// Amplitudes below this are treated as unpopulated during synthesis.
const AMPLITUDE_EPS: f64 = 1e-14;

/// Default parking tilt `-(N+3)`: beyond every first-order crossing, with
/// phase rates still of order `u`.
pub fn default_parking_tilt(n_total: usize) -> f64 {
    -(n_total as f64 + 3.0)
}

/// Full-transfer sequence `|0,N> -> |N,0>`: pulse `k` sits at `eta_{k,1}` for
/// the half Rabi period `pi/omega_k`. Exact as `u -> infinity`.
pub fn transfer_sequence(n_total: usize, u: f64) -> PulseSequence {
    let pulses = (0..n_total)
        .map(|k| Pulse {
            tilt: vec![resonance_tilt(k, 1, n_total).expect("k < N")],
            duration: PI / rabi_frequency(k, n_total).expect("k < N"),
        })
        .collect();
    PulseSequence::new(2, n_total, u, pulses, Provenance::Analytic)
        .expect("transfer sequence is valid for N >= 1")
}

/// Transfer sequence with the first pulse halved: splits `|0,N>` evenly
/// between `|0,N>` and the transfer ladder, producing a N00N state up to a
/// relative phase.
pub fn noon_base_sequence(n_total: usize, u: f64) -> PulseSequence {
    let mut seq = transfer_sequence(n_total, u);
    seq.pulses[0].duration /= 2.0;
    seq
}

/// Upper bound `pi * sum_j sqrt((N-j)/(j+1))` on the total duration of any
/// state synthesis, assuming phase pulses take negligible time.
pub fn total_time_bound(n_total: usize) -> f64 {
    PI * (0..n_total)
        .map(|j| ((n_total - j) as f64 / (j as f64 + 1.0)).sqrt())
        .sum::<f64>()
}

fn check_parking(n_total: usize, u: f64, eps_park: f64) -> Result<()> {
    for n in 0..n_total {
        if (eps_park - resonance_tilt(n, 1, n_total).unwrap()).abs() < 1e-9 {
            return Err(Error::invalid(format!(
                "parking tilt {eps_park} sits on the resonance eta_({n},1)"
            )));
        }
    }
    if u <= 0.0 {
        return Err(Error::invalid("parking phases require u > 0"));
    }
    Ok(())
}

/// Rate at which `arg(a_n) - arg(a_{n+1})` of the pair `(n, n+1)` grows under
/// diagonal evolution at tilt `eps`: `u * (eta_{n,1} - eps)`.
fn pair_phase_rate(n: usize, n_total: usize, u: f64, eps: f64) -> f64 {
    u * (resonance_tilt(n, 1, n_total).unwrap() - eps)
}

/// Smallest `t >= lower` with `rate * t = target (mod 2pi)`.
fn smallest_phase_time(rate: f64, target: f64, lower: f64) -> f64 {
    let tau = 2.0 * PI;
    let target = target.rem_euclid(tau);
    if target == 0.0 && lower <= 0.0 {
        return 0.0;
    }
    let raw = (lower * rate - target) / tau;
    let k = if rate > 0.0 { raw.ceil() } else { raw.floor() };
    let t = (target + tau * k) / rate;
    if t < lower {
        // guard against the boundary rounding the wrong way
        (target + tau * (k + rate.signum())) / rate
    } else {
        t
    }
}

/// Duration at `eps_park` for the relative phase `arg(a_n) - arg(a_{n+1})` of
/// the pair `(n, n+1)` to advance by `dphi` (mod 2pi).
pub fn phase_pulse_duration(
    n: usize,
    n_total: usize,
    u: f64,
    eps_park: f64,
    dphi: f64,
) -> Result<f64> {
    if n + 1 > n_total {
        return Err(Error::invalid(format!("pair index n={n} out of range for N={n_total}")));
    }
    let rate = pair_phase_rate(n, n_total, u, eps_park);
    if rate.abs() < 1e-12 {
        return Err(Error::invalid(format!(
            "zero phase rate: eps_park={eps_park} is resonant with pair {n} or u=0"
        )));
    }
    Ok(smallest_phase_time(rate, dphi, 0.0))
}

// ---------------------------------------------------------------------------
// ideal diagonal model
// ---------------------------------------------------------------------------

fn ideal_phase_step(z: &mut [Complex64], u: f64, n_total: usize, eps: f64, tau: f64) {
    for (m, amp) in z.iter_mut().enumerate() {
        let e = two_well_level(u, eps, m, n_total);
        *amp *= Complex64::from_polar(1.0, -e * tau);
    }
}

fn ideal_rotation(z: &mut [Complex64], u: f64, n_total: usize, pair: usize, theta: f64) {
    let eps = resonance_tilt(pair, 1, n_total).unwrap();
    let t = theta / rabi_frequency(pair, n_total).unwrap();
    for (m, amp) in z.iter_mut().enumerate() {
        if m != pair && m != pair + 1 {
            let e = two_well_level(u, eps, m, n_total);
            *amp *= Complex64::from_polar(1.0, -e * t);
        }
    }
    let shared = Complex64::from_polar(1.0, -two_well_level(u, eps, pair, n_total) * t);
    let c = (theta / 2.0).cos();
    let is = Complex64::new(0.0, (theta / 2.0).sin());
    let (a, b) = (z[pair], z[pair + 1]);
    z[pair] = shared * (c * a + is * b);
    z[pair + 1] = shared * (is * a + c * b);
}

// ---------------------------------------------------------------------------
// N00N sequence
// ---------------------------------------------------------------------------

/// N00N preparation: halved first transfer pulse, remaining full transfer
/// pulses, then a parking pulse that sets the relative phase
/// `arg(a_{|0,N>}) - arg(a_{|N,0>})` to `phi` in the ideal model.
pub fn noon_sequence(n_total: usize, phi: f64, u: f64, eps_park: f64) -> Result<PulseSequence> {
    check_parking(n_total, u, eps_park)?;
    let mut seq = noon_base_sequence(n_total, u);

    // ideal-model pass to read off the accumulated relative phase
    let mut z = vec![Complex64::new(0.0, 0.0); n_total + 1];
    z[0] = Complex64::new(1.0, 0.0);
    ideal_rotation(&mut z, u, n_total, 0, PI / 2.0);
    for k in 1..n_total {
        ideal_rotation(&mut z, u, n_total, k, PI);
    }
    let current = z[0].arg() - z[n_total].arg();
    // d/dt [arg(a_0) - arg(a_N)] = E_N(eps) - E_0(eps) = -u * eps * N
    let rate = -u * eps_park * n_total as f64;
    if rate.abs() < 1e-12 {
        return Err(Error::invalid("zero N00N phase rate at this parking tilt"));
    }
    let duration = smallest_phase_time(rate, phi - current, 0.0);
    seq.pulses.push(Pulse { tilt: vec![eps_park], duration });
    Ok(seq)
}

// ---------------------------------------------------------------------------
// Givens-ladder state synthesis
// ---------------------------------------------------------------------------

/// One abstract synthesis step.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthStep {
    /// Beam-splitter rotation by `angle` on the Fock pair `(pair, pair+1)`,
    /// entered after advancing the pair's relative phase by `phase` (mod 2pi).
    Rotation { pair: usize, angle: f64, phase: f64 },
    /// Parking pulse accumulating diagonal phases.
    PhaseStep { tilt: f64, duration: f64 },
}

/// Ordered rotations and phase steps together with the compiled sequence.
///
/// The compiled sequence has a fixed layout of `2N` slots: rotation `n`
/// preceded by a parking slot for `n >= 1`, plus one trailing parking slot;
/// unused slots carry zero duration. The fixed layout keeps the step count
/// uniform across targets, which the optimizer relies on when seeding.
#[derive(Debug, Clone)]
pub struct SynthesisPlan {
    pub steps: Vec<SynthStep>,
    pub sequence: PulseSequence,
}

/// Build the ladder mapping `|0,N>` onto `target` (up to a global phase),
/// exactly in the ideal model.
///
/// Working upward through the pairs, rotation `n` splits the carried
/// amplitude between the finished component `c_n` and the remainder. The
/// parking slots are solved so that every populated component lands on the
/// target phase: between consecutive populated indices the relative phase
/// responds at the summed pair rates, and the partial parking times must be
/// non-decreasing toward the bottom of the ladder.
pub fn synthesize_state_sequence(
    target: &ManyBodyState,
    u: f64,
    eps_park: f64,
) -> Result<SynthesisPlan> {
    let basis = target.basis();
    if basis.wells() != 2 {
        return Err(Error::invalid("state synthesis is defined for two wells"));
    }
    let n_total = basis.particles();
    check_parking(n_total, u, eps_park)?;
    let c = target.amplitudes();

    // rotation angles from the magnitude ladder: rho_m^2 = sum_{k>=m} |c_k|^2
    let mut rho = vec![0.0f64; n_total + 2];
    for m in (0..=n_total).rev() {
        rho[m] = (rho[m + 1].powi(2) + c[m].norm_sqr()).sqrt();
    }
    let top = (0..=n_total).rev().find(|&m| c[m].norm() > AMPLITUDE_EPS).unwrap();
    let mut thetas = vec![0.0f64; n_total];
    for n in 0..top {
        thetas[n] = 2.0 * rho[n + 1].atan2(c[n].norm());
    }

    // baseline ideal pass without parking slots gives the accumulated phases
    let mut z = vec![Complex64::new(0.0, 0.0); n_total + 1];
    z[0] = Complex64::new(1.0, 0.0);
    for n in 0..top {
        ideal_rotation(&mut z, u, n_total, n, thetas[n]);
    }

    // parking durations: taus[j] precedes rotation j (j >= 1), taus[top]
    // trails the ladder
    let populated: Vec<usize> = (0..=top).filter(|&m| c[m].norm() > AMPLITUDE_EPS).collect();
    let mut taus = vec![0.0f64; n_total + 1];
    let mut t_above = 0.0f64;
    for q in (1..populated.len()).rev() {
        let (a, b) = (populated[q - 1], populated[q]);
        let rate: f64 = (a + 1..=b).map(|j| pair_phase_rate(j - 1, n_total, u, eps_park)).sum();
        if rate.abs() < 1e-12 {
            return Err(Error::invalid("degenerate parking rates during synthesis"));
        }
        let need = (z[b].arg() - z[a].arg()) - (c[b].arg() - c[a].arg());
        let t = smallest_phase_time(rate, need, t_above);
        taus[b] = t - t_above;
        t_above = t;
    }

    // compile into the fixed 2N-slot layout
    let mut pulses = Vec::with_capacity(2 * n_total);
    let mut steps = Vec::new();
    for n in 0..n_total {
        if n >= 1 {
            pulses.push(Pulse { tilt: vec![eps_park], duration: taus[n] });
            if taus[n] > 0.0 {
                steps.push(SynthStep::PhaseStep { tilt: eps_park, duration: taus[n] });
            }
        }
        let eta = resonance_tilt(n, 1, n_total).unwrap();
        let duration = thetas[n] / rabi_frequency(n, n_total).unwrap();
        pulses.push(Pulse { tilt: vec![eta], duration });
        if thetas[n] > 0.0 {
            let phase = pair_phase_rate(n, n_total, u, eps_park) * taus[n];
            steps.push(SynthStep::Rotation {
                pair: n,
                angle: thetas[n],
                phase: phase.rem_euclid(2.0 * PI),
            });
        }
    }
    let trailing = taus[top.max(1)].max(0.0);
    pulses.push(Pulse { tilt: vec![eps_park], duration: if top >= 1 { trailing } else { 0.0 } });
    if top >= 1 && trailing > 0.0 {
        steps.push(SynthStep::PhaseStep { tilt: eps_park, duration: trailing });
    }

    let sequence = PulseSequence::new(2, n_total, u, pulses, Provenance::Analytic)?;
    Ok(SynthesisPlan { steps, sequence })
}
