//! Derivative-free refinement of pulse sequences against multi-state fidelity
//! objectives: a seeded Nelder-Mead simplex over the joint vector of pulse
//! durations and free tilt components, plus pulse-splitting refinement and a
//! bang-bang (durations-only) baseline.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ManyBodyState};
use crate::hamiltonian::{self, ModelParams};
use crate::propagator::{Provenance, Pulse, PulsePropagator, PulseSequence};

/// Weight of the quadratic constraint penalties.
const PENALTY_WEIGHT: f64 = 1e3;

/// Optimization target for one initial state.
#[derive(Debug, Clone)]
pub enum Target {
    /// Fixed target state: `F = |<target|psi>|^2`.
    State(ManyBodyState),
    /// N00N state with free relative phase: `F = (|psi_0| + |psi_N|)^2 / 2`,
    /// the overlap maximized analytically over the phase.
    NoonAnyPhase,
}

/// A set of (initial, target) pairs driven by one shared sequence, with the
/// control layout and constraints.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub wells: usize,
    pub u: f64,
    pub pairs: Vec<(ManyBodyState, Target)>,
    /// Pulse counts and free tilt components, stage by stage. The stage
    /// pulse counts must sum to the sequence length.
    pub stages: Vec<Stage>,
    /// Maximum |tilt| in relative (pair-equivalent) units; `0` disables the
    /// constraint. Site tilts count at half their value, since a single-well
    /// offset of `2 eps` reproduces the two-well relative tilt `eps` on the
    /// adjacent pair.
    pub eps_max: f64,
    /// Optional per-pulse duration cap, enforced by penalty.
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub pulses: usize,
    pub control: StageControl,
}

/// Which tilt components of each pulse the optimizer may vary.
#[derive(Debug, Clone)]
pub enum StageControl {
    /// Two-well scalar tilt.
    Scalar,
    /// Per-well site tilts; the listed well indices are free, the rest stay
    /// at their seed values.
    Sites { free: Vec<usize> },
}

impl ControlProblem {
    /// Single-stage two-well problem over `pulses` pulses.
    pub fn two_well(u: f64, pairs: Vec<(ManyBodyState, Target)>, pulses: usize) -> ControlProblem {
        ControlProblem {
            wells: 2,
            u,
            pairs,
            stages: vec![Stage { pulses, control: StageControl::Scalar }],
            eps_max: 0.0,
            t_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::invalid("need at least one (initial, target) pair"));
        }
        for (initial, target) in &self.pairs {
            if initial.basis().wells() != self.wells {
                return Err(Error::invalid("pair basis well count mismatch"));
            }
            if let Target::State(t) = target {
                if t.basis() != initial.basis() {
                    return Err(Error::invalid("initial and target bases differ"));
                }
            }
        }
        if self.eps_max < 0.0 {
            return Err(Error::invalid("eps_max must be >= 0"));
        }
        Ok(())
    }

    pub fn total_pulses(&self) -> usize {
        self.stages.iter().map(|s| s.pulses).sum()
    }

    /// Copy with doubled per-stage pulse counts, matching
    /// [`refine_by_splitting`].
    pub fn split_stages(&self) -> ControlProblem {
        let mut p = self.clone();
        for s in &mut p.stages {
            s.pulses *= 2;
        }
        p
    }
}

/// Options controlling one optimization run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OptimizerOptions {
    /// Nelder-Mead iteration cap per restart.
    pub max_iterations: u64,
    /// Terminate a restart when the simplex objective spread drops below this.
    pub ftol: f64,
    /// Number of re-jittered restarts after the seeded run.
    pub restarts: u32,
    pub seed: u64,
    /// Stop early once the best objective reaches this value.
    pub target_objective: Option<f64>,
    /// Restart jitter in units of the initial simplex perturbation.
    pub restart_scale: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iterations: 200_000,
            ftol: 1e-12,
            restarts: 8,
            seed: 0,
            target_objective: None,
            restart_scale: 3.0,
        }
    }
}

/// Result of an optimization run.
#[derive(Debug, Clone)]
pub struct OptimizationReport {
    pub best: PulseSequence,
    /// `1 - prod_i F_i` plus penalties, for the best sequence.
    pub objective: f64,
    pub fidelities: Vec<f64>,
    pub iterations: u64,
    pub restarts: u32,
    pub seed: u64,
    pub wall_seconds: f64,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// objective evaluation
// ---------------------------------------------------------------------------

enum TargetVec {
    State(DVector<Complex64>),
    Noon { bottom: usize, top: usize },
}

struct PairData {
    basis: FockBasis,
    initial: DVector<Complex64>,
    target: TargetVec,
}

struct Evaluator {
    wells: usize,
    u: f64,
    pairs: Vec<PairData>,
}

impl Evaluator {
    fn new(problem: &ControlProblem) -> Result<Evaluator> {
        problem.validate()?;
        let pairs = problem
            .pairs
            .iter()
            .map(|(initial, target)| {
                let basis = initial.basis().clone();
                let target = match target {
                    Target::State(t) => TargetVec::State(t.amplitudes().clone()),
                    Target::NoonAnyPhase => {
                        TargetVec::Noon { bottom: 0, top: basis.particles() }
                    }
                };
                PairData { basis, initial: initial.amplitudes().clone(), target }
            })
            .collect();
        Ok(Evaluator { wells: problem.wells, u: problem.u, pairs })
    }

    /// Fidelity of every pair under the sequence.
    fn fidelities(&self, seq: &PulseSequence) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|pair| {
                let mut psi = pair.initial.clone();
                let params = ModelParams {
                    wells: self.wells,
                    particles: pair.basis.particles(),
                    u: self.u,
                    tilt: vec![],
                };
                for pulse in &seq.pulses {
                    let p = params.with_tilt(pulse.tilt.clone());
                    let h = hamiltonian::build(&p, &pair.basis).expect("valid pulse");
                    PulsePropagator::new(&h).apply(pulse.duration, &mut psi);
                }
                match &pair.target {
                    TargetVec::State(t) => t.dotc(&psi).norm_sqr(),
                    TargetVec::Noon { bottom, top } => {
                        let s = psi[*bottom].norm() + psi[*top].norm();
                        0.5 * s * s
                    }
                }
            })
            .collect()
    }
}

fn penalties(problem: &ControlProblem, seq: &PulseSequence) -> f64 {
    let mut penalty = 0.0;
    if problem.eps_max > 0.0 {
        let mut k = 0;
        for stage in &problem.stages {
            for _ in 0..stage.pulses {
                let tilt = &seq.pulses[k].tilt;
                match &stage.control {
                    StageControl::Scalar => {
                        let excess = tilt[0].abs() - problem.eps_max;
                        if excess > 0.0 {
                            penalty += PENALTY_WEIGHT * excess * excess;
                        }
                    }
                    StageControl::Sites { free } => {
                        for &w in free {
                            let excess = 0.5 * tilt[w].abs() - problem.eps_max;
                            if excess > 0.0 {
                                penalty += PENALTY_WEIGHT * excess * excess;
                            }
                        }
                    }
                }
                k += 1;
            }
        }
    }
    if let Some(t_max) = problem.t_max {
        for p in &seq.pulses {
            let excess = p.duration - t_max;
            if excess > 0.0 {
                penalty += PENALTY_WEIGHT * excess * excess;
            }
        }
    }
    penalty
}

/// Objective `1 - prod_i F_i` plus constraint penalties.
pub fn objective(problem: &ControlProblem, seq: &PulseSequence) -> Result<f64> {
    let eval = Evaluator::new(problem)?;
    if seq.len() != problem.total_pulses() {
        return Err(Error::invalid(format!(
            "sequence has {} pulses but the problem stages describe {}",
            seq.len(),
            problem.total_pulses()
        )));
    }
    let fids = eval.fidelities(seq);
    Ok(1.0 - fids.iter().product::<f64>() + penalties(problem, seq))
}

// ---------------------------------------------------------------------------
// parameter vector <-> sequence
// ---------------------------------------------------------------------------

/// Maps between the optimizer's flat parameter vector and pulse sequences.
struct Parameterization {
    /// (pulse index, free tilt components) in sequence order.
    entries: Vec<(usize, Vec<usize>)>,
    template: PulseSequence,
}

impl Parameterization {
    fn from_problem(problem: &ControlProblem, seed: &PulseSequence) -> Result<Parameterization> {
        if seed.len() != problem.total_pulses() {
            return Err(Error::invalid(format!(
                "seed has {} pulses but the problem stages describe {}",
                seed.len(),
                problem.total_pulses()
            )));
        }
        let mut entries = Vec::with_capacity(seed.len());
        let mut k = 0;
        for stage in &problem.stages {
            for _ in 0..stage.pulses {
                let free = match &stage.control {
                    StageControl::Scalar => vec![0],
                    StageControl::Sites { free } => free.clone(),
                };
                for &w in &free {
                    if w >= seed.pulses[k].tilt.len() {
                        return Err(Error::invalid(format!(
                            "free tilt component {w} out of range for pulse {k}"
                        )));
                    }
                }
                entries.push((k, free));
                k += 1;
            }
        }
        Ok(Parameterization { entries, template: seed.clone() })
    }

    fn durations_only(seed: &PulseSequence) -> Parameterization {
        let entries = (0..seed.len()).map(|k| (k, vec![])).collect();
        Parameterization { entries, template: seed.clone() }
    }

    fn dim(&self) -> usize {
        self.entries.iter().map(|(_, free)| 1 + free.len()).sum()
    }

    fn encode(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for (k, free) in &self.entries {
            x.push(self.template.pulses[*k].duration);
            for &w in free {
                x.push(self.template.pulses[*k].tilt[w]);
            }
        }
        x
    }

    /// Initial simplex steps: 5% of each duration (at least 0.01), 0.05 for
    /// tilts.
    fn steps(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.dim());
        for (k, free) in &self.entries {
            s.push((0.05 * self.template.pulses[*k].duration.abs()).max(0.01));
            for _ in free {
                s.push(0.05);
            }
        }
        s
    }

    /// Write the parameter vector into `seq`; durations enter as `|t|`.
    fn decode_into(&self, x: &[f64], seq: &mut PulseSequence) {
        let mut i = 0;
        for (k, free) in &self.entries {
            seq.pulses[*k].duration = x[i].abs();
            i += 1;
            for &w in free {
                seq.pulses[*k].tilt[w] = x[i];
                i += 1;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

struct NmOutcome {
    x: Vec<f64>,
    f: f64,
    iterations: u64,
    spread_converged: bool,
}

/// Textbook Nelder-Mead with reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    max_iterations: u64,
    ftol: f64,
) -> NmOutcome {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for j in 0..n {
        let mut v = x0.to_vec();
        v[j] += steps[j];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut spread_converged = false;

    while iterations < max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let second_worst = order[n - 1];
        let worst = order[n];
        if values[worst] - values[best] < ftol {
            spread_converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for j in 0..n {
                centroid[j] += simplex[i][j];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let reflect: Vec<f64> =
            (0..n).map(|j| 2.0 * centroid[j] - simplex[worst][j]).collect();
        let fr = f(&reflect);

        if fr < values[best] {
            let expand: Vec<f64> =
                (0..n).map(|j| centroid[j] + 2.0 * (centroid[j] - simplex[worst][j])).collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let (contract, fc) = if fr < values[worst] {
                let c: Vec<f64> =
                    (0..n).map(|j| centroid[j] + 0.5 * (reflect[j] - centroid[j])).collect();
                let v = f(&c);
                (c, v)
            } else {
                let c: Vec<f64> =
                    (0..n).map(|j| 0.5 * (centroid[j] + simplex[worst][j])).collect();
                let v = f(&c);
                (c, v)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                for &i in order.iter().skip(1) {
                    for j in 0..n {
                        simplex[i][j] =
                            simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    NmOutcome { x: simplex[best].clone(), f: values[best], iterations, spread_converged }
}

// ---------------------------------------------------------------------------
// public optimization entry points
// ---------------------------------------------------------------------------

fn run_restarts(
    problem: &ControlProblem,
    parameterization: &Parameterization,
    provenance: Provenance,
    options: &OptimizerOptions,
) -> Result<OptimizationReport> {
    let start = Instant::now();
    let eval = Evaluator::new(problem)?;
    let mut scratch = parameterization.template.clone();
    let mut f = |x: &[f64]| -> f64 {
        parameterization.decode_into(x, &mut scratch);
        let fids = eval.fidelities(&scratch);
        1.0 - fids.iter().product::<f64>() + penalties(problem, &scratch)
    };

    let x0 = parameterization.encode();
    let steps = parameterization.steps();
    let f0 = f(&x0);
    let mut best_x = x0.clone();
    let mut best_f = f0;
    let mut iterations = 0u64;
    let mut restarts_used = 0u32;
    let mut spread_hit = false;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let reached = |b: f64| options.target_objective.map_or(b == 0.0, |t| b <= t);

    if !reached(best_f) {
        for restart in 0..=options.restarts {
            let start_x: Vec<f64> = if restart == 0 {
                x0.clone()
            } else {
                restarts_used += 1;
                best_x
                    .iter()
                    .zip(&steps)
                    .map(|(x, s)| x + rng.gen_range(-1.0..1.0) * options.restart_scale * s)
                    .collect()
            };
            let outcome =
                nelder_mead(&mut f, &start_x, &steps, options.max_iterations, options.ftol);
            iterations += outcome.iterations;
            spread_hit |= outcome.spread_converged;
            if outcome.f < best_f {
                best_f = outcome.f;
                best_x = outcome.x;
            }
            if reached(best_f) {
                break;
            }
        }
    }

    let mut best = parameterization.template.clone();
    parameterization.decode_into(&best_x, &mut best);
    best.provenance = provenance;
    let fidelities = eval.fidelities(&best);
    let objective = 1.0 - fidelities.iter().product::<f64>() + penalties(problem, &best);
    let converged = options.target_objective.map_or(spread_hit, |t| objective <= t);
    Ok(OptimizationReport {
        best,
        objective,
        fidelities,
        iterations,
        restarts: restarts_used,
        seed: options.seed,
        wall_seconds: start.elapsed().as_secs_f64(),
        converged,
    })
}

/// Nelder-Mead over the joint vector of pulse durations and free tilt
/// components, starting from `seed`. Deterministic for a given options seed.
pub fn optimize(
    problem: &ControlProblem,
    seed: &PulseSequence,
    options: &OptimizerOptions,
) -> Result<OptimizationReport> {
    seed.validate()?;
    let parameterization = Parameterization::from_problem(problem, seed)?;
    run_restarts(problem, &parameterization, Provenance::Optimized, options)
}

/// Replace every pulse `(eps, t)` by two pulses `(eps, t/2)`; the sequence
/// unitary is unchanged and the step count doubles.
pub fn refine_by_splitting(seq: &PulseSequence) -> PulseSequence {
    let pulses = seq
        .pulses
        .iter()
        .flat_map(|p| {
            let half = Pulse { tilt: p.tilt.clone(), duration: p.duration / 2.0 };
            [half.clone(), half]
        })
        .collect();
    PulseSequence { pulses, ..seq.clone() }
}

/// Bang-bang baseline: tilts alternate between `eps_a` and `eps_b` over `m`
/// pulses and only the durations are optimized. The seed spreads
/// `total_duration` evenly over the pulses.
pub fn bangbang_optimize(
    problem: &ControlProblem,
    eps_a: f64,
    eps_b: f64,
    m: usize,
    total_duration: f64,
    options: &OptimizerOptions,
) -> Result<OptimizationReport> {
    if eps_a == eps_b {
        return Err(Error::invalid("bang-bang requires two distinct tilt values"));
    }
    if m < 2 {
        return Err(Error::invalid("bang-bang requires at least two pulses"));
    }
    if problem.wells != 2 {
        return Err(Error::invalid("bang-bang baseline is defined for two wells"));
    }
    let particles = problem.pairs[0].0.basis().particles();
    let pulses: Vec<Pulse> = (0..m)
        .map(|k| Pulse {
            tilt: vec![if k % 2 == 0 { eps_a } else { eps_b }],
            duration: total_duration / m as f64,
        })
        .collect();
    let seed = PulseSequence::new(2, particles, problem.u, pulses, Provenance::BangBang)?;
    let parameterization = Parameterization::durations_only(&seed);
    run_restarts(problem, &parameterization, Provenance::BangBang, options)
}
