//! Two-mode validation for the optical double-tweezer potential: a 1D
//! finite-difference eigensolver, localized modes, effective `J`, `U` and
//! tilt extraction, amplitude calibration, and the two-mode infidelity map.
//!
//! This module works in SI units for lengths and masses; energies are
//! reported in Hz (i.e. `E/h`). The potential is
//! `V(x) = -d1 exp(-(x+b)^2 / 2c^2) - d2 exp(-(x-b)^2 / 2c^2)`
//! with positive depths `d1`, `d2`.

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34; // J s
pub const PLANCK_H: f64 = 6.626_070_15e-34; // J s
/// Mass of Rb-87 in kg.
pub const RB87_MASS: f64 = 1.4431e-25;

/// Uniform-grid discretization with a convergence gate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    /// Domain half-width as a multiple of `b + c`.
    pub half_width_factor: f64,
    /// Initial number of interior grid points.
    pub points: usize,
    /// Accept once grid doubling changes `E1 - E0` by less than this
    /// relative amount.
    pub rel_tol: f64,
    /// Give up after this many doublings.
    pub max_doublings: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { half_width_factor: 4.0, points: 4096, rel_tol: 1e-6, max_doublings: 7 }
    }
}

/// Double-Gaussian tweezer model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TweezerConfig {
    /// Depth of the left tweezer, in Hz (`A/h`, stored positive).
    pub depth1_hz: f64,
    /// Depth of the right tweezer, in Hz.
    pub depth2_hz: f64,
    /// Half-separation `b` in meters.
    pub half_separation_m: f64,
    /// Waist `c` in meters.
    pub waist_m: f64,
    pub mass_kg: f64,
    /// 1D contact-interaction constant in J m.
    pub g1d_j_m: f64,
    pub grid: GridSpec,
}

impl TweezerConfig {
    /// Fig. 2 geometry: `b = 0.25 um`, `c = 2b/3`, depths 440 kHz, Rb-87.
    pub fn paper_geometry() -> TweezerConfig {
        let b = 0.25e-6;
        TweezerConfig {
            depth1_hz: 440e3,
            depth2_hz: 440e3,
            half_separation_m: b,
            waist_m: 2.0 * b / 3.0,
            mass_kg: RB87_MASS,
            g1d_j_m: 0.0,
            grid: GridSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth1_hz <= 0.0 || self.depth2_hz <= 0.0 {
            return Err(Error::invalid("tweezer depths must be positive (stored as +|A|/h)"));
        }
        if self.half_separation_m <= 0.0 || self.waist_m <= 0.0 || self.mass_kg <= 0.0 {
            return Err(Error::invalid("b, c and mass must be positive"));
        }
        if self.grid.points < 512 {
            return Err(Error::invalid("grid needs at least 512 points"));
        }
        Ok(())
    }

    fn symmetrized(&self) -> TweezerConfig {
        let mean = 0.5 * (self.depth1_hz + self.depth2_hz);
        TweezerConfig { depth1_hz: mean, depth2_hz: mean, ..self.clone() }
    }

    fn potential(&self, x: f64) -> f64 {
        let b = self.half_separation_m;
        let two_c2 = 2.0 * self.waist_m * self.waist_m;
        -self.depth1_hz * (-(x + b) * (x + b) / two_c2).exp()
            - self.depth2_hz * (-(x - b) * (x - b) / two_c2).exp()
    }
}

/// Lowest eigenpairs of the discretized single-particle Hamiltonian.
#[derive(Debug, Clone)]
pub struct TweezerSolution {
    /// Interior grid points (Dirichlet boundaries just outside).
    pub x: Vec<f64>,
    pub dx: f64,
    pub potential: Vec<f64>,
    /// Lowest eigenvalues in Hz, ascending.
    pub energies_hz: Vec<f64>,
    /// Eigenfunctions, normalized under trapezoid quadrature.
    pub wavefunctions: Vec<Vec<f64>>,
}

impl TweezerSolution {
    fn kinetic_coefficient(&self, mass: f64) -> f64 {
        HBAR / (4.0 * std::f64::consts::PI * mass) / (self.dx * self.dx)
    }

    fn apply_h(&self, kin: f64, psi: &[f64]) -> Vec<f64> {
        let n = psi.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = (2.0 * kin + self.potential[i]) * psi[i];
            if i > 0 {
                acc -= kin * psi[i - 1];
            }
            if i + 1 < n {
                acc -= kin * psi[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// `<a|H|b>` under trapezoid quadrature, in Hz.
    pub fn h_expectation(&self, mass: f64, a: &[f64], b: &[f64]) -> f64 {
        let hb = self.apply_h(self.kinetic_coefficient(mass), b);
        a.iter().zip(&hb).map(|(x, y)| x * y).sum::<f64>() * self.dx
    }

    pub fn overlap(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.dx
    }
}

// ---------------------------------------------------------------------------
// symmetric tridiagonal eigensolver: Sturm bisection + inverse iteration
// ---------------------------------------------------------------------------

/// Number of eigenvalues of the tridiagonal `(diag, off)` strictly below
/// `lambda`, by the Sturm sequence count.
fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut d = diag[0] - lambda;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        d = diag[i] - lambda - off[i - 1] * off[i - 1] / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenvalues by bisection on the Sturm count.
fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
    (0..k)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..120 {
                let mid = 0.5 * (a + b);
                if sturm_count(diag, off, mid) >= j + 1 {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a <= 4.0 * f64::EPSILON * scale {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Solve `(T - lambda) v = rhs` in place by LU with partial pivoting.
fn shifted_tridiag_solve(diag: &[f64], off: &[f64], lambda: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let mut dl: Vec<f64> = off.to_vec();
    let mut dm: Vec<f64> = diag.iter().map(|d| d - lambda).collect();
    let mut du: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n - 1 {
        if dl[i].abs() > dm[i].abs() {
            // swap rows i, i+1; the pivot row then carries a second
            // superdiagonal entry
            dm.swap(i, i + 1);
            let tmp = du[i];
            du[i] = dm[i + 1];
            dm[i + 1] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = 0.0;
            }
            rhs.swap(i, i + 1);
        }
        let pivot = if dm[i] == 0.0 { f64::MIN_POSITIVE.sqrt() } else { dm[i] };
        let m = dl[i] / pivot;
        dm[i + 1] -= m * du[i];
        if i + 2 < n {
            du[i + 1] -= m * du2[i];
        }
        rhs[i + 1] -= m * rhs[i];
    }
    let safe = |v: f64| if v == 0.0 { f64::MIN_POSITIVE.sqrt() } else { v };
    rhs[n - 1] /= safe(dm[n - 1]);
    if n >= 2 {
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / safe(dm[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / safe(dm[i]);
    }
}

/// Eigenvector by inverse iteration, orthogonalized against `previous`.
fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    previous: &[Vec<f64>],
    dx: f64,
) -> Vec<f64> {
    let n = diag.len();
    // deterministic start vector
    let mut v: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.7368 + 0.21).sin()).collect();
    for _ in 0..3 {
        for p in previous {
            let c: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() * dx;
            for (vi, pi) in v.iter_mut().zip(p) {
                *vi -= c * pi;
            }
        }
        shifted_tridiag_solve(diag, off, lambda, &mut v);
        let norm = (v.iter().map(|a| a * a).sum::<f64>() * dx).sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    }
    for p in previous {
        let c: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() * dx;
        for (vi, pi) in v.iter_mut().zip(p) {
            *vi -= c * pi;
        }
    }
    let norm = (v.iter().map(|a| a * a).sum::<f64>() * dx).sqrt();
    for vi in v.iter_mut() {
        *vi /= norm;
    }
    // deterministic sign: largest-magnitude entry positive
    let mut imax = 0;
    for i in 0..n {
        if v[i].abs() > v[imax].abs() {
            imax = i;
        }
    }
    if v[imax] < 0.0 {
        for vi in v.iter_mut() {
            *vi = -*vi;
        }
    }
    v
}

pub(crate) fn solve_tridiagonal_lowest(
    diag: &[f64],
    off: &[f64],
    k: usize,
    dx: f64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let energies = lowest_eigenvalues(diag, off, k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &e in &energies {
        let v = inverse_iteration(diag, off, e, &vectors, dx);
        vectors.push(v);
    }
    (energies, vectors)
}

// ---------------------------------------------------------------------------
// eigensolver entry points
// ---------------------------------------------------------------------------

fn solve_on_grid(config: &TweezerConfig, points: usize) -> TweezerSolution {
    let half_width = config.grid.half_width_factor * (config.half_separation_m + config.waist_m);
    let dx = 2.0 * half_width / (points as f64 + 1.0);
    let x: Vec<f64> = (0..points).map(|i| -half_width + dx * (i as f64 + 1.0)).collect();
    let potential: Vec<f64> = x.iter().map(|&xi| config.potential(xi)).collect();
    let kin = HBAR / (4.0 * std::f64::consts::PI * config.mass_kg) / (dx * dx);
    let diag: Vec<f64> = potential.iter().map(|v| 2.0 * kin + v).collect();
    let off = vec![-kin; points - 1];
    let (energies_hz, wavefunctions) = solve_tridiagonal_lowest(&diag, &off, 4, dx);
    TweezerSolution { x, dx, potential, energies_hz, wavefunctions }
}

/// Lowest four eigenpairs, refining the grid until a doubling changes
/// `E1 - E0` by less than `grid.rel_tol` relative.
pub fn solve_eigenstates(config: &TweezerConfig) -> Result<TweezerSolution> {
    config.validate()?;
    let mut points = config.grid.points;
    let mut current = solve_on_grid(config, points);
    for _ in 0..config.grid.max_doublings {
        points *= 2;
        let finer = solve_on_grid(config, points);
        let s0 = current.energies_hz[1] - current.energies_hz[0];
        let s1 = finer.energies_hz[1] - finer.energies_hz[0];
        let rel = (s1 - s0).abs() / s1.abs().max(f64::MIN_POSITIVE);
        current = finer;
        if rel < config.grid.rel_tol {
            return Ok(current);
        }
    }
    Err(Error::Numerical(format!(
        "E1-E0 not converged to {} after {} grid doublings",
        config.grid.rel_tol, config.grid.max_doublings
    )))
}

/// Left/right localized modes spanning the two lowest eigenstates.
#[derive(Debug, Clone)]
pub struct LocalizedModes {
    pub phi_l: Vec<f64>,
    pub phi_r: Vec<f64>,
}

/// Build maximally localized modes by diagonalizing the position operator in
/// the span of the two lowest eigenfunctions. For a symmetric double well
/// this reduces to `(psi0 -+ psi1)/sqrt(2)`; for tilted configurations it
/// tracks the modes smoothly as they localize onto single wells.
pub fn localized_modes(solution: &TweezerSolution) -> LocalizedModes {
    let (p0, p1) = (&solution.wavefunctions[0], &solution.wavefunctions[1]);
    let xw = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&solution.x).map(|((ai, bi), xi)| ai * bi * xi).sum::<f64>()
            * solution.dx
    };
    let (x00, x01, x11) = (xw(p0, p0), xw(p0, p1), xw(p1, p1));
    let theta = 0.5 * (2.0 * x01).atan2(x00 - x11);
    let (c, s) = (theta.cos(), theta.sin());
    let e1 = c * c * x00 + 2.0 * c * s * x01 + s * s * x11;
    let e2 = s * s * x00 - 2.0 * c * s * x01 + c * c * x11;
    let combine =
        |a: f64, b: f64| -> Vec<f64> { p0.iter().zip(p1).map(|(u, v)| a * u + b * v).collect() };
    let (mut phi_l, mut phi_r) =
        if e1 <= e2 { (combine(c, s), combine(-s, c)) } else { (combine(-s, c), combine(c, s)) };
    for phi in [&mut phi_l, &mut phi_r] {
        let mut imax = 0;
        for i in 0..phi.len() {
            if phi[i].abs() > phi[imax].abs() {
                imax = i;
            }
        }
        if phi[imax] < 0.0 {
            for v in phi.iter_mut() {
                *v = -*v;
            }
        }
    }
    LocalizedModes { phi_l, phi_r }
}

/// Effective two-mode parameters extracted from a configuration.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TwoModeParams {
    /// Tunnelling `J = E1 - E0` of the symmetrized configuration, Hz.
    pub j_hz: f64,
    /// On-site interactions `U_i = (g1d/h) int |phi_i|^4 dx`, Hz.
    pub u1_hz: f64,
    pub u2_hz: f64,
    /// `<phi_R|H|phi_R> - <phi_L|H|phi_L>`, Hz.
    pub tilt_energy_hz: f64,
    /// Tilt in the two-well convention where the single-particle energy
    /// difference equals `eps * U1`. NaN when `U1 = 0`.
    pub eps_eff: f64,
}

fn interaction_hz(config: &TweezerConfig, solution: &TweezerSolution, phi: &[f64]) -> f64 {
    config.g1d_j_m / PLANCK_H * phi.iter().map(|v| v.powi(4)).sum::<f64>() * solution.dx
}

/// Extract `(J, U1, U2, eps_eff)` for a configuration. `J` always comes from
/// the symmetric point (mean depths); the interactions and the tilt from the
/// configuration itself.
pub fn two_mode_params(config: &TweezerConfig) -> Result<TwoModeParams> {
    let sym = solve_eigenstates(&config.symmetrized())?;
    let j_hz = sym.energies_hz[1] - sym.energies_hz[0];
    let solution =
        if config.depth1_hz == config.depth2_hz { sym } else { solve_eigenstates(config)? };
    let modes = localized_modes(&solution);
    let u1_hz = interaction_hz(config, &solution, &modes.phi_l);
    let u2_hz = interaction_hz(config, &solution, &modes.phi_r);
    let tilt_energy_hz = solution.h_expectation(config.mass_kg, &modes.phi_r, &modes.phi_r)
        - solution.h_expectation(config.mass_kg, &modes.phi_l, &modes.phi_l);
    let eps_eff = if u1_hz > 0.0 { tilt_energy_hz / u1_hz } else { f64::NAN };
    Ok(TwoModeParams { j_hz, u1_hz, u2_hz, tilt_energy_hz, eps_eff })
}

/// `g1d` that makes `U1/J` equal `target` for this geometry. `U1` is linear
/// in `g1d`, so no iteration is needed.
pub fn calibrate_g1d(config: &TweezerConfig, target_u_over_j: f64) -> Result<f64> {
    let sym = solve_eigenstates(&config.symmetrized())?;
    let j_hz = sym.energies_hz[1] - sym.energies_hz[0];
    let modes = localized_modes(&sym);
    let int4 = modes.phi_l.iter().map(|v| v.powi(4)).sum::<f64>() * sym.dx;
    if int4 <= 0.0 {
        return Err(Error::Numerical("degenerate localized mode".into()));
    }
    Ok(target_u_over_j * j_hz * PLANCK_H / int4)
}

/// Localized-mode energy difference for a depth asymmetry `a`, at fixed grid.
fn tilt_energy_at(config: &TweezerConfig, points: usize, asym: f64) -> f64 {
    let mean = 0.5 * (config.depth1_hz + config.depth2_hz);
    let tilted = TweezerConfig {
        depth1_hz: mean * (1.0 + asym),
        depth2_hz: mean * (1.0 - asym),
        ..config.clone()
    };
    let sol = solve_on_grid(&tilted, points);
    let modes = localized_modes(&sol);
    sol.h_expectation(config.mass_kg, &modes.phi_r, &modes.phi_r)
        - sol.h_expectation(config.mass_kg, &modes.phi_l, &modes.phi_l)
}

/// Find depth amplitudes (keeping `d1 + d2` fixed) whose localized-mode
/// energy difference equals `target_hz` to 1e-6 relative.
pub fn tilt_calibration(config: &TweezerConfig, target_hz: f64) -> Result<(f64, f64)> {
    config.validate()?;
    let mean = 0.5 * (config.depth1_hz + config.depth2_hz);
    if target_hz == 0.0 {
        return Ok((mean, mean));
    }
    // settle the grid on the symmetric problem, then root-find at fixed grid
    let sym = solve_eigenstates(&config.symmetrized())?;
    let points = sym.x.len();
    let h = 1e-5;
    let slope =
        (tilt_energy_at(config, points, h) - tilt_energy_at(config, points, -h)) / (2.0 * h);
    if !(slope.is_finite() && slope != 0.0) {
        return Err(Error::Numerical("flat tilt response".into()));
    }
    let mut best = target_hz / slope;
    if best.abs() >= 0.95 {
        return Err(Error::Range(format!("target tilt {target_hz} Hz is unreachable")));
    }
    // bracket around the linear estimate, growing if needed
    let mut width = best.abs().max(1e-6);
    let (mut lo, mut hi);
    loop {
        lo = (best - width).max(-0.95);
        hi = (best + width).min(0.95);
        let flo = tilt_energy_at(config, points, lo) - target_hz;
        let fhi = tilt_energy_at(config, points, hi) - target_hz;
        if flo <= 0.0 && fhi >= 0.0 {
            break;
        }
        if lo <= -0.95 && hi >= 0.95 {
            return Err(Error::Range(format!("target tilt {target_hz} Hz is unreachable")));
        }
        width *= 4.0;
    }
    let tol = 1e-6 * target_hz.abs();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = tilt_energy_at(config, points, mid) - target_hz;
        if f.abs() <= tol {
            best = mid;
            break;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = 0.5 * (lo + hi);
    }
    let achieved = tilt_energy_at(config, points, best);
    if (achieved - target_hz).abs() > 10.0 * tol {
        return Err(Error::Numerical(format!(
            "tilt calibration stalled at {achieved} Hz for target {target_hz} Hz"
        )));
    }
    Ok((mean * (1.0 + best), mean * (1.0 - best)))
}

/// Overlaps `|<phi_i(0)|phi_i(delta_eps)>|^2` of the localized modes before
/// and after applying a tilt of `delta_eps` (in units where the
/// single-particle energy difference is `delta_eps * U1`).
pub fn two_mode_overlaps(config: &TweezerConfig, delta_eps: f64) -> Result<(f64, f64)> {
    let base = solve_eigenstates(config)?;
    let modes0 = localized_modes(&base);
    if delta_eps == 0.0 {
        return Ok((1.0, 1.0));
    }
    let u1 = interaction_hz(config, &base, &modes0.phi_l);
    if u1 <= 0.0 {
        return Err(Error::invalid(
            "two_mode_infidelity needs g1d > 0 to convert delta_eps into a tilt energy",
        ));
    }
    let (d1, d2) = tilt_calibration(config, delta_eps * u1)?;
    let tilted_cfg = TweezerConfig { depth1_hz: d1, depth2_hz: d2, ..config.clone() };
    let tilted = solve_on_grid(&tilted_cfg, base.x.len());
    let modes1 = localized_modes(&tilted);
    let ol = base.overlap(&modes0.phi_l, &modes1.phi_l).powi(2);
    let or = base.overlap(&modes0.phi_r, &modes1.phi_r).powi(2);
    Ok((ol, or))
}

/// `1 - min(left, right)` localized-mode overlap under a tilt change from 0
/// to `delta_eps`; the conservative (larger) of the two infidelities.
pub fn two_mode_infidelity(config: &TweezerConfig, delta_eps: f64) -> Result<f64> {
    let (ol, or) = two_mode_overlaps(config, delta_eps)?;
    Ok(1.0 - ol.min(or))
}

/// One row of the interaction map.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InteractionMapRow {
    pub waist_m: f64,
    pub u_over_j_0: f64,
    pub delta_eps: f64,
    pub u1_over_j: f64,
}

/// `U1/J` as a function of the zero-tilt `U/J` (varied through the waist)
/// and the applied tilt.
pub fn interaction_map(
    template: &TweezerConfig,
    waists_m: &[f64],
    delta_eps: &[f64],
) -> Result<Vec<InteractionMapRow>> {
    if waists_m.is_empty() || delta_eps.is_empty() {
        return Err(Error::invalid("interaction map needs non-empty grids"));
    }
    let mut rows = Vec::new();
    for &c in waists_m {
        let config = TweezerConfig { waist_m: c, ..template.clone() }.symmetrized();
        let base = solve_eigenstates(&config)?;
        let j = base.energies_hz[1] - base.energies_hz[0];
        let modes0 = localized_modes(&base);
        let u0 = interaction_hz(&config, &base, &modes0.phi_l);
        for &de in delta_eps {
            let u1 = if de == 0.0 {
                u0
            } else {
                let (d1, d2) = tilt_calibration(&config, de * u0)?;
                let tilted_cfg = TweezerConfig { depth1_hz: d1, depth2_hz: d2, ..config.clone() };
                let tilted = solve_on_grid(&tilted_cfg, base.x.len());
                let modes1 = localized_modes(&tilted);
                interaction_hz(&config, &tilted, &modes1.phi_l)
            };
            rows.push(InteractionMapRow {
                waist_m: c,
                u_over_j_0: u0 / j,
                delta_eps: de,
                u1_over_j: u1 / j,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Thin-barrier geometry: splittings converge quickly.
    fn fast_config() -> TweezerConfig {
        TweezerConfig {
            depth1_hz: 60e3,
            depth2_hz: 60e3,
            half_separation_m: 0.25e-6,
            waist_m: 0.30e-6,
            mass_kg: RB87_MASS,
            g1d_j_m: 1e-38,
            grid: GridSpec { half_width_factor: 4.0, points: 512, rel_tol: 1e-6, max_doublings: 6 },
        }
    }

    fn node_count(psi: &[f64], floor: f64) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for &v in psi {
            if v.abs() < floor {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }

    #[test]
    fn harmonic_oscillator_spectrum() {
        // V = m omega^2 x^2 / 2 in Hz; level spacing must equal omega/2pi
        let mass = RB87_MASS;
        let f0 = 2e4; // Hz
        let omega = 2.0 * std::f64::consts::PI * f0;
        let sigma = (HBAR / (mass * omega)).sqrt();
        let half_width = 12.0 * sigma;
        let n = 6000;
        let dx = 2.0 * half_width / (n as f64 + 1.0);
        let kin = HBAR / (4.0 * std::f64::consts::PI * mass) / (dx * dx);
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let x = -half_width + dx * (i as f64 + 1.0);
                2.0 * kin + 0.5 * mass * omega * omega * x * x / PLANCK_H
            })
            .collect();
        let off = vec![-kin; n - 1];
        let (energies, vectors) = solve_tridiagonal_lowest(&diag, &off, 4, dx);
        for k in 0..3 {
            let spacing = energies[k + 1] - energies[k];
            assert!((spacing - f0).abs() / f0 < 1e-4, "spacing {k}: {spacing} vs {f0}");
        }
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 =
                    vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum::<f64>() * dx;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8, "({i},{j}): {dot}");
            }
        }
    }

    #[test]
    fn symmetric_parity_and_near_degeneracy() {
        let sol = solve_eigenstates(&fast_config()).unwrap();
        let floor = sol.wavefunctions[0].iter().fold(0.0f64, |a, &v| a.max(v.abs())) * 1e-6;
        assert_eq!(node_count(&sol.wavefunctions[0], floor), 0);
        assert_eq!(node_count(&sol.wavefunctions[1], floor), 1);
        let split = sol.energies_hz[1] - sol.energies_hz[0];
        let gap = sol.energies_hz[2] - sol.energies_hz[1];
        assert!(split > 0.0 && split < 0.1 * gap, "split {split}, gap {gap}");
    }

    #[test]
    fn paper_geometry_quasi_degenerate_pair() {
        // the thick barrier keeps the lowest pair split far below the band
        // gap; a fixed fine grid shows the structure without the gate
        let config = TweezerConfig::paper_geometry();
        let sol = solve_on_grid(&config, 8192);
        let split = sol.energies_hz[1] - sol.energies_hz[0];
        let gap = sol.energies_hz[2] - sol.energies_hz[1];
        assert!(split > 0.0 && split < 1e-4 * gap, "split {split}, gap {gap}");
    }

    #[test]
    fn localized_modes_symmetry_and_orthogonality() {
        let sol = solve_eigenstates(&fast_config()).unwrap();
        let modes = localized_modes(&sol);
        // equals (psi0 -+ psi1)/sqrt2 up to sign at the symmetric point
        let n = sol.x.len();
        let mut diff = 0.0f64;
        for i in 0..n {
            let want = (sol.wavefunctions[0][i] - sol.wavefunctions[1][i]) / 2f64.sqrt();
            diff = diff.max((modes.phi_l[i].abs() - want.abs()).abs());
        }
        assert!(diff < 1e-5, "deviation {diff}");
        // mirror symmetry |phi_L(x)|^2 = |phi_R(-x)|^2
        let mut mirror = 0.0f64;
        for i in 0..n {
            mirror = mirror
                .max((modes.phi_l[i].powi(2) - modes.phi_r[n - 1 - i].powi(2)).abs() * sol.dx);
        }
        assert!(mirror < 1e-8, "mirror deviation {mirror}");
        assert!(sol.overlap(&modes.phi_l, &modes.phi_r).abs() < 1e-10);
        let left_mass: f64 = modes
            .phi_l
            .iter()
            .zip(&sol.x)
            .filter(|(_, &x)| x < 0.0)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            * sol.dx;
        assert!(left_mass > 0.5);
    }

    #[test]
    fn strong_tilt_localizes_modes() {
        let mut config = fast_config();
        config.depth1_hz *= 1.3;
        config.depth2_hz *= 0.7;
        let sol = solve_eigenstates(&config).unwrap();
        let modes = localized_modes(&sol);
        let left_mass: f64 = modes
            .phi_l
            .iter()
            .zip(&sol.x)
            .filter(|(_, &x)| x < 0.0)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            * sol.dx;
        assert!(left_mass > 0.99, "left mass {left_mass}");
    }

    #[test]
    fn two_mode_params_symmetric_and_zero_g() {
        let mut config = fast_config();
        let params = two_mode_params(&config).unwrap();
        assert!(params.j_hz > 0.0);
        assert!(params.eps_eff.abs() < 1e-6, "eps_eff {}", params.eps_eff);
        assert!((params.u1_hz - params.u2_hz).abs() < 1e-9 * params.u1_hz.abs());
        config.g1d_j_m = 0.0;
        let params0 = two_mode_params(&config).unwrap();
        assert_eq!(params0.u1_hz, 0.0);
        assert_eq!(params0.u2_hz, 0.0);
    }

    #[test]
    fn widening_waist_increases_tunnelling() {
        let mut last = 0.0;
        for c in [0.26e-6, 0.30e-6, 0.34e-6] {
            let config = TweezerConfig { waist_m: c, ..fast_config() };
            let params = two_mode_params(&config).unwrap();
            assert!(params.j_hz > last, "J {} at c={c}", params.j_hz);
            last = params.j_hz;
        }
    }

    #[test]
    fn tilt_calibration_closed_loop() {
        let config = fast_config();
        let params = two_mode_params(&config).unwrap();
        let target = 3.0 * params.u1_hz;
        let (d1, d2) = tilt_calibration(&config, target).unwrap();
        assert!((d1 + d2 - config.depth1_hz - config.depth2_hz).abs() < 1e-6);
        let tilted = TweezerConfig { depth1_hz: d1, depth2_hz: d2, ..config.clone() };
        let re = two_mode_params(&tilted).unwrap();
        assert!(
            (re.tilt_energy_hz - target).abs() <= 2e-6 * target.abs(),
            "target {target}, got {}",
            re.tilt_energy_hz
        );
        let (e1, e2) = tilt_calibration(&config, 0.0).unwrap();
        assert_eq!(e1, e2);
        // sign flip swaps the depths
        let (f1, f2) = tilt_calibration(&config, -target).unwrap();
        assert!((f1 - d2).abs() < 1e-4 * d2 && (f2 - d1).abs() < 1e-4 * d1);
    }

    #[test]
    fn infidelity_zero_at_zero_tilt_and_monotone() {
        let config = fast_config();
        assert_eq!(two_mode_infidelity(&config, 0.0).unwrap(), 0.0);
        let mut last = -1.0;
        for de in [0.0, 1.0, 2.5, 5.0] {
            let infid = two_mode_infidelity(&config, de).unwrap();
            assert!(infid >= last - 1e-12, "infidelity not monotone at {de}");
            assert!(infid < 1e-4);
            last = infid;
        }
    }

    #[test]
    fn interaction_map_columns() {
        let config = fast_config();
        let rows = interaction_map(&config, &[0.28e-6, 0.32e-6], &[0.0, 2.0]).unwrap();
        assert_eq!(rows.len(), 4);
        for row in rows.iter().filter(|r| r.delta_eps == 0.0) {
            assert_eq!(row.u_over_j_0, row.u1_over_j);
        }
        for row in rows.iter().filter(|r| r.delta_eps != 0.0) {
            let rel = (row.u1_over_j - row.u_over_j_0).abs() / row.u_over_j_0;
            assert!(rel < 0.2, "relative variation {rel}");
        }
        assert!(interaction_map(&config, &[], &[0.0]).is_err());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut config = fast_config();
        config.depth1_hz = -1.0;
        assert!(solve_eigenstates(&config).is_err());
        let mut config2 = fast_config();
        config2.grid.points = 16;
        assert!(solve_eigenstates(&config2).is_err());
    }
}
