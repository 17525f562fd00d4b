//! Bose-Hubbard Hamiltonians for tilted two- and three-well systems.
//!
//! Energies are in units of `J` with `J = 1`, `hbar = 1`; the interaction
//! enters as the ratio `u = U/J`. The two-well tilt is a single scalar
//! `eps` contributing `(u/2) eps (n_2 - n_1)`; for three wells the tilt is a
//! per-well vector with the term `(u/2) sum_i eps_i n_i` and hopping only
//! between adjacent wells.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::FockBasis;

/// Model parameters defining one Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub wells: usize,
    pub particles: usize,
    /// Interaction ratio `u = U/J >= 0`.
    pub u: f64,
    /// Length 1 for the two-well relative tilt, length `wells` for per-well
    /// site tilts.
    pub tilt: Vec<f64>,
}

impl ModelParams {
    /// Two-well model with scalar relative tilt `eps`.
    pub fn two_well(particles: usize, u: f64, eps: f64) -> Self {
        ModelParams { wells: 2, particles, u, tilt: vec![eps] }
    }

    /// Three-well open chain with per-well site tilts.
    pub fn three_well(particles: usize, u: f64, tilt: [f64; 3]) -> Self {
        ModelParams { wells: 3, particles, u, tilt: tilt.to_vec() }
    }

    pub fn with_tilt(&self, tilt: Vec<f64>) -> Self {
        ModelParams { tilt, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.wells != 2 && self.wells != 3 {
            return Err(Error::invalid(format!("wells must be 2 or 3, got {}", self.wells)));
        }
        if self.u < 0.0 || !self.u.is_finite() {
            return Err(Error::invalid(format!("u must be finite and >= 0, got {}", self.u)));
        }
        if self.tilt.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("tilt components must be finite"));
        }
        let ok = self.tilt.len() == self.wells || (self.wells == 2 && self.tilt.len() == 1);
        if !ok {
            return Err(Error::invalid(format!(
                "tilt vector length {} incompatible with {} wells",
                self.tilt.len(),
                self.wells
            )));
        }
        Ok(())
    }

    /// Per-well site tilts; expands the two-well scalar `eps` to `(-eps, +eps)`
    /// so that `(u/2) sum_i eps_i n_i` reproduces `(u/2) eps (n_2 - n_1)`.
    pub fn site_tilts(&self) -> Vec<f64> {
        if self.wells == 2 && self.tilt.len() == 1 {
            vec![-self.tilt[0], self.tilt[0]]
        } else {
            self.tilt.clone()
        }
    }
}

/// Diagonal energy of an occupation tuple: interaction plus tilt term.
pub fn diagonal_energy(u: f64, site_tilts: &[f64], occupation: &[u32]) -> f64 {
    let interaction: f64 = occupation.iter().map(|&n| (n as f64) * (n as f64 - 1.0)).sum();
    let tilt: f64 =
        site_tilts.iter().zip(occupation).map(|(&e, &n)| e * n as f64).sum();
    0.5 * u * (interaction + tilt)
}

/// Diagonal energy of the two-well level with `n_left` particles on the left,
/// at scalar tilt `eps`.
pub fn two_well_level(u: f64, eps: f64, n_left: usize, n_total: usize) -> f64 {
    let site = [-eps, eps];
    diagonal_energy(u, &site, &[n_left as u32, (n_total - n_left) as u32])
}

/// Build the (real symmetric) Hamiltonian matrix in the given Fock basis.
pub fn build(params: &ModelParams, basis: &FockBasis) -> Result<DMatrix<f64>> {
    params.validate()?;
    if basis.wells() != params.wells {
        return Err(Error::invalid(format!(
            "basis has {} wells but params have {}",
            basis.wells(),
            params.wells
        )));
    }
    let site = params.site_tilts();
    let d = basis.dimension();
    let mut h = DMatrix::zeros(d, d);
    for i in 0..d {
        let occ = basis.occupation(i);
        h[(i, i)] = diagonal_energy(params.u, &site, occ);
        // hop one particle from well w+1 to well w; the symmetric entry
        // covers the reverse direction
        for w in 0..params.wells - 1 {
            if occ[w + 1] == 0 {
                continue;
            }
            let mut moved = occ.to_vec();
            moved[w] += 1;
            moved[w + 1] -= 1;
            let j = basis.index_of(&moved)?;
            let amp = -0.5 * ((occ[w] as f64 + 1.0) * occ[w + 1] as f64).sqrt();
            h[(i, j)] = amp;
            h[(j, i)] = amp;
        }
    }
    Ok(h)
}

/// Resonant tilt `eta_{n,m} = 2n - N + m` at which `|n, N-n>` and
/// `|n+m, N-n-m>` are degenerate.
pub fn resonance_tilt(n: usize, m: usize, n_total: usize) -> Result<f64> {
    if n + 1 > n_total {
        return Err(Error::invalid(format!("pair index n={n} out of range for N={n_total}")));
    }
    if m < 1 || n + m > n_total {
        return Err(Error::invalid(format!("order m={m} out of range for n={n}, N={n_total}")));
    }
    Ok(2.0 * n as f64 - n_total as f64 + m as f64)
}

/// Bosonically enhanced Rabi frequency `omega_n = sqrt(n+1) sqrt(N-n)` of the
/// first-order crossing between `|n, N-n>` and `|n+1, N-n-1>`, in units of J.
pub fn rabi_frequency(n: usize, n_total: usize) -> Result<f64> {
    if n + 1 > n_total {
        return Err(Error::invalid(format!("pair index n={n} out of range for N={n_total}")));
    }
    Ok(((n as f64 + 1.0) * (n_total - n) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    #[test]
    fn single_particle_no_tilt() {
        let basis = FockBasis::new(2, 1).unwrap();
        let h = build(&ModelParams::two_well(1, 3.7, 0.0), &basis).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, -0.5, 0.0]);
        assert_eq!(h, expected);
    }

    #[test]
    fn two_particles_hand_evaluated() {
        // W=2, N=2, u=1, eps=1: diagonal (2, 0, 0), off-diagonals -sqrt(2)/2
        let basis = FockBasis::new(2, 2).unwrap();
        let h = build(&ModelParams::two_well(2, 1.0, 1.0), &basis).unwrap();
        let s = -0.5f64 * 2.0f64.sqrt();
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, s, 0.0, s, 0.0, s, 0.0, s, 0.0]);
        assert!(max_abs(&(h.clone() - expected)) < 1e-15);
        // |1,1> and |2,0> degenerate, consistent with eta_{1,1} = 1
        assert_eq!(h[(1, 1)], h[(2, 2)]);
    }

    #[test]
    fn resonance_tilt_values() {
        assert_eq!(resonance_tilt(0, 1, 3).unwrap(), -2.0);
        assert_eq!(resonance_tilt(1, 1, 2).unwrap(), 1.0);
        assert!(resonance_tilt(3, 1, 3).is_err());
        assert!(resonance_tilt(0, 0, 3).is_err());
        assert!(resonance_tilt(1, 3, 3).is_err());
    }

    #[test]
    fn degenerate_diagonal_at_first_order_crossings() {
        for n_total in 1..=10 {
            let basis = FockBasis::new(2, n_total).unwrap();
            for n in 0..n_total {
                let eps = resonance_tilt(n, 1, n_total).unwrap();
                let h = build(&ModelParams::two_well(n_total, 2.3, eps), &basis).unwrap();
                assert!(
                    (h[(n, n)] - h[(n + 1, n + 1)]).abs() < 1e-12,
                    "N={n_total} n={n}"
                );
            }
        }
    }

    #[test]
    fn rabi_frequency_values_and_symmetry() {
        assert!((rabi_frequency(0, 2).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((rabi_frequency(1, 3).unwrap() - 2.0).abs() < 1e-15);
        for n_total in 1..=10 {
            for n in 0..n_total {
                let a = rabi_frequency(n, n_total).unwrap();
                let b = rabi_frequency(n_total - 1 - n, n_total).unwrap();
                assert_eq!(a, b);
            }
        }
        assert!(rabi_frequency(2, 2).is_err());
    }

    #[test]
    fn hermitian_by_construction() {
        let basis = FockBasis::new(3, 4).unwrap();
        let params = ModelParams::three_well(4, 2.5, [0.7, -0.3, 1.9]);
        let h = build(&params, &basis).unwrap();
        assert_eq!(max_abs(&(h.clone() - h.transpose())), 0.0);
    }

    #[test]
    fn mirror_symmetry_of_two_well_spectrum() {
        let basis = FockBasis::new(2, 5).unwrap();
        for eps in [0.4, 1.7, 3.2] {
            let hp = build(&ModelParams::two_well(5, 1.8, eps), &basis).unwrap();
            let hm = build(&ModelParams::two_well(5, 1.8, -eps), &basis).unwrap();
            let mut ep = hp.symmetric_eigen().eigenvalues.as_slice().to_vec();
            let mut em = hm.symmetric_eigen().eigenvalues.as_slice().to_vec();
            ep.sort_by(f64::total_cmp);
            em.sort_by(f64::total_cmp);
            for (a, b) in ep.iter().zip(&em) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_mismatch_rejected() {
        let basis = FockBasis::new(3, 2).unwrap();
        assert!(build(&ModelParams::two_well(2, 1.0, 0.0), &basis).is_err());
        let p = ModelParams { wells: 3, particles: 2, u: 1.0, tilt: vec![0.0] };
        assert!(build(&p, &basis).is_err());
        assert!(build(&ModelParams::two_well(2, -1.0, 0.0), &FockBasis::new(2, 2).unwrap()).is_err());
    }
}
