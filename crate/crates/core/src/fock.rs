//! Many-body Fock basis and state vectors for N bosons in W wells.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ordered basis of occupation-number states for `particles` bosons in
/// `wells` wells.
///
/// States are enumerated in ascending lexicographic order of the occupation
/// tuple `(n_1, ..., n_W)`. For two wells this makes the basis index equal to
/// the left-well occupation, so `|0,N>` sits at index 0 and `|N,0>` at index
/// `N`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    wells: usize,
    particles: usize,
    states: Vec<Vec<u32>>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.wells == other.wells && self.particles == other.particles
    }
}
impl Eq for FockBasis {}

impl FockBasis {
    /// Enumerate the basis for `particles >= 1` bosons in `wells >= 2` wells.
    pub fn new(wells: usize, particles: usize) -> Result<Self> {
        if wells < 2 {
            return Err(Error::invalid(format!("need at least 2 wells, got {wells}")));
        }
        if particles < 1 {
            return Err(Error::invalid("need at least 1 particle"));
        }
        let mut states = Vec::with_capacity(binomial(particles + wells - 1, wells - 1));
        let mut occ = vec![0u32; wells];
        enumerate(&mut states, &mut occ, 0, particles as u32);
        // enumeration emits ascending lexicographic order by construction
        debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
        Ok(FockBasis { wells, particles, states })
    }

    pub fn wells(&self) -> usize {
        self.wells
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Number of basis states, `C(N+W-1, W-1)`.
    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn occupation(&self, index: usize) -> &[u32] {
        &self.states[index]
    }

    /// Position of an occupation tuple in the basis.
    pub fn index_of(&self, occupation: &[u32]) -> Result<usize> {
        if occupation.len() != self.wells
            || occupation.iter().sum::<u32>() as usize != self.particles
        {
            return Err(Error::invalid(format!(
                "occupation {occupation:?} does not fit a ({}, {}) basis",
                self.wells, self.particles
            )));
        }
        self.states
            .binary_search_by(|s| s.as_slice().cmp(occupation))
            .map_err(|_| Error::invalid(format!("occupation {occupation:?} not in basis")))
    }

    /// Unit state vector on one occupation tuple.
    pub fn fock_state(&self, occupation: &[u32]) -> Result<ManyBodyState> {
        let k = self.index_of(occupation)?;
        let mut amplitudes = DVector::zeros(self.dimension());
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(ManyBodyState { basis: self.clone(), amplitudes })
    }
}

fn enumerate(out: &mut Vec<Vec<u32>>, occ: &mut [u32], well: usize, remaining: u32) {
    if well == occ.len() - 1 {
        occ[well] = remaining;
        out.push(occ.to_vec());
        return;
    }
    for k in 0..=remaining {
        occ[well] = k;
        enumerate(out, occ, well + 1, remaining - k);
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A normalized many-body state over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct ManyBodyState {
    basis: FockBasis,
    amplitudes: DVector<Complex64>,
}

impl ManyBodyState {
    /// Wrap an amplitude vector, normalizing it.
    pub fn from_amplitudes(basis: &FockBasis, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::invalid(format!(
                "amplitude vector length {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dimension()
            )));
        }
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(ManyBodyState { basis: basis.clone(), amplitudes: amplitudes / Complex64::from(norm) })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &ManyBodyState) -> Result<Complex64> {
        if self.basis != other.basis {
            return Err(Error::invalid("states live in different bases"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Population `|amplitude|^2` per basis state.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_well_single_particle() {
        let b = FockBasis::new(2, 1).unwrap();
        assert_eq!(b.states(), &[vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn two_well_index_equals_left_occupation() {
        let b = FockBasis::new(2, 3).unwrap();
        assert_eq!(b.dimension(), 4);
        assert_eq!(b.occupation(0), &[0, 3]);
        assert_eq!(b.occupation(3), &[3, 0]);
        assert_eq!(b.index_of(&[0, 3]).unwrap(), 0);
        assert_eq!(b.index_of(&[3, 0]).unwrap(), 3);
    }

    #[test]
    fn three_well_count() {
        let b = FockBasis::new(3, 2).unwrap();
        assert_eq!(b.dimension(), 6);
        // lexicographic order puts (1,1,0) after (0,*,*) and (1,0,1)
        let idx = b.index_of(&[1, 1, 0]).unwrap();
        assert_eq!(b.occupation(idx), &[1, 1, 0]);
        assert_eq!(idx, 4);
    }

    #[test]
    fn dimension_matches_binomial() {
        for w in 2..=4 {
            for n in 1..=12 {
                let b = FockBasis::new(w, n).unwrap();
                assert_eq!(b.dimension(), binomial(n + w - 1, w - 1), "W={w} N={n}");
            }
        }
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(FockBasis::new(1, 3).is_err());
        assert!(FockBasis::new(2, 0).is_err());
        let b = FockBasis::new(2, 3).unwrap();
        assert!(b.index_of(&[1, 1]).is_err());
        assert!(b.index_of(&[4, 0]).is_err());
        assert!(b.index_of(&[1, 1, 1]).is_err());
    }

    #[test]
    fn fock_states_are_orthonormal_units() {
        let b = FockBasis::new(2, 2).unwrap();
        let s0 = b.fock_state(&[0, 2]).unwrap();
        let s2 = b.fock_state(&[2, 0]).unwrap();
        assert_eq!(s0.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(s2.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert_eq!(s0.inner(&s2).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(s0.inner(&s0).unwrap(), Complex64::new(1.0, 0.0));

        let b36 = FockBasis::new(3, 6).unwrap();
        let s = b36.fock_state(&[0, 6, 0]).unwrap();
        let k = b36.index_of(&[0, 6, 0]).unwrap();
        assert_eq!(s.amplitudes()[k], Complex64::new(1.0, 0.0));
    }

    proptest! {
        #[test]
        fn enumeration_is_bijective(w in 2usize..=4, n in 1usize..=8) {
            let b = FockBasis::new(w, n).unwrap();
            for i in 0..b.dimension() {
                prop_assert_eq!(b.index_of(b.occupation(i)).unwrap(), i);
            }
        }

        #[test]
        fn tuples_sum_to_n_and_are_sorted(w in 2usize..=4, n in 1usize..=8) {
            let b = FockBasis::new(w, n).unwrap();
            for s in b.states() {
                prop_assert_eq!(s.iter().sum::<u32>() as usize, n);
            }
            for pair in b.states().windows(2) {
                prop_assert!(pair[0] < pair[1]);
            }
        }
    }
}
