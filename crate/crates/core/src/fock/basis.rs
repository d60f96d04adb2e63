use serde::Serialize;

use crate::error::{Error, Result};

/// Default ceiling on the Hilbert-space dimension.
pub const DEFAULT_MAX_DIM: usize = 2_000_000;

/// Truncated number basis for one mechanical mode (site 0) and K optical
/// modes (sites 1..=K). Flat index is mixed-radix with site 0 fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FockBasis {
    pub mech_cutoff: usize,
    pub photon_cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockBasis {
    pub fn new(mech_cutoff: usize, photon_cutoffs: Vec<usize>, max_dim: usize) -> Result<Self> {
        if photon_cutoffs.iter().any(|&c| c == 0) {
            return Err(Error::Config("photon cutoffs must be at least 1".into()));
        }
        let mut strides = Vec::with_capacity(photon_cutoffs.len() + 1);
        let mut dim: usize = 1;
        for c in std::iter::once(mech_cutoff).chain(photon_cutoffs.iter().copied()) {
            strides.push(dim);
            dim = dim
                .checked_mul(c + 1)
                .filter(|&d| d <= max_dim)
                .ok_or(Error::Dimension { dim: usize::MAX.min(dim.saturating_mul(c + 1)), limit: max_dim })?;
        }
        Ok(FockBasis {
            mech_cutoff,
            photon_cutoffs,
            strides,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of optical modes.
    pub fn modes(&self) -> usize {
        self.photon_cutoffs.len()
    }

    pub fn sites(&self) -> usize {
        self.strides.len()
    }

    pub fn cutoff(&self, site: usize) -> usize {
        if site == 0 {
            self.mech_cutoff
        } else {
            self.photon_cutoffs[site - 1]
        }
    }

    /// Flat index of occupations [n_b, n_1, .., n_K], or None if any exceeds
    /// its cutoff.
    pub fn index(&self, occ: &[usize]) -> Option<usize> {
        if occ.len() != self.sites() {
            return None;
        }
        let mut i = 0;
        for (s, &n) in occ.iter().enumerate() {
            if n > self.cutoff(s) {
                return None;
            }
            i += n * self.strides[s];
        }
        Some(i)
    }

    pub fn occupations(&self, mut idx: usize) -> Vec<usize> {
        (0..self.sites())
            .map(|s| {
                let r = self.cutoff(s) + 1;
                let n = idx % r;
                idx /= r;
                n
            })
            .collect()
    }

    pub fn occupation(&self, idx: usize, site: usize) -> usize {
        (idx / self.strides[site]) % (self.cutoff(site) + 1)
    }

    pub(crate) fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }
}
