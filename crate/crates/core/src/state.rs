//! Unknowns of the doubled system and their flat ordering.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::grid::GridSpec;

/// Multiplier blocks in flat order, each with its length class.
pub const BLOCKS: [(&str, BlockKind); 16] = [
    ("t1", BlockKind::Volume),
    ("t2", BlockKind::Volume),
    ("phi1", BlockKind::Volume),
    ("phi2", BlockKind::Volume),
    ("lam_t", BlockKind::Slice),
    ("lam_phi", BlockKind::Slice),
    ("lamt_t", BlockKind::Slice),
    ("lamt_phi", BlockKind::Slice),
    ("gam_t", BlockKind::Slice),
    ("gam_phi", BlockKind::Slice),
    ("gamt_t", BlockKind::Slice),
    ("gamt_phi", BlockKind::Slice),
    ("kap_phi", BlockKind::Wall),
    ("kapt_phi", BlockKind::Wall),
    ("xi_phi", BlockKind::Wall),
    ("xit_phi", BlockKind::Wall),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `n_tau · n_sigma` entries
    Volume,
    /// one `tau` slice, `n_sigma` entries
    Slice,
    /// one `sigma` wall, `n_tau` entries
    Wall,
}

/// Index ranges of every block in the flat vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    ranges: [Range<usize>; 16],
}

impl Layout {
    pub fn new(grid: &GridSpec) -> Self {
        let mut start = 0;
        let ranges = BLOCKS.map(|(_, kind)| {
            let len = match kind {
                BlockKind::Volume => grid.total_volume(),
                BlockKind::Slice => grid.n_sigma,
                BlockKind::Wall => grid.n_tau,
            };
            let r = start..start + len;
            start += len;
            r
        });
        Self { ranges }
    }

    pub fn len(&self) -> usize {
        self.ranges[15].end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        self.ranges[i].clone()
    }

    pub fn by_name(&self, name: &str) -> Option<Range<usize>> {
        BLOCKS.iter().position(|(n, _)| *n == name).map(|i| self.block(i))
    }

    /// Everything up to and including `phi2`.
    pub fn primal(&self) -> Range<usize> {
        0..self.ranges[3].end
    }

    pub fn multipliers(&self) -> Range<usize> {
        self.ranges[4].start..self.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub lam_t: Vec<f64>,
    pub lam_phi: Vec<f64>,
    pub lamt_t: Vec<f64>,
    pub lamt_phi: Vec<f64>,
    pub gam_t: Vec<f64>,
    pub gam_phi: Vec<f64>,
    pub gamt_t: Vec<f64>,
    pub gamt_phi: Vec<f64>,
    pub kap_phi: Vec<f64>,
    pub kapt_phi: Vec<f64>,
    pub xi_phi: Vec<f64>,
    pub xit_phi: Vec<f64>,
}

impl StateVector {
    pub fn zeros(grid: &GridSpec) -> Self {
        let (v, s, w) = (grid.total_volume(), grid.n_sigma, grid.n_tau);
        Self {
            t1: vec![0.0; v],
            t2: vec![0.0; v],
            phi1: vec![0.0; v],
            phi2: vec![0.0; v],
            lam_t: vec![0.0; s],
            lam_phi: vec![0.0; s],
            lamt_t: vec![0.0; s],
            lamt_phi: vec![0.0; s],
            gam_t: vec![0.0; s],
            gam_phi: vec![0.0; s],
            gamt_t: vec![0.0; s],
            gamt_phi: vec![0.0; s],
            kap_phi: vec![0.0; w],
            kapt_phi: vec![0.0; w],
            xi_phi: vec![0.0; w],
            xit_phi: vec![0.0; w],
        }
    }

    fn blocks(&self) -> [&Vec<f64>; 16] {
        [
            &self.t1,
            &self.t2,
            &self.phi1,
            &self.phi2,
            &self.lam_t,
            &self.lam_phi,
            &self.lamt_t,
            &self.lamt_phi,
            &self.gam_t,
            &self.gam_phi,
            &self.gamt_t,
            &self.gamt_phi,
            &self.kap_phi,
            &self.kapt_phi,
            &self.xi_phi,
            &self.xit_phi,
        ]
    }

    fn blocks_mut(&mut self) -> [&mut Vec<f64>; 16] {
        [
            &mut self.t1,
            &mut self.t2,
            &mut self.phi1,
            &mut self.phi2,
            &mut self.lam_t,
            &mut self.lam_phi,
            &mut self.lamt_t,
            &mut self.lamt_phi,
            &mut self.gam_t,
            &mut self.gam_phi,
            &mut self.gamt_t,
            &mut self.gamt_phi,
            &mut self.kap_phi,
            &mut self.kapt_phi,
            &mut self.xi_phi,
            &mut self.xit_phi,
        ]
    }

    /// Checks every block length against `grid`.
    pub fn check(&self, grid: &GridSpec) -> Result<()> {
        let layout = Layout::new(grid);
        for (i, b) in self.blocks().iter().enumerate() {
            check_len(BLOCKS[i].0, layout.block(i).len(), b.len())?;
        }
        Ok(())
    }

    pub fn pack(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub fn unpack(grid: &GridSpec, flat: &[f64]) -> Result<Self> {
        let layout = Layout::new(grid);
        check_len("flat state", layout.len(), flat.len())?;
        let mut out = Self::zeros(grid);
        for (i, b) in out.blocks_mut().into_iter().enumerate() {
            b.copy_from_slice(&flat[layout.block(i)]);
        }
        Ok(out)
    }

    pub fn zero_multipliers(&mut self) {
        for b in self.blocks_mut().into_iter().skip(4) {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Exchanges the forward and backward branches.
    pub fn swap_branches(&mut self) {
        std::mem::swap(&mut self.t1, &mut self.t2);
        std::mem::swap(&mut self.phi1, &mut self.phi2);
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_length_formula() {
        let g = GridSpec::new(6, 5, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let l = Layout::new(&g);
        assert_eq!(l.len(), 4 * 30 + 8 * 5 + 4 * 6);
        assert_eq!(l.by_name("phi2"), Some(90..120));
        assert_eq!(l.primal(), 0..120);
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let g = GridSpec::new(4, 4, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let n = Layout::new(&g).len();
        let flat: Vec<f64> = (0..n).map(|k| k as f64 * 0.5 - 3.0).collect();
        let s = StateVector::unpack(&g, &flat).unwrap();
        assert_eq!(s.pack(), flat);
        assert_eq!(s.lam_t[0], flat[64]);
        assert!(StateVector::unpack(&g, &flat[1..]).is_err());
    }
}
