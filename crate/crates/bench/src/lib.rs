//! Fixtures shared by the benchmarks.

use ibvp_core::{precondition, Discretization, SbpOrder, Setup, StateVector};

/// Default packet on an `n_tau × n_sigma` grid.
pub fn setup(order: SbpOrder, n_tau: usize, n_sigma: usize) -> Setup {
    let mut s = Setup::default().with_grid(n_tau, n_sigma);
    s.order = order;
    s
}

/// Discretization and preconditioned starting point.
pub fn fixture(order: SbpOrder, n_tau: usize, n_sigma: usize) -> (Discretization, StateVector) {
    let (spec, x0) = precondition(&setup(order, n_tau, n_sigma)).expect("valid setup");
    (Discretization::new(&spec).expect("valid problem"), x0)
}
