//! Shared fixtures for the benchmark targets.

use quiver_spectra::families;
use quiver_spectra::quiver::Quiver;

/// A mid-size quiver with loops and multiplicities, fixed seed.
pub fn desk_quiver() -> Quiver {
    let mut rng = families::instance_rng(31, 0);
    families::random_quiver(20, 50, 30, 10, &mut rng).expect("valid parameters")
}

/// A fixed simple graph on `n` vertices with half the possible edges.
pub fn half_dense_simple(n: u64) -> Quiver {
    let mut rng = families::instance_rng(32, 0);
    families::random_simple_graph(n, n * (n - 1) / 4, &mut rng).expect("valid parameters")
}
