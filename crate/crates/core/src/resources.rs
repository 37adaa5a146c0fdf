//! CNOT-count upper bounds for compiling the Hamiltonian-simulation stage
//! onto two-qubit gates, as pure calculators attached to run manifests.
//!
//! The generic bound treats the controlled evolution as an unstructured
//! unitary; the local bound exploits the block structure of the one-step
//! operator (each lattice site couples only to its neighborhood), trading
//! qubits for a count linear in the number of sites.

/// Per-site compilation cost assumed for the local bound. The optimistic
/// default is `4^4`; the pessimistic variant `4^(Q ceil(log2 Q))` can be
/// passed explicitly.
pub const DEFAULT_Q_TILDE: u128 = 256;

/// Pessimistic per-site cost `4^(q * ceil(log2 q))`.
pub fn pessimistic_q_tilde(q: usize) -> u128 {
    4u128.pow((q * ceil_log2(q)) as u32)
}

fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1);
    n.next_power_of_two().trailing_zeros() as usize
}

/// CNOT-count bounds for one run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceEstimate {
    /// `16 n_c L^2 Q^2 N_t^2` — unstructured compilation.
    pub generic_bound: u128,
    /// `16 n_c L q_tilde n_tilde^2` with `n_tilde = 2^(ceil(log2(N_t+1)))`.
    pub local_bound: u128,
    /// Per-site cost assumed by the local bound.
    pub q_tilde: u128,
    /// Cost of re-preparing the initial state per lattice site,
    /// `4^(ceil(log2 Q))`.
    pub reinit_bound: u128,
}

/// Evaluate both bounds. `l_sites` is the number of lattice sites, `q`
/// the number of velocity components, `n_steps` the number of evolved
/// time steps.
pub fn cnot_bounds(
    n_clock: usize,
    l_sites: usize,
    q: usize,
    n_steps: usize,
    q_tilde: Option<u128>,
) -> ResourceEstimate {
    assert!(n_clock >= 1 && l_sites >= 1 && q >= 1 && n_steps >= 1);
    let q_tilde = q_tilde.unwrap_or(DEFAULT_Q_TILDE);
    let (n_c, l, qq, nt) = (n_clock as u128, l_sites as u128, q as u128, n_steps as u128);
    let generic_bound = 16 * n_c * l * l * qq * qq * nt * nt;
    let n_tilde = 1u128 << ceil_log2(n_steps + 1);
    let local_bound = 16 * n_c * l * q_tilde * n_tilde * n_tilde;
    ResourceEstimate {
        generic_bound,
        local_bound,
        q_tilde,
        reinit_bound: 4u128.pow(ceil_log2(q) as u32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spot_value() {
        let est = cnot_bounds(7, 16, 9, 1, None);
        assert_eq!(est.generic_bound, 2_322_432);
        assert_eq!(est.q_tilde, 256);
        // L = 16 sites, n_tilde = 2
        assert_eq!(est.local_bound, 16 * 7 * 16 * 256 * 4);
        assert_eq!(est.reinit_bound, 256);
    }

    #[test]
    fn generic_bound_quadruples_when_steps_double() {
        let a = cnot_bounds(7, 16, 9, 2, None);
        let b = cnot_bounds(7, 16, 9, 4, None);
        assert_eq!(b.generic_bound, 4 * a.generic_bound);
    }

    #[test]
    fn local_bound_is_linear_in_sites() {
        let a = cnot_bounds(7, 16, 9, 1, None);
        let b = cnot_bounds(7, 32, 9, 1, None);
        assert_eq!(b.local_bound, 2 * a.local_bound);
    }

    #[test]
    fn pessimistic_q_tilde_value() {
        // q = 9: ceil(log2 9) = 4, so 4^36
        assert_eq!(pessimistic_q_tilde(9), 4u128.pow(36));
        let est = cnot_bounds(7, 16, 9, 1, Some(pessimistic_q_tilde(9)));
        assert!(est.local_bound > est.generic_bound);
    }

    #[test]
    fn power_of_two_consistency() {
        // with N_t and Q L powers of two the generic bound factors as
        // n_c * 4^(2 + log2(N_t) + log2(Q L))
        for (l, q, nt) in [(16usize, 4usize, 2usize), (8, 8, 4), (32, 2, 8)] {
            let est = cnot_bounds(5, l, q, nt, None);
            let n_i = 2 + ceil_log2(nt) + ceil_log2(q * l);
            assert_eq!(est.generic_bound, 5 * 4u128.pow(n_i as u32));
        }
    }

    proptest! {
        #[test]
        fn bounds_are_monotone(
            n_c in 1usize..10,
            l in 1usize..64,
            q in 1usize..12,
            nt in 1usize..8,
        ) {
            let base = cnot_bounds(n_c, l, q, nt, None);
            prop_assert!(base.generic_bound > 0 && base.local_bound > 0);
            let bumps = [
                cnot_bounds(n_c + 1, l, q, nt, None),
                cnot_bounds(n_c, l + 1, q, nt, None),
                cnot_bounds(n_c, l, q + 1, nt, None),
                cnot_bounds(n_c, l, q, nt + 1, None),
            ];
            for bumped in bumps {
                prop_assert!(bumped.generic_bound >= base.generic_bound);
                prop_assert!(bumped.local_bound >= base.local_bound);
                prop_assert!(bumped.reinit_bound >= base.reinit_bound);
            }
        }
    }
}
