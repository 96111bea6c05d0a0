// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use dsa_core::{ProtocolConfig, Scheme};

/// Feasible configuration with `T = K - 3`.
pub fn config(users: usize, input_len: usize, q: u64, scheme: Scheme) -> ProtocolConfig {
    ProtocolConfig::new(users, users - 3, input_len, q, scheme).expect("feasible benchmark configuration")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_feasible() {
        for k in 3..8 {
            assert_eq!(config(k, 1, 2, Scheme::Optimal).threshold(), k - 3);
        }
    }
}
