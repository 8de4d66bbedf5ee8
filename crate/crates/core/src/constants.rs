//! Parameters of the NAND and PURIFY gadgets and the decoding thresholds.

use crate::circuit::DecodingParams;

/// Constants of the PURE-CIRCUIT reduction.
///
/// `gamma = 3 - sqrt(6)` maximizes `eps = gamma (1 - gamma) / (3 - gamma)`,
/// giving `eps = 5 - 2 sqrt(6)`. The decoding interval near 1 has width
/// `delta = eps`, NAND notionals are `1 / (1 - gamma)`, and PURIFY uses
/// `phi = 7/10` with `eta = (1 - phi) / (1 - gamma) + eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConstants {
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub phi: f64,
    pub eta: f64,
}

impl Default for ReductionConstants {
    fn default() -> Self {
        let sqrt6 = 6f64.sqrt();
        let gamma = 3.0 - sqrt6;
        let eps = 5.0 - 2.0 * sqrt6;
        let phi = 0.7;
        ReductionConstants {
            eps,
            gamma,
            delta: eps,
            c1: 1.0 / (1.0 - gamma),
            c2: 1.0 / (1.0 - gamma),
            phi,
            eta: (1.0 - phi) / (1.0 - gamma) + eps,
        }
    }
}

impl ReductionConstants {
    pub fn decoding(&self) -> DecodingParams {
        DecodingParams {
            gamma: self.gamma,
            delta: self.delta,
        }
    }

    /// `13 eps / 3`, the bound on `r_A` inside PURIFY when `r_u >= 1 - delta`.
    pub fn purify_a_bound(&self) -> f64 {
        self.eps / (1.0 - self.phi) + self.eps
    }

    /// Bound on `r_w` inside PURIFY when `r_u <= gamma`.
    pub fn purify_w_bound(&self) -> f64 {
        self.eps / (1.0 - self.eta) + self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_consistency() {
        let k = ReductionConstants::default();
        let g = k.gamma;
        assert!((k.eps - g * (1.0 - g) / (3.0 - g)).abs() <= 1e-12);
        assert_eq!(k.delta, k.eps);
        // NAND requirements hold with equality at the optimum
        assert!(((1.0 - g) * k.c1 - k.eps - (1.0 - k.delta)).abs() <= 1e-12);
        assert!((k.delta * k.c1 + k.delta * k.c2 + k.eps - g).abs() <= 1e-12);
        assert!(g + k.delta < 1.0);
        assert!((g + k.delta - 0.652).abs() <= 1e-3);
        assert!((k.eta - 0.7684).abs() < 1e-4);
    }

    #[test]
    fn purify_bounds_below_gamma() {
        let k = ReductionConstants::default();
        assert!((k.purify_a_bound() - 13.0 * k.eps / 3.0).abs() < 1e-12);
        assert!(k.purify_a_bound() <= k.gamma);
        assert!(k.purify_w_bound() <= k.gamma);
        // r_v bound when r_u <= phi: eps/(1-gamma) + eps = gamma (2-gamma)/(3-gamma)
        let v = k.eps / (1.0 - k.gamma) + k.eps;
        assert!((v - k.gamma * (2.0 - k.gamma) / (3.0 - k.gamma)).abs() < 1e-12);
        assert!(v <= k.gamma);
    }
}
