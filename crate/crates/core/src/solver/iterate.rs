use crate::error::{Error, Result};
use crate::network::{max_abs_diff, FinancialNetwork, RecoveryVector, Scratch};

use super::SolveReport;

/// Consecutive iterations the residual must stay within tolerance before a
/// non-exact iterate is accepted. Rules out transient dips near a
/// discontinuity of `F`, where the iteration passes close to a point it
/// cannot settle on.
const SETTLE_WINDOW: usize = 100;

/// Damped iteration `r <- (1 - damping) r + damping F(r)` from `r0`.
///
/// Stops at an exact fixed point, or once `||F(r) - r||_inf <= tol` has held
/// for [`SETTLE_WINDOW`] consecutive iterations; the result is `Found` only
/// if the final vector also passes [`FinancialNetwork::is_clearing`].
pub fn iterate_f(
    net: &FinancialNetwork,
    r0: &RecoveryVector,
    damping: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SolveReport> {
    net.check_len(r0.len())?;
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::ParameterRange {
            name: "damping",
            value: damping,
        });
    }
    if !(tol >= 0.0) {
        return Err(Error::ParameterRange { name: "tol", value: tol });
    }
    let n = net.len();
    let mut scratch = Scratch::new(n);
    let mut r = r0.as_slice().to_vec();
    let mut fr = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut settled = 0usize;
    for it in 0..=max_iter {
        net.update_into(&r, &mut scratch, &mut fr);
        let res = max_abs_diff(&fr, &r);
        best = best.min(res);
        settled = if res <= tol { settled + 1 } else { 0 };
        if res == 0.0 || settled > SETTLE_WINDOW {
            let cand = RecoveryVector::clamped(r.clone());
            if net.is_clearing(&cand, tol) {
                let res = net.residual(cand.as_slice());
                return Ok(SolveReport::found(cand, res, it));
            }
        }
        if it == max_iter {
            break;
        }
        for (x, f) in r.iter_mut().zip(&fr) {
            *x = ((1.0 - damping) * *x + damping * f).clamp(0.0, 1.0);
        }
    }
    Ok(SolveReport::not_found(best, max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::no_clearing;
    use crate::network::test_nets::input_pair;
    use crate::solver::Status;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn input_pair_from_ones() {
        let net = input_pair();
        let rep = iterate_f(&net, &RecoveryVector::ones(2), 0.5, 100, 1e-12).unwrap();
        assert_eq!(rep.status, Status::Found);
        assert_eq!(rep.r.unwrap().as_slice(), &[1.0, 1.0]);
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn no_clearing_never_found() {
        let net = no_clearing();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let v: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let rep = iterate_f(&net, &RecoveryVector::new(v).unwrap(), 0.5, 2000, 1e-9).unwrap();
            assert_eq!(rep.status, Status::NotFound, "{:?}", rep);
        }
    }

    #[test]
    fn bad_arguments() {
        let net = input_pair();
        let r = RecoveryVector::ones(2);
        assert!(iterate_f(&net, &r, 0.0, 10, 1e-9).is_err());
        assert!(iterate_f(&net, &r, 1.5, 10, 1e-9).is_err());
        assert!(iterate_f(&net, &RecoveryVector::ones(3), 0.5, 10, 1e-9).is_err());
    }
}
