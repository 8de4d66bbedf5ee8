use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{max_abs_diff, truncate, truncate_all, FinancialNetwork, RecoveryVector, Scratch};

use super::SolveReport;

/// Damping values tried in turn by the restart search.
const DAMPING_SCHEDULE: [f64; 6] = [0.5, 0.25, 0.1, 0.05, 0.02, 0.01];
const FD_STEP: f64 = 1e-7;
const LM_MAX_STEPS: usize = 200;

/// Search budget for [`solve_eps_approx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproxBudget {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ApproxBudget {
    fn default() -> Self {
        ApproxBudget {
            restarts: 64,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

fn check_plain(net: &FinancialNetwork, eps: f64) -> Result<()> {
    if net.has_default_costs() {
        return Err(Error::DefaultCostsPresent {
            alpha: net.alpha(),
            beta: net.beta(),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::ParameterRange { name: "eps", value: eps });
    }
    Ok(())
}

struct GEval<'a> {
    net: &'a FinancialNetwork,
    eps: f64,
    scratch: Scratch,
    tr: Vec<f64>,
}

impl<'a> GEval<'a> {
    fn new(net: &'a FinancialNetwork, eps: f64) -> Self {
        GEval {
            net,
            eps,
            scratch: Scratch::new(net.len()),
            tr: vec![0.0; net.len()],
        }
    }

    fn prepare(&mut self, r: &[f64]) {
        for (t, x) in self.tr.iter_mut().zip(r) {
            *t = truncate(*x);
        }
        self.net
            .eval_into(&self.tr, &mut self.scratch.liab, &mut self.scratch.incoming);
    }

    fn assets(&self, i: usize) -> f64 {
        self.net.banks()[i].external + self.scratch.incoming[i]
    }

    fn small_g(&mut self, r: &[f64], out: &mut [f64]) -> Result<()> {
        self.prepare(r);
        for i in 0..out.len() {
            let a = self.assets(i);
            let m = (a / (1.0 + self.eps)).max(self.scratch.liab[i]);
            if m <= 0.0 {
                return Err(Error::DegenerateNetwork(self.net.bank_id(i).to_string()));
            }
            out[i] = a / m;
        }
        Ok(())
    }

    fn big_g(&mut self, r: &[f64], out: &mut [f64]) {
        self.prepare(r);
        for i in 0..out.len() {
            let a = self.assets(i);
            let l = self.scratch.liab[i];
            out[i] = if a >= (1.0 + self.eps) * l { 1.0 + self.eps } else { a / l };
        }
    }
}

fn check_input(net: &FinancialNetwork, r: &[f64]) -> Result<()> {
    net.check_len(r.len())?;
    match r.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::RecoveryRange { index, value: r[index] }),
        None => Ok(()),
    }
}

/// `G(r)_i = 1 + eps` when `a_i >= (1 + eps) l_i`, else `a_i / l_i`, with
/// assets and liabilities taken at the truncation of `r` to `[0, 1]`.
pub fn map_big_g(net: &FinancialNetwork, r: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_plain(net, eps)?;
    check_input(net, r)?;
    let mut ev = GEval::new(net, eps);
    let mut out = vec![0.0; net.len()];
    ev.big_g(r, &mut out);
    Ok(out)
}

/// `g(r)_i = a_i / max(a_i / (1 + eps), l_i)` at the truncation of `r`.
pub fn map_g(net: &FinancialNetwork, r: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_plain(net, eps)?;
    check_input(net, r)?;
    let mut ev = GEval::new(net, eps);
    let mut out = vec![0.0; net.len()];
    ev.small_g(r, &mut out)?;
    Ok(out)
}

struct Restart {
    hit: Option<Vec<f64>>,
    best: f64,
    iterations: usize,
}

fn start_point(k: usize, n: usize, seed: u64) -> Vec<f64> {
    match k {
        0 => vec![1.0; n],
        1 => vec![0.0; n],
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k as u64);
            (0..n).map(|_| rng.random::<f64>()).collect()
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One restart: damped iteration over the schedule, then Levenberg-Marquardt
/// steps on `g(r) - r` from the best point seen.
fn run_restart(
    net: &FinancialNetwork,
    eps: f64,
    budget: &ApproxBudget,
    k: usize,
    accept: &(dyn Fn(&[f64]) -> bool + Sync),
) -> Result<Restart> {
    let n = net.len();
    let hi = 1.0 + eps;
    let mut ev = GEval::new(net, eps);
    let mut r = start_point(k, n, budget.seed);
    let mut g = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut best_r = r.clone();
    let mut iterations = 0;
    let per_stage = (budget.max_iter / DAMPING_SCHEDULE.len()).max(1);
    for &lam in &DAMPING_SCHEDULE {
        for _ in 0..per_stage {
            ev.small_g(&r, &mut g)?;
            iterations += 1;
            let res = max_abs_diff(&g, &r);
            if res < best {
                best = res;
                best_r.copy_from_slice(&r);
            }
            if res <= eps && accept(&r) {
                return Ok(Restart { hit: Some(r), best: res, iterations });
            }
            if res == 0.0 {
                break;
            }
            for (x, gx) in r.iter_mut().zip(&g) {
                *x = ((1.0 - lam) * *x + lam * gx).clamp(0.0, hi);
            }
        }
    }

    // Levenberg-Marquardt on h(r) = g(r) - r.
    let mut r = best_r;
    let h_of = |ev: &mut GEval, x: &[f64], out: &mut Vec<f64>| -> Result<()> {
        ev.small_g(x, out)?;
        for (o, xi) in out.iter_mut().zip(x) {
            *o -= xi;
        }
        Ok(())
    };
    let mut h = vec![0.0; n];
    h_of(&mut ev, &r, &mut h)?;
    let mut mu = 1e-3;
    let mut probe = vec![0.0; n];
    let mut hp = vec![0.0; n];
    for _ in 0..LM_MAX_STEPS {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            probe.copy_from_slice(&r);
            let step = if r[j] + FD_STEP <= hi { FD_STEP } else { -FD_STEP };
            probe[j] += step;
            h_of(&mut ev, &probe, &mut hp)?;
            iterations += 1;
            for i in 0..n {
                jac[(i, j)] = (hp[i] - h[i]) / step;
            }
        }
        let hv = DVector::from_column_slice(&h);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = -(&jt * &hv);
        let cur = norm2(&h);
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let d = chol.solve(&rhs);
            for i in 0..n {
                probe[i] = (r[i] + d[i]).clamp(0.0, hi);
            }
            h_of(&mut ev, &probe, &mut hp)?;
            iterations += 1;
            if norm2(&hp) < cur {
                r.copy_from_slice(&probe);
                h.copy_from_slice(&hp);
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        let res = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        best = best.min(res);
        if res <= eps && accept(&r) {
            return Ok(Restart { hit: Some(r), best: res, iterations });
        }
        if !improved || iterations >= budget.max_iter.saturating_mul(2) {
            break;
        }
    }
    Ok(Restart { hit: None, best, iterations })
}

fn search(
    net: &FinancialNetwork,
    eps: f64,
    budget: &ApproxBudget,
    accept: &(dyn Fn(&[f64]) -> bool + Sync),
) -> Result<(Option<Vec<f64>>, f64, usize)> {
    if net.is_empty() {
        return Ok((Some(Vec::new()), 0.0, 0));
    }
    let batch = rayon::current_num_threads().max(1);
    let mut best = f64::INFINITY;
    let mut iterations = 0;
    let mut k0 = 0;
    while k0 < budget.restarts {
        let k1 = (k0 + batch).min(budget.restarts);
        let outcomes: Vec<Result<Restart>> = (k0..k1)
            .into_par_iter()
            .map(|k| run_restart(net, eps, budget, k, accept))
            .collect();
        for o in outcomes {
            let o = o?;
            iterations += o.iterations;
            best = best.min(o.best);
            if o.hit.is_some() {
                return Ok((o.hit, o.best, iterations));
            }
        }
        k0 = k1;
    }
    Ok((None, best, iterations))
}

/// Searches for `r` in `[0, 1 + eps]^n` with `||g(r) - r||_inf <= eps`
/// without any further check of the result.
pub fn find_g_almost_fixed_point(
    net: &FinancialNetwork,
    eps: f64,
    budget: &ApproxBudget,
) -> Result<Option<Vec<f64>>> {
    check_plain(net, eps)?;
    Ok(search(net, eps, budget, &|_| true)?.0)
}

/// Restart search for an almost fixed point of `g`, returning its truncation
/// when that passes [`FinancialNetwork::is_eps_approx_clearing`].
pub fn solve_eps_approx(net: &FinancialNetwork, eps: f64, budget: &ApproxBudget) -> Result<SolveReport> {
    check_plain(net, eps)?;
    if let Some(i) = net.first_degenerate_bank() {
        return Err(Error::DegenerateNetwork(net.bank_id(i).to_string()));
    }
    let accept = |r: &[f64]| {
        let t = RecoveryVector::clamped(truncate_all(r));
        matches!(net.is_eps_approx_clearing(&t, eps), Ok(true))
    };
    let (hit, best, iterations) = search(net, eps, budget, &accept)?;
    match hit {
        Some(r) => {
            let t = RecoveryVector::clamped(truncate_all(&r));
            let f = net.map_f(&t)?;
            let res = max_abs_diff(f.as_slice(), t.as_slice());
            Ok(SolveReport::found(t, res, iterations))
        }
        None => Ok(SolveReport::not_found(best, iterations)),
    }
}
