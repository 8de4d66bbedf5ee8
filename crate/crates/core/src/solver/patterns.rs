//! Solvency-pattern enumeration.
//!
//! A global interval pass first encloses every clearing vector in a box and
//! settles the solvency of each bank whose surplus has a definite sign on
//! it. The remaining banks are free; each assignment of solvent/default to
//! them is a pattern. Per pattern the branch equations are contracted with
//! outward-rounded interval arithmetic, a pattern-restricted iteration looks
//! for an actual solution, and branch and prune (bisection plus splitting of
//! products forced to zero) tries to refute the rest. Refutations are
//! rigorous: every clearing vector of the pattern lies in every box kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::expr::{bank_systems, BankSystem, Contraction};
use super::{PatternOutcome, PatternVerdict, SolveReport, SolvencyPattern, Status};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::network::{FinancialNetwork, RecoveryVector, DEFAULT_TOL};

pub const DEFAULT_PATTERN_CAP: usize = 16;

const NONNEG: Interval = Interval {
    lo: 0.0,
    hi: f64::INFINITY,
};
const NONPOS: Interval = Interval {
    lo: f64::NEG_INFINITY,
    hi: 0.0,
};
const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

/// Width below which branch and prune stops splitting.
const MIN_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternOptions {
    /// Maximum number of free banks (patterns are `2^free`).
    pub cap: usize,
    /// Tolerance for accepting a found vector as clearing.
    pub tol: f64,
    /// Boxes examined per pattern before giving up.
    pub box_budget: usize,
    /// Contraction sweeps per box.
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for PatternOptions {
    fn default() -> Self {
        PatternOptions {
            cap: DEFAULT_PATTERN_CAP,
            tol: DEFAULT_TOL,
            box_budget: 20_000,
            max_sweeps: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Solvent,
    Default,
}

fn significant(old: &Interval, new: &Interval) -> bool {
    if old == new {
        return false;
    }
    (new.is_point() && !old.is_point()) || old.width() - new.width() > 1e-9 * old.width().max(1e-300)
}

fn narrow(b: &mut [Interval], i: usize, to: Interval) -> bool {
    let new = b[i].intersect(&to);
    if new.is_empty() {
        return false;
    }
    b[i] = new;
    true
}

struct Problem<'a> {
    net: &'a FinancialNetwork,
    sys: Vec<BankSystem>,
    opts: PatternOptions,
}

impl<'a> Problem<'a> {
    /// Contracts one bank's constraints under `branch`. Returns `false` if
    /// the box is refuted.
    fn contract_bank(&self, i: usize, branch: Branch, b: &mut [Interval]) -> bool {
        let s = &self.sys[i];
        match branch {
            Branch::Solvent => {
                narrow(b, i, ONE) && s.surplus.contract(NONNEG, false, b) != Contraction::Empty
            }
            Branch::Default => {
                if s.surplus.contract(NONPOS, true, b) == Contraction::Empty {
                    return false;
                }
                if s.balance.contract(ZERO, false, b) == Contraction::Empty {
                    return false;
                }
                let l = s.liability.eval(b);
                if l.lo > 0.0 {
                    if let Some(q) = s.paid.eval(b).div(&l) {
                        return narrow(b, i, q);
                    }
                }
                true
            }
        }
    }

    /// Sweeps all settled banks until nothing narrows significantly.
    /// Returns `None` if the box is refuted, else whether it changed.
    fn propagate(&self, st: &[Option<Branch>], b: &mut [Interval]) -> Option<bool> {
        let mut any = false;
        for _ in 0..self.opts.max_sweeps {
            let before = b.to_vec();
            for (i, br) in st.iter().enumerate() {
                if let Some(br) = br {
                    if !self.contract_bank(i, *br, b) {
                        return None;
                    }
                }
            }
            let changed = before.iter().zip(b.iter()).any(|(o, n)| significant(o, n));
            if !changed {
                break;
            }
            any = true;
        }
        Some(any)
    }

    /// Global enclosure with solvency settled where the surplus has a
    /// definite sign. `None` means no clearing vector exists at all.
    fn global(&self) -> Option<(Vec<Option<Branch>>, Vec<Interval>)> {
        let n = self.net.len();
        let mut b = vec![Interval::UNIT; n];
        let mut st: Vec<Option<Branch>> = vec![None; n];
        for _ in 0..self.opts.max_sweeps {
            let mut changed = false;
            for i in 0..n {
                if st[i].is_some() {
                    continue;
                }
                let s = &self.sys[i];
                let surplus = s.surplus.eval(&b);
                if surplus.lo >= 0.0 {
                    st[i] = Some(Branch::Solvent);
                    changed = true;
                } else if surplus.hi < 0.0 {
                    st[i] = Some(Branch::Default);
                    changed = true;
                } else {
                    // r_i is 1 or a'_i / l_i
                    let l = s.liability.eval(&b);
                    if l.lo > 0.0 {
                        if let Some(q) = s.paid.eval(&b).div(&l) {
                            let old = b[i];
                            if !narrow(&mut b, i, Interval::new(q.lo, 1.0)) {
                                return None;
                            }
                            changed |= significant(&old, &b[i]);
                        }
                    }
                }
            }
            changed |= self.propagate(&st, &mut b)?;
            if !changed {
                break;
            }
        }
        Some((st, b))
    }

    fn branch_at(&self, st: &[Option<Branch>], i: usize) -> Branch {
        st[i].expect("all banks settled in a pattern")
    }

    /// Pattern-restricted damped iteration; a result counts only if it is
    /// clearing and takes exactly the pattern's branches.
    fn find_solution(&self, st: &[Option<Branch>], b: &[Interval], idx: usize) -> Option<RecoveryVector> {
        let n = self.net.len();
        let mut seeds: Vec<Vec<f64>> = vec![
            b.iter().map(|x| x.mid()).collect(),
            b.iter().map(|x| x.lo).collect(),
            b.iter().map(|x| x.hi).collect(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ (idx as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
        for _ in 0..3 {
            seeds.push(b.iter().map(|x| x.lo + rng.random::<f64>() * x.width()).collect());
        }
        let solvent: Vec<bool> = (0..n).map(|i| self.branch_at(st, i) == Branch::Solvent).collect();
        let pattern = SolvencyPattern { solvent };
        let mut next = vec![0.0; n];
        for mut r in seeds {
            for &(lam, steps) in &[(1.0, 500usize), (0.5, 2000)] {
                for _ in 0..steps {
                    let mut delta = 0.0f64;
                    for i in 0..n {
                        let t = match self.branch_at(st, i) {
                            Branch::Solvent => 1.0,
                            Branch::Default => {
                                let l = self.sys[i].liability.eval_point(&r);
                                if l > 0.0 {
                                    self.sys[i].paid.eval_point(&r) / l
                                } else {
                                    r[i]
                                }
                            }
                        };
                        next[i] = ((1.0 - lam) * r[i] + lam * t).clamp(0.0, 1.0);
                        delta = delta.max((next[i] - r[i]).abs());
                    }
                    r.copy_from_slice(&next);
                    if delta == 0.0 {
                        break;
                    }
                }
                let cand = RecoveryVector::clamped(r.clone());
                if self.net.is_clearing(&cand, self.opts.tol) {
                    let snap = self.net.snapshot(&cand).ok()?;
                    if pattern.matches(&snap.assets, &snap.total_liabilities) {
                        return Some(cand);
                    }
                }
            }
        }
        None
    }

    /// Branch and prune. `Ok(boxes)` if every box was refuted.
    fn refute(&self, st: &[Option<Branch>], b: Vec<Interval>) -> std::result::Result<usize, usize> {
        let mut stack = vec![b];
        let mut boxes = 0;
        while let Some(mut b) = stack.pop() {
            boxes += 1;
            if boxes > self.opts.box_budget {
                return Err(boxes);
            }
            if self.propagate(st, &mut b).is_none() {
                continue;
            }
            let split = (0..b.len())
                .filter(|&i| st[i] == Some(Branch::Default))
                .find_map(|i| self.sys[i].balance.zero_product_split(&b));
            if let Some(factors) = split {
                for f in factors {
                    let mut child = b.clone();
                    child[f.var] = if f.complement { ONE } else { ZERO };
                    stack.push(child);
                }
                continue;
            }
            let (v, w) = b
                .iter()
                .enumerate()
                .map(|(i, x)| (i, x.width()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if w < MIN_WIDTH {
                return Err(boxes);
            }
            let m = b[v].mid();
            let mut left = b.clone();
            left[v] = Interval::new(b[v].lo, m);
            let mut right = b;
            right[v] = Interval::new(m, right[v].hi);
            stack.push(right);
            stack.push(left);
        }
        Ok(boxes)
    }

    fn solve_pattern(&self, base: &[Option<Branch>], bbox: &[Interval], free: &[usize], idx: usize) -> PatternVerdict {
        let m = free.len();
        let mut st = base.to_vec();
        for (j, &i) in free.iter().enumerate() {
            let bit = (idx >> (m - 1 - j)) & 1 == 1;
            st[i] = Some(if bit { Branch::Solvent } else { Branch::Default });
        }
        let pattern = SolvencyPattern {
            solvent: st.iter().map(|s| *s == Some(Branch::Solvent)).collect(),
        };
        let mut b = bbox.to_vec();
        if self.propagate(&st, &mut b).is_none() {
            return PatternVerdict {
                pattern,
                outcome: PatternOutcome::Contradicted,
                boxes: 1,
            };
        }
        if let Some(r) = self.find_solution(&st, &b, idx) {
            return PatternVerdict {
                pattern,
                outcome: PatternOutcome::Solution(r),
                boxes: 1,
            };
        }
        match self.refute(&st, b) {
            Ok(boxes) => PatternVerdict {
                pattern,
                outcome: PatternOutcome::Contradicted,
                boxes,
            },
            Err(boxes) => PatternVerdict {
                pattern,
                outcome: PatternOutcome::Undecided,
                boxes,
            },
        }
    }
}

/// [`enumerate_patterns_with`] using default options and the given tolerance.
pub fn enumerate_patterns(net: &FinancialNetwork, tol: f64) -> Result<SolveReport> {
    enumerate_patterns_with(
        net,
        &PatternOptions {
            tol,
            ..PatternOptions::default()
        },
    )
}

/// Decides the solvency patterns of `net`. `Infeasible` is reported only if
/// every pattern is refuted; `Found` carries the solution of the
/// lexicographically smallest solved pattern (default before solvent, in
/// bank order).
pub fn enumerate_patterns_with(net: &FinancialNetwork, opts: &PatternOptions) -> Result<SolveReport> {
    if !(opts.tol >= 0.0) {
        return Err(Error::ParameterRange {
            name: "tol",
            value: opts.tol,
        });
    }
    let prob = Problem {
        net,
        sys: bank_systems(net),
        opts: *opts,
    };
    let Some((st, bbox)) = prob.global() else {
        return Ok(SolveReport {
            status: Status::Infeasible,
            r: None,
            residual: f64::INFINITY,
            iterations: 1,
            pattern_verdicts: Some(Vec::new()),
            free_banks: Some(Vec::new()),
        });
    };
    let free: Vec<usize> = (0..net.len()).filter(|&i| st[i].is_none()).collect();
    if free.len() > opts.cap {
        return Err(Error::CapExceeded {
            what: "free banks",
            got: free.len(),
            cap: opts.cap,
        });
    }
    log::debug!("{} free banks, {} patterns", free.len(), 1usize << free.len());
    let verdicts: Vec<PatternVerdict> = (0..1usize << free.len())
        .into_par_iter()
        .map(|idx| prob.solve_pattern(&st, &bbox, &free, idx))
        .collect();
    let iterations = verdicts.iter().map(|v| v.boxes).sum();
    let found = verdicts.iter().find_map(|v| match &v.outcome {
        PatternOutcome::Solution(r) => Some(r.clone()),
        _ => None,
    });
    let (status, r, residual) = match found {
        Some(r) => {
            let res = net.residual(r.as_slice());
            (Status::Found, Some(r), res)
        }
        None if verdicts.iter().all(|v| v.outcome == PatternOutcome::Contradicted) => {
            (Status::Infeasible, None, f64::INFINITY)
        }
        None => (Status::Undecided, None, f64::INFINITY),
    };
    Ok(SolveReport {
        status,
        r,
        residual,
        iterations,
        pattern_verdicts: Some(verdicts),
        free_banks: Some(free),
    })
}
