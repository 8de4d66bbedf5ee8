//! Per-bank balance sheets as sums of products of recovery rates, with
//! point and interval evaluation and HC4-style contraction.

use crate::interval::Interval;
use crate::network::FinancialNetwork;

/// `r_var` or `1 - r_var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Factor {
    pub var: usize,
    pub complement: bool,
}

impl Factor {
    fn value(self, b: &[Interval]) -> Interval {
        if self.complement {
            b[self.var].complement()
        } else {
            b[self.var]
        }
    }

    fn point(self, r: &[f64]) -> f64 {
        if self.complement {
            1.0 - r[self.var]
        } else {
            r[self.var]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub coef: f64,
    pub factors: Vec<Factor>,
}

impl Term {
    fn eval(&self, b: &[Interval]) -> Interval {
        self.factors
            .iter()
            .fold(Interval::point(self.coef), |acc, f| acc.mul(&f.value(b)))
    }

    fn eval_except(&self, skip: usize, b: &[Interval]) -> Interval {
        self.factors
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .fold(Interval::point(self.coef), |acc, (_, f)| acc.mul(&f.value(b)))
    }
}

/// `constant + sum of terms`.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Expr {
    pub constant: f64,
    pub terms: Vec<Term>,
}

/// Result of contracting a box against one constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Contraction {
    Empty,
    Unchanged,
    Narrowed,
}

impl Expr {
    fn push(&mut self, coef: f64, factors: Vec<Factor>) {
        if coef != 0.0 {
            self.terms.push(Term { coef, factors });
        }
    }

    pub fn eval(&self, b: &[Interval]) -> Interval {
        self.terms
            .iter()
            .fold(Interval::point(self.constant), |acc, t| acc.add(&t.eval(b)))
    }

    pub fn eval_point(&self, r: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.coef * t.factors.iter().map(|f| f.point(r)).product::<f64>())
                .sum::<f64>()
    }

    /// Narrows `b` so that the expression can still take a value in `target`.
    /// With `strict_upper`, the constraint is `expr < target.hi` and a box on
    /// which `expr >= target.hi` everywhere is refuted.
    pub fn contract(&self, target: Interval, strict_upper: bool, b: &mut [Interval]) -> Contraction {
        let vals: Vec<Interval> = self.terms.iter().map(|t| t.eval(b)).collect();
        let m = vals.len();
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(Interval::point(self.constant));
        for v in &vals {
            let last = *prefix.last().unwrap();
            prefix.push(last.add(v));
        }
        let total = prefix[m];
        if strict_upper && total.lo >= target.hi {
            return Contraction::Empty;
        }
        let tgt = total.intersect(&target);
        if tgt.is_empty() {
            return Contraction::Empty;
        }
        let mut suffix = vec![Interval::point(0.0); m + 1];
        for k in (0..m).rev() {
            suffix[k] = suffix[k + 1].add(&vals[k]);
        }
        let mut out = Contraction::Unchanged;
        for k in 0..m {
            let others = prefix[k].add(&suffix[k + 1]);
            let tv = tgt.sub(&others).intersect(&vals[k]);
            if tv.is_empty() {
                return Contraction::Empty;
            }
            if tv == vals[k] {
                continue;
            }
            let term = &self.terms[k];
            for (j, f) in term.factors.iter().enumerate() {
                let rest = term.eval_except(j, b);
                let Some(fv) = tv.div(&rest) else { continue };
                let var_val = if f.complement { fv.complement() } else { fv };
                let old = b[f.var];
                let new = old.intersect(&var_val);
                if new.is_empty() {
                    return Contraction::Empty;
                }
                if new != old {
                    b[f.var] = new;
                    out = Contraction::Narrowed;
                }
            }
        }
        out
    }

    /// A term forced to zero whose factors may vanish in more than one way,
    /// returned as the candidate factors. Only meaningful for constraints with
    /// target `[0, 0]`.
    pub fn zero_product_split(&self, b: &[Interval]) -> Option<Vec<Factor>> {
        let vals: Vec<Interval> = self.terms.iter().map(|t| t.eval(b)).collect();
        let nonneg = vals.iter().all(|v| v.lo >= 0.0);
        let nonpos = vals.iter().all(|v| v.hi <= 0.0);
        if self.constant != 0.0 || !(nonneg || nonpos) {
            return None;
        }
        for (t, v) in self.terms.iter().zip(&vals) {
            if v.is_point() || t.factors.len() < 2 {
                continue;
            }
            let zeros: Vec<Factor> = t
                .factors
                .iter()
                .copied()
                .filter(|f| {
                    let x = f.value(b);
                    x.contains_zero() && !x.is_point()
                })
                .collect();
            if zeros.len() >= 2 {
                return Some(zeros);
            }
        }
        None
    }
}

/// The balance sheet of one bank.
#[derive(Debug, Clone)]
pub(crate) struct BankSystem {
    /// Assets minus liabilities, `a_i - l_i`.
    pub surplus: Expr,
    /// `r_i l_i - a'_i`, zero in default.
    pub balance: Expr,
    pub liability: Expr,
    /// Assets after default costs, `a'_i`.
    pub paid: Expr,
}

pub(crate) fn bank_systems(net: &FinancialNetwork) -> Vec<BankSystem> {
    let n = net.len();
    let (alpha, beta) = (net.alpha(), net.beta());
    let mut sys: Vec<BankSystem> = (0..n)
        .map(|i| {
            let e = net.banks()[i].external;
            BankSystem {
                surplus: Expr { constant: e, terms: Vec::new() },
                balance: Expr { constant: -alpha * e, terms: Vec::new() },
                liability: Expr::default(),
                paid: Expr { constant: alpha * e, terms: Vec::new() },
            }
        })
        .collect();
    let r = |var| Factor { var, complement: false };
    let not = |var| Factor { var, complement: true };
    let mut debt_out = vec![0.0; n];
    for d in net.debts() {
        debt_out[d.writer] += d.notional;
        let h = &mut sys[d.holder];
        h.surplus.push(d.notional, vec![r(d.writer)]);
        h.paid.push(beta * d.notional, vec![r(d.writer)]);
        h.balance.push(-beta * d.notional, vec![r(d.writer)]);
    }
    for c in net.cds() {
        let h = &mut sys[c.holder];
        h.surplus.push(c.notional, vec![r(c.writer), not(c.reference)]);
        h.paid.push(beta * c.notional, vec![r(c.writer), not(c.reference)]);
        h.balance.push(-beta * c.notional, vec![r(c.writer), not(c.reference)]);
        let w = &mut sys[c.writer];
        w.surplus.push(-c.notional, vec![not(c.reference)]);
        w.liability.push(c.notional, vec![not(c.reference)]);
        w.balance.push(c.notional, vec![r(c.writer), not(c.reference)]);
    }
    for (i, s) in sys.iter_mut().enumerate() {
        let d = debt_out[i];
        s.surplus.constant -= d;
        s.liability.constant += d;
        s.balance.push(d, vec![r(i)]);
    }
    sys
}
