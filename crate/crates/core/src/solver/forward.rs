use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::network::{FinancialNetwork, RecoveryVector};

/// Contracts touching one bank, in network declaration order.
struct Ledger {
    /// `(writer, notional)` for debts held.
    debts_held: Vec<(usize, f64)>,
    /// `(writer, reference, notional)` for CDSs held.
    cds_held: Vec<(usize, usize, f64)>,
    debts_written: Vec<f64>,
    /// `(reference, notional)` for CDSs written.
    cds_written: Vec<(usize, f64)>,
}

fn ledgers(net: &FinancialNetwork) -> Vec<Ledger> {
    let mut out: Vec<Ledger> = (0..net.len())
        .map(|_| Ledger {
            debts_held: Vec::new(),
            cds_held: Vec::new(),
            debts_written: Vec::new(),
            cds_written: Vec::new(),
        })
        .collect();
    for d in net.debts() {
        out[d.holder].debts_held.push((d.writer, d.notional));
        out[d.writer].debts_written.push(d.notional);
    }
    for c in net.cds() {
        out[c.holder].cds_held.push((c.writer, c.reference, c.notional));
        out[c.writer].cds_written.push((c.reference, c.notional));
    }
    out
}

impl Ledger {
    fn dependencies(&self) -> impl Iterator<Item = usize> + '_ {
        self.debts_held
            .iter()
            .map(|d| d.0)
            .chain(self.cds_held.iter().flat_map(|c| [c.0, c.1]))
            .chain(self.cds_written.iter().map(|c| c.0))
    }

    /// `F_i(r)`, summing in the same order as the network evaluator so the
    /// branch comparison is bit-identical.
    fn update(&self, external: f64, alpha: f64, beta: f64, r: &[f64]) -> f64 {
        let mut liab = 0.0;
        let mut incoming = 0.0;
        for &c in &self.debts_written {
            liab += c;
        }
        for &(w, c) in &self.debts_held {
            incoming += r[w] * c;
        }
        for &(k, c) in &self.cds_written {
            liab += (1.0 - r[k]) * c;
        }
        for &(w, k, c) in &self.cds_held {
            incoming += r[w] * ((1.0 - r[k]) * c);
        }
        if external + incoming >= liab {
            1.0
        } else {
            (alpha * external + beta * incoming) / liab
        }
    }
}

/// Evaluates the unique recovery vector of a feed-forward network given
/// pinned values for `driven` banks (by index). Banks whose external assets
/// cover their worst-case liabilities are fixed at 1. Every other bank must
/// depend only on earlier banks; otherwise `CyclicDependency` lists the
/// banks left on cycles.
pub fn forward_eval(net: &FinancialNetwork, driven: &HashMap<usize, f64>) -> Result<RecoveryVector> {
    let n = net.len();
    let mut r = vec![0.0; n];
    let mut fixed = net.always_solvent();
    for (i, f) in fixed.iter().enumerate() {
        if *f {
            r[i] = 1.0;
        }
    }
    for (&i, &x) in driven {
        if i >= n {
            return Err(Error::UnknownBank(format!("index {i}")));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::RecoveryRange { index: i, value: x });
        }
        r[i] = x;
        fixed[i] = true;
    }
    let led = ledgers(net);
    let mut pending = vec![0usize; n];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in (0..n).filter(|&i| !fixed[i]) {
        let mut deps: Vec<usize> = led[i].dependencies().filter(|&d| d != i && !fixed[d]).collect();
        deps.sort_unstable();
        deps.dedup();
        pending[i] = deps.len();
        for d in deps {
            users[d].push(i);
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| !fixed[i] && pending[i] == 0).collect();
    let mut done = 0;
    let (alpha, beta) = (net.alpha(), net.beta());
    while let Some(i) = queue.pop_front() {
        r[i] = led[i].update(net.banks()[i].external, alpha, beta, &r);
        done += 1;
        for &u in &users[i] {
            pending[u] -= 1;
            if pending[u] == 0 {
                queue.push_back(u);
            }
        }
    }
    let open = fixed.iter().filter(|f| !**f).count();
    if done < open {
        let cyc = (0..n)
            .filter(|&i| !fixed[i] && pending[i] > 0)
            .map(|i| net.bank_id(i).to_string())
            .collect();
        return Err(Error::CyclicDependency(cyc));
    }
    RecoveryVector::new(r)
}
