//! Financial networks of debt contracts and credit default swaps.
//!
//! A network is a list of banks with external assets, unconditional debt
//! contracts `c[i][j]` and CDSs `c[i][j]^k` written by `i`, held by `j` and
//! referencing `k`. Given a recovery-rate vector `r`, the liability of a CDS is
//! `(1 - r_k) * c`, each writer pays `r_i` times its liabilities, and the
//! update map `F` decides solvency per bank by comparing assets against
//! liabilities. Clearing vectors are the fixed points of `F`.

use std::collections::{BTreeMap, HashMap};
use std::ops::Index;

use crate::error::{Error, Result};

/// Default tolerance for comparing recovery rates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Liabilities below this value are flagged when used as a divisor.
const TINY_LIABILITY: f64 = 1e-12;

/// Truncation of `x` to `[0, 1]`.
#[inline]
pub fn truncate(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn truncate_all(xs: &[f64]) -> Vec<f64> {
    xs.iter().copied().map(truncate).collect()
}

/// `max_i |a_i - b_i|`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bank {
    pub id: String,
    pub external: f64,
}

impl Bank {
    pub fn new(id: impl Into<String>, external: f64) -> Self {
        Bank {
            id: id.into(),
            external,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Debt {
    pub writer: usize,
    pub holder: usize,
    pub notional: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cds {
    pub writer: usize,
    pub holder: usize,
    pub reference: usize,
    pub notional: f64,
}

/// An immutable, validated financial network.
#[derive(Debug, Clone, PartialEq)]
pub struct FinancialNetwork {
    banks: Vec<Bank>,
    index: HashMap<String, usize>,
    debts: Vec<Debt>,
    cds: Vec<Cds>,
    alpha: f64,
    beta: f64,
}

fn check_amount(field: impl FnOnce() -> String, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeAmount {
            field: field(),
            value,
        })
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterRange { name, value })
    }
}

impl FinancialNetwork {
    /// Validates and builds a network. Contract endpoints are bank indices
    /// into `banks`.
    pub fn new(
        banks: Vec<Bank>,
        debts: Vec<Debt>,
        cds: Vec<Cds>,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        let mut index = HashMap::with_capacity(banks.len());
        for (i, b) in banks.iter().enumerate() {
            check_amount(|| format!("external assets of `{}`", b.id), b.external)?;
            if index.insert(b.id.clone(), i).is_some() {
                return Err(Error::DuplicateBank(b.id.clone()));
            }
        }
        let n = banks.len();
        let name = |i: usize| -> Result<&str> {
            banks
                .get(i)
                .map(|b| b.id.as_str())
                .ok_or_else(|| Error::UnknownBank(format!("#{i}")))
        };

        let mut seen_debt = HashMap::new();
        for d in &debts {
            let (w, h) = (name(d.writer)?, name(d.holder)?);
            check_amount(|| format!("debt {w} -> {h}"), d.notional)?;
            if d.writer == d.holder {
                return Err(Error::SelfDebt(w.to_string()));
            }
            if seen_debt.insert((d.writer, d.holder), ()).is_some() {
                return Err(Error::DuplicateContract {
                    kind: "debt",
                    key: format!("{w} -> {h}"),
                });
            }
        }
        let mut seen_cds = HashMap::new();
        for c in &cds {
            let (w, h, k) = (name(c.writer)?, name(c.holder)?, name(c.reference)?);
            check_amount(|| format!("CDS {w} -> {h} on {k}"), c.notional)?;
            if c.writer == c.holder || c.writer == c.reference || c.holder == c.reference {
                return Err(Error::CdsRoleConflict {
                    writer: w.to_string(),
                    holder: h.to_string(),
                    reference: k.to_string(),
                });
            }
            if seen_cds
                .insert((c.writer, c.holder, c.reference), ())
                .is_some()
            {
                return Err(Error::DuplicateContract {
                    kind: "CDS",
                    key: format!("{w} -> {h} on {k}"),
                });
            }
        }
        debug_assert_eq!(index.len(), n);
        Ok(FinancialNetwork {
            banks,
            index,
            debts,
            cds,
            alpha,
            beta,
        })
    }

    pub fn len(&self) -> usize {
        self.banks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.banks.is_empty()
    }

    pub fn banks(&self) -> &[Bank] {
        &self.banks
    }

    pub fn debts(&self) -> &[Debt] {
        &self.debts
    }

    pub fn cds(&self) -> &[Cds] {
        &self.cds
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn bank_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn bank_id(&self, i: usize) -> &str {
        &self.banks[i].id
    }

    /// Same contracts, different default-cost parameters.
    pub fn with_default_costs(&self, alpha: f64, beta: f64) -> Result<Self> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        Ok(FinancialNetwork {
            alpha,
            beta,
            ..self.clone()
        })
    }

    pub fn has_default_costs(&self) -> bool {
        self.alpha < 1.0 || self.beta < 1.0
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            })
        }
    }

    /// Total liability of bank `i` when every reference bank has recovery 0.
    pub fn max_liability(&self, i: usize) -> f64 {
        let d: f64 = self
            .debts
            .iter()
            .filter(|d| d.writer == i)
            .map(|d| d.notional)
            .sum();
        let c: f64 = self
            .cds
            .iter()
            .filter(|c| c.writer == i)
            .map(|c| c.notional)
            .sum();
        d + c
    }

    /// Banks whose external assets cover their worst-case liabilities; their
    /// recovery rate is 1 at every clearing vector and in every `F(r)`.
    pub fn always_solvent(&self) -> Vec<bool> {
        let mut worst = vec![0.0; self.len()];
        for d in &self.debts {
            worst[d.writer] += d.notional;
        }
        for c in &self.cds {
            worst[c.writer] += c.notional;
        }
        self.banks
            .iter()
            .zip(worst)
            .map(|(b, w)| b.external >= w)
            .collect()
    }

    /// Non-degenerate: every bank has positive external assets
    /// or writes a positive unconditional debt. CDS liabilities do not count.
    pub fn is_nondegenerate(&self) -> bool {
        self.first_degenerate_bank().is_none()
    }

    pub fn first_degenerate_bank(&self) -> Option<usize> {
        let mut writes_debt = vec![false; self.len()];
        for d in &self.debts {
            if d.notional > 0.0 {
                writes_debt[d.writer] = true;
            }
        }
        (0..self.len()).find(|&i| !(self.banks[i].external > 0.0 || writes_debt[i]))
    }

    /// Writes total liabilities `l_i(r)` and incoming payments `sum_j p_{j,i}(r)`.
    /// `r` is not required to lie in `[0, 1]`.
    pub(crate) fn eval_into(&self, r: &[f64], liab: &mut [f64], incoming: &mut [f64]) {
        liab.fill(0.0);
        incoming.fill(0.0);
        for d in &self.debts {
            liab[d.writer] += d.notional;
            incoming[d.holder] += r[d.writer] * d.notional;
        }
        for c in &self.cds {
            let l = (1.0 - r[c.reference]) * c.notional;
            liab[c.writer] += l;
            incoming[c.holder] += r[c.writer] * l;
        }
    }

    fn assets(&self, i: usize, incoming: f64) -> f64 {
        self.banks[i].external + incoming
    }

    fn assets_after_costs(&self, i: usize, incoming: f64) -> f64 {
        self.alpha * self.banks[i].external + self.beta * incoming
    }

    pub fn snapshot(&self, r: &RecoveryVector) -> Result<LiabilitySnapshot> {
        self.check_len(r.len())?;
        let r = r.as_slice();
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for d in &self.debts {
            *pairs.entry((d.writer, d.holder)).or_default() += d.notional;
        }
        for c in &self.cds {
            *pairs.entry((c.writer, c.holder)).or_default() += (1.0 - r[c.reference]) * c.notional;
        }
        let n = self.len();
        let mut totals = vec![0.0; n];
        let mut incoming = vec![0.0; n];
        self.eval_into(r, &mut totals, &mut incoming);
        let assets = (0..n).map(|i| self.assets(i, incoming[i])).collect();
        let assets_after_costs = (0..n)
            .map(|i| self.assets_after_costs(i, incoming[i]))
            .collect();
        Ok(LiabilitySnapshot {
            pair_liabilities: pairs,
            total_liabilities: totals,
            incoming,
            assets,
            assets_after_costs,
        })
    }

    /// Update map `F` on raw slices. Assumes `r.len() == self.len()`.
    pub(crate) fn update_into(&self, r: &[f64], scratch: &mut Scratch, out: &mut [f64]) {
        self.eval_into(r, &mut scratch.liab, &mut scratch.incoming);
        for i in 0..self.len() {
            let l = scratch.liab[i];
            let a = self.assets(i, scratch.incoming[i]);
            out[i] = if a >= l {
                1.0
            } else {
                if l < TINY_LIABILITY {
                    log::warn!(
                        "bank `{}` defaults with tiny liability {l:e}",
                        self.banks[i].id
                    );
                }
                self.assets_after_costs(i, scratch.incoming[i]) / l
            };
        }
    }

    /// The update map `F`: 1 when assets cover liabilities, otherwise assets
    /// after default costs over liabilities.
    pub fn update_f(&self, r: &RecoveryVector) -> Result<RecoveryVector> {
        self.check_len(r.len())?;
        let mut scratch = Scratch::new(self.len());
        let mut out = vec![0.0; self.len()];
        self.update_into(r.as_slice(), &mut scratch, &mut out);
        Ok(RecoveryVector(out))
    }

    /// `max_i |F(r)_i - r_i|`.
    pub fn residual(&self, r: &[f64]) -> f64 {
        let mut scratch = Scratch::new(self.len());
        let mut out = vec![0.0; self.len()];
        self.update_into(r, &mut scratch, &mut out);
        max_abs_diff(&out, r)
    }

    /// Continuous map `f(r)_i = a_i / max(a_i, l_i)`.
    pub fn map_f(&self, r: &RecoveryVector) -> Result<RecoveryVector> {
        self.check_len(r.len())?;
        let n = self.len();
        let mut liab = vec![0.0; n];
        let mut incoming = vec![0.0; n];
        self.eval_into(r.as_slice(), &mut liab, &mut incoming);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.assets(i, incoming[i]);
            let m = a.max(liab[i]);
            if m <= 0.0 {
                return Err(Error::DegenerateNetwork(self.banks[i].id.clone()));
            }
            out.push(a / m);
        }
        Ok(RecoveryVector(out))
    }

    /// Exact clearing up to `tol`: `||F(r) - r||_inf <= tol`.
    pub fn is_clearing(&self, r: &RecoveryVector, tol: f64) -> bool {
        r.len() == self.len() && self.residual(r.as_slice()) <= tol
    }

    /// Returns a description of the first violated condition of
    /// epsilon-approximate clearing, or `None` if `r` qualifies.
    pub fn eps_approx_violation(&self, r: &RecoveryVector, eps: f64) -> Result<Option<String>> {
        if self.has_default_costs() {
            return Err(Error::DefaultCostsPresent {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        if let Some(i) = self.first_degenerate_bank() {
            return Err(Error::DegenerateNetwork(self.banks[i].id.clone()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        self.check_len(r.len())?;
        let f = self.map_f(r)?;
        let n = self.len();
        let mut liab = vec![0.0; n];
        let mut incoming = vec![0.0; n];
        self.eval_into(r.as_slice(), &mut liab, &mut incoming);
        for i in 0..n {
            let gap = (f[i] - r[i]).abs();
            if gap > eps {
                return Ok(Some(format!(
                    "|f(r) - r| = {gap} > {eps} at bank `{}`",
                    self.banks[i].id
                )));
            }
            let a = self.assets(i, incoming[i]);
            if a >= (1.0 + eps) * liab[i] && r[i] != 1.0 {
                return Ok(Some(format!(
                    "bank `{}` has assets {a} >= (1 + eps) * {} but recovery {}",
                    self.banks[i].id, liab[i], r[i]
                )));
            }
        }
        Ok(None)
    }

    /// Epsilon-approximate clearing: `||f(r) - r||_inf <= eps` and every bank
    /// with `a_i >= (1 + eps) l_i` has recovery exactly 1.
    pub fn is_eps_approx_clearing(&self, r: &RecoveryVector, eps: f64) -> Result<bool> {
        Ok(self.eps_approx_violation(r, eps)?.is_none())
    }
}

/// Reusable buffers for repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    pub liab: Vec<f64>,
    pub incoming: Vec<f64>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            liab: vec![0.0; n],
            incoming: vec![0.0; n],
        }
    }
}

/// Per-bank recovery rates in `[0, 1]`, in bank declaration order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct RecoveryVector(Vec<f64>);

impl RecoveryVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RecoveryRange { index, value });
            }
        }
        Ok(RecoveryVector(values))
    }

    /// Truncates every component into `[0, 1]`. NaN becomes 0.
    pub fn clamped(values: Vec<f64>) -> Self {
        RecoveryVector(
            values
                .into_iter()
                .map(|x| if x.is_nan() { 0.0 } else { truncate(x) })
                .collect(),
        )
    }

    pub fn ones(n: usize) -> Self {
        RecoveryVector(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for RecoveryVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Liabilities and assets of every bank at one recovery vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LiabilitySnapshot {
    /// `l_{i,j}(r)` keyed by `(writer, holder)`.
    pub pair_liabilities: BTreeMap<(usize, usize), f64>,
    /// `l_i(r)`.
    pub total_liabilities: Vec<f64>,
    /// `sum_j p_{j,i}(r)`.
    pub incoming: Vec<f64>,
    /// `a_i(r)`.
    pub assets: Vec<f64>,
    /// `a'_i(r)`.
    pub assets_after_costs: Vec<f64>,
}

impl LiabilitySnapshot {
    pub fn pair(&self, writer: usize, holder: usize) -> f64 {
        self.pair_liabilities
            .get(&(writer, holder))
            .copied()
            .unwrap_or(0.0)
    }
}
