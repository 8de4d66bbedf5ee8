//! Composable network gadgets.
//!
//! [`NetworkBuilder`] owns one shared source bank `s` and one shared sink bank
//! `t`. Every gadget method wires contracts between existing banks and
//! returns its output bank, so larger constructions are plain method calls.
//! Internal banks have no external assets (the infeasibility gadget's `B`
//! and the discontinuity gadget's `v` are the exceptions) and owe the sink,
//! which keeps every bank non-degenerate.
//!
//! [`NetworkFragment`] wraps a builder with named input and output handles.
//! Inputs start as placeholder banks; [`NetworkFragment::drive`] pins one to a
//! constant and [`NetworkFragment::finalize`] turns any left open into a free
//! variable (the two-bank input gadget).
//!
//! Bank `BankId(i)` is bank `i` of the finalized network.

use std::collections::HashMap;

use crate::constants::ReductionConstants;
use crate::error::{Error, Result};
use crate::network::{Bank, Cds, Debt, FinancialNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BankId(pub usize);

impl BankId {
    pub fn index(self) -> usize {
        self.0
    }
}

pub const SOURCE: BankId = BankId(0);
pub const SINK: BankId = BankId(1);

/// Initial wealth of the infeasibility gadget's bank `B`.
pub const INFEASIBILITY_ENDOWMENT: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Source,
    Sink,
    Internal,
    Placeholder,
}

#[derive(Debug, Clone)]
struct Node {
    name: String,
    external: f64,
    role: Role,
}

/// Banks of one infeasibility gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InfeasibilityBanks {
    /// Output of the OR gadget.
    pub a: BankId,
    /// The endowed bank whose solvency cannot be settled when the input is low.
    pub b: BankId,
    /// Output of the cut-off gadget on `b`.
    pub c: BankId,
}

/// Constants used by gadget constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetParams {
    pub nand_c1: f64,
    pub nand_c2: f64,
    pub purify_phi: f64,
    pub purify_gamma: f64,
    pub purify_eta: f64,
    /// Cut-off thresholds of the OR gadget.
    pub or_low: f64,
    pub or_high: f64,
    pub infeasibility_endowment: f64,
}

impl Default for GadgetParams {
    fn default() -> Self {
        GadgetParams::from_constants(&ReductionConstants::default())
    }
}

impl GadgetParams {
    pub fn from_constants(k: &ReductionConstants) -> Self {
        GadgetParams {
            nand_c1: k.c1,
            nand_c2: k.c2,
            purify_phi: k.phi,
            purify_gamma: k.gamma,
            purify_eta: k.eta,
            or_low: 0.25,
            or_high: 0.75,
            infeasibility_endowment: INFEASIBILITY_ENDOWMENT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.nand_c1, self.nand_c2];
        if positive.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument("NAND notionals must be positive".into()));
        }
        for (name, x) in [
            ("phi", self.purify_phi),
            ("gamma", self.purify_gamma),
            ("eta", self.purify_eta),
        ] {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!("PURIFY {name} = {x} must lie in [0, 1)")));
            }
        }
        check_thresholds(self.or_low, self.or_high)?;
        Ok(())
    }
}

fn check_thresholds(k: f64, l: f64) -> Result<()> {
    if 0.0 <= k && k < l && l <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "cut-off thresholds need 0 <= K < L <= 1, got K = {k}, L = {l}"
        )))
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("inverter weight must be positive, got {w}")))
    }
}

fn check_unit(what: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} = {x} must lie in [0, 1]")))
    }
}

#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    debts: Vec<Debt>,
    debt_index: HashMap<(usize, usize), usize>,
    cds: Vec<Cds>,
    cds_index: HashMap<(usize, usize, usize), usize>,
    counters: HashMap<&'static str, usize>,
    alpha: f64,
    beta: f64,
}

impl Default for NetworkBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NetworkBuilder {
    pub fn new() -> Self {
        let mut b = NetworkBuilder {
            nodes: Vec::new(),
            debts: Vec::new(),
            debt_index: HashMap::new(),
            cds: Vec::new(),
            cds_index: HashMap::new(),
            counters: HashMap::new(),
            alpha: 1.0,
            beta: 1.0,
        };
        b.push("s", 0.0, Role::Source);
        b.push("t", 1.0, Role::Sink);
        b
    }

    pub fn set_default_costs(&mut self, alpha: f64, beta: f64) -> Result<()> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        self.alpha = alpha;
        self.beta = beta;
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, b: BankId) -> &str {
        &self.nodes[b.0].name
    }

    pub fn find(&self, name: &str) -> Option<BankId> {
        self.nodes.iter().position(|n| n.name == name).map(BankId)
    }

    fn push(&mut self, name: impl Into<String>, external: f64, role: Role) -> BankId {
        self.nodes.push(Node {
            name: name.into(),
            external,
            role,
        });
        BankId(self.nodes.len() - 1)
    }

    /// Fresh instance prefix such as `sum3`.
    fn instance(&mut self, kind: &'static str) -> String {
        let c = self.counters.entry(kind).or_insert(0);
        let name = format!("{kind}{c}");
        *c += 1;
        name
    }

    /// Adds a bank with the given name and external assets. The caller is
    /// responsible for giving it liabilities if non-degeneracy matters.
    pub fn add_bank(&mut self, name: impl Into<String>, external: f64) -> BankId {
        self.push(name, external, Role::Internal)
    }

    /// Adds an input placeholder: a bank with no contracts of its own yet.
    pub fn add_placeholder(&mut self, name: impl Into<String>) -> BankId {
        self.push(name, 0.0, Role::Placeholder)
    }

    pub fn is_placeholder(&self, b: BankId) -> bool {
        self.nodes[b.0].role == Role::Placeholder
    }

    /// Adds (or increases) a debt contract. Zero notionals are ignored.
    pub fn add_debt(&mut self, writer: BankId, holder: BankId, notional: f64) {
        if notional == 0.0 {
            return;
        }
        match self.debt_index.get(&(writer.0, holder.0)) {
            Some(&i) => self.debts[i].notional += notional,
            None => {
                self.debt_index.insert((writer.0, holder.0), self.debts.len());
                self.debts.push(Debt {
                    writer: writer.0,
                    holder: holder.0,
                    notional,
                });
            }
        }
    }

    /// Adds (or increases) a CDS. Zero notionals are ignored.
    pub fn add_cds(&mut self, writer: BankId, holder: BankId, reference: BankId, notional: f64) {
        if notional == 0.0 {
            return;
        }
        let key = (writer.0, holder.0, reference.0);
        match self.cds_index.get(&key) {
            Some(&i) => self.cds[i].notional += notional,
            None => {
                self.cds_index.insert(key, self.cds.len());
                self.cds.push(Cds {
                    writer: writer.0,
                    holder: holder.0,
                    reference: reference.0,
                    notional,
                });
            }
        }
    }

    fn unit_liability(&mut self, b: BankId) {
        self.add_debt(b, SINK, 1.0);
    }

    fn internal(&mut self, prefix: &str, local: &str) -> BankId {
        self.add_bank(format!("{prefix}.{local}"), 0.0)
    }

    /// Makes `target` an inverter output: `r_target = min(1, weight (1 - r_input))`.
    pub fn inverter_into(&mut self, target: BankId, input: BankId, weight: f64) {
        self.add_cds(SOURCE, target, input, weight);
        self.unit_liability(target);
    }

    pub fn inverter(&mut self, input: BankId, weight: f64) -> BankId {
        let p = self.instance("inv");
        let v = self.internal(&p, "v");
        self.inverter_into(v, input, weight);
        v
    }

    /// Makes `target` a constant: `r_target = zeta`.
    pub fn constant_into(&mut self, target: BankId, zeta: f64) {
        self.add_debt(SOURCE, target, zeta);
        self.unit_liability(target);
    }

    pub fn constant(&mut self, zeta: f64) -> BankId {
        let p = self.instance("const");
        let v = self.internal(&p, "v");
        self.constant_into(v, zeta);
        v
    }

    /// `r_w = [[r_u + r_v]]`.
    pub fn sum(&mut self, u: BankId, v: BankId) -> BankId {
        let p = self.instance("sum");
        let a = self.internal(&p, "A");
        let b = self.internal(&p, "B");
        let w = self.internal(&p, "w");
        self.inverter_into(a, u, 1.0);
        self.inverter_into(b, v, 1.0);
        self.add_cds(SOURCE, w, a, 1.0);
        self.add_cds(SOURCE, w, b, 1.0);
        self.unit_liability(w);
        w
    }

    /// `r_w = [[r_v - r_u]]`.
    pub fn difference(&mut self, u: BankId, v: BankId) -> BankId {
        let p = self.instance("diff");
        let a = self.internal(&p, "A");
        let b = self.internal(&p, "B");
        let w = self.internal(&p, "w");
        self.inverter_into(a, u, 1.0);
        self.add_cds(SOURCE, b, a, 1.0);
        self.add_cds(SOURCE, b, v, 1.0);
        self.unit_liability(b);
        self.inverter_into(w, b, 1.0);
        w
    }

    /// `r_w = r_u r_v / 2`.
    ///
    /// `C` is paid `1 - r_A = r_u` and owes `1 + (1 - r_v) + (1 - r_B) = 2`,
    /// so `r_C = r_u / 2`; `w` holds `C`'s CDS on `B` and receives
    /// `r_C (1 - r_B) = r_u r_v / 2`.
    pub fn half_product(&mut self, u: BankId, v: BankId) -> BankId {
        let p = self.instance("half");
        let a = self.internal(&p, "A");
        let b = self.internal(&p, "B");
        let c = self.internal(&p, "C");
        let w = self.internal(&p, "w");
        self.inverter_into(a, u, 1.0);
        self.inverter_into(b, v, 1.0);
        self.add_cds(SOURCE, c, a, 1.0);
        self.unit_liability(c);
        self.add_cds(c, SINK, v, 1.0);
        self.add_cds(c, w, b, 1.0);
        self.unit_liability(w);
        w
    }

    /// `r_w = r_u r_v` as the sum of two half products.
    pub fn product(&mut self, u: BankId, v: BankId) -> BankId {
        let h1 = self.half_product(u, v);
        let h2 = self.half_product(u, v);
        self.sum(h1, h2)
    }

    /// Two banks owing each other 1; every `r_u = r_x = t` clears.
    pub fn input_pair(&mut self) -> BankId {
        let p = self.instance("input");
        let u = self.internal(&p, "u");
        let x = self.internal(&p, "x");
        self.add_debt(u, x, 1.0);
        self.add_debt(x, u, 1.0);
        u
    }

    fn pair_into(&mut self, u: BankId) {
        let x = self.add_bank(format!("{}~x", self.nodes[u.0].name), 0.0);
        self.nodes[u.0].role = Role::Internal;
        self.add_debt(u, x, 1.0);
        self.add_debt(x, u, 1.0);
    }

    /// `r_u <= K => r_v = 0` and `r_u >= L => r_v = 1`.
    pub fn cutoff_into(&mut self, target: BankId, u: BankId, k: f64, l: f64) -> Result<()> {
        check_thresholds(k, l)?;
        let p = self.instance("cut");
        let a = self.internal(&p, "A");
        if k < 1.0 {
            self.inverter_into(a, u, 1.0 / (1.0 - k));
        }
        self.inverter_into(target, a, (1.0 - k) / (l - k));
        Ok(())
    }

    pub fn cutoff(&mut self, u: BankId, k: f64, l: f64) -> Result<BankId> {
        check_thresholds(k, l)?;
        let v = self.add_bank(format!("{}.out", self.peek_instance("cut")), 0.0);
        self.cutoff_into(v, u, k, l)?;
        Ok(v)
    }

    fn peek_instance(&self, kind: &'static str) -> String {
        format!("{kind}{}", self.counters.get(kind).copied().unwrap_or(0))
    }

    /// Low inputs (`<= 1/4`) give 0, any high input (`>= 3/4`) gives 1.
    pub fn or_gate(&mut self, u: BankId, v: BankId) -> BankId {
        let cu = self.cutoff(u, 0.25, 0.75).expect("valid thresholds");
        let cv = self.cutoff(v, 0.25, 0.75).expect("valid thresholds");
        self.sum(cu, cv)
    }

    /// Infeasibility gadget for default cost `alpha` on external assets: a
    /// clearing vector exists when `r_u >= 3/4` and none when `r_u <= 1/4`.
    /// The enclosing network must use the same `alpha` with `beta = 1`.
    pub fn infeasibility(&mut self, u: BankId, alpha: f64) -> Result<InfeasibilityBanks> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "infeasibility gadget needs alpha in [0, 1), got {alpha}"
            )));
        }
        let p = self.instance("infeas");
        let c = self.internal(&p, "C");
        let a = self.or_gate(u, c);
        let b = self.add_bank(format!("{p}.B"), INFEASIBILITY_ENDOWMENT);
        self.add_cds(SOURCE, b, a, 1.0);
        self.unit_liability(b);
        self.cutoff_into(c, b, (3.0 * alpha + 1.0) / 4.0, (alpha + 3.0) / 4.0)?;
        Ok(InfeasibilityBanks { a, b, c })
    }

    /// `r_v = 1` if `r_u = 0`, else `(alpha + 1 - r_u) / 2`.
    pub fn discontinuity(&mut self, u: BankId) -> BankId {
        let p = self.instance("disc");
        let v = self.add_bank(format!("{p}.v"), 1.0);
        self.add_cds(SOURCE, v, u, 1.0);
        self.add_debt(v, SINK, 2.0);
        v
    }

    /// Makes `target` a NAND output: `r_w = [[c1 (1 - r_u) + c2 (1 - r_v)]]`.
    /// `u` and `v` must differ from `target`.
    pub fn nand_into(&mut self, target: BankId, u: BankId, v: BankId, c1: f64, c2: f64) {
        self.add_cds(SOURCE, target, u, c1);
        self.add_cds(SOURCE, target, v, c2);
        self.unit_liability(target);
    }

    pub fn nand(&mut self, u: BankId, v: BankId, c1: f64, c2: f64) -> BankId {
        let p = self.instance("nand");
        let w = self.internal(&p, "w");
        self.nand_into(w, u, v, c1, c2);
        w
    }

    /// PURIFY outputs `v, w` from input `u` via four inverters:
    /// `A = inv_{1/(1-phi)}(u)`, `v = inv_{1/(1-gamma)}(A)`,
    /// `B = inv_{1/(1-gamma)}(u)`, `w = inv_{1/(1-eta)}(B)`.
    pub fn purify_into(&mut self, u: BankId, v: BankId, w: BankId, params: &GadgetParams) {
        let p = self.instance("purify");
        let a = self.internal(&p, "A");
        let b = self.internal(&p, "B");
        self.inverter_into(a, u, 1.0 / (1.0 - params.purify_phi));
        self.inverter_into(v, a, 1.0 / (1.0 - params.purify_gamma));
        self.inverter_into(b, u, 1.0 / (1.0 - params.purify_gamma));
        self.inverter_into(w, b, 1.0 / (1.0 - params.purify_eta));
    }

    pub fn purify(&mut self, u: BankId, params: &GadgetParams) -> (BankId, BankId) {
        let tag = self.peek_instance("purify");
        let v = self.add_bank(format!("{tag}.v"), 0.0);
        let w = self.add_bank(format!("{tag}.w"), 0.0);
        self.purify_into(u, v, w, params);
        (v, w)
    }

    /// Identity under exact clearing via two unit inverters.
    pub fn buffer(&mut self, u: BankId) -> BankId {
        let p = self.instance("buf");
        let a = self.internal(&p, "A");
        let b = self.internal(&p, "B");
        self.inverter_into(a, u, 1.0);
        self.inverter_into(b, a, 1.0);
        b
    }

    /// Finalizes into a network: open placeholders become free input pairs,
    /// the source gets a unit debt to the sink and endowment twice its
    /// written notionals.
    pub fn finalize(mut self) -> Result<FinancialNetwork> {
        let open: Vec<BankId> = (0..self.nodes.len())
            .map(BankId)
            .filter(|&b| self.is_placeholder(b))
            .collect();
        for b in open {
            self.pair_into(b);
        }
        self.add_debt(SOURCE, SINK, 1.0);
        let debts: f64 = self
            .debts
            .iter()
            .filter(|d| d.writer == SOURCE.0)
            .map(|d| d.notional)
            .sum();
        let cds: f64 = self
            .cds
            .iter()
            .filter(|c| c.writer == SOURCE.0)
            .map(|c| c.notional)
            .sum();
        let written = debts + cds;
        self.nodes[SOURCE.0].external = 2.0 * written;
        let banks = self
            .nodes
            .into_iter()
            .map(|n| Bank::new(n.name, n.external))
            .collect();
        FinancialNetwork::new(banks, self.debts, self.cds, self.alpha, self.beta)
    }
}

/// A builder with named input and output banks.
#[derive(Debug, Clone)]
pub struct NetworkFragment {
    builder: NetworkBuilder,
    inputs: Vec<(String, BankId)>,
    outputs: Vec<(String, BankId)>,
}

impl NetworkFragment {
    fn with_inputs(names: &[&str]) -> (NetworkBuilder, Vec<BankId>) {
        let mut b = NetworkBuilder::new();
        let ids = names.iter().map(|n| b.add_placeholder(*n)).collect();
        (b, ids)
    }

    fn assemble(
        builder: NetworkBuilder,
        inputs: &[(&str, BankId)],
        outputs: &[(&str, BankId)],
    ) -> Self {
        NetworkFragment {
            builder,
            inputs: inputs.iter().map(|(n, b)| (n.to_string(), *b)).collect(),
            outputs: outputs.iter().map(|(n, b)| (n.to_string(), *b)).collect(),
        }
    }

    pub fn builder(&self) -> &NetworkBuilder {
        &self.builder
    }

    pub fn input(&self, name: &str) -> Option<BankId> {
        self.inputs.iter().find(|(n, _)| n == name).map(|(_, b)| *b)
    }

    pub fn output(&self, name: &str) -> Option<BankId> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, b)| *b)
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|(n, _)| n.as_str())
    }

    pub fn inverter(weight: f64) -> Result<Self> {
        check_weight(weight)?;
        let (mut b, ins) = Self::with_inputs(&["u"]);
        let v = b.inverter(ins[0], weight);
        Ok(Self::assemble(b, &[("u", ins[0])], &[("v", v)]))
    }

    pub fn constant(zeta: f64) -> Result<Self> {
        check_unit("zeta", zeta)?;
        let mut b = NetworkBuilder::new();
        let v = b.constant(zeta);
        Ok(Self::assemble(b, &[], &[("v", v)]))
    }

    fn binary(f: impl FnOnce(&mut NetworkBuilder, BankId, BankId) -> BankId) -> Self {
        let (mut b, ins) = Self::with_inputs(&["u", "v"]);
        let w = f(&mut b, ins[0], ins[1]);
        Self::assemble(b, &[("u", ins[0]), ("v", ins[1])], &[("w", w)])
    }

    pub fn sum() -> Self {
        Self::binary(NetworkBuilder::sum)
    }

    pub fn difference() -> Self {
        Self::binary(NetworkBuilder::difference)
    }

    pub fn half_product() -> Self {
        Self::binary(NetworkBuilder::half_product)
    }

    pub fn product() -> Self {
        Self::binary(NetworkBuilder::product)
    }

    pub fn or_gate() -> Self {
        Self::binary(NetworkBuilder::or_gate)
    }

    pub fn input_pair() -> Self {
        let mut b = NetworkBuilder::new();
        let u = b.input_pair();
        Self::assemble(b, &[], &[("u", u)])
    }

    pub fn cutoff(k: f64, l: f64) -> Result<Self> {
        let (mut b, ins) = Self::with_inputs(&["u"]);
        let v = b.cutoff(ins[0], k, l)?;
        Ok(Self::assemble(b, &[("u", ins[0])], &[("v", v)]))
    }

    /// The whole fragment (and the network it finalizes to) uses `alpha`.
    pub fn infeasibility(alpha: f64) -> Result<Self> {
        let (mut b, ins) = Self::with_inputs(&["u"]);
        b.set_default_costs(alpha, 1.0)?;
        let banks = b.infeasibility(ins[0], alpha)?;
        Ok(Self::assemble(
            b,
            &[("u", ins[0])],
            &[("A", banks.a), ("B", banks.b), ("C", banks.c)],
        ))
    }

    pub fn discontinuity(alpha: f64) -> Result<Self> {
        let (mut b, ins) = Self::with_inputs(&["u"]);
        b.set_default_costs(alpha, 1.0)?;
        let v = b.discontinuity(ins[0]);
        Ok(Self::assemble(b, &[("u", ins[0])], &[("v", v)]))
    }

    pub fn nand(params: &GadgetParams) -> Self {
        let (c1, c2) = (params.nand_c1, params.nand_c2);
        Self::binary(|b, u, v| b.nand(u, v, c1, c2))
    }

    pub fn purify(params: &GadgetParams) -> Self {
        let (mut b, ins) = Self::with_inputs(&["u"]);
        let (v, w) = b.purify(ins[0], params);
        Self::assemble(b, &[("u", ins[0])], &[("v", v), ("w", w)])
    }

    /// Sets default costs on the whole fragment (the arithmetic gadgets are
    /// insensitive to `alpha` since their internal banks hold no external assets).
    pub fn with_default_costs(mut self, alpha: f64, beta: f64) -> Result<Self> {
        self.builder.set_default_costs(alpha, beta)?;
        Ok(self)
    }

    /// Pins input `name` to `value` by turning its placeholder bank into the
    /// output of a constant gadget.
    pub fn drive(mut self, name: &str, value: f64) -> Result<Self> {
        check_unit("driven value", value)?;
        let pos = self
            .inputs
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownHandle(name.to_string()))?;
        let (_, bank) = self.inputs.remove(pos);
        self.builder.nodes[bank.0].role = Role::Internal;
        self.builder.constant_into(bank, value);
        Ok(self)
    }

    pub fn finalize(&self) -> Result<FinancialNetwork> {
        self.builder.clone().finalize()
    }
}
