//! Compilers from PURE-CIRCUIT instances and polynomials to networks.

use crate::circuit::{dec, DecodingParams, Gate, GateKind, PureCircuit, TriValue};
use crate::constants::ReductionConstants;
use crate::error::{Error, Result};
use crate::gadgets::{BankId, GadgetParams, NetworkBuilder};
use crate::network::{FinancialNetwork, RecoveryVector};
use crate::poly::{split_poly, SparsePolynomial, MAX_DEGREE};

/// A compiled network plus the banks that carry named values.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledArtifact {
    pub network: FinancialNetwork,
    /// Named role (circuit wire, `x0`, `o`, `b`, ...) to bank index. Circuit
    /// wire `w` lives in bank `wire.w`.
    pub wire_map: Vec<(String, usize)>,
    /// The source circuit, for circuit compilations.
    pub circuit: Option<PureCircuit>,
    pub alpha: f64,
    pub squaring_depth: Option<usize>,
}

impl CompiledArtifact {
    pub fn bank(&self, role: &str) -> Option<usize> {
        self.wire_map.iter().find(|(n, _)| n == role).map(|(_, b)| *b)
    }
}

fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    let mut k = 1;
    while taken.contains(&name) {
        name = format!("{base}{k}");
        k += 1;
    }
    name
}

/// Rewrites every NAND input that equals the gate's own output to read from
/// a PURIFY copy of that wire instead, since a bank cannot hold a CDS on
/// itself. Solutions of the result restrict to solutions of `c`.
fn break_self_references(c: &PureCircuit) -> Result<PureCircuit> {
    let mut wires = c.wires().to_vec();
    let mut gates: Vec<Gate> = Vec::new();
    let mut extra: Vec<Gate> = Vec::new();
    for g in c.gates() {
        let mut g = g.clone();
        if g.kind == GateKind::Nand && g.inputs.contains(&g.outputs[0]) {
            let w = g.outputs[0];
            let base = c.wires()[w].clone();
            let copy = fresh_name(&wires, &format!("{base}~copy"));
            wires.push(copy);
            let spare = fresh_name(&wires, &format!("{base}~spare"));
            wires.push(spare);
            let (ci, si) = (wires.len() - 2, wires.len() - 1);
            for i in g.inputs.iter_mut() {
                if *i == w {
                    *i = ci;
                }
            }
            extra.push(Gate::purify(w, ci, si));
        }
        gates.push(g);
    }
    gates.extend(extra);
    PureCircuit::new(wires, gates)
}

/// Replaces each gate by its gadget with the default reduction constants.
/// Each wire is one bank: the producing gadget's output. Wires produced by
/// no gate become free input pairs.
pub fn compile_circuit(c: &PureCircuit) -> Result<CompiledArtifact> {
    let params = GadgetParams::default();
    let full = break_self_references(c)?;
    let producers = full.producers();
    let mut b = NetworkBuilder::new();
    let banks: Vec<BankId> = full
        .wires()
        .iter()
        .zip(&producers)
        .map(|(name, p)| {
            // prefixed so wire names cannot collide with scaffolding banks
            let bank = format!("wire.{name}");
            match p {
                Some(_) => b.add_bank(bank, 0.0),
                None => b.add_placeholder(bank),
            }
        })
        .collect();
    for g in full.gates() {
        match g.kind {
            GateKind::Nand => {
                let (u, v, w) = (banks[g.inputs[0]], banks[g.inputs[1]], banks[g.outputs[0]]);
                b.nand_into(w, u, v, params.nand_c1, params.nand_c2);
            }
            GateKind::Purify => {
                b.purify_into(banks[g.inputs[0]], banks[g.outputs[0]], banks[g.outputs[1]], &params);
            }
        }
    }
    let network = b.finalize()?;
    let wire_map = full
        .wires()
        .iter()
        .zip(&banks)
        .map(|(w, b)| (w.clone(), b.index()))
        .collect();
    Ok(CompiledArtifact {
        network,
        wire_map,
        circuit: Some(c.clone()),
        alpha: 1.0,
        squaring_depth: None,
    })
}

/// Decodes each wire of the source circuit from an epsilon-approximate
/// clearing vector, with the default reduction constants.
pub fn extract_solution(art: &CompiledArtifact, r: &RecoveryVector) -> Result<Vec<TriValue>> {
    let k = ReductionConstants::default();
    extract_solution_with(art, r, k.eps, &k.decoding())
}

pub fn extract_solution_with(
    art: &CompiledArtifact,
    r: &RecoveryVector,
    eps: f64,
    params: &DecodingParams,
) -> Result<Vec<TriValue>> {
    let circuit = art
        .circuit
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("artifact was not compiled from a circuit".into()))?;
    if let Some(detail) = art.network.eps_approx_violation(r, eps)? {
        return Err(Error::NotApproxClearing { eps, detail });
    }
    circuit
        .wires()
        .iter()
        .map(|w| {
            let bank = art
                .bank(w)
                .ok_or_else(|| Error::MalformedCircuit(format!("wire `{w}` missing from wire map")))?;
            Ok(dec(r[bank], params))
        })
        .collect()
}

/// Smallest `k` with `((1 + alpha) / 2)^(2^k) <= 1/4`.
pub fn squaring_depth(alpha: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::ParameterRange { name: "alpha", value: alpha });
    }
    let mut v = (1.0 + alpha) / 2.0;
    let mut k = 0;
    while v > 0.25 {
        v *= v;
        k += 1;
    }
    Ok(k)
}

/// Variable banks: free input pairs, or constants when `at` is given.
enum Inputs<'a> {
    Free,
    Driven(&'a [f64]),
}

fn variables(b: &mut NetworkBuilder, n: usize, inputs: &Inputs) -> Result<Vec<BankId>> {
    match inputs {
        Inputs::Free => Ok((0..n).map(|_| b.input_pair()).collect()),
        Inputs::Driven(x) => {
            if x.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: x.len() });
            }
            if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                return Err(Error::RecoveryRange { index: i, value: *v });
            }
            Ok(x.iter().map(|&v| b.constant(v)).collect())
        }
    }
}

fn check_poly(p: &SparsePolynomial) -> Result<()> {
    if p.degree() > MAX_DEGREE {
        return Err(Error::InvalidPolynomial(format!("degree {} > {MAX_DEGREE}", p.degree())));
    }
    if !p.is_normalized() {
        return Err(Error::InvalidPolynomial(
            "polynomial must be normalized (|c| <= 1/s, s >= 1)".into(),
        ));
    }
    Ok(())
}

/// Builds `p+` or `p-`: constant coefficient times left-associated products
/// of variables by increasing index, summed left to right.
fn side(b: &mut NetworkBuilder, part: &SparsePolynomial, vars: &[BankId]) -> BankId {
    let mut acc: Option<BankId> = None;
    for m in part.monomials() {
        let mut cur = b.constant(m.coef);
        for (j, &e) in m.exponents.iter().enumerate() {
            for _ in 0..e {
                cur = b.product(cur, vars[j]);
            }
        }
        acc = Some(match acc {
            None => cur,
            Some(a) => b.sum(a, cur),
        });
    }
    acc.unwrap_or_else(|| b.constant(0.0))
}

struct PolyBanks {
    vars: Vec<BankId>,
    plus: BankId,
    minus: BankId,
    out: BankId,
}

fn poly_into(b: &mut NetworkBuilder, p: &SparsePolynomial, inputs: &Inputs) -> Result<PolyBanks> {
    check_poly(p)?;
    let vars = variables(b, p.var_count(), inputs)?;
    let (pp, pm) = split_poly(p);
    let plus = side(b, &pp, &vars);
    let minus = side(b, &pm, &vars);
    let d1 = b.difference(minus, plus);
    let d2 = b.difference(plus, minus);
    let out = b.sum(d1, d2);
    Ok(PolyBanks { vars, plus, minus, out })
}

fn poly_roles(pb: &PolyBanks) -> Vec<(String, usize)> {
    let mut m: Vec<(String, usize)> = pb
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("x{i}"), v.index()))
        .collect();
    m.push(("p+".into(), pb.plus.index()));
    m.push(("p-".into(), pb.minus.index()));
    m.push(("o".into(), pb.out.index()));
    m
}

fn poly_artifact(p: &SparsePolynomial, inputs: Inputs) -> Result<CompiledArtifact> {
    let mut b = NetworkBuilder::new();
    let pb = poly_into(&mut b, p, &inputs)?;
    let wire_map = poly_roles(&pb);
    Ok(CompiledArtifact {
        network: b.finalize()?,
        wire_map,
        circuit: None,
        alpha: 1.0,
        squaring_depth: None,
    })
}

/// Network whose clearing vectors correspond to `x` in `[0,1]^n` (one
/// input pair per variable, role `x{i}`) with `r_o = |p(x)|` at role `o`.
pub fn build_poly_network(p: &SparsePolynomial) -> Result<CompiledArtifact> {
    poly_artifact(p, Inputs::Free)
}

/// As [`build_poly_network`] with each variable pinned by a constant gadget.
pub fn build_poly_network_at(p: &SparsePolynomial, x: &[f64]) -> Result<CompiledArtifact> {
    poly_artifact(p, Inputs::Driven(x))
}

/// Discontinuity on `o` followed by `k` squarings.
fn gap(b: &mut NetworkBuilder, o: BankId, k: usize) -> (BankId, BankId) {
    let d = b.discontinuity(o);
    let mut q = d;
    for _ in 0..k {
        q = b.product(q, q);
    }
    (d, q)
}

/// Appends discontinuity, `k` squarings and the infeasibility gadget to `o`.
fn hasclearing_tail(b: &mut NetworkBuilder, o: BankId, alpha: f64, roles: &mut Vec<(String, usize)>) -> Result<usize> {
    let k = squaring_depth(alpha)?;
    let (d, q) = gap(b, o, k);
    let inf = b.infeasibility(q, alpha)?;
    roles.push(("disc".into(), d.index()));
    roles.push(("squared".into(), q.index()));
    roles.push(("infeas.A".into(), inf.a.index()));
    roles.push(("infeas.B".into(), inf.b.index()));
    roles.push(("infeas.C".into(), inf.c.index()));
    Ok(k)
}

/// The feed-forward part of [`compile_hasclearing_at`]: `|p(x)|`, the
/// discontinuity and the squarings, without the infeasibility gadget.
/// Role `squared` is the value the infeasibility gadget would read.
pub fn compile_gap_at(p: &SparsePolynomial, alpha: f64, x: &[f64]) -> Result<CompiledArtifact> {
    let k = squaring_depth(alpha)?;
    let mut b = NetworkBuilder::new();
    b.set_default_costs(alpha, 1.0)?;
    let pb = poly_into(&mut b, p, &Inputs::Driven(x))?;
    let mut roles = poly_roles(&pb);
    let (d, q) = gap(&mut b, pb.out, k);
    roles.push(("disc".into(), d.index()));
    roles.push(("squared".into(), q.index()));
    Ok(CompiledArtifact {
        network: b.finalize()?,
        wire_map: roles,
        circuit: None,
        alpha,
        squaring_depth: Some(k),
    })
}

fn hasclearing(p: &SparsePolynomial, alpha: f64, inputs: Inputs) -> Result<CompiledArtifact> {
    squaring_depth(alpha)?;
    let mut b = NetworkBuilder::new();
    b.set_default_costs(alpha, 1.0)?;
    let pb = poly_into(&mut b, p, &inputs)?;
    let mut roles = poly_roles(&pb);
    let k = hasclearing_tail(&mut b, pb.out, alpha, &mut roles)?;
    Ok(CompiledArtifact {
        network: b.finalize()?,
        wire_map: roles,
        circuit: None,
        alpha,
        squaring_depth: Some(k),
    })
}

/// Network with default cost `alpha` on external assets (`beta = 1`) that
/// has a clearing vector iff `p` has a root in `[0,1]^n`.
pub fn compile_hasclearing(p: &SparsePolynomial, alpha: f64) -> Result<CompiledArtifact> {
    hasclearing(p, alpha, Inputs::Free)
}

pub fn compile_hasclearing_at(p: &SparsePolynomial, alpha: f64, x: &[f64]) -> Result<CompiledArtifact> {
    hasclearing(p, alpha, Inputs::Driven(x))
}

/// Only the gadget tail: a constant `value` standing in for `|p(x)|`,
/// then discontinuity, squarings and infeasibility.
pub fn compile_hasclearing_tail(value: f64, alpha: f64) -> Result<CompiledArtifact> {
    squaring_depth(alpha)?;
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::RecoveryRange { index: 0, value });
    }
    let mut b = NetworkBuilder::new();
    b.set_default_costs(alpha, 1.0)?;
    let o = b.constant(value);
    let mut roles = vec![("o".to_string(), o.index())];
    let k = hasclearing_tail(&mut b, o, alpha, &mut roles)?;
    Ok(CompiledArtifact {
        network: b.finalize()?,
        wire_map: roles,
        circuit: None,
        alpha,
        squaring_depth: Some(k),
    })
}

fn cansurvive(p: &SparsePolynomial, inputs: Inputs) -> Result<CompiledArtifact> {
    let mut b = NetworkBuilder::new();
    let pb = poly_into(&mut b, p, &inputs)?;
    let mut roles = poly_roles(&pb);
    let target = b.add_bank("b", 0.0);
    b.add_cds(crate::gadgets::SOURCE, target, pb.out, 1.0);
    b.add_debt(target, crate::gadgets::SINK, 1.0);
    roles.push(("b".into(), target.index()));
    Ok(CompiledArtifact {
        network: b.finalize()?,
        wire_map: roles,
        circuit: None,
        alpha: 1.0,
        squaring_depth: None,
    })
}

/// Network with target bank `b` (`r_b = 1 - |p(x)|`) that has a clearing
/// vector with `b` solvent iff `p` has a root in `[0,1]^n`.
pub fn compile_cansurvive(p: &SparsePolynomial) -> Result<CompiledArtifact> {
    cansurvive(p, Inputs::Free)
}

pub fn compile_cansurvive_at(p: &SparsePolynomial, x: &[f64]) -> Result<CompiledArtifact> {
    cansurvive(p, Inputs::Driven(x))
}
