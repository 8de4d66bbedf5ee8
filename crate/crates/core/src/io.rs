//! JSON file formats, recovery-vector text, and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind, PureCircuit, TriValue};
use crate::error::{Error, Result};
use crate::network::{Bank, Cds, Debt, FinancialNetwork, RecoveryVector};
use crate::poly::{Monomial, SparsePolynomial};
use crate::reductions::CompiledArtifact;

fn parse_err(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

fn at(loc: impl std::fmt::Display, e: Error) -> Error {
    Error::Parse(format!("{loc}: {e}"))
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data always serializes");
    s.push('\n');
    s
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BankDto {
    id: String,
    #[serde(default)]
    external: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DebtDto {
    from: String,
    to: String,
    notional: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CdsDto {
    from: String,
    to: String,
    reference: String,
    notional: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDto {
    banks: Vec<BankDto>,
    #[serde(default)]
    debts: Vec<DebtDto>,
    #[serde(default)]
    cds: Vec<CdsDto>,
    #[serde(default = "default_one")]
    alpha: f64,
    #[serde(default = "default_one")]
    beta: f64,
}

/// Parses a network document. Contract endpoints name banks by id.
pub fn parse_network(text: &str) -> Result<FinancialNetwork> {
    let dto: NetworkDto = serde_json::from_str(text).map_err(|e| parse_err("network", e))?;
    let banks: Vec<Bank> = dto.banks.iter().map(|b| Bank::new(b.id.clone(), b.external)).collect();
    let index: std::collections::HashMap<&str, usize> =
        dto.banks.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let lookup = |loc: &str, id: &str| -> Result<usize> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| at(loc, Error::UnknownBank(id.to_string())))
    };
    let mut debts = Vec::with_capacity(dto.debts.len());
    for (k, d) in dto.debts.iter().enumerate() {
        debts.push(Debt {
            writer: lookup(&format!("debts[{k}].from"), &d.from)?,
            holder: lookup(&format!("debts[{k}].to"), &d.to)?,
            notional: d.notional,
        });
    }
    let mut cds = Vec::with_capacity(dto.cds.len());
    for (k, c) in dto.cds.iter().enumerate() {
        cds.push(Cds {
            writer: lookup(&format!("cds[{k}].from"), &c.from)?,
            holder: lookup(&format!("cds[{k}].to"), &c.to)?,
            reference: lookup(&format!("cds[{k}].reference"), &c.reference)?,
            notional: c.notional,
        });
    }
    FinancialNetwork::new(banks, debts, cds, dto.alpha, dto.beta).map_err(|e| at("network", e))
}

pub fn serialize_network(net: &FinancialNetwork) -> String {
    let id = |i: usize| net.bank_id(i).to_string();
    let dto = NetworkDto {
        banks: net
            .banks()
            .iter()
            .map(|b| BankDto {
                id: b.id.clone(),
                external: b.external,
            })
            .collect(),
        debts: net
            .debts()
            .iter()
            .map(|d| DebtDto {
                from: id(d.writer),
                to: id(d.holder),
                notional: d.notional,
            })
            .collect(),
        cds: net
            .cds()
            .iter()
            .map(|c| CdsDto {
                from: id(c.writer),
                to: id(c.holder),
                reference: id(c.reference),
                notional: c.notional,
            })
            .collect(),
        alpha: net.alpha(),
        beta: net.beta(),
    };
    to_pretty(&dto)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDto {
    Nand,
    Purify,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDto {
    kind: KindDto,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDto {
    wires: Vec<String>,
    gates: Vec<GateDto>,
}

impl CircuitDto {
    fn from_circuit(c: &PureCircuit) -> Self {
        let name = |i: &usize| c.wires()[*i].clone();
        CircuitDto {
            wires: c.wires().to_vec(),
            gates: c
                .gates()
                .iter()
                .map(|g| GateDto {
                    kind: match g.kind {
                        GateKind::Nand => KindDto::Nand,
                        GateKind::Purify => KindDto::Purify,
                    },
                    inputs: g.inputs.iter().map(name).collect(),
                    outputs: g.outputs.iter().map(name).collect(),
                })
                .collect(),
        }
    }

    fn into_circuit(self) -> Result<PureCircuit> {
        let index: std::collections::HashMap<&str, usize> =
            self.wires.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let mut gates = Vec::with_capacity(self.gates.len());
        for (k, g) in self.gates.iter().enumerate() {
            let (kind, ni, no) = match g.kind {
                KindDto::Nand => (GateKind::Nand, 2, 1),
                KindDto::Purify => (GateKind::Purify, 1, 2),
            };
            if g.inputs.len() != ni || g.outputs.len() != no {
                return Err(Error::Parse(format!(
                    "gates[{k}]: {:?} gate needs {ni} inputs and {no} outputs, got {} and {}",
                    g.kind,
                    g.inputs.len(),
                    g.outputs.len()
                )));
            }
            let resolve = |field: &str, names: &[String]| -> Result<Vec<usize>> {
                names
                    .iter()
                    .map(|w| {
                        index
                            .get(w.as_str())
                            .copied()
                            .ok_or_else(|| Error::Parse(format!("gates[{k}].{field}: unknown wire `{w}`")))
                    })
                    .collect()
            };
            gates.push(Gate {
                kind,
                inputs: resolve("inputs", &g.inputs)?,
                outputs: resolve("outputs", &g.outputs)?,
            });
        }
        PureCircuit::new(self.wires, gates).map_err(|e| at("circuit", e))
    }
}

pub fn parse_circuit(text: &str) -> Result<PureCircuit> {
    let dto: CircuitDto = serde_json::from_str(text).map_err(|e| parse_err("circuit", e))?;
    dto.into_circuit()
}

pub fn serialize_circuit(c: &PureCircuit) -> String {
    to_pretty(&CircuitDto::from_circuit(c))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialDto {
    exponents: Vec<u32>,
    coef: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDto {
    var_count: usize,
    monomials: Vec<MonomialDto>,
}

pub fn parse_polynomial(text: &str) -> Result<SparsePolynomial> {
    let dto: PolyDto = serde_json::from_str(text).map_err(|e| parse_err("polynomial", e))?;
    let monomials = dto
        .monomials
        .into_iter()
        .map(|m| Monomial {
            exponents: m.exponents,
            coef: m.coef,
        })
        .collect();
    SparsePolynomial::new(dto.var_count, monomials).map_err(|e| at("polynomial", e))
}

pub fn serialize_polynomial(p: &SparsePolynomial) -> String {
    to_pretty(&PolyDto {
        var_count: p.var_count(),
        monomials: p
            .monomials()
            .iter()
            .map(|m| MonomialDto {
                exponents: m.exponents.clone(),
                coef: m.coef,
            })
            .collect(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoleDto {
    role: String,
    bank: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarDto {
    roles: Vec<RoleDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circuit: Option<CircuitDto>,
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    squaring_depth: Option<usize>,
}

/// Wire-map sidecar for a compiled artifact: role to bank id, plus the
/// source circuit when there is one.
pub fn serialize_sidecar(art: &CompiledArtifact) -> String {
    to_pretty(&SidecarDto {
        roles: art
            .wire_map
            .iter()
            .map(|(role, b)| RoleDto {
                role: role.clone(),
                bank: art.network.bank_id(*b).to_string(),
            })
            .collect(),
        circuit: art.circuit.as_ref().map(CircuitDto::from_circuit),
        alpha: art.alpha,
        squaring_depth: art.squaring_depth,
    })
}

/// Rebuilds an artifact from a network and its sidecar.
pub fn parse_sidecar(net: FinancialNetwork, text: &str) -> Result<CompiledArtifact> {
    let dto: SidecarDto = serde_json::from_str(text).map_err(|e| parse_err("wire map", e))?;
    let mut wire_map = Vec::with_capacity(dto.roles.len());
    for (k, r) in dto.roles.iter().enumerate() {
        let b = net
            .bank_index(&r.bank)
            .ok_or_else(|| at(format!("roles[{k}].bank"), Error::UnknownBank(r.bank.clone())))?;
        wire_map.push((r.role.clone(), b));
    }
    let circuit = dto.circuit.map(CircuitDto::into_circuit).transpose()?;
    Ok(CompiledArtifact {
        network: net,
        wire_map,
        circuit,
        alpha: dto.alpha,
        squaring_depth: dto.squaring_depth,
    })
}

/// Whitespace-separated decimals, one per bank in declaration order.
pub fn parse_recovery_vector(text: &str) -> Result<RecoveryVector> {
    let values = text
        .split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("recovery vector entry {i} `{tok}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    RecoveryVector::new(values)
}

pub fn format_recovery_vector(r: &RecoveryVector) -> String {
    r.as_slice().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn format_assignment(wires: &[String], values: &[TriValue]) -> String {
    wires
        .iter()
        .zip(values)
        .map(|(w, v)| format!("{w}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions {
    /// Omit contracts written by a source bank to a sink bank. A source
    /// holds no contracts and is never a reference; a sink writes nothing.
    pub hide_scaffolding: bool,
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Directed graph text. Debts are solid arcs, CDSs dashed arcs carrying a
/// `reference` attribute.
pub fn export_dot(net: &FinancialNetwork, opts: DotOptions) -> String {
    let n = net.len();
    let mut holds = vec![false; n];
    let mut writes = vec![false; n];
    let mut referenced = vec![false; n];
    for d in net.debts() {
        writes[d.writer] = true;
        holds[d.holder] = true;
    }
    for c in net.cds() {
        writes[c.writer] = true;
        holds[c.holder] = true;
        referenced[c.reference] = true;
    }
    let source = |i: usize| !holds[i] && !referenced[i];
    let sink = |i: usize| !writes[i];
    let hidden = |w: usize, h: usize| opts.hide_scaffolding && source(w) && sink(h);

    let mut out = String::from("digraph network {\n  rankdir=LR;\n  node [shape=box];\n");
    for b in net.banks() {
        let id = quoted(&b.id);
        let _ = writeln!(out, "  {id} [label={}\\ne={}\"];", &id[..id.len() - 1], b.external);
    }
    for d in net.debts().iter().filter(|d| !hidden(d.writer, d.holder)) {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\", style=solid];",
            quoted(net.bank_id(d.writer)),
            quoted(net.bank_id(d.holder)),
            d.notional
        );
    }
    for c in net.cds().iter().filter(|c| !hidden(c.writer, c.holder)) {
        let k = net.bank_id(c.reference);
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, style=dashed, reference={}];",
            quoted(net.bank_id(c.writer)),
            quoted(net.bank_id(c.holder)),
            quoted(&format!("{} on {k}", c.notional)),
            quoted(k)
        );
    }
    if net.has_default_costs() {
        let _ = writeln!(out, "  label=\"alpha={}, beta={}\";", net.alpha(), net.beta());
    }
    out.push_str("}\n");
    out
}
