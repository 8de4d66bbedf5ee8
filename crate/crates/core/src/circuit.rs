//! PURE-CIRCUIT instances over `{0, 1, ⊥}` with NAND and PURIFY gates.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_BRUTE_CAP: usize = 12;

/// Three-valued wire value. The derived order `Zero < Bot < One` is the
/// order in which `dec` is monotone and the enumeration order of
/// [`brute_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TriValue {
    Zero,
    Bot,
    One,
}

impl TriValue {
    pub const ALL: [TriValue; 3] = [TriValue::Zero, TriValue::Bot, TriValue::One];

    pub fn is_pure(self) -> bool {
        self != TriValue::Bot
    }
}

impl fmt::Display for TriValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriValue::Zero => "0",
            TriValue::Bot => "⊥",
            TriValue::One => "1",
        })
    }
}

/// Thresholds of the asymmetric decoding function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodingParams {
    pub gamma: f64,
    pub delta: f64,
}

impl Default for DecodingParams {
    fn default() -> Self {
        let sqrt6 = 6f64.sqrt();
        DecodingParams {
            gamma: 3.0 - sqrt6,
            delta: 5.0 - 2.0 * sqrt6,
        }
    }
}

impl DecodingParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma >= 0.0 && delta >= 0.0 && gamma + delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decoding needs gamma, delta >= 0 and gamma + delta < 1, got ({gamma}, {delta})"
            )));
        }
        Ok(DecodingParams { gamma, delta })
    }
}

/// `[0, γ] -> 0`, `(γ, 1-δ) -> ⊥`, `[1-δ, 1] -> 1`.
pub fn dec(r: f64, params: &DecodingParams) -> TriValue {
    if r <= params.gamma {
        TriValue::Zero
    } else if r < 1.0 - params.delta {
        TriValue::Bot
    } else {
        TriValue::One
    }
}

pub fn check_nand(u: TriValue, v: TriValue, w: TriValue) -> bool {
    use TriValue::*;
    let both_one = u == One && v == One;
    let some_zero = u == Zero || v == Zero;
    (!both_one || w == Zero) && (!some_zero || w == One)
}

pub fn check_purify(u: TriValue, v: TriValue, w: TriValue) -> bool {
    let copies = u == TriValue::Bot || (v == u && w == u);
    copies && (v.is_pure() || w.is_pure())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Nand,
    Purify,
}

/// A gate over wire indices. NAND: 2 inputs, 1 output. PURIFY: 1 input,
/// 2 outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Gate {
    pub fn nand(a: usize, b: usize, out: usize) -> Self {
        Gate {
            kind: GateKind::Nand,
            inputs: vec![a, b],
            outputs: vec![out],
        }
    }

    pub fn purify(input: usize, v: usize, w: usize) -> Self {
        Gate {
            kind: GateKind::Purify,
            inputs: vec![input],
            outputs: vec![v, w],
        }
    }

    fn satisfied(&self, val: impl Fn(usize) -> TriValue) -> bool {
        match self.kind {
            GateKind::Nand => check_nand(val(self.inputs[0]), val(self.inputs[1]), val(self.outputs[0])),
            GateKind::Purify => check_purify(
                val(self.inputs[0]),
                val(self.outputs[0]),
                val(self.outputs[1]),
            ),
        }
    }
}

/// A generalized circuit: gates may form cycles and there are no designated
/// inputs or outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureCircuit {
    wires: Vec<String>,
    gates: Vec<Gate>,
}

impl PureCircuit {
    pub fn new(wires: Vec<String>, gates: Vec<Gate>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, w) in wires.iter().enumerate() {
            if seen.insert(w.as_str(), i).is_some() {
                return Err(Error::MalformedCircuit(format!("wire `{w}` declared twice")));
            }
        }
        let mut producer: Vec<Option<usize>> = vec![None; wires.len()];
        for (g, gate) in gates.iter().enumerate() {
            let (ni, no) = match gate.kind {
                GateKind::Nand => (2, 1),
                GateKind::Purify => (1, 2),
            };
            if gate.inputs.len() != ni || gate.outputs.len() != no {
                return Err(Error::MalformedCircuit(format!(
                    "gate {g} ({:?}) needs {ni} inputs and {no} outputs",
                    gate.kind
                )));
            }
            for &w in gate.inputs.iter().chain(&gate.outputs) {
                if w >= wires.len() {
                    return Err(Error::MalformedCircuit(format!("gate {g} uses unknown wire #{w}")));
                }
            }
            if gate.kind == GateKind::Purify && gate.outputs[0] == gate.outputs[1] {
                return Err(Error::MalformedCircuit(format!(
                    "gate {g} writes wire `{}` twice",
                    wires[gate.outputs[0]]
                )));
            }
            for &w in &gate.outputs {
                if let Some(other) = producer[w].replace(g) {
                    return Err(Error::MalformedCircuit(format!(
                        "wire `{}` is produced by gates {other} and {g}",
                        wires[w]
                    )));
                }
            }
        }
        Ok(PureCircuit { wires, gates })
    }

    /// Builds from wire names; gates refer to wires by name.
    pub fn from_named(wires: Vec<String>, gates: &[(GateKind, Vec<&str>, Vec<&str>)]) -> Result<Self> {
        let idx: HashMap<&str, usize> = wires.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let look = |names: &[&str]| -> Result<Vec<usize>> {
            names
                .iter()
                .map(|n| {
                    idx.get(n)
                        .copied()
                        .ok_or_else(|| Error::MalformedCircuit(format!("unknown wire `{n}`")))
                })
                .collect()
        };
        let gates = gates
            .iter()
            .map(|(kind, i, o)| {
                Ok(Gate {
                    kind: *kind,
                    inputs: look(i)?,
                    outputs: look(o)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PureCircuit::new(wires, gates)
    }

    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn wire_index(&self, name: &str) -> Option<usize> {
        self.wires.iter().position(|w| w == name)
    }

    /// Gate index producing each wire, `None` for free wires.
    pub fn producers(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.wires.len()];
        for (g, gate) in self.gates.iter().enumerate() {
            for &w in &gate.outputs {
                p[w] = Some(g);
            }
        }
        p
    }

    pub fn is_solution(&self, assignment: &[TriValue]) -> Result<bool> {
        if assignment.len() != self.wires.len() {
            return Err(Error::InvalidArgument(format!(
                "assignment covers {} of {} wires",
                assignment.len(),
                self.wires.len()
            )));
        }
        Ok(self.gates.iter().all(|g| g.satisfied(|w| assignment[w])))
    }

    /// Named-assignment form of [`PureCircuit::is_solution`].
    pub fn is_solution_named(&self, assignment: &HashMap<String, TriValue>) -> Result<bool> {
        let vals = self
            .wires
            .iter()
            .map(|w| {
                assignment
                    .get(w)
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("wire `{w}` is unassigned")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.is_solution(&vals)
    }

    pub fn brute_solve(&self) -> Result<Vec<TriValue>> {
        self.brute_solve_capped(DEFAULT_BRUTE_CAP)
    }

    /// Lexicographically first satisfying assignment in the order
    /// `Zero < Bot < One`, by depth-first search over wires in declaration
    /// order. Each gate is checked as soon as its last wire is assigned.
    pub fn brute_solve_capped(&self, cap: usize) -> Result<Vec<TriValue>> {
        let m = self.wires.len();
        if m > cap {
            return Err(Error::CapExceeded {
                what: "circuit",
                got: m,
                cap,
            });
        }
        // gates become checkable once their highest-index wire is assigned
        let mut ready: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (g, gate) in self.gates.iter().enumerate() {
            let last = gate.inputs.iter().chain(&gate.outputs).copied().max().unwrap();
            ready[last].push(g);
        }
        let mut assignment = vec![TriValue::Zero; m];
        if self.search(0, &ready, &mut assignment) {
            Ok(assignment)
        } else {
            Err(Error::MalformedCircuit("no satisfying assignment exists".into()))
        }
    }

    fn search(&self, depth: usize, ready: &[Vec<usize>], assignment: &mut [TriValue]) -> bool {
        if depth == assignment.len() {
            return true;
        }
        for v in TriValue::ALL {
            assignment[depth] = v;
            let ok = ready[depth]
                .iter()
                .all(|&g| self.gates[g].satisfied(|w| assignment[w]));
            if ok && self.search(depth + 1, ready, assignment) {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TriValue::*;

    fn selfloop() -> PureCircuit {
        PureCircuit::from_named(vec!["w".into()], &[(GateKind::Nand, vec!["w", "w"], vec!["w"])]).unwrap()
    }

    #[test]
    fn dec_examples() {
        let p = DecodingParams::default();
        assert_eq!(dec(0.0, &p), Zero);
        assert_eq!(dec(1.0, &p), One);
        assert_eq!(dec(0.5, &p), Zero);
        assert_eq!(dec(0.7, &p), Bot);
        assert_eq!(dec(0.95, &p), One);
        assert_eq!(dec(p.gamma, &p), Zero);
        assert_eq!(dec(1.0 - p.delta, &p), One);
    }

    #[test]
    fn dec_monotone() {
        let p = DecodingParams::default();
        let mut prev = Zero;
        for k in 0..=1000 {
            let d = dec(k as f64 / 1000.0, &p);
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn decoding_params_validation() {
        assert!(DecodingParams::new(0.6, 0.5).is_err());
        assert!(DecodingParams::new(-0.1, 0.1).is_err());
        assert!(DecodingParams::new(0.3, 0.3).is_ok());
    }

    #[test]
    fn nand_truth_table() {
        assert!(check_nand(One, One, Zero));
        assert!(!check_nand(One, One, Bot));
        assert!(check_nand(Zero, Bot, One));
        assert!(!check_nand(Zero, Bot, Bot));
        for w in TriValue::ALL {
            assert!(check_nand(Bot, Bot, w));
        }
    }

    #[test]
    fn purify_truth_table() {
        assert!(check_purify(Zero, Zero, Zero));
        assert!(!check_purify(One, One, Bot));
        assert!(check_purify(Bot, Bot, One));
        assert!(!check_purify(Bot, Bot, Bot));
        assert!(check_purify(Bot, Zero, One));
    }

    #[test]
    fn solution_checks() {
        let c = selfloop();
        assert!(c.is_solution(&[Bot]).unwrap());
        assert!(!c.is_solution(&[One]).unwrap());
        assert!(!c.is_solution(&[Zero]).unwrap());
        assert!(c.is_solution(&[]).is_err());
        let empty = PureCircuit::new(vec![], vec![]).unwrap();
        assert!(empty.is_solution(&[]).unwrap());
    }

    #[test]
    fn brute_selfloop_unique() {
        assert_eq!(selfloop().brute_solve().unwrap(), vec![Bot]);
    }

    #[test]
    fn brute_chain_first_solution() {
        let c = PureCircuit::from_named(
            vec!["a".into(), "w".into()],
            &[(GateKind::Nand, vec!["a", "a"], vec!["w"])],
        )
        .unwrap();
        // a = 0 forces w = 1
        assert_eq!(c.brute_solve().unwrap(), vec![Zero, One]);
    }

    #[test]
    fn brute_purify_free_input() {
        let c = PureCircuit::from_named(
            vec!["u".into(), "v".into(), "w".into()],
            &[(GateKind::Purify, vec!["u"], vec!["v", "w"])],
        )
        .unwrap();
        assert_eq!(c.brute_solve().unwrap(), vec![Zero, Zero, Zero]);
    }

    #[test]
    fn brute_cap() {
        let wires: Vec<String> = (0..13).map(|i| format!("x{i}")).collect();
        let c = PureCircuit::new(wires, vec![]).unwrap();
        assert!(matches!(c.brute_solve(), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn malformed_circuits() {
        let w = || vec!["a".to_string(), "b".to_string()];
        assert!(PureCircuit::new(w(), vec![Gate { kind: GateKind::Nand, inputs: vec![0], outputs: vec![1] }]).is_err());
        assert!(PureCircuit::new(w(), vec![Gate::nand(0, 0, 1), Gate::nand(0, 1, 1)]).is_err());
        assert!(PureCircuit::new(w(), vec![Gate::purify(0, 1, 1)]).is_err());
        assert!(PureCircuit::new(w(), vec![Gate::nand(0, 0, 5)]).is_err());
    }

    #[test]
    fn brute_output_is_solution() {
        // NAND ring of three plus a purify tap
        let c = PureCircuit::from_named(
            ["a", "b", "c", "p", "q"].iter().map(|s| s.to_string()).collect(),
            &[
                (GateKind::Nand, vec!["a", "a"], vec!["b"]),
                (GateKind::Nand, vec!["b", "b"], vec!["c"]),
                (GateKind::Nand, vec!["c", "c"], vec!["a"]),
                (GateKind::Purify, vec!["a"], vec!["p", "q"]),
            ],
        )
        .unwrap();
        let s = c.brute_solve().unwrap();
        assert!(c.is_solution(&s).unwrap());
    }
}
