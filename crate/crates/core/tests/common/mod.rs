#![allow(dead_code)]

use std::collections::HashMap;

use cdsnet::circuit::{Gate, GateKind, PureCircuit};
use cdsnet::gadgets::NetworkFragment;
use cdsnet::poly::{normalize_poly, Monomial, SparsePolynomial};
use cdsnet::solver::forward_eval;
use cdsnet::{Bank, Cds, Debt, FinancialNetwork, RecoveryVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

/// Drives the named inputs of a fragment and evaluates it feed-forward.
pub fn eval_fragment(frag: &NetworkFragment, inputs: &[(&str, f64)]) -> (FinancialNetwork, RecoveryVector) {
    let mut f = frag.clone();
    for (n, x) in inputs {
        f = f.drive(n, *x).expect("input exists");
    }
    let net = f.finalize().expect("fragment finalizes");
    let r = forward_eval(&net, &HashMap::new()).expect("fragment is feed-forward");
    (net, r)
}

fn named(wires: &[&str], gates: &[(GateKind, Vec<&str>, Vec<&str>)]) -> PureCircuit {
    PureCircuit::from_named(wires.iter().map(|w| w.to_string()).collect(), gates).expect("valid circuit")
}

/// Hand-written circuits covering self-loops, odd cycles and purify chains.
pub fn handmade_circuits() -> Vec<(String, PureCircuit)> {
    use GateKind::{Nand, Purify};
    vec![
        ("nand self-loop".into(), named(&["w"], &[(Nand, vec!["w", "w"], vec!["w"])])),
        ("nand half self-loop".into(), named(&["a", "w"], &[(Nand, vec!["a", "w"], vec!["w"])])),
        ("single nand".into(), named(&["a", "b", "w"], &[(Nand, vec!["a", "b"], vec!["w"])])),
        ("nand as not".into(), named(&["a", "w"], &[(Nand, vec!["a", "a"], vec!["w"])])),
        ("single purify".into(), named(&["u", "v", "w"], &[(Purify, vec!["u"], vec!["v", "w"])])),
        (
            "purify chain 2".into(),
            named(
                &["a", "b", "c", "d", "e"],
                &[(Purify, vec!["a"], vec!["b", "c"]), (Purify, vec!["b"], vec!["d", "e"])],
            ),
        ),
        (
            "purify chain 3".into(),
            named(
                &["a", "b", "c", "d", "e", "f", "g"],
                &[
                    (Purify, vec!["a"], vec!["b", "c"]),
                    (Purify, vec!["c"], vec!["d", "e"]),
                    (Purify, vec!["e"], vec!["f", "g"]),
                ],
            ),
        ),
        (
            "odd ring".into(),
            named(
                &["a", "b", "c"],
                &[
                    (Nand, vec!["a", "a"], vec!["b"]),
                    (Nand, vec!["b", "b"], vec!["c"]),
                    (Nand, vec!["c", "c"], vec!["a"]),
                ],
            ),
        ),
        (
            "even ring".into(),
            named(&["a", "b"], &[(Nand, vec!["a", "a"], vec!["b"]), (Nand, vec!["b", "b"], vec!["a"])]),
        ),
        (
            "latch".into(),
            named(
                &["s", "r", "q", "p"],
                &[(Nand, vec!["s", "p"], vec!["q"]), (Nand, vec!["r", "q"], vec!["p"])],
            ),
        ),
        (
            "purify into nand".into(),
            named(
                &["a", "b", "c", "w"],
                &[(Purify, vec!["a"], vec!["b", "c"]), (Nand, vec!["b", "c"], vec!["w"])],
            ),
        ),
        (
            "purified feedback".into(),
            named(
                &["w", "v", "x"],
                &[(Nand, vec!["v", "v"], vec!["w"]), (Purify, vec!["w"], vec!["v", "x"])],
            ),
        ),
        (
            "xor".into(),
            named(
                &["a", "b", "m", "p", "q", "o"],
                &[
                    (Nand, vec!["a", "b"], vec!["m"]),
                    (Nand, vec!["a", "m"], vec!["p"]),
                    (Nand, vec!["b", "m"], vec!["q"]),
                    (Nand, vec!["p", "q"], vec!["o"]),
                ],
            ),
        ),
        (
            "self-loop ring".into(),
            named(
                &["a", "b"],
                &[(Nand, vec!["a", "b"], vec!["a"]), (Nand, vec!["b", "a"], vec!["b"])],
            ),
        ),
    ]
}

/// Random circuits with at most `max_gates` gates over at most 10 wires.
pub fn random_circuits(count: usize, max_gates: usize, seed: u64) -> Vec<(String, PureCircuit)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let w = rng.random_range(3..=10usize);
        let wires: Vec<String> = (0..w).map(|i| format!("w{i}")).collect();
        let mut free: Vec<usize> = (0..w).collect();
        let mut gates = Vec::new();
        let target = rng.random_range(1..=max_gates);
        while gates.len() < target && !free.is_empty() {
            let purify = free.len() >= 2 && rng.random_bool(0.35);
            let pick = |rng: &mut ChaCha8Rng, free: &mut Vec<usize>| free.swap_remove(rng.random_range(0..free.len()));
            let g = if purify {
                let (v, x) = (pick(&mut rng, &mut free), pick(&mut rng, &mut free));
                Gate::purify(rng.random_range(0..w), v, x)
            } else {
                let o = pick(&mut rng, &mut free);
                Gate::nand(rng.random_range(0..w), rng.random_range(0..w), o)
            };
            gates.push(g);
        }
        let c = PureCircuit::new(wires, gates).expect("generated circuit is valid");
        out.push((format!("random #{}", out.len()), c));
    }
    out
}

/// Random normalized polynomial of total degree at most 4.
pub fn random_polynomial(rng: &mut ChaCha8Rng, max_vars: usize) -> SparsePolynomial {
    loop {
        let n = rng.random_range(1..=max_vars);
        let terms = rng.random_range(1..=6usize);
        let monomials = (0..terms)
            .map(|_| {
                let mut exps = vec![0u32; n];
                let deg = rng.random_range(0..=4u32);
                for _ in 0..deg {
                    exps[rng.random_range(0..n)] += 1;
                }
                Monomial {
                    exponents: exps,
                    coef: rng.random_range(-2.0..2.0),
                }
            })
            .collect();
        let p = SparsePolynomial::new(n, monomials).expect("degree bounded");
        if let Ok(q) = normalize_poly(&p) {
            return q;
        }
    }
}

/// Random non-degenerate network with `alpha = beta = 1`: every bank has
/// positive external assets or writes a debt.
pub fn random_network(rng: &mut ChaCha8Rng, max_banks: usize) -> FinancialNetwork {
    loop {
        let n = rng.random_range(2..=max_banks);
        let banks: Vec<Bank> = (0..n)
            .map(|i| {
                let e = if rng.random_bool(0.5) { rng.random_range(0.0..2.0) } else { 0.0 };
                Bank::new(format!("b{i}"), e)
            })
            .collect();
        let mut debts = Vec::new();
        for w in 0..n {
            for h in 0..n {
                if w != h && rng.random_bool(0.3) {
                    debts.push(Debt {
                        writer: w,
                        holder: h,
                        notional: rng.random_range(0.1..2.0),
                    });
                }
            }
        }
        let mut cds = Vec::new();
        if n >= 3 {
            for _ in 0..rng.random_range(0..=n) {
                let w = rng.random_range(0..n);
                let h = rng.random_range(0..n);
                let k = rng.random_range(0..n);
                if w != h && w != k && h != k && !cds.iter().any(|c: &Cds| (c.writer, c.holder, c.reference) == (w, h, k)) {
                    cds.push(Cds {
                        writer: w,
                        holder: h,
                        reference: k,
                        notional: rng.random_range(0.1..2.0),
                    });
                }
            }
        }
        let net = FinancialNetwork::new(banks, debts, cds, 1.0, 1.0).expect("generated network is valid");
        if net.is_nondegenerate() {
            return net;
        }
    }
}
