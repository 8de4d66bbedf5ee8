//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the summary is always printed.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use cdsnet::circuit::{check_nand, check_purify, dec};
use cdsnet::constants::ReductionConstants;
use cdsnet::fixtures::no_clearing;
use cdsnet::gadgets::{GadgetParams, NetworkFragment};
use cdsnet::network::truncate_all;
use cdsnet::poly::{normalize_poly, SparsePolynomial};
use cdsnet::reductions::{
    build_poly_network_at, compile_cansurvive_at, compile_circuit, compile_gap_at, compile_hasclearing_at,
    compile_hasclearing_tail, extract_solution,
};
use cdsnet::solver::{
    enumerate_patterns, find_g_almost_fixed_point, forward_eval, iterate_f, solve_eps_approx, ApproxBudget,
    PatternOutcome, Status,
};
use cdsnet::{FinancialNetwork, RecoveryVector};
use common::{eval_fragment, grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: impl FnOnce() -> String) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{}: got {got}, want {want}", what()))
}

fn constants_suite() -> Check {
    let k = ReductionConstants::default();
    let g = 3.0 - 6f64.sqrt();
    let e = 5.0 - 2.0 * 6f64.sqrt();
    close(k.gamma, g, 0.0, || "gamma".into())?;
    close(k.eps, e, 0.0, || "eps".into())?;
    close(k.delta, e, 0.0, || "delta".into())?;
    close(e, g * (1.0 - g) / (3.0 - g), 1e-12, || "eps = gamma(1-gamma)/(3-gamma)".into())?;
    ensure(g + e < 1.0, || "gamma + delta >= 1".into())?;
    close(g + e, 0.652, 1e-3, || "gamma + delta".into())?;
    close(13.0 * e / 3.0, 0.438, 1e-3, || "13 eps / 3".into())?;
    close(e / (1.0 - k.eta) + e, 0.537, 1e-3, || "eps/(1-eta) + eps".into())?;
    Ok(format!(
        "gamma+delta={:.4} 13eps/3={:.4} eps/(1-eta)+eps={:.4}",
        g + e,
        13.0 * e / 3.0,
        e / (1.0 - k.eta) + e
    ))
}

fn trunc(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Output of a driven fragment under default costs `alpha`.
fn frag_out(frag: &NetworkFragment, alpha: f64, out: &str, inputs: &[(&str, f64)]) -> Result<f64, String> {
    let f = frag.clone().with_default_costs(alpha, 1.0).map_err(|e| e.to_string())?;
    let (net, r) = eval_fragment(&f, inputs);
    ensure(net.is_clearing(&r, 1e-12), || "forward value does not clear".into())?;
    Ok(r[f.output(out).expect("output exists").index()])
}

fn gadget_grid() -> Check {
    let pts = grid(21);
    let params = GadgetParams::default();
    let (c1, c2) = (params.nand_c1, params.nand_c2);
    let mut checks = 0usize;
    for &alpha in &[0.0, 0.3, 0.7, 1.0] {
        let mut expect = |frag: &NetworkFragment, out: &str, inputs: &[(&str, f64)], want: f64, what: &str| {
            checks += 1;
            let got = frag_out(frag, alpha, out, inputs)?;
            close(got, want, 1e-9, || format!("{what} at {inputs:?}, alpha={alpha}"))
        };
        let sum = NetworkFragment::sum();
        let diff = NetworkFragment::difference();
        let half = NetworkFragment::half_product();
        let prod = NetworkFragment::product();
        let or = NetworkFragment::or_gate();
        let nand = NetworkFragment::nand(&params);
        let inv = NetworkFragment::inverter(1.0).unwrap();
        let inv3 = NetworkFragment::inverter(3.0).unwrap();
        let cut = NetworkFragment::cutoff(0.3, 0.6).unwrap();
        let purify = NetworkFragment::purify(&params);
        for &u in &pts {
            expect(&NetworkFragment::constant(u).unwrap(), "v", &[], u, "constant")?;
            expect(&inv, "v", &[("u", u)], 1.0 - u, "inverter")?;
            expect(&inv3, "v", &[("u", u)], trunc(3.0 * (1.0 - u)), "inverter x3")?;
            // K = 0.3, L = 0.6: inverters of weight 1/(1-K), then (1-K)/(L-K)
            let ka = trunc((1.0 - u) / 0.7);
            expect(&cut, "v", &[("u", u)], trunc((0.7 / 0.3) * (1.0 - ka)), "cut-off")?;
            if u <= 0.3 {
                expect(&cut, "v", &[("u", u)], 0.0, "cut-off low")?;
            }
            if u >= 0.6 {
                expect(&cut, "v", &[("u", u)], 1.0, "cut-off high")?;
            }
            let a = trunc((1.0 - u) / (1.0 - params.purify_phi));
            let v = trunc((1.0 - a) / (1.0 - params.purify_gamma));
            let b = trunc((1.0 - u) / (1.0 - params.purify_gamma));
            let w = trunc((1.0 - b) / (1.0 - params.purify_eta));
            expect(&purify, "v", &[("u", u)], v, "purify v")?;
            expect(&purify, "w", &[("u", u)], w, "purify w")?;
            let disc = NetworkFragment::discontinuity(alpha).unwrap();
            let want = if u == 0.0 { 1.0 } else { (alpha + 1.0 - u) / 2.0 };
            expect(&disc, "v", &[("u", u)], want, "discontinuity")?;
            for &x in &pts {
                let uv = [("u", u), ("v", x)];
                expect(&sum, "w", &uv, trunc(u + x), "sum")?;
                expect(&diff, "w", &uv, trunc(x - u), "difference")?;
                expect(&half, "w", &uv, u * x / 2.0, "half product")?;
                expect(&prod, "w", &uv, u * x, "product")?;
                expect(&nand, "w", &uv, trunc(c1 * (1.0 - u) + c2 * (1.0 - x)), "nand")?;
                if u <= 0.25 && x <= 0.25 {
                    expect(&or, "w", &uv, 0.0, "or low")?;
                }
                if u >= 0.75 || x >= 0.75 {
                    expect(&or, "w", &uv, 1.0, "or high")?;
                }
            }
        }
        // the input pair clears at every common value and nowhere else on the grid
        let pair = NetworkFragment::input_pair().finalize().unwrap();
        for &t in &pts {
            let r = RecoveryVector::new(vec![1.0, 1.0, t, t]).unwrap();
            ensure(pair.is_clearing(&r, 0.0), || format!("input pair at {t}"))?;
            checks += 1;
        }
    }
    // infeasibility gadget: clearing at every high grid input, none at low ones
    let mut inf_checks = 0;
    for &alpha in &[0.0, 0.3, 0.7] {
        for &u in pts.iter().filter(|&&u| u <= 0.25 || u >= 0.75) {
            let frag = NetworkFragment::infeasibility(alpha).unwrap().drive("u", u).unwrap();
            let rep = enumerate_patterns(&frag.finalize().unwrap(), 1e-9).map_err(|e| e.to_string())?;
            let want = if u >= 0.75 { Status::Found } else { Status::Infeasible };
            ensure(rep.status == want, || format!("infeasibility at u={u}, alpha={alpha}: {:?}", rep.status))?;
            inf_checks += 1;
        }
    }
    Ok(format!("{checks} gadget evaluations, {inf_checks} infeasibility verdicts"))
}

fn nand_purify_decoding() -> Check {
    let k = ReductionConstants::default();
    let dp = k.decoding();
    let eps = k.eps;
    let params = GadgetParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut trials = 0usize;
    let mut perturbed = 0usize;

    // every trial: pin the input pairs, evaluate, then optionally jitter
    let mut run = |net: &FinancialNetwork,
                   driven: &HashMap<usize, f64>,
                   check: &dyn Fn(&RecoveryVector) -> Result<(), String>|
     -> Result<(), String> {
        let base = forward_eval(net, driven).map_err(|e| e.to_string())?;
        ensure(net.is_eps_approx_clearing(&base, eps).unwrap(), || "exact vector rejected".into())?;
        check(&base)?;
        trials += 1;
        for _ in 0..40 {
            let mut v = base.clone().into_inner();
            for x in v.iter_mut().skip(2) {
                if rng.random_bool(0.5) {
                    *x = (*x + rng.random_range(-eps..=eps)).clamp(0.0, 1.0);
                }
            }
            let r = RecoveryVector::new(v).unwrap();
            if net.is_eps_approx_clearing(&r, eps).unwrap() {
                check(&r)?;
                trials += 1;
                perturbed += 1;
            }
        }
        Ok(())
    };

    let nand = NetworkFragment::nand(&params);
    let net = nand.finalize().unwrap();
    let idx = |name: &str| net.bank_index(name).unwrap();
    let (u, ux, v, vx, w) = (idx("u"), idx("u~x"), idx("v"), idx("v~x"), nand.output("w").unwrap().index());
    let mut inputs = vec![0.0, 1.0, k.gamma, 1.0 - k.delta];
    inputs.extend(grid(21));
    for &a in &inputs {
        for &b in &inputs {
            let driven = HashMap::from([(u, a), (ux, a), (v, b), (vx, b)]);
            run(&net, &driven, &|r: &RecoveryVector| {
                let (du, dv, dw) = (dec(r[u], &dp), dec(r[v], &dp), dec(r[w], &dp));
                ensure(check_nand(du, dv, dw), || format!("nand {du}{dv} -> {dw} at {:?}", (r[u], r[v], r[w])))
            })?;
        }
    }
    let purify = NetworkFragment::purify(&params);
    let net = purify.finalize().unwrap();
    let (u, ux) = (net.bank_index("u").unwrap(), net.bank_index("u~x").unwrap());
    let (pv, pw) = (purify.output("v").unwrap().index(), purify.output("w").unwrap().index());
    for &a in &inputs {
        let driven = HashMap::from([(u, a), (ux, a)]);
        run(&net, &driven, &|r: &RecoveryVector| {
            let (du, dv, dw) = (dec(r[u], &dp), dec(r[pv], &dp), dec(r[pw], &dp));
            ensure(check_purify(du, dv, dw), || format!("purify {du} -> {dv}{dw} at {:?}", (r[u], r[pv], r[pw])))
        })?;
    }
    ensure(perturbed >= 1000, || format!("only {perturbed} perturbed trials were eps-approximately clearing"))?;
    Ok(format!("{trials} trials ({perturbed} perturbed), all decode correctly"))
}

fn no_clearing_fixture() -> Check {
    let net = no_clearing();
    let rep = enumerate_patterns(&net, 1e-9).map_err(|e| e.to_string())?;
    ensure(rep.status == Status::Infeasible, || format!("patterns: {:?}", rep.status))?;
    let verdicts = rep.pattern_verdicts.unwrap_or_default();
    let contradicted = verdicts.iter().filter(|v| v.outcome == PatternOutcome::Contradicted).count();
    ensure(verdicts.len() == 8 && contradicted == 8, || format!("{contradicted}/{} contradicted", verdicts.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for start in 0..20 {
        let r0 = RecoveryVector::new((0..net.len()).map(|_| rng.random::<f64>()).collect()).unwrap();
        let rep = iterate_f(&net, &r0, 0.5, 5000, 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::NotFound, || format!("iterate_F start {start}: {:?}", rep.status))?;
    }
    Ok("8/8 patterns contradicted; 20/20 starts NotFound".into())
}

fn infeasibility_gadget() -> Check {
    let mut notes = Vec::new();
    for &alpha in &[0.0, 0.3, 0.5, 0.9] {
        let frag = NetworkFragment::infeasibility(alpha).unwrap();
        let high = frag.clone().drive("u", 1.0).unwrap();
        let net = high.finalize().unwrap();
        let rep = enumerate_patterns(&net, 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Found, || format!("alpha={alpha}, r_u=1: {:?}", rep.status))?;
        let r = rep.r.unwrap();
        ensure(net.is_clearing(&r, 1e-9), || "reported vector does not clear".into())?;
        let rb = r[high.output("B").unwrap().index()];
        close(rb, 4.0 * alpha / 5.0, 1e-9, || format!("r_B at alpha={alpha}"))?;
        let low = frag.drive("u", 0.0).unwrap().finalize().unwrap();
        let rep = enumerate_patterns(&low, 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Infeasible, || format!("alpha={alpha}, r_u=0: {:?}", rep.status))?;
        notes.push(format!("{alpha}:{rb:.2}"));
    }
    Ok(format!("r_B by alpha {}; r_u=0 Infeasible for all", notes.join(" ")))
}

fn circuit_round_trip() -> Check {
    let k = ReductionConstants::default();
    let mut corpus = common::handmade_circuits();
    corpus.extend(common::random_circuits(12, 8, 11));
    ensure(corpus.len() >= 20, || "corpus too small".into())?;
    let budget = ApproxBudget::default();
    for (name, c) in &corpus {
        ensure(c.gates().len() <= 8, || format!("{name}: too many gates"))?;
        let brute = c.brute_solve().map_err(|e| format!("{name}: brute: {e}"))?;
        ensure(c.is_solution(&brute).unwrap(), || format!("{name}: brute answer is not a solution"))?;
        let art = compile_circuit(c).map_err(|e| format!("{name}: {e}"))?;
        let rep = solve_eps_approx(&art.network, k.eps, &budget).map_err(|e| format!("{name}: {e}"))?;
        ensure(rep.status == Status::Found, || format!("{name}: solve_eps_approx {:?}", rep.status))?;
        let values = extract_solution(&art, rep.r.as_ref().unwrap()).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.is_solution(&values).unwrap(), || {
            format!("{name}: decoded {values:?} is not a solution (brute found {brute:?})")
        })?;
    }
    Ok(format!("{} circuits solved and decoded", corpus.len()))
}

fn poly_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for t in 0..50 {
        let p = common::random_polynomial(&mut rng, 3);
        for _ in 0..10 {
            let x: Vec<f64> = (0..p.var_count()).map(|_| (rng.random_range(0..=10) as f64) / 10.0).collect();
            let art = build_poly_network_at(&p, &x).map_err(|e| e.to_string())?;
            let r = forward_eval(&art.network, &HashMap::new()).map_err(|e| e.to_string())?;
            let got = r[art.bank("o").unwrap()];
            let want = p.eval(&x).abs();
            worst = worst.max((got - want).abs());
            close(got, want, 1e-8, || format!("polynomial {t} {p:?} at {x:?}"))?;
        }
    }
    Ok(format!("500 evaluations, max error {worst:.1e}"))
}

fn root_free() -> SparsePolynomial {
    let q = SparsePolynomial::from_terms(1, &[(&[2], 1.0), (&[1], -1.0), (&[0], 0.3)]).unwrap();
    normalize_poly(&cdsnet::poly::quad_to_quartic(&[q]).unwrap()).unwrap()
}

fn hasclearing_fixtures() -> Check {
    let alpha = 0.5;
    let identity = SparsePolynomial::from_terms(1, &[(&[1], 1.0)]).unwrap();
    let art = compile_hasclearing_at(&identity, alpha, &[0.0]).map_err(|e| e.to_string())?;
    ensure(art.squaring_depth == Some(3), || format!("depth {:?}", art.squaring_depth))?;
    let rep = enumerate_patterns(&art.network, 1e-9).map_err(|e| e.to_string())?;
    ensure(rep.status == Status::Found, || format!("rooted fixture: {:?}", rep.status))?;
    ensure(art.network.is_clearing(rep.r.as_ref().unwrap(), 1e-9), || "rooted vector does not clear".into())?;

    let p = root_free();
    let mut max_sq = 0.0f64;
    for &x in &grid(21) {
        let gap = compile_gap_at(&p, alpha, &[x]).map_err(|e| e.to_string())?;
        let r = forward_eval(&gap.network, &HashMap::new()).map_err(|e| e.to_string())?;
        let sq = r[gap.bank("squared").unwrap()];
        close(r[gap.bank("o").unwrap()], p.eval(&[x]).abs(), 1e-9, || format!("|p({x})|"))?;
        ensure(sq <= 0.25, || format!("post-squaring value {sq} > 1/4 at x={x}"))?;
        max_sq = max_sq.max(sq);
        let tail = compile_hasclearing_tail(r[gap.bank("o").unwrap()], alpha).map_err(|e| e.to_string())?;
        let rep = enumerate_patterns(&tail.network, 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Infeasible, || format!("tail at x={x}: {:?}", rep.status))?;
        let full = compile_hasclearing_at(&p, alpha, &[x]).map_err(|e| e.to_string())?;
        let rep = enumerate_patterns(&full.network, 1e-9).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Infeasible, || format!("full network at x={x}: {:?}", rep.status))?;
    }
    Ok(format!(
        "rooted Found; root-free max post-squaring {max_sq:.4}, tail and full network Infeasible at 21/21 points"
    ))
}

fn cansurvive_fixtures() -> Check {
    let identity = SparsePolynomial::from_terms(1, &[(&[1], 1.0)]).unwrap();
    let rb = |p: &SparsePolynomial, x: f64| -> Result<f64, String> {
        let art = compile_cansurvive_at(p, &[x]).map_err(|e| e.to_string())?;
        let r = forward_eval(&art.network, &HashMap::new()).map_err(|e| e.to_string())?;
        ensure(art.network.is_clearing(&r, 1e-12), || "forward vector does not clear".into())?;
        Ok(r[art.bank("b").unwrap()])
    };
    ensure(rb(&identity, 0.0)? == 1.0, || "r_b != 1 at the root".into())?;
    for &x in grid(21).iter().skip(1) {
        close(rb(&identity, x)?, 1.0 - x, 1e-9, || format!("r_b at x={x}"))?;
    }
    let p = root_free();
    let mut best = 0.0f64;
    for &x in &grid(21) {
        let v = rb(&p, x)?;
        ensure(v < 1.0, || format!("root-free fixture survives at x={x}"))?;
        best = best.max(v);
    }
    Ok(format!("identity matches 1-|x|; root-free max r_b {best:.6}"))
}

fn almost_fixed_points() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let budget = ApproxBudget::default();
    let mut found = 0;
    for t in 0..30 {
        let net = common::random_network(&mut rng, 6);
        for &eps in &[0.05, 0.2] {
            if let Some(r) = find_g_almost_fixed_point(&net, eps, &budget).map_err(|e| e.to_string())? {
                let t_r = RecoveryVector::new(truncate_all(&r)).map_err(|e| e.to_string())?;
                ensure(net.is_eps_approx_clearing(&t_r, eps).unwrap(), || {
                    format!("network {t}, eps {eps}: truncation of {r:?} is not approximately clearing")
                })?;
                found += 1;
            }
        }
    }
    ensure(found > 0, || "no almost fixed point found".into())?;
    Ok(format!("{found}/60 searches found a point; every truncation passes"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("constants", constants_suite),
        ("gadget grid", gadget_grid),
        ("NAND/PURIFY decoding", nand_purify_decoding),
        ("network without clearing vector", no_clearing_fixture),
        ("infeasibility gadget", infeasibility_gadget),
        ("circuit round trip", circuit_round_trip),
        ("polynomial oracle", poly_oracle),
        ("HASCLEARING fixtures", hasclearing_fixtures),
        ("CANSURVIVE fixtures", cansurvive_fixtures),
        ("almost fixed points", almost_fixed_points),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
