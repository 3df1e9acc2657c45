//! Numerical verification criteria: adaptedness replay, moment oracles, and
//! the statistical Markov / local-independence checks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::model::parse_model;
use crate::partition::TimeVal;
use crate::sim::stats::{ci_test, local_independence_test, Eval, DEFAULT_ALPHA};
use crate::sim::{check_adaptedness, simulate, PathEnsemble, Scheme, SimConfig};
use crate::timeops::{subsample_graph, time_split_graph, SplitMeta, SplitMode};
use crate::verify::graphs::{linear4_subsampled_universe, sigma_separated_triples};
use crate::verify::{fixtures, oracle, run, CriterionOutcome, VerifyOptions};

pub fn c10_adaptedness(opts: VerifyOptions) -> CriterionOutcome {
    run(10, "adaptedness of the integration scheme", |c| {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let dt = if opts.quick { 1e-2 } else { 1e-3 };
        let cfg = SimConfig::new(dt, 3, 10);
        let steps = (1.0 / dt).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut ok = 0usize;
        let cuts = 10usize;
        for _ in 0..cuts {
            let k = rng.random_range(0..=steps);
            let t_cut = k as f64 * dt;
            if check_adaptedness(&sys, &cfg, t_cut).unwrap() {
                ok += 1;
            }
        }
        c.require(
            ok == cuts,
            format!("paths agree bit-exactly up to every cut ({ok}/{cuts})"),
        );

        let mut broken = cfg.clone();
        broken.scheme = Scheme::EulerMaruyamaLookahead;
        c.require(
            !check_adaptedness(&sys, &broken, 0.5).unwrap(),
            "look-ahead mutation of the scheme is caught",
        );
    })
}

pub fn c11_moments(opts: VerifyOptions) -> CriterionOutcome {
    run(11, "moment oracles for diffusion and jumps", |c| {
        let n_paths = if opts.quick { 2_000 } else { 10_000 };
        let dt = 1e-3;

        // Mean-reverting diffusion vs closed-form moments.
        let sys = parse_model(fixtures::OU_MODEL).unwrap().system;
        let ens: PathEnsemble<f64> = simulate(&sys, &SimConfig::new(dt, n_paths, 11)).unwrap();
        let last = ens.steps();
        let xs = ens.column(0, last);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let (m0, v0) = oracle::ou_moments(1.0, 1.0, 0.5, 2.0, 1.0);
        let se_mean = (v0 / n).sqrt();
        let se_var = v0 * (2.0 / (n - 1.0)).sqrt();
        c.note(format!(
            "diffusion: mean {mean:.5} (expected {m0:.5} ± {:.5}), variance {var:.5} (expected {v0:.5} ± {:.5})",
            3.0 * se_mean,
            3.0 * se_var
        ));
        c.require((mean - m0).abs() <= 3.0 * se_mean, "terminal mean within 3 standard errors");
        c.require((var - v0).abs() <= 3.0 * se_var, "terminal variance within 3 standard errors");

        // Pure jump counter vs the Poisson law.
        let sys = parse_model(fixtures::POISSON_COUNTER_MODEL).unwrap().system;
        let ens: PathEnsemble<f64> = simulate(&sys, &SimConfig::new(dt, n_paths, 12)).unwrap();
        let counts = ens.column(0, ens.steps());
        let lambda = 2.0;
        let max_bin = 8usize;
        let mut observed = vec![0usize; max_bin + 2];
        for v in &counts {
            let k = v.round() as usize;
            observed[k.min(max_bin + 1)] += 1;
        }
        let mut chi2 = 0.0;
        let mut dof = 0usize;
        let mut tail_expected = 1.0;
        for k in 0..=max_bin {
            let p = oracle::poisson_pmf(lambda, k);
            tail_expected -= p;
            let e = p * n;
            chi2 += (observed[k] as f64 - e).powi(2) / e;
            dof += 1;
        }
        let e_tail = tail_expected * n;
        chi2 += (observed[max_bin + 1] as f64 - e_tail).powi(2) / e_tail;
        let dist = ChiSquared::new(dof as f64).unwrap();
        let p_value = 1.0 - dist.cdf(chi2);
        c.note(format!("jump counter: chi2 {chi2:.3} on {dof} dof, p = {p_value:.4}"));
        c.require(p_value > 0.01, "terminal counts consistent with the Poisson law");
    })
}

pub fn c12_markov_property(opts: VerifyOptions) -> CriterionOutcome {
    run(12, "statistical Markov property on samples", |c| {
        let sys = parse_model(fixtures::LINEAR4_MODEL).unwrap().system;
        let aug = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let (s, t) = (0.4, 0.8);
        let sg = time_split_graph(
            &aug,
            &meta,
            &[TimeVal::new(s), TimeVal::new(t)],
            sys.horizon,
            SplitMode::Strict,
        )
        .unwrap();
        let sub = subsample_graph(&sg).unwrap();
        let names: Vec<String> = sub.nodes().map(|(_, n)| n.name()).collect();
        let universe = linear4_subsampled_universe(&names);
        let triples = sigma_separated_triples(&sub, &universe, 2);
        c.note(format!(
            "{} sigma-separated triples over {} observable nodes",
            triples.len(),
            universe.len()
        ));
        if triples.is_empty() {
            c.require(false, "expected a nonempty set of separated triples");
            return;
        }

        let to_eval = |name: &str| -> Eval {
            let (process, time) = split_node_name(name);
            Eval::new(process, time)
        };

        let reps = if opts.quick { 20 } else { 200 };
        let n_paths = if opts.quick { 4_000 } else { 20_000 };
        let mut rejections = vec![0usize; triples.len()];
        let mut dep_rejections = 0usize;
        let mut dep_p_sum = 0.0f64;
        for rep in 0..reps {
            let cfg = SimConfig::new(0.01, n_paths, 1_000 + rep as u64);
            let ens: PathEnsemble<f64> = simulate(&sys, &cfg).unwrap();
            for (i, (a, b, cs)) in triples.iter().enumerate() {
                let cset: Vec<Eval> = cs.iter().map(|n| to_eval(n)).collect();
                let out = ci_test(
                    &ens,
                    &[to_eval(a)],
                    &[to_eval(b)],
                    &cset,
                    DEFAULT_ALPHA,
                )
                .unwrap();
                if !out.independent {
                    rejections[i] += 1;
                }
            }
            // Faithfulness side, reported only: the initial values are
            // d-separated by whole observed paths in the collapsed graph but
            // sigma-connected through the cycle; on a finite grid the
            // dependence is expected to show.
            let out = ci_test(
                &ens,
                &[Eval::new("X1", 0.0)],
                &[Eval::new("X2", 0.0)],
                &[
                    Eval::new("X1", s),
                    Eval::new("X2", s),
                    Eval::new("X1", t),
                    Eval::new("X2", t),
                ],
                DEFAULT_ALPHA,
            )
            .unwrap();
            if !out.independent {
                dep_rejections += 1;
            }
            dep_p_sum += out.p_value;
        }

        let total: usize = rejections.iter().sum();
        let aggregate = total as f64 / (reps * triples.len()) as f64;
        let worst = rejections.iter().copied().max().unwrap_or(0);
        let worst_rate = worst as f64 / reps as f64;
        c.note(format!(
            "aggregate rejection rate {aggregate:.4} over {} tests; worst per-triple rate {worst_rate:.3}",
            reps * triples.len()
        ));
        c.require(
            aggregate <= 2.0 * DEFAULT_ALPHA,
            "aggregate rejection rate within twice the nominal level",
        );
        // The per-triple binomial bound only concentrates with the full
        // repetition count.
        let per_triple_bound = if opts.quick { 0.25 } else { 0.05 };
        c.require(
            worst_rate <= per_triple_bound,
            "no single triple rejects beyond the uniform bound",
        );
        c.note(format!(
            "cycle-induced dependence of the initial values given sampled paths: detected in {dep_rejections}/{reps} repetitions (mean p = {:.4}); faithfulness-dependent, reported not asserted",
            dep_p_sum / reps as f64
        ));
    })
}

pub fn c13_local_independence(opts: VerifyOptions) -> CriterionOutcome {
    run(13, "statistical local-independence certificates", |c| {
        use crate::independence::{local_independence_graph, sigma_li_query};

        // The marginalised linear model satisfies the independent-integrator
        // assumption; its two-node cyclic graph yields no certificates, which
        // the criterion records, so the three-process chain carries the
        // statistical content.
        let sys = parse_model(fixtures::LINEAR4_MODEL).unwrap().system;
        let marg = sys
            .graph_of_sdes()
            .latent_project_by_name(&["X3", "X4"])
            .unwrap();
        let lig = local_independence_graph(&marg);
        c.require(
            lig.guarantee,
            "marginalised model passes independent integrators",
        );
        let mut marg_certificates = 0usize;
        for (a, b) in [("X1", "X2"), ("X2", "X1")] {
            if sigma_li_query(&lig, &[a], &[b], &[]).unwrap() {
                marg_certificates += 1;
            }
        }
        c.note(format!(
            "marginalised two-node cycle yields {marg_certificates} certificates (both directions adjacent)"
        ));

        let full_lig = local_independence_graph(&sys.graph_of_sdes());
        c.require(
            !full_lig.guarantee,
            "unmarginalised model is rejected (endogenous integrator, shared driver)",
        );

        // Chain fixture: enumerate every certificate over singleton pairs
        // with conditioning sets of size at most one.
        let chain = parse_model(fixtures::CHAIN3_MODEL).unwrap().system;
        let chain_lig = local_independence_graph(&chain.graph_of_sdes());
        c.require(chain_lig.guarantee, "chain passes independent integrators");
        let names = ["A", "B", "C"];
        let mut certificates: Vec<(String, String, Vec<String>)> = Vec::new();
        for a in names {
            for b in names {
                if a == b {
                    continue;
                }
                let rest: Vec<&str> = names.iter().filter(|n| **n != a && **n != b).copied().collect();
                for cs in [vec![], rest.clone()] {
                    if sigma_li_query(&chain_lig, &[a], &[b], &cs).unwrap() {
                        certificates.push((
                            a.to_string(),
                            b.to_string(),
                            cs.iter().map(|s| s.to_string()).collect(),
                        ));
                    }
                }
            }
        }
        c.note(format!("chain certificates: {certificates:?}"));
        c.require(!certificates.is_empty(), "chain yields certificates");

        let reps = if opts.quick { 20 } else { 200 };
        let n_paths = if opts.quick { 1_000 } else { 2_000 };
        let mut rejections = vec![0usize; certificates.len()];
        let mut power_hits = 0usize;
        let mut marg_power_hits = 0usize;
        for rep in 0..reps {
            let cfg = SimConfig::new(0.02, n_paths, 3_000 + rep as u64);
            let ens: PathEnsemble<f64> = simulate(&chain, &cfg).unwrap();
            for (i, (a, b, cs)) in certificates.iter().enumerate() {
                let crefs: Vec<&str> = cs.iter().map(|s| s.as_str()).collect();
                let out =
                    local_independence_test(&ens, &[a], &[b], &crefs, 2, DEFAULT_ALPHA).unwrap();
                if !out.holds {
                    rejections[i] += 1;
                }
            }
            // Power side, reported: B locally drives C.
            let out = local_independence_test(&ens, &["B"], &["C"], &[], 2, DEFAULT_ALPHA).unwrap();
            if !out.holds {
                power_hits += 1;
            }
            // Reported: on the marginalised linear model, X2 influences X1.
            let lcfg = SimConfig::new(0.02, n_paths, 4_000 + rep as u64);
            let lens: PathEnsemble<f64> = simulate(&sys, &lcfg).unwrap();
            let out = local_independence_test(&lens, &["X2"], &["X1"], &[], 2, DEFAULT_ALPHA)
                .unwrap();
            if !out.holds {
                marg_power_hits += 1;
            }
        }
        let per_cert_bound = if opts.quick { 0.25 } else { 2.0 * DEFAULT_ALPHA };
        for (i, (a, b, cs)) in certificates.iter().enumerate() {
            let rate = rejections[i] as f64 / reps as f64;
            c.require(
                rate <= per_cert_bound,
                format!("certificate {a} -/-> {b} | {cs:?} rejected at rate {rate:.3}"),
            );
        }
        c.note(format!(
            "coupling detected (reported): B drives C in {power_hits}/{reps} repetitions; X2 drives X1 on the marginalised model in {marg_power_hits}/{reps}"
        ));
    })
}

/// `X1^{0.4}` -> ("X1", 0.4); `X1^0` -> ("X1", 0.0); `X1` -> ("X1", 0.0).
fn split_node_name(name: &str) -> (String, f64) {
    match name.split_once('^') {
        None => (name.to_string(), 0.0),
        Some((process, rest)) => {
            let t = rest
                .trim_start_matches('{')
                .trim_end_matches('}')
                .parse::<f64>()
                .unwrap_or(0.0);
            (process.to_string(), t)
        }
    }
}
