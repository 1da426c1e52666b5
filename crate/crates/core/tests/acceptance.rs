//! Acceptance criteria, one line of output per criterion.
//!
//! Run with `cargo test --test acceptance`. Exits non-zero if any criterion
//! fails or exceeds its time limit.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bmfeas::constraints::{compile_system, ConstraintSystem, Dataset, HiddenAssignment};
use bmfeas::eval::noise_sweep;
use bmfeas::feasibility::{fm_feasible, lp_feasible, solve, verify, verify_system, SolverConfig, Status};
use bmfeas::fixtures;
use bmfeas::model::{complete_pattern, Machine, ParamId, ParamLayout, ParameterVector, Pattern, Topology, UpdateSchedule};
use bmfeas::posterior::{build_posterior, draw_parameter, sample_from_inits, PosteriorEntry, SamplerConfig, TailMode};
use bmfeas::rational::{ratio, rational_from_i64, Rational};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Id, title, time limit in seconds, check.
type Criterion = (&'static str, &'static str, u64, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ac1() -> Outcome {
    let result = solve(&fixtures::fig2a(), &fixtures::xor_dataset(), &SolverConfig::default())
        .map_err(|e| e.to_string())?;
    check(result.status == Status::Infeasible, format!("status {}", result.status.as_str()))?;
    check(result.witness.is_none(), "infeasible result carries a witness")?;
    Ok(format!("infeasible after {} leaf", result.leaves_explored))
}

fn ac2() -> Outcome {
    let topo = fixtures::fig2b();
    let data = fixtures::xor_dataset();
    let result = solve(&topo, &data, &SolverConfig::default()).map_err(|e| e.to_string())?;
    check(result.status == Status::Feasible, format!("status {}", result.status.as_str()))?;
    check(result.leaves_explored <= 16, format!("{} leaves explored", result.leaves_explored))?;
    let w = result.witness.ok_or("no witness")?;
    check(verify(&topo, &data, &w.hidden, &w.params, &w.margin), "witness fails verification")?;
    check(w.margin >= ratio(1, 1000), "margin below the minimum")?;
    Ok(format!(
        "feasible, hidden {}, margin {}, {} leaves",
        w.hidden.to_bit_string(),
        w.margin,
        result.leaves_explored
    ))
}

fn ac3() -> Outcome {
    let topo = fixtures::fig2c();
    let data = fixtures::xor_dataset();
    let result = solve(&topo, &data, &SolverConfig::default()).map_err(|e| e.to_string())?;
    check(result.status == Status::Feasible, format!("status {}", result.status.as_str()))?;
    let w = result.witness.ok_or("no witness")?;
    check(verify(&topo, &data, &w.hidden, &w.params, &w.margin), "witness fails verification")?;
    let reference = fixtures::reference_solution();
    check(
        verify(&topo, &data, &fixtures::and_column(), &reference, &ratio(1, 4)),
        "reference solution fails at margin 1/4",
    )?;
    Ok(format!("feasible, hidden {}; reference solution verifies at 1/4", w.hidden.to_bit_string()))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-4..=4), rng.gen_range(1..=4))
}

fn ac4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = SolverConfig::default();
    let systems = 250;
    let mut feasible = 0;
    for k in 0..systems {
        let vars = rng.gen_range(1..=6);
        let rows = rng.gen_range(1..=12);
        let layout = ParamLayout::new((0..vars).map(|unit| ParamId::Bias { unit }).collect())
            .expect("distinct ids");
        let dense: Vec<Vec<Rational>> = (0..rows)
            .map(|_| (0..vars).map(|_| random_rational(&mut rng)).collect())
            .collect();
        let sys = ConstraintSystem::from_dense(layout, &dense).map_err(|e| e.to_string())?;
        let lp = lp_feasible(&sys, &cfg).map_err(|e| e.to_string())?;
        let fm = fm_feasible(&sys, &cfg).map_err(|e| e.to_string())?;
        check(lp.is_some() == fm.is_some(), format!("system {k}: simplex and elimination disagree"))?;
        if let Some((params, margin)) = &lp {
            check(verify_system(&sys, params, margin), format!("system {k}: simplex witness fails"))?;
            feasible += 1;
        }
        if let Some(point) = &fm {
            check(
                verify_system(&sys, point, &cfg.min_margin),
                format!("system {k}: elimination witness fails"),
            )?;
        }
    }
    Ok(format!("{systems} systems agree ({feasible} feasible)"))
}

fn ac5() -> Outcome {
    let entry = PosteriorEntry {
        beta: rational_from_i64(-1),
        inv_alpha: 0.1,
    };
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sum = 0.0;
    for _ in 0..n {
        let w = draw_parameter(&entry, rng.gen(), TailMode::Literal).map_err(|e| e.to_string())?;
        check(w >= -1.0, format!("draw {w} below beta"))?;
        sum += w;
    }
    let mean = sum / n as f64;
    let se = 0.1 / (n as f64).sqrt();
    check((mean + 0.9).abs() <= 3.0 * se, format!("mean {mean:.5}, allowed {:.5}", 3.0 * se))?;
    Ok(format!("mean {mean:.5} (target -0.9, 3 se = {:.5})", 3.0 * se))
}

fn ac6() -> Outcome {
    let epsilons = [0.1, 0.5, 2.0];
    let targets = [1.0, 0.9, 0.6];
    let seeds = [1, 2, 3];
    let report = noise_sweep(
        &fixtures::reference_solution(),
        &fixtures::fig2c(),
        &fixtures::xor_dataset(),
        &epsilons,
        1500,
        &seeds,
        &SamplerConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let means = report.means();
    for (mean, target) in means.iter().zip(targets) {
        check(
            (mean.mean_in_dataset_fraction - target).abs() <= 0.15,
            format!("epsilon {}: {:.3} vs {target}", mean.epsilon, mean.mean_in_dataset_fraction),
        )?;
    }
    let monotone = seeds
        .iter()
        .filter(|&&seed| {
            let fractions = report.fractions_for_seed(seed);
            fractions.windows(2).all(|w| w[1].1 <= w[0].1)
        })
        .count();
    check(monotone >= 2, format!("only {monotone} of 3 seeds non-increasing"))?;
    let summary: Vec<String> = means
        .iter()
        .map(|m| format!("{}: {:.3}", m.epsilon, m.mean_in_dataset_fraction))
        .collect();
    Ok(format!("{}; {monotone}/3 seeds non-increasing", summary.join(", ")))
}

fn random_topology(rng: &mut ChaCha8Rng) -> Topology {
    let visible = rng.gen_range(1..=3);
    let hidden = rng.gen_range(0..=2);
    let n = visible + hidden;
    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).map(move |d| (s, d)))
        .filter(|(s, d)| s != d)
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    Topology::new(visible, hidden, arcs).expect("valid random topology")
}

fn random_params(rng: &mut ChaCha8Rng, topo: &Topology) -> ParameterVector {
    let layout = topo.param_layout();
    let values = (0..layout.len()).map(|_| random_rational(rng)).collect();
    ParameterVector::from_layout(&layout, values).expect("one value per column")
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let target = 600;
    let (mut accepted, mut fixed, mut attempts) = (0, 0, 0);
    while accepted < target {
        attempts += 1;
        check(attempts < 100_000, "could not generate enough triples")?;
        let topo = random_topology(&mut rng);
        if topo.constrained_units().is_empty() {
            continue;
        }
        let params = random_params(&mut rng, &topo);
        let machine = Machine::exact(&topo, &params).map_err(|e| e.to_string())?;
        let n = topo.num_units();
        let mut pattern = Pattern::new((0..n).map(|_| rng.gen_bool(0.5)).collect());
        if attempts % 2 == 0 {
            let done = complete_pattern(&params, &topo, &pattern, 20, UpdateSchedule::Synchronous)
                .map_err(|e| e.to_string())?;
            pattern = done.pattern;
        }
        let mut zero_activation = false;
        for unit in topo.constrained_units() {
            if machine.activation_input(&pattern, unit).map_err(|e| e.to_string())?.is_zero() {
                zero_activation = true;
            }
        }
        if zero_activation {
            continue;
        }
        let data = Dataset::new(vec![pattern.bits()[..topo.num_visible()].to_vec()]).map_err(|e| e.to_string())?;
        let hidden = HiddenAssignment::new(1, topo.num_hidden(), pattern.bits()[topo.num_visible()..].to_vec())
            .map_err(|e| e.to_string())?;
        let sys = compile_system(&topo, &data, &hidden).map_err(|e| e.to_string())?;
        let strict = sys
            .slacks(&params)
            .map_err(|e| e.to_string())?
            .iter()
            .all(|s| *s < Rational::zero());
        let is_fixed = machine.is_fixed_point(&pattern).map_err(|e| e.to_string())?;
        check(strict == is_fixed, format!("triple {accepted}: strict {strict}, fixed point {is_fixed}"))?;
        accepted += 1;
        fixed += usize::from(is_fixed);
    }
    Ok(format!("{accepted} triples agree ({fixed} fixed points)"))
}

fn ac8() -> Outcome {
    let topo = fixtures::fig2c();
    let params = fixtures::reference_solution();
    let machine = Machine::exact(&topo, &params).map_err(|e| e.to_string())?;
    let inits: Vec<Pattern> = (0..16).map(|code| Pattern::from_index(code, 4)).collect();
    let mut fixed_points = BTreeSet::new();
    for p in &inits {
        if machine.is_fixed_point(p).map_err(|e| e.to_string())? {
            fixed_points.insert(p.to_bit_string());
        }
    }
    let expected: BTreeSet<String> = ["0000", "0110", "1010", "1101"].into_iter().map(String::from).collect();
    check(fixed_points == expected, format!("fixed points {fixed_points:?}"))?;

    let cfg = SamplerConfig {
        epsilon: 1e-6,
        ..SamplerConfig::default()
    };
    let spec = build_posterior(&params, &cfg).map_err(|e| e.to_string())?;
    let batch = sample_from_inits(&spec, &topo, &cfg, &inits).map_err(|e| e.to_string())?;
    let emitted: BTreeSet<String> = batch.full_patterns.iter().map(Pattern::to_bit_string).collect();
    check(emitted == fixed_points, format!("emitted {emitted:?}"))?;
    let data = fixtures::xor_dataset();
    check(
        batch.visible_patterns.iter().all(|v| data.contains(v.bits())),
        "a visible pattern lies outside the data",
    )?;
    check(batch.converged_flags.iter().all(|&c| c), "a completion did not converge")?;
    Ok(format!("emitted set {emitted:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1", "two-arc XOR network is infeasible", 1, ac1),
        ("AC2", "hidden-unit XOR network is feasible", 1, ac2),
        ("AC3", "fully connected XOR network is feasible", 1, ac3),
        ("AC4", "simplex and elimination agree on random systems", 60, ac4),
        ("AC5", "exponential draws have the stated mean", 5, ac5),
        ("AC6", "noise sweep matches the reference fractions", 30, ac6),
        ("AC7", "strict satisfaction matches fixed points", 10, ac7),
        ("AC8", "near-zero noise emits exactly the fixed points", 5, ac8),
    ];
    let mut failures = 0;
    for (id, title, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit}s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail} ({elapsed:.2?})"),
            Err(reason) => {
                failures += 1;
                println!("[FAIL] {id} {title}: {reason} ({elapsed:.2?})");
            }
        }
    }
    if failures == 0 {
        println!("all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
