//! Batch verification suites over seeded random instances.
//!
//! Three suites cover the identity checks (exact equalities between
//! independent formulas), the inequality checks, and the transportation
//! engine.  Each check reports its trial count, the worst violation seen
//! beyond tolerance, wall time, and a counterexample distribution when a
//! trial fails.  The CLI `verify` command and the acceptance tests both
//! drive these functions.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::corpus::{self, random_suite_instance};
use crate::info;
use crate::space::{Alphabet, JointDist, Mixture, ProductSpace};
use crate::transport;
use crate::{CoordSet, Result};

use std::sync::Arc;

/// Identity tolerance shared by the equality checks.
const IDENTITY_TOL: f64 = 1e-9;
/// Cell cap for randomly drawn suite instances.
const SUITE_CELL_CAP: usize = 256;

/// Parameters for the identity and inequality suites.
#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    /// Maximum number of coordinates (drawn in `2..=n_max`).
    pub n_max: usize,
    /// Maximum alphabet size (drawn in `2..=k_max`).
    pub k_max: usize,
    pub trials: u32,
    pub seed: u64,
}

impl SuiteParams {
    pub fn new(n_max: usize, k_max: usize, trials: u32, seed: u64) -> Self {
        Self {
            n_max,
            k_max,
            trials,
            seed,
        }
    }
}

/// Trial counts for the transportation suite.
#[derive(Debug, Clone, Copy)]
pub struct TransportSuiteParams {
    pub metric_triples: u32,
    pub oracle_instances: u32,
    pub tv_pairs: u32,
    pub bound_reports: u32,
    pub seed: u64,
}

impl TransportSuiteParams {
    /// Scales every count from one trial figure, as the CLI does.
    pub fn from_trials(trials: u32, seed: u64) -> Self {
        Self {
            metric_triples: trials,
            oracle_instances: trials.min(100),
            tv_pairs: trials,
            bound_reports: trials,
            seed,
        }
    }
}

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: u32,
    pub failures: u32,
    /// Worst violation beyond tolerance (<= 0 when every trial passed).
    pub worst: f64,
    pub elapsed: Duration,
    /// The first failing distribution, for diagnostics.
    pub counterexample: Option<JointDist>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// True when every check in the slice passed.
pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(CheckOutcome::passed)
}

fn run_check(
    name: &'static str,
    trials: u32,
    mut trial: impl FnMut(u32) -> (f64, Option<JointDist>),
) -> CheckOutcome {
    let start = Instant::now();
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut counterexample = None;
    for t in 0..trials {
        let (violation, witness) = trial(t);
        worst = worst.max(violation);
        if violation > 0.0 {
            failures += 1;
            if counterexample.is_none() {
                counterexample = witness;
            }
        }
    }
    CheckOutcome {
        name,
        trials,
        failures,
        worst: if worst == f64::NEG_INFINITY { 0.0 } else { worst },
        elapsed: start.elapsed(),
        counterexample,
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn instance(rng: &mut ChaCha20Rng, p: &SuiteParams) -> JointDist {
    random_suite_instance(rng, p.n_max, p.k_max, SUITE_CELL_CAP)
}

fn random_positive_refs(rng: &mut ChaCha20Rng, dist: &JointDist) -> Vec<Vec<f64>> {
    (0..dist.n())
        .map(|i| {
            let k = dist.space().size(i);
            let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        })
        .collect()
}

fn random_blocks(rng: &mut ChaCha20Rng, n: usize) -> Vec<Vec<usize>> {
    let m = rng.gen_range(1..=n);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..n {
        blocks[rng.gen_range(0..m)].push(i);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

fn random_order(rng: &mut ChaCha20Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    order
}

/// Equality checks: the alternative formulas, recursions, clumping
/// rules, reference-measure forms, and the Shearer-gap identities.
pub fn identities_suite(p: &SuiteParams) -> Vec<Result<CheckOutcome>> {
    let mut out = Vec::new();

    out.push(Ok(run_check("tc chain form (alt-formulae a)", p.trials, {
        let mut rng = rng_for(p.seed, 1);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let order = random_order(&mut rng, n);
            let mut chain = 0.0;
            let mut prefix = CoordSet::empty();
            for &i in &order {
                if !prefix.is_empty() {
                    chain += info::mutual_info(&d, CoordSet::singleton(i), prefix).unwrap();
                }
                prefix = prefix.insert(i);
            }
            let dev = (info::tc(&d) - chain).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("dtc chain form (alt-formulae b)", p.trials, {
        let mut rng = rng_for(p.seed, 2);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let order = random_order(&mut rng, n);
            let mut chain = 0.0;
            let mut prefix = CoordSet::empty();
            for &i in &order {
                let rest = CoordSet::singleton(i).complement(n).minus(prefix);
                if !rest.is_empty() {
                    chain +=
                        info::cond_mutual_info(&d, CoordSet::singleton(i), rest, prefix).unwrap();
                }
                prefix = prefix.insert(i);
            }
            let dev = (info::dtc(&d) - chain).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check(
        "tc + dtc = sum of coordinate informations (alt-formulae c)",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 3);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let n = d.n();
                let mut sum = 0.0;
                for i in 0..n {
                    sum += info::mutual_info(
                        &d,
                        CoordSet::singleton(i),
                        CoordSet::singleton(i).complement(n),
                    )
                    .unwrap();
                }
                let dev = (info::tc(&d) + info::dtc(&d) - sum).abs();
                (dev - IDENTITY_TOL, Some(d))
            }
        },
    )));

    out.push(Ok(run_check("tc recursion (recurse a)", p.trials, {
        let mut rng = rng_for(p.seed, 4);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let head = CoordSet::full(n - 1);
            let prev = if n >= 3 {
                info::tc(&d.marginal(head).unwrap())
            } else {
                0.0
            };
            let step = info::mutual_info(&d, CoordSet::singleton(n - 1), head).unwrap();
            let dev = (info::tc(&d) - prev - step).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("dtc recursion (recurse b)", p.trials, {
        let mut rng = rng_for(p.seed, 5);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let head = CoordSet::full(n - 1);
            let prev = if n >= 3 {
                info::dtc(&d.marginal(head).unwrap())
            } else {
                0.0
            };
            let mut cross = 0.0;
            for i in 0..n - 1 {
                let cond = head.minus(CoordSet::singleton(i));
                cross += info::cond_mutual_info(
                    &d,
                    CoordSet::singleton(i),
                    CoordSet::singleton(n - 1),
                    cond,
                )
                .unwrap();
            }
            let dev = (info::dtc(&d) - prev - cross).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("tc clumping rule", p.trials, {
        let mut rng = rng_for(p.seed, 6);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let blocks = random_blocks(&mut rng, d.n());
            let clumped = d.clump(&blocks).unwrap();
            let mut within = 0.0;
            for b in &blocks {
                if b.len() >= 2 {
                    let s = CoordSet::from_indices(b, d.n()).unwrap();
                    within += info::tc(&d.marginal(s).unwrap());
                }
            }
            let dev = (info::tc(&d) - info::tc(&clumped) - within).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("dtc clumping rule", p.trials, {
        let mut rng = rng_for(p.seed, 7);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let blocks = random_blocks(&mut rng, n);
            let clumped = d.clump(&blocks).unwrap();
            let mut within = 0.0;
            for b in &blocks {
                let s = CoordSet::from_indices(b, n).unwrap();
                within += info::cond_dtc(&d, s.complement(n)).unwrap();
            }
            let dev = (info::dtc(&d) - info::dtc(&clumped) - within).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("mini-clumping identity", p.trials, {
        let mut rng = rng_for(p.seed, 8);
        move |_| {
            // The last coordinate plays the role of the extra variable.
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let y = CoordSet::singleton(n - 1);
            let mi = info::mutual_info(&d, y.complement(n), y).unwrap();
            let cond = info::cond_dtc(&d, y).unwrap();
            let dev = (info::dtc(&d) - mi - cond).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check(
        "reference-measure tc (TC-DTC-and-D a, Csiszar)",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 9);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let refs = random_positive_refs(&mut rng, &d);
                let dev = (info::tc_ref(&d, &refs).unwrap() - info::tc(&d)).abs();
                (dev - IDENTITY_TOL, Some(d))
            }
        },
    )));

    out.push(Ok(run_check(
        "reference-measure dtc (TC-DTC-and-D b)",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 10);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let refs = random_positive_refs(&mut rng, &d);
                let dev = (info::dtc_ref(&d, &refs).unwrap() - info::dtc(&d)).abs();
                (dev - IDENTITY_TOL, Some(d))
            }
        },
    )));

    out.push(Ok(run_check("shearer gap at singletons = tc", p.trials, {
        let mut rng = rng_for(p.seed, 11);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let cover: Vec<CoordSet> = (0..d.n()).map(CoordSet::singleton).collect();
            let gap = info::shearer_gap(&d, &cover, 1).unwrap();
            let dev = (gap - info::tc(&d)).abs();
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check(
        "shearer gap at (n-1)-subsets scales to dtc",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 12);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let n = d.n();
                let cover = CoordSet::subsets_of_cardinality(n, n - 1);
                let gap = info::shearer_gap(&d, &cover, n - 1).unwrap();
                let dev = (gap * (n - 1) as f64 - info::dtc(&d)).abs();
                (dev - IDENTITY_TOL, Some(d))
            }
        },
    )));

    out.push(Ok(run_check("kl chain specializations", p.trials, {
        let mut rng = rng_for(p.seed, 13);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            // Random 2-block clumping; coordinate 1 is the base.
            let split = rng.gen_range(1..n);
            let left: Vec<usize> = (0..split).collect();
            let right: Vec<usize> = (split..n).collect();
            let lambda = d.clump(&[left, right]).unwrap();
            let dev = kl_chain_deviation(&mut rng, &lambda);
            (dev - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("disintegration reconstitutes", p.trials, {
        let mut rng = rng_for(p.seed, 14);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let card = rng.gen_range(1..n);
            let subsets = CoordSet::subsets_of_cardinality(n, card);
            let s = subsets[rng.gen_range(0..subsets.len())];
            let kernel = d.disintegrate(s).unwrap();
            let dev = kernel.mix_back().max_abs_diff(&d);
            (dev - 1e-10, Some(d))
        }
    })));

    out.push(Ok(run_check(
        "quantization composes under refinement",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 15);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let dev = quantization_composition_deviation(&mut rng, &d);
                (dev - 1e-12, Some(d))
            }
        },
    )));

    out.push(Ok(run_check("clumping preserves entropy", p.trials, {
        let mut rng = rng_for(p.seed, 16);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let blocks = random_blocks(&mut rng, d.n());
            let clumped = d.clump(&blocks).unwrap();
            let dev = (info::entropy(&d) - info::entropy(&clumped)).abs();
            (dev - 1e-10, Some(d))
        }
    })));

    out
}

fn kl_chain_deviation(rng: &mut ChaCha20Rng, lambda: &JointDist) -> f64 {
    let k0 = lambda.space().size(0);
    let k1 = lambda.space().size(1);
    let mu = info::subset_table(lambda, CoordSet::singleton(0));
    let nu = info::subset_table(lambda, CoordSet::singleton(1));
    let mut mu_ref: Vec<f64> = (0..k0).map(|_| rng.gen_range(0.05..1.0)).collect();
    let mut nu_ref: Vec<f64> = (0..k1).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s0: f64 = mu_ref.iter().sum();
    let s1: f64 = nu_ref.iter().sum();
    mu_ref.iter_mut().for_each(|x| *x /= s0);
    nu_ref.iter_mut().for_each(|x| *x /= s1);

    // Conditionals of the second block given the first.
    let cond = |x: usize| -> Vec<f64> {
        (0..k1)
            .map(|y| {
                if mu[x] > 0.0 {
                    lambda.prob(x * k1 + y) / mu[x]
                } else {
                    0.0
                }
            })
            .collect()
    };
    let kl = info::kl_of_tables;
    let product_ref: Vec<f64> = (0..k0 * k1)
        .map(|i| mu_ref[i / k1] * nu_ref[i % k1])
        .collect();
    let product_mu_nuref: Vec<f64> = (0..k0 * k1)
        .map(|i| mu[i / k1] * nu_ref[i % k1])
        .collect();

    let d_joint_ref = kl(lambda.pmf(), &product_ref);
    let d_mu = kl(&mu, &mu_ref);
    let d_nu = kl(&nu, &nu_ref);
    let avg_cond_ref: f64 = (0..k0)
        .filter(|&x| mu[x] > 0.0)
        .map(|x| mu[x] * kl(&cond(x), &nu_ref))
        .sum();
    let avg_cond_nu: f64 = (0..k0)
        .filter(|&x| mu[x] > 0.0)
        .map(|x| mu[x] * kl(&cond(x), &nu))
        .sum();
    let mi = info::mutual_info(lambda, CoordSet::singleton(0), CoordSet::singleton(1)).unwrap();

    let chain = (d_joint_ref - d_mu - avg_cond_ref).abs();
    let chain2 = (kl(lambda.pmf(), &product_mu_nuref) - avg_cond_ref).abs();
    let chain3 = (d_joint_ref - (d_mu + d_nu + mi)).abs();
    let chain4 = (mi - (avg_cond_ref - d_nu)).abs();
    let chain5 = (mi - avg_cond_nu).abs();
    chain.max(chain2).max(chain3).max(chain4).max(chain5)
}

fn quantization_composition_deviation(rng: &mut ChaCha20Rng, d: &JointDist) -> f64 {
    let n = d.n();
    // Coarse partition per coordinate, then a refinement of it; the
    // direct coarse quantization must equal coarsening the refinement.
    let mut coarse: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    for i in 0..n {
        let k = d.space().size(i);
        let cells = rng.gen_range(1..=k);
        let mut partition: Vec<Vec<usize>> = vec![Vec::new(); cells];
        for s in 0..k {
            partition[rng.gen_range(0..cells)].push(s);
        }
        partition.retain(|c| !c.is_empty());
        coarse.push(partition);
    }
    // Refinement: split each coarse cell into singletons with positive
    // probability, otherwise keep it.
    let mut fine: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    let mut fine_to_coarse: Vec<Vec<usize>> = Vec::with_capacity(n);
    for partition in &coarse {
        let mut cells = Vec::new();
        let mut map = Vec::new();
        for (ci, cell) in partition.iter().enumerate() {
            if cell.len() > 1 && rng.gen_bool(0.5) {
                for &s in cell {
                    cells.push(vec![s]);
                    map.push(ci);
                }
            } else {
                cells.push(cell.clone());
                map.push(ci);
            }
        }
        fine.push(cells);
        fine_to_coarse.push(map);
    }
    let direct = d.quantize(&coarse).unwrap();
    let refined = d.quantize(&fine).unwrap();
    // Coarsen the refined table by grouping fine cells.
    let grouping: Vec<Vec<Vec<usize>>> = fine_to_coarse
        .iter()
        .zip(&coarse)
        .map(|(map, partition)| {
            (0..partition.len())
                .map(|ci| {
                    map.iter()
                        .enumerate()
                        .filter(|(_, &c)| c == ci)
                        .map(|(f, _)| f)
                        .collect()
                })
                .collect()
        })
        .collect();
    let recoarsened = refined.quantize(&grouping).unwrap();
    direct
        .pmf()
        .iter()
        .zip(recoarsened.pmf())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Inequality checks: the basic sandwich, binary splits, quantization
/// monotonicity, tensorization, approximate concavity of DTC, and
/// Shearer non-negativity over random covers.
pub fn inequalities_suite(p: &SuiteParams) -> Vec<Result<CheckOutcome>> {
    let mut out = Vec::new();

    out.push(Ok(run_check("basic sandwich (basic-ineqs)", p.trials, {
        let mut rng = rng_for(p.seed, 31);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let mut max_mi: f64 = 0.0;
            for i in 0..n {
                max_mi = max_mi.max(
                    info::mutual_info(
                        &d,
                        CoordSet::singleton(i),
                        CoordSet::singleton(i).complement(n),
                    )
                    .unwrap(),
                );
            }
            let t = info::tc(&d);
            let dt = info::dtc(&d);
            let upper = (n - 1) as f64 * max_mi;
            let violation = (max_mi - t)
                .max(max_mi - dt)
                .max(t - upper)
                .max(dt - upper)
                .max(dt - (n - 1) as f64 * t)
                .max(t - (n - 1) as f64 * dt);
            (violation - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check(
        "binary split information below tc and dtc (clumping cor.)",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 32);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let n = d.n();
                let t = info::tc(&d);
                let dt = info::dtc(&d);
                let mut violation = f64::NEG_INFINITY;
                for bits in 1..(1u32 << n) - 1 {
                    let s = CoordSet::from_bits(bits);
                    let mi = info::mutual_info(&d, s, s.complement(n)).unwrap();
                    violation = violation.max(mi - t.min(dt));
                }
                (violation - IDENTITY_TOL, Some(d))
            }
        },
    )));

    out.push(Ok(run_check("quantization monotonicity", p.trials, {
        let mut rng = rng_for(p.seed, 33);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let n = d.n();
            let mut partitions = Vec::with_capacity(n);
            for i in 0..n {
                let k = d.space().size(i);
                let cells = rng.gen_range(1..=k);
                let mut partition: Vec<Vec<usize>> = vec![Vec::new(); cells];
                for s in 0..k {
                    partition[rng.gen_range(0..cells)].push(s);
                }
                partition.retain(|c| !c.is_empty());
                partitions.push(partition);
            }
            let q = d.quantize(&partitions).unwrap();
            let violation = (info::tc(&q) - info::tc(&d)).max(info::dtc(&q) - info::dtc(&d));
            (violation - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check("tensorization of divergence (MadTet)", p.trials, {
        let mut rng = rng_for(p.seed, 34);
        move |_| {
            let d = instance(&mut rng, &p.clone());
            let refs = random_positive_refs(&mut rng, &d);
            let mut rhs = 0.0;
            for i in 0..d.n() {
                rhs += info::avg_conditional_divergence(&d, i, &refs[i]);
            }
            let lhs = info::kl_of_tables(d.pmf(), &info::reference_product_table(&d, &refs));
            (lhs - rhs - IDENTITY_TOL, Some(d))
        }
    })));

    out.push(Ok(run_check(
        "dtc approximate concavity under mixing",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 35);
            move |t| {
                // Alternate planted product mixtures with generic ones.
                let n = rng.gen_range(2..=p.n_max.min(4));
                let k = rng.gen_range(2..=p.k_max.min(3));
                let comps = rng.gen_range(1..=4);
                let mixture = if t % 2 == 0 {
                    corpus::planted_product_mixture(n, k, comps, rng.gen()).unwrap()
                } else {
                    let space = Arc::new(
                        ProductSpace::power(Alphabet::range(k).unwrap(), n).unwrap(),
                    );
                    let comps: Vec<JointDist> = (0..comps)
                        .map(|_| {
                            let mut pmf: Vec<f64> =
                                (0..space.cells()).map(|_| rng.gen::<f64>()).collect();
                            let s: f64 = pmf.iter().sum();
                            pmf.iter_mut().for_each(|x| *x /= s);
                            JointDist::from_pmf(space.clone(), pmf).unwrap()
                        })
                        .collect();
                    let mut w: Vec<f64> = (0..comps.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    w.iter_mut().for_each(|x| *x /= s);
                    Mixture::new(w, comps, None).unwrap()
                };
                let mixed = mixture.mix();
                let mut avg_dtc = 0.0;
                for (w, c) in mixture.weights().iter().zip(mixture.components()) {
                    avg_dtc += w * info::dtc(c);
                }
                let mi = info::mixture_mutual_info(&mixture);
                let violation = info::dtc(&mixed) - (avg_dtc + mi);
                (violation - IDENTITY_TOL, Some(mixed))
            }
        },
    )));

    out.push(Ok(run_check(
        "shearer gap non-negative on random covers",
        p.trials,
        {
            let mut rng = rng_for(p.seed, 36);
            move |_| {
                let d = instance(&mut rng, &p.clone());
                let n = d.n();
                // A handful of random nonempty subsets; the multiplicity
                // is whatever the cover actually achieves.
                let families = rng.gen_range(n..=2 * n + 2);
                let mut cover = Vec::with_capacity(families);
                for _ in 0..families {
                    let bits = rng.gen_range(1..(1u32 << n));
                    cover.push(CoordSet::from_bits(bits));
                }
                let k = (0..n)
                    .map(|i| cover.iter().filter(|s| s.contains(i)).count())
                    .min()
                    .unwrap();
                if k == 0 {
                    return (f64::NEG_INFINITY, None);
                }
                let gap = info::shearer_gap(&d, &cover, k).unwrap();
                (-gap - 1e-10, Some(d))
            }
        },
    )));

    out
}

/// Transportation checks: metric axioms, agreement with the
/// vertex-enumeration oracle, domination by total variation, and the
/// transportation-entropy and robustness reports.
pub fn transport_suite(p: &TransportSuiteParams) -> Vec<Result<CheckOutcome>> {
    let mut out = Vec::new();

    out.push(Ok(run_check("transport metric axioms", p.metric_triples, {
        let mut rng = rng_for(p.seed, 51);
        move |_| {
            let space = random_small_space(&mut rng, 128);
            let a = random_on(&mut rng, &space);
            let b = random_on(&mut rng, &space);
            let c = random_on(&mut rng, &space);
            let (dab, _) = transport::transport_distance(&a, &b).unwrap();
            let (dba, _) = transport::transport_distance(&b, &a).unwrap();
            let (dbc, _) = transport::transport_distance(&b, &c).unwrap();
            let (dac, _) = transport::transport_distance(&a, &c).unwrap();
            let (daa, _) = transport::transport_distance(&a, &a).unwrap();
            let tv = transport::total_variation(&a, &b).unwrap();
            let violation = ((dab - dba).abs() - 1e-9)
                .max(dac - dab - dbc - 1e-8)
                .max(daa - 1e-9)
                // With discrete metrics any movement costs at least 1/n.
                .max(tv / space.n() as f64 - dab - 1e-9);
            (violation, Some(a))
        }
    })));

    out.push(Ok(run_check(
        "lp optimum matches vertex enumeration",
        p.oracle_instances,
        {
            let mut rng = rng_for(p.seed, 52);
            move |t| {
                let dyadic = t % 2 == 0;
                let (a, b, costs) = random_lp_instance(&mut rng, dyadic);
                let sol = transport::solve_raw(&a, &b, &costs);
                let brute = transport::brute_force_transport(&a, &b, &costs).unwrap();
                ((sol - brute).abs() - 1e-10, None)
            }
        },
    )));

    out.push(Ok(run_check(
        "transport dominated by total variation",
        p.tv_pairs,
        {
            let mut rng = rng_for(p.seed, 53);
            move |_| {
                let space = random_small_space(&mut rng, 128);
                let a = random_on(&mut rng, &space);
                let b = random_on(&mut rng, &space);
                let (d, _) = transport::transport_distance(&a, &b).unwrap();
                let tv = transport::total_variation(&a, &b).unwrap();
                (d - tv - 1e-10, Some(a))
            }
        },
    )));

    out.push(Ok(run_check(
        "transportation-entropy bound (Marton)",
        p.bound_reports,
        {
            let mut rng = rng_for(p.seed, 54);
            move |_| {
                let space = random_small_space(&mut rng, 128);
                let a = random_on(&mut rng, &space);
                let r = transport::marton_check(&a, None).unwrap();
                (r.lhs - r.rhs - 1e-9, Some(a))
            }
        },
    )));

    out.push(Ok(run_check("tc robustness bound (Fano)", p.bound_reports, {
        let mut rng = rng_for(p.seed, 55);
        move |_| {
            let space = random_small_space(&mut rng, 128);
            let a = random_on(&mut rng, &space);
            let b = random_on(&mut rng, &space);
            let r = transport::fano_tc_bound(&a, &b).unwrap();
            (r.tc_gap - r.bound - 1e-9, Some(a))
        }
    })));

    out
}

fn random_small_space(rng: &mut ChaCha20Rng, cell_cap: usize) -> Arc<ProductSpace> {
    loop {
        let n = rng.gen_range(2..=5);
        let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
        let cells: usize = sizes.iter().product();
        if cells > cell_cap {
            continue;
        }
        return Arc::new(
            ProductSpace::new(
                sizes
                    .iter()
                    .map(|&k| Alphabet::range(k).expect("k >= 2"))
                    .collect(),
            )
            .expect("under cap"),
        );
    }
}

fn random_on(rng: &mut ChaCha20Rng, space: &Arc<ProductSpace>) -> JointDist {
    let mut pmf: Vec<f64> = (0..space.cells()).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|x| *x /= s);
    JointDist::from_pmf(space.clone(), pmf).unwrap()
}

/// A raw LP instance with at most 6 atoms per side.  Dyadic instances use
/// Hamming-style fractional costs (integer pivoting path); the rest draw
/// arbitrary costs in `[0, 1]` (floating pivoting path).
fn random_lp_instance(rng: &mut ChaCha20Rng, dyadic: bool) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = rng.gen_range(1..=6);
    let n = rng.gen_range(1..=6);
    let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    a.iter_mut().for_each(|x| *x /= sa);
    b.iter_mut().for_each(|x| *x /= sb);
    let costs: Vec<f64> = (0..m * n)
        .map(|_| {
            if dyadic {
                rng.gen_range(0..=4) as f64 / 4.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    (a, b, costs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_pass_on_a_small_run() {
        let p = SuiteParams::new(4, 3, 25, 7);
        for outcome in identities_suite(&p) {
            let o = outcome.unwrap();
            assert!(o.passed(), "{} failed: worst {}", o.name, o.worst);
        }
    }

    #[test]
    fn inequalities_pass_on_a_small_run() {
        let p = SuiteParams::new(4, 3, 25, 9);
        for outcome in inequalities_suite(&p) {
            let o = outcome.unwrap();
            assert!(o.passed(), "{} failed: worst {}", o.name, o.worst);
        }
    }

    #[test]
    fn transport_suite_passes_on_a_small_run() {
        let p = TransportSuiteParams {
            metric_triples: 10,
            oracle_instances: 10,
            tv_pairs: 10,
            bound_reports: 10,
            seed: 11,
        };
        for outcome in transport_suite(&p) {
            let o = outcome.unwrap();
            assert!(o.passed(), "{} failed: worst {}", o.name, o.worst);
        }
    }
}
