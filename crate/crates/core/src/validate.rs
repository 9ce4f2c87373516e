//! Built-in numerical self-checks.
//!
//! Each check exercises one correctness property of the library end to end
//! and reports pass/fail with a one-line detail. The `quick` flag shrinks
//! sample counts for a fast smoke run; the full run uses sizes at which the
//! statistical checks have comfortable margins.
//!
//! Seeds are fixed constants, so two runs of the suite see exactly the same
//! random instances.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::channel::{composite_channel, expected_channel_power};
use crate::experiments::{evaluate_trial, sample_mu, Scenario};
use crate::num::wrap_angle;
use crate::optimizer::{
    branch_and_bound, brute_force, candidate_sets, continuous_optimum, continuous_solution,
    nearest_solution, node_upper_bound, BnbNode, BnbOptions, CandidateMode, ElementPhasor,
    InitMode, PhaseProblem,
};

/// Relative tolerance for objective-value comparisons between solvers.
const POWER_REL_TOL: f64 = 1e-12;

/// Result of one self-check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of the whole suite.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every check and collects the outcomes.
pub fn run(quick: bool) -> ValidationReport {
    ValidationReport {
        checks: vec![
            check_search_agreement(quick),
            check_co_phasing(quick),
            check_bound_admissibility(quick),
            check_power_moment(quick),
            check_bracketing_audit(quick),
            check_solver_ordering(quick),
            check_trial_reproducibility(quick),
            check_expected_se_ordering(quick),
        ],
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn random_problem(rng: &mut ChaCha8Rng, m: usize, s_a: u32) -> PhaseProblem<f64> {
    let elements = (0..m)
        .map(|_| ElementPhasor {
            amplitude: rng.random_range(0.01..1.0),
            base_phase: rng.random_range(0.0..TAU),
        })
        .collect();
    PhaseProblem::new(
        rng.random_range(0.0..0.5),
        rng.random_range(0.0..TAU),
        elements,
        s_a,
        1.0e6,
    )
    .expect("randomly generated problems are valid")
}

/// Caps the element count so full enumeration stays below 2^18 leaves.
fn clamp_for_enumeration(m: usize, s_a: u32, mode: CandidateMode) -> usize {
    let per_element = match mode {
        CandidateMode::Bracketing => 2u64,
        CandidateMode::Full => u64::from(s_a),
    };
    let mut budget = 1u64 << 18;
    let mut max_m = 0;
    while budget >= per_element {
        budget /= per_element;
        max_m += 1;
    }
    m.min(max_m)
}

/// The exact search must reproduce plain enumeration: same argmax vector,
/// same objective value.
fn check_search_agreement(quick: bool) -> CheckOutcome {
    let n = if quick { 30 } else { 300 };
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_gap = 0.0f64;
    for i in 0..n {
        let s_a = [2u32, 4, 8][i % 3];
        for mode in [CandidateMode::Bracketing, CandidateMode::Full] {
            let m = clamp_for_enumeration(1 + i % 8, s_a, mode);
            let p = random_problem(&mut rng, m, s_a);
            let bb = match branch_and_bound(&p, &BnbOptions {
                mode,
                init: InitMode::Nearest,
            }) {
                Ok(r) => r,
                Err(e) => {
                    return CheckOutcome {
                        name: "search-vs-enumeration",
                        passed: false,
                        detail: format!("search failed on instance {i}: {e}"),
                    }
                }
            };
            let bf = match brute_force(&p, mode) {
                Ok(r) => r,
                Err(e) => {
                    return CheckOutcome {
                        name: "search-vs-enumeration",
                        passed: false,
                        detail: format!("enumeration failed on instance {i}: {e}"),
                    }
                }
            };
            if bb.indices != bf.indices {
                return CheckOutcome {
                    name: "search-vs-enumeration",
                    passed: false,
                    detail: format!("argmax mismatch on instance {i} ({mode:?}, m={m})"),
                };
            }
            max_gap = max_gap.max(rel_gap(bb.power, bf.power));
        }
    }
    CheckOutcome {
        name: "search-vs-enumeration",
        passed: max_gap <= POWER_REL_TOL,
        detail: format!("{n} instances x 2 modes, max objective gap {max_gap:.2e}"),
    }
}

/// The continuous optimum must rotate every element onto the direct path's
/// phase and must dominate random phase vectors.
fn check_co_phasing(quick: bool) -> CheckOutcome {
    let (n_geom, n_vec) = if quick { (10, 100) } else { (100, 1000) };
    let scn = Scenario::<f64>::reference();
    let panel = scn
        .panel
        .with_grid(3, 3)
        .expect("reference panel resizes cleanly");
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst_misalign = 0.0f64;
    for g in 0..n_geom {
        let mu = match sample_mu(&scn.mu_region, &panel, &mut rng) {
            Ok(p) => p,
            Err(e) => {
                return CheckOutcome {
                    name: "co-phasing",
                    passed: false,
                    detail: format!("sampling failed: {e}"),
                }
            }
        };
        let problem = match PhaseProblem::from_scene(&panel, scn.bs, mu, &scn.rf) {
            Ok(p) => p,
            Err(e) => {
                return CheckOutcome {
                    name: "co-phasing",
                    passed: false,
                    detail: format!("scene reduction failed: {e}"),
                }
            }
        };
        let (_, direct_base) = problem.direct();
        let psis = continuous_optimum(&problem);
        for (m, psi) in psis.iter().enumerate() {
            if problem.elements()[m].amplitude == 0.0 {
                continue;
            }
            let diff = wrap_angle(problem.phasor_at(m, *psi).arg() - direct_base);
            worst_misalign = worst_misalign.max(diff.min(TAU - diff));
        }
        let best = problem.evaluate_psis(&psis);
        for v in 0..n_vec {
            let trial: Vec<f64> = (0..problem.num_elements())
                .map(|_| rng.random_range(0.0..TAU))
                .collect();
            let power = problem.evaluate_psis(&trial);
            if power > best * (1.0 + POWER_REL_TOL) {
                return CheckOutcome {
                    name: "co-phasing",
                    passed: false,
                    detail: format!(
                        "random vector {v} of geometry {g} beat the optimum: {power:.6e} > {best:.6e}"
                    ),
                };
            }
        }
    }
    CheckOutcome {
        name: "co-phasing",
        passed: worst_misalign < 1e-9,
        detail: format!(
            "{n_geom} geometries x {n_vec} random vectors dominated, worst alignment {worst_misalign:.2e} rad"
        ),
    }
}

/// The search bound must never undercut the best completion of a node and
/// must equal the exact power at leaves.
fn check_bound_admissibility(quick: bool) -> CheckOutcome {
    let n = if quick { 20 } else { 200 };
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut min_slack = f64::INFINITY;
    for i in 0..n {
        let m = 1 + i % 6;
        let p = random_problem(&mut rng, m, 4);
        let cands = candidate_sets(&p, CandidateMode::Full);
        let k = rng.random_range(0..=m);
        let mut partial = p.direct_phasor();
        let mut remaining = 0.0;
        for depth in 0..m {
            let e = p.order()[depth];
            if depth < k {
                let l = cands[e][rng.random_range(0..cands[e].len())];
                partial += p.phasor(e, l);
            } else {
                remaining += p.elements()[e].amplitude;
            }
        }
        let bound = node_upper_bound(&BnbNode {
            partial,
            remaining_amplitude: remaining,
        });
        let mut best = f64::NEG_INFINITY;
        let mut stack = vec![(k, partial)];
        while let Some((depth, acc)) = stack.pop() {
            if depth == m {
                best = best.max(acc.norm_sqr());
                continue;
            }
            let e = p.order()[depth];
            for &l in &cands[e] {
                stack.push((depth + 1, acc + p.phasor(e, l)));
            }
        }
        if bound < best {
            return CheckOutcome {
                name: "bound-admissibility",
                passed: false,
                detail: format!("bound {bound:.6e} below best completion {best:.6e} (node {i})"),
            };
        }
        if k == m && bound != best {
            return CheckOutcome {
                name: "bound-admissibility",
                passed: false,
                detail: format!("leaf bound {bound:.6e} differs from leaf power {best:.6e}"),
            };
        }
        min_slack = min_slack.min(bound - best);
    }
    CheckOutcome {
        name: "bound-admissibility",
        passed: true,
        detail: format!("{n} nodes admissible, minimum slack {min_slack:.2e}"),
    }
}

/// The closed-form channel power moment must match a Monte Carlo estimate.
fn check_power_moment(quick: bool) -> CheckOutcome {
    let (n_scen, n_draws, tol) = if quick { (2, 10_000, 0.05) } else { (5, 50_000, 0.02) };
    let scn = Scenario::<f64>::reference();
    let panel = scn
        .panel
        .with_grid(3, 3)
        .expect("reference panel resizes cleanly");
    let kappas = [0.0, 1.0, 4.0, 10.0];
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst = 0.0f64;
    for s in 0..n_scen {
        let mut rf = scn.rf.clone();
        rf.rician_kappa = kappas[s % kappas.len()];
        let mu = match sample_mu(&scn.mu_region, &panel, &mut rng) {
            Ok(p) => p,
            Err(e) => {
                return CheckOutcome {
                    name: "power-moment",
                    passed: false,
                    detail: format!("sampling failed: {e}"),
                }
            }
        };
        let psis: Vec<f64> = (0..panel.num_elements())
            .map(|_| rng.random_range(0.0..TAU))
            .collect();
        let analytic = match expected_channel_power(&panel, scn.bs, mu, &psis, &rf) {
            Ok(p) => p,
            Err(e) => {
                return CheckOutcome {
                    name: "power-moment",
                    passed: false,
                    detail: format!("moment evaluation failed: {e}"),
                }
            }
        };
        let mut acc = 0.0;
        for _ in 0..n_draws {
            match composite_channel(&panel, scn.bs, mu, &psis, &rf, &mut rng) {
                Ok(c) => acc += c.h_total.norm_sqr(),
                Err(e) => {
                    return CheckOutcome {
                        name: "power-moment",
                        passed: false,
                        detail: format!("channel draw failed: {e}"),
                    }
                }
            }
        }
        let empirical = acc / n_draws as f64;
        worst = worst.max(rel_gap(analytic, empirical).max(f64::MIN_POSITIVE));
    }
    CheckOutcome {
        name: "power-moment",
        passed: worst <= tol,
        detail: format!(
            "{n_scen} scenarios x {n_draws} draws, worst relative gap {:.2}% (limit {:.0}%)",
            worst * 100.0,
            tol * 100.0
        ),
    }
}

/// Restricting the search to the two bracketing states may cost optimality;
/// it must never gain it. Reports how often the full grid found more.
fn check_bracketing_audit(quick: bool) -> CheckOutcome {
    let n = if quick { 100 } else { 1000 };
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut full_wins = 0u32;
    for i in 0..n {
        let m = 1 + i % 8;
        let p = random_problem(&mut rng, m, 4);
        let br = branch_and_bound(&p, &BnbOptions {
            mode: CandidateMode::Bracketing,
            init: InitMode::Nearest,
        });
        let full = branch_and_bound(&p, &BnbOptions {
            mode: CandidateMode::Full,
            init: InitMode::Nearest,
        });
        let (br, full) = match (br, full) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                return CheckOutcome {
                    name: "bracketing-audit",
                    passed: false,
                    detail: format!("search failed on instance {i}: {e}"),
                }
            }
        };
        if br.power > full.power * (1.0 + POWER_REL_TOL) {
            return CheckOutcome {
                name: "bracketing-audit",
                passed: false,
                detail: format!(
                    "bracketing beat the full grid on instance {i}: {:.6e} > {:.6e}",
                    br.power, full.power
                ),
            };
        }
        if full.power > br.power * (1.0 + POWER_REL_TOL) {
            full_wins += 1;
        }
    }
    CheckOutcome {
        name: "bracketing-audit",
        passed: true,
        detail: format!(
            "full grid strictly better on {full_wins}/{n} instances ({:.1}%)",
            100.0 * f64::from(full_wins) / n as f64
        ),
    }
}

/// Solver quality must be ordered: nearest <= bracketing search <= full
/// search <= continuous optimum.
fn check_solver_ordering(quick: bool) -> CheckOutcome {
    let n = if quick { 20 } else { 200 };
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    for i in 0..n {
        let p = random_problem(&mut rng, 1 + i % 8, [2, 4, 8][i % 3]);
        let near = nearest_solution(&p).power;
        let br = branch_and_bound(&p, &BnbOptions::default());
        let full = branch_and_bound(&p, &BnbOptions {
            mode: CandidateMode::Full,
            init: InitMode::Nearest,
        });
        let (br, full) = match (br, full) {
            (Ok(a), Ok(b)) => (a.power, b.power),
            (Err(e), _) | (_, Err(e)) => {
                return CheckOutcome {
                    name: "solver-ordering",
                    passed: false,
                    detail: format!("search failed on instance {i}: {e}"),
                }
            }
        };
        let cont = continuous_solution(&p).power;
        let slack = 1.0 + POWER_REL_TOL;
        if !(near <= br * slack && br <= full * slack && full <= cont * slack) {
            return CheckOutcome {
                name: "solver-ordering",
                passed: false,
                detail: format!(
                    "ordering broken on instance {i}: nearest {near:.6e}, bracketing {br:.6e}, full {full:.6e}, continuous {cont:.6e}"
                ),
            };
        }
    }
    CheckOutcome {
        name: "solver-ordering",
        passed: true,
        detail: format!("{n} instances ordered nearest <= bracketing <= full <= continuous"),
    }
}

/// Re-running a trial must reproduce it bit for bit, and distinct trials
/// must consume distinct streams.
fn check_trial_reproducibility(quick: bool) -> CheckOutcome {
    let n = if quick { 5 } else { 20 };
    let mut scn = Scenario::<f64>::reference();
    scn.opts.n_trials = n;
    let panel = match scn.panel.with_grid(4, 4) {
        Ok(p) => p,
        Err(e) => {
            return CheckOutcome {
                name: "trial-reproducibility",
                passed: false,
                detail: format!("panel resize failed: {e}"),
            }
        }
    };
    let mut prev_mu = None;
    for t in 0..n {
        let a = evaluate_trial(&scn, &panel, t);
        let b = evaluate_trial(&scn, &panel, t);
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                return CheckOutcome {
                    name: "trial-reproducibility",
                    passed: false,
                    detail: format!("trial {t} failed: {e}"),
                }
            }
        };
        if a.se_ios.to_bits() != b.se_ios.to_bits()
            || a.se_irs.to_bits() != b.se_irs.to_bits()
            || a.se_direct.to_bits() != b.se_direct.to_bits()
            || a.ios_indices != b.ios_indices
        {
            return CheckOutcome {
                name: "trial-reproducibility",
                passed: false,
                detail: format!("trial {t} did not reproduce bit for bit"),
            };
        }
        if prev_mu == Some(a.mu) {
            return CheckOutcome {
                name: "trial-reproducibility",
                passed: false,
                detail: format!("trials {t} and {} drew the same user", t - 1),
            };
        }
        prev_mu = Some(a.mu);
    }
    CheckOutcome {
        name: "trial-reproducibility",
        passed: true,
        detail: format!("{n} trials reproduced bit for bit on distinct streams"),
    }
}

/// On the noise-free expected powers, each trial must order the systems
/// direct <= reflect-only <= two-sided.
fn check_expected_se_ordering(quick: bool) -> CheckOutcome {
    let n = if quick { 20 } else { 100 };
    let scn = Scenario::<f64>::reference();
    let panel = match scn.panel.with_grid(5, 5) {
        Ok(p) => p,
        Err(e) => {
            return CheckOutcome {
                name: "expected-se-ordering",
                passed: false,
                detail: format!("panel resize failed: {e}"),
            }
        }
    };
    let mut transmissive = 0u32;
    for t in 0..n {
        let r = match evaluate_trial(&scn, &panel, t) {
            Ok(r) => r,
            Err(e) => {
                return CheckOutcome {
                    name: "expected-se-ordering",
                    passed: false,
                    detail: format!("trial {t} failed: {e}"),
                }
            }
        };
        if !(r.se_direct_exp <= r.se_irs_exp && r.se_irs_exp <= r.se_ios_exp) {
            return CheckOutcome {
                name: "expected-se-ordering",
                passed: false,
                detail: format!(
                    "trial {t}: direct {:.4}, reflect-only {:.4}, two-sided {:.4}",
                    r.se_direct_exp, r.se_irs_exp, r.se_ios_exp
                ),
            };
        }
        if r.side == crate::geometry::Side::Transmissive {
            transmissive += 1;
        }
    }
    CheckOutcome {
        name: "expected-se-ordering",
        passed: true,
        detail: format!("{n} trials ordered ({transmissive} behind the panel)"),
    }
}
