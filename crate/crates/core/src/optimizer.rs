//! Discrete phase-shift search.
//!
//! The search works on a reduced form of the link: one fixed phasor for the
//! direct path plus one phasor per element whose amplitude is the cascaded
//! LoS magnitude and whose phase rotates with the chosen state index. The
//! objective is the coherent LoS power (equivalently the spectral efficiency
//! it maps to, which is monotone in it).
//!
//! Three solvers are provided. `nearest_solution` rounds the continuous
//! co-phasing optimum to the grid independently per element. `branch_and_bound`
//! searches a candidate product exactly, pruning with the triangle-inequality
//! bound `(|partial| + sum of remaining amplitudes)^2`; only nodes whose
//! bound is strictly below the incumbent are cut, and value ties resolve to
//! the lexicographically smallest index vector, so its answer is a canonical
//! argmax. `brute_force` enumerates the same candidate product and serves as
//! the reference the search is checked against.
//!
//! All evaluators accumulate element phasors in one shared order (amplitude
//! descending, index ascending) starting from the direct term, so equal
//! configurations produce bitwise equal objective values across solvers.

use num_complex::Complex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{direct_los_parts, element_los_parts, PhaseShiftVector, RfConstants};
use crate::error::{Error, Result};
use crate::geometry::{PanelGeometry, Point3};
use crate::num::{wrap_angle, Real};

/// Leaf-count ceiling for exhaustive enumeration.
const BRUTE_FORCE_MAX_LEAVES: u64 = 1 << 24;

/// State-space ceiling for the exact search. The bound prunes well only
/// once few elements remain open, so beyond this size the search degrades
/// toward enumeration and is refused up front.
const BNB_MAX_LEAVES: u64 = 1 << 32;

// ── Problem form ────────────────────────────────────────────────────────────

/// One element reduced to its cascaded LoS term at state zero: applying
/// phase shift `psi` rotates this phasor by `-psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementPhasor<F> {
    /// Nonnegative LoS amplitude.
    pub amplitude: F,
    /// Phase at state zero, in `[0, 2pi)`.
    pub base_phase: F,
}

/// Phase-shift optimization instance: direct-path phasor, element phasors,
/// state count, and the SNR scale that maps power to spectral efficiency.
#[derive(Debug, Clone)]
pub struct PhaseProblem<F> {
    direct_amp: F,
    direct_base: F,
    elements: Vec<ElementPhasor<F>>,
    s_a: u32,
    snr_scale: F,
    /// Shared accumulation order: amplitude descending, index ascending.
    order: Vec<usize>,
}

impl<F: Real> PhaseProblem<F> {
    /// Builds a problem, checking the state count and phasor amplitudes.
    pub fn new(
        direct_amp: F,
        direct_base: F,
        elements: Vec<ElementPhasor<F>>,
        s_a: u32,
        snr_scale: F,
    ) -> Result<Self> {
        if s_a < 1 {
            return Err(Error::Config("s_a must be at least 1".into()));
        }
        if !(direct_amp.is_finite() && direct_amp >= F::zero()) {
            return Err(Error::Config(format!(
                "direct amplitude must be finite and nonnegative, got {direct_amp}"
            )));
        }
        for (i, e) in elements.iter().enumerate() {
            if !(e.amplitude.is_finite() && e.amplitude >= F::zero()) {
                return Err(Error::Config(format!(
                    "element {i} amplitude must be finite and nonnegative, got {}",
                    e.amplitude
                )));
            }
        }
        if !(snr_scale.is_finite() && snr_scale > F::zero()) {
            return Err(Error::Config(format!(
                "snr scale must be positive, got {snr_scale}"
            )));
        }
        let mut order: Vec<usize> = (0..elements.len()).collect();
        order.sort_by(|&i, &j| {
            elements[j]
                .amplitude
                .partial_cmp(&elements[i].amplitude)
                .expect("amplitudes are finite")
                .then(i.cmp(&j))
        });
        Ok(Self {
            direct_amp,
            direct_base,
            elements,
            s_a,
            snr_scale,
            order,
        })
    }

    /// Reduces a physical scene to its optimization form. The direct phasor
    /// is zero when the direct path is blocked.
    pub fn from_scene(
        panel: &PanelGeometry<F>,
        bs: Point3<F>,
        mu: Point3<F>,
        rf: &RfConstants<F>,
    ) -> Result<Self> {
        let (direct_amp, direct_base) = direct_los_parts(bs, mu, rf);
        let mut elements = Vec::with_capacity(panel.num_elements());
        for m in 1..=panel.num_elements() {
            let (amplitude, base_phase) = element_los_parts(panel, m, bs, mu, rf)?;
            elements.push(ElementPhasor {
                amplitude,
                base_phase,
            });
        }
        Self::new(
            direct_amp,
            direct_base,
            elements,
            panel.s_a,
            rf.tx_power / rf.noise_power,
        )
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ElementPhasor<F>] {
        &self.elements
    }

    pub fn s_a(&self) -> u32 {
        self.s_a
    }

    pub fn snr_scale(&self) -> F {
        self.snr_scale
    }

    /// Direct-path `(amplitude, phase)`.
    pub fn direct(&self) -> (F, F) {
        (self.direct_amp, self.direct_base)
    }

    /// The shared accumulation order (amplitude descending, index ascending).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Grid spacing `2pi/s_a`.
    pub fn step(&self) -> F {
        F::TAU() / F::of(f64::from(self.s_a))
    }

    /// Realized phase of state index `l`.
    pub fn psi_of_index(&self, l: u32) -> F {
        F::of(f64::from(l)) * self.step()
    }

    /// Direct-path phasor.
    pub fn direct_phasor(&self) -> Complex<F> {
        Complex::from_polar(self.direct_amp, self.direct_base)
    }

    /// Phasor of element `m` (0-based) under phase shift `psi`.
    pub fn phasor_at(&self, m: usize, psi: F) -> Complex<F> {
        let e = &self.elements[m];
        Complex::from_polar(e.amplitude, e.base_phase - psi)
    }

    /// Phasor of element `m` (0-based) in state `l`.
    pub fn phasor(&self, m: usize, l: u32) -> Complex<F> {
        self.phasor_at(m, self.psi_of_index(l))
    }

    /// Composite LoS power for one phase per element, accumulated in the
    /// shared order. This is the leaf evaluator every solver shares.
    pub fn evaluate_psis(&self, psis: &[F]) -> F {
        assert_eq!(psis.len(), self.elements.len(), "one phase per element");
        let mut sum = self.direct_phasor();
        for &m in &self.order {
            sum += self.phasor_at(m, psis[m]);
        }
        sum.norm_sqr()
    }

    /// Composite LoS power for one state index per element.
    pub fn evaluate_indices(&self, indices: &[u32]) -> F {
        assert_eq!(indices.len(), self.elements.len(), "one index per element");
        let mut sum = self.direct_phasor();
        for &m in &self.order {
            sum += self.phasor(m, indices[m]);
        }
        sum.norm_sqr()
    }

    /// Spectral efficiency reached at a given LoS power.
    pub fn se_of_power(&self, power: F) -> F {
        (F::one() + self.snr_scale * power).log2()
    }
}

// ── Continuous optimum and quantization ─────────────────────────────────────

/// Continuous co-phasing optimum: the shift that rotates every element
/// phasor onto the direct phasor's direction, `wrap(base_m - base_direct)`.
pub fn continuous_optimum<F: Real>(problem: &PhaseProblem<F>) -> Vec<F> {
    problem
        .elements
        .iter()
        .map(|e| wrap_angle(e.base_phase - problem.direct_base))
        .collect()
}

/// Floor grid position of a phase, with the division guarded so the result
/// always lands in `0..s_a`.
fn grid_floor<F: Real>(psi: F, s_a: u32) -> (u32, F) {
    let step = F::TAU() / F::of(f64::from(s_a));
    let pos = wrap_angle(psi) / step;
    let floor = pos.floor();
    let low = floor
        .to_u32()
        .map(|l| l % s_a)
        .expect("grid position is a small nonnegative float");
    (low, pos - floor)
}

/// The two grid states bracketing a phase, as `(floor state, next state)`;
/// the pair wraps around at the top of the grid and degenerates to
/// `(0, 0)` when there is a single state.
pub fn bracketing_candidates<F: Real>(psi_star: F, s_a: u32) -> (u32, u32) {
    let (low, _) = grid_floor(psi_star, s_a);
    (low, (low + 1) % s_a)
}

/// Nearest grid state to a phase; exact midpoints resolve to the smaller
/// state index.
pub fn quantize_nearest<F: Real>(psi_star: F, s_a: u32) -> u32 {
    let (low, frac) = grid_floor(psi_star, s_a);
    let high = (low + 1) % s_a;
    let half = F::of(0.5);
    if frac < half {
        low
    } else if frac > half {
        high
    } else {
        low.min(high)
    }
}

/// Which states each element may take during a discrete search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    /// Only the two grid states bracketing the continuous optimum.
    Bracketing,
    /// All `s_a` states.
    Full,
}

/// Per-element candidate state lists (ascending, deduplicated). Elements
/// with zero amplitude cannot affect the objective, so their list collapses
/// to its smallest state, which is what the canonical argmax would pick.
pub fn candidate_sets<F: Real>(problem: &PhaseProblem<F>, mode: CandidateMode) -> Vec<Vec<u32>> {
    let psis = continuous_optimum(problem);
    problem
        .elements
        .iter()
        .zip(psis)
        .map(|(e, psi_star)| {
            let mut set = match mode {
                CandidateMode::Full => (0..problem.s_a).collect::<Vec<_>>(),
                CandidateMode::Bracketing => {
                    let (low, high) = bracketing_candidates(psi_star, problem.s_a);
                    let mut v = vec![low.min(high), low.max(high)];
                    v.dedup();
                    v
                }
            };
            if e.amplitude == F::zero() {
                set.truncate(1);
            }
            set
        })
        .collect()
}

// ── Bound ───────────────────────────────────────────────────────────────────

/// A search node: the accumulated phasor of the direct path plus all fixed
/// elements, and the total amplitude still unfixed.
#[derive(Debug, Clone, Copy)]
pub struct BnbNode<F> {
    pub partial: Complex<F>,
    pub remaining_amplitude: F,
}

/// Upper bound on the LoS power of any completion of a node: no choice of
/// remaining phases can push the composite past `|partial| + remaining`, so
/// the square of that sum is admissible. At a leaf the bound collapses to
/// the exact leaf power, bit for bit.
pub fn node_upper_bound<F: Real>(node: &BnbNode<F>) -> F {
    if node.remaining_amplitude == F::zero() {
        node.partial.norm_sqr()
    } else {
        let reach = node.partial.norm() + node.remaining_amplitude;
        reach * reach
    }
}

// ── Results ─────────────────────────────────────────────────────────────────

/// Which solver produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Continuous,
    Nearest,
    BnbBracketing,
    BnbFull,
    BruteForce,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Continuous => "continuous",
            Method::Nearest => "nearest",
            Method::BnbBracketing => "bnb-bracketing",
            Method::BnbFull => "bnb-full",
            Method::BruteForce => "brute-force",
        };
        f.write_str(s)
    }
}

/// Outcome of one phase optimization.
#[derive(Debug, Clone)]
pub struct OptimizationResult<F> {
    /// Chosen state per element; absent for the continuous solver.
    pub indices: Option<PhaseShiftVector>,
    /// Realized phase shift per element, radians.
    pub psi: Vec<F>,
    /// Composite LoS power at the optimum.
    pub power: F,
    /// Spectral efficiency at the optimum.
    pub se: F,
    /// Search nodes expanded (zero for non-search solvers).
    pub nodes_visited: u64,
    /// Subtrees cut by the bound.
    pub nodes_pruned: u64,
    pub method: Method,
}

/// How the exact search seeds its incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Start from the per-element nearest quantization.
    Nearest,
    /// Start from a seeded uniform draw over each element's candidate list.
    Random(u64),
}

/// Exact-search configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BnbOptions {
    pub mode: CandidateMode,
    pub init: InitMode,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            mode: CandidateMode::Bracketing,
            init: InitMode::Nearest,
        }
    }
}

// ── Solvers ─────────────────────────────────────────────────────────────────

/// Continuous co-phasing solution (no grid).
pub fn continuous_solution<F: Real>(problem: &PhaseProblem<F>) -> OptimizationResult<F> {
    let psi = continuous_optimum(problem);
    let power = problem.evaluate_psis(&psi);
    OptimizationResult {
        indices: None,
        psi,
        power,
        se: problem.se_of_power(power),
        nodes_visited: 0,
        nodes_pruned: 0,
        method: Method::Continuous,
    }
}

/// Independent per-element rounding of the continuous optimum to the grid.
pub fn nearest_solution<F: Real>(problem: &PhaseProblem<F>) -> OptimizationResult<F> {
    let indices: Vec<u32> = continuous_optimum(problem)
        .into_iter()
        .map(|psi_star| quantize_nearest(psi_star, problem.s_a))
        .collect();
    let power = problem.evaluate_indices(&indices);
    let vector = PhaseShiftVector::new(indices, problem.s_a)
        .expect("quantized states are always in range");
    OptimizationResult {
        psi: vector.realized(),
        indices: Some(vector),
        power,
        se: problem.se_of_power(power),
        nodes_visited: 0,
        nodes_pruned: 0,
        method: Method::Nearest,
    }
}

struct SearchState<'a, F> {
    problem: &'a PhaseProblem<F>,
    cands: &'a [Vec<u32>],
    /// Total unfixed amplitude from each depth onward (in search order).
    suffix_amp: Vec<F>,
    best_power: F,
    best: Vec<u32>,
    assign: Vec<u32>,
    nodes_visited: u64,
    nodes_pruned: u64,
}

impl<F: Real> SearchState<'_, F> {
    fn dfs(&mut self, depth: usize, partial: Complex<F>) {
        self.nodes_visited += 1;
        if depth == self.problem.order().len() {
            let power = partial.norm_sqr();
            if power > self.best_power
                || (power == self.best_power && self.assign < self.best)
            {
                self.best_power = power;
                self.best.copy_from_slice(&self.assign);
            }
            return;
        }
        let m = self.problem.order()[depth];
        let remaining = self.suffix_amp[depth + 1];
        // Expand the most promising state first; ranking ties keep the
        // smaller state so the traversal is deterministic.
        let mut children: Vec<(F, u32, Complex<F>)> = self.cands[m]
            .iter()
            .map(|&l| {
                let child = partial + self.problem.phasor(m, l);
                let bound = node_upper_bound(&BnbNode {
                    partial: child,
                    remaining_amplitude: remaining,
                });
                (bound, l, child)
            })
            .collect();
        children.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("bounds are finite")
                .then(a.1.cmp(&b.1))
        });
        for (i, (bound, l, child)) in children.iter().enumerate() {
            // Equal bounds are explored; a tied subtree may still hold a
            // lexicographically smaller argmax.
            if *bound < self.best_power {
                self.nodes_pruned += (children.len() - i) as u64;
                break;
            }
            self.assign[m] = *l;
            self.dfs(depth + 1, *child);
        }
    }
}

/// Exact search over the candidate product. Returns the maximum-power state
/// vector, breaking value ties toward the lexicographically smallest vector,
/// so the result matches [`brute_force`] exactly.
pub fn branch_and_bound<F: Real>(
    problem: &PhaseProblem<F>,
    opts: &BnbOptions,
) -> Result<OptimizationResult<F>> {
    let cands = candidate_sets(problem, opts.mode);
    let m_count = problem.num_elements();

    let mut leaves: u64 = 1;
    for set in &cands {
        leaves = leaves.saturating_mul(set.len() as u64);
    }
    if leaves > BNB_MAX_LEAVES {
        return Err(Error::TooLarge(format!(
            "exact search over {m_count} elements spans more than {BNB_MAX_LEAVES} states; \
             use the nearest solver for panels this large"
        )));
    }

    let init: Vec<u32> = match opts.init {
        InitMode::Nearest => continuous_optimum(problem)
            .into_iter()
            .zip(&cands)
            .map(|(psi_star, set)| {
                let near = quantize_nearest(psi_star, problem.s_a);
                if set.contains(&near) {
                    near
                } else {
                    set[0]
                }
            })
            .collect(),
        InitMode::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            cands
                .iter()
                .map(|set| set[rng.random_range(0..set.len())])
                .collect()
        }
    };
    let init_power = problem.evaluate_indices(&init);

    let mut suffix_amp = vec![F::zero(); m_count + 1];
    for depth in (0..m_count).rev() {
        let m = problem.order()[depth];
        suffix_amp[depth] = suffix_amp[depth + 1] + problem.elements()[m].amplitude;
    }

    let mut state = SearchState {
        problem,
        cands: &cands,
        suffix_amp,
        best_power: init_power,
        best: init.clone(),
        assign: init,
        nodes_visited: 0,
        nodes_pruned: 0,
    };
    state.dfs(0, problem.direct_phasor());

    let power = problem.evaluate_indices(&state.best);
    let vector = PhaseShiftVector::new(state.best, problem.s_a)?;
    Ok(OptimizationResult {
        psi: vector.realized(),
        indices: Some(vector),
        power,
        se: problem.se_of_power(power),
        nodes_visited: state.nodes_visited,
        nodes_pruned: state.nodes_pruned,
        method: match opts.mode {
            CandidateMode::Bracketing => Method::BnbBracketing,
            CandidateMode::Full => Method::BnbFull,
        },
    })
}

/// Reference enumeration over the same candidate product the exact search
/// uses. Visits vectors in lexicographic order and keeps strict improvements
/// only, so the reported argmax is the lexicographically smallest maximizer.
/// Errors when the product exceeds the enumeration ceiling.
pub fn brute_force<F: Real>(
    problem: &PhaseProblem<F>,
    mode: CandidateMode,
) -> Result<OptimizationResult<F>> {
    let cands = candidate_sets(problem, mode);
    let mut leaves: u64 = 1;
    for set in &cands {
        leaves = leaves
            .checked_mul(set.len() as u64)
            .filter(|&n| n <= BRUTE_FORCE_MAX_LEAVES)
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "brute force over {} elements exceeds {} leaves",
                    cands.len(),
                    BRUTE_FORCE_MAX_LEAVES
                ))
            })?;
    }

    let m_count = problem.num_elements();
    let mut pos = vec![0usize; m_count];
    let mut best: Option<(F, Vec<u32>)> = None;
    let mut visited: u64 = 0;
    loop {
        let indices: Vec<u32> = pos.iter().zip(&cands).map(|(&p, set)| set[p]).collect();
        let power = problem.evaluate_indices(&indices);
        visited += 1;
        let improved = match &best {
            None => true,
            Some((bp, _)) => power > *bp,
        };
        if improved {
            best = Some((power, indices));
        }
        // Advance the odometer, rightmost element fastest, so vectors are
        // visited in ascending lexicographic order.
        let mut depth = m_count;
        loop {
            if depth == 0 {
                break;
            }
            depth -= 1;
            pos[depth] += 1;
            if pos[depth] < cands[depth].len() {
                break;
            }
            pos[depth] = 0;
            if depth == 0 {
                let (power, indices) = best.expect("at least one vector was evaluated");
                let vector = PhaseShiftVector::new(indices, problem.s_a)?;
                return Ok(OptimizationResult {
                    psi: vector.realized(),
                    indices: Some(vector),
                    power,
                    se: problem.se_of_power(power),
                    nodes_visited: visited,
                    nodes_pruned: 0,
                    method: Method::BruteForce,
                });
            }
        }
        if m_count == 0 {
            let vector = PhaseShiftVector::new(Vec::new(), problem.s_a)?;
            let power = problem.evaluate_indices(&[]);
            return Ok(OptimizationResult {
                psi: Vec::new(),
                indices: Some(vector),
                power,
                se: problem.se_of_power(power),
                nodes_visited: visited,
                nodes_pruned: 0,
                method: Method::BruteForce,
            });
        }
    }
}
