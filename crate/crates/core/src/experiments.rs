//! Monte Carlo experiments over random user placements.
//!
//! Three systems are compared on every draw: the two-sided surface (users on
//! either side are served), a reflect-only baseline (the same panel with the
//! transmissive branch disabled, so users behind it fall back to the direct
//! path alone), and the unaided direct link. All three see the same user
//! position and the same small-scale fading draws, so their differences are
//! common-random-number estimates.
//!
//! Every trial owns one counter-mode RNG stream derived from the master seed,
//! which makes each trial, and therefore every experiment, reproducible and
//! order-independent under parallel execution.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    composite_channel_with_draws, direct_channel_with_draw, direct_expected_power,
    expected_channel_power, se_from_power, spectral_efficiency, PhaseShiftVector, RfConstants,
    SmallScaleDraws,
};
use crate::error::{Error, Result};
use crate::geometry::{side_of, PanelGeometry, Point3, Side};
use crate::num::Real;
use crate::optimizer::{
    branch_and_bound, continuous_solution, nearest_solution, BnbOptions, CandidateMode, InitMode,
    OptimizationResult, PhaseProblem,
};

/// Users are resampled until they sit at least this far off the panel plane.
const MIN_PLANE_CLEARANCE: f64 = 0.01;

/// Rejection-sampling attempts before the user region is declared degenerate.
const MAX_SAMPLE_ATTEMPTS: u32 = 10_000;

// ── Scenario description ────────────────────────────────────────────────────

/// Horizontal disk the user position is drawn from, uniformly by area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRegion<F> {
    /// Disk center; its x and y locate the disk, `height` sets its plane.
    pub center: Point3<F>,
    pub radius: F,
    /// z coordinate of every sampled user.
    pub height: F,
}

impl<F: Real> MuRegion<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > F::zero()) {
            return Err(Error::Config(format!(
                "scenario.mu_radius must be positive, got {}",
                self.radius
            )));
        }
        if !self.height.is_finite() {
            return Err(Error::Config("scenario.mu_height must be finite".into()));
        }
        Ok(())
    }
}

/// Which discrete solver trials use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerChoice {
    /// Per-element nearest quantization of the continuous optimum.
    Nearest,
    /// Exact search over the configured candidate sets.
    BranchAndBound,
}

/// Rectangular x/y evaluation grid for coverage maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<F> {
    pub x_min: F,
    pub x_max: F,
    pub y_min: F,
    pub y_max: F,
    pub step: F,
}

impl<F: Real> GridSpec<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > F::zero()) {
            return Err(Error::Config(format!(
                "grid.step must be positive, got {}",
                self.step
            )));
        }
        for (lo, hi, axis) in [
            (self.x_min, self.x_max, "x"),
            (self.y_min, self.y_max, "y"),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "grid {axis} range [{lo}, {hi}] must be finite and increasing"
                )));
            }
            let span = (hi - lo) / self.step;
            if (span - span.round()).abs() > F::of(1e-6) {
                return Err(Error::Config(format!(
                    "grid {axis} span is not a whole number of steps"
                )));
            }
        }
        Ok(())
    }

    /// Number of samples along one axis, endpoints included.
    fn count(&self, lo: F, hi: F) -> usize {
        ((hi - lo) / self.step)
            .round()
            .to_usize()
            .expect("validated grid spans are small")
            + 1
    }

    /// Ascending sample coordinates along `[lo, hi]`.
    fn axis(&self, lo: F, hi: F) -> Vec<F> {
        (0..self.count(lo, hi))
            .map(|i| lo + F::of(i as f64) * self.step)
            .collect()
    }
}

/// Experiment controls.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions<F> {
    /// Monte Carlo draws per sweep point.
    pub n_trials: u64,
    /// Seed all trial streams derive from.
    pub master_seed: u64,
    /// Square panel side lengths visited by the size sweep.
    pub sizes: Vec<u32>,
    pub optimizer: OptimizerChoice,
    pub candidate_mode: CandidateMode,
    pub init: InitMode,
    pub grid: GridSpec<F>,
}

impl<F: Real> RunOptions<F> {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::Config("experiment.n_trials must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("experiment.sizes must not be empty".into()));
        }
        if let Some(bad) = self.sizes.iter().find(|&&n| n < 1) {
            return Err(Error::Config(format!(
                "experiment.sizes entries must be at least 1, got {bad}"
            )));
        }
        self.grid.validate()
    }
}

/// Full experiment description: panel, radio constants, endpoints, controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<F> {
    pub panel: PanelGeometry<F>,
    pub rf: RfConstants<F>,
    pub bs: Point3<F>,
    pub mu_region: MuRegion<F>,
    pub opts: RunOptions<F>,
}

impl<F: Real> Scenario<F> {
    /// The reference scene: a 10x10 panel with 3 cm pitch standing at the
    /// origin, the base station 500 m away on the reflective side, and users
    /// drawn from a 2 m disk straddling the panel.
    pub fn reference() -> Self {
        let panel = PanelGeometry::new(
            10,
            10,
            F::of(0.03),
            F::of(0.03),
            Point3::new(F::zero(), F::zero(), F::of(2.0)),
            Point3::new(-F::one(), F::zero(), F::zero()),
            2,
            4,
        )
        .expect("reference panel is valid");
        Self {
            panel,
            rf: RfConstants::default(),
            bs: Point3::new(F::of(-500.0), F::zero(), F::of(2.0)),
            mu_region: MuRegion {
                center: Point3::new(F::zero(), F::zero(), F::of(2.0)),
                radius: F::of(2.0),
                height: F::of(2.0),
            },
            opts: RunOptions {
                n_trials: 10_000,
                master_seed: 1,
                sizes: vec![2, 4, 6, 8, 10],
                optimizer: OptimizerChoice::Nearest,
                candidate_mode: CandidateMode::Bracketing,
                init: InitMode::Nearest,
                grid: GridSpec {
                    x_min: F::of(-2.0),
                    x_max: F::of(2.0),
                    y_min: F::of(-2.0),
                    y_max: F::of(2.0),
                    step: F::of(0.1),
                },
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rf.validate()?;
        self.mu_region.validate()?;
        self.opts.validate()?;
        let toward_bs = self.bs.sub(self.panel.center).dot(self.panel.normal);
        if !(toward_bs > F::zero()) {
            return Err(Error::Config(
                "base station must lie on the reflective side of the panel".into(),
            ));
        }
        Ok(())
    }
}

// ── Trial machinery ─────────────────────────────────────────────────────────

/// RNG for one trial: all trials share the master seed and differ only in
/// the stream counter, so any subset can be reproduced independently.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Draws one user position uniformly by area from the disk, rejecting
/// positions closer than the clearance to the panel plane.
pub fn sample_mu<F: Real, R: Rng + ?Sized>(
    region: &MuRegion<F>,
    panel: &PanelGeometry<F>,
    rng: &mut R,
) -> Result<Point3<F>> {
    let clearance = F::of(MIN_PLANE_CLEARANCE);
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let u: F = rng.random_range(F::zero()..F::one());
        let v: F = rng.random_range(F::zero()..F::one());
        let r = region.radius * u.sqrt();
        let phi = F::TAU() * v;
        let p = Point3::new(
            region.center.x + r * phi.cos(),
            region.center.y + r * phi.sin(),
            region.height,
        );
        if panel.plane_distance(p).abs() >= clearance {
            return Ok(p);
        }
    }
    Err(Error::Degenerate(
        "user region lies (almost) entirely within the panel plane".into(),
    ))
}

/// Runs the configured discrete solver on one scene reduction.
pub fn run_optimizer<F: Real>(
    problem: &PhaseProblem<F>,
    opts: &RunOptions<F>,
) -> Result<OptimizationResult<F>> {
    match opts.optimizer {
        OptimizerChoice::Nearest => Ok(nearest_solution(problem)),
        OptimizerChoice::BranchAndBound => branch_and_bound(
            problem,
            &BnbOptions {
                mode: opts.candidate_mode,
                init: opts.init,
            },
        ),
    }
}

/// Per-system outcomes of one trial. `se_*` are sampled (one fading draw,
/// shared across systems); `se_*_exp` are computed from the exact channel
/// power moment and carry no Monte Carlo noise.
#[derive(Debug, Clone)]
pub struct TrialResult<F> {
    pub trial: u64,
    pub mu: Point3<F>,
    pub side: Side,
    pub se_ios: F,
    pub se_irs: F,
    pub se_direct: F,
    pub se_ios_exp: F,
    pub se_irs_exp: F,
    pub se_direct_exp: F,
    /// States chosen for the two-sided surface.
    pub ios_indices: PhaseShiftVector,
}

/// Evaluates all three systems on trial `trial` of the given panel size.
///
/// The trial stream is consumed in a fixed order (user position, element
/// fading, direct fading), so results are independent of execution order.
pub fn evaluate_trial<F: Real>(
    scenario: &Scenario<F>,
    panel: &PanelGeometry<F>,
    trial: u64,
) -> Result<TrialResult<F>> {
    let mut rng = trial_rng(scenario.opts.master_seed, trial);
    let mu = sample_mu(&scenario.mu_region, panel, &mut rng)?;
    let side = side_of(panel, mu)?;
    let draws = SmallScaleDraws::draw(panel.num_elements(), &mut rng);

    // Two-sided surface.
    let rf = &scenario.rf;
    let problem = PhaseProblem::from_scene(panel, scenario.bs, mu, rf)?;
    let opt = run_optimizer(&problem, &scenario.opts)?;
    let ios_indices = opt
        .indices
        .expect("discrete solvers always report state indices");
    let c = composite_channel_with_draws(panel, scenario.bs, mu, &opt.psi, rf, &draws)?;
    let se_ios = spectral_efficiency(c.h_total, rf);
    let se_ios_exp = se_from_power(expected_channel_power(panel, scenario.bs, mu, &opt.psi, rf)?, rf);

    // Unaided direct link, reusing the shared direct-path draw.
    let h_direct = direct_channel_with_draw(scenario.bs, mu, rf, draws.direct);
    let se_direct = spectral_efficiency(h_direct, rf);
    let se_direct_exp = se_from_power(direct_expected_power(scenario.bs, mu, rf), rf);

    // Reflect-only baseline: identical panel with the transmissive branch
    // off. Users behind it get no surface path at all and fall back to the
    // direct link; users in front see exactly the two-sided physics.
    let (se_irs, se_irs_exp) = match side {
        Side::Transmissive => (se_direct, se_direct_exp),
        Side::Reflective => {
            let rf_irs = rf.reflector_baseline();
            let problem_irs = PhaseProblem::from_scene(panel, scenario.bs, mu, &rf_irs)?;
            let opt_irs = run_optimizer(&problem_irs, &scenario.opts)?;
            let c_irs = composite_channel_with_draws(
                panel,
                scenario.bs,
                mu,
                &opt_irs.psi,
                &rf_irs,
                &draws,
            )?;
            let se = spectral_efficiency(c_irs.h_total, &rf_irs);
            let se_exp = se_from_power(
                expected_channel_power(panel, scenario.bs, mu, &opt_irs.psi, &rf_irs)?,
                &rf_irs,
            );
            (se, se_exp)
        }
    };

    Ok(TrialResult {
        trial,
        mu,
        side,
        se_ios,
        se_irs,
        se_direct,
        se_ios_exp,
        se_irs_exp,
        se_direct_exp,
        ios_indices,
    })
}

// ── Size sweep ──────────────────────────────────────────────────────────────

/// Mean and standard error of one system at one sweep point.
#[derive(Debug, Clone, Copy)]
pub struct SystemStats<F> {
    pub avg_se: F,
    pub std_err: F,
}

/// Aggregated results for one panel size.
#[derive(Debug, Clone)]
pub struct SweepPoint<F> {
    pub m_elements: usize,
    pub n_trials: u64,
    pub ios: SystemStats<F>,
    pub irs: SystemStats<F>,
    pub direct: SystemStats<F>,
}

fn stats<F: Real>(values: &[F]) -> SystemStats<F> {
    let n = F::of(values.len() as f64);
    let mut sum = F::zero();
    for v in values {
        sum += *v;
    }
    let mean = sum / n;
    if values.len() < 2 {
        return SystemStats {
            avg_se: mean,
            std_err: F::zero(),
        };
    }
    let mut ss = F::zero();
    for v in values {
        let d = *v - mean;
        ss += d * d;
    }
    let var = ss / (n - F::one());
    SystemStats {
        avg_se: mean,
        std_err: (var / n).sqrt(),
    }
}

/// Runs all trials for every configured panel size and aggregates the
/// sampled spectral efficiencies.
pub fn size_sweep<F: Real>(scenario: &Scenario<F>) -> Result<Vec<SweepPoint<F>>> {
    scenario.validate()?;
    let mut points = Vec::with_capacity(scenario.opts.sizes.len());
    for &n in &scenario.opts.sizes {
        let panel = scenario.panel.with_grid(n, n)?;
        let trials: Vec<TrialResult<F>> = (0..scenario.opts.n_trials)
            .into_par_iter()
            .map(|t| evaluate_trial(scenario, &panel, t))
            .collect::<Result<_>>()?;
        let ios: Vec<F> = trials.iter().map(|t| t.se_ios).collect();
        let irs: Vec<F> = trials.iter().map(|t| t.se_irs).collect();
        let direct: Vec<F> = trials.iter().map(|t| t.se_direct).collect();
        points.push(SweepPoint {
            m_elements: panel.num_elements(),
            n_trials: scenario.opts.n_trials,
            ios: stats(&ios),
            irs: stats(&irs),
            direct: stats(&direct),
        });
    }
    Ok(points)
}

// ── Coverage heatmap ────────────────────────────────────────────────────────

/// Deterministic per-cell coverage values, from the exact channel power
/// moment (no fading noise).
#[derive(Debug, Clone, Copy)]
pub struct HeatmapCell<F> {
    pub x: F,
    pub y: F,
    pub side: Side,
    pub se_ios: F,
    pub se_irs: F,
    pub se_direct: F,
}

/// Evaluates expected-power spectral efficiency on the configured x/y grid
/// at the user height. Cells on (or numerically at) the panel plane are
/// skipped. Rows are emitted y-major with x ascending within each row.
///
/// Cells use the continuous co-phasing optimum, not the configured discrete
/// solver: the map is meant to show the attainable SE ceiling per location,
/// and discrete states would overlay quantization lobes (at far range their
/// wobble exceeds the per-cell distance slope, visibly rippling the decay).
pub fn heatmap<F: Real>(scenario: &Scenario<F>) -> Result<Vec<HeatmapCell<F>>> {
    scenario.validate()?;
    let grid = &scenario.opts.grid;
    let plane_tol = F::of(1e-9).max(grid.step * F::of(1e-6));
    let mut cells = Vec::new();
    for &y in &grid.axis(grid.y_min, grid.y_max) {
        for &x in &grid.axis(grid.x_min, grid.x_max) {
            let p = Point3::new(x, y, scenario.mu_region.height);
            if scenario.panel.plane_distance(p).abs() < plane_tol {
                continue;
            }
            cells.push((x, y, p));
        }
    }
    cells
        .into_par_iter()
        .map(|(x, y, mu)| {
            let side = side_of(&scenario.panel, mu)?;
            let rf = &scenario.rf;
            let problem = PhaseProblem::from_scene(&scenario.panel, scenario.bs, mu, rf)?;
            let opt = continuous_solution(&problem);
            let se_ios = se_from_power(
                expected_channel_power(&scenario.panel, scenario.bs, mu, &opt.psi, rf)?,
                rf,
            );
            let se_direct = se_from_power(direct_expected_power(scenario.bs, mu, rf), rf);
            let se_irs = match side {
                Side::Transmissive => se_direct,
                Side::Reflective => {
                    let rf_irs = rf.reflector_baseline();
                    let problem_irs =
                        PhaseProblem::from_scene(&scenario.panel, scenario.bs, mu, &rf_irs)?;
                    let opt_irs = continuous_solution(&problem_irs);
                    se_from_power(
                        expected_channel_power(
                            &scenario.panel,
                            scenario.bs,
                            mu,
                            &opt_irs.psi,
                            &rf_irs,
                        )?,
                        &rf_irs,
                    )
                }
            };
            Ok(HeatmapCell {
                x,
                y,
                side,
                se_ios,
                se_irs,
                se_direct,
            })
        })
        .collect()
}
