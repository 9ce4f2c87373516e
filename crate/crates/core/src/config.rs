//! TOML configuration.
//!
//! Every key is optional and falls back to the reference scenario, so an
//! empty document is a valid configuration. Unknown sections or keys are
//! hard errors naming the offender, which catches typos that would otherwise
//! silently run the defaults. Powers may be given in watts or dBm, but not
//! both.
//!
//! [`ScenarioConfig::effective_toml`] emits the fully resolved configuration
//! (everything in watts); parsing that dump reproduces the configuration
//! exactly, which is what makes archived run configs trustworthy.

use std::path::Path;

use toml::{Table, Value};

use crate::channel::RfConstants;
use crate::error::{Error, Result};
use crate::experiments::{GridSpec, MuRegion, OptimizerChoice, RunOptions, Scenario};
use crate::geometry::{PanelGeometry, Point3};
use crate::num::Real;
use crate::optimizer::{CandidateMode, InitMode};

// ── Resolved configuration ──────────────────────────────────────────────────

/// `[panel]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelConfig {
    pub rows: u32,
    pub cols: u32,
    pub delta_x: f64,
    pub delta_y: f64,
    pub center: [f64; 3],
    pub normal: [f64; 3],
    pub n_diodes: u32,
    pub s_a: u32,
}

impl Default for PanelConfig {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 10,
            delta_x: 0.03,
            delta_y: 0.03,
            center: [0.0, 0.0, 2.0],
            normal: [-1.0, 0.0, 0.0],
            n_diodes: 2,
            s_a: 4,
        }
    }
}

/// `[rf]` section, with powers resolved to watts.
#[derive(Debug, Clone, PartialEq)]
pub struct RfConfig {
    pub wavelength: f64,
    pub rician_kappa: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub element_gain: f64,
    pub tx_pattern_gain: f64,
    pub rx_pattern_gain: f64,
    pub alpha: f64,
    pub tx_power_w: f64,
    pub noise_power_w: f64,
    pub epsilon: f64,
    pub gamma_sq: f64,
    pub nlos_exponent: f64,
    pub nlos_ref_gain: f64,
    pub direct_blocked: bool,
}

impl Default for RfConfig {
    fn default() -> Self {
        let rf = RfConstants::<f64>::default();
        Self {
            wavelength: rf.wavelength,
            rician_kappa: rf.rician_kappa,
            tx_gain: rf.tx_gain,
            rx_gain: rf.rx_gain,
            element_gain: rf.element_gain,
            tx_pattern_gain: rf.tx_pattern_gain,
            rx_pattern_gain: rf.rx_pattern_gain,
            alpha: rf.alpha,
            tx_power_w: rf.tx_power,
            noise_power_w: rf.noise_power,
            epsilon: rf.epsilon,
            gamma_sq: rf.gamma_sq,
            nlos_exponent: rf.nlos_exponent,
            nlos_ref_gain: rf.nlos_ref_gain,
            direct_blocked: rf.direct_blocked,
        }
    }
}

/// `[scenario]` section: endpoints and the user region.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub bs: [f64; 3],
    pub mu_center: [f64; 2],
    pub mu_radius: f64,
    pub mu_height: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            bs: [-500.0, 0.0, 2.0],
            mu_center: [0.0, 0.0],
            mu_radius: 2.0,
            mu_height: 2.0,
        }
    }
}

/// `[experiment]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_trials: u64,
    pub master_seed: u64,
    pub sizes: Vec<u32>,
    pub optimizer: OptimizerChoice,
    pub candidate_mode: CandidateMode,
    pub init: InitMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            master_seed: 1,
            sizes: vec![2, 4, 6, 8, 10],
            optimizer: OptimizerChoice::Nearest,
            candidate_mode: CandidateMode::Bracketing,
            init: InitMode::Nearest,
        }
    }
}

/// `[grid]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            y_min: -2.0,
            y_max: 2.0,
            step: 0.1,
        }
    }
}

/// Fully resolved configuration; `Default` is the reference scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioConfig {
    pub panel: PanelConfig,
    pub rf: RfConfig,
    pub scenario: SceneConfig,
    pub experiment: ExperimentConfig,
    pub grid: GridConfig,
}

// ── TOML walking helpers ────────────────────────────────────────────────────

fn value_type(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn take_section(top: &mut Table, name: &str) -> Result<Table> {
    match top.remove(name) {
        None => Ok(Table::new()),
        Some(Value::Table(t)) => Ok(t),
        Some(v) => Err(Error::Config(format!(
            "[{name}] must be a table, got {}",
            value_type(&v)
        ))),
    }
}

/// Errors if a section still holds keys after all known ones were taken.
fn reject_leftovers(section: &str, t: &Table) -> Result<()> {
    if t.is_empty() {
        return Ok(());
    }
    let mut keys: Vec<&str> = t.keys().map(String::as_str).collect();
    keys.sort_unstable();
    Err(Error::Config(format!(
        "unknown key(s) in [{section}]: {}",
        keys.join(", ")
    )))
}

fn number(v: Value, what: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(f),
        Value::Integer(i) => Ok(i as f64),
        other => Err(Error::Config(format!(
            "{what} must be a number, got {}",
            value_type(&other)
        ))),
    }
}

fn take_f64(t: &mut Table, sec: &str, key: &str) -> Result<Option<f64>> {
    t.remove(key)
        .map(|v| number(v, &format!("{sec}.{key}")))
        .transpose()
}

fn take_u32(t: &mut Table, sec: &str, key: &str) -> Result<Option<u32>> {
    match t.remove(key) {
        None => Ok(None),
        Some(Value::Integer(i)) => u32::try_from(i).map(Some).map_err(|_| {
            Error::Config(format!("{sec}.{key} is out of range: {i}"))
        }),
        Some(v) => Err(Error::Config(format!(
            "{sec}.{key} must be an integer, got {}",
            value_type(&v)
        ))),
    }
}

fn take_u64(t: &mut Table, sec: &str, key: &str) -> Result<Option<u64>> {
    match t.remove(key) {
        None => Ok(None),
        Some(Value::Integer(i)) => u64::try_from(i).map(Some).map_err(|_| {
            Error::Config(format!("{sec}.{key} must be nonnegative, got {i}"))
        }),
        Some(v) => Err(Error::Config(format!(
            "{sec}.{key} must be an integer, got {}",
            value_type(&v)
        ))),
    }
}

fn take_bool(t: &mut Table, sec: &str, key: &str) -> Result<Option<bool>> {
    match t.remove(key) {
        None => Ok(None),
        Some(Value::Boolean(b)) => Ok(Some(b)),
        Some(v) => Err(Error::Config(format!(
            "{sec}.{key} must be a boolean, got {}",
            value_type(&v)
        ))),
    }
}

fn take_string(t: &mut Table, sec: &str, key: &str) -> Result<Option<String>> {
    match t.remove(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(v) => Err(Error::Config(format!(
            "{sec}.{key} must be a string, got {}",
            value_type(&v)
        ))),
    }
}

fn take_array<const N: usize>(t: &mut Table, sec: &str, key: &str) -> Result<Option<[f64; N]>> {
    let arr = match t.remove(key) {
        None => return Ok(None),
        Some(Value::Array(a)) => a,
        Some(v) => {
            return Err(Error::Config(format!(
                "{sec}.{key} must be an array of {N} numbers, got {}",
                value_type(&v)
            )))
        }
    };
    if arr.len() != N {
        return Err(Error::Config(format!(
            "{sec}.{key} must have exactly {N} entries, got {}",
            arr.len()
        )));
    }
    let mut out = [0.0; N];
    for (i, v) in arr.into_iter().enumerate() {
        out[i] = number(v, &format!("{sec}.{key}[{i}]"))?;
    }
    Ok(Some(out))
}

fn take_sizes(t: &mut Table, sec: &str, key: &str) -> Result<Option<Vec<u32>>> {
    let arr = match t.remove(key) {
        None => return Ok(None),
        Some(Value::Array(a)) => a,
        Some(v) => {
            return Err(Error::Config(format!(
                "{sec}.{key} must be an array of integers, got {}",
                value_type(&v)
            )))
        }
    };
    arr.into_iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::Integer(n) if n >= 1 => u32::try_from(n)
                .map_err(|_| Error::Config(format!("{sec}.{key}[{i}] is out of range: {n}"))),
            Value::Integer(n) => Err(Error::Config(format!(
                "{sec}.{key}[{i}] must be at least 1, got {n}"
            ))),
            other => Err(Error::Config(format!(
                "{sec}.{key}[{i}] must be an integer, got {}",
                value_type(&other)
            ))),
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Resolves a power given in exactly one of watts or dBm.
fn take_power(
    t: &mut Table,
    sec: &str,
    watt_key: &str,
    dbm_key: &str,
    default_w: f64,
) -> Result<f64> {
    let w = take_f64(t, sec, watt_key)?;
    let dbm = take_f64(t, sec, dbm_key)?;
    match (w, dbm) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "{sec}.{watt_key} and {sec}.{dbm_key} are mutually exclusive"
        ))),
        (Some(w), None) => Ok(w),
        (None, Some(dbm)) => Ok(10f64.powf(dbm / 10.0) / 1000.0),
        (None, None) => Ok(default_w),
    }
}

// ── Parsing ─────────────────────────────────────────────────────────────────

impl ScenarioConfig {
    /// Parses a TOML document, applying defaults for absent keys and
    /// rejecting unknown ones.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut top: Table = text
            .parse()
            .map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;

        let mut panel = take_section(&mut top, "panel")?;
        let mut rf = take_section(&mut top, "rf")?;
        let mut scene = take_section(&mut top, "scenario")?;
        let mut exp = take_section(&mut top, "experiment")?;
        let mut grid = take_section(&mut top, "grid")?;
        reject_leftovers("top level", &top).map_err(|_| {
            let mut keys: Vec<&str> = top.keys().map(String::as_str).collect();
            keys.sort_unstable();
            Error::Config(format!("unknown section(s): {}", keys.join(", ")))
        })?;

        let dp = PanelConfig::default();
        let panel_cfg = PanelConfig {
            rows: take_u32(&mut panel, "panel", "rows")?.unwrap_or(dp.rows),
            cols: take_u32(&mut panel, "panel", "cols")?.unwrap_or(dp.cols),
            delta_x: take_f64(&mut panel, "panel", "delta_x")?.unwrap_or(dp.delta_x),
            delta_y: take_f64(&mut panel, "panel", "delta_y")?.unwrap_or(dp.delta_y),
            center: take_array(&mut panel, "panel", "center")?.unwrap_or(dp.center),
            normal: take_array(&mut panel, "panel", "normal")?.unwrap_or(dp.normal),
            n_diodes: take_u32(&mut panel, "panel", "n_diodes")?.unwrap_or(dp.n_diodes),
            s_a: take_u32(&mut panel, "panel", "s_a")?.unwrap_or(dp.s_a),
        };
        reject_leftovers("panel", &panel)?;

        let dr = RfConfig::default();
        let rf_cfg = RfConfig {
            wavelength: take_f64(&mut rf, "rf", "wavelength")?.unwrap_or(dr.wavelength),
            rician_kappa: take_f64(&mut rf, "rf", "rician_kappa")?.unwrap_or(dr.rician_kappa),
            tx_gain: take_f64(&mut rf, "rf", "tx_gain")?.unwrap_or(dr.tx_gain),
            rx_gain: take_f64(&mut rf, "rf", "rx_gain")?.unwrap_or(dr.rx_gain),
            element_gain: take_f64(&mut rf, "rf", "element_gain")?.unwrap_or(dr.element_gain),
            tx_pattern_gain: take_f64(&mut rf, "rf", "tx_pattern_gain")?
                .unwrap_or(dr.tx_pattern_gain),
            rx_pattern_gain: take_f64(&mut rf, "rf", "rx_pattern_gain")?
                .unwrap_or(dr.rx_pattern_gain),
            alpha: take_f64(&mut rf, "rf", "alpha")?.unwrap_or(dr.alpha),
            tx_power_w: take_power(&mut rf, "rf", "tx_power_w", "tx_power_dbm", dr.tx_power_w)?,
            noise_power_w: take_power(
                &mut rf,
                "rf",
                "noise_power_w",
                "noise_power_dbm",
                dr.noise_power_w,
            )?,
            epsilon: take_f64(&mut rf, "rf", "epsilon")?.unwrap_or(dr.epsilon),
            gamma_sq: take_f64(&mut rf, "rf", "gamma_sq")?.unwrap_or(dr.gamma_sq),
            nlos_exponent: take_f64(&mut rf, "rf", "nlos_exponent")?.unwrap_or(dr.nlos_exponent),
            nlos_ref_gain: take_f64(&mut rf, "rf", "nlos_ref_gain")?.unwrap_or(dr.nlos_ref_gain),
            direct_blocked: take_bool(&mut rf, "rf", "direct_blocked")?
                .unwrap_or(dr.direct_blocked),
        };
        reject_leftovers("rf", &rf)?;

        let ds = SceneConfig::default();
        let scene_cfg = SceneConfig {
            bs: take_array(&mut scene, "scenario", "bs")?.unwrap_or(ds.bs),
            mu_center: take_array(&mut scene, "scenario", "mu_center")?.unwrap_or(ds.mu_center),
            mu_radius: take_f64(&mut scene, "scenario", "mu_radius")?.unwrap_or(ds.mu_radius),
            mu_height: take_f64(&mut scene, "scenario", "mu_height")?.unwrap_or(ds.mu_height),
        };
        reject_leftovers("scenario", &scene)?;

        let de = ExperimentConfig::default();
        let optimizer = match take_string(&mut exp, "experiment", "optimizer")?.as_deref() {
            None => de.optimizer,
            Some("nearest") => OptimizerChoice::Nearest,
            Some("bnb") => OptimizerChoice::BranchAndBound,
            Some(other) => {
                return Err(Error::Config(format!(
                    "experiment.optimizer must be \"nearest\" or \"bnb\", got \"{other}\""
                )))
            }
        };
        let candidate_mode = match take_string(&mut exp, "experiment", "candidate_mode")?.as_deref()
        {
            None => de.candidate_mode,
            Some("bracketing") => CandidateMode::Bracketing,
            Some("full") => CandidateMode::Full,
            Some(other) => {
                return Err(Error::Config(format!(
                    "experiment.candidate_mode must be \"bracketing\" or \"full\", got \"{other}\""
                )))
            }
        };
        let init_name = take_string(&mut exp, "experiment", "init")?;
        let init_seed = take_u64(&mut exp, "experiment", "init_seed")?;
        let init = match (init_name.as_deref(), init_seed) {
            (None, None) => de.init,
            (Some("nearest"), None) => InitMode::Nearest,
            (Some("random"), seed) => InitMode::Random(seed.unwrap_or(0)),
            (Some("nearest"), Some(_)) | (None, Some(_)) => {
                return Err(Error::Config(
                    "experiment.init_seed requires experiment.init = \"random\"".into(),
                ))
            }
            (Some(other), _) => {
                return Err(Error::Config(format!(
                    "experiment.init must be \"nearest\" or \"random\", got \"{other}\""
                )))
            }
        };
        let exp_cfg = ExperimentConfig {
            n_trials: take_u64(&mut exp, "experiment", "n_trials")?.unwrap_or(de.n_trials),
            master_seed: take_u64(&mut exp, "experiment", "master_seed")?
                .unwrap_or(de.master_seed),
            sizes: take_sizes(&mut exp, "experiment", "sizes")?.unwrap_or(de.sizes),
            optimizer,
            candidate_mode,
            init,
        };
        reject_leftovers("experiment", &exp)?;

        let dg = GridConfig::default();
        let grid_cfg = GridConfig {
            x_min: take_f64(&mut grid, "grid", "x_min")?.unwrap_or(dg.x_min),
            x_max: take_f64(&mut grid, "grid", "x_max")?.unwrap_or(dg.x_max),
            y_min: take_f64(&mut grid, "grid", "y_min")?.unwrap_or(dg.y_min),
            y_max: take_f64(&mut grid, "grid", "y_max")?.unwrap_or(dg.y_max),
            step: take_f64(&mut grid, "grid", "step")?.unwrap_or(dg.step),
        };
        reject_leftovers("grid", &grid)?;

        Ok(Self {
            panel: panel_cfg,
            rf: rf_cfg,
            scenario: scene_cfg,
            experiment: exp_cfg,
            grid: grid_cfg,
        })
    }

    /// Loads and parses a configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Serializes the fully resolved configuration. Parsing the output
    /// reproduces this configuration exactly.
    pub fn effective_toml(&self) -> String {
        fn floats<const N: usize>(a: [f64; N]) -> Value {
            Value::Array(a.into_iter().map(Value::Float).collect())
        }
        let mut panel = Table::new();
        panel.insert("rows".into(), Value::Integer(i64::from(self.panel.rows)));
        panel.insert("cols".into(), Value::Integer(i64::from(self.panel.cols)));
        panel.insert("delta_x".into(), Value::Float(self.panel.delta_x));
        panel.insert("delta_y".into(), Value::Float(self.panel.delta_y));
        panel.insert("center".into(), floats(self.panel.center));
        panel.insert("normal".into(), floats(self.panel.normal));
        panel.insert(
            "n_diodes".into(),
            Value::Integer(i64::from(self.panel.n_diodes)),
        );
        panel.insert("s_a".into(), Value::Integer(i64::from(self.panel.s_a)));

        let mut rf = Table::new();
        rf.insert("wavelength".into(), Value::Float(self.rf.wavelength));
        rf.insert("rician_kappa".into(), Value::Float(self.rf.rician_kappa));
        rf.insert("tx_gain".into(), Value::Float(self.rf.tx_gain));
        rf.insert("rx_gain".into(), Value::Float(self.rf.rx_gain));
        rf.insert("element_gain".into(), Value::Float(self.rf.element_gain));
        rf.insert(
            "tx_pattern_gain".into(),
            Value::Float(self.rf.tx_pattern_gain),
        );
        rf.insert(
            "rx_pattern_gain".into(),
            Value::Float(self.rf.rx_pattern_gain),
        );
        rf.insert("alpha".into(), Value::Float(self.rf.alpha));
        rf.insert("tx_power_w".into(), Value::Float(self.rf.tx_power_w));
        rf.insert("noise_power_w".into(), Value::Float(self.rf.noise_power_w));
        rf.insert("epsilon".into(), Value::Float(self.rf.epsilon));
        rf.insert("gamma_sq".into(), Value::Float(self.rf.gamma_sq));
        rf.insert("nlos_exponent".into(), Value::Float(self.rf.nlos_exponent));
        rf.insert("nlos_ref_gain".into(), Value::Float(self.rf.nlos_ref_gain));
        rf.insert(
            "direct_blocked".into(),
            Value::Boolean(self.rf.direct_blocked),
        );

        let mut scene = Table::new();
        scene.insert("bs".into(), floats(self.scenario.bs));
        scene.insert("mu_center".into(), floats(self.scenario.mu_center));
        scene.insert("mu_radius".into(), Value::Float(self.scenario.mu_radius));
        scene.insert("mu_height".into(), Value::Float(self.scenario.mu_height));

        let mut exp = Table::new();
        exp.insert(
            "n_trials".into(),
            Value::Integer(self.experiment.n_trials as i64),
        );
        exp.insert(
            "master_seed".into(),
            Value::Integer(self.experiment.master_seed as i64),
        );
        exp.insert(
            "sizes".into(),
            Value::Array(
                self.experiment
                    .sizes
                    .iter()
                    .map(|&n| Value::Integer(i64::from(n)))
                    .collect(),
            ),
        );
        exp.insert(
            "optimizer".into(),
            Value::String(
                match self.experiment.optimizer {
                    OptimizerChoice::Nearest => "nearest",
                    OptimizerChoice::BranchAndBound => "bnb",
                }
                .into(),
            ),
        );
        exp.insert(
            "candidate_mode".into(),
            Value::String(
                match self.experiment.candidate_mode {
                    CandidateMode::Bracketing => "bracketing",
                    CandidateMode::Full => "full",
                }
                .into(),
            ),
        );
        match self.experiment.init {
            InitMode::Nearest => {
                exp.insert("init".into(), Value::String("nearest".into()));
            }
            InitMode::Random(seed) => {
                exp.insert("init".into(), Value::String("random".into()));
                exp.insert("init_seed".into(), Value::Integer(seed as i64));
            }
        }

        let mut grid = Table::new();
        grid.insert("x_min".into(), Value::Float(self.grid.x_min));
        grid.insert("x_max".into(), Value::Float(self.grid.x_max));
        grid.insert("y_min".into(), Value::Float(self.grid.y_min));
        grid.insert("y_max".into(), Value::Float(self.grid.y_max));
        grid.insert("step".into(), Value::Float(self.grid.step));

        let mut top = Table::new();
        top.insert("panel".into(), Value::Table(panel));
        top.insert("rf".into(), Value::Table(rf));
        top.insert("scenario".into(), Value::Table(scene));
        top.insert("experiment".into(), Value::Table(exp));
        top.insert("grid".into(), Value::Table(grid));
        top.to_string()
    }

    /// Instantiates the runnable scenario, validating every component.
    pub fn build<F: Real>(&self) -> Result<Scenario<F>> {
        let p = &self.panel;
        let panel = PanelGeometry::new(
            p.rows,
            p.cols,
            F::of(p.delta_x),
            F::of(p.delta_y),
            Point3::new(F::of(p.center[0]), F::of(p.center[1]), F::of(p.center[2])),
            Point3::new(F::of(p.normal[0]), F::of(p.normal[1]), F::of(p.normal[2])),
            p.n_diodes,
            p.s_a,
        )?;
        let r = &self.rf;
        let rf = RfConstants {
            wavelength: F::of(r.wavelength),
            rician_kappa: F::of(r.rician_kappa),
            tx_gain: F::of(r.tx_gain),
            rx_gain: F::of(r.rx_gain),
            element_gain: F::of(r.element_gain),
            tx_pattern_gain: F::of(r.tx_pattern_gain),
            rx_pattern_gain: F::of(r.rx_pattern_gain),
            alpha: F::of(r.alpha),
            tx_power: F::of(r.tx_power_w),
            noise_power: F::of(r.noise_power_w),
            epsilon: F::of(r.epsilon),
            gamma_sq: F::of(r.gamma_sq),
            nlos_exponent: F::of(r.nlos_exponent),
            nlos_ref_gain: F::of(r.nlos_ref_gain),
            direct_blocked: r.direct_blocked,
        };
        let s = &self.scenario;
        let scenario = Scenario {
            panel,
            rf,
            bs: Point3::new(F::of(s.bs[0]), F::of(s.bs[1]), F::of(s.bs[2])),
            mu_region: MuRegion {
                center: Point3::new(
                    F::of(s.mu_center[0]),
                    F::of(s.mu_center[1]),
                    F::of(s.mu_height),
                ),
                radius: F::of(s.mu_radius),
                height: F::of(s.mu_height),
            },
            opts: RunOptions {
                n_trials: self.experiment.n_trials,
                master_seed: self.experiment.master_seed,
                sizes: self.experiment.sizes.clone(),
                optimizer: self.experiment.optimizer,
                candidate_mode: self.experiment.candidate_mode,
                init: self.experiment.init,
                grid: GridSpec {
                    x_min: F::of(self.grid.x_min),
                    x_max: F::of(self.grid.x_max),
                    y_min: F::of(self.grid.y_min),
                    y_max: F::of(self.grid.y_max),
                    step: F::of(self.grid.step),
                },
            },
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
