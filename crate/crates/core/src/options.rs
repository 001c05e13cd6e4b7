//! Named solver options.
//!
//! Every option is settable by its flat (dot-separated) name through
//! [`Options::set`]; [`OPTION_TABLE`] lists names, defaults and meaning.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, SolverError};

/// Environment variable naming a default option file (`key = value` lines).
pub const OPTIONS_ENV: &str = "MPCCIP_OPTIONS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Relaxation,
    Penalty,
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "relaxation" => Ok(Algorithm::Relaxation),
            "penalty" => Ok(Algorithm::Penalty),
            _ => Err(format!("unknown algorithm `{s}` (expected relaxation|penalty)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Relaxation => "relaxation",
            Algorithm::Penalty => "penalty",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QRegScheme {
    CriticalRho,
    EigenClip,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierRule {
    Monotone,
    Loqo,
    Quality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoqoMode {
    /// ξ over `(Xz, X1x2)`.
    Mpcc,
    /// ξ over `Xz` only.
    Classic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxationUpdate {
    Proportional,
    Rolloff,
    Loqo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndgameStrategy {
    RelaxLb,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyUpdate {
    Static,
    Dynamic,
}

/// How the Scholtes slack is initialized by the centered start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringSlackMode {
    /// `s = (1 − k) τ⁰`, making the relaxed row hold exactly.
    Feasible,
    /// `s = √(2(1 − k τ⁰))`.
    Formula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub max_iter: usize,
    pub mu_init: f64,
    pub mu_min: f64,
    pub barrier: BarrierRule,
    pub loqo_gamma: f64,
    pub loqo_r: f64,
    pub loqo_mode: LoqoMode,
    pub q_regularization: QRegScheme,
    /// `None` picks the algorithm default (0.9999 relaxation, 0.99 penalty).
    pub critical_rho_factor: Option<f64>,
    pub min_eig_value: f64,
    pub relaxation_update: RelaxationUpdate,
    pub endgame_strategy: EndgameStrategy,
    pub endgame_threshold: f64,
    pub center_complementarities: bool,
    pub centering_factor: f64,
    pub centering_slack_mode: CenteringSlackMode,
    pub mu_thresh: f64,
    pub sigma_mu_ratio: f64,
    pub sigma_mu_exp: f64,
    pub sigma_min: f64,
    pub rolloff_slope: f64,
    pub rolloff_point: f64,
    pub rolloff_max: f64,
    /// `None` picks the algorithm default (2.0 relaxation, 0.4 penalty).
    pub gamma: Option<f64>,
    pub r: f64,
    pub delta_max: f64,
    /// Endgame exponent ξ.
    pub tau: f64,
    pub rho_0: f64,
    pub rho_max: f64,
    pub rho_growth_rate: f64,
    pub comp_history_length: usize,
    pub eta_dynamic_update: f64,
    pub penalty_update: PenaltyUpdate,
    pub inertia_correction: bool,
    pub delta_c_fixed: f64,
    pub diverge_threshold: f64,
    pub termination_scaling: bool,
    pub classification_tol: f64,
    pub time_limit: Option<f64>,
    pub crossover_tol: f64,
    pub crossover_enum_cap: usize,
    pub crossover_delta_factor: f64,
    pub crossover_growth: f64,
    pub crossover_delta_max: f64,
    pub crossover_bnlp_tries: usize,
    pub crossover_gamma_shrink: f64,
    pub crossover_d_tol: f64,
    pub crossover_max_iter: usize,
    /// Initial trust radius of the active-set phase.
    pub crossover_verify_delta: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: 1e-8,
            max_iter: 3000,
            mu_init: 0.1,
            mu_min: 1e-9,
            barrier: BarrierRule::Monotone,
            loqo_gamma: 0.1,
            loqo_r: 0.95,
            loqo_mode: LoqoMode::Mpcc,
            q_regularization: QRegScheme::CriticalRho,
            critical_rho_factor: None,
            min_eig_value: 1e-8,
            relaxation_update: RelaxationUpdate::Rolloff,
            endgame_strategy: EndgameStrategy::RelaxLb,
            endgame_threshold: 1e-6,
            center_complementarities: true,
            centering_factor: 0.5,
            centering_slack_mode: CenteringSlackMode::Feasible,
            mu_thresh: 5e-6,
            sigma_mu_ratio: 1.0,
            sigma_mu_exp: 1.0,
            sigma_min: 1e-8,
            rolloff_slope: 2.0,
            rolloff_point: 1e-6,
            rolloff_max: 1.0,
            gamma: None,
            r: 1e-8,
            delta_max: 1e-4,
            tau: 0.5,
            rho_0: 1.0,
            rho_max: 1e10,
            rho_growth_rate: 10.0,
            comp_history_length: 10,
            eta_dynamic_update: 0.99,
            penalty_update: PenaltyUpdate::Dynamic,
            inertia_correction: true,
            delta_c_fixed: 0.0,
            diverge_threshold: 1e12,
            termination_scaling: true,
            classification_tol: 1e-6,
            time_limit: None,
            crossover_tol: 1e-4,
            crossover_enum_cap: 16,
            crossover_delta_factor: 10.0,
            crossover_growth: 10.0,
            crossover_delta_max: 1e2,
            crossover_bnlp_tries: 5,
            crossover_gamma_shrink: 0.1,
            crossover_d_tol: 1e-10,
            crossover_max_iter: 100,
            crossover_verify_delta: 1e-4,
        }
    }
}

/// Registry row: name, default (as printed) and one-line description.
pub struct OptionSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub description: &'static str,
}

macro_rules! spec {
    ($n:expr, $d:expr, $t:expr) => {
        OptionSpec {
            name: $n,
            default: $d,
            description: $t,
        }
    };
}

pub const OPTION_TABLE: &[OptionSpec] = &[
    spec!("tol", "1e-8", "stationarity tolerance"),
    spec!("max_iter", "3000", "iteration cap"),
    spec!("barrier.mu_init", "0.1", "initial barrier parameter"),
    spec!("barrier.mu_min", "1e-9", "barrier parameter floor"),
    spec!("barrier", "monotone", "barrier update rule: monotone | loqo | quality"),
    spec!("barrier.loqo_gamma", "0.1", "scaling factor of the LOQO barrier rule"),
    spec!("barrier.loqo_r", "0.95", "step-length parameter of the LOQO barrier rule"),
    spec!("barrier.loqo_mode", "mpcc", "LOQO barrier ξ over (Xz, X1x2) [mpcc] or Xz only [classic]"),
    spec!("q_regularization", "critical_rho", "Q regularization: critical_rho | eigenclip | off"),
    spec!("critical_rho_factor", "0.9999 (relaxation) / 0.99 (penalty)", "fraction of the critical multiplier kept"),
    spec!("min_eig_value", "1e-8", "eigenvalue floor of the complementarity blocks"),
    spec!("relaxation_update", "rolloff", "τ rule: proportional | rolloff | loqo"),
    spec!("endgame_strategy", "relax_lb", "endgame: relax_lb | none"),
    spec!("endgame_threshold", "1e-6", "KKT error at which the endgame is triggered"),
    spec!("center_complementarities", "true", "start complementarity pairs on the x1 = x2 line"),
    spec!("centering_factor", "0.5", "position along the x1 = x2 line"),
    spec!("centering_slack_mode", "feasible", "centered slack: feasible | formula"),
    spec!("mu_thresh", "5e-6", "accepted for compatibility; no effect"),
    spec!("sigma_mu_ratio", "1.0", "proportional τ factor"),
    spec!("sigma_mu_exp", "1.0", "proportional τ exponent"),
    spec!("sigma_min", "1e-8", "floor for τ"),
    spec!("rolloff_slope", "2.0", "rolloff exponent a"),
    spec!("rolloff_point", "1e-6", "rolloff offset b"),
    spec!("rolloff_max", "1.0", "rolloff plateau c"),
    spec!("gamma", "2.0 (relaxation) / 0.4 (penalty)", "LOQO τ factor / dynamic penalty exponent"),
    spec!("r", "1e-8", "LOQO τ step-length parameter"),
    spec!("delta_max", "1e-4", "largest endgame bound relaxation"),
    spec!("tau", "0.5", "endgame exponent applied to the KKT error"),
    spec!("rho_0", "1.0", "initial penalty"),
    spec!("rho_max", "1e10", "penalty cap"),
    spec!("rho_growth_rate", "10", "penalty increase factor"),
    spec!("comp_history_length", "10", "complementarity history length"),
    spec!("eta_dynamic_update", "0.99", "sufficient-decrease factor of the dynamic penalty rule"),
    spec!("penalty_update", "dynamic", "penalty rule: static | dynamic"),
    spec!("inertia_correction", "true", "δ_w / δ_c inertia correction"),
    spec!("delta_c_fixed", "0", "fixed dual regularization when inertia correction is off"),
    spec!("diverge_threshold", "1e12", "magnitude that declares divergence"),
    spec!("termination_scaling", "true", "scale the optimality measure by multiplier size"),
    spec!("classification_tol", "1e-6", "tolerance of index sets and stationarity labels"),
    spec!("time_limit", "none", "wall-clock limit in seconds"),
    spec!("crossover.tol", "1e-4", "tolerance of the relaxation solve preceding crossover"),
    spec!("crossover.enum_cap", "16", "largest biactive set enumerated"),
    spec!("crossover.delta_factor", "10", "initial projection radius factor"),
    spec!("crossover.growth", "10", "projection radius growth"),
    spec!("crossover.delta_max", "100", "largest projection radius"),
    spec!("crossover.bnlp_tries", "5", "branch NLP attempts"),
    spec!("crossover.gamma_shrink", "0.1", "feasibility budget shrink factor"),
    spec!("crossover.d_tol", "1e-10", "step norm treated as zero"),
    spec!("crossover.max_iter", "100", "active-set iteration cap"),
    spec!("crossover.verify_delta", "1e-4", "initial trust radius of the active-set phase"),
];

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> SolverError {
    SolverError::InvalidOption {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn num(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value.trim().parse().map_err(|_| invalid(key, value, "expected a number"))?;
    if v.is_nan() {
        return Err(invalid(key, value, "expected a number"));
    }
    Ok(v)
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v = num(key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must be positive"))
    }
}

fn nonneg(key: &str, value: &str) -> Result<f64> {
    let v = num(key, value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must be nonnegative"))
    }
}

fn unit_open(key: &str, value: &str) -> Result<f64> {
    let v = num(key, value)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(invalid(key, value, "must lie in (0, 1)"))
    }
}

fn count(key: &str, value: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| invalid(key, value, "expected a nonnegative integer"))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

fn choice<T: Copy>(key: &str, value: &str, table: &[(&str, T)]) -> Result<T> {
    let v = value.trim();
    table
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(v))
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
            invalid(key, value, format!("expected one of {}", names.join(" | ")))
        })
}

impl Options {
    /// Sets one option by name from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tol" => self.tol = positive(key, value)?,
            "max_iter" => self.max_iter = count(key, value)?,
            "barrier.mu_init" => self.mu_init = positive(key, value)?,
            "barrier.mu_min" => self.mu_min = positive(key, value)?,
            "barrier" => {
                self.barrier = choice(
                    key,
                    value,
                    &[
                        ("monotone", BarrierRule::Monotone),
                        ("MonotoneUpdate", BarrierRule::Monotone),
                        ("loqo", BarrierRule::Loqo),
                        ("quality", BarrierRule::Quality),
                    ],
                )?
            }
            "barrier.loqo_gamma" => self.loqo_gamma = positive(key, value)?,
            "barrier.loqo_r" => self.loqo_r = unit_open(key, value)?,
            "barrier.loqo_mode" => {
                self.loqo_mode = choice(key, value, &[("mpcc", LoqoMode::Mpcc), ("classic", LoqoMode::Classic)])?
            }
            "q_regularization" => {
                self.q_regularization = choice(
                    key,
                    value,
                    &[
                        ("critical_rho", QRegScheme::CriticalRho),
                        ("critical", QRegScheme::CriticalRho),
                        ("eigenclip", QRegScheme::EigenClip),
                        ("off", QRegScheme::Off),
                    ],
                )?
            }
            "critical_rho_factor" => self.critical_rho_factor = Some(unit_open(key, value)?),
            "min_eig_value" => self.min_eig_value = positive(key, value)?,
            "relaxation_update" => {
                self.relaxation_update = choice(
                    key,
                    value,
                    &[
                        ("proportional", RelaxationUpdate::Proportional),
                        ("ProportionalRelaxationUpdate", RelaxationUpdate::Proportional),
                        ("rolloff", RelaxationUpdate::Rolloff),
                        ("RolloffRelaxationUpdate", RelaxationUpdate::Rolloff),
                        ("loqo", RelaxationUpdate::Loqo),
                        ("LOQORelaxationUpdate", RelaxationUpdate::Loqo),
                    ],
                )?
            }
            "endgame_strategy" => {
                self.endgame_strategy = choice(
                    key,
                    value,
                    &[
                        ("relax_lb", EndgameStrategy::RelaxLb),
                        ("RelaxLBEndgameStrategy", EndgameStrategy::RelaxLb),
                        ("none", EndgameStrategy::None),
                    ],
                )?
            }
            "endgame_threshold" => self.endgame_threshold = positive(key, value)?,
            "center_complementarities" => self.center_complementarities = flag(key, value)?,
            "centering_factor" => {
                let v = unit_open(key, value)?;
                self.centering_factor = v.min(1.0 - 1e-4);
            }
            "centering_slack_mode" => {
                self.centering_slack_mode = choice(
                    key,
                    value,
                    &[
                        ("feasible", CenteringSlackMode::Feasible),
                        ("formula", CenteringSlackMode::Formula),
                    ],
                )?
            }
            "mu_thresh" => self.mu_thresh = nonneg(key, value)?,
            "sigma_mu_ratio" => self.sigma_mu_ratio = positive(key, value)?,
            "sigma_mu_exp" => self.sigma_mu_exp = positive(key, value)?,
            "sigma_min" => self.sigma_min = positive(key, value)?,
            "rolloff_slope" => self.rolloff_slope = positive(key, value)?,
            "rolloff_point" => self.rolloff_point = positive(key, value)?,
            "rolloff_max" => self.rolloff_max = positive(key, value)?,
            "gamma" => self.gamma = Some(positive(key, value)?),
            "r" => self.r = unit_open(key, value)?,
            "delta_max" => self.delta_max = positive(key, value)?,
            "tau" => self.tau = positive(key, value)?,
            "rho_0" => self.rho_0 = positive(key, value)?,
            "rho_max" => self.rho_max = positive(key, value)?,
            "rho_growth_rate" => {
                let v = num(key, value)?;
                if v <= 1.0 {
                    return Err(invalid(key, value, "must exceed 1"));
                }
                self.rho_growth_rate = v;
            }
            "comp_history_length" => {
                let v = count(key, value)?;
                if v == 0 {
                    return Err(invalid(key, value, "must be at least 1"));
                }
                self.comp_history_length = v;
            }
            "eta_dynamic_update" => self.eta_dynamic_update = unit_open(key, value)?,
            "penalty_update" => {
                self.penalty_update = choice(
                    key,
                    value,
                    &[("static", PenaltyUpdate::Static), ("dynamic", PenaltyUpdate::Dynamic)],
                )?
            }
            "inertia_correction" => self.inertia_correction = flag(key, value)?,
            "delta_c_fixed" => self.delta_c_fixed = nonneg(key, value)?,
            "diverge_threshold" => self.diverge_threshold = positive(key, value)?,
            "termination_scaling" => self.termination_scaling = flag(key, value)?,
            "classification_tol" => self.classification_tol = positive(key, value)?,
            "time_limit" => {
                self.time_limit = if value.trim() == "none" {
                    None
                } else {
                    Some(positive(key, value)?)
                }
            }
            "crossover.tol" => self.crossover_tol = positive(key, value)?,
            "crossover.enum_cap" => self.crossover_enum_cap = count(key, value)?,
            "crossover.delta_factor" => self.crossover_delta_factor = positive(key, value)?,
            "crossover.growth" => self.crossover_growth = positive(key, value)?,
            "crossover.delta_max" => self.crossover_delta_max = positive(key, value)?,
            "crossover.bnlp_tries" => self.crossover_bnlp_tries = count(key, value)?,
            "crossover.gamma_shrink" => self.crossover_gamma_shrink = unit_open(key, value)?,
            "crossover.d_tol" => self.crossover_d_tol = positive(key, value)?,
            "crossover.max_iter" => self.crossover_max_iter = count(key, value)?,
            "crossover.verify_delta" => self.crossover_verify_delta = positive(key, value)?,
            _ => return Err(SolverError::UnknownOption(key.to_string())),
        }
        Ok(())
    }

    /// Parses `key=value` and applies it.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| SolverError::Parse {
            location: "option".into(),
            message: format!("expected key=value, got `{pair}`"),
        })?;
        self.set(k.trim(), v.trim())
    }

    /// Applies an option file: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line).map_err(|e| match e {
                SolverError::Parse { message, .. } => SolverError::Parse {
                    location: format!("{}:{}", path.display(), no + 1),
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Defaults, overridden by the file named in [`OPTIONS_ENV`] if set.
    pub fn from_env() -> Result<Options> {
        let mut o = Options::default();
        if let Ok(p) = std::env::var(OPTIONS_ENV) {
            if !p.is_empty() {
                o.apply_file(Path::new(&p))?;
            }
        }
        Ok(o)
    }

    pub fn critical_rho_factor_for(&self, alg: Algorithm) -> f64 {
        self.critical_rho_factor.unwrap_or(match alg {
            Algorithm::Relaxation => 0.9999,
            Algorithm::Penalty => 0.99,
        })
    }

    pub fn gamma_for(&self, alg: Algorithm) -> f64 {
        self.gamma.unwrap_or(match alg {
            Algorithm::Relaxation => 2.0,
            Algorithm::Penalty => 0.4,
        })
    }

    /// Current value of every option, in registry order, as printed text.
    pub fn effective(&self, alg: Algorithm) -> Vec<(&'static str, String)> {
        fn b(v: bool) -> String {
            v.to_string()
        }
        let s = |v: f64| format!("{v:e}");
        OPTION_TABLE
            .iter()
            .map(|spec| {
                let v = match spec.name {
                    "tol" => s(self.tol),
                    "max_iter" => self.max_iter.to_string(),
                    "barrier.mu_init" => s(self.mu_init),
                    "barrier.mu_min" => s(self.mu_min),
                    "barrier" => format!("{:?}", self.barrier).to_lowercase(),
                    "barrier.loqo_gamma" => s(self.loqo_gamma),
                    "barrier.loqo_r" => s(self.loqo_r),
                    "barrier.loqo_mode" => format!("{:?}", self.loqo_mode).to_lowercase(),
                    "q_regularization" => match self.q_regularization {
                        QRegScheme::CriticalRho => "critical_rho".into(),
                        QRegScheme::EigenClip => "eigenclip".into(),
                        QRegScheme::Off => "off".into(),
                    },
                    "critical_rho_factor" => s(self.critical_rho_factor_for(alg)),
                    "min_eig_value" => s(self.min_eig_value),
                    "relaxation_update" => format!("{:?}", self.relaxation_update).to_lowercase(),
                    "endgame_strategy" => match self.endgame_strategy {
                        EndgameStrategy::RelaxLb => "relax_lb".into(),
                        EndgameStrategy::None => "none".into(),
                    },
                    "endgame_threshold" => s(self.endgame_threshold),
                    "center_complementarities" => b(self.center_complementarities),
                    "centering_factor" => s(self.centering_factor),
                    "centering_slack_mode" => format!("{:?}", self.centering_slack_mode).to_lowercase(),
                    "mu_thresh" => s(self.mu_thresh),
                    "sigma_mu_ratio" => s(self.sigma_mu_ratio),
                    "sigma_mu_exp" => s(self.sigma_mu_exp),
                    "sigma_min" => s(self.sigma_min),
                    "rolloff_slope" => s(self.rolloff_slope),
                    "rolloff_point" => s(self.rolloff_point),
                    "rolloff_max" => s(self.rolloff_max),
                    "gamma" => s(self.gamma_for(alg)),
                    "r" => s(self.r),
                    "delta_max" => s(self.delta_max),
                    "tau" => s(self.tau),
                    "rho_0" => s(self.rho_0),
                    "rho_max" => s(self.rho_max),
                    "rho_growth_rate" => s(self.rho_growth_rate),
                    "comp_history_length" => self.comp_history_length.to_string(),
                    "eta_dynamic_update" => s(self.eta_dynamic_update),
                    "penalty_update" => format!("{:?}", self.penalty_update).to_lowercase(),
                    "inertia_correction" => b(self.inertia_correction),
                    "delta_c_fixed" => s(self.delta_c_fixed),
                    "diverge_threshold" => s(self.diverge_threshold),
                    "termination_scaling" => b(self.termination_scaling),
                    "classification_tol" => s(self.classification_tol),
                    "time_limit" => self.time_limit.map_or("none".into(), s),
                    "crossover.tol" => s(self.crossover_tol),
                    "crossover.enum_cap" => self.crossover_enum_cap.to_string(),
                    "crossover.delta_factor" => s(self.crossover_delta_factor),
                    "crossover.growth" => s(self.crossover_growth),
                    "crossover.delta_max" => s(self.crossover_delta_max),
                    "crossover.bnlp_tries" => self.crossover_bnlp_tries.to_string(),
                    "crossover.gamma_shrink" => s(self.crossover_gamma_shrink),
                    "crossover.d_tol" => s(self.crossover_d_tol),
                    "crossover.max_iter" => self.crossover_max_iter.to_string(),
                    "crossover.verify_delta" => s(self.crossover_verify_delta),
                    other => unreachable!("option {other} missing from effective()"),
                };
                (spec.name, v)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_option_round_trips_through_set() {
        let base = Options::default();
        for (name, value) in base.effective(Algorithm::Relaxation) {
            let mut o = Options::default();
            o.set(name, &value).unwrap_or_else(|e| panic!("{name}={value}: {e}"));
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let mut o = Options::default();
        let err = o.set("no_such_option", "1").unwrap_err();
        assert!(err.to_string().contains("no_such_option"));
    }

    #[test]
    fn algorithm_dependent_defaults() {
        let o = Options::default();
        assert_eq!(o.critical_rho_factor_for(Algorithm::Relaxation), 0.9999);
        assert_eq!(o.critical_rho_factor_for(Algorithm::Penalty), 0.99);
        assert_eq!(o.gamma_for(Algorithm::Relaxation), 2.0);
        assert_eq!(o.gamma_for(Algorithm::Penalty), 0.4);
    }

    #[test]
    fn bad_values_rejected() {
        let mut o = Options::default();
        assert!(o.set("tol", "-1").is_err());
        assert!(o.set("barrier", "fast").is_err());
        assert!(o.set("r", "1.5").is_err());
        o.set("relaxation_update", "RolloffRelaxationUpdate").unwrap();
        assert_eq!(o.relaxation_update, RelaxationUpdate::Rolloff);
    }

    #[test]
    fn option_file_applies_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("opts.txt");
        std::fs::write(&p, "# comment\ntol = 1e-6\n\nbarrier = loqo # trailing\n").unwrap();
        let mut o = Options::default();
        o.apply_file(&p).unwrap();
        assert_eq!(o.tol, 1e-6);
        assert_eq!(o.barrier, BarrierRule::Loqo);
    }
}
