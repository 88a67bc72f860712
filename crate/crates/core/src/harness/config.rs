//! Flat `key = value` configuration with dotted section names.
//!
//! ```text
//! # comments start with '#'
//! engine.kind = classical
//! potential.kind = quartic
//! potential.a = 1
//! potential.b = 1
//! field.omega = 0.9
//! field.components = 1:1.0:0, 2:1.0:45
//! ```
//!
//! `field.components` lists `index:amplitude:phase_degrees` triples.

use std::collections::BTreeMap;
use std::fmt;

use crate::classical::SymmetryClass;
use crate::error::{Error, Result};
use crate::field::{DriveField, HarmonicComponent};
use crate::potential::PotentialSpec;
use crate::quantum::GridSpec;

use super::{Engine, ExperimentConfig, QuantumInit, SimSettings};

const KNOWN_KEYS: &[&str] = &[
    "engine.kind",
    "potential.kind",
    "potential.omega0",
    "potential.mass",
    "potential.a",
    "potential.b",
    "potential.v0",
    "potential.k",
    "field.omega",
    "field.components",
    "init.class",
    "init.sigma_x",
    "init.sigma_p",
    "init.state",
    "init.sigma",
    "init.ground_tol",
    "init.x0",
    "init.p0",
    "sim.dt_per_period",
    "sim.n_periods_total",
    "sim.n_periods_discard",
    "sim.k_alpha",
    "sim.samples_per_period",
    "ensemble.size",
    "grid.half_width",
    "grid.n_points",
    "grid.hbar",
    "particle.mass",
    "particle.charge",
    "scan.points",
    "seed",
    "output",
];

/// Raw key-value pairs in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_pair(line).ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{}`", lineno + 1, raw.trim()))
            })?;
            if map.entries.contains_key(key) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            map.insert(key, value)?;
        }
        Ok(map)
    }

    /// Applies a `key=value` override, replacing any existing value.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) =
            split_pair(pair).ok_or_else(|| Error::Config(format!("override `{pair}` is not `key=value`")))?;
        self.insert(key, value)
    }

    pub fn insert(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn number_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required_number<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.number(key)?.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }
}

impl fmt::Display for ConfigMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then_some((k, v))
}

fn parse_components(s: &str) -> Result<Vec<HarmonicComponent>> {
    let bad = |item: &str| Error::Config(format!("`field.components`: expected index:amplitude:phase_deg, got `{item}`"));
    s.split(',')
        .map(str::trim)
        .filter(|item| !item.is_empty())
        .map(|item| {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad(item));
            }
            let n: u32 = parts[0].parse().map_err(|_| bad(item))?;
            let amp: f64 = parts[1].parse().map_err(|_| bad(item))?;
            let deg: f64 = parts[2].parse().map_err(|_| bad(item))?;
            Ok(HarmonicComponent::new(n, amp, deg.to_radians()))
        })
        .collect()
}

/// Smallest power of two that is at least `2·max_harmonic + 1`.
pub fn default_k_alpha(max_harmonic: u32) -> usize {
    (2 * max_harmonic as usize + 1).next_power_of_two()
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(text)?)
    }

    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let mass = map.number_or("particle.mass", 1.0)?;
        let charge = map.number_or("particle.charge", 1.0)?;

        let potential = match map.require("potential.kind")? {
            "harmonic" => PotentialSpec::Harmonic {
                omega0: map.required_number("potential.omega0")?,
                mass: map.number_or("potential.mass", mass)?,
            },
            "quartic" => PotentialSpec::Quartic {
                a: map.required_number("potential.a")?,
                b: map.required_number("potential.b")?,
            },
            "cosine" => PotentialSpec::CosineLattice {
                v0: map.required_number("potential.v0")?,
                k: map.required_number("potential.k")?,
            },
            other => return Err(Error::Config(format!("unknown potential.kind `{other}`"))),
        };
        potential.validate().map_err(config_err)?;

        let omega: f64 = map.required_number("field.omega")?;
        let components = parse_components(map.require("field.components")?)?;
        let field = DriveField::new(omega, components).map_err(config_err)?;

        let engine = match map.require("engine.kind")? {
            "classical" => {
                let class_name = map.get("init.class").unwrap_or("reflection");
                Engine::Classical {
                    ensemble_size: map.number_or("ensemble.size", 1024)?,
                    class: SymmetryClass::parse(class_name)
                        .ok_or_else(|| Error::Config(format!("unknown init.class `{class_name}`")))?,
                    sigma_x: map.number_or("init.sigma_x", 0.5)?,
                    sigma_p: map.number_or("init.sigma_p", 0.5)?,
                }
            }
            "quantum" => {
                let grid = GridSpec::symmetric(
                    map.number_or("grid.half_width", 10.0)?,
                    map.number_or("grid.n_points", 256)?,
                    map.number_or("grid.hbar", 1.0)?,
                )
                .map_err(config_err)?;
                let init = match map.get("init.state").unwrap_or("ground") {
                    "ground" => QuantumInit::GroundState { tol: map.number_or("init.ground_tol", 1e-10)? },
                    "gaussian" => QuantumInit::Gaussian { sigma: map.number_or("init.sigma", 0.5)? },
                    other => return Err(Error::Config(format!("unknown init.state `{other}`"))),
                };
                Engine::Quantum { grid, init }
            }
            other => return Err(Error::Config(format!("unknown engine.kind `{other}`"))),
        };

        let n_periods_total: usize = map.number_or("sim.n_periods_total", 100)?;
        let sim = SimSettings {
            steps_per_period: map.number_or("sim.dt_per_period", 400)?,
            n_periods_total,
            n_periods_discard: map.number_or("sim.n_periods_discard", n_periods_total / 5)?,
            k_alpha: map.number_or("sim.k_alpha", default_k_alpha(field.max_harmonic()))?,
            samples_per_period: map.number_or("sim.samples_per_period", 20)?,
        };

        let cfg = ExperimentConfig {
            engine,
            potential,
            field,
            mass,
            charge,
            sim,
            seed: map.number_or("seed", 0)?,
            scan_points: map.number_or("scan.points", 16)?,
            probe: (map.number_or("init.x0", 0.0)?, map.number_or("init.p0", 0.0)?),
            output: map.get("output").map(str::to_string),
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
        engine.kind = classical
        potential.kind = quartic   # V = x²/2 + x⁴/4
        potential.a = 1
        potential.b = 1
        field.omega = 0.9
        field.components = 1:1.0:0, 2:1.0:45
    ";

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_text(BASE).unwrap();
        assert_eq!(cfg.sim.k_alpha, 8);
        assert_eq!(cfg.sim.n_periods_discard, 20);
        assert_eq!(cfg.field.components().len(), 2);
        assert!((cfg.field.components()[1].phase - 45f64.to_radians()).abs() < 1e-15);
        assert!(matches!(cfg.engine, Engine::Classical { class: SymmetryClass::Reflection, .. }));
    }

    #[test]
    fn overrides_replace_values() {
        let mut map = ConfigMap::parse(BASE).unwrap();
        map.apply_override("sim.k_alpha=16").unwrap();
        map.apply_override("engine.kind = quantum").unwrap();
        let cfg = ExperimentConfig::from_map(&map).unwrap();
        assert_eq!(cfg.sim.k_alpha, 16);
        assert!(matches!(cfg.engine, Engine::Quantum { .. }));
    }

    #[test]
    fn rejects_bad_input() {
        let missing = BASE.replace("potential.kind = quartic", "");
        assert!(matches!(ExperimentConfig::from_text(&missing), Err(Error::Config(m)) if m.contains("potential.kind")));
        assert!(ConfigMap::parse("nonsense").is_err());
        assert!(ConfigMap::parse("foo.bar = 1").is_err());
        assert!(ConfigMap::parse("seed = 1\nseed = 2").is_err());
        let low_k = format!("{BASE}\nsim.k_alpha = 4");
        assert!(ExperimentConfig::from_text(&low_k).is_err());
        let window = format!("{BASE}\nsim.n_periods_total = 10\nsim.n_periods_discard = 10");
        assert!(ExperimentConfig::from_text(&window).is_err());
        let comps = BASE.replace("2:1.0:45", "2:1.0");
        assert!(ExperimentConfig::from_text(&comps).is_err());
        let coprime = BASE.replace("1:1.0:0, 2:1.0:45", "2:1.0:0, 4:1.0:0");
        assert!(ExperimentConfig::from_text(&coprime).is_ok());
    }

    #[test]
    fn default_k_alpha_is_power_of_two() {
        assert_eq!(default_k_alpha(1), 4);
        assert_eq!(default_k_alpha(2), 8);
        assert_eq!(default_k_alpha(3), 8);
        assert_eq!(default_k_alpha(4), 16);
    }
}
