//! Sectioned `key=value` run configuration. `[section]` headers group the
//! knobs by module, unknown sections and keys are rejected with their line
//! numbers, and every value — defaulted or explicit — is echoed so each run
//! records the exact parameters that produced its artifacts.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};
use fbm_lattice::fbm::NoiseConfig;
use fbm_lattice::lattice::{Boundary, LatticeModel, NonlinearityFamily};
use fbm_lattice::solver::SolverConfig;
use fbm_lattice::stability::StabilityConfig;
use fbm_lattice::young::ExponentChain;

const SECTIONS: [&str; 6] = ["noise", "model", "solver", "stability", "cocycle", "integrate"];

#[derive(Debug)]
struct RawValue {
    text: String,
    line: usize,
}

/// Everything a run needs, with per-module sub-configurations materialized
/// on demand (the noise horizon depends on the experiment kind).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub hurst: f64,
    pub sigma0: f64,
    pub t_max: f64,
    pub grid_exp: u32,
    pub seeds: Vec<u64>,
    pub model: LatticeModel,
    pub horizon: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub rho_auto: bool,
    /// Norm of the initial datum for plain solves.
    pub x_scale: f64,
    pub stability: StabilityConfig,
    /// Slack the target rate must leave below the envelope rate.
    pub eps_slack: f64,
    /// Young-bound constant entering the aggregated C; 0 means "measure it
    /// on the sampled driver".
    pub young_constant: f64,
    /// Initial norm for stability runs; 0 means "use the admissible radius".
    pub x_norm: f64,
    pub cocycle_t: f64,
    pub cocycle_tau: f64,
    pub cocycle_tol: f64,
    pub integrate_tol: f64,
    /// One line per key: the value used, tagged when the default applied.
    pub echo: Vec<String>,
}

impl ExperimentConfig {
    pub fn step(&self) -> f64 {
        0.5f64.powi(self.grid_exp as i32)
    }

    pub fn chain(&self) -> Result<ExponentChain> {
        Ok(ExponentChain::from_hurst(self.hurst)?)
    }

    /// Default weights `σ_i = σ₀·2^{−|i−N/2|/2}`: summable decay away from
    /// the window center.
    pub fn sigma(&self) -> Vec<f64> {
        let n = self.model.n;
        (0..n)
            .map(|i| self.sigma0 * 2.0f64.powf(-(i.abs_diff(n / 2) as f64) / 2.0))
            .collect()
    }

    pub fn noise_config(&self, t_max: f64, seed: u64) -> NoiseConfig {
        NoiseConfig::new(self.hurst, self.sigma(), t_max, self.step(), seed)
    }

    pub fn solver_config(&self, horizon: f64) -> Result<SolverConfig> {
        let mut config = SolverConfig::new(self.chain()?, horizon, self.step());
        config.picard_tol = self.picard_tol;
        config.picard_max_iter = self.picard_max_iter;
        config.rho_auto = self.rho_auto;
        Ok(config)
    }

    /// Re-validate after a command-line override changed the grid.
    pub fn set_grid_exp(&mut self, grid_exp: u32) -> Result<()> {
        self.grid_exp = grid_exp;
        self.echo.push(format!("noise.grid_exp = {grid_exp} (--grid-exp override)"));
        self.validate_cross()
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seeds = vec![seed];
        self.echo.push(format!("noise.seeds = {seed} (--seed override)"));
    }

    fn validate_cross(&self) -> Result<()> {
        if !(1..=20).contains(&self.grid_exp) {
            bail!("grid exponent must lie in 1..=20, got {}", self.grid_exp);
        }
        if self.seeds.is_empty() {
            bail!("seed list must not be empty");
        }
        self.chain()?;
        self.noise_config(self.t_max, self.seeds[0]).validate()?;
        self.model.validate()?;
        self.solver_config(self.horizon)?.validate()?;
        self.stability.validate(self.model.lambda)?;
        let rate = self.stability.envelope_rate(self.model.lambda);
        if self.stability.mu > rate - self.eps_slack {
            bail!(
                "target rate must stay at least eps_slack = {} below the envelope rate \
                 lambda - log(1 + eps_hat*e^lambda) = {rate:.6}, got {}",
                self.eps_slack,
                self.stability.mu
            );
        }
        if !(self.cocycle_t >= 0.0 && self.cocycle_tau >= 0.0) {
            bail!("cocycle times must be nonnegative, got t = {}, tau = {}", self.cocycle_t, self.cocycle_tau);
        }
        if self.cocycle_t + self.cocycle_tau > self.horizon {
            bail!(
                "cocycle needs t + tau <= horizon, got {} + {} > {}",
                self.cocycle_t,
                self.cocycle_tau,
                self.horizon
            );
        }
        Ok(())
    }
}

struct Parsed {
    raw: BTreeMap<String, BTreeMap<String, RawValue>>,
    echo: Vec<String>,
}

impl Parsed {
    fn take(&mut self, section: &str, key: &str) -> Option<RawValue> {
        self.raw.get_mut(section).and_then(|keys| keys.remove(key))
    }

    fn value<T: std::str::FromStr>(&mut self, section: &str, key: &str, default: T) -> Result<T>
    where
        T: std::fmt::Display,
    {
        match self.take(section, key) {
            Some(item) => {
                let parsed = item.text.parse::<T>().map_err(|_| {
                    anyhow!(
                        "line {}: value for {section}.{key} does not parse: '{}'",
                        item.line,
                        item.text
                    )
                })?;
                self.echo.push(format!("{section}.{key} = {parsed}"));
                Ok(parsed)
            }
            None => {
                self.echo.push(format!("{section}.{key} = {default} (default)"));
                Ok(default)
            }
        }
    }

    fn seeds(&mut self, section: &str, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        match self.take(section, key) {
            Some(item) => {
                let seeds = item
                    .text
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<u64>().map_err(|_| {
                            anyhow!(
                                "line {}: value for {section}.{key} is not a comma-separated \
                                 seed list: '{}'",
                                item.line,
                                item.text
                            )
                        })
                    })
                    .collect::<Result<Vec<u64>>>()?;
                self.echo.push(format!("{section}.{key} = {}", join(&seeds)));
                Ok(seeds)
            }
            None => {
                self.echo.push(format!("{section}.{key} = {} (default)", join(default)));
                Ok(default.to_vec())
            }
        }
    }

    fn choice(&mut self, section: &str, key: &str, default: &str, allowed: &[&str]) -> Result<String> {
        let picked = self.value(section, key, default.to_string())?;
        if !allowed.contains(&picked.as_str()) {
            bail!("{section}.{key} must be one of {allowed:?}, got '{picked}'");
        }
        Ok(picked)
    }

    fn reject_unknown(&self) -> Result<()> {
        let mut worst: Option<(usize, String, String)> = None;
        for (section, keys) in &self.raw {
            for (key, item) in keys {
                let candidate = (item.line, key.clone(), section.clone());
                if worst.as_ref().map_or(true, |w| candidate.0 < w.0) {
                    worst = Some(candidate);
                }
            }
        }
        if let Some((line, key, section)) = worst {
            bail!("line {line}: unknown key '{key}' in section [{section}]");
        }
        Ok(())
    }
}

fn join(seeds: &[u64]) -> String {
    seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_raw(text: &str) -> Result<BTreeMap<String, BTreeMap<String, RawValue>>> {
    let mut raw: BTreeMap<String, BTreeMap<String, RawValue>> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                bail!("line {line}: unterminated section header '{content}'");
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                bail!("line {line}: unknown section [{name}] (known: {SECTIONS:?})");
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            bail!("line {line}: expected key=value, got '{content}'");
        };
        let Some(active) = &section else {
            bail!("line {line}: key '{}' appears before any [section] header", key.trim());
        };
        let key = key.trim().to_string();
        let entry = raw.entry(active.clone()).or_default();
        if entry.contains_key(&key) {
            bail!("line {line}: duplicate key '{key}' in section [{active}]");
        }
        entry.insert(key, RawValue { text: value.trim().to_string(), line });
    }
    Ok(raw)
}

/// Parse and fully validate a configuration; an empty string yields the
/// defaults, echoed like any other run.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut p = Parsed { raw: parse_raw(text)?, echo: Vec::new() };

    let hurst = p.value("noise", "hurst", 0.75)?;
    let sigma0 = p.value("noise", "sigma0", 1.0)?;
    let t_max = p.value("noise", "t_max", 2.0)?;
    let grid_exp = p.value("noise", "grid_exp", 8u32)?;
    let seeds = p.seeds("noise", "seeds", &[0])?;

    let nodes = p.value("model", "nodes", 64usize)?;
    let boundary = match p.choice("model", "boundary", "periodic", &["periodic", "dirichlet"])?.as_str() {
        "periodic" => Boundary::Periodic,
        _ => Boundary::Dirichlet,
    };
    let nu = p.value("model", "nu", 0.25)?;
    let lambda = p.value("model", "lambda", 1.0)?;
    let family_kind = p.choice("model", "family", "flat-origin", &["flat-origin", "saturating"])?;
    let a = p.value("model", "a", 0.5)?;
    let b = p.value("model", "b", 0.5)?;
    let delta = p.value("model", "delta", 1.0)?;
    let family = if family_kind == "flat-origin" {
        NonlinearityFamily::FlatOrigin { a, b, delta }
    } else {
        NonlinearityFamily::Saturating { a, b }
    };
    let model = LatticeModel { n: nodes, boundary, nu, lambda, family };

    let horizon = p.value("solver", "horizon", 1.0)?;
    let picard_tol = p.value("solver", "picard_tol", 1e-9)?;
    let picard_max_iter = p.value("solver", "picard_max_iter", 60usize)?;
    let rho_auto = p.value("solver", "rho_auto", true)?;
    let x_scale = p.value("solver", "x_scale", 0.1)?;

    let eps_hat = p.value("stability", "eps_hat", 0.2)?;
    let mu = p.value("stability", "mu", 0.5)?;
    let n_max = p.value("stability", "n_max", 20usize)?;
    let initial_scale = p.value("stability", "initial_scale", 1.0)?;
    let eps_slack = p.value("stability", "eps_slack", 0.01)?;
    let young_constant = p.value("stability", "young_constant", 0.0)?;
    let x_norm = p.value("stability", "x_norm", 0.0)?;

    let cocycle_t = p.value("cocycle", "t", 0.5)?;
    let cocycle_tau = p.value("cocycle", "tau", 0.5)?;
    let cocycle_tol = p.value("cocycle", "tol", 1e-2)?;
    let integrate_tol = p.value("integrate", "tol", 1e-8)?;

    p.reject_unknown()?;

    if !(x_scale > 0.0) {
        bail!("solver.x_scale must be positive, got {x_scale}");
    }
    if !(eps_slack >= 0.0 && eps_slack < 1.0) {
        bail!("stability.eps_slack must lie in [0, 1), got {eps_slack}");
    }
    if !(young_constant >= 0.0) {
        bail!("stability.young_constant must be nonnegative (0 = measure), got {young_constant}");
    }
    if !(x_norm >= 0.0) {
        bail!("stability.x_norm must be nonnegative (0 = admissible radius), got {x_norm}");
    }
    if !(cocycle_tol > 0.0) || !(integrate_tol > 0.0) {
        bail!("tolerances must be positive, got cocycle.tol = {cocycle_tol}, integrate.tol = {integrate_tol}");
    }

    let config = ExperimentConfig {
        hurst,
        sigma0,
        t_max,
        grid_exp,
        seeds,
        model,
        horizon,
        picard_tol,
        picard_max_iter,
        rho_auto,
        x_scale,
        stability: StabilityConfig { eps_hat, mu, n_max, initial_scale },
        eps_slack,
        young_constant,
        x_norm,
        cocycle_t,
        cocycle_tau,
        cocycle_tol,
        integrate_tol,
        echo: p.echo,
    };
    config.validate_cross()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_defaults_and_echoes_them() {
        let config = parse_config("").unwrap();
        assert_eq!(config.hurst, 0.75);
        assert_eq!(config.seeds, vec![0]);
        assert_eq!(config.model.n, 64);
        assert_eq!(config.stability.n_max, 20);
        assert!(config.echo.iter().all(|l| l.ends_with("(default)")));
        assert!(config.echo.iter().any(|l| l == "noise.hurst = 0.75 (default)"));
    }

    #[test]
    fn explicit_values_override_and_are_echoed_without_the_tag() {
        let text = "[noise]\nhurst = 0.8\nseeds = 3, 5\n\n[model]\nnodes = 16\n";
        let config = parse_config(text).unwrap();
        assert_eq!(config.hurst, 0.8);
        assert_eq!(config.seeds, vec![3, 5]);
        assert_eq!(config.model.n, 16);
        assert!(config.echo.contains(&"noise.hurst = 0.8".to_string()));
        assert!(config.echo.contains(&"model.nodes = 16".to_string()));
    }

    #[test]
    fn unknown_keys_and_sections_carry_line_numbers() {
        let err = parse_config("[noise]\nhurst = 0.75\nwavelength = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3: unknown key 'wavelength'"), "{err}");
        let err = parse_config("[plasma]\n").unwrap_err();
        assert!(err.to_string().contains("line 1: unknown section [plasma]"), "{err}");
        let err = parse_config("hurst = 0.75\n").unwrap_err();
        assert!(err.to_string().contains("before any [section]"), "{err}");
        let err = parse_config("[noise]\nhurst\n").unwrap_err();
        assert!(err.to_string().contains("expected key=value"), "{err}");
        let err = parse_config("[noise]\nhurst = fast\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn constraint_violations_name_the_constraint() {
        let err = parse_config("[noise]\nhurst = 0.4\n").unwrap_err();
        assert!(format!("{err:#}").contains("must lie in (0.5, 1)"), "{err:#}");

        // 0.9 ≥ 1 − e^{−0.5} ≈ 0.3935
        let err = parse_config("[stability]\neps_hat = 0.9\nmu = 0.01\n[model]\nlambda = 0.5\n")
            .unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("eps_hat") && msg.contains("0.393469"), "{msg}");

        let err = parse_config("[stability]\nmu = 0.56\n").unwrap_err();
        assert!(format!("{err:#}").contains("eps_slack"), "{err:#}");
    }

    #[test]
    fn comments_blanks_and_duplicates_behave() {
        let text = "# run\n[noise]\nhurst = 0.7 # fine\n\n[noise]\nsigma0 = 2.0\n";
        let config = parse_config(text).unwrap();
        assert_eq!(config.hurst, 0.7);
        assert_eq!(config.sigma0, 2.0);
        let err = parse_config("[noise]\nhurst = 0.7\nhurst = 0.8\n").unwrap_err();
        assert!(err.to_string().contains("duplicate key 'hurst'"), "{err}");
    }

    #[test]
    fn sigma_profile_decays_geometrically_from_the_center() {
        let config = parse_config("[model]\nnodes = 8\n").unwrap();
        let sigma = config.sigma();
        assert_eq!(sigma.len(), 8);
        assert_eq!(sigma[4], 1.0);
        assert!((sigma[6] - 0.5).abs() < 1e-15);
        assert!((sigma[2] - 0.5).abs() < 1e-15);
    }
}
