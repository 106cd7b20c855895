//! Run configuration: a TOML file, command-line overrides, and the merge of
//! the two into the resolved parameters a command executes.
//!
//! Precedence is strictly "flag beats file beats default", field by field, so
//! a config file can pin an experiment while individual flags vary one knob.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use kicked_walk::ensemble::EnsembleSpec;
use kicked_walk::tolerances::CROSS_ROUTE_TOL;
use kicked_walk::{FreeEvolutionMode, RatchetSpec, Route, WalkConfig};
use serde::Deserialize;

/// Route selector as it appears on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    /// Exact truncated quantum map.
    Simulate,
    /// Closed form at exact resonance (β = 0).
    Resonant,
    /// Bessel path sum for small quasimomentum.
    NearResonant,
}

impl RouteArg {
    pub fn to_route(self) -> Route {
        match self {
            RouteArg::Simulate => Route::Simulation,
            RouteArg::Resonant => Route::Resonant,
            RouteArg::NearResonant => Route::NearResonant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeModeArg {
    Simplified,
    Full,
}

impl FreeModeArg {
    fn to_mode(self) -> FreeEvolutionMode {
        match self {
            FreeModeArg::Simplified => FreeEvolutionMode::Simplified,
            FreeModeArg::Full => FreeEvolutionMode::Full,
        }
    }
}

/// On-disk schema. Every field optional; unknown keys are rejected so typos
/// fail loudly instead of silently running the defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<f64>,
    pub steps: Option<u32>,
    pub beta: Option<f64>,
    pub n_max: Option<i32>,
    pub free_mode: Option<FreeModeArg>,
    pub ratchet: Option<Vec<i32>>,
    pub weights: Option<[f64; 2]>,
    pub phase: Option<f64>,
    pub fwhm: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub route: Option<RouteArg>,
    pub out: Option<PathBuf>,
    pub plot: Option<bool>,
    pub tolerance: Option<f64>,
    pub exclude_initial: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Flags shared by every subcommand. All optional; see [`FileConfig`] for the
/// file-side counterparts.
#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// TOML run configuration; individual flags override file values
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Computational route (analytic/compare commands)
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    /// Kick strength k
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Number of walk steps T
    #[arg(long)]
    pub steps: Option<u32>,
    /// Quasimomentum β ∈ (−0.5, 0.5]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// FWHM of the Gaussian quasimomentum distribution; 0 disables averaging
    #[arg(long)]
    pub fwhm: Option<f64>,
    /// Ensemble size when fwhm > 0
    #[arg(long)]
    pub samples: Option<usize>,
    /// PRNG seed for the quasimomentum ensemble
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated ratchet momentum classes, e.g. "0,1"
    #[arg(long, value_name = "CLASSES")]
    pub ratchet: Option<String>,
    /// Internal-level weights "b1,b2" with b1² + b2² = 1
    #[arg(long, value_name = "B1,B2")]
    pub weights: Option<String>,
    /// Ratchet ladder phase φ (radians); analytic routes require π/2
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Free-evolution convention
    #[arg(long, value_enum)]
    pub free_mode: Option<FreeModeArg>,
    /// Momentum-grid half-width; omit for automatic sizing
    #[arg(long)]
    pub n_max: Option<i32>,
    /// Output directory; omit to print CSV to standard output
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also emit an SVG rendering next to each CSV (requires --out)
    #[arg(long)]
    pub plot: bool,
    /// Max-norm tolerance judged by the compare command
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Judge comparisons excluding the initial classes n ∈ {0, 1}
    #[arg(long)]
    pub exclude_initial: bool,
}

/// Fully merged parameters for one command invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub walk: WalkConfig,
    pub ratchet: RatchetSpec,
    pub fwhm: f64,
    pub samples: usize,
    pub seed: u64,
    pub route: Option<RouteArg>,
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub tolerance: f64,
    pub exclude_initial: bool,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .with_context(|| format!("invalid {what} entry {:?}", part.trim()))
        })
        .collect()
}

impl Resolved {
    /// Merge defaults ← config file ← flags, then validate.
    pub fn from(over: &Overrides) -> Result<Self> {
        let file = match &over.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let k = over.k.or(file.k).unwrap_or(2.0);
        let steps = over.steps.or(file.steps).unwrap_or(10);
        let beta = over.beta.or(file.beta).unwrap_or(0.0);
        let mut walk = WalkConfig::new(k, steps).with_beta(beta);
        if let Some(n_max) = over.n_max.or(file.n_max) {
            walk = walk.with_n_max(n_max);
        }
        if let Some(mode) = over.free_mode.or(file.free_mode) {
            walk = walk.with_free_mode(mode.to_mode());
        }

        let classes: Vec<i32> = match (&over.ratchet, &file.ratchet) {
            (Some(text), _) => parse_list(text, "ratchet class")?,
            (None, Some(list)) => list.clone(),
            (None, None) => vec![0, 1],
        };
        let mut ratchet = RatchetSpec::symmetric(&classes);
        let weights = match &over.weights {
            Some(text) => {
                let parts: Vec<f64> = parse_list(text, "weight")?;
                if parts.len() != 2 {
                    bail!("--weights needs exactly two values, got {}", parts.len());
                }
                Some([parts[0], parts[1]])
            }
            None => file.weights,
        };
        if let Some([b1, b2]) = weights {
            ratchet = ratchet.with_weights(b1, b2);
        }
        if let Some(phase) = over.phase.or(file.phase) {
            ratchet = ratchet.with_phase(phase);
        }

        let resolved = Self {
            walk,
            ratchet,
            fwhm: over.fwhm.or(file.fwhm).unwrap_or(0.0),
            samples: over.samples.or(file.samples).unwrap_or(64),
            seed: over.seed.or(file.seed).unwrap_or(1),
            route: over.route.or(file.route),
            out: over.out.clone().or(file.out),
            plot: over.plot || file.plot.unwrap_or(false),
            tolerance: over.tolerance.or(file.tolerance).unwrap_or(CROSS_ROUTE_TOL),
            exclude_initial: over.exclude_initial || file.exclude_initial.unwrap_or(false),
        };
        resolved.walk.validate()?;
        resolved.ratchet.validate()?;
        if !(resolved.tolerance.is_finite() && resolved.tolerance >= 0.0) {
            bail!("tolerance must be a nonnegative number, got {}", resolved.tolerance);
        }
        if !(resolved.fwhm.is_finite() && resolved.fwhm >= 0.0) {
            bail!("fwhm must be a nonnegative number, got {}", resolved.fwhm);
        }
        if resolved.plot && resolved.out.is_none() {
            bail!("--plot needs --out DIR to place the SVG files");
        }
        Ok(resolved)
    }

    /// Ensemble specification when quasimomentum averaging is requested.
    pub fn ensemble(&self, route: Route) -> Option<EnsembleSpec> {
        (self.fwhm > 0.0)
            .then(|| EnsembleSpec::new(self.fwhm, self.samples, self.seed).with_route(route))
    }

    /// Analytic route to use, defaulting by validity domain: the closed form
    /// at exact resonance, the path sum otherwise.
    pub fn analytic_route(&self) -> RouteArg {
        self.route.unwrap_or(if self.walk.beta == 0.0 && self.fwhm == 0.0 {
            RouteArg::Resonant
        } else {
            RouteArg::NearResonant
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Harness {
        #[command(flatten)]
        over: Overrides,
    }

    fn resolve(args: &[&str]) -> Result<Resolved> {
        let mut argv = vec!["test"];
        argv.extend_from_slice(args);
        Resolved::from(&Harness::parse_from(argv).over)
    }

    #[test]
    fn defaults_without_file_or_flags() {
        let r = resolve(&[]).unwrap();
        assert_eq!(r.walk.k, 2.0);
        assert_eq!(r.walk.steps, 10);
        assert_eq!(r.ratchet.classes, vec![0, 1]);
        assert_eq!(r.tolerance, CROSS_ROUTE_TOL);
        assert!(r.ensemble(Route::Simulation).is_none());
        assert_eq!(r.analytic_route(), RouteArg::Resonant);
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join("kwalk-run-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "k = 1.0\nsteps = 3\nratchet = [0, 1, 2]\n").unwrap();
        let path_str = path.to_str().unwrap();
        let r = resolve(&["--config", path_str, "--k", "2.5"]).unwrap();
        assert_eq!(r.walk.k, 2.5);
        assert_eq!(r.walk.steps, 3);
        assert_eq!(r.ratchet.classes, vec![0, 1, 2]);
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = std::env::temp_dir().join("kwalk-run-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("typo.toml");
        std::fs::write(&path, "kick_strenght = 2.0\n").unwrap();
        let err = resolve(&["--config", path.to_str().unwrap()]).unwrap_err();
        assert!(format!("{err:#}").contains("typo.toml"));
    }

    #[test]
    fn near_resonant_default_when_beta_set() {
        let r = resolve(&["--beta", "1e-3"]).unwrap();
        assert_eq!(r.analytic_route(), RouteArg::NearResonant);
        let ens = resolve(&["--fwhm", "0.01"]).unwrap();
        assert_eq!(ens.analytic_route(), RouteArg::NearResonant);
    }

    #[test]
    fn list_flags_parse() {
        let r = resolve(&["--ratchet", "0, 1, 2", "--weights", "0.6,0.8"]).unwrap();
        assert_eq!(r.ratchet.classes, vec![0, 1, 2]);
        assert_eq!(r.ratchet.weights, (0.6, 0.8));
        assert!(resolve(&["--weights", "0.6"]).is_err());
        assert!(resolve(&["--ratchet", "0,x"]).is_err());
    }

    #[test]
    fn plot_requires_out_dir() {
        assert!(resolve(&["--plot"]).is_err());
        assert!(resolve(&["--plot", "--out", "somewhere"]).is_ok());
    }
}
