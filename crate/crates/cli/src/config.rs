use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Wired spanning forests of a lattice box
    Sample,
    /// Effective resistance in wired boxes, or on an edge-list graph
    Resistance,
    /// Direct vs resampled law of the forest inside a ball
    ResampleTest,
    /// Cut times of a two-sided walk against the Z bounds
    Cuttime,
    /// Edges joining bushes far apart along the ray
    Njl,
    /// Resistance along the ray of the origin
    Growth,
    /// Escape resistance of the origin's component over growing boxes
    Recurrence,
    /// Two boxes of Z^5 joined by a bridge
    Counterexample,
    /// Return times of small Markov chains
    Kac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chain {
    ThreeCycle,
    TwoState,
}

/// Flags and config-file fields share one shape; a flag overrides the
/// file value of the same name.
#[derive(Debug, Clone, Default, Parser, Serialize, Deserialize)]
#[command(
    name = "forestlab",
    version,
    about = "Wired spanning forest experiments"
)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    #[arg(value_enum)]
    pub experiment: Option<Experiment>,
    /// JSON file with any of the fields below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Largest graph any step may build
    #[arg(long)]
    pub budget_vertices: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Lattice dimension
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<usize>>,
    /// Ball radius for resample-test
    #[arg(long)]
    pub ball: Option<usize>,
    /// Run the exhaustive resampling check instead of the sampled one
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exact: Option<bool>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Walk horizon for cuttime
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<usize>>,
    /// Truncation of the heat-kernel series for Z_1, Z_2
    #[arg(long)]
    pub z_truncation: Option<usize>,
    /// Largest acceptable share of censored samples
    #[arg(long)]
    pub censor_threshold: Option<f64>,
    /// Share of the ray dropped at the root end
    #[arg(long)]
    pub ray_drop: Option<f64>,
    /// Lattice points for resistance (comma separated coordinates)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<i64>>,
    /// Edge-list file for resistance between vertex sets --a and --b
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub chain: Option<Chain>,
    /// Significance level of statistical checks
    #[arg(long)]
    pub alpha: Option<f64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    /// File values, overridden by every flag that was given.
    pub fn resolve(flags: ExperimentConfig) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => read_config(path)?,
            None => ExperimentConfig::default(),
        };
        overlay!(
            cfg,
            flags,
            experiment,
            seed,
            threads,
            budget_vertices,
            out,
            d,
            radius,
            radii,
            ball,
            exact,
            replicas,
            samples,
            horizon,
            ns,
            ms,
            z_truncation,
            censor_threshold,
            ray_drop,
            x,
            y,
            graph,
            a,
            b,
            chain,
            alpha
        );
        cfg.config = None;
        if cfg.experiment.is_none() {
            return Err(CliError::config("experiment", "no experiment given"));
        }
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
            .expect("resolved config names an experiment")
    }

    fn fill_defaults(&mut self) {
        use Experiment::*;
        let e = self.experiment();
        self.seed.get_or_insert(0);
        self.out.get_or_insert_with(|| PathBuf::from("out"));
        self.alpha.get_or_insert(1e-3);
        let (d, r) = match e {
            Sample => (5, 3),
            Resistance => (5, 0),
            ResampleTest => (5, 4),
            Cuttime => (7, 0),
            Njl => (8, 3),
            Growth => (5, 4),
            Recurrence => (8, 0),
            Counterexample => (5, 2),
            Kac => (0, 0),
        };
        if d > 0 {
            self.d.get_or_insert(d);
        }
        if r > 0 {
            self.radius.get_or_insert(r);
        }
        match e {
            Sample => {
                self.replicas.get_or_insert(1);
            }
            Resistance => {
                if self.graph.is_none() {
                    self.radii.get_or_insert_with(|| vec![1, 2, 3, 4]);
                    let dim = self.d.unwrap_or(5);
                    self.x.get_or_insert_with(|| vec![0; dim]);
                    self.y.get_or_insert_with(|| {
                        let mut y = vec![0; dim];
                        y[0] = 1;
                        y
                    });
                }
            }
            ResampleTest => {
                self.ball.get_or_insert(1);
                self.replicas.get_or_insert(100_000);
                self.exact.get_or_insert(false);
            }
            Cuttime => {
                self.horizon.get_or_insert(100_000);
                self.samples.get_or_insert(10_000);
                self.ns.get_or_insert_with(|| vec![1, 2, 4, 8]);
                self.z_truncation.get_or_insert(10_000);
                self.censor_threshold.get_or_insert(0.01);
            }
            Njl => {
                self.replicas.get_or_insert(1000);
                self.ns.get_or_insert_with(|| vec![1, 2, 3]);
                self.ms.get_or_insert_with(|| vec![2, 3, 4, 5, 6, 8]);
                self.ray_drop.get_or_insert(0.1);
            }
            Growth => {
                self.replicas.get_or_insert(100);
                self.ray_drop.get_or_insert(0.1);
            }
            Recurrence => {
                self.radii.get_or_insert_with(|| vec![1, 2, 3]);
                self.ray_drop.get_or_insert(0.1);
            }
            Counterexample => {
                self.replicas.get_or_insert(10_000);
            }
            Kac => {
                self.chain.get_or_insert(Chain::ThreeCycle);
                self.samples.get_or_insert(1_000_000);
            }
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        use Experiment::*;
        let e = self.experiment();
        let positive = |name: &'static str, v: Option<u64>| match v {
            Some(0) => Err(CliError::config(name, "must be positive")),
            _ => Ok(()),
        };
        positive("replicas", self.replicas)?;
        positive("samples", self.samples)?;
        positive("threads", self.threads.map(|t| t as u64))?;
        positive("budget-vertices", self.budget_vertices)?;
        if let Some(d) = self.d {
            if d == 0 {
                return Err(CliError::config("d", "dimension must be positive"));
            }
        }
        if matches!(e, Sample | ResampleTest | Njl | Growth | Counterexample)
            && self.radius == Some(0)
        {
            return Err(CliError::config("radius", "must be positive"));
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() || radii.contains(&0) || radii.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::config(
                    "radii",
                    "must be positive and strictly increasing",
                ));
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(CliError::config("alpha", "must lie in (0, 1)"));
            }
        }
        if let Some(f) = self.ray_drop {
            if !(0.0..1.0).contains(&f) {
                return Err(CliError::config("ray-drop", "must lie in [0, 1)"));
            }
        }
        match e {
            ResampleTest => {
                if !self.exact.unwrap_or(false) && self.ball >= self.radius {
                    return Err(CliError::config(
                        "ball",
                        "must be smaller than the box radius",
                    ));
                }
            }
            Cuttime => {
                if self.d.is_some_and(|d| d < 3) {
                    return Err(CliError::config("d", "cut times need d >= 3"));
                }
                if self.ns.as_ref().is_some_and(|ns| ns.is_empty()) {
                    return Err(CliError::config("ns", "must not be empty"));
                }
                if self.z_truncation.is_some_and(|t| t < 2) {
                    return Err(CliError::config("z-truncation", "must be at least 2"));
                }
            }
            Njl => {
                let ns = self.ns.as_deref().unwrap_or_default();
                let ms = self.ms.as_deref().unwrap_or_default();
                if ns.is_empty() || ms.is_empty() || ms.contains(&0) {
                    return Err(CliError::config(
                        "ms",
                        "ns and ms must be nonempty, ms positive",
                    ));
                }
            }
            Resistance => {
                if self.graph.is_some() {
                    if self.a.is_none() || self.b.is_none() {
                        return Err(CliError::config(
                            "a",
                            "--graph needs vertex sets --a and --b",
                        ));
                    }
                } else {
                    let d = self.d.unwrap_or(0);
                    for (name, p) in [("x", &self.x), ("y", &self.y)] {
                        if p.as_ref().is_some_and(|p| p.len() != d) {
                            return Err(CliError::config(name, format!("needs {d} coordinates")));
                        }
                    }
                }
            }
            Counterexample if self.d.is_some_and(|d| d != 5) => {
                return Err(CliError::config("d", "the counterexample lives in Z^5"));
            }
            _ => {}
        }
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> ExperimentConfig {
        ExperimentConfig::try_parse_from(std::iter::once("forestlab").chain(args.iter().copied()))
            .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::resolve(parse(&["cuttime"])).unwrap();
        assert_eq!(cfg.d, Some(7));
        assert_eq!(cfg.horizon, Some(100_000));
        assert_eq!(cfg.ns, Some(vec![1, 2, 4, 8]));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"experiment": "sample", "radius": 2, "replicas": 5}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cfg = ExperimentConfig::resolve(parse(&["--config", p, "--radius", "3"])).unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::Sample));
        assert_eq!(cfg.radius, Some(3));
        assert_eq!(cfg.replicas, Some(5));
    }

    #[test]
    fn bad_fields_are_named() {
        let err =
            ExperimentConfig::resolve(parse(&["resample-test", "--radius", "2", "--ball", "2"]))
                .unwrap_err();
        assert!(err.to_string().contains("`ball`"));
        let err = ExperimentConfig::resolve(parse(&["recurrence", "--radii", "3,2"])).unwrap_err();
        assert!(err.to_string().contains("`radii`"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"experiment": "sample", "radious": 2}"#).unwrap();
        let err =
            ExperimentConfig::resolve(parse(&["--config", path.to_str().unwrap()])).unwrap_err();
        assert!(err.to_string().contains("radious"));
    }
}
