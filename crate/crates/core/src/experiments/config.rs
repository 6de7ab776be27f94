//! Line-based `key = value` experiment configuration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sampled::TimeGrid;

/// The experiments known to [`super::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Heatflow,
    AvgMoments,
    Renewal,
    LocalSmoothness,
    Concentration,
    Gradient,
    L2Bound,
    LimitProfile,
    Hydrodynamic,
    SplittingTv,
    CutoffCurve,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::Heatflow,
        Experiment::AvgMoments,
        Experiment::Renewal,
        Experiment::LocalSmoothness,
        Experiment::Concentration,
        Experiment::Gradient,
        Experiment::L2Bound,
        Experiment::LimitProfile,
        Experiment::Hydrodynamic,
        Experiment::SplittingTv,
        Experiment::CutoffCurve,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Heatflow => "heatflow",
            Experiment::AvgMoments => "avg-moments",
            Experiment::Renewal => "renewal",
            Experiment::LocalSmoothness => "local-smoothness",
            Experiment::Concentration => "concentration",
            Experiment::Gradient => "gradient",
            Experiment::L2Bound => "l2-bound",
            Experiment::LimitProfile => "limit-profile",
            Experiment::Hydrodynamic => "hydrodynamic",
            Experiment::SplittingTv => "splitting-tv",
            Experiment::CutoffCurve => "cutoff-curve",
        }
    }

    /// Keys that must appear in the configuration.
    pub fn required_keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::Heatflow => &["N", "t | t_stop"],
            Experiment::AvgMoments => &["N", "t | t_stop", "replicas"],
            Experiment::Renewal => &["N", "t_stop"],
            Experiment::LocalSmoothness => &["N", "t_stop"],
            Experiment::Concentration => &["N", "t_stop", "replicas"],
            Experiment::Gradient => &["N", "t_stop"],
            Experiment::L2Bound => &["N", "t_stop"],
            Experiment::LimitProfile => &["sides", "t | t_stop"],
            Experiment::Hydrodynamic => &["sides", "t | t_stop", "replicas"],
            Experiment::SplittingTv => &["N", "k", "t | t_stop"],
            Experiment::CutoffCurve => &["N", "k", "a_start", "a_stop"],
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Experiment::Heatflow => "one-dimensional kernel, heat flow along an axis, Dirichlet energy and benchmark profile",
            Experiment::AvgMoments => "Monte Carlo moments of the averaging process against exact values",
            Experiment::Renewal => "renewal-equation solution against the exact difference kernel",
            Experiment::LocalSmoothness => "g <= u, constructive lower chain and series upper bound",
            Experiment::Concentration => "fluctuation identity against Monte Carlo and sandwich ratios",
            Experiment::Gradient => "gradient across an edge at the origin and its bound shape",
            Experiment::L2Bound => "exact routes to the L2 distance and its bound shape",
            Experiment::LimitProfile => "rescaled L^p distance against the continuum heat kernel",
            Experiment::Hydrodynamic => "tested mass against the continuum heat equation",
            Experiment::SplittingTv => "exact worst-case TV of the splitting process and its L2 bound",
            Experiment::CutoffCurve => "TV at T(a) over a window of a values",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL.iter().copied().find(|e| e.name() == s).ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Smooth initial densities available to the hydrodynamic experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialDensity {
    Uniform,
    /// `1 + ½ cos(2π u₁)`.
    Cosine,
}

/// Test functions available to the hydrodynamic experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    One,
    /// `cos(2π u₁)`.
    Cosine,
}

/// Times at which an experiment is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl TimeSpec {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeSpec::List(v) => v.clone(),
            TimeSpec::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=count).map(|i| start + i as f64 * step).collect()
            }
        }
    }
}

pub const KNOWN_KEYS: [&str; 20] = [
    "experiment", "d", "N", "sides", "t", "t_start", "t_stop", "t_step", "t_count", "p", "replicas", "seed",
    "tol", "k", "a_start", "a_stop", "a_step", "initial", "test_function", "output",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub d: usize,
    pub n: Option<usize>,
    pub sides: Vec<usize>,
    pub times: Option<TimeSpec>,
    pub p: f64,
    pub replicas: usize,
    pub seed: u64,
    pub tol: f64,
    pub k: Option<usize>,
    pub a_range: Option<(f64, f64, f64)>,
    pub initial: InitialDensity,
    pub test_function: TestFunction,
    pub output: Option<String>,
    /// `(key, value)` pairs as written, for the provenance block.
    pub echo: Vec<(String, String)>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config { line, message: format!("`{key}`: cannot parse `{value}`") })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| parse_value(line, key, v.trim())).collect()
}

/// Parses and validates a configuration; errors carry the offending line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut echo: Vec<(String, String)> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config { line, message: format!("expected `key = value`, found `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config { line, message: format!("unknown key `{key}`") });
        }
        if echo.iter().any(|(k, _)| k == key) {
            return Err(Error::Config { line, message: format!("duplicate key `{key}`") });
        }
        if value.is_empty() {
            return Err(Error::Config { line, message: format!("`{key}` has no value") });
        }
        echo.push((key.to_string(), value.to_string()));
        lines_of.push(line);
    }
    let find = |key: &str| echo.iter().position(|(k, _)| k == key).map(|i| (lines_of[i], echo[i].1.as_str()));
    let last_line = text.lines().count().max(1);
    let missing = |key: &str| Error::Config { line: last_line, message: format!("missing required key `{key}`") };

    let d = match find("d") {
        Some((line, v)) => {
            let d: usize = parse_value(line, "d", v)?;
            if d == 0 {
                return Err(Error::Config { line, message: "d must be at least 1".into() });
            }
            d
        }
        None => 1,
    };
    let check_side = |line: usize, n: usize| -> Result<usize> {
        if n < 3 {
            Err(Error::Config { line, message: format!("N = {n} is below the minimum 3") })
        } else {
            Ok(n)
        }
    };
    let n = match find("N") {
        Some((line, v)) => Some(check_side(line, parse_value(line, "N", v)?)?),
        None => None,
    };
    let sides = match find("sides") {
        Some((line, v)) => parse_list::<usize>(line, "sides", v)?
            .into_iter()
            .map(|n| check_side(line, n))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let p = match find("p") {
        Some((line, v)) => {
            let p: f64 = parse_value(line, "p", v)?;
            if !(1.0..=2.0).contains(&p) {
                return Err(Error::Config { line, message: format!("p = {p} is outside [1, 2]") });
            }
            p
        }
        None => 2.0,
    };
    let (line, name) = find("experiment").ok_or_else(|| missing("experiment"))?;
    let experiment: Experiment = name.parse().map_err(|message| Error::Config { line, message })?;

    let nonneg_real = |key: &str| -> Result<Option<f64>> {
        match find(key) {
            Some((line, v)) => {
                let x: f64 = parse_value(line, key, v)?;
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::Config { line, message: format!("`{key}` must be finite and nonnegative") });
                }
                Ok(Some(x))
            }
            None => Ok(None),
        }
    };
    let times = if let Some((line, v)) = find("t") {
        if ["t_start", "t_stop", "t_step", "t_count"].iter().any(|k| find(k).is_some()) {
            return Err(Error::Config { line, message: "`t` cannot be combined with a time range".into() });
        }
        let list: Vec<f64> = parse_list(line, "t", v)?;
        if list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config { line, message: "times must be finite and nonnegative".into() });
        }
        if list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config { line, message: "times must be nondecreasing".into() });
        }
        Some(TimeSpec::List(list))
    } else if let Some(stop) = nonneg_real("t_stop")? {
        let start = nonneg_real("t_start")?.unwrap_or(0.0);
        let (line, _) = find("t_stop").unwrap();
        if stop < start {
            return Err(Error::Config { line, message: "t_stop is below t_start".into() });
        }
        let step = match (find("t_step"), find("t_count")) {
            (Some(_), Some((line, _))) => {
                return Err(Error::Config { line, message: "give t_step or t_count, not both".into() })
            }
            (Some((line, v)), None) => {
                let s: f64 = parse_value(line, "t_step", v)?;
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::Config { line, message: "t_step must be positive".into() });
                }
                s
            }
            (None, Some((line, v))) => {
                let c: usize = parse_value(line, "t_count", v)?;
                if c < 2 || stop == start {
                    return Err(Error::Config { line, message: "t_count needs at least 2 distinct points".into() });
                }
                (stop - start) / (c - 1) as f64
            }
            (None, None) => 1.0 / 16.0,
        };
        Some(TimeSpec::Range { start, stop, step })
    } else {
        for key in ["t_start", "t_step", "t_count"] {
            if let Some((line, _)) = find(key) {
                return Err(Error::Config { line, message: format!("`{key}` requires t_stop") });
            }
        }
        None
    };
    let replicas = match find("replicas") {
        Some((line, v)) => parse_value(line, "replicas", v)?,
        None => 0,
    };
    let seed = match find("seed") {
        Some((line, v)) => parse_value(line, "seed", v)?,
        None => 0,
    };
    let tol = match find("tol") {
        Some((line, v)) => {
            let tol: f64 = parse_value(line, "tol", v)?;
            if !(tol > 0.0 && tol <= 1e-6) {
                return Err(Error::Config { line, message: "tol must lie in (0, 1e-6]".into() });
            }
            tol
        }
        None => 1e-12,
    };
    let k = match find("k") {
        Some((line, v)) => {
            let k: usize = parse_value(line, "k", v)?;
            if k == 0 {
                return Err(Error::Config { line, message: "k must be at least 1".into() });
            }
            Some(k)
        }
        None => None,
    };
    let a_range = match (find("a_start"), find("a_stop")) {
        (Some((l1, a)), Some((l2, b))) => {
            let a: f64 = parse_value(l1, "a_start", a)?;
            let b: f64 = parse_value(l2, "a_stop", b)?;
            if b < a {
                return Err(Error::Config { line: l2, message: "a_stop is below a_start".into() });
            }
            let step = match find("a_step") {
                Some((line, v)) => {
                    let s: f64 = parse_value(line, "a_step", v)?;
                    if s.is_nan() || s <= 0.0 {
                        return Err(Error::Config { line, message: "a_step must be positive".into() });
                    }
                    s
                }
                None => 0.5,
            };
            Some((a, b, step))
        }
        (Some((line, _)), None) | (None, Some((line, _))) => {
            return Err(Error::Config { line, message: "a_start and a_stop go together".into() })
        }
        (None, None) => None,
    };
    let initial = match find("initial") {
        Some((_, "uniform")) | None => InitialDensity::Uniform,
        Some((_, "cosine")) => InitialDensity::Cosine,
        Some((line, v)) => return Err(Error::Config { line, message: format!("unknown initial density `{v}`") }),
    };
    let test_function = match find("test_function") {
        Some((_, "cosine")) | None => TestFunction::Cosine,
        Some((_, "one")) => TestFunction::One,
        Some((line, v)) => return Err(Error::Config { line, message: format!("unknown test function `{v}`") }),
    };
    let output = find("output").map(|(_, v)| v.to_string());

    let config = ExperimentConfig {
        experiment,
        d,
        n,
        sides,
        times,
        p,
        replicas,
        seed,
        tol,
        k,
        a_range,
        initial,
        test_function,
        output,
        echo,
    };
    check_required(&config, last_line)?;
    Ok(config)
}

fn check_required(c: &ExperimentConfig, line: usize) -> Result<()> {
    let err = |message: String| Err(Error::Config { line, message });
    for key in c.experiment.required_keys() {
        let present = match *key {
            "N" => c.n.is_some(),
            "sides" => !c.sides.is_empty(),
            "k" => c.k.is_some(),
            "replicas" => c.replicas > 0,
            "a_start" | "a_stop" => c.a_range.is_some(),
            "t_stop" => matches!(c.times, Some(TimeSpec::Range { .. })),
            "t | t_stop" => c.times.is_some(),
            _ => true,
        };
        if !present {
            return err(format!("experiment `{}` requires `{key}`", c.experiment));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Overrides the master seed and records it in the echo.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        match self.echo.iter_mut().find(|(k, _)| k == "seed") {
            Some(entry) => entry.1 = seed.to_string(),
            None => self.echo.push(("seed".into(), seed.to_string())),
        }
        self
    }

    pub fn times(&self) -> Vec<f64> {
        self.times.as_ref().map(|t| t.times()).unwrap_or_default()
    }

    /// A uniform grid from zero, for experiments that integrate in time.
    pub fn uniform_grid(&self) -> Result<TimeGrid> {
        match &self.times {
            Some(TimeSpec::Range { start, stop, step }) if *start == 0.0 => TimeGrid::new(*step, *stop),
            _ => Err(Error::Config { line: 0, message: "this experiment needs t_stop (and t_step) with t_start = 0".into() }),
        }
    }

    pub fn side(&self) -> Result<usize> {
        self.n.ok_or(Error::Config { line: 0, message: "missing `N`".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_example() {
        let c = parse_config("d = 1\nN = 8\nexperiment = concentration\nreplicas = 10000\nseed = 42\nt_stop = 4").unwrap();
        assert_eq!(c.experiment, Experiment::Concentration);
        assert_eq!((c.d, c.n, c.replicas, c.seed), (1, Some(8), 10_000, 42));
    }

    #[test]
    fn rejects_small_side_and_bad_exponent() {
        let e = parse_config("N = 2").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }), "{e}");
        assert!(e.to_string().contains("minimum 3"));
        let e = parse_config("experiment = heatflow\nN = 4\np = 3").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
        assert!(e.to_string().contains("[1, 2]"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        assert!(matches!(parse_config("# hi\nfoo = 1").unwrap_err(), Error::Config { line: 2, .. }));
        let e = parse_config("experiment = splitting-tv\nN = 3\nt = 0").unwrap_err();
        assert!(e.to_string().contains("`k`"));
        assert!(parse_config("experiment = heatflow\nN = x").is_err());
    }

    #[test]
    fn time_specs() {
        let c = parse_config("experiment = heatflow\nN = 4\nt_stop = 1\nt_step = 0.25").unwrap();
        assert_eq!(c.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let c = parse_config("experiment = heatflow\nN = 4\nt = 1, 4, 16 # list").unwrap();
        assert_eq!(c.times(), vec![1.0, 4.0, 16.0]);
        let c = parse_config("experiment = heatflow\nN = 4\nt_start = 1\nt_stop = 2\nt_count = 3").unwrap();
        assert_eq!(c.times(), vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn seed_override_is_echoed() {
        let c = parse_config("experiment = heatflow\nN = 4\nt = 1\nseed = 3").unwrap().with_seed(9);
        assert_eq!(c.seed, 9);
        assert!(c.echo.contains(&("seed".to_string(), "9".to_string())));
    }
}
