//! Flat `key = value` experiment files.
//!
//! ```text
//! # two EPR pairs on the phi14 = -phi23 line
//! r = 0.5
//! s = 0.3
//! beta1 = 1
//! beta3 = 0.8
//! phi1 = 60deg
//! phi2 = -60deg
//! phi3 = 0
//! phi4 = 0
//! kind_12 = epr
//! kind_34 = epr
//! gamma_cavity = 5e6     # optional, Hz
//! ```
//!
//! Angles are radians unless suffixed with `deg`. `beta2`/`beta4` may be
//! given but must equal `beta1`/`beta3`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use squeezetap::{ExperimentConfig, InputKind, PairSource, Phases};

use crate::output::exact;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }

    fn key(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            key: Some(key.to_owned()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key `{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub gamma_cavity: Option<f64>,
}

const REQUIRED: [&str; 10] = [
    "r", "s", "beta1", "beta3", "phi1", "phi2", "phi3", "phi4", "kind_12", "kind_34",
];
const OPTIONAL: [&str; 3] = ["gamma_cavity", "beta2", "beta4"];

/// Parses a real number, or an angle when `angle` is set (`deg` suffix
/// converts from degrees).
pub fn parse_number(text: &str, angle: bool) -> Result<f64, String> {
    let text = text.trim();
    let (digits, scale) = match text.strip_suffix("deg") {
        Some(rest) if angle => (rest.trim_end(), std::f64::consts::PI / 180.0),
        _ => (text, 1.0),
    };
    let value: f64 = digits
        .parse()
        .map_err(|_| format!("invalid number `{text}`"))?;
    if !value.is_finite() {
        return Err(format!("value `{text}` is not finite"));
    }
    Ok(value * scale)
}

struct Entry {
    line: usize,
    value: String,
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::at(
                line,
                None,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let key = key.trim();
        if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
            return Err(ConfigError::at(line, Some(key), "unknown key"));
        }
        if let Some(prev) = entries.get(key) {
            return Err(ConfigError::at(
                line,
                Some(key),
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
        entries.insert(
            key.to_owned(),
            Entry {
                line,
                value: value.trim().to_owned(),
            },
        );
    }
    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(ConfigError::key(key, "missing required key"));
        }
    }

    let number = |key: &str, angle: bool| -> Result<Option<f64>, ConfigError> {
        entries
            .get(key)
            .map(|e| {
                parse_number(&e.value, angle).map_err(|msg| ConfigError::at(e.line, Some(key), msg))
            })
            .transpose()
    };
    let required = |key: &str, angle: bool| number(key, angle).map(|v| v.expect("checked above"));
    let kind = |key: &str| -> Result<InputKind, ConfigError> {
        let e = &entries[key];
        e.value
            .parse()
            .map_err(|msg: String| ConfigError::at(e.line, Some(key), msg))
    };
    let pair = |kind_key: &str, r_key: &str, beta_key: &str| -> Result<PairSource, ConfigError> {
        PairSource::new(
            kind(kind_key)?,
            required(r_key, false)?,
            required(beta_key, false)?,
        )
        .map_err(|err| {
            ConfigError::at(
                entries[r_key].line.max(entries[beta_key].line),
                None,
                err.to_string(),
            )
        })
    };
    for (alias, key) in [("beta2", "beta1"), ("beta4", "beta3")] {
        if let Some(value) = number(alias, false)? {
            if value != required(key, false)? {
                return Err(ConfigError::at(
                    entries[alias].line,
                    Some(alias),
                    format!(
                        "must equal `{key}`: unequal amplitudes within a pair are not supported"
                    ),
                ));
            }
        }
    }

    let phases = Phases::new(
        required("phi1", true)?,
        required("phi2", true)?,
        required("phi3", true)?,
        required("phi4", true)?,
    );
    let experiment = ExperimentConfig::new(
        pair("kind_12", "r", "beta1")?,
        pair("kind_34", "s", "beta3")?,
        phases,
    )
    .map_err(|err| ConfigError::key("phi", err.to_string()))?;

    let gamma_cavity = number("gamma_cavity", false)?;
    if let Some(gamma) = gamma_cavity {
        if gamma <= 0.0 {
            return Err(ConfigError::at(
                entries["gamma_cavity"].line,
                Some("gamma_cavity"),
                "must be > 0",
            ));
        }
    }
    Ok(RunConfig {
        experiment,
        gamma_cavity,
    })
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {err}", path.display()),
    })?;
    parse(&text)
}

/// Resolved `key = value` lines, exact enough to re-parse bit-identically.
pub fn dump_lines(cfg: &RunConfig) -> Vec<String> {
    let e = &cfg.experiment;
    let p = e.phases();
    let mut lines = vec![
        format!("r = {}", exact(e.r())),
        format!("s = {}", exact(e.s())),
        format!("beta1 = {}", exact(e.beta1())),
        format!("beta3 = {}", exact(e.beta3())),
        format!("phi1 = {}", exact(p.phi1)),
        format!("phi2 = {}", exact(p.phi2)),
        format!("phi3 = {}", exact(p.phi3)),
        format!("phi4 = {}", exact(p.phi4)),
        format!("kind_12 = {}", e.kind_12()),
        format!("kind_34 = {}", e.kind_34()),
    ];
    if let Some(gamma) = cfg.gamma_cavity {
        lines.push(format!("gamma_cavity = {}", exact(gamma)));
    }
    lines
}

pub fn dump(cfg: &RunConfig) -> String {
    let mut text = dump_lines(cfg).join("\n");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "r = 0.5\ns = 0.3\nbeta1 = 1\nbeta3 = 0.8\nphi1 = 0.7\nphi2 = -0.7\nphi3 = 0\nphi4 = 0\nkind_12 = epr\nkind_34 = epr\n";

    #[test]
    fn parses_minimal_file() {
        let cfg = parse(BASE).unwrap();
        assert_eq!(cfg.experiment.r(), 0.5);
        assert_eq!(cfg.experiment.phases().phi2, -0.7);
        assert_eq!(cfg.gamma_cavity, None);
    }

    #[test]
    fn degrees_and_comments() {
        let text = BASE.replace("phi1 = 0.7", "phi1 = 90deg   # quarter turn")
            + "\n# trailing comment\n gamma_cavity=2e6\n";
        let cfg = parse(&text).unwrap();
        assert!((cfg.experiment.phases().phi1 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(cfg.gamma_cavity, Some(2e6));
        assert!(parse(&BASE.replace("phi1 = 0.7", "phi1 = 45 deg")).is_ok());
        // deg only for angles
        assert!(parse(&BASE.replace("r = 0.5", "r = 5deg")).is_err());
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = parse(&BASE.replace("phi3 = 0", "phi3 = zero")).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert_eq!(err.key.as_deref(), Some("phi3"));

        let err = parse(&BASE.replace("s = 0.3\n", "")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("s"));
        assert!(err.to_string().contains("missing"));

        let err = parse(&(BASE.to_owned() + "colour = red\n")).unwrap_err();
        assert_eq!((err.line, err.key.as_deref()), (Some(11), Some("colour")));

        let err = parse(&(BASE.to_owned() + "r = 1\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"));

        let err = parse(&BASE.replace("beta3 = 0.8", "beta3 0.8")).unwrap_err();
        assert_eq!(err.line, Some(4));

        assert!(parse(&BASE.replace("kind_12 = epr", "kind_12 = laser")).is_err());
        assert!(parse(&BASE.replace("r = 0.5", "r = -0.5")).is_err());
        assert!(parse(&BASE.replace("r = 0.5", "r = nan")).is_err());
        assert!(parse(&(BASE.to_owned() + "gamma_cavity = 0\n")).is_err());
    }

    #[test]
    fn intra_pair_amplitudes_must_match() {
        assert!(parse(&(BASE.to_owned() + "beta2 = 1\nbeta4 = 0.8\n")).is_ok());
        let err = parse(&(BASE.to_owned() + "beta2 = 1.5\n")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("beta2"));
    }

    #[test]
    fn vacuum_kind_is_resolved() {
        let cfg = parse(&BASE.replace("kind_34 = epr", "kind_34 = vacuum")).unwrap();
        assert_eq!((cfg.experiment.s(), cfg.experiment.beta3()), (0.0, 0.0));
        assert!(dump(&cfg).contains("s = 0.0000000000000000e0"));
    }

    #[test]
    fn dump_round_trips() {
        let text = BASE.replace("phi1 = 0.7", "phi1 = 33.3deg") + "gamma_cavity = 1.234e6\n";
        let cfg = parse(&text).unwrap();
        let again = parse(&dump(&cfg)).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(dump(&cfg), dump(&again));
    }
}
