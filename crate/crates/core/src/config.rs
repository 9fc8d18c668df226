//! Run configuration: a flat TOML file overlaid with command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correlation::{DEFAULT_K_MAX_BRUTE, HARD_K_MAX_BRUTE};
use crate::error::{Error, Result};
use crate::gen_nil::{Precision, DEFAULT_EXACT_LIMIT, DEFAULT_PRECISION};
use crate::nets::Family;
use crate::radix::{BasisRule, RadixBasis};
use crate::rng::RngKind;

pub const DEFAULT_LEVELS: usize = 20;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BUDGET: f64 = 3.0;
pub const DEFAULT_EPSILON: f64 = 1.5;
pub const DEFAULT_MAX_MEMBERS: u64 = 1 << 31;
pub const DEFAULT_OUT_DIR: &str = "out";
pub const OUT_DIR_ENV: &str = "CORRSEQ_OUT";

/// Every key optional; used for the config file and for flag overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    /// `"default-shifted"` or a comma-separated modulus list.
    pub basis: Option<String>,
    #[serde(rename = "K")]
    pub levels: Option<usize>,
    pub seed: Option<u64>,
    pub rng: Option<RngKind>,
    pub k_max_brute: Option<usize>,
    pub allow_big: Option<bool>,
    pub epsilon: Option<Vec<f64>>,
    pub families: Option<Vec<Family>>,
    #[serde(rename = "V")]
    pub budget: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub precision: Option<u32>,
    pub exact_limit: Option<usize>,
    pub max_members: Option<u64>,
    pub omega: Option<f64>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `other` wins wherever it is set.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            basis: other.basis.or(self.basis),
            levels: other.levels.or(self.levels),
            seed: other.seed.or(self.seed),
            rng: other.rng.or(self.rng),
            k_max_brute: other.k_max_brute.or(self.k_max_brute),
            allow_big: other.allow_big.or(self.allow_big),
            epsilon: other.epsilon.or(self.epsilon),
            families: other.families.or(self.families),
            budget: other.budget.or(self.budget),
            out_dir: other.out_dir.or(self.out_dir),
            precision: other.precision.or(self.precision),
            exact_limit: other.exact_limit.or(self.exact_limit),
            max_members: other.max_members.or(self.max_members),
            omega: other.omega.or(self.omega),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub basis: BasisRule,
    #[serde(rename = "K")]
    pub levels: usize,
    pub seed: u64,
    pub rng: RngKind,
    pub k_max_brute: usize,
    pub allow_big: bool,
    pub epsilon: Vec<f64>,
    pub families: Vec<Family>,
    #[serde(rename = "V")]
    pub budget: f64,
    pub out_dir: PathBuf,
    pub precision: u32,
    pub exact_limit: usize,
    pub max_members: u64,
    pub omega: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            basis: BasisRule::DefaultShifted,
            levels: DEFAULT_LEVELS,
            seed: DEFAULT_SEED,
            rng: RngKind::default(),
            k_max_brute: DEFAULT_K_MAX_BRUTE,
            allow_big: false,
            epsilon: vec![DEFAULT_EPSILON],
            families: vec![Family::Linear, Family::Quadratic],
            budget: DEFAULT_BUDGET,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            precision: DEFAULT_PRECISION,
            exact_limit: DEFAULT_EXACT_LIMIT,
            max_members: DEFAULT_MAX_MEMBERS,
            omega: None,
        }
    }
}

pub fn parse_basis(text: &str) -> Result<BasisRule> {
    let t = text.trim();
    if t == "default-shifted" || t == "default" {
        return Ok(BasisRule::DefaultShifted);
    }
    let moduli = t
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("basis entry {:?} is not an integer", p.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisRule::Explicit(moduli))
}

/// Validates and fills defaults. `env_out_dir` sits between the flags and
/// the file.
pub fn parse_config(
    file: Option<PartialConfig>,
    flags: PartialConfig,
    env_out_dir: Option<PathBuf>,
) -> Result<RunConfig> {
    let mut merged = file.unwrap_or_default();
    if let Some(env) = env_out_dir {
        merged.out_dir = Some(env);
    }
    let p = merged.overlay(flags);
    let d = RunConfig::default();
    let basis = match p.basis.as_deref() {
        Some(text) => parse_basis(text)?,
        None => BasisRule::DefaultShifted,
    };
    let levels = match (&basis, p.levels) {
        (BasisRule::Explicit(list), Some(k)) if k != list.len() => {
            return Err(Error::Config(format!(
                "K = {k} conflicts with an explicit basis of {} moduli",
                list.len()
            )))
        }
        (BasisRule::Explicit(list), _) => list.len(),
        (BasisRule::DefaultShifted, k) => k.unwrap_or(d.levels),
    };
    let cfg = RunConfig {
        basis,
        levels,
        seed: p.seed.unwrap_or(d.seed),
        rng: p.rng.unwrap_or(d.rng),
        k_max_brute: p.k_max_brute.unwrap_or(d.k_max_brute),
        allow_big: p.allow_big.unwrap_or(d.allow_big),
        epsilon: p.epsilon.unwrap_or(d.epsilon),
        families: p.families.unwrap_or(d.families),
        budget: p.budget.unwrap_or(d.budget),
        out_dir: p.out_dir.unwrap_or(d.out_dir),
        precision: p.precision.unwrap_or(d.precision),
        exact_limit: p.exact_limit.unwrap_or(d.exact_limit),
        max_members: p.max_members.unwrap_or(d.max_members),
        omega: p.omega,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.make_basis()?;
        if self.k_max_brute > HARD_K_MAX_BRUTE {
            return Err(Error::Config(format!(
                "k_max_brute = {} exceeds the hard limit {HARD_K_MAX_BRUTE}",
                self.k_max_brute
            )));
        }
        if self.k_max_brute > DEFAULT_K_MAX_BRUTE && !self.allow_big {
            return Err(Error::Config(format!(
                "k_max_brute = {} needs allow_big",
                self.k_max_brute
            )));
        }
        if self.epsilon.is_empty() || self.epsilon.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config("epsilon values must be positive".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("at least one net family is required".into()));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(Error::Config("V must be non-negative".into()));
        }
        if self.precision < 16 {
            return Err(Error::Config("precision must be at least 16 bits".into()));
        }
        if let Some(w) = self.omega {
            if !(w >= 1.0) {
                return Err(Error::Config("omega override must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn make_basis(&self) -> Result<RadixBasis> {
        RadixBasis::new(&self.basis, self.levels)
    }

    pub fn gen_precision(&self) -> Precision {
        Precision {
            exact_limit: self.exact_limit,
            bits: self.precision,
        }
    }

    pub fn basis_label(&self) -> String {
        match &self.basis {
            BasisRule::DefaultShifted => "default-shifted".to_string(),
            BasisRule::Explicit(list) => {
                list.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
            }
        }
    }

    /// The config as a file that parses back to the same value.
    pub fn to_toml(&self) -> String {
        let p = PartialConfig {
            basis: Some(self.basis_label()),
            levels: Some(self.levels),
            seed: Some(self.seed),
            rng: Some(self.rng),
            k_max_brute: Some(self.k_max_brute),
            allow_big: Some(self.allow_big),
            epsilon: Some(self.epsilon.clone()),
            families: Some(self.families.clone()),
            budget: Some(self.budget),
            out_dir: Some(self.out_dir.clone()),
            precision: Some(self.precision),
            exact_limit: Some(self.exact_limit),
            max_members: Some(self.max_members),
            omega: self.omega,
        };
        toml::to_string(&p).expect("flat config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = parse_config(None, PartialConfig::default(), None).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.levels, 20);
        assert_eq!(c.k_max_brute, 4);
        assert!(c.make_basis().unwrap().is_default_rule());
    }

    #[test]
    fn bad_basis_is_rejected() {
        let flags = PartialConfig {
            basis: Some("3,12".into()),
            ..Default::default()
        };
        let err = parse_config(None, flags, None).unwrap_err();
        assert_eq!(err, RadixBasis::from_moduli(vec![3, 12]).unwrap_err());
        let flags = PartialConfig {
            basis: Some("12,x".into()),
            ..Default::default()
        };
        assert!(matches!(parse_config(None, flags, None), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(PartialConfig::from_toml("foo = 1"), Err(Error::Config(_))));
        assert!(PartialConfig::from_toml("seed = 7\nK = 12").is_ok());
        assert!(PartialConfig::from_toml("seed = \"x\"").is_err());
    }

    #[test]
    fn flags_win_and_conflicts_error() {
        let file = PartialConfig::from_toml("seed = 7\nK = 12\nout_dir = \"from-file\"").unwrap();
        let flags = PartialConfig {
            seed: Some(9),
            ..Default::default()
        };
        let c = parse_config(Some(file.clone()), flags, Some("from-env".into())).unwrap();
        assert_eq!((c.seed, c.levels), (9, 12));
        assert_eq!(c.out_dir, PathBuf::from("from-env"));
        let flags = PartialConfig {
            out_dir: Some("from-flag".into()),
            ..Default::default()
        };
        let c = parse_config(Some(file), flags, Some("from-env".into())).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("from-flag"));

        let explicit = PartialConfig {
            basis: Some("12,27,48".into()),
            levels: Some(5),
            ..Default::default()
        };
        assert!(matches!(parse_config(None, explicit, None), Err(Error::Config(_))));
        let big = PartialConfig {
            k_max_brute: Some(6),
            ..Default::default()
        };
        assert!(parse_config(None, big.clone(), None).is_err());
        let big = PartialConfig {
            allow_big: Some(true),
            ..big
        };
        assert_eq!(parse_config(None, big, None).unwrap().k_max_brute, 6);
    }

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.basis = BasisRule::Explicit(vec![12, 27, 48, 75]);
        c.levels = 4;
        c.families = vec![Family::Bracket];
        c.epsilon = vec![0.1, 0.25];
        c.omega = Some(2.5);
        let text = c.to_toml();
        let back = parse_config(Some(PartialConfig::from_toml(&text).unwrap()), Default::default(), None);
        assert_eq!(back.unwrap(), c);
    }
}
