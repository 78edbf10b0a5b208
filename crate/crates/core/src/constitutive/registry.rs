//! By-name registry of constitutive-law families.
//!
//! Config files select a family as `model.family = power_law` plus keyword
//! parameters; each registered builder turns those parameters into a live
//! [`ConstitutiveModel`]. Downstream code only sees the trait object.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::constitutive::law::{
    ConstitutiveLaw, ConstitutiveModel, GaussianDecayLaw, PowerLawLaw, TabulatedLaw,
};
use crate::error::{Error, Result};

/// Keyword parameters for one model, with config line numbers for
/// diagnostics. Equality ignores line numbers so that a reparsed
/// serialization compares equal.
#[derive(Clone, Debug, Default)]
pub struct LawParams {
    entries: BTreeMap<String, (usize, String)>,
}

impl PartialEq for LawParams {
    fn eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((ka, (_, va)), (kb, (_, vb)))| ka == kb && va == vb)
    }
}

impl LawParams {
    pub fn insert(&mut self, key: impl Into<String>, line: usize, value: impl Into<String>) {
        self.entries.insert(key.into(), (line, value.into()));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| {
                Error::config(*line, format!("model.{key}: expected a number, got '{v}'"))
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str, family: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| {
            Error::config(0, format!("model.{key} is required for family {family}"))
        })
    }

    pub fn require_path(&self, key: &str, family: &str) -> Result<PathBuf> {
        match self.entries.get(key) {
            Some((_, v)) => Ok(PathBuf::from(v)),
            None => Err(Error::config(
                0,
                format!("model.{key} is required for family {family}"),
            )),
        }
    }
}

/// Delegating wrapper that pins the positivity-onset abscissa from config.
struct WithOnset<L> {
    inner: L,
    onset: f64,
}

impl<L: ConstitutiveLaw> ConstitutiveLaw for WithOnset<L> {
    fn family(&self) -> &'static str {
        self.inner.family()
    }
    fn alpha(&self, xi: f64) -> f64 {
        self.inner.alpha(xi)
    }
    fn beta(&self, xi: f64) -> f64 {
        self.inner.beta(xi)
    }
    fn gamma(&self, xi: f64) -> f64 {
        self.inner.gamma(xi)
    }
    fn dpsi(&self, r: f64, xi: f64) -> f64 {
        self.inner.dpsi(r, xi)
    }
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }
    fn singularity_exponent(&self) -> f64 {
        self.inner.singularity_exponent()
    }
    fn interior_breakpoints(&self) -> Vec<f64> {
        self.inner.interior_breakpoints()
    }
    fn positivity_onset(&self) -> f64 {
        self.onset
    }
    fn alpha_cell_average(&self, lo: f64, hi: f64) -> Option<f64> {
        self.inner.alpha_cell_average(lo, hi)
    }
    fn has_remainder(&self) -> bool {
        self.inner.has_remainder()
    }
}

fn with_onset<L: ConstitutiveLaw + 'static>(
    law: L,
    params: &LawParams,
) -> Result<Arc<dyn ConstitutiveLaw>> {
    match params.get_f64("h_pos")? {
        Some(onset) => Ok(Arc::new(WithOnset { inner: law, onset })),
        None => Ok(Arc::new(law)),
    }
}

pub type LawBuilder = fn(&LawParams) -> Result<Arc<dyn ConstitutiveLaw>>;

/// Name-indexed builders; iteration order is stable (sorted by name).
pub struct LawRegistry {
    builders: BTreeMap<String, LawBuilder>,
}

fn build_power_law(params: &LawParams) -> Result<Arc<dyn ConstitutiveLaw>> {
    let law = PowerLawLaw::new(
        params.f64_or("C2", 1.0)?,
        params.f64_or("C3", 1.0)?,
        params.f64_or("g", 0.0)?,
        params.require_f64("H", "power_law")?,
    );
    with_onset(law, params)
}

fn build_gaussian_decay(params: &LawParams) -> Result<Arc<dyn ConstitutiveLaw>> {
    let law = GaussianDecayLaw::new(
        params.f64_or("C2", 1.0)?,
        params.f64_or("C3", 1.0)?,
        params.f64_or("g", 0.0)?,
        params.require_f64("H", "gaussian_decay")?,
    );
    with_onset(law, params)
}

fn build_tabulated(params: &LawParams) -> Result<Arc<dyn ConstitutiveLaw>> {
    let alpha = params.require_path("alpha_table", "tabulated")?;
    let beta = params.require_path("beta_table", "tabulated")?;
    let gamma = params.raw("gamma_table").map(PathBuf::from);
    let law = TabulatedLaw::from_csv_files(&alpha, &beta, gamma.as_deref())?;
    with_onset(law, params)
}

impl LawRegistry {
    /// Registry preloaded with the built-in families.
    pub fn builtin() -> LawRegistry {
        let mut reg = LawRegistry {
            builders: BTreeMap::new(),
        };
        reg.register("power_law", build_power_law);
        reg.register("gaussian_decay", build_gaussian_decay);
        reg.register("tabulated", build_tabulated);
        reg
    }

    pub fn register(&mut self, name: impl Into<String>, builder: LawBuilder) {
        self.builders.insert(name.into(), builder);
    }

    pub fn families(&self) -> Vec<&str> {
        self.builders.keys().map(|k| k.as_str()).collect()
    }

    pub fn build(&self, family: &str, params: &LawParams) -> Result<ConstitutiveModel> {
        match self.builders.get(family) {
            Some(builder) => Ok(ConstitutiveModel::new(builder(params)?)),
            None => Err(Error::config(
                0,
                format!(
                    "unknown model family '{family}'; available: {}",
                    self.families().join(", ")
                ),
            )),
        }
    }
}

impl Default for LawRegistry {
    fn default() -> Self {
        LawRegistry::builtin()
    }
}
