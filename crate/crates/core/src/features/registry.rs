//! Name-based backend selection.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::stub;
use crate::features::{FrameEmbedder, FrameScorer, PerceptualExtractor};

/// Directory where model-backed constructors look for weights.
pub const MODEL_CACHE_ENV: &str = "VCBENCH_MODEL_CACHE";

#[derive(Clone, Debug, Default)]
pub struct BackendContext {
    pub model_cache: Option<PathBuf>,
}

impl BackendContext {
    pub fn from_env() -> Self {
        BackendContext {
            model_cache: std::env::var_os(MODEL_CACHE_ENV).map(PathBuf::from),
        }
    }
}

/// Which backend feeds each model-based metric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendNames {
    pub subject: String,
    pub background: String,
    pub aesthetic: String,
    pub imaging: String,
    pub perceptual: String,
}

impl Default for BackendNames {
    fn default() -> Self {
        BackendNames {
            subject: stub::HISTOGRAM.into(),
            background: stub::GRID.into(),
            aesthetic: stub::AESTHETIC.into(),
            imaging: stub::IMAGING.into(),
            perceptual: stub::PERCEPTUAL.into(),
        }
    }
}

impl BackendNames {
    pub fn to_map(&self) -> BTreeMap<String, String> {
        [
            ("subject", &self.subject),
            ("background", &self.background),
            ("aesthetic", &self.aesthetic),
            ("imaging", &self.imaging),
            ("perceptual", &self.perceptual),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
    }
}

/// Instantiated backends for one worker.
#[derive(Clone)]
pub struct Backends {
    pub subject: Arc<dyn FrameEmbedder>,
    pub background: Arc<dyn FrameEmbedder>,
    pub aesthetic: Arc<dyn FrameScorer>,
    pub imaging: Arc<dyn FrameScorer>,
    pub perceptual: Arc<dyn PerceptualExtractor>,
}

impl Backends {
    pub fn stubs() -> Self {
        Backends {
            subject: Arc::new(stub::HistogramEmbedder),
            background: Arc::new(stub::GridEmbedder),
            aesthetic: Arc::new(stub::AestheticScorer),
            imaging: Arc::new(stub::ImagingScorer),
            perceptual: Arc::new(stub::GridPerceptual),
        }
    }

    pub fn names(&self) -> BackendNames {
        BackendNames {
            subject: self.subject.name().into(),
            background: self.background.name().into(),
            aesthetic: self.aesthetic.name().into(),
            imaging: self.imaging.name().into(),
            perceptual: self.perceptual.name().into(),
        }
    }

    /// True when every backend may be shared between workers.
    pub fn reentrant(&self) -> bool {
        self.subject.reentrant()
            && self.background.reentrant()
            && self.aesthetic.reentrant()
            && self.imaging.reentrant()
            && self.perceptual.reentrant()
    }
}

type EmbedderCtor = Arc<dyn Fn(&BackendContext) -> Result<Arc<dyn FrameEmbedder>> + Send + Sync>;
type ScorerCtor = Arc<dyn Fn(&BackendContext) -> Result<Arc<dyn FrameScorer>> + Send + Sync>;
type ExtractorCtor = Arc<dyn Fn(&BackendContext) -> Result<Arc<dyn PerceptualExtractor>> + Send + Sync>;

/// Maps backend names to constructors. Starts with the built-in stubs.
#[derive(Clone)]
pub struct BackendRegistry {
    embedders: BTreeMap<String, EmbedderCtor>,
    scorers: BTreeMap<String, ScorerCtor>,
    extractors: BTreeMap<String, ExtractorCtor>,
    context: BackendContext,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = BackendRegistry {
            embedders: BTreeMap::new(),
            scorers: BTreeMap::new(),
            extractors: BTreeMap::new(),
            context: BackendContext::from_env(),
        };
        r.register_embedder(stub::HISTOGRAM, |_| Ok(Arc::new(stub::HistogramEmbedder)));
        r.register_embedder(stub::GRID, |_| Ok(Arc::new(stub::GridEmbedder)));
        r.register_scorer(stub::AESTHETIC, |_| Ok(Arc::new(stub::AestheticScorer)));
        r.register_scorer(stub::IMAGING, |_| Ok(Arc::new(stub::ImagingScorer)));
        r.register_extractor(stub::PERCEPTUAL, |_| Ok(Arc::new(stub::GridPerceptual)));
        r
    }
}

impl BackendRegistry {
    pub fn with_context(mut self, context: BackendContext) -> Self {
        self.context = context;
        self
    }

    pub fn register_embedder(
        &mut self,
        name: &str,
        ctor: impl Fn(&BackendContext) -> Result<Arc<dyn FrameEmbedder>> + Send + Sync + 'static,
    ) {
        self.embedders.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn register_scorer(
        &mut self,
        name: &str,
        ctor: impl Fn(&BackendContext) -> Result<Arc<dyn FrameScorer>> + Send + Sync + 'static,
    ) {
        self.scorers.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn register_extractor(
        &mut self,
        name: &str,
        ctor: impl Fn(&BackendContext) -> Result<Arc<dyn PerceptualExtractor>> + Send + Sync + 'static,
    ) {
        self.extractors.insert(name.to_string(), Arc::new(ctor));
    }

    /// Human-readable listing of every registered name, grouped by kind.
    pub fn listing(&self) -> String {
        let join = |m: Vec<&String>| m.into_iter().cloned().collect::<Vec<_>>().join(", ");
        format!(
            "embedders: {}; scorers: {}; perceptual extractors: {}",
            join(self.embedders.keys().collect()),
            join(self.scorers.keys().collect()),
            join(self.extractors.keys().collect()),
        )
    }

    fn unknown(&self, kind: &str, name: &str) -> Error {
        Error::Config(format!("unknown {kind} backend `{name}`; available {}", self.listing()))
    }

    /// Checks every name without constructing anything.
    pub fn validate(&self, names: &BackendNames) -> Result<()> {
        for (kind, name) in [("subject", &names.subject), ("background", &names.background)] {
            if !self.embedders.contains_key(name) {
                return Err(self.unknown(kind, name));
            }
        }
        for (kind, name) in [("aesthetic", &names.aesthetic), ("imaging", &names.imaging)] {
            if !self.scorers.contains_key(name) {
                return Err(self.unknown(kind, name));
            }
        }
        if !self.extractors.contains_key(&names.perceptual) {
            return Err(self.unknown("perceptual", &names.perceptual));
        }
        Ok(())
    }

    pub fn build(&self, names: &BackendNames) -> Result<Backends> {
        self.validate(names)?;
        let ctx = &self.context;
        Ok(Backends {
            subject: self.embedders[&names.subject](ctx)?,
            background: self.embedders[&names.background](ctx)?,
            aesthetic: self.scorers[&names.aesthetic](ctx)?,
            imaging: self.scorers[&names.imaging](ctx)?,
            perceptual: self.extractors[&names.perceptual](ctx)?,
        })
    }
}
