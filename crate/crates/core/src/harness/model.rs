//! Saved models: variables, scaler, generators and classifier as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evaluation::{PointSet, Polynomial};
use crate::monomials::{Term, TERM_ORDER};
use crate::oavi::{GeneratorSet, OaviConfig};
use crate::pipeline::{ClassTransformer, FeatureMatrix, LinearOvrClassifier, MinMaxScaler};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBlock {
    pub class: String,
    pub order_ideal: Vec<Term>,
    pub generators: Vec<Polynomial<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerializedModel {
    pub format_version: u32,
    pub term_order: String,
    pub variables: Vec<String>,
    pub classes: Vec<String>,
    pub config: OaviConfig<f64>,
    pub scaler: MinMaxScaler<f64>,
    pub blocks: Vec<ModelBlock>,
    pub classifier: LinearOvrClassifier<f64>,
    /// SHA-256 over the fields above.
    pub fingerprint: String,
}

#[derive(Serialize)]
struct Fingerprinted<'a> {
    format_version: u32,
    term_order: &'a str,
    variables: &'a [String],
    classes: &'a [String],
    config: &'a OaviConfig<f64>,
    scaler: &'a MinMaxScaler<f64>,
    blocks: &'a [ModelBlock],
    classifier: &'a LinearOvrClassifier<f64>,
}

impl SerializedModel {
    pub fn new(
        variables: Vec<String>,
        classes: Vec<String>,
        config: OaviConfig<f64>,
        transformer: &ClassTransformer<f64>,
        classifier: LinearOvrClassifier<f64>,
    ) -> Result<Self> {
        if variables.len() != transformer.scaler().dim() {
            return Err(Error::Dimension {
                expected: transformer.scaler().dim(),
                found: variables.len(),
            });
        }
        if classes.len() != transformer.blocks().len() || classes.len() != classifier.num_classes() {
            return Err(Error::Data(
                "class count differs between names, blocks and classifier".into(),
            ));
        }
        let blocks = classes
            .iter()
            .zip(transformer.blocks())
            .map(|(name, b)| ModelBlock {
                class: name.clone(),
                order_ideal: b.order_ideal().to_vec(),
                generators: b.generators().to_vec(),
            })
            .collect();
        let mut model = Self {
            format_version: MODEL_FORMAT_VERSION,
            term_order: TERM_ORDER.to_string(),
            variables,
            classes,
            config,
            scaler: transformer.scaler().clone(),
            blocks,
            classifier,
            fingerprint: String::new(),
        };
        model.fingerprint = model.compute_fingerprint()?;
        Ok(model)
    }

    fn compute_fingerprint(&self) -> Result<String> {
        let bytes = serde_json::to_vec(&Fingerprinted {
            format_version: self.format_version,
            term_order: &self.term_order,
            variables: &self.variables,
            classes: &self.classes,
            config: &self.config,
            scaler: &self.scaler,
            blocks: &self.blocks,
            classifier: &self.classifier,
        })?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and checks a model: format version, term order, fingerprint
    /// and consistency of the parts.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: SerializedModel = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format {}",
                model.format_version
            )));
        }
        if model.term_order != TERM_ORDER {
            return Err(Error::Config(format!("unsupported term order '{}'", model.term_order)));
        }
        if model.compute_fingerprint()? != model.fingerprint {
            return Err(Error::Config("model fingerprint does not match its contents".into()));
        }
        model.transformer()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn transformer(&self) -> Result<ClassTransformer<f64>> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| GeneratorSet::from_parts(b.order_ideal.clone(), b.generators.clone()))
            .collect::<Result<Vec<_>>>()?;
        let t = ClassTransformer::from_parts(self.scaler.clone(), blocks)?;
        if t.dim() != self.classifier.dim() {
            return Err(Error::Data(
                "classifier dimension differs from the number of generators".into(),
            ));
        }
        Ok(t)
    }

    pub fn transform(&self, points: &PointSet<f64>) -> Result<FeatureMatrix<f64>> {
        self.transformer()?.transform(points)
    }

    pub fn predict(&self, points: &PointSet<f64>) -> Result<Vec<usize>> {
        self.classifier.predict(&self.transform(points)?)
    }
}
