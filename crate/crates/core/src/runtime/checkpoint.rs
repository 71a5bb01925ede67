//! Saving and restoring trained models.
//!
//! A checkpoint is a single JSON document carrying everything needed to
//! reproduce predictions: architecture, hyperparameters, the vocabulary
//! itself, and every parameter tensor.  Serialization is deterministic,
//! so identical training runs produce byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autograd::{Params, Tensor};
use crate::models::Arch;
use crate::network::HyperParams;
use crate::runtime::RuntimeError;
use crate::textcorpus::Vocab;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub arch: String,
    pub hyper: HyperParams,
    pub seed: u64,
    pub epochs_done: usize,
    pub best_valid_f1: f64,
    pub vocab_hash: String,
    pub vocab_words: Vec<String>,
    pub params: Vec<ParamEntry>,
}

impl Checkpoint {
    pub fn new(
        arch: Arch,
        hyper: HyperParams,
        seed: u64,
        epochs_done: usize,
        best_valid_f1: f64,
        vocab: &Vocab,
        params: &Params,
    ) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            arch: arch.as_str().to_string(),
            hyper,
            seed,
            epochs_done,
            best_valid_f1,
            vocab_hash: vocab.hash(),
            vocab_words: vocab.words().to_vec(),
            params: params
                .iter()
                .map(|(name, t)| ParamEntry {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                    data: t.data().to_vec(),
                })
                .collect(),
        }
    }

    pub fn arch(&self) -> Result<Arch, RuntimeError> {
        Arch::parse(&self.arch)
            .ok_or_else(|| RuntimeError::Checkpoint(format!("unknown architecture {:?}", self.arch)))
    }

    pub fn vocab(&self) -> Result<Vocab, RuntimeError> {
        let v = Vocab::from_words(self.vocab_words.clone()).map_err(RuntimeError::Checkpoint)?;
        if v.hash() != self.vocab_hash {
            return Err(RuntimeError::Checkpoint(format!(
                "vocabulary hash {} does not match its words (expected {})",
                self.vocab_hash,
                v.hash()
            )));
        }
        Ok(v)
    }

    pub fn to_params(&self) -> Params {
        let mut out = Params::new();
        for e in &self.params {
            out.insert(&e.name, Tensor::new(e.shape.clone(), e.data.clone()));
        }
        out
    }

    fn validate(&self) -> Result<(), RuntimeError> {
        if self.version != CHECKPOINT_VERSION {
            return Err(RuntimeError::Checkpoint(format!(
                "version {} unsupported (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        self.arch()?;
        self.vocab()?;
        for e in &self.params {
            let numel: usize = e.shape.iter().product();
            if numel != e.data.len() {
                return Err(RuntimeError::Checkpoint(format!(
                    "parameter {:?} has shape {:?} but {} values",
                    e.name,
                    e.shape,
                    e.data.len()
                )));
            }
        }
        Ok(())
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), RuntimeError> {
    let mut text = serde_json::to_string(ckpt)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, RuntimeError> {
    let ckpt: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    ckpt.validate()?;
    Ok(ckpt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_params;

    fn sample() -> (Checkpoint, Vocab, Params) {
        let words: Vec<String> = "go east open box".split(' ').map(String::from).collect();
        let vocab = Vocab::build([words.as_slice()]);
        let hyper = HyperParams { d_emb: 2, d_hid: 3, dropout: 0.0, emb_scale: 0.1 };
        let params = init_params(&hyper, vocab.len(), 4);
        let ckpt = Checkpoint::new(Arch::HredPs, hyper, 4, 7, 0.5, &vocab, &params);
        (ckpt, vocab, params)
    }

    #[test]
    fn roundtrip_preserves_every_parameter_bit() {
        let (ckpt, vocab, params) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&path, &ckpt).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, ckpt);
        assert_eq!(loaded.arch().unwrap(), Arch::HredPs);
        assert_eq!(loaded.vocab().unwrap().words(), vocab.words());
        let restored = loaded.to_params();
        for ((name, a), (_, b)) in params.iter().zip(restored.iter()) {
            assert_eq!(a.shape(), b.shape(), "{name}");
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_eq!(x.to_bits(), y.to_bits(), "{name}");
            }
        }
    }

    #[test]
    fn reload_and_resave_is_byte_identical() {
        let (ckpt, _, _) = sample();
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.json");
        let second = dir.path().join("b.json");
        save_checkpoint(&first, &ckpt).unwrap();
        save_checkpoint(&second, &load_checkpoint(&first).unwrap()).unwrap();
        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    }

    #[test]
    fn future_versions_are_rejected() {
        let (mut ckpt, _, _) = sample();
        ckpt.version = CHECKPOINT_VERSION + 1;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&path, &ckpt).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn tampered_vocabularies_are_rejected() {
        let (mut ckpt, _, _) = sample();
        ckpt.vocab_words.push("stowaway".into());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&path, &ckpt).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("hash"), "{err}");
    }

    #[test]
    fn inconsistent_parameter_shapes_are_rejected() {
        let (mut ckpt, _, _) = sample();
        ckpt.params[0].shape = vec![1, 1];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&path, &ckpt).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("shape"), "{err}");
    }

    #[test]
    fn unknown_architectures_are_rejected() {
        let (mut ckpt, _, _) = sample();
        ckpt.arch = "transformer".into();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&path, &ckpt).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
