use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::optim::{HyperParams, OptimizerKind};

/// Everything needed to repeat a run, stored as a flat `key=value` file.
///
/// `spec` holds the problem or training configuration as free-form keys.
/// Floats are written in shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub run_id: String,
    pub optimizer: OptimizerKind,
    pub hyper: HyperParams<f64>,
    pub spec: BTreeMap<String, String>,
    pub master_seed: u64,
    pub run_seed: u64,
    pub started: String,
    pub finished: String,
    pub git_describe: String,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let hp = &self.hyper;
        let mut out = String::new();
        let mut put = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("run_id", &self.run_id);
        put("optimizer", &self.optimizer);
        put("alpha", &hp.alpha);
        put("beta1", &hp.beta1);
        put("beta2", &hp.beta2);
        put("gamma", &hp.gamma);
        put("epsilon", &hp.epsilon);
        match hp.beta1_decay {
            Some(l) => put("beta1_decay", &l),
            None => put("beta1_decay", &"none"),
        }
        put("norm_target", &hp.norm_target);
        put("norm_scope", &hp.norm_scope);
        put("master_seed", &self.master_seed);
        put("run_seed", &self.run_seed);
        put("started", &self.started);
        put("finished", &self.finished);
        put("git_describe", &self.git_describe);
        for (k, v) in &self.spec {
            put(&format!("spec.{k}"), v);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut spec = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Manifest {
                line: line_no,
                reason: "expected key=value".into(),
            })?;
            let duplicate = match k.strip_prefix("spec.") {
                Some(sk) => spec.insert(sk.to_string(), v.to_string()).is_some(),
                None => map
                    .insert(k.to_string(), (line_no, v.to_string()))
                    .is_some(),
            };
            if duplicate {
                return Err(Error::Manifest {
                    line: line_no,
                    reason: format!("duplicate key `{k}`"),
                });
            }
        }
        let mut take = |key: &str| {
            map.remove(key).ok_or_else(|| Error::Manifest {
                line: 0,
                reason: format!("missing key `{key}`"),
            })
        };
        fn parsed<V: std::str::FromStr>((line, raw): (usize, String)) -> Result<V>
        where
            V::Err: std::fmt::Display,
        {
            raw.parse().map_err(|e: V::Err| Error::Manifest {
                line,
                reason: format!("`{raw}`: {e}"),
            })
        }
        let run_id = take("run_id")?.1;
        let optimizer = parsed(take("optimizer")?)?;
        let mut hyper = HyperParams::<f64>::default()
            .with_alpha(parsed(take("alpha")?)?)
            .with_betas(parsed(take("beta1")?)?, parsed(take("beta2")?)?)
            .with_gamma(parsed(take("gamma")?)?)
            .with_epsilon(parsed(take("epsilon")?)?)
            .with_norm_target(parsed(take("norm_target")?)?)
            .with_norm_scope(parsed(take("norm_scope")?)?);
        let decay = take("beta1_decay")?;
        if decay.1 != "none" {
            hyper = hyper.with_beta1_decay(parsed(decay)?);
        }
        let manifest = RunManifest {
            run_id,
            optimizer,
            hyper,
            spec,
            master_seed: parsed(take("master_seed")?)?,
            run_seed: parsed(take("run_seed")?)?,
            started: take("started")?.1,
            finished: take("finished")?.1,
            git_describe: take("git_describe")?.1,
        };
        if let Some((k, (line, _))) = map.into_iter().next() {
            return Err(Error::Manifest {
                line,
                reason: format!("unknown key `{k}`"),
            });
        }
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
