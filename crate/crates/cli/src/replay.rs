//! Rebuilding a run from its manifest.

use std::path::Path;

use adanorm_core::telemetry::RunManifest;

use crate::error::{CliError, CliResult};

/// Flags copied verbatim from `spec.<key>` for each command.
const SPEC_FLAGS: [(&str, &[&str]); 3] = [
    (
        "bench",
        &[
            "problem",
            "dim",
            "condition",
            "steps",
            "threshold",
            "start_jitter",
        ],
    ),
    (
        "train",
        &[
            "samples",
            "input_dim",
            "classes",
            "hidden",
            "spread",
            "epochs",
            "batch_size",
            "lr_drop_epoch",
        ],
    ),
    ("regret", &["generator", "horizon", "schedule"]),
];

/// Command line (without the program name) that recreates the run described
/// by `manifest` as `<out>/<optimizer>/run-<repeat>`.
pub fn replay_args(manifest: &RunManifest, out: &Path) -> CliResult<Vec<String>> {
    let spec = |key: &str| {
        manifest
            .spec
            .get(key)
            .ok_or_else(|| CliError::Usage(format!("manifest has no spec.{key}")))
    };
    let command = spec("command")?.as_str();
    let keys = SPEC_FLAGS
        .iter()
        .find(|(c, _)| *c == command)
        .map(|(_, k)| *k)
        .ok_or_else(|| CliError::Usage(format!("cannot replay command `{command}`")))?;
    let repeat: usize = spec("repeat")?
        .parse()
        .map_err(|_| CliError::Usage("spec.repeat is not an integer".into()))?;
    let hp = &manifest.hyper;

    let mut args = vec![
        command.to_string(),
        format!("--out={}", out.display()),
        format!("--seed={}", manifest.master_seed),
        format!("--repeats={}", repeat + 1),
        format!("--optimizer={}", manifest.optimizer),
        format!("--alpha={}", hp.alpha),
        format!("--gamma={}", hp.gamma),
        format!("--beta1={}", hp.beta1),
        format!("--beta2={}", hp.beta2),
        format!("--epsilon={}", hp.epsilon),
        format!("--norm-target={}", hp.norm_target),
        format!("--norm-scope={}", hp.norm_scope),
        "--no-svg".to_string(),
    ];
    if let Some(l) = hp.beta1_decay {
        args.push(format!("--beta1-decay={l}"));
    }
    for key in keys {
        let value = spec(key)?;
        if value != "none" {
            args.push(format!("--{}={value}", key.replace('_', "-")));
        }
    }
    // neither setting changes the run directory, only invocation-level output
    match command {
        "regret" => args.push(format!("--horizons={}", spec("horizon")?)),
        "train" => args.push("--window=1".into()),
        _ => {}
    }
    Ok(args)
}
