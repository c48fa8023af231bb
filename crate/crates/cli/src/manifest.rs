//! Run manifests: the fully resolved settings plus seeds and a content hash.
//!
//! A manifest is itself a valid config file, so
//! `guiltevo <command> --config manifest.toml --out other/` replays a run.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Settings;
use crate::error::{config_err, CliError};

#[derive(Debug, Serialize)]
struct Meta<'a> {
    command: &'a str,
    /// sha256 of the settings block above.
    hash: String,
    timestamp: u64,
    /// Stored as strings: derived seeds use the full 64-bit range.
    replicate_seeds: Vec<String>,
    network_seeds: Vec<String>,
}

/// Canonical text of the resolved settings. `out` and `jobs` do not affect
/// results and are left out.
pub fn settings_echo(settings: &Settings) -> Result<String, CliError> {
    let echo = Settings {
        out: None,
        jobs: None,
        ..settings.clone()
    };
    toml::to_string(&echo).map_err(|e| config_err(format!("cannot serialise settings: {e}")))
}

pub fn content_hash(echo: &str) -> String {
    hex::encode(Sha256::digest(echo.as_bytes()))
}

pub fn render(
    command: &str,
    settings: &Settings,
    replicate_seeds: &[u64],
    network_seeds: &[u64],
) -> Result<String, CliError> {
    let echo = settings_echo(settings)?;
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Meta {
        command,
        hash: content_hash(&echo),
        timestamp,
        replicate_seeds: replicate_seeds.iter().map(u64::to_string).collect(),
        network_seeds: network_seeds.iter().map(u64::to_string).collect(),
    };
    #[derive(Serialize)]
    struct Wrapper<'a> {
        manifest: Meta<'a>,
    }
    let meta = toml::to_string(&Wrapper { manifest: meta })
        .map_err(|e| config_err(format!("cannot serialise manifest: {e}")))?;
    Ok(format!(
        "# Replay with: guiltevo {command} --config manifest.toml\n{echo}\n{meta}"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_str;

    #[test]
    fn manifest_replays_to_same_settings() {
        let settings = Settings {
            topology: Some("lattice".into()),
            side: Some(10),
            b: Some(2.0),
            gamma_s: Some(0.1),
            seed: Some(7),
            strategies: Some(vec!["C".into(), "DGCS".into()]),
            ..Default::default()
        };
        let text = render("simulate", &settings, &[1, u64::MAX], &[]).unwrap();
        let back = parse_str(&text, "simulate").unwrap();
        assert_eq!(back, settings);
        assert!(text.contains(&content_hash(&settings_echo(&settings).unwrap())));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = Settings {
            b: Some(4.0),
            out: Some("x".into()),
            jobs: Some(2),
            ..Default::default()
        };
        let b = Settings {
            b: Some(4.0),
            ..Default::default()
        };
        assert_eq!(settings_echo(&a).unwrap(), settings_echo(&b).unwrap());
    }
}
