//! Builtin experiment configurations.

use super::{CliError, ExperimentConfig};

pub const PRESETS: [(&str, &str); 6] = [
    ("fig2a", include_str!("../../presets/fig2a.toml")),
    ("fig2b", include_str!("../../presets/fig2b.toml")),
    ("fig3a", include_str!("../../presets/fig3a.toml")),
    ("fig3b", include_str!("../../presets/fig3b.toml")),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    let text = preset_text(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    ExperimentConfig::parse(text)
}
