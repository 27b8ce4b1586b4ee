use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GalerkinState;
use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

/// Serialized solver state. Floats are written in shortest round-trip form,
/// so equal states give byte-identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub t: f64,
    pub g: Vec<f64>,
    pub basis_hash: String,
    pub config_hash: String,
}

impl Checkpoint {
    pub fn new(state: &GalerkinState, basis_hash: String, config_hash: String) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            t: state.t,
            g: state.g.clone(),
            basis_hash,
            config_hash,
        }
    }

    pub fn state(&self) -> GalerkinState {
        GalerkinState {
            g: self.g.clone(),
            t: self.t,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        if c.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {}",
                c.format_version
            )));
        }
        Ok(c)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let s = GalerkinState {
            g: vec![0.1, -1.0 / 3.0, 1e-310, 6.02e23],
            t: 0.7,
        };
        let c = Checkpoint::new(&s, "ab".into(), "cd".into());
        let text = c.to_json().unwrap();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json().unwrap(), text);
        assert_eq!(back.state(), s);
    }
}
