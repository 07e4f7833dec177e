use std::path::Path;

use cbpir::scheme::SchemeParams;
use serde::{Deserialize, Serialize};

/// JSON parameter file. `seed` fixes the field tower and is the default
/// seed for every randomized command.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub b: u32,
    pub s: usize,
    pub v: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub f: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weight_target: Option<usize>,
}

impl ParamsFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn scheme(&self) -> SchemeParams {
        SchemeParams {
            b: self.b,
            s: self.s,
            v: self.v,
            n: self.n,
            k: self.k,
            m: self.m,
            l: self.l,
            f: self.f,
            weight_target: self.weight_target,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_capital_l_and_defaults() {
        let p: ParamsFile =
            serde_json::from_str(r#"{"b":1,"s":4,"v":2,"n":6,"k":3,"m":8,"L":4,"f":1}"#).unwrap();
        assert_eq!(p.l, 4);
        assert_eq!(p.seed, 0);
        assert_eq!(p.weight_target, None);
        assert_eq!(p.scheme().delta(), 6);
    }

    #[test]
    fn rejects_unknown_keys() {
        let r: Result<ParamsFile, _> =
            serde_json::from_str(r#"{"b":1,"s":4,"v":2,"n":6,"k":3,"m":8,"L":4,"f":1,"q":2}"#);
        assert!(r.is_err());
    }
}
