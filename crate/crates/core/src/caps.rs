//! Size caps for the brute-force oracles and the executor. The CLI honors
//! the METADECOMP_CAPS environment variable with `key=value` pairs, e.g.
//! `oracle_tree_edges=7,max_db_rows=20000`.

#[derive(Clone, Debug)]
pub struct Caps {
    pub oracle_tree_edges: usize,
    pub oracle_dp_edges: usize,
    pub true_card_edges: usize,
    pub max_db_rows: usize,
    pub max_intermediate_rows: usize,
    pub enum_limit: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            oracle_tree_edges: 8,
            oracle_dp_edges: 14,
            true_card_edges: 10,
            max_db_rows: 10_000,
            max_intermediate_rows: 5_000_000,
            enum_limit: 1_000_000,
        }
    }
}

impl Caps {
    /// Parses `key=value,key=value`; unknown keys are rejected.
    pub fn parse_overrides(&mut self, spec: &str) -> Result<(), String> {
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("cap override {part:?} is not key=value"))?;
            let v: u64 = value
                .trim()
                .parse()
                .map_err(|_| format!("cap value {value:?} is not an integer"))?;
            match key.trim() {
                "oracle_tree_edges" => self.oracle_tree_edges = v as usize,
                "oracle_dp_edges" => self.oracle_dp_edges = v as usize,
                "true_card_edges" => self.true_card_edges = v as usize,
                "max_db_rows" => self.max_db_rows = v as usize,
                "max_intermediate_rows" => self.max_intermediate_rows = v as usize,
                "enum_limit" => self.enum_limit = v,
                other => return Err(format!("unknown cap {other:?}")),
            }
        }
        Ok(())
    }

    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Ok(spec) = std::env::var("METADECOMP_CAPS") {
            // bad overrides are ignored rather than crashing batch runs
            let _ = caps.parse_overrides(&spec);
        }
        caps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides() {
        let mut caps = Caps::default();
        caps.parse_overrides("oracle_tree_edges=5, enum_limit=99")
            .unwrap();
        assert_eq!(caps.oracle_tree_edges, 5);
        assert_eq!(caps.enum_limit, 99);
        assert!(caps.parse_overrides("nope=1").is_err());
        assert!(caps.parse_overrides("enum_limit").is_err());
    }
}
