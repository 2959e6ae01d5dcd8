//! Access to the tolerance manifest `tolerances.txt` at the repository root.
//!
//! Grid-dependent accuracy budgets are never set from theory alone: each is
//! fixed by the mesh-refinement study (see [`crate::study`]) and recorded in
//! the manifest with margin over the observed error. The manifest is plain
//! `key = value` text so changes show up in diffs.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const MANIFEST: &str = include_str!("../../../tolerances.txt");

fn table() -> &'static BTreeMap<String, f64> {
    static TABLE: OnceLock<BTreeMap<String, f64>> = OnceLock::new();
    TABLE.get_or_init(|| parse(MANIFEST).expect("tolerances.txt in the repository root must parse"))
}

pub(crate) fn parse(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Manifest(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let parsed: f64 = value.trim().parse().map_err(|_| {
            Error::Manifest(format!(
                "line {}: bad number {:?}",
                lineno + 1,
                value.trim()
            ))
        })?;
        map.insert(key.trim().to_string(), parsed);
    }
    Ok(map)
}

/// Looks up a tolerance; missing keys are a bug in the manifest.
pub fn tolerance(key: &str) -> Result<f64> {
    table()
        .get(key)
        .copied()
        .ok_or_else(|| Error::Manifest(format!("missing key {key:?}")))
}

/// All manifest entries, for reporting.
pub fn manifest_entries() -> Vec<(String, f64)> {
    table().iter().map(|(k, v)| (k.clone(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parser_handles_comments_and_errors() {
        let map = parse("a = 1.5\n# note\n b=2e-3 # trailing\n\n").unwrap();
        assert_eq!(map["a"], 1.5);
        assert_eq!(map["b"], 2e-3);
        assert!(parse("oops").is_err());
        assert!(parse("a = fish").is_err());
    }

    #[test]
    fn manifest_is_wellformed_and_has_core_keys() {
        for key in [
            "trapz_x03_n100",
            "trapz_x03_n200",
            "trapz_x03_n400",
            "abel_n100",
            "abel_n400",
            "semigroup_rel_n100",
            "semigroup_offset_rel_n100",
            "balakrishnan_vs_rl_n100",
            "resolvent_expfit_n100",
            "kappa_star_n100",
            "interpolation_max_ratio_n100",
            "log_representative_sup_n200",
            "tol_mono",
        ] {
            let v = tolerance(key).unwrap();
            assert!(v > 0.0, "{key} must be positive");
        }
        assert!(tolerance("no_such_key").is_err());
    }

    #[test]
    fn refinement_budgets_decrease() {
        let t100 = tolerance("trapz_x03_n100").unwrap();
        let t200 = tolerance("trapz_x03_n200").unwrap();
        let t400 = tolerance("trapz_x03_n400").unwrap();
        assert!(t200 < t100 && t400 < t200);
        assert!(tolerance("abel_n400").unwrap() < tolerance("abel_n100").unwrap());
    }
}
