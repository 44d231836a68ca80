//! Bundled example models.

use crate::modelspec::{parse_model, ModelSpec};

/// `(name, source)` of every bundled model.
pub const MODELS: &[(&str, &str)] = &[
    ("example1", include_str!("../../../models/example1.com")),
    ("bathtub", include_str!("../../../models/bathtub.com")),
    ("viral", include_str!("../../../models/viral.com")),
    ("nfbn", include_str!("../../../models/nfbn.com")),
    ("protein", include_str!("../../../models/protein.com")),
    ("enzyme", include_str!("../../../models/enzyme.com")),
    ("enzyme_rewritten", include_str!("../../../models/enzyme_rewritten.com")),
    ("ifflp", include_str!("../../../models/ifflp.com")),
    ("ifflp_rewritten", include_str!("../../../models/ifflp_rewritten.com")),
];

pub fn source(name: &str) -> Option<&'static str> {
    MODELS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a bundled model; panics if the bundled source is invalid.
pub fn model(name: &str) -> Option<ModelSpec> {
    source(name).map(|s| parse_model(s).unwrap_or_else(|e| panic!("bundled model {name}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_model_parses() {
        for (name, _) in MODELS {
            assert_eq!(model(name).unwrap().name, *name);
        }
    }
}
