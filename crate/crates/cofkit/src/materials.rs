//! Built-in material presets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CofkitError, Result};
use crate::lattice::{CrystalSystem, MonoclinicParams};
use crate::linalg3::Mat3;

/// Keys of the reference metric table, in display order.
pub const REFERENCE_KEYS: [&str; 7] = [
    "lambda2_dev",
    "cc2_type_i",
    "cc2_type_ii",
    "equivalent_dev_type_i",
    "equivalent_dev_type_ii",
    "metric_type_i",
    "metric_type_ii",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub name: String,
    pub system: CrystalSystem,
    /// `None` for reference-only presets.
    pub params: Option<MonoclinicParams>,
    pub matrix: Option<Mat3>,
    pub note: String,
    /// Reference metric values keyed by [`REFERENCE_KEYS`].
    pub reference: BTreeMap<String, f64>,
}

impl MaterialPreset {
    pub fn is_computable(&self) -> bool {
        self.params.is_some()
    }

    pub fn require_params(&self) -> Result<MonoclinicParams> {
        self.params.ok_or_else(|| {
            CofkitError::InvalidInput(format!("preset {} carries reference values only", self.name))
        })
    }

    /// The preset in the CLI's key-value input format.
    pub fn to_input_text(&self) -> Result<String> {
        let p = self.require_params()?;
        Ok(format!(
            "# {}\nsystem=monoclinic\na={}\nb={}\nc={}\nd={}\n",
            self.name, p.a, p.b, p.c, p.d
        ))
    }
}

pub const PRESET_NAMES: [&str; 4] = ["ZnAuCu", "ZnAuCu-star-target", "ZnAuCu-cc-target", "TiNbAl-reference"];

const ZN_MEASURED: MonoclinicParams = MonoclinicParams::new(1.0015, 0.0073, 1.0591, 0.9363);
const ZN_STAR: MonoclinicParams = MonoclinicParams::new(1.0010, 0.0078, 1.0594, 0.9368);

fn table(values: [f64; 7]) -> BTreeMap<String, f64> {
    REFERENCE_KEYS.iter().map(|k| k.to_string()).zip(values).collect()
}

/// Looks up a preset by name (case-insensitive).
pub fn preset(name: &str) -> Result<MaterialPreset> {
    let key = PRESET_NAMES
        .iter()
        .find(|n| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| CofkitError::UnknownMaterial(name.to_string()))?;
    let with = |params: Option<MonoclinicParams>, note: &str, reference: BTreeMap<String, f64>| MaterialPreset {
        name: key.to_string(),
        system: CrystalSystem::Monoclinic,
        params,
        matrix: params.map(|p| p.u1()),
        note: note.to_string(),
        reference,
    };
    Ok(match *key {
        "ZnAuCu" => with(
            Some(ZN_MEASURED),
            "Zn45Au30Cu25, measured first-variant stretch (4 decimals)",
            table([6.1e-4, 4.1e-5, 3.8e-5, 8.1e-3, 4.2e-4, 1.7e-2, 2.1e-3]),
        ),
        "ZnAuCu-star-target" => with(
            Some(ZN_STAR),
            "Zn45Au30Cu25 stretch adjusted to admit a type II star twin (4 decimals)",
            table_distance(1.1e-3),
        ),
        "ZnAuCu-cc-target" => with(
            None,
            "closest cofactor-compatible stretch to ZnAuCu; matrix unavailable, distance only",
            table_distance(0.9e-3),
        ),
        _ => with(
            None,
            "Ti74Nb23Al3; no stretch matrix available, reference metrics only",
            table([3.7e-6, 4.4e-5, 3.8e-5, 9.9e-3, 8.3e-3, 2.7e-2, 2.3e-2]),
        ),
    })
}

fn table_distance(d: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([("distance_to_ZnAuCu".to_string(), d)])
}
