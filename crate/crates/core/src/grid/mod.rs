//! Test-system topology, DC measurement Jacobians and their structure.

mod case;
mod jacobian;
mod structure;
mod systems;

pub use case::{parse_case, parse_matpower, Branch, Bus, BusId, GridCase};
pub use jacobian::{
    build_dc_jacobian, Measurement, MeasurementModel, MeasurementScheme, DEFAULT_NOISE_SIGMA,
};
pub use structure::{structure_report, StructureReport, DEFAULT_RANK_TOLERANCE};
pub use systems::IeeeSystem;

use std::path::Path;

use crate::error::{Error, Result};

/// Loads a case from a bundled system name (`ieee57`, `case118`, ...) or a
/// path to a MATPOWER / JSON file.
pub fn load_case(spec: &str) -> Result<GridCase> {
    if let Ok(sys) = spec.parse::<IeeeSystem>() {
        if !Path::new(spec).exists() {
            return Ok(sys.load());
        }
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::io(spec, e))?;
    parse_case(&text)
}
