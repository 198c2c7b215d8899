use serde::{Deserialize, Serialize};

use super::DesignError;

/// Material and machine parameters. Lengths in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FabricationSpec {
    pub material: String,
    /// Material thickness w_m.
    pub thickness: f64,
    /// Kerf Δ removed by the cutter.
    pub kerf: f64,
    /// Interference δ for press fits.
    pub fit: f64,
    pub sheet_width: f64,
    pub sheet_height: f64,
    /// Gap between parts on a sheet.
    pub spacing: f64,
    /// Flex-hinge beam width.
    pub hinge_beam: f64,
    /// Flex-hinge slit width.
    pub hinge_gap: f64,
}

impl Default for FabricationSpec {
    fn default() -> Self {
        Self {
            material: "plywood".into(),
            thickness: 3.0,
            kerf: 0.1,
            fit: 0.05,
            sheet_width: 1220.0,
            sheet_height: 2440.0,
            spacing: 5.0,
            hinge_beam: 1.5,
            hinge_gap: 0.5,
        }
    }
}

impl FabricationSpec {
    pub fn validate(&self) -> Result<(), DesignError> {
        let bad = |m: &str| Err(DesignError::Spec(m.to_string()));
        let finite = [
            self.thickness,
            self.kerf,
            self.fit,
            self.sheet_width,
            self.sheet_height,
            self.spacing,
            self.hinge_beam,
            self.hinge_gap,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("all dimensions must be finite");
        }
        if self.thickness <= 0.0 {
            return bad("thickness must be positive");
        }
        if self.kerf < 0.0 || self.fit < 0.0 {
            return bad("kerf and fit must be non-negative");
        }
        if self.sheet_width <= 0.0 || self.sheet_height <= 0.0 {
            return bad("sheet dimensions must be positive");
        }
        if self.spacing < 0.0 {
            return bad("spacing must be non-negative");
        }
        if self.hinge_beam <= 0.0 || self.hinge_gap <= 0.0 {
            return bad("hinge beam and gap must be positive");
        }
        Ok(())
    }

    /// Joint clearance term 4Δ + δ.
    pub fn finger_clearance(&self) -> f64 {
        4.0 * self.kerf + self.fit
    }

    /// Shortest intersection segment that receives a joint.
    pub fn min_joint_len(&self) -> f64 {
        2.0 * self.thickness
    }
}

pub fn load_spec(text: &str) -> Result<FabricationSpec, DesignError> {
    let s: FabricationSpec = serde_yaml::from_str(text).map_err(|e| DesignError::Schema {
        path: "/".into(),
        message: e.to_string(),
    })?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let s = load_spec("thickness: 6\nkerf: 0.2\n").unwrap();
        assert_eq!(s.thickness, 6.0);
        assert_eq!(s.kerf, 0.2);
        assert_eq!(s.fit, 0.05);
    }

    #[test]
    fn invalid_values() {
        assert!(load_spec("thickness: 0\n").is_err());
        assert!(load_spec("kerf: -1\n").is_err());
        assert!(load_spec("colour: red\n").is_err());
    }
}
