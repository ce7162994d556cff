//! Antenna gains: 3GPP-style parabolic element pattern, steered 8x8 planar
//! array for macro sectors, and constant-gain omni / isotropic antennas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::Position3D;

/// Floor applied to the linear array factor so nulls stay finite in dB.
const ARRAY_FACTOR_FLOOR: f64 = 1e-12;
const ELEMENT_BEAMWIDTH_DEG: f64 = 65.0;
const ELEMENT_FRONT_BACK_DB: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum AntennaError {
    #[error("beam gain requested for a {0:?} antenna; only macro arrays steer beams")]
    NotAnArray(AntennaKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AntennaKind {
    MacroArray,
    FactoryOmni,
    UeIsotropic,
}

/// Panel layout `V x H x (Vs x Hs x Ps)`. Only the V x H element grid shapes
/// the beam; the polarization count is carried for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub rows: u32,
    pub cols: u32,
    pub subarray_rows: u32,
    pub subarray_cols: u32,
    pub polarizations: u32,
    /// Element spacing in wavelengths, both axes.
    pub spacing_wavelengths: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { rows: 8, cols: 8, subarray_rows: 1, subarray_cols: 1, polarizations: 2, spacing_wavelengths: 0.5 }
    }
}

impl ArrayConfig {
    pub fn elements(&self) -> u32 {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaRef {
    pub kind: AntennaKind,
    pub element_gain_max_dbi: f64,
    pub array: Option<ArrayConfig>,
    pub downtilt_deg: f64,
    pub boresight_azimuth_deg: f64,
}

impl AntennaRef {
    pub fn macro_array(boresight_azimuth_deg: f64, downtilt_deg: f64) -> Self {
        Self {
            kind: AntennaKind::MacroArray,
            element_gain_max_dbi: 8.0,
            array: Some(ArrayConfig::default()),
            downtilt_deg,
            boresight_azimuth_deg,
        }
    }

    pub fn factory_omni() -> Self {
        Self {
            kind: AntennaKind::FactoryOmni,
            element_gain_max_dbi: 2.0,
            array: None,
            downtilt_deg: 0.0,
            boresight_azimuth_deg: 0.0,
        }
    }

    pub fn ue_isotropic() -> Self {
        Self {
            kind: AntennaKind::UeIsotropic,
            element_gain_max_dbi: 0.0,
            array: None,
            downtilt_deg: 0.0,
            boresight_azimuth_deg: 0.0,
        }
    }

    pub fn is_array(&self) -> bool {
        self.kind == AntennaKind::MacroArray
    }

    /// Rotates a global unit vector into the panel frame: x along the tilted
    /// boresight, y along the horizontal panel axis, z along the vertical one.
    fn to_panel(&self, d: UnitVector) -> UnitVector {
        let az = self.boresight_azimuth_deg.to_radians();
        let (sa, ca) = az.sin_cos();
        // undo azimuth
        let x1 = ca * d.x + sa * d.y;
        let y1 = -sa * d.x + ca * d.y;
        let z1 = d.z;
        // undo downtilt (boresight points below the horizon by `tilt`)
        let tilt = self.downtilt_deg.to_radians();
        let (st, ct) = tilt.sin_cos();
        UnitVector { x: ct * x1 - st * z1, y: y1, z: st * x1 + ct * z1 }
    }

    fn element_gain_panel(&self, p: UnitVector) -> f64 {
        let phi = p.y.atan2(p.x).to_degrees();
        let theta = p.z.clamp(-1.0, 1.0).asin().to_degrees();
        let horizontal = -(12.0 * (phi / ELEMENT_BEAMWIDTH_DEG).powi(2)).min(ELEMENT_FRONT_BACK_DB);
        let vertical = -(12.0 * (theta / ELEMENT_BEAMWIDTH_DEG).powi(2)).min(ELEMENT_FRONT_BACK_DB);
        self.element_gain_max_dbi - (-(horizontal + vertical)).min(ELEMENT_FRONT_BACK_DB)
    }
}

/// Direction of propagation as a unit vector in the global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVector {
    pub fn from_angles(azimuth: f64, elevation: f64) -> Self {
        let (se, ce) = elevation.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self { x: ce * ca, y: ce * sa, z: se }
    }

    /// Unit vector from `from` towards `to`; `None` for coincident points.
    pub fn between(from: &Position3D, to: &Position3D) -> Option<Self> {
        let (dx, dy, dz) = (to.x - from.x, to.y - from.y, to.z - from.z);
        let n = (dx * dx + dy * dy + dz * dz).sqrt();
        (n > 0.0).then(|| Self { x: dx / n, y: dy / n, z: dz / n })
    }

    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn elevation(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).asin()
    }
}

/// Element gain in dBi towards the global direction (azimuth, elevation).
pub fn element_gain(antenna: &AntennaRef, azimuth: f64, elevation: f64) -> f64 {
    match antenna.kind {
        AntennaKind::FactoryOmni | AntennaKind::UeIsotropic => antenna.element_gain_max_dbi,
        AntennaKind::MacroArray => {
            let d = UnitVector::from_angles(azimuth, elevation);
            antenna.element_gain_panel(antenna.to_panel(d))
        }
    }
}

/// Element gain towards a unit direction.
pub fn element_gain_towards(antenna: &AntennaRef, d: UnitVector) -> f64 {
    match antenna.kind {
        AntennaKind::FactoryOmni | AntennaKind::UeIsotropic => antenna.element_gain_max_dbi,
        AntennaKind::MacroArray => antenna.element_gain_panel(antenna.to_panel(d)),
    }
}

/// Gain of a macro array whose beam is steered at `served`, seen from
/// `evaluated`: element gain plus the normalized array factor.
pub fn beam_gain(antenna: &AntennaRef, served: UnitVector, evaluated: UnitVector) -> Result<f64, AntennaError> {
    let array = match (antenna.kind, antenna.array) {
        (AntennaKind::MacroArray, Some(a)) => a,
        (kind, _) => return Err(AntennaError::NotAnArray(kind)),
    };
    let s = antenna.to_panel(served);
    let e = antenna.to_panel(evaluated);
    let k = 2.0 * std::f64::consts::PI * array.spacing_wavelengths;
    let af =
        dirichlet(array.cols, k * (e.y - s.y)) * dirichlet(array.rows, k * (e.z - s.z)) / f64::from(array.elements());
    Ok(antenna.element_gain_panel(e) + 10.0 * af.max(ARRAY_FACTOR_FLOOR).log10())
}

/// |sum_{n<N} exp(j n psi)|^2
fn dirichlet(n: u32, psi: f64) -> f64 {
    let half = 0.5 * psi;
    let den = half.sin();
    if den.abs() < 1e-12 {
        return f64::from(n * n);
    }
    let num = (f64::from(n) * half).sin();
    (num / den).powi(2)
}
