//! RA-IRS energy accounting and far-field IRS sizing.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlatformParams {
    pub mass_irs: f64,
    pub mass_uav: f64,
    pub mass_gripper: f64,
    /// Propulsion power, W. Held constant.
    pub p_fly: f64,
    /// Cruise speed, m/s.
    pub v_fly: f64,
    pub p_grasp: f64,
    pub p_irs: f64,
    /// Usable battery energy, J.
    pub battery: f64,
    pub service_hours: f64,
}

impl Default for PlatformParams {
    fn default() -> Self {
        PlatformParams {
            mass_irs: 0.1,
            mass_uav: 4.0,
            mass_gripper: 0.4,
            p_fly: 253.6,
            v_fly: 10.0,
            p_grasp: 10.0,
            p_irs: 0.9,
            battery: 799_200.0,
            service_hours: 12.0,
        }
    }
}

impl PlatformParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass_irs", self.mass_irs),
            ("mass_uav", self.mass_uav),
            ("mass_gripper", self.mass_gripper),
            ("p_fly", self.p_fly),
            ("v_fly", self.v_fly),
            ("p_grasp", self.p_grasp),
            ("p_irs", self.p_irs),
            ("battery", self.battery),
            ("service_hours", self.service_hours),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("platform parameter {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn service_seconds(&self) -> f64 {
        self.service_hours * 3600.0
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_irs + self.mass_uav + self.mass_gripper
    }
}

pub fn fly_energy(distance: f64, params: &PlatformParams) -> Result<f64> {
    if !(distance >= 0.0) {
        return Err(invalid(format!("flight distance must be non-negative, got {distance}")));
    }
    Ok(params.p_fly * distance / params.v_fly)
}

/// Upper bound: the gripper is assumed engaged for the whole service time.
pub fn grasp_energy(params: &PlatformParams) -> f64 {
    params.p_grasp * params.service_seconds()
}

pub fn reflect_energy(params: &PlatformParams) -> f64 {
    params.p_irs * params.service_seconds()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub e_fly: f64,
    pub e_grasp: f64,
    pub e_reflect: f64,
    pub residual: f64,
    pub feasible: bool,
}

impl EnergyLedger {
    pub fn for_distance(distance: f64, params: &PlatformParams) -> Result<Self> {
        let e_fly = fly_energy(distance, params)?;
        let e_grasp = grasp_energy(params);
        let e_reflect = reflect_energy(params);
        let residual = params.battery - e_fly - e_grasp - e_reflect;
        Ok(EnergyLedger {
            e_fly,
            e_grasp,
            e_reflect,
            residual,
            feasible: residual >= 0.0,
        })
    }

    pub fn total(&self) -> f64 {
        self.e_fly + self.e_grasp + self.e_reflect
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightRange {
    pub meters: f64,
    /// Energy left for propulsion after grasping and reflecting.
    pub budget_j: f64,
    pub feasible: bool,
}

/// Distance a single RA-IRS can fly on what is left of its battery after
/// grasping and reflecting for the full service time.
pub fn flight_range(params: &PlatformParams) -> FlightRange {
    let budget = params.battery - grasp_energy(params) - reflect_energy(params);
    if budget < 0.0 {
        return FlightRange {
            meters: 0.0,
            budget_j: budget,
            feasible: false,
        };
    }
    FlightRange {
        meters: budget / params.p_fly * params.v_fly,
        budget_j: budget,
        feasible: true,
    }
}

/// Far-field boundary of a square `n_r × n_r` array at half-wavelength pitch.
pub fn fraunhofer_distance(n_r: usize, wavelength: f64) -> f64 {
    wavelength / 2.0 * (n_r * n_r) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrsSizing {
    pub n_r: usize,
    pub n_elements: usize,
    pub fraunhofer: f64,
}

/// Largest side length that is a multiple of 4 and keeps the far-field
/// distance within `d_min`.
pub fn size_irs(d_min: f64, wavelength: f64) -> Result<IrsSizing> {
    if !(d_min > 0.0 && d_min.is_finite()) {
        return Err(invalid(format!("minimum distance must be positive, got {d_min}")));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    let guess = (2.0 * d_min / wavelength).sqrt().floor() as usize;
    let mut n_r = (guess / 4 + 1) * 4;
    while n_r > 0 && fraunhofer_distance(n_r, wavelength) > d_min {
        n_r -= 4;
    }
    if n_r == 0 {
        return Err(Error::Sizing(format!(
            "D_min = {d_min} m is below the far-field distance {:.4} m of a 4x4 surface",
            fraunhofer_distance(4, wavelength)
        )));
    }
    Ok(IrsSizing {
        n_r,
        n_elements: n_r * n_r,
        fraunhofer: fraunhofer_distance(n_r, wavelength),
    })
}
