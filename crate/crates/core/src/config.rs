//! Generation parameters, loadable from a TOML file.
//!
//! Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! image_size = 512
//! epsilon_height = 1.0
//! retry_budget = 50
//! size_up_probability = 0.5
//! co_loc_radius = 60.0
//! camera_fov = 50.0
//! v_min = 0.10
//! n_min = 5
//! o_max = 0.02
//! n_iter = 50
//! step_fraction = 0.05
//!
//! [target_distribution]
//! small = 0.3333333333333333
//! medium = 0.3333333333333333
//! large = 0.3333333333333334
//!
//! [camera_box]
//! half_xy = 200.0
//! z_min = 80.0
//! z_max = 200.0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::SizeCategory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Square output image side, pixels.
    pub image_size: u32,

    /// Gap treated as resting contact by the support drop, scene units.
    pub contact_tolerance: f64,
    /// Samples per side of the support-drop footprint grid.
    pub drop_grid: usize,

    /// Minimum height change for an accepted co-occurrence location move.
    pub epsilon_height: f64,
    /// Resamples per operation before giving up.
    pub retry_budget: u32,
    /// Probability of the scale-up branch of the size operation.
    pub size_up_probability: f64,
    /// Radius of the co-occurrence location displacement ball.
    pub co_loc_radius: f64,
    /// Step length of the co-occurrence rotation separation walk.
    pub separation_step: f64,
    /// Separation walk budget as a multiple of the object's largest extent.
    pub separation_budget: f64,
    /// Transformations sought per camera (also the weighting fallback threshold).
    pub transforms_per_camera: usize,
    pub target_distribution: TargetDistribution,

    /// Vertical field of view, degrees.
    pub camera_fov: f64,
    pub v_min: f64,
    pub n_min: usize,
    pub o_max: f64,
    pub n_iter: usize,
    /// Search step as a fraction of the initial camera-to-centroid distance.
    pub step_fraction: f64,
    pub camera_box: CameraBox,
    /// Surface samples per object for visibility estimates.
    pub surface_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDistribution {
    pub small: f64,
    pub medium: f64,
    pub large: f64,
}

impl Default for TargetDistribution {
    fn default() -> Self {
        TargetDistribution {
            small: 1.0 / 3.0,
            medium: 1.0 / 3.0,
            large: 1.0 - 2.0 / 3.0,
        }
    }
}

impl TargetDistribution {
    pub fn get(&self, category: SizeCategory) -> f64 {
        match category {
            SizeCategory::Small => self.small,
            SizeCategory::Medium => self.medium,
            SizeCategory::Large => self.large,
        }
    }

    pub fn to_map(&self) -> BTreeMap<SizeCategory, f64> {
        SizeCategory::ALL.iter().map(|&c| (c, self.get(c))).collect()
    }
}

/// Region above the centroid the initial camera location is drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraBox {
    /// Half extent in X and Y around the centroid.
    pub half_xy: f64,
    /// Height range above the centroid.
    pub z_min: f64,
    pub z_max: f64,
}

impl Default for CameraBox {
    fn default() -> Self {
        CameraBox {
            half_xy: 200.0,
            z_min: 80.0,
            z_max: 200.0,
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            image_size: 512,
            contact_tolerance: 1e-3,
            drop_grid: 8,
            epsilon_height: 1.0,
            retry_budget: 50,
            size_up_probability: 0.5,
            co_loc_radius: 60.0,
            separation_step: 0.01,
            separation_budget: 10.0,
            transforms_per_camera: 5,
            target_distribution: TargetDistribution::default(),
            camera_fov: 50.0,
            v_min: 0.10,
            n_min: 5,
            o_max: 0.02,
            n_iter: 50,
            step_fraction: 0.05,
            camera_box: CameraBox::default(),
            surface_samples: 64,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let t = &self.target_distribution;
        for (name, v) in [("small", t.small), ("medium", t.medium), ("large", t.large)] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("target_distribution.{name} = {v} outside [0, 1]"));
            }
        }
        let sum = t.small + t.medium + t.large;
        if (sum - 1.0).abs() > 1e-9 {
            return fail(format!("target_distribution sums to {sum}, expected 1"));
        }
        if self.image_size == 0 || self.image_size > u16::MAX as u32 {
            return fail(format!("image_size {} out of range", self.image_size));
        }
        if !(self.camera_fov > 10.0 && self.camera_fov < 120.0) {
            return fail(format!("camera_fov {} outside (10, 120)", self.camera_fov));
        }
        if !(0.0..=1.0).contains(&self.size_up_probability) {
            return fail(format!("size_up_probability {} outside [0, 1]", self.size_up_probability));
        }
        if self.camera_box.z_min <= 0.0 || self.camera_box.z_max < self.camera_box.z_min {
            return fail("camera_box needs 0 < z_min <= z_max".into());
        }
        let positive = [
            ("contact_tolerance", self.contact_tolerance),
            ("epsilon_height", self.epsilon_height),
            ("co_loc_radius", self.co_loc_radius),
            ("separation_step", self.separation_step),
            ("separation_budget", self.separation_budget),
            ("step_fraction", self.step_fraction),
            ("camera_box.half_xy", self.camera_box.half_xy),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.drop_grid == 0 || self.n_iter == 0 || self.surface_samples == 0 || self.transforms_per_camera == 0 {
            return fail("drop_grid, n_iter, surface_samples and transforms_per_camera must be >= 1".into());
        }
        Ok(())
    }
}
