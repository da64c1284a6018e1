use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};

/// Inputs of the per-scene RAM model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryModelParams {
    /// Objects per scene.
    pub n: f64,
    /// Output mask kinds, at most 5.
    pub masks: f64,
    /// Packing overhead per object.
    pub pack_overhead: f64,
    /// Auxiliary storage overhead per object.
    pub aux_overhead: f64,
    /// Constant system overhead in bytes.
    pub overhead_const: f64,
    pub mean_h: f64,
    pub mean_w: f64,
}

impl Default for MemoryModelParams {
    fn default() -> Self {
        MemoryModelParams {
            n: 9.0,
            masks: 1.0,
            pack_overhead: 1.1,
            aux_overhead: 0.1,
            overhead_const: 0.0,
            mean_h: 385.0,
            mean_w: 390.0,
        }
    }
}

impl MemoryModelParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("n", self.n),
            ("masks", self.masks),
            ("pack-overhead", self.pack_overhead),
            ("aux-overhead", self.aux_overhead),
            ("overhead-const", self.overhead_const),
            ("mean-h", self.mean_h),
            ("mean-w", self.mean_w),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::new(name, "[0,inf)", v));
            }
        }
        if self.masks > 5.0 {
            return Err(ConfigError::new("masks", "[0,5]", self.masks));
        }
        Ok(())
    }
}

/// Average bytes needed per scene:
/// `3 n h w ((1 + m) p + o + 2) + const`.
pub fn estimate_memory(p: &MemoryModelParams) -> Result<f64> {
    p.validate()?;
    let per_object = (1.0 + p.masks) * p.pack_overhead + p.aux_overhead + 2.0;
    Ok(3.0 * p.n * p.mean_h * p.mean_w * per_object + p.overhead_const)
}
