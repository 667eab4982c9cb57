use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::observation::Observation;

/// Maximum number of person slots a key can hold.
pub const MAX_PERSON_SLOTS: usize = 3;
const MAX_PARTS: usize = 2 + 2 * MAX_PERSON_SLOTS;

/// Discretization of observations into table keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    /// Width of a distance bucket, in cells.
    pub dist_bin_size: f64,
    /// Distances at or beyond this share the last ("far") bucket.
    pub dist_cap: f64,
    /// Number of equal bearing sectors, sector 0 centred straight ahead.
    pub angle_bins: u32,
    /// Fixed number of person slots. Missing people are padded with
    /// `(dist_cap, 0)`; extra people beyond the slot count are ignored.
    pub person_slots: usize,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        QuantizerConfig {
            dist_bin_size: 1.0,
            dist_cap: 15.0,
            angle_bins: 8,
            person_slots: 2,
        }
    }
}

impl QuantizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dist_bin_size > 0.0 && self.dist_bin_size.is_finite()) {
            return Err(Error::InvalidConfig("dist_bin_size must be positive".into()));
        }
        if !(self.dist_cap > 0.0 && self.dist_cap.is_finite()) {
            return Err(Error::InvalidConfig("dist_cap must be positive".into()));
        }
        if (self.dist_cap / self.dist_bin_size).floor() > f64::from(u8::MAX) {
            return Err(Error::InvalidConfig("more than 256 distance buckets".into()));
        }
        if self.angle_bins < 4 || self.angle_bins % 2 != 0 || self.angle_bins > 256 {
            return Err(Error::InvalidConfig(format!(
                "angle_bins must be even and in [4, 256], got {}",
                self.angle_bins
            )));
        }
        if self.person_slots == 0 || self.person_slots > MAX_PERSON_SLOTS {
            return Err(Error::InvalidConfig(format!(
                "person_slots must be in [1, {MAX_PERSON_SLOTS}], got {}",
                self.person_slots
            )));
        }
        Ok(())
    }

    pub fn key_len(&self) -> usize {
        2 + 2 * self.person_slots
    }

    pub fn dist_index(&self, d: f64) -> u8 {
        (d.min(self.dist_cap) / self.dist_bin_size).floor() as u8
    }

    pub fn sector(&self, bearing: f64) -> u8 {
        let n = self.angle_bins;
        let width = TAU / f64::from(n);
        let raw = ((bearing + width / 2.0) / width).floor() as i64;
        raw.rem_euclid(i64::from(n)) as u8
    }

    pub fn quantize(&self, obs: &Observation) -> ObsKey {
        let mut parts = [0u8; MAX_PARTS];
        parts[0] = self.dist_index(obs.goal.dist);
        parts[1] = self.sector(obs.goal.bearing);
        let pad = self.dist_index(self.dist_cap);
        for slot in 0..self.person_slots {
            let (d, s) = match obs.people.get(slot) {
                Some(p) => (self.dist_index(p.dist), self.sector(p.bearing)),
                None => (pad, 0),
            };
            parts[2 + 2 * slot] = d;
            parts[3 + 2 * slot] = s;
        }
        ObsKey {
            parts,
            len: self.key_len() as u8,
        }
    }
}

pub fn quantize(q: &QuantizerConfig, obs: &Observation) -> ObsKey {
    q.quantize(obs)
}

/// Quantized observation: goal distance/sector then one pair per person slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObsKey {
    parts: [u8; MAX_PARTS],
    len: u8,
}

impl ObsKey {
    pub fn from_parts(parts: &[u8]) -> Result<Self> {
        if parts.len() < 4 || parts.len() > MAX_PARTS || parts.len() % 2 != 0 {
            return Err(Error::Model(format!("bad key length {}", parts.len())));
        }
        let mut buf = [0u8; MAX_PARTS];
        buf[..parts.len()].copy_from_slice(parts);
        Ok(ObsKey {
            parts: buf,
            len: parts.len() as u8,
        })
    }

    pub fn parts(&self) -> &[u8] {
        &self.parts[..self.len as usize]
    }
}

impl fmt::Display for ObsKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::Polar;

    fn obs(goal: (f64, f64), people: &[(f64, f64)]) -> Observation {
        Observation {
            goal: Polar { dist: goal.0, bearing: goal.1 },
            people: people.iter().map(|&(d, b)| Polar { dist: d, bearing: b }).collect(),
        }
    }

    #[test]
    fn origin_bucket() {
        let q = QuantizerConfig::default();
        let k = q.quantize(&obs((0.0, 0.0), &[(0.0, 0.0), (0.0, 0.0)]));
        assert_eq!(k.parts(), &[0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn far_distances_saturate() {
        let q = QuantizerConfig::default();
        assert_eq!(q.dist_index(40.0), 15);
        assert_eq!(q.dist_index(15.0), 15);
        assert_eq!(q.dist_index(14.999), 14);
    }

    #[test]
    fn sector_boundaries() {
        let q = QuantizerConfig::default();
        let deg = |d: f64| d.to_radians();
        assert_eq!(q.sector(deg(22.5 + 1e-9)), 1);
        assert_eq!(q.sector(deg(22.4)), 0);
        assert_eq!(q.sector(deg(-22.4)), 0);
        assert_eq!(q.sector(deg(-22.6)), 7);
        assert_eq!(q.sector(deg(90.0)), 2);
        assert_eq!(q.sector(std::f64::consts::PI), 4);
        assert_eq!(q.sector(deg(-90.0)), 6);
    }

    #[test]
    fn missing_people_are_padded() {
        let q = QuantizerConfig::default();
        let k = q.quantize(&obs((3.0, 0.0), &[(2.0, 0.0)]));
        assert_eq!(k.parts(), &[3, 0, 2, 0, 15, 0]);
    }

    #[test]
    fn extra_people_are_ignored() {
        let q = QuantizerConfig::default();
        let k = q.quantize(&obs((3.0, 0.0), &[(2.0, 0.0), (4.0, 0.0), (6.0, 0.0)]));
        assert_eq!(k.parts().len(), 6);
    }

    #[test]
    fn validation() {
        assert!(QuantizerConfig::default().validate().is_ok());
        assert!(QuantizerConfig { angle_bins: 6, ..Default::default() }.validate().is_ok());
        assert!(QuantizerConfig { angle_bins: 7, ..Default::default() }.validate().is_err());
        assert!(QuantizerConfig { angle_bins: 2, ..Default::default() }.validate().is_err());
        assert!(QuantizerConfig { dist_bin_size: 0.0, ..Default::default() }.validate().is_err());
        assert!(QuantizerConfig { person_slots: 4, ..Default::default() }.validate().is_err());
    }
}
