use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn flipped(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// One bosonic mode: a spatial path label together with a polarization.
///
/// Modes order by spatial label first, then `H` before `V`, which fixes the
/// canonical registry order of every state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    spatial: String,
    polarization: Polarization,
}

impl ModeId {
    pub fn new(spatial: impl Into<String>, polarization: Polarization) -> Self {
        Self { spatial: spatial.into(), polarization }
    }

    pub fn h(spatial: impl Into<String>) -> Self {
        Self::new(spatial, Polarization::H)
    }

    pub fn v(spatial: impl Into<String>) -> Self {
        Self::new(spatial, Polarization::V)
    }

    pub fn spatial(&self) -> &str {
        &self.spatial
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.spatial, self.polarization)
    }
}

impl FromStr for ModeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (spatial, pol) = s.rsplit_once(':').ok_or_else(|| Error::ParseMode(s.into()))?;
        if spatial.is_empty() {
            return Err(Error::ParseMode(s.into()));
        }
        let pol = match pol {
            "H" => Polarization::H,
            "V" => Polarization::V,
            _ => return Err(Error::ParseMode(s.into())),
        };
        Ok(ModeId::new(spatial, pol))
    }
}

impl Serialize for ModeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Both polarization modes of every listed spatial label, in canonical order.
pub fn registry<S: AsRef<str>>(labels: &[S]) -> Vec<ModeId> {
    let mut modes: Vec<ModeId> =
        labels.iter().flat_map(|l| Polarization::BOTH.map(|p| ModeId::new(l.as_ref(), p))).collect();
    modes.sort();
    modes.dedup();
    modes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let m: ModeId = "c1:V".parse().unwrap();
        assert_eq!(m, ModeId::v("c1"));
        assert_eq!(m.to_string(), "c1:V");
        // labels may themselves contain colons
        let m: ModeId = "x:y:H".parse().unwrap();
        assert_eq!(m.spatial(), "x:y");
    }

    #[test]
    fn parse_rejects_bad_strings() {
        for s in ["c1", "c1:D", ":H", "c1:"] {
            assert!(s.parse::<ModeId>().is_err(), "{s}");
        }
    }

    #[test]
    fn registry_is_sorted_and_complete() {
        let r = registry(&["b1", "a1"]);
        let names: Vec<String> = r.iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["a1:H", "a1:V", "b1:H", "b1:V"]);
    }
}
