//! JSON form of a state:
//! `{ "modes": ["a1:H", ...], "terms": [{ "occ": {"a1:H": 1}, "re": x, "im": y }] }`.
//!
//! Terms are written in canonical order. The photon cap is not part of the
//! document; deserialized states get the default cap.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FockBasisVector, ModeId, PhotonicState};
use crate::error::Result;

#[derive(Serialize, Deserialize)]
struct StateDoc {
    modes: Vec<ModeId>,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    occ: BTreeMap<ModeId, u8>,
    re: f64,
    im: f64,
}

impl Serialize for PhotonicState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = StateDoc {
            modes: self.modes().to_vec(),
            terms: self
                .terms()
                .map(|(b, a)| TermDoc { occ: b.iter().map(|(m, n)| (m.clone(), n)).collect(), re: a.re, im: a.im })
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PhotonicState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = StateDoc::deserialize(deserializer)?;
        let terms =
            doc.terms.into_iter().map(|t| (t.occ.into_iter().collect::<FockBasisVector>(), Complex64::new(t.re, t.im)));
        PhotonicState::from_terms(doc.modes, terms).map_err(serde::de::Error::custom)
    }
}

impl PhotonicState {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
