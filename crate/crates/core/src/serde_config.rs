//! Serde adapters that encode configurations as plain number arrays.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Configuration;

pub fn serialize<S: Serializer>(q: &Configuration, s: S) -> Result<S::Ok, S::Error> {
    q.as_slice().serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Configuration, D::Error> {
    Ok(Configuration::from_vec(Vec::<f64>::deserialize(d)?))
}

pub mod list {
    use super::*;

    pub fn serialize<S: Serializer>(qs: &[Configuration], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = qs.iter().map(|q| q.as_slice()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Configuration>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Ok(rows.into_iter().map(Configuration::from_vec).collect())
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Option<Configuration>, s: S) -> Result<S::Ok, S::Error> {
        q.as_ref().map(|q| q.as_slice()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Configuration>, D::Error> {
        Ok(Option::<Vec<f64>>::deserialize(d)?.map(Configuration::from_vec))
    }
}
