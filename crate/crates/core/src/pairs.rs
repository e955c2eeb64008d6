//! Serde helper writing `BTreeMap<(usize, usize), f64>` as `[[i, j, value], ...]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(
    map: &BTreeMap<(usize, usize), f64>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    let triples: Vec<(usize, usize, f64)> = map.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
    triples.serialize(serializer)
}

pub fn deserialize<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
    let triples = Vec::<(usize, usize, f64)>::deserialize(deserializer)?;
    Ok(triples.into_iter().map(|(i, j, v)| ((i, j), v)).collect())
}
