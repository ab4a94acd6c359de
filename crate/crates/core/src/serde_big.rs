//! Serialization helpers: big integers travel as decimal strings.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::Serializer;

pub fn biguint<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn opt_bigint<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub fn biguint_seq<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

pub fn prime_map<S: Serializer>(m: &BTreeMap<BigUint, u32>, s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for (p, e) in m {
        map.serialize_entry(&p.to_string(), e)?;
    }
    map.end()
}
