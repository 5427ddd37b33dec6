//! Serialization helpers: points as coordinate arrays and non-finite numbers
//! as `null`, so every report is valid JSON.

use serde::ser::SerializeSeq;
use serde::Serializer;

use crate::boundary::Vec3;

pub fn finite<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

pub fn finite_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        _ => s.serialize_none(),
    }
}

pub fn point<S: Serializer>(p: &Vec3, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(p.iter())
}

pub fn points<S: Serializer>(ps: &[Vec3], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(ps.len()))?;
    for p in ps {
        seq.serialize_element(&[p.x, p.y, p.z])?;
    }
    seq.end()
}
