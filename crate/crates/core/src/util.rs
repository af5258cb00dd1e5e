use std::fmt::Display;

use serde::Serializer;

/// Serializes any `Display` value as a JSON string (big integers, rationals).
pub fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
