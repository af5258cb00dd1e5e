//! Descent ingredients over a multiquadratic field.
//!
//! [`quadratic`] handles points over a single real quadratic field Q(sqrt d)
//! and their transport to the twist E^(d). [`module`] checks the identity
//! 2^r m = sum_s sum_sigma s(sigma) m^sigma on finite modules with an action
//! of (Z/2)^r.

pub mod module;
pub mod quadratic;

use std::fmt;

use serde::Serialize;

use crate::rootnum::Sign;

pub use module::{lemma_sum_check, signed_module_family, SignedModule, SumCertificate};
pub use quadratic::{quad_point_search, twist_map, QuadElt, QuadPoint};

/// A character of (Z/2)^r, given by its values on the r generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Character {
    pub signs: Vec<Sign>,
}

impl Character {
    pub fn trivial(r: usize) -> Self {
        Character { signs: vec![Sign::Plus; r] }
    }

    /// Bit i of `mask` set means the value -1 on generator i.
    pub fn from_mask(r: usize, mask: u32) -> Self {
        Character {
            signs: (0..r).map(|i| if mask >> i & 1 == 1 { Sign::Minus } else { Sign::Plus }).collect(),
        }
    }

    pub fn mask(&self) -> u32 {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == Sign::Minus)
            .map(|(i, _)| 1u32 << i)
            .sum()
    }

    /// All 2^r characters, trivial first.
    pub fn all(r: usize) -> Vec<Character> {
        (0..1u32 << r).map(|mask| Character::from_mask(r, mask)).collect()
    }

    pub fn rank(&self) -> usize {
        self.signs.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.signs.iter().all(|&s| s == Sign::Plus)
    }

    /// Value on the group element that is the product of the generators in
    /// `sigma_mask`.
    pub fn eval(&self, sigma_mask: u32) -> Sign {
        if (self.mask() & sigma_mask).count_ones().is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.signs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(match s {
                Sign::Plus => "+",
                Sign::Minus => "-",
            })?;
        }
        f.write_str(")")
    }
}
