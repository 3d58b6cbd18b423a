use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::tensor::ElasticTensor;
use crate::{Error, Result};

/// Objective value reported for `C11/C12` when `|C12| < 1e-12`. It is the
/// worst possible value in the minimized vector, whatever the direction.
pub const RATIO_SENTINEL: f64 = 1e9;

/// Scalar property of a homogenized tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    E,
    Nu,
    C11,
    C22,
    C33,
    C12,
    C13,
    C23,
    C11OverC12,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::E,
        Property::Nu,
        Property::C11,
        Property::C22,
        Property::C33,
        Property::C12,
        Property::C13,
        Property::C23,
        Property::C11OverC12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::E => "E",
            Property::Nu => "nu",
            Property::C11 => "C11",
            Property::C22 => "C22",
            Property::C33 => "C33",
            Property::C12 => "C12",
            Property::C13 => "C13",
            Property::C23 => "C23",
            Property::C11OverC12 => "C11/C12",
        }
    }

    /// Raw property value, or `None` for an undefined ratio.
    pub fn value(self, t: &ElasticTensor) -> Option<f64> {
        let c = &t.c;
        Some(match self {
            Property::E => t.e_avg,
            Property::Nu => t.nu_avg,
            Property::C11 => c[0][0],
            Property::C22 => c[1][1],
            Property::C33 => c[2][2],
            Property::C12 => c[0][1],
            Property::C13 => c[0][2],
            Property::C23 => c[1][2],
            Property::C11OverC12 => {
                if c[0][1].abs() < 1e-12 {
                    return None;
                }
                c[0][0] / c[0][1]
            }
        })
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_' && !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let p = match key.as_str() {
            "e" => Property::E,
            "nu" | "v" | "poisson" => Property::Nu,
            "c11" => Property::C11,
            "c22" => Property::C22,
            "c33" => Property::C33,
            "c12" | "c21" => Property::C12,
            "c13" | "c31" => Property::C13,
            "c23" | "c32" => Property::C23,
            "c11/c12" => Property::C11OverC12,
            _ => return Err(Error::Config(alloc::format!("unknown property `{s}`"))),
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    Minimize,
    Maximize,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" | "minimize" => Ok(Direction::Minimize),
            "max" | "maximize" => Ok(Direction::Maximize),
            _ => Err(Error::Config(alloc::format!("unknown direction `{s}` (expected minimize or maximize)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Objective {
    pub property: Property,
    pub direction: Direction,
}

impl Objective {
    pub fn new(property: Property, direction: Direction) -> Self {
        Objective { property, direction }
    }

    pub fn maximize(property: Property) -> Self {
        Objective::new(property, Direction::Maximize)
    }

    pub fn minimize(property: Property) -> Self {
        Objective::new(property, Direction::Minimize)
    }

    /// Column label such as `max E` or `min nu`.
    pub fn label(&self) -> String {
        let d = match self.direction {
            Direction::Minimize => "min",
            Direction::Maximize => "max",
        };
        alloc::format!("{d} {}", self.property)
    }

    /// Converts a minimized objective value back to the property value.
    pub fn property_value(&self, objective: f64) -> f64 {
        match self.direction {
            Direction::Minimize => objective,
            Direction::Maximize => -objective,
        }
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for Property {
        fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
            s.serialize_str(self.name())
        }
    }

    impl<'de> Deserialize<'de> for Property {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            s.parse().map_err(serde::de::Error::custom)
        }
    }

    impl Serialize for Objective {
        fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
            use serde::ser::SerializeStruct;
            let mut st = s.serialize_struct("Objective", 2)?;
            st.serialize_field("property", &self.property)?;
            st.serialize_field("direction", &self.direction)?;
            st.end()
        }
    }

    impl<'de> Deserialize<'de> for Objective {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            #[derive(Deserialize)]
            struct Raw {
                property: Property,
                direction: Direction,
            }
            let r = Raw::deserialize(d)?;
            Ok(Objective::new(r.property, r.direction))
        }
    }
}

/// Objective vector in the minimization convention: maximized properties
/// are negated.
pub fn fitness_vector(tensor: &ElasticTensor, objectives: &[Objective]) -> Vec<f64> {
    objectives
        .iter()
        .map(|o| match o.property.value(tensor) {
            Some(v) => match o.direction {
                Direction::Minimize => v,
                Direction::Maximize => -v,
            },
            None => RATIO_SENTINEL,
        })
        .collect()
}
