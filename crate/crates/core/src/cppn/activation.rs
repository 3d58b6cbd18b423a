use core::fmt;
use core::str::FromStr;

use crate::math;

/// Node activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Square,
    Sigmoid,
    Gaussian,
    Sine,
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    /// The menu used by the published experiments. `Linear` is reserved for
    /// input nodes and hand-built genomes.
    pub const SEARCH: [Activation; 6] = [
        Activation::Square,
        Activation::Sigmoid,
        Activation::Gaussian,
        Activation::Sine,
        Activation::Relu,
        Activation::Tanh,
    ];

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Square => z * z,
            Activation::Sigmoid => 1.0 / (1.0 + math::exp(-z)),
            Activation::Gaussian => math::exp(-z * z),
            Activation::Sine => math::sin(z),
            Activation::Relu => z.max(0.0),
            Activation::Tanh => math::tanh(z),
            Activation::Linear => z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Square => "square",
            Activation::Sigmoid => "sigmoid",
            Activation::Gaussian => "gaussian",
            Activation::Sine => "sine",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "square" => Activation::Square,
            "sigmoid" => Activation::Sigmoid,
            "gaussian" => Activation::Gaussian,
            "sine" | "sin" => Activation::Sine,
            "relu" => Activation::Relu,
            "tanh" => Activation::Tanh,
            "linear" | "identity" => Activation::Linear,
            other => {
                return Err(crate::Error::Config(alloc::format!("unknown activation `{other}`")))
            }
        })
    }
}
