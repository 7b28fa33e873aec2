use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Activation applied element-wise by a [`DenseLayer`](super::DenseLayer).
///
/// `Snake` carries the default frequency used when a layer is built; the live
/// per-neuron frequencies are stored on the layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
    Sin,
    Cos,
    SinPlusCos,
    XPlusSin,
    XPlusCos,
    /// `z + sin²(a z)`
    Snake { frequency: f64, trainable: bool },
}

impl Activation {
    /// One of each kind, with a representative snake frequency.
    pub const ALL: [Activation; 8] = [
        Activation::Linear,
        Activation::Relu,
        Activation::Sin,
        Activation::Cos,
        Activation::SinPlusCos,
        Activation::XPlusSin,
        Activation::XPlusCos,
        Activation::Snake { frequency: 1.3, trainable: true },
    ];

    pub fn is_snake(&self) -> bool {
        matches!(self, Activation::Snake { .. })
    }

    pub fn has_trainable_frequency(&self) -> bool {
        matches!(self, Activation::Snake { trainable: true, .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Sin => "sin",
            Activation::Cos => "cos",
            Activation::SinPlusCos => "sin+cos",
            Activation::XPlusSin => "x+sin",
            Activation::XPlusCos => "x+cos",
            Activation::Snake { trainable: false, .. } => "snake",
            Activation::Snake { trainable: true, .. } => "t-snake",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => Activation::Linear,
            "relu" => Activation::Relu,
            "sin" => Activation::Sin,
            "cos" => Activation::Cos,
            "sin+cos" => Activation::SinPlusCos,
            "x+sin" => Activation::XPlusSin,
            "x+cos" => Activation::XPlusCos,
            "snake" => Activation::Snake { frequency: 1.0, trainable: false },
            "t-snake" => Activation::Snake { frequency: 1.0, trainable: true },
            other => return Err(Error::parse(format!("unknown activation `{other}`"))),
        })
    }
}

/// Returns `(f(z), df/dz, df/da)`; `a` is only read by snake.
#[inline]
pub fn activate(kind: &Activation, z: f64, a: f64) -> (f64, f64, f64) {
    match kind {
        Activation::Linear => (z, 1.0, 0.0),
        Activation::Relu => {
            if z > 0.0 {
                (z, 1.0, 0.0)
            } else {
                (0.0, 0.0, 0.0)
            }
        }
        Activation::Sin => (z.sin(), z.cos(), 0.0),
        Activation::Cos => (z.cos(), -z.sin(), 0.0),
        Activation::SinPlusCos => {
            let (s, c) = z.sin_cos();
            (s + c, c - s, 0.0)
        }
        Activation::XPlusSin => (z + z.sin(), 1.0 + z.cos(), 0.0),
        Activation::XPlusCos => (z + z.cos(), 1.0 - z.sin(), 0.0),
        Activation::Snake { .. } => {
            let s = (a * z).sin();
            let s2 = (2.0 * a * z).sin();
            (z + s * s, 1.0 + a * s2, z * s2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn snake_at_origin() {
        let k = Activation::Snake { frequency: 1.0, trainable: true };
        assert_eq!(activate(&k, 0.0, 1.0), (0.0, 1.0, 0.0));
    }

    #[test]
    fn x_plus_sin_at_pi() {
        let (v, dz, da) = activate(&Activation::XPlusSin, PI, 0.0);
        assert!((v - PI).abs() < 1e-15);
        assert!(dz.abs() < 1e-15);
        assert_eq!(da, 0.0);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-6;
        for kind in Activation::ALL {
            for &(z, a) in &[(0.7, 1.3), (-1.9, 0.4), (2.3, 5.1)] {
                let (_, dz, da) = activate(&kind, z, a);
                let fz = (activate(&kind, z + h, a).0 - activate(&kind, z - h, a).0) / (2.0 * h);
                let fa = (activate(&kind, z, a + h).0 - activate(&kind, z, a - h).0) / (2.0 * h);
                let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-5);
                assert!(rel(dz, fz) < 1e-4, "{kind} dz at {z}: {dz} vs {fz}");
                assert!(rel(da, fa) < 1e-4, "{kind} da at {z}: {da} vs {fa}");
            }
        }
    }

    #[test]
    fn names_parse_back() {
        for kind in Activation::ALL {
            let parsed: Activation = kind.name().parse().unwrap();
            assert_eq!(parsed.name(), kind.name());
        }
        assert!("tanh".parse::<Activation>().is_err());
    }
}
