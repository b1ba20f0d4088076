use crate::error::{Error, Result};
use crate::lattice::lattice_box::LatticeBox;
use serde::{Deserialize, Serialize};

/// Japanese bracket `(1 + t^2)^(1/2)`.
#[inline]
pub fn japanese(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

fn euclid(x: &[i64]) -> f64 {
    x.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub site: Vec<i64>,
    pub value: f64,
}

/// Real potentials and weights on `Z^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `sign * C * (1 + |x|)^(-alpha)`.
    PowerDecay {
        alpha: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        sign: f64,
    },
    PointMass { site: Vec<i64>, value: f64 },
    /// `<x_d>^(-1/p) prod_{j<d} <x_j - x_d>^(-1/p)`.
    AnisotropicWeight { p: f64 },
    /// `<x_1 + x_2>^(-1/2) <x_1 - x_2>^(-1)` on `Z^2`.
    FlatBandWeight,
    Table { entries: Vec<TableEntry> },
}

fn one() -> f64 {
    1.0
}

impl Potential {
    pub fn power_decay(alpha: f64, amplitude: f64) -> Self {
        Potential::PowerDecay {
            alpha,
            amplitude: amplitude.abs(),
            sign: if amplitude < 0.0 { -1.0 } else { 1.0 },
        }
    }

    pub fn point_mass(site: Vec<i64>, value: f64) -> Self {
        Potential::PointMass { site, value }
    }

    pub fn table(entries: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Self {
        Potential::Table {
            entries: entries
                .into_iter()
                .map(|(site, value)| TableEntry { site, value })
                .collect(),
        }
    }

    /// Parses `power:<exp>[:<amp>]`, `delta:<value>`, `aniso:<p>`, `flatband`.
    ///
    /// For `power`, the exponent is the signed decay exponent, so
    /// `power:-2` is `(1+|x|)^(-2)`.
    pub fn parse_shorthand(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number '{t}' in potential '{s}'")))
        };
        match parts.as_slice() {
            ["power", e] => Ok(Self::power_decay(-num(e)?, 1.0)),
            ["power", e, a] => Ok(Self::power_decay(-num(e)?, num(a)?)),
            ["delta", v] => Ok(Self::PointMass {
                site: vec![],
                value: num(v)?,
            }),
            ["aniso", p] => Ok(Self::AnisotropicWeight { p: num(p)? }),
            ["flatband"] => Ok(Self::FlatBandWeight),
            _ => Err(Error::InvalidInput(format!("unrecognized potential '{s}'"))),
        }
    }

    /// Fills an empty point-mass site with the origin of `Z^d`.
    pub fn resolve_dim(self, d: usize) -> Self {
        match self {
            Potential::PointMass { site, value } if site.is_empty() => Potential::PointMass {
                site: vec![0; d],
                value,
            },
            other => other,
        }
    }

    pub fn eval(&self, x: &[i64]) -> f64 {
        match self {
            Potential::PowerDecay {
                alpha,
                amplitude,
                sign,
            } => sign * amplitude * (1.0 + euclid(x)).powf(-alpha),
            Potential::PointMass { site, value } => {
                if site.as_slice() == x {
                    *value
                } else {
                    0.0
                }
            }
            Potential::AnisotropicWeight { p } => {
                let d = x.len();
                let xd = x[d - 1];
                let mut w = japanese(xd as f64).powf(-1.0 / p);
                for &xj in &x[..d - 1] {
                    w *= japanese((xj - xd) as f64).powf(-1.0 / p);
                }
                w
            }
            Potential::FlatBandWeight => {
                assert_eq!(x.len(), 2, "flat-band weight lives on Z^2");
                japanese((x[0] + x[1]) as f64).powf(-0.5) / japanese((x[0] - x[1]) as f64)
            }
            Potential::Table { entries } => entries
                .iter()
                .filter(|e| e.site.as_slice() == x)
                .map(|e| e.value)
                .sum(),
        }
    }

    pub fn sample(&self, bx: &LatticeBox) -> Vec<f64> {
        bx.sites().map(|x| self.eval(&x)).collect()
    }

    /// `|V|^(1/2)` sampled on the box.
    pub fn sqrt_abs(&self, bx: &LatticeBox) -> Vec<f64> {
        bx.sites().map(|x| self.eval(&x).abs().sqrt()).collect()
    }

    pub fn is_finitely_supported(&self) -> bool {
        matches!(self, Potential::PointMass { .. } | Potential::Table { .. })
    }

    /// Nonzero sites for finitely supported kinds.
    pub fn support(&self) -> Option<Vec<(Vec<i64>, f64)>> {
        match self {
            Potential::PointMass { site, value } if *value != 0.0 => {
                Some(vec![(site.clone(), *value)])
            }
            Potential::PointMass { .. } => Some(vec![]),
            Potential::Table { entries } => {
                let mut out: Vec<(Vec<i64>, f64)> = Vec::new();
                for e in entries {
                    match out.iter_mut().find(|(s, _)| *s == e.site) {
                        Some(slot) => slot.1 += e.value,
                        None => out.push((e.site.clone(), e.value)),
                    }
                }
                out.retain(|(_, v)| *v != 0.0);
                out.sort_by(|a, b| a.0.cmp(&b.0));
                Some(out)
            }
            _ => None,
        }
    }

    /// Sup over sites outside the box of `|V|`, or an upper bound for it.
    pub fn tail_bound(&self, bx: &LatticeBox) -> f64 {
        let r = bx.r as f64;
        match self {
            Potential::PowerDecay {
                alpha, amplitude, ..
            } => amplitude * (1.0 + r).powf(-alpha),
            Potential::AnisotropicWeight { .. } => 1.0,
            Potential::FlatBandWeight => 1.0,
            _ => match self.support() {
                Some(s) => s
                    .iter()
                    .filter(|(x, _)| !bx.contains(x))
                    .map(|(_, v)| v.abs())
                    .fold(0.0, f64::max),
                None => 0.0,
            },
        }
    }

    pub fn is_nonpositive(&self) -> bool {
        match self {
            Potential::PowerDecay { sign, .. } => *sign <= 0.0,
            Potential::PointMass { value, .. } => *value <= 0.0,
            Potential::Table { entries } => entries.iter().all(|e| e.value <= 0.0),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_decay_envelope() {
        let v = Potential::power_decay(2.0, -3.0);
        for x in LatticeBox::new(3, 4).sites() {
            let bound = 3.0 * (1.0 + euclid(&x)).powf(-2.0);
            assert!(v.eval(&x).abs() <= bound);
            assert!(v.eval(&x) <= 0.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let pots = vec![
            Potential::power_decay(2.0, 1.0),
            Potential::point_mass(vec![0, 0], -1.0),
            Potential::AnisotropicWeight { p: 6.0 },
            Potential::FlatBandWeight,
            Potential::table([(vec![0, 0, 0], -5.0), (vec![1, 0, 0], 5.0)]),
        ];
        for p in pots {
            let s = serde_json::to_string(&p).unwrap();
            let back: Potential = serde_json::from_str(&s).unwrap();
            assert_eq!(back, p);
        }
        let p: Potential = serde_json::from_str(r#"{"kind":"power_decay","alpha":2.0}"#).unwrap();
        assert_eq!(p, Potential::power_decay(2.0, 1.0));
    }

    #[test]
    fn shorthand() {
        assert_eq!(
            Potential::parse_shorthand("power:-2").unwrap(),
            Potential::power_decay(2.0, 1.0)
        );
        assert_eq!(
            Potential::parse_shorthand("power:-1:-0.5").unwrap(),
            Potential::power_decay(1.0, -0.5)
        );
        assert_eq!(
            Potential::parse_shorthand("delta:-1").unwrap().resolve_dim(2),
            Potential::point_mass(vec![0, 0], -1.0)
        );
        assert!(Potential::parse_shorthand("gauss:1").is_err());
    }

    #[test]
    fn weights() {
        let w = Potential::FlatBandWeight;
        assert!((w.eval(&[0, 0]) - 1.0).abs() < 1e-15);
        assert!((w.eval(&[3, 0]) - 10f64.powf(-0.25) / 10f64.sqrt()).abs() < 1e-15);
        let a = Potential::AnisotropicWeight { p: 2.0 };
        assert!((a.eval(&[1, 1]) - 2f64.powf(-0.25)).abs() < 1e-15);
    }
}
