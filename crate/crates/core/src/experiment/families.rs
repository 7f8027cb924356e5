use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::domain::{DiscreteDistribution, Domain};
use crate::error::{CoreError, Result};

/// Input distributions used by experiments, laid out on the domain's linear index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionFamily {
    Uniform,
    /// `±2ε/N` on odd/even indices: TV exactly ε from uniform when N is even.
    Zigzag { eps: f64 },
    PointMass {
        #[serde(default)]
        at: usize,
    },
    /// Moves ε mass from the last `width` elements to the first `width`.
    BlockShift { eps: f64, width: usize },
    RandomDirichlet {
        seed: u64,
        #[serde(default = "one")]
        alpha: f64,
    },
    /// `(1−w)·uniform + w·δ_0`; index 0 is the all-zero corner of a grid.
    CornerMass {
        #[serde(default = "one")]
        weight: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DistributionFamily {
    pub fn label(&self) -> String {
        match self {
            DistributionFamily::Uniform => "uniform".into(),
            DistributionFamily::Zigzag { eps } => format!("zigzag({eps})"),
            DistributionFamily::PointMass { at } => format!("point-mass({at})"),
            DistributionFamily::BlockShift { eps, width } => format!("block-shift({eps};{width})"),
            DistributionFamily::RandomDirichlet { seed, alpha } => format!("random-dirichlet({seed};{alpha})"),
            DistributionFamily::CornerMass { weight } => format!("corner-mass({weight})"),
        }
    }

    pub fn build(&self, domain: &Domain) -> Result<DiscreteDistribution> {
        let n = domain.enumerable_size()?;
        let u = 1.0 / n as f64;
        match *self {
            DistributionFamily::Uniform => Ok(DiscreteDistribution::uniform(n)),
            DistributionFamily::Zigzag { eps } => {
                if !(eps >= 0.0 && eps <= 0.5) {
                    return Err(CoreError::InvalidParameter(format!("zigzag eps {eps} outside [0, 1/2]")));
                }
                let mut w: Vec<f64> = (0..n).map(|i| if i % 2 == 1 { u * (1.0 + 2.0 * eps) } else { u * (1.0 - 2.0 * eps) }).collect();
                if n % 2 == 1 {
                    w[n - 1] = u;
                }
                DiscreteDistribution::from_unnormalized(w)
            }
            DistributionFamily::PointMass { at } => {
                if at >= n {
                    return Err(CoreError::OutOfDomain(at.to_string()));
                }
                Ok(DiscreteDistribution::point_mass(n, at))
            }
            DistributionFamily::BlockShift { eps, width } => {
                if width == 0 || 2 * width > n || eps < 0.0 || eps / width as f64 > u + 1e-15 {
                    return Err(CoreError::InvalidParameter(format!("block-shift eps={eps} width={width} on {n} points")));
                }
                let d = eps / width as f64;
                let w = (0..n)
                    .map(|i| {
                        if i < width {
                            u + d
                        } else if i >= n - width {
                            (u - d).max(0.0)
                        } else {
                            u
                        }
                    })
                    .collect();
                DiscreteDistribution::from_unnormalized(w)
            }
            DistributionFamily::RandomDirichlet { seed, alpha } => {
                let g = Gamma::new(alpha, 1.0).map_err(|e| CoreError::InvalidParameter(e.to_string()))?;
                let mut rng = crate::rng_from_seed(seed);
                DiscreteDistribution::from_unnormalized((0..n).map(|_| g.sample(&mut rng)).collect())
            }
            DistributionFamily::CornerMass { weight } => {
                if !(0.0..=1.0).contains(&weight) {
                    return Err(CoreError::InvalidParameter(format!("corner weight {weight}")));
                }
                let mut w = vec![(1.0 - weight) * u; n];
                w[0] += weight;
                DiscreteDistribution::from_unnormalized(w)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tv_distance;

    #[test]
    fn tv_of_families() {
        let dom = Domain::line(2000).unwrap();
        let uni = DistributionFamily::Uniform.build(&dom).unwrap();
        let z = DistributionFamily::Zigzag { eps: 0.25 }.build(&dom).unwrap();
        assert!((tv_distance(&z, &uni).unwrap() - 0.25).abs() < 1e-12);
        let b = DistributionFamily::BlockShift { eps: 0.1, width: 200 }.build(&dom).unwrap();
        assert!((tv_distance(&b, &uni).unwrap() - 0.1).abs() < 1e-12);
        let d = DistributionFamily::RandomDirichlet { seed: 3, alpha: 1.0 }.build(&dom).unwrap();
        assert_eq!(d, DistributionFamily::RandomDirichlet { seed: 3, alpha: 1.0 }.build(&dom).unwrap());
        let g = Domain::grid(16, 2).unwrap();
        let c = DistributionFamily::CornerMass { weight: 1.0 }.build(&g).unwrap();
        assert_eq!(c.weight(0), 1.0);
        assert!(DistributionFamily::Zigzag { eps: 0.6 }.build(&dom).is_err());
    }

    #[test]
    fn toml_shape() {
        #[derive(Deserialize)]
        struct W {
            f: Vec<DistributionFamily>,
        }
        let w: W = toml::from_str(r#"f = [{ kind = "uniform" }, { kind = "zigzag", eps = 0.25 }, { kind = "point-mass" }]"#).unwrap();
        assert_eq!(w.f[1], DistributionFamily::Zigzag { eps: 0.25 });
        assert_eq!(w.f[2], DistributionFamily::PointMass { at: 0 });
    }
}
