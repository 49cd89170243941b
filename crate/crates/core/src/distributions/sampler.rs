use rand::distributions::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, TrialRng};

use super::DiscreteDistribution;

/// Default share of the variance carried by the far atoms of
/// [`Family::TwoPointOutlier`].
pub const TWO_POINT_OUTLIER_SHARE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Discrete(DiscreteDistribution<f64>),
    Gaussian {
        mean: Vec<f64>,
        sigma: f64,
    },
    /// Independent Student-t coordinates, `scale * t(dof)`.
    StudentT {
        dof: f64,
        scale: f64,
        d: usize,
    },
    /// Along `axis`: `±m` with mass `share sigma² / m²`, otherwise a
    /// symmetric pair completing variance `sigma²`. Other coordinates are
    /// `N(0, sigma²)`.
    TwoPointOutlier {
        m: f64,
        sigma: f64,
        d: usize,
        axis: usize,
        share: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub family: Family,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self { family, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { family: self.family.clone(), seed }
    }

    pub fn dimension(&self) -> usize {
        match &self.family {
            Family::Discrete(d) => d.dimension,
            Family::Gaussian { mean, .. } => mean.len(),
            Family::StudentT { d, .. } | Family::TwoPointOutlier { d, .. } => *d,
        }
    }

    /// Mean of the law, when finite.
    pub fn mean(&self) -> Vec<f64> {
        match &self.family {
            Family::Discrete(d) => d.mean(),
            Family::Gaussian { mean, .. } => mean.clone(),
            Family::StudentT { d, .. } | Family::TwoPointOutlier { d, .. } => vec![0.0; *d],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        match &self.family {
            Family::Discrete(d) => d.validate(),
            Family::Gaussian { mean, sigma } => {
                if mean.is_empty() || !(*sigma >= 0.0) || mean.iter().any(|x| !x.is_finite()) {
                    return bad("gaussian needs d >= 1, finite mean, sigma >= 0");
                }
                Ok(())
            }
            Family::StudentT { dof, scale, d } => {
                if *d == 0 || !(*dof > 0.0) || !(*scale > 0.0) {
                    return bad("student-t needs d >= 1, dof > 0, scale > 0");
                }
                Ok(())
            }
            Family::TwoPointOutlier { m, sigma, d, axis, share } => {
                if *d == 0 || axis >= d || !(*m > 0.0) || !(*sigma > 0.0) || !(0.0..=1.0).contains(share) {
                    return bad("two-point outlier needs axis < d, m > 0, sigma > 0, share in [0,1]");
                }
                if share * sigma * sigma > m * m {
                    return bad("outlier mass would exceed 1");
                }
                Ok(())
            }
        }
    }
}

struct Draw<'a> {
    spec: &'a SamplerSpec,
    weights: Option<WeightedIndex<f64>>,
    student: Option<StudentT<f64>>,
}

impl<'a> Draw<'a> {
    fn new(spec: &'a SamplerSpec) -> Result<Self> {
        spec.validate()?;
        let weights = match &spec.family {
            Family::Discrete(d) => {
                Some(WeightedIndex::new(&d.probs).map_err(|e| Error::InvalidDistribution(e.to_string()))?)
            }
            _ => None,
        };
        let student = match &spec.family {
            Family::StudentT { dof, .. } => Some(StudentT::new(*dof).map_err(|e| Error::InvalidSpec(e.to_string()))?),
            _ => None,
        };
        Ok(Self { spec, weights, student })
    }

    fn fill(&self, rng: &mut TrialRng, out: &mut [f64]) {
        match &self.spec.family {
            Family::Discrete(d) => {
                let i = self.weights.as_ref().expect("weights").sample(rng);
                out.copy_from_slice(&d.support[i]);
            }
            Family::Gaussian { mean, sigma } => {
                for (o, m) in out.iter_mut().zip(mean) {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = m + sigma * z;
                }
            }
            Family::StudentT { scale, .. } => {
                let t = self.student.as_ref().expect("student");
                out.iter_mut().for_each(|o| *o = scale * t.sample(rng));
            }
            Family::TwoPointOutlier { m, sigma, axis, share, .. } => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = if k == *axis {
                        let p = share * sigma * sigma / (m * m);
                        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        if rng.gen::<f64>() < p {
                            sign * m
                        } else {
                            sign * ((1.0 - share) * sigma * sigma / (1.0 - p)).sqrt()
                        }
                    } else {
                        let z: f64 = StandardNormal.sample(rng);
                        sigma * z
                    };
                }
            }
        }
    }
}

/// `n` i.i.d. draws, deterministic in `spec.seed`.
pub fn sample(spec: &SamplerSpec, n: usize) -> Result<Vec<Vec<f64>>> {
    let draw = Draw::new(spec)?;
    let d = spec.dimension();
    let mut rng = rng_from_seed(spec.seed);
    Ok((0..n)
        .map(|_| {
            let mut x = vec![0.0; d];
            draw.fill(&mut rng, &mut x);
            x
        })
        .collect())
}

/// As [`sample`] for 1D specs, without per-point allocation.
pub fn sample_1d(spec: &SamplerSpec, n: usize) -> Result<Vec<f64>> {
    check_dim(spec, 1)?;
    let draw = Draw::new(spec)?;
    let mut rng = rng_from_seed(spec.seed);
    Ok((0..n)
        .map(|_| {
            let mut x = [0.0];
            draw.fill(&mut rng, &mut x);
            x[0]
        })
        .collect())
}

/// As [`sample`] for 2D specs, without per-point allocation.
pub fn sample_2d(spec: &SamplerSpec, n: usize) -> Result<Vec<[f64; 2]>> {
    check_dim(spec, 2)?;
    let draw = Draw::new(spec)?;
    let mut rng = rng_from_seed(spec.seed);
    Ok((0..n)
        .map(|_| {
            let mut x = [0.0; 2];
            draw.fill(&mut rng, &mut x);
            x
        })
        .collect())
}

fn check_dim(spec: &SamplerSpec, d: usize) -> Result<()> {
    let got = spec.dimension();
    if got != d {
        return Err(Error::InvalidDimension { expected: d, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_repeats() {
        let spec = SamplerSpec::new(Family::Discrete(DiscreteDistribution::point_mass(vec![1.5, -2.0])), 3);
        assert_eq!(sample(&spec, 5).unwrap(), vec![vec![1.5, -2.0]; 5]);
    }

    #[test]
    fn same_seed_same_output() {
        let spec = SamplerSpec::new(Family::StudentT { dof: 3.0, scale: 1.0, d: 2 }, 77);
        assert_eq!(sample(&spec, 100).unwrap(), sample(&spec, 100).unwrap());
        assert_ne!(sample(&spec, 100).unwrap(), sample(&spec.with_seed(78), 100).unwrap());
    }

    #[test]
    fn flat_samplers_agree_with_generic() {
        let spec = SamplerSpec::new(Family::Gaussian { mean: vec![1.0, 2.0], sigma: 0.5 }, 5);
        let a = sample(&spec, 50).unwrap();
        let b = sample_2d(&spec, 50).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x[0] == y[0] && x[1] == y[1]));
        assert!(sample_1d(&spec, 3).is_err());
    }

    #[test]
    fn gaussian_mean_clt() {
        let spec = SamplerSpec::new(Family::Gaussian { mean: vec![0.0], sigma: 1.0 }, 11);
        let xs = sample_1d(&spec, 1_000_000).unwrap();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 5.0 / 1000.0);
    }

    #[test]
    fn two_point_outlier_variance() {
        let spec = SamplerSpec::new(
            Family::TwoPointOutlier { m: 30.0, sigma: 2.0, d: 1, axis: 0, share: TWO_POINT_OUTLIER_SHARE },
            1,
        );
        let xs = sample_1d(&spec, 400_000).unwrap();
        let v = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((v - 4.0).abs() < 0.2, "variance {v}");
    }

    #[test]
    fn invalid_specs() {
        let spec = SamplerSpec::new(Family::StudentT { dof: 0.0, scale: 1.0, d: 1 }, 1);
        assert!(sample(&spec, 1).is_err());
        let spec = SamplerSpec::new(Family::TwoPointOutlier { m: 1.0, sigma: 1.0, d: 1, axis: 1, share: 0.5 }, 1);
        assert!(sample(&spec, 1).is_err());
    }
}
