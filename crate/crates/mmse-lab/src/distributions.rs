//! Algebra of input distributions.
//!
//! The representation covers finite discrete laws, Gaussians, Gaussian
//! mixtures, and hybrids of the two kinds. This class contains every input
//! the rest of the crate needs, admits exact moments, and is closed under
//! the operations that matter here: affine maps, mixing, and independent
//! sums. Channel posteriors stay inside the class as well, which is what
//! makes the two-stage observation identities computable downstream.
//!
//! Canonical form: atom locations strictly sorted with near-duplicates
//! merged, components sorted by (mean, variance), weights renormalized so
//! they sum to 1 exactly once at construction. All values are immutable
//! after construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported moment order.
pub const MOMENT_CAP: usize = 16;
/// Atoms or components closer than this merge into one part.
pub const MERGE_TOL: f64 = 1e-12;
/// Constructors accept weight sums within this distance of 1, then
/// renormalize.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Hard cap on the part count an exact convolution may produce.
pub const PART_BUDGET: usize = 1_000_000;
/// Cap on the normalized i.i.d. sum length for multi-atom discrete laws.
pub const DISCRETE_SUM_CAP: usize = 12;

/// Point mass at `location` carrying probability `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Gaussian mixture component with strictly positive variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

/// Shape classification of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Discrete,
    Gaussian,
    Mixture,
}

/// A finite mixture of point masses and Gaussian components, in canonical
/// form. Weights across both part lists sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    atoms: Vec<Atom>,
    components: Vec<GaussianComponent>,
}

/// Raw and central moments up to a common order; entry `k-1` holds order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub raw: Vec<f64>,
    pub central: Vec<f64>,
}

impl InputDistribution {
    /// Builds a finite discrete law from `(location, weight)` pairs.
    ///
    /// Weights must be positive and sum to 1 within [`WEIGHT_SUM_TOL`]; the
    /// result is renormalized, sorted, and has near-duplicate locations
    /// merged.
    pub fn make_discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for &(x, p) in atoms {
            if !x.is_finite() {
                return Err(Error::NonFiniteLocation(x));
            }
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::BadWeight(p));
            }
        }
        let sum: f64 = atoms.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum(sum, WEIGHT_SUM_TOL));
        }
        Self::canonical(
            atoms
                .iter()
                .map(|&(x, p)| Atom {
                    location: x,
                    weight: p,
                })
                .collect(),
            Vec::new(),
        )
    }

    /// Builds the Gaussian law with the given mean and strictly positive
    /// variance.
    pub fn make_gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::NonFiniteLocation(mean));
        }
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::BadVariance(variance));
        }
        Self::canonical(
            Vec::new(),
            vec![GaussianComponent {
                mean,
                variance,
                weight: 1.0,
            }],
        )
    }

    /// Mixes whole distributions with the given probabilities, flattening
    /// nesting of any depth into one canonical mixture.
    pub fn mix(parts: &[(InputDistribution, f64)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for &(_, w) in parts {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::BadWeight(w));
            }
        }
        let sum: f64 = parts.iter().map(|&(_, w)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum(sum, WEIGHT_SUM_TOL));
        }
        let mut atoms = Vec::new();
        let mut components = Vec::new();
        for (dist, w) in parts {
            if *w == 0.0 {
                continue;
            }
            for a in &dist.atoms {
                atoms.push(Atom {
                    location: a.location,
                    weight: w * a.weight,
                });
            }
            for c in &dist.components {
                components.push(GaussianComponent {
                    mean: c.mean,
                    variance: c.variance,
                    weight: w * c.weight,
                });
            }
        }
        Self::canonical(atoms, components)
    }

    /// Law of `a * X + b`. With `a = 0` every distribution collapses to the
    /// point mass at `b`. Both parameters must be finite.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        assert!(a.is_finite() && b.is_finite(), "affine map must be finite");
        if a == 0.0 {
            return Self::canonical(
                vec![Atom {
                    location: b,
                    weight: 1.0,
                }],
                Vec::new(),
            )
            .expect("point mass is always valid");
        }
        let atoms = self
            .atoms
            .iter()
            .map(|at| Atom {
                location: a * at.location + b,
                weight: at.weight,
            })
            .collect();
        let components = self
            .components
            .iter()
            .map(|c| GaussianComponent {
                mean: a * c.mean + b,
                variance: a * a * c.variance,
                weight: c.weight,
            })
            .collect();
        Self::canonical(atoms, components).expect("affine image of a valid law is valid")
    }

    /// Law of `X + X'` for independent `X ~ self`, `X' ~ other`. Exact: part
    /// counts multiply, guarded by [`PART_BUDGET`].
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let needed = self.part_count() * other.part_count();
        if needed > PART_BUDGET {
            return Err(Error::PartBudget {
                needed,
                cap: PART_BUDGET,
            });
        }
        let mut atoms = Vec::new();
        let mut components = Vec::new();
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom {
                    location: a.location + b.location,
                    weight: a.weight * b.weight,
                });
            }
            for c in &other.components {
                components.push(GaussianComponent {
                    mean: a.location + c.mean,
                    variance: c.variance,
                    weight: a.weight * c.weight,
                });
            }
        }
        for c in &self.components {
            for b in &other.atoms {
                components.push(GaussianComponent {
                    mean: c.mean + b.location,
                    variance: c.variance,
                    weight: c.weight * b.weight,
                });
            }
            for d in &other.components {
                components.push(GaussianComponent {
                    mean: c.mean + d.mean,
                    variance: c.variance + d.variance,
                    weight: c.weight * d.weight,
                });
            }
        }
        Self::canonical(atoms, components)
    }

    /// Law of `(X_1 + ... + X_n) / sqrt(n)` for i.i.d. copies of `self`.
    ///
    /// Exact by repeated convolution and one rescale. Multi-atom discrete
    /// laws are capped at [`DISCRETE_SUM_CAP`] copies because their support
    /// grows combinatorially; every law is additionally subject to
    /// [`PART_BUDGET`].
    pub fn normalized_iid_sum(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "iid sum needs at least one copy".into(),
            ));
        }
        if self.atoms.len() > 1 && n > DISCRETE_SUM_CAP {
            return Err(Error::SumCountCap {
            n,
                cap: DISCRETE_SUM_CAP,
            });
        }
        let mut sum = self.clone();
        for _ in 1..n {
            sum = sum.convolve(self)?;
        }
        Ok(sum.affine(1.0 / (n as f64).sqrt(), 0.0))
    }

    /// Raw (`central = false`) or central (`central = true`) moment of order
    /// `k <= 16`, in closed form. Order zero is 1 by convention.
    pub fn moment(&self, k: usize, central: bool) -> Result<f64> {
        if k > MOMENT_CAP {
            return Err(Error::MomentCap { k, cap: MOMENT_CAP });
        }
        let center = if central { self.mean() } else { 0.0 };
        Ok(self.power_sum(k, center))
    }

    /// Raw and central moments for all orders `1..=k_max` in one pass.
    pub fn moments(&self, k_max: usize) -> Result<MomentVector> {
        if k_max > MOMENT_CAP {
            return Err(Error::MomentCap {
                k: k_max,
                cap: MOMENT_CAP,
            });
        }
        let mean = self.mean();
        let mut raw = Vec::with_capacity(k_max);
        let mut central = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            raw.push(self.power_sum(k, 0.0));
            central.push(self.power_sum(k, mean));
        }
        Ok(MomentVector { raw, central })
    }

    /// E[(X - center)^k], exact for every part.
    fn power_sum(&self, k: usize, center: f64) -> f64 {
        let mut acc = crate::quadrature::CompensatedSum::new();
        for a in &self.atoms {
            acc.add(a.weight * (a.location - center).powi(k as i32));
        }
        for c in &self.components {
            acc.add(c.weight * gaussian_power_moment(c.mean - center, c.variance, k));
        }
        acc.value()
    }

    /// E[X], exact.
    pub fn mean(&self) -> f64 {
        self.power_sum(1, 0.0)
    }

    /// Var(X), exact and clamped at zero against rounding.
    pub fn variance(&self) -> f64 {
        self.power_sum(2, self.mean()).max(0.0)
    }

    /// E[X^2], exact.
    pub fn second_moment(&self) -> f64 {
        self.power_sum(2, 0.0)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn part_count(&self) -> usize {
        self.atoms.len() + self.components.len()
    }

    /// Shape of the law: purely discrete, a single Gaussian, or a mixture
    /// (which includes hybrids of atoms and components).
    pub fn kind(&self) -> Kind {
        if self.components.is_empty() {
            Kind::Discrete
        } else if self.atoms.is_empty() && self.components.len() == 1 {
            Kind::Gaussian
        } else {
            Kind::Mixture
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.components.is_empty()
    }

    /// True when the law has a density (no atoms).
    pub fn is_continuous(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sorts parts, merges near-duplicates, renormalizes weights.
    fn canonical(mut atoms: Vec<Atom>, mut components: Vec<GaussianComponent>) -> Result<Self> {
        if atoms.is_empty() && components.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for c in &components {
            if !c.mean.is_finite() {
                return Err(Error::NonFiniteLocation(c.mean));
            }
            if !c.variance.is_finite() || c.variance <= 0.0 {
                return Err(Error::BadVariance(c.variance));
            }
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::BadWeight(c.weight));
            }
        }
        for a in &atoms {
            if !a.location.is_finite() {
                return Err(Error::NonFiniteLocation(a.location));
            }
            if !a.weight.is_finite() || a.weight < 0.0 {
                return Err(Error::BadWeight(a.weight));
            }
        }

        atoms.retain(|a| a.weight > 0.0);
        components.retain(|c| c.weight > 0.0);
        if atoms.is_empty() && components.is_empty() {
            return Err(Error::EmptyDistribution);
        }

        atoms.sort_by(|p, q| p.location.total_cmp(&q.location));
        let mut merged_atoms: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged_atoms.last_mut() {
                Some(last) if (a.location - last.location).abs() <= MERGE_TOL => {
                    // Weighted location keeps the merge independent of input order.
                    let w = last.weight + a.weight;
                    last.location = (last.location * last.weight + a.location * a.weight) / w;
                    last.weight = w;
                }
                _ => merged_atoms.push(a),
            }
        }

        components.sort_by(|p, q| {
            p.mean
                .total_cmp(&q.mean)
                .then(p.variance.total_cmp(&q.variance))
        });
        let mut merged_components: Vec<GaussianComponent> = Vec::with_capacity(components.len());
        for c in components {
            match merged_components.last_mut() {
                Some(last)
                    if (c.mean - last.mean).abs() <= MERGE_TOL
                        && (c.variance - last.variance).abs() <= MERGE_TOL =>
                {
                    let w = last.weight + c.weight;
                    last.mean = (last.mean * last.weight + c.mean * c.weight) / w;
                    last.variance = (last.variance * last.weight + c.variance * c.weight) / w;
                    last.weight = w;
                }
                _ => merged_components.push(c),
            }
        }

        let total: f64 = merged_atoms.iter().map(|a| a.weight).sum::<f64>()
            + merged_components.iter().map(|c| c.weight).sum::<f64>();
        for a in &mut merged_atoms {
            a.weight /= total;
        }
        for c in &mut merged_components {
            c.weight /= total;
        }
        Ok(Self {
            atoms: merged_atoms,
            components: merged_components,
        })
    }

    /// Parses the JSON distribution schema.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: DistJson = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_json(&spec)
    }

    fn from_json(spec: &DistJson) -> Result<Self> {
        match spec {
            DistJson::Discrete { atoms } => Self::make_discrete(atoms),
            DistJson::Gaussian { mean, variance } => Self::make_gaussian(*mean, *variance),
            DistJson::Mixture { parts } => {
                let built: Result<Vec<(InputDistribution, f64)>> = parts
                    .iter()
                    .map(|p| Ok((Self::from_json(&p.dist)?, p.weight)))
                    .collect();
                Self::mix(&built?)
            }
        }
    }

    /// Serializes to the JSON distribution schema. The canonical form picks
    /// the most specific tag: `discrete`, `gaussian`, or `mixture`.
    pub fn to_json_string(&self, pretty: bool) -> String {
        let spec = self.to_json();
        if pretty {
            serde_json::to_string_pretty(&spec).expect("schema serialization cannot fail")
        } else {
            serde_json::to_string(&spec).expect("schema serialization cannot fail")
        }
    }

    fn to_json(&self) -> DistJson {
        match self.kind() {
            Kind::Discrete => DistJson::Discrete {
                atoms: self.atoms.iter().map(|a| (a.location, a.weight)).collect(),
            },
            Kind::Gaussian => DistJson::Gaussian {
                mean: self.components[0].mean,
                variance: self.components[0].variance,
            },
            Kind::Mixture => {
                let mut parts = Vec::new();
                let atom_weight: f64 = self.atoms.iter().map(|a| a.weight).sum();
                if atom_weight > 0.0 {
                    parts.push(PartJson {
                        dist: DistJson::Discrete {
                            atoms: self
                                .atoms
                                .iter()
                                .map(|a| (a.location, a.weight / atom_weight))
                                .collect(),
                        },
                        weight: atom_weight,
                    });
                }
                for c in &self.components {
                    parts.push(PartJson {
                        dist: DistJson::Gaussian {
                            mean: c.mean,
                            variance: c.variance,
                        },
                        weight: c.weight,
                    });
                }
                DistJson::Mixture { parts }
            }
        }
    }
}

/// E[Z^k] for `Z ~ N(mean, variance)` by the two-term recurrence
/// `m_k = mean * m_{k-1} + (k-1) * variance * m_{k-2}`.
fn gaussian_power_moment(mean: f64, variance: f64, k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => mean,
        _ => {
            let mut prev = 1.0;
            let mut cur = mean;
            for j in 2..=k {
                let next = mean * cur + (j - 1) as f64 * variance * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistJson {
    Discrete { atoms: Vec<(f64, f64)> },
    Gaussian { mean: f64, variance: f64 },
    Mixture { parts: Vec<PartJson> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartJson {
    dist: DistJson,
    weight: f64,
}
