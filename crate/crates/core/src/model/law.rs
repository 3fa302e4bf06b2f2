use serde::{Deserialize, Serialize};

use super::ModelError;

/// Tolerance on the total-mass constraint of a law.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Offspring family of a type-1 (contaminated) individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Finite,
    Geometric,
    Poisson,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Finite => "finite",
            Family::Geometric => "geometric",
            Family::Poisson => "poisson",
        })
    }
}

/// How the contamination masses p_1, p_2, ... are laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum Contamination {
    /// Explicit masses `p_1..p_k`.
    Finite(Vec<f64>),
    /// `p_j = (1-p) p^j` for `j >= 1`, optionally restricted to `j <= k`.
    Geometric { p: f64, truncate: Option<u32> },
    /// `p_j = e^{-lambda} lambda^j / j!` for `j >= 1`, optionally restricted to `j <= k`.
    Poisson { lambda: f64, truncate: Option<u32> },
}

/// Reproduction law of a contaminated individual over one day.
///
/// With probability `q` the individual is registered (becomes type 2), with
/// probability `p0` it leaves the process, and with probability `p_j` it
/// contaminates `j >= 1` new individuals. The masses always sum to one.
///
/// Truncated geometric and Poisson laws keep `p0` and `q` and rescale the
/// retained contamination masses so they carry the same total as the
/// untruncated law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawSpec", into = "LawSpec")]
pub struct OffspringLaw {
    p0: f64,
    q: f64,
    contamination: Contamination,
    // total contamination mass / retained mass, 1.0 when not truncated
    trunc_scale: f64,
}

fn check_probability(name: &str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::InvalidLaw(format!(
            "{name} = {value} is not a probability"
        )))
    }
}

fn check_mass(total: f64, what: &str) -> Result<(), ModelError> {
    if (total - 1.0).abs() <= MASS_TOLERANCE {
        Ok(())
    } else {
        Err(ModelError::InvalidLaw(format!(
            "{what}: total mass {total} differs from 1"
        )))
    }
}

fn poisson_untruncated_mass(lambda: f64, j: u32) -> f64 {
    // e^{-l} l^j / j! in log space to stay finite for larger j
    let log_fact: f64 = (1..=j).map(|i| f64::from(i).ln()).sum();
    (-lambda + f64::from(j) * lambda.ln() - log_fact).exp()
}

impl OffspringLaw {
    /// Finite law with explicit registration mass `q`.
    pub fn finite(p0: f64, contamination: Vec<f64>, q: f64) -> Result<Self, ModelError> {
        check_probability("p0", p0)?;
        check_probability("q", q)?;
        if contamination.is_empty() {
            return Err(ModelError::InvalidLaw(
                "finite law needs at least one contamination mass".into(),
            ));
        }
        for (j, &pj) in contamination.iter().enumerate() {
            check_probability(&format!("p{}", j + 1), pj)?;
        }
        let total = p0 + q + contamination.iter().sum::<f64>();
        check_mass(total, "finite law")?;
        Ok(Self {
            p0,
            q,
            contamination: Contamination::Finite(contamination),
            trunc_scale: 1.0,
        })
    }

    /// Finite law whose registration mass is the complement `1 - p0 - sum p_j`.
    pub fn finite_with_derived_q(p0: f64, contamination: Vec<f64>) -> Result<Self, ModelError> {
        let q = 1.0 - p0 - contamination.iter().sum::<f64>();
        // absorb rounding so that a law specified as exact decimals validates
        let q = if q.abs() <= MASS_TOLERANCE { 0.0 } else { q };
        Self::finite(p0, contamination, q)
    }

    /// Geometric law; requires `q + p0 = 1 - p`.
    pub fn geometric(p0: f64, q: f64, p: f64, truncate: Option<u32>) -> Result<Self, ModelError> {
        check_probability("p0", p0)?;
        check_probability("q", q)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(ModelError::InvalidLaw(format!(
                "geometric parameter p = {p} must lie in (0, 1)"
            )));
        }
        if ((q + p0) - (1.0 - p)).abs() > MASS_TOLERANCE {
            return Err(ModelError::InvalidLaw(format!(
                "geometric law needs q + p0 = 1 - p, got {} vs {}",
                q + p0,
                1.0 - p
            )));
        }
        let trunc_scale = match truncate {
            None => 1.0,
            Some(0) => return Err(ModelError::InvalidLaw("truncation bound must be >= 1".into())),
            // retained mass is p (1 - p^k) out of p
            Some(k) => 1.0 / (1.0 - p.powi(k as i32)),
        };
        Ok(Self {
            p0,
            q,
            contamination: Contamination::Geometric { p, truncate },
            trunc_scale,
        })
    }

    /// Poisson law; requires `q + p0 = e^{-lambda}`.
    pub fn poisson(p0: f64, q: f64, lambda: f64, truncate: Option<u32>) -> Result<Self, ModelError> {
        check_probability("p0", p0)?;
        check_probability("q", q)?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ModelError::InvalidLaw(format!(
                "poisson rate lambda = {lambda} must be positive"
            )));
        }
        if ((q + p0) - (-lambda).exp()).abs() > MASS_TOLERANCE {
            return Err(ModelError::InvalidLaw(format!(
                "poisson law needs q + p0 = exp(-lambda), got {} vs {}",
                q + p0,
                (-lambda).exp()
            )));
        }
        let trunc_scale = match truncate {
            None => 1.0,
            Some(0) => return Err(ModelError::InvalidLaw("truncation bound must be >= 1".into())),
            Some(k) => {
                let retained: f64 = (1..=k).map(|j| poisson_untruncated_mass(lambda, j)).sum();
                -(-lambda).exp_m1() / retained
            }
        };
        Ok(Self {
            p0,
            q,
            contamination: Contamination::Poisson { lambda, truncate },
            trunc_scale,
        })
    }

    pub fn family(&self) -> Family {
        match self.contamination {
            Contamination::Finite(_) => Family::Finite,
            Contamination::Geometric { .. } => Family::Geometric,
            Contamination::Poisson { .. } => Family::Poisson,
        }
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Registration probability.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn contamination(&self) -> &Contamination {
        &self.contamination
    }

    /// Largest possible number of new contaminations, `None` for unbounded laws.
    pub fn max_offspring(&self) -> Option<u32> {
        match &self.contamination {
            Contamination::Finite(p) => Some(p.len() as u32),
            Contamination::Geometric { truncate, .. } | Contamination::Poisson { truncate, .. } => {
                *truncate
            }
        }
    }

    /// Mass `p_j` of producing exactly `j >= 1` new contaminated individuals.
    pub fn contamination_mass(&self, j: u32) -> f64 {
        if j == 0 {
            return 0.0;
        }
        if let Some(k) = self.max_offspring() {
            if j > k {
                return 0.0;
            }
        }
        match &self.contamination {
            Contamination::Finite(p) => p[j as usize - 1],
            Contamination::Geometric { p, .. } => {
                self.trunc_scale * (1.0 - p) * p.powi(j as i32)
            }
            Contamination::Poisson { lambda, .. } => {
                self.trunc_scale * poisson_untruncated_mass(*lambda, j)
            }
        }
    }

    /// Total mass of the contamination outcomes, `1 - p0 - q`.
    pub fn contamination_total(&self) -> f64 {
        match &self.contamination {
            Contamination::Finite(p) => p.iter().sum(),
            Contamination::Geometric { p, .. } => *p,
            Contamination::Poisson { lambda, .. } => -(-lambda).exp_m1(),
        }
    }

    /// `sum_{j>=1} p_j s^j`.
    pub(crate) fn contamination_pgf(&self, s: f64) -> f64 {
        match &self.contamination {
            Contamination::Finite(p) => p.iter().rev().fold(0.0, |acc, &pj| (acc + pj) * s),
            Contamination::Geometric { p, truncate: None } => (1.0 - p) * p * s / (1.0 - p * s),
            Contamination::Poisson { lambda, truncate: None } => {
                (-lambda * (1.0 - s)).exp() - (-lambda).exp()
            }
            Contamination::Geometric { truncate: Some(k), .. }
            | Contamination::Poisson { truncate: Some(k), .. } => {
                (1..=*k).rev().fold(0.0, |acc, j| (acc + self.contamination_mass(j)) * s)
            }
        }
    }

    /// Mean number of new contaminations per individual per day.
    pub fn mean(&self) -> f64 {
        match &self.contamination {
            Contamination::Finite(p) => p
                .iter()
                .enumerate()
                .map(|(i, pj)| (i + 1) as f64 * pj)
                .sum(),
            Contamination::Geometric { p, truncate: None } => p / (1.0 - p),
            Contamination::Poisson { lambda, truncate: None } => *lambda,
            Contamination::Geometric { truncate: Some(k), .. }
            | Contamination::Poisson { truncate: Some(k), .. } => (1..=*k)
                .map(|j| f64::from(j) * self.contamination_mass(j))
                .sum(),
        }
    }

    /// Probability mass of the type-1 offspring count, `[p0 + q, p_1, .., p_k]`.
    /// Only available for laws with bounded support.
    pub fn offspring_pmf(&self) -> Option<Vec<f64>> {
        let k = self.max_offspring()?;
        let mut pmf = Vec::with_capacity(k as usize + 1);
        pmf.push(self.p0 + self.q);
        pmf.extend((1..=k).map(|j| self.contamination_mass(j)));
        Some(pmf)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum LawSpec {
    Finite {
        p0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
        p: Vec<f64>,
    },
    Geometric {
        p0: f64,
        q: f64,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate: Option<u32>,
    },
    Poisson {
        p0: f64,
        q: f64,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate: Option<u32>,
    },
}

impl TryFrom<LawSpec> for OffspringLaw {
    type Error = ModelError;

    fn try_from(spec: LawSpec) -> Result<Self, Self::Error> {
        match spec {
            LawSpec::Finite { p0, q: Some(q), p } => OffspringLaw::finite(p0, p, q),
            LawSpec::Finite { p0, q: None, p } => OffspringLaw::finite_with_derived_q(p0, p),
            LawSpec::Geometric { p0, q, p, truncate } => OffspringLaw::geometric(p0, q, p, truncate),
            LawSpec::Poisson { p0, q, lambda, truncate } => {
                OffspringLaw::poisson(p0, q, lambda, truncate)
            }
        }
    }
}

impl From<OffspringLaw> for LawSpec {
    fn from(law: OffspringLaw) -> Self {
        let OffspringLaw { p0, q, contamination, .. } = law;
        match contamination {
            Contamination::Finite(p) => LawSpec::Finite { p0, q: Some(q), p },
            Contamination::Geometric { p, truncate } => LawSpec::Geometric { p0, q, p, truncate },
            Contamination::Poisson { lambda, truncate } => LawSpec::Poisson { p0, q, lambda, truncate },
        }
    }
}

/// Law of the initial contaminated population `Z1(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InitSpec", into = "InitSpec")]
pub struct InitialPopulation(Init);

#[derive(Debug, Clone, PartialEq)]
enum Init {
    Fixed(u64),
    // masses[i] = P(Z1(0) = i + 1)
    Distribution(Vec<f64>),
}

impl InitialPopulation {
    pub fn fixed(n: u64) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::InvalidLaw(
                "initial population must be at least 1".into(),
            ));
        }
        Ok(Self(Init::Fixed(n)))
    }

    /// `masses[i]` is the probability that the process starts with `i + 1`
    /// contaminated individuals; there is no mass at zero.
    pub fn distribution(masses: Vec<f64>) -> Result<Self, ModelError> {
        if masses.is_empty() {
            return Err(ModelError::InvalidLaw("empty initial distribution".into()));
        }
        for (i, &m) in masses.iter().enumerate() {
            check_probability(&format!("p0{}", i + 1), m)?;
        }
        check_mass(masses.iter().sum(), "initial distribution")?;
        Ok(Self(Init::Distribution(masses)))
    }

    /// `m0 = E Z1(0)`.
    pub fn mean(&self) -> f64 {
        match &self.0 {
            Init::Fixed(n) => *n as f64,
            Init::Distribution(m) => m
                .iter()
                .enumerate()
                .map(|(i, p)| (i + 1) as f64 * p)
                .sum(),
        }
    }

    /// `h0(s) = E s^{Z1(0)}`.
    pub fn pgf(&self, s: f64) -> f64 {
        match &self.0 {
            Init::Fixed(n) => s.powi(*n as i32),
            Init::Distribution(m) => m.iter().rev().fold(0.0, |acc, &p| (acc + p) * s),
        }
    }

    /// Support points with their probabilities.
    pub fn pmf(&self) -> Vec<(u64, f64)> {
        match &self.0 {
            Init::Fixed(n) => vec![(*n, 1.0)],
            Init::Distribution(m) => m
                .iter()
                .enumerate()
                .map(|(i, &p)| (i as u64 + 1, p))
                .collect(),
        }
    }

    pub fn as_fixed(&self) -> Option<u64> {
        match self.0 {
            Init::Fixed(n) => Some(n),
            Init::Distribution(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum InitSpec {
    Fixed { n: u64 },
    Distribution { masses: Vec<f64> },
}

impl TryFrom<InitSpec> for InitialPopulation {
    type Error = ModelError;

    fn try_from(spec: InitSpec) -> Result<Self, Self::Error> {
        match spec {
            InitSpec::Fixed { n } => InitialPopulation::fixed(n),
            InitSpec::Distribution { masses } => InitialPopulation::distribution(masses),
        }
    }
}

impl From<InitialPopulation> for InitSpec {
    fn from(init: InitialPopulation) -> Self {
        match init.0 {
            Init::Fixed(n) => InitSpec::Fixed { n },
            Init::Distribution(masses) => InitSpec::Distribution { masses },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_mass_must_be_one() {
        assert!(OffspringLaw::finite(0.3, vec![0.4], 0.3).is_ok());
        assert!(matches!(
            OffspringLaw::finite(0.3, vec![0.4], 0.4),
            Err(ModelError::InvalidLaw(_))
        ));
        assert!(OffspringLaw::finite(0.3, vec![], 0.7).is_err());
        assert!(OffspringLaw::finite(-0.1, vec![0.8], 0.3).is_err());
    }

    #[test]
    fn derived_q_is_the_complement() {
        let law = OffspringLaw::finite_with_derived_q(0.3, vec![0.4]).unwrap();
        assert!((law.q() - 0.3).abs() < 1e-15);
        // deterministic single offspring, no registration
        let law = OffspringLaw::finite_with_derived_q(0.0, vec![1.0]).unwrap();
        assert_eq!(law.q(), 0.0);
        assert_eq!(law.mean(), 1.0);
    }

    #[test]
    fn geometric_and_poisson_constraints() {
        assert!(OffspringLaw::geometric(0.3, 0.3, 0.4, None).is_ok());
        assert!(OffspringLaw::geometric(0.3, 0.4, 0.4, None).is_err());
        assert!(OffspringLaw::geometric(0.3, 0.3, 0.4, Some(0)).is_err());
        let e = (-0.5f64).exp();
        assert!(OffspringLaw::poisson(e - 0.1, 0.1, 0.5, None).is_ok());
        assert!(OffspringLaw::poisson(0.5, 0.1, 0.5, None).is_err());
        assert!(OffspringLaw::poisson(0.0, 1.0, 0.0, None).is_err());
    }

    #[test]
    fn truncated_laws_keep_total_mass() {
        let geo = OffspringLaw::geometric(0.3, 0.3, 0.4, Some(3)).unwrap();
        let pmf = geo.offspring_pmf().unwrap();
        assert_eq!(pmf.len(), 4);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // proportional rescaling keeps the ratios of the retained masses
        assert!((pmf[2] / pmf[1] - 0.4).abs() < 1e-14);

        let e = (-1.2f64).exp();
        let poi = OffspringLaw::poisson(e / 2.0, e / 2.0, 1.2, Some(2)).unwrap();
        let pmf = poi.offspring_pmf().unwrap();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((pmf[2] / pmf[1] - 0.6).abs() < 1e-14);
        assert_eq!(poi.contamination_mass(3), 0.0);
    }

    #[test]
    fn unbounded_laws_have_no_pmf_table() {
        let geo = OffspringLaw::geometric(0.3, 0.3, 0.4, None).unwrap();
        assert!(geo.offspring_pmf().is_none());
        assert_eq!(geo.max_offspring(), None);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let law: OffspringLaw =
            serde_json::from_str(r#"{"family":"finite","p0":0.3,"q":0.3,"p":[0.4]}"#).unwrap();
        assert_eq!(law, OffspringLaw::finite(0.3, vec![0.4], 0.3).unwrap());
        let derived: OffspringLaw =
            serde_json::from_str(r#"{"family":"finite","p0":0.3,"p":[0.4]}"#).unwrap();
        assert!((derived.q() - 0.3).abs() < 1e-15);

        let geo = OffspringLaw::geometric(0.2, 0.3, 0.5, Some(4)).unwrap();
        let text = serde_json::to_string(&geo).unwrap();
        assert_eq!(serde_json::from_str::<OffspringLaw>(&text).unwrap(), geo);

        let bad = serde_json::from_str::<OffspringLaw>(
            r#"{"family":"geometric","p0":0.5,"q":0.3,"p":0.4}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn initial_population() {
        assert!(InitialPopulation::fixed(0).is_err());
        let init = InitialPopulation::distribution(vec![0.5, 0.5]).unwrap();
        assert_eq!(init.mean(), 1.5);
        assert!((init.pgf(0.5) - (0.25 + 0.125)).abs() < 1e-15);
        assert!(InitialPopulation::distribution(vec![0.5, 0.4]).is_err());
        let json = serde_json::to_string(&InitialPopulation::fixed(3).unwrap()).unwrap();
        assert_eq!(json, r#"{"kind":"fixed","n":3}"#);
    }
}
