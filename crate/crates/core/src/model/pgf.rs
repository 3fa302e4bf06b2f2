//! Generating functions of the offspring law and of the process.
//!
//! Arguments are restricted to the probabilistic interval `[0, 1]`.

use super::{InitialPopulation, ModelError, OffspringLaw};

fn check_arg(name: &'static str, s: f64) -> Result<f64, ModelError> {
    if (0.0..=1.0).contains(&s) {
        Ok(s)
    } else {
        Err(ModelError::OutOfDomain { name, value: s })
    }
}

/// Joint generating function `h1(s1, s2) = p0 + sum_j p_j s1^j + q s2`.
pub fn pgf_joint(law: &OffspringLaw, s1: f64, s2: f64) -> Result<f64, ModelError> {
    let s1 = check_arg("s1", s1)?;
    let s2 = check_arg("s2", s2)?;
    Ok(law.p0() + law.contamination_pgf(s1) + law.q() * s2)
}

/// Generating function of the new contaminations, `h*(s) = h1(s, 1)`.
pub fn pgf_marginal_t1(law: &OffspringLaw, s: f64) -> Result<f64, ModelError> {
    pgf_joint(law, s, 1.0)
}

/// Generating function of the registrations, `h~(s) = h1(1, s) = 1 - q + q s`.
pub fn pgf_marginal_t2(law: &OffspringLaw, s: f64) -> Result<f64, ModelError> {
    let s = check_arg("s", s)?;
    Ok(1.0 - law.q() + law.q() * s)
}

fn iterate_unchecked(law: &OffspringLaw, mut s: f64, n: usize) -> f64 {
    let base = law.p0() + law.q();
    for _ in 0..n {
        s = base + law.contamination_pgf(s);
    }
    s
}

/// `n`-fold composition of `h*`; `n = 0` returns `s`.
pub fn pgf_iterate(law: &OffspringLaw, s: f64, n: usize) -> Result<f64, ModelError> {
    let s = check_arg("s", s)?;
    Ok(iterate_unchecked(law, s, n))
}

/// Values of the process generating functions at day `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessPgf {
    /// `F1(n; s) = E s^{Z1(n)}`.
    pub f1: f64,
    /// `F2(n; s) = E s^{Z2(n)}`; `None` at `n = 0`, where `Z2` is not defined.
    pub f2: Option<f64>,
}

/// `F1(n; s) = h0(h*_n(s))` and `F2(n; s) = F1(n - 1; h~(s))`.
pub fn process_pgf(
    law: &OffspringLaw,
    init: &InitialPopulation,
    n: usize,
    s: f64,
) -> Result<ProcessPgf, ModelError> {
    let s = check_arg("s", s)?;
    let f1 = init.pgf(iterate_unchecked(law, s, n));
    let f2 = match n {
        0 => None,
        _ => {
            let thinned = 1.0 - law.q() + law.q() * s;
            Some(init.pgf(iterate_unchecked(law, thinned, n - 1)))
        }
    };
    Ok(ProcessPgf { f1, f2 })
}

/// `F2(n; s)`, rejecting `n = 0`.
pub fn registered_pgf(
    law: &OffspringLaw,
    init: &InitialPopulation,
    n: usize,
    s: f64,
) -> Result<f64, ModelError> {
    process_pgf(law, init, n, s)?
        .f2
        .ok_or_else(|| ModelError::Domain("F2(0; s) is degenerate: Z2(0) = 0".into()))
}

/// `m = h*'(1)`.
pub fn mean_offspring(law: &OffspringLaw) -> f64 {
    law.mean()
}

/// Expected sizes of both types at day `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Means {
    /// `M1(n) = m0 m^n`.
    pub m1: f64,
    /// `M2(n) = q m0 m^{n-1}`, zero at `n = 0`.
    pub m2: f64,
}

pub fn theoretical_means(law: &OffspringLaw, init: &InitialPopulation, n: usize) -> Means {
    let m = law.mean();
    let m0 = init.mean();
    let m1 = m0 * m.powi(n as i32);
    let m2 = match n {
        0 => 0.0,
        _ => law.q() * m0 * m.powi(n as i32 - 1),
    };
    Means { m1, m2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite_example() -> OffspringLaw {
        OffspringLaw::finite(0.3, vec![0.4], 0.3).unwrap()
    }

    fn geometric_example() -> OffspringLaw {
        OffspringLaw::geometric(0.3, 0.3, 0.4, None).unwrap()
    }

    fn poisson_example() -> OffspringLaw {
        let e = (-0.5f64).exp();
        OffspringLaw::poisson(e - 0.2, 0.2, 0.5, None).unwrap()
    }

    fn all_families() -> Vec<OffspringLaw> {
        let e = (-1.1348f64).exp();
        vec![
            finite_example(),
            OffspringLaw::finite(0.1, vec![0.2, 0.3, 0.1], 0.3).unwrap(),
            geometric_example(),
            OffspringLaw::geometric(0.2, 0.3, 0.5, Some(3)).unwrap(),
            poisson_example(),
            OffspringLaw::poisson(e - 0.1, 0.1, 1.1348, Some(4)).unwrap(),
        ]
    }

    #[test]
    fn joint_examples() {
        for law in all_families() {
            assert!((pgf_joint(&law, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((pgf_joint(&finite_example(), 0.5, 0.5).unwrap() - 0.65).abs() < 1e-15);
        assert!((pgf_joint(&geometric_example(), 0.5, 1.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn marginal_examples() {
        assert!((pgf_marginal_t1(&finite_example(), 0.0).unwrap() - 0.6).abs() < 1e-15);
        let h = pgf_marginal_t1(&poisson_example(), 0.5).unwrap();
        assert!((h - (-0.25f64).exp()).abs() < 1e-15);
        assert!((h - 0.7788).abs() < 1e-4);

        let law = finite_example();
        assert!((pgf_marginal_t2(&law, 0.0).unwrap() - 0.7).abs() < 1e-15);
        assert!((pgf_marginal_t2(&law, 0.5).unwrap() - 0.85).abs() < 1e-15);
        assert_eq!(pgf_marginal_t2(&law, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_arguments_outside_unit_interval() {
        let law = finite_example();
        assert!(matches!(
            pgf_joint(&law, 1.5, 0.0),
            Err(ModelError::OutOfDomain { name: "s1", .. })
        ));
        assert!(pgf_marginal_t2(&law, -0.1).is_err());
        assert!(pgf_iterate(&law, f64::NAN, 2).is_err());
    }

    #[test]
    fn iterate_examples() {
        let law = finite_example();
        assert_eq!(pgf_iterate(&law, 0.37, 0).unwrap(), 0.37);
        assert!((pgf_iterate(&law, 0.0, 2).unwrap() - 0.84).abs() < 1e-15);
        for law in all_families() {
            for n in 0..30 {
                assert!((pgf_iterate(&law, 1.0, n).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn process_pgf_examples() {
        let law = finite_example();
        let one = InitialPopulation::fixed(1).unwrap();
        let two = InitialPopulation::fixed(2).unwrap();
        let r = process_pgf(&law, &one, 0, 0.42).unwrap();
        assert_eq!(r.f1, 0.42);
        assert_eq!(r.f2, None);
        assert!((process_pgf(&law, &one, 1, 0.0).unwrap().f2.unwrap() - 0.7).abs() < 1e-15);
        assert!((process_pgf(&law, &two, 1, 0.0).unwrap().f1 - 0.36).abs() < 1e-15);
        assert!(matches!(
            registered_pgf(&law, &one, 0, 0.5),
            Err(ModelError::Domain(_))
        ));
    }

    #[test]
    fn mean_examples() {
        let q = 0.25;
        let single = OffspringLaw::finite(0.0, vec![1.0 - q], q).unwrap();
        assert_eq!(mean_offspring(&single), 1.0 - q);
        let m = 1.1093;
        let p = m / (1.0 + m);
        let geo = OffspringLaw::geometric(1.0 - p - 0.2, 0.2, p, None).unwrap();
        assert!((mean_offspring(&geo) - m).abs() < 1e-12);
        let poi = OffspringLaw::poisson((-1.1348f64).exp() - 0.1, 0.1, 1.1348, None).unwrap();
        assert_eq!(mean_offspring(&poi), 1.1348);
    }

    #[test]
    fn mean_matches_finite_difference() {
        let h = 1e-6;
        for law in all_families() {
            // s = 1 + h is outside the checked domain, evaluate the series directly
            let plus = law.p0() + law.q() + law.contamination_pgf(1.0 + h);
            let minus = law.p0() + law.q() + law.contamination_pgf(1.0 - h);
            let fd = (plus - minus) / (2.0 * h);
            assert!(
                (fd - mean_offspring(&law)).abs() < 1e-5,
                "{law:?}: {fd} vs {}",
                mean_offspring(&law)
            );
        }
    }

    #[test]
    fn theoretical_mean_examples() {
        let doubling = OffspringLaw::finite(0.0, vec![0.0, 1.0], 0.0).unwrap();
        let one = InitialPopulation::fixed(1).unwrap();
        assert_eq!(theoretical_means(&doubling, &one, 3).m1, 8.0);
        let critical = OffspringLaw::finite(0.2, vec![0.2, 0.1, 0.2], 0.3).unwrap();
        assert!((critical.mean() - 1.0).abs() < 1e-12);
        assert!((theoretical_means(&critical, &one, 5).m2 - 0.3).abs() < 1e-12);
        assert_eq!(theoretical_means(&critical, &one, 0).m2, 0.0);
    }

    proptest! {
        #[test]
        fn marginals_are_sections_of_joint(idx in 0usize..6, i in 0usize..=100) {
            let law = &all_families()[idx];
            let s = i as f64 / 100.0;
            prop_assert_eq!(pgf_marginal_t1(law, s).unwrap(), pgf_joint(law, s, 1.0).unwrap());
            let t2 = pgf_marginal_t2(law, s).unwrap();
            let joint = pgf_joint(law, 1.0, s).unwrap();
            prop_assert!((t2 - joint).abs() < 1e-12);
        }

        #[test]
        fn iterates_are_monotone(idx in 0usize..6, a in 0.0f64..=1.0, b in 0.0f64..=1.0, n in 0usize..8) {
            let law = &all_families()[idx];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(pgf_iterate(law, lo, n).unwrap() <= pgf_iterate(law, hi, n).unwrap() + 1e-15);
        }
    }
}
