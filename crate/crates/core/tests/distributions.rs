mod common;

use common::Oracle;
use proptest::prelude::*;
use renewal_ldp::{parse_law, WaitingLaw};

fn laws() -> Vec<WaitingLaw> {
    [
        "exp(1)",
        "exp(2.5)",
        "gamma(2,1)",
        "gamma(0.5,2)",
        "pareto(2,1)",
        "pareto(3,0.5)",
        "weibull(0.5,1)",
        "weibull(2,1)",
        "atoms(1:0.25,2:0.5,4:0.25)",
        "mix(0.5@exp(1);0.5@exp(3))",
    ]
    .iter()
    .map(|s| parse_law(s).unwrap())
    .collect()
}

/// Tilts strictly below ξ, bounded on the right by `hi`.
fn admissible(law: &WaitingLaw, u: f64, hi: f64) -> f64 {
    let top = (law.xi() - 0.05).min(hi);
    -4.0 + (top + 4.0) * u
}

#[test]
fn mgf_at_zero_is_one() {
    for law in laws() {
        assert_eq!(law.mgf(0.0).unwrap(), 1.0, "{law}");
        let w = law.weighted(0.0, 0.0, &|_| [1.0]).unwrap().unwrap();
        let z = w.log_scale.exp() * w.values[0];
        assert!((z - 1.0).abs() <= 1e-9, "{law}: {z}");
    }
}

#[test]
fn closed_forms_against_oracles() {
    for o in [Oracle::Exp(1.0), Oracle::Gamma(2.0, 1.0), Oracle::Pareto(2.0, 1.0), Oracle::TwoAtoms] {
        let law = o.law();
        for c in [-3.0, -1.0, -0.2, 0.3, 0.9] {
            if c >= o.xi() {
                continue;
            }
            let got = law.log_mgf(c).unwrap();
            let want = o.lmgf(c);
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{o:?} c={c}: {got} vs {want}");
        }
    }
}

#[test]
fn exponential_entropy_of_tilt() {
    let e = WaitingLaw::exponential(1.0).unwrap();
    assert_eq!(e.entropy_of_tilt(0.0).unwrap(), 0.0);
    let want = 2f64.ln() - 0.5;
    assert!((e.entropy_of_tilt(-1.0).unwrap() - want).abs() <= 1e-12);
}

#[test]
fn discrete_quantities_by_direct_summation() {
    let atoms = [(1.0, 0.25), (2.0, 0.5), (4.0, 0.25)];
    let law = WaitingLaw::atoms(atoms.to_vec()).unwrap();
    for c in [-2.0, -0.5, 0.0, 2f64.ln(), 1.5] {
        let z: f64 = atoms.iter().map(|&(t, p)| p * (c * t).exp()).sum();
        let mean: f64 = atoms.iter().map(|&(t, p)| t * p * (c * t).exp()).sum::<f64>() / z;
        let entropy: f64 = atoms
            .iter()
            .map(|&(t, p)| {
                let q = p * (c * t).exp() / z;
                q * (q / p).ln()
            })
            .sum();
        assert!((law.mgf(c).unwrap() - z).abs() <= 1e-12 * z, "c={c}");
        assert!((law.tilted_mean(c).unwrap() - mean).abs() <= 1e-12 * mean, "c={c}");
        assert!((law.entropy_of_tilt(c).unwrap() - entropy).abs() <= 1e-12, "c={c}");
        // the generic weighted-integral path
        let w = law.weighted(c, 0.0, &|t| [1.0, t]).unwrap().unwrap();
        assert!((w.values[1] / w.values[0] - mean).abs() <= 1e-12 * mean);
        assert!((w.log_scale + w.values[0].ln() - z.ln()).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_mgf_is_convex(i in 0usize..10, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0, theta in 0.01f64..0.99) {
        let law = &laws()[i];
        let (c1, c2) = (admissible(law, u1, 2.0), admissible(law, u2, 2.0));
        let mid = law.log_mgf(theta * c1 + (1.0 - theta) * c2).unwrap();
        let chord = theta * law.log_mgf(c1).unwrap() + (1.0 - theta) * law.log_mgf(c2).unwrap();
        prop_assert!(mid <= chord + 1e-9 * chord.abs().max(1.0), "{law}: {mid} > {chord}");
    }

    #[test]
    fn tilted_mean_is_nondecreasing(i in 0usize..10, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0) {
        let law = &laws()[i];
        let (c1, c2) = (admissible(law, u1, 2.0), admissible(law, u2, 2.0));
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let (m1, m2) = (law.tilted_mean(lo).unwrap(), law.tilted_mean(hi).unwrap());
        prop_assert!(m1 <= m2 * (1.0 + 1e-9), "{law}: M({lo}) = {m1} > M({hi}) = {m2}");
    }

    #[test]
    fn entropy_is_nonnegative(i in 0usize..10, u in 0.0f64..1.0) {
        let law = &laws()[i];
        let c = admissible(law, u, 2.0);
        prop_assert!(law.entropy_of_tilt(c).unwrap() >= 0.0);
    }

    #[test]
    fn tilts_compose(i in 0usize..10, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0, u3 in 0.0f64..1.0) {
        let law = &laws()[i];
        let c1 = admissible(law, u1, 1.0);
        // c₁ + c₂ and c₁ + c₂ + x all stay below ξ
        let c2 = -3.0 + (law.xi() - c1 - 0.1).min(1.0).max(-2.0) * u2;
        let x = -2.0 + (law.xi() - c1 - c2 - 0.05).min(0.5).max(-1.0) * u3;
        prop_assume!(c1 + c2 + x < law.xi() - 0.01);
        let twice = law.tilt(c1).unwrap().tilt(c2).unwrap();
        let once = law.tilt(c1 + c2).unwrap();
        let (a, b) = (twice.log_mgf(x).unwrap(), once.log_mgf(x).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{law}: {a} vs {b}");
    }
}
