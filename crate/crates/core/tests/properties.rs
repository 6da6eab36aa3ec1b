use proptest::prelude::*;

use gauss_semigroup::cones::{cone_contains, cone_path, ConeKind, ConeSpec};
use gauss_semigroup::hermite::{hermite_1d, HermiteSeries, MultiIndex};
use gauss_semigroup::ou::{ou_apply_spectral, ou_series};
use gauss_semigroup::poisson::{poisson_apply_spectral, poisson_series};

fn kind() -> impl Strategy<Value = ConeKind> {
    prop::sample::select(ConeKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn three_term_recurrence(n in 1u32..30, x in -5.0f64..5.0) {
        // sqrt(n+1) h_{n+1} = sqrt 2 x h_n - sqrt n h_{n-1}
        let lhs = ((n + 1) as f64).sqrt() * hermite_1d(n + 1, x);
        let rhs = 2f64.sqrt() * x * hermite_1d(n, x) - (n as f64).sqrt() * hermite_1d(n - 1, x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn cone_sections_shrink_in_t(x in -4.0f64..4.0, k in kind(), t in 1e-6f64..1.0, s in 0.0f64..1.0) {
        let spec = ConeSpec::new(vec![x], k).unwrap();
        let smaller = t * 0.5;
        prop_assert!(spec.aperture(smaller) <= spec.aperture(t) || spec.aperture(t) == 0.0);
        let y = x + s * spec.aperture(smaller);
        if cone_contains(&spec, &[y], smaller) {
            prop_assert!(s < 1.0);
        }
    }

    #[test]
    fn truncated_cone_inside_parabolic(x in -4.0f64..4.0, u in -1.0f64..1.0, e in -6.0f64..0.0) {
        let t = 10f64.powf(e);
        let y = x + u * t.sqrt();
        let inner = ConeSpec::new(vec![x], ConeKind::TruncatedParabolic).unwrap();
        let outer = ConeSpec::new(vec![x], ConeKind::ParabolicGaussian).unwrap();
        prop_assert!(!cone_contains(&inner, &[y], t) || cone_contains(&outer, &[y], t));
    }

    #[test]
    fn paths_stay_inside(x in -5.0f64..5.0, y0 in -5.0f64..5.0, k in kind(), eta in 0.0f64..0.99, decay in 0.05f64..0.95) {
        let spec = ConeSpec::new(vec![x, y0], k).unwrap();
        let path = cone_path(&spec, 25, eta, decay).unwrap();
        for (y, t) in &path.points {
            prop_assert!(cone_contains(&spec, y, *t));
        }
    }

    #[test]
    fn spectral_semigroups_compose(c in prop::collection::vec(-1.0f64..1.0, 6), t in 0.0f64..3.0, u in 0.0f64..3.0, x in -2.0f64..2.0) {
        let terms = (0..6).map(|k| (MultiIndex::new(vec![k as u32]).unwrap(), c[k]));
        let s = HermiteSeries::from_terms(1, terms).unwrap();
        let a = ou_apply_spectral(&s, &[x], t + u).unwrap();
        let b = ou_apply_spectral(&ou_series(&s, u), &[x], t).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        let a = poisson_apply_spectral(&s, &[x], t + u).unwrap();
        let b = poisson_apply_spectral(&poisson_series(&s, u), &[x], t).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
    }
}
