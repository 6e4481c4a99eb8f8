use std::sync::{Arc, OnceLock};

use iwasawa_core::kernel_verify::precision_for_degree;
use iwasawa_core::lazseries::UNTRUNCATED;
use iwasawa_core::normality::claim52_check;
use iwasawa_core::{
    build_model, element_to_series, HomogeneousPolynomial, IwasawaSeries, Model, Monomial, RootSystem, SeriesAlgebra,
    SeriesContext,
};
use proptest::prelude::*;

const TRUNC: u32 = 6;

struct Fixture {
    model: Model,
    alg: SeriesAlgebra,
}

fn fixture(idx: usize) -> &'static Fixture {
    static CELLS: [OnceLock<Fixture>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let (label, p) = [("A1", 3), ("A2", 3), ("B2", 5)][idx];
    CELLS[idx].get_or_init(|| {
        let rs = RootSystem::from_label(label).unwrap();
        let model = build_model(&rs, p, precision_for_degree(p, TRUNC)).unwrap();
        let alg = SeriesAlgebra::new(&model, TRUNC).unwrap();
        Fixture { model, alg }
    })
}

fn series_from(ctx: &Arc<SeriesContext>, raw: &[(Vec<u8>, i64)]) -> IwasawaSeries {
    let n = ctx.nvars();
    IwasawaSeries::from_terms(
        ctx,
        TRUNC,
        raw.iter().map(|(vars, c)| {
            let mut exps = vec![0u32; n];
            for &v in vars {
                exps[v as usize % n] += 1;
            }
            (Monomial::from_exponents(exps).unwrap(), *c)
        }),
    )
}

fn raw_series() -> impl Strategy<Value = Vec<(Vec<u8>, i64)>> {
    prop::collection::vec((prop::collection::vec(any::<u8>(), 0..=3), -4i64..=4), 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplication_is_associative(idx in 0usize..3, a in raw_series(), b in raw_series(), c in raw_series()) {
        let alg = &fixture(idx).alg;
        let ctx = alg.context();
        let (a, b, c) = (series_from(ctx, &a), series_from(ctx, &b), series_from(ctx, &c));
        let left = alg.multiply(&alg.multiply(&a, &b).unwrap(), &c).unwrap();
        let right = alg.multiply(&a, &alg.multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn multiplication_distributes(idx in 0usize..3, a in raw_series(), b in raw_series(), c in raw_series()) {
        let alg = &fixture(idx).alg;
        let ctx = alg.context();
        let (a, b, c) = (series_from(ctx, &a), series_from(ctx, &b), series_from(ctx, &c));
        let lhs = alg.multiply(&a, &b.add(&c).unwrap()).unwrap();
        let rhs = alg.multiply(&a, &b).unwrap().add(&alg.multiply(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let lhs = alg.multiply(&a.add(&b).unwrap(), &c).unwrap();
        let rhs = alg.multiply(&a, &c).unwrap().add(&alg.multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn word_reduction_is_confluent(idx in 0usize..3, word in prop::collection::vec(any::<u8>(), 2..=5)) {
        let alg = &fixture(idx).alg;
        let n = alg.nvars();
        let letters: Vec<IwasawaSeries> = word.iter().map(|&v| alg.variable(v as usize % n)).collect();
        let left = letters.iter().skip(1).fold(letters[0].clone(), |acc, y| alg.multiply(&acc, y).unwrap());
        let right = letters.iter().rev().skip(1).fold(letters[letters.len() - 1].clone(), |acc, y| alg.multiply(y, &acc).unwrap());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn series_map_is_multiplicative(idx in 0usize..3, g in prop::collection::vec(0u64..1000, 15), h in prop::collection::vec(0u64..1000, 15)) {
        let fx = fixture(idx);
        let n = fx.alg.nvars();
        let modulus = fx.model.p().pow(fx.model.precision() - 1);
        let g: Vec<u64> = g.iter().take(n).map(|x| x % modulus).collect();
        let h: Vec<u64> = h.iter().take(n).map(|x| x % modulus).collect();
        let ge = fx.model.from_coordinates(&g).unwrap();
        let he = fx.model.from_coordinates(&h).unwrap();
        let prod = element_to_series(&fx.model, &fx.model.mul(&ge, &he), TRUNC).unwrap();
        let sg = element_to_series(&fx.model, &ge, TRUNC).unwrap();
        let sh = element_to_series(&fx.model, &he, TRUNC).unwrap();
        prop_assert_eq!(prod, fx.alg.multiply(&sg, &sh).unwrap());
    }

    #[test]
    fn variables_commute_to_degree_p(idx in 0usize..3, i in any::<u8>(), j in any::<u8>()) {
        let alg = &fixture(idx).alg;
        let n = alg.nvars();
        let c = alg.commutator(&alg.variable(i as usize % n), &alg.variable(j as usize % n)).unwrap();
        if let Some(d) = c.min_degree() {
            prop_assert!(d as u64 >= alg.p());
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exact_level_has_nonzero_derivative(
        p in prop::sample::select(vec![3u64, 5, 7]),
        s in 0u32..=1,
        terms in prop::collection::vec((prop::collection::vec(0u32..3, 3), 1i64..7), 1..=3),
        prime_to_p in 1u32..3,
    ) {
        let ctx = SeriesContext::new("t", p, vec!["y1".into(), "y2".into(), "y3".into()]);
        let q = (p as u32).pow(s);
        // every monomial has z-degree p with z = y^{p^s}; the first carries an exponent prime to p
        let mut w = IwasawaSeries::zero(&ctx, UNTRUNCATED);
        for (k, (e, c)) in terms.iter().enumerate() {
            let mut z = e.clone();
            let total: u32 = z.iter().sum();
            if k == 0 {
                z = vec![prime_to_p, 0, 0];
                z[1] = (p as u32) - prime_to_p;
            } else {
                z[2] += (p as u32).saturating_sub(total);
                if z.iter().sum::<u32>() != p as u32 { continue; }
            }
            let exps: Vec<u32> = z.iter().map(|x| x * q).collect();
            w = w.add(&IwasawaSeries::monomial(&ctx, UNTRUNCATED, Monomial::from_exponents(exps).unwrap(), c % p as i64)).unwrap();
        }
        let level_exact = w.terms().keys().any(|m| m.exponents().iter().any(|e| e % (q * p as u32) != 0));
        prop_assume!(!w.is_zero() && level_exact);
        let w = HomogeneousPolynomial::new(w).unwrap();
        prop_assert!(claim52_check(&w, s).unwrap());
    }
}

#[test]
fn higher_level_polynomial_is_rejected() {
    let ctx = SeriesContext::new("t", 3, vec!["y1".into(), "y2".into()]);
    let w = IwasawaSeries::monomial(&ctx, UNTRUNCATED, Monomial::from_exponents(vec![3, 6]).unwrap(), 1);
    let w = HomogeneousPolynomial::new(w).unwrap();
    assert!(claim52_check(&w, 0).is_err());
    assert!(claim52_check(&w, 1).unwrap());
}
