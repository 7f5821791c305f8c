//! Randomized invariants of `θ`, `θ̇` and the truncation maps.

use proptest::prelude::*;
use qhat_core::qarith::{qint, RatFunc};
use qhat_core::rootdata::{Coweight, RootDatum, SaturatedSet, Weight};
use qhat_core::schur::{truncation_map, SchurTower};
use qhat_core::ulimit::{eq_up_to, limit_add, limit_mul, theta, theta_dot, verify_coherence, DotSymbol, UExpr, USymbol, UdotExpr};
use qhat_core::weylmod::Sign;

const HEIGHT: i64 = 4;
const MAX_WORD: usize = 4;

fn symbol(datum: &RootDatum) -> impl Strategy<Value = USymbol> {
    let r = datum.rank();
    prop_oneof![
        (any::<bool>(), 0..r, 1usize..=2).prop_map(|(plus, i, k)| USymbol::E {
            sign: if plus { Sign::Plus } else { Sign::Minus },
            i,
            k
        }),
        prop::collection::vec(-1i64..=1, r).prop_map(|h| USymbol::K(Coweight(h))),
    ]
}

fn word(datum: &RootDatum) -> impl Strategy<Value = Vec<USymbol>> {
    prop::collection::vec(symbol(datum), 0..=MAX_WORD)
}

fn coeff() -> impl Strategy<Value = RatFunc> {
    (-3i64..=3, 0u32..3).prop_map(|(n, d)| RatFunc::from(qint(n, d.max(1))))
}

fn sets(datum: &RootDatum) -> Vec<SaturatedSet> {
    datum.saturated_sets_up_to(HEIGHT).unwrap()
}

/// Pairs `π ⊆ π′` from the height-bounded family.
fn nested(datum: &RootDatum) -> Vec<(SaturatedSet, SaturatedSet)> {
    let all = sets(datum);
    let mut out = Vec::new();
    for a in &all {
        for b in &all {
            if a != b && a.is_subset(b) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

fn check_homomorphy(datum: &RootDatum, tower: &SchurTower, a: Vec<USymbol>, b: Vec<USymbol>, c: RatFunc, pick: usize) -> Result<(), TestCaseError> {
    let all = sets(datum);
    let pi = &all[pick % all.len()];
    let (ua, ub) = (UExpr::word(c, a), UExpr::word(RatFunc::one(), b));
    let prod = theta(datum, &ua.mul(&ub));
    prop_assert!(eq_up_to(&prod, &limit_mul(&theta(datum, &ua), &theta(datum, &ub)), tower, pi).unwrap());
    let sum = theta(datum, &ua.add(&ub));
    prop_assert!(eq_up_to(&sum, &limit_add(&theta(datum, &ua), &theta(datum, &ub)), tower, pi).unwrap());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn theta_is_multiplicative_a1(a in word(&RootDatum::preset("A1").unwrap()), b in word(&RootDatum::preset("A1").unwrap()), c in coeff(), pick in 0usize..64) {
        let d = RootDatum::preset("A1").unwrap();
        check_homomorphy(&d, &SchurTower::new(d.clone()), a, b, c, pick)?;
    }

    #[test]
    fn theta_is_multiplicative_a2(a in word(&RootDatum::preset("A2").unwrap()), b in word(&RootDatum::preset("A2").unwrap()), c in coeff(), pick in 0usize..64) {
        let d = RootDatum::preset("A2").unwrap();
        check_homomorphy(&d, &SchurTower::new(d.clone()), a, b, c, pick)?;
    }

    /// `f_{π,π′}(θ(u)_{π′}) = θ(u)_π`.
    #[test]
    fn theta_is_coherent(w in word(&RootDatum::preset("B2").unwrap()), pick in 0usize..64) {
        let d = RootDatum::preset("B2").unwrap();
        let tower = SchurTower::new(d.clone());
        let pairs = nested(&d);
        let (small, big) = &pairs[pick % pairs.len()];
        let rep = verify_coherence(&theta(&d, &UExpr::word(RatFunc::one(), w)), &tower, &[small.clone(), big.clone()]).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep);
    }

    /// `1_μ x 1_λ` vanishes unless `x` has weight `μ − λ`.
    #[test]
    fn idempotents_select_weights(i in 0usize..2, k in 1usize..=2, plus in any::<bool>(), l in prop::collection::vec(-3i64..=3, 2), m in prop::collection::vec(-3i64..=3, 2), pick in 0usize..64) {
        let d = RootDatum::preset("A2").unwrap();
        let tower = SchurTower::new(d.clone());
        let all = sets(&d);
        let pi = &all[pick % all.len()];
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let (lambda, mu) = (Weight(l), Weight(m));
        let u = UdotExpr::dot_word(RatFunc::one(), vec![DotSymbol::One(mu.clone()), DotSymbol::E { sign, i, k }, DotSymbol::One(lambda.clone())]).unwrap();
        let x = theta_dot(&d, &u).evaluate(&tower, pi).unwrap();
        let shift = d.simple_root(i).scaled(sign.factor() * k as i64);
        if mu != lambda.add(&shift) {
            prop_assert!(x.blocks.iter().all(|b| b.entries().iter().all(|e| e.is_zero())));
        }
    }

    /// Truncation maps compose along random chains of length three.
    #[test]
    fn truncations_compose(pick in 0usize..256) {
        let d = RootDatum::preset("A1xA1").unwrap();
        let pairs = nested(&d);
        let (a, b) = &pairs[pick % pairs.len()];
        let all = sets(&d);
        if let Some(c) = all.iter().find(|c| *c != b && b.is_subset(c)) {
            let fab = truncation_map(a, b).unwrap();
            let fbc = truncation_map(b, c).unwrap();
            prop_assert_eq!(fab.compose(&fbc), truncation_map(a, c).unwrap());
        }
    }
}
