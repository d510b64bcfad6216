use geomspec::audibility::{
    admissible_nu, classify_isospectral_partners, p3_candidates, polysign_f, polysign_region_check, polysign_xy,
    sl2r_region_check, CandidateKind, Conclusion, GeometryTag, RejectReason,
};
use geomspec::cubic::{nu_from_elementary, CubicRoots, CubicSpec};
use geomspec::invariants::{
    b_invariants, closed_form_invariants, derivative_invariants_closed, elementary_symmetric, heat_invariants,
    ElementarySymmetric, PiMultiple, RegimeTag,
};
use geomspec::milnor::{GroupTag, MilnorData, RicciEigenvalues};
use geomspec::rational::{frac, int};
use geomspec::spectra::{
    eigenvalue_f, eigenvalue_set, fundamental_tone, quotient_volume, truncated_heat_trace, QuotientSpec,
    TranslationLength,
};
use geomspec::tensor::{oracle_derivative_invariants, oracle_scalar_invariants};
use num_traits::{Signed, Zero};

fn nu(a: i64, b: i64, c: i64) -> RicciEigenvalues {
    RicciEigenvalues::from_ints([a, b, c])
}

fn one() -> PiMultiple {
    PiMultiple::rational(int(1))
}

#[test]
fn elementary_symmetric_examples() {
    assert_eq!(elementary_symmetric(&nu(2, 2, 2)), ElementarySymmetric::from_ints(6, 12, 8));
    assert_eq!(elementary_symmetric(&nu(2, -2, -2)), ElementarySymmetric::from_ints(-2, -4, 8));
    assert_eq!(elementary_symmetric(&nu(0, 0, 0)), ElementarySymmetric::from_ints(0, 0, 0));
}

#[test]
fn round_sphere_invariants_match_oracle() {
    let closed = closed_form_invariants(&nu(2, 2, 2));
    assert!(closed.abar.is_zero());
    assert_eq!(closed.non_deriv_a3_integrand, int(120));
    for x in [&closed.rrr, &closed.ric_rr, &closed.ric_ric_r, &closed.ric_ric_ric] {
        assert_eq!(x, &int(24));
    }
    let oracle = oracle_scalar_invariants(&MilnorData::from_ints([2, 2, 2]));
    assert_eq!(oracle.rrr, int(24));
    assert_eq!(derivative_invariants_closed(&nu(2, 2, 2)).unwrap(), (int(0), int(0)));
}

#[test]
fn product_integrand() {
    for k in 1..=4 {
        assert_eq!(closed_form_invariants(&nu(k, k, 0)).non_deriv_a3_integrand, frac(64 * k * k * k, 7));
    }
    assert_eq!(derivative_invariants_closed(&nu(1, 1, 0)).unwrap_err().code(), "regime-error");
}

#[test]
fn nil_derivative_invariants_match_oracle() {
    let (nr, dbar) = derivative_invariants_closed(&nu(2, -2, -2)).unwrap();
    let oracle = oracle_derivative_invariants(&MilnorData::from_ints([2, 0, 0]));
    assert_eq!(nr, oracle.norm_nabla_r2);
    assert_eq!(dbar, oracle.dbar);
    assert_eq!(oracle.gamma_form, int(256));
}

#[test]
fn heat_invariant_examples() {
    let vol = PiMultiple::new(int(2), 2);
    let a = heat_invariants(&nu(2, 2, 2), &vol, RegimeTag::LocallySymmetric).unwrap();
    let b = heat_invariants(&nu(2, 2, 2), &vol, RegimeTag::UnimodularNonDegenerate).unwrap();
    assert_eq!(a.a3, Some(vol.scale(&frac(1, 6))));
    assert_eq!(a.a3, b.a3);
    for c in 1..=3 {
        let h = heat_invariants(&nu(c, -c, -c), &one(), RegimeTag::UnimodularNonDegenerate).unwrap();
        assert_eq!(h.a3, Some(PiMultiple::rational(frac(-155 * c * c * c, 5040))));
    }
    assert!(heat_invariants(&nu(3, -1, -2), &one(), RegimeTag::LocallySymmetric).is_err());
}

#[test]
fn b_invariant_examples() {
    let b = b_invariants(&nu(1, -1, -1), &one());
    assert_eq!((b.b1, b.b2, b.b3), (int(-1), int(-1), Some(int(60))));
    let b = b_invariants(&nu(2, 2, 2), &one());
    assert_eq!((b.b1, b.b2, b.b3), (int(6), int(12), Some(int(-1056))));
    assert!(b_invariants(&nu(1, 1, 0), &one()).b3.is_none());
}

#[test]
fn heat_and_b_invariants_are_equivalent() {
    let samples: Vec<RicciEigenvalues> = (-3..=3)
        .flat_map(|a| (-3..=3).map(move |b| MilnorData::from_ints([a, b, 1]).ricci()))
        .filter(|n| !elementary_symmetric(n).p3.is_zero())
        .collect();
    for x in &samples {
        for y in &samples {
            let hx = heat_invariants(x, &one(), RegimeTag::UnimodularNonDegenerate).unwrap();
            let hy = heat_invariants(y, &one(), RegimeTag::UnimodularNonDegenerate).unwrap();
            let (bx, by) = (b_invariants(x, &one()), b_invariants(y, &one()));
            assert_eq!((hx.a1 == hy.a1 && hx.a2 == hy.a2), (bx.b1 == by.b1 && bx.b2 == by.b2));
            assert_eq!(hx == hy, bx == by, "{x} vs {y}");
        }
    }
}

#[test]
fn admissibility_examples() {
    assert!(admissible_nu(&nu(3, -1, -2)).admissible);
    assert!(!admissible_nu(&nu(1, 1, 0)).admissible);
    assert!(admissible_nu(&nu(0, 0, 0)).admissible);
    assert_eq!(admissible_nu(&nu(3, 0, 0)).p3_sign, 0);
}

#[test]
fn p3_candidate_examples() {
    assert_eq!(p3_candidates(&b_invariants(&nu(2, 2, 2), &one())).unwrap(), vec![int(8), frac(-216, 5)]);
    assert_eq!(p3_candidates(&b_invariants(&nu(3, -3, -3), &one())).unwrap(), vec![int(27)]);
}

#[test]
fn cubic_examples() {
    match nu_from_elementary(&CubicSpec::new(int(6), int(12), int(8))) {
        CubicRoots::Real(m) => assert_eq!(m.as_ricci(), Some(nu(2, 2, 2))),
        other => panic!("{other:?}"),
    }
    let spec = CubicSpec::new(int(2), int(1), frac(-4, 5));
    assert!(matches!(nu_from_elementary(&spec), CubicRoots::Complex { .. }));
    match nu_from_elementary(&CubicSpec::new(int(-1), int(-1), int(1))) {
        CubicRoots::Real(m) => {
            let mut v = m.as_ricci().unwrap().nu;
            v.sort();
            assert_eq!(v, [int(-1), int(-1), int(1)]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn polysign_examples() {
    assert!(polysign_f(&elementary_symmetric(&nu(1, -1, -1))).is_zero());
    assert_eq!(polysign_xy(&int(-1), &int(0)), frac(-4, 5));
    let r = polysign_region_check(&frac(1, 20)).unwrap();
    assert!(r.ok && r.min_dfdy.is_positive());
}

#[test]
fn sl2r_examples() {
    let c = sl2r_region_check(&nu(1, -2, -3)).unwrap();
    assert!(c.in_window && !c.uniqueness_criterion);
    assert!(!sl2r_region_check(&nu(3, -1, -2)).unwrap().in_window);
    assert!(!sl2r_region_check(&nu(1, -1, -1)).unwrap().in_window);
}

#[test]
fn partner_examples() {
    let r = classify_isospectral_partners(&nu(1, 1, 0), &PiMultiple::new(int(4), 1), None).unwrap();
    assert_eq!(r.conclusion, Conclusion::UniqueLocalIsometryClass);
    assert!(r
        .candidates
        .iter()
        .filter(|c| c.kind == CandidateKind::Unimodular)
        .all(|c| c.reasons.contains(&RejectReason::NoRealRoots)));

    let r = classify_isospectral_partners(&nu(2, -2, -2), &one(), None).unwrap();
    assert_eq!(r.conclusion, Conclusion::UniqueLocalIsometryClass);
    assert_eq!(r.geometry, Some(GeometryTag::Group(GroupTag::Nil)));

    let r = classify_isospectral_partners(&nu(2, 2, 2), &PiMultiple::new(int(2), 2), None).unwrap();
    assert_eq!(r.conclusion, Conclusion::UniqueLocalIsometryClass);
    let rejected: Vec<_> = r.candidates.iter().filter(|c| !c.is_confirmed()).collect();
    assert_eq!(rejected.len(), 1);
    assert!(rejected[0].reasons.contains(&RejectReason::P3Negative));
    assert!(r.trace.iter().any(|s| s.basis == geomspec::audibility::Basis::Axiom));
}

#[test]
fn su2_sources_list_at_most_two_classes() {
    for l in [[1, 2, 3], [1, 1, 2], [2, 3, 5], [1, 3, 4]] {
        let n = MilnorData::from_ints(l).ricci();
        let r = classify_isospectral_partners(&n, &one(), None).unwrap();
        let confirmed = r.candidates.iter().filter(|c| c.is_confirmed()).count();
        assert!((1..=2).contains(&confirmed), "{l:?}: {confirmed}");
    }
}

fn q(f: u8, k: i64, v: &str) -> QuotientSpec {
    QuotientSpec::new(f, int(k), v.parse().unwrap()).unwrap()
}

#[test]
fn volume_examples() {
    assert_eq!(quotient_volume(&q(1, 1, "1")).exact, Some(PiMultiple::new(int(4), 1)));
    assert_eq!(quotient_volume(&q(4, 1, "1")).exact, Some(PiMultiple::new(int(2), 1)));
    assert_eq!(quotient_volume(&q(3, 2, "1")).exact, Some(PiMultiple::new(int(2), 1)));
}

#[test]
fn eigenvalue_examples() {
    let pi: TranslationLength = "pi".parse().unwrap();
    assert_eq!(eigenvalue_f(1, 0, &int(1), &pi).as_rational(), Some(&int(2)));
    assert!(eigenvalue_f(0, 0, &int(1), &pi).is_zero());
    assert_eq!(eigenvalue_f(1, 1, &int(1), &pi).as_rational(), Some(&int(3)));

    assert_eq!(fundamental_tone(&q(1, 1, "2*pi")).unwrap().value.as_rational(), Some(&int(1)));
    assert_eq!(fundamental_tone(&q(1, 1, "1")).unwrap().value.as_rational(), Some(&int(2)));
    assert_eq!(fundamental_tone(&q(3, 1, "1")).unwrap().value.as_rational(), Some(&int(2)));
}

#[test]
fn spectrum_values_satisfy_parity() {
    for f in 1..=4 {
        let s = q(f, 1, "3/2");
        let set = eigenvalue_set(&s, &int(80)).unwrap();
        for e in &set.entries {
            assert!(s.admits(e.m, e.n));
            assert_eq!(eigenvalue_f(e.m, e.n, &s.k, &s.v), e.value);
        }
    }
}

#[test]
fn heat_trace_large_time_limit() {
    let s = q(1, 1, "2*pi");
    let t = truncated_heat_trace(&s, 50.0, 1.0).unwrap();
    assert!((t - 1.0).abs() < 1e-15);
    assert_eq!(truncated_heat_trace(&q(3, 1, "1"), 0.1, 500.0).unwrap_err().code(), "unsupported-multiplicity");
}
