//! Which Ricci-eigenvalue triples, and hence which local geometries, share a
//! given set of heat invariants.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cubic::{
    nu_from_elementary, pair_sum_polynomial, real_root_sign_counts, CubicRoots, CubicSpec,
    NuMultiset,
};
use crate::error::{GeomError, Result};
use crate::invariants::{
    a3_density, b_invariants, closed_form_invariants, elementary_symmetric,
    BInvariants, ElementarySymmetric, PiMultiple, RegimeTag,
};
use crate::milnor::{group_from_ricci, GroupMatch, GroupTag, MilnorData, RicciEigenvalues, SignPattern};
use crate::rational::{self, exact_sqrt, format_rational, frac, int, signum, Rational};

/// Sign-pattern admissibility of a Ricci triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub signature: String,
    /// Sign of P3; non-negative for every unimodular metric.
    pub p3_sign: i8,
    pub zero_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

pub fn admissible_nu(nu: &RicciEigenvalues) -> Admissibility {
    let pattern = nu.signs();
    let (_, zero_count, _) = pattern.counts();
    let admissible = pattern.is_unimodular_ricci();
    Admissibility {
        admissible,
        signature: pattern.to_string(),
        p3_sign: signum(&elementary_symmetric(nu).p3),
        zero_count,
        reason: (!admissible).then(|| {
            format!("signature {pattern} is not one of (+,+,+), (+,-,-), (+,0,0), (0,0,-), (0,0,0)")
        }),
    }
}

/// Non-zero roots of `30x² - b3 x + Q = 0`, `Q = 6b1²b2² - 24b2³`, in
/// decreasing order. A repeated root is reported once.
pub fn p3_candidates(b: &BInvariants) -> Result<Vec<Rational>> {
    let b3 = b
        .b3
        .as_ref()
        .ok_or_else(|| GeomError::Regime("b3 is undefined when P3 = 0".into()))?;
    let e = ElementarySymmetric::new(b.b1.clone(), b.b2.clone(), Rational::zero());
    p3_roots(b3, &e.q_term())
}

fn p3_roots(b3: &Rational, q: &Rational) -> Result<Vec<Rational>> {
    let disc = b3 * b3 - int(120) * q;
    if disc.is_negative() {
        return Err(GeomError::InvalidArgument(format!(
            "b3 = {} admits no real P3",
            format_rational(b3)
        )));
    }
    let sq = exact_sqrt(&disc).ok_or_else(|| {
        GeomError::InvalidArgument(format!(
            "P3 candidates for b3 = {} are irrational",
            format_rational(b3)
        ))
    })?;
    let mut roots = vec![(b3 + &sq) / int(60), (b3 - &sq) / int(60)];
    roots.dedup();
    roots.retain(|r| !r.is_zero());
    Ok(roots)
}

/// `f = P3² - P2²(P1² - 4P2)/5`.
pub fn polysign_f(p: &ElementarySymmetric) -> Rational {
    &p.p3 * &p.p3 - &p.p2 * &p.p2 * (&p.p1 * &p.p1 - int(4) * &p.p2) / int(5)
}

/// `f` in the chart `α = 1`, `x = β + γ`, `y = βγ`.
pub fn polysign_xy(x: &Rational, y: &Rational) -> Rational {
    let s = x + y;
    let one_x = int(1) + x;
    y * y - &s * &s * (&one_x * &one_x - int(4) * &s) / int(5)
}

/// `∂f/∂y = 2y - (2/5)(x + y)(1 + x² - 4x - 6y)`.
pub fn polysign_dfdy(x: &Rational, y: &Rational) -> Rational {
    int(2) * y - frac(2, 5) * (x + y) * (int(1) + x * x - int(4) * x - int(6) * y)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(with = "rational::serde_str")]
    pub x: Rational,
    #[serde(with = "rational::serde_str")]
    pub y: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolysignViolation {
    pub point: GridPoint,
    pub kind: String,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolysignReport {
    #[serde(with = "rational::serde_str")]
    pub step: Rational,
    pub points: usize,
    pub interior_points: usize,
    #[serde(with = "rational::serde_str")]
    pub max_f: Rational,
    pub argmax_f: GridPoint,
    #[serde(with = "rational::serde_str")]
    pub min_dfdy: Rational,
    pub argmin_dfdy: GridPoint,
    pub violations: Vec<PolysignViolation>,
    pub ok: bool,
}

struct ColumnScan {
    points: usize,
    interior: usize,
    max_f: (Rational, GridPoint),
    min_d: Option<(Rational, GridPoint)>,
    violations: Vec<PolysignViolation>,
}

fn scan_column(x: &Rational, step: &Rational) -> ColumnScan {
    let top = x * x / int(4);
    let interior_x = x > &int(-2) && x < &int(-1);
    let mut ys = Vec::new();
    let mut y = Rational::zero();
    while y <= top {
        ys.push(y.clone());
        y += step;
    }
    if ys.last() != Some(&top) {
        ys.push(top.clone());
    }
    let mut col = ColumnScan {
        points: ys.len(),
        interior: 0,
        max_f: (polysign_xy(x, &ys[0]), GridPoint { x: x.clone(), y: ys[0].clone() }),
        min_d: None,
        violations: Vec::new(),
    };
    for y in ys {
        let pt = || GridPoint { x: x.clone(), y: y.clone() };
        let f = polysign_xy(x, &y);
        if f > col.max_f.0 {
            col.max_f = (f.clone(), pt());
        }
        if f.is_positive() {
            col.violations.push(PolysignViolation { point: pt(), kind: "f-positive".into(), value: f });
        }
        if interior_x && y.is_positive() && y < top {
            col.interior += 1;
            let d = polysign_dfdy(x, &y);
            if !d.is_positive() {
                col.violations.push(PolysignViolation {
                    point: pt(),
                    kind: "dfdy-nonpositive".into(),
                    value: d.clone(),
                });
            }
            if col.min_d.as_ref().is_none_or(|(m, _)| &d < m) {
                col.min_d = Some((d, pt()));
            }
        }
    }
    col
}

/// Exact scan of `{-2 ≤ x ≤ -1, 0 ≤ y ≤ x²/4}` on the grid of mesh `step`
/// (plus the upper boundary curve): checks `f ≤ 0` everywhere and
/// `∂f/∂y > 0` at interior points.
pub fn polysign_region_check(step: &Rational) -> Result<PolysignReport> {
    if !step.is_positive() || step > &frac(1, 2) || !step.recip().is_integer() {
        return Err(GeomError::InvalidArgument(format!(
            "grid step must be 1/n with n ≥ 2, got {}",
            format_rational(step)
        )));
    }
    let n = step.recip().to_integer();
    let n: i64 = n.try_into().map_err(|_| GeomError::InvalidArgument("grid step too small".into()))?;
    let columns: Vec<ColumnScan> = (0..=n)
        .into_par_iter()
        .map(|i| scan_column(&(int(-2) + int(i) * step), step))
        .collect();
    let mut points = 0;
    let mut interior = 0;
    let mut max_f: Option<(Rational, GridPoint)> = None;
    let mut min_d: Option<(Rational, GridPoint)> = None;
    let mut violations = Vec::new();
    for col in columns {
        points += col.points;
        interior += col.interior;
        if max_f.as_ref().is_none_or(|(m, _)| col.max_f.0 > *m) {
            max_f = Some(col.max_f);
        }
        if let Some(d) = col.min_d {
            if min_d.as_ref().is_none_or(|(m, _)| d.0 < *m) {
                min_d = Some(d);
            }
        }
        violations.extend(col.violations);
    }
    let (max_f, argmax_f) = max_f.expect("at least one column");
    // a 1/2 mesh has no interior points; report the boundary corner then
    let (min_dfdy, argmin_dfdy) = min_d.unwrap_or_else(|| {
        let p = GridPoint { x: frac(-3, 2), y: frac(9, 32) };
        (polysign_dfdy(&p.x, &p.y), p)
    });
    violations.truncate(32);
    Ok(PolysignReport {
        step: step.clone(),
        points,
        interior_points: interior,
        ok: violations.is_empty(),
        max_f,
        argmax_f,
        min_dfdy,
        argmin_dfdy,
        violations,
    })
}

/// Sorted `(+,-,-)` view `ν1 > 0 > ν2 ≥ ν3`.
fn plus_minus_minus(nu: &RicciEigenvalues) -> Result<[Rational; 3]> {
    if nu.signs() != SignPattern([1, -1, -1]) {
        return Err(GeomError::InvalidArgument(format!(
            "expected signature (+,-,-), got {} for {nu}",
            nu.signs()
        )));
    }
    Ok(nu.sorted_desc())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2rCheck {
    /// `ν1 ≤ -ν2ν3/(ν2 + ν3)`, equivalently `P2 ≥ 0`.
    pub in_window: bool,
    /// `P1² - 4P2 < 0`.
    pub uniqueness_criterion: bool,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
}

pub fn sl2r_region_check(nu: &RicciEigenvalues) -> Result<Sl2rCheck> {
    let [n1, n2, n3] = plus_minus_minus(nu)?;
    let bound = -(&n2 * &n3) / (&n2 + &n3);
    let e = elementary_symmetric(nu);
    Ok(Sl2rCheck {
        in_window: n1 <= bound,
        uniqueness_criterion: (&e.p1 * &e.p1 - int(4) * &e.p2).is_negative(),
        bound,
    })
}

/// Group identification from `(P1, P2, P3)` alone, decided exactly.
///
/// For signature (+,-,-) the counts of positive and vanishing pair sums
/// `ν_i + ν_j` separate the five cases.
pub fn group_from_elementary(e: &ElementarySymmetric) -> Result<GroupMatch> {
    let spec = CubicSpec::from_elementary(e);
    let disc = spec.discriminant();
    if disc.is_negative() {
        return Err(GeomError::NotRealizable(format!(
            "P = ({}, {}, {}) has complex Ricci eigenvalues",
            format_rational(&e.p1),
            format_rational(&e.p2),
            format_rational(&e.p3)
        )));
    }
    let (pos, zero, neg) = real_root_sign_counts(&spec.nu_polynomial());
    let signs = SignPattern::from_signs(
        [[1i8].repeat(pos), [0].repeat(zero), [-1].repeat(neg)].concat().try_into().expect("three roots"),
    );
    if !signs.is_unimodular_ricci() {
        return Err(GeomError::NotRealizable(format!("signature {signs}")));
    }
    let tag = match signs.0 {
        [1, 1, 1] | [1, 0, 0] => GroupTag::SU2,
        [0, 0, 0] => GroupTag::R3,
        [0, 0, -1] => return Ok(GroupMatch::Ambiguous(vec![GroupTag::Sol, GroupTag::Sl2rTilde])),
        _ => match real_root_sign_counts(&pair_sum_polynomial(e)) {
            (2, 0, _) => GroupTag::SU2,
            (1, 1, _) => GroupTag::E2Tilde,
            (0, 1, _) => GroupTag::Sol,
            (0, 2, _) => GroupTag::Nil,
            _ => GroupTag::Sl2rTilde,
        },
    };
    Ok(GroupMatch::Unique(tag))
}

/// Membership in `{α > 0 > β ≥ γ, α > |γ|, α + β + γ < 0}`: left-invariant
/// metrics on SU2 with signature (+,-,-) and negative scalar curvature.
pub fn in_negative_su2_region(e: &ElementarySymmetric) -> bool {
    if !e.p1.is_negative() {
        return false;
    }
    let spec = CubicSpec::from_elementary(e);
    if spec.discriminant().is_negative() {
        return false;
    }
    real_root_sign_counts(&spec.nu_polynomial()) == (1, 0, 2)
        && real_root_sign_counts(&pair_sum_polynomial(e)).0 == 2
}

/// Structure constants `(2a², -2b², 0)` with `a² ≥ b²` of the Sol metric
/// with elementary data `(P1, P2)`, from `P1 = -2(a²+b²)²` and
/// `P2 = -4(a²+b²)²(a²-b²)²`.
pub fn sol_structure_constants(e: &ElementarySymmetric) -> Result<MilnorData> {
    let bad = |what: &str| {
        GeomError::InvalidArgument(format!(
            "(P1, P2) = ({}, {}) {what}",
            format_rational(&e.p1),
            format_rational(&e.p2)
        ))
    };
    if !e.p1.is_negative() || e.p2.is_positive() {
        return Err(bad("is not realized by a Sol metric"));
    }
    let s = exact_sqrt(&(-&e.p1 / int(2))).ok_or_else(|| bad("has irrational a² + b²"))?;
    let d = exact_sqrt(&(-&e.p2 / (int(4) * &s * &s))).ok_or_else(|| bad("has irrational a² - b²"))?;
    if d >= s {
        return Err(bad("would need b = 0"));
    }
    let a2 = (&s + &d) / int(2);
    let b2 = (&s - &d) / int(2);
    Ok(MilnorData::new([int(2) * a2, -int(2) * b2, int(0)]))
}

/// Local model of a geometry named in a partner report.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GeometryTag {
    /// Constant curvature `(c,c,c)`; sign of `c` picks S3, E3 or H3.
    ConstantCurvature(i8),
    /// `(k,k,0)`; sign of `k` picks S2xE or H2xE.
    Product(i8),
    Group(GroupTag),
    EitherOf(Vec<GroupTag>),
}

impl GeometryTag {
    fn from_match(m: GroupMatch) -> Self {
        match m {
            GroupMatch::Unique(t) => GeometryTag::Group(t),
            GroupMatch::Ambiguous(ts) => GeometryTag::EitherOf(ts),
        }
    }
}

impl fmt::Display for GeometryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryTag::ConstantCurvature(1) => f.write_str("S3"),
            GeometryTag::ConstantCurvature(0) => f.write_str("E3"),
            GeometryTag::ConstantCurvature(_) => f.write_str("H3"),
            GeometryTag::Product(s) if *s > 0 => f.write_str("S2xE"),
            GeometryTag::Product(_) => f.write_str("H2xE"),
            GeometryTag::Group(t) => f.write_str(t.name()),
            GeometryTag::EitherOf(ts) => {
                let names: Vec<&str> = ts.iter().map(|t| t.name()).collect();
                f.write_str(&names.join("|"))
            }
        }
    }
}

fn group_tag_from_name(s: &str) -> Option<GroupTag> {
    [
        GroupTag::R3,
        GroupTag::SU2,
        GroupTag::Sl2rTilde,
        GroupTag::Nil,
        GroupTag::Sol,
        GroupTag::E2Tilde,
    ]
    .into_iter()
    .find(|t| t.name() == s)
}

impl FromStr for GeometryTag {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let tag = match s {
            "S3" => GeometryTag::ConstantCurvature(1),
            "E3" => GeometryTag::ConstantCurvature(0),
            "H3" => GeometryTag::ConstantCurvature(-1),
            "S2xE" => GeometryTag::Product(1),
            "H2xE" => GeometryTag::Product(-1),
            _ if s.contains('|') => GeometryTag::EitherOf(
                s.split('|')
                    .map(|p| group_tag_from_name(p).ok_or_else(|| GeomError::InvalidArgument(format!("unknown group {p:?}"))))
                    .collect::<Result<_>>()?,
            ),
            _ => GeometryTag::Group(
                group_tag_from_name(s).ok_or_else(|| GeomError::InvalidArgument(format!("unknown geometry {s:?}")))?,
            ),
        };
        Ok(tag)
    }
}

impl Serialize for GeometryTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GeometryTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    /// Unimodular metrics have `P3 ≥ 0`.
    P3Negative,
    /// The cubic with the candidate's `(P1, P2, P3)` has two complex roots.
    NoRealRoots,
    /// Real eigenvalues whose sign pattern no unimodular metric realizes.
    InadmissibleSign,
    /// Candidate lies in the negative-scalar SU2 region where `f ≤ 0` must
    /// hold, yet `f > 0`.
    RegionViolation,
    /// A locally symmetric candidate whose `a3` differs from the source's.
    A3Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    LocallySymmetric,
    Unimodular,
    /// `P3 = 0` unimodular metric, matched on `b0..b2` only.
    UnimodularDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStatus {
    Confirmed,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    #[serde(with = "rational::serde_str")]
    pub p3: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<NuMultiset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryTag>,
    pub status: CandidateStatus,
    pub reasons: Vec<RejectReason>,
    /// Which invariants the match rests on: `"b0-b3"` or `"b0-b2"`.
    pub basis: String,
}

impl Candidate {
    pub fn is_confirmed(&self) -> bool {
        self.status == CandidateStatus::Confirmed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Formula,
    Lemma,
    /// Cited external result, not re-derived here.
    Axiom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: String,
    pub basis: Basis,
    pub inputs: String,
    pub outcome: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    UniqueLocalIsometryClass,
    TwoClasses,
    SignatureOnly,
    ModelGeometryOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerSource {
    pub nu: RicciEigenvalues,
    pub vol: PiMultiple,
    pub regime: RegimeTag,
    pub geometry: GeometryTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerReport {
    pub source: PartnerSource,
    pub b: BInvariants,
    #[serde(with = "rational::serde_opt")]
    pub a3_density: Option<Rational>,
    pub candidates: Vec<Candidate>,
    pub conclusion: Conclusion,
    /// Geometry of the surviving class when the conclusion is unique.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryTag>,
    pub trace: Vec<TraceStep>,
}

fn source_geometry(nu: &RicciEigenvalues, regime: RegimeTag) -> Result<GeometryTag> {
    if regime == RegimeTag::LocallySymmetric {
        let [a, b, c] = &nu.nu;
        if a == b && b == c {
            return Ok(GeometryTag::ConstantCurvature(signum(a)));
        }
        let k = nu.nu.iter().find(|x| !x.is_zero()).expect("non-flat product");
        return Ok(GeometryTag::Product(signum(k)));
    }
    group_from_ricci(nu).map(GeometryTag::from_match)
}

fn exact_multiset(mut v: [Rational; 3]) -> NuMultiset {
    v.sort_by(|x, y| y.cmp(x));
    let approx = v.clone().map(|q| rational::to_f64(&q));
    NuMultiset {
        signs: SignPattern::of(&v),
        exact: Some(crate::cubic::ExactTriple(v)),
        approx,
        residual: 0.0,
    }
}

fn fmt_e(e: &ElementarySymmetric) -> String {
    format!(
        "P1 = {}, P2 = {}, P3 = {}",
        format_rational(&e.p1),
        format_rational(&e.p2),
        format_rational(&e.p3)
    )
}

/// Constructive trace of which local geometries can share the first four heat
/// invariants with the source. `regime = None` auto-detects.
pub fn classify_isospectral_partners(
    nu: &RicciEigenvalues,
    vol: &PiMultiple,
    regime: Option<RegimeTag>,
) -> Result<PartnerReport> {
    let regime = regime.unwrap_or_else(|| crate::invariants::detect_regime(nu));
    let alpha3 = a3_density(nu, regime)?;
    let geometry = source_geometry(nu, regime)?;
    let e = elementary_symmetric(nu);
    let b = b_invariants(nu, vol);
    let mut trace = Vec::new();
    let mut candidates = Vec::new();
    let step = |rule: &str, basis: Basis, inputs: String, outcome: String| TraceStep {
        rule: rule.into(),
        basis,
        inputs,
        outcome,
    };

    trace.push(step(
        "source",
        Basis::Formula,
        format!("ν = {nu}, vol = {vol}, regime = {}", regime.name()),
        format!("{}; geometry {geometry}", fmt_e(&e)),
    ));
    trace.push(step(
        "b-invariants",
        Basis::Formula,
        "b0 = vol, b1 = P1, b2 = P2, b3 = 30 P3 + (6 P1² P2² - 24 P2³)/P3".into(),
        format!(
            "b = ({}, {}, {}, {})",
            b.b0,
            format_rational(&b.b1),
            format_rational(&b.b2),
            b.b3.as_ref().map_or("undefined".into(), format_rational)
        ),
    ));
    let basis = if alpha3.is_some() { "b0-b3" } else { "b0-b2" };

    // locally symmetric partners
    trace.push(step(
        "constant-curvature-rigidity",
        Basis::Axiom,
        "constant curvature three-manifolds are determined locally by a0, a1, a2".into(),
        "locally symmetric partners must share P1 and P2 with the source".into(),
    ));
    let p1sq = &e.p1 * &e.p1;
    let mut symmetric = Vec::new();
    if int(3) * &e.p2 == p1sq {
        let c = &e.p1 / int(3);
        symmetric.push(([c.clone(), c.clone(), c.clone()], GeometryTag::ConstantCurvature(signum(&c))));
    }
    if int(4) * &e.p2 == p1sq && !e.p1.is_zero() {
        let k = &e.p1 / int(2);
        symmetric.push(([k.clone(), k.clone(), int(0)], GeometryTag::Product(signum(&k))));
    }
    if symmetric.is_empty() {
        trace.push(step(
            "locally-symmetric-candidates",
            Basis::Formula,
            "(c,c,c) needs 3 P2 = P1²; (k,k,0) needs 4 P2 = P1²".into(),
            "no locally symmetric triple matches".into(),
        ));
    }
    for (triple, tag) in symmetric {
        let cand_nu = RicciEigenvalues::new(triple.clone());
        let cand_a3 = closed_form_invariants(&cand_nu).non_deriv_a3_integrand / int(720);
        let mut reasons = Vec::new();
        if let Some(a) = &alpha3 {
            if &cand_a3 != a {
                reasons.push(RejectReason::A3Mismatch);
            }
        }
        trace.push(step(
            "locally-symmetric-candidates",
            Basis::Formula,
            format!("candidate {cand_nu} ({tag}), a3/a0 = {}", format_rational(&cand_a3)),
            if reasons.is_empty() { "confirmed".into() } else { "rejected: a3-mismatch".into() },
        ));
        candidates.push(Candidate {
            kind: CandidateKind::LocallySymmetric,
            p3: elementary_symmetric(&cand_nu).p3,
            nu: Some(exact_multiset(triple)),
            geometry: Some(tag),
            status: if reasons.is_empty() { CandidateStatus::Confirmed } else { CandidateStatus::Rejected },
            reasons,
            basis: basis.into(),
        });
    }

    match &alpha3 {
        Some(alpha3) => {
            let target_b3 = int(23) * &p1sq * &e.p1 - int(72) * &e.p1 * &e.p2 - int(5040) * alpha3;
            if let Some(b3) = &b.b3 {
                debug_assert_eq!(b3, &target_b3);
            }
            let q = e.q_term();
            trace.push(step(
                "p3-candidates",
                Basis::Formula,
                format!(
                    "30 x² - b3 x + Q = 0 with b3 = 23 P1³ - 72 P1 P2 - 7! a3/a0 = {}, Q = {}",
                    format_rational(&target_b3),
                    format_rational(&q)
                ),
                String::new(),
            ));
            let roots = p3_roots(&target_b3, &q)?;
            if let Some(last) = trace.last_mut() {
                let shown: Vec<String> = roots.iter().map(format_rational).collect();
                last.outcome = format!("P3' ∈ {{{}}}", shown.join(", "));
            }
            for p3 in roots {
                candidates.push(unimodular_candidate(&e, p3, &target_b3, &q, &mut trace));
            }
        }
        None => {
            trace.push(step(
                "a3-unavailable",
                Basis::Formula,
                format!("regime {}", regime.name()),
                "only b0, b1, b2 are compared; P3' is not pinned".into(),
            ));
            if e.p2.is_zero() && !e.p1.is_zero() {
                let triple = [e.p1.clone(), int(0), int(0)];
                let cand_nu = RicciEigenvalues::new(triple.clone());
                let tag = GeometryTag::from_match(group_from_ricci(&cand_nu)?);
                trace.push(step(
                    "degenerate-unimodular",
                    Basis::Lemma,
                    "P3 = 0 forces P2 = 0 for unimodular metrics; eigenvalues (P1, 0, 0)".into(),
                    format!("candidate {cand_nu} ({tag}) confirmed on b0-b2"),
                ));
                candidates.push(Candidate {
                    kind: CandidateKind::UnimodularDegenerate,
                    p3: int(0),
                    nu: Some(exact_multiset(triple)),
                    geometry: Some(tag),
                    status: CandidateStatus::Confirmed,
                    reasons: Vec::new(),
                    basis: basis.into(),
                });
            }
            if e.p1.is_negative() {
                trace.push(step(
                    "sl2r-window-boundary",
                    Basis::Lemma,
                    "P2 = 0 with signature (+,-,-) occurs on SL2R_tilde at ν1 = -ν2ν3/(ν2+ν3)".into(),
                    "non-degenerate SL2R_tilde partners are not excluded without a3".into(),
                ));
            }
        }
    }

    let (conclusion, unique_geometry) = conclude(&e, alpha3.is_some(), &candidates);
    trace.push(step(
        "conclusion",
        Basis::Formula,
        format!(
            "{} confirmed candidate(s)",
            candidates.iter().filter(|c| c.is_confirmed()).count()
        ),
        format!(
            "{}{}",
            serde_json::to_value(conclusion).expect("enum").as_str().unwrap_or_default(),
            unique_geometry.as_ref().map_or(String::new(), |g| format!(" ({g})"))
        ),
    ));
    Ok(PartnerReport {
        source: PartnerSource {
            nu: nu.clone(),
            vol: vol.clone(),
            regime,
            geometry,
        },
        b,
        a3_density: alpha3,
        candidates,
        conclusion,
        geometry: unique_geometry,
        trace,
    })
}

fn unimodular_candidate(
    e: &ElementarySymmetric,
    p3: Rational,
    target_b3: &Rational,
    q: &Rational,
    trace: &mut Vec<TraceStep>,
) -> Candidate {
    let ce = ElementarySymmetric::new(e.p1.clone(), e.p2.clone(), p3.clone());
    let mut reasons = Vec::new();
    let mut notes = Vec::new();
    if p3.is_negative() {
        reasons.push(RejectReason::P3Negative);
        notes.push("P3' < 0 but unimodular metrics have P3 ≥ 0".to_string());
    }
    let roots = nu_from_elementary(&CubicSpec::from_elementary(&ce));
    let mut geometry = None;
    let nu = match roots {
        CubicRoots::Complex { discriminant } => {
            reasons.push(RejectReason::NoRealRoots);
            notes.push(format!("discriminant {} < 0", format_rational(&discriminant)));
            None
        }
        CubicRoots::Real(m) => {
            if !m.signs.is_unimodular_ricci() {
                reasons.push(RejectReason::InadmissibleSign);
                notes.push(format!("signature {}", m.signs));
            } else {
                let g = group_from_elementary(&ce).expect("admissible real triple");
                geometry = Some(GeometryTag::from_match(g));
                if in_negative_su2_region(&ce) {
                    let f = polysign_f(&ce);
                    if f.is_positive() {
                        reasons.push(RejectReason::RegionViolation);
                        notes.push(format!("negative-scalar SU2 region but f = {}", format_rational(&f)));
                    }
                }
            }
            Some(m)
        }
    };
    let confirmed = reasons.is_empty();
    if confirmed {
        let b3 = int(30) * &p3 + q / &p3;
        assert_eq!(&b3, target_b3, "confirmed candidate must reproduce b3");
        notes.push(format!("b3' = {} matches", format_rational(&b3)));
    }
    trace.push(TraceStep {
        rule: "unimodular-candidate".into(),
        basis: Basis::Lemma,
        inputs: fmt_e(&ce).to_string(),
        outcome: format!(
            "{}{}: {}",
            if confirmed { "confirmed" } else { "rejected" },
            geometry.as_ref().map_or(String::new(), |g| format!(" ({g})")),
            notes.join("; ")
        ),
    });
    Candidate {
        kind: CandidateKind::Unimodular,
        p3,
        nu,
        geometry,
        status: if confirmed { CandidateStatus::Confirmed } else { CandidateStatus::Rejected },
        reasons,
        basis: "b0-b3".into(),
    }
}

fn multiset_key(m: &Option<NuMultiset>) -> String {
    m.as_ref().map_or_else(String::new, |m| m.describe())
}

fn conclude(
    e: &ElementarySymmetric,
    a3_known: bool,
    candidates: &[Candidate],
) -> (Conclusion, Option<GeometryTag>) {
    if !a3_known {
        return if e.p1.is_positive() {
            (Conclusion::ModelGeometryOnly, Some(GeometryTag::Group(GroupTag::SU2)))
        } else {
            (Conclusion::SignatureOnly, None)
        };
    }
    let mut classes: Vec<(String, Option<GeometryTag>)> = Vec::new();
    for c in candidates.iter().filter(|c| c.is_confirmed()) {
        let key = multiset_key(&c.nu);
        if !classes.iter().any(|(k, _)| *k == key) {
            classes.push((key, c.geometry.clone()));
        }
    }
    match classes.len() {
        1 => (Conclusion::UniqueLocalIsometryClass, classes[0].1.clone()),
        2 if classes[0].1 == classes[1].1 => (Conclusion::TwoClasses, classes[0].1.clone()),
        _ => (Conclusion::SignatureOnly, None),
    }
}
