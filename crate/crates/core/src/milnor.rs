//! Unimodular three-dimensional Lie algebras in a Milnor frame.
//!
//! A left-invariant metric on a unimodular 3D Lie group admits an orthonormal
//! frame with `[E1,E2] = λ3 E3`, `[E2,E3] = λ1 E1`, `[E3,E1] = λ2 E2`. The
//! structure constants λ determine the auxiliary constants
//! `μi = (λ1+λ2+λ3)/2 - λi` and the principal Ricci curvatures
//! `ν1 = 2μ2μ3`, `ν2 = 2μ1μ3`, `ν3 = 2μ1μ2`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::rational::{self, exact_sqrt, format_rational, frac, int, signum, Rational};

/// Structure constants of a unimodular Lie algebra plus the derived μ triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MilnorData {
    #[serde(with = "rational::serde_triple")]
    pub lambda: [Rational; 3],
    #[serde(with = "rational::serde_triple")]
    pub mu: [Rational; 3],
}

impl MilnorData {
    pub fn new(lambda: [Rational; 3]) -> Self {
        let mu = mu_from_lambda(&lambda);
        MilnorData { lambda, mu }
    }

    pub fn from_ints(l: [i64; 3]) -> Self {
        Self::new([int(l[0]), int(l[1]), int(l[2])])
    }

    pub fn ricci(&self) -> RicciEigenvalues {
        ricci_from_mu(&self.mu)
    }

    pub fn group(&self) -> GroupTag {
        group_from_lambda(&self.lambda)
    }

    pub fn negated(&self) -> Self {
        Self::new(self.lambda.clone().map(|l| -l))
    }
}

/// Principal Ricci curvatures, ν_i attached to frame vector E_i.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RicciEigenvalues {
    #[serde(with = "rational::serde_triple")]
    pub nu: [Rational; 3],
}

impl RicciEigenvalues {
    pub fn new(nu: [Rational; 3]) -> Self {
        RicciEigenvalues { nu }
    }

    pub fn from_ints(n: [i64; 3]) -> Self {
        Self::new([int(n[0]), int(n[1]), int(n[2])])
    }

    pub fn signs(&self) -> SignPattern {
        SignPattern::of(&self.nu)
    }

    /// Multiset view: the eigenvalues sorted in decreasing order.
    pub fn sorted_desc(&self) -> [Rational; 3] {
        let mut v = self.nu.clone();
        v.sort_by(|a, b| b.cmp(a));
        v
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        Self::new(self.nu.clone().map(|x| x * c))
    }
}

impl fmt::Display for RicciEigenvalues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            format_rational(&self.nu[0]),
            format_rational(&self.nu[1]),
            format_rational(&self.nu[2])
        )
    }
}

/// The simply connected unimodular three-dimensional Lie groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupTag {
    R3,
    SU2,
    #[serde(rename = "SL2R_tilde")]
    Sl2rTilde,
    Nil,
    Sol,
    /// Universal cover of the Euclidean motion group, R² ⋊ R.
    #[serde(rename = "E2_tilde")]
    E2Tilde,
}

impl GroupTag {
    pub fn name(self) -> &'static str {
        match self {
            GroupTag::R3 => "R3",
            GroupTag::SU2 => "SU2",
            GroupTag::Sl2rTilde => "SL2R_tilde",
            GroupTag::Nil => "Nil",
            GroupTag::Sol => "Sol",
            GroupTag::E2Tilde => "E2_tilde",
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Signs of a triple, sorted `+` before `0` before `-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern(pub [i8; 3]);

impl SignPattern {
    pub fn of(v: &[Rational; 3]) -> Self {
        Self::from_signs([signum(&v[0]), signum(&v[1]), signum(&v[2])])
    }

    pub fn from_signs(mut s: [i8; 3]) -> Self {
        s.sort_by(|a, b| b.cmp(a));
        SignPattern(s)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let pos = self.0.iter().filter(|&&s| s > 0).count();
        let zero = self.0.iter().filter(|&&s| s == 0).count();
        (pos, zero, 3 - pos - zero)
    }

    /// Membership in the set of signatures realized by left-invariant metrics
    /// on unimodular groups: (+,+,+), (+,-,-), (+,0,0), (0,0,-), (0,0,0).
    pub fn is_unimodular_ricci(&self) -> bool {
        matches!(
            self.0,
            [1, 1, 1] | [1, -1, -1] | [1, 0, 0] | [0, 0, -1] | [0, 0, 0]
        )
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |s: i8| match s.cmp(&0) {
            Ordering::Greater => '+',
            Ordering::Equal => '0',
            Ordering::Less => '-',
        };
        write!(f, "({},{},{})", c(self.0[0]), c(self.0[1]), c(self.0[2]))
    }
}

pub fn mu_from_lambda(lambda: &[Rational; 3]) -> [Rational; 3] {
    let half_sum = (&lambda[0] + &lambda[1] + &lambda[2]) * frac(1, 2);
    [
        &half_sum - &lambda[0],
        &half_sum - &lambda[1],
        &half_sum - &lambda[2],
    ]
}

fn ricci_from_mu(mu: &[Rational; 3]) -> RicciEigenvalues {
    let two = int(2);
    RicciEigenvalues::new([
        &two * &mu[1] * &mu[2],
        &two * &mu[0] * &mu[2],
        &two * &mu[0] * &mu[1],
    ])
}

pub fn ricci_from_lambda(lambda: &[Rational; 3]) -> RicciEigenvalues {
    ricci_from_mu(&mu_from_lambda(lambda))
}

/// Principal sectional curvatures `(K12, K13, K23)` with
/// `K_ij = (P1(ν) - 2ν_k) / 2`, k the complementary index.
pub fn sectional_from_ricci(nu: &RicciEigenvalues) -> [Rational; 3] {
    let p1 = &nu.nu[0] + &nu.nu[1] + &nu.nu[2];
    let k = |i: usize| (&p1 - int(2) * &nu.nu[i]) * frac(1, 2);
    [k(2), k(1), k(0)]
}

/// Group identification from the signs of the structure constants, up to
/// permutation and overall negation.
pub fn group_from_lambda(lambda: &[Rational; 3]) -> GroupTag {
    let (mut pos, zero, mut neg) = SignPattern::of(lambda).counts();
    if neg > pos {
        std::mem::swap(&mut pos, &mut neg);
    }
    match (pos, zero, neg) {
        (3, 0, 0) => GroupTag::SU2,
        (2, 0, 1) => GroupTag::Sl2rTilde,
        (2, 1, 0) => GroupTag::E2Tilde,
        (1, 1, 1) => GroupTag::Sol,
        (1, 2, 0) => GroupTag::Nil,
        _ => GroupTag::R3,
    }
}

/// A real number `±√square` with rational `square`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedSqrt {
    pub negative: bool,
    pub square: Rational,
}

impl SignedSqrt {
    pub fn sign(&self) -> i8 {
        if self.square.is_zero() {
            0
        } else if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        exact_sqrt(&self.square).map(|r| if self.negative { -r } else { r })
    }

    pub fn approx(&self) -> f64 {
        let r = rational::to_f64(&self.square).sqrt();
        if self.negative {
            -r
        } else {
            r
        }
    }

    fn negated(&self) -> Self {
        SignedSqrt {
            negative: !self.negative,
            square: self.square.clone(),
        }
    }
}

/// Sign of `a + b` for signed square roots, decided exactly.
fn sum_sign(a: &SignedSqrt, b: &SignedSqrt) -> i8 {
    match (a.sign(), b.sign()) {
        (0, s) | (s, 0) => s,
        (sa, sb) if sa == sb => sa,
        (sa, _) => match a.square.cmp(&b.square) {
            Ordering::Greater => sa,
            Ordering::Less => -sa,
            Ordering::Equal => 0,
        },
    }
}

/// One sign branch of the μ triple recovered from non-degenerate Ricci data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MilnorRecovery {
    pub mu: [SignedSqrt; 3],
}

impl MilnorRecovery {
    pub fn lambda_signs(&self) -> [i8; 3] {
        [
            sum_sign(&self.mu[1], &self.mu[2]),
            sum_sign(&self.mu[0], &self.mu[2]),
            sum_sign(&self.mu[0], &self.mu[1]),
        ]
    }

    /// λ_i = μ_j + μ_k when every |μ_i| is rational.
    pub fn lambda_exact(&self) -> Option<MilnorData> {
        let m0 = self.mu[0].exact()?;
        let m1 = self.mu[1].exact()?;
        let m2 = self.mu[2].exact()?;
        Some(MilnorData::new([&m1 + &m2, &m0 + &m2, &m0 + &m1]))
    }

    pub fn lambda_approx(&self) -> [f64; 3] {
        let m = [self.mu[0].approx(), self.mu[1].approx(), self.mu[2].approx()];
        [m[1] + m[2], m[0] + m[2], m[0] + m[1]]
    }

    pub fn group(&self) -> GroupTag {
        let s = self.lambda_signs();
        group_from_lambda(&[int(s[0] as i64), int(s[1] as i64), int(s[2] as i64)])
    }

    pub fn negated(&self) -> Self {
        MilnorRecovery {
            mu: self.mu.clone().map(|m| m.negated()),
        }
    }
}

/// Result of inverting `λ ↦ ν`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RicciInversion {
    /// Non-degenerate ν: exactly the pair ±λ, one isometry class.
    Isolated {
        plus: MilnorRecovery,
        minus: MilnorRecovery,
    },
    /// Exactly one non-zero ν_i: μ_i = 0 and μ_j μ_k = ν_i / 2, a
    /// one-parameter family of structure constants.
    Degenerate {
        vanishing_mu: usize,
        mu_product: Rational,
    },
    /// ν = 0: at most one μ is non-zero (R³ or a flat metric on E2~).
    Flat,
}

pub fn lambda_from_ricci(nu: &RicciEigenvalues) -> Result<RicciInversion> {
    let pattern = nu.signs();
    if !pattern.is_unimodular_ricci() {
        return Err(GeomError::NotRealizable(format!("{nu} with signature {pattern}")));
    }
    let n = &nu.nu;
    match pattern.counts() {
        (_, 3, _) => Ok(RicciInversion::Flat),
        (_, 2, _) => {
            let i = (0..3).find(|&i| !n[i].is_zero()).expect("one non-zero entry");
            Ok(RicciInversion::Degenerate {
                vanishing_mu: i,
                mu_product: &n[i] * frac(1, 2),
            })
        }
        _ => {
            // |μ_i|² = ν_j ν_k / (2 ν_i) for each cyclic (i, j, k)
            let sq = |i: usize, j: usize, k: usize| &n[j] * &n[k] / (int(2) * &n[i]);
            let signs = [1i8, signum(&n[2]), signum(&n[1])];
            let plus = MilnorRecovery {
                mu: [
                    SignedSqrt { negative: signs[0] < 0, square: sq(0, 1, 2) },
                    SignedSqrt { negative: signs[1] < 0, square: sq(1, 2, 0) },
                    SignedSqrt { negative: signs[2] < 0, square: sq(2, 0, 1) },
                ],
            };
            let minus = plus.negated();
            Ok(RicciInversion::Isolated { plus, minus })
        }
    }
}

/// Outcome of identifying the group from Ricci eigenvalues alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "groups", rename_all = "kebab-case")]
pub enum GroupMatch {
    Unique(GroupTag),
    /// ν does not pin the group: degenerate signature (0,0,-) is realized on
    /// both Sol and SL2R~.
    Ambiguous(Vec<GroupTag>),
}

impl GroupMatch {
    pub fn contains(&self, tag: GroupTag) -> bool {
        match self {
            GroupMatch::Unique(t) => *t == tag,
            GroupMatch::Ambiguous(ts) => ts.contains(&tag),
        }
    }

    pub fn unique(&self) -> Option<GroupTag> {
        match self {
            GroupMatch::Unique(t) => Some(*t),
            GroupMatch::Ambiguous(_) => None,
        }
    }
}

/// Group from Ricci eigenvalues.
///
/// For signature (+,-,-) normalized to `ν1 > 0 > ν2 ≥ ν3`:
/// SU2 iff `ν1 > |ν3|`; SL2R~ iff `ν1 < |ν2|` or `|ν2| < ν1 < |ν3|`;
/// Sol iff `ν1 = |ν2| < |ν3|`; E2~ iff `ν1 = |ν3| > |ν2|`; Nil iff all
/// three absolute values agree.
pub fn group_from_ricci(nu: &RicciEigenvalues) -> Result<GroupMatch> {
    let pattern = nu.signs();
    if !pattern.is_unimodular_ricci() {
        return Err(GeomError::NotRealizable(format!("{nu} with signature {pattern}")));
    }
    let tag = match pattern.0 {
        [1, 1, 1] | [1, 0, 0] => GroupTag::SU2,
        [0, 0, 0] => GroupTag::R3,
        [0, 0, -1] => {
            return Ok(GroupMatch::Ambiguous(vec![GroupTag::Sol, GroupTag::Sl2rTilde]));
        }
        _ => {
            // (+,-,-)
            let s = nu.sorted_desc();
            let nu1 = &s[0];
            let small = s[1].abs();
            let large = s[2].abs();
            match (nu1.cmp(&small), nu1.cmp(&large)) {
                (_, Ordering::Greater) => GroupTag::SU2,
                (Ordering::Less, _) => GroupTag::Sl2rTilde,
                (Ordering::Equal, Ordering::Equal) => GroupTag::Nil,
                (Ordering::Equal, _) => GroupTag::Sol,
                (Ordering::Greater, Ordering::Equal) => GroupTag::E2Tilde,
                (Ordering::Greater, Ordering::Less) => GroupTag::Sl2rTilde,
            }
        }
    };
    Ok(GroupMatch::Unique(tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: i64, b: i64, c: i64) -> [Rational; 3] {
        [int(a), int(b), int(c)]
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_from_lambda(&t(2, 2, 2)), t(1, 1, 1));
        assert_eq!(mu_from_lambda(&t(2, 0, 0)), t(-1, 1, 1));
        assert_eq!(mu_from_lambda(&t(1, 2, 3)), t(2, 1, 0));
    }

    #[test]
    fn ricci_examples() {
        assert_eq!(ricci_from_lambda(&t(2, 2, 2)).nu, t(2, 2, 2));
        assert_eq!(ricci_from_lambda(&t(2, 0, 0)).nu, t(2, -2, -2));
        // Sol with a = √2, b = 1: λ = (2a², -2b², 0)
        let nu = ricci_from_lambda(&t(4, -2, 0));
        assert_eq!(nu.nu, t(6, -6, -18));
        assert_eq!(&nu.nu[0] + &nu.nu[1] + &nu.nu[2], int(-18));
    }

    #[test]
    fn sectional_examples() {
        let k = int(5);
        let nu = RicciEigenvalues::new([k.clone(), k.clone(), int(0)]);
        assert_eq!(sectional_from_ricci(&nu), [k, int(0), int(0)]);
        assert_eq!(
            sectional_from_ricci(&RicciEigenvalues::from_ints([2, 2, 2])),
            t(1, 1, 1)
        );
        assert_eq!(
            sectional_from_ricci(&RicciEigenvalues::from_ints([2, -2, -2])),
            t(1, 1, -3)
        );
    }

    #[test]
    fn group_from_lambda_examples() {
        assert_eq!(group_from_lambda(&t(2, 2, 2)), GroupTag::SU2);
        assert_eq!(group_from_lambda(&t(2, 0, 0)), GroupTag::Nil);
        assert_eq!(group_from_lambda(&t(4, -2, 0)), GroupTag::Sol);
        assert_eq!(group_from_lambda(&t(-1, -1, 2)), GroupTag::Sl2rTilde);
        assert_eq!(group_from_lambda(&t(0, -3, -3)), GroupTag::E2Tilde);
        assert_eq!(group_from_lambda(&t(0, 0, 0)), GroupTag::R3);
    }

    #[test]
    fn inversion_examples() {
        for (nu, lambda) in [([2, 2, 2], [2, 2, 2]), ([2, -2, -2], [2, 0, 0])] {
            let inv = lambda_from_ricci(&RicciEigenvalues::from_ints(nu)).unwrap();
            let RicciInversion::Isolated { plus, minus } = inv else {
                panic!("expected isolated inversion");
            };
            let a = plus.lambda_exact().unwrap().lambda;
            let b = minus.lambda_exact().unwrap().lambda;
            let target = t(lambda[0], lambda[1], lambda[2]);
            let negated = target.clone().map(|x| -x);
            assert!(
                (a == target && b == negated) || (a == negated && b == target),
                "{a:?} {b:?}"
            );
        }
    }

    #[test]
    fn inversion_rejects_product_signature() {
        let nu = RicciEigenvalues::from_ints([3, 3, 0]);
        assert_eq!(lambda_from_ricci(&nu).unwrap_err().code(), "not-realizable");
        assert_eq!(group_from_ricci(&nu).unwrap_err().code(), "not-realizable");
    }

    #[test]
    fn degenerate_inversions() {
        assert_eq!(
            lambda_from_ricci(&RicciEigenvalues::from_ints([0, 0, 0])).unwrap(),
            RicciInversion::Flat
        );
        assert_eq!(
            lambda_from_ricci(&RicciEigenvalues::from_ints([0, -4, 0])).unwrap(),
            RicciInversion::Degenerate { vanishing_mu: 1, mu_product: int(-2) }
        );
    }

    #[test]
    fn group_from_ricci_examples() {
        let g = |n: [i64; 3]| group_from_ricci(&RicciEigenvalues::from_ints(n)).unwrap();
        assert_eq!(g([3, -1, -2]), GroupMatch::Unique(GroupTag::SU2));
        assert_eq!(g([2, -2, -2]), GroupMatch::Unique(GroupTag::Nil));
        assert_eq!(g([6, -6, -18]), GroupMatch::Unique(GroupTag::Sol));
        assert_eq!(g([-18, 6, -6]), GroupMatch::Unique(GroupTag::Sol));
        assert_eq!(g([5, -3, -5]), GroupMatch::Unique(GroupTag::E2Tilde));
        assert_eq!(g([1, -2, -3]), GroupMatch::Unique(GroupTag::Sl2rTilde));
        assert_eq!(g([2, -1, -3]), GroupMatch::Unique(GroupTag::Sl2rTilde));
        assert_eq!(g([1, 0, 0]), GroupMatch::Unique(GroupTag::SU2));
        assert_eq!(g([0, 0, 0]), GroupMatch::Unique(GroupTag::R3));
        assert!(g([0, 0, -1]).contains(GroupTag::Sol));
        assert!(g([0, 0, -1]).contains(GroupTag::Sl2rTilde));
    }

    #[test]
    fn sign_patterns() {
        assert_eq!(SignPattern::of(&t(-2, 0, 3)).to_string(), "(+,0,-)");
        assert!(SignPattern::of(&t(-2, 3, -1)).is_unimodular_ricci());
        assert!(!SignPattern::of(&t(1, 1, 0)).is_unimodular_ricci());
    }
}
