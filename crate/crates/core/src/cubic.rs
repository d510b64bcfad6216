//! Monic cubics built from elementary symmetric data.
//!
//! Decisions (discriminant sign, root signs) are made in exact arithmetic;
//! floating-point roots are only an annotation.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::invariants::ElementarySymmetric;
use crate::milnor::{RicciEigenvalues, SignPattern};
use crate::rational::{self, exact_sqrt, frac, int, rationalize, signum, Rational};

/// `x³ + p1 x² + p2 x + p3`, whose roots are `-ν_i` when the triple is real.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubicSpec {
    #[serde(with = "rational::serde_str")]
    pub p1: Rational,
    #[serde(with = "rational::serde_str")]
    pub p2: Rational,
    #[serde(with = "rational::serde_str")]
    pub p3: Rational,
}

impl CubicSpec {
    pub fn new(p1: Rational, p2: Rational, p3: Rational) -> Self {
        CubicSpec { p1, p2, p3 }
    }

    pub fn from_elementary(e: &ElementarySymmetric) -> Self {
        Self::new(e.p1.clone(), e.p2.clone(), e.p3.clone())
    }

    pub fn discriminant(&self) -> Rational {
        discriminant(&self.p1, &self.p2, &self.p3)
    }

    /// Coefficients of the ν polynomial `y³ - p1 y² + p2 y - p3`, leading first.
    pub fn nu_polynomial(&self) -> [Rational; 4] {
        [int(1), -self.p1.clone(), self.p2.clone(), -self.p3.clone()]
    }
}

/// Discriminant of `x³ + b x² + c x + d`.
pub fn discriminant(b: &Rational, c: &Rational, d: &Rational) -> Rational {
    int(18) * b * c * d - int(4) * b * b * b * d + b * b * c * c - int(4) * c * c * c
        - int(27) * d * d
}

fn sign_changes(coeffs: &[Rational]) -> usize {
    let signs: Vec<i8> = coeffs.iter().map(signum).filter(|&s| s != 0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(positive, zero, negative)` root counts with multiplicity for a
/// polynomial whose roots are all real; coefficients leading first.
///
/// Descartes' rule of signs is exact for real-rooted polynomials.
pub fn real_root_sign_counts(coeffs: &[Rational]) -> (usize, usize, usize) {
    let mut c: Vec<Rational> = coeffs.to_vec();
    let mut zero = 0;
    while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
        c.pop();
        zero += 1;
    }
    let degree = c.len() - 1;
    let pos = sign_changes(&c);
    let reflected: Vec<Rational> = c
        .iter()
        .enumerate()
        .map(|(i, a)| if (degree - i) % 2 == 1 { -a.clone() } else { a.clone() })
        .collect();
    (pos, zero, sign_changes(&reflected))
}

/// Monic cubic whose roots are the pair sums `ν_i + ν_j`:
/// `y³ - 2P1 y² + (P1² + P2) y + (P3 - P1P2)`.
pub fn pair_sum_polynomial(e: &ElementarySymmetric) -> [Rational; 4] {
    [
        int(1),
        -int(2) * &e.p1,
        &e.p1 * &e.p1 + &e.p2,
        &e.p3 - &e.p1 * &e.p2,
    ]
}

/// Real roots of a real-rooted multiset of Ricci eigenvalues, sorted in
/// decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuMultiset {
    /// Present when every root is rational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactTriple>,
    pub approx: [f64; 3],
    /// Signs decided exactly, sorted `+` before `0` before `-`.
    #[serde(with = "sign_pattern_str")]
    pub signs: SignPattern,
    /// `max |g(ν_i)| / Σ|coeff_k||ν_i|^k` over the three roots.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactTriple(#[serde(with = "rational::serde_triple")] pub [Rational; 3]);

impl NuMultiset {
    pub fn as_ricci(&self) -> Option<RicciEigenvalues> {
        self.exact.as_ref().map(|t| RicciEigenvalues::new(t.0.clone()))
    }

    pub fn describe(&self) -> String {
        match &self.exact {
            Some(t) => format!("{}", RicciEigenvalues::new(t.0.clone())),
            None => format!(
                "({:.12}, {:.12}, {:.12})",
                self.approx[0], self.approx[1], self.approx[2]
            ),
        }
    }
}

mod sign_pattern_str {
    use super::SignPattern;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &SignPattern, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SignPattern, D::Error> {
        let s = String::deserialize(d)?;
        let inner = s.trim_start_matches('(').trim_end_matches(')');
        let signs: Vec<i8> = inner
            .split(',')
            .map(|c| match c.trim() {
                "+" => Ok(1),
                "0" => Ok(0),
                "-" => Ok(-1),
                other => Err(serde::de::Error::custom(format!("bad sign {other:?}"))),
            })
            .collect::<Result<_, _>>()?;
        if signs.len() != 3 {
            return Err(serde::de::Error::custom("expected three signs"));
        }
        Ok(SignPattern::from_signs([signs[0], signs[1], signs[2]]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CubicRoots {
    Real(NuMultiset),
    Complex {
        #[serde(with = "rational::serde_str")]
        discriminant: Rational,
    },
}

fn eval_f64(coeffs: &[f64; 4], y: f64) -> (f64, f64, f64) {
    let v = ((coeffs[0] * y + coeffs[1]) * y + coeffs[2]) * y + coeffs[3];
    let d = (3.0 * coeffs[0] * y + 2.0 * coeffs[1]) * y + coeffs[2];
    let scale = coeffs[0].abs() * y.abs().powi(3)
        + coeffs[1].abs() * y * y
        + coeffs[2].abs() * y.abs()
        + coeffs[3].abs();
    (v, d, scale)
}

fn eval_exact(coeffs: &[Rational; 4], y: &Rational) -> Rational {
    ((&coeffs[0] * y + &coeffs[1]) * y + &coeffs[2]) * y + &coeffs[3]
}

/// Trigonometric roots of `y³ + a y² + b y + c` with three real roots.
fn trig_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    if p >= 0.0 {
        // p = 0 forces a triple root for a real-rooted cubic
        return [shift; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let tau = 2.0 * std::f64::consts::PI / 3.0;
    [
        m * theta.cos() + shift,
        m * (theta - tau).cos() + shift,
        m * (theta - 2.0 * tau).cos() + shift,
    ]
}

fn sort_desc(v: &mut [Rational; 3]) {
    v.sort_by(|x, y| y.cmp(x));
}

/// Exact roots of the monic cubic `coeffs` when all three are rational.
fn exact_roots(coeffs: &[Rational; 4], disc: &Rational, approx: &[f64; 3]) -> Option<[Rational; 3]> {
    let (a, b, c) = (&coeffs[1], &coeffs[2], &coeffs[3]);
    if disc.is_zero() {
        let shift = a * a - int(3) * b;
        if shift.is_zero() {
            let r = -a / int(3);
            return Some([r.clone(), r.clone(), r]);
        }
        // repeated root of a cubic with zero discriminant
        let double = (int(9) * c - a * b) / (int(2) * &shift);
        let simple = -a - int(2) * &double;
        let mut out = [double.clone(), double, simple];
        sort_desc(&mut out);
        return Some(out);
    }
    let root = approx.iter().find_map(|&y| {
        [1_000_000i64, 1000, 100]
            .into_iter()
            .filter_map(|den| rationalize(y, den))
            .find(|r| eval_exact(coeffs, r).is_zero())
    })?;
    // deflate: y² + (a + r) y + (b + r(a + r))
    let s = a + &root;
    let t = b + &root * &s;
    let d = &s * &s - int(4) * &t;
    let sq = exact_sqrt(&d)?;
    let half = frac(1, 2);
    let mut out = [root, (-&s + &sq) * &half, (-&s - &sq) * &half];
    sort_desc(&mut out);
    Some(out)
}

/// The Ricci multiset with elementary symmetric data `(p1, p2, p3)`, i.e. the
/// negated roots of `x³ + p1 x² + p2 x + p3`, or the (negative) discriminant
/// when two roots are complex.
pub fn nu_from_elementary(spec: &CubicSpec) -> CubicRoots {
    let disc = spec.discriminant();
    if disc.is_negative() {
        return CubicRoots::Complex { discriminant: disc };
    }
    let coeffs = spec.nu_polynomial();
    let (pos, zero, _) = real_root_sign_counts(&coeffs);
    let mut signs = [-1i8; 3];
    for (i, s) in signs.iter_mut().enumerate() {
        if i < pos {
            *s = 1;
        } else if i < pos + zero {
            *s = 0;
        }
    }
    let cf = coeffs.clone().map(|q| rational::to_f64(&q));
    let mut approx = trig_roots(cf[1], cf[2], cf[3]);
    let exact = exact_roots(&coeffs, &disc, &approx);
    match &exact {
        Some(e) => approx = e.clone().map(|q| rational::to_f64(&q)),
        None => {
            for y in approx.iter_mut() {
                let (v, d, scale) = eval_f64(&cf, *y);
                if d.abs() > 1e-9 * scale.max(1e-300) {
                    let polished = *y - v / d;
                    if eval_f64(&cf, polished).0.abs() <= v.abs() {
                        *y = polished;
                    }
                }
            }
            approx.sort_by(|x, y| y.total_cmp(x));
        }
    }
    let residual = approx
        .iter()
        .map(|&y| {
            let (v, _, scale) = eval_f64(&cf, y);
            if scale == 0.0 {
                0.0
            } else {
                v.abs() / scale
            }
        })
        .fold(0.0, f64::max);
    CubicRoots::Real(NuMultiset {
        exact: exact.map(ExactTriple),
        approx,
        signs: SignPattern(signs),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(a: Rational, b: Rational, c: Rational) -> CubicSpec {
        CubicSpec::new(a, b, c)
    }

    fn real(r: CubicRoots) -> NuMultiset {
        match r {
            CubicRoots::Real(m) => m,
            CubicRoots::Complex { discriminant } => panic!("complex, disc {discriminant}"),
        }
    }

    #[test]
    fn perfect_cube() {
        let m = real(nu_from_elementary(&spec(int(6), int(12), int(8))));
        assert_eq!(m.exact.unwrap().0, [int(2), int(2), int(2)]);
        assert_eq!(m.signs, SignPattern([1, 1, 1]));
    }

    #[test]
    fn product_geometry_cubic_has_complex_roots() {
        for k in 1..=3 {
            let k = int(k);
            let s = spec(int(2) * &k, &k * &k, -frac(4, 5) * &k * &k * &k);
            match nu_from_elementary(&s) {
                CubicRoots::Complex { discriminant } => assert!(discriminant.is_negative()),
                other => panic!("expected complex roots, got {other:?}"),
            }
        }
    }

    #[test]
    fn heisenberg_triple() {
        let m = real(nu_from_elementary(&spec(int(-1), int(-1), int(1))));
        assert_eq!(m.exact.unwrap().0, [int(1), int(-1), int(-1)]);
        assert_eq!(m.signs, SignPattern([1, -1, -1]));
    }

    #[test]
    fn irrational_roots_are_approximate() {
        // ν = (1 + √2, 1 - √2, 3): P1 = 5, P2 = 5, P3 = -3
        let m = real(nu_from_elementary(&spec(int(5), int(5), int(-3))));
        assert!(m.exact.is_none());
        assert!(m.residual < 1e-12);
        let s2 = std::f64::consts::SQRT_2;
        for (x, y) in m.approx.iter().zip([3.0, 1.0 + s2, 1.0 - s2]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(m.signs, SignPattern([1, 1, -1]));
    }

    #[test]
    fn descartes_counts() {
        // (y - 1)(y + 2) y
        let c = [int(1), int(1), int(-2), int(0)];
        assert_eq!(real_root_sign_counts(&c), (1, 1, 1));
        // y³
        assert_eq!(real_root_sign_counts(&[int(1), int(0), int(0), int(0)]), (0, 3, 0));
    }

    #[test]
    fn pair_sums() {
        let e = ElementarySymmetric::from_ints(-2, -4, 8);
        let p = pair_sum_polynomial(&e);
        // pair sums of (2,-2,-2): 0, 0, -4
        assert_eq!(real_root_sign_counts(&p), (0, 2, 1));
    }

    fn r() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=6).prop_map(|(p, q)| frac(p, q))
    }

    proptest! {
        #[test]
        fn recovers_rational_triples(a in r(), b in r(), c in r()) {
            let e = ElementarySymmetric::new(&a + &b + &c, &a * &b + &a * &c + &b * &c, &a * &b * &c);
            let m = real(nu_from_elementary(&CubicSpec::from_elementary(&e)));
            let mut want = [a, b, c];
            want.sort_by(|x, y| y.cmp(x));
            prop_assert_eq!(m.signs, SignPattern::of(&want));
            prop_assert_eq!(m.exact.map(|t| t.0), Some(want));
            prop_assert!(m.residual < 1e-12);
        }

        #[test]
        fn discriminant_is_product_of_squared_differences(a in r(), b in r(), c in r()) {
            let e = ElementarySymmetric::new(&a + &b + &c, &a * &b + &a * &c + &b * &c, &a * &b * &c);
            let d = (&a - &b) * (&a - &b) * (&a - &c) * (&a - &c) * (&b - &c) * (&b - &c);
            prop_assert_eq!(CubicSpec::from_elementary(&e).discriminant(), d);
        }
    }
}
