//! Laplace spectra of the four compact quotients of `S²_k × E`.
//!
//! Eigenvalues are `F(m, n) = m(m+1)k + (π/v)² n²` subject to a parity rule per
//! family. When `v` is a rational multiple of `π√s` or a plain rational, every
//! eigenvalue has the exact form `a + bπ²` with rational `a`, `b`, and since π
//! is transcendental two such values agree iff both coefficients agree.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeomError, Result};
use crate::invariants::{heat_invariants, PiMultiple, RegimeTag};
use crate::milnor::RicciEigenvalues;
use crate::rational::{self, exact_sqrt, format_rational, int, parse_rational, Rational};

const APPROX_TOL: f64 = 1e-12;

/// Length of the generating translation.
#[derive(Debug, Clone, PartialEq)]
pub enum TranslationLength {
    Rational(Rational),
    /// `π√s`.
    PiSqrt(Rational),
    Float(f64),
}

impl TranslationLength {
    pub fn to_f64(&self) -> f64 {
        match self {
            TranslationLength::Rational(q) => rational::to_f64(q),
            TranslationLength::PiSqrt(s) => PI * rational::to_f64(s).sqrt(),
            TranslationLength::Float(x) => *x,
        }
    }

    pub fn doubled(&self) -> Self {
        match self {
            TranslationLength::Rational(q) => TranslationLength::Rational(q * int(2)),
            TranslationLength::PiSqrt(s) => TranslationLength::PiSqrt(s * int(4)),
            TranslationLength::Float(x) => TranslationLength::Float(2.0 * x),
        }
    }

    fn is_positive(&self) -> bool {
        match self {
            TranslationLength::Rational(q) | TranslationLength::PiSqrt(q) => q.is_positive(),
            TranslationLength::Float(x) => x.is_finite() && *x > 0.0,
        }
    }

    /// `(π/v)²`.
    pub fn circle_coefficient(&self) -> SpectralValue {
        match self {
            TranslationLength::Rational(q) => SpectralValue::exact(Rational::zero(), (q * q).recip()),
            TranslationLength::PiSqrt(s) => SpectralValue::exact(s.recip(), Rational::zero()),
            TranslationLength::Float(x) => SpectralValue::Approx(PI * PI / (x * x)),
        }
    }
}

impl fmt::Display for TranslationLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslationLength::Rational(q) => f.write_str(&format_rational(q)),
            TranslationLength::PiSqrt(s) => match exact_sqrt(s) {
                Some(r) if r == int(1) => f.write_str("pi"),
                Some(r) => write!(f, "{}*pi", format_rational(&r)),
                None if s.numer() == &1.into() => write!(f, "pi/sqrt({})", s.denom()),
                None => write!(f, "pi*sqrt({})", format_rational(s)),
            },
            TranslationLength::Float(x) => write!(f, "~{x}"),
        }
    }
}

impl FromStr for TranslationLength {
    type Err = GeomError;

    /// Accepts `3/2`, `0.25`, `pi`, `2*pi`, `pi*sqrt(2)`, `pi/sqrt(6)`,
    /// `1/2*pi*sqrt(3)` and `~3.7` (floating point).
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || GeomError::InvalidArgument(format!("not a translation length: {s:?}"));
        if let Some(x) = t.strip_prefix('~') {
            return x.parse().map(TranslationLength::Float).map_err(|_| bad());
        }
        let Some(idx) = t.find("pi") else {
            return parse_rational(&t).map(TranslationLength::Rational);
        };
        let coeff = match &t[..idx] {
            "" => int(1),
            c => parse_rational(c.strip_suffix('*').ok_or_else(bad)?)?,
        };
        let radicand = |r: &str| -> Result<Rational> {
            parse_rational(r.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?)
        };
        let s_val = match &t[idx + 2..] {
            "" => int(1),
            rest if rest.starts_with('*') => radicand(&rest[1..])?,
            rest if rest.starts_with('/') => {
                let r = radicand(&rest[1..])?;
                if r.is_zero() {
                    return Err(bad());
                }
                r.recip()
            }
            _ => return Err(bad()),
        };
        Ok(TranslationLength::PiSqrt(&coeff * &coeff * s_val))
    }
}

impl Serialize for TranslationLength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TranslationLength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// An eigenvalue `rational + pi2·π²`, or a floating-point value when `v` was
/// given numerically.
#[derive(Debug, Clone)]
pub enum SpectralValue {
    Exact { rational: Rational, pi2: Rational },
    Approx(f64),
}

impl SpectralValue {
    pub fn exact(rational: Rational, pi2: Rational) -> Self {
        SpectralValue::Exact { rational, pi2 }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            SpectralValue::Exact { rational, pi2 } => {
                rational::to_f64(rational) + rational::to_f64(pi2) * PI * PI
            }
            SpectralValue::Approx(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            SpectralValue::Exact { rational, pi2 } if pi2.is_zero() => Some(rational),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SpectralValue::Exact { rational, pi2 } => rational.is_zero() && pi2.is_zero(),
            SpectralValue::Approx(x) => *x == 0.0,
        }
    }

    fn add_scaled(&self, a: &Rational, other: &SpectralValue, b: &Rational) -> SpectralValue {
        match (self, other) {
            (SpectralValue::Exact { rational: r1, pi2: p1 }, SpectralValue::Exact { rational: r2, pi2: p2 }) => {
                SpectralValue::exact(r1 * a + r2 * b, p1 * a + p2 * b)
            }
            _ => SpectralValue::Approx(
                self.to_f64() * rational::to_f64(a) + other.to_f64() * rational::to_f64(b),
            ),
        }
    }

    /// `self ≤ bound`, exact when `self` is rational.
    pub fn le_rational(&self, bound: &Rational) -> bool {
        match self.as_rational() {
            Some(q) => q <= bound,
            None => self.to_f64() <= rational::to_f64(bound) * (1.0 + APPROX_TOL),
        }
    }
}

impl PartialEq for SpectralValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SpectralValue::Exact { rational: r1, pi2: p1 }, SpectralValue::Exact { rational: r2, pi2: p2 }) => {
                r1 == r2 && p1 == p2
            }
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= APPROX_TOL * a.abs().max(b.abs()).max(1.0)
            }
        }
    }
}

impl SpectralValue {
    /// Total order consistent with `==`.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match self.to_f64().total_cmp(&other.to_f64()) {
            Ordering::Equal => match (self, other) {
                (SpectralValue::Exact { rational: r1, pi2: p1 }, SpectralValue::Exact { rational: r2, pi2: p2 }) => {
                    // a + bπ² vs c + dπ² with equal doubles: decide by the sign of
                    // (a - c) + (b - d)π² using rational bounds on π²
                    let dr = r1 - r2;
                    let dp = p1 - p2;
                    let pi2_lo = Rational::new(98_696_044_010_893i64.into(), 10_000_000_000_000i64.into());
                    let pi2_hi = Rational::new(98_696_044_010_894i64.into(), 10_000_000_000_000i64.into());
                    let lo = &dr + &dp * if dp.is_positive() { &pi2_lo } else { &pi2_hi };
                    if lo.is_positive() { Ordering::Greater } else { Ordering::Less }
                }
                _ => Ordering::Equal,
            },
            o => o,
        }
    }
}

impl fmt::Display for SpectralValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralValue::Exact { rational, pi2 } => {
                let pi_term = match pi2 {
                    p if p == &int(1) => "pi^2".to_string(),
                    p => format!("{}*pi^2", format_rational(p)),
                };
                match (rational.is_zero(), pi2.is_zero()) {
                    (_, true) => f.write_str(&format_rational(rational)),
                    (true, false) => f.write_str(&pi_term),
                    (false, false) => write!(f, "{} + {pi_term}", format_rational(rational)),
                }
            }
            SpectralValue::Approx(x) => write!(f, "~{x}"),
        }
    }
}

impl FromStr for SpectralValue {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GeomError::InvalidArgument(format!("not a spectral value: {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(x) = t.strip_prefix('~') {
            return x.parse().map(SpectralValue::Approx).map_err(|_| bad());
        }
        let (r, p) = match t.find("pi^2") {
            None => (t.as_str(), None),
            Some(idx) => {
                let head = &t[..idx];
                let (r, c) = match head.rfind('+') {
                    Some(plus) if plus > 0 => (&head[..plus], &head[plus + 1..]),
                    _ => ("", head),
                };
                (r, Some(c))
            }
        };
        let rational = if r.is_empty() { Rational::zero() } else { parse_rational(r)? };
        let pi2 = match p {
            None => Rational::zero(),
            Some("") => int(1),
            Some(c) => parse_rational(c.strip_suffix('*').ok_or_else(bad)?)?,
        };
        Ok(SpectralValue::exact(rational, pi2))
    }
}

impl Serialize for SpectralValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpectralValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `M_i(k, v)`: family 1 is `S²×S¹`, 2 the twisted `S¹`-bundle over `RP²`,
/// 3 is `RP³#RP³`, 4 is `RP²×S¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub family: u8,
    #[serde(with = "rational::serde_str")]
    pub k: Rational,
    pub v: TranslationLength,
}

impl QuotientSpec {
    pub fn new(family: u8, k: Rational, v: TranslationLength) -> Result<Self> {
        if !(1..=4).contains(&family) {
            return Err(GeomError::InvalidArgument(format!("family must be 1..4, got {family}")));
        }
        if !k.is_positive() {
            return Err(GeomError::InvalidArgument(format!("k must be positive, got {}", format_rational(&k))));
        }
        if !v.is_positive() {
            return Err(GeomError::InvalidArgument(format!("v must be positive, got {v}")));
        }
        Ok(QuotientSpec { family, k, v })
    }

    pub fn admits(&self, m: u64, n: u64) -> bool {
        match self.family {
            1 => n.is_multiple_of(2),
            2 => m % 2 == n % 2,
            3 => true,
            _ => m.is_multiple_of(2) && n.is_multiple_of(2),
        }
    }

    /// Multiplicity of `F(m, n)` from the pair `(m, n)`, for the product
    /// families 1 and 4.
    pub fn multiplicity(&self, m: u64, n: u64) -> Result<u64> {
        if self.family != 1 && self.family != 4 {
            return Err(GeomError::UnsupportedMultiplicity(self.family));
        }
        Ok((2 * m + 1) * if n == 0 { 1 } else { 2 })
    }

    pub fn ricci(&self) -> RicciEigenvalues {
        RicciEigenvalues::new([self.k.clone(), self.k.clone(), Rational::zero()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<PiMultiple>,
    pub approx: f64,
}

pub fn quotient_volume(spec: &QuotientSpec) -> Volume {
    let factor = if spec.family == 4 { int(2) } else { int(4) };
    let c = &factor / &spec.k;
    let exact = match &spec.v {
        TranslationLength::Rational(q) => Some(PiMultiple::new(&c * q, 1)),
        TranslationLength::PiSqrt(s) => exact_sqrt(s).map(|r| PiMultiple::new(&c * r, 2)),
        TranslationLength::Float(_) => None,
    };
    let approx = exact
        .as_ref()
        .map_or_else(|| rational::to_f64(&c) * PI * spec.v.to_f64(), PiMultiple::to_f64);
    Volume { exact, approx }
}

pub fn eigenvalue_f(m: u64, n: u64, k: &Rational, v: &TranslationLength) -> SpectralValue {
    let sphere = SpectralValue::exact(k.clone(), Rational::zero());
    sphere.add_scaled(&int((m * (m + 1)) as i64), &v.circle_coefficient(), &int((n * n) as i64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// Lexicographically first `(m, n)` realizing the value.
    pub m: u64,
    pub n: u64,
    pub value: SpectralValue,
    pub approx: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPrefix {
    pub spec: QuotientSpec,
    #[serde(with = "rational::serde_str")]
    pub cutoff: Rational,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumPrefix {
    pub fn values(&self) -> impl Iterator<Item = &SpectralValue> {
        self.entries.iter().map(|e| &e.value)
    }

    pub fn contains(&self, x: &SpectralValue) -> bool {
        self.entries
            .binary_search_by(|e| e.value.total_cmp(x))
            .is_ok()
    }

    pub fn is_subset_of(&self, other: &SpectrumPrefix) -> bool {
        self.values().all(|x| other.contains(x))
    }

    pub fn smallest_positive(&self) -> Option<&SpectrumEntry> {
        self.entries.iter().find(|e| !e.value.is_zero())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,eigenvalue,multiplicity\n");
        for e in &self.entries {
            let value = match e.value.as_rational() {
                Some(q) => format_rational(q),
                None => format!("{:.17e}", e.approx),
            };
            let mult = e.multiplicity.map_or(String::new(), |m| m.to_string());
            out.push_str(&format!("{},{},{},{}\n", e.m, e.n, value, mult));
        }
        out
    }
}

/// Every distinct `F(m, n) ≤ cutoff` allowed by the family's parity rule.
/// Complete because `F` increases in both `m` and `n`.
pub fn eigenvalue_set(spec: &QuotientSpec, cutoff: &Rational) -> Result<SpectrumPrefix> {
    if cutoff.is_negative() {
        return Err(GeomError::InvalidArgument("cutoff must be non-negative".into()));
    }
    let mut m_max = 0u64;
    while (&spec.k * int(((m_max + 1) * (m_max + 2)) as i64)) <= *cutoff {
        m_max += 1;
    }
    let with_mult = spec.family == 1 || spec.family == 4;
    let mut raw: Vec<(u64, u64, SpectralValue, u64)> = (0..=m_max)
        .into_par_iter()
        .flat_map_iter(|m| {
            let mut col = Vec::new();
            let mut n = 0u64;
            loop {
                let value = eigenvalue_f(m, n, &spec.k, &spec.v);
                if !value.le_rational(cutoff) {
                    break;
                }
                if spec.admits(m, n) {
                    let mult = if with_mult { spec.multiplicity(m, n).unwrap_or(0) } else { 0 };
                    col.push((m, n, value, mult));
                }
                n += 1;
            }
            col
        })
        .collect();
    raw.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for (m, n, value, mult) in raw {
        match entries.last_mut() {
            Some(last) if last.value == value => {
                if let Some(total) = last.multiplicity.as_mut() {
                    *total += mult;
                }
            }
            _ => entries.push(SpectrumEntry {
                m,
                n,
                approx: value.to_f64(),
                value,
                multiplicity: with_mult.then_some(mult),
            }),
        }
    }
    Ok(SpectrumPrefix { spec: spec.clone(), cutoff: cutoff.clone(), entries })
}

/// First non-zero eigenvalue.
pub fn fundamental_tone(spec: &QuotientSpec) -> Result<SpectrumEntry> {
    let mut cutoff = &spec.k * int(2);
    loop {
        if let Some(e) = eigenvalue_set(spec, &cutoff)?.smallest_positive() {
            return Ok(e.clone());
        }
        cutoff *= int(2);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: SpectralValue,
    pub approx: f64,
    /// Family whose set contains the value; the other one does not.
    pub member_of: u8,
    pub m: u64,
    pub n: u64,
}

/// The special coincidences `π²/v² ∈ {k/2, 2k, 6k}` where the smallest
/// eigenvalues of two sets agree, with the hand-picked distinguishing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceWitness {
    pub condition: String,
    pub value: SpectralValue,
    pub member_of: u8,
    pub absent_from: u8,
    pub m: u64,
    pub n: u64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: [u8; 2],
    pub label: String,
    pub witness: Witness,
    #[serde(with = "rational::serde_str")]
    pub cutoff: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<ResonanceWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctnessReport {
    #[serde(with = "rational::serde_str")]
    pub k: Rational,
    pub v: TranslationLength,
    pub pairs: Vec<PairReport>,
}

/// The equal-volume quotients `M_1(k,v), M_2(k,v), M_3(k,v), M_4(k,2v)`.
pub fn equal_volume_quotients(k: &Rational, v: &TranslationLength) -> Result<[QuotientSpec; 4]> {
    Ok([
        QuotientSpec::new(1, k.clone(), v.clone())?,
        QuotientSpec::new(2, k.clone(), v.clone())?,
        QuotientSpec::new(3, k.clone(), v.clone())?,
        QuotientSpec::new(4, k.clone(), v.doubled())?,
    ])
}

fn label(spec: &QuotientSpec) -> String {
    format!("E{}(k,{}v)", spec.family, if spec.family == 4 { "2" } else { "" })
}

fn smallest_difference(a: &SpectrumPrefix, b: &SpectrumPrefix) -> Option<Witness> {
    let (mut i, mut j) = (0, 0);
    let pick = |e: &SpectrumEntry, fam: u8| Witness {
        value: e.value.clone(),
        approx: e.approx,
        member_of: fam,
        m: e.m,
        n: e.n,
    };
    while i < a.entries.len() && j < b.entries.len() {
        match a.entries[i].value.total_cmp(&b.entries[j].value) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Less => return Some(pick(&a.entries[i], a.spec.family)),
            Ordering::Greater => return Some(pick(&b.entries[j], b.spec.family)),
        }
    }
    // both lists are complete up to the same cutoff
    a.entries
        .get(i)
        .map(|e| pick(e, a.spec.family))
        .or_else(|| b.entries.get(j).map(|e| pick(e, b.spec.family)))
}

fn ceil_rational(x: f64) -> Rational {
    int(x.ceil().max(1.0) as i64)
}

fn resonance(
    k: &Rational,
    v: &TranslationLength,
    sets: &[QuotientSpec; 4],
    pair: (usize, usize),
) -> Result<Option<ResonanceWitness>> {
    let TranslationLength::PiSqrt(s) = v else {
        return Ok(None);
    };
    let ratio = s.recip() / k;
    // (member index, absent index, ratio, m, n in the member's own F, factor)
    let table: [(usize, usize, Rational, u64, u64, &str); 4] = [
        (1, 0, rational::frac(1, 2), 1, 1, "pi^2/v^2 = k/2"),
        (3, 0, int(2), 4, 2, "pi^2/v^2 = 2k"),
        (1, 3, int(6), 5, 1, "pi^2/v^2 = 6k"),
        (2, 3, int(2), 1, 2, "pi^2/v^2 = 2k"),
    ];
    for (member, absent, r, m, n, condition) in table {
        let key = (member.min(absent), member.max(absent));
        if key != pair || ratio != r {
            continue;
        }
        let value = eigenvalue_f(m, n, &sets[member].k, &sets[member].v);
        let bound = value.as_rational().cloned().unwrap_or_else(|| ceil_rational(value.to_f64()));
        let in_member = eigenvalue_set(&sets[member], &bound)?.contains(&value);
        let in_absent = eigenvalue_set(&sets[absent], &bound)?.contains(&value);
        return Ok(Some(ResonanceWitness {
            condition: condition.into(),
            value,
            member_of: sets[member].family,
            absent_from: sets[absent].family,
            m,
            n,
            verified: sets[member].admits(m, n) && in_member && !in_absent,
        }));
    }
    Ok(None)
}

/// For each of the six pairs of equal-volume quotients, the smallest
/// eigenvalue lying in exactly one of the two sets.
pub fn distinctness_report(k: &Rational, v: &TranslationLength) -> Result<DistinctnessReport> {
    let sets = equal_volume_quotients(k, v)?;
    let scale = rational::to_f64(k).max(v.circle_coefficient().to_f64());
    let safety = 1e4 * scale;
    let mut pairs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut cutoff = ceil_rational(8.0 * scale);
            let witness = loop {
                let a = eigenvalue_set(&sets[i], &cutoff)?;
                let b = eigenvalue_set(&sets[j], &cutoff)?;
                if let Some(w) = smallest_difference(&a, &b) {
                    break w;
                }
                if rational::to_f64(&cutoff) > safety {
                    return Err(GeomError::NoWitness {
                        pair: format!("{} vs {}", label(&sets[i]), label(&sets[j])),
                        cutoff: safety,
                    });
                }
                cutoff *= int(2);
            };
            pairs.push(PairReport {
                pair: [sets[i].family, sets[j].family],
                label: format!("{} vs {}", label(&sets[i]), label(&sets[j])),
                witness,
                cutoff,
                resonance: resonance(k, v, &sets, (i, j))?,
            });
        }
    }
    Ok(DistinctnessReport { k: k.clone(), v: v.clone(), pairs })
}

fn check_heat_family(spec: &QuotientSpec) -> Result<()> {
    if spec.family != 1 && spec.family != 4 {
        return Err(GeomError::UnsupportedMultiplicity(spec.family));
    }
    Ok(())
}

/// `Σ mult · exp(-tλ)` over eigenvalues `λ ≤ cutoff`.
pub fn truncated_heat_trace(spec: &QuotientSpec, t: f64, cutoff: f64) -> Result<f64> {
    check_heat_family(spec)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(GeomError::InvalidArgument(format!("t must be positive, got {t}")));
    }
    if cutoff < 40.0 / t {
        return Err(GeomError::InvalidArgument(format!(
            "cutoff {cutoff} is below 40/t = {}",
            40.0 / t
        )));
    }
    let k = rational::to_f64(&spec.k);
    let c = spec.v.circle_coefficient().to_f64();
    let mut sphere = Vec::new();
    let mut m = 0u64;
    while (m * (m + 1)) as f64 * k <= cutoff {
        if spec.admits(m, 0) {
            sphere.push((m, (m * (m + 1)) as f64 * k));
        }
        m += 1;
    }
    let mut total = 0.0;
    // smallest terms first
    for &(m, s) in sphere.iter().rev() {
        let mut col = 0.0;
        let n_max = ((cutoff - s) / c).sqrt().floor() as u64;
        for n in (0..=n_max).rev() {
            if !spec.admits(m, n) {
                continue;
            }
            let lambda = s + c * (n * n) as f64;
            if lambda <= cutoff {
                col += spec.multiplicity(m, n)? as f64 * (-t * lambda).exp();
            }
        }
        total += col;
    }
    Ok(total)
}

/// `(4πt)^{-3/2} (a0 + a1 t + a2 t² + a3 t³)` for the quotient.
pub fn heat_expansion(spec: &QuotientSpec, t: f64) -> Result<f64> {
    let h = heat_invariants(&spec.ricci(), &PiMultiple::rational(int(1)), RegimeTag::LocallySymmetric)?;
    let a3 = h.a3.expect("locally symmetric a3").to_f64();
    let vol = quotient_volume(spec).approx;
    let series = 1.0 + h.a1.to_f64() * t + h.a2.to_f64() * t * t + a3 * t * t * t;
    Ok((4.0 * PI * t).powf(-1.5) * vol * series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceSample {
    pub t: f64,
    pub trace: f64,
    pub expansion: f64,
    pub relative_deviation: f64,
}

pub fn heat_trace_sample(spec: &QuotientSpec, t: f64) -> Result<HeatTraceSample> {
    let trace = truncated_heat_trace(spec, t, 60.0 / t)?;
    let expansion = heat_expansion(spec, t)?;
    Ok(HeatTraceSample {
        t,
        trace,
        expansion,
        relative_deviation: ((trace - expansion) / trace).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub slope: f64,
    pub intercept: f64,
    pub samples: Vec<HeatTraceSample>,
}

/// Least-squares slope of `log(relative deviation)` against `log t` on a
/// log-spaced grid of `points` values in `[t_min, t_max]`.
pub fn convergence_slope(spec: &QuotientSpec, t_min: f64, t_max: f64, points: usize) -> Result<ConvergenceFit> {
    if !(t_min > 0.0 && t_max > t_min && points >= 2) {
        return Err(GeomError::InvalidArgument("need 0 < t_min < t_max and at least two points".into()));
    }
    let ratio = (t_max / t_min).ln() / (points - 1) as f64;
    let samples = (0..points)
        .map(|i| heat_trace_sample(spec, t_min * (ratio * i as f64).exp()))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.relative_deviation.ln()).collect();
    let n = points as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(ConvergenceFit { slope, intercept: my - slope * mx, samples })
}
