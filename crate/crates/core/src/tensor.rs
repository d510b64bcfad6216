//! Frame tensors over a three-dimensional Milnor frame.
//!
//! Every quantity here is computed by brute-force expansion on the frame and
//! never from the symmetric-polynomial closed forms in [`crate::invariants`],
//! so the two can serve as oracles for each other.
//!
//! Conventions: `R(X,Y)Z = ∇_[X,Y]Z - [∇_X, ∇_Y]Z`, so that the sectional
//! curvature of an orthonormal pair is `R(X,Y,X,Y)`; `Ric(Y,Z) = Σ_i R(E_i,Y,E_i,Z)`;
//! in `∇T` the differentiation slot comes first. The frame is orthonormal so
//! upper and lower indices coincide.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::invariants::CurvatureInvariants;
use crate::milnor::MilnorData;
use crate::rational::{self, frac, int, Rational};

pub const MAX_RANK: usize = 5;

/// Dense tensor with `3^rank` frame components, last index fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameTensor {
    rank: usize,
    #[serde(with = "rational::serde_vec")]
    components: Vec<Rational>,
}

fn pow3(r: usize) -> usize {
    3usize.pow(r as u32)
}

impl FrameTensor {
    pub fn zeros(rank: usize) -> Result<Self> {
        if rank > MAX_RANK {
            return Err(GeomError::RankOverflow(rank));
        }
        Ok(FrameTensor {
            rank,
            components: vec![Rational::zero(); pow3(rank)],
        })
    }

    pub fn from_components(rank: usize, components: Vec<Rational>) -> Result<Self> {
        if rank > MAX_RANK {
            return Err(GeomError::RankOverflow(rank));
        }
        if components.len() != pow3(rank) {
            return Err(GeomError::Shape(format!(
                "rank {rank} needs {} components, got {}",
                pow3(rank),
                components.len()
            )));
        }
        Ok(FrameTensor { rank, components })
    }

    /// The metric `δ_ij` as a rank-2 tensor.
    pub fn metric() -> Self {
        let mut g = FrameTensor::zeros(2).expect("rank 2");
        for i in 0..3 {
            *g.at_mut(&[i, i]) = int(1);
        }
        g
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self) -> &[Rational] {
        &self.components
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * 3 + i)
    }

    /// Component at zero-based frame indices.
    pub fn at(&self, idx: &[usize]) -> &Rational {
        &self.components[self.offset(idx)]
    }

    pub fn at_mut(&mut self, idx: &[usize]) -> &mut Rational {
        let o = self.offset(idx);
        &mut self.components[o]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Zero::is_zero)
    }

    /// `|P|² = P_{i...} P^{i...}`.
    pub fn norm2(&self) -> Rational {
        self.components.iter().map(|c| c * c).sum()
    }
}

fn multi_index(mut flat: usize, rank: usize) -> [usize; MAX_RANK + 1] {
    let mut idx = [0usize; MAX_RANK + 1];
    for s in (0..rank).rev() {
        idx[s] = flat % 3;
        flat /= 3;
    }
    idx
}

/// `gamma[i][j][k] = ⟨∇_{E_i} E_j, E_k⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionCoefficients {
    pub gamma: [[[Rational; 3]; 3]; 3],
}

impl ConnectionCoefficients {
    fn zero() -> Self {
        ConnectionCoefficients {
            gamma: std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero()))),
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.gamma[i][j][k]
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// `⟨[E_a, E_b], E_c⟩` from `[E1,E2] = λ3 E3` and its cyclic images.
pub fn bracket_constants(milnor: &MilnorData) -> [[[Rational; 3]; 3]; 3] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| int(levi_civita(a, b, c)) * &milnor.lambda[c])
        })
    })
}

/// Connection in a Milnor frame: `Γ_{σ(1)σ(2)}^{σ(3)} = μ_{σ(1)}` for cyclic σ,
/// negated for the transposed pair, zero otherwise.
pub fn frame_connection(milnor: &MilnorData) -> ConnectionCoefficients {
    let mut conn = ConnectionCoefficients::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0 {
                    conn.gamma[i][j][k] = int(e) * &milnor.mu[i];
                }
            }
        }
    }
    conn
}

/// Koszul formula for an orthonormal frame with constant brackets:
/// `Γ_ijk = (C_ijk - C_jki + C_kij) / 2`.
pub fn koszul_connection(milnor: &MilnorData) -> ConnectionCoefficients {
    let c = bracket_constants(milnor);
    let mut conn = ConnectionCoefficients::zero();
    let half = frac(1, 2);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                conn.gamma[i][j][k] = (&c[i][j][k] - &c[j][k][i] + &c[k][i][j]) * &half;
            }
        }
    }
    conn
}

/// `R(E_a,E_b,E_c,E_e) = ⟨R(E_a,E_b)E_c, E_e⟩` expanded on the frame.
pub fn curvature_tensor_oracle(conn: &ConnectionCoefficients, milnor: &MilnorData) -> FrameTensor {
    let c = bracket_constants(milnor);
    let g = &conn.gamma;
    let mut r = FrameTensor::zeros(4).expect("rank 4");
    for a in 0..3 {
        for b in 0..3 {
            for cc in 0..3 {
                for e in 0..3 {
                    let mut s = Rational::zero();
                    for d in 0..3 {
                        s += &c[a][b][d] * &g[d][cc][e];
                        s -= &g[b][cc][d] * &g[a][d][e];
                        s += &g[a][cc][d] * &g[b][d][e];
                    }
                    *r.at_mut(&[a, b, cc, e]) = s;
                }
            }
        }
    }
    r
}

/// `Ric_jl = Σ_i R_ijil`.
pub fn ricci_tensor(riemann: &FrameTensor) -> Result<FrameTensor> {
    expect_rank(riemann, 4, "Ricci contraction")?;
    let mut ric = FrameTensor::zeros(2)?;
    for j in 0..3 {
        for l in 0..3 {
            *ric.at_mut(&[j, l]) = (0..3).map(|i| riemann.at(&[i, j, i, l]).clone()).sum();
        }
    }
    Ok(ric)
}

/// `(∇T)_{a b1..br} = -Σ_s Σ_c Γ_{a b_s c} T_{b1..c..br}`.
///
/// Components are frame constants, so only connection terms survive.
pub fn covariant_derivative(t: &FrameTensor, conn: &ConnectionCoefficients) -> Result<FrameTensor> {
    let rank = t.rank + 1;
    let mut out = FrameTensor::zeros(rank)?;
    for flat in 0..pow3(rank) {
        let idx = multi_index(flat, rank);
        let a = idx[0];
        let mut s = Rational::zero();
        for slot in 1..rank {
            let b = idx[slot];
            for c in 0..3 {
                let gam = &conn.gamma[a][b][c];
                if gam.is_zero() {
                    continue;
                }
                let mut inner = idx;
                inner[slot] = c;
                s -= gam * t.at(&inner[1..rank]);
            }
        }
        out.components[flat] = s;
    }
    Ok(out)
}

/// Full contractions used by the heat-invariant integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionPattern {
    /// `(P,Q) = P_ijkl Q_ijkl`; any common rank.
    Pair,
    /// `(P,Q,T) = P_ijkl Q_klrs T_rsij`.
    Triple,
    /// `(U;Q,T) = U_rs Q_rjkl T_sjkl`.
    RicPair,
    /// `(U;V;T) = U_ab V_cd T_acbd`, i.e. `T` paired in its sectional slots.
    RicRicR,
    /// `(UVW) = U_ij V_jk W_ki`.
    Trace3,
    /// `|P|²`.
    Norm2,
}

impl ContractionPattern {
    pub fn ranks(self) -> &'static [usize] {
        match self {
            ContractionPattern::Pair => &[4, 4],
            ContractionPattern::Triple => &[4, 4, 4],
            ContractionPattern::RicPair => &[2, 4, 4],
            ContractionPattern::RicRicR => &[2, 2, 4],
            ContractionPattern::Trace3 => &[2, 2, 2],
            ContractionPattern::Norm2 => &[4],
        }
    }
}

fn expect_rank(t: &FrameTensor, rank: usize, what: &str) -> Result<()> {
    if t.rank != rank {
        return Err(GeomError::Shape(format!(
            "{what} expects rank {rank}, got rank {}",
            t.rank
        )));
    }
    Ok(())
}

pub fn contract(pattern: ContractionPattern, tensors: &[&FrameTensor]) -> Result<Rational> {
    let ranks = pattern.ranks();
    if tensors.len() != ranks.len() {
        return Err(GeomError::Shape(format!(
            "{pattern:?} takes {} tensors, got {}",
            ranks.len(),
            tensors.len()
        )));
    }
    match pattern {
        ContractionPattern::Pair => {
            let (p, q) = (tensors[0], tensors[1]);
            if p.rank != q.rank {
                return Err(GeomError::Shape(format!(
                    "pairing ranks {} and {}",
                    p.rank, q.rank
                )));
            }
            return Ok(p.components.iter().zip(&q.components).map(|(x, y)| x * y).sum());
        }
        ContractionPattern::Norm2 => return Ok(tensors[0].norm2()),
        _ => {}
    }
    for (t, &r) in tensors.iter().zip(ranks) {
        expect_rank(t, r, &format!("{pattern:?}"))?;
    }
    let mut s = Rational::zero();
    match pattern {
        ContractionPattern::Triple => {
            let (p, q, t) = (tensors[0], tensors[1], tensors[2]);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            let pijkl = p.at(&[i, j, k, l]);
                            if pijkl.is_zero() {
                                continue;
                            }
                            for r in 0..3 {
                                for ss in 0..3 {
                                    let q_ = q.at(&[k, l, r, ss]);
                                    if q_.is_zero() {
                                        continue;
                                    }
                                    s += pijkl * q_ * t.at(&[r, ss, i, j]);
                                }
                            }
                        }
                    }
                }
            }
        }
        ContractionPattern::RicPair => {
            let (u, q, t) = (tensors[0], tensors[1], tensors[2]);
            for r in 0..3 {
                for ss in 0..3 {
                    let urs = u.at(&[r, ss]);
                    if urs.is_zero() {
                        continue;
                    }
                    for j in 0..3 {
                        for k in 0..3 {
                            for l in 0..3 {
                                s += urs * q.at(&[r, j, k, l]) * t.at(&[ss, j, k, l]);
                            }
                        }
                    }
                }
            }
        }
        ContractionPattern::RicRicR => {
            let (u, v, t) = (tensors[0], tensors[1], tensors[2]);
            for a in 0..3 {
                for b in 0..3 {
                    let uab = u.at(&[a, b]);
                    if uab.is_zero() {
                        continue;
                    }
                    for c in 0..3 {
                        for d in 0..3 {
                            s += uab * v.at(&[c, d]) * t.at(&[a, c, b, d]);
                        }
                    }
                }
            }
        }
        ContractionPattern::Trace3 => {
            let (u, v, w) = (tensors[0], tensors[1], tensors[2]);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        s += u.at(&[i, j]) * v.at(&[j, k]) * w.at(&[k, i]);
                    }
                }
            }
        }
        ContractionPattern::Pair | ContractionPattern::Norm2 => unreachable!(),
    }
    Ok(s)
}

/// Riemann and Ricci tensors of the left-invariant metric with structure
/// constants `milnor.lambda`.
pub fn curvature_pair(milnor: &MilnorData) -> (ConnectionCoefficients, FrameTensor, FrameTensor) {
    let conn = frame_connection(milnor);
    let r = curvature_tensor_oracle(&conn, milnor);
    let ric = ricci_tensor(&r).expect("rank 4");
    (conn, r, ric)
}

/// All non-derivative curvature invariants by explicit contraction.
pub fn oracle_scalar_invariants(milnor: &MilnorData) -> CurvatureInvariants {
    use ContractionPattern::*;
    let (_, r, ric) = curvature_pair(milnor);
    let c = |p: ContractionPattern, ts: &[&FrameTensor]| contract(p, ts).expect("ranks fixed");
    let scal: Rational = (0..3).map(|i| ric.at(&[i, i]).clone()).sum();
    let norm_r2 = c(Norm2, &[&r]);
    let norm_ric2 = ric.norm2();
    let rrr = c(Triple, &[&r, &r, &r]);
    let ric_rr = c(RicPair, &[&ric, &r, &r]);
    let ric_ric_r = c(RicRicR, &[&ric, &ric, &r]);
    let ric_ric_ric = c(Trace3, &[&ric, &ric, &ric]);
    let abar = frac(8, 21) * &rrr - frac(8, 63) * &ric_rr + frac(20, 63) * &ric_ric_r
        - frac(4, 7) * &ric_ric_ric;
    let non_deriv = &abar
        + frac(2, 3) * &scal * (&norm_r2 - &norm_ric2)
        + frac(5, 9) * &scal * &scal * &scal;
    CurvatureInvariants {
        scal,
        norm_r2,
        norm_ric2,
        rrr,
        ric_rr,
        ric_ric_r,
        ric_ric_ric,
        abar,
        non_deriv_a3_integrand: non_deriv,
        norm_nabla_r2: None,
        dbar: None,
    }
}

/// Derivative invariants computed from `∇R` and `∇Ric`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeOracle {
    #[serde(with = "rational::serde_str")]
    pub norm_nabla_r2: Rational,
    #[serde(with = "rational::serde_str")]
    pub norm_nabla_ric2: Rational,
    /// `-|∇R|²/9 - 26|∇Ric|²/63` (Scal is constant).
    #[serde(with = "rational::serde_str")]
    pub dbar: Rational,
    /// `8 Σ (Γ_{ij}^k K_{ik} + Γ_{ik}^j K_{ij})²` over the three frame planes.
    #[serde(with = "rational::serde_str")]
    pub gamma_form: Rational,
}

pub fn oracle_derivative_invariants(milnor: &MilnorData) -> DerivativeOracle {
    let (conn, r, ric) = curvature_pair(milnor);
    let nabla_r = covariant_derivative(&r, &conn).expect("rank 5");
    let nabla_ric = covariant_derivative(&ric, &conn).expect("rank 3");
    let norm_nabla_r2 = nabla_r.norm2();
    let norm_nabla_ric2 = nabla_ric.norm2();
    let dbar = -frac(1, 9) * &norm_nabla_r2 - frac(26, 63) * &norm_nabla_ric2;

    let k = |i: usize, j: usize| r.at(&[i, j, i, j]).clone();
    let g = |i: usize, j: usize, l: usize| conn.get(i, j, l).clone();
    let sq = |x: Rational| &x * &x;
    let gamma_form = int(8)
        * (sq(g(0, 1, 2) * k(0, 2) + g(0, 2, 1) * k(0, 1))
            + sq(g(1, 0, 2) * k(1, 2) + g(1, 2, 0) * k(0, 1))
            + sq(g(2, 0, 1) * k(1, 2) + g(2, 1, 0) * k(0, 2)));

    DerivativeOracle {
        norm_nabla_r2,
        norm_nabla_ric2,
        dbar,
        gamma_form,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn md(l: [i64; 3]) -> MilnorData {
        MilnorData::from_ints(l)
    }

    #[test]
    fn connection_examples() {
        let c = frame_connection(&md([2, 2, 2]));
        assert_eq!(c.get(0, 1, 2), &int(1));
        assert_eq!(c.get(0, 2, 1), &int(-1));
        assert_eq!(c.get(1, 2, 0), &int(1));
        let c = frame_connection(&md([2, 0, 0]));
        assert_eq!(c.get(0, 1, 2), &int(-1));
        assert_eq!(c.get(1, 2, 0), &int(1));
        assert_eq!(c.get(2, 0, 1), &int(1));
        let c = frame_connection(&md([0, 0, 0]));
        assert!(c.gamma.iter().flatten().flatten().all(Zero::is_zero));
    }

    #[test]
    fn connection_structure() {
        let c = frame_connection(&md([1, -2, 5]));
        for i in 0..3 {
            for j in 0..3 {
                assert!(c.get(j, j, i).is_zero());
                for k in 0..3 {
                    assert_eq!(c.get(i, j, k), &-c.get(i, k, j).clone());
                }
            }
        }
    }

    #[test]
    fn sectional_curvatures() {
        let (_, r, _) = curvature_pair(&md([2, 2, 2]));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(r.at(&[i, j, i, j]), &int(1));
        }
        let (_, r, _) = curvature_pair(&md([2, 0, 0]));
        assert_eq!(r.at(&[0, 1, 0, 1]), &int(1));
        assert_eq!(r.at(&[0, 2, 0, 2]), &int(1));
        assert_eq!(r.at(&[1, 2, 1, 2]), &int(-3));
        let (_, r, _) = curvature_pair(&md([0, 0, 0]));
        assert!(r.is_zero());
    }

    #[test]
    fn metric_is_parallel() {
        let conn = frame_connection(&md([1, 2, 3]));
        assert!(covariant_derivative(&FrameTensor::metric(), &conn).unwrap().is_zero());
    }

    #[test]
    fn round_sphere_is_locally_symmetric() {
        let m = md([2, 2, 2]);
        let (conn, r, _) = curvature_pair(&m);
        assert!(covariant_derivative(&r, &conn).unwrap().is_zero());
        let d = oracle_derivative_invariants(&m);
        assert!(d.norm_nabla_r2.is_zero() && d.norm_nabla_ric2.is_zero() && d.dbar.is_zero());
    }

    #[test]
    fn rank_overflow() {
        let t = FrameTensor::zeros(5).unwrap();
        let conn = frame_connection(&md([1, 1, 1]));
        assert_eq!(covariant_derivative(&t, &conn).unwrap_err().code(), "rank-overflow");
        assert!(FrameTensor::zeros(6).is_err());
    }

    #[test]
    fn contraction_examples() {
        let (_, r, ric) = curvature_pair(&md([2, 2, 2]));
        assert_eq!(contract(ContractionPattern::Pair, &[&r, &r]).unwrap(), int(12));
        assert_eq!(
            contract(ContractionPattern::Trace3, &[&ric, &ric, &ric]).unwrap(),
            int(24)
        );
        let z = FrameTensor::zeros(2).unwrap();
        assert!(contract(ContractionPattern::RicRicR, &[&z, &z, &r]).unwrap().is_zero());
    }

    #[test]
    fn contraction_shape_errors() {
        let (_, r, ric) = curvature_pair(&md([2, 2, 2]));
        let e = contract(ContractionPattern::Triple, &[&r, &ric, &r]).unwrap_err();
        assert_eq!(e.code(), "shape-error");
        assert!(contract(ContractionPattern::Pair, &[&r]).is_err());
        assert!(contract(ContractionPattern::Pair, &[&r, &ric]).is_err());
    }

    #[test]
    fn round_sphere_scalars() {
        let inv = oracle_scalar_invariants(&md([2, 2, 2]));
        assert!(inv.abar.is_zero());
        assert_eq!(inv.norm_r2, inv.norm_ric2);
        assert_eq!(inv.non_deriv_a3_integrand, int(120));
        for v in [&inv.rrr, &inv.ric_rr, &inv.ric_ric_r, &inv.ric_ric_ric] {
            assert_eq!(v, &int(24));
        }
        let flat = oracle_scalar_invariants(&md([0, 0, 0]));
        assert!(flat.scal.is_zero() && flat.norm_r2.is_zero() && flat.non_deriv_a3_integrand.is_zero());
    }

    #[test]
    fn heisenberg_derivative_identity() {
        let d = oracle_derivative_invariants(&md([2, 0, 0]));
        assert_eq!(d.norm_nabla_r2, int(4) * &d.norm_nabla_ric2);
        assert_eq!(d.gamma_form, d.norm_nabla_r2);
        assert_eq!(d.norm_nabla_r2, int(256));
    }

    #[test]
    fn gamma_form_matches_contraction() {
        let d = oracle_derivative_invariants(&md([1, 2, 3]));
        assert_eq!(d.gamma_form, d.norm_nabla_r2);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-12i64..=12, 1i64..=4).prop_map(|(p, q)| frac(p, q))
    }

    fn lambda() -> impl Strategy<Value = MilnorData> {
        [small_rational(), small_rational(), small_rational()].prop_map(MilnorData::new)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn koszul_agrees_with_cyclic_pattern(m in lambda()) {
            prop_assert_eq!(koszul_connection(&m), frame_connection(&m));
        }

        #[test]
        fn riemann_symmetries(m in lambda()) {
            let (_, r, _) = curvature_pair(&m);
            for a in 0..3 { for b in 0..3 { for c in 0..3 { for d in 0..3 {
                let x = r.at(&[a, b, c, d]);
                prop_assert_eq!(x, &-r.at(&[b, a, c, d]).clone());
                prop_assert_eq!(x, r.at(&[c, d, a, b]));
                let bianchi = x + r.at(&[b, c, a, d]) + r.at(&[c, a, b, d]);
                prop_assert!(bianchi.is_zero());
            }}}}
        }

        #[test]
        fn ricci_is_diagonal_with_milnor_eigenvalues(m in lambda()) {
            let (_, _, ric) = curvature_pair(&m);
            let nu = m.ricci();
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        prop_assert_eq!(ric.at(&[i, i]), &nu.nu[i]);
                    } else {
                        prop_assert!(ric.at(&[i, j]).is_zero());
                    }
                }
            }
        }

        #[test]
        fn derivative_identities(m in lambda()) {
            let d = oracle_derivative_invariants(&m);
            prop_assert_eq!(&d.norm_nabla_r2, &(int(4) * &d.norm_nabla_ric2));
            prop_assert_eq!(&d.dbar, &(-frac(3, 14) * &d.norm_nabla_r2));
            prop_assert_eq!(&d.gamma_form, &d.norm_nabla_r2);
        }
    }
}
