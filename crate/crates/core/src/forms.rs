//! Left-invariant 2- and 3-forms, the Hodge star on 2-forms and the
//! self-dual / anti-self-dual splitting.
//!
//! Coefficients are always stored on the monomials `e^{ij}` (`i < j`) in
//! lexicographic order `12, 13, 14, 23, 24, 34`, and 3-forms on
//! `123, 124, 134, 234`. A 2-form `F` evaluates as `F(e_i, e_j) = a_ij`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lie_algebra::LieAlgebra;
use crate::linalg::{self, Mat4};
use crate::scalar::{exact_sqrt, zero, Rational, Scalar};

/// Index pairs `(i, j)`, `i < j`, in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// JSON and expression names of the six coefficients.
pub const COEFF_NAMES: [&str; 6] = ["a12", "a13", "a14", "a23", "a24", "a34"];

/// Index triples `(i, j, k)`, `i < j < k`, in storage order.
pub const TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];

pub fn pair_index(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return None;
    }
    let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    PAIRS.iter().position(|&p| p == (a, b)).map(|k| (k, s))
}

/// Sign of the permutation `(i, j, k, l)` of `(0, 1, 2, 3)`, zero on repeats.
pub fn levi_civita_symbol(idx: [usize; 4]) -> i32 {
    for a in 0..4 {
        for b in a + 1..4 {
            if idx[a] == idx[b] {
                return 0;
            }
        }
    }
    let mut inversions = 0;
    for a in 0..4 {
        for b in a + 1..4 {
            if idx[a] > idx[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwoForm<T = f64> {
    pub a: [T; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThreeForm<T = f64> {
    pub a: [T; 4],
}

impl<T: Scalar> TwoForm<T> {
    pub fn new(a: [T; 6]) -> Self {
        Self { a }
    }

    pub fn zero() -> Self {
        Self {
            a: std::array::from_fn(|_| zero()),
        }
    }

    /// The monomial `e^{ij}` (1-based indices as printed, `i != j`).
    pub fn monomial(i: usize, j: usize) -> Self {
        let mut f = Self::zero();
        f.set(i - 1, j - 1, T::one());
        f
    }

    /// Value `F(e_i, e_j)` for 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> T {
        match pair_index(i, j) {
            Some((k, s)) if s > 0.0 => self.a[k].clone(),
            Some((k, _)) => -self.a[k].clone(),
            None => zero(),
        }
    }

    /// Sets `F(e_i, e_j) = v` (and therefore `F(e_j, e_i) = -v`).
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        if let Some((k, s)) = pair_index(i, j) {
            self.a[k] = if s > 0.0 { v } else { -v };
        }
    }

    /// Antisymmetric matrix `F_ij`.
    pub fn to_matrix(&self) -> Mat4<T> {
        linalg::mat4_from_fn(|i, j| self.get(i, j))
    }

    /// Upper-triangle part of a matrix, read as a 2-form.
    pub fn from_matrix(m: &Mat4<T>) -> Self {
        Self {
            a: PAIRS.map(|(i, j)| m[i][j].clone()),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            a: self.a.clone().map(|x| x * s.clone()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            a: std::array::from_fn(|k| self.a[k].clone() + other.a[k].clone()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            a: std::array::from_fn(|k| self.a[k].clone() - other.a[k].clone()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Coefficient of `e^{1234}` in `self ∧ other`.
    pub fn wedge(&self, other: &Self) -> T {
        let (p, q) = (&self.a, &other.a);
        p[0].clone() * q[5].clone() - p[1].clone() * q[4].clone()
            + p[2].clone() * q[3].clone()
            + p[3].clone() * q[2].clone()
            - p[4].clone() * q[1].clone()
            + p[5].clone() * q[0].clone()
    }

    /// `self ∧ beta` for a 1-form `beta`.
    pub fn wedge_one(&self, beta: &[T; 4]) -> ThreeForm<T> {
        ThreeForm {
            a: TRIPLES.map(|(k, l, m)| {
                self.get(k, l) * beta[m].clone() - self.get(k, m) * beta[l].clone() + self.get(l, m) * beta[k].clone()
            }),
        }
    }
}

impl<T: Scalar> ThreeForm<T> {
    pub fn zero() -> Self {
        Self {
            a: std::array::from_fn(|_| zero()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            a: std::array::from_fn(|k| self.a[k].clone() + other.a[k].clone()),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            a: self.a.clone().map(|x| x * s.clone()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Fully antisymmetric evaluation `w(e_i, e_j, e_k)`, 0-based.
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        let mut idx = [i, j, k];
        let mut sign = 1;
        for a in 0..3 {
            for b in 0..2 - a {
                if idx[b] == idx[b + 1] {
                    return zero();
                }
                if idx[b] > idx[b + 1] {
                    idx.swap(b, b + 1);
                    sign = -sign;
                }
            }
        }
        let pos = TRIPLES.iter().position(|&t| t == (idx[0], idx[1], idx[2]));
        match pos {
            Some(p) if sign > 0 => self.a[p].clone(),
            Some(p) => -self.a[p].clone(),
            None => zero(),
        }
    }
}

/// Orientation relative to the reference volume `e^1 ∧ e^2 ∧ e^3 ∧ e^4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Orientation::Positive),
            -1 => Ok(Orientation::Negative),
            other => Err(Error::Invalid(format!("orientation must be +1 or -1, got {other}"))),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

impl Serialize for Orientation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for Orientation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Orientation::from_sign(v).map_err(serde::de::Error::custom)
    }
}

/// `F^{ij}` with both indices raised by `g^{-1}`.
fn raise_both<T: Scalar>(g_inv: &Mat4<T>, f: &TwoForm<T>) -> Mat4<T> {
    let fm = f.to_matrix();
    linalg::mat_mul(&linalg::mat_mul(g_inv, &fm), g_inv)
}

/// Star without the `sign * sqrt(det g)` volume factor.
fn star_unscaled<T: Scalar>(g_inv: &Mat4<T>, f: &TwoForm<T>) -> TwoForm<T> {
    let up = raise_both(g_inv, f);
    TwoForm {
        a: PAIRS.map(|(k, l)| {
            PAIRS
                .iter()
                .fold(zero::<T>(), |acc, &(i, j)| match levi_civita_symbol([i, j, k, l]) {
                    0 => acc,
                    1 => acc + up[i][j].clone(),
                    _ => acc - up[i][j].clone(),
                })
        }),
    }
}

/// Hodge star on 2-forms, characterised by `F ∧ ⋆G = <F, G>_g vol_g` with
/// `vol_g = sign * sqrt(det g) e^{1234}`.
pub fn hodge_star(g: &Mat4<f64>, o: Orientation, f: &TwoForm<f64>) -> Result<TwoForm<f64>> {
    let d = linalg::det(g);
    if !(d > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
    Ok(star_unscaled(&g_inv, f).scale(&(o.sign() * d.sqrt())))
}

/// A 2-form times a single square root: `sqrt(radicand) * form`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledTwoForm {
    pub form: TwoForm<Rational>,
    pub radicand: Rational,
}

impl ScaledTwoForm {
    pub fn to_f64(&self) -> TwoForm<f64> {
        let s = self.radicand.to_f64().sqrt();
        TwoForm {
            a: self.form.a.clone().map(|x| x.to_f64() * s),
        }
    }

    pub fn is_rational(&self) -> bool {
        num_traits::One::is_one(&self.radicand)
    }
}

/// Exact Hodge star for rational metrics and forms. The result is rational
/// when `det g` is a perfect square, and otherwise carries `sqrt(det g)` as
/// a single tracked radical.
pub fn hodge_star_exact(g: &Mat4<Rational>, o: Orientation, f: &TwoForm<Rational>) -> Result<ScaledTwoForm> {
    let d = linalg::det(g);
    if d <= Rational::from_integer(0.into()) {
        return Err(Error::NotPositiveDefinite);
    }
    let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
    let mut form = star_unscaled(&g_inv, f);
    if o == Orientation::Negative {
        form = form.scale(&Rational::from_integer((-1).into()));
    }
    Ok(match exact_sqrt(&d) {
        Some(root) => ScaledTwoForm {
            form: form.scale(&root),
            radicand: Rational::from_integer(1.into()),
        },
        None => ScaledTwoForm { form, radicand: d },
    })
}

/// `<F, G>_g = 1/2 F_ij G^ij`.
pub fn inner_product<T: Scalar>(g: &Mat4<T>, f: &TwoForm<T>, h: &TwoForm<T>) -> Result<T> {
    let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
    Ok(inner_product_with_inverse(&g_inv, f, h))
}

pub(crate) fn inner_product_with_inverse<T: Scalar>(g_inv: &Mat4<T>, f: &TwoForm<T>, h: &TwoForm<T>) -> T {
    let up = raise_both(g_inv, h);
    PAIRS
        .iter()
        .fold(zero(), |acc: T, &(i, j)| acc + f.get(i, j) * up[i][j].clone())
}

pub fn norm_sq<T: Scalar>(g: &Mat4<T>, f: &TwoForm<T>) -> Result<T> {
    inner_product(g, f, f)
}

/// `(F+, F-)` with `F± = (F ± ⋆F) / 2`.
pub fn sd_asd_split(g: &Mat4<f64>, o: Orientation, f: &TwoForm<f64>) -> Result<(TwoForm<f64>, TwoForm<f64>)> {
    let star = hodge_star(g, o, f)?;
    let plus = f.add(&star).scale(&0.5);
    let minus = f.sub(&star).scale(&0.5);
    Ok((plus, minus))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoclosedCheck {
    pub holds: bool,
    pub max_abs: f64,
    pub residual: ThreeForm<f64>,
}

/// Evaluates `d⋆F` and compares its largest coefficient with `tol`.
pub fn is_coclosed(
    alg: &LieAlgebra<f64>,
    g: &Mat4<f64>,
    o: Orientation,
    f: &TwoForm<f64>,
    tol: f64,
) -> Result<CoclosedCheck> {
    let star = hodge_star(g, o, f)?;
    let residual = alg.d_two_form(&star);
    let max_abs = residual.max_abs();
    Ok(CoclosedCheck {
        holds: max_abs <= tol,
        max_abs,
        residual,
    })
}

/// Exact co-closedness: `d⋆F = sqrt(det g) d(R)` with rational `R`, so the
/// test reduces to `dR = 0`.
pub fn is_coclosed_exact(
    alg: &LieAlgebra<Rational>,
    g: &Mat4<Rational>,
    o: Orientation,
    f: &TwoForm<Rational>,
) -> Result<bool> {
    let star = hodge_star_exact(g, o, f)?;
    let d = alg.d_two_form(&star.form);
    Ok(d.a.iter().all(|x| x.is_negligible()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::scalar::ratio;

    fn diag(d: [f64; 4]) -> Mat4<f64> {
        linalg::mat4_from_fn(|i, j| if i == j { d[i] } else { 0.0 })
    }

    fn close(a: &TwoForm<f64>, b: &TwoForm<f64>, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn euclidean_star_on_monomials() {
        let g = identity::<f64>();
        let o = Orientation::Positive;
        let s = |i, j| hodge_star(&g, o, &TwoForm::monomial(i, j)).unwrap();
        assert_eq!(s(1, 2), TwoForm::monomial(3, 4));
        assert_eq!(s(1, 3), TwoForm::monomial(2, 4).scale(&-1.0));
        assert_eq!(s(1, 4), TwoForm::monomial(2, 3));
    }

    #[test]
    fn star_of_e12_scales_with_a5() {
        let g = diag([1.0, 1.0, 2.0, 1.0]);
        let s = hodge_star(&g, Orientation::Positive, &TwoForm::monomial(1, 2)).unwrap();
        let expected = TwoForm::monomial(3, 4).scale(&2f64.sqrt());
        assert!(close(&s, &expected, 1e-15));
    }

    #[test]
    fn reversed_orientation_negates_star() {
        let g = diag([1.0, 3.0, 2.0, 0.5]);
        let f = TwoForm::new([0.3, -1.0, 2.0, 0.5, 0.1, -0.7]);
        let p = hodge_star(&g, Orientation::Positive, &f).unwrap();
        let m = hodge_star(&g, Orientation::Negative, &f).unwrap();
        assert!(close(&p, &m.scale(&-1.0), 1e-15));
    }

    #[test]
    fn split_of_2a2_family_form() {
        let (a5, a12, a34) = (2.0f64, 1.0, 3f64.sqrt());
        let g = diag([1.0, 1.0, a5, 1.0]);
        let mut f = TwoForm::zero();
        f.a[0] = a12;
        f.a[5] = a34;
        let (p, m) = sd_asd_split(&g, Orientation::Positive, &f).unwrap();
        let sa = a5.sqrt();
        let want = |s: f64| {
            let mut w = TwoForm::zero();
            w.a[0] = 0.5 * (s * a34 / sa + a12);
            w.a[5] = 0.5 * (s * sa * a12 + a34);
            w
        };
        assert!(close(&p, &want(1.0), 1e-14));
        assert!(close(&m, &want(-1.0), 1e-14));
    }

    #[test]
    fn self_dual_combination_splits_trivially() {
        let g = identity::<f64>();
        let f = TwoForm::monomial(1, 2).add(&TwoForm::monomial(3, 4));
        let (p, m) = sd_asd_split(&g, Orientation::Positive, &f).unwrap();
        assert!(close(&p, &f, 1e-15));
        assert!(m.max_abs() <= 1e-15);
    }

    #[test]
    fn a46_family_self_dual_part() {
        let g = identity::<f64>();
        let (a14, a23) = (0.7, 1.9);
        let f = TwoForm::new([0.0, 0.0, a14, a23, 0.0, 0.0]);
        let (p, _) = sd_asd_split(&g, Orientation::Positive, &f).unwrap();
        let h = 0.5 * (a14 + a23);
        assert!(close(&p, &TwoForm::new([0.0, 0.0, h, h, 0.0, 0.0]), 1e-15));
    }

    #[test]
    fn inner_products() {
        let id = identity::<f64>();
        let e12 = TwoForm::monomial(1, 2);
        let e34 = TwoForm::monomial(3, 4);
        assert_eq!(inner_product(&id, &e12, &e12).unwrap(), 1.0);
        assert_eq!(inner_product(&id, &e12, &e34).unwrap(), 0.0);
        let g = diag([1.0, 1.0, 2.0, 1.0]);
        assert!((norm_sq(&g, &e34).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_star_tracks_single_radical() {
        let g: Mat4<Rational> = linalg::mat4_from_fn(|i, j| {
            if i != j {
                ratio(0, 1)
            } else if i == 2 {
                ratio(2, 1)
            } else {
                ratio(1, 1)
            }
        });
        let s = hodge_star_exact(&g, Orientation::Positive, &TwoForm::monomial(1, 2)).unwrap();
        assert_eq!(s.radicand, ratio(2, 1));
        assert_eq!(s.form, TwoForm::monomial(3, 4));
        let g4: Mat4<Rational> = linalg::mat4_from_fn(|i, j| {
            if i != j {
                ratio(0, 1)
            } else if i == 2 {
                ratio(4, 1)
            } else {
                ratio(1, 1)
            }
        });
        let s4 = hodge_star_exact(&g4, Orientation::Positive, &TwoForm::monomial(1, 2)).unwrap();
        assert!(s4.is_rational());
        assert_eq!(s4.form, TwoForm::monomial(3, 4).scale(&ratio(2, 1)));
    }

    #[test]
    fn levi_civita_symbol_signs() {
        assert_eq!(levi_civita_symbol([0, 1, 2, 3]), 1);
        assert_eq!(levi_civita_symbol([1, 0, 2, 3]), -1);
        assert_eq!(levi_civita_symbol([2, 3, 0, 1]), 1);
        assert_eq!(levi_civita_symbol([0, 0, 2, 3]), 0);
    }

    #[test]
    fn three_form_evaluation_is_antisymmetric() {
        let w = ThreeForm {
            a: [1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(w.get(0, 1, 2), 1.0);
        assert_eq!(w.get(1, 0, 2), -1.0);
        assert_eq!(w.get(2, 0, 1), 1.0);
        assert_eq!(w.get(3, 2, 1), -4.0);
        assert_eq!(w.get(1, 1, 2), 0.0);
    }
}
