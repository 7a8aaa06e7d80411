//! Four-dimensional Lie algebras given by structure constants, and the
//! Chevalley-Eilenberg differential on left-invariant forms.
//!
//! Convention: `[e_i, e_j] = Σ_k c^k_ij e_k`, and for invariant 1-forms
//! `(dα)(x, y) = -α([x, y])`, extended to 2-forms by the graded Leibniz
//! rule. All operations are generic over [`Scalar`] and exact for
//! rational structure constants.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::forms::{ThreeForm, TwoForm, PAIRS};
use crate::linalg;
use crate::scalar::{zero, Rational, Scalar};

pub type StructureConstants<T> = [[[T; 4]; 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra<T = f64> {
    pub name: String,
    /// `c[i][j][k] = c^k_ij`, antisymmetric in `(i, j)`.
    c: StructureConstants<T>,
    pub params: BTreeMap<String, T>,
}

impl<T: Scalar> LieAlgebra<T> {
    /// Builds an algebra from brackets `[e_i, e_j] += v e_k` given with
    /// 1-based indices, as they are printed in structure equations.
    /// Antisymmetry is imposed here: each entry also writes `c^k_ji = -v`.
    pub fn from_brackets(name: &str, brackets: &[(usize, usize, usize, T)]) -> Result<Self> {
        let mut c: StructureConstants<T> =
            std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| zero())));
        for (i, j, k, v) in brackets {
            let (i, j, k) = (*i, *j, *k);
            if !(1..=4).contains(&i) || !(1..=4).contains(&j) || !(1..=4).contains(&k) {
                return Err(Error::Invalid(format!(
                    "bracket index out of range in [e{i},e{j}] -> e{k}"
                )));
            }
            if i == j {
                return Err(Error::Invalid(format!("bracket [e{i},e{i}] must vanish")));
            }
            let (i, j, k) = (i - 1, j - 1, k - 1);
            c[i][j][k] = c[i][j][k].clone() + v.clone();
            c[j][i][k] = c[j][i][k].clone() - v.clone();
        }
        Ok(Self {
            name: name.to_string(),
            c,
            params: BTreeMap::new(),
        })
    }

    pub fn abelian() -> Self {
        Self::from_brackets("4A1", &[]).expect("no brackets")
    }

    pub fn with_params(mut self, params: BTreeMap<String, T>) -> Self {
        self.params = params;
        self
    }

    /// `c^k_ij`, 0-based.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &T {
        &self.c[i][j][k]
    }

    pub fn constants(&self) -> &StructureConstants<T> {
        &self.c
    }

    pub fn bracket(&self, x: &[T; 4], y: &[T; 4]) -> [T; 4] {
        std::array::from_fn(|k| {
            let mut acc = zero::<T>();
            for i in 0..4 {
                if x[i].is_zero() {
                    continue;
                }
                for j in 0..4 {
                    if y[j].is_zero() || self.c[i][j][k].is_zero() {
                        continue;
                    }
                    acc = acc + x[i].clone() * y[j].clone() * self.c[i][j][k].clone();
                }
            }
            acc
        })
    }

    /// `[e_i, e_j]` as a coefficient vector, 0-based.
    pub fn bracket_basis(&self, i: usize, j: usize) -> [T; 4] {
        std::array::from_fn(|k| self.c[i][j][k].clone())
    }

    /// Largest absolute value of the Jacobi expression over `i < j < k`
    /// and all output components `l`.
    pub fn jacobi_defect(&self) -> T {
        let c = &self.c;
        let mut worst = zero::<T>();
        for i in 0..4 {
            for j in i + 1..4 {
                for k in j + 1..4 {
                    for l in 0..4 {
                        let mut s = zero::<T>();
                        for m in 0..4 {
                            s = s
                                + c[i][j][m].clone() * c[m][k][l].clone()
                                + c[j][k][m].clone() * c[m][i][l].clone()
                                + c[k][i][m].clone() * c[m][j][l].clone();
                        }
                        let s = s.abs();
                        if s > worst {
                            worst = s;
                        }
                    }
                }
            }
        }
        worst
    }

    /// `trace(ad_{e_i}) = Σ_k c^k_ik`.
    pub fn ad_trace(&self, i: usize) -> T {
        (0..4).fold(zero(), |acc: T, k| acc + self.c[i][k][k].clone())
    }

    pub fn is_unimodular(&self) -> bool {
        (0..4).all(|i| self.ad_trace(i).is_negligible())
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().flatten().flatten().all(|x| x.is_zero())
    }

    /// `dα` for an invariant 1-form with coefficients `α_k` on `e^k`.
    pub fn d_one_form(&self, alpha: &[T; 4]) -> TwoForm<T> {
        TwoForm {
            a: PAIRS.map(|(j, k)| -(0..4).fold(zero::<T>(), |acc, m| acc + alpha[m].clone() * self.c[j][k][m].clone())),
        }
    }

    /// `de^i` for the dual basis covector `e^i` (0-based).
    pub fn d_basis(&self, i: usize) -> TwoForm<T> {
        let mut alpha: [T; 4] = std::array::from_fn(|_| zero());
        alpha[i] = T::one();
        self.d_one_form(&alpha)
    }

    /// `dF` by the Leibniz rule `d(e^i ∧ e^j) = de^i ∧ e^j - e^i ∧ de^j`.
    pub fn d_two_form(&self, f: &TwoForm<T>) -> ThreeForm<T> {
        let de: [TwoForm<T>; 4] = std::array::from_fn(|i| self.d_basis(i));
        let mut out = ThreeForm::zero();
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            if f.a[p].is_zero() {
                continue;
            }
            let mut ej: [T; 4] = std::array::from_fn(|_| zero());
            ej[j] = T::one();
            let mut ei: [T; 4] = std::array::from_fn(|_| zero());
            ei[i] = T::one();
            // de^i ∧ e^j - e^i ∧ de^j, and e^i ∧ de^j = de^j ∧ e^i
            let term = de[i].wedge_one(&ej).add(&de[j].wedge_one(&ei).scale(&-T::one()));
            out = out.add(&term.scale(&f.a[p]));
        }
        out
    }

    /// Linear system `dF = 0` in the six coefficients of `F`.
    pub fn closedness_constraints(&self) -> ClosednessSystem<T> {
        let columns: Vec<ThreeForm<T>> = (0..6)
            .map(|p| {
                let mut f = TwoForm::zero();
                f.a[p] = T::one();
                self.d_two_form(&f)
            })
            .collect();
        let matrix: Vec<Vec<T>> = (0..4)
            .map(|r| columns.iter().map(|col| col.a[r].clone()).collect())
            .collect();
        let kernel = linalg::null_space(&matrix, 6)
            .into_iter()
            .map(|v| TwoForm {
                a: std::array::from_fn(|k| v[k].clone()),
            })
            .collect();
        ClosednessSystem { matrix, kernel }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LieAlgebra<U> {
        LieAlgebra {
            name: self.name.clone(),
            c: std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(&self.c[i][j][k])))),
            params: self.params.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }

    pub fn to_f64(&self) -> LieAlgebra<f64> {
        self.map(|x| x.to_f64())
    }
}

impl LieAlgebra<Rational> {
    /// Exact check that the constants define a Lie algebra.
    pub fn is_lie_algebra(&self) -> bool {
        num_traits::Zero::is_zero(&self.jacobi_defect())
    }
}

/// Coefficient matrix of `dF = 0` (4 rows, one per `e^{jkl}`) and a basis
/// of its solution space.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosednessSystem<T> {
    pub matrix: Vec<Vec<T>>,
    pub kernel: Vec<TwoForm<T>>,
}

impl<T: Scalar> ClosednessSystem<T> {
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// `true` when `F` satisfies every row.
    pub fn admits(&self, f: &TwoForm<T>) -> bool {
        self.matrix.iter().all(|row| {
            row.iter()
                .zip(&f.a)
                .fold(zero::<T>(), |acc, (r, x)| acc + r.clone() * x.clone())
                .is_negligible()
        })
    }
}
