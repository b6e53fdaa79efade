//! Monomial and partial monomial matrices in column-centric `(perm, coeffs)` form.
//!
//! Column `j` holds its single nonzero entry `coeffs[j]` at row `perm[j]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FqElem, FqMatrix, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonomialError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad index set: {0}")]
    BadIndexSet(String),
    #[error("perm is not injective into 0..{0}")]
    NotInjective(usize),
    #[error("zero or out-of-range coefficient")]
    BadCoefficient,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// An invertible `n × n` matrix with exactly one nonzero entry per row and column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MonoRepr", into = "MonoRepr")]
pub struct MonomialMatrix {
    field: Field,
    perm: Vec<u32>,
    coeffs: Vec<FqElem>,
}

/// An `n × k` column selection of a monomial matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MonoRepr", into = "MonoRepr")]
pub struct PartialMonomialMatrix {
    field: Field,
    n: usize,
    perm_inj: Vec<u32>,
    coeffs: Vec<FqElem>,
}

#[derive(Serialize, Deserialize)]
struct MonoRepr {
    q: u32,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    perm: Vec<u32>,
    coeffs: Vec<u32>,
}

fn validate(
    field: &Field,
    n: usize,
    perm: &[u32],
    coeffs: &[u32],
) -> Result<Vec<FqElem>, MonomialError> {
    if perm.len() != coeffs.len() {
        return Err(MonomialError::DimensionMismatch(format!(
            "{} perm entries, {} coeffs",
            perm.len(),
            coeffs.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        let p = p as usize;
        if p >= n || seen[p] {
            return Err(MonomialError::NotInjective(n));
        }
        seen[p] = true;
    }
    coeffs
        .iter()
        .map(|&c| {
            if c == 0 || c >= field.q() {
                Err(MonomialError::BadCoefficient)
            } else {
                Ok(c as FqElem)
            }
        })
        .collect()
}

impl TryFrom<MonoRepr> for MonomialMatrix {
    type Error = MonomialError;

    fn try_from(r: MonoRepr) -> Result<Self, Self::Error> {
        let field = Field::new(r.q)?;
        if r.perm.len() != r.n || r.k.is_some_and(|k| k != r.n) {
            return Err(MonomialError::DimensionMismatch(
                "monomial must be square".into(),
            ));
        }
        let coeffs = validate(&field, r.n, &r.perm, &r.coeffs)?;
        Ok(Self {
            field,
            perm: r.perm,
            coeffs,
        })
    }
}

impl From<MonomialMatrix> for MonoRepr {
    fn from(m: MonomialMatrix) -> Self {
        Self {
            q: m.field.q(),
            n: m.perm.len(),
            k: None,
            perm: m.perm,
            coeffs: m.coeffs.into_iter().map(u32::from).collect(),
        }
    }
}

impl TryFrom<MonoRepr> for PartialMonomialMatrix {
    type Error = MonomialError;

    fn try_from(r: MonoRepr) -> Result<Self, Self::Error> {
        let field = Field::new(r.q)?;
        let k =
            r.k.ok_or_else(|| MonomialError::DimensionMismatch("missing k".into()))?;
        if r.perm.len() != k || k >= r.n {
            return Err(MonomialError::DimensionMismatch(format!(
                "k = {k}, n = {}",
                r.n
            )));
        }
        let coeffs = validate(&field, r.n, &r.perm, &r.coeffs)?;
        Ok(Self {
            field,
            n: r.n,
            perm_inj: r.perm,
            coeffs,
        })
    }
}

impl From<PartialMonomialMatrix> for MonoRepr {
    fn from(m: PartialMonomialMatrix) -> Self {
        Self {
            q: m.field.q(),
            n: m.n,
            k: Some(m.perm_inj.len()),
            perm: m.perm_inj,
            coeffs: m.coeffs.into_iter().map(u32::from).collect(),
        }
    }
}

impl MonomialMatrix {
    pub fn new(field: Field, perm: Vec<u32>, coeffs: Vec<FqElem>) -> Result<Self, MonomialError> {
        let n = perm.len();
        let raw: Vec<u32> = coeffs.iter().map(|&c| c as u32).collect();
        let coeffs = validate(&field, n, &perm, &raw)?;
        Ok(Self {
            field,
            perm,
            coeffs,
        })
    }

    pub fn identity(field: Field, n: usize) -> Self {
        Self {
            field,
            perm: (0..n as u32).collect(),
            coeffs: vec![1; n],
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    pub fn to_dense(&self) -> FqMatrix {
        let n = self.n();
        let mut m = FqMatrix::zeros(self.field, n, n);
        for j in 0..n {
            m.set(self.perm[j] as usize, j, self.coeffs[j]);
        }
        m
    }

    /// Canonical bytes: `n` as u32 LE, then `(perm u32 LE, coeff u16 LE)` per column.
    pub fn to_bytes(&self) -> Vec<u8> {
        encode(self.n(), &self.perm, &self.coeffs)
    }
}

fn encode(n: usize, perm: &[u32], coeffs: &[FqElem]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 6 * perm.len());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for (&p, &c) in perm.iter().zip(coeffs) {
        out.extend_from_slice(&p.to_le_bytes());
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

impl PartialMonomialMatrix {
    pub fn new(
        field: Field,
        n: usize,
        perm_inj: Vec<u32>,
        coeffs: Vec<FqElem>,
    ) -> Result<Self, MonomialError> {
        if perm_inj.len() >= n {
            return Err(MonomialError::DimensionMismatch(format!(
                "k = {} must be below n = {n}",
                perm_inj.len()
            )));
        }
        let raw: Vec<u32> = coeffs.iter().map(|&c| c as u32).collect();
        let coeffs = validate(&field, n, &perm_inj, &raw)?;
        Ok(Self {
            field,
            n,
            perm_inj,
            coeffs,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.perm_inj.len()
    }

    pub fn perm_inj(&self) -> &[u32] {
        &self.perm_inj
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    /// Mutable coefficient access for tamper experiments; keeps values nonzero.
    pub fn set_coeff(&mut self, j: usize, v: FqElem) -> Result<(), MonomialError> {
        if v == 0 || v as u32 >= self.field.q() {
            return Err(MonomialError::BadCoefficient);
        }
        self.coeffs[j] = v;
        Ok(())
    }

    /// Rows of the ambient `n` that carry no nonzero entry, ascending.
    pub fn zero_rows(&self) -> Vec<usize> {
        let mut hit = vec![false; self.n];
        for &p in &self.perm_inj {
            hit[p as usize] = true;
        }
        (0..self.n).filter(|&i| !hit[i]).collect()
    }

    pub fn to_dense(&self) -> FqMatrix {
        let mut m = FqMatrix::zeros(self.field, self.n, self.k());
        for j in 0..self.k() {
            m.set(self.perm_inj[j] as usize, j, self.coeffs[j]);
        }
        m
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode(self.n, &self.perm_inj, &self.coeffs)
    }
}

fn check_same(a: &MonomialMatrix, b: &MonomialMatrix) -> Result<(), MonomialError> {
    if a.n() != b.n() || a.field != b.field {
        return Err(MonomialError::DimensionMismatch(format!(
            "{} vs {}",
            a.n(),
            b.n()
        )));
    }
    Ok(())
}

/// Product `a · b`.
pub fn mono_mul(a: &MonomialMatrix, b: &MonomialMatrix) -> Result<MonomialMatrix, MonomialError> {
    check_same(a, b)?;
    let f = a.field;
    let (perm, coeffs) = b
        .perm
        .iter()
        .zip(&b.coeffs)
        .map(|(&bp, &bc)| (a.perm[bp as usize], f.mul(a.coeffs[bp as usize], bc)))
        .unzip();
    Ok(MonomialMatrix {
        field: f,
        perm,
        coeffs,
    })
}

/// Product `a · b` with `b` partial; the result is partial with `b`'s column count.
pub fn mono_mul_partial(
    a: &MonomialMatrix,
    b: &PartialMonomialMatrix,
) -> Result<PartialMonomialMatrix, MonomialError> {
    if a.n() != b.n || a.field != b.field {
        return Err(MonomialError::DimensionMismatch(format!(
            "{} vs {}",
            a.n(),
            b.n
        )));
    }
    let f = a.field;
    let (perm_inj, coeffs) = b
        .perm_inj
        .iter()
        .zip(&b.coeffs)
        .map(|(&bp, &bc)| (a.perm[bp as usize], f.mul(a.coeffs[bp as usize], bc)))
        .unzip();
    Ok(PartialMonomialMatrix {
        field: f,
        n: b.n,
        perm_inj,
        coeffs,
    })
}

pub fn mono_transpose(a: &MonomialMatrix) -> MonomialMatrix {
    let n = a.n();
    let mut perm = vec![0u32; n];
    let mut coeffs = vec![0; n];
    for j in 0..n {
        let p = a.perm[j] as usize;
        perm[p] = j as u32;
        coeffs[p] = a.coeffs[j];
    }
    MonomialMatrix {
        field: a.field,
        perm,
        coeffs,
    }
}

pub fn mono_inverse(a: &MonomialMatrix) -> MonomialMatrix {
    let n = a.n();
    let f = a.field;
    let mut perm = vec![0u32; n];
    let mut coeffs = vec![0; n];
    for j in 0..n {
        let p = a.perm[j] as usize;
        perm[p] = j as u32;
        coeffs[p] = f
            .inv(a.coeffs[j])
            .expect("monomial coefficients are nonzero");
    }
    MonomialMatrix {
        field: f,
        perm,
        coeffs,
    }
}

/// `g · a`: column `j` of the result is `coeffs[j] · g[:, perm[j]]`.
pub fn apply_right(g: &FqMatrix, a: &MonomialMatrix) -> Result<FqMatrix, MonomialError> {
    if g.cols() != a.n() {
        return Err(MonomialError::DimensionMismatch(format!(
            "{} columns against n = {}",
            g.cols(),
            a.n()
        )));
    }
    Ok(scatter(g, &a.perm, &a.coeffs))
}

/// `g · b` for a partial monomial `b`, giving `k` columns.
pub fn apply_right_partial(
    g: &FqMatrix,
    b: &PartialMonomialMatrix,
) -> Result<FqMatrix, MonomialError> {
    if g.cols() != b.n {
        return Err(MonomialError::DimensionMismatch(format!(
            "{} columns against n = {}",
            g.cols(),
            b.n
        )));
    }
    Ok(scatter(g, &b.perm_inj, &b.coeffs))
}

fn scatter(g: &FqMatrix, perm: &[u32], coeffs: &[FqElem]) -> FqMatrix {
    let f = g.field();
    let cols = perm.len();
    let mut data = Vec::with_capacity(g.rows() * cols);
    for r in 0..g.rows() {
        let src = g.row(r);
        data.extend(
            perm.iter()
                .zip(coeffs)
                .map(|(&p, &c)| f.mul(src[p as usize], c)),
        );
    }
    FqMatrix::from_vec(f, g.rows(), cols, data).expect("shape is consistent")
}

/// Restricts `a` to the columns listed in `j_set`, in that order.
pub fn select_columns(
    a: &MonomialMatrix,
    j_set: &[usize],
) -> Result<PartialMonomialMatrix, MonomialError> {
    let n = a.n();
    if j_set.len() >= n {
        return Err(MonomialError::BadIndexSet(format!(
            "{} columns of {n}",
            j_set.len()
        )));
    }
    let mut seen = vec![false; n];
    for &j in j_set {
        if j >= n || seen[j] {
            return Err(MonomialError::BadIndexSet(format!(
                "index {j} repeated or out of range"
            )));
        }
        seen[j] = true;
    }
    Ok(PartialMonomialMatrix {
        field: a.field,
        n,
        perm_inj: j_set.iter().map(|&j| a.perm[j]).collect(),
        coeffs: j_set.iter().map(|&j| a.coeffs[j]).collect(),
    })
}
