//! Parameter registry for the LESS sets and scaled test sets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, GfError};
use crate::seedtree::leaf_count;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("unknown parameter set {0:?}")]
    Unknown(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// LESS parameters; `l` is half the leaf count, so `2l = 2^⌈log t⌉`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LessParams {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub l: usize,
    pub t: usize,
    pub w: usize,
    pub s: usize,
    pub lambda: usize,
}

/// `(name, n, k, q, l, t, w, s, lambda)`.
type Row = (
    &'static str,
    usize,
    usize,
    u32,
    usize,
    usize,
    usize,
    usize,
    usize,
);

const TABLE: &[Row] = &[
    ("less-1b", 252, 126, 127, 128, 247, 30, 2, 128),
    ("less-1i", 252, 126, 127, 128, 244, 20, 4, 128),
    ("less-1s", 252, 126, 127, 128, 198, 17, 8, 128),
    ("less-3b", 400, 200, 127, 512, 759, 33, 2, 192),
    ("less-3s", 400, 200, 127, 512, 895, 26, 3, 192),
    ("less-5b", 548, 274, 127, 1024, 1352, 40, 2, 256),
    ("less-5s", 548, 274, 127, 512, 907, 37, 3, 256),
    ("less-small", 10, 5, 7, 8, 16, 4, 2, 128),
    ("less-small-s4", 10, 5, 7, 8, 16, 4, 4, 128),
];

impl LessParams {
    pub fn by_name(name: &str) -> Result<Self, ParamError> {
        let &(nm, n, k, q, l, t, w, s, lambda) = TABLE
            .iter()
            .find(|row| row.0 == name)
            .ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        Ok(Self {
            name: nm.to_string(),
            n,
            k,
            q,
            l,
            t,
            w,
            s,
            lambda,
        })
    }

    /// The seven full-size sets, in table order.
    pub fn table() -> Vec<Self> {
        TABLE[..7]
            .iter()
            .map(|r| Self::by_name(r.0).expect("registered"))
            .collect()
    }

    pub fn names() -> Vec<&'static str> {
        TABLE.iter().map(|r| r.0).collect()
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        Field::new(self.q)?;
        let bad = |m: &str| Err(ParamError::Invalid(format!("{}: {m}", self.name)));
        if self.k == 0 || self.k >= self.n {
            return bad("need 0 < k < n");
        }
        if self.t == 0 || 2 * self.l != leaf_count(self.t) {
            return bad("2l must equal 2^ceil(log t)");
        }
        if self.w == 0 || self.w > self.t {
            return bad("need 1 <= w <= t");
        }
        if !(2..=256).contains(&self.s) {
            return bad("need 2 <= s <= 256");
        }
        if self.lambda == 0 || !self.lambda.is_multiple_of(8) {
            return bad("lambda must be a positive multiple of 8");
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        Field::new(self.q).expect("validated modulus")
    }

    /// Leaf count `2l`.
    pub fn l2(&self) -> usize {
        2 * self.l
    }

    pub fn seed_bytes(&self) -> usize {
        self.lambda / 8
    }

    pub fn digest_bytes(&self) -> usize {
        self.lambda / 4
    }
}
