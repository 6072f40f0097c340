use std::fmt;

use crate::error::{Error, Result};
use crate::matkernel::{phi_matrix, phi_scalar, DenseMatrix, MAX_PHI_ORDER};

/// One term `weight · φ_order(−scale·τA)` of a coefficient function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiTerm {
    pub scale: f64,
    pub order: usize,
    pub weight: f64,
}

impl PhiTerm {
    pub fn new(scale: f64, order: usize, weight: f64) -> Self {
        Self {
            scale,
            order,
            weight,
        }
    }
}

/// A coefficient `a_ij` or `b_i` as a linear combination of φ-functions.
///
/// Each term carries its own argument scale, so `φ₁(−τA) − 2φ₂(−½τA)` is a
/// single combination. The empty combination is the zero coefficient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhiCombo {
    terms: Vec<PhiTerm>,
}

impl PhiCombo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(terms: Vec<PhiTerm>) -> Self {
        Self { terms }
    }

    /// Single-term shorthand.
    pub fn term(scale: f64, order: usize, weight: f64) -> Self {
        Self::new(vec![PhiTerm::new(scale, order, weight)])
    }

    pub fn plus(mut self, scale: f64, order: usize, weight: f64) -> Self {
        self.terms.push(PhiTerm::new(scale, order, weight));
        self
    }

    pub fn terms(&self) -> &[PhiTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.weight == 0.0)
    }

    /// Value at scalar argument `z` (standing for `−τλ`).
    pub fn eval_scalar(&self, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * phi_scalar(t.order, t.scale * z))
            .sum()
    }

    /// Value at a matrix argument `Z`.
    pub fn eval_matrix(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        let n = z.require_square("coefficient evaluation")?;
        let mut acc = DenseMatrix::zeros(n, n);
        for t in &self.terms {
            if t.weight == 0.0 {
                continue;
            }
            let p = phi_matrix(t.order, &z.scaled(t.scale))?;
            acc.axpy(t.weight, &p);
        }
        Ok(acc)
    }

    fn validate(&self, what: &str) -> Result<()> {
        for t in &self.terms {
            if !(t.weight.is_finite() && t.scale.is_finite()) {
                return Err(Error::param(format!("{what}: non-finite term")));
            }
            if !(0.0..=1.0).contains(&t.scale) {
                return Err(Error::param(format!(
                    "{what}: scale {} outside [0, 1]",
                    t.scale
                )));
            }
            if t.order > MAX_PHI_ORDER {
                return Err(Error::param(format!(
                    "{what}: phi order {} exceeds {MAX_PHI_ORDER}",
                    t.order
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PhiCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "scale:{} phi:{} w:{}", t.scale, t.order, t.weight)?;
        }
        Ok(())
    }
}

/// How condition 5 (the only one a built-in scheme satisfies weakly) is met.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition5Claim {
    None,
    Weak,
    Strong,
}

/// Order conditions a tableau claims to satisfy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderClaim {
    /// Conditions (1..=4) claimed in strong form.
    pub strong: Vec<u8>,
    pub condition5: Condition5Claim,
}

impl OrderClaim {
    /// Claims implied by a stiff order: 1 → {1}, 2 → {1,2,3}, 3 → {1..4} + weak 5.
    pub fn for_order(order: u8) -> Self {
        match order {
            0 => Self {
                strong: vec![],
                condition5: Condition5Claim::None,
            },
            1 => Self {
                strong: vec![1],
                condition5: Condition5Claim::None,
            },
            2 => Self {
                strong: vec![1, 2, 3],
                condition5: Condition5Claim::None,
            },
            _ => Self {
                strong: vec![1, 2, 3, 4],
                condition5: Condition5Claim::Weak,
            },
        }
    }
}

/// Explicit exponential Runge–Kutta tableau.
///
/// Stage `i` has node `c[i]` and coefficients `a[i][0..i]`; stage 0 has
/// `c = 0` and no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpRKTableau {
    name: String,
    c: Vec<f64>,
    a: Vec<Vec<PhiCombo>>,
    b: Vec<PhiCombo>,
    order: u8,
}

impl ExpRKTableau {
    /// Validates and assembles a tableau. `a[i]` must have exactly `i` entries.
    pub fn new(
        name: impl Into<String>,
        c: Vec<f64>,
        a: Vec<Vec<PhiCombo>>,
        b: Vec<PhiCombo>,
        order: u8,
    ) -> Result<Self> {
        let s = c.len();
        if s == 0 {
            return Err(Error::param("tableau needs at least one stage"));
        }
        if c[0] != 0.0 {
            return Err(Error::param(format!("first node must be 0, got {}", c[0])));
        }
        if let Some(&ci) = c.iter().find(|ci| !(0.0..=1.0).contains(*ci)) {
            return Err(Error::param(format!("node {ci} outside [0, 1]")));
        }
        if a.len() != s || b.len() != s {
            return Err(Error::param(format!(
                "{s} nodes but {} coefficient rows and {} weights",
                a.len(),
                b.len()
            )));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != i {
                return Err(Error::param(format!(
                    "stage {} must have {i} coefficients (explicit), got {}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, combo) in row.iter().enumerate() {
                combo.validate(&format!("a[{}][{}]", i + 1, j + 1))?;
            }
        }
        for (i, combo) in b.iter().enumerate() {
            combo.validate(&format!("b[{}]", i + 1))?;
        }
        Ok(Self {
            name: name.into(),
            c,
            a,
            b,
            order,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `a_ij` with 0-based `j < i`.
    pub fn a(&self, i: usize, j: usize) -> &PhiCombo {
        &self.a[i][j]
    }

    pub fn a_row(&self, i: usize) -> &[PhiCombo] {
        &self.a[i]
    }

    pub fn b(&self, i: usize) -> &PhiCombo {
        &self.b[i]
    }

    pub fn b_all(&self) -> &[PhiCombo] {
        &self.b
    }

    /// Nominal stiff order.
    pub fn order(&self) -> u8 {
        self.order
    }

    /// Same coefficients with a different nominal order (and hence claims).
    pub fn with_order(mut self, order: u8) -> Self {
        self.order = order;
        self
    }

    pub fn claims(&self) -> OrderClaim {
        OrderClaim::for_order(self.order)
    }

    /// Every coefficient with its label, `a` rows first.
    pub fn coefficients(&self) -> impl Iterator<Item = &PhiCombo> {
        self.a.iter().flatten().chain(self.b.iter())
    }
}
