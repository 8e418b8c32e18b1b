//! Multivariate polynomials as explicit coefficient tables.
//!
//! Fields and gauges are stored this way so that exterior derivatives are
//! exact and the polynomial degree needed for exact quadrature is known.

/// One term `coeff · x₁^p₁ ⋯ x_d^p_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Self {
        for t in &terms {
            assert_eq!(t.powers.len(), dim, "monomial arity must match dim");
        }
        Polynomial { dim, terms }
    }

    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: vec![] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero(dim);
        }
        Polynomial {
            dim,
            terms: vec![Monomial {
                powers: vec![0; dim],
                coeff: c,
            }],
        }
    }

    /// The coordinate monomial `c · x_axis`.
    pub fn linear(dim: usize, axis: usize, c: f64) -> Self {
        let mut powers = vec![0; dim];
        powers[axis] = 1;
        Polynomial {
            dim,
            terms: vec![Monomial { powers, coeff: c }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.powers.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coeff;
            for (xi, &p) in x.iter().zip(&t.powers) {
                v *= xi.powi(p as i32);
            }
            acc += v;
        }
        acc
    }

    pub fn partial(&self, axis: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[axis] > 0)
            .map(|t| {
                let mut powers = t.powers.clone();
                let p = powers[axis];
                powers[axis] = p - 1;
                Monomial {
                    powers,
                    coeff: t.coeff * p as f64,
                }
            })
            .collect();
        Polynomial {
            dim: self.dim,
            terms,
        }
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|k| self.partial(k)).collect()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        for t in &other.terms {
            if let Some(existing) = terms.iter_mut().find(|e| e.powers == t.powers) {
                existing.coeff += t.coeff;
            } else {
                terms.push(t.clone());
            }
        }
        terms.retain(|t| t.coeff != 0.0);
        Polynomial {
            dim: self.dim,
            terms,
        }
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial {
                    powers: t.powers.clone(),
                    coeff: t.coeff * c,
                })
                .collect(),
        }
    }

    /// Substitute `x ↦ −x` on one axis and negate nothing else:
    /// each term picks up `(−1)^power` on that axis.
    pub fn reflect_axis(&self, axis: usize) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Monomial {
                    powers: t.powers.clone(),
                    coeff: if t.powers[axis] % 2 == 1 {
                        -t.coeff
                    } else {
                        t.coeff
                    },
                })
                .collect(),
        }
    }
}
