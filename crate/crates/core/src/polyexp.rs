//! Sums of terms `c · x^p · e^{−rate·x}`, closed under differentiation and
//! with exact weighted half-line integrals via the Gamma function. Used by
//! the minimiser as the closed-form cross-check route for Gram entries.

/// `Σ cᵢ x^{pᵢ} · e^{−rate·x}` with real powers pᵢ.
#[derive(Debug, Clone)]
pub(crate) struct PolyExp {
    /// (coefficient, power) pairs.
    terms: Vec<(f64, f64)>,
    rate: f64,
}

impl PolyExp {
    /// Single term `x^p e^{−rate x}`.
    pub fn power(p: f64, rate: f64) -> Self {
        Self {
            terms: vec![(1.0, p)],
            rate,
        }
    }

    pub fn derivative(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for &(c, p) in &self.terms {
            if p != 0.0 {
                terms.push((c * p, p - 1.0));
            }
            terms.push((-c * self.rate, p));
        }
        Self {
            terms,
            rate: self.rate,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let e = (-self.rate * x).exp();
        self.terms.iter().map(|&(c, p)| c * x.powf(p) * e).sum()
    }

    /// Exact `∫₀^∞ self·other·x^w dx = Σ cᵢcⱼ Γ(pᵢ+pⱼ+w+1)/(r₁+r₂)^{pᵢ+pⱼ+w+1}`.
    /// Requires every combined power to exceed −1.
    pub fn integral_with(&self, other: &Self, weight_pow: f64) -> f64 {
        let a = self.rate + other.rate;
        let mut total = 0.0;
        for &(ci, pi) in &self.terms {
            for &(cj, pj) in &other.terms {
                let q = pi + pj + weight_pow;
                debug_assert!(q > -1.0, "non-integrable power {q}");
                total += ci * cj * libm::tgamma(q + 1.0) / a.powf(q + 1.0);
            }
        }
        total
    }
}
