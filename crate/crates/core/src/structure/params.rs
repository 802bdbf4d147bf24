use super::StructureError;

/// Characteristics of the stress: exponent `p`, degeneracy `δ` and the weight
/// `ε` of the optional linear perturbation `S^ε(Q) = εQ + S(Q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructureParams {
    p: f64,
    delta: f64,
    epsilon: f64,
}

impl StructureParams {
    pub fn new(p: f64, delta: f64) -> Result<Self, StructureError> {
        Self::with_epsilon(p, delta, 0.0)
    }

    pub fn with_epsilon(p: f64, delta: f64, epsilon: f64) -> Result<Self, StructureError> {
        if !(p.is_finite() && p > 1.0) {
            return Err(StructureError::InvalidExponent(p));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(StructureError::InvalidDelta(delta));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(StructureError::InvalidEpsilon(epsilon));
        }
        Ok(Self { p, delta, epsilon })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Hölder conjugate `p' = p/(p−1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Same `p`, `ε`, with the degeneracy replaced.
    pub fn with_delta(&self, delta: f64) -> Result<Self, StructureError> {
        Self::with_epsilon(self.p, delta, self.epsilon)
    }

    /// Same `p`, `δ`, with the perturbation weight replaced.
    pub fn perturbed(&self, epsilon: f64) -> Result<Self, StructureError> {
        Self::with_epsilon(self.p, self.delta, epsilon)
    }

    /// `δ = 0` and `p < 2`: `φ''` and `DS` blow up at zero strain.
    pub fn is_degenerate(&self) -> bool {
        self.delta == 0.0 && self.p < 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            StructureParams::new(1.0, 0.0),
            Err(StructureError::InvalidExponent(_))
        ));
        assert!(matches!(
            StructureParams::new(0.9, 0.0),
            Err(StructureError::InvalidExponent(_))
        ));
        assert!(matches!(
            StructureParams::new(1.5, -1e-3),
            Err(StructureError::InvalidDelta(_))
        ));
        assert!(matches!(
            StructureParams::with_epsilon(1.5, 0.0, -1.0),
            Err(StructureError::InvalidEpsilon(_))
        ));
        assert!(StructureParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn conjugate_exponent_is_dual() {
        for &p in &[1.05, 1.2, 1.5, 2.0, 3.7] {
            let s = StructureParams::new(p, 0.0).unwrap();
            let q = s.conjugate_exponent();
            assert!((1.0 / p + 1.0 / q - 1.0).abs() < 4.0 * f64::EPSILON);
        }
    }
}
