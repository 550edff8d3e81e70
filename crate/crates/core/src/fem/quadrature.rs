//! Symmetric quadrature rules on triangles in barycentric coordinates.

use std::sync::OnceLock;

/// Weights sum to one; multiply by the triangle area.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: u32,
}

impl QuadratureRule {
    /// Three interior points, exact for quadratics.
    pub fn order2() -> &'static Self {
        static RULE: OnceLock<QuadratureRule> = OnceLock::new();
        RULE.get_or_init(|| {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            Self {
                points: vec![[a, b, b], [b, a, b], [b, b, a]],
                weights: vec![1.0 / 3.0; 3],
                degree: 2,
            }
        })
    }

    /// Six-point Dunavant rule, exact for quartics.
    pub fn order4() -> &'static Self {
        static RULE: OnceLock<QuadratureRule> = OnceLock::new();
        RULE.get_or_init(|| {
            let s10 = 10f64.sqrt();
            let root = (38.0 - 44.0 * (2.0f64 / 5.0).sqrt()).sqrt();
            let a1 = (8.0 - s10 + root) / 18.0;
            let a2 = (8.0 - s10 - root) / 18.0;
            let disc = (213125.0 - 53320.0 * s10).sqrt();
            let w1 = (620.0 + disc) / 3720.0;
            let w2 = (620.0 - disc) / 3720.0;
            let mut points = Vec::with_capacity(6);
            let mut weights = Vec::with_capacity(6);
            for (a, w) in [(a1, w1), (a2, w2)] {
                let c = 1.0 - 2.0 * a;
                points.extend([[a, a, c], [a, c, a], [c, a, a]]);
                weights.extend([w; 3]);
            }
            Self {
                points,
                weights,
                degree: 4,
            }
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
