//! Uniform midpoint quadrature grids.

/// A cell-centred rectangular grid used for midpoint-rule integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadGrid {
    pub center: [f64; 2],
    pub half_extent: [f64; 2],
    pub n: [usize; 2],
}

impl QuadGrid {
    pub fn new(center: [f64; 2], half_extent: [f64; 2], n: [usize; 2]) -> Self {
        Self {
            center,
            half_extent,
            n,
        }
    }

    pub fn square(center: [f64; 2], half_extent: f64, n: usize) -> Self {
        Self::new(center, [half_extent; 2], [n; 2])
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent[0] / self.n[0] as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        2.0 * self.half_extent[1] / self.n[1] as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// x coordinate of column `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.center[0] - self.half_extent[0] + (i as f64 + 0.5) * self.dx()
    }

    /// y coordinate of row `j`.
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.center[1] - self.half_extent[1] + (j as f64 + 0.5) * self.dy()
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_nodes_are_symmetric() {
        let g = QuadGrid::square([0.0, 0.0], 2.0, 4);
        assert_eq!(g.x(0), -1.5);
        assert_eq!(g.x(3), 1.5);
        assert_eq!(g.cell_area(), 1.0);
    }

    #[test]
    fn integrates_gaussian() {
        let g = QuadGrid::square([0.3, -0.2], 9.0, 200);
        let mut s = 0.0;
        for j in 0..200 {
            for i in 0..200 {
                let (x, y) = (g.x(i) - 0.3, g.y(j) + 0.2);
                s += (-(x * x + y * y) / 2.0).exp();
            }
        }
        s *= g.cell_area() / (2.0 * std::f64::consts::PI);
        assert!((s - 1.0).abs() < 1e-12);
    }
}
