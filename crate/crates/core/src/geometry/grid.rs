use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use super::GeometryError;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Interior,
    Boundary,
    Outside,
}

/// Uniform isotropic grid over a rectangular index box with a domain mask.
///
/// Nodes are stored with the first index running fastest. For `n = 1` the
/// second extent is 1. A node is interior when every node of its `3ⁿ`
/// stencil block lies in the domain, so the mixed second difference never
/// reaches outside; the remaining domain nodes are boundary nodes.
#[derive(Clone, Debug, Serialize)]
pub struct GraphGrid<T> {
    n: usize,
    spacing: T,
    origin: [T; 2],
    shape: [usize; 2],
    kinds: Vec<NodeKind>,
    #[serde(skip)]
    interior: Vec<usize>,
    #[serde(skip)]
    boundary: Vec<usize>,
}

impl<T: Real> GraphGrid<T> {
    /// Builds the mask from a domain predicate on index pairs.
    pub fn from_predicate(
        n: usize,
        spacing: T,
        origin: [T; 2],
        shape: [usize; 2],
        inside: impl Fn(usize, usize) -> bool,
    ) -> Result<Self, GeometryError> {
        if !(n == 1 || n == 2) {
            return Err(GeometryError::InvalidGrid(format!(
                "grid dimension must be 1 or 2, got {n}"
            )));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(GeometryError::InvalidGrid("spacing must be positive".into()));
        }
        let shape = if n == 1 { [shape[0], 1] } else { shape };
        if shape[0] < 3 || (n == 2 && shape[1] < 3) {
            return Err(GeometryError::InvalidGrid(
                "grid needs at least 3 nodes per axis".into(),
            ));
        }
        let [nx, ny] = shape;
        let dom: Vec<bool> = (0..nx * ny).map(|k| inside(k % nx, k / nx)).collect();
        let mut kinds = vec![NodeKind::Outside; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if !dom[k] {
                    continue;
                }
                let inner_i = i > 0 && i + 1 < nx;
                let inner_j = n == 1 || (j > 0 && j + 1 < ny);
                let block = inner_i
                    && inner_j
                    && if n == 1 {
                        dom[k - 1] && dom[k + 1]
                    } else {
                        (j - 1..=j + 1).all(|jj| (i - 1..=i + 1).all(|ii| dom[jj * nx + ii]))
                    };
                kinds[k] = if block { NodeKind::Interior } else { NodeKind::Boundary };
            }
        }
        let interior: Vec<usize> = (0..kinds.len())
            .filter(|&k| kinds[k] == NodeKind::Interior)
            .collect();
        let boundary: Vec<usize> = (0..kinds.len())
            .filter(|&k| kinds[k] == NodeKind::Boundary)
            .collect();
        if interior.is_empty() {
            return Err(GeometryError::InvalidGrid("no interior nodes".into()));
        }
        let grid = Self {
            n,
            spacing,
            origin,
            shape,
            kinds,
            interior,
            boundary,
        };
        if !grid.interior_connected() {
            return Err(GeometryError::InvalidGrid("interior region is not connected".into()));
        }
        Ok(grid)
    }

    /// `nodes` equally spaced points on `[a, b]`; the endpoints are boundary.
    pub fn interval(a: T, b: T, nodes: usize) -> Result<Self, GeometryError> {
        if nodes < 3 || !(b > a) {
            return Err(GeometryError::InvalidGrid("interval needs a < b and >= 3 nodes".into()));
        }
        let dx = (b - a) / T::from_usize_lossy(nodes - 1);
        Self::from_predicate(1, dx, [a, T::zero()], [nodes, 1], |_, _| true)
    }

    /// Disk `|x| ≤ radius` sampled by `nodes × nodes` points on the bounding
    /// square (so the spacing is `2·radius/(nodes − 1)`).
    pub fn disk(radius: T, nodes: usize) -> Result<Self, GeometryError> {
        if nodes < 3 || !(radius > T::zero()) {
            return Err(GeometryError::InvalidGrid("disk needs radius > 0 and >= 3 nodes".into()));
        }
        let dx = T::two() * radius / T::from_usize_lossy(nodes - 1);
        let r2 = radius * radius * (T::one() + T::lit(1e-9));
        Self::from_predicate(2, dx, [-radius, -radius], [nodes, nodes], |i, j| {
            let x = -radius + dx * T::from_usize_lossy(i);
            let y = -radius + dx * T::from_usize_lossy(j);
            x * x + y * y <= r2
        })
    }

    /// Square `[-half, half]²` with `nodes` points per side.
    pub fn square(half: T, nodes: usize) -> Result<Self, GeometryError> {
        if nodes < 3 || !(half > T::zero()) {
            return Err(GeometryError::InvalidGrid("square needs half > 0 and >= 3 nodes".into()));
        }
        let dx = T::two() * half / T::from_usize_lossy(nodes - 1);
        Self::from_predicate(2, dx, [-half, -half], [nodes, nodes], |_, _| true)
    }

    fn interior_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([self.interior[0]]);
        seen[self.interior[0]] = true;
        let mut count = 0;
        while let Some(k) = queue.pop_front() {
            count += 1;
            for axis in 0..self.n {
                for nb in [k - self.stride(axis), k + self.stride(axis)] {
                    if !seen[nb] && self.kinds[nb] == NodeKind::Interior {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
        }
        count == self.interior.len()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn origin(&self) -> [T; 2] {
        self.origin
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    /// Total number of nodes in the index box.
    #[inline]
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    #[inline]
    pub fn kind(&self, k: usize) -> NodeKind {
        self.kinds[k]
    }

    /// Interior nodes in storage order.
    #[inline]
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    #[inline]
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Offset between neighbouring nodes along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.shape[0]
        }
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.shape[0], k / self.shape[0])
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.shape[0] + i
    }

    /// Physical coordinates; the second entry is zero for `n = 1`.
    #[inline]
    pub fn coords(&self, k: usize) -> [T; 2] {
        let (i, j) = self.ij(k);
        let x = self.origin[0] + self.spacing * T::from_usize_lossy(i);
        let y = if self.n == 1 {
            T::zero()
        } else {
            self.origin[1] + self.spacing * T::from_usize_lossy(j)
        };
        [x, y]
    }

    #[inline]
    pub fn radius_sq(&self, k: usize) -> T {
        let [x, y] = self.coords(k);
        x * x + y * y
    }

    pub fn in_domain(&self, k: usize) -> bool {
        self.kinds[k] != NodeKind::Outside
    }
}

/// Heights `w` on a grid at time `t`. Outside nodes hold NaN.
#[derive(Clone, Debug)]
pub struct GraphState<T> {
    pub grid: Arc<GraphGrid<T>>,
    pub w: Vec<T>,
    pub t: T,
}

impl<T: Real> GraphState<T> {
    /// Samples `profile(x)` at every domain node.
    pub fn from_fn(grid: Arc<GraphGrid<T>>, t: T, profile: impl Fn([T; 2]) -> T) -> Self {
        let w = (0..grid.len())
            .map(|k| {
                if grid.in_domain(k) {
                    profile(grid.coords(k))
                } else {
                    T::nan()
                }
            })
            .collect();
        Self { grid, w, t }
    }

    /// Checks that heights are finite on the domain.
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.w.len() != self.grid.len() {
            return Err(GeometryError::InvalidGrid(format!(
                "state has {} values for {} nodes",
                self.w.len(),
                self.grid.len()
            )));
        }
        for k in 0..self.w.len() {
            if self.grid.in_domain(k) && !self.w[k].is_finite() {
                return Err(GeometryError::NonFinite { node: k });
            }
        }
        Ok(())
    }

    /// Minimum and maximum of `w` over domain nodes.
    pub fn range(&self) -> (T, T) {
        (0..self.w.len())
            .filter(|&k| self.grid.in_domain(k))
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), k| {
                (lo.min(self.w[k]), hi.max(self.w[k]))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_mask_classifies_nodes() {
        let g = GraphGrid::<f64>::disk(0.5, 17).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        let centre = g.index(8, 8);
        assert_eq!(g.kind(centre), NodeKind::Interior);
        assert_eq!(g.kind(g.index(0, 8)), NodeKind::Boundary);
        assert_eq!(g.kind(g.index(0, 0)), NodeKind::Outside);
        for &k in g.interior() {
            let (i, j) = g.ij(k);
            for jj in j - 1..=j + 1 {
                for ii in i - 1..=i + 1 {
                    assert!(g.in_domain(g.index(ii, jj)));
                }
            }
        }
    }

    #[test]
    fn interval_endpoints_are_boundary() {
        let g = GraphGrid::<f64>::interval(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.boundary(), &[0, 4]);
        assert_eq!(g.interior(), &[1, 2, 3]);
        assert_eq!(g.coords(2), [0.0, 0.0]);
    }

    #[test]
    fn disconnected_interior_is_rejected() {
        let r = GraphGrid::<f64>::from_predicate(1, 0.1, [0.0, 0.0], [9, 1], |i, _| i != 4);
        assert!(matches!(r, Err(GeometryError::InvalidGrid(_))));
    }

    #[test]
    fn non_finite_heights_fail_validation() {
        let g = Arc::new(GraphGrid::<f64>::interval(0.0, 1.0, 4).unwrap());
        let mut s = GraphState::from_fn(g, 0.0, |x| x[0]);
        assert!(s.validate().is_ok());
        s.w[2] = f64::INFINITY;
        assert_eq!(s.validate(), Err(GeometryError::NonFinite { node: 2 }));
    }
}
